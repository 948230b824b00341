use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One measured value of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Cell coordinates as `(name, value)` pairs, in grid order.
    pub params: Vec<(String, String)>,
    pub metric: String,
    pub value: f64,
    /// 95% interval, when the metric is a proportion.
    pub ci: Option<(f64, f64)>,
}

/// Experiment output: rows in deterministic cell-then-metric order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(experiment: &str, seed: u64, trials: usize) -> Self {
        Self { experiment: experiment.to_string(), seed, trials, rows: Vec::new() }
    }

    pub fn push(&mut self, params: &[(&str, String)], metric: &str, value: f64, ci: Option<(f64, f64)>) {
        self.rows.push(ReportRow {
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            metric: metric.to_string(),
            value,
            ci,
        });
    }

    /// Proportion `hits / total` with its Wilson interval.
    pub fn push_rate(&mut self, params: &[(&str, String)], metric: &str, hits: usize, total: usize) {
        let (p, ci) = wilson(hits, total);
        self.push(params, metric, p, Some(ci));
    }

    /// First row matching the metric and every given parameter.
    pub fn value(&self, metric: &str, params: &[(&str, &str)]) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && params.iter().all(|(k, v)| r.params.iter().any(|(rk, rv)| rk == k && rv == v)))
            .map(|r| r.value)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(["experiment", "params", "metric", "value", "ci_low", "ci_high"]).map_err(csv_err)?;
        for r in &self.rows {
            let params = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            let (lo, hi) = r.ci.map_or((String::new(), String::new()), |(l, h)| (fmt(l), fmt(h)));
            w.write_record([self.experiment.as_str(), &params, &r.metric, &fmt(r.value), &lo, &hi]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let params: serde_json::Map<String, serde_json::Value> =
                    r.params.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
                serde_json::json!({
                    "params": params,
                    "metric": r.metric,
                    "value": round6(r.value),
                    "ci_low": r.ci.map(|c| round6(c.0)),
                    "ci_high": r.ci.map(|c| round6(c.1)),
                })
            })
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(format!("json: {e}")))
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        v.to_string()
    }
}

fn round6(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!((v * 1e6).round() / 1e6)
    } else {
        serde_json::Value::Null
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson(hits: usize, total: usize) -> (f64, (f64, f64)) {
    if total == 0 {
        return (f64::NAN, (0.0, 1.0));
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z = 1.959_963_984_540_054_f64;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits >= total { 1.0 } else { (centre + half).min(1.0) };
    (p, (lo, hi))
}
