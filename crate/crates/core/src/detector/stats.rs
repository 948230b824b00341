/// Mean and standard deviation of the absolute correlation, the noise
/// floor detections are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStats {
    pub mean: f64,
    pub std: f64,
}

impl NoiseStats {
    /// Distance of `value` above the mean in standard deviations.
    pub fn score(&self, value: f64) -> f64 {
        if self.std > 0.0 {
            (value - self.mean) / self.std
        } else {
            0.0
        }
    }
}

/// Statistics of `|correlation|` with the largest `trim_fraction` of
/// values excluded, so the peaks being tested do not inflate the floor.
pub fn noise_stats(correlation: &[f64], trim_fraction: f64) -> NoiseStats {
    if correlation.is_empty() {
        return NoiseStats { mean: 0.0, std: 0.0 };
    }
    let mut mag: Vec<f64> = correlation.iter().map(|c| c.abs()).collect();
    let drop = ((trim_fraction.clamp(0.0, 1.0) * mag.len() as f64).floor() as usize).min(mag.len() - 1);
    let keep = mag.len() - drop;
    if drop > 0 {
        mag.select_nth_unstable_by(keep - 1, |a, b| a.total_cmp(b));
        mag.truncate(keep);
    }
    let n = mag.len() as f64;
    let mean = mag.iter().sum::<f64>() / n;
    let var = mag.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
    NoiseStats { mean, std: var.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn all_zero() {
        assert_eq!(noise_stats(&[0.0; 64], 0.01), NoiseStats { mean: 0.0, std: 0.0 });
        assert_eq!(noise_stats(&[], 0.01), NoiseStats { mean: 0.0, std: 0.0 });
    }

    #[test]
    fn half_normal_moments() {
        let s = noise_stats(&gaussian(200_000, 1), 0.0);
        let mu = (2.0 / std::f64::consts::PI).sqrt();
        let sd = (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        assert!((s.mean - mu).abs() / mu < 0.02, "{s:?}");
        assert!((s.std - sd).abs() / sd < 0.02, "{s:?}");
    }

    #[test]
    fn outlier_is_trimmed() {
        let base = gaussian(10_000, 2);
        let mut spiked = base.clone();
        spiked[5_000] = 1e6;
        let a = noise_stats(&base, 0.01);
        let b = noise_stats(&spiked, 0.01);
        assert!((a.mean - b.mean).abs() / a.mean < 0.01);
        assert!((a.std - b.std).abs() / a.std < 0.01);
    }
}
