use motorbeat::acoustics::add_white_noise;
use motorbeat::symbolgen::{
    cross_correlate, expand_seed, fixed_pwm_voltage, normalized_alignment, psd_profile, to_bipolar, ApplianceId, DutyEvent, MotorProfile,
    VpwmSymbol,
};
use motorbeat::AudioBuffer;
use proptest::prelude::*;

const FS: u32 = 24_000;

fn symbol(id: u16, l: f64) -> VpwmSymbol {
    VpwmSymbol::generate(ApplianceId(id), l, &MotorProfile::default()).unwrap()
}

#[test]
fn seed_expansion_is_pinned() {
    let mut a = expand_seed(ApplianceId(7));
    let mut b = expand_seed(ApplianceId(8));
    assert_eq!(a.next_u64(), 0x63cb_e1e4_5932_0dd7);
    assert_eq!(b.next_u64(), 0x9e56_51b0_ef95_3636);
    assert_eq!(expand_seed(ApplianceId(0)).next_u64(), 0xe220_a839_7b1d_cdaf);
}

#[test]
fn id_42_reference_symbol() {
    let s = symbol(42, 1.0);
    assert_eq!(s.pulse_count(), 810);
    assert!((s.length() - 1.001_485_231_458_538_5).abs() < 1e-12);
    assert!((s.periods()[0] - 0.001_612_347_318_157_735_3).abs() < 1e-15);
    assert!((s.periods()[1] - 0.000_739_865_589_315_380_3).abs() < 1e-15);
}

#[test]
fn invalid_profiles_and_durations() {
    assert!(MotorProfile::new(0.010, 0.002, 0.0005).is_err());
    assert!(MotorProfile::new(0.001, 0.0005, 0.002).is_err());
    assert!(VpwmSymbol::generate(ApplianceId(1), 0.0, &MotorProfile::default()).is_err());
    assert!(symbol(1, 0.1).render_voltage(&[], 1000).is_err());
    let late = DutyEvent { at: 5.0, new_duty: 0.4 };
    assert!(symbol(1, 0.1).render_voltage(&[late], FS).is_err());
}

#[test]
fn template_is_balanced_bipolar() {
    for id in [0u16, 9, 1234, 65535] {
        let t = symbol(id, 1.0).normalize_template(FS).unwrap();
        assert!(t.samples().iter().all(|&v| v == 1.0 || v == -1.0));
        assert_eq!(t.energy(), t.len() as f64);
        assert!(t.mean().abs() <= 2.0 / t.len() as f64);
    }
}

#[test]
fn duty_change_applies_from_the_next_pulse() {
    let s = symbol(17, 1.0);
    let v = s.render_voltage(&[DutyEvent { at: 0.5, new_duty: 0.75 }], FS).unwrap();
    let tail = v.slice(12_000, v.len());
    assert!((tail.mean() - 0.75).abs() < 0.01, "{}", tail.mean());
    let head = v.slice(0, 11_900);
    assert!((head.mean() - 0.5).abs() < 0.01);
}

#[test]
fn distinct_ids_barely_correlate() {
    for k in 0..5u16 {
        let a = symbol(100 + 2 * k, 1.0).normalize_template(FS).unwrap();
        let b = symbol(101 + 2 * k, 1.0).normalize_template(FS).unwrap();
        let c = cross_correlate(&a, &b.slice(0, b.len().min(a.len()))).unwrap();
        assert!(c[0].abs() / a.energy() < 0.1);
        assert_eq!(cross_correlate(&a, &a).unwrap()[0], a.energy());
    }
}

#[test]
fn thirty_percent_duty_correlates_at_point_six() {
    let s = symbol(5, 1.0);
    let v = s.clone().with_duty(0.3).unwrap().render_voltage(&[], FS).unwrap();
    let c = normalized_alignment(&to_bipolar(&v), &s.normalize_template(FS).unwrap()).unwrap();
    assert!((c - 0.6).abs() <= 0.02, "{c}");
}

#[test]
fn processing_gain_grows_with_root_length() {
    let snr_gain = |l: f64| {
        let t = symbol(61, l).normalize_template(FS).unwrap();
        let mut ratio = 0.0;
        for seed in 0..20 {
            let noise = add_white_noise(&AudioBuffer::zeros(t.len(), FS).unwrap(), 1.0, seed).unwrap();
            let n = cross_correlate(&noise, &t).unwrap()[0].abs();
            ratio += n * n;
        }
        t.energy() / (ratio / 20.0).sqrt()
    };
    let g = snr_gain(1.0) / snr_gain(0.25);
    assert!((g - 2.0).abs() < 0.5, "{g}");
}

#[test]
fn pwm_spectra() {
    let fixed = to_bipolar(&fixed_pwm_voltage(0.00125, 0.5, 4.0, FS).unwrap());
    let psd = psd_profile(&fixed, 0.1).unwrap();
    assert!((psd.peak_frequency() - 800.0).abs() <= 10.0);
    let vpwm = to_bipolar(&symbol(3, 4.0).render_voltage(&[], FS).unwrap());
    let floor = |a: &AudioBuffer| add_white_noise(a, a.power() * 1e-6, 1).unwrap();
    let fixed_db = psd_profile(&floor(&fixed), 0.1).unwrap().tonal_prominence_db();
    let vpwm_db = psd_profile(&floor(&vpwm), 0.1).unwrap().tonal_prominence_db();
    assert!(fixed_db - vpwm_db >= 10.0, "{fixed_db} vs {vpwm_db}");
    let noise = add_white_noise(&AudioBuffer::zeros(4 * FS as usize, FS).unwrap(), 1.0, 2).unwrap();
    assert!(psd_profile(&noise, 0.1).unwrap().tonal_prominence_db() < 3.0);
    assert!(psd_profile(&noise, 5.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periods_respect_the_profile(id in any::<u16>(), duration in 0.01f64..3.0) {
        let p = MotorProfile::default();
        let s = VpwmSymbol::generate(ApplianceId(id), duration, &p).unwrap();
        prop_assert!(s.periods().iter().all(|&t| t >= p.min_switch_period && t <= p.max_switch_period));
        prop_assert!(s.length() >= duration);
        prop_assert!(s.length() - duration < p.max_switch_period);
        let sum: f64 = s.periods().iter().sum();
        prop_assert!((sum - s.length()).abs() < 1e-9);
        prop_assert_eq!(s.clone(), VpwmSymbol::generate(ApplianceId(id), duration, &p).unwrap());
    }

    #[test]
    fn rendering_is_deterministic_and_binary(id in any::<u16>(), duty in 0.1f64..0.9) {
        let s = symbol(id, 0.2).with_duty(duty).unwrap();
        let a = s.render_voltage(&[], FS).unwrap();
        prop_assert!(a.samples().iter().all(|&v| v == 0.0 || v == 1.0));
        prop_assert_eq!(&a, &s.render_voltage(&[], FS).unwrap());
        prop_assert!((a.mean() - duty).abs() <= 1.0 / a.len() as f64 + 1e-12);
    }
}
