use std::f64::consts::PI;

use kerrcat::gates;
use kerrcat::noise::{self, Channel, NoiseConfig, NoiseKind};
use kerrcat::propagate::{Device, PropagationOptions};
use kerrcat::synth::{DriveSource, EffectiveDrive, Gate, PathSpec};
use kerrcat::{Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

fn tone(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (2.0 * PI * 3.0 * j as f64 / n as f64).sin() + 0.2)
        .collect()
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

fn snr_db(signal: &[f64], noisy: &[f64]) -> f64 {
    let noise: Vec<f64> = noisy.iter().zip(signal).map(|(a, b)| a - b).collect();
    10.0 * (power(signal) / power(&noise)).log10()
}

#[test]
fn white_noise_hits_the_requested_snr() {
    let s = tone(40_000);
    for target in [0.0, 10.0, 20.0] {
        let out = noise::add_awgn(&s, target, 7).unwrap();
        assert!((snr_db(&s, &out) - target).abs() < 0.1, "{target}");
    }
}

#[test]
fn pink_noise_has_exact_power_and_unit_slope() {
    let s = tone(4096);
    let out = noise::add_pink(&s, 10.0, 3).unwrap();
    assert!((snr_db(&s, &out) - 10.0).abs() < 1e-9);

    // averaged periodogram, least-squares slope of log P against log f
    let n = 4096;
    let mut psd = vec![0.0; n / 2];
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    for seed in 0..40 {
        let x = noise::pink_noise(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
        fft.process(&mut buf);
        for k in 1..n / 2 {
            psd[k] += buf[k].norm_sqr();
        }
    }
    let pts: Vec<(f64, f64)> = (1..n / 2).map(|k| ((k as f64).ln(), psd[k].ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = cov / var;
    assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn noise_is_reproducible_from_the_seed() {
    let s = tone(1000);
    assert_eq!(
        noise::add_awgn(&s, 10.0, 5).unwrap(),
        noise::add_awgn(&s, 10.0, 5).unwrap()
    );
    assert_ne!(
        noise::add_awgn(&s, 10.0, 5).unwrap(),
        noise::add_awgn(&s, 10.0, 6).unwrap()
    );
    assert_eq!(
        noise::add_pink(&s, 10.0, 5).unwrap(),
        noise::add_pink(&s, 10.0, 5).unwrap()
    );
}

#[test]
fn silent_signals_have_no_snr() {
    let z = vec![0.0; 64];
    assert!(matches!(
        noise::add_awgn(&z, 10.0, 1),
        Err(Error::UndefinedSnr(_))
    ));
    assert!(matches!(
        noise::add_pink(&z, 10.0, 1),
        Err(Error::UndefinedSnr(_))
    ));
}

fn small_device() -> Device {
    Device::new(2.0 * PI * 12.5, C64::from(0.5), 20).unwrap()
}

#[test]
fn ensembles_are_deterministic_and_seeded_per_run() {
    let dev = small_device();
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0).unwrap();
    let cfg = NoiseConfig::additive(NoiseKind::Awgn, 10.0, 40);
    let opts = PropagationOptions::default();
    let a = noise::monte_carlo(&dev, &spec, &cfg, 4, 4000, &opts).unwrap();
    let b = noise::monte_carlo(&dev, &spec, &cfg, 4, 4000, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
        vec![40, 41, 42, 43]
    );
    assert_eq!(a.failed, 0);
    let inf = a.infidelities();
    let mean = inf.iter().sum::<f64>() / inf.len() as f64;
    assert!((a.mean - mean).abs() < 1e-15);
    assert!(a.min <= a.mean && a.mean <= a.max);

    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("run,seed,infidelity\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn zero_systematic_error_reproduces_the_clean_gate() {
    let dev = small_device();
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0).unwrap();
    let opts = PropagationOptions::default();
    let sampled = DriveSource::Sampled(EffectiveDrive::sample(&spec, 4000).unwrap());
    let clean = gates::single_qubit_gate(&dev, &spec, sampled, 4000, &opts).unwrap();
    let analytic =
        gates::single_qubit_gate(&dev, &spec, DriveSource::Analytic(spec), 4000, &opts).unwrap();
    let sweep =
        noise::systematic_sweep(&dev, &spec, Channel::Z, &[-0.05, 0.0, 0.05], 4000, &opts).unwrap();
    assert_eq!(sweep[1].1, clean.fidelity);
    // sampling the drive on the step grid costs little against the analytic drive
    assert!(
        (clean.fidelity - analytic.fidelity).abs() < 1e-6,
        "{} {}",
        clean.fidelity,
        analytic.fidelity
    );
    assert!(sweep[0].1 < sweep[1].1 && sweep[2].1 < sweep[1].1);
}

#[test]
fn noise_config_json_is_strict() {
    let ok: NoiseConfig =
        serde_json::from_str(r#"{"kind": "pink", "snr_db": 12.0, "seed": 3}"#).unwrap();
    assert_eq!(ok.kind, NoiseKind::Pink);
    assert_eq!(ok.channels.len(), 3);
    assert!(serde_json::from_str::<NoiseConfig>(r#"{"kind": "pink", "snr": 12.0}"#).is_err());
    assert!("brown".parse::<NoiseKind>().is_err());
}
