//! Control-noise injection on the effective drive and Monte Carlo ensembles.
//!
//! Noise acts on the sampled `Ω` channels; the physical controls are then
//! re-synthesized from the perturbed drive, so every perturbation passes
//! through the same control map as the clean pulse.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::propagate::{Device, PropagationOptions};
use crate::synth::{DriveSource, EffectiveDrive, PathSpec};

/// SNR values above this are treated as noiseless.
pub const MAX_SNR_DB: f64 = 300.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Systematic,
    Awgn,
    Pink,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "systematic" => Ok(NoiseKind::Systematic),
            "awgn" | "white" => Ok(NoiseKind::Awgn),
            "pink" | "1/f" => Ok(NoiseKind::Pink),
            _ => Err(Error::Config(format!(
                "unknown noise kind {s:?} (systematic, awgn, pink)"
            ))),
        }
    }
}

/// Drive channel of `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    X,
    Y,
    Z,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::X, Channel::Y, Channel::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "omega_x" => Ok(Channel::X),
            "y" | "omega_y" => Ok(Channel::Y),
            "z" | "omega_z" => Ok(Channel::Z),
            _ => Err(Error::Config(format!("unknown channel {s:?} (x, y, z)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Fractional scale errors `δ_k` for systematic runs.
    #[serde(default)]
    pub delta: [f64; 3],
    /// Signal-to-noise power ratio in dB.
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default = "default_channels")]
    pub channels: Vec<Channel>,
    #[serde(default)]
    pub seed: u64,
}

fn default_snr() -> f64 {
    10.0
}

fn default_channels() -> Vec<Channel> {
    Channel::ALL.to_vec()
}

impl NoiseConfig {
    pub fn systematic(delta: [f64; 3]) -> Self {
        NoiseConfig {
            kind: NoiseKind::Systematic,
            delta,
            snr_db: default_snr(),
            channels: default_channels(),
            seed: 0,
        }
    }

    pub fn additive(kind: NoiseKind, snr_db: f64, seed: u64) -> Self {
        NoiseConfig {
            kind,
            delta: [0.0; 3],
            snr_db,
            channels: default_channels(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::Config("noise needs at least one channel".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!(
                "snr_db must be finite, got {}",
                self.snr_db
            )));
        }
        if self.delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::Config("delta must be finite".into()));
        }
        Ok(())
    }

    /// Perturbed copy of `drive` for the run seeded with `seed`.
    pub fn perturb(&self, drive: &EffectiveDrive, seed: u64) -> Result<EffectiveDrive> {
        self.validate()?;
        match self.kind {
            NoiseKind::Systematic => Ok(apply_systematic(drive, self.delta)),
            NoiseKind::Awgn | NoiseKind::Pink => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = drive.clone();
                for &c in &self.channels {
                    let signal = out.channel(c.index()).to_vec();
                    let noisy = match self.kind {
                        NoiseKind::Awgn => awgn_with(&signal, self.snr_db, &mut rng)?,
                        _ => pink_with(&signal, self.snr_db, &mut rng)?,
                    };
                    *out.channel_mut(c.index()) = noisy;
                }
                Ok(out)
            }
        }
    }
}

/// `Ω_k → (1 + δ_k) Ω_k`.
pub fn apply_systematic(drive: &EffectiveDrive, delta: [f64; 3]) -> EffectiveDrive {
    let mut out = drive.clone();
    for (k, d) in delta.iter().enumerate() {
        for x in out.channel_mut(k).iter_mut() {
            *x *= 1.0 + d;
        }
    }
    out
}

fn signal_power(signal: &[f64]) -> Result<f64> {
    let p = signal.iter().map(|x| x * x).sum::<f64>() / signal.len().max(1) as f64;
    if p == 0.0 || signal.is_empty() {
        return Err(Error::UndefinedSnr("signal has zero power".into()));
    }
    Ok(p)
}

fn noise_power(signal: &[f64], snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() && snr_db < 0.0 {
        return Err(Error::InvalidParameter("snr_db must not be -inf".into()));
    }
    Ok(signal_power(signal)? / 10f64.powf(snr_db.min(MAX_SNR_DB) / 10.0))
}

/// Adds white Gaussian noise at `snr_db` (dB against measured signal power).
pub fn add_awgn(signal: &[f64], snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    awgn_with(signal, snr_db, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn awgn_with(signal: &[f64], snr_db: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let sigma = noise_power(signal, snr_db)?.sqrt();
    Ok(signal
        .iter()
        .map(|x| {
            let g: f64 = StandardNormal.sample(rng);
            x + sigma * g
        })
        .collect())
}

/// Adds 1/f noise at `snr_db`: white Gaussian noise shaped by `f^{-1/2}`
/// over `[1/T, Nyquist]` with the DC bin removed, rescaled to the exact
/// requested power.
pub fn add_pink(signal: &[f64], snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    pink_with(signal, snr_db, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn pink_with(signal: &[f64], snr_db: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let target = noise_power(signal, snr_db)?;
    let noise = pink_noise(signal.len(), rng);
    let p = noise.iter().map(|x| x * x).sum::<f64>() / noise.len() as f64;
    if p == 0.0 {
        return Err(Error::UndefinedSnr(
            "signal too short for 1/f shaping".into(),
        ));
    }
    let scale = (target / p).sqrt();
    Ok(signal
        .iter()
        .zip(&noise)
        .map(|(s, w)| s + scale * w)
        .collect())
}

/// Unit-less 1/f sequence of length `n` (arbitrary power).
pub fn pink_noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|_| Complex::new(StandardNormal.sample(rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for (k, z) in buf.iter_mut().enumerate().skip(1) {
        // bin k and n−k share |f| = min(k, n−k)/T
        let f = k.min(n - k) as f64;
        *z /= f.sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// One Monte Carlo sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub infidelity: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub runs: Vec<RunRecord>,
    /// Requested run count.
    pub count: usize,
    pub failed: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl EnsembleStats {
    pub fn from_runs(runs: Vec<RunRecord>) -> Self {
        let ok: Vec<f64> = runs.iter().filter_map(|r| r.infidelity).collect();
        let (mean, min, max) = if ok.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (
                ok.iter().sum::<f64>() / ok.len() as f64,
                ok.iter().copied().fold(f64::INFINITY, f64::min),
                ok.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        EnsembleStats {
            count: runs.len(),
            failed: runs.len() - ok.len(),
            runs,
            mean,
            min,
            max,
        }
    }

    /// Infidelities of the successful runs, in run order.
    pub fn infidelities(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.infidelity).collect()
    }

    /// `run,seed,infidelity`; failed runs leave the last field empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["run", "seed", "infidelity"])?;
        for r in &self.runs {
            let inf = r
                .infidelity
                .map(|x| format!("{x:.14e}"))
                .unwrap_or_default();
            out.write_record([r.run.to_string(), r.seed.to_string(), inf])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Runs `n_runs` noisy single-qubit gates; run `i` uses seed `config.seed + i`.
/// Runs execute in parallel on the current rayon pool; results do not depend
/// on scheduling order.
pub fn monte_carlo(
    device: &Device,
    spec: &PathSpec,
    config: &NoiseConfig,
    n_runs: usize,
    n_steps: usize,
    opts: &PropagationOptions,
) -> Result<EnsembleStats> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    config.validate()?;
    let clean = EffectiveDrive::sample(spec, n_steps)?;
    let runs: Vec<RunRecord> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i as u64);
            let outcome = config.perturb(&clean, seed).and_then(|drive| {
                gates::single_qubit_gate(device, spec, DriveSource::Sampled(drive), n_steps, opts)
            });
            match outcome {
                Ok(o) => RunRecord {
                    run: i,
                    seed,
                    infidelity: Some(o.infidelity()),
                    error: None,
                },
                Err(e) => {
                    log::warn!("noise run {i} (seed {seed}) failed: {e}");
                    RunRecord {
                        run: i,
                        seed,
                        infidelity: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(EnsembleStats::from_runs(runs))
}

/// Average fidelity against `δ` for a systematic error on one channel.
pub fn systematic_sweep(
    device: &Device,
    spec: &PathSpec,
    channel: Channel,
    deltas: &[f64],
    n_steps: usize,
    opts: &PropagationOptions,
) -> Result<Vec<(f64, f64)>> {
    let clean = EffectiveDrive::sample(spec, n_steps)?;
    deltas
        .par_iter()
        .map(|&d| {
            let mut delta = [0.0; 3];
            delta[channel.index()] = d;
            let drive = apply_systematic(&clean, delta);
            let o =
                gates::single_qubit_gate(device, spec, DriveSource::Sampled(drive), n_steps, opts)?;
            Ok((d, o.fidelity))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize) -> Vec<f64> {
        (0..n).map(|j| (j as f64 * 0.01).sin() + 0.3).collect()
    }

    #[test]
    fn systematic_zero_is_identity() {
        let spec = PathSpec::for_gate(crate::synth::Gate::Hadamard, 1.0).unwrap();
        let d = EffectiveDrive::sample(&spec, 100).unwrap();
        assert_eq!(apply_systematic(&d, [0.0; 3]), d);
        let s = apply_systematic(&d, [0.1, 0.0, -0.2]);
        assert_eq!(s.channel(1), d.channel(1));
        assert!((s.channel(0)[40] - 1.1 * d.channel(0)[40]).abs() < 1e-15);
    }

    #[test]
    fn capped_snr_is_noiseless() {
        let s = tone(500);
        for out in [
            add_awgn(&s, 1e9, 1).unwrap(),
            add_pink(&s, f64::INFINITY, 1).unwrap(),
        ] {
            assert!(s.iter().zip(&out).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_signal_is_rejected() {
        let z = vec![0.0; 10];
        assert!(matches!(add_awgn(&z, 10.0, 0), Err(Error::UndefinedSnr(_))));
        assert!(matches!(add_pink(&z, 10.0, 0), Err(Error::UndefinedSnr(_))));
    }

    #[test]
    fn seeding_is_deterministic() {
        let s = tone(300);
        assert_eq!(
            add_awgn(&s, 10.0, 9).unwrap(),
            add_awgn(&s, 10.0, 9).unwrap()
        );
        assert_ne!(
            add_awgn(&s, 10.0, 9).unwrap(),
            add_awgn(&s, 10.0, 10).unwrap()
        );
        assert_eq!(
            add_pink(&s, 10.0, 9).unwrap(),
            add_pink(&s, 10.0, 9).unwrap()
        );
    }

    #[test]
    fn config_parsing() {
        let c: NoiseConfig =
            serde_json::from_str(r#"{"kind":"awgn","snr_db":10,"seed":3}"#).unwrap();
        assert_eq!(c.kind, NoiseKind::Awgn);
        assert_eq!(c.channels.len(), 3);
        assert!(serde_json::from_str::<NoiseConfig>(r#"{"kind":"awgn","bogus":1}"#).is_err());
        let mut bad = c.clone();
        bad.channels.clear();
        assert!(bad.validate().is_err());
    }
}
