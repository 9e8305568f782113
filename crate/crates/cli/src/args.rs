//! Flag groups. Every flag that sets a scenario parameter carries the name
//! of the matching config key in kebab case, so a flag and a config file
//! entry always mean the same thing.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use kerrcat::scenarios::{CircuitSection, ScenarioConfig};
use kerrcat::units::{AngularRate, DecayRate};
use kerrcat::{Error, Result};

fn parse<T: std::str::FromStr<Err = Error>>(flag: &str, v: &str) -> Result<T> {
    v.parse().map_err(|e: Error| e.context(format!("--{flag}")))
}

/// Kerr-cat device and gate path.
#[derive(Args, Debug, Default)]
pub struct DeviceArgs {
    /// Kerr nonlinearity with a unit, e.g. "12.5mhz" (2π×MHz) or "78.54rad/us"
    #[arg(long, conflicts_with = "k_mhz")]
    pub kerr: Option<String>,
    /// Kerr nonlinearity in 2π×MHz (shorthand for --kerr <K>mhz)
    #[arg(long, value_name = "MHZ")]
    pub k_mhz: Option<f64>,
    /// Cat amplitude |α|
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fock truncation per mode
    #[arg(long)]
    pub dim: Option<usize>,
    /// Gate: not, hadamard or phase
    #[arg(long, visible_alias = "name")]
    pub gate: Option<String>,
    /// Gate time in μs
    #[arg(long)]
    pub t_us: Option<f64>,
    /// Time steps per gate
    #[arg(long)]
    pub steps: Option<usize>,
}

impl DeviceArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        if let Some(k) = &self.kerr {
            c.kerr = Some(parse::<AngularRate>("kerr", k)?);
        }
        if let Some(f) = self.k_mhz {
            c.kerr = Some(AngularRate::from_mhz(f));
        }
        if let Some(g) = &self.gate {
            c.gate = Some(parse("gate", g)?);
        }
        set(&mut c.alpha, self.alpha);
        set(&mut c.dim, self.dim);
        set(&mut c.t_us, self.t_us);
        set(&mut c.steps, self.steps);
        Ok(())
    }
}

fn set<T: Copy>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// Noise ensembles.
#[derive(Args, Debug, Default)]
pub struct NoiseArgs {
    /// Base RNG seed; run i uses seed + i
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo runs
    #[arg(long)]
    pub runs: Option<usize>,
    /// Signal-to-noise power ratio in dB
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Largest systematic error in the sweep
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Points in the systematic sweep
    #[arg(long)]
    pub delta_points: Option<usize>,
}

impl NoiseArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) {
        set(&mut c.seed, self.seed);
        set(&mut c.runs, self.runs);
        set(&mut c.snr_db, self.snr_db);
        set(&mut c.delta_max, self.delta_max);
        set(&mut c.delta_points, self.delta_points);
    }
}

/// Photon loss and dephasing.
#[derive(Args, Debug, Default)]
pub struct DecayArgs {
    /// Photon-loss rate, e.g. "0.05/us"
    #[arg(long)]
    pub kappa: Option<String>,
    /// Dephasing rate, e.g. "0.05/us"
    #[arg(long)]
    pub kappa_phi: Option<String>,
}

impl DecayArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        if let Some(k) = &self.kappa {
            c.kappa = Some(parse::<DecayRate>("kappa", k)?);
        }
        if let Some(k) = &self.kappa_phi {
            c.kappa_phi = Some(parse::<DecayRate>("kappa-phi", k)?);
        }
        Ok(())
    }
}

/// Decoherence grid.
#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// Upper end of both rate axes, e.g. "0.05/us"
    #[arg(long)]
    pub kappa_max: Option<String>,
    /// Points per rate axis
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl GridArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        if let Some(k) = &self.kappa_max {
            c.kappa_max = Some(parse::<DecayRate>("kappa-max", k)?);
        }
        set(&mut c.grid_points, self.grid_points);
        Ok(())
    }
}

/// Parameter sweep axes.
#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// Comma-separated cat amplitudes
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated Kerr values with units, e.g. "5mhz,12.5mhz"
    #[arg(long, value_delimiter = ',')]
    pub kerrs: Option<Vec<String>>,
}

impl SweepArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        if let Some(a) = &self.alphas {
            c.alphas = Some(a.clone());
        }
        if let Some(ks) = &self.kerrs {
            c.kerrs = Some(
                ks.iter()
                    .map(|k| parse("kerrs", k))
                    .collect::<Result<_>>()?,
            );
        }
        Ok(())
    }
}

/// Squeezing stage.
#[derive(Args, Debug, Default)]
pub struct SqueezeArgs {
    /// Squeezing parameter r
    #[arg(long)]
    pub squeeze_r: Option<f64>,
    /// Two-photon drive during squeezing, with a unit
    #[arg(long)]
    pub squeeze_eps2: Option<String>,
}

impl SqueezeArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        set(&mut c.squeeze_r, self.squeeze_r);
        if let Some(e) = &self.squeeze_eps2 {
            c.squeeze_eps2 = Some(parse::<AngularRate>("squeeze-eps2", e)?);
        }
        Ok(())
    }
}

/// Circuit parameters.
#[derive(Args, Debug, Default)]
pub struct CircuitArgs {
    /// Largest fractional fabrication error
    #[arg(long)]
    pub error_max: Option<f64>,
    /// JSON file holding the circuit section
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,
}

impl CircuitArgs {
    pub fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        set(&mut c.error_max, self.error_max);
        if let Some(path) = &self.circuit {
            let ctx = || format!("--circuit {}", path.display());
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(e.to_string()).context(ctx()))?;
            let section: CircuitSection = serde_json::from_str(&text)
                .map_err(|e| Error::Config(e.to_string()).context(ctx()))?;
            c.circuit = Some(section);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Input {
    Plus,
    Minus,
}

impl Input {
    pub fn coeffs(self) -> [kerrcat::C64; 2] {
        let (one, zero) = (kerrcat::C64::from(1.0), kerrcat::C64::from(0.0));
        match self {
            Input::Plus => [one, zero],
            Input::Minus => [zero, one],
        }
    }
}
