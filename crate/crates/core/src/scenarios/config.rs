use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitParams};
use crate::error::{Error, Result};
use crate::synth::Gate;
use crate::units::{AngularRate, DecayRate};

/// Version stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Table1,
    Fig1Bloch,
    Fig2Sweep,
    Fig2Waveforms,
    Fig3Populations,
    Fig4Cnot,
    Fig5Noise,
    Fig6Decoherence,
    SqueezePipeline,
    CircuitMap,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 10] = [
        ScenarioId::Table1,
        ScenarioId::Fig1Bloch,
        ScenarioId::Fig2Sweep,
        ScenarioId::Fig2Waveforms,
        ScenarioId::Fig3Populations,
        ScenarioId::Fig4Cnot,
        ScenarioId::Fig5Noise,
        ScenarioId::Fig6Decoherence,
        ScenarioId::SqueezePipeline,
        ScenarioId::CircuitMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Table1 => "table1",
            ScenarioId::Fig1Bloch => "fig1_bloch",
            ScenarioId::Fig2Sweep => "fig2_sweep",
            ScenarioId::Fig2Waveforms => "fig2_waveforms",
            ScenarioId::Fig3Populations => "fig3_populations",
            ScenarioId::Fig4Cnot => "fig4_cnot",
            ScenarioId::Fig5Noise => "fig5_noise",
            ScenarioId::Fig6Decoherence => "fig6_decoherence",
            ScenarioId::SqueezePipeline => "squeeze_pipeline",
            ScenarioId::CircuitMap => "circuit_map",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = ScenarioId::ALL.iter().map(|i| i.name()).collect();
                Error::Config(format!(
                    "unknown scenario {s:?}; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Circuit section of a config file; energies carry explicit units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub e_c: AngularRate,
    pub e_j: AngularRate,
    pub e_j_mod: AngularRate,
    #[serde(default = "one_squid")]
    pub n_squids: u32,
    #[serde(default)]
    pub v_p: f64,
    #[serde(default)]
    pub c_p: f64,
    pub omega_p: AngularRate,
    #[serde(default)]
    pub phi_p: f64,
    #[serde(default)]
    pub omega_2p: Option<AngularRate>,
    #[serde(default)]
    pub phi_2p: f64,
    #[serde(default = "unit_charge")]
    pub charge_unit: f64,
}

fn one_squid() -> u32 {
    1
}

fn unit_charge() -> f64 {
    1.0
}

impl CircuitSection {
    pub fn params(&self) -> CircuitParams {
        CircuitParams {
            e_c: self.e_c.rad_per_us(),
            e_j: self.e_j.rad_per_us(),
            e_j_mod: self.e_j_mod.rad_per_us(),
            n_squids: self.n_squids,
            v_p: self.v_p,
            c_p: self.c_p,
            omega_p: self.omega_p.rad_per_us(),
            phi_p: self.phi_p,
            omega_2p: self.omega_2p.map(|w| w.rad_per_us()),
            phi_2p: self.phi_2p,
            charge_unit: self.charge_unit,
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// One scenario invocation. Every field except `id` is an optional override
/// of the scenario's built-in default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub id: ScenarioId,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub kerr: Option<AngularRate>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub t_us: Option<f64>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub gate: Option<Gate>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub runs: Option<usize>,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub kappa: Option<DecayRate>,
    #[serde(default)]
    pub kappa_phi: Option<DecayRate>,
    #[serde(default)]
    pub kappa_max: Option<DecayRate>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub delta_max: Option<f64>,
    #[serde(default)]
    pub delta_points: Option<usize>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub kerrs: Option<Vec<AngularRate>>,
    #[serde(default)]
    pub squeeze_r: Option<f64>,
    #[serde(default)]
    pub squeeze_eps2: Option<AngularRate>,
    #[serde(default)]
    pub error_max: Option<f64>,
    #[serde(default)]
    pub circuit: Option<CircuitSection>,
}

impl ScenarioConfig {
    /// Every config key, in declaration order. Command-line flags mirror these.
    pub const KEYS: [&'static str; 24] = [
        "schema_version",
        "id",
        "out_dir",
        "kerr",
        "alpha",
        "t_us",
        "dim",
        "steps",
        "gate",
        "seed",
        "runs",
        "snr_db",
        "kappa",
        "kappa_phi",
        "kappa_max",
        "grid_points",
        "delta_max",
        "delta_points",
        "alphas",
        "kerrs",
        "squeeze_r",
        "squeeze_eps2",
        "error_max",
        "circuit",
    ];

    /// Config with all defaults.
    pub fn new(id: ScenarioId) -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            id,
            out_dir: None,
            kerr: None,
            alpha: None,
            t_us: None,
            dim: None,
            steps: None,
            gate: None,
            seed: None,
            runs: None,
            snr_db: None,
            kappa: None,
            kappa_phi: None,
            kappa_max: None,
            grid_points: None,
            delta_max: None,
            delta_points: None,
            alphas: None,
            kerrs: None,
            squeeze_r: None,
            squeeze_eps2: None,
            error_max: None,
            circuit: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                c.schema_version
            )));
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    /// Fills unset fields with the scenario defaults and validates them.
    pub fn resolve(&self) -> Result<Resolved> {
        let id = self.id;
        let kerr = self
            .kerr
            .map_or(AngularRate::from_mhz(12.5).rad_per_us(), |k| k.rad_per_us());
        let alpha = self.alpha.unwrap_or(0.5);
        let default_dim = match id {
            ScenarioId::Fig4Cnot => 15,
            ScenarioId::SqueezePipeline => 60,
            _ => 30,
        };
        let default_gate = match id {
            ScenarioId::Fig2Waveforms | ScenarioId::Fig2Sweep | ScenarioId::Fig4Cnot => Gate::Not,
            _ => Gate::Hadamard,
        };
        let r = Resolved {
            id,
            kerr,
            alpha,
            t_us: self.t_us.unwrap_or(1.0),
            dim: self.dim.unwrap_or(default_dim),
            steps: self.steps.unwrap_or(crate::propagate::DEFAULT_STEPS),
            gate: self.gate.unwrap_or(default_gate),
            seed: self.seed.unwrap_or(1),
            runs: self.runs.unwrap_or(50),
            snr_db: self.snr_db.unwrap_or(10.0),
            kappa: self.kappa.map_or(0.05, |k| k.per_us()),
            kappa_phi: self.kappa_phi.map_or(0.05, |k| k.per_us()),
            kappa_max: self.kappa_max.map_or(0.05, |k| k.per_us()),
            grid_points: self.grid_points.unwrap_or(6),
            delta_max: self.delta_max.unwrap_or(0.1),
            delta_points: self.delta_points.unwrap_or(21),
            alphas: self
                .alphas
                .clone()
                .unwrap_or_else(|| vec![0.3, 0.5, 0.8, 1.1]),
            kerrs: self.kerrs.as_ref().map_or_else(
                || {
                    vec![
                        AngularRate::from_mhz(5.0).rad_per_us(),
                        AngularRate::from_mhz(12.5).rad_per_us(),
                    ]
                },
                |v| v.iter().map(|k| k.rad_per_us()).collect(),
            ),
            squeeze_r: self.squeeze_r.unwrap_or(1.2),
            squeeze_eps2: self
                .squeeze_eps2
                .map_or(kerr * alpha * alpha, |e| e.rad_per_us()),
            error_max: self.error_max.unwrap_or(0.1),
            circuit: self
                .circuit
                .map_or_else(|| circuit::reference_circuit(kerr, alpha), |c| c.params()),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Fully specified scenario parameters (rates in rad/μs and 1/μs).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub id: ScenarioId,
    pub kerr: f64,
    pub alpha: f64,
    pub t_us: f64,
    pub dim: usize,
    pub steps: usize,
    pub gate: Gate,
    pub seed: u64,
    pub runs: usize,
    pub snr_db: f64,
    pub kappa: f64,
    pub kappa_phi: f64,
    pub kappa_max: f64,
    pub grid_points: usize,
    pub delta_max: f64,
    pub delta_points: usize,
    pub alphas: Vec<f64>,
    pub kerrs: Vec<f64>,
    pub squeeze_r: f64,
    pub squeeze_eps2: f64,
    pub error_max: f64,
    pub circuit: CircuitParams,
}

impl Resolved {
    /// The single-mode device at `kerr`, `alpha`, `dim`.
    pub fn device(&self) -> Result<crate::propagate::Device> {
        crate::propagate::Device::new(self.kerr, crate::C64::from(self.alpha), self.dim)
    }

    /// Path of the selected gate over `t_us`.
    pub fn spec(&self) -> Result<crate::synth::PathSpec> {
        crate::synth::PathSpec::for_gate(self.gate, self.t_us)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.kerr > 0.0) || self.kerrs.iter().any(|k| !(*k > 0.0)) {
            return bad("kerr must be positive");
        }
        if !(self.alpha > 0.0) || self.alphas.iter().any(|a| !(*a > 0.0)) {
            return bad("alpha must be positive");
        }
        if !(self.t_us > 0.0 && self.t_us.is_finite()) {
            return bad("t_us must be positive");
        }
        if self.dim < 2 || self.steps == 0 || self.runs == 0 {
            return bad("dim must be at least 2, steps and runs at least 1");
        }
        if self.grid_points < 2 || self.delta_points < 2 {
            return bad("grid_points and delta_points must be at least 2");
        }
        if !(self.delta_max >= 0.0 && self.delta_max < 1.0) {
            return bad("delta_max must lie in [0, 1)");
        }
        if !(self.error_max >= 0.0 && self.error_max < 0.5) {
            return bad("error_max must lie in [0, 0.5)");
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite");
        }
        if !(self.squeeze_r > 0.0 && self.squeeze_eps2 > 0.0) {
            return bad("squeeze_r and squeeze_eps2 must be positive");
        }
        if self.alphas.is_empty() || self.kerrs.is_empty() {
            return bad("alphas and kerrs must be nonempty");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.name()));
        }
        assert!("fig7".parse::<ScenarioId>().unwrap_err().is_config());
    }

    #[test]
    fn keys_match_serialized_fields() {
        let v = serde_json::to_value(ScenarioConfig::new(ScenarioId::Table1)).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = ScenarioConfig::KEYS.to_vec();
        let mut got = keys.clone();
        want.sort();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn unknown_keys_and_bare_numbers_are_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"id":"table1","bogus":1}"#)
            .unwrap_err()
            .is_config());
        assert!(
            ScenarioConfig::from_json(r#"{"id":"table1","kerr":"78.5"}"#)
                .unwrap_err()
                .is_config()
        );
        assert!(
            ScenarioConfig::from_json(r#"{"id":"table1","schema_version":9}"#)
                .unwrap_err()
                .is_config()
        );
        let c = ScenarioConfig::from_json(
            r#"{"id":"fig6_decoherence","kerr":"12.5mhz","kappa":"0.02/us"}"#,
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert!((r.kappa - 0.02).abs() < 1e-15);
        assert!((r.kerr - 78.539_816_339_744_83).abs() < 1e-12);
    }

    #[test]
    fn defaults_depend_on_scenario() {
        assert_eq!(
            ScenarioConfig::new(ScenarioId::Fig4Cnot)
                .resolve()
                .unwrap()
                .dim,
            15
        );
        assert_eq!(
            ScenarioConfig::new(ScenarioId::SqueezePipeline)
                .resolve()
                .unwrap()
                .dim,
            60
        );
        let r = ScenarioConfig::new(ScenarioId::SqueezePipeline)
            .resolve()
            .unwrap();
        assert!((r.squeeze_eps2 - std::f64::consts::TAU * 3.125).abs() < 1e-12);
    }
}
