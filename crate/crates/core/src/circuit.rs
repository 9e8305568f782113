//! Map from superconducting-circuit parameters to gate-level parameters, and
//! first-order propagation of fabrication errors.
//!
//! All energies and frequencies are angular rates in rad/μs. The charge drive
//! `ε = −i E_C C_p V_p / (2e) · e^{−iφ_p}` needs `C_p V_p / e` in a
//! consistent unit; the caller supplies `charge_unit` (the value of `e` in
//! the units of `C_p V_p`), which defaults to 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircuitParams {
    /// Charging energy `E_C`.
    pub e_c: f64,
    /// Josephson energy `E_J` per junction array.
    pub e_j: f64,
    /// Flux-modulation amplitude `Ẽ_J`.
    pub e_j_mod: f64,
    /// SQUID count `N`.
    pub n_squids: u32,
    /// Gate-voltage amplitude `V_p`.
    pub v_p: f64,
    /// Gate capacitance `C_p`.
    pub c_p: f64,
    /// Charge drive frequency `ω_p`.
    pub omega_p: f64,
    /// Charge drive phase `φ_p`.
    pub phi_p: f64,
    /// Flux-modulation frequency; must equal `2ω_p` when given.
    pub omega_2p: Option<f64>,
    /// Flux-modulation phase `φ_2p = −2ξ`.
    pub phi_2p: f64,
    pub charge_unit: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("e_c", self.e_c),
            ("e_j", self.e_j),
            ("e_j_mod", self.e_j_mod),
            ("omega_p", self.omega_p),
            ("charge_unit", self.charge_unit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.n_squids == 0 {
            return Err(Error::InvalidParameter(
                "n_squids must be at least 1".into(),
            ));
        }
        if !(self.v_p.is_finite()
            && self.c_p.is_finite()
            && self.phi_p.is_finite()
            && self.phi_2p.is_finite())
        {
            return Err(Error::InvalidParameter(
                "drive parameters must be finite".into(),
            ));
        }
        if let Some(w2) = self.omega_2p {
            if (w2 - 2.0 * self.omega_p).abs() > 1e-9 * w2.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "omega_2p = {w2} must equal 2 omega_p = {}",
                    2.0 * self.omega_p
                )));
            }
        }
        Ok(())
    }

    fn n(&self) -> f64 {
        self.n_squids as f64
    }

    /// Zero-point charge `n₀ = [E_J/(32 N E_C)]^{1/4}`.
    pub fn n_zpf(&self) -> f64 {
        (self.e_j / (32.0 * self.n() * self.e_c)).powf(0.25)
    }

    /// Zero-point phase `φ₀ = 1/(2n₀)`.
    pub fn phi_zpf(&self) -> f64 {
        0.5 / self.n_zpf()
    }
}

/// Gate-level parameters of the driven Kerr resonator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub omega_c: f64,
    pub kerr: f64,
    pub eps2: f64,
    /// Detuning `χ = ω_c − ω_p`.
    pub chi: f64,
    pub eps: C64,
    /// Pump phase `ξ = −φ_2p/2`.
    pub xi: f64,
    /// `|α| = √(ε₂/K)`.
    pub alpha: f64,
}

/// `ε = −i E_C C_p V_p / (2e) · e^{−iφ_p}`.
pub fn charge_drive(e_c: f64, c_p: f64, v_p: f64, charge_unit: f64, phi_p: f64) -> C64 {
    C64::new(0.0, -1.0) * C64::from_polar(e_c * c_p * v_p / (2.0 * charge_unit), -phi_p)
}

/// `ω_c = √(8E_C E_J/N)`, `K = E_C/2N²`, `ε₂ = ω_c Ẽ_J/8E_J`.
pub fn effective_params(cp: &CircuitParams) -> Result<EffectiveParams> {
    cp.validate()?;
    let n = cp.n();
    let omega_c = (8.0 * cp.e_c * cp.e_j / n).sqrt();
    let kerr = cp.e_c / (2.0 * n * n);
    let eps2 = omega_c * cp.e_j_mod / (8.0 * cp.e_j);
    Ok(EffectiveParams {
        omega_c,
        kerr,
        eps2,
        chi: omega_c - cp.omega_p,
        eps: charge_drive(cp.e_c, cp.c_p, cp.v_p, cp.charge_unit, cp.phi_p),
        xi: -0.5 * cp.phi_2p,
        alpha: (eps2 / kerr).sqrt(),
    })
}

/// Circuit quantities recovered from gate-level parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Inversion {
    pub e_c: f64,
    pub e_j: f64,
    /// `Ẽ_J / E_J = 8ε₂/ω_c`.
    pub e_j_mod_ratio: f64,
    pub omega_p: f64,
}

pub fn invert(ep: &EffectiveParams, n_squids: u32) -> Result<Inversion> {
    if n_squids == 0 {
        return Err(Error::InvalidParameter(
            "n_squids must be at least 1".into(),
        ));
    }
    if !(ep.kerr > 0.0 && ep.omega_c > 0.0) {
        return Err(Error::InvalidParameter(
            "kerr and omega_c must be positive".into(),
        ));
    }
    let n = n_squids as f64;
    let e_c = 2.0 * n * n * ep.kerr;
    Ok(Inversion {
        e_c,
        e_j: n * ep.omega_c * ep.omega_c / (8.0 * e_c),
        e_j_mod_ratio: 8.0 * ep.eps2 / ep.omega_c,
        omega_p: ep.omega_c - ep.chi,
    })
}

/// First-order shifts of the gate parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub d_omega_c: f64,
    pub d_k: f64,
    pub d_eps2: f64,
    /// `δε/ε`.
    pub d_eps_fraction: f64,
    /// `−(α/4)(2δE_C/E_C − δE_J/E_J)`, as commonly quoted.
    pub d_alpha: f64,
    /// `−(α/4)(δE_C/E_C + δE_J/E_J)`, the shift implied by `δK` and `δε₂`
    /// through `α = √(ε₂/K)`.
    pub d_alpha_resolved: f64,
}

/// Propagates fractional errors `δE_C/E_C`, `δE_J/E_J`, `δV_p/V_p`
/// (with `Ẽ_J` held fixed).
pub fn error_propagation(
    cp: &CircuitParams,
    d_ec: f64,
    d_ej: f64,
    d_vp: f64,
) -> Result<ErrorBudget> {
    for (name, d) in [("d_ec", d_ec), ("d_ej", d_ej), ("d_vp", d_vp)] {
        if !(d.abs() < 0.5) {
            return Err(Error::Domain(format!(
                "{name} = {d} is outside the first-order range |δ| < 0.5"
            )));
        }
    }
    let ep = effective_params(cp)?;
    Ok(ErrorBudget {
        d_omega_c: 0.5 * ep.omega_c * (d_ej + d_ec),
        d_k: ep.kerr * d_ec,
        d_eps2: 0.5 * ep.eps2 * (d_ec - d_ej),
        d_eps_fraction: d_ec + d_vp,
        d_alpha: -0.25 * ep.alpha * (2.0 * d_ec - d_ej),
        d_alpha_resolved: -0.25 * ep.alpha * (d_ec + d_ej),
    })
}

/// `1 − |⟨α + δα|α⟩|²` from truncated coherent states.
pub fn amplitude_infidelity(alpha: f64, d_alpha: f64, space: FockSpace) -> Result<f64> {
    let a = fock::coherent_state(C64::from(alpha), space)?;
    let b = fock::coherent_state(C64::from(alpha + d_alpha), space)?;
    Ok(1.0 - a.inner(&b)?.norm_sqr())
}

/// A single-SQUID circuit realizing Kerr `kerr` and amplitude `alpha` with the
/// resonator at `2π×6 GHz`, driven on resonance.
pub fn reference_circuit(kerr: f64, alpha: f64) -> CircuitParams {
    let e_c = 2.0 * kerr;
    let omega_c = std::f64::consts::TAU * 6000.0;
    let e_j = omega_c * omega_c / (8.0 * e_c);
    let eps2 = kerr * alpha * alpha;
    CircuitParams {
        e_c,
        e_j,
        e_j_mod: 8.0 * eps2 * e_j / omega_c,
        n_squids: 1,
        v_p: 0.0,
        c_p: 0.0,
        omega_p: omega_c,
        phi_p: 0.0,
        omega_2p: Some(2.0 * omega_c),
        phi_2p: 0.0,
        charge_unit: 1.0,
    }
}
