//! Invariant eigenvectors and the Lewis-Riesenfeld residual check.

use crate::error::{Error, Result};
use crate::fock::{self, CatFrame};
use crate::linalg::{CMatrix, C64, I};

use super::{path_eval, zeta_of, PathSpec, PulseSchedule};

/// `ζ(t)` and the eigenvectors `φ±` of `ζ·σ` in the `(C+, C−)` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantState {
    pub zeta: [f64; 3],
    pub phi_plus: [C64; 2],
    pub phi_minus: [C64; 2],
}

impl InvariantState {
    /// `φ+ = (cos μ/2, i e^{−iη} sin μ/2)`, `φ− = (sin μ/2, −i e^{−iη} cos μ/2)`.
    pub fn at(spec: &PathSpec, t: f64) -> Result<Self> {
        let p = path_eval(t, spec)?;
        Ok(Self::from_angles(p.mu, p.eta))
    }

    pub fn from_angles(mu: f64, eta: f64) -> Self {
        let (s, c) = (0.5 * mu).sin_cos();
        let ph = I * C64::from_polar(1.0, -eta);
        InvariantState {
            zeta: zeta_of(mu, eta),
            phi_plus: [C64::from(c), ph * s],
            phi_minus: [C64::from(s), -ph * c],
        }
    }
}

fn zeta_dot_sigma(z: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from(z[2]),
            C64::new(z[0], -z[1]),
            C64::new(z[0], z[1]),
            C64::from(-z[2]),
        ],
    )
}

/// Max over interior grid points of `‖dI/dt − i[I, h(t)]‖_F`, where
/// `I = ζ·σ`, `dI/dt` is a centered difference on the schedule grid and
/// `h` is the traceless part of the schedule's controls projected onto the
/// cat pair.
pub fn verify_invariant(
    spec: &PathSpec,
    schedule: &PulseSchedule,
    frame: &CatFrame,
) -> Result<f64> {
    if schedule.is_two_qubit() {
        return Err(Error::InvalidParameter(
            "verify_invariant needs a single-qubit schedule".into(),
        ));
    }
    let grid = schedule.grid();
    if grid.len() < 3 {
        return Err(Error::InvalidParameter(
            "need at least three grid points".into(),
        ));
    }
    let a = fock::ladder(frame.space())?.into_matrix();
    let b = frame.basis_matrix();
    let bd = b.adjoint();
    let pa = &bd * &a * &b;
    let pad = &bd * a.adjoint() * &b;
    let pn = &bd * (a.adjoint() * &a) * &b;
    let zeta = |t: f64| -> Result<CMatrix> { Ok(zeta_dot_sigma(spec.zeta(t)?)) };

    let mut worst = 0.0f64;
    for j in 1..grid.len() - 1 {
        let c = schedule.single_at(j).expect("single-qubit schedule");
        let mut h = &pn * C64::from(c.chi) + &pad * c.eps + &pa * c.eps.conj();
        let shift = h.trace() / C64::from(2.0);
        h -= CMatrix::identity(2, 2) * shift;
        let inv = zeta(grid[j])?;
        let d_inv =
            (zeta(grid[j + 1])? - zeta(grid[j - 1])?) / C64::from(grid[j + 1] - grid[j - 1]);
        let comm = &inv * &h - &h * &inv;
        let r = (d_inv - comm * I).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use crate::synth::{effective_drive, single_qubit_controls, Gate};
    use std::f64::consts::PI;

    #[test]
    fn eigenvectors_are_orthonormal_and_match_zeta() {
        for &(mu, eta) in &[(0.3, 1.1), (PI / 2.0, PI / 2.0), (2.9, -0.4)] {
            let s = InvariantState::from_angles(mu, eta);
            let m = zeta_dot_sigma(s.zeta);
            for (phi, ev) in [(s.phi_plus, 1.0), (s.phi_minus, -1.0)] {
                let v = crate::linalg::CVector::from_row_slice(&phi);
                assert!(((&m * &v) - &v * C64::from(ev)).norm() < 1e-14);
                assert!((v.norm() - 1.0).abs() < 1e-15);
            }
            let ip = s.phi_plus[0].conj() * s.phi_minus[0] + s.phi_plus[1].conj() * s.phi_minus[1];
            assert!(ip.norm() < 1e-15);
        }
        let s = InvariantState::from_angles(PI / 2.0, PI / 2.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.phi_plus[0] - C64::from(h)).norm() < 1e-15);
        assert!((s.phi_plus[1] - C64::from(h)).norm() < 1e-15);
    }

    #[test]
    fn no_dynamical_phase_pointwise() {
        for gate in Gate::ALL {
            let spec = PathSpec::for_gate(gate, 1.0).unwrap();
            for k in 0..100 {
                let t = (k as f64 + 0.37) / 100.0;
                let o = effective_drive(t, &spec).unwrap();
                let s = InvariantState::at(&spec, t).unwrap();
                let z = s.zeta;
                assert!((z[0] * z[0] + z[1] * z[1] + z[2] * z[2] - 1.0).abs() < 1e-14);
                let od = o[0] * z[0] + o[1] * z[1] + o[2] * z[2];
                assert!(od.abs() < 1e-12, "{gate} t={t}: {od}");
            }
        }
    }

    #[test]
    fn invariant_residual_small_and_zero_for_static_path() {
        let f = fock::cat_frame(C64::from(0.5), FockSpace::new(30).unwrap()).unwrap();
        let spec = PathSpec::for_gate(Gate::Not, 1.0).unwrap();
        let s = single_qubit_controls(&spec, &f, 2000).unwrap();
        assert!(verify_invariant(&spec, &s, &f).unwrap() < 1e-4);
        let still = PathSpec::new(0.0, 0.0, 0.0, 1.0, 0.1).unwrap();
        let s = single_qubit_controls(&still, &f, 100).unwrap();
        assert!(verify_invariant(&still, &s, &f).unwrap() < 1e-12);
    }
}
