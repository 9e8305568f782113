//! Gate and state scoring in the cat basis.

use crate::error::{Error, Result};
use crate::fock::{CatFrame, DensityMatrix, Ket, TwoModeFrame};
use crate::linalg::{self, CMatrix, C64};
use crate::synth::{ideal_unitary, InvariantState, PathSpec};

/// Target unitary on the computational subspace.
#[derive(Clone, Debug)]
pub struct GateTarget {
    pub name: String,
    /// `D x D` target in the cat basis.
    pub matrix: CMatrix,
    /// `N x D` isometry whose columns span the computational subspace.
    pub basis: CMatrix,
}

impl GateTarget {
    pub fn new(name: impl Into<String>, matrix: CMatrix, basis: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || basis.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "target is {}x{}, basis has {} columns",
                matrix.nrows(),
                matrix.ncols(),
                basis.ncols()
            )));
        }
        let defect = linalg::max_abs(&(matrix.adjoint() * &matrix - CMatrix::identity(d, d)));
        if defect > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "target not unitary ({defect:e})"
            )));
        }
        Ok(GateTarget {
            name: name.into(),
            matrix,
            basis,
        })
    }

    /// Single-qubit target on a cat frame.
    pub fn single(name: impl Into<String>, matrix: CMatrix, frame: &CatFrame) -> Result<Self> {
        Self::new(name, matrix, frame.basis_matrix())
    }

    /// The ideal unitary of a path.
    pub fn for_spec(name: impl Into<String>, spec: &PathSpec, frame: &CatFrame) -> Result<Self> {
        Self::single(name, ideal_unitary(spec)?, frame)
    }

    /// `|C+⟩⟨C+| ⊗ 1 + |C−⟩⟨C−| ⊗ u` on a two-mode frame.
    pub fn controlled(name: impl Into<String>, u: &CMatrix, frame: &TwoModeFrame) -> Result<Self> {
        if u.shape() != (2, 2) {
            return Err(Error::DimensionMismatch(
                "controlled gate needs a 2x2 block".into(),
            ));
        }
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = C64::from(1.0);
        m[(1, 1)] = C64::from(1.0);
        m.view_mut((2, 2), (2, 2)).copy_from(u);
        Self::new(name, m, frame.basis_matrix())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `B† U B` for a full-space operator.
    pub fn project(&self, u_actual: &CMatrix) -> Result<CMatrix> {
        if u_actual.nrows() != self.basis.nrows() || u_actual.ncols() != self.basis.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, subspace lives in {}",
                u_actual.nrows(),
                u_actual.ncols(),
                self.basis.nrows()
            )));
        }
        Ok(linalg::adjoint_mul(
            &self.basis,
            &linalg::matmul(u_actual, &self.basis),
        ))
    }
}

/// `F̄ = [Tr(MM†) + |Tr M|²] / [D(D+1)]` with `M = P_c U_G† U P_c`.
pub fn average_gate_fidelity(u_actual: &CMatrix, target: &GateTarget) -> Result<f64> {
    fidelity_from_block(&target.project(u_actual)?, &target.matrix)
}

/// Same as [`average_gate_fidelity`], given the projected block `B† U B`
/// (for instance the overlaps of propagated basis states).
pub fn fidelity_from_block(block: &CMatrix, target: &CMatrix) -> Result<f64> {
    let d = target.nrows();
    if block.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "block is {:?}, target is {d}x{d}",
            block.shape()
        )));
    }
    let m = target.adjoint() * block;
    let tr_mm = (&m * m.adjoint()).trace().re;
    let tr = m.trace().norm_sqr();
    Ok((tr_mm + tr) / (d * (d + 1)) as f64)
}

/// `⟨ψ|ρ|ψ⟩`
pub fn state_fidelity(rho: &DensityMatrix, psi: &Ket) -> Result<f64> {
    rho.expectation_in(psi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Populations {
    pub plus: f64,
    pub minus: f64,
    pub leakage: f64,
}

/// Cat populations of a ket.
pub fn populations(psi: &Ket, frame: &CatFrame) -> Result<Populations> {
    let p = frame.c_plus().inner(psi)?.norm_sqr();
    let m = frame.c_minus().inner(psi)?.norm_sqr();
    Ok(Populations {
        plus: p,
        minus: m,
        leakage: (psi.norm().powi(2) - p - m).clamp(0.0, 1.0),
    })
}

/// Cat populations of a density matrix.
pub fn populations_density(rho: &DensityMatrix, frame: &CatFrame) -> Result<Populations> {
    let p = rho.expectation_in(frame.c_plus())?;
    let m = rho.expectation_in(frame.c_minus())?;
    Ok(Populations {
        plus: p,
        minus: m,
        leakage: (rho.trace() - p - m).clamp(0.0, 1.0),
    })
}

/// `F^± = ½|⟨C+|U|C±⟩ ± ⟨C−|U|C±⟩|²`: overlap of `U|C±⟩` with
/// `(|C+⟩ ± |C−⟩)/√2`.
pub fn superposition_fidelity(
    u_actual: &CMatrix,
    frame: &CatFrame,
    input_plus: bool,
) -> Result<f64> {
    let b = frame.basis_matrix();
    if u_actual.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(
            "operator does not match frame".into(),
        ));
    }
    let block = linalg::adjoint_mul(&b, &linalg::matmul(u_actual, &b));
    Ok(superposition_fidelity_block(&block, input_plus))
}

/// [`superposition_fidelity`] from the `2 x 2` cat block.
pub fn superposition_fidelity_block(block: &CMatrix, input_plus: bool) -> f64 {
    if input_plus {
        0.5 * (block[(0, 0)] + block[(1, 0)]).norm_sqr()
    } else {
        0.5 * (block[(0, 1)] - block[(1, 1)]).norm_sqr()
    }
}

/// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a cat-basis 2-vector.
pub fn bloch_vector(c: [C64; 2]) -> [f64; 3] {
    let cross = c[0].conj() * c[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        c[0].norm_sqr() - c[1].norm_sqr(),
    ]
}

/// Bloch vectors of full-space kets, computed from the renormalized cat
/// projection. Samples with leakage above 0.05 are `None`.
pub fn bloch_trajectory(states: &[CVectorRef<'_>], frame: &CatFrame) -> Vec<Option<[f64; 3]>> {
    let cp = frame.c_plus().amplitudes();
    let cm = frame.c_minus().amplitudes();
    states
        .iter()
        .map(|psi| {
            let a = cp.dotc(psi);
            let b = cm.dotc(psi);
            let inside = a.norm_sqr() + b.norm_sqr();
            let total = psi.norm_squared();
            if total - inside > 0.05 * total || inside == 0.0 {
                return None;
            }
            let s = inside.sqrt();
            Some(bloch_vector([a / s, b / s]))
        })
        .collect()
}

pub type CVectorRef<'a> = nalgebra::DVectorView<'a, C64>;

/// Points on the Bloch sphere, in order.
pub type BlochPath = Vec<[f64; 3]>;

/// Bloch loops `r±(t)` of the invariant eigenvectors on `samples + 1` points.
pub fn invariant_loops(spec: &PathSpec, samples: usize) -> Result<(BlochPath, BlochPath)> {
    let mut plus = Vec::with_capacity(samples + 1);
    let mut minus = Vec::with_capacity(samples + 1);
    for t in crate::synth::uniform_grid(spec.total_time, samples) {
        let s = InvariantState::at(spec, t)?;
        plus.push(bloch_vector(s.phi_plus));
        minus.push(bloch_vector(s.phi_minus));
    }
    Ok((plus, minus))
}

/// Signed solid angle swept between a closed curve on the unit sphere and
/// the pole `(0, 0, 1)`, summed over the fan of spherical triangles.
/// Counter-clockwise loops (seen from above the pole) count positive.
/// Consecutive points are joined by great arcs, including last to first;
/// repeating the first point at the end is harmless.
///
/// A loop's solid angle is only defined modulo 4π: the fan value drops by 4π
/// once the loop winds around the antipode `(0, 0, −1)`.
pub fn solid_angle(curve: &[[f64; 3]]) -> f64 {
    let pole = [0.0, 0.0, 1.0];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let triple = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let mut total = 0.0;
    let n = curve.len();
    for k in 0..n {
        let (a, b) = (curve[k], curve[(k + 1) % n]);
        let num = triple(pole, a, b);
        let den = 1.0 + dot(pole, a) + dot(a, b) + dot(b, pole);
        total += 2.0 * num.atan2(den);
    }
    total
}

/// `Tr[ρ a†a]` for a single-mode density matrix.
pub fn mean_photon_number(rho: &CMatrix) -> f64 {
    (0..rho.nrows()).map(|n| n as f64 * rho[(n, n)].re).sum()
}

/// `⟨ψ|a†a|ψ⟩` for a single-mode ket.
pub fn mean_photon_number_ket(psi: &Ket) -> f64 {
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z.norm_sqr())
        .sum()
}

/// Operator-norm distance `‖e^{−iγ}a − b‖` with `γ` read off the
/// largest-magnitude entry of `b`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch("matrices differ in shape".into()));
    }
    let (mut best, mut idx) = (0.0, (0, 0));
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            if b[(i, j)].norm() > best {
                best = b[(i, j)].norm();
                idx = (i, j);
            }
        }
    }
    let gamma = a[idx].arg() - b[idx].arg();
    let aligned = a * C64::from_polar(1.0, -gamma);
    Ok(linalg::operator_norm(&(aligned - b)))
}
