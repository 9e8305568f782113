//! Truncated Fock-space operator algebra for one or two bosonic modes.
//!
//! Two-mode objects use the Kronecker ordering `mode 1 ⊗ mode 2`, so the
//! product basis index is `n1 * dim + n2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, I, ONE, ZERO};

/// Truncation level and number of modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    dim: usize,
    n_modes: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!(
                "dim must be at least 2, got {dim}"
            )));
        }
        Ok(FockSpace { dim, n_modes: 1 })
    }

    pub fn two_mode(dim: usize) -> Result<Self> {
        let mut s = Self::new(dim)?;
        s.n_modes = 2;
        Ok(s)
    }

    /// Per-mode truncation.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Dimension of the full Hilbert space, `dim^n_modes`.
    pub fn total_dim(&self) -> usize {
        self.dim.pow(self.n_modes as u32)
    }

    /// The single-mode space with the same truncation.
    pub fn single(&self) -> FockSpace {
        FockSpace {
            dim: self.dim,
            n_modes: 1,
        }
    }

    fn require_single(&self, what: &str) -> Result<()> {
        if self.n_modes != 1 {
            return Err(Error::DimensionMismatch(format!(
                "{what} needs a single-mode space, got {} modes",
                self.n_modes
            )));
        }
        Ok(())
    }
}

/// A square complex matrix acting on a Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: FockSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, space needs {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        let n = space.total_dim();
        Operator {
            space,
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            space: self.space,
            matrix: linalg::matmul(&self.matrix, &other.matrix),
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            space: self.space,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            space: self.space,
            matrix: &self.matrix * c,
        }
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if ket.space != self.space {
            return Err(Error::DimensionMismatch(
                "operator and ket spaces differ".into(),
            ));
        }
        Ok(Ket {
            space: self.space,
            amplitudes: &self.matrix * &ket.amplitudes,
        })
    }

    /// `⟨ψ|O|ψ⟩`
    pub fn expectation(&self, ket: &Ket) -> Result<C64> {
        let v = self.apply(ket)?;
        Ok(ket.amplitudes.dotc(&v.amplitudes))
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch("operator spaces differ".into()));
        }
        Ok(())
    }
}

/// A state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    space: FockSpace,
    amplitudes: CVector,
}

impl Ket {
    /// Wraps and normalizes `amplitudes`.
    pub fn new(space: FockSpace, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "ket has {} amplitudes, space needs {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter(
                "ket has zero or non-finite norm".into(),
            ));
        }
        Ok(Ket {
            space,
            amplitudes: amplitudes / C64::from(norm),
        })
    }

    /// Number state `|n⟩` (flat index for two-mode spaces).
    pub fn basis(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.total_dim() {
            return Err(Error::InvalidParameter(format!(
                "basis index {n} out of range"
            )));
        }
        let mut v = CVector::zeros(space.total_dim());
        v[n] = ONE;
        Ok(Ket {
            space,
            amplitudes: v,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch("ket spaces differ".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self⟩⟨self|`
    pub fn projector(&self) -> Operator {
        Operator {
            space: self.space,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        if self.space.n_modes != 1 || other.space.n_modes != 1 || self.space.dim != other.space.dim
        {
            return Err(Error::DimensionMismatch(
                "ket tensor product needs two single-mode kets of equal dim".into(),
            ));
        }
        Ok(Ket {
            space: FockSpace::two_mode(self.space.dim)?,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

/// A density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        Ok(DensityMatrix {
            space,
            matrix: op.matrix,
        })
    }

    pub fn from_ket(ket: &Ket) -> Self {
        DensityMatrix {
            space: ket.space,
            matrix: ket.projector().matrix,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Checks Hermiticity (1e−10), unit trace (1e−8) and the −1e−8
    /// eigenvalue floor.
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian ({herm:e})"
            )));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr - ONE).norm() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr}"
            )));
        }
        let (values, _) = linalg::eigh(&self.matrix);
        if values[0] < -1e-8 {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {:e}",
                values[0]
            )));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn expectation_in(&self, ket: &Ket) -> Result<f64> {
        if ket.space != self.space {
            return Err(Error::DimensionMismatch(
                "density matrix and ket spaces differ".into(),
            ));
        }
        let v = &self.matrix * &ket.amplitudes;
        Ok(ket.amplitudes.dotc(&v).re)
    }

    /// `Tr[ρ O]`
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.space != self.space {
            return Err(Error::DimensionMismatch(
                "density matrix and operator spaces differ".into(),
            ));
        }
        let n = self.matrix.nrows();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * op.matrix[(k, i)];
            }
        }
        Ok(acc)
    }
}

/// Annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn ladder(space: FockSpace) -> Result<Operator> {
    space.require_single("ladder")?;
    Ok(Operator {
        space,
        matrix: ladder_matrix(space.dim),
    })
}

pub(crate) fn ladder_matrix(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    a
}

pub(crate) fn number_matrix(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| C64::from(n as f64)))
}

/// `a†a`
pub fn number(space: FockSpace) -> Result<Operator> {
    space.require_single("number")?;
    Ok(Operator {
        space,
        matrix: number_matrix(space.dim),
    })
}

/// Annihilation operator of `mode` (0 or 1) on a two-mode space.
pub fn mode_ladder(space: FockSpace, mode: usize) -> Result<Operator> {
    embed_mode(space, &ladder_matrix(space.dim), mode)
}

/// Number operator of `mode` (0 or 1) on a two-mode space.
pub fn mode_number(space: FockSpace, mode: usize) -> Result<Operator> {
    embed_mode(space, &number_matrix(space.dim), mode)
}

fn embed_mode(space: FockSpace, m: &CMatrix, mode: usize) -> Result<Operator> {
    if space.n_modes != 2 || mode > 1 {
        return Err(Error::DimensionMismatch(format!(
            "mode {mode} of a {}-mode space",
            space.n_modes
        )));
    }
    let id = CMatrix::identity(space.dim, space.dim);
    let matrix = if mode == 0 {
        linalg::kron(m, &id)
    } else {
        linalg::kron(&id, m)
    };
    Ok(Operator { space, matrix })
}

/// Kronecker product `A ⊗ B` of two single-mode operators.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.space.n_modes != 1 || b.space.n_modes != 1 || a.space.dim != b.space.dim {
        return Err(Error::DimensionMismatch(format!(
            "tensor needs single-mode operators of equal dim, got {:?} and {:?}",
            a.space, b.space
        )));
    }
    Ok(Operator {
        space: FockSpace::two_mode(a.space.dim)?,
        matrix: linalg::kron(&a.matrix, &b.matrix),
    })
}

/// Probability weight of a coherent state beyond the truncation,
/// `1 − e^{−|α|²} Σ_{n<dim} |α|^{2n}/n!`.
pub fn coherent_tail_weight(alpha_abs2: f64, dim: usize) -> f64 {
    // sum the tail directly to avoid cancellation
    let mut log_term =
        -alpha_abs2 + (dim as f64) * alpha_abs2.max(f64::MIN_POSITIVE).ln() - ln_factorial(dim);
    let mut tail = 0.0;
    for n in dim..dim + 400 {
        let term = log_term.exp();
        tail += term;
        if term < 1e-300 || (n > dim + 10 && term < tail * 1e-17) {
            break;
        }
        log_term += alpha_abs2.max(f64::MIN_POSITIVE).ln() - ((n + 1) as f64).ln();
    }
    if alpha_abs2 == 0.0 {
        0.0
    } else {
        tail
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coherent state `|α⟩` truncated to `space` and renormalized.
///
/// Fails when `|α|² > dim/4`; logs a warning when the discarded tail weight
/// exceeds 1e−10.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<Ket> {
    space.require_single("coherent_state")?;
    let dim = space.dim;
    let a2 = alpha.norm_sqr();
    if a2 > dim as f64 / 4.0 {
        return Err(Error::TruncationInadequate(format!(
            "|alpha|^2 = {a2} exceeds dim/4 = {}",
            dim as f64 / 4.0
        )));
    }
    let tail = coherent_tail_weight(a2, dim);
    if tail > 1e-10 {
        log::warn!(
            "coherent state |alpha|={} loses tail weight {tail:e} at dim {dim}",
            alpha.norm()
        );
    }
    let mut v = CVector::zeros(dim);
    let mut c = C64::from((-a2 / 2.0).exp());
    for n in 0..dim {
        v[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    Ket::new(space, v)
}

/// The cat-qubit computational frame.
#[derive(Clone, Debug)]
pub struct CatFrame {
    alpha: C64,
    xi: f64,
    n_plus: f64,
    n_minus: f64,
    c_plus: Ket,
    c_minus: Ket,
    projector: Operator,
}

/// Builds `|C±⟩ ∝ |α⟩ ± |−α⟩` with pump phase `ξ = arg α`.
pub fn cat_frame(alpha: C64, space: FockSpace) -> Result<CatFrame> {
    space.require_single("cat_frame")?;
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 {
        return Err(Error::DegenerateFrame(
            "alpha = 0 leaves |C-> undefined".into(),
        ));
    }
    let plus = coherent_state(alpha, space)?;
    let minus = coherent_state(-alpha, space)?;
    let c_plus = Ket::new(space, plus.amplitudes() + minus.amplitudes())?;
    // odd cat: for tiny |α| the difference is dominated by the |1⟩ component,
    // so build it from odd Fock components directly to avoid cancellation
    let odd = CVector::from_fn(space.dim, |n, _| {
        if n % 2 == 1 {
            plus.amplitudes()[n]
        } else {
            ZERO
        }
    });
    let c_minus = Ket::new(space, odd)?;
    let decay = (-2.0 * a2).exp();
    let projector = c_plus.projector().add(&c_minus.projector())?;
    Ok(CatFrame {
        alpha,
        xi: alpha.arg(),
        n_plus: 2.0 * (1.0 + decay),
        n_minus: 2.0 * (1.0 - decay),
        c_plus,
        c_minus,
        projector,
    })
}

impl CatFrame {
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn alpha_abs(&self) -> f64 {
        self.alpha.norm()
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Normalization `N+ = 2(1 + e^{−2|α|²})`.
    pub fn n_plus(&self) -> f64 {
        self.n_plus
    }

    /// Normalization `N− = 2(1 − e^{−2|α|²})`.
    pub fn n_minus(&self) -> f64 {
        self.n_minus
    }

    pub fn c_plus(&self) -> &Ket {
        &self.c_plus
    }

    pub fn c_minus(&self) -> &Ket {
        &self.c_minus
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    pub fn space(&self) -> FockSpace {
        self.c_plus.space
    }

    /// `dim x 2` isometry with columns `|C+⟩, |C−⟩`.
    pub fn basis_matrix(&self) -> CMatrix {
        let mut b = CMatrix::zeros(self.space().dim, 2);
        b.set_column(0, self.c_plus.amplitudes());
        b.set_column(1, self.c_minus.amplitudes());
        b
    }

    /// Embeds a cat-basis 2-vector `(c+, c−)` into Fock space.
    pub fn embed(&self, coeffs: [C64; 2]) -> Result<Ket> {
        Ket::new(
            self.space(),
            self.c_plus.amplitudes() * coeffs[0] + self.c_minus.amplitudes() * coeffs[1],
        )
    }

    /// `⟨C+|a†a|C+⟩ = |α|² N−/N+`
    pub fn mean_photons_plus(&self) -> f64 {
        self.alpha.norm_sqr() * self.n_minus / self.n_plus
    }

    /// `⟨C−|a†a|C−⟩ = |α|² N+/N−`
    pub fn mean_photons_minus(&self) -> f64 {
        self.alpha.norm_sqr() * self.n_plus / self.n_minus
    }
}

/// Product cat frame of two identical modes with basis order
/// `|C+C+⟩, |C+C−⟩, |C−C+⟩, |C−C−⟩`.
#[derive(Clone, Debug)]
pub struct TwoModeFrame {
    single: CatFrame,
    space: FockSpace,
    basis: Vec<Ket>,
    projector: Operator,
}

pub fn two_mode_frame(alpha: C64, space: FockSpace) -> Result<TwoModeFrame> {
    if space.n_modes != 2 {
        return Err(Error::DimensionMismatch(
            "two_mode_frame needs a two-mode space".into(),
        ));
    }
    let single = cat_frame(alpha, space.single())?;
    let cats = [single.c_plus(), single.c_minus()];
    let mut basis = Vec::with_capacity(4);
    for c1 in cats {
        for c2 in cats {
            basis.push(c1.tensor(c2)?);
        }
    }
    let mut p = CMatrix::zeros(space.total_dim(), space.total_dim());
    for b in &basis {
        p += b.projector().matrix;
    }
    Ok(TwoModeFrame {
        single,
        space,
        basis,
        projector: Operator { space, matrix: p },
    })
}

impl TwoModeFrame {
    pub fn single(&self) -> &CatFrame {
        &self.single
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn basis(&self) -> &[Ket] {
        &self.basis
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    /// `dim² x 4` isometry over the product cat basis.
    pub fn basis_matrix(&self) -> CMatrix {
        let mut b = CMatrix::zeros(self.space.total_dim(), 4);
        for (j, k) in self.basis.iter().enumerate() {
            b.set_column(j, k.amplitudes());
        }
        b
    }
}

/// `H = −K a†²a² + ε₂(e^{2iξ}a†² + e^{−2iξ}a²)`
pub fn kerr_cat_hamiltonian(k: f64, eps2: f64, xi: f64, space: FockSpace) -> Result<Operator> {
    space.require_single("kerr_cat_hamiltonian")?;
    Ok(Operator {
        space,
        matrix: kerr_cat_matrix(k, eps2, xi, space.dim)?,
    })
}

fn kerr_cat_matrix(k: f64, eps2: f64, xi: f64, dim: usize) -> Result<CMatrix> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Kerr K must be positive, got {k}"
        )));
    }
    if !(eps2 >= 0.0 && eps2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps2 must be nonnegative, got {eps2}"
        )));
    }
    let mut h = CMatrix::zeros(dim, dim);
    let pump = C64::from_polar(eps2, 2.0 * xi);
    for n in 0..dim {
        let nf = n as f64;
        h[(n, n)] = C64::from(-k * nf * (nf - 1.0));
        if n + 2 < dim {
            // ⟨n+2|a†²|n⟩ = √((n+1)(n+2))
            let s = ((nf + 1.0) * (nf + 2.0)).sqrt();
            h[(n + 2, n)] = pump * s;
            h[(n, n + 2)] = pump.conj() * s;
        }
    }
    Ok(h)
}

/// `H_cat ⊗ 1 + 1 ⊗ H_cat` with identical parameters on both modes.
pub fn two_mode_kerr_cat_hamiltonian(
    k: f64,
    eps2: f64,
    xi: f64,
    space: FockSpace,
) -> Result<Operator> {
    if space.n_modes != 2 {
        return Err(Error::DimensionMismatch(
            "two-mode Hamiltonian needs a two-mode space".into(),
        ));
    }
    let h = kerr_cat_matrix(k, eps2, xi, space.dim)?;
    let id = CMatrix::identity(space.dim, space.dim);
    Ok(Operator {
        space,
        matrix: linalg::kron(&h, &id) + linalg::kron(&id, &h),
    })
}

/// Spectrum summary of a Kerr-cat Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatGap {
    /// Mean energy of the degenerate top pair (rad/μs).
    pub pair_energy: f64,
    /// Splitting inside the pair (rad/μs).
    pub pair_splitting: f64,
    /// Distance from the pair to the next eigenvalue below (rad/μs).
    pub gap: f64,
}

/// The cat pair sits at the top of the spectrum of `H_cat` (the Kerr term
/// is negative); the gap is measured down to the third-highest level.
pub fn cat_gap(h: &Operator) -> Result<CatGap> {
    let (values, _) = linalg::eigh(h.matrix());
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidSpace(
            "need at least three levels for a gap".into(),
        ));
    }
    let (e0, e1, e2) = (values[n - 1], values[n - 2], values[n - 3]);
    Ok(CatGap {
        pair_energy: 0.5 * (e0 + e1),
        pair_splitting: e0 - e1,
        gap: e1 - e2,
    })
}

/// Pauli operators of the cat qubit embedded in the full space.
#[derive(Clone, Debug)]
pub struct CatPaulis {
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
}

/// `σ+ = |C+⟩⟨C−|`, `σx = σ+ + σ−`, `σy = i(σ− − σ+)`, `σz = |C+⟩⟨C+| − |C−⟩⟨C−|`.
pub fn cat_qubit_paulis(frame: &CatFrame) -> CatPaulis {
    let p = frame.c_plus.amplitudes();
    let m = frame.c_minus.amplitudes();
    let sp: CMatrix = p * m.adjoint();
    let sm: CMatrix = sp.adjoint();
    let space = frame.space();
    CatPaulis {
        x: Operator {
            space,
            matrix: &sp + &sm,
        },
        y: Operator {
            space,
            matrix: (&sm - &sp) * I,
        },
        z: Operator {
            space,
            matrix: p * p.adjoint() - m * m.adjoint(),
        },
    }
}

/// 2x2 Pauli matrices in the `(C+, C−)` basis.
pub fn pauli_matrices() -> [DMatrix<C64>; 3] {
    [
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}
