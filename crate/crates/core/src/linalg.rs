//! Dense complex helpers and a small coordinate-format sparse operator.
//!
//! Matrices are nalgebra column-major `DMatrix<Complex64>`; products of the
//! sizes used here (up to 225 x 225) go through `matrixmultiply::zgemm`.

use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// Use the matrix as stored.
    Plain,
    /// Use the conjugate transpose.
    Adjoint,
}

/// `c <- alpha * op(a) * op(b) + beta * c`
pub fn gemm(alpha: C64, a: &CMatrix, ta: Op, b: &CMatrix, tb: Op, beta: C64, c: &mut CMatrix) {
    // zgemm has no conjugation flag, so adjoint operands are conjugated into
    // a scratch copy and read with transposed strides
    let a_conj;
    let a = match ta {
        Op::Plain => a,
        Op::Adjoint => {
            a_conj = a.map(|z| z.conj());
            &a_conj
        }
    };
    let b_conj;
    let b = match tb {
        Op::Plain => b,
        Op::Adjoint => {
            b_conj = b.map(|z| z.conj());
            &b_conj
        }
    };
    let (m, k, rsa, csa) = layout(a, ta);
    let (k2, n, rsb, csb) = layout(b, tb);
    assert_eq!(k, k2, "inner dimensions differ");
    assert_eq!(c.nrows(), m, "output rows");
    assert_eq!(c.ncols(), n, "output cols");
    if m == 0 || n == 0 {
        return;
    }
    let rsc = 1isize;
    let csc = c.nrows() as isize;
    // SAFETY: the pointers come from live nalgebra storage whose
    // layout (column-major, contiguous) matches the strides passed.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            rsc,
            csc,
        );
    }
}

fn layout(a: &CMatrix, t: Op) -> (usize, usize, isize, isize) {
    let rows = a.nrows();
    let cols = a.ncols();
    match t {
        Op::Plain => (rows, cols, 1, rows as isize),
        Op::Adjoint => (cols, rows, rows as isize, 1),
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    gemm(ONE, a, Op::Plain, b, Op::Plain, ZERO, &mut c);
    c
}

/// `a† b`
pub fn adjoint_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.ncols(), b.ncols());
    gemm(ONE, a, Op::Adjoint, b, Op::Plain, ZERO, &mut c);
    c
}

/// `u x u†`
pub fn sandwich(u: &CMatrix, x: &CMatrix) -> CMatrix {
    let tmp = matmul(u, x);
    let mut out = CMatrix::zeros(u.nrows(), u.nrows());
    gemm(ONE, &tmp, Op::Plain, u, Op::Adjoint, ZERO, &mut out);
    out
}

/// `y <- y + a x`
pub fn axpy(a: C64, x: &CMatrix, y: &mut CMatrix) {
    assert_eq!(x.shape(), y.shape());
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry magnitude of `h - h†`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max-abs entry norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Spectral (largest singular value) norm.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(h.nrows(), h.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `exp(-i h tau)` for Hermitian `h` through its spectral decomposition.
pub fn unitary_from_hermitian(h: &CMatrix, tau: f64) -> CMatrix {
    let (values, vectors) = eigh(h);
    let mut scaled = vectors.clone();
    for (j, e) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * tau);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    let mut out = CMatrix::zeros(h.nrows(), h.ncols());
    gemm(
        ONE,
        &scaled,
        Op::Plain,
        &vectors,
        Op::Adjoint,
        ZERO,
        &mut out,
    );
    out
}

/// General matrix exponential (scaling and squaring, Padé).
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

/// Coordinate-format sparse matrix. Ladder-operator products are banded, so
/// the control parts of every Hamiltonian here fit this representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn from_dense(m: &CMatrix, drop_below: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v.norm() > drop_below {
                    entries.push((i, j, v));
                }
            }
        }
        SparseOperator {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        SparseOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (j, i, v.conj()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Product `self * other` (both sparse), used for `L†L` terms.
    pub fn mul(&self, other: &SparseOperator) -> SparseOperator {
        SparseOperator::from_dense(&matmul(&self.to_dense(), &other.to_dense()), 0.0)
    }

    /// `out += coeff * S x`
    pub fn mul_left_acc(&self, coeff: C64, x: &CMatrix, out: &mut CMatrix) {
        let cols = x.ncols();
        for &(i, j, v) in &self.entries {
            let w = coeff * v;
            for c in 0..cols {
                out[(i, c)] += w * x[(j, c)];
            }
        }
    }

    /// `out += coeff * x S`
    pub fn mul_right_acc(&self, coeff: C64, x: &CMatrix, out: &mut CMatrix) {
        let rows = x.nrows();
        for &(i, j, v) in &self.entries {
            let w = coeff * v;
            let src = x.column(i);
            let mut dst = out.column_mut(j);
            for r in 0..rows {
                dst[r] += w * src[r];
            }
        }
    }

    /// Maximum absolute column sum, an upper bound on the spectral norm.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for &(_, j, v) in &self.entries {
            sums[j] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}
