//! Time-dependent Hamiltonians `H(t) = H_static + Σ_j c_j(t) O_j`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{self, CatFrame, FockSpace, Operator, TwoModeFrame};
use crate::linalg::{CMatrix, SparseOperator, C64};
use crate::synth::{DriveMap, DriveSource};

/// How a control coefficient enters the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    /// `Re(c) · O` with `O` Hermitian.
    Hermitian,
    /// `c · O + c* · O†`.
    PlusAdjoint,
}

#[derive(Clone, Debug)]
pub struct ControlTerm {
    pub(crate) op: SparseOperator,
    pub(crate) op_adj: SparseOperator,
    pub(crate) kind: TermKind,
}

impl ControlTerm {
    pub fn new(op: &CMatrix, kind: TermKind) -> Self {
        let op = SparseOperator::from_dense(op, 0.0);
        let op_adj = op.adjoint();
        ControlTerm { op, op_adj, kind }
    }
}

type CoeffFn = dyn Fn(f64) -> Vec<C64> + Send + Sync;

/// A Hamiltonian on a uniform step grid over `[0, T]`.
#[derive(Clone)]
pub struct Schedule {
    space: FockSpace,
    total_time: f64,
    n_steps: usize,
    static_h: CMatrix,
    terms: Vec<ControlTerm>,
    coeffs: Arc<CoeffFn>,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Schedule")
            .field("space", &self.space)
            .field("total_time", &self.total_time)
            .field("n_steps", &self.n_steps)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl Schedule {
    /// `coeffs(t)` must return one coefficient per term.
    pub fn new(
        space: FockSpace,
        total_time: f64,
        n_steps: usize,
        static_h: CMatrix,
        terms: Vec<ControlTerm>,
        coeffs: impl Fn(f64) -> Vec<C64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = space.total_dim();
        if static_h.nrows() != n || static_h.ncols() != n {
            return Err(Error::DimensionMismatch(
                "static Hamiltonian does not match space".into(),
            ));
        }
        if terms.iter().any(|t| t.op.dim() != n) {
            return Err(Error::DimensionMismatch(
                "control operator does not match space".into(),
            ));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {total_time}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        let defect = crate::linalg::hermiticity_defect(&static_h);
        if defect > 1e-12 * (1.0 + crate::linalg::max_abs(&static_h)) {
            return Err(Error::InvalidParameter(format!(
                "static Hamiltonian not Hermitian ({defect:e})"
            )));
        }
        Ok(Schedule {
            space,
            total_time,
            n_steps,
            static_h,
            terms,
            coeffs: Arc::new(coeffs),
        })
    }

    /// Time-independent Hamiltonian.
    pub fn constant(space: FockSpace, h: CMatrix, total_time: f64, n_steps: usize) -> Result<Self> {
        Self::new(space, total_time, n_steps, h, Vec::new(), |_| Vec::new())
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    pub fn static_hamiltonian(&self) -> &CMatrix {
        &self.static_h
    }

    /// Grid points `t_k = kT/n`, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        crate::synth::uniform_grid(self.total_time, self.n_steps)
    }

    /// The same Hamiltonian on a different step count.
    pub fn with_steps(&self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        Ok(Schedule {
            n_steps,
            ..self.clone()
        })
    }

    pub(crate) fn coefficients(&self, t: f64) -> Vec<C64> {
        let c = (self.coeffs)(t);
        debug_assert_eq!(c.len(), self.terms.len());
        c
    }

    /// Collects the control part at `t` into `out` (cleared first).
    pub(crate) fn control_entries(&self, t: f64, out: &mut Vec<(usize, usize, C64)>) {
        out.clear();
        let coeffs = self.coefficients(t);
        for (term, &c) in self.terms.iter().zip(&coeffs) {
            match term.kind {
                TermKind::Hermitian => {
                    let r = C64::from(c.re);
                    out.extend(term.op.entries().iter().map(|&(i, j, v)| (i, j, v * r)));
                }
                TermKind::PlusAdjoint => {
                    out.extend(term.op.entries().iter().map(|&(i, j, v)| (i, j, v * c)));
                    let cc = c.conj();
                    out.extend(
                        term.op_adj
                            .entries()
                            .iter()
                            .map(|&(i, j, v)| (i, j, v * cc)),
                    );
                }
            }
        }
    }

    /// Dense control Hamiltonian at `t`.
    pub fn control_at(&self, t: f64) -> CMatrix {
        let n = self.space.total_dim();
        let mut h = CMatrix::zeros(n, n);
        let mut entries = Vec::new();
        self.control_entries(t, &mut entries);
        for (i, j, v) in entries {
            h[(i, j)] += v;
        }
        h
    }

    /// Full Hamiltonian `H(t)`.
    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        Operator::new(self.space, &self.static_h + self.control_at(t)).expect("dimensions checked")
    }
}

/// Physical parameters of the Kerr-cat device.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Device {
    /// Kerr nonlinearity `K` (rad/μs).
    pub kerr: f64,
    /// Cat amplitude `α = √(ε₂/K) e^{iξ}`.
    pub alpha: C64,
    /// Fock truncation per mode.
    pub dim: usize,
}

impl Device {
    pub fn new(kerr: f64, alpha: C64, dim: usize) -> Result<Self> {
        if !(kerr > 0.0 && kerr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kerr K must be positive, got {kerr}"
            )));
        }
        if alpha.norm() == 0.0 {
            return Err(Error::DegenerateFrame("alpha = 0".into()));
        }
        FockSpace::new(dim)?;
        Ok(Device { kerr, alpha, dim })
    }

    /// Two-photon drive `ε₂ = K|α|²`.
    pub fn eps2(&self) -> f64 {
        self.kerr * self.alpha.norm_sqr()
    }

    pub fn xi(&self) -> f64 {
        self.alpha.arg()
    }

    pub fn space(&self) -> FockSpace {
        FockSpace::new(self.dim).expect("validated")
    }

    pub fn two_mode_space(&self) -> FockSpace {
        FockSpace::two_mode(self.dim).expect("validated")
    }

    pub fn frame(&self) -> Result<CatFrame> {
        fock::cat_frame(self.alpha, self.space())
    }

    pub fn two_mode_frame(&self) -> Result<TwoModeFrame> {
        fock::two_mode_frame(self.alpha, self.two_mode_space())
    }

    pub fn hamiltonian(&self) -> Result<Operator> {
        fock::kerr_cat_hamiltonian(self.kerr, self.eps2(), self.xi(), self.space())
    }

    /// Gap between the cat pair and the next level (rad/μs).
    pub fn gap(&self) -> Result<f64> {
        Ok(fock::cat_gap(&self.hamiltonian()?)?.gap)
    }
}

/// `H_cat + χ(t) a†a + ε(t) a† + ε*(t) a` with controls synthesized from `source`.
pub fn single_qubit_schedule(
    device: &Device,
    source: DriveSource,
    n_steps: usize,
) -> Result<Schedule> {
    let space = device.space();
    let frame = device.frame()?;
    let map = DriveMap::new(&frame);
    let h0 = device.hamiltonian()?.into_matrix();
    let a = fock::ladder(space)?.into_matrix();
    let n = a.adjoint() * &a;
    let terms = vec![
        ControlTerm::new(&n, TermKind::Hermitian),
        ControlTerm::new(&a.adjoint(), TermKind::PlusAdjoint),
    ];
    let total = source.total_time();
    Schedule::new(space, total, n_steps, h0, terms, move |t| {
        let c = map.single(source.omega(t));
        vec![C64::from(c.chi), c.eps]
    })
}

/// Two-mode `H_cat2 + H_c2` realizing a controlled rotation (mode 1 controls).
pub fn two_qubit_schedule(
    device: &Device,
    source: DriveSource,
    n_steps: usize,
) -> Result<Schedule> {
    let space = device.two_mode_space();
    let frame = device.frame()?;
    let map = DriveMap::new(&frame);
    let h0 = fock::two_mode_kerr_cat_hamiltonian(device.kerr, device.eps2(), device.xi(), space)?
        .into_matrix();
    let a2 = fock::mode_ladder(space, 1)?.into_matrix();
    let n1 = fock::mode_number(space, 0)?.into_matrix();
    let n2 = fock::mode_number(space, 1)?.into_matrix();
    let terms = vec![
        ControlTerm::new(&(&n1 * &n2), TermKind::Hermitian),
        ControlTerm::new(&(&n1 * a2.adjoint()), TermKind::PlusAdjoint),
        ControlTerm::new(&a2.adjoint(), TermKind::PlusAdjoint),
        ControlTerm::new(&n1, TermKind::Hermitian),
        ControlTerm::new(&n2, TermKind::Hermitian),
    ];
    let total = source.total_time();
    Schedule::new(space, total, n_steps, h0, terms, move |t| {
        let c = map.two(source.omega(t));
        vec![
            C64::from(c.chi12),
            c.lam,
            c.eps_t,
            C64::from(c.chi1),
            C64::from(c.chi2),
        ]
    })
}
