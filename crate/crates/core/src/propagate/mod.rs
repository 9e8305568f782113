//! Schrödinger and Lindblad propagation on a uniform step grid.
//!
//! The default integrator is a Strang splitting of `H(t) = H_static + H_c(t)`.
//! The static Kerr-cat part is exponentiated once through its spectral
//! decomposition; the banded control part is exponentiated each step with a
//! Taylor series on sparse operators, evaluated at the step midpoint. For
//! open systems the control part and the dissipators are advanced together
//! with RK4 inside the same splitting, which keeps the stiff static part
//! exact.

mod schedule;

pub use schedule::{
    single_qubit_schedule, two_qubit_schedule, ControlTerm, Device, Schedule, TermKind,
};

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{CatFrame, DensityMatrix, FockSpace, Ket};
use crate::linalg::{self, CMatrix, Op, SparseOperator, C64, I, ONE, ZERO};

/// Default step count over one gate.
pub const DEFAULT_STEPS: usize = 20_000;
/// Default snapshot cap.
pub const DEFAULT_SNAPSHOTS: usize = 501;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Strang splitting with exact static propagator (default).
    SplitStep,
    /// Dense exponential of the midpoint Hamiltonian per step; slow, used
    /// as a reference.
    ExactMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    pub max_snapshots: usize,
    /// Norm/trace drift budget; drift above `100·tol` is an error.
    pub tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            integrator: Integrator::SplitStep,
            max_snapshots: DEFAULT_SNAPSHOTS,
            tol: 1e-8,
        }
    }
}

/// Collapse operators with rates: `κ D[a] + κ_φ D[a†a]`, where
/// `D[L]ρ = LρL† − ½{L†L, ρ}`.
#[derive(Clone, Debug)]
pub struct Dissipator {
    rate: f64,
    op: SparseOperator,
    op_adj: SparseOperator,
    lt_l: SparseOperator,
}

impl Dissipator {
    pub fn new(rate: f64, op: &CMatrix) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be nonnegative, got {rate}"
            )));
        }
        let s = SparseOperator::from_dense(op, 0.0);
        let adj = s.adjoint();
        let lt_l = adj.mul(&s);
        Ok(Dissipator {
            rate,
            op: s,
            op_adj: adj,
            lt_l,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Photon loss `κ D[a]` and dephasing `κ_φ D[a†a]` on a single mode.
pub fn standard_dissipators(
    space: FockSpace,
    kappa: f64,
    kappa_phi: f64,
) -> Result<Vec<Dissipator>> {
    let a = crate::fock::ladder(space)?.into_matrix();
    let n = a.adjoint() * &a;
    Ok(vec![
        Dissipator::new(kappa, &a)?,
        Dissipator::new(kappa_phi, &n)?,
    ])
}

/// Stored states.
#[derive(Clone, Debug)]
pub enum Snapshots {
    /// Each entry is a `dim x m` batch of kets (one column per input).
    Kets(Vec<CMatrix>),
    Densities(Vec<CMatrix>),
}

impl Snapshots {
    pub fn len(&self) -> usize {
        match self {
            Snapshots::Kets(v) | Snapshots::Densities(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last(&self) -> &CMatrix {
        match self {
            Snapshots::Kets(v) | Snapshots::Densities(v) => v.last().expect("nonempty"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    /// Largest number of Taylor sub-steps used for one control exponential.
    pub max_substeps: usize,
    /// Max over inputs of `|‖ψ(T)‖ − 1|`, or `|Tr ρ(T) − 1|`.
    pub norm_drift: f64,
    /// Largest population found in the top two Fock levels of any mode.
    pub tail_weight: f64,
    /// Smallest eigenvalue of `ρ(T)` (open runs only).
    pub min_eigenvalue: Option<f64>,
}

/// Trajectory record of one propagation.
#[derive(Clone, Debug)]
pub struct SimResult {
    pub space: FockSpace,
    pub times: Vec<f64>,
    pub states: Snapshots,
    pub diagnostics: Diagnostics,
}

impl SimResult {
    /// Final ket batch (`dim x m`) or density matrix.
    pub fn final_state(&self) -> &CMatrix {
        self.states.last()
    }

    pub fn final_ket(&self) -> Result<Ket> {
        match &self.states {
            Snapshots::Kets(v) => Ket::new(
                self.space,
                v.last().expect("nonempty").column(0).into_owned(),
            ),
            Snapshots::Densities(_) => Err(Error::InvalidParameter(
                "open-system result has no ket".into(),
            )),
        }
    }

    pub fn final_density(&self) -> Result<DensityMatrix> {
        match &self.states {
            Snapshots::Densities(v) => {
                DensityMatrix::new(self.space, v.last().expect("nonempty").clone())
            }
            Snapshots::Kets(v) => {
                let psi = v.last().expect("nonempty").column(0).into_owned();
                DensityMatrix::new(self.space, &psi * psi.adjoint())
            }
        }
    }

    /// Long-format CSV: `t,input,p_plus,p_minus,leakage,photon_number`,
    /// with cat populations taken in `frame` (single-mode runs).
    pub fn write_csv<W: Write>(&self, frame: &CatFrame, w: W) -> Result<()> {
        if frame.space() != self.space {
            return Err(Error::DimensionMismatch(
                "frame does not match result space".into(),
            ));
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t",
            "input",
            "p_plus",
            "p_minus",
            "leakage",
            "photon_number",
        ])?;
        let cp = frame.c_plus().amplitudes();
        let cm = frame.c_minus().amplitudes();
        let nd: Vec<f64> = (0..self.space.dim()).map(|n| n as f64).collect();
        let fmt = crate::synth::fmt15;
        match &self.states {
            Snapshots::Kets(v) => {
                for (t, batch) in self.times.iter().zip(v) {
                    for c in 0..batch.ncols() {
                        let psi = batch.column(c);
                        let pp = cp.dotc(&psi).norm_sqr();
                        let pm = cm.dotc(&psi).norm_sqr();
                        let norm2 = psi.norm_squared();
                        let np: f64 = psi.iter().zip(&nd).map(|(z, n)| z.norm_sqr() * n).sum();
                        out.write_record([
                            fmt(*t),
                            c.to_string(),
                            fmt(pp),
                            fmt(pm),
                            fmt(norm2 - pp - pm),
                            fmt(np),
                        ])?;
                    }
                }
            }
            Snapshots::Densities(v) => {
                for (t, rho) in self.times.iter().zip(v) {
                    let pp = cp.dotc(&(rho * cp)).re;
                    let pm = cm.dotc(&(rho * cm)).re;
                    let tr = linalg::trace(rho).re;
                    let np: f64 = (0..nd.len()).map(|n| rho[(n, n)].re * nd[n]).sum();
                    out.write_record([
                        fmt(*t),
                        "0".to_string(),
                        fmt(pp),
                        fmt(pm),
                        fmt(tr - pp - pm),
                        fmt(np),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, frame: &CatFrame, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(frame, std::io::BufWriter::new(f))
            .map_err(|e| e.context(format!("writing {}", path.display())))
    }
}

/// Step indices at which snapshots are stored; always includes `0` and `n`.
fn snapshot_steps(n_steps: usize, max_snapshots: usize) -> Vec<usize> {
    let m = max_snapshots.max(2).min(n_steps + 1);
    let mut idx: Vec<usize> = (0..m)
        .map(|k| ((k as f64) * n_steps as f64 / (m - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

/// `out ← exp(−i H dt) x` for sparse `H`, by a sub-stepped Taylor series.
/// Returns the number of sub-steps.
fn sparse_expm_apply(
    entries: &[(usize, usize, C64)],
    dim: usize,
    dt: f64,
    x: &mut CMatrix,
    scratch: &mut [CMatrix; 2],
) -> usize {
    if entries.is_empty() {
        return 0;
    }
    let mut col_sums = vec![0.0f64; dim];
    for &(_, j, v) in entries {
        col_sums[j] += v.norm();
    }
    let norm = col_sums.into_iter().fold(0.0, f64::max);
    let substeps = ((norm * dt.abs()) / 0.5).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let [term, next] = scratch;
    for _ in 0..substeps {
        term.copy_from(x);
        for k in 1..40 {
            next.fill(ZERO);
            let c = -I * (h / k as f64);
            for &(i, j, v) in entries {
                let w = c * v;
                for col in 0..x.ncols() {
                    next[(i, col)] += w * term[(j, col)];
                }
            }
            std::mem::swap(term, next);
            *x += &*term;
            if term.norm() <= 1e-17 * x.norm() {
                break;
            }
        }
    }
    substeps
}

fn tail_weight_kets(space: FockSpace, batch: &CMatrix) -> f64 {
    let d = space.dim();
    let mut worst = 0.0f64;
    for c in 0..batch.ncols() {
        let col = batch.column(c);
        let w: f64 = col
            .iter()
            .enumerate()
            .filter(|(idx, _)| in_tail(space, *idx, d))
            .map(|(_, z)| z.norm_sqr())
            .sum();
        worst = worst.max(w);
    }
    worst
}

fn tail_weight_density(space: FockSpace, rho: &CMatrix) -> f64 {
    let d = space.dim();
    (0..rho.nrows())
        .filter(|&idx| in_tail(space, idx, d))
        .map(|idx| rho[(idx, idx)].re)
        .sum()
}

fn in_tail(space: FockSpace, idx: usize, d: usize) -> bool {
    if space.n_modes() == 1 {
        idx + 2 >= d
    } else {
        idx / d + 2 >= d || idx % d + 2 >= d
    }
}

/// Propagates a batch of kets (columns of `psi0`).
pub fn evolve_batch(
    schedule: &Schedule,
    psi0: &CMatrix,
    opts: &PropagationOptions,
) -> Result<SimResult> {
    let dim = schedule.space().total_dim();
    if psi0.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "initial states have {} rows, space needs {dim}",
            psi0.nrows()
        )));
    }
    let norms0: Vec<f64> = (0..psi0.ncols()).map(|c| psi0.column(c).norm()).collect();
    let n = schedule.n_steps();
    let dt = schedule.dt();
    let keep = snapshot_steps(n, opts.max_snapshots);
    let grid = schedule.grid();
    let mut times = Vec::with_capacity(keep.len());
    let mut states = Vec::with_capacity(keep.len());
    let mut next_keep = 0;
    let mut diag = Diagnostics {
        steps: n,
        ..Default::default()
    };
    let mut psi = psi0.clone();
    let record = |k: usize,
                  state: &CMatrix,
                  times: &mut Vec<f64>,
                  states: &mut Vec<CMatrix>,
                  next_keep: &mut usize| {
        if *next_keep < keep.len() && keep[*next_keep] == k {
            times.push(grid[k]);
            states.push(state.clone());
            *next_keep += 1;
        }
    };
    record(0, &psi, &mut times, &mut states, &mut next_keep);

    match opts.integrator {
        Integrator::SplitStep => {
            let w_half = linalg::unitary_from_hermitian(schedule.static_hamiltonian(), 0.5 * dt);
            let w_full = linalg::matmul(&w_half, &w_half);
            let mut entries = Vec::new();
            let mut scratch = [psi.clone(), psi.clone()];
            let mut tmp = psi.clone();
            // ψ is carried half a static step ahead between iterations
            linalg::gemm(ONE, &w_half, Op::Plain, &psi, Op::Plain, ZERO, &mut tmp);
            std::mem::swap(&mut psi, &mut tmp);
            for k in 0..n {
                let t_mid = (k as f64 + 0.5) * dt;
                schedule.control_entries(t_mid, &mut entries);
                let s = sparse_expm_apply(&entries, dim, dt, &mut psi, &mut scratch);
                diag.max_substeps = diag.max_substeps.max(s);
                let last = k + 1 == n;
                let wanted = next_keep < keep.len() && keep[next_keep] == k + 1;
                if last || wanted {
                    linalg::gemm(ONE, &w_half, Op::Plain, &psi, Op::Plain, ZERO, &mut tmp);
                    record(k + 1, &tmp, &mut times, &mut states, &mut next_keep);
                    diag.tail_weight = diag
                        .tail_weight
                        .max(tail_weight_kets(schedule.space(), &tmp));
                }
                if !last {
                    linalg::gemm(ONE, &w_full, Op::Plain, &psi, Op::Plain, ZERO, &mut tmp);
                    std::mem::swap(&mut psi, &mut tmp);
                }
            }
        }
        Integrator::ExactMidpoint => {
            let mut tmp = psi.clone();
            for k in 0..n {
                let t_mid = (k as f64 + 0.5) * dt;
                let h = schedule.hamiltonian_at(t_mid).into_matrix();
                let u = linalg::unitary_from_hermitian(&h, dt);
                linalg::gemm(ONE, &u, Op::Plain, &psi, Op::Plain, ZERO, &mut tmp);
                std::mem::swap(&mut psi, &mut tmp);
                record(k + 1, &psi, &mut times, &mut states, &mut next_keep);
            }
            diag.max_substeps = 1;
            for s in &states {
                diag.tail_weight = diag.tail_weight.max(tail_weight_kets(schedule.space(), s));
            }
        }
    }

    let last = states.last().expect("endpoint stored");
    diag.norm_drift = (0..last.ncols())
        .map(|c| (last.column(c).norm() - norms0[c]).abs())
        .fold(0.0, f64::max);
    if !diag.norm_drift.is_finite() || diag.norm_drift > 100.0 * opts.tol {
        return Err(Error::Integration(format!(
            "norm drift {:e} exceeds {:e}",
            diag.norm_drift,
            100.0 * opts.tol
        )));
    }
    Ok(SimResult {
        space: schedule.space(),
        times,
        states: Snapshots::Kets(states),
        diagnostics: diag,
    })
}

/// Propagates one ket.
pub fn evolve_state(
    schedule: &Schedule,
    psi0: &Ket,
    opts: &PropagationOptions,
) -> Result<SimResult> {
    if psi0.space() != schedule.space() {
        return Err(Error::DimensionMismatch(
            "initial ket not in schedule space".into(),
        ));
    }
    let m = CMatrix::from_column_slice(psi0.amplitudes().len(), 1, psi0.amplitudes().as_slice());
    evolve_batch(schedule, &m, opts)
}

/// The full propagator `U(T, 0)`.
pub fn evolution_operator(schedule: &Schedule, opts: &PropagationOptions) -> Result<CMatrix> {
    let n = schedule.space().total_dim();
    let o = PropagationOptions {
        max_snapshots: 2,
        ..*opts
    };
    let r = evolve_batch(schedule, &CMatrix::identity(n, n), &o)?;
    let u = r.final_state().clone();
    let defect = linalg::max_abs(&(linalg::adjoint_mul(&u, &u) - CMatrix::identity(n, n)));
    if defect > 10.0 * opts.tol.max(1e-12) {
        return Err(Error::Integration(format!("unitarity defect {defect:e}")));
    }
    Ok(u)
}

/// `dρ/dt = −i[H(t), ρ] + Σ_k γ_k D[L_k]ρ`.
pub fn lindblad_evolve_with(
    schedule: &Schedule,
    rho0: &DensityMatrix,
    dissipators: &[Dissipator],
    opts: &PropagationOptions,
) -> Result<SimResult> {
    let dim = schedule.space().total_dim();
    if rho0.space() != schedule.space() {
        return Err(Error::DimensionMismatch(
            "initial state not in schedule space".into(),
        ));
    }
    if dissipators.iter().any(|d| d.op.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "collapse operator does not match space".into(),
        ));
    }
    let active: Vec<&Dissipator> = dissipators.iter().filter(|d| d.rate > 0.0).collect();
    let n = schedule.n_steps();
    let dt = schedule.dt();
    let keep = snapshot_steps(n, opts.max_snapshots);
    let grid = schedule.grid();
    let mut times = Vec::with_capacity(keep.len());
    let mut states = Vec::with_capacity(keep.len());
    let mut next_keep = 0;
    let mut diag = Diagnostics {
        steps: n,
        max_substeps: 1,
        ..Default::default()
    };
    let trace0 = rho0.trace();
    times.push(grid[0]);
    states.push(rho0.matrix().clone());
    next_keep += 1;

    // non-Hermitian part −(i/2) Σ γ L†L folded into the effective Hamiltonian
    let mut anti: Vec<(usize, usize, C64)> = Vec::new();
    for d in &active {
        let c = C64::new(0.0, -0.5 * d.rate);
        anti.extend(d.lt_l.entries().iter().map(|&(i, j, v)| (i, j, v * c)));
    }

    let w_half = linalg::unitary_from_hermitian(schedule.static_hamiltonian(), 0.5 * dt);
    let w_full = linalg::matmul(&w_half, &w_half);
    let mut rho = linalg::sandwich(&w_half, rho0.matrix());
    let mut entries = Vec::new();
    let mut k1 = CMatrix::zeros(dim, dim);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();
    let mut tmp = k1.clone();

    let generator =
        |rho: &CMatrix, entries: &[(usize, usize, C64)], out: &mut CMatrix, tmp: &mut CMatrix| {
            // out = −i(H_eff ρ − ρ H_eff†) + Σ γ L ρ L†
            out.fill(ZERO);
            for &(i, j, v) in entries {
                let w = -I * v;
                for c in 0..dim {
                    out[(i, c)] += w * rho[(j, c)];
                }
            }
            for &(i, j, v) in entries {
                // (ρ H†)[r, i] = Σ_j ρ[r, j] conj(H[i, j])
                let w = I * v.conj();
                for r in 0..dim {
                    out[(r, i)] += w * rho[(r, j)];
                }
            }
            for d in &active {
                tmp.fill(ZERO);
                d.op.mul_left_acc(ONE, rho, tmp);
                d.op_adj.mul_right_acc(C64::from(d.rate), tmp, out);
            }
        };

    for k in 0..n {
        let t_mid = (k as f64 + 0.5) * dt;
        schedule.control_entries(t_mid, &mut entries);
        entries.extend_from_slice(&anti);
        generator(&rho, &entries, &mut k1, &mut tmp);
        stage.copy_from(&rho);
        linalg::axpy(C64::from(0.5 * dt), &k1, &mut stage);
        generator(&stage, &entries, &mut k2, &mut tmp);
        stage.copy_from(&rho);
        linalg::axpy(C64::from(0.5 * dt), &k2, &mut stage);
        generator(&stage, &entries, &mut k3, &mut tmp);
        stage.copy_from(&rho);
        linalg::axpy(C64::from(dt), &k3, &mut stage);
        generator(&stage, &entries, &mut k4, &mut tmp);
        k2 += &k3;
        linalg::axpy(C64::from(2.0), &k2, &mut k1);
        k1 += &k4;
        linalg::axpy(C64::from(dt / 6.0), &k1, &mut rho);

        let last = k + 1 == n;
        let wanted = next_keep < keep.len() && keep[next_keep] == k + 1;
        if last || wanted {
            let out = linalg::sandwich(&w_half, &rho);
            diag.tail_weight = diag
                .tail_weight
                .max(tail_weight_density(schedule.space(), &out));
            times.push(grid[k + 1]);
            states.push(out);
            next_keep += 1;
        }
        if !last {
            rho = linalg::sandwich(&w_full, &rho);
        }
    }

    let fin = states.last().expect("endpoint stored");
    let tr = linalg::trace(fin).re;
    diag.norm_drift = (tr - trace0).abs();
    let (values, _) = linalg::eigh(&((fin + fin.adjoint()) * C64::from(0.5)));
    diag.min_eigenvalue = Some(values[0]);
    if !diag.norm_drift.is_finite() || diag.norm_drift > 100.0 * opts.tol.max(1e-9) {
        return Err(Error::Integration(format!(
            "trace drift {:e}",
            diag.norm_drift
        )));
    }
    if values[0] < -1e-6 {
        return Err(Error::Integration(format!(
            "density matrix eigenvalue {:e} below -1e-6",
            values[0]
        )));
    }
    Ok(SimResult {
        space: schedule.space(),
        times,
        states: Snapshots::Densities(states),
        diagnostics: diag,
    })
}

/// Lindblad run with photon loss `κ` and dephasing `κ_φ` (plain rates, 1/μs)
/// on a single mode.
pub fn lindblad_evolve(
    schedule: &Schedule,
    rho0: &DensityMatrix,
    kappa: f64,
    kappa_phi: f64,
    opts: &PropagationOptions,
) -> Result<SimResult> {
    let d = standard_dissipators(schedule.space(), kappa, kappa_phi)?;
    lindblad_evolve_with(schedule, rho0, &d, opts)
}

/// `1 − min_c |⟨ψ_n|ψ_2n⟩|²` over input columns: the final-state change
/// when the step count is doubled.
pub fn step_convergence(
    schedule: &Schedule,
    psi0: &CMatrix,
    opts: &PropagationOptions,
) -> Result<f64> {
    let o = PropagationOptions {
        max_snapshots: 2,
        ..*opts
    };
    let a = evolve_batch(schedule, psi0, &o)?;
    let b = evolve_batch(&schedule.with_steps(2 * schedule.n_steps())?, psi0, &o)?;
    let (x, y) = (a.final_state(), b.final_state());
    let mut worst = 0.0f64;
    for c in 0..x.ncols() {
        let ov = x.column(c).dotc(&y.column(c)).norm_sqr()
            / (x.column(c).norm_squared() * y.column(c).norm_squared());
        worst = worst.max(1.0 - ov);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn snapshot_indices_keep_endpoints() {
        assert_eq!(snapshot_steps(10, 501), (0..=10).collect::<Vec<_>>());
        let s = snapshot_steps(20_000, 501);
        assert_eq!(s.len(), 501);
        assert_eq!((s[0], s[500]), (0, 20_000));
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let space = FockSpace::new(6).unwrap();
        let s = Schedule::constant(space, CMatrix::zeros(6, 6), 1.0, 10).unwrap();
        let u = evolution_operator(&s, &PropagationOptions::default()).unwrap();
        assert!((u - CMatrix::identity(6, 6)).norm() < 1e-15);
    }

    #[test]
    fn split_step_matches_exact_for_time_dependent_drive() {
        let space = FockSpace::new(8).unwrap();
        let h0 = random_hermitian(8, 7);
        let a = fock::ladder(space).unwrap().into_matrix();
        let n = a.adjoint() * &a;
        let terms = vec![
            ControlTerm::new(&n, TermKind::Hermitian),
            ControlTerm::new(&a.adjoint(), TermKind::PlusAdjoint),
        ];
        let s = Schedule::new(space, 1.0, 400, h0, terms, |t| {
            vec![C64::from((3.0 * t).sin()), C64::new(t.cos(), 0.5 * t)]
        })
        .unwrap();
        let o = PropagationOptions::default();
        let u1 = evolution_operator(&s, &o).unwrap();
        let exact = PropagationOptions {
            integrator: Integrator::ExactMidpoint,
            ..o
        };
        let u2 = evolution_operator(&s, &exact).unwrap();
        let u3 = evolution_operator(&s.with_steps(4000).unwrap(), &exact).unwrap();
        // both second-order schemes converge to the same limit
        assert!((&u1 - &u3).norm() < 2e-4, "{}", (&u1 - &u3).norm());
        assert!((&u2 - &u3).norm() < 2e-4);
    }

    #[test]
    fn lindblad_without_dissipation_matches_kets() {
        let space = FockSpace::new(8).unwrap();
        let h0 = random_hermitian(8, 3);
        let a = fock::ladder(space).unwrap().into_matrix();
        let terms = vec![ControlTerm::new(&a.adjoint(), TermKind::PlusAdjoint)];
        let s = Schedule::new(space, 0.7, 300, h0, terms, |t| {
            vec![C64::new(2.0 * t, -1.0)]
        })
        .unwrap();
        let psi = fock::coherent_state(C64::new(0.4, 0.2), space).unwrap();
        let o = PropagationOptions::default();
        let r1 = evolve_state(&s, &psi, &o).unwrap();
        let r2 = lindblad_evolve(&s, &DensityMatrix::from_ket(&psi), 0.0, 0.0, &o).unwrap();
        let k = r1.final_ket().unwrap();
        let f = r2.final_density().unwrap().expectation_in(&k).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "{f}");
        assert_eq!(r1.times, r2.times);
    }

    #[test]
    fn photon_decay_follows_exponential() {
        let space = FockSpace::new(6).unwrap();
        let s = Schedule::constant(space, CMatrix::zeros(6, 6), 2.0, 2000).unwrap();
        let one = fock::Ket::basis(space, 1).unwrap();
        let kappa = 0.8;
        let r = lindblad_evolve(
            &s,
            &DensityMatrix::from_ket(&one),
            kappa,
            0.3,
            &PropagationOptions::default(),
        )
        .unwrap();
        if let Snapshots::Densities(v) = &r.states {
            for (t, rho) in r.times.iter().zip(v) {
                let n = rho[(1, 1)].re + 2.0 * rho[(2, 2)].re;
                assert!((n - (-kappa * t).exp()).abs() < 1e-6);
            }
        }
    }
}
