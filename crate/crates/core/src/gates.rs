//! End-to-end gate runs: synthesize, propagate the computational basis, score.

use crate::error::Result;
use crate::fock::{CatFrame, DensityMatrix};
use crate::linalg::{self, CMatrix};
use crate::metrics::{self, GateTarget};
use crate::propagate::{
    self, single_qubit_schedule, two_qubit_schedule, Device, PropagationOptions, SimResult,
};
use crate::synth::{ideal_unitary, DriveSource, PathSpec};

/// A scored gate run.
#[derive(Clone, Debug)]
pub struct GateOutcome {
    pub fidelity: f64,
    /// `B† U(T) B` on the computational subspace.
    pub block: CMatrix,
    pub target: GateTarget,
    /// Trajectories of the basis states, one column each.
    pub result: SimResult,
}

impl GateOutcome {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Single-qubit gate driven by `source`, scored against the ideal gate of
/// `spec`.
pub fn single_qubit_gate(
    device: &Device,
    spec: &PathSpec,
    source: DriveSource,
    n_steps: usize,
    opts: &PropagationOptions,
) -> Result<GateOutcome> {
    let frame = device.frame()?;
    let target = GateTarget::for_spec("gate", spec, &frame)?;
    let schedule = single_qubit_schedule(device, source, n_steps)?;
    score(&schedule, target, opts)
}

/// Controlled rotation (mode 1 controls mode 2) scored against
/// `|C+⟩⟨C+| ⊗ 1 + |C−⟩⟨C−| ⊗ U_s`.
pub fn controlled_gate(
    device: &Device,
    spec: &PathSpec,
    source: DriveSource,
    n_steps: usize,
    opts: &PropagationOptions,
) -> Result<GateOutcome> {
    let frame = device.two_mode_frame()?;
    let target = GateTarget::controlled("controlled", &ideal_unitary(spec)?, &frame)?;
    let schedule = two_qubit_schedule(device, source, n_steps)?;
    score(&schedule, target, opts)
}

fn score(
    schedule: &propagate::Schedule,
    target: GateTarget,
    opts: &PropagationOptions,
) -> Result<GateOutcome> {
    let result = propagate::evolve_batch(schedule, &target.basis, opts)?;
    let block = linalg::adjoint_mul(&target.basis, result.final_state());
    let fidelity = metrics::fidelity_from_block(&block, &target.matrix)?;
    Ok(GateOutcome {
        fidelity,
        block,
        target,
        result,
    })
}

/// Open-system Hadamard-style run: `ρ(0) = |ψ0⟩⟨ψ0|`, scored against
/// `U_s|ψ0⟩`.
#[derive(Clone, Debug)]
pub struct OpenOutcome {
    pub fidelity: f64,
    /// `Tr[P_c ρ(T)]`.
    pub subspace_population: f64,
    pub result: SimResult,
}

pub fn open_gate(
    device: &Device,
    spec: &PathSpec,
    input: [crate::C64; 2],
    kappa: f64,
    kappa_phi: f64,
    n_steps: usize,
    opts: &PropagationOptions,
) -> Result<OpenOutcome> {
    let frame: CatFrame = device.frame()?;
    let psi0 = frame.embed(input)?;
    let u = ideal_unitary(spec)?;
    let out = [
        u[(0, 0)] * input[0] + u[(0, 1)] * input[1],
        u[(1, 0)] * input[0] + u[(1, 1)] * input[1],
    ];
    let want = frame.embed(out)?;
    let schedule = single_qubit_schedule(device, DriveSource::Analytic(*spec), n_steps)?;
    let result = propagate::lindblad_evolve(
        &schedule,
        &DensityMatrix::from_ket(&psi0),
        kappa,
        kappa_phi,
        opts,
    )?;
    let rho = result.final_density()?;
    let fidelity = metrics::state_fidelity(&rho, &want)?;
    let p = metrics::populations_density(&rho, &frame)?;
    Ok(OpenOutcome {
        fidelity,
        subspace_population: p.plus + p.minus,
        result,
    })
}
