//! Invariant-based reverse engineering of geometric gates.
//!
//! A gate is fixed by a [`PathSpec`]: the invariant `I(t) = ζ(t)·σ` follows
//! the trigonometric path
//!
//! ```text
//! μ(t) = μ₀ + Λ sin²(πt/T),    η(t) = η₀ + π[1 − cos(πt/T)]
//! ζ    = (sin η sin μ, cos η sin μ, cos μ)
//! ```
//!
//! and the effective qubit drive `Ω·σ` is chosen so that `ζ̇ = 2Ω×ζ` with no
//! dynamical phase. After one period the cat qubit picks up
//! `U_s = exp(iΘ ζ(0)·σ)` with `Θ = ∫ η̇ sin²(μ/2) dt`.

mod controls;
mod invariant;

pub(crate) use controls::fmt15;
pub use controls::{
    gap_margin, single_qubit_controls, two_qubit_controls, Channels, DriveMap, PulseSchedule,
    SingleControls, TwoQubitControls,
};
pub use invariant::{verify_invariant, InvariantState};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::numeric;

/// Quadrature tolerance for phase integrals.
const PHASE_TOL: f64 = 1e-12;

/// Parameters of one invariant path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub mu0: f64,
    pub eta0: f64,
    pub lambda_amp: f64,
    /// Gate duration `T` in μs.
    pub total_time: f64,
    pub theta_target: f64,
}

/// The single-qubit gates with preset path parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Not,
    Hadamard,
    Phase,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::Not, Gate::Hadamard, Gate::Phase];

    /// `(μ₀, η₀, θ)` for the preset.
    pub fn angles(self) -> (f64, f64, f64) {
        match self {
            Gate::Not => (FRAC_PI_2, FRAC_PI_2, FRAC_PI_2),
            Gate::Hadamard => (FRAC_PI_4, FRAC_PI_2, FRAC_PI_2),
            Gate::Phase => (0.0, 0.0, FRAC_PI_2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Not => "not",
            Gate::Hadamard => "hadamard",
            Gate::Phase => "phase",
        }
    }

    /// The textbook matrix in the `(C+, C−)` basis (X, H or Z).
    pub fn textbook_matrix(self) -> CMatrix {
        let o = C64::from(1.0);
        let z = C64::from(0.0);
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        match self {
            Gate::Not => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Gate::Hadamard => CMatrix::from_row_slice(2, 2, &[h, h, h, -h]),
            Gate::Phase => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "not" | "x" => Ok(Gate::Not),
            "hadamard" | "h" => Ok(Gate::Hadamard),
            "phase" | "pi-phase" | "z" => Ok(Gate::Phase),
            other => Err(Error::Config(format!(
                "unknown gate {other:?}; expected not, hadamard or phase"
            ))),
        }
    }
}

impl PathSpec {
    /// Builds and validates a spec with an explicit `Λ`.
    pub fn new(
        mu0: f64,
        eta0: f64,
        lambda_amp: f64,
        total_time: f64,
        theta_target: f64,
    ) -> Result<Self> {
        let spec = PathSpec {
            mu0,
            eta0,
            lambda_amp,
            total_time,
            theta_target,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Preset angles with `Λ` solved from the target phase.
    pub fn for_gate(gate: Gate, total_time: f64) -> Result<Self> {
        let (mu0, eta0, theta) = gate.angles();
        let lambda = solve_lambda(mu0, theta)?;
        Self::new(mu0, eta0, lambda, total_time, theta)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu0,
            self.eta0,
            self.lambda_amp,
            self.total_time,
            self.theta_target,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "path parameters must be finite".into(),
            ));
        }
        if self.total_time <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gate time must be positive, got {}",
                self.total_time
            )));
        }
        if !(0.0..=PI).contains(&self.mu0) {
            return Err(Error::InvalidParameter(format!(
                "mu0 = {} outside [0, pi]",
                self.mu0
            )));
        }
        let end = self.mu0 + self.lambda_amp;
        if !(0.0..=PI).contains(&end) {
            return Err(Error::InvalidParameter(format!(
                "mu0 + Lambda = {end} leaves [0, pi]"
            )));
        }
        Ok(())
    }

    /// `ζ(t)`
    pub fn zeta(&self, t: f64) -> Result<[f64; 3]> {
        let p = path_eval(t, self)?;
        Ok(zeta_of(p.mu, p.eta))
    }
}

/// Path angles and their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub mu: f64,
    pub eta: f64,
    pub mu_dot: f64,
    pub eta_dot: f64,
}

/// Evaluates `(μ, η, μ̇, η̇)` at `t ∈ [0, T]`.
pub fn path_eval(t: f64, spec: &PathSpec) -> Result<PathPoint> {
    let tt = spec.total_time;
    // tolerate rounding at the endpoints of a sampled grid
    let slack = 1e-12 * tt;
    if !(t >= -slack && t <= tt + slack) {
        return Err(Error::Domain(format!("t = {t} outside [0, {tt}]")));
    }
    Ok(path_unchecked(t.clamp(0.0, tt), spec))
}

fn path_unchecked(t: f64, spec: &PathSpec) -> PathPoint {
    let w = PI / spec.total_time;
    let (s, c) = (w * t).sin_cos();
    PathPoint {
        mu: spec.mu0 + spec.lambda_amp * s * s,
        eta: spec.eta0 + PI * (1.0 - c),
        mu_dot: 2.0 * spec.lambda_amp * s * c * w,
        eta_dot: PI * w * s,
    }
}

pub(crate) fn zeta_of(mu: f64, eta: f64) -> [f64; 3] {
    let (sm, cm) = mu.sin_cos();
    let (se, ce) = eta.sin_cos();
    [se * sm, ce * sm, cm]
}

/// Effective SU(2) drive `(Ωx, Ωy, Ωz)` in rad/μs.
///
/// ```text
/// Ωx = ¼[η̇ sin η sin 2μ − 2μ̇ cos η]
/// Ωy = ¼[η̇ cos η sin 2μ + 2μ̇ sin η]
/// Ωz = −½ η̇ sin² μ
/// ```
///
/// This is `Ω = ½ ζ×ζ̇`, the unique drive transverse to `ζ` that moves the
/// invariant along the path, so the dynamical phase `Ω·ζ` vanishes.
pub fn effective_drive(t: f64, spec: &PathSpec) -> Result<[f64; 3]> {
    Ok(omega_from_path(&path_eval(t, spec)?))
}

pub(crate) fn omega_from_path(p: &PathPoint) -> [f64; 3] {
    let (se, ce) = p.eta.sin_cos();
    let s2m = (2.0 * p.mu).sin();
    let sm = p.mu.sin();
    [
        0.25 * (p.eta_dot * se * s2m - 2.0 * p.mu_dot * ce),
        0.25 * (p.eta_dot * ce * s2m + 2.0 * p.mu_dot * se),
        -0.5 * p.eta_dot * sm * sm,
    ]
}

/// Geometric and dynamical phases accumulated over one period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phases {
    pub geometric_plus: f64,
    pub geometric_minus: f64,
    pub dynamical_plus: f64,
    pub dynamical_minus: f64,
}

/// `Θ±(T) = ±∫ η̇ sin²(μ/2) dt` and the dynamical residuals `∓∫ Ω·ζ dt`.
pub fn phases(spec: &PathSpec) -> Result<Phases> {
    spec.validate()?;
    let theta = geometric_phase(spec.mu0, spec.lambda_amp)?;
    let s = *spec;
    let dynamical = numeric::integrate(
        |t| {
            let p = path_unchecked(t, &s);
            let o = omega_from_path(&p);
            let z = zeta_of(p.mu, p.eta);
            o[0] * z[0] + o[1] * z[1] + o[2] * z[2]
        },
        0.0,
        spec.total_time,
        PHASE_TOL,
    )
    .map_err(|e| e.context("dynamical phase"))?;
    Ok(Phases {
        geometric_plus: theta,
        geometric_minus: -theta,
        dynamical_plus: -dynamical,
        dynamical_minus: dynamical,
    })
}

/// `Θ+` as a function of `(μ₀, Λ)`; independent of `T` and `η₀`.
pub fn geometric_phase(mu0: f64, lambda_amp: f64) -> Result<f64> {
    // substitute s = t/T: Θ = ∫₀¹ π² sin(πs) sin²(μ(s)/2) ds
    numeric::integrate(
        |s| {
            let sp = (PI * s).sin();
            let half = 0.5 * (mu0 + lambda_amp * sp * sp);
            PI * PI * sp * half.sin().powi(2)
        },
        0.0,
        1.0,
        PHASE_TOL,
    )
    .map_err(|e| e.context("geometric phase"))
}

/// Finds `Λ` such that `Θ+(Λ) ≡ θ (mod π)`.
///
/// Gates differing by `Θ → Θ + π` are equal up to the global phase −1, so
/// the smallest branch `θ + kπ` (k = 0, 1, …) that changes sign on the
/// admissible bracket `[1e−6, min(π−μ₀, π) − 1e−6]` is used. For the NOT
/// preset this is `k = 1`, because `Θ+(Λ) ≥ π` there.
pub fn solve_lambda(mu0: f64, theta_target: f64) -> Result<f64> {
    if !(theta_target > 0.0 && theta_target < 2.0 * PI) {
        return Err(Error::Domain(format!(
            "theta = {theta_target} outside (0, 2pi)"
        )));
    }
    if !(0.0..PI).contains(&mu0) {
        return Err(Error::Domain(format!("mu0 = {mu0} outside [0, pi)")));
    }
    let lo = 1e-6;
    let hi = (PI - mu0).min(PI) - 1e-6;
    if hi <= lo {
        return Err(Error::NoSolution(format!(
            "empty Lambda bracket for mu0 = {mu0}"
        )));
    }
    let f_lo = geometric_phase(mu0, lo)?;
    let f_hi = geometric_phase(mu0, hi)?;
    for k in 0..4 {
        let target = theta_target + k as f64 * PI;
        if (f_lo - target).signum() != (f_hi - target).signum() {
            return numeric::brent(|l| Ok(geometric_phase(mu0, l)? - target), lo, hi, 1e-13)
                .map_err(|e| e.context(format!("solving Lambda for mu0 = {mu0}")));
        }
    }
    Err(Error::NoSolution(format!(
        "Theta(Lambda) on [{lo}, {hi}] spans [{f_lo}, {f_hi}], which contains no theta + k*pi for theta = {theta_target}"
    )))
}

/// `exp(iθ n·σ)` for the unit vector `n = ζ(μ₀, η₀)`.
pub fn rotation(mu0: f64, eta0: f64, theta: f64) -> CMatrix {
    let n = zeta_of(mu0, eta0);
    let (s, c) = theta.sin_cos();
    let i = C64::i();
    // n·σ = [[nz, nx − i ny], [nx + i ny, −nz]]
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, s * n[2]),
            i * s * C64::new(n[0], -n[1]),
            i * s * C64::new(n[0], n[1]),
            C64::new(c, -s * n[2]),
        ],
    )
}

/// The ideal cat-basis unitary `U_s = exp(iΘ+ ζ(0)·σ)` with `Θ+` from
/// [`phases`].
pub fn ideal_unitary(spec: &PathSpec) -> Result<CMatrix> {
    let ph = phases(spec)?;
    Ok(rotation(spec.mu0, spec.eta0, ph.geometric_plus))
}

/// Sampled `Ω(t)` on a uniform grid; perturbed copies drive noisy runs.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveDrive {
    times: Vec<f64>,
    omega: [Vec<f64>; 3],
}

impl EffectiveDrive {
    /// Samples `n_steps + 1` points over `[0, T]`.
    pub fn sample(spec: &PathSpec, n_steps: usize) -> Result<Self> {
        spec.validate()?;
        if n_steps < 1 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        let times = uniform_grid(spec.total_time, n_steps);
        let mut omega = [
            vec![0.0; n_steps + 1],
            vec![0.0; n_steps + 1],
            vec![0.0; n_steps + 1],
        ];
        for (j, &t) in times.iter().enumerate() {
            let o = omega_from_path(&path_unchecked(t, spec));
            for k in 0..3 {
                omega[k][j] = o[k];
            }
        }
        Ok(EffectiveDrive { times, omega })
    }

    pub fn from_parts(times: Vec<f64>, omega: [Vec<f64>; 3]) -> Result<Self> {
        if times.len() < 2 || omega.iter().any(|c| c.len() != times.len()) {
            return Err(Error::DimensionMismatch(
                "drive channels and grid differ in length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "drive grid must be strictly increasing".into(),
            ));
        }
        if omega.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "drive samples must be finite".into(),
            ));
        }
        Ok(EffectiveDrive { times, omega })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Channel `k` (0 = x, 1 = y, 2 = z).
    pub fn channel(&self, k: usize) -> &[f64] {
        &self.omega[k]
    }

    pub fn channel_mut(&mut self, k: usize) -> &mut Vec<f64> {
        &mut self.omega[k]
    }

    pub fn total_time(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn at(&self, t: f64) -> [f64; 3] {
        let n = self.times.len();
        let t0 = self.times[0];
        let t1 = self.times[n - 1];
        if t <= t0 {
            return [self.omega[0][0], self.omega[1][0], self.omega[2][0]];
        }
        if t >= t1 {
            return [
                self.omega[0][n - 1],
                self.omega[1][n - 1],
                self.omega[2][n - 1],
            ];
        }
        // uniform grids hit the right cell directly; fall back to search
        let guess = (((t - t0) / (t1 - t0)) * (n - 1) as f64) as usize;
        let j = if guess + 1 < n && self.times[guess] <= t && t <= self.times[guess + 1] {
            guess
        } else {
            self.times
                .partition_point(|&x| x <= t)
                .saturating_sub(1)
                .min(n - 2)
        };
        let w = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        std::array::from_fn(|k| (1.0 - w) * self.omega[k][j] + w * self.omega[k][j + 1])
    }
}

pub(crate) fn uniform_grid(total: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps)
        .map(|j| {
            if j == n_steps {
                total
            } else {
                total * j as f64 / n_steps as f64
            }
        })
        .collect()
}

/// Where the propagator reads `Ω(t)` from.
#[derive(Clone, Debug)]
pub enum DriveSource {
    /// Closed-form path.
    Analytic(PathSpec),
    /// Sampled (possibly perturbed) waveform.
    Sampled(EffectiveDrive),
}

impl DriveSource {
    pub fn omega(&self, t: f64) -> [f64; 3] {
        match self {
            DriveSource::Analytic(spec) => {
                omega_from_path(&path_unchecked(t.clamp(0.0, spec.total_time), spec))
            }
            DriveSource::Sampled(d) => d.at(t),
        }
    }

    pub fn total_time(&self) -> f64 {
        match self {
            DriveSource::Analytic(spec) => spec.total_time,
            DriveSource::Sampled(d) => d.total_time(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[test]
    fn path_endpoints_and_midpoint() {
        let spec = PathSpec::new(0.3, 0.2, 0.5, 2.0, 1.0).unwrap();
        let p0 = path_eval(0.0, &spec).unwrap();
        assert_eq!((p0.mu, p0.eta, p0.mu_dot, p0.eta_dot), (0.3, 0.2, 0.0, 0.0));
        let p1 = path_eval(2.0, &spec).unwrap();
        assert!((p1.mu - 0.3).abs() < 1e-15 && (p1.eta - 0.2 - 2.0 * PI).abs() < 1e-14);
        assert!(p1.mu_dot.abs() < 1e-14 && p1.eta_dot.abs() < 1e-14);
        let pm = path_eval(1.0, &spec).unwrap();
        assert!((pm.mu - 0.8).abs() < 1e-15 && (pm.eta - 0.2 - PI).abs() < 1e-15);
        assert!(pm.mu_dot.abs() < 1e-14 && (pm.eta_dot - PI * PI / 2.0).abs() < 1e-14);
        assert!(matches!(path_eval(2.1, &spec), Err(Error::Domain(_))));
    }

    #[test]
    fn drive_is_half_cross_product_of_path_velocity() {
        let spec = PathSpec::new(FRAC_PI_4, FRAC_PI_2, 0.39, 1.0, FRAC_PI_2).unwrap();
        for &t in &[0.05, 0.3, 0.61, 0.9] {
            let h = 1e-6;
            let zp = spec.zeta(t + h).unwrap();
            let zm = spec.zeta(t - h).unwrap();
            let zd = [
                (zp[0] - zm[0]) / (2.0 * h),
                (zp[1] - zm[1]) / (2.0 * h),
                (zp[2] - zm[2]) / (2.0 * h),
            ];
            let want = cross(spec.zeta(t).unwrap(), zd);
            let o = effective_drive(t, &spec).unwrap();
            for k in 0..3 {
                assert!((2.0 * o[k] - want[k]).abs() < 1e-6, "k={k} t={t}");
            }
        }
        assert_eq!(effective_drive(0.0, &spec).unwrap(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn closed_form_phase_limits() {
        let mu0 = 0.7;
        let th = geometric_phase(mu0, 0.0).unwrap();
        assert!((th - 2.0 * PI * (mu0 / 2.0).sin().powi(2)).abs() < 1e-12);
        assert!(geometric_phase(0.0, 0.0).unwrap().abs() < 1e-14);
        let spec = PathSpec::new(1.0, 0.4, 0.6, 3.0, 1.0).unwrap();
        let ph = phases(&spec).unwrap();
        assert!((ph.geometric_plus + ph.geometric_minus).abs() < 1e-15);
        assert!(ph.dynamical_plus.abs() < 1e-10);
        // T-independence
        let spec2 = PathSpec {
            total_time: 0.25,
            ..spec
        };
        assert!((phases(&spec2).unwrap().geometric_plus - ph.geometric_plus).abs() < 1e-11);
    }

    #[test]
    fn preset_roots_hit_their_phase_branch() {
        for gate in Gate::ALL {
            let (mu0, _, theta) = gate.angles();
            let l = solve_lambda(mu0, theta).unwrap();
            let th = geometric_phase(mu0, l).unwrap();
            let k = ((th - theta) / PI).round();
            assert!((th - theta - k * PI).abs() < 1e-8, "{gate}: {th}");
            assert_eq!(l.to_bits(), solve_lambda(mu0, theta).unwrap().to_bits());
        }
    }

    #[test]
    fn rotation_presets_are_textbook_up_to_phase() {
        for gate in Gate::ALL {
            let spec = PathSpec::for_gate(gate, 1.0).unwrap();
            let u = ideal_unitary(&spec).unwrap();
            let g = gate.textbook_matrix();
            let overlap = (g.adjoint() * &u).trace().norm() / 2.0;
            assert!((overlap - 1.0).abs() < 1e-8, "{gate}: {overlap}");
        }
        let u = rotation(0.0, 1.3, 0.4);
        assert!((u[(0, 0)] - C64::from_polar(1.0, 0.4)).norm() < 1e-15);
        assert!((u[(1, 1)] - C64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn sampled_drive_interpolates_exactly_on_nodes() {
        let spec = PathSpec::for_gate(Gate::Hadamard, 1.0).unwrap();
        let d = EffectiveDrive::sample(&spec, 100).unwrap();
        for j in [0usize, 17, 50, 100] {
            let t = d.times()[j];
            assert_eq!(d.at(t), effective_drive(t, &spec).unwrap());
        }
        let mid = d.at(0.005);
        let a = d.at(0.0);
        let b = d.at(0.01);
        for k in 0..3 {
            assert!((mid[k] - 0.5 * (a[k] + b[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(PathSpec::new(0.5, 0.0, 0.1, 0.0, 1.0).is_err());
        assert!(PathSpec::new(-0.1, 0.0, 0.1, 1.0, 1.0).is_err());
        assert!(PathSpec::new(3.0, 0.0, 0.5, 1.0, 1.0).is_err());
        assert!(solve_lambda(0.5, 0.0).is_err());
        assert!("cnot".parse::<Gate>().is_err());
        assert_eq!("H".parse::<Gate>().unwrap(), Gate::Hadamard);
    }
}
