//! Headline acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Reference numbers are published values, so a
//! failure here is reported as is rather than tuned away.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::time::{Duration, Instant};

use kerrcat::gates;
use kerrcat::metrics;
use kerrcat::noise::{self, Channel, NoiseConfig, NoiseKind};
use kerrcat::propagate::{Device, PropagationOptions, DEFAULT_STEPS};
use kerrcat::selftest;
use kerrcat::squeeze::{self, SqueezeSpec};
use kerrcat::synth::{self, DriveSource, Gate, PathSpec};
use kerrcat::{Result, C64};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn kerr() -> f64 {
    TAU * 12.5
}

fn device(dim: usize) -> Device {
    Device::new(kerr(), C64::from(0.5), dim).unwrap()
}

fn opts() -> PropagationOptions {
    PropagationOptions::default()
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

fn preset_lambdas() -> Result<Verdict> {
    let rows = [
        ("not", FRAC_PI_2, 0.8089),
        ("hadamard", FRAC_PI_4, 0.3859),
        ("phase", 0.0, 1.4669),
    ];
    let (lams, took) = timed(|| {
        rows.iter()
            .map(|&(_, mu0, _)| synth::solve_lambda(mu0, FRAC_PI_2))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut ok = took < Duration::from_secs(1);
    let mut parts = Vec::new();
    for ((name, _, want), got) in rows.iter().zip(&lams) {
        let hit = (got - want).abs() <= 5e-4;
        ok &= hit;
        parts.push(format!(
            "{name} {got:.6} (want {want} ± 5e-4{})",
            if hit { "" } else { ", off" }
        ));
    }
    verdict(ok, format!("{}; {took:.2?}", parts.join(", ")))
}

fn gate_fidelities() -> Result<Verdict> {
    let dev = device(30);
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, want) in [
        (Gate::Not, 0.9997),
        (Gate::Hadamard, 0.9999),
        (Gate::Phase, 0.9998),
    ] {
        let spec = PathSpec::for_gate(g, 1.0)?;
        let (o, took) = timed(|| {
            gates::single_qubit_gate(
                &dev,
                &spec,
                DriveSource::Analytic(spec),
                DEFAULT_STEPS,
                &opts(),
            )
        })?;
        let hit = (o.fidelity - want).abs() <= 3e-4 && took < Duration::from_secs(30);
        ok &= hit;
        parts.push(format!("{g} {:.6} (want {want}) in {took:.2?}", o.fidelity));
    }
    verdict(ok, parts.join(", "))
}

fn hadamard_elements() -> Result<Verdict> {
    let dev = device(30);
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0)?;
    let o = gates::single_qubit_gate(
        &dev,
        &spec,
        DriveSource::Analytic(spec),
        DEFAULT_STEPS,
        &opts(),
    )?;
    let p_plus = o.block[(0, 0)].norm_sqr();
    let inf_plus = 1.0 - metrics::superposition_fidelity_block(&o.block, true);
    let inf_minus = 1.0 - metrics::superposition_fidelity_block(&o.block, false);
    let ok = (p_plus - 0.5039).abs() <= 2e-3
        && (inf_plus - 4.448e-5).abs() <= 2e-5
        && (inf_minus - 4.475e-5).abs() <= 2e-5;
    verdict(
        ok,
        format!(
            "P+(T) {p_plus:.5} (want 0.5039 ± 2e-3), 1-F+ {inf_plus:.4e} (want 4.448e-5 ± 2e-5), \
             1-F- {inf_minus:.4e} (want 4.475e-5 ± 2e-5)"
        ),
    )
}

fn cnot() -> Result<Verdict> {
    let dev = device(15);
    let spec = PathSpec::for_gate(Gate::Not, 1.0)?;
    let (o, took) = timed(|| {
        gates::controlled_gate(
            &dev,
            &spec,
            DriveSource::Analytic(spec),
            DEFAULT_STEPS,
            &opts(),
        )
    })?;
    let ok = (o.fidelity - 0.9997).abs() <= 3e-4 && took < Duration::from_secs(600);
    verdict(
        ok,
        format!("F {:.6} (want 0.9997 ± 3e-4) in {took:.2?}", o.fidelity),
    )
}

fn gap() -> Result<Verdict> {
    let g = device(30).gap()? * 1e6;
    let ok = (g / 161e6 - 1.0).abs() <= 0.02;
    verdict(ok, format!("E_gap {g:.4e} rad/s (want 1.61e8 ± 2%)"))
}

fn systematic() -> Result<Verdict> {
    let dev = device(30);
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0)?;
    let deltas = linspace(-0.1, 0.1, 21);
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, floor) in [
        (Channel::X, 0.9969),
        (Channel::Y, 0.9973),
        (Channel::Z, 0.9768),
    ] {
        let sweep = noise::systematic_sweep(&dev, &spec, c, &deltas, DEFAULT_STEPS, &opts())?;
        let min = sweep.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hit = min >= floor - 2e-3;
        ok &= hit;
        parts.push(format!("{c:?} min {min:.5} (floor {floor})"));
    }
    verdict(ok, parts.join(", "))
}

fn decoherence() -> Result<Verdict> {
    let dev = device(30);
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0)?;
    let plus = [C64::from(1.0), C64::from(0.0)];
    let o = gates::open_gate(&dev, &spec, plus, 0.05, 0.05, DEFAULT_STEPS, &opts())?;
    let inf = 1.0 - o.fidelity;
    let ok = inf <= 0.0201 + 0.005 && o.subspace_population > 0.995;
    verdict(
        ok,
        format!(
            "1-F {inf:.6} (want <= 0.0251), subspace population {:.5} (want > 0.995)",
            o.subspace_population
        ),
    )
}

fn noise_ensembles() -> Result<Verdict> {
    let dev = device(30);
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [NoiseKind::Awgn, NoiseKind::Pink] {
        let cfg = NoiseConfig::additive(kind, 10.0, 1);
        let s = noise::monte_carlo(&dev, &spec, &cfg, 50, DEFAULT_STEPS, &opts())?;
        let hit = s.count == 50 && s.mean < 1e-3;
        ok &= hit;
        parts.push(format!(
            "{kind:?} mean {:.3e} [min {:.2e}, max {:.2e}]",
            s.mean, s.min, s.max
        ));
    }
    verdict(ok, format!("{} (want mean < 1e-3)", parts.join(", ")))
}

fn squeezing() -> Result<Verdict> {
    let sq = SqueezeSpec::new(1.2, TAU * 3.125)?;
    // t_s = r / (2 ε₂), evaluated by hand: 1.2 / (4π · 3.125) μs
    let t_s_ns = 1.2 / (4.0 * std::f64::consts::PI * 3.125) * 1e3;
    let dev = device(60);
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0)?;
    let plus = [C64::from(1.0), C64::from(0.0)];
    let r = squeeze::amplified_gate_pipeline(
        &dev,
        &spec,
        &sq,
        plus,
        0.05,
        0.05,
        DEFAULT_STEPS,
        &opts(),
    )?;
    let ok = (sq.t_s * 1e3 - 30.56).abs() < 5e-3
        && (sq.t_s * 1e3 - t_s_ns).abs() < 1e-12
        && (r.final_photon_number - 6.732).abs() <= 0.05
        && (r.fidelity - 0.9513).abs() <= 0.01;
    verdict(
        ok,
        format!(
            "t_s {:.3} ns (want 30.56), n_p {:.4} (want 6.732 ± 0.05), F {:.5} (want 0.9513 ± 0.01)",
            sq.t_s * 1e3,
            r.final_photon_number,
            r.fidelity
        ),
    )
}

fn property_suite() -> Result<Verdict> {
    let checks = selftest::run_all()?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.3e} (limit {:.0e})", c.name, c.value, c.limit))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} checks", checks.len())
    } else {
        format!("failed: {}", failed.join("; "))
    };
    verdict(failed.is_empty(), detail)
}

type Criterion = fn() -> Result<Verdict>;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("preset lambda values", preset_lambdas),
        ("single-qubit gate fidelities", gate_fidelities),
        ("Hadamard element-level checks", hadamard_elements),
        ("CNOT fidelity", cnot),
        ("Kerr-cat energy gap", gap),
        ("systematic-error robustness", systematic),
        ("decoherence", decoherence),
        ("noise ensembles", noise_ensembles),
        ("squeezing pipeline", squeezing),
        ("property suite", property_suite),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (tag, detail) = match check() {
            Ok(v) => (if v.passed { "PASS" } else { "FAIL" }, v.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("{tag} {name}: {detail}");
    }
    println!("{} criteria, {failures} failed", criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
