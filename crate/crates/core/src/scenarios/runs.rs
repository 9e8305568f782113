use rayon::prelude::*;
use serde_json::{json, Value};

use super::{Output, Resolved, ScenarioId};
use crate::circuit;
use crate::error::Result;
use crate::fock::FockSpace;
use crate::gates::{self, GateOutcome};
use crate::linalg::{self, C64};
use crate::metrics;
use crate::noise::{self, Channel, NoiseConfig, NoiseKind};
use crate::propagate::{Device, PropagationOptions, Snapshots};
use crate::squeeze::{self, SqueezeSpec};
use crate::synth::{self, fmt15, uniform_grid, DriveSource, EffectiveDrive, Gate, PathSpec};

pub(super) fn run(p: &Resolved, out: &mut Output) -> Result<Value> {
    match p.id {
        ScenarioId::Table1 => table1(p, out),
        ScenarioId::Fig1Bloch => fig1_bloch(p, out),
        ScenarioId::Fig2Sweep => fig2_sweep(p, out),
        ScenarioId::Fig2Waveforms => fig2_waveforms(p, out),
        ScenarioId::Fig3Populations => fig3_populations(p, out),
        ScenarioId::Fig4Cnot => fig4_cnot(p, out),
        ScenarioId::Fig5Noise => fig5_noise(p, out),
        ScenarioId::Fig6Decoherence => fig6_decoherence(p, out),
        ScenarioId::SqueezePipeline => squeeze_pipeline(p, out),
        ScenarioId::CircuitMap => circuit_map(p, out),
    }
}

fn device(p: &Resolved) -> Result<Device> {
    p.device()
}

fn opts() -> PropagationOptions {
    PropagationOptions::default()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn write_rows(
    buf: &mut Vec<u8>,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn table1(_p: &Resolved, out: &mut Output) -> Result<Value> {
    let mut rows = Vec::new();
    let mut head = serde_json::Map::new();
    for g in Gate::ALL {
        let (mu0, eta0, theta) = g.angles();
        let lambda = synth::solve_lambda(mu0, theta)?;
        let phase = synth::geometric_phase(mu0, lambda)?;
        rows.push(vec![
            g.name().to_string(),
            fmt15(mu0),
            fmt15(eta0),
            fmt15(theta),
            fmt15(lambda),
            fmt15(phase),
        ]);
        head.insert(
            g.name().into(),
            json!({"mu0": mu0, "eta0": eta0, "theta": theta, "lambda": lambda, "geometric_phase": phase}),
        );
    }
    out.csv("table1.csv", |b| {
        write_rows(
            b,
            &["gate", "mu0", "eta0", "theta", "lambda", "geometric_phase"],
            rows,
        )
    })?;
    Ok(Value::Object(head))
}

fn fig1_bloch(p: &Resolved, out: &mut Output) -> Result<Value> {
    const SAMPLES: usize = 500;
    let mut head = serde_json::Map::new();
    for g in Gate::ALL {
        let spec = PathSpec::for_gate(g, p.t_us)?;
        let (plus, minus) = metrics::invariant_loops(&spec, SAMPLES)?;
        let times = uniform_grid(spec.total_time, SAMPLES);
        let rows = times
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(t, (a, b))| {
                let mut r = vec![fmt15(*t)];
                r.extend(a.iter().chain(b).map(|x| fmt15(*x)));
                r
            });
        let name = format!("bloch_{}.csv", g.name());
        out.csv(&name, |b| {
            write_rows(
                b,
                &["t", "rp_x", "rp_y", "rp_z", "rm_x", "rm_y", "rm_z"],
                rows,
            )
        })?;
        let (first, last) = (plus[0], plus[SAMPLES]);
        let closure = ((first[0] - last[0]).powi(2)
            + (first[1] - last[1]).powi(2)
            + (first[2] - last[2]).powi(2))
        .sqrt();
        head.insert(
            g.name().into(),
            json!({
                "geometric_phase": synth::phases(&spec)?.geometric_plus,
                // η runs clockwise about +z, so the loop's signed area is −2Θ+
                "half_solid_angle": -0.5 * metrics::solid_angle(&plus),
                "closure_error": closure,
            }),
        );
    }
    Ok(Value::Object(head))
}

fn fig2_sweep(p: &Resolved, out: &mut Output) -> Result<Value> {
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let cases: Vec<(f64, f64)> = p
        .kerrs
        .iter()
        .flat_map(|&k| p.alphas.iter().map(move |&a| (k, a)))
        .collect();
    let fid: Vec<f64> = cases
        .par_iter()
        .map(|&(k, a)| {
            let dev = Device::new(k, C64::from(a), p.dim)?;
            Ok(gates::single_qubit_gate(
                &dev,
                &spec,
                DriveSource::Analytic(spec),
                p.steps,
                &opts(),
            )?
            .fidelity)
        })
        .collect::<Result<_>>()?;
    let rows = cases.iter().zip(&fid).map(|(&(k, a), f)| {
        vec![
            fmt15(k),
            fmt15(k / std::f64::consts::TAU),
            fmt15(a),
            fmt15(*f),
            fmt15(1.0 - f),
        ]
    });
    out.csv("sweep.csv", |b| {
        write_rows(
            b,
            &["kerr", "kerr_mhz", "alpha", "fidelity", "infidelity"],
            rows,
        )
    })?;
    let mut per_k = Vec::new();
    let mut all = true;
    for (i, &k) in p.kerrs.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = (0..p.alphas.len())
            .map(|j| (p.alphas[j], 1.0 - fid[i * p.alphas.len() + j]))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let increasing = pts.windows(2).all(|w| w[1].1 > w[0].1);
        all &= increasing;
        per_k.push(json!({"kerr": k, "infidelity_increasing_in_alpha": increasing}));
    }
    Ok(json!({"gate": p.gate, "per_kerr": per_k, "infidelity_increasing_in_alpha": all}))
}

fn fig2_waveforms(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let frame = dev.frame()?;
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let pulses = synth::single_qubit_controls(&spec, &frame, p.steps)?;
    out.csv("pulses.csv", |b| pulses.write_csv(b))?;
    let drive = EffectiveDrive::sample(&spec, p.steps)?;
    let rows = (0..drive.times().len()).map(|j| {
        vec![
            fmt15(drive.times()[j]),
            fmt15(drive.channel(0)[j]),
            fmt15(drive.channel(1)[j]),
            fmt15(drive.channel(2)[j]),
        ]
    });
    out.csv("omega.csv", |b| {
        write_rows(b, &["t", "omega_x", "omega_y", "omega_z"], rows)
    })?;
    let (mut chi, mut eps) = (0.0f64, 0.0f64);
    for j in 0..pulses.len() {
        let c = pulses.single_at(j).expect("single-qubit schedule");
        chi = chi.max(c.chi.abs());
        eps = eps.max(c.eps.norm());
    }
    let gap = dev.gap()?;
    Ok(json!({
        "gate": p.gate,
        "peak_chi": chi,
        "peak_eps": eps,
        "gap": gap,
        "gap_margin": synth::gap_margin(&pulses, gap),
    }))
}

/// `F̄(t)` against the final target at every stored snapshot.
fn fidelity_trace(o: &GateOutcome) -> Result<Vec<(f64, f64)>> {
    let Snapshots::Kets(states) = &o.result.states else {
        unreachable!("closed runs store kets")
    };
    o.result
        .times
        .iter()
        .zip(states)
        .map(|(t, psi)| {
            let block = linalg::adjoint_mul(&o.target.basis, psi);
            Ok((*t, metrics::fidelity_from_block(&block, &o.target.matrix)?))
        })
        .collect()
}

/// `[input][output]` probabilities and per-input leakage.
fn output_populations(o: &GateOutcome) -> Vec<(Vec<f64>, f64)> {
    let last = o.result.final_state();
    (0..o.block.ncols())
        .map(|j| {
            let probs: Vec<f64> = (0..o.block.nrows())
                .map(|i| o.block[(i, j)].norm_sqr())
                .collect();
            let leak = (last.column(j).norm_squared() - probs.iter().sum::<f64>()).max(0.0);
            (probs, leak)
        })
        .collect()
}

fn fig3_populations(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let frame = dev.frame()?;
    let outcomes: Vec<(Gate, GateOutcome)> = Gate::ALL
        .par_iter()
        .map(|&g| {
            let spec = PathSpec::for_gate(g, p.t_us)?;
            Ok((
                g,
                gates::single_qubit_gate(
                    &dev,
                    &spec,
                    DriveSource::Analytic(spec),
                    p.steps,
                    &opts(),
                )?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut pop_rows = Vec::new();
    let mut trace_rows = Vec::new();
    let mut head = serde_json::Map::new();
    for (g, o) in &outcomes {
        let pops = output_populations(o);
        for (j, (pr, leak)) in pops.iter().enumerate() {
            let input = if j == 0 { "plus" } else { "minus" };
            pop_rows.push(vec![
                g.name().to_string(),
                input.to_string(),
                fmt15(pr[0]),
                fmt15(pr[1]),
                fmt15(*leak),
            ]);
        }
        for (t, f) in fidelity_trace(o)? {
            trace_rows.push(vec![fmt15(t), g.name().to_string(), fmt15(f)]);
        }
        let name = format!("trajectory_{}.csv", g.name());
        out.csv(&name, |b| o.result.write_csv(&frame, b))?;
        head.insert(
            g.name().into(),
            json!({
                "fidelity": o.fidelity,
                "p_plus_from_plus": pops[0].0[0],
                "p_plus_from_minus": pops[1].0[0],
                "superposition_infidelity_plus": 1.0 - metrics::superposition_fidelity_block(&o.block, true),
                "superposition_infidelity_minus": 1.0 - metrics::superposition_fidelity_block(&o.block, false),
                "max_leakage": pops.iter().map(|x| x.1).fold(0.0, f64::max),
            }),
        );
    }
    out.csv("populations.csv", |b| {
        write_rows(
            b,
            &["gate", "input", "p_plus", "p_minus", "leakage"],
            pop_rows,
        )
    })?;
    out.csv("fidelity_trace.csv", |b| {
        write_rows(b, &["t", "gate", "fidelity"], trace_rows)
    })?;
    Ok(Value::Object(head))
}

const TWO_QUBIT_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

fn fig4_cnot(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let o = gates::controlled_gate(&dev, &spec, DriveSource::Analytic(spec), p.steps, &opts())?;
    let pops = output_populations(&o);
    let mut rows = Vec::new();
    for (j, (pr, leak)) in pops.iter().enumerate() {
        for (i, x) in pr.iter().enumerate() {
            rows.push(vec![
                TWO_QUBIT_LABELS[j].to_string(),
                TWO_QUBIT_LABELS[i].to_string(),
                fmt15(*x),
            ]);
        }
        rows.push(vec![
            TWO_QUBIT_LABELS[j].to_string(),
            "leakage".to_string(),
            fmt15(*leak),
        ]);
    }
    out.csv("cnot_populations.csv", |b| {
        write_rows(b, &["input", "output", "probability"], rows)
    })?;
    let trace = fidelity_trace(&o)?;
    out.csv("cnot_fidelity.csv", |b| {
        write_rows(
            b,
            &["t", "fidelity"],
            trace.iter().map(|(t, f)| vec![fmt15(*t), fmt15(*f)]),
        )
    })?;
    Ok(json!({
        "target_rotation": p.gate,
        "fidelity": o.fidelity,
        "max_leakage": pops.iter().map(|x| x.1).fold(0.0, f64::max),
    }))
}

fn ensemble_json(s: &noise::EnsembleStats) -> Value {
    json!({"mean": s.mean, "min": s.min, "max": s.max, "count": s.count, "failed": s.failed})
}

fn fig5_noise(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let deltas = linspace(-p.delta_max, p.delta_max, p.delta_points);
    let mut rows = Vec::new();
    let mut minima = serde_json::Map::new();
    for c in Channel::ALL {
        let sweep = noise::systematic_sweep(&dev, &spec, c, &deltas, p.steps, &opts())?;
        let name = format!("{c:?}").to_lowercase();
        minima.insert(
            name.clone(),
            json!(sweep.iter().map(|x| x.1).fold(f64::INFINITY, f64::min)),
        );
        rows.extend(
            sweep
                .iter()
                .map(|(d, f)| vec![name.clone(), fmt15(*d), fmt15(*f)]),
        );
    }
    out.csv("systematic.csv", |b| {
        write_rows(b, &["channel", "delta", "fidelity"], rows)
    })?;
    let mut ens = serde_json::Map::new();
    for kind in [NoiseKind::Awgn, NoiseKind::Pink] {
        let cfg = NoiseConfig::additive(kind, p.snr_db, p.seed);
        let stats = noise::monte_carlo(&dev, &spec, &cfg, p.runs, p.steps, &opts())?;
        let name = format!("{kind:?}").to_lowercase();
        out.csv(&format!("{name}.csv"), |b| stats.write_csv(b))?;
        ens.insert(name, ensemble_json(&stats));
    }
    Ok(json!({"gate": p.gate, "systematic_min_fidelity": minima, "ensembles": ens}))
}

fn fig6_decoherence(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let axis = linspace(0.0, p.kappa_max, p.grid_points);
    let grid: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&k| axis.iter().map(move |&kp| (k, kp)))
        .collect();
    let plus = [C64::from(1.0), C64::from(0.0)];
    let minus = [C64::from(0.0), C64::from(1.0)];
    let cells: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(k, kp)| {
            let o = gates::open_gate(&dev, &spec, plus, k, kp, p.steps, &opts())?;
            Ok((1.0 - o.fidelity, o.subspace_population))
        })
        .collect::<Result<_>>()?;
    let rows = grid
        .iter()
        .zip(&cells)
        .map(|(&(k, kp), &(inf, pop))| vec![fmt15(k), fmt15(kp), fmt15(inf), fmt15(pop)]);
    out.csv("decoherence.csv", |b| {
        write_rows(
            b,
            &["kappa", "kappa_phi", "infidelity", "subspace_population"],
            rows,
        )
    })?;

    let runs: Vec<(&str, gates::OpenOutcome)> = [("plus", plus), ("minus", minus)]
        .par_iter()
        .map(|&(name, input)| {
            Ok((
                name,
                gates::open_gate(&dev, &spec, input, p.kappa, p.kappa_phi, p.steps, &opts())?,
            ))
        })
        .collect::<Result<_>>()?;
    let frame = dev.frame()?;
    let mut rows = Vec::new();
    let mut head_inputs = serde_json::Map::new();
    for (name, o) in &runs {
        let pops = metrics::populations_density(&o.result.final_density()?, &frame)?;
        rows.push(vec![
            name.to_string(),
            fmt15(pops.plus),
            fmt15(pops.minus),
            fmt15(pops.leakage),
        ]);
        head_inputs.insert(
            name.to_string(),
            json!({"infidelity": 1.0 - o.fidelity, "subspace_population": o.subspace_population}),
        );
    }
    out.csv("populations.csv", |b| {
        write_rows(b, &["input", "p_plus", "p_minus", "leakage"], rows)
    })?;
    Ok(json!({
        "gate": p.gate,
        "kappa": p.kappa,
        "kappa_phi": p.kappa_phi,
        "max_grid_infidelity": cells.iter().map(|c| c.0).fold(0.0, f64::max),
        "inputs": head_inputs,
    }))
}

fn squeeze_pipeline(p: &Resolved, out: &mut Output) -> Result<Value> {
    let dev = device(p)?;
    let spec = PathSpec::for_gate(p.gate, p.t_us)?;
    let sq = SqueezeSpec::new(p.squeeze_r, p.squeeze_eps2)?;
    let r = squeeze::amplified_gate_pipeline(
        &dev,
        &spec,
        &sq,
        [C64::from(1.0), C64::from(0.0)],
        p.kappa,
        p.kappa_phi,
        p.steps,
        &opts(),
    )?;
    out.csv("photon_number.csv", |b| r.write_csv(b))?;
    Ok(json!({
        "gate": p.gate,
        "t_s_us": sq.t_s,
        "fidelity": r.fidelity,
        "final_photon_number": r.final_photon_number,
        "squeeze_tail_weight": r.squeeze_tail_weight,
    }))
}

fn circuit_map(p: &Resolved, out: &mut Output) -> Result<Value> {
    let cp = p.circuit;
    let ep = circuit::effective_params(&cp)?;
    let inv = circuit::invert(&ep, cp.n_squids)?;
    out.json(
        "circuit.json",
        &json!({"schema_version": super::SCHEMA_VERSION, "circuit": cp, "effective": ep, "inversion": inv}),
    )?;
    let m = p.error_max;
    let mut rows = Vec::new();
    let (mut quoted, mut resolved) = (0.0f64, 0.0f64);
    for d_ec in [-m, 0.0, m] {
        for d_ej in [-m, 0.0, m] {
            let e = circuit::error_propagation(&cp, d_ec, d_ej, 0.0)?;
            quoted = quoted.max(e.d_alpha.abs());
            resolved = resolved.max(e.d_alpha_resolved.abs());
            rows.push(
                [
                    d_ec,
                    d_ej,
                    e.d_omega_c,
                    e.d_k,
                    e.d_eps2,
                    e.d_eps_fraction,
                    e.d_alpha,
                    e.d_alpha_resolved,
                ]
                .iter()
                .map(|x| fmt15(*x))
                .collect(),
            );
        }
    }
    out.csv("circuit_errors.csv", |b| {
        write_rows(
            b,
            &[
                "d_ec",
                "d_ej",
                "d_omega_c",
                "d_k",
                "d_eps2",
                "d_eps_fraction",
                "d_alpha",
                "d_alpha_resolved",
            ],
            rows,
        )
    })?;
    let space = FockSpace::new(p.dim)?;
    let worst = |d: f64| -> Result<f64> {
        Ok(circuit::amplitude_infidelity(ep.alpha, d, space)?
            .max(circuit::amplitude_infidelity(ep.alpha, -d, space)?))
    };
    Ok(json!({
        "effective": ep,
        "max_abs_d_alpha": quoted,
        "max_abs_d_alpha_resolved": resolved,
        "amplitude_infidelity": worst(quoted)?,
        "amplitude_infidelity_resolved": worst(resolved)?,
    }))
}
