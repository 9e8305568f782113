use std::f64::consts::TAU;

use kerrcat::fock::{self, FockSpace, Ket};
use kerrcat::propagate::{self, Device, PropagationOptions, Schedule};
use kerrcat::squeeze::{self, SqueezeSpec, Stage};
use kerrcat::synth::{Gate, PathSpec};
use kerrcat::{CMatrix, C64};

/// `S(r)|0⟩ = cosh(r)^{-1/2} Σ_m tanh(r)^m √((2m)!)/(2^m m!) |2m⟩`.
fn squeezed_vacuum(r: f64, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    let mut coef = 1.0 / r.cosh().sqrt();
    for m in 0..dim.div_ceil(2) {
        if 2 * m >= dim {
            break;
        }
        c[2 * m] = coef;
        // ratio of consecutive terms: tanh(r) √((2m+1)(2m+2)) / (2(m+1))
        coef *= r.tanh() * (((2 * m + 1) * (2 * m + 2)) as f64).sqrt() / (2.0 * (m + 1) as f64);
    }
    c
}

#[test]
fn squeeze_operator_matches_the_fock_expansion() {
    let dim = 140;
    let s = squeeze::squeeze_operator(1.2, FockSpace::new(dim).unwrap()).unwrap();
    let want = squeezed_vacuum(1.2, dim);
    for n in 0..40 {
        assert!((s[(n, 0)] - C64::from(want[n])).norm() < 1e-10, "n = {n}");
    }
    let n_mean: f64 = (0..dim).map(|n| n as f64 * s[(n, 0)].norm_sqr()).sum();
    assert!((n_mean - 1.2f64.sinh().powi(2)).abs() < 1e-8);
}

#[test]
fn squeeze_generator_applied_for_t_s_gives_the_squeeze_operator() {
    let sp = FockSpace::new(80).unwrap();
    let spec = SqueezeSpec::new(0.8, TAU * 3.125).unwrap();
    let h = squeeze::squeeze_generator(spec.eps2, 1, sp).unwrap();
    assert!(h.is_hermitian(1e-12));
    let sched = Schedule::constant(sp, h.into_matrix(), spec.t_s, 200).unwrap();
    let r = propagate::evolve_state(
        &sched,
        &Ket::basis(sp, 0).unwrap(),
        &PropagationOptions::default(),
    )
    .unwrap();
    let s = squeeze::squeeze_operator(0.8, sp).unwrap();
    let psi = r.final_ket().unwrap();
    let ov = psi.amplitudes().dotc(&s.column(0).into_owned());
    assert!(1.0 - ov.norm_sqr() < 1e-10);
    // the opposite sign undoes it
    let back = squeeze::squeeze_generator(spec.eps2, -1, sp).unwrap();
    let sched = Schedule::constant(sp, back.into_matrix(), spec.t_s, 200).unwrap();
    let r2 = propagate::evolve_state(&sched, &psi, &PropagationOptions::default()).unwrap();
    assert!(1.0 - r2.final_ket().unwrap().amplitudes()[0].norm_sqr() < 1e-9);
}

#[test]
fn squeeze_time_and_validation() {
    let s = SqueezeSpec::new(1.2, TAU * 3.125).unwrap();
    assert!((s.t_s - 1.2 / (2.0 * TAU * 3.125)).abs() < 1e-16);
    assert!(SqueezeSpec::new(0.0, 1.0).is_err());
    assert!(SqueezeSpec::new(1.0, -1.0).is_err());
    assert!(squeeze::squeeze_generator(1.0, 0, FockSpace::new(5).unwrap()).is_err());
}

#[test]
fn squeeze_operator_is_unitary_and_inverts() {
    let sp = FockSpace::new(60).unwrap();
    let s = squeeze::squeeze_operator(0.6, sp).unwrap();
    let sinv = squeeze::squeeze_operator(-0.6, sp).unwrap();
    assert!((s.adjoint() * &s - CMatrix::identity(60, 60)).norm() < 1e-10);
    let prod = &sinv * &s;
    // exact on low Fock states, where truncation is invisible
    for n in 0..10 {
        assert!((prod[(n, n)] - C64::from(1.0)).norm() < 1e-8);
    }
}

#[test]
fn closed_pipeline_runs_three_stages_and_amplifies_photons() {
    let dev = Device::new(TAU * 12.5, C64::from(0.5), 50).unwrap();
    let spec = PathSpec::for_gate(Gate::Hadamard, 1.0).unwrap();
    let sq = SqueezeSpec::new(1.2, TAU * 3.125).unwrap();
    let plus = [C64::from(1.0), C64::from(0.0)];
    let r = squeeze::amplified_gate_pipeline(
        &dev,
        &spec,
        &sq,
        plus,
        0.0,
        0.0,
        4000,
        &PropagationOptions::default(),
    )
    .unwrap();
    assert!(r.times.windows(2).all(|w| w[1] >= w[0]));
    let order: Vec<Stage> = r.stage.iter().fold(Vec::new(), |mut v, s| {
        if v.last() != Some(s) {
            v.push(*s);
        }
        v
    });
    assert_eq!(order, vec![Stage::AntiSqueeze, Stage::Gate, Stage::Squeeze]);
    assert!((r.times.last().unwrap() - (1.0 + 2.0 * sq.t_s)).abs() < 1e-12);
    // anti-squeezing brings the cat back to its bare photon number
    let frame = dev.frame().unwrap();
    let bare = frame.mean_photons_plus();
    let gate_start = r.stage.iter().position(|s| *s == Stage::Gate).unwrap();
    assert!((r.photon_number[gate_start] - bare).abs() < 1e-3);
    assert!(r.final_photon_number > 6.0);
    assert!(r.fidelity > 0.999, "{}", r.fidelity);
    assert!(fock::number(dev.space()).is_ok());
}
