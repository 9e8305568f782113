use std::f64::consts::TAU;

use kerrcat::fock::{self, FockSpace, Ket};
use kerrcat::{CVector, C64};

fn poisson(mean: f64, n: usize) -> f64 {
    let mut p = (-mean).exp();
    for k in 1..=n {
        p *= mean / k as f64;
    }
    p
}

#[test]
fn ladder_elements_are_square_roots() {
    let sp = FockSpace::new(12).unwrap();
    let a = fock::ladder(sp).unwrap();
    for n in 1..12 {
        let z = a.matrix()[(n - 1, n)];
        assert!((z.re - (n as f64).sqrt()).abs() < 1e-15 && z.im == 0.0);
    }
    let n = fock::number(sp).unwrap();
    for k in 0..12 {
        assert_eq!(n.matrix()[(k, k)].re, k as f64);
    }
}

#[test]
fn coherent_state_matches_poisson_statistics() {
    let alpha = C64::from_polar(1.3, 0.4);
    let psi = fock::coherent_state(alpha, FockSpace::new(40).unwrap()).unwrap();
    for n in 0..15 {
        let p = psi.amplitudes()[n].norm_sqr();
        assert!((p - poisson(alpha.norm_sqr(), n)).abs() < 1e-13, "n = {n}");
    }
    let a = fock::ladder(psi.space()).unwrap();
    let ev = a.expectation(&psi).unwrap();
    assert!((ev - alpha).norm() < 1e-12);
}

#[test]
fn cat_photon_numbers_follow_tanh_and_coth() {
    for r in [0.3, 0.5, 1.1] {
        let f = fock::cat_frame(C64::from(r), FockSpace::new(40).unwrap()).unwrap();
        let n = fock::number(f.space()).unwrap();
        let a2 = r * r;
        let plus = n.expectation(f.c_plus()).unwrap().re;
        let minus = n.expectation(f.c_minus()).unwrap().re;
        assert!((plus - a2 * a2.tanh()).abs() < 1e-12);
        assert!((minus - a2 / a2.tanh()).abs() < 1e-12);
        assert!(f.c_plus().inner(f.c_minus()).unwrap().norm() < 1e-14);
    }
}

#[test]
fn cats_are_degenerate_ground_states_of_the_kerr_cat() {
    // H = −K a†²a² + ε₂(a†² + a²) has ⟨C±|H|C±⟩ = ε₂²/K exactly
    let k = TAU * 12.5;
    let alpha: f64 = 0.5;
    let eps2 = k * alpha * alpha;
    let sp = FockSpace::new(40).unwrap();
    let h = fock::kerr_cat_hamiltonian(k, eps2, 0.0, sp).unwrap();
    let f = fock::cat_frame(C64::from(alpha), sp).unwrap();
    for c in [f.c_plus(), f.c_minus()] {
        let hc = h.apply(c).unwrap();
        let e = c.inner(&hc).unwrap();
        assert!((e.re - eps2 * eps2 / k).abs() < 1e-9);
        // eigenvector: H|C⟩ − E|C⟩ vanishes
        let resid = hc.amplitudes() - c.amplitudes() * e;
        assert!(resid.norm() < 1e-9);
    }
    let gap = fock::cat_gap(&h).unwrap();
    assert!(gap.pair_splitting.abs() < 1e-9);
    assert!((gap.gap - 161.0).abs() < 3.2);
}

#[test]
fn two_mode_operators_act_on_their_own_mode() {
    let sp = FockSpace::two_mode(5).unwrap();
    let n1 = fock::mode_number(sp, 0).unwrap();
    let n2 = fock::mode_number(sp, 1).unwrap();
    let a = Ket::basis(FockSpace::new(5).unwrap(), 2).unwrap();
    let b = Ket::basis(FockSpace::new(5).unwrap(), 3).unwrap();
    let ab = a.tensor(&b).unwrap();
    assert!((n1.expectation(&ab).unwrap().re - 2.0).abs() < 1e-15);
    assert!((n2.expectation(&ab).unwrap().re - 3.0).abs() < 1e-15);
    assert!(fock::mode_number(sp, 2).is_err());
}

#[test]
fn invalid_spaces_and_states_are_rejected() {
    assert!(FockSpace::new(0).is_err());
    let sp = FockSpace::new(4).unwrap();
    assert!(Ket::new(sp, CVector::zeros(3)).is_err());
    assert!(Ket::new(sp, CVector::zeros(4)).is_err());
    assert!(fock::cat_frame(C64::from(0.0), sp).is_err());
}
