use std::f64::consts::PI;

use kerrcat::fock::{self, FockSpace};
use kerrcat::metrics;
use kerrcat::noise;
use kerrcat::selftest;
use kerrcat::synth::{self, DriveMap, EffectiveDrive, PulseSchedule};
use kerrcat::units::{AngularRate, DecayRate};
use kerrcat::{CMatrix, C64};
use proptest::prelude::*;

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

proptest! {
    #[test]
    fn ladder_commutator_is_one_below_the_cutoff(d in 2usize..40) {
        let sp = FockSpace::new(d).unwrap();
        let a = fock::ladder(sp).unwrap().into_matrix();
        let c = &a * a.adjoint() - a.adjoint() * &a;
        for n in 0..d {
            let want = if n + 1 == d { -((d - 1) as f64) } else { 1.0 };
            prop_assert!((c[(n, n)] - C64::from(want)).norm() < 1e-12);
        }
        prop_assert!((c.clone() - CMatrix::from_diagonal(&c.diagonal())).norm() < 1e-12);
    }

    #[test]
    fn bloch_vectors_are_unit(re0 in -1.0f64..1.0, im0 in -1.0f64..1.0, re1 in -1.0f64..1.0, im1 in -1.0f64..1.0) {
        let n = (re0 * re0 + im0 * im0 + re1 * re1 + im1 * im1).sqrt();
        prop_assume!(n > 1e-3);
        let b = metrics::bloch_vector([C64::new(re0 / n, im0 / n), C64::new(re1 / n, im1 / n)]);
        prop_assert!(((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_are_special_unitary(mu0 in 0.0f64..PI, eta0 in -PI..PI, theta in -7.0f64..7.0) {
        let r = synth::rotation(mu0, eta0, theta);
        prop_assert!((r.adjoint() * &r - CMatrix::identity(2, 2)).norm() < 1e-13);
        prop_assert!((r.determinant() - C64::from(1.0)).norm() < 1e-13);
    }

    #[test]
    fn fidelity_is_bounded_and_phase_blind(
        re in prop::array::uniform4(-1.0f64..1.0),
        im in prop::array::uniform4(-1.0f64..1.0),
        phi in -PI..PI,
    ) {
        let v = synth::rotation(0.7, 0.3, 1.1);
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(re[2 * i + j], im[2 * i + j]));
        // scale into a contraction, as any block of a unitary is
        let s = m.clone().svd(false, false).singular_values[0];
        prop_assume!(s > 1e-6);
        let f = metrics::fidelity_from_block(&(m / C64::from(s)), &v).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        let g = metrics::fidelity_from_block(&(&v * C64::from_polar(1.0, phi)), &v).unwrap();
        prop_assert!((g - 1.0).abs() < 1e-13);
    }

    #[test]
    fn solid_angle_is_rotation_invariant_mod_4pi(tilt in 0.0f64..PI, spin in -PI..PI, theta in 0.2f64..2.9) {
        let curve: Vec<[f64; 3]> = (0..200)
            .map(|k| {
                let p = 2.0 * PI * k as f64 / 200.0;
                [theta.sin() * p.cos(), theta.sin() * p.sin(), theta.cos()]
            })
            .collect();
        let (st, ct) = tilt.sin_cos();
        let (ss, cs) = spin.sin_cos();
        let moved: Vec<[f64; 3]> = curve
            .iter()
            .map(|v| {
                let w = [v[0], ct * v[1] - st * v[2], st * v[1] + ct * v[2]];
                [cs * w[0] - ss * w[1], ss * w[0] + cs * w[1], w[2]]
            })
            .collect();
        let d = (metrics::solid_angle(&curve) - metrics::solid_angle(&moved)) / (4.0 * PI);
        prop_assert!((d - d.round()).abs() < 1e-9, "{}", d);
    }

    #[test]
    fn angular_rates_survive_display_and_parse(v in 1e-3f64..1e4) {
        let a = AngularRate::from_mhz(v);
        prop_assert_eq!(a.to_string().parse::<AngularRate>().unwrap(), a);
        let d: DecayRate = format!("{v}/us").parse().unwrap();
        prop_assert_eq!(d.to_string().parse::<DecayRate>().unwrap(), d);
        let bare = v.to_string();
        prop_assert!(bare.parse::<AngularRate>().is_err());
    }

    #[test]
    fn pink_noise_is_scaled_to_the_exact_snr(seed in 0u64..1000, snr in -10.0f64..30.0, n in 64usize..2048) {
        let s: Vec<f64> = (0..n).map(|j| (j as f64 * 0.05).cos() + 0.1).collect();
        let out = noise::add_pink(&s, snr, seed).unwrap();
        let ps = s.iter().map(|x| x * x).sum::<f64>();
        let pn = out.iter().zip(&s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        prop_assert!((10.0 * (ps / pn).log10() - snr).abs() < 1e-9);
    }

    #[test]
    fn pulse_csv_rewrites_byte_identically(vals in prop::collection::vec(-1e3f64..1e3, 3 * 9)) {
        let sp = FockSpace::new(20).unwrap();
        let frame = fock::cat_frame(C64::from(0.8), sp).unwrap();
        let times: Vec<f64> = (0..9).map(|j| j as f64 / 8.0).collect();
        let omega = [vals[..9].to_vec(), vals[9..18].to_vec(), vals[18..].to_vec()];
        let drive = EffectiveDrive::from_parts(times, omega).unwrap();
        let sched = PulseSchedule::single_from_drive(&drive, &DriveMap::new(&frame)).unwrap();
        let mut first = Vec::new();
        sched.write_csv(&mut first).unwrap();
        let back = PulseSchedule::read_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        back.write_csv(&mut second).unwrap();
        prop_assert_eq!(&first, &second);
        let again = PulseSchedule::read_csv(second.as_slice()).unwrap();
        prop_assert_eq!(again, back);
    }
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn drive_map_inverts(alpha in 0.2f64..1.6, w in prop::array::uniform3(-50.0f64..50.0)) {
        let sp = FockSpace::new(30).unwrap();
        let frame = fock::cat_frame(C64::from(alpha), sp).unwrap();
        let map = DriveMap::new(&frame);
        let back = map.omega_of(map.single(w));
        for k in 0..3 {
            prop_assert!((back[k] - w[k]).abs() < 1e-9 * (1.0 + w[k].abs()));
        }
    }

    #[test]
    fn projected_controls_give_the_requested_drive(alpha in 0.3f64..1.2, w in prop::array::uniform3(-50.0f64..50.0)) {
        let sp = FockSpace::new(30).unwrap();
        let frame = fock::cat_frame(C64::from(alpha), sp).unwrap();
        let r = selftest::single_projection_residual(&frame, w).unwrap();
        prop_assert!(r < 1e-9, "residual {}", r);
    }

    #[test]
    fn solved_lambda_reaches_the_target_phase(mu0 in 0.05f64..1.5, theta in 0.1f64..6.0) {
        match synth::solve_lambda(mu0, theta) {
            Ok(l) => {
                let got = synth::geometric_phase(mu0, l).unwrap();
                let k = ((got - theta) / PI).round();
                prop_assert!(k >= 0.0);
                prop_assert!((got - theta - k * PI).abs() < 1e-9, "{} vs {}", got, theta);
            }
            Err(e) => prop_assert!(matches!(e, kerrcat::Error::NoSolution(_)), "{}", e),
        }
    }

    #[test]
    fn zeta_stays_on_the_sphere(mu0 in 0.05f64..1.5, eta0 in -PI..PI, t in 0.5f64..3.0) {
        let spec = synth::PathSpec::new(mu0, eta0, 0.9, t, PI / 4.0).unwrap();
        for j in 0..=20 {
            let z = spec.zeta(t * j as f64 / 20.0).unwrap();
            let u = unit(z);
            prop_assert!((u[0] - z[0]).abs() + (u[1] - z[1]).abs() + (u[2] - z[2]).abs() < 1e-12);
        }
    }
}
