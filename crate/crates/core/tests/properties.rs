mod common;

use common::*;
use monopole::analysis::{
    admissible_params, q_region, q_region_bound, symbol_q, QRegion, wave_sobolev_norm, SpaceTimeSample, WaveNorm, Window,
};
use monopole::cli_io::{random_coulomb_data, save_snapshot, DataKind, RunConfig};
use monopole::ame::AuxState;
use monopole::gaugeforms::{
    coulomb_project, curvature, exp_field, gauge_transform, gauge_transform_rates, monopole_residual,
    Connection, CoulombSettings, TimeDerivatives,
};
use monopole::liealg::{bracket, frobenius_norm, lie_exp, random_su, LieMatrix};
use monopole::spectral::{apply_multiplier, wave_propagate, LieField, Multiplier};
use proptest::prelude::*;

fn su(n: usize, seed: u64, k: u64) -> LieMatrix {
    random_su(n, 1.0, &mut rng(seed.wrapping_mul(31).wrapping_add(k)))
}

/// su(2) field with independent values at every point (full spectrum).
fn rough_field(n: usize, seed: u64) -> LieField {
    let mut r = rng(seed);
    LieField::from_fn(grid(n), 2, |_, _| random_su(2, 1.0, &mut r))
}

fn scaled(w: LieField, rms: f64) -> LieField {
    let side = w.grid().side();
    let norm = w.l2_norm();
    w.scale_real(rms * side / norm)
}

fn multipliers(s: f64) -> Vec<Multiplier> {
    vec![
        Multiplier::riesz(1),
        Multiplier::riesz_unit(2),
        Multiplier::laplacian(),
        Multiplier::inverse_laplacian(),
        Multiplier::homogeneous(s),
        Multiplier::bessel(s),
        Multiplier::derivative(1),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jacobi_identity(seed in any::<u64>(), n in 2usize..4) {
        let (x, y, z) = (su(n, seed, 0), su(n, seed, 1), su(n, seed, 2));
        let b = |a: &LieMatrix, c: &LieMatrix| bracket(a, c).unwrap();
        let sum = &(&b(&x, &b(&y, &z)) + &b(&y, &b(&z, &x))) + &b(&z, &b(&x, &y));
        prop_assert!(frobenius_norm(&sum) < 1e-12);
    }

    #[test]
    fn bracket_closes_in_su(seed in any::<u64>(), n in 2usize..4) {
        prop_assert!(bracket(&su(n, seed, 0), &su(n, seed, 1)).unwrap().is_su());
    }

    #[test]
    fn trace_form_is_ad_invariant(seed in any::<u64>(), n in 2usize..4) {
        let (x, y, z) = (su(n, seed, 0), su(n, seed, 1), su(n, seed, 2));
        let lhs = (&x * &bracket(&y, &z).unwrap()).trace();
        let rhs = (&bracket(&x, &y).unwrap() * &z).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn exponential_is_special_unitary(seed in any::<u64>(), n in 2usize..4, scale in 0.0f64..4.0) {
        let x = su(n, seed, 0).scale_real(scale);
        let g = lie_exp(&x);
        let dev = &(&g * &g.dagger()) - &LieMatrix::identity(n);
        prop_assert!(frobenius_norm(&dev) < 1e-12);
        prop_assert!((g.determinant() - 1.0).norm() < 1e-12);
        let inv = &g * &lie_exp(&x.scale_real(-1.0));
        prop_assert!(frobenius_norm(&(&inv - &LieMatrix::identity(n))) < 1e-12);
    }

    #[test]
    fn parseval(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 32])) {
        let w = rough_field(n, seed);
        let (a, b) = (w.l2_norm_sq(), w.fft().l2_norm_sq());
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn multipliers_commute(seed in any::<u64>(), i in 0usize..7, j in 0usize..7, s in -1.0f64..2.0) {
        let w = rough_field(16, seed).mean_free();
        let ms = multipliers(s);
        let ab = apply_multiplier(&apply_multiplier(&w, &ms[i]).unwrap(), &ms[j]).unwrap();
        let ba = apply_multiplier(&apply_multiplier(&w, &ms[j]).unwrap(), &ms[i]).unwrap();
        let scale = ab.sup_norm().max(1.0);
        prop_assert!(max_abs_diff(&ab, &ba) <= 1e-10 * scale);
    }

    #[test]
    fn multipliers_commute_with_propagation(seed in any::<u64>(), i in 0usize..7, t in 0.0f64..3.0) {
        let (u0, u1) = (rough_field(16, seed), rough_field(16, seed ^ 1));
        let m = &multipliers(0.5)[i];
        let ap = |w: &LieField| apply_multiplier(w, m).unwrap();
        let (pu, _) = wave_propagate(&ap(&u0), &ap(&u1), t).unwrap();
        let (u, _) = wave_propagate(&u0, &u1, t).unwrap();
        let want = ap(&u);
        prop_assert!(max_abs_diff(&pu, &want) <= 1e-10 * want.sup_norm().max(1.0));
    }

    #[test]
    fn hermitian_symmetric_multipliers_keep_su(seed in any::<u64>(), s in -1.0f64..2.0) {
        let w = rough_field(16, seed).mean_free();
        for m in [Multiplier::riesz(1), Multiplier::riesz(2), Multiplier::inverse_laplacian(), Multiplier::homogeneous(s)] {
            prop_assert!(apply_multiplier(&w, &m).unwrap().is_su(1e-12));
        }
    }

    #[test]
    fn curvature_is_antisymmetric(seed in any::<u64>()) {
        let f = |k| scaled(random_field(16, 3.0, seed ^ k), 0.3);
        let a = Connection::new(f(1), f(2), f(3)).unwrap();
        let rates = TimeDerivatives { a1: f(4), a2: f(5), phi: None };
        let c = curvature(&a, Some(&rates)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(c.get(i, j).unwrap(), c.get(j, i).unwrap().neg());
            }
        }
    }

    #[test]
    fn monopole_residual_norm_is_gauge_invariant(seed in any::<u64>()) {
        let f = |k, rms| scaled(random_field(32, 3.0, seed ^ k), rms);
        let a = Connection::new(f(1, 0.3), f(2, 0.3), f(3, 0.3)).unwrap();
        let phi = f(4, 0.3);
        let rates = TimeDerivatives { a1: f(5, 0.2), a2: f(6, 0.2), phi: Some(f(7, 0.2)) };
        let g = exp_field(&scaled(random_field(32, 2.0, seed ^ 8), 0.5));
        let (ag, phig) = gauge_transform(&a, &phi, &g, None).unwrap();
        let rg = gauge_transform_rates(&rates, &g).unwrap();
        let r = monopole_residual(&a, &phi, &rates).unwrap();
        let r2 = monopole_residual(&ag, &phig, &rg).unwrap();
        for (x, y) in r.iter().zip(&r2) {
            prop_assert!((x.l2_norm() - y.l2_norm()).abs() <= 1e-8 * x.l2_norm().max(1e-300));
        }
    }

    #[test]
    fn coulomb_projection_is_coulomb(seed in any::<u64>()) {
        let (a1, a2, _) = random_coulomb_data(grid(32), 2, 3.0, 0.02, &mut rng(seed)).unwrap();
        let g = exp_field(&scaled(random_field(32, 2.0, seed ^ 9), 0.02));
        let (ag, _) = gauge_transform(&Connection::spatial(a1, a2).unwrap(), &LieField::zeros(grid(32), 2), &g, None).unwrap();
        let settings = CoulombSettings { tol: 1e-10, threshold: 1.0, ..CoulombSettings::default() };
        let p = coulomb_project(&ag, &settings).unwrap();
        prop_assert!(p.a.coulomb_ratio() <= settings.tol);
    }

    #[test]
    fn config_round_trips(
        n in prop::sample::select(vec![8usize, 16, 64]),
        dt in 1e-4f64..0.5,
        amp in 0.0f64..1.0,
        seed in any::<u64>(),
        s in 0.26f64..0.49,
        samples in 1usize..100,
        data in prop::sample::select(vec![DataKind::Zero, DataKind::Random, DataKind::Bumps]),
    ) {
        let cfg = RunConfig { n, dt, amplitude: amp, seed, s, samples, data, ..RunConfig::default() };
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn snapshot_payload_size(n in prop::sample::select(vec![8usize, 16]), rank in 2usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut f = || LieField::from_fn(grid(n), rank, |_, _| random_su(rank, 1.0, &mut r));
        let st = AuxState { u: f(), ut: f(), v: f(), vt: f(), t: 0.5 };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        save_snapshot(&st, &p).unwrap();
        let len = std::fs::metadata(&p).unwrap().len() as usize;
        prop_assert_eq!(len, 4 * n * n * 2 * rank * rank * 8);
    }

    #[test]
    fn epsilon_window_grows_with_s(s1 in 0.2501f64..0.4999, s2 in 0.2501f64..0.4999) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(admissible_params(lo, None).epsilon.hi <= admissible_params(hi, None).epsilon.hi);
    }

    #[test]
    fn windows_hold_at_interior_points(s in 0.2501f64..0.4999) {
        let w = admissible_params(s, None);
        for e in w.epsilon.interior_points(100) {
            prop_assert!(e >= 0.0 && e < (2.0 * s - 0.5).min(0.5));
            for t in w.theta_at(e).interior_points(10) {
                prop_assert!(t > 0.75 - e / 2.0 && t <= s + 0.5 - e && t < 1.0 - e);
            }
        }
        for x in w.a0.inv_q.interior_points(100) {
            prop_assert!(x > ((1.0 - 2.0 * s) / 3.0).max(s / 2.0) && x < 2.0 * s / 3.0);
        }
    }

    #[test]
    fn symbol_obeys_region_bound(
        tau in -50.0f64..50.0, lambda in -50.0f64..50.0,
        xi in prop::array::uniform2(-30.0f64..30.0), eta in prop::array::uniform2(-30.0f64..30.0),
        j in 1usize..3,
    ) {
        prop_assume!(tau * lambda < 0.0);
        prop_assume!(xi[0].hypot(xi[1]) > 1e-3 && eta[0].hypot(eta[1]) > 1e-3);
        let q = symbol_q(tau, xi, lambda, eta, j).unwrap();
        let b = q_region_bound(tau, xi, lambda, eta, j).unwrap();
        prop_assert!(q.abs() <= b * (1.0 + 1e-12), "{} > {}", q, b);
        if q_region(tau, xi, lambda, eta) == QRegion::AwayFromCone {
            let (nx, ne) = (xi[0].hypot(xi[1]), eta[0].hypot(eta[1]));
            prop_assert!(q.abs() <= 2.0 * (tau.abs() + nx) * (lambda.abs() + ne));
        }
    }

    #[test]
    fn zero_order_wave_norm_is_windowed_l2(seed in any::<u64>(), m in 8usize..20, duration in 0.1f64..3.0) {
        let frames: Vec<LieField> = (0..m).map(|k| rough_field(8, seed ^ k as u64)).collect();
        let ws = SpaceTimeSample::new(frames, duration, Window::Hann).unwrap();
        let direct = ws
            .frames()
            .iter()
            .zip(ws.window_weights())
            .map(|(f, w)| w * w * f.l2_norm_sq())
            .sum::<f64>()
            * ws.dt();
        let norm = wave_sobolev_norm(&ws, 0.0, 0.0, WaveNorm::H);
        prop_assert!((norm - direct.sqrt()).abs() <= 1e-10 * norm.max(1e-300));
    }
}
