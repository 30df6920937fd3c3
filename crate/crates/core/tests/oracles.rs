//! Library results against independent computations written here.

mod common;

use std::f64::consts::PI;

use common::*;
use monopole::ame::{build_initial_data, evolve, EvolveSettings};
use monopole::analysis::{
    check_admissible, estimate_ensemble, null_form_q12, EnsembleSpec, EstimateKind, EstimateParams, Family, Window,
};
use monopole::cli_io::{CONVENTIONS, CONVENTION_VERSION};
use monopole::liealg::{su_basis, LieMatrix};
use monopole::spectral::{laplacian, riesz, riesz_unit, LieField};
use num_complex::Complex64;

#[test]
fn q12_matches_brute_force_convolution() {
    for n in [8, 16] {
        let band = (n / 2 - 1) as f64;
        let (f, g) = (random_field(n, band, 1), random_field(n, band, 2));
        let (fs, gs) = (matrix_spectrum(&f), matrix_spectrum(&g));
        let k = |q: usize| (wavenumber(q % n, n) as f64, wavenumber(q / n, n) as f64);
        let norm = 1.0 / (n * n) as f64;
        let want: Vec<LieMatrix> = (0..n * n)
            .map(|q| {
                let (q1, q2) = (q % n, q / n);
                let mut acc = LieMatrix::zeros(2);
                for p in 0..n * n {
                    let r = (q1 + n - p % n) % n + ((q2 + n - p / n) % n) * n;
                    let ((x1, x2), (y1, y2)) = (k(p), k(r));
                    // (iξ₁)(iη₂) − (iξ₂)(iη₁)
                    let sym = -(x1 * y2 - x2 * y1) * norm;
                    acc = &acc + &(&fs[p] * &gs[r]).scale_real(sym);
                }
                acc
            })
            .collect();
        let got = matrix_spectrum(&null_form_q12(&f, &g).unwrap());
        let scale = want
            .iter()
            .flat_map(|m| m.entries().iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        let err = got
            .iter()
            .zip(&want)
            .flat_map(|(a, b)| a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * scale, "N = {n}: {err:e} vs {scale:e}");
    }
}

#[test]
fn fourier_and_transform_conventions_are_locked() {
    assert_eq!(CONVENTION_VERSION, 1);
    for needle in ["inverse /N^2", "iy*N + ix", "xi_j/|xi|", "A1 = -d2 f"] {
        assert!(CONVENTIONS.contains(needle), "{needle}");
    }
    let g = grid(16);
    let t = &su_basis(2)[0];
    let n = g.n();

    // forward transform is unnormalized; e^{i(2x + 3y)} lands at iy·N + ix
    let wave = LieField::from_scalar(g, t, |x, y| Complex64::from_polar(1.0, 2.0 * x + 3.0 * y));
    let s = wave.fft();
    let e = (0..4).find(|&e| t.get(e / 2, e % 2).norm() > 0.1).unwrap();
    let plane = &s.data()[e * g.len()..(e + 1) * g.len()];
    let peak = (0..g.len())
        .max_by(|&a, &b| plane[a].norm().partial_cmp(&plane[b].norm()).unwrap())
        .unwrap();
    assert_eq!(peak, 3 * n + 2);
    assert!((plane[peak] - t.get(e / 2, e % 2) * (n * n) as f64).norm() < 1e-9);

    // direction transform: sin x ↦ −i cos x; Riesz transform: sin x ↦ cos x
    let sin = LieField::from_scalar(g, t, |x, _| Complex64::new(x.sin(), 0.0));
    let cos = LieField::from_scalar(g, t, |x, _| Complex64::new(x.cos(), 0.0));
    assert!(max_abs_diff(&riesz_unit(&sin, 1), &cos.scale(Complex64::new(0.0, -1.0))) < 1e-13);
    assert!(max_abs_diff(&riesz(&sin, 1), &cos) < 1e-13);

    // data: f = sin(2x + y) T, a = ∗df; then ∂ₜu − ∂ₜv = 2h = 2i√5 f
    let f = LieField::from_scalar(g, t, |x, y| Complex64::new((2.0 * x + y).sin(), 0.0));
    let a1 = LieField::from_scalar(g, t, |x, y| Complex64::new(-(2.0 * x + y).cos(), 0.0));
    let a2 = LieField::from_scalar(g, t, |x, y| Complex64::new(2.0 * (2.0 * x + y).cos(), 0.0));
    let phi = LieField::zeros(g, 2);
    let (aux, f0) = build_initial_data(&a1, &a2, &phi, 1e-9).unwrap();
    let two_h = aux.ut.sub(&aux.vt).unwrap();
    assert!(max_abs_diff(&two_h, &f.scale(Complex64::new(0.0, 2.0 * 5f64.sqrt()))) < 1e-12);
    assert!(max_abs_diff(&f0, &f) < 1e-12);
}

#[test]
fn estimate_e_stays_bounded_on_a_large_ensemble() {
    let params = EstimateParams::default();
    assert!(params.a + params.b > 1.0 && params.alpha + params.beta > 0.5);
    check_admissible(EstimateKind::E, &params).unwrap();
    let spec = EnsembleSpec {
        grid: grid(32),
        rank: 2,
        frames: 16,
        duration: 1.0,
        window: Window::Hann,
        amplitude: 1.0,
        family: Family::Gaussian { band: 8.0 },
    };
    let st = estimate_ensemble(EstimateKind::E, &spec, &params, 50, 3).unwrap();
    assert_eq!(st.values.len(), 50);
    assert!(st.values.iter().all(|v| v.ratio.is_finite() && v.ratio > 0.0));
    // the spread across draws stays moderate: no draw escapes
    assert!(st.max / st.min < 10.0, "{} / {}", st.max, st.min);
}

#[test]
fn higgs_equation_holds_on_solutions() {
    // ∂ₜφ = Δf + [∂₁f, ∂₂f] − [A₀, φ], evaluated here from the stored fields
    let data = bump_state(32, 0.6, 0.2);
    let mut worst = Vec::new();
    for dt in [0.02, 0.01] {
        let tr = evolve(&data, 0.2, &EvolveSettings { dt, ..EvolveSettings::default() }).unwrap();
        let mut w = 0.0f64;
        for (p, r) in tr.phys.iter().zip(&tr.rates) {
            let rhs = laplacian(&p.f)
                .add(&p.df1.bracket(&p.df2).unwrap())
                .unwrap()
                .sub(&p.a0.bracket(&p.phi).unwrap())
                .unwrap();
            let res = r.phi_t.sub(&rhs).unwrap().mean_free();
            w = w.max(res.l2_norm() / rhs.l2_norm().max(r.phi_t.l2_norm()));
        }
        worst.push(w);
    }
    assert!(worst[0] < 1e-4, "{worst:?}");
    assert!(worst[1] < worst[0], "{worst:?}");
}

#[test]
fn hann_norms_need_enough_frames() {
    let spec = EnsembleSpec {
        grid: grid(16),
        rank: 2,
        frames: 4,
        duration: PI,
        window: Window::Hann,
        amplitude: 1.0,
        family: Family::Gaussian { band: 3.0 },
    };
    assert!(estimate_ensemble(EstimateKind::M1, &spec, &EstimateParams::default(), 1, 0).is_err());
}
