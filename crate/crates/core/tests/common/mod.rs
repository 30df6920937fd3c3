#![allow(dead_code)]

use std::f64::consts::PI;

use monopole::ame::{build_initial_data, AuxState};
use monopole::cli_io::{bump_data, random_band_limited, random_coulomb_data};
use monopole::liealg::LieMatrix;
use monopole::spectral::{LieField, TorusGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * PI).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mean-zero Coulomb triple `(a₁, a₂, φ)` with RMS size `amplitude`.
pub fn coulomb_triple(n: usize, band: f64, amplitude: f64, seed: u64) -> (LieField, LieField, LieField) {
    random_coulomb_data(grid(n), 2, band, amplitude, &mut rng(seed)).unwrap()
}

pub fn random_field(n: usize, band: f64, seed: u64) -> LieField {
    random_band_limited(grid(n), 2, band, &mut rng(seed))
}

/// Smooth su(2) bump data of width `width` and height `amplitude`.
pub fn bump_state(n: usize, width: f64, amplitude: f64) -> AuxState {
    let (a1, a2, phi) = bump_data(grid(n), 2, width, amplitude).unwrap();
    build_initial_data(&a1, &a2, &phi, 1e-9).unwrap().0
}

pub fn rel_err(a: &LieField, b: &LieField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn max_abs_diff(a: &LieField, b: &LieField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Naive DFT, same sign and normalization as the library's forward FFT.
pub fn naive_dft(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for (q, o) in out.iter_mut().enumerate() {
        let (k1, k2) = ((q % n) as f64, (q / n) as f64);
        for (p, v) in values.iter().enumerate() {
            let (x1, x2) = ((p % n) as f64, (p / n) as f64);
            let ang = -2.0 * PI * (k1 * x1 + k2 * x2) / n as f64;
            *o += v * Complex64::from_polar(1.0, ang);
        }
    }
    out
}

/// Per-mode matrix coefficients `ŵ(k)` from a naive DFT of every entry.
pub fn matrix_spectrum(w: &LieField) -> Vec<LieMatrix> {
    let n = w.grid().n();
    let r = w.rank();
    let planes: Vec<Vec<Complex64>> = (0..r * r)
        .map(|e| naive_dft(w.plane(e / r, e % r), n))
        .collect();
    (0..n * n)
        .map(|q| LieMatrix::from_fn(r, |i, j| planes[i * r + j][q]))
        .collect()
}

/// Signed wavenumber of index `i` on an `n` point axis.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
