//! Periodic grids, matrix-valued fields and Fourier multipliers.
//!
//! Conventions: `∂_j ↔ iξ_j`, `D ↔ |ξ|`, forward FFT unnormalized, inverse
//! divided by N². Frequencies are `ξ = 2πk/L` with `k ∈ {−N/2, …, N/2−1}`.

mod fft;
mod field;
mod grid;
mod multiplier;
mod wave;

pub(crate) use fft::fft3;
pub use field::{LieField, Spectrum};
pub use grid::TorusGrid;
pub use multiplier::{
    apply_multiplier, dealias, inverse_laplacian, laplacian, partial_derivative, riesz,
    riesz_unit, Multiplier, ZeroMode, MEAN_TOL,
};
pub use wave::{duhamel_step, wave_energy, wave_propagate, WaveStep};

use crate::error::{Error, Result};

/// L² norm of `Λ^s w` (or `D^s w` when `homogeneous`).
///
/// Homogeneous norms of negative order need a mean-zero field.
pub fn sobolev_norm(w: &LieField, s: f64, homogeneous: bool) -> Result<f64> {
    let spec = w.fft();
    if homogeneous && s < 0.0 {
        let mean = crate::liealg::frobenius_norm(&spec.zero_mode()) / w.grid().len() as f64;
        let tol = MEAN_TOL * (w.l2_norm() / w.grid().side()).max(1.0);
        if mean > tol {
            return Err(Error::NonzeroMean { mean, tol });
        }
    }
    let m = if homogeneous {
        Multiplier::homogeneous(s)
    } else {
        Multiplier::bessel(s)
    };
    Ok(m.apply_spectrum(&spec)?.l2_norm_sq().sqrt())
}
