use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic N×N grid on a square torus of side L.
///
/// Point `(ix, iy)` sits at `(ix·dx, iy·dx)` and has flat index `iy·N + ix`;
/// `ix` runs along axis 1 (x), `iy` along axis 2 (y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    l: f64,
}

impl TorusGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N must be a power of two and at least 8, got {n}"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Number of grid points, N².
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell area dx², the quadrature weight of discrete integrals.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    pub fn coords(&self, p: usize) -> (f64, f64) {
        let dx = self.dx();
        ((p % self.n) as f64 * dx, (p / self.n) as f64 * dx)
    }

    /// Signed integer wavenumber of FFT index `i`: `i` below N/2, else `i − N`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical frequency `2πk/L` of FFT index `i`.
    pub fn frequency(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.l
    }

    /// Frequency vector `(ξ₁, ξ₂)` of the flat spectral index `p`.
    pub fn xi(&self, p: usize) -> (f64, f64) {
        (self.frequency(p % self.n), self.frequency(p / self.n))
    }

    /// Integer wavevector of the flat spectral index `p`.
    pub fn k(&self, p: usize) -> (i64, i64) {
        (self.wavenumber(p % self.n), self.wavenumber(p / self.n))
    }

    /// True when FFT index `i` is the unpaired Nyquist index N/2.
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Smallest nonzero |ξ| on the lattice, 2π/L.
    pub fn min_frequency(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Largest |ξ| retained after two-thirds truncation.
    pub fn max_retained_frequency(&self) -> f64 {
        let kmax = (self.n as f64 - 1.0) / 3.0;
        2.0 * PI * kmax.floor() * 2f64.sqrt() / self.l
    }

    /// Whether the mode at flat spectral index `p` survives two-thirds truncation.
    pub fn retained(&self, p: usize) -> bool {
        let (k1, k2) = self.k(p);
        let n = self.n as i64;
        3 * k1.abs() < n && 3 * k2.abs() < n
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self.n != other.n || self.l != other.l {
            return Err(Error::GridMismatch {
                left_n: self.n,
                left_l: self.l,
                right_n: other.n,
                right_l: other.l,
            });
        }
        Ok(())
    }
}
