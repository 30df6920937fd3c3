use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{LieField, Spectrum};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

type Symbol = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

/// What a multiplier does to the zero mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMode {
    /// Evaluate the symbol at ξ = 0.
    Symbol,
    Zero,
    Identity,
    Value(Complex64),
}

/// Fourier multiplier with an explicit zero-mode policy.
///
/// Symbols that are odd in ξ_j are zeroed on the Nyquist line of axis j,
/// where the lattice has no partner frequency; this keeps real fields real
/// and anti-Hermitian fields anti-Hermitian.
#[derive(Clone)]
pub struct Multiplier {
    symbol: Arc<Symbol>,
    zero_mode: ZeroMode,
    odd: [bool; 2],
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("zero_mode", &self.zero_mode)
            .field("odd", &self.odd)
            .finish_non_exhaustive()
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn axis_index(j: usize) -> usize {
    assert!(j == 1 || j == 2, "axis index must be 1 or 2, got {j}");
    j - 1
}

impl Multiplier {
    pub fn new(symbol: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            symbol: Arc::new(symbol),
            zero_mode: ZeroMode::Symbol,
            odd: [false, false],
        }
    }

    pub fn with_zero_mode(mut self, z: ZeroMode) -> Self {
        self.zero_mode = z;
        self
    }

    /// Marks the symbol as odd in ξ_j (j = 1 or 2).
    pub fn odd_in(mut self, j: usize) -> Self {
        self.odd[axis_index(j)] = true;
        self
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    pub fn eval(&self, xi1: f64, xi2: f64) -> Complex64 {
        (self.symbol)(xi1, xi2)
    }

    pub fn identity() -> Self {
        Self::new(|_, _| c(1.0))
    }

    /// ∂_j: symbol iξ_j.
    pub fn derivative(j: usize) -> Self {
        let a = axis_index(j);
        Self::new(move |x1, x2| Complex64::new(0.0, if a == 0 { x1 } else { x2 }))
            .with_zero_mode(ZeroMode::Zero)
            .odd_in(j)
    }

    /// Riesz transform: symbol iξ_j/|ξ|, zero mode annihilated.
    pub fn riesz(j: usize) -> Self {
        let a = axis_index(j);
        Self::new(move |x1, x2| {
            let r = x1.hypot(x2);
            Complex64::new(0.0, if a == 0 { x1 } else { x2 } / r)
        })
        .with_zero_mode(ZeroMode::Zero)
        .odd_in(j)
    }

    /// Direction multiplier ξ_j/|ξ|, equal to −i times [`Multiplier::riesz`].
    pub fn riesz_unit(j: usize) -> Self {
        let a = axis_index(j);
        Self::new(move |x1, x2| {
            let r = x1.hypot(x2);
            c(if a == 0 { x1 } else { x2 } / r)
        })
        .with_zero_mode(ZeroMode::Zero)
        .odd_in(j)
    }

    /// Δ: symbol −|ξ|².
    pub fn laplacian() -> Self {
        Self::new(|x1, x2| c(-(x1 * x1 + x2 * x2)))
    }

    /// Δ⁻¹: symbol −1/|ξ|², zero mode annihilated.
    pub fn inverse_laplacian() -> Self {
        Self::new(|x1, x2| c(-1.0 / (x1 * x1 + x2 * x2))).with_zero_mode(ZeroMode::Zero)
    }

    /// Λ^s: symbol (1 + |ξ|²)^{s/2}.
    pub fn bessel(s: f64) -> Self {
        Self::new(move |x1, x2| c((1.0 + x1 * x1 + x2 * x2).powf(0.5 * s)))
    }

    /// D^s: symbol |ξ|^s. The zero mode is kept only for s = 0.
    pub fn homogeneous(s: f64) -> Self {
        let z = if s == 0.0 {
            ZeroMode::Identity
        } else {
            ZeroMode::Zero
        };
        Self::new(move |x1, x2| c(x1.hypot(x2).powf(s))).with_zero_mode(z)
    }

    /// Per-mode table of the symbol on `grid`, Nyquist and zero-mode rules applied.
    pub fn table(&self, grid: &TorusGrid) -> Result<Vec<Complex64>> {
        let n = grid.n();
        let mut out = Vec::with_capacity(grid.len());
        for p in 0..grid.len() {
            let (i1, i2) = (p % n, p / n);
            if p == 0 {
                out.push(match self.zero_mode {
                    ZeroMode::Symbol => {
                        let v = self.eval(0.0, 0.0);
                        if !(v.re.is_finite() && v.im.is_finite()) {
                            return Err(Error::NonFiniteSymbol { xi1: 0.0, xi2: 0.0 });
                        }
                        v
                    }
                    ZeroMode::Zero => c(0.0),
                    ZeroMode::Identity => c(1.0),
                    ZeroMode::Value(v) => v,
                });
                continue;
            }
            if (self.odd[0] && grid.is_nyquist(i1)) || (self.odd[1] && grid.is_nyquist(i2)) {
                out.push(c(0.0));
                continue;
            }
            let (x1, x2) = grid.xi(p);
            let v = self.eval(x1, x2);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSymbol { xi1: x1, xi2: x2 });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn apply_spectrum(&self, s: &Spectrum) -> Result<Spectrum> {
        let t = self.table(s.grid())?;
        Ok(s.scaled_by(&t))
    }
}

/// `F⁻¹(m · F w)` on every matrix entry.
pub fn apply_multiplier(w: &LieField, m: &Multiplier) -> Result<LieField> {
    let s = m.apply_spectrum(&w.fft())?;
    Ok(s.ifft())
}

pub fn partial_derivative(w: &LieField, j: usize) -> LieField {
    apply_multiplier(w, &Multiplier::derivative(j)).expect("derivative symbol is finite")
}

/// Standard Riesz transform, symbol iξ_j/|ξ|.
pub fn riesz(w: &LieField, j: usize) -> LieField {
    apply_multiplier(w, &Multiplier::riesz(j)).expect("Riesz symbol is finite off zero")
}

/// Direction transform, symbol ξ_j/|ξ|.
pub fn riesz_unit(w: &LieField, j: usize) -> LieField {
    apply_multiplier(w, &Multiplier::riesz_unit(j)).expect("direction symbol is finite off zero")
}

pub fn laplacian(w: &LieField) -> LieField {
    apply_multiplier(w, &Multiplier::laplacian()).expect("finite symbol")
}

/// Mean-zero tolerance used by [`inverse_laplacian`], relative to max(1, ‖w‖).
pub const MEAN_TOL: f64 = 1e-10;

/// Solves Δg = w for mean-zero `w`; the result has zero mean.
pub fn inverse_laplacian(w: &LieField) -> Result<LieField> {
    let mean = crate::liealg::frobenius_norm(&w.mean());
    let scale = (w.l2_norm() / w.grid().side()).max(1.0);
    if mean > MEAN_TOL * scale {
        return Err(Error::NonzeroMean {
            mean,
            tol: MEAN_TOL * scale,
        });
    }
    apply_multiplier(w, &Multiplier::inverse_laplacian())
}

/// Two-thirds truncation of `w`.
pub fn dealias(w: &LieField) -> LieField {
    let mut s = w.fft();
    s.truncate();
    s.ifft()
}
