use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fft3, LieField, Multiplier, TorusGrid};

/// Time taper applied before the time transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Window {
    /// `sin²(πm/M)`, vanishing at the first sample and (periodically) at `T`.
    Hann,
    /// No taper; the samples are treated as one period.
    None,
}

/// Which wave-Sobolev norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveNorm {
    /// `‖Λ^s Λ₋^θ u‖`.
    H,
    /// `‖u‖_{H^{s,θ}} + ‖∂ₜu‖_{H^{s−1,θ}}`.
    CalH,
}

/// Minimum number of time samples.
pub const MIN_FRAMES: usize = 8;

/// Field values on `M` equally spaced times `t_m = mT/M` over a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSample {
    frames: Vec<LieField>,
    duration: f64,
    window: Window,
}

impl SpaceTimeSample {
    pub fn new(frames: Vec<LieField>, duration: f64, window: Window) -> Result<Self> {
        if frames.len() < MIN_FRAMES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_FRAMES} time samples, got {}",
                frames.len()
            )));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        for f in &frames[1..] {
            frames[0].check_compatible(f)?;
        }
        Ok(Self {
            frames,
            duration,
            window,
        })
    }

    /// Samples `f(t_m)` for `m = 0..M`.
    pub fn from_fn(
        m: usize,
        duration: f64,
        window: Window,
        f: impl Fn(f64) -> LieField + Sync,
    ) -> Result<Self> {
        let dt = duration / m as f64;
        let frames: Vec<LieField> = (0..m).into_par_iter().map(|k| f(k as f64 * dt)).collect();
        Self::new(frames, duration, window)
    }

    pub fn frames(&self) -> &[LieField] {
        &self.frames
    }

    pub fn grid(&self) -> &TorusGrid {
        self.frames[0].grid()
    }

    pub fn rank(&self) -> usize {
        self.frames[0].rank()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.frames.len() as f64
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt()).collect()
    }

    pub fn window_weights(&self) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|k| match self.window {
                Window::Hann => (PI * k as f64 / m as f64).sin().powi(2),
                Window::None => 1.0,
            })
            .collect()
    }

    /// Time frequency `τ = 2πk/T` of time index `i`.
    pub fn tau(&self, i: usize) -> f64 {
        let m = self.len();
        let k = if i < m / 2 { i as f64 } else { i as f64 - m as f64 };
        2.0 * PI * k / self.duration
    }

    /// Applies `op` frame by frame.
    pub fn map(&self, op: impl Fn(&LieField) -> Result<LieField> + Sync + Send) -> Result<Self> {
        let frames = self.frames.par_iter().map(op).collect::<Result<Vec<_>>>()?;
        Self::new(frames, self.duration, self.window)
    }

    /// Combines two samples on the same time grid frame by frame.
    pub fn zip_with(
        &self,
        other: &SpaceTimeSample,
        op: impl Fn(&LieField, &LieField) -> Result<LieField> + Sync,
    ) -> Result<Self> {
        self.check_compatible(other)?;
        let frames = self
            .frames
            .par_iter()
            .zip(&other.frames)
            .map(|(a, b)| op(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames, self.duration, self.window)
    }

    pub fn check_compatible(&self, other: &SpaceTimeSample) -> Result<()> {
        self.frames[0].check_compatible(&other.frames[0])?;
        if self.len() != other.len() || self.duration != other.duration {
            return Err(Error::InvalidArgument(format!(
                "time grids differ: {} samples over {} vs {} over {}",
                self.len(),
                self.duration,
                other.len(),
                other.duration
            )));
        }
        Ok(())
    }

    /// Windowed 2+1 spectrum, one `M × N²` block per matrix entry.
    pub fn spectrum(&self) -> Vec<Vec<Complex64>> {
        let m = self.len();
        let g = *self.grid();
        let nn = g.len();
        let planes = self.rank() * self.rank();
        let w = self.window_weights();
        (0..planes)
            .into_par_iter()
            .map(|e| {
                let mut block = Vec::with_capacity(m * nn);
                for (k, f) in self.frames.iter().enumerate() {
                    block.extend(f.data()[e * nn..(e + 1) * nn].iter().map(|z| z * w[k]));
                }
                fft3(&mut block, m, g.n(), false);
                block
            })
            .collect()
    }

    /// `(Σ weight(τ, ξ)² |û|² · dt·dx² / (M N²))^{1/2}` over the windowed spectrum.
    pub fn weighted_norm(&self, weight: impl Fn(f64, f64, f64) -> f64 + Sync) -> f64 {
        let spec = self.spectrum();
        self.weighted_norm_of(&spec, &weight)
    }

    pub(crate) fn weighted_norm_of(
        &self,
        spec: &[Vec<Complex64>],
        weight: &(impl Fn(f64, f64, f64) -> f64 + Sync),
    ) -> f64 {
        let m = self.len();
        let g = *self.grid();
        let nn = g.len();
        let table: Vec<f64> = (0..m * nn)
            .into_par_iter()
            .map(|idx| {
                let (x1, x2) = g.xi(idx % nn);
                weight(self.tau(idx / nn), x1, x2).powi(2)
            })
            .collect();
        // per-plane sums in parallel, combined in a fixed order
        let planes: Vec<f64> = spec
            .par_iter()
            .map(|b| b.iter().zip(&table).map(|(z, w)| w * z.norm_sqr()).sum::<f64>())
            .collect();
        let sum: f64 = planes.iter().sum();
        (sum * self.dt() * g.cell_area() / (m * nn) as f64).sqrt()
    }

    /// `L^p_t L^q_x` norm of the raw (untapered) samples after the spatial
    /// multiplier `spatial`, with pointwise Frobenius norms.
    pub fn lp_lq_norm(&self, p: f64, q: f64, spatial: Option<&Multiplier>) -> Result<f64> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "exponents must be at least 1, got p = {p}, q = {q}"
            )));
        }
        let g = *self.grid();
        let per_frame = self
            .frames
            .par_iter()
            .map(|f| {
                let f = match spatial {
                    Some(m) => m.apply_spectrum(&f.fft())?.ifft(),
                    None => f.clone(),
                };
                Ok(lq_norm(&f, q, &g))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(if p.is_infinite() {
            per_frame.iter().fold(0.0, |a, &b| a.max(b))
        } else {
            (per_frame.iter().map(|v| v.powf(p)).sum::<f64>() * self.dt()).powf(1.0 / p)
        })
    }
}

fn lq_norm(f: &LieField, q: f64, g: &TorusGrid) -> f64 {
    let nn = g.len();
    let planes = f.rank() * f.rank();
    let point = |p: usize| {
        (0..planes)
            .map(|e| f.data()[e * nn + p].norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    if q.is_infinite() {
        (0..nn).map(point).fold(0.0, f64::max)
    } else {
        ((0..nn).map(|p| point(p).powf(q)).sum::<f64>() * g.cell_area()).powf(1.0 / q)
    }
}

/// `(1 + ||τ| − |ξ||)`, the comparable form of the `Λ₋` symbol.
pub fn lambda_minus(tau: f64, xi1: f64, xi2: f64) -> f64 {
    1.0 + (tau.abs() - xi1.hypot(xi2)).abs()
}

/// `(1 + |τ| + |ξ|)`, comparable to the `Λ₊` symbol.
pub fn lambda_plus(tau: f64, xi1: f64, xi2: f64) -> f64 {
    1.0 + tau.abs() + xi1.hypot(xi2)
}

fn bessel(s: f64, xi1: f64, xi2: f64) -> f64 {
    (1.0 + xi1 * xi1 + xi2 * xi2).powf(0.5 * s)
}

/// Wave-Sobolev norm of the windowed sample with symbol
/// `(1+|ξ|²)^{s/2} (1 + ||τ|−|ξ||)^θ`.
pub fn wave_sobolev_norm(ws: &SpaceTimeSample, s: f64, theta: f64, variant: WaveNorm) -> f64 {
    let spec = ws.spectrum();
    wave_sobolev_norm_of(ws, &spec, s, theta, variant, &|_, _, _| 1.0)
}

/// As [`wave_sobolev_norm`] applied to `m(τ, ξ)·û`.
pub(crate) fn wave_sobolev_norm_of(
    ws: &SpaceTimeSample,
    spec: &[Vec<Complex64>],
    s: f64,
    theta: f64,
    variant: WaveNorm,
    m: &(impl Fn(f64, f64, f64) -> f64 + Sync),
) -> f64 {
    let base = ws.weighted_norm_of(spec, &|t, a, b| {
        m(t, a, b) * bessel(s, a, b) * lambda_minus(t, a, b).powf(theta)
    });
    match variant {
        WaveNorm::H => base,
        WaveNorm::CalH => {
            base + ws.weighted_norm_of(spec, &|t, a, b| {
                m(t, a, b) * t.abs() * bessel(s - 1.0, a, b) * lambda_minus(t, a, b).powf(theta)
            })
        }
    }
}
