use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::fft2;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::liealg::LieMatrix;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Matrix-valued field sampled on a [`TorusGrid`].
///
/// Storage is plane-major: entry `(i, j)` of the matrix at point `p` lives at
/// `data[(i·n + j)·N² + p]`, so each matrix entry is a contiguous N×N plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LieField {
    grid: TorusGrid,
    rank: usize,
    data: Vec<Complex64>,
    label: String,
}

/// Unnormalized 2-D Fourier coefficients of a [`LieField`], same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    rank: usize,
    data: Vec<Complex64>,
}

fn check_compat(a: (&TorusGrid, usize), b: (&TorusGrid, usize)) -> Result<()> {
    a.0.check_same(b.0)?;
    if a.1 != b.1 {
        return Err(Error::RankMismatch {
            left: a.1,
            right: b.1,
        });
    }
    Ok(())
}

impl LieField {
    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        Self {
            grid,
            rank,
            data: vec![C0; rank * rank * grid.len()],
            label: String::new(),
        }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: TorusGrid, rank: usize, mut f: impl FnMut(f64, f64) -> LieMatrix) -> Self {
        let mut out = Self::zeros(grid, rank);
        for p in 0..grid.len() {
            let (x, y) = grid.coords(p);
            out.set_at(p, &f(x, y));
        }
        out
    }

    /// `s(x, y) · m` for a scalar profile `s` and a fixed matrix `m`.
    pub fn from_scalar(
        grid: TorusGrid,
        m: &LieMatrix,
        mut s: impl FnMut(f64, f64) -> Complex64,
    ) -> Self {
        let rank = m.rank();
        let nn = grid.len();
        let mut out = Self::zeros(grid, rank);
        let profile: Vec<Complex64> = (0..nn)
            .map(|p| {
                let (x, y) = grid.coords(p);
                s(x, y)
            })
            .collect();
        for (e, &c) in m.entries().iter().enumerate() {
            if c == C0 {
                continue;
            }
            let plane = &mut out.data[e * nn..(e + 1) * nn];
            for (d, &v) in plane.iter_mut().zip(&profile) {
                *d = c * v;
            }
        }
        out
    }

    pub fn constant(grid: TorusGrid, m: &LieMatrix) -> Self {
        Self::from_scalar(grid, m, |_, _| Complex64::new(1.0, 0.0))
    }

    /// Wraps raw plane-major storage.
    pub fn from_raw(grid: TorusGrid, rank: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rank * rank * grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                rank * rank * grid.len(),
                data.len()
            )));
        }
        Ok(Self {
            grid,
            rank,
            data,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn plane(&self, i: usize, j: usize) -> &[Complex64] {
        let nn = self.grid.len();
        let e = i * self.rank + j;
        &self.data[e * nn..(e + 1) * nn]
    }

    pub fn at(&self, p: usize) -> LieMatrix {
        let nn = self.grid.len();
        LieMatrix::from_fn(self.rank, |i, j| self.data[(i * self.rank + j) * nn + p])
    }

    pub fn set_at(&mut self, p: usize, m: &LieMatrix) {
        assert_eq!(m.rank(), self.rank);
        let nn = self.grid.len();
        for (e, &v) in m.entries().iter().enumerate() {
            self.data[e * nn + p] = v;
        }
    }

    pub fn check_compatible(&self, other: &LieField) -> Result<()> {
        check_compat((&self.grid, self.rank), (&other.grid, other.rank))
    }

    fn zip_with(&self, other: &LieField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            label: String::new(),
        })
    }

    pub fn add(&self, other: &LieField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LieField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: Complex64, other: &LieField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            rank: self.rank,
            data: self.data.iter().map(|&a| a * c).collect(),
            label: self.label.clone(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn neg(&self) -> Self {
        self.scale_real(-1.0)
    }

    /// Pointwise matrix product.
    pub fn matmul(&self, other: &LieField) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.rank;
        let nn = self.grid.len();
        let mut out = Self::zeros(self.grid, n);
        for i in 0..n {
            for j in 0..n {
                let dst = &mut out.data[(i * n + j) * nn..(i * n + j + 1) * nn];
                for k in 0..n {
                    let a = &self.data[(i * n + k) * nn..(i * n + k + 1) * nn];
                    let b = &other.data[(k * n + j) * nn..(k * n + j + 1) * nn];
                    for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
                        *d += x * y;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pointwise bracket `XY − YX`.
    pub fn bracket(&self, other: &LieField) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Pointwise product with a fixed matrix on the left.
    pub fn left_mul(&self, m: &LieMatrix) -> Result<Self> {
        self.matmul(&LieField::constant(self.grid, m))
    }

    /// Pointwise conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.rank;
        let nn = self.grid.len();
        let mut out = Self::zeros(self.grid, n);
        for i in 0..n {
            for j in 0..n {
                let src = &self.data[(j * n + i) * nn..(j * n + i + 1) * nn];
                let dst = &mut out.data[(i * n + j) * nn..(i * n + j + 1) * nn];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s.conj();
                }
            }
        }
        out
    }

    /// `(W − W†)/2`.
    pub fn anti_hermitian_part(&self) -> Self {
        let mut out = self.sub(&self.dagger()).expect("same shape");
        out.data.iter_mut().for_each(|z| *z *= 0.5);
        out
    }

    /// `(W + W†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.add(&self.dagger()).expect("same shape");
        out.data.iter_mut().for_each(|z| *z *= 0.5);
        out
    }

    /// Discrete L² norm `sqrt(dx² Σ_p |W(p)|_F²)`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_area() * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `max_p |W(p)|_F`.
    pub fn sup_norm(&self) -> f64 {
        let nn = self.grid.len();
        let planes = self.rank * self.rank;
        (0..nn)
            .map(|p| {
                (0..planes)
                    .map(|e| self.data[e * nn + p].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Spatial average.
    pub fn mean(&self) -> LieMatrix {
        let nn = self.grid.len();
        LieMatrix::from_fn(self.rank, |i, j| {
            let e = i * self.rank + j;
            self.data[e * nn..(e + 1) * nn].iter().sum::<Complex64>() / nn as f64
        })
    }

    /// Copy with the spatial average removed.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        let nn = self.grid.len();
        let mut out = self.clone();
        for (e, &c) in m.entries().iter().enumerate() {
            out.data[e * nn..(e + 1) * nn].iter_mut().for_each(|z| *z -= c);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Whether every point is anti-Hermitian and traceless to `tol · max(1, ‖W‖_sup)`.
    pub fn is_su(&self, tol: f64) -> bool {
        let scale = self.sup_norm().max(1.0);
        (0..self.grid.len()).all(|p| {
            let m = self.at(p);
            m.anti_hermitian_defect() <= tol * scale && m.trace().norm() <= tol * scale
        })
    }

    /// Forward transform of every plane.
    pub fn fft(&self) -> Spectrum {
        let n = self.grid.n();
        let nn = self.grid.len();
        let mut data = self.data.clone();
        data.par_chunks_mut(nn).for_each(|plane| fft2(plane, n, false));
        Spectrum {
            grid: self.grid,
            rank: self.rank,
            data,
        }
    }
}

impl Spectrum {
    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        Self {
            grid,
            rank,
            data: vec![C0; rank * rank * grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn check_compatible(&self, other: &Spectrum) -> Result<()> {
        check_compat((&self.grid, self.rank), (&other.grid, other.rank))
    }

    /// Inverse transform back to grid values.
    pub fn ifft(&self) -> LieField {
        let n = self.grid.n();
        let nn = self.grid.len();
        let mut data = self.data.clone();
        data.par_chunks_mut(nn).for_each(|plane| fft2(plane, n, true));
        LieField {
            grid: self.grid,
            rank: self.rank,
            data,
            label: String::new(),
        }
    }

    /// Multiplies every plane by a per-mode table of length N².
    pub fn scale_by(&mut self, table: &[Complex64]) {
        let nn = self.grid.len();
        debug_assert_eq!(table.len(), nn);
        for plane in self.data.chunks_mut(nn) {
            for (z, &t) in plane.iter_mut().zip(table) {
                *z *= t;
            }
        }
    }

    pub fn scaled_by(&self, table: &[Complex64]) -> Self {
        let mut out = self.clone();
        out.scale_by(table);
        out
    }

    /// `self += c · other` modewise.
    pub fn axpy(&mut self, c: Complex64, other: &Spectrum) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Zeroes every mode outside the two-thirds band.
    pub fn truncate(&mut self) {
        let nn = self.grid.len();
        let keep: Vec<bool> = (0..nn).map(|p| self.grid.retained(p)).collect();
        for plane in self.data.chunks_mut(nn) {
            for (z, &k) in plane.iter_mut().zip(&keep) {
                if !k {
                    *z = C0;
                }
            }
        }
    }

    /// `Σ |ŵ|² · dx² / N²`, equal to the squared L² norm of the field.
    pub fn l2_norm_sq(&self) -> f64 {
        let g = &self.grid;
        g.cell_area() / g.len() as f64 * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Zero-mode coefficient as a matrix (unnormalized).
    pub fn zero_mode(&self) -> LieMatrix {
        let nn = self.grid.len();
        LieMatrix::from_fn(self.rank, |i, j| self.data[(i * self.rank + j) * nn])
    }
}
