//! Dense su(n) matrix arithmetic.
//!
//! [`LieMatrix`] is a plain n×n complex matrix. Physical fields take values in
//! su(n) (anti-Hermitian, traceless); the auxiliary wave variables are allowed
//! to leave that subspace, so the type itself does not enforce the invariants.
//! Use [`LieMatrix::is_su`] to check them.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used by [`LieMatrix::is_su`].
pub const SU_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LieMatrix {
    n: usize,
    /// Row-major entries.
    entries: Vec<Complex64>,
}

impl LieMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![C0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = C1;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `entries.len() != n * n`.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
        Self { n, entries }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|&e| e * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_rank(other)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Anti-Hermitian part `(X - X†)/2`.
    pub fn anti_hermitian_part(&self) -> Self {
        let d = self.dagger();
        Self::from_fn(self.n, |i, j| (self.get(i, j) - d.get(i, j)) * 0.5)
    }

    /// Largest entry of `X + X†`.
    pub fn anti_hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) + self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Anti-Hermitian and traceless to [`SU_TOL`] (relative to the norm).
    pub fn is_su(&self) -> bool {
        let scale = frobenius_norm(self).max(1.0);
        self.anti_hermitian_defect() <= SU_TOL * scale && self.trace().norm() <= SU_TOL * scale
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = C1;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap();
            if a[pivot * n + col].norm() == 0.0 {
                return C0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= factor * v;
                }
            }
        }
        det
    }

    fn check_rank(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::RankMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl Add for &LieMatrix {
    type Output = LieMatrix;
    fn add(self, rhs: &LieMatrix) -> LieMatrix {
        assert_eq!(self.n, rhs.n);
        LieMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LieMatrix {
    type Output = LieMatrix;
    fn sub(self, rhs: &LieMatrix) -> LieMatrix {
        assert_eq!(self.n, rhs.n);
        LieMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &LieMatrix {
    type Output = LieMatrix;
    fn mul(self, rhs: &LieMatrix) -> LieMatrix {
        self.matmul(rhs).expect("rank mismatch in matrix product")
    }
}

impl Neg for &LieMatrix {
    type Output = LieMatrix;
    fn neg(self) -> LieMatrix {
        self.scale_real(-1.0)
    }
}

/// Lie bracket `XY - YX`.
pub fn bracket(x: &LieMatrix, y: &LieMatrix) -> Result<LieMatrix> {
    let xy = x.matmul(y)?;
    let yx = y.matmul(x)?;
    Ok(&xy - &yx)
}

/// `sqrt(sum |x_ij|^2)`.
pub fn frobenius_norm(x: &LieMatrix) -> f64 {
    x.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// For anti-Hermitian input the result is unitary; for traceless input it has
/// unit determinant.
pub fn lie_exp(x: &LieMatrix) -> LieMatrix {
    let n = x.n;
    let norm = frobenius_norm(x);
    // scale so that ||x / 2^k|| <= 1/2
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = x.scale_real(0.5f64.powi(squarings as i32));
    let mut result = LieMatrix::identity(n);
    let mut term = LieMatrix::identity(n);
    for k in 1..=18 {
        term = (&term * &a).scale_real(1.0 / k as f64);
        result = &result + &term;
        if frobenius_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [LieMatrix; 3] {
    let s1 = LieMatrix::from_entries(2, vec![C0, C1, C1, C0]);
    let s2 = LieMatrix::from_entries(2, vec![C0, -I, I, C0]);
    let s3 = LieMatrix::from_entries(2, vec![C1, C0, C0, -C1]);
    [s1, s2, s3]
}

/// Basis of su(n) normalized so that `tr(T_a T_b) = -δ_ab / 2`.
///
/// For n = 2 this is `{iσ₁/2, iσ₂/2, iσ₃/2}`.
pub fn su_basis(n: usize) -> Vec<LieMatrix> {
    if n == 2 {
        return pauli()
            .iter()
            .map(|s| s.scale(Complex64::new(0.0, 0.5)))
            .collect();
    }
    let mut basis = Vec::with_capacity(n * n - 1);
    let half_i = Complex64::new(0.0, 0.5);
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = LieMatrix::zeros(n);
            sym.set(j, k, half_i);
            sym.set(k, j, half_i);
            basis.push(sym);
            let mut anti = LieMatrix::zeros(n);
            anti.set(j, k, Complex64::new(0.5, 0.0));
            anti.set(k, j, Complex64::new(-0.5, 0.0));
            basis.push(anti);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = LieMatrix::zeros(n);
        for m in 0..l {
            diag.set(m, m, half_i * norm);
        }
        diag.set(l, l, half_i * (-(l as f64) * norm));
        basis.push(diag);
    }
    basis
}

/// Random su(n) element with independent normal coefficients of the given scale
/// in the [`su_basis`].
pub fn random_su<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> LieMatrix {
    let mut out = LieMatrix::zeros(n);
    for t in su_basis(n) {
        let c: f64 = rng.sample(StandardNormal);
        out = &out + &t.scale_real(c * scale);
    }
    out
}
