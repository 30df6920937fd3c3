use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{partial_derivative, LieField, Multiplier, Spectrum};

/// `Q₁₂(f, g) = ∂₁f·∂₂g − ∂₂f·∂₁g` with the matrix order kept.
///
/// `Q₁₂(f, f) = [∂₁f, ∂₂f]`.
pub fn null_form_q12(f: &LieField, g: &LieField) -> Result<LieField> {
    f.check_compatible(g)?;
    let (f1, f2) = (partial_derivative(f, 1), partial_derivative(f, 2));
    let (g1, g2) = (partial_derivative(g, 1), partial_derivative(g, 2));
    f1.matmul(&g2)?.sub(&f2.matmul(&g1)?)
}

/// Sign pattern of the null form `Q`.
///
/// With `D± = ∂ₜ ± iD` and `R̃_j` the direction transform (symbol ξ_j/|ξ|):
///
/// * `PlusUpper`:  `D₊R̃φ·D₋ψ + D₊φ·D₋R̃ψ`
/// * `PlusLower`:  `D₋R̃φ·D₊ψ + D₋φ·D₊R̃ψ`
/// * `MinusUpper`: `D₊R̃φ·D₊ψ − D₊φ·D₊R̃ψ`
/// * `MinusLower`: `D₋R̃φ·D₋ψ − D₋φ·D₋R̃ψ`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QVariant {
    PlusUpper,
    PlusLower,
    MinusUpper,
    MinusLower,
}

impl QVariant {
    fn signs(self) -> (f64, f64, f64) {
        // (sign on φ, sign on ψ, combination sign)
        match self {
            QVariant::PlusUpper => (1.0, -1.0, 1.0),
            QVariant::PlusLower => (-1.0, 1.0, 1.0),
            QVariant::MinusUpper => (1.0, 1.0, -1.0),
            QVariant::MinusLower => (-1.0, -1.0, -1.0),
        }
    }
}

/// `ŵt ± i|ξ|ŵ`.
fn half_wave(w: &Spectrum, wt: &Spectrum, sign: f64) -> Spectrum {
    let g = *w.grid();
    let nn = g.len();
    let mut out = wt.clone();
    for (idx, (o, z)) in out.data_mut().iter_mut().zip(w.data()).enumerate() {
        let (x1, x2) = g.xi(idx % nn);
        *o += Complex64::new(0.0, sign * x1.hypot(x2)) * z;
    }
    out
}

/// The null form `Q(φ, ψ)` at one time, from the fields and their time
/// derivatives.
pub fn null_form_q(
    phi: &LieField,
    phi_t: &LieField,
    psi: &LieField,
    psi_t: &LieField,
    j: usize,
    variant: QVariant,
) -> Result<LieField> {
    if j != 1 && j != 2 {
        return Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {j}")));
    }
    phi.check_compatible(phi_t)?;
    phi.check_compatible(psi)?;
    phi.check_compatible(psi_t)?;
    let (sa, sb, comb) = variant.signs();
    let dir = Multiplier::riesz_unit(j).table(phi.grid())?;
    let a = half_wave(&phi.fft(), &phi_t.fft(), sa);
    let b = half_wave(&psi.fft(), &psi_t.fft(), sb);
    let ra = a.scaled_by(&dir).ifft();
    let rb = b.scaled_by(&dir).ifft();
    let (a, b) = (a.ifft(), b.ifft());
    let first = ra.matmul(&b)?;
    let mut second = a.matmul(&rb)?;
    second = second.scale_real(comb);
    first.add(&second)
}

/// `q(τ, ξ, λ, η) = (ξ_j/|ξ| + η_j/|η|)(τ + |ξ|)(λ − |η|)`.
pub fn symbol_q(tau: f64, xi: [f64; 2], lambda: f64, eta: [f64; 2], j: usize) -> Result<f64> {
    if j != 1 && j != 2 {
        return Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {j}")));
    }
    let (nx, ne) = (xi[0].hypot(xi[1]), eta[0].hypot(eta[1]));
    if nx == 0.0 || ne == 0.0 {
        return Err(Error::Degenerate("symbol needs nonzero spatial frequencies".into()));
    }
    let dir = xi[j - 1] / nx + eta[j - 1] / ne;
    Ok(dir * (tau + nx) * (lambda - ne))
}

/// Frequency regions used to bound `q` when `τλ < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QRegion {
    /// `|τ| ≥ 2|ξ|` or `|λ| ≥ 2|η|`.
    AwayFromCone,
    /// Both frequencies within a factor two of their cones.
    NearCone,
}

pub fn q_region(tau: f64, xi: [f64; 2], lambda: f64, eta: [f64; 2]) -> QRegion {
    if tau.abs() >= 2.0 * xi[0].hypot(xi[1]) || lambda.abs() >= 2.0 * eta[0].hypot(eta[1]) {
        QRegion::AwayFromCone
    } else {
        QRegion::NearCone
    }
}

/// Pointwise bound on `|q|`: `2(|τ|+|ξ|)(|λ|+|η|)` away from the cone and
/// `9|ξ||η||ξ_j/|ξ| + η_j/|η||` near it, since there `|τ + |ξ|| < 3|ξ|` and
/// `|λ − |η|| < 3|η|`. The constant 4 sometimes quoted near the cone is only
/// an order-of-magnitude bound and fails at some points.
pub fn q_region_bound(tau: f64, xi: [f64; 2], lambda: f64, eta: [f64; 2], j: usize) -> Result<f64> {
    let (nx, ne) = (xi[0].hypot(xi[1]), eta[0].hypot(eta[1]));
    if nx == 0.0 || ne == 0.0 {
        return Err(Error::Degenerate("symbol needs nonzero spatial frequencies".into()));
    }
    Ok(match q_region(tau, xi, lambda, eta) {
        QRegion::AwayFromCone => 2.0 * (tau.abs() + nx) * (lambda.abs() + ne),
        QRegion::NearCone => 9.0 * nx * ne * (xi[j - 1] / nx + eta[j - 1] / ne).abs(),
    })
}
