//! Forms, curvature, covariant derivatives and gauge transformations.
//!
//! Index 0 is time, 1 and 2 are the spatial axes. Time derivatives are never
//! computed here; callers pass them in from an evolution.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{lie_exp, LieMatrix};
use crate::spectral::{inverse_laplacian, partial_derivative, sobolev_norm, LieField, TorusGrid};

/// Connection `A = A₀dt + A₁dx + A₂dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub a0: LieField,
    pub a1: LieField,
    pub a2: LieField,
}

/// Time derivatives of the spatial connection and, optionally, of φ.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDerivatives {
    pub a1: LieField,
    pub a2: LieField,
    pub phi: Option<LieField>,
}

impl Connection {
    pub fn new(a0: LieField, a1: LieField, a2: LieField) -> Result<Self> {
        a0.check_compatible(&a1)?;
        a0.check_compatible(&a2)?;
        Ok(Self { a0, a1, a2 })
    }

    /// Spatial connection with `A₀ = 0`.
    pub fn spatial(a1: LieField, a2: LieField) -> Result<Self> {
        let a0 = LieField::zeros(*a1.grid(), a1.rank());
        Self::new(a0, a1, a2)
    }

    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        let z = LieField::zeros(grid, rank);
        Self {
            a0: z.clone(),
            a1: z.clone(),
            a2: z,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.a1.grid()
    }

    pub fn rank(&self) -> usize {
        self.a1.rank()
    }

    pub fn component(&self, alpha: usize) -> &LieField {
        match alpha {
            0 => &self.a0,
            1 => &self.a1,
            2 => &self.a2,
            _ => panic!("connection index must be 0, 1 or 2, got {alpha}"),
        }
    }

    /// `∂¹A₁ + ∂²A₂`.
    pub fn divergence(&self) -> LieField {
        partial_derivative(&self.a1, 1)
            .add(&partial_derivative(&self.a2, 2))
            .expect("same grid")
    }

    /// `‖∂¹A₁ + ∂²A₂‖ / (‖A₁‖ + ‖A₂‖)`, zero for the zero connection.
    pub fn coulomb_ratio(&self) -> f64 {
        let denom = self.a1.l2_norm() + self.a2.l2_norm();
        if denom == 0.0 {
            0.0
        } else {
            self.divergence().l2_norm() / denom
        }
    }

    /// Spatial L² norm `sqrt(‖A₁‖² + ‖A₂‖²)`.
    pub fn spatial_norm(&self) -> f64 {
        (self.a1.l2_norm_sq() + self.a2.l2_norm_sq()).sqrt()
    }
}

/// Curvature components; the temporal ones need time derivatives.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub f12: LieField,
    pub f01: Option<LieField>,
    pub f02: Option<LieField>,
}

impl Curvature {
    /// `F_{αβ}`, with `F_{βα} = −F_{αβ}` and `F_{αα} = 0`.
    pub fn get(&self, alpha: usize, beta: usize) -> Result<LieField> {
        let missing = || Error::MissingTimeDerivative("spatial connection");
        let (lo, hi, sign) = if alpha < beta {
            (alpha, beta, 1.0)
        } else {
            (beta, alpha, -1.0)
        };
        let f = match (lo, hi) {
            (a, b) if a == b => return Ok(LieField::zeros(*self.f12.grid(), self.f12.rank())),
            (1, 2) => self.f12.clone(),
            (0, 1) => self.f01.clone().ok_or_else(missing)?,
            (0, 2) => self.f02.clone().ok_or_else(missing)?,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "curvature index out of range: ({alpha}, {beta})"
                )))
            }
        };
        Ok(if sign < 0.0 { f.neg() } else { f })
    }
}

/// `F_{αβ} = ∂_αA_β − ∂_βA_α + [A_α, A_β]`.
pub fn curvature(a: &Connection, rates: Option<&TimeDerivatives>) -> Result<Curvature> {
    let f12 = partial_derivative(&a.a2, 1)
        .sub(&partial_derivative(&a.a1, 2))?
        .add(&a.a1.bracket(&a.a2)?)?;
    let (f01, f02) = match rates {
        Some(r) => {
            // F_{0i} = ∂ₜA_i − ∂_iA₀ + [A₀, A_i]
            let f01 = r
                .a1
                .sub(&partial_derivative(&a.a0, 1))?
                .add(&a.a0.bracket(&a.a1)?)?;
            let f02 = r
                .a2
                .sub(&partial_derivative(&a.a0, 2))?
                .add(&a.a0.bracket(&a.a2)?)?;
            (Some(f01), Some(f02))
        }
        None => (None, None),
    };
    Ok(Curvature { f12, f01, f02 })
}

/// `D_αφ = ∂_αφ + [A_α, φ]`; α = 0 needs `phi_t`.
pub fn covariant_derivative(
    a: &Connection,
    phi: &LieField,
    alpha: usize,
    phi_t: Option<&LieField>,
) -> Result<LieField> {
    let d = match alpha {
        0 => phi_t.ok_or(Error::MissingTimeDerivative("phi"))?.clone(),
        1 | 2 => partial_derivative(phi, alpha),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "covariant derivative index must be 0, 1 or 2, got {alpha}"
            )))
        }
    };
    d.add(&a.component(alpha).bracket(phi)?)
}

/// `(D₀φ − F₁₂, D₁φ − F₀₂, D₂φ − F₁₀)`.
pub fn monopole_residual(
    a: &Connection,
    phi: &LieField,
    rates: &TimeDerivatives,
) -> Result<[LieField; 3]> {
    let f = curvature(a, Some(rates))?;
    let d0 = covariant_derivative(a, phi, 0, rates.phi.as_ref())?;
    let d1 = covariant_derivative(a, phi, 1, None)?;
    let d2 = covariant_derivative(a, phi, 2, None)?;
    Ok([
        d0.sub(&f.get(1, 2)?)?,
        d1.sub(&f.get(0, 2)?)?,
        d2.sub(&f.get(1, 0)?)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// Flat ℝ², basis `1 | dx, dy | dx∧dy`.
    Euclidean,
    /// diag(−1, 1, 1) on ℝ^{2+1}, basis `dt, dx, dy | dt∧dx, dt∧dy, dx∧dy`.
    Minkowski,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean-2d",
            Metric::Minkowski => "minkowski-2+1",
        }
    }

    fn dim(self) -> usize {
        match self {
            Metric::Euclidean => 2,
            Metric::Minkowski => 3,
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Lie-algebra valued differential form with one field per basis element.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    degree: usize,
    metric: Metric,
    components: Vec<LieField>,
}

impl FormField {
    pub fn new(degree: usize, metric: Metric, components: Vec<LieField>) -> Result<Self> {
        let want = binomial(metric.dim(), degree);
        if want == 0 {
            return Err(Error::UnsupportedDegree {
                degree,
                metric: metric.name(),
            });
        }
        if components.len() != want {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} form on {} needs {want} components, got {}",
                metric.name(),
                components.len()
            )));
        }
        for c in &components[1..] {
            components[0].check_compatible(c)?;
        }
        Ok(Self {
            degree,
            metric,
            components,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn components(&self) -> &[LieField] {
        &self.components
    }
}

/// Hodge star on the tables
/// `∗1 = dx∧dy, ∗dx = dy, ∗dy = −dx` (Euclidean) and
/// `∗dt = dx∧dy, ∗dx = dt∧dy, ∗dy = −dt∧dx` (Minkowski), extended to
/// Euclidean 2-forms by `∗(dx∧dy) = 1` and to Minkowski 2-forms by
/// `∗(dx∧dy) = −dt, ∗(dt∧dy) = −dx, ∗(dt∧dx) = dy`.
pub fn hodge_star(w: &FormField) -> Result<FormField> {
    let c = &w.components;
    let unsupported = || Error::UnsupportedDegree {
        degree: w.degree,
        metric: w.metric.name(),
    };
    let (degree, comps) = match (w.metric, w.degree) {
        (Metric::Euclidean, 0) => (2, vec![c[0].clone()]),
        (Metric::Euclidean, 1) => (1, vec![c[1].neg(), c[0].clone()]),
        (Metric::Euclidean, 2) => (0, vec![c[0].clone()]),
        // a dt + b dx + c dy ↦ −c dt∧dx + b dt∧dy + a dx∧dy
        (Metric::Minkowski, 1) => (2, vec![c[2].neg(), c[1].clone(), c[0].clone()]),
        // p dt∧dx + q dt∧dy + r dx∧dy ↦ −r dt − q dx + p dy
        (Metric::Minkowski, 2) => (1, vec![c[2].neg(), c[1].neg(), c[0].clone()]),
        _ => return Err(unsupported()),
    };
    FormField::new(degree, w.metric, comps)
}

/// Pointwise exponential of a matrix field.
pub fn exp_field(chi: &LieField) -> LieField {
    let mut out = LieField::zeros(*chi.grid(), chi.rank());
    for p in 0..chi.grid().len() {
        out.set_at(p, &lie_exp(&chi.at(p)));
    }
    out
}

/// `max_p ‖g g† − I‖_F`.
pub fn unitarity_deviation(g: &LieField) -> f64 {
    let ggd = g.matmul(&g.dagger()).expect("same shape");
    let id = LieMatrix::identity(g.rank());
    (0..g.grid().len())
        .map(|p| crate::liealg::frobenius_norm(&(&ggd.at(p) - &id)))
        .fold(0.0, f64::max)
}

/// Largest accepted unitarity defect for gauge fields.
pub const UNITARY_TOL: f64 = 1e-8;

/// Largest accepted `|det g − 1|`.
pub const DET_TOL: f64 = 1e-8;

fn check_gauge(g: &LieField) -> Result<()> {
    let mut deviation = unitarity_deviation(g);
    for p in 0..g.grid().len() {
        let d = (g.at(p).determinant() - Complex64::new(1.0, 0.0)).norm();
        if d > DET_TOL {
            deviation = deviation.max(d);
        }
    }
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `A_g = gAg⁻¹ + g d(g⁻¹)` and `φ_g = gφg⁻¹`.
///
/// `g_t` is the time derivative of `g`; `None` means `g` is time independent.
pub fn gauge_transform(
    a: &Connection,
    phi: &LieField,
    g: &LieField,
    g_t: Option<&LieField>,
) -> Result<(Connection, LieField)> {
    a.a1.check_compatible(g)?;
    check_gauge(g)?;
    let gi = g.dagger();
    let conj = |w: &LieField| -> Result<LieField> { g.matmul(w)?.matmul(&gi) };
    let a1 = conj(&a.a1)?.add(&g.matmul(&partial_derivative(&gi, 1))?)?;
    let a2 = conj(&a.a2)?.add(&g.matmul(&partial_derivative(&gi, 2))?)?;
    let mut a0 = conj(&a.a0)?;
    if let Some(gt) = g_t {
        a0 = a0.add(&g.matmul(&gt.dagger())?)?;
    }
    Ok((Connection::new(a0, a1, a2)?, conj(phi)?))
}

/// Transforms time derivatives of `(A₁, A₂, φ)` under a time-independent `g`.
pub fn gauge_transform_rates(rates: &TimeDerivatives, g: &LieField) -> Result<TimeDerivatives> {
    check_gauge(g)?;
    let gi = g.dagger();
    let conj = |w: &LieField| -> Result<LieField> { g.matmul(w)?.matmul(&gi) };
    Ok(TimeDerivatives {
        a1: conj(&rates.a1)?,
        a2: conj(&rates.a2)?,
        phi: rates.phi.as_ref().map(conj).transpose()?,
    })
}

/// Settings for [`coulomb_project`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoulombSettings {
    /// Target for `‖div a_g‖ / (‖a₁‖ + ‖a₂‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Upper bound on the H^s norm of the input connection.
    pub threshold: f64,
    /// Sobolev index of the smallness check.
    pub s: f64,
}

impl Default for CoulombSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            threshold: 0.1,
            s: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoulombProjection {
    pub g: LieField,
    pub a: Connection,
    /// Relative divergence before each update, then after the last one.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Traceless anti-Hermitian part.
fn su_part(w: &LieField) -> LieField {
    let mut out = w.anti_hermitian_part();
    let (n, nn) = (out.rank(), out.grid().len());
    let data = out.data_mut();
    for p in 0..nn {
        let tr = (0..n).map(|i| data[(i * n + i) * nn + p]).sum::<Complex64>() / n as f64;
        for i in 0..n {
            data[(i * n + i) * nn + p] -= tr;
        }
    }
    out
}

/// Numerical Coulomb gauge fixing by `g ← exp(χ)g`, `Δχ = div(a_g)`.
///
/// Linearizing `a_{exp(χ)g} ≈ a_g + [χ, a_g] − dχ` shows this choice of sign
/// removes the divergence to first order.
pub fn coulomb_project(a: &Connection, settings: &CoulombSettings) -> Result<CoulombProjection> {
    let hs = (sobolev_norm(&a.a1, settings.s, false)?.powi(2)
        + sobolev_norm(&a.a2, settings.s, false)?.powi(2))
    .sqrt();
    if hs > settings.threshold {
        return Err(Error::SmallnessViolated {
            context: "coulomb projection",
            measure: hs,
            threshold: settings.threshold,
        });
    }
    let grid = *a.grid();
    let rank = a.rank();
    let mut g = LieField::constant(grid, &LieMatrix::identity(rank));
    let zero_phi = LieField::zeros(grid, rank);
    let spatial = Connection::spatial(a.a1.clone(), a.a2.clone())?;
    let mut current = spatial.clone();
    let mut history = Vec::new();
    for it in 0..=settings.max_iter {
        let ratio = current.coulomb_ratio();
        history.push(ratio);
        if ratio <= settings.tol {
            let a0 = a.a0.clone();
            let gi = g.dagger();
            let a0 = g.matmul(&a0)?.matmul(&gi)?;
            return Ok(CoulombProjection {
                g,
                a: Connection::new(a0, current.a1, current.a2)?,
                history,
                iterations: it,
            });
        }
        if it == settings.max_iter {
            break;
        }
        // round-off leaves a Hermitian part that compounds across iterations
        let chi = su_part(&inverse_laplacian(&current.divergence())?);
        g = exp_field(&chi).matmul(&g)?;
        current = gauge_transform(&spatial, &zero_phi, &g, None)?.0;
    }
    Err(Error::SmallnessViolated {
        context: "coulomb projection",
        measure: *history.last().unwrap_or(&f64::NAN),
        threshold: settings.tol,
    })
}
