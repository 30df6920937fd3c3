use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nullform::null_form_q12;
use super::params::{epsilon_window, kt_check, theta_window, A0Exponents};
use super::sample::{
    lambda_minus, lambda_plus, wave_sobolev_norm, wave_sobolev_norm_of, SpaceTimeSample, WaveNorm,
    Window,
};
use crate::ame::{b_spectra, elliptic_solve_a0, reconstruct, AuxState, B2Route, EllipticSettings, Products};
use crate::error::{Error, Result};
use crate::liealg::{su_basis, LieMatrix};
use crate::spectral::{partial_derivative, LieField, Multiplier, Spectrum, TorusGrid};

/// The inequalities that can be sampled.
///
/// * `A`: `‖D^{−σ}(uv)‖_{L^pL^q} ≲ ‖u‖_{H^{s₁,θ}}‖v‖_{H^{s₂,θ}}`
/// * `C`: `‖u‖_{L^pL²} ≲ ‖u‖_{H^{0,θ}}`
/// * `D`: `‖u‖_{L^pL^q} ≲ ‖u‖_{H^{1−2/q−1/p,θ}}`
/// * `E`: `‖uv‖_{L²} ≲ ‖u‖_{H^{a,α}}‖v‖_{H^{b,β}}`
/// * `M1`: `‖[∂₁f,∂₂f]‖_{H^{s,θ−1+ε}} ≲ ‖∇f‖²_{H^{s,θ}}`
/// * `M1Generic`: the same with the plain product `∂₁f·∂₂f`, for comparison
/// * `M2`: `‖A₀φ‖_{H^{s,θ−1+ε}} ≲ ‖A₀‖‖φ‖_{H^{s,θ}}`
/// * `M3`: `‖[∂_jf,φ]‖_{H^{s,θ−1+ε}} ≲ ‖∂_jf‖_{H^{s,θ}}‖φ‖_{H^{s,θ}}`
/// * `M4`: `‖A₀∂_jf‖_{H^{s,θ−1+ε}} ≲ ‖A₀‖‖∂_jf‖_{H^{s,θ}}`
/// * `Ell`: `‖A₀‖ ≲ ‖∇f‖_{H^{s,θ}}‖φ‖_{H^{s,θ}}`
/// * `Bound`: `max± ‖Λ₊⁻¹Λ₋^{−1+ε}B±‖_{𝓗^{s+1,θ}} ≲ ‖u‖_{𝓗^{s+1,θ}} + ‖v‖_{𝓗^{s+1,θ}}`
///
/// The `A₀` norm is `‖A₀‖_{L^{p̃}L^∞} + ‖D^sA₀‖_{L^pL^q}` with `2/p = 1 − 1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateKind {
    A,
    C,
    D,
    E,
    M1,
    M1Generic,
    M2,
    M3,
    M4,
    Ell,
    Bound,
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 11] = [
        EstimateKind::A,
        EstimateKind::C,
        EstimateKind::D,
        EstimateKind::E,
        EstimateKind::M1,
        EstimateKind::M1Generic,
        EstimateKind::M2,
        EstimateKind::M3,
        EstimateKind::M4,
        EstimateKind::Ell,
        EstimateKind::Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::A => "A",
            EstimateKind::C => "C",
            EstimateKind::D => "D",
            EstimateKind::E => "E",
            EstimateKind::M1 => "M1",
            EstimateKind::M1Generic => "M1Generic",
            EstimateKind::M2 => "M2",
            EstimateKind::M3 => "M3",
            EstimateKind::M4 => "M4",
            EstimateKind::Ell => "Ell",
            EstimateKind::Bound => "Bound",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimate kind {s:?}")))
    }
}

/// Exponents shared by the estimates; each kind reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    pub s: f64,
    pub theta: f64,
    pub epsilon: f64,
    /// Lebesgue exponents of A, C and D.
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub s1: f64,
    pub s2: f64,
    /// Orders of E.
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Spatial exponent `q` of the `A₀` norm.
    pub a0_q: f64,
    /// Time exponent `p̃` of the `A₀` norm.
    pub p_tilde: f64,
    /// Axis `j` of M3 and M4.
    pub axis: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            s: 0.3,
            theta: 0.78,
            epsilon: 0.0,
            p: 4.0,
            q: 4.0,
            sigma: 0.25,
            s1: 0.5,
            s2: 0.5,
            a: 0.6,
            b: 0.6,
            alpha: 0.3,
            beta: 0.3,
            a0_q: 1.0 / 0.175,
            p_tilde: 1.0 / 0.45,
            axis: 1,
        }
    }
}

/// Samples an estimate is evaluated on.
#[derive(Debug, Clone)]
pub enum EstimateInputs {
    /// `u` for C and D.
    Single(SpaceTimeSample),
    /// `(u, v)` for A and E, `(A₀, φ)` for M2, `(∂_jf, φ)` for M3,
    /// `(A₀, ∂_jf)` for M4.
    Pair(SpaceTimeSample, SpaceTimeSample),
    /// `f` for M1 and M1Generic.
    Potential(SpaceTimeSample),
    /// `(∂₁f, ∂₂f, φ)` for Ell; `A₀` is solved for frame by frame.
    Fields {
        df1: SpaceTimeSample,
        df2: SpaceTimeSample,
        phi: SpaceTimeSample,
    },
    /// Wave variables at `t_m = mT/M` for Bound.
    Waves {
        frames: Vec<AuxState>,
        duration: f64,
        window: Window,
    },
}

/// Both sides of one inequality on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateValue {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

fn inadmissible(kind: EstimateKind, why: &str) -> Error {
    Error::Inadmissible(format!("estimate {}: {why}", kind.name()))
}

fn in_local_window(kind: EstimateKind, p: &EstimateParams) -> Result<()> {
    if !(p.s > 0.25 && p.s < 0.5) {
        return Err(inadmissible(kind, "needs 1/4 < s < 1/2"));
    }
    if !epsilon_window(p.s).contains(p.epsilon) {
        return Err(inadmissible(kind, "ε outside its window"));
    }
    if !theta_window(p.s, p.epsilon).contains(p.theta) {
        return Err(inadmissible(kind, "θ outside its window"));
    }
    Ok(())
}

fn a0_exponents_ok(kind: EstimateKind, p: &EstimateParams) -> Result<()> {
    let w = A0Exponents::new(p.s);
    if !w.inv_q.contains(1.0 / p.a0_q) {
        return Err(inadmissible(kind, "1/q of the A₀ norm outside its window"));
    }
    if !w.inv_p_tilde.contains(1.0 / p.p_tilde) {
        return Err(inadmissible(kind, "1/p̃ of the A₀ norm outside its window"));
    }
    Ok(())
}

fn axis_ok(kind: EstimateKind, p: &EstimateParams) -> Result<()> {
    if p.axis == 1 || p.axis == 2 {
        Ok(())
    } else {
        Err(inadmissible(kind, "axis must be 1 or 2"))
    }
}

/// Checks the side conditions under which `kind` is stated.
pub fn check_admissible(kind: EstimateKind, p: &EstimateParams) -> Result<()> {
    use EstimateKind::*;
    match kind {
        A => {
            if !kt_check(p.sigma, p.p, p.q, p.s1, p.s2).all() {
                return Err(inadmissible(kind, "(σ, p, q, s₁, s₂) fail the bilinear conditions"));
            }
            if !(p.theta > 0.5) {
                return Err(inadmissible(kind, "needs θ > 1/2"));
            }
        }
        C => {
            if !(p.p >= 2.0 && p.theta > 0.5) {
                return Err(inadmissible(kind, "needs 2 ≤ p ≤ ∞ and θ > 1/2"));
            }
        }
        D => {
            let ok = p.p >= 2.0
                && p.q >= 2.0
                && p.q.is_finite()
                && 2.0 / p.p <= 0.5 - 1.0 / p.q
                && p.theta > 0.5;
            if !ok {
                return Err(inadmissible(
                    kind,
                    "needs 2 ≤ p ≤ ∞, 2 ≤ q < ∞, 2/p ≤ 1/2 − 1/q and θ > 1/2",
                ));
            }
        }
        E => {
            let ok = p.a >= 0.0
                && p.b >= 0.0
                && p.alpha >= 0.0
                && p.beta >= 0.0
                && p.a + p.b > 1.0
                && p.alpha + p.beta > 0.5;
            if !ok {
                return Err(inadmissible(kind, "needs a, b, α, β ≥ 0, a + b > 1, α + β > 1/2"));
            }
        }
        M1 | M1Generic | Bound => in_local_window(kind, p)?,
        M3 => {
            in_local_window(kind, p)?;
            axis_ok(kind, p)?;
        }
        M2 | Ell => {
            in_local_window(kind, p)?;
            a0_exponents_ok(kind, p)?;
        }
        M4 => {
            in_local_window(kind, p)?;
            a0_exponents_ok(kind, p)?;
            axis_ok(kind, p)?;
        }
    }
    Ok(())
}

fn h_norm(ws: &SpaceTimeSample, s: f64, theta: f64) -> f64 {
    wave_sobolev_norm(ws, s, theta, WaveNorm::H)
}

fn a0_norm(a0: &SpaceTimeSample, p: &EstimateParams) -> Result<f64> {
    let q = p.a0_q;
    let time_p = 2.0 / (1.0 - 1.0 / q);
    Ok(a0.lp_lq_norm(p.p_tilde, f64::INFINITY, None)?
        + a0.lp_lq_norm(time_p, q, Some(&Multiplier::homogeneous(p.s)))?)
}

fn product(u: &SpaceTimeSample, v: &SpaceTimeSample) -> Result<SpaceTimeSample> {
    u.zip_with(v, |a, b| a.matmul(b))
}

fn bracket(u: &SpaceTimeSample, v: &SpaceTimeSample) -> Result<SpaceTimeSample> {
    u.zip_with(v, |a, b| a.bracket(b))
}

fn derivative(u: &SpaceTimeSample, j: usize) -> Result<SpaceTimeSample> {
    u.map(|f| Ok(partial_derivative(f, j)))
}

fn solve_a0(
    df1: &SpaceTimeSample,
    df2: &SpaceTimeSample,
    phi: &SpaceTimeSample,
) -> Result<SpaceTimeSample> {
    df1.check_compatible(df2)?;
    df1.check_compatible(phi)?;
    let settings = EllipticSettings::default();
    let frames = df1
        .frames()
        .par_iter()
        .zip(df2.frames())
        .zip(phi.frames())
        .map(|((a, b), c)| Ok(elliptic_solve_a0(a, b, c, None, &settings)?.a0))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeSample::new(frames, df1.duration(), df1.window())
}

fn wrong_inputs(kind: EstimateKind) -> Error {
    Error::InvalidArgument(format!("inputs do not match estimate {}", kind.name()))
}

fn bound_sides(
    frames: &[AuxState],
    duration: f64,
    window: Window,
    p: &EstimateParams,
) -> Result<(f64, f64)> {
    let settings = EllipticSettings::default();
    let pm = frames
        .par_iter()
        .map(|aux| {
            let mut st = reconstruct(aux)?.state;
            st.a0 = elliptic_solve_a0(&st.df1, &st.df2, &st.phi, None, &settings)?.a0;
            let (plus, minus) = b_spectra(&st, B2Route::Waves(aux), Products::Dealiased)?.plus_minus();
            Ok((plus.ifft(), minus.ifft()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (plus, minus): (Vec<_>, Vec<_>) = pm.into_iter().unzip();
    let eps = p.epsilon;
    let m = move |t: f64, a: f64, b: f64| lambda_plus(t, a, b).recip() * lambda_minus(t, a, b).powf(eps - 1.0);
    let mut num: f64 = 0.0;
    for b in [plus, minus] {
        let ws = SpaceTimeSample::new(b, duration, window)?;
        let spec = ws.spectrum();
        num = num.max(wave_sobolev_norm_of(&ws, &spec, p.s + 1.0, p.theta, WaveNorm::CalH, &m));
    }
    let u = SpaceTimeSample::new(frames.iter().map(|f| f.u.clone()).collect(), duration, window)?;
    let v = SpaceTimeSample::new(frames.iter().map(|f| f.v.clone()).collect(), duration, window)?;
    let den = wave_sobolev_norm(&u, p.s + 1.0, p.theta, WaveNorm::CalH)
        + wave_sobolev_norm(&v, p.s + 1.0, p.theta, WaveNorm::CalH);
    Ok((num, den))
}

/// Evaluates both sides of `kind` on `inputs`.
///
/// Space-time norms are taken of the windowed samples, Lebesgue norms of the
/// raw frames, so the ratios are indicative of the estimates on the line and
/// carry no constant.
pub fn estimate_ratio(
    kind: EstimateKind,
    inputs: &EstimateInputs,
    params: &EstimateParams,
) -> Result<EstimateValue> {
    use EstimateInputs as I;
    use EstimateKind::*;
    check_admissible(kind, params)?;
    let p = params;
    let low = p.theta - 1.0 + p.epsilon;
    let (numerator, denominator) = match (kind, inputs) {
        (A, I::Pair(u, v)) => {
            let m = Multiplier::homogeneous(-p.sigma);
            (
                product(u, v)?.lp_lq_norm(p.p, p.q, Some(&m))?,
                h_norm(u, p.s1, p.theta) * h_norm(v, p.s2, p.theta),
            )
        }
        (C, I::Single(u)) => (u.lp_lq_norm(p.p, 2.0, None)?, h_norm(u, 0.0, p.theta)),
        (D, I::Single(u)) => (
            u.lp_lq_norm(p.p, p.q, None)?,
            h_norm(u, 1.0 - 2.0 / p.q - 1.0 / p.p, p.theta),
        ),
        (E, I::Pair(u, v)) => (
            product(u, v)?.lp_lq_norm(2.0, 2.0, None)?,
            h_norm(u, p.a, p.alpha) * h_norm(v, p.b, p.beta),
        ),
        (M1 | M1Generic, I::Potential(f)) => {
            let (d1, d2) = (derivative(f, 1)?, derivative(f, 2)?);
            let top = if kind == M1 {
                f.map(|w| null_form_q12(w, w))?
            } else {
                product(&d1, &d2)?
            };
            (
                h_norm(&top, p.s, low),
                h_norm(&d1, p.s, p.theta).powi(2) + h_norm(&d2, p.s, p.theta).powi(2),
            )
        }
        (M2, I::Pair(a0, phi)) => (
            h_norm(&product(a0, phi)?, p.s, low),
            a0_norm(a0, p)? * h_norm(phi, p.s, p.theta),
        ),
        (M3, I::Pair(df, phi)) => (
            h_norm(&bracket(df, phi)?, p.s, low),
            h_norm(df, p.s, p.theta) * h_norm(phi, p.s, p.theta),
        ),
        (M4, I::Pair(a0, df)) => (
            h_norm(&product(a0, df)?, p.s, low),
            a0_norm(a0, p)? * h_norm(df, p.s, p.theta),
        ),
        (Ell, I::Fields { df1, df2, phi }) => {
            let a0 = solve_a0(df1, df2, phi)?;
            let grad = (h_norm(df1, p.s, p.theta).powi(2) + h_norm(df2, p.s, p.theta).powi(2)).sqrt();
            (a0_norm(&a0, p)?, grad * h_norm(phi, p.s, p.theta))
        }
        (
            Bound,
            I::Waves {
                frames,
                duration,
                window,
            },
        ) => {
            if frames.len() < super::sample::MIN_FRAMES {
                return Err(Error::InvalidArgument(format!(
                    "need at least {} time samples",
                    super::sample::MIN_FRAMES
                )));
            }
            bound_sides(frames, *duration, *window, p)?
        }
        _ => return Err(wrong_inputs(kind)),
    };
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::Degenerate(format!(
            "estimate {} has denominator {denominator}",
            kind.name()
        )));
    }
    Ok(EstimateValue {
        numerator,
        denominator,
        ratio: numerator / denominator,
    })
}

/// Random input families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Free waves with Gaussian coefficients on `0 < |ξ| ≤ band`, all generators.
    Gaussian { band: f64 },
    /// Two free wave packets along generators `T₁`, `T₂`, centred at
    /// frequency `λ` in directions `π/4 ∓ spread/2` (plus a small random
    /// tilt), with spatial width `width`.
    WavePackets { lambda: f64, spread: f64, width: f64 },
}

/// What an ensemble sample looks like.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub grid: TorusGrid,
    pub rank: usize,
    pub frames: usize,
    pub duration: f64,
    pub window: Window,
    /// RMS of the gradient of each drawn field at `t = 0`.
    pub amplitude: f64,
    pub family: Family,
}

/// `ŝ(ξ, t) = a(ξ)e^{−i|ξ|t} + b(ξ)e^{i|ξ|t}` for each generator.
struct FreeWave {
    grid: TorusGrid,
    rank: usize,
    gens: Vec<LieMatrix>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
}

fn mirror(grid: &TorusGrid, p: usize) -> usize {
    let n = grid.n();
    let (i1, i2) = (p % n, p / n);
    (n - i1) % n + ((n - i2) % n) * n
}

impl FreeWave {
    fn new(grid: TorusGrid, rank: usize, gens: Vec<LieMatrix>, a: Vec<Vec<Complex64>>, b: Vec<Vec<Complex64>>) -> Self {
        Self { grid, rank, gens, a, b }
    }

    /// Real coefficient fields: `b(ξ) = conj(a(−ξ))`.
    fn real(grid: TorusGrid, rank: usize, gens: Vec<LieMatrix>, a: Vec<Vec<Complex64>>) -> Self {
        let b = a
            .iter()
            .map(|c| (0..grid.len()).map(|p| c[mirror(&grid, p)].conj()).collect())
            .collect();
        Self::new(grid, rank, gens, a, b)
    }

    fn spectrum(&self, t: f64, rate: bool) -> Spectrum {
        let g = self.grid;
        let nn = g.len();
        let mut out = Spectrum::zeros(g, self.rank);
        let data = out.data_mut();
        for ((gen, a), b) in self.gens.iter().zip(&self.a).zip(&self.b) {
            for p in 0..nn {
                let (x1, x2) = g.xi(p);
                let w = x1.hypot(x2);
                let e = Complex64::from_polar(1.0, -w * t);
                let val = if rate {
                    Complex64::new(0.0, w) * (b[p] * e.conj() - a[p] * e)
                } else {
                    a[p] * e + b[p] * e.conj()
                };
                if val == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (k, z) in gen.entries().iter().enumerate() {
                    data[k * nn + p] += z * val;
                }
            }
        }
        out
    }

    fn value(&self, t: f64) -> LieField {
        self.spectrum(t, false).ifft()
    }

    fn rate(&self, t: f64) -> LieField {
        self.spectrum(t, true).ifft()
    }

    /// Rescales so the RMS gradient at `t = 0` is `amplitude`.
    fn normalize(&mut self, amplitude: f64) -> Result<()> {
        let w = self.value(0.0);
        let grad = (partial_derivative(&w, 1).l2_norm_sq() + partial_derivative(&w, 2).l2_norm_sq()).sqrt()
            / self.grid.side();
        if !(grad > 0.0) {
            return Err(Error::Degenerate("drawn field has no gradient".into()));
        }
        let c = amplitude / grad;
        for v in self.a.iter_mut().chain(self.b.iter_mut()) {
            for z in v.iter_mut() {
                *z *= c;
            }
        }
        Ok(())
    }

    fn sample(&self, spec: &EnsembleSpec) -> Result<SpaceTimeSample> {
        SpaceTimeSample::from_fn(spec.frames, spec.duration, spec.window, |t| self.value(t))
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_coeffs(grid: &TorusGrid, band: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..grid.len())
        .map(|p| {
            let (x1, x2) = grid.xi(p);
            let r = x1.hypot(x2);
            if p != 0 && r <= band {
                gaussian(rng)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

fn packet_coeffs(
    grid: &TorusGrid,
    lambda: f64,
    angle: f64,
    width: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let (c1, c2) = (lambda * angle.cos(), lambda * angle.sin());
    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
    let (y1, y2): (f64, f64) = (rng.gen_range(0.0..grid.side()), rng.gen_range(0.0..grid.side()));
    (0..grid.len())
        .map(|p| {
            let (x1, x2) = grid.xi(p);
            let d2 = (x1 - c1).powi(2) + (x2 - c2).powi(2);
            let env = (-0.5 * d2 * width * width).exp();
            if p == 0 || env < 1e-16 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(env, phase - x1 * y1 - x2 * y2)
            }
        })
        .collect()
}

fn draw_real(spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> Result<FreeWave> {
    let g = spec.grid;
    let basis = su_basis(spec.rank);
    let (gens, coeffs): (Vec<LieMatrix>, Vec<Vec<Complex64>>) = match spec.family {
        Family::Gaussian { band } => {
            let coeffs = basis.iter().map(|_| gaussian_coeffs(&g, band, rng)).collect();
            (basis, coeffs)
        }
        Family::WavePackets {
            lambda,
            spread,
            width,
        } => {
            let tilt = 0.25 * spread * rng.sample::<f64, _>(StandardNormal);
            let gens = vec![basis[0].clone(), basis[1].clone()];
            let coeffs = [-0.5, 0.5]
                .iter()
                .map(|side| packet_coeffs(&g, lambda, 0.25 * PI + side * spread + tilt, width, rng))
                .collect();
            (gens, coeffs)
        }
    };
    let mut w = FreeWave::real(g, spec.rank, gens, coeffs);
    w.normalize(spec.amplitude)?;
    Ok(w)
}

/// Complex-valued free wave for the `u` variable: independent `a`, `b`.
fn draw_complex(spec: &EnsembleSpec, rng: &mut ChaCha8Rng) -> Result<FreeWave> {
    let g = spec.grid;
    let real = draw_real(spec, rng)?;
    let imag = draw_real(spec, rng)?;
    let i = Complex64::new(0.0, 1.0);
    let combine = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.iter().zip(q).map(|(s, t)| s + i * t).collect())
            .collect()
    };
    let a = combine(&real.a, &imag.a);
    let b = combine(&real.b, &imag.b);
    let mut w = FreeWave::new(g, spec.rank, real.gens, a, b);
    w.normalize(spec.amplitude)?;
    Ok(w)
}

/// Draws one input of the shape `kind` expects.
pub fn sample_inputs(
    kind: EstimateKind,
    spec: &EnsembleSpec,
    params: &EstimateParams,
    rng: &mut ChaCha8Rng,
) -> Result<EstimateInputs> {
    use EstimateKind::*;
    if spec.rank < 2 {
        return Err(Error::InvalidArgument("ensembles need rank at least 2".into()));
    }
    Ok(match kind {
        A | E => EstimateInputs::Pair(draw_real(spec, rng)?.sample(spec)?, draw_real(spec, rng)?.sample(spec)?),
        C | D => EstimateInputs::Single(draw_real(spec, rng)?.sample(spec)?),
        M1 | M1Generic => EstimateInputs::Potential(draw_real(spec, rng)?.sample(spec)?),
        M2 | M3 | M4 | Ell => {
            let f = draw_real(spec, rng)?.sample(spec)?;
            let phi = draw_real(spec, rng)?.sample(spec)?;
            let (df1, df2) = (derivative(&f, 1)?, derivative(&f, 2)?);
            match kind {
                Ell => EstimateInputs::Fields { df1, df2, phi },
                M3 => EstimateInputs::Pair(if params.axis == 2 { df2 } else { df1 }, phi),
                _ => {
                    let a0 = solve_a0(&df1, &df2, &phi)?;
                    if kind == M2 {
                        EstimateInputs::Pair(a0, phi)
                    } else {
                        EstimateInputs::Pair(a0, if params.axis == 2 { df2 } else { df1 })
                    }
                }
            }
        }
        Bound => {
            let u = draw_complex(spec, rng)?;
            let dt = spec.duration / spec.frames as f64;
            let frames = (0..spec.frames)
                .into_par_iter()
                .map(|m| {
                    let t = m as f64 * dt;
                    let (uu, ut) = (u.value(t), u.rate(t));
                    AuxState {
                        v: uu.dagger().neg(),
                        vt: ut.dagger().neg(),
                        u: uu,
                        ut,
                        t,
                    }
                })
                .collect();
            EstimateInputs::Waves {
                frames,
                duration: spec.duration,
                window: spec.window,
            }
        }
    })
}

/// Ratio statistics over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub kind: EstimateKind,
    pub samples: usize,
    pub seed: u64,
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub values: Vec<EstimateValue>,
}

/// Evaluates `kind` on `samples` draws. Draw `i` uses ChaCha8 seeded with
/// `seed` on stream `i`, so the result does not depend on the thread count
/// and two kinds sampled with one seed see the same fields where their
/// input shapes agree.
pub fn estimate_ensemble(
    kind: EstimateKind,
    spec: &EnsembleSpec,
    params: &EstimateParams,
    samples: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    if samples == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one sample".into()));
    }
    check_admissible(kind, params)?;
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let inputs = sample_inputs(kind, spec, params, &mut rng)?;
            estimate_ratio(kind, &inputs, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios = values.iter().map(|v| v.ratio);
    let max = ratios.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.clone().fold(f64::INFINITY, f64::min);
    let mean = ratios.sum::<f64>() / samples as f64;
    Ok(EnsembleStats {
        kind,
        samples,
        seed,
        max,
        mean,
        min,
        values,
    })
}
