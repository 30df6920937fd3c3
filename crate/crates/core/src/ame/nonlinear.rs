use num_complex::Complex64;
use serde::Serialize;

use super::state::{AuxSpectra, AuxState, PhysState};
use crate::error::{Error, Result};
use crate::spectral::{LieField, Multiplier, Spectrum, TorusGrid};

/// How B₂ is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum B2Route<'a> {
    /// From the reconstructed `(φ, ∂f)`.
    Fields,
    /// From the wave variables, through the grouping
    /// `4[∂_jf, φ] = [R̃_jY, Y] − [R̃_jZ, Z] + (R̃_jY·Z + Y·R̃_jZ) − (R̃_jZ·Y + Z·R̃_jY)`
    /// with `Y = (∂ₜ+iD)u`, `Z = (∂ₜ−iD)v`.
    Waves(&'a AuxState),
}

/// Whether quadratic products are evaluated with two-thirds truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Products {
    Dealiased,
    Plain,
}

pub(crate) fn spectrum_of(w: &LieField, products: Products) -> Spectrum {
    let mut s = w.fft();
    if products == Products::Dealiased {
        s.truncate();
    }
    s
}

fn prepare(w: &LieField, products: Products) -> LieField {
    match products {
        Products::Dealiased => spectrum_of(w, products).ifft(),
        Products::Plain => w.clone(),
    }
}

fn dir_table(grid: &TorusGrid, j: usize) -> Vec<Complex64> {
    Multiplier::riesz_unit(j).table(grid).expect("finite symbol")
}

/// `[∂_jf, φ]` from the wave variables via the grouping in [`B2Route::Waves`].
fn bracket_df_phi_from_waves(
    aux: &AuxSpectra,
    j: usize,
    products: Products,
) -> Result<LieField> {
    let (mut y, mut z) = aux.half_waves();
    if products == Products::Dealiased {
        y.truncate();
        z.truncate();
    }
    let t = dir_table(aux.grid(), j);
    let ry = y.scaled_by(&t).ifft();
    let rz = z.scaled_by(&t).ifft();
    let (y, z) = (y.ifft(), z.ifft());
    let same = ry.bracket(&y)?.sub(&rz.bracket(&z)?)?;
    let plus = ry.matmul(&z)?.add(&y.matmul(&rz)?)?;
    let minus = rz.matmul(&y)?.add(&z.matmul(&ry)?)?;
    Ok(same.add(&plus)?.sub(&minus)?.scale_real(0.25))
}

/// The four nonlinearities as truncated (or plain) spectra.
#[derive(Debug, Clone)]
pub(crate) struct BSpectra {
    pub b: [Spectrum; 4],
}

impl BSpectra {
    pub fn plus_minus(&self) -> (Spectrum, Spectrum) {
        let [b1, b2, b3, b4] = &self.b;
        let mut plus = b3.clone();
        plus.axpy(Complex64::new(-1.0, 0.0), b1);
        let mut minus = plus.clone();
        plus.axpy(Complex64::new(1.0, 0.0), b2);
        plus.axpy(Complex64::new(1.0, 0.0), b4);
        minus.axpy(Complex64::new(-1.0, 0.0), b2);
        minus.axpy(Complex64::new(-1.0, 0.0), b4);
        (plus, minus)
    }
}

pub(crate) fn b_spectra(
    state: &PhysState,
    route: B2Route<'_>,
    products: Products,
) -> Result<BSpectra> {
    match route {
        B2Route::Fields => b_spectra_with(state, None, products),
        B2Route::Waves(aux) => b_spectra_with(state, Some(&aux.spectra()), products),
    }
}

/// As [`b_spectra`]; B₂ comes from `waves` when given.
pub(crate) fn b_spectra_with(
    state: &PhysState,
    waves: Option<&AuxSpectra>,
    products: Products,
) -> Result<BSpectra> {
    let g = *state.grid();
    let phi = prepare(&state.phi, products);
    let d1 = prepare(&state.df1, products);
    let d2 = prepare(&state.df2, products);
    let a0 = prepare(&state.a0, products);
    let t1 = dir_table(&g, 1);
    let t2 = dir_table(&g, 2);
    let finish = |w: LieField| spectrum_of(&w, products);

    let b1 = finish(d1.bracket(&d2)?);
    let (c2, c1) = match waves {
        None => (d2.bracket(&phi)?, d1.bracket(&phi)?),
        Some(s) => (
            bracket_df_phi_from_waves(s, 2, products)?,
            bracket_df_phi_from_waves(s, 1, products)?,
        ),
    };
    let mut b2 = finish(c2).scaled_by(&t1);
    b2.axpy(Complex64::new(-1.0, 0.0), &finish(c1).scaled_by(&t2));
    let b3 = finish(a0.bracket(&phi)?);
    let mut b4 = finish(a0.bracket(&d1)?).scaled_by(&t1);
    b4.axpy(Complex64::new(1.0, 0.0), &finish(a0.bracket(&d2)?).scaled_by(&t2));
    Ok(BSpectra { b: [b1, b2, b3, b4] })
}

/// B₁ = [∂₁f, ∂₂f], B₂ = R̃₁[∂₂f, φ] − R̃₂[∂₁f, φ], B₃ = [A₀, φ],
/// B₄ = R̃_j[A₀, ∂_jf], with R̃_j the direction transform ξ_j/|ξ|.
pub fn nonlinearity_b(
    kind: usize,
    state: &PhysState,
    route: B2Route<'_>,
    products: Products,
) -> Result<LieField> {
    if !(1..=4).contains(&kind) {
        return Err(Error::InvalidArgument(format!(
            "nonlinearity index must be 1..=4, got {kind}"
        )));
    }
    let all = b_spectra(state, route, products)?;
    Ok(all.b[kind - 1].ifft())
}

/// `B± = −B₁ ± B₂ + B₃ ± B₄`.
pub fn assemble_bpm(
    b1: &LieField,
    b2: &LieField,
    b3: &LieField,
    b4: &LieField,
) -> Result<(LieField, LieField)> {
    let common = b3.sub(b1)?;
    let odd = b2.add(b4)?;
    Ok((common.add(&odd)?, common.sub(&odd)?))
}

/// Settings for [`elliptic_solve_a0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticSettings {
    /// Bound on `(L/2π)·√2·sup|∇f|`, which bounds the contraction ratio.
    pub threshold: f64,
    /// Target for `‖ΔA₀ − C‖ / ‖C‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub products: Products,
}

impl Default for EllipticSettings {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            tol: 1e-10,
            max_iter: 200,
            products: Products::Dealiased,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub a0: LieField,
    pub iterations: usize,
    /// Largest observed ratio of successive update norms.
    pub contraction: f64,
    /// Final `‖ΔA₀ − C(A₀)‖ / ‖C(A₀)‖`.
    pub residual: f64,
    /// Smallness measure `(L/2π)·√2·sup|∇f|`.
    pub measure: f64,
}

/// `(L/2π)·√2·sup_x |∇f|_F`.
///
/// `Δ⁻¹∂` has norm at most `L/2π` on mean-zero fields and
/// `|[X, Y]|_F ≤ √2 |X|_F |Y|_F`, so this bounds the contraction ratio of the
/// fixed-point map in L².
pub fn elliptic_smallness(df1: &LieField, df2: &LieField) -> f64 {
    let g = df1.grid();
    let nn = g.len();
    let planes = df1.rank() * df1.rank();
    let sup = (0..nn)
        .map(|p| {
            (0..planes)
                .map(|e| df1.data()[e * nn + p].norm_sqr() + df2.data()[e * nn + p].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        .sqrt();
    g.side() / (2.0 * std::f64::consts::PI) * 2f64.sqrt() * sup
}

struct EllipticOperator {
    grid: TorusGrid,
    products: Products,
    d1: LieField,
    d2: LieField,
    source: Spectrum,
    ixi1: Vec<Complex64>,
    ixi2: Vec<Complex64>,
}

impl EllipticOperator {
    fn new(df1: &LieField, df2: &LieField, phi: &LieField, products: Products) -> Result<Self> {
        let grid = *df1.grid();
        let ixi1 = Multiplier::derivative(1).table(&grid)?;
        let ixi2 = Multiplier::derivative(2).table(&grid)?;
        let d1 = prepare(df1, products);
        let d2 = prepare(df2, products);
        let phi = prepare(phi, products);
        let mut source = spectrum_of(&d1.bracket(&phi)?, products).scaled_by(&ixi1);
        source.axpy(
            Complex64::new(1.0, 0.0),
            &spectrum_of(&d2.bracket(&phi)?, products).scaled_by(&ixi2),
        );
        Ok(Self {
            grid,
            products,
            d1,
            d2,
            source,
            ixi1,
            ixi2,
        })
    }

    /// Ĉ(A₀) = −iξ₁[A₀, ∂₂f]^ + iξ₂[A₀, ∂₁f]^ + source.
    fn apply(&self, a0: &LieField) -> Result<Spectrum> {
        let mut c = self.source.clone();
        let g1 = spectrum_of(&a0.bracket(&self.d2)?, self.products).scaled_by(&self.ixi1);
        let g2 = spectrum_of(&a0.bracket(&self.d1)?, self.products).scaled_by(&self.ixi2);
        c.axpy(Complex64::new(-1.0, 0.0), &g1);
        c.axpy(Complex64::new(1.0, 0.0), &g2);
        Ok(c)
    }

    fn invert(&self, c: &Spectrum) -> LieField {
        let nn = self.grid.len();
        let table: Vec<Complex64> = (0..nn)
            .map(|p| {
                if p == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let (x1, x2) = self.grid.xi(p);
                    Complex64::new(-1.0 / (x1 * x1 + x2 * x2), 0.0)
                }
            })
            .collect();
        c.scaled_by(&table).ifft()
    }
}

fn spectrum_diff_norm(a: &Spectrum, b: &Spectrum) -> f64 {
    let g = a.grid();
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    (s * g.cell_area() / g.len() as f64).sqrt()
}

/// Solves `ΔA₀ = −∂₁[A₀,∂₂f] + ∂₂[A₀,∂₁f] + ∂₁[∂₁f,φ] + ∂₂[∂₂f,φ]` by the
/// fixed-point iteration `A₀ ← Δ⁻¹C(A₀)`.
pub fn elliptic_solve_a0(
    df1: &LieField,
    df2: &LieField,
    phi: &LieField,
    guess: Option<&LieField>,
    settings: &EllipticSettings,
) -> Result<EllipticSolution> {
    df1.check_compatible(df2)?;
    df1.check_compatible(phi)?;
    let measure = elliptic_smallness(df1, df2);
    if measure > settings.threshold {
        return Err(Error::SmallnessViolated {
            context: "elliptic solve",
            measure,
            threshold: settings.threshold,
        });
    }
    let op = EllipticOperator::new(df1, df2, phi, settings.products)?;
    let mut a = match guess {
        Some(g) => {
            g.check_compatible(df1)?;
            g.clone()
        }
        None => LieField::zeros(*df1.grid(), df1.rank()),
    };
    let mut c = op.apply(&a)?;
    let mut last_step: Option<f64> = None;
    let mut contraction: f64 = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=settings.max_iter {
        let next = op.invert(&c);
        let step = next.sub(&a)?.l2_norm();
        if let Some(prev) = last_step {
            if prev > 1e-12 * next.l2_norm() {
                contraction = contraction.max(step / prev);
            }
        }
        if contraction >= 1.0 {
            return Err(Error::NoContraction {
                context: "elliptic solve",
                ratio: contraction,
            });
        }
        last_step = Some(step);
        let c_next = op.apply(&next)?;
        let c_norm = c_next.l2_norm_sq().sqrt();
        residual = if c_norm == 0.0 {
            0.0
        } else {
            spectrum_diff_norm(&c, &c_next) / c_norm
        };
        a = next;
        c = c_next;
        if residual <= settings.tol {
            return Ok(EllipticSolution {
                a0: a.with_label("a0"),
                iterations: it,
                contraction,
                residual,
                measure,
            });
        }
    }
    Err(Error::NotConverged {
        context: "elliptic solve",
        iterations: settings.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ame::state::{reconstruct, AuxState};
    use crate::liealg::{bracket, random_su, su_basis, LieMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(32, 2.0 * PI).unwrap()
    }

    fn rel(a: &LieField, b: &LieField) -> f64 {
        a.sub(b).unwrap().l2_norm() / b.l2_norm().max(1e-300)
    }

    fn smooth(g: TorusGrid, rng: &mut ChaCha8Rng, amp: f64) -> LieField {
        let m: Vec<LieMatrix> = (0..3).map(|_| random_su(2, amp, rng)).collect();
        LieField::from_fn(g, 2, move |x, y| {
            &(&m[0].scale_real((x + y).sin()) + &m[1].scale_real((2.0 * x - y).cos()))
                + &m[2].scale_real((3.0 * y).sin())
        })
    }

    fn random_state(amp: f64, seed: u64) -> PhysState {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PhysState {
            phi: smooth(g, &mut rng, amp),
            f: LieField::zeros(g, 2),
            df1: smooth(g, &mut rng, amp),
            df2: smooth(g, &mut rng, amp),
            a0: smooth(g, &mut rng, amp),
            t: 0.0,
        }
    }

    #[test]
    fn commuting_fields_give_zero_sources() {
        let g = grid();
        let t = &su_basis(2)[1];
        let sc = |k: f64| LieField::from_scalar(g, t, move |x, y| Complex64::new((k * x + y).sin(), 0.0));
        let s = PhysState {
            phi: sc(1.0),
            f: sc(2.0),
            df1: sc(3.0),
            df2: sc(-1.0),
            a0: sc(2.0),
            t: 0.0,
        };
        for k in 1..=4 {
            let b = nonlinearity_b(k, &s, B2Route::Fields, Products::Dealiased).unwrap();
            assert!(b.sup_norm() < 1e-14, "B{k}");
        }
    }

    #[test]
    fn b1_of_crossed_sines() {
        let g = grid();
        let b = su_basis(2);
        let (t1, t2) = (b[0].clone(), b[1].clone());
        let mut s = PhysState::zeros(g, 2);
        // f = sin x T₁ + sin y T₂
        s.df1 = LieField::from_scalar(g, &t1, |x, _| Complex64::new(x.cos(), 0.0));
        s.df2 = LieField::from_scalar(g, &t2, |_, y| Complex64::new(y.cos(), 0.0));
        let c = bracket(&t1, &t2).unwrap();
        let want = LieField::from_scalar(g, &c, |x, y| Complex64::new(x.cos() * y.cos(), 0.0));
        let got = nonlinearity_b(1, &s, B2Route::Fields, Products::Dealiased).unwrap();
        assert!(rel(&got, &want) < 1e-13);
    }

    #[test]
    fn b2_routes_agree() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = smooth(g, &mut rng, 0.3).add(&smooth(g, &mut rng, 0.2).scale(Complex64::new(0.0, 1.0))).unwrap();
        let ut = smooth(g, &mut rng, 0.3).add(&smooth(g, &mut rng, 0.2).scale(Complex64::new(0.0, 1.0))).unwrap();
        let aux = AuxState {
            v: u.dagger().neg(),
            vt: ut.dagger().neg(),
            u,
            ut,
            t: 0.0,
        };
        let rec = reconstruct(&aux).unwrap();
        assert!(rec.discarded < 1e-13);
        for p in [Products::Dealiased, Products::Plain] {
            let a = nonlinearity_b(2, &rec.state, B2Route::Fields, p).unwrap();
            let b = nonlinearity_b(2, &rec.state, B2Route::Waves(&aux), p).unwrap();
            assert!(a.sub(&b).unwrap().sup_norm() < 1e-12 * a.sup_norm(), "{p:?}");
        }
    }

    #[test]
    fn source_symmetry() {
        // B₁, B₃ are anti-Hermitian; the direction transform makes B₂, B₄ Hermitian
        let s = random_state(0.5, 5);
        for k in 1..=4 {
            let b = nonlinearity_b(k, &s, B2Route::Fields, Products::Dealiased).unwrap();
            let wrong = if k % 2 == 1 {
                b.hermitian_part()
            } else {
                b.anti_hermitian_part()
            };
            assert!(wrong.sup_norm() < 1e-13 * b.sup_norm(), "B{k}");
        }
    }

    #[test]
    fn sign_structure_of_plus_minus() {
        let s = random_state(0.5, 8);
        let b: Vec<LieField> = (1..=4)
            .map(|k| nonlinearity_b(k, &s, B2Route::Fields, Products::Dealiased).unwrap())
            .collect();
        let (p, m) = assemble_bpm(&b[0], &b[1], &b[2], &b[3]).unwrap();
        let sum = p.add(&m).unwrap();
        let want = b[2].sub(&b[0]).unwrap().scale_real(2.0);
        assert!(sum.sub(&want).unwrap().sup_norm() < 1e-14);
        let z = LieField::zeros(*s.grid(), 2);
        let (p, m) = assemble_bpm(&b[0], &z, &b[2], &z).unwrap();
        assert_eq!(p, m);
        // the spectral assembly agrees with the field one
        let all = b_spectra(&s, B2Route::Fields, Products::Dealiased).unwrap();
        let (sp, sm) = all.plus_minus();
        let (fp, fm) = assemble_bpm(&b[0], &b[1], &b[2], &b[3]).unwrap();
        assert!(rel(&sp.ifft(), &fp) < 1e-14);
        assert!(rel(&sm.ifft(), &fm) < 1e-14);
    }

    #[test]
    fn kind_out_of_range() {
        let s = PhysState::zeros(grid(), 2);
        assert!(matches!(
            nonlinearity_b(5, &s, B2Route::Fields, Products::Plain),
            Err(Error::InvalidArgument(_))
        ));
        assert!(nonlinearity_b(0, &s, B2Route::Fields, Products::Plain).is_err());
    }

    #[test]
    fn elliptic_trivial_cases() {
        let g = grid();
        let t = &su_basis(2)[2];
        let z = LieField::zeros(g, 2);
        let phi = LieField::from_scalar(g, t, |x, _| Complex64::new(x.sin(), 0.0));
        let sol = elliptic_solve_a0(&z, &z, &phi, None, &EllipticSettings::default()).unwrap();
        assert_eq!(sol.a0.sup_norm(), 0.0);
        let d = LieField::from_scalar(g, t, |_, y| Complex64::new(0.1 * y.cos(), 0.0));
        let sol = elliptic_solve_a0(&d, &d, &phi, None, &EllipticSettings::default()).unwrap();
        assert!(sol.a0.sup_norm() < 1e-14);
    }

    #[test]
    fn elliptic_small_random_data() {
        let s = random_state(0.05, 21);
        let set = EllipticSettings::default();
        let sol = elliptic_solve_a0(&s.df1, &s.df2, &s.phi, None, &set).unwrap();
        assert!(sol.residual <= 1e-10);
        assert!(sol.contraction < sol.measure.max(1e-3));
        // the fixed point satisfies the equation
        let op = EllipticOperator::new(&s.df1, &s.df2, &s.phi, set.products).unwrap();
        let back = op.invert(&op.apply(&sol.a0).unwrap());
        assert!(rel(&back, &sol.a0) < 1e-9);
    }

    #[test]
    fn elliptic_large_data_fails() {
        let s = random_state(3.0, 2);
        let r = elliptic_solve_a0(&s.df1, &s.df2, &s.phi, None, &EllipticSettings::default());
        assert!(matches!(r, Err(Error::SmallnessViolated { .. })));
        let loose = EllipticSettings {
            threshold: f64::INFINITY,
            ..EllipticSettings::default()
        };
        let r = elliptic_solve_a0(&s.df1, &s.df2, &s.phi, None, &loose);
        assert!(matches!(r, Err(Error::NoContraction { .. })), "{r:?}");
    }
}
