use serde::Serialize;

use super::state::PhysState;
use crate::error::Result;
use crate::gaugeforms::{monopole_residual, TimeDerivatives};
use crate::liealg::frobenius_norm;
use crate::spectral::{inverse_laplacian, laplacian, partial_derivative, LieField};

/// Time derivatives of the physical fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysRates {
    pub phi_t: LieField,
    pub f_t: LieField,
    pub df1_t: LieField,
    pub df2_t: LieField,
}

impl PhysRates {
    pub fn zeros_like(state: &PhysState) -> Self {
        let z = LieField::zeros(*state.grid(), state.rank());
        Self {
            phi_t: z.clone(),
            f_t: z.clone(),
            df1_t: z.clone(),
            df2_t: z,
        }
    }
}

/// Five-point weights (times 12h) for the derivative at position `idx` of a
/// window of five equally spaced samples.
const FD_WEIGHTS: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

fn fd(fields: [&LieField; 5], idx: usize, h: f64) -> LieField {
    let w = FD_WEIGHTS[idx];
    let mut out = fields[0].scale_real(w[0] / (12.0 * h));
    for k in 1..5 {
        if w[k] != 0.0 {
            out.axpy(num_complex::Complex64::new(w[k] / (12.0 * h), 0.0), fields[k])
                .expect("window fields share a grid");
        }
    }
    out
}

/// Fourth-order time derivatives at sample `idx` of five equally spaced states.
pub fn window_rates(window: [&PhysState; 5], idx: usize, h: f64) -> PhysRates {
    assert!(idx < 5, "window position must be below 5");
    PhysRates {
        phi_t: fd(window.map(|s| &s.phi), idx, h),
        f_t: fd(window.map(|s| &s.f), idx, h),
        df1_t: fd(window.map(|s| &s.df1), idx, h),
        df2_t: fd(window.map(|s| &s.df2), idx, h),
    }
}

/// Residual norms of the monopole system on a physical state.
///
/// Field residuals are L² norms of the mean-free part; the zero modes of the
/// monopole components are reported separately as `|mean|·L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub t: f64,
    /// `D₀φ − F₁₂`, `D₁φ − F₀₂`, `D₂φ − F₁₀`.
    pub monopole: [f64; 3],
    pub monopole_zero_mode: [f64; 3],
    /// `Δf + [∂₁f,∂₂f] − ∂ₜφ − [A₀,φ]`.
    pub e2: f64,
    /// `∂₁A₀ − ∂₂φ + ∂ₜ∂₂f − [∂₁f,φ] + [A₀,∂₂f]`.
    pub coord1: f64,
    /// `∂₂A₀ + ∂₁φ − ∂ₜ∂₁f − [∂₂f,φ] − [A₀,∂₁f]`.
    pub coord2: f64,
    /// `φ − ∂ₜf − Δ⁻¹(∂_i[A₀,∂_if] − ∂₂[∂₁f,φ] + ∂₁[∂₂f,φ])`.
    pub difference: f64,
    /// `‖ΔA₀ − C(A₀)‖ / max(‖C(A₀)‖, scale²)`.
    pub elliptic: f64,
    /// `‖∂₁A₁ + ∂₂A₂‖ / (‖A₁‖ + ‖A₂‖)`.
    pub coulomb: f64,
    /// `‖∂ₜφ‖ + ‖∇φ‖ + ‖∂ₜ∇f‖ + ‖Δf‖`, the reference for the first-order residuals.
    pub scale: f64,
    /// `‖φ‖ + ‖∇f‖`, the reference for `difference`.
    pub field_scale: f64,
}

impl ConsistencyReport {
    /// Largest of the monopole, e2, coordinate and difference residuals.
    pub fn max_residual(&self) -> f64 {
        self.monopole
            .iter()
            .chain([self.e2, self.coord1, self.coord2, self.difference].iter())
            .fold(0.0, |a, &b| a.max(b))
    }

    /// Largest residual relative to the reference of matching order.
    ///
    /// Both references scale like the residuals they divide under
    /// `w ↦ λw(λt, λx)`, so this value is invariant under rescaling.
    pub fn max_relative(&self) -> f64 {
        let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
        let first = self
            .monopole
            .iter()
            .chain([self.e2, self.coord1, self.coord2].iter())
            .fold(0.0_f64, |a, &b| a.max(b));
        rel(first, self.scale).max(rel(self.difference, self.field_scale))
    }

    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("monopole_0", self.monopole[0]),
            ("monopole_1", self.monopole[1]),
            ("monopole_2", self.monopole[2]),
            ("monopole_zero_0", self.monopole_zero_mode[0]),
            ("monopole_zero_1", self.monopole_zero_mode[1]),
            ("monopole_zero_2", self.monopole_zero_mode[2]),
            ("e2", self.e2),
            ("coord1", self.coord1),
            ("coord2", self.coord2),
            ("difference", self.difference),
            ("elliptic", self.elliptic),
            ("coulomb", self.coulomb),
            ("scale", self.scale),
            ("field_scale", self.field_scale),
        ]
    }
}

fn mean_free_norm(w: &LieField) -> f64 {
    w.mean_free().l2_norm()
}

/// Evaluates every residual of the monopole system on `state` with `rates`.
pub fn consistency_report(state: &PhysState, rates: &PhysRates) -> Result<ConsistencyReport> {
    let PhysState {
        phi, f, df1, df2, a0, ..
    } = state;
    let grid = *state.grid();
    let conn = state.connection();
    let td = TimeDerivatives {
        a1: rates.df2_t.neg(),
        a2: rates.df1_t.clone(),
        phi: Some(rates.phi_t.clone()),
    };
    let mono = monopole_residual(&conn, phi, &td)?;
    let mut monopole = [0.0; 3];
    let mut monopole_zero_mode = [0.0; 3];
    for (k, r) in mono.iter().enumerate() {
        monopole[k] = mean_free_norm(r);
        monopole_zero_mode[k] = frobenius_norm(&r.mean()) * grid.side();
    }

    let e2 = laplacian(f)
        .add(&df1.bracket(df2)?)?
        .sub(&rates.phi_t)?
        .sub(&a0.bracket(phi)?)?;

    let d = partial_derivative;
    let coord1 = d(a0, 1)
        .sub(&d(phi, 2))?
        .add(&rates.df2_t)?
        .sub(&df1.bracket(phi)?)?
        .add(&a0.bracket(df2)?)?;
    let coord2 = d(a0, 2)
        .add(&d(phi, 1))?
        .sub(&rates.df1_t)?
        .sub(&df2.bracket(phi)?)?
        .sub(&a0.bracket(df1)?)?;

    let rhs = d(&a0.bracket(df1)?, 1)
        .add(&d(&a0.bracket(df2)?, 2))?
        .sub(&d(&df1.bracket(phi)?, 2))?
        .add(&d(&df2.bracket(phi)?, 1))?;
    let difference = phi
        .sub(&rates.f_t)?
        .sub(&inverse_laplacian(&rhs.mean_free())?)?;

    let c = d(&a0.bracket(df2)?, 1)
        .neg()
        .add(&d(&a0.bracket(df1)?, 2))?
        .add(&d(&df1.bracket(phi)?, 1))?
        .add(&d(&df2.bracket(phi)?, 2))?;
    let elliptic_abs = laplacian(a0).sub(&c)?.l2_norm();

    let grad_norm = |a: &LieField, b: &LieField| (a.l2_norm_sq() + b.l2_norm_sq()).sqrt();
    let scale = rates.phi_t.l2_norm()
        + grad_norm(&d(phi, 1), &d(phi, 2))
        + grad_norm(&rates.df1_t, &rates.df2_t)
        + laplacian(f).l2_norm();
    let field_scale = phi.l2_norm() + grad_norm(df1, df2);
    let elliptic_ref = c.l2_norm().max(scale * scale);
    Ok(ConsistencyReport {
        t: state.t,
        monopole,
        monopole_zero_mode,
        e2: mean_free_norm(&e2),
        coord1: mean_free_norm(&coord1),
        coord2: mean_free_norm(&coord2),
        difference: mean_free_norm(&difference),
        elliptic: if elliptic_ref > 0.0 {
            elliptic_abs / elliptic_ref
        } else {
            elliptic_abs
        },
        coulomb: conn.coulomb_ratio(),
        scale,
        field_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{random_su, su_basis};
    use crate::spectral::TorusGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_has_zero_residuals() {
        let g = TorusGrid::new(16, 2.0 * PI).unwrap();
        let s = PhysState::zeros(g, 2);
        let r = consistency_report(&s, &PhysRates::zeros_like(&s)).unwrap();
        assert_eq!(r.max_residual(), 0.0);
        assert_eq!(r.elliptic, 0.0);
    }

    #[test]
    fn window_weights_are_exact_on_quartics() {
        let g = TorusGrid::new(8, 2.0 * PI).unwrap();
        let t = &su_basis(2)[0];
        let h = 0.1;
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3) - x.powi(4);
        let dp = |x: f64| -2.0 + x + 9.0 * x * x - 4.0 * x.powi(3);
        let states: Vec<PhysState> = (0..5)
            .map(|k| {
                let mut s = PhysState::zeros(g, 2);
                s.phi = LieField::constant(g, &t.scale_real(p(k as f64 * h)));
                s
            })
            .collect();
        let w = [&states[0], &states[1], &states[2], &states[3], &states[4]];
        for idx in 0..5 {
            let r = window_rates(w, idx, h);
            let want = dp(idx as f64 * h);
            let got = r.phi_t.mean();
            assert!((got.get(0, 1) - t.get(0, 1) * want).norm() < 1e-10, "idx {idx}");
        }
    }

    #[test]
    fn constant_gauge_rotation_keeps_norms() {
        let g = TorusGrid::new(16, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = su_basis(2);
        let field = |rng: &mut ChaCha8Rng| {
            let a = random_su(2, 1.0, rng);
            let b = random_su(2, 1.0, rng);
            let t1 = basis[0].clone();
            LieField::from_fn(g, 2, move |x, y| {
                &(&a.scale_real((x + 2.0 * y).sin()) + &b.scale_real(y.cos())) + &t1.scale_real(0.1 * x.cos())
            })
        };
        let s = PhysState {
            phi: field(&mut rng),
            f: field(&mut rng),
            df1: field(&mut rng),
            df2: field(&mut rng),
            a0: field(&mut rng),
            t: 0.0,
        };
        let r = PhysRates {
            phi_t: field(&mut rng),
            f_t: field(&mut rng),
            df1_t: field(&mut rng),
            df2_t: field(&mut rng),
        };
        let gen = random_su(2, 0.8, &mut rng);
        let gm = crate::liealg::lie_exp(&gen);
        let rot = |w: &LieField| w.left_mul(&gm).unwrap().matmul(&LieField::constant(g, &gm.dagger())).unwrap();
        let s2 = PhysState {
            phi: rot(&s.phi),
            f: rot(&s.f),
            df1: rot(&s.df1),
            df2: rot(&s.df2),
            a0: rot(&s.a0),
            t: 0.0,
        };
        let r2 = PhysRates {
            phi_t: rot(&r.phi_t),
            f_t: rot(&r.f_t),
            df1_t: rot(&r.df1_t),
            df2_t: rot(&r.df2_t),
        };
        let a = consistency_report(&s, &r).unwrap();
        let b = consistency_report(&s2, &r2).unwrap();
        for ((na, va), (_, vb)) in a.named().into_iter().zip(b.named()) {
            assert!((va - vb).abs() <= 1e-10 * va.abs().max(1.0), "{na}: {va} vs {vb}");
        }
    }
}
