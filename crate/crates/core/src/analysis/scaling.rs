use serde::Serialize;

use crate::ame::{consistency_report, AuxState, ConsistencyReport, PhysRates, PhysState};
use crate::error::{Error, Result};
use crate::spectral::{LieField, TorusGrid};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {lambda}"
        )))
    }
}

/// Grid of side `L/λ` with the same point count.
pub fn rescaled_grid(grid: &TorusGrid, lambda: f64) -> Result<TorusGrid> {
    check_lambda(lambda)?;
    TorusGrid::new(grid.n(), grid.side() / lambda)
}

/// Same point values times `c`, placed on `grid`.
fn move_to(w: &LieField, grid: TorusGrid, c: f64) -> Result<LieField> {
    Ok(LieField::from_raw(grid, w.rank(), w.data().to_vec())?
        .scale_real(c)
        .with_label(w.label()))
}

/// `w ↦ λw(λt, λx)` for `φ`, `A` and `A₀`, i.e. `f ↦ f(λt, λx)`, on the grid
/// of side `L/λ`. Rates pick up one more factor `λ`.
pub fn rescale_phys(state: &PhysState, rates: &PhysRates, lambda: f64) -> Result<(PhysState, PhysRates)> {
    let g = rescaled_grid(state.grid(), lambda)?;
    let l2 = lambda * lambda;
    let st = PhysState {
        phi: move_to(&state.phi, g, lambda)?,
        f: move_to(&state.f, g, 1.0)?,
        df1: move_to(&state.df1, g, lambda)?,
        df2: move_to(&state.df2, g, lambda)?,
        a0: move_to(&state.a0, g, lambda)?,
        t: state.t / lambda,
    };
    let r = PhysRates {
        phi_t: move_to(&rates.phi_t, g, l2)?,
        f_t: move_to(&rates.f_t, g, lambda)?,
        df1_t: move_to(&rates.df1_t, g, l2)?,
        df2_t: move_to(&rates.df2_t, g, l2)?,
    };
    Ok((st, r))
}

/// Wave variables of the rescaled solution: `u ↦ u(λt, λx)`, `∂ₜu ↦ λ∂ₜu(λt, λx)`.
pub fn rescale_aux(state: &AuxState, lambda: f64) -> Result<AuxState> {
    let g = rescaled_grid(state.grid(), lambda)?;
    Ok(AuxState {
        u: move_to(&state.u, g, 1.0)?,
        ut: move_to(&state.ut, g, lambda)?,
        v: move_to(&state.v, g, 1.0)?,
        vt: move_to(&state.vt, g, lambda)?,
        t: state.t / lambda,
    })
}

/// Residual reports of one state before and after rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingComparison {
    pub t: f64,
    pub original: ConsistencyReport,
    pub rescaled: ConsistencyReport,
}

impl ScalingComparison {
    /// Rescaled over original relative residual (1 when both vanish).
    pub fn relative_ratio(&self) -> f64 {
        let (a, b) = (self.original.max_relative(), self.rescaled.max_relative());
        if a == 0.0 && b == 0.0 {
            1.0
        } else {
            b / a
        }
    }
}

/// Residual reports of a trajectory and of its `λ`-rescaled image.
pub fn scaling_residual(
    phys: &[PhysState],
    rates: &[PhysRates],
    lambda: f64,
) -> Result<Vec<ScalingComparison>> {
    check_lambda(lambda)?;
    if phys.len() != rates.len() {
        return Err(Error::InvalidArgument(format!(
            "{} states but {} rate sets",
            phys.len(),
            rates.len()
        )));
    }
    phys.iter()
        .zip(rates)
        .map(|(s, r)| {
            s.phi.check_compatible(&r.phi_t)?;
            let original = consistency_report(s, r)?;
            let (s2, r2) = rescale_phys(s, r, lambda)?;
            Ok(ScalingComparison {
                t: s.t,
                original,
                rescaled: consistency_report(&s2, &r2)?,
            })
        })
        .collect()
}
