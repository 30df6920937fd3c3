use super::evolve::{check_blowup, check_cfl, step_count, Engine, EvolveSettings, RunStats};
use super::state::{AuxSpectra, AuxState};
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Output of [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardResult {
    /// State at the final time for iterates `0..=J`.
    pub iterates: Vec<AuxState>,
    /// `‖u_j − u_{j−1}‖` for `j = 1..=J`, the sup over step times of the
    /// energy-type norm `(‖Δw‖² + ‖∇Δw‖² + ‖∂ₜΔw‖²)^{1/2}` over `w ∈ {u, v}`.
    pub differences: Vec<f64>,
    pub stats: RunStats,
}

impl PicardResult {
    pub fn final_state(&self) -> &AuxState {
        self.iterates.last().expect("at least the free iterate")
    }

    /// Successive ratios `d_j / d_{j−1}`.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

fn spectrum_h1_diff_sq(a: &Spectrum, b: &Spectrum) -> f64 {
    let g = *a.grid();
    let nn = g.len();
    a.data()
        .iter()
        .zip(b.data())
        .enumerate()
        .map(|(idx, (x, y))| {
            let (x1, x2) = g.xi(idx % nn);
            (1.0 + x1 * x1 + x2 * x2) * (x - y).norm_sqr()
        })
        .sum::<f64>()
        * g.cell_area()
        / nn as f64
}

fn spectrum_l2_diff_sq(a: &Spectrum, b: &Spectrum) -> f64 {
    let g = a.grid();
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        * g.cell_area()
        / g.len() as f64
}

fn energy_distance(a: &AuxSpectra, b: &AuxSpectra) -> f64 {
    (spectrum_h1_diff_sq(&a.u, &b.u)
        + spectrum_l2_diff_sq(&a.ut, &b.ut)
        + spectrum_h1_diff_sq(&a.v, &b.v)
        + spectrum_l2_diff_sq(&a.vt, &b.vt))
    .sqrt()
}

type Sources = Vec<(Spectrum, Spectrum)>;

/// Picard iteration for the wave system over a span `t_final` past the
/// initial state's time.
///
/// Iterate 0 is the free evolution of the data. Iterate `j` solves the linear
/// wave equations with sources `(B₊, B₋)` built from iterate `j − 1`, where B₂
/// comes from the wave variables and B₁, B₃, B₄ from the reconstructed fields
/// and A₀. Sources are stored at the step times and midpoints of the previous
/// iterate and propagated with the same exponential midpoint rule as
/// [`super::evolve`], so the fixed point of the iteration is the `evolve`
/// trajectory.
pub fn picard_solve(
    initial: &AuxState,
    t_final: f64,
    iterations: usize,
    settings: &EvolveSettings,
) -> Result<PicardResult> {
    if !initial.is_finite() {
        return Err(Error::InvalidArgument("initial state has non-finite values".into()));
    }
    let grid = *initial.grid();
    let (steps, h) = step_count(t_final, settings.dt)?;
    check_cfl(&grid, h, settings.cfl)?;
    let mut engine = Engine::new(grid, h, settings.products, settings.elliptic);
    engine.stats.steps = steps;
    let start = initial.spectra();

    // free iterate
    let mut states = Vec::with_capacity(steps + 1);
    let mut at_steps: Sources = Vec::with_capacity(steps);
    let mut at_mids: Sources = Vec::with_capacity(steps);
    let mut s = start.clone();
    for n in 0..=steps {
        check_blowup(&s, settings.blowup_cap)?;
        if n < steps && iterations > 0 {
            let a = engine.source(&s, true)?;
            let mid = engine.free_step(&s, true);
            let b = engine.source(&mid, true)?;
            at_steps.push((a.plus, a.minus));
            at_mids.push((b.plus, b.minus));
        }
        let next = (n < steps).then(|| engine.free_step(&s, false));
        states.push(s);
        match next {
            Some(x) => s = x,
            None => break,
        }
    }
    let mut iterates = vec![states[steps].to_state()];
    let mut differences = Vec::with_capacity(iterations);

    for j in 1..=iterations {
        let last = j == iterations;
        let mut new_states = Vec::with_capacity(steps + 1);
        let mut new_steps: Sources = Vec::with_capacity(steps);
        let mut new_mids: Sources = Vec::with_capacity(steps);
        let mut s = start.clone();
        for n in 0..=steps {
            check_blowup(&s, settings.blowup_cap)?;
            if n == steps {
                new_states.push(s);
                break;
            }
            let (bp, bm) = &at_steps[n];
            let mid = engine.half_step(&s, bp, bm);
            let (cp, cm) = &at_mids[n];
            let mut next = engine.full_step(&s, cp, cm);
            next.t = start.t + (n + 1) as f64 * h;
            if !last {
                let a = engine.source(&s, true)?;
                let b = engine.source(&mid, true)?;
                new_steps.push((a.plus, a.minus));
                new_mids.push((b.plus, b.minus));
            }
            new_states.push(s);
            s = next;
        }
        let diff = states
            .iter()
            .zip(&new_states)
            .map(|(a, b)| energy_distance(a, b))
            .fold(0.0, f64::max);
        differences.push(diff);
        iterates.push(new_states[steps].to_state());
        states = new_states;
        at_steps = new_steps;
        at_mids = new_mids;
    }
    Ok(PicardResult {
        iterates,
        differences,
        stats: engine.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ame::evolve::evolve;
    use crate::ame::state::build_initial_data;
    use crate::liealg::su_basis;
    use crate::spectral::{LieField, TorusGrid};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn max_diff(a: &LieField, b: &LieField) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_gives_zero_iterates() {
        let g = TorusGrid::new(16, 2.0 * PI).unwrap();
        let r = picard_solve(&AuxState::zeros(g, 2), 0.2, 3, &EvolveSettings::default()).unwrap();
        assert!(r.differences.iter().all(|&d| d == 0.0));
        assert_eq!(r.final_state().ut.sup_norm(), 0.0);
    }

    #[test]
    fn fixed_point_matches_evolve() {
        let g = TorusGrid::new(32, 2.0 * PI).unwrap();
        let t = su_basis(2);
        let (t0, t1, t2) = (t[0].clone(), t[1].clone(), t[2].clone());
        let a1 = LieField::from_fn(g, 2, |x, y| t0.scale_real(-0.05 * x.sin() * y.cos()));
        let a2 = LieField::from_fn(g, 2, |x, y| t0.scale_real(0.05 * x.cos() * y.sin()));
        let phi = LieField::from_fn(g, 2, |x, y| {
            &t1.scale(Complex64::new(0.05 * (x - y).sin(), 0.0)) + &t2.scale_real(0.04 * y.cos())
        });
        let (s, _) = build_initial_data(&a1, &a2, &phi, 1e-9).unwrap();
        let set = EvolveSettings {
            dt: 0.05,
            diagnostics: false,
            ..EvolveSettings::default()
        };
        let r = picard_solve(&s, 0.3, 8, &set).unwrap();
        for w in r.ratios().iter().skip(1) {
            assert!(*w < 0.7, "ratios {:?}", r.ratios());
        }
        let e = evolve(&s, 0.3, &set).unwrap();
        let d = max_diff(&r.final_state().u, &e.final_state().u);
        assert!(d < 1e-12, "{d}");
    }
}
