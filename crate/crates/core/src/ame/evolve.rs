use std::collections::VecDeque;

use serde::Serialize;

use super::nonlinear::{b_spectra_with, elliptic_solve_a0, EllipticSettings, Products};
use super::report::{consistency_report, window_rates, ConsistencyReport, PhysRates};
use super::state::{reconstruct_spectra, AuxSpectra, AuxState, PhysState};
use crate::error::{Error, Result};
use crate::spectral::{LieField, Spectrum, TorusGrid, WaveStep};

/// Settings for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveSettings {
    /// Requested step; the run uses `T / ceil(T/dt)`.
    pub dt: f64,
    /// Store a snapshot every this many steps (the final state is always stored).
    pub snapshot_every: usize,
    /// Bound on `dt · max retained |ξ|`.
    pub cfl: f64,
    /// Largest allowed `‖(u, ∂ₜu, v, ∂ₜv)‖` before the run is aborted.
    pub blowup_cap: f64,
    /// Evaluate a residual report at every snapshot.
    pub diagnostics: bool,
    pub products: Products,
    pub elliptic: EllipticSettings,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            dt: 0.05,
            snapshot_every: 1,
            cfl: 2.0,
            blowup_cap: 1e6,
            diagnostics: true,
            products: Products::Dealiased,
            elliptic: EllipticSettings::default(),
        }
    }
}

/// Per-step bookkeeping of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub dt: f64,
    pub elliptic_solves: usize,
    pub elliptic_iterations: usize,
    pub max_contraction: f64,
    pub max_smallness: f64,
    pub max_discarded: f64,
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<AuxState>,
    /// Physical fields (with A₀) at the snapshot times.
    pub phys: Vec<PhysState>,
    /// Residual reports at the snapshot times; empty if diagnostics are off or
    /// the run has fewer than four steps.
    pub reports: Vec<ConsistencyReport>,
    /// Time derivatives behind each report, aligned with `reports` and `phys`.
    pub rates: Vec<PhysRates>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &AuxState {
        self.snapshots.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_phys(&self) -> &PhysState {
        self.phys.last().expect("trajectory holds at least the initial state")
    }

    /// Largest relative residual over all reports.
    pub fn max_relative_residual(&self) -> f64 {
        self.reports.iter().map(|r| r.max_relative()).fold(0.0, f64::max)
    }

    pub fn max_coulomb(&self) -> f64 {
        self.reports.iter().map(|r| r.coulomb).fold(0.0, f64::max)
    }
}

pub(crate) fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "final time must be non-negative, got {t_final}"
        )));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { dt } else { t_final / steps as f64 };
    Ok((steps, h))
}

pub(crate) fn check_cfl(grid: &TorusGrid, dt: f64, cfl: f64) -> Result<()> {
    let c = dt * grid.max_retained_frequency();
    if c > cfl {
        return Err(Error::InvalidArgument(format!(
            "dt·max|ξ| = {c:.3} exceeds the step bound {cfl}"
        )));
    }
    Ok(())
}

/// Source evaluation and linear propagation shared by [`evolve`] and the
/// Picard iteration.
pub(crate) struct Engine {
    half: WaveStep,
    full: WaveStep,
    products: Products,
    elliptic: EllipticSettings,
    guess: Option<LieField>,
    pub stats: RunStats,
}

pub(crate) struct Source {
    pub phys: PhysState,
    pub plus: Spectrum,
    pub minus: Spectrum,
}

impl Engine {
    pub fn new(grid: TorusGrid, dt: f64, products: Products, elliptic: EllipticSettings) -> Self {
        Self {
            half: WaveStep::new(grid, 0.5 * dt),
            full: WaveStep::new(grid, dt),
            products,
            elliptic,
            guess: None,
            stats: RunStats {
                dt,
                ..RunStats::default()
            },
        }
    }

    /// Reconstructs, solves for A₀ and builds `(B₊, B₋)` at `s`.
    /// `waves_b2` selects the wave-variable route for B₂.
    pub fn source(&mut self, s: &AuxSpectra, waves_b2: bool) -> Result<Source> {
        let rec = reconstruct_spectra(s)?;
        self.stats.max_discarded = self.stats.max_discarded.max(rec.discarded);
        let mut phys = rec.state;
        let sol = elliptic_solve_a0(
            &phys.df1,
            &phys.df2,
            &phys.phi,
            self.guess.as_ref(),
            &self.elliptic,
        )?;
        self.stats.elliptic_solves += 1;
        self.stats.elliptic_iterations += sol.iterations;
        self.stats.max_contraction = self.stats.max_contraction.max(sol.contraction);
        self.stats.max_smallness = self.stats.max_smallness.max(sol.measure);
        phys.a0 = sol.a0;
        self.guess = Some(phys.a0.clone());
        let b = b_spectra_with(&phys, waves_b2.then_some(s), self.products)?;
        let (plus, minus) = b.plus_minus();
        Ok(Source { phys, plus, minus })
    }

    fn advance(step: &WaveStep, s: &AuxSpectra, plus: &Spectrum, minus: &Spectrum) -> AuxSpectra {
        let (u, ut) = step.advance(&s.u, &s.ut, Some(plus));
        let (v, vt) = step.advance(&s.v, &s.vt, Some(minus));
        AuxSpectra {
            u,
            ut,
            v,
            vt,
            t: s.t + step.dt(),
        }
    }

    pub fn half_step(&self, s: &AuxSpectra, plus: &Spectrum, minus: &Spectrum) -> AuxSpectra {
        Self::advance(&self.half, s, plus, minus)
    }

    pub fn full_step(&self, s: &AuxSpectra, plus: &Spectrum, minus: &Spectrum) -> AuxSpectra {
        Self::advance(&self.full, s, plus, minus)
    }

    pub fn free_step(&self, s: &AuxSpectra, half: bool) -> AuxSpectra {
        let step = if half { &self.half } else { &self.full };
        let (u, ut) = step.advance(&s.u, &s.ut, None);
        let (v, vt) = step.advance(&s.v, &s.vt, None);
        AuxSpectra {
            u,
            ut,
            v,
            vt,
            t: s.t + step.dt(),
        }
    }
}

pub(crate) fn spectra_norm(s: &AuxSpectra) -> f64 {
    (s.u.l2_norm_sq() + s.ut.l2_norm_sq() + s.v.l2_norm_sq() + s.vt.l2_norm_sq()).sqrt()
}

pub(crate) fn check_blowup(s: &AuxSpectra, cap: f64) -> Result<()> {
    let norm = spectra_norm(s);
    if !(norm <= cap) {
        return Err(Error::BlowUp {
            norm,
            cap,
            time: s.t,
        });
    }
    Ok(())
}

/// Advances `□u = B₊`, `□v = B₋` by a span `t_final` past the initial
/// state's time with the exponential midpoint rule.
///
/// Each step evaluates the sources at `tₙ`, takes a half step with them,
/// re-evaluates at the midpoint and takes the full step with the midpoint
/// sources held constant. A₀ is re-solved at every source evaluation.
/// Residual reports use five-point time differences of the step states.
pub fn evolve(initial: &AuxState, t_final: f64, settings: &EvolveSettings) -> Result<Trajectory> {
    if !initial.is_finite() {
        return Err(Error::InvalidArgument("initial state has non-finite values".into()));
    }
    let grid = *initial.grid();
    let (steps, h) = step_count(t_final, settings.dt)?;
    check_cfl(&grid, h, settings.cfl)?;
    if settings.snapshot_every == 0 {
        return Err(Error::InvalidArgument("snapshot interval must be at least 1".into()));
    }
    let mut engine = Engine::new(grid, h, settings.products, settings.elliptic);
    engine.stats.steps = steps;

    let is_snapshot = |n: usize| n % settings.snapshot_every == 0 || n == steps;
    let diagnose = settings.diagnostics && steps >= 4;

    let mut snapshots = Vec::new();
    let mut phys = Vec::new();
    let mut reports = Vec::new();
    let mut rates_out = Vec::new();
    // recent step states, and the snapshot indices still waiting for a full window
    let mut window: VecDeque<PhysState> = VecDeque::with_capacity(5);
    let mut pending: VecDeque<usize> = VecDeque::new();

    let mut s = initial.spectra();
    let t0 = s.t;
    for n in 0..=steps {
        check_blowup(&s, settings.blowup_cap)?;
        let src = engine.source(&s, false)?;
        if is_snapshot(n) {
            snapshots.push(s.to_state());
            phys.push(src.phys.clone());
            if diagnose {
                pending.push_back(n);
            }
        }
        if diagnose {
            if window.len() == 5 {
                window.pop_front();
            }
            window.push_back(src.phys.clone());
            while let Some(&k) = pending.front() {
                let w0 = k.saturating_sub(2).min(steps - 4);
                if w0 + 4 != n {
                    break;
                }
                let win = [&window[0], &window[1], &window[2], &window[3], &window[4]];
                let rates = window_rates(win, k - w0, h);
                reports.push(consistency_report(&window[k - w0], &rates)?);
                rates_out.push(rates);
                pending.pop_front();
            }
        }
        if n == steps {
            break;
        }
        let mid = engine.half_step(&s, &src.plus, &src.minus);
        let msrc = engine.source(&mid, false)?;
        s = engine.full_step(&s, &msrc.plus, &msrc.minus);
        s.t = t0 + (n + 1) as f64 * h;
    }
    Ok(Trajectory {
        snapshots,
        phys,
        reports,
        rates: rates_out,
        stats: engine.stats,
    })
}
