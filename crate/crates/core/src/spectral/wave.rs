
use super::field::{LieField, Spectrum};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Exact per-mode propagator of `□u = B` over a fixed step, for B constant in time.
///
/// With ω = |ξ| and `−u_tt + Δu = B`:
///
/// ```text
/// û(t)  =  cos(ωt) û₀ + sin(ωt)/ω û₁ − (1 − cos ωt)/ω² B̂
/// ût(t) = −ω sin(ωt) û₀ + cos(ωt) û₁ − sin(ωt)/ω B̂
/// ```
///
/// and the ω → 0 limits on the zero mode.
#[derive(Debug, Clone)]
pub struct WaveStep {
    grid: TorusGrid,
    dt: f64,
    cos: Vec<f64>,
    sinc: Vec<f64>,
    wsin: Vec<f64>,
    forced: Vec<f64>,
}

impl WaveStep {
    pub fn new(grid: TorusGrid, dt: f64) -> Self {
        let nn = grid.len();
        let mut cos = Vec::with_capacity(nn);
        let mut sinc = Vec::with_capacity(nn);
        let mut wsin = Vec::with_capacity(nn);
        let mut forced = Vec::with_capacity(nn);
        for p in 0..nn {
            let (x1, x2) = grid.xi(p);
            let w = x1.hypot(x2);
            if p == 0 {
                cos.push(1.0);
                sinc.push(dt);
                wsin.push(0.0);
                forced.push(0.5 * dt * dt);
            } else {
                let (s, c) = (w * dt).sin_cos();
                let half = (0.5 * w * dt).sin();
                cos.push(c);
                sinc.push(s / w);
                wsin.push(w * s);
                forced.push(2.0 * half * half / (w * w));
            }
        }
        Self {
            grid,
            dt,
            cos,
            sinc,
            wsin,
            forced,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Advances `(û, ût)` by `dt` with the source spectrum `b` held constant.
    pub fn advance(&self, u: &Spectrum, ut: &Spectrum, b: Option<&Spectrum>) -> (Spectrum, Spectrum) {
        let nn = self.grid.len();
        let mut nu = u.clone();
        let mut nut = ut.clone();
        let (ud, utd) = (u.data(), ut.data());
        let bd = b.map(|b| b.data());
        {
            let nud = nu.data_mut();
            for (idx, z) in nud.iter_mut().enumerate() {
                let p = idx % nn;
                let mut v = self.cos[p] * ud[idx] + self.sinc[p] * utd[idx];
                if let Some(bd) = bd {
                    v -= self.forced[p] * bd[idx];
                }
                *z = v;
            }
        }
        {
            let nutd = nut.data_mut();
            for (idx, z) in nutd.iter_mut().enumerate() {
                let p = idx % nn;
                let mut v = -self.wsin[p] * ud[idx] + self.cos[p] * utd[idx];
                if let Some(bd) = bd {
                    v -= self.sinc[p] * bd[idx];
                }
                *z = v;
            }
        }
        (nu, nut)
    }
}

/// Free wave evolution of `(u₀, u₁)` to time `t`.
pub fn wave_propagate(u0: &LieField, u1: &LieField, t: f64) -> Result<(LieField, LieField)> {
    u0.check_compatible(u1)?;
    let step = WaveStep::new(*u0.grid(), t);
    let (u, ut) = step.advance(&u0.fft(), &u1.fft(), None);
    Ok((u.ifft(), ut.ifft()))
}

/// One step of `□u = B` from `(u, ut)`, with `source` the value of B at the
/// midpoint of the step, held constant across it.
pub fn duhamel_step(
    u: &LieField,
    ut: &LieField,
    source: &LieField,
    dt: f64,
) -> Result<(LieField, LieField)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !source.is_finite() {
        return Err(Error::InvalidArgument("source has non-finite values".into()));
    }
    u.check_compatible(ut)?;
    u.check_compatible(source)?;
    let step = WaveStep::new(*u.grid(), dt);
    let b = source.fft();
    let (nu, nut) = step.advance(&u.fft(), &ut.fft(), Some(&b));
    Ok((nu.ifft(), nut.ifft()))
}

/// `‖∇u‖² + ‖ut‖²`, computed spectrally.
pub fn wave_energy(u: &LieField, ut: &LieField) -> f64 {
    let s = u.fft();
    let g = *u.grid();
    let nn = g.len();
    let grad: f64 = s
        .data()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let (x1, x2) = g.xi(idx % nn);
            (x1 * x1 + x2 * x2) * z.norm_sqr()
        })
        .sum::<f64>()
        * g.cell_area()
        / nn as f64;
    grad + ut.l2_norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::su_basis;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(32, 2.0 * PI).unwrap()
    }

    fn single(k: (f64, f64), amp: Complex64, m: usize) -> LieField {
        LieField::from_scalar(grid(), &su_basis(2)[m], move |x, y| {
            amp * Complex64::from_polar(1.0, k.0 * x + k.1 * y)
        })
    }

    fn max_diff(a: &LieField, b: &LieField) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = LieField::zeros(grid(), 2);
        let (u, ut) = wave_propagate(&z, &z, 1.3).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        assert_eq!(ut.sup_norm(), 0.0);
    }

    #[test]
    fn single_mode_formula() {
        let k = (3.0, 4.0);
        let w: f64 = 5.0;
        let t = 0.37;
        let a = Complex64::new(0.3, -0.2);
        let b = Complex64::new(-0.1, 0.5);
        let (u, ut) = wave_propagate(&single(k, a, 0), &single(k, b, 0), t).unwrap();
        let want_u = single(k, a * (w * t).cos() + b * (w * t).sin() / w, 0);
        let want_ut = single(k, -a * w * (w * t).sin() + b * (w * t).cos(), 0);
        assert!(max_diff(&u, &want_u) < 1e-13);
        assert!(max_diff(&ut, &want_ut) < 1e-13);
    }

    #[test]
    fn energy_is_conserved() {
        let u0 = single((1.0, 2.0), Complex64::new(1.0, 0.0), 0)
            .add(&single((-3.0, 0.0), Complex64::new(0.0, 0.4), 1))
            .unwrap();
        let u1 = single((0.0, 5.0), Complex64::new(0.2, 0.1), 2);
        let e0 = wave_energy(&u0, &u1);
        for t in [0.1, 1.0, 7.5] {
            let (u, ut) = wave_propagate(&u0, &u1, t).unwrap();
            assert!((wave_energy(&u, &ut) - e0).abs() < 1e-10 * e0);
        }
    }

    #[test]
    fn constant_source_closed_form() {
        // −û_tt − ω²û = B̂ from rest: û(dt) = −(1 − cos ω dt)/ω² B̂
        let k = (2.0, 0.0);
        let w: f64 = 2.0;
        let dt = 0.3;
        let bh = Complex64::new(0.7, 0.0);
        let z = LieField::zeros(grid(), 2);
        let (u, ut) = duhamel_step(&z, &z, &single(k, bh, 1), dt).unwrap();
        let want = single(k, -bh * (1.0 - (w * dt).cos()) / (w * w), 1);
        assert!(max_diff(&u, &want) < 1e-14);
        let want_t = single(k, -bh * (w * dt).sin() / w, 1);
        assert!(max_diff(&ut, &want_t) < 1e-14);
    }

    #[test]
    fn zero_source_matches_free_propagation() {
        let u0 = single((1.0, 1.0), Complex64::new(1.0, 0.0), 0);
        let u1 = single((2.0, -1.0), Complex64::new(0.0, 1.0), 2);
        let z = LieField::zeros(grid(), 2);
        let (a, at) = duhamel_step(&u0, &u1, &z, 0.2).unwrap();
        let (b, bt) = wave_propagate(&u0, &u1, 0.2).unwrap();
        assert!(max_diff(&a, &b) < 1e-15);
        assert!(max_diff(&at, &bt) < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let z = LieField::zeros(grid(), 2);
        assert!(duhamel_step(&z, &z, &z, 0.0).is_err());
    }

    /// Time-dependent source B(t) = cos(3t)·e^{ix}T; midpoint sampling is order 2.
    #[test]
    fn midpoint_sampling_is_second_order() {
        let base = single((1.0, 0.0), Complex64::new(1.0, 0.0), 0);
        let src = |t: f64| base.scale_real((3.0 * t).cos());
        let run = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut u = LieField::zeros(grid(), 2);
            let mut ut = base.scale_real(0.5);
            for n in 0..steps {
                let tm = (n as f64 + 0.5) * dt;
                let (a, b) = duhamel_step(&u, &ut, &src(tm), dt).unwrap();
                u = a;
                ut = b;
            }
            u
        };
        let reference = run(16 * 64);
        let e1 = max_diff(&run(16), &reference);
        let e2 = max_diff(&run(32), &reference);
        let ratio = e1 / e2;
        assert!(ratio > 3.6 && ratio < 4.4, "ratio {ratio}");
    }
}
