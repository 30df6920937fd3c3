use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{DataKind, RunConfig};
use super::snapshot::load_snapshot;
use crate::ame::{build_initial_data, AuxState};
use crate::error::{Error, Result};
use crate::liealg::su_basis;
use crate::spectral::{partial_derivative, LieField, Spectrum, TorusGrid};

/// Real su(n) field with Gaussian Fourier coefficients on `0 < |ξ| ≤ band`.
pub fn random_band_limited(grid: TorusGrid, rank: usize, band: f64, rng: &mut impl Rng) -> LieField {
    let nn = grid.len();
    let n = grid.n();
    let mut spec = Spectrum::zeros(grid, rank);
    for t in su_basis(rank) {
        let mut c = vec![Complex64::new(0.0, 0.0); nn];
        for (p, z) in c.iter_mut().enumerate() {
            let (x1, x2) = grid.xi(p);
            if p != 0 && x1.hypot(x2) <= band {
                *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
        let data = spec.data_mut();
        for p in 0..nn {
            let (i1, i2) = (p % n, p / n);
            let m = (n - i1) % n + ((n - i2) % n) * n;
            // Hermitian symmetric scalar spectrum: real coefficient field
            let s = 0.5 * (c[p] + c[m].conj());
            for (k, e) in t.entries().iter().enumerate() {
                data[k * nn + p] += e * s;
            }
        }
    }
    spec.ifft()
}

fn rms(w: &LieField) -> f64 {
    w.l2_norm() / w.grid().side()
}

/// Coulomb data `a = ∗dψ` and `φ` from band-limited random fields, scaled so
/// the RMS of `|a|` and of `|φ|` equal `amplitude`.
pub fn random_coulomb_data(
    grid: TorusGrid,
    rank: usize,
    band: f64,
    amplitude: f64,
    rng: &mut impl Rng,
) -> Result<(LieField, LieField, LieField)> {
    let psi = random_band_limited(grid, rank, band, rng);
    let phi = random_band_limited(grid, rank, band, rng);
    let a1 = partial_derivative(&psi, 2).neg();
    let a2 = partial_derivative(&psi, 1);
    let ra = (rms(&a1).powi(2) + rms(&a2).powi(2)).sqrt();
    let rp = rms(&phi);
    if !(ra > 0.0 && rp > 0.0) {
        return Err(Error::Degenerate("band contains no modes".into()));
    }
    Ok((
        a1.scale_real(amplitude / ra),
        a2.scale_real(amplitude / ra),
        phi.scale_real(amplitude / rp),
    ))
}

fn periodic_offset(a: f64, c: f64, side: f64) -> f64 {
    let v = (a - c).rem_euclid(side);
    if v > 0.5 * side {
        v - side
    } else {
        v
    }
}

/// Gaussian bumps: `a = ∗dψ` with `ψ` a bump along two generators, `φ` a
/// bump along the third, all of width `width`.
pub fn bump_data(grid: TorusGrid, rank: usize, width: f64, amplitude: f64) -> Result<(LieField, LieField, LieField)> {
    let t = su_basis(rank);
    let side = grid.side();
    let bump = move |x: f64, y: f64, cx: f64, cy: f64| {
        let (dx, dy) = (periodic_offset(x, cx, side), periodic_offset(y, cy, side));
        (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
    };
    let c = side / (2.0 * PI);
    let psi = LieField::from_fn(grid, rank, |x, y| {
        &t[0].scale_real(amplitude * width * bump(x, y, 2.5 * c, 3.0 * c))
            + &t[2 % t.len()].scale_real(amplitude * width * bump(x, y, 3.5 * c, 3.3 * c))
    });
    let phi = LieField::from_fn(grid, rank, |x, y| t[1].scale_real(amplitude * bump(x, y, 3.0 * c, 2.8 * c)));
    let a1 = partial_derivative(&psi, 2).neg();
    let a2 = partial_derivative(&psi, 1);
    Ok((a1, a2, phi))
}

/// Initial wave variables described by `cfg`.
pub fn initial_data(cfg: &RunConfig) -> Result<AuxState> {
    let grid = cfg.grid()?;
    let triple = match cfg.data {
        DataKind::Zero => return Ok(AuxState::zeros(grid, cfg.rank)),
        DataKind::Snapshot => {
            let path = cfg.input.as_ref().expect("validated");
            let s = load_snapshot(path)?;
            if *s.grid() != grid || s.rank() != cfg.rank {
                return Err(Error::ConfigInvalid {
                    field: "input".into(),
                    message: format!("snapshot grid or rank does not match N = {}, L = {}, rank = {}", cfg.n, cfg.side, cfg.rank),
                });
            }
            return Ok(s);
        }
        DataKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_coulomb_data(grid, cfg.rank, cfg.band, cfg.amplitude, &mut rng)?
        }
        DataKind::Bumps => bump_data(grid, cfg.rank, cfg.bump_width, cfg.amplitude)?,
    };
    let (a1, a2, phi) = triple;
    Ok(build_initial_data(&a1, &a2, &phi, cfg.coulomb_tol)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaugeforms::Connection;

    #[test]
    fn random_data_is_coulomb_and_scaled() {
        let g = TorusGrid::new(32, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a1, a2, phi) = random_coulomb_data(g, 2, 3.0, 0.1, &mut rng).unwrap();
        assert!(a1.is_su(1e-12) && phi.is_su(1e-12));
        let c = Connection::spatial(a1.clone(), a2.clone()).unwrap();
        assert!(c.coulomb_ratio() < 1e-13);
        assert!((rms(&phi) - 0.1).abs() < 1e-12);
        assert!(((rms(&a1).powi(2) + rms(&a2).powi(2)).sqrt() - 0.1).abs() < 1e-12);
    }
}
