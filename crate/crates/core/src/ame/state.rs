use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaugeforms::Connection;
use crate::liealg::frobenius_norm;
use crate::spectral::{
    inverse_laplacian, partial_derivative, riesz_unit, LieField, Multiplier, Spectrum, TorusGrid,
};

/// Wave variables `(u, ∂ₜu, v, ∂ₜv)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    pub u: LieField,
    pub ut: LieField,
    pub v: LieField,
    pub vt: LieField,
    pub t: f64,
}

impl AuxState {
    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        let z = LieField::zeros(grid, rank);
        Self {
            u: z.clone(),
            ut: z.clone(),
            v: z.clone(),
            vt: z,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    pub fn rank(&self) -> usize {
        self.u.rank()
    }

    pub(crate) fn spectra(&self) -> AuxSpectra {
        AuxSpectra {
            u: self.u.fft(),
            ut: self.ut.fft(),
            v: self.v.fft(),
            vt: self.vt.fft(),
            t: self.t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.ut.is_finite() && self.v.is_finite() && self.vt.is_finite()
    }
}

/// Spectral form of [`AuxState`], the representation the integrator works in.
#[derive(Debug, Clone)]
pub(crate) struct AuxSpectra {
    pub u: Spectrum,
    pub ut: Spectrum,
    pub v: Spectrum,
    pub vt: Spectrum,
    pub t: f64,
}

impl AuxSpectra {
    pub fn to_state(&self) -> AuxState {
        AuxState {
            u: self.u.ifft(),
            ut: self.ut.ifft(),
            v: self.v.ifft(),
            vt: self.vt.ifft(),
            t: self.t,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    /// `(∂ₜ + iD)u` and `(∂ₜ − iD)v` as spectra.
    pub fn half_waves(&self) -> (Spectrum, Spectrum) {
        let g = *self.grid();
        let nn = g.len();
        let mut y = self.ut.clone();
        let mut z = self.vt.clone();
        let (ud, vd) = (self.u.data(), self.v.data());
        for (idx, (a, b)) in y.data_mut().iter_mut().zip(z.data_mut().iter_mut()).enumerate() {
            let (x1, x2) = g.xi(idx % nn);
            let w = Complex64::new(0.0, x1.hypot(x2));
            *a += w * ud[idx];
            *b -= w * vd[idx];
        }
        (y, z)
    }
}

/// Physical fields recovered from the wave variables.
///
/// The spatial connection is `A = ∗df`, i.e. `A₁ = −∂₂f`, `A₂ = ∂₁f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysState {
    pub phi: LieField,
    pub f: LieField,
    pub df1: LieField,
    pub df2: LieField,
    pub a0: LieField,
    pub t: f64,
}

impl PhysState {
    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        let z = LieField::zeros(grid, rank);
        Self {
            phi: z.clone(),
            f: z.clone(),
            df1: z.clone(),
            df2: z.clone(),
            a0: z,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.phi.grid()
    }

    pub fn rank(&self) -> usize {
        self.phi.rank()
    }

    pub fn a1(&self) -> LieField {
        self.df2.neg()
    }

    pub fn a2(&self) -> LieField {
        self.df1.clone()
    }

    pub fn connection(&self) -> Connection {
        Connection {
            a0: self.a0.clone(),
            a1: self.a1(),
            a2: self.a2(),
        }
    }
}

/// Largest accepted Hermitian (discarded) fraction in [`reconstruct`].
pub const NON_PHYSICAL_TOL: f64 = 1e-6;

/// Mean tolerance for initial connections, relative to max(1, ‖a‖/L).
pub const DATA_MEAN_TOL: f64 = 1e-10;

/// Builds wave data from Coulomb data `(a₁, a₂, φ₀)`.
///
/// `h = R̃₁a₂ − R̃₂a₁` with the direction transform `R̃_j` (symbol ξ_j/|ξ|),
/// `u = v = 0`, `∂ₜu = φ₀ + h`, `∂ₜv = φ₀ − h`, and
/// `f₀ = Δ⁻¹(∂₁a₂ − ∂₂a₁)`. With this transform the reconstruction returns
/// `(−∂₂f₀, ∂₁f₀) = (a₁, a₂)`; the symbol iξ_j/|ξ| would return `−a`.
pub fn build_initial_data(
    a1: &LieField,
    a2: &LieField,
    phi0: &LieField,
    coulomb_tol: f64,
) -> Result<(AuxState, LieField)> {
    a1.check_compatible(a2)?;
    a1.check_compatible(phi0)?;
    let grid = *a1.grid();
    let scale = ((a1.l2_norm() + a2.l2_norm()) / grid.side()).max(1.0);
    for a in [a1, a2] {
        let mean = frobenius_norm(&a.mean());
        if mean > DATA_MEAN_TOL * scale {
            return Err(Error::NonzeroMean {
                mean,
                tol: DATA_MEAN_TOL * scale,
            });
        }
    }
    let conn = Connection::spatial(a1.clone(), a2.clone())?;
    let ratio = conn.coulomb_ratio();
    if ratio > coulomb_tol {
        return Err(Error::NotCoulomb {
            ratio,
            tol: coulomb_tol,
        });
    }
    let h = riesz_unit(a2, 1).sub(&riesz_unit(a1, 2))?;
    let curl = partial_derivative(a2, 1).sub(&partial_derivative(a1, 2))?;
    let f0 = inverse_laplacian(&curl)?;
    let zero = LieField::zeros(grid, a1.rank());
    let aux = AuxState {
        u: zero.clone(),
        ut: phi0.add(&h)?,
        v: zero,
        vt: phi0.sub(&h)?,
        t: 0.0,
    };
    Ok((aux, f0))
}

/// Result of [`reconstruct`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Physical fields with `A₀ = 0`; fill it with the elliptic solve.
    pub state: PhysState,
    /// Norm of the discarded Hermitian parts over the norm of the raw fields.
    pub discarded: f64,
}

/// `φ = ((∂ₜ+iD)u + (∂ₜ−iD)v)/2`, `∂_jf = R̃_j((∂ₜ+iD)u − (∂ₜ−iD)v)/2`.
///
/// The raw fields are projected onto anti-Hermitian matrices; the relative
/// size of what was dropped is reported and must stay below
/// [`NON_PHYSICAL_TOL`].
pub fn reconstruct(s: &AuxState) -> Result<Reconstruction> {
    reconstruct_spectra(&s.spectra())
}

pub(crate) fn reconstruct_spectra(s: &AuxSpectra) -> Result<Reconstruction> {
    let g = *s.grid();
    let nn = g.len();
    let (y, z) = s.half_waves();
    let mut phi = y.clone();
    let mut h = y;
    for ((p, hh), &zz) in phi
        .data_mut()
        .iter_mut()
        .zip(h.data_mut().iter_mut())
        .zip(z.data())
    {
        *p = 0.5 * (*p + zz);
        *hh = 0.5 * (*hh - zz);
    }
    // f̂ = ĥ / (i|ξ|), zero mode pinned to 0
    let inv_id: Vec<Complex64> = (0..nn)
        .map(|p| {
            if p == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let (x1, x2) = g.xi(p);
                Complex64::new(0.0, -1.0 / x1.hypot(x2))
            }
        })
        .collect();
    let f_hat = h.scaled_by(&inv_id);
    let d1 = Multiplier::riesz_unit(1).apply_spectrum(&h)?;
    let d2 = Multiplier::riesz_unit(2).apply_spectrum(&h)?;

    let raw = [phi.ifft(), f_hat.ifft(), d1.ifft(), d2.ifft()];
    let mut total = 0.0;
    let mut dropped = 0.0;
    let mut clean = Vec::with_capacity(4);
    for r in raw {
        total += r.l2_norm_sq();
        dropped += r.hermitian_part().l2_norm_sq();
        clean.push(r.anti_hermitian_part());
    }
    let discarded = if total > 0.0 {
        (dropped / total).sqrt()
    } else {
        0.0
    };
    if discarded > NON_PHYSICAL_TOL {
        return Err(Error::NonPhysical { ratio: discarded });
    }
    let mut it = clean.into_iter();
    let (phi, f, df1, df2) = (
        it.next().unwrap().with_label("phi"),
        it.next().unwrap().with_label("f"),
        it.next().unwrap().with_label("df1"),
        it.next().unwrap().with_label("df2"),
    );
    let a0 = LieField::zeros(g, phi.rank()).with_label("a0");
    Ok(Reconstruction {
        state: PhysState {
            phi,
            f,
            df1,
            df2,
            a0,
            t: s.t,
        },
        discarded,
    })
}
