//! The wave reformulation of the monopole equation in Coulomb gauge.
//!
//! With `A = ∗df`, the pair `(φ, df)` is carried by two wave fields `u, v`
//! solving `□u = B₊`, `□v = B₋`, while `A₀` is fixed at each time by an
//! elliptic equation.

mod evolve;
mod nonlinear;
mod picard;
mod report;
mod state;

pub use evolve::{evolve, EvolveSettings, RunStats, Trajectory};
pub use nonlinear::{
    assemble_bpm, elliptic_smallness, elliptic_solve_a0, nonlinearity_b, B2Route,
    EllipticSettings, EllipticSolution, Products,
};
pub(crate) use nonlinear::b_spectra;
pub use picard::{picard_solve, PicardResult};
pub use report::{consistency_report, window_rates, ConsistencyReport, PhysRates};
pub use state::{
    build_initial_data, reconstruct, AuxState, PhysState, Reconstruction, DATA_MEAN_TOL,
    NON_PHYSICAL_TOL,
};
