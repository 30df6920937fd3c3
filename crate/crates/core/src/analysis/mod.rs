//! Space-time norms, null forms, parameter windows and sampled estimates.
//!
//! Space-time norms are evaluated on a Hann-windowed sample of `M` frames,
//! a proxy for the restriction norm on `[0, T]`. Ratios computed here are
//! indicative only.

mod estimates;
mod nullform;
mod params;
mod sample;
mod scaling;

pub use crate::spectral::sobolev_norm;
pub use estimates::{
    check_admissible, estimate_ensemble, estimate_ratio, sample_inputs, EnsembleSpec,
    EnsembleStats, EstimateInputs, EstimateKind, EstimateParams, EstimateValue, Family,
};
pub use nullform::{null_form_q, null_form_q12, q_region, q_region_bound, symbol_q, QRegion, QVariant};
pub use params::{
    admissible_params, epsilon_window, kt_check, theta_window, A0Exponents, EllipticCase,
    EllipticWindow, Interval, KtFlags, ParamWindow, KT_EQ_TOL,
};
pub use sample::{
    lambda_minus, lambda_plus, wave_sobolev_norm, SpaceTimeSample, WaveNorm, Window, MIN_FRAMES,
};
pub use scaling::{rescale_aux, rescale_phys, rescaled_grid, scaling_residual, ScalingComparison};
