//! Heat traces, their small-time expansions and fits.

mod coeffs;
mod exponent;
mod fit;
mod trace;

pub use coeffs::{
    gaussian_shift, multiply_expansions, predicted_coefficients, predicted_contributions,
    Contribution, Expansion,
};
pub use exponent::Exponent;
pub use fit::{
    compare_fit, fit_expansion, fit_samples, fit_spectrum, AsymptoticFit, FitComparison, FitRow,
    FitWindow, MAX_CONDITION,
};
pub use trace::{
    log_grid, reliable_t_min, tail_bound, trace_series, HeatTracePoint, HeatTraceSeries,
    RELIABILITY,
};
