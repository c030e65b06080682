//! Statistical diagnostics for the 1-D model: signal/noise dependence after
//! synchronization (Pearson correlations) and the approximate PMF of the
//! template-matching shift estimate.

mod pearson;
mod quadrature;
mod shift_pmf;

pub use pearson::{
    dependency_experiment, pearson_coefficient, pearson_pvalue, DependencyMode, PearsonReport,
};
pub use quadrature::integrate_adaptive;
pub use shift_pmf::{
    autocorrelation, pmf_approximation_error, shift_pmf_analytic, shift_pmf_empirical, write_pmf_csv,
    write_pmf_error_csv, PmfSource, ShiftPmf,
};
