//! Time-series diagnostics: the energy ledger, the smallness condition and
//! derivative monotonicity, the `o(1/t)` trend surrogate, weighted energy
//! comparisons and log-log decay fits.
//!
//! Every check is a pure function of a [`NormSeries`], so re-running it on a
//! series read back from disk gives identical reports.

mod bounds;
mod checks;
mod fit;
mod series;

pub use bounds::{
    boundary_ratio, default_smallness_constant, detect_wraparound, linf_via_gn, GnBound,
    SMALLNESS_SAFETY_FACTOR, WRAPAROUND_THRESHOLD,
};
pub use checks::{
    check_monotone_derivative, energy_ledger, epsilon_onset, ledger_scan, o_one_over_t_check, smallness_condition,
    smallness_onset, weighted_energy_diagnostic, EpsilonOnset, LedgerScan, MonotoneReport, TrendReport,
    WeightedReport, MONOTONE_DRIFT,
};
pub use fit::{admissible_window, fit_decay, predicted_exponent, DecayFit, DEFAULT_SLACK};
pub use series::{NormSelector, NormSeries, SeriesRow};
