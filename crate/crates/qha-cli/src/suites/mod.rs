//! The individual verification suites.
//!
//! Every suite follows the same shape: build the configured grid (or the
//! pinned grids the checks need), measure a list of named defects, and
//! return them in a [`NormReport`](qha_core::NormReport) stamped with the
//! configuration echo and wall time.

pub mod algebra;
pub mod analytic;
pub mod calculus;
pub mod cv;
pub mod finite;
pub mod fourier;
pub mod quantize;
pub mod stft;

use crate::SuiteConfig;
use qha_core::{NormReport, PhaseGrid};

/// The continuum grid described by the run configuration.
pub(crate) fn cfg_grid(cfg: &SuiteConfig) -> qha_core::Result<PhaseGrid> {
    PhaseGrid::new(cfg.d, cfg.n, cfg.l)
}

/// Stamps the shared configuration fields into a report.
pub(crate) fn echo_config(report: &mut NormReport, cfg: &SuiteConfig) {
    report.set_config("d", cfg.d);
    report.set_config("n", cfg.n);
    report.set_config("L", cfg.l);
    report.set_config("seed", cfg.seed);
    report.set_config("workers", cfg.workers);
}

/// Relative defect, guarded against a vanishing reference scale.
pub(crate) fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1e-300)
}
