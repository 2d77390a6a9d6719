//! Batch verification harness for the `qha-core` phase-space toolkit.
//!
//! Each suite exercises one slice of the library against named numerical
//! identities and returns a [`NormReport`] whose entries carry the measured
//! defect, the tolerance in force, and a verdict derived from the two.
//! The harness runs suites in a fixed canonical order inside a bounded
//! worker pool and writes one JSON or CSV report file per suite.
//!
//! Determinism contract: a fixed [`SuiteConfig`] (seed included) produces
//! bit-identical entry values on every run and for every worker count.
//! All random draws come from seeds derived off `SuiteConfig::seed`, and
//! every reduction over parallel work happens in a fixed sequential order.

pub mod suites;

use anyhow::Context;
use qha_core::NormReport;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// The verification suites, in canonical execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SuiteName {
    /// Weyl-system composition law, shift group law, unitarity.
    Algebra,
    /// Symplectic and operator spectral transforms: involution,
    /// intertwining, Plancherel calibration.
    Fourier,
    /// Quantization round trips, ordering transforms, kernel quadrature.
    Quantize,
    /// Operator derivatives: scheme agreement, derivation rules,
    /// intertwining with quantization.
    Calculus,
    /// Phase-space transform sampling and embedding constants.
    Stft,
    /// Schatten boundedness through the smoothing kernel.
    Cv,
    /// Exhaustive finite-lattice model checks at odd moduli.
    Finite,
    /// Factorial-decay fits and power-series inversion.
    Analytic,
}

impl SuiteName {
    /// Every suite in canonical order.
    pub fn all() -> [SuiteName; 8] {
        [
            SuiteName::Algebra,
            SuiteName::Fourier,
            SuiteName::Quantize,
            SuiteName::Calculus,
            SuiteName::Stft,
            SuiteName::Cv,
            SuiteName::Finite,
            SuiteName::Analytic,
        ]
    }

    /// Stable lowercase name used in CLI flags and report file names.
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Algebra => "algebra",
            SuiteName::Fourier => "fourier",
            SuiteName::Quantize => "quantize",
            SuiteName::Calculus => "calculus",
            SuiteName::Stft => "stft",
            SuiteName::Cv => "cv",
            SuiteName::Finite => "finite",
            SuiteName::Analytic => "analytic",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteName::all()
            .into_iter()
            .find(|name| name.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> =
                    SuiteName::all().iter().map(|n| n.as_str()).collect();
                format!("unknown suite {s:?}; valid names: {}", valid.join(", "))
            })
    }
}

/// On-disk report format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// One JSON document per suite.
    Json,
    /// One flat CSV table per suite.
    Csv,
}

impl ReportFormat {
    /// File extension for the format.
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?}; use json or csv")),
        }
    }
}

/// Run configuration shared by every suite.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Position-space dimension of the continuum grids.
    pub d: usize,
    /// Grid points per axis.
    pub n: usize,
    /// Position box length.
    pub l: f64,
    /// Odd moduli exercised by the finite suite.
    pub finite_moduli: Vec<u64>,
    /// Suites to run; empty means all, always in canonical order.
    pub suites: Vec<SuiteName>,
    /// Per-entry tolerance overrides, keyed by entry name.
    pub tolerances: BTreeMap<String, f64>,
    /// Report directory; `None` falls back to `$QHA_OUT`, then `qha-out`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads for the pool (0 = all available cores).
    pub workers: usize,
    /// Base RNG seed; all random draws derive from it.
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            d: 1,
            n: 64,
            l: 16.0,
            finite_moduli: vec![3, 5, 7],
            suites: Vec::new(),
            tolerances: BTreeMap::new(),
            out_dir: None,
            workers: 1,
            seed: 7,
        }
    }
}

impl SuiteConfig {
    /// Tolerance for a named entry, honoring any configured override.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// The suites this config selects, in canonical order and deduplicated.
    pub fn selected(&self) -> Vec<SuiteName> {
        if self.suites.is_empty() {
            SuiteName::all().to_vec()
        } else {
            SuiteName::all()
                .into_iter()
                .filter(|s| self.suites.contains(s))
                .collect()
        }
    }

    /// Output directory after applying the `QHA_OUT` fallback.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("QHA_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("qha-out"))
    }

    fn worker_threads(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
        } else {
            self.workers
        }
    }
}

/// Runs a single suite against the configuration.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    match name {
        SuiteName::Algebra => suites::algebra::run(cfg),
        SuiteName::Fourier => suites::fourier::run(cfg),
        SuiteName::Quantize => suites::quantize::run(cfg),
        SuiteName::Calculus => suites::calculus::run(cfg),
        SuiteName::Stft => suites::stft::run(cfg),
        SuiteName::Cv => suites::cv::run(cfg),
        SuiteName::Finite => suites::finite::run(cfg),
        SuiteName::Analytic => suites::analytic::run(cfg),
    }
}

/// Result of one suite execution: a report, or a description of why the
/// suite could not produce one (configuration error or panic).
pub struct SuiteRun {
    /// Which suite ran.
    pub name: SuiteName,
    /// The report, or the failure description.
    pub outcome: Result<NormReport, String>,
}

/// Runs the selected suites sequentially, each inside a worker pool of
/// `cfg.workers` threads.  A suite that errors or panics yields an `Err`
/// outcome but does not stop later suites, so partial results survive.
pub fn run_selected(cfg: &SuiteConfig) -> anyhow::Result<Vec<SuiteRun>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_threads())
        .build()
        .context("building the worker pool")?;
    let mut runs = Vec::new();
    for name in cfg.selected() {
        let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            pool.install(|| run_suite(name, cfg))
        }));
        let outcome = match caught {
            Ok(Ok(report)) => Ok(report),
            Ok(Err(err)) => Err(format!("suite error: {err}")),
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "opaque panic payload".into());
                Err(format!("suite panicked: {msg}"))
            }
        };
        runs.push(SuiteRun { name, outcome });
    }
    Ok(runs)
}

/// Writes one report as `<dir>/<suite>.<ext>`, creating the directory.
pub fn emit_report(
    report: &NormReport,
    format: ReportFormat,
    dir: &Path,
) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating report directory {}", dir.display()))?;
    let path = dir.join(format!("{}.{}", report.suite, format.extension()));
    let body = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    std::fs::write(&path, body)
        .with_context(|| format!("writing report {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip_through_strings() {
        for name in SuiteName::all() {
            assert_eq!(name.as_str().parse::<SuiteName>().unwrap(), name);
        }
        assert!("polkas".parse::<SuiteName>().is_err());
    }

    #[test]
    fn selection_keeps_canonical_order_and_dedupes() {
        let mut cfg = SuiteConfig::default();
        assert_eq!(cfg.selected(), SuiteName::all().to_vec());
        cfg.suites = vec![SuiteName::Finite, SuiteName::Algebra, SuiteName::Finite];
        assert_eq!(cfg.selected(), vec![SuiteName::Algebra, SuiteName::Finite]);
    }

    #[test]
    fn tolerance_overrides_take_effect() {
        let mut cfg = SuiteConfig::default();
        assert_eq!(cfg.tol("anything", 1e-9), 1e-9);
        cfg.tolerances.insert("anything".into(), 0.5);
        assert_eq!(cfg.tol("anything", 1e-9), 0.5);
    }

    #[test]
    fn report_files_land_in_the_requested_directory() {
        let dir = std::env::temp_dir().join(format!("qha-lib-test-{}", std::process::id()));
        let mut report = NormReport::new("demo");
        report.push(qha_core::ReportEntry::boolean("ok", "plumbing", true));
        let json = emit_report(&report, ReportFormat::Json, &dir).unwrap();
        let csv = emit_report(&report, ReportFormat::Csv, &dir).unwrap();
        assert!(json.ends_with("demo.json") && json.exists());
        assert!(csv.ends_with("demo.csv") && csv.exists());
        let parsed = NormReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(parsed.entries.len(), 1);
        std::fs::remove_dir_all(&dir).ok();
    }
}
