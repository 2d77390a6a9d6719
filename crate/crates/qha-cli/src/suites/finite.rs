//! Exhaustive checks of the finite cyclic model: every identity of the
//! finite Weyl system, transform, quantization, and convolution layer is
//! enumerated over the whole group for each configured odd modulus.

use super::echo_config;
use crate::SuiteConfig;
use qha_core::{exhaustive_verify, NormReport, ReportEntry};

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let mut report = NormReport::new("finite");
    echo_config(&mut report, cfg);
    let moduli: Vec<String> = cfg.finite_moduli.iter().map(|n| n.to_string()).collect();
    report.set_config("moduli", moduli.join(","));

    for &n in &cfg.finite_moduli {
        let inner = exhaustive_verify(n as usize)?;
        for e in inner.entries {
            report.push(ReportEntry { name: format!("n{n}-{}", e.name), ..e });
        }
    }

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
