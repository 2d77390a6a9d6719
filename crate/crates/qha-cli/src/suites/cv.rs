//! Schatten boundedness through the trace-class smoothing kernel: the
//! forward and reverse norm estimates over a mixed symbol/operator
//! family, the smoothing factorization in both directions, and stability
//! of the kernel's trace norm under grid refinement.

use super::echo_config;
use crate::SuiteConfig;
use qha_core::convolution::{factorization_defect, reverse_factorization_defect};
use qha_core::samples::{derive_seed, random_band_limited, random_smoothed_operator, rng};
use qha_core::symbol::Symbol;
use qha_core::{
    cordes_kernel, cv_bound, derivative_table, make_symbol, op_weyl, reverse_cv_bound,
    CordesKernel, DerivativeScheme, NormReport, OperatorRep, PhaseGrid, ReportEntry, SymbolFamily,
};

const ANCHOR: &str = "schatten-bounds";

fn symbol_family(grid: &PhaseGrid, seed: u64) -> qha_core::Result<Vec<Symbol>> {
    let mut out = Vec::new();
    for (center, width) in [
        (vec![0.0, 0.0], 1.0),
        (vec![0.8, -0.4], 0.7),
        (vec![-0.5, 0.6], 1.4),
    ] {
        out.push(make_symbol(grid, &SymbolFamily::Gaussian { center, width })?);
    }
    let mut r = rng(derive_seed(seed, "cv-symbols"));
    for _ in 0..3 {
        out.push(random_band_limited(grid, &mut r, 2, 1.0, true));
    }
    Ok(out)
}

fn operator_family(
    grid: &PhaseGrid,
    symbols: &[Symbol],
    seed: u64,
) -> Vec<OperatorRep> {
    let mut out: Vec<OperatorRep> = symbols.iter().take(3).map(op_weyl).collect();
    let mut r = rng(derive_seed(seed, "cv-operators"));
    for _ in 0..2 {
        out.push(random_smoothed_operator(grid, &mut r, 2, 1.0));
    }
    out
}

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let mut report = NormReport::new("cv");
    echo_config(&mut report, cfg);

    let fine = PhaseGrid::new(1, 64, cfg.l)?;
    let coarse = PhaseGrid::new(1, 32, cfg.l)?;
    let kernel: CordesKernel = cordes_kernel(&fine)?;
    let kernel_coarse = cordes_kernel(&coarse)?;

    let symbols = symbol_family(&fine, cfg.seed)?;
    let operators = operator_family(&fine, &symbols, cfg.seed);

    // Forward estimate: Schatten norm of the quantization against the
    // kernel-certified bound, for the whole family and both exponents.
    for p in [1.0_f64, 2.0] {
        let mut all_pass = true;
        let mut worst = 0.0_f64;
        for f in &symbols {
            let r = cv_bound(f, p, &kernel)?;
            all_pass &= r.pass;
            worst = worst.max(r.ratio);
        }
        let name = format!("forward-bound-all-pass-p{}", p as u32);
        report.push(ReportEntry::boolean(&name, ANCHOR, all_pass));
        let name = format!("forward-bound-worst-ratio-p{}", p as u32);
        report.push(ReportEntry::measured(&name, ANCHOR, worst));
    }

    // Reverse estimate: symbol norm of an operator against its derivative
    // table, through the same kernel.
    let need = 2 * fine.d() as u32;
    let tables: Vec<_> = operators
        .iter()
        .map(|a| derivative_table(a, need, DerivativeScheme::Commutator))
        .collect::<qha_core::Result<_>>()?;
    for p in [1.0_f64, 2.0] {
        let mut all_pass = true;
        let mut worst = 0.0_f64;
        for (a, table) in operators.iter().zip(&tables) {
            let r = reverse_cv_bound(a, p, &kernel, table)?;
            all_pass &= r.pass;
            worst = worst.max(r.ratio);
        }
        let name = format!("reverse-bound-all-pass-p{}", p as u32);
        report.push(ReportEntry::boolean(&name, ANCHOR, all_pass));
        let name = format!("reverse-bound-worst-ratio-p{}", p as u32);
        report.push(ReportEntry::measured(&name, ANCHOR, worst));
    }

    // The smoothing factorization holds in both directions.
    let mut worst = 0.0_f64;
    for f in &symbols {
        worst = worst.max(factorization_defect(f, &kernel)?);
    }
    let name = "smoothing-factorization-defect";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-5)));

    let mut worst = 0.0_f64;
    for a in &operators {
        worst = worst.max(reverse_factorization_defect(a, &kernel)?);
    }
    let name = "reverse-factorization-defect";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-5)));

    // Kernel diagnostics: trace norm, refinement stability, symmetry.
    report.push(ReportEntry::measured("kernel-trace-norm", ANCHOR, kernel.trace_norm));
    let name = "kernel-trace-refinement-stability";
    let defect = (kernel_coarse.trace_norm / kernel.trace_norm - 1.0).abs();
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 0.1)));
    let name = "kernel-selfadjoint-defect";
    let defect = kernel.selfadjoint_defect();
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-12)));

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
