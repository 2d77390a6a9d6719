//! Operator derivatives: agreement of the finite-difference and
//! commutator schemes, second-order convergence of the step, the
//! derivation rules (product, inverse, quotient), and the sign-carrying
//! intertwining between derivatives and quantization.

use super::{cfg_grid, echo_config, rel};
use crate::SuiteConfig;
use num_complex::Complex64 as C64;
use qha_core::calculus::{
    derivative_axis, symbol_derivative_multi, verify_derivative_algebra, FdConfig,
};
use qha_core::{
    derivative, make_symbol, op_weyl, DerivativeScheme, MultiIndex, NormReport, OperatorRep,
    ReportEntry, SymbolFamily,
};

const ANCHOR: &str = "derivative-calculus";

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let grid = cfg_grid(cfg)?;
    let mut report = NormReport::new("calculus");
    echo_config(&mut report, cfg);

    let f = make_symbol(&grid, &SymbolFamily::Gaussian { center: vec![0.4, -0.3], width: 1.0 })?;
    let a = op_weyl(&f);

    // The two derivative schemes agree on every axis.
    let fd = DerivativeScheme::FiniteDifference(FdConfig {
        step_fraction: 1e-3,
        richardson_levels: 1,
    });
    let mut worst = 0.0_f64;
    for axis in 0..grid.axes() {
        let exact = derivative_axis(&a, axis, DerivativeScheme::Commutator)?;
        let approx = derivative_axis(&a, axis, fd)?;
        worst = worst.max(rel(approx.max_abs_diff(&exact), exact.op_norm()));
    }
    let name = "finite-difference-vs-commutator";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-5)));

    // Halving the plain central-difference step divides the error by
    // about four (second-order truncation).
    let exact = derivative_axis(&a, 0, DerivativeScheme::Commutator)?;
    let err = |frac: f64| -> qha_core::Result<f64> {
        let scheme = DerivativeScheme::FiniteDifference(FdConfig {
            step_fraction: frac,
            richardson_levels: 0,
        });
        Ok(derivative_axis(&a, 0, scheme)?.max_abs_diff(&exact))
    };
    let ratio = err(1e-2)? / err(5e-3)?;
    report.push(ReportEntry::measured("step-halving-ratio", ANCHOR, ratio));
    let name = "step-halving-is-second-order";
    report.push(ReportEntry::boolean(name, ANCHOR, (3.0..=5.0).contains(&ratio)));

    // Product, inverse, and quotient rules under both schemes.
    let b = OperatorRep::identity(&grid).add(&a.scale(C64::new(0.3, 0.0)))?;
    for (label, scheme) in [
        ("commutator", DerivativeScheme::Commutator),
        ("finite-difference", fd),
    ] {
        let defects = verify_derivative_algebra(&a, &b, scheme)?;
        for rule in ["product_rule", "inverse_rule", "quotient_rule"] {
            let worst = defects
                .iter()
                .filter(|d| d.name.starts_with(rule))
                .map(|d| d.defect)
                .fold(0.0_f64, f64::max);
            let name = format!("{}-{label}", rule.replace('_', "-"));
            let tol = cfg.tol(&name, 1e-5);
            report.push(ReportEntry::defect(&name, ANCHOR, worst, tol));
        }
    }

    // Differentiating the quantized operator equals quantizing the
    // differentiated symbol, up to the sign (-1)^|alpha|.
    for order in 1..=3u32 {
        let mut worst = 0.0_f64;
        for alpha in MultiIndex::all_upto(grid.axes(), order) {
            if alpha.order() != order {
                continue;
            }
            let lhs = derivative(&a, &alpha, DerivativeScheme::Commutator)?;
            let sign = C64::new((-1.0_f64).powi(order as i32), 0.0);
            let rhs = op_weyl(&symbol_derivative_multi(&f, &alpha)).scale(sign);
            worst = worst.max(rel(lhs.max_abs_diff(&rhs), rhs.op_norm()));
        }
        let name = format!("derivative-quantization-intertwining-order-{order}");
        let tol = cfg.tol(&name, 1e-5);
        report.push(ReportEntry::defect(&name, ANCHOR, worst, tol));
    }

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
