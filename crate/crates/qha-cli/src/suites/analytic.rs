//! Factorial-decay certificates and series inversion.
//!
//! The product symbol `cos(kx·x)·sin(kξ·ξ)` is the reference example: its
//! derivative sup norms follow the closed form `|kx|^p·|kξ|^q`, because
//! each derivative rotates one factor by a quarter period and rescales it
//! by its rate, and the separable factors attain their sups at a common
//! point.  At unit rates every norm is exactly one, so the fitted
//! certificate is `C = 1` at radius `R = 1`.
//!
//! The grids here are pinned, not taken from the run configuration: the
//! lattice arm needs both factor periods to divide the box and the
//! frequency band so that the closed form holds on grid points, and the
//! wide-box arm needs enough room for a Gaussian to decay at the edge.

use super::echo_config;
use crate::SuiteConfig;
use num_complex::Complex64 as C64;
use qha_core::analytic::{
    analyticity_fit, analyticity_fit_operator, compose_series, invert_series, series_coefficients,
    symbol_norm_map,
};
use qha_core::{
    derivative_table, make_symbol, op_weyl, DerivativeScheme, MultiIndex, NormReport, OperatorRep,
    PhaseGrid, ReportEntry, SymbolFamily,
};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

const ANCHOR: &str = "analyticity";
const SERIES_ANCHOR: &str = "series-inversion";

/// Closed-form derivative sup norms of `cos(kx·x)·sin(kξ·ξ)` on the
/// plane: `‖∂^(p,q)‖_∞ = |kx|^p·|kξ|^q`.
fn cos_sin_sup_norms(kx: f64, kxi: f64, order: u32) -> BTreeMap<MultiIndex, f64> {
    let mut map = BTreeMap::new();
    for beta in MultiIndex::all_upto(2, order) {
        let (p, q) = (beta.0[0], beta.0[1]);
        map.insert(beta, kx.abs().powi(p as i32) * kxi.abs().powi(q as i32));
    }
    map
}

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let mut report = NormReport::new("analytic");
    echo_config(&mut report, cfg);

    // Unit-rate closed form: every derivative sup norm equals one, and the
    // fit certifies constant 1 at radius 1.
    let unit = cos_sin_sup_norms(1.0, 1.0, 8);
    let name = "example-sup-norm-defect";
    let defect = unit.values().map(|v| (v - 1.0).abs()).fold(0.0_f64, f64::max);
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-10)));
    let fit = analyticity_fit(&unit, &[0.25, 0.5, 0.75, 1.0])?;
    let name = "example-fit-radius-defect";
    report.push(ReportEntry::defect(name, ANCHOR, (fit.r - 1.0).abs(), cfg.tol(name, 1e-12)));
    let name = "example-fit-constant-defect";
    report.push(ReportEntry::defect(name, ANCHOR, (fit.c - 1.0).abs(), cfg.tol(name, 1e-12)));

    // Lattice arm: on (1, 64, 16) the rates kx = 2ω = π/4 and kξ = 1 are
    // both grid-resolved (cos has period 8 | 16, sin has period 2π | 8π,
    // and both quarter-period points are grid nodes), so measured lattice
    // norms reproduce the closed form.  Spectral differentiation
    // multiplies band-edge rounding noise by up to 4π (position) or 8
    // (frequency) per order, hence the looser bar at high orders.
    let grid = PhaseGrid::new(1, 64, 16.0)?;
    let f = make_symbol(&grid, &SymbolFamily::CosSin { kx: FRAC_PI_4, kxi: 1.0 })?;
    let measured = symbol_norm_map(&f, 8)?;
    let closed = cos_sin_sup_norms(FRAC_PI_4, 1.0, 8);
    let mut low = 0.0_f64;
    let mut high = 0.0_f64;
    for (beta, norm) in &measured {
        let diff = (norm - closed[beta]).abs();
        if beta.order() <= 5 {
            low = low.max(diff);
        } else {
            high = high.max(diff);
        }
    }
    let name = "lattice-sup-norm-defect-low-orders";
    report.push(ReportEntry::defect(name, ANCHOR, low, cfg.tol(name, 1e-10)));
    let name = "lattice-sup-norm-defect-high-orders";
    report.push(ReportEntry::defect(name, ANCHOR, high, cfg.tol(name, 1e-7)));

    let r_grid = [0.05, 0.1, 0.15, 0.25, 0.5, 1.0];
    let sym_fit = analyticity_fit(&measured, &r_grid)?;
    let name = "lattice-fit-radius-defect";
    report.push(ReportEntry::defect(name, ANCHOR, (sym_fit.r - 1.0).abs(), cfg.tol(name, 1e-12)));
    let name = "lattice-fit-constant-defect";
    report.push(ReportEntry::defect(name, ANCHOR, (sym_fit.c - 1.0).abs(), cfg.tol(name, 1e-9)));

    // Quantizing the example keeps a positive radius.  The plane-wave
    // kernel does not decay at the box edge, so the flow generator's wrap
    // term enters its derivatives at full strength and the fitted radius
    // shrinks to the wrap-limited scale ~5/Ω; the certificate still
    // exists and stays above the quadratic safety floor.
    let a = op_weyl(&f);
    let table = derivative_table(&a, 6, DerivativeScheme::Commutator)?;
    let op_fit = analyticity_fit_operator(&table, &r_grid)?;
    report.push(ReportEntry::measured("quantized-fit-radius", ANCHOR, op_fit.r));
    let name = "quantized-fit-radius-positive";
    report.push(ReportEntry::boolean(name, ANCHOR, op_fit.r > 0.0));
    let name = "quantized-fit-keeps-safety-floor";
    let floor = 0.1 * sym_fit.r * sym_fit.r;
    report.push(ReportEntry::boolean(name, ANCHOR, op_fit.r >= floor));

    // A kernel that does decay at the box edge keeps the full radius
    // through quantization: wide box, centered Gaussian.
    let wide = PhaseGrid::new(1, 64, 20.0)?;
    let g = make_symbol(&wide, &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.5 })?;
    let wide_r_grid = [0.25, 0.5, 0.75, 1.0];
    let g_sym = analyticity_fit(&symbol_norm_map(&g, 8)?, &wide_r_grid)?;
    let g_table = derivative_table(&op_weyl(&g), 6, DerivativeScheme::Commutator)?;
    let g_op = analyticity_fit_operator(&g_table, &wide_r_grid)?;
    report.push(ReportEntry::measured("gaussian-symbol-fit-radius", ANCHOR, g_sym.r));
    report.push(ReportEntry::measured("gaussian-quantized-fit-radius", ANCHOR, g_op.r));
    let name = "gaussian-radius-preserved";
    report.push(ReportEntry::boolean(name, ANCHOR, g_op.r >= 0.5 * g_sym.r));

    // Series inversion: the coefficient series of the translation orbit
    // of A, formally inverted, composes with the original to the identity
    // series and matches the orbit series of the operator inverse.
    let small = PhaseGrid::new(1, 16, 8.0)?;
    let bump = make_symbol(&small, &SymbolFamily::Gaussian { center: vec![0.5, 0.25], width: 1.4 })?;
    let a = OperatorRep::identity(&small).add(&op_weyl(&bump).scale(C64::new(0.2, 0.0)))?;
    let series = series_coefficients(&a, 4)?;
    let inverse = invert_series(&series, 4)?;
    let composed = compose_series(&series, &inverse, 4)?;
    let id = OperatorRep::identity(&small);
    let mut worst = 0.0_f64;
    for (gamma, c) in &composed {
        let defect = if gamma.order() == 0 { c.max_abs_diff(&id) } else { c.op_norm() };
        worst = worst.max(defect);
    }
    let name = "series-inversion-composition-defect";
    report.push(ReportEntry::defect(name, SERIES_ANCHOR, worst, cfg.tol(name, 1e-8)));

    let direct = series_coefficients(&a.inverse()?, 4)?;
    let mut worst = 0.0_f64;
    for (beta, b) in &inverse {
        worst = worst.max(b.max_abs_diff(&direct[beta]));
    }
    let name = "series-inversion-direct-match";
    report.push(ReportEntry::defect(name, SERIES_ANCHOR, worst, cfg.tol(name, 1e-6)));

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
