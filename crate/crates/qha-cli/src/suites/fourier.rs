//! Spectral transforms: involution of the symplectic transform, the
//! shift/modulation intertwining of the operator transform, measure
//! calibration, and the Plancherel identity.  At small `n` the FFT-based
//! paths are additionally cross-checked against naive quadratic sums.

use super::{cfg_grid, echo_config, rel};
use crate::SuiteConfig;
use num_complex::Complex64 as C64;
use qha_core::fourier::{
    calibrate_weyl_measure, fourier_sigma, fourier_weyl, fourier_weyl_reference, plancherel_defect,
};
use qha_core::samples::{derive_seed, random_band_limited, random_matrix_operator, rng};
use qha_core::symbol::Symbol;
use qha_core::{
    modulate_function, op_shift, op_weyl, symplectic_form, NormReport, ReportEntry,
};
use std::f64::consts::PI;

const ANCHOR: &str = "spectral-transform";

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let grid = cfg_grid(cfg)?;
    let mut report = NormReport::new("fourier");
    echo_config(&mut report, cfg);

    let kmax = (cfg.n as i64 / 2 - 1).clamp(1, 5);
    let mut r = rng(derive_seed(cfg.seed, "fourier-symbols"));
    let f = random_band_limited(&grid, &mut r, kmax, 1.5, false);

    // The symplectic transform is an involution.
    let twice = fourier_sigma(&fourier_sigma(&f));
    let name = "sigma-involution";
    let defect = rel(twice.max_abs_diff(&f), f.linf_norm());
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-10)));

    // Translating an operator modulates its spectral transform.
    let mut r = rng(derive_seed(cfg.seed, "fourier-intertwining"));
    let a = random_matrix_operator(&grid, &mut r);
    let ga = fourier_weyl(&a, 0.5);
    let scale = ga.linf_norm();
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let z = qha_core::samples::random_lattice_point(&grid, &mut r);
        let shifted = fourier_weyl(&op_shift(&a, &z), 0.5);
        let modulated = modulate_function(&ga, &z);
        worst = worst.max(rel(shifted.max_abs_diff(&modulated), scale));
    }
    let name = "shift-modulation-intertwining";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-9)));

    // The operator transform inverts quantization: the transform of the
    // quantized symbol is the symplectic transform of the symbol.
    let hat = fourier_sigma(&f);
    let through_op = fourier_weyl(&op_weyl(&f), 0.5);
    let name = "transform-quantization-link";
    let defect = rel(through_op.max_abs_diff(&hat), hat.linf_norm());
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-9)));

    // Empirical measure calibration recovers (2π)^(-d).
    let c_w = calibrate_weyl_measure(&grid, 4, derive_seed(cfg.seed, "fourier-calibration"));
    let name = "measure-calibration-defect";
    let defect = (c_w * (2.0 * PI).powi(grid.d() as i32) - 1.0).abs();
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-9)));

    // Plancherel holds for arbitrary matrices after that calibration.
    let mut r = rng(derive_seed(cfg.seed, "fourier-plancherel"));
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        worst = worst.max(plancherel_defect(&random_matrix_operator(&grid, &mut r)));
    }
    let name = "plancherel-relative-defect";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-8)));

    // At small n, cross-check both FFT paths against naive quadratic sums.
    if cfg.n <= 16 {
        let naive = naive_sigma(&f);
        let fast = fourier_sigma(&f);
        let name = "sigma-naive-agreement";
        let defect = rel(fast.max_abs_diff(&naive), naive.linf_norm());
        report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-10)));

        let mut r = rng(derive_seed(cfg.seed, "fourier-naive"));
        let b = random_matrix_operator(&grid, &mut r);
        let mut worst = 0.0_f64;
        for tau in [0.0, 0.5, 1.0] {
            let fast = fourier_weyl(&b, tau);
            let slow = fourier_weyl_reference(&b, tau);
            worst = worst.max(rel(fast.max_abs_diff(&slow), slow.linf_norm()));
        }
        let name = "weyl-transform-naive-agreement";
        report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-10)));
    }

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Direct `O(N²)` evaluation of the symplectic transform:
/// `(F_σ f)(w) = n^{-d} Σ_z f(z) e^{iσ(z, w)}`.
fn naive_sigma(f: &Symbol) -> Symbol {
    let grid = f.grid().clone();
    let measure = 1.0 / grid.hilbert_dim() as f64;
    Symbol::from_fn(&grid, |w| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..grid.len() {
            let z = grid.point(i);
            acc += f.value(i) * C64::from_polar(1.0, symplectic_form(&z, w));
        }
        acc * measure
    })
}
