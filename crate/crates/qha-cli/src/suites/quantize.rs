//! Quantization: the identity symbol, symbol round trips, the ordering
//! transform between quantization schemes, and a direct kernel-quadrature
//! oracle evaluated on a small pinned grid.

use super::{cfg_grid, echo_config, rel};
use crate::SuiteConfig;
use num_complex::Complex64 as C64;
use qha_core::fourier::fourier_sigma;
use qha_core::samples::{derive_seed, random_band_limited, rng};
use qha_core::symbol::Symbol;
use qha_core::{
    make_symbol, n_tau, op_tau, op_weyl, symbol_of, NormReport, OperatorRep, PhaseGrid,
    ReportEntry, SymbolFamily,
};
use std::f64::consts::PI;

const ANCHOR: &str = "quantization";

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let grid = cfg_grid(cfg)?;
    let mut report = NormReport::new("quantize");
    echo_config(&mut report, cfg);

    // Quantizing the constant symbol 1 gives the identity operator.
    let one = Symbol::constant(&grid, C64::new(1.0, 0.0));
    let name = "unit-symbol-identity";
    let defect = op_weyl(&one).max_abs_diff(&OperatorRep::identity(&grid));
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-8)));

    // Quantize-then-read-back returns the symbol, for every ordering.
    let kmax = (cfg.n as i64 / 2 - 1).clamp(1, 5);
    let mut r = rng(derive_seed(cfg.seed, "quantize-roundtrip"));
    let f = random_band_limited(&grid, &mut r, kmax, 1.5, false);
    let scale = f.linf_norm();
    let mut worst = 0.0_f64;
    for tau in [0.0, 0.25, 0.5, 1.0] {
        let back = symbol_of(&op_tau(&f, tau), tau);
        worst = worst.max(rel(back.max_abs_diff(&f), scale));
    }
    let name = "symbol-roundtrip";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-8)));

    // The ordering transform moves a symbol between quantization schemes:
    // quantizing the transformed symbol in scheme tau matches quantizing
    // the original symbol in scheme 0.
    let g = make_symbol(&grid, &SymbolFamily::Gaussian { center: vec![0.4, -0.3], width: 1.0 })?;
    let reference = op_tau(&g, 0.0);
    let scale = reference.op_norm();
    for (label, tau) in [("neg-half", -0.5_f64), ("quarter", 0.25), ("one", 1.0)] {
        let moved = op_tau(&n_tau(&g, tau), tau);
        let name = format!("ordering-transform-tau-{label}");
        let defect = rel(moved.max_abs_diff(&reference), scale);
        let tol = cfg.tol(&name, 1e-8);
        report.push(ReportEntry::defect(&name, ANCHOR, defect, tol));
    }

    // Direct kernel quadrature on a small pinned grid: the quantized
    // matrix must match the midpoint-rule integral of the symbol against
    // the separation phase, evaluated through a position-refined copy.
    let pin = PhaseGrid::new(1, 16, 4.0 * PI)?;
    let probe = make_symbol(&pin, &SymbolFamily::Gaussian { center: vec![0.3, -0.2], width: 1.0 })?;
    let name = "kernel-quadrature-gaussian";
    let defect = kernel_quadrature_defect(&probe)?;
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-6)));

    let mut r = rng(derive_seed(cfg.seed, "quantize-quadrature"));
    let probe = random_band_limited(&pin, &mut r, 3, 1.5, false);
    let name = "kernel-quadrature-band-limited";
    let defect = kernel_quadrature_defect(&probe)?;
    report.push(ReportEntry::defect(name, ANCHOR, defect, cfg.tol(name, 1e-6)));

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Relative disagreement between `op_weyl(f)` and a direct quadrature of
/// the continuum Weyl kernel
///
/// ```text
/// K(x, y) = (2π)^{-d} ∫ f((x+y)/2, ξ) e^{iξ·(x−y)} dξ.
/// ```
///
/// The midpoint `(x+y)/2` falls between grid nodes, so the symbol is first
/// moved to a grid with doubled position resolution by zero-padded
/// spectral interpolation.  The frequency integral becomes `ω^d` times a
/// sum over the frequency band, and the matrix entry carries the usual
/// `h^d` kernel weight, so the total prefactor is `(hω/2π)^d = n^{-d}`.
/// Midpoints are taken along the reduced separation representative, which
/// reproduces the wrap branch of half-step displacements.
fn kernel_quadrature_defect(f: &Symbol) -> qha_core::Result<f64> {
    let grid = f.grid().clone();
    let d = grid.d();
    let n = grid.n();
    let dim = grid.hilbert_dim();
    let fine = PhaseGrid::new(d, 2 * n, grid.l())?;

    // Re-express f on the fine grid: each spectral coefficient keeps its
    // continuum frequency, which doubles the position-axis index, and the
    // inverse-transform prefactor changes by 2^d per axis pair.
    let hat = fourier_sigma(f);
    let boost = C64::new(2.0_f64.powi(d as i32), 0.0);
    let mut fine_vals = vec![C64::new(0.0, 0.0); fine.len()];
    for j in 0..grid.len() {
        let multi = grid.multi_index(j);
        let mut fidx = Vec::with_capacity(2 * d);
        for (ax, &i) in multi.iter().enumerate() {
            let s = grid.signed_index(i);
            fidx.push(fine.wrap_index(if ax < d { 2 * s } else { s }));
        }
        fine_vals[fine.flat_index(&fidx)] = hat.value(j) * boost;
    }
    let f_fine = fourier_sigma(&Symbol::new(fine.clone(), fine_vals)?);

    let a = op_weyl(&f);
    let measure = 1.0 / dim as f64;
    let freq_bins = dim;
    let mut worst = 0.0_f64;
    for t in 0..dim {
        let td = pos_digits(n, d, t);
        for s in 0..dim {
            let sd = pos_digits(n, d, s);
            // Per axis: reduced separation representative and the fine
            // index of the midpoint along that representative.
            let mut sep = vec![0i64; d];
            let mut fidx = vec![0usize; 2 * d];
            for ax in 0..d {
                let st = grid.signed_index(td[ax]);
                let ss = grid.signed_index(sd[ax]);
                let p0 = grid.signed_index((st - ss).rem_euclid(n as i64) as usize);
                sep[ax] = p0;
                fidx[ax] = fine.wrap_index(2 * st - p0);
            }
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..freq_bins {
                let kd = pos_digits(n, d, k);
                let mut dot = 0i64;
                for ax in 0..d {
                    let kt = grid.signed_index(kd[ax]);
                    fidx[d + ax] = fine.wrap_index(kt);
                    dot += kt * sep[ax];
                }
                let phase = 2.0 * PI * dot as f64 / n as f64;
                acc += f_fine.value(fine.flat_index(&fidx)) * C64::from_polar(1.0, phase);
            }
            let diff = (a.matrix()[(t, s)] - acc * measure).norm();
            worst = worst.max(diff);
        }
    }
    Ok(rel(worst, a.op_norm()))
}

/// Row-major digits of a position index: `d` digits base `n`, first axis
/// most significant.
fn pos_digits(n: usize, d: usize, mut t: usize) -> Vec<usize> {
    let mut out = vec![0usize; d];
    for ax in (0..d).rev() {
        out[ax] = t % n;
        t /= n;
    }
    out
}
