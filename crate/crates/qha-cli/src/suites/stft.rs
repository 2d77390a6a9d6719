//! Modulation-space embeddings: the chain of norm comparisons
//!
//! ```text
//! sup-norm  ≤ C1 · modulation  ≤ C1·C2 · smooth (order 2d+1)
//! op-norm   ≤ C3 · modulation  ≤ C3·C4 · operator-smooth (order 2d+1)
//! ```
//!
//! measured over a fixed ten-symbol family that represents the same
//! continuum functions on two resolutions, so the fitted constants can be
//! compared across grids.  The function-side smooth bound is additionally
//! checked against the certified window-dependent constant.

use super::echo_config;
use crate::SuiteConfig;
use qha_core::calculus::symbol_derivative_multi;
use qha_core::samples::{band_limited_coefficients, derive_seed, rng, symbol_from_plane_wave_coefficients};
use qha_core::symbol::Symbol;
use qha_core::{
    cb_embedding_bound, derivative_table, m_inf1_norm, m_inf1_norm_operator, make_symbol, op_weyl,
    DerivativeScheme, MultiIndex, NormReport, PhaseGrid, ReportEntry, StftConfig, SymbolFamily,
    WindowSpec,
};
use rayon::prelude::*;

const ANCHOR: &str = "modulation-embedding";

/// Per-symbol norms entering the embedding constants.
struct Metrics {
    sup: f64,
    modulation: f64,
    smooth: f64,
    op_norm: f64,
    op_modulation: f64,
    op_smooth: f64,
}

/// The grid-independent test family: Gaussians, bumps, and band-limited
/// draws whose plane-wave frequencies are fixed in continuum units.
fn family(grid: &PhaseGrid, scale: i64, seed: u64) -> qha_core::Result<Vec<Symbol>> {
    let mut out = Vec::new();
    for (center, width) in [
        (vec![0.0, 0.0], 1.0),
        (vec![1.0, -0.5], 0.8),
        (vec![-1.2, 0.7], 1.3),
        (vec![0.6, 1.1], 1.1),
    ] {
        out.push(make_symbol(grid, &SymbolFamily::Gaussian { center, width })?);
    }
    for (center, radius) in [(vec![0.0, 0.0], 3.0), (vec![1.5, -1.0], 2.5)] {
        out.push(make_symbol(grid, &SymbolFamily::Bump { center, radius })?);
    }
    let mut r = rng(derive_seed(seed, "stft-family"));
    for _ in 0..4 {
        let coeffs = band_limited_coefficients(grid.axes(), &mut r, 3, 1.5, true);
        out.push(symbol_from_plane_wave_coefficients(grid, scale, &coeffs)?);
    }
    Ok(out)
}

fn metrics(
    f: &Symbol,
    symbol_window: &WindowSpec,
    projector_window: &WindowSpec,
    config: &StftConfig,
    smooth_order: u32,
) -> qha_core::Result<Metrics> {
    let sup = f.linf_norm();
    let modulation = m_inf1_norm(f, symbol_window, config)?;
    let smooth = MultiIndex::all_upto(f.grid().axes(), smooth_order)
        .iter()
        .map(|beta| symbol_derivative_multi(f, beta).linf_norm())
        .fold(0.0_f64, f64::max);
    let a = op_weyl(f);
    let op_norm = a.op_norm();
    let op_modulation = m_inf1_norm_operator(&a, projector_window, config)?;
    let table = derivative_table(&a, smooth_order, DerivativeScheme::Commutator)?;
    let op_smooth = table.ck_norm(smooth_order);
    Ok(Metrics { sup, modulation, smooth, op_norm, op_modulation, op_smooth })
}

/// The four embedding constants over one family: each is the largest
/// ratio of the dominated norm to the dominating one.
fn constants(all: &[Metrics]) -> [f64; 4] {
    let fold = |f: &dyn Fn(&Metrics) -> f64| all.iter().map(|m| f(m)).fold(0.0_f64, f64::max);
    [
        fold(&|m| m.sup / m.modulation),
        fold(&|m| m.modulation / m.smooth),
        fold(&|m| m.op_norm / m.op_modulation),
        fold(&|m| m.op_modulation / m.op_smooth),
    ]
}

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let mut report = NormReport::new("stft");
    echo_config(&mut report, cfg);

    let symbol_window = WindowSpec::GaussianSymbol { center: vec![0.0, 0.0], width: 1.0 };
    let projector_window = WindowSpec::GaussianProjector { center: vec![0.0], width: 1.0 };
    let config = StftConfig::default();

    let mut per_grid = Vec::new();
    for n in [32usize, 64] {
        let grid = PhaseGrid::new(1, n, cfg.l)?;
        let smooth_order = 2 * grid.d() as u32 + 1;
        let fam = family(&grid, n as i64 / 32, cfg.seed)?;
        let results: Vec<qha_core::Result<Metrics>> = fam
            .par_iter()
            .map(|f| metrics(f, &symbol_window, &projector_window, &config, smooth_order))
            .collect();
        let mut all = Vec::with_capacity(results.len());
        for r in results {
            all.push(r?);
        }
        per_grid.push((grid, constants(&all)));
    }
    let coarse = &per_grid[0].1;
    let (fine_grid, fine) = &per_grid[1];

    let names = [
        "embedding-constant-sup-vs-modulation",
        "embedding-constant-modulation-vs-smooth",
        "embedding-constant-opnorm-vs-modulation",
        "embedding-constant-modulation-vs-operator-smooth",
    ];
    for (name, value) in names.iter().zip(fine.iter()) {
        report.push(ReportEntry::measured(name, ANCHOR, *value));
    }
    // The constants must be resolution-stable within twenty percent.
    for (name, (c, f)) in names.iter().zip(coarse.iter().zip(fine.iter())) {
        let stab_name = format!("{name}-stability");
        let defect = (c / f - 1.0).abs();
        let tol = cfg.tol(&stab_name, 0.2);
        report.push(ReportEntry::defect(&stab_name, ANCHOR, defect, tol));
    }
    // The measured modulation-vs-smooth constant stays below the certified
    // window-dependent bound.
    let win_symbol = symbol_window.symbol_window(fine_grid)?;
    let certified = cb_embedding_bound(&win_symbol, 2 * fine_grid.d() as u32 + 1);
    report.push(ReportEntry::measured("certified-smooth-bound", ANCHOR, certified));
    let name = "modulation-embedding-certified";
    report.push(ReportEntry::boolean(name, ANCHOR, fine[1] <= certified));

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
