//! Weyl-system algebra: the composition law with its scalar multiplier,
//! the shift group law on operators, and unitarity of the displacement
//! family.

use super::{cfg_grid, echo_config, rel};
use crate::SuiteConfig;
use qha_core::samples::{derive_seed, random_lattice_point, random_matrix_operator, random_point, rng};
use qha_core::{weyl_multiplier, weyl_operator, NormReport, OperatorRep, ReportEntry};

const ANCHOR: &str = "weyl-system";

pub fn run(cfg: &SuiteConfig) -> qha_core::Result<NormReport> {
    let start = std::time::Instant::now();
    let grid = cfg_grid(cfg)?;
    let mut report = NormReport::new("algebra");
    echo_config(&mut report, cfg);

    // Composition law: on lattice points the product of two displacement
    // operators is the displacement of the sum times a scalar phase.
    let mut r = rng(derive_seed(cfg.seed, "algebra-ccr"));
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let z = random_lattice_point(&grid, &mut r);
        let w = random_lattice_point(&grid, &mut r);
        let lhs = weyl_operator(&grid, &z, 0.5).compose(&weyl_operator(&grid, &w, 0.5))?;
        let rhs = weyl_operator(&grid, &z.add(&w), 0.5).scale(weyl_multiplier(0.5, &z, &w));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    let name = "composition-law-random-pairs";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-9)));

    // Shift group law: translating an operator twice equals translating
    // once by the sum, for arbitrary real displacements.
    let mut r = rng(derive_seed(cfg.seed, "algebra-group-law"));
    let a = random_matrix_operator(&grid, &mut r);
    let scale = a.op_norm();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let z = random_point(&grid, &mut r);
        let w = random_point(&grid, &mut r);
        let twice = qha_core::op_shift(&qha_core::op_shift(&a, &z), &w);
        let once = qha_core::op_shift(&a, &z.add(&w));
        worst = worst.max(rel(twice.max_abs_diff(&once), scale));
    }
    let name = "shift-group-law";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-9)));

    // Displacements are unitary for every real phase-space point.
    let mut r = rng(derive_seed(cfg.seed, "algebra-unitarity"));
    let id = OperatorRep::identity(&grid);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let z = random_point(&grid, &mut r);
        let w = weyl_operator(&grid, &z, 0.5);
        worst = worst.max(w.compose(&w.adjoint())?.max_abs_diff(&id));
    }
    let name = "displacement-unitarity";
    report.push(ReportEntry::defect(name, ANCHOR, worst, cfg.tol(name, 1e-10)));

    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
