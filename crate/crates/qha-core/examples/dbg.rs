use qha_core::analytic::symbol_norm_map;
use qha_core::{make_symbol, PhaseGrid, SymbolFamily};
use std::f64::consts::{FRAC_PI_4, PI};

fn main() {
    let grid = PhaseGrid::new(1, 64, 4.0 * PI).unwrap();
    let f = make_symbol(&grid, &SymbolFamily::CosSin { kx: 1.0, kxi: FRAC_PI_4 }).unwrap();
    let norms = symbol_norm_map(&f, 8).unwrap();
    let mut per_order = vec![(0.0f64, vec![0u32, 0u32]); 9];
    for (b, n) in &norms {
        let expect = FRAC_PI_4.powi(b.0[1] as i32);
        let diff = (n - expect).abs();
        let slot = &mut per_order[b.order() as usize];
        if diff > slot.0 {
            *slot = (diff, b.0.clone());
        }
    }
    for (k, (diff, beta)) in per_order.iter().enumerate() {
        println!("order {k}: worst diff {diff:.3e} at {beta:?}");
    }
}
