//! Quantization maps between symbols and operators.
//!
//! The `τ`-quantization is the composition of the two transforms of
//! [`crate::fourier`]:
//!
//! ```text
//! op_τ(f) = (F_W^τ)^{-1}(F_σ f) = n^{-d} Σ_w (F_σ f)(w) · W_w^τ,
//! ```
//!
//! with the Weyl case `τ = 1/2`.  Because both factors invert exactly on
//! the lattice, `symbol_of(op_τ(f), τ) = f` and `op_τ(symbol_of(A, τ), τ)
//! = A` hold to rounding for *arbitrary* symbols and matrices, and
//! `op_τ(1) = I` exactly.
//!
//! The ordering transforms `N_τ` connect the quantization families on the
//! symbol side: `op_τ(n_tau(f, τ)) = op_0(f)`.  In transform space `N_τ`
//! multiplies by the unimodular phase `e^{iτ x_w·ξ_w}`, so it is a
//! composition of two symplectic transforms and a pointwise multiplier.

use crate::fourier::{fourier_sigma, fourier_weyl, fourier_weyl_inverse};
use crate::grid::PhaseGrid;
use crate::operator::OperatorRep;
use crate::symbol::Symbol;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Weyl (symmetric, `τ = 1/2`) quantization of a symbol.
pub fn op_weyl(f: &Symbol) -> OperatorRep {
    op_tau(f, 0.5)
}

/// `τ`-quantization of a symbol.
pub fn op_tau(f: &Symbol, tau: f64) -> OperatorRep {
    fourier_weyl_inverse(&fourier_sigma(f), tau)
}

/// The `τ`-symbol of an operator; exact inverse of [`op_tau`].
pub fn symbol_of(a: &OperatorRep, tau: f64) -> Symbol {
    fourier_sigma(&fourier_weyl(a, tau))
}

/// Phase `x_w·ξ_w` of the lattice point stored at `flat`.
fn self_dot(grid: &PhaseGrid, flat: usize) -> f64 {
    let steps = grid.steps_from_flat(flat);
    let d = grid.d();
    let mut acc = 0i64;
    for j in 0..d {
        acc += steps[j] * steps[d + j];
    }
    2.0 * PI * acc as f64 / grid.n() as f64
}

/// Ordering transform `N_τ` with `op_τ(N_τ f) = op_0(f)`:
/// `N_τ f = F_σ(e^{iτ x·ξ}·F_σ f)`.
///
/// At `τ = 0` this returns the input unchanged (bit for bit).
pub fn n_tau(f: &Symbol, tau: f64) -> Symbol {
    if tau == 0.0 {
        return f.clone();
    }
    let grid = f.grid().clone();
    let spectral = fourier_sigma(f);
    let twisted = spectral.map_indexed(|flat, v| {
        v * C64::from_polar(1.0, tau * self_dot(&grid, flat))
    });
    fourier_sigma(&twisted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;
    use crate::operator::{op_shift, weyl_operator};
    use crate::samples;
    use crate::symbol::shift_function;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1, 8, 4.0).unwrap()
    }

    #[test]
    fn quantizing_one_gives_the_identity() {
        let g = grid();
        let one = Symbol::constant(&g, C64::new(1.0, 0.0));
        for tau in [0.0, 0.5, 1.0] {
            let a = op_tau(&one, tau);
            assert!(a.max_abs_diff(&OperatorRep::identity(&g)) < 1e-12);
        }
    }

    #[test]
    fn symbol_and_quantization_invert_each_other() {
        let g = grid();
        let mut rng = samples::rng(31);
        let f = Symbol::from_fn(&g, |z| C64::new((z.x()[0]).sin(), (z.xi()[0] * 0.4).cos()));
        let a = samples::random_matrix_operator(&g, &mut rng);
        for tau in [0.0, 0.5, 0.77] {
            assert!(symbol_of(&op_tau(&f, tau), tau).max_abs_diff(&f) < 1e-11);
            assert!(op_tau(&symbol_of(&a, tau), tau).max_abs_diff(&a) < 1e-11);
        }
    }

    #[test]
    fn ordering_transform_links_quantizations() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| {
            C64::new((0.8 * z.x()[0]).cos(), 0.2 * z.xi()[0])
        });
        for tau in [0.25, 0.5, 1.0] {
            let lhs = op_tau(&n_tau(&f, tau), tau);
            let rhs = op_tau(&f, 0.0);
            assert!(lhs.max_abs_diff(&rhs) < 1e-11, "tau = {tau}");
        }
    }

    #[test]
    fn ordering_transform_at_zero_is_bitwise_identity() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| C64::new(z.x()[0] * 0.123, z.xi()[0] * 4.56));
        assert_eq!(n_tau(&f, 0.0), f);
    }

    #[test]
    fn quantization_commutes_with_lattice_shifts() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| {
            C64::new((0.9 * z.x()[0]).sin() + 0.1, (0.6 * z.xi()[0]).cos())
        });
        let z = g.lattice_point(&[2, -3]);
        let lhs = op_shift(&op_weyl(&f), &z);
        let rhs = op_weyl(&shift_function(&f, &z));
        assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn weyl_symbol_of_weyl_operator_is_a_character() {
        let g = grid();
        let steps = [3i64, 2i64];
        let z = g.lattice_point(&steps);
        let sym = symbol_of(&weyl_operator(&g, &z, 0.5), 0.5);
        // symbol of W_z = F_σ(n^d δ_z), a unimodular lattice character.
        let expect = Symbol::from_fn(&g, |w| {
            C64::from_polar(1.0, crate::grid::symplectic_form(&z, w))
        });
        // F_σ(n^d δ_z)(u) = e^{iσ(z_steps·, u)}: check directly.
        assert!(sym.max_abs_diff(&expect) < 1e-11);
    }

    #[test]
    fn real_symbols_quantize_to_selfadjoint_operators() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| C64::new((z.x()[0] * 0.7).cos() + 0.3 * z.xi()[0], 0.0));
        let a = op_weyl(&f);
        assert!(a.max_abs_diff(&a.adjoint()) < 1e-12);
    }

    #[test]
    fn d2_roundtrip_smoke() {
        let g = PhaseGrid::new(2, 4, 4.0).unwrap();
        let f = Symbol::from_fn(&g, |z| {
            C64::new(z.x()[0] * 0.2 - z.xi()[1], (z.x()[1] + z.xi()[0]).sin())
        });
        assert!(symbol_of(&op_weyl(&f), 0.5).max_abs_diff(&f) < 1e-11);
        let one = Symbol::constant(&g, C64::new(1.0, 0.0));
        assert!(op_weyl(&one).max_abs_diff(&OperatorRep::identity(&g)) < 1e-12);
    }
}
