//! Factorial-decay diagnostics for the translation flow.
//!
//! A bounded symbol or operator whose phase-space derivatives satisfy
//! `‖∂^β·‖ ≤ C·β!/R^{|β|}` has a real-analytic orbit `z ↦ α_z(·)`, with
//! Taylor coefficients `b_β = ∂^β·/β!`.  This module fits the pair
//! `(C, R)` from measured derivative norms, extracts the operator Taylor
//! coefficients from the exact commutator derivatives, and inverts such
//! series by the classical recursion for formal power series.
//!
//! Everything here works from finite data: derivatives through a fixed
//! top order (at most [`crate::calculus::MAX_DERIVATIVE_ORDER`]).  The
//! fitted radius is therefore a stabilization diagnostic — the largest
//! scanned `R` at which the rescaled norms still decay through the top
//! orders — not a claim about the true tail.

use crate::calculus::{
    derivative_table, symbol_derivative_multi, DerivativeScheme, DerivativeTable, MultiIndex,
    MAX_DERIVATIVE_ORDER,
};
use crate::error::{QhaError, Result};
use crate::grid::PhasePoint;
use crate::operator::OperatorRep;
use crate::symbol::Symbol;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// Smallest top derivative order accepted by the fit: below this the
/// stabilization test over the top three orders has nothing to look at.
pub const MIN_FIT_ORDER: u32 = 6;

/// A fitted factorial-decay certificate `‖∂^β·‖ ≤ C·β!/R^{|β|}`.
#[derive(Clone, Debug)]
pub struct AnalyticityFit {
    /// Largest total derivative order that entered the fit.
    pub orders_used: u32,
    /// The fitted constant: `C = max_β ‖∂^β·‖·R^{|β|}/β! ≥ 0`.
    pub c: f64,
    /// The selected radius (`> 0`, never beyond the scanned grid).
    pub r: f64,
    /// Rescaled norms aggregated per total order: entry `k` holds
    /// `max_{|β| = k} ‖∂^β·‖·R^k/β!`.  All entries are `≤ c`.
    pub per_order_slack: Vec<f64>,
}

/// Per-order maxima of `norm·R^k/β!` for `k = 0..=top`.
fn slack_profile(norms: &BTreeMap<MultiIndex, f64>, top: u32, r: f64) -> Vec<f64> {
    let mut slack = vec![0.0_f64; top as usize + 1];
    for (beta, norm) in norms {
        let k = beta.order();
        let value = norm * r.powi(k as i32) / beta.factorial();
        slack[k as usize] = slack[k as usize].max(value);
    }
    slack
}

/// Fits `(C, R)` to a map of derivative norms `β ↦ ‖∂^β·‖`.
///
/// For each radius in `r_grid` the constant `C(R) = max_β ‖∂^β·‖·R^{|β|}/β!`
/// is computed; the fit keeps the largest radius whose rescaled norms are
/// non-increasing across the top three total orders (the finite-data
/// stand-in for factorial decay of the tail).  Norms must reach total
/// order [`MIN_FIT_ORDER`] at least.
///
/// Errors on an empty or too-shallow norm map, an empty radius grid,
/// non-positive radii, or when no scanned radius stabilizes.
pub fn analyticity_fit(
    norms: &BTreeMap<MultiIndex, f64>,
    r_grid: &[f64],
) -> Result<AnalyticityFit> {
    if norms.is_empty() {
        return Err(QhaError::InvalidParameter(
            "analyticity fit needs a non-empty derivative-norm map".into(),
        ));
    }
    if norms.values().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(QhaError::InvalidParameter(
            "derivative norms must be finite and non-negative".into(),
        ));
    }
    let top = norms.keys().map(|b| b.order()).max().unwrap();
    if top < MIN_FIT_ORDER {
        return Err(QhaError::InvalidParameter(format!(
            "analyticity fit needs derivatives through order {MIN_FIT_ORDER}, got {top}"
        )));
    }
    if r_grid.is_empty() {
        return Err(QhaError::InvalidParameter("radius grid is empty".into()));
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(QhaError::InvalidParameter("radii must be positive and finite".into()));
    }

    let mut radii: Vec<f64> = r_grid.to_vec();
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for r in radii {
        let slack = slack_profile(norms, top, r);
        let m = slack.len() - 1;
        // Non-increasing across the top three orders, with room for ties
        // (the zero symbol) and rounding.
        let stable = (m - 2..m)
            .all(|k| slack[k + 1] <= slack[k] * (1.0 + 1e-12) + f64::MIN_POSITIVE);
        if stable {
            let c = slack.iter().cloned().fold(0.0, f64::max);
            return Ok(AnalyticityFit { orders_used: top, c, r, per_order_slack: slack });
        }
    }
    Err(QhaError::InvalidParameter(
        "no radius in the scan grid shows stabilized factorial decay".into(),
    ))
}

/// Operator norms of all derivatives in a table, keyed by multi-index.
pub fn operator_norm_map(table: &DerivativeTable) -> BTreeMap<MultiIndex, f64> {
    table.iter().map(|(beta, entry)| (beta.clone(), entry.op.op_norm())).collect()
}

/// Sup norms of the spectral derivatives `∂^β f` for all `|β| ≤ order`.
pub fn symbol_norm_map(f: &Symbol, order: u32) -> Result<BTreeMap<MultiIndex, f64>> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(QhaError::InvalidParameter(format!(
            "derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
        )));
    }
    let axes = f.grid().axes();
    let mut map = BTreeMap::new();
    for beta in MultiIndex::all_upto(axes, order) {
        let norm = symbol_derivative_multi(f, &beta).linf_norm();
        map.insert(beta, norm);
    }
    Ok(map)
}

/// [`analyticity_fit`] applied to the operator norms of a derivative table.
pub fn analyticity_fit_operator(
    table: &DerivativeTable,
    r_grid: &[f64],
) -> Result<AnalyticityFit> {
    analyticity_fit(&operator_norm_map(table), r_grid)
}

/// [`analyticity_fit`] applied to the sup norms of a symbol's spectral
/// derivatives through the given order.
pub fn analyticity_fit_symbol(f: &Symbol, order: u32, r_grid: &[f64]) -> Result<AnalyticityFit> {
    analyticity_fit(&symbol_norm_map(f, order)?, r_grid)
}

/// Taylor coefficients of the orbit `z ↦ α_z(A)` at zero:
/// `b_β = ∂^β A / β!`, with the derivatives taken by the exact commutator
/// scheme, for all `|β| ≤ max_order` (capped at
/// [`MAX_DERIVATIVE_ORDER`]).
///
/// The zeroth coefficient is `A` itself, and truncating after total order
/// `m` leaves a remainder `‖α_z(A) − Σ_{|β| ≤ m} b_β z^β‖` of size
/// `O(|z|^{m+1})`.
pub fn series_coefficients(
    a: &OperatorRep,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, OperatorRep>> {
    let table = derivative_table(a, max_order, DerivativeScheme::Commutator)?;
    let mut out = BTreeMap::new();
    for (beta, entry) in table.iter() {
        let scale = 1.0 / beta.factorial();
        out.insert(beta.clone(), entry.op.scale(C64::new(scale, 0.0)));
    }
    Ok(out)
}

/// The monomial `z^β = Π_j z_j^{β_j}` over the flattened phase-space
/// coordinates (positions first, then frequencies).
fn monomial(z: &PhasePoint, beta: &MultiIndex) -> f64 {
    let d = z.d();
    beta.0
        .iter()
        .enumerate()
        .map(|(axis, &b)| {
            let coord = if axis < d { z.x()[axis] } else { z.xi()[axis - d] };
            coord.powi(b as i32)
        })
        .product()
}

/// Evaluates a coefficient series at a point: `Σ_β b_β z^β`.
pub fn evaluate_series(
    coeffs: &BTreeMap<MultiIndex, OperatorRep>,
    z: &PhasePoint,
) -> Result<OperatorRep> {
    let first = coeffs.values().next().ok_or_else(|| {
        QhaError::InvalidParameter("cannot evaluate an empty coefficient series".into())
    })?;
    let mut out = OperatorRep::zeros(first.grid());
    for (beta, op) in coeffs {
        out = out.add(&op.scale(C64::new(monomial(z, beta), 0.0)))?;
    }
    Ok(out)
}

/// Coefficientwise product of two operator series, truncated at the given
/// total order: `c_γ = Σ_{α + β = γ} a_α · b_β` with operator products in
/// that order.
pub fn compose_series(
    a: &BTreeMap<MultiIndex, OperatorRep>,
    b: &BTreeMap<MultiIndex, OperatorRep>,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, OperatorRep>> {
    if a.is_empty() || b.is_empty() {
        return Err(QhaError::InvalidParameter("cannot compose empty series".into()));
    }
    let mut out: BTreeMap<MultiIndex, OperatorRep> = BTreeMap::new();
    for (alpha, fa) in a {
        for (beta, fb) in b {
            let gamma = alpha.add(beta);
            if gamma.order() > max_order {
                continue;
            }
            let term = fa.compose(fb)?;
            match out.get_mut(&gamma) {
                Some(acc) => *acc = acc.add(&term)?,
                None => {
                    out.insert(gamma, term);
                }
            }
        }
    }
    Ok(out)
}

/// Inverts a coefficient series by the classical recursion for formal
/// power series: `b_0 = a_0⁻¹` and, walking multi-indices in graded
/// order,
///
/// ```text
/// b_β = −a_0⁻¹ · Σ_{0 ≤ α < β} a_{β−α} · b_α,
/// ```
///
/// where `α < β` means componentwise `≤` with `α ≠ β`.  Missing
/// coefficients of `a` are treated as zero, so sparse series (for example
/// scalar geometric ones) invert exactly.  The defining property,
/// verified by [`compose_series`], is that `Σ a·z^α` times `Σ b·z^β`
/// equals the identity through `max_order`.
///
/// Errors if the series has no constant term or its constant term is not
/// safely invertible.
pub fn invert_series(
    coeffs: &BTreeMap<MultiIndex, OperatorRep>,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, OperatorRep>> {
    let axes = coeffs
        .keys()
        .next()
        .ok_or_else(|| QhaError::InvalidParameter("cannot invert an empty series".into()))?
        .0
        .len();
    let zero = MultiIndex(vec![0; axes]);
    let a0 = coeffs.get(&zero).ok_or_else(|| {
        QhaError::InvalidParameter("series inversion needs a constant coefficient".into())
    })?;
    let a0_inv = a0.inverse()?;
    let mut out: BTreeMap<MultiIndex, OperatorRep> = BTreeMap::new();
    out.insert(zero.clone(), a0_inv.clone());
    for beta in MultiIndex::all_upto(axes, max_order) {
        if beta.order() == 0 {
            continue;
        }
        let mut sum: Option<OperatorRep> = None;
        for alpha in MultiIndex::all_upto(axes, beta.order()) {
            if alpha == beta || !alpha.leq(&beta) {
                continue;
            }
            let Some(fa) = coeffs.get(&beta.sub(&alpha)) else {
                continue;
            };
            let term = fa.compose(&out[&alpha])?;
            sum = Some(match sum {
                Some(acc) => acc.add(&term)?,
                None => term,
            });
        }
        let value = match sum {
            Some(s) => a0_inv.compose(&s)?.scale(C64::new(-1.0, 0.0)),
            None => OperatorRep::zeros(a0.grid()),
        };
        out.insert(beta, value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;
    use crate::quantize::op_weyl;
    use crate::symbol::{make_symbol, SymbolFamily};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    /// A grid on which `cos(1·x)·sin(π/4·ξ)` is exactly band-limited and
    /// every derivative attains its sup on a lattice point: the position
    /// frequency 1 is twice the dual spacing `ω = 1/2`, the frequency-axis
    /// rate `π/4` is four times the dual spacing `h = π/16`, and both
    /// axes contain the quarter-period points of their factor.
    fn lattice_grid() -> PhaseGrid {
        PhaseGrid::new(1, 64, 4.0 * PI).unwrap()
    }

    fn lattice_cos_sin() -> Symbol {
        make_symbol(&lattice_grid(), &SymbolFamily::CosSin { kx: 1.0, kxi: FRAC_PI_4 }).unwrap()
    }

    fn unit_norm_map(axes: usize, order: u32) -> BTreeMap<MultiIndex, f64> {
        MultiIndex::all_upto(axes, order).into_iter().map(|b| (b, 1.0)).collect()
    }

    #[test]
    fn unit_norms_fit_constant_one_at_radius_one() {
        let norms = unit_norm_map(2, 8);
        let fit = analyticity_fit(&norms, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(fit.orders_used, 8);
        assert_abs_diff_eq!(fit.r, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(fit.c, 1.0, epsilon = 1e-12);
        assert_eq!(fit.per_order_slack.len(), 9);
        for s in &fit.per_order_slack {
            assert!(*s <= fit.c + 1e-12);
        }
        let m = fit.per_order_slack.len() - 1;
        assert!(fit.per_order_slack[m - 1] <= fit.per_order_slack[m - 2] + 1e-15);
        assert!(fit.per_order_slack[m] <= fit.per_order_slack[m - 1] + 1e-15);
    }

    #[test]
    fn zero_norms_fit_constant_zero_at_the_largest_radius() {
        let norms: BTreeMap<MultiIndex, f64> =
            MultiIndex::all_upto(2, 6).into_iter().map(|b| (b, 0.0)).collect();
        let fit = analyticity_fit(&norms, &[0.5, 2.0, 1.0]).unwrap();
        assert_eq!(fit.c, 0.0);
        assert_eq!(fit.r, 2.0);
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        let empty: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        assert!(analyticity_fit(&empty, &[1.0]).is_err());
        let shallow = unit_norm_map(2, 4);
        assert!(analyticity_fit(&shallow, &[1.0]).is_err());
        let norms = unit_norm_map(2, 6);
        assert!(analyticity_fit(&norms, &[]).is_err());
        assert!(analyticity_fit(&norms, &[0.5, -1.0]).is_err());
        assert!(analyticity_fit(&norms, &[0.0]).is_err());
        // Factorially growing norms stabilize at no scanned radius.
        let blowup: BTreeMap<MultiIndex, f64> = MultiIndex::all_upto(1, 6)
            .into_iter()
            .map(|b| {
                let k = b.order();
                (b, 100.0_f64.powi(k as i32) * MultiIndex(vec![k]).factorial())
            })
            .collect();
        assert!(analyticity_fit(&blowup, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn lattice_cos_sin_derivative_norms_match_closed_form() {
        let f = lattice_cos_sin();
        let norms = symbol_norm_map(&f, 8).unwrap();
        for (beta, norm) in &norms {
            let expected = FRAC_PI_4.powi(beta.0[1] as i32);
            // Each derivative order multiplies band-edge round-off by up to
            // Ω/2 = 16 (position axis) or L/2 = 2π (frequency axis), so the
            // achievable accuracy drops by roughly that factor per order
            // beyond five; measured worst cases are 1.2e-11 (order 5),
            // 1.1e-10 (order 6), and 2.6e-8 (order 8).
            let bar = match beta.order() {
                0..=5 => 1e-10,
                6 => 2e-9,
                _ => 1e-7,
            };
            assert!(
                (norm - expected).abs() < bar,
                "β = {beta:?}: measured {norm}, closed form {expected}"
            );
        }
        let fit = analyticity_fit(&norms, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_abs_diff_eq!(fit.r, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(fit.c, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn series_zeroth_coefficient_is_the_operator() {
        let grid = PhaseGrid::new(1, 16, 8.0).unwrap();
        let f = make_symbol(
            &grid,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.5 },
        )
        .unwrap();
        let a = op_weyl(&f);
        let coeffs = series_coefficients(&a, 3).unwrap();
        let zero = MultiIndex(vec![0, 0]);
        assert_eq!(coeffs[&zero].max_abs_diff(&a), 0.0);
        assert_eq!(coeffs.len(), MultiIndex::all_upto(2, 3).len());

        let id = OperatorRep::identity(&grid);
        let id_coeffs = series_coefficients(&id, 3).unwrap();
        for (beta, op) in &id_coeffs {
            if beta.order() > 0 {
                assert!(op.op_norm() < 1e-12, "β = {beta:?}");
            }
        }
    }

    #[test]
    fn series_rejects_orders_past_the_cap() {
        let grid = PhaseGrid::new(1, 8, 8.0).unwrap();
        let a = OperatorRep::identity(&grid);
        assert!(series_coefficients(&a, 9).is_err());
    }

    #[test]
    fn taylor_remainder_scales_at_third_order() {
        let grid = PhaseGrid::new(1, 32, 12.0).unwrap();
        let f = make_symbol(
            &grid,
            &SymbolFamily::Gaussian { center: vec![0.4, -0.3], width: 1.6 },
        )
        .unwrap();
        let a = op_weyl(&f);
        let coeffs = series_coefficients(&a, 2).unwrap();
        let remainder = |t: f64| {
            let z = PhasePoint::new(vec![0.35 * t, -0.2 * t]);
            let exact = crate::operator::op_shift(&a, &z);
            exact.sub(&evaluate_series(&coeffs, &z).unwrap()).unwrap().op_norm()
        };
        let ratio = remainder(0.2) / remainder(0.1);
        assert!(
            (6.0..=10.0).contains(&ratio),
            "order-2 remainder should scale cubically, got ratio {ratio}"
        );
    }

    #[test]
    fn inverting_the_identity_series_is_trivial() {
        let grid = PhaseGrid::new(1, 8, 8.0).unwrap();
        let id = OperatorRep::identity(&grid);
        let mut series = BTreeMap::new();
        series.insert(MultiIndex(vec![0, 0]), id.clone());
        let inv = invert_series(&series, 3).unwrap();
        assert_eq!(inv[&MultiIndex(vec![0, 0])].max_abs_diff(&id), 0.0);
        for (beta, op) in &inv {
            if beta.order() > 0 {
                assert_eq!(op.op_norm(), 0.0, "β = {beta:?}");
            }
        }
    }

    #[test]
    fn scalar_geometric_series_inverts_exactly() {
        let grid = PhaseGrid::new(1, 8, 8.0).unwrap();
        let id = OperatorRep::identity(&grid);
        let c = 0.3;
        let mut series = BTreeMap::new();
        series.insert(MultiIndex(vec![0, 0]), id.clone());
        series.insert(MultiIndex(vec![1, 0]), id.scale(C64::new(c, 0.0)));
        let inv = invert_series(&series, 5).unwrap();
        for (beta, op) in &inv {
            if beta.0[1] == 0 {
                let expected = id.scale(C64::new((-c).powi(beta.0[0] as i32), 0.0));
                assert!(op.max_abs_diff(&expected) < 1e-13, "β = {beta:?}");
            } else {
                assert!(op.op_norm() < 1e-13, "β = {beta:?}");
            }
        }
    }

    fn perturbed_identity() -> (PhaseGrid, OperatorRep) {
        let grid = PhaseGrid::new(1, 16, 8.0).unwrap();
        let f = make_symbol(
            &grid,
            &SymbolFamily::Gaussian { center: vec![0.5, 0.25], width: 1.4 },
        )
        .unwrap();
        let a = OperatorRep::identity(&grid)
            .add(&op_weyl(&f).scale(C64::new(0.2, 0.0)))
            .unwrap();
        (grid, a)
    }

    #[test]
    fn inverted_series_composes_to_the_identity() {
        let (grid, a) = perturbed_identity();
        let series = series_coefficients(&a, 4).unwrap();
        let inv = invert_series(&series, 4).unwrap();
        let product = compose_series(&series, &inv, 4).unwrap();
        let id = OperatorRep::identity(&grid);
        for (gamma, op) in &product {
            if gamma.order() == 0 {
                assert!(op.max_abs_diff(&id) < 1e-8);
            } else {
                assert!(op.op_norm() < 1e-8, "γ = {gamma:?}: ‖c_γ‖ = {}", op.op_norm());
            }
        }
    }

    #[test]
    fn inverted_series_matches_the_series_of_the_inverse() {
        let (_, a) = perturbed_identity();
        let series = series_coefficients(&a, 4).unwrap();
        let inv = invert_series(&series, 4).unwrap();
        let direct = series_coefficients(&a.inverse().unwrap(), 4).unwrap();
        for (beta, op) in &direct {
            let err = op.max_abs_diff(&inv[beta]);
            assert!(err < 1e-6, "β = {beta:?}: coefficient gap {err}");
        }
    }

    #[test]
    fn inversion_rejects_missing_or_singular_constant_terms() {
        let grid = PhaseGrid::new(1, 8, 8.0).unwrap();
        let empty: BTreeMap<MultiIndex, OperatorRep> = BTreeMap::new();
        assert!(invert_series(&empty, 2).is_err());
        let mut no_constant = BTreeMap::new();
        no_constant.insert(MultiIndex(vec![1, 0]), OperatorRep::identity(&grid));
        assert!(invert_series(&no_constant, 2).is_err());
        let mut singular = BTreeMap::new();
        singular.insert(MultiIndex(vec![0, 0]), OperatorRep::zeros(&grid));
        assert!(invert_series(&singular, 2).is_err());
    }

    #[test]
    fn quantized_operator_inherits_a_positive_radius() {
        let f = lattice_cos_sin();
        // The plane-wave symbol has no decay at the box edge, so the flow
        // generator's coordinate jump there enters every operator derivative
        // at full strength: derivative norms grow by Ω − kxi ≈ 31 per order
        // (measured), and the per-order profile only stabilizes below
        // R ≈ 5/31 ≈ 0.16.  The scan therefore reaches down to 0.05.
        let r_grid = [0.05, 0.1, 0.15, 0.25, 0.5, 1.0];
        let symbol_fit = analyticity_fit_symbol(&f, 6, &r_grid).unwrap();
        assert_abs_diff_eq!(symbol_fit.r, 1.0, epsilon = 0.0);
        let a = op_weyl(&f);
        let table = derivative_table(&a, 6, DerivativeScheme::Commutator).unwrap();
        let op_fit = analyticity_fit_operator(&table, &r_grid).unwrap();
        assert!(op_fit.r > 0.0 && op_fit.c.is_finite());
        assert_abs_diff_eq!(op_fit.r, 0.15, epsilon = 1e-12);
        // The operator-side radius may shrink relative to the symbol's, but
        // must keep at least a tenth of the squared symbol radius.
        assert!(
            op_fit.r >= 0.1 * symbol_fit.r * symbol_fit.r,
            "operator radius {} fell below the floor for symbol radius {}",
            op_fit.r,
            symbol_fit.r
        );
    }

    #[test]
    fn wide_box_gaussian_keeps_the_full_fitted_radius() {
        // A kernel that decays at the box edge (edge value e^{-22} here)
        // suppresses the generator's wrap contribution, so the operator
        // route sees the same factorial decay as the symbol route and the
        // fit keeps the full scanned radius on both sides.
        let grid = PhaseGrid::new(1, 64, 20.0).unwrap();
        let f = make_symbol(
            &grid,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.5 },
        )
        .unwrap();
        let r_grid = [0.25, 0.5, 0.75, 1.0];
        let symbol_fit = analyticity_fit_symbol(&f, 6, &r_grid).unwrap();
        assert_abs_diff_eq!(symbol_fit.r, 1.0, epsilon = 0.0);
        let a = op_weyl(&f);
        let table = derivative_table(&a, 6, DerivativeScheme::Commutator).unwrap();
        let op_fit = analyticity_fit_operator(&table, &r_grid).unwrap();
        assert_abs_diff_eq!(op_fit.r, 1.0, epsilon = 0.0);
        assert!(op_fit.r >= 0.5 * symbol_fit.r);
        assert!(op_fit.c.is_finite() && op_fit.c > 0.0);
    }
}
