//! Phase-space derivatives of operators and the associated norm scales.
//!
//! The derivative of an operator along phase-space axis `j` is the
//! derivative of the translation flow, `∂_j A = d/dt α_{t e_j}(A)|_{t=0}`.
//! Two schemes realize it:
//!
//! * **Commutator.**  The flow is conjugation by one-parameter unitary
//!   groups with self-adjoint generators `G_j = -P_j` (position axes, `P`
//!   the spectral momentum matrix over signed frequencies) and
//!   `G_j = Q_{j-d}` (frequency axes, `Q` the diagonal signed-coordinate
//!   matrix), so `∂_j A = i[G_j, A]` — the exact derivative of the
//!   discrete flow, with no step-size error.
//! * **Finite differences.**  Symmetric differences of the flow itself,
//!   `(α_{t e_j}A − α_{-t e_j}A)/2t`, with optional Richardson
//!   extrapolation; truncation error `O(t²)` per level.  Both schemes
//!   differentiate the *same* flow, so they agree to the truncation error
//!   for arbitrary operators.
//!
//! Under the operator Fourier transform the derivative acts as
//! multiplication by `i·σ(e_j, w)` — the symplectic monomial `-η_j`
//! (position axes) or `+y_j` (frequency axes).  On a periodic grid this
//! relation holds up to band-edge aliasing: the discrete flow at
//! non-lattice parameters interpolates band-limitedly, and Fourier modes
//! adjacent to the band edge pick up wrapped frequencies.  The aliasing
//! term is proportional to the operator's spectral content at the band
//! edge, so it is negligible for operators quantized from smooth
//! (e.g. Gaussian) symbols and grows toward `O(n)` for rough data.  The
//! algebraic rules (Leibniz, inverse, quotient) are exact for the
//! commutator scheme regardless of smoothness, because conjugation is
//! multiplicative and commutators are derivations.
//!
//! Symbols differentiate spectrally with the textbook multiplier `iν`
//! along each axis; quantization intertwines the two conventions with an
//! alternating sign, `∂_j op(f) = -op(∂_j f)` per order.
//!
//! Norm scales: `C^k` (max operator norm of derivatives up to order `k`),
//! Sobolev-type sums of Schatten norms over derivative orders, and plain
//! Schatten norms from singular values.

use crate::error::{QhaError, Result};
use crate::fft;
use crate::grid::{PhaseGrid, PhasePoint};
use crate::operator::{op_shift, OperatorRep};
use crate::symbol::Symbol;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// A multi-index over the `2d` phase-space axes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// The zero multi-index.
    pub fn zero(axes: usize) -> Self {
        Self(vec![0; axes])
    }

    /// Unit multi-index along one axis.
    pub fn unit(axes: usize, axis: usize) -> Self {
        let mut v = vec![0; axes];
        v[axis] = 1;
        Self(v)
    }

    /// Total order `|β| = Σ β_j`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Factorial `β! = Π β_j!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&b| (1..=b as u64).map(|k| k as f64).product::<f64>())
            .product()
    }

    /// Monomial `w^β = Π w_j^{β_j}` evaluated at a phase-space point.
    pub fn monomial(&self, w: &PhasePoint) -> f64 {
        self.0
            .iter()
            .zip(&w.coords)
            .map(|(&b, &c)| c.powi(b as i32))
            .product()
    }

    /// Component-wise comparison `self ≤ other`.
    pub fn leq(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Component-wise difference (requires `other ≤ self`).
    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Component-wise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices over `axes` axes with `|β| ≤ max_order`, in graded
    /// lexicographic order (a fixed, deterministic enumeration).
    pub fn all_upto(axes: usize, max_order: u32) -> Vec<MultiIndex> {
        fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, axis: usize, rem: u32) {
            let axes = current.len();
            if axis == axes - 1 {
                current[axis] = rem;
                out.push(MultiIndex(current.clone()));
                current[axis] = 0;
                return;
            }
            for take in (0..=rem).rev() {
                current[axis] = take;
                fill(out, current, axis + 1, rem - take);
                current[axis] = 0;
            }
        }
        let mut out = Vec::new();
        let mut current = vec![0u32; axes];
        for order in 0..=max_order {
            fill(&mut out, &mut current, 0, order);
        }
        out
    }

    /// The first axis with a nonzero entry.
    pub fn first_axis(&self) -> Option<usize> {
        self.0.iter().position(|&b| b > 0)
    }

    /// The last axis with a nonzero entry (used to walk derivative tables
    /// in the same order as iterated single-axis differentiation).
    pub fn last_axis(&self) -> Option<usize> {
        self.0.iter().rposition(|&b| b > 0)
    }
}

/// The symplectic monomial `σ(e_j, w)` produced by the derivative along
/// axis `j` under the operator Fourier transform: `-η_j` for a position
/// axis, `+y_j` for a frequency axis, where `w = (y, η)`.
pub fn symplectic_monomial(w: &PhasePoint, axis: usize) -> f64 {
    let d = w.d();
    if axis < d {
        -w.xi()[axis]
    } else {
        w.x()[axis - d]
    }
}

/// Product `Π_j σ(e_j, w)^{β_j}` of symplectic monomials for a full
/// multi-index.
pub fn symplectic_monomial_multi(w: &PhasePoint, beta: &MultiIndex) -> f64 {
    beta.0
        .iter()
        .enumerate()
        .map(|(axis, &b)| symplectic_monomial(w, axis).powi(b as i32))
        .product()
}

/// Step configuration for the finite-difference scheme.
#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    /// Base step as a fraction of the axis period.
    pub step_fraction: f64,
    /// Richardson extrapolation levels (0 = plain central difference).
    pub richardson_levels: u32,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step_fraction: 1e-3, richardson_levels: 1 }
    }
}

/// Smallest admissible step, as a fraction of the axis period.  Steps
/// below this floor amplify rounding noise past any truncation gain.
pub const MIN_STEP_FRACTION: f64 = 1e-10;

/// Derivative scheme selector.
#[derive(Clone, Copy, Debug)]
pub enum DerivativeScheme {
    /// Exact commutator with the flow generator.
    Commutator,
    /// Symmetric finite differences of the translation flow.
    FiniteDifference(FdConfig),
}

/// The self-adjoint generator of the translation flow along one axis:
/// `-P_j` for position axes, `Q_{j-d}` for frequency axes.
pub fn flow_generator(grid: &PhaseGrid, axis: usize) -> OperatorRep {
    assert!(axis < grid.axes(), "axis out of range");
    let n = grid.n();
    let d = grid.d();
    let pos_axis = if axis < d { axis } else { axis - d };
    let single: DMatrix<C64> = if axis < d {
        // -P: circulant with spectrum -ν_k over the signed frequencies,
        // matching the interpolating shift used by the flow.
        let mut col: Vec<C64> = (0..n)
            .map(|k| {
                let nu = fft::signed_freq_index(k, n) as f64 * grid.omega();
                C64::new(-nu, 0.0)
            })
            .collect();
        fft::dft_line(&mut col, true);
        let scale = 1.0 / n as f64;
        DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n] * scale)
    } else {
        // +Q: the signed coordinate, matching the modulation factor.
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(grid.signed_index(i) as f64 * grid.h(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    // Embed the single-axis matrix into the d-fold product space,
    // axis 0 outermost to match the row-major kernel layout.
    let mut m: Option<DMatrix<C64>> = None;
    for j in 0..d {
        let factor = if j == pos_axis {
            single.clone()
        } else {
            DMatrix::identity(n, n)
        };
        m = Some(match m {
            None => factor,
            Some(acc) => acc.kronecker(&factor),
        });
    }
    OperatorRep::from_matrix(grid, m.unwrap()).expect("dimensions match")
}

fn central_difference(a: &OperatorRep, axis: usize, t: f64) -> OperatorRep {
    let grid = a.grid();
    let e = PhasePoint::unit(grid.d(), axis, t);
    let plus = op_shift(a, &e);
    let minus = op_shift(a, &e.neg());
    plus.sub(&minus).unwrap().scale(C64::new(0.5 / t, 0.0))
}

fn fd_derivative(a: &OperatorRep, axis: usize, cfg: FdConfig) -> Result<OperatorRep> {
    let grid = a.grid();
    let levels = cfg.richardson_levels as usize;
    let smallest = cfg.step_fraction / (1u64 << levels) as f64;
    if !(smallest >= MIN_STEP_FRACTION) {
        return Err(QhaError::InvalidParameter(format!(
            "finite-difference step fraction {smallest:.3e} is below the floor {MIN_STEP_FRACTION:.0e}"
        )));
    }
    let t0 = cfg.step_fraction * grid.axis_period(axis);
    // Richardson table over step halvings: column 0 holds central
    // differences, each further column cancels one O(t²) term.
    let mut row: Vec<OperatorRep> = (0..=levels)
        .map(|k| central_difference(a, axis, t0 / (1u64 << k) as f64))
        .collect();
    for col in 1..=levels {
        let weight = (4f64).powi(col as i32);
        for k in 0..=(levels - col) {
            let refined = row[k + 1]
                .scale(C64::new(weight, 0.0))
                .sub(&row[k])
                .unwrap()
                .scale(C64::new(1.0 / (weight - 1.0), 0.0));
            row[k] = refined;
        }
    }
    Ok(row.swap_remove(0))
}

/// Derivative of an operator along one phase-space axis.
pub fn derivative_axis(
    a: &OperatorRep,
    axis: usize,
    scheme: DerivativeScheme,
) -> Result<OperatorRep> {
    let grid = a.grid();
    assert!(axis < grid.axes(), "axis out of range");
    match scheme {
        DerivativeScheme::Commutator => {
            let g = flow_generator(grid, axis);
            Ok(g.commutator(a).unwrap().scale(C64::new(0.0, 1.0)))
        }
        DerivativeScheme::FiniteDifference(cfg) => fd_derivative(a, axis, cfg),
    }
}

/// Maximum derivative order accepted by [`derivative`] and
/// [`derivative_table`].
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// Iterated derivative `∂^β a` for a full multi-index, applying axes in
/// increasing order.
pub fn derivative(
    a: &OperatorRep,
    beta: &MultiIndex,
    scheme: DerivativeScheme,
) -> Result<OperatorRep> {
    if beta.0.len() != a.grid().axes() {
        return Err(QhaError::GridMismatch(
            "multi-index length must equal the number of phase-space axes".into(),
        ));
    }
    if beta.order() > MAX_DERIVATIVE_ORDER {
        return Err(QhaError::InvalidParameter(format!(
            "derivative order {} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}",
            beta.order()
        )));
    }
    let mut out = a.clone();
    for (axis, &b) in beta.0.iter().enumerate() {
        for _ in 0..b {
            out = derivative_axis(&out, axis, scheme)?;
        }
    }
    Ok(out)
}

/// One stored derivative with an estimate of its truncation error.
#[derive(Clone, Debug)]
pub struct TableEntry {
    /// The derivative `∂^β a`.
    pub op: OperatorRep,
    /// Estimated truncation error of the last differentiation step
    /// (0 for the commutator scheme, which differentiates the flow
    /// exactly).
    pub truncation: f64,
}

/// All derivatives of one operator up to a total order, walked in graded
/// lexicographic order so each entry extends a previously computed one.
#[derive(Clone, Debug)]
pub struct DerivativeTable {
    grid: PhaseGrid,
    order: u32,
    entries: BTreeMap<MultiIndex, TableEntry>,
}

/// Builds the table of derivatives `∂^β a` for all `|β| ≤ order`.
pub fn derivative_table(
    a: &OperatorRep,
    order: u32,
    scheme: DerivativeScheme,
) -> Result<DerivativeTable> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(QhaError::InvalidParameter(format!(
            "derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
        )));
    }
    let grid = a.grid().clone();
    let axes = grid.axes();
    let mut entries: BTreeMap<MultiIndex, TableEntry> = BTreeMap::new();
    for beta in MultiIndex::all_upto(axes, order) {
        if beta.order() == 0 {
            entries.insert(beta, TableEntry { op: a.clone(), truncation: 0.0 });
            continue;
        }
        // Differentiating along the last nonzero axis reproduces exactly
        // the iterated order of `derivative` (axes applied ascending).
        let axis = beta.last_axis().expect("nonzero order");
        let parent = beta.sub(&MultiIndex::unit(axes, axis));
        let base = &entries
            .get(&parent)
            .expect("graded order visits parents first")
            .op;
        let op = derivative_axis(base, axis, scheme)?;
        let truncation = match scheme {
            DerivativeScheme::Commutator => 0.0,
            DerivativeScheme::FiniteDifference(cfg) => {
                // Standard step-halving estimate: distance to the value at
                // half the base step.
                let halved = FdConfig {
                    step_fraction: cfg.step_fraction / 2.0,
                    richardson_levels: cfg.richardson_levels,
                };
                fd_derivative(base, axis, halved)?.max_abs_diff(&op)
            }
        };
        entries.insert(beta, TableEntry { op, truncation });
    }
    Ok(DerivativeTable { grid, order, entries })
}

impl DerivativeTable {
    /// The grid of the underlying operator.
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Highest total order stored.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Looks up the entry for `∂^β a`.
    pub fn get(&self, beta: &MultiIndex) -> Option<&TableEntry> {
        self.entries.get(beta)
    }

    /// Iterates over all `(β, entry)` pairs in graded lexicographic order
    /// of the map key.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &TableEntry)> {
        self.entries.iter()
    }

    /// `C^k` norm: the largest operator norm among derivatives of total
    /// order at most `k`.
    pub fn ck_norm(&self, k: u32) -> f64 {
        assert!(k <= self.order, "table holds orders up to {}", self.order);
        self.entries
            .iter()
            .filter(|(b, _)| b.order() <= k)
            .map(|(_, e)| e.op.op_norm())
            .fold(0.0, f64::max)
    }

    /// Sobolev-type norm: the sum `Σ_{|β| ≤ k} ‖∂^β a‖_{S_p}` of Schatten
    /// norms over all orders up to `k`.
    pub fn sobolev_norm(&self, k: u32, p: SchattenExponent) -> f64 {
        assert!(k <= self.order, "table holds orders up to {}", self.order);
        self.entries
            .iter()
            .filter(|(b, _)| b.order() <= k)
            .map(|(_, e)| schatten_norm(&e.op, p))
            .sum()
    }
}

/// Schatten exponent: finite `p ≥ 1` or `∞` (operator norm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenExponent {
    /// Finite exponent.
    P(f64),
    /// The operator norm.
    Inf,
}

/// Schatten norm from singular values: `(Σ s_k^p)^{1/p}`, or the largest
/// singular value for `p = ∞`.
pub fn schatten_norm(a: &OperatorRep, p: SchattenExponent) -> f64 {
    let sv = a.singular_values();
    match p {
        SchattenExponent::Inf => sv.first().copied().unwrap_or(0.0),
        SchattenExponent::P(p) => {
            assert!(p >= 1.0, "Schatten exponent must be >= 1");
            sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

/// Spectral derivative of a symbol along one axis with the textbook
/// multiplier `(iν)^order` over the signed dual frequencies.
pub fn symbol_derivative(f: &Symbol, axis: usize, order: u32) -> Symbol {
    let grid = f.grid().clone();
    assert!(axis < grid.axes(), "axis out of range");
    if order == 0 {
        return f.clone();
    }
    let n = grid.n();
    let shape = vec![n; grid.axes()];
    // The dual step of an axis with period T is 2π/T.
    let dual_step = 2.0 * std::f64::consts::PI / grid.axis_period(axis);
    let mut buf = f.values().to_vec();
    fft::dft_axis(&mut buf, &shape, axis, false);
    let stride: usize = shape[axis + 1..].iter().product();
    let block = stride * n;
    let mults: Vec<C64> = (0..n)
        .map(|k| {
            let nu = fft::signed_freq_index(k, n) as f64 * dual_step;
            C64::new(0.0, nu).powu(order)
        })
        .collect();
    for base in (0..buf.len()).step_by(block) {
        for k in 0..n {
            for off in 0..stride {
                buf[base + k * stride + off] *= mults[k];
            }
        }
    }
    fft::dft_axis(&mut buf, &shape, axis, true);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Symbol::new(grid, buf).expect("shape preserved")
}

/// Spectral derivative `∂^β f` of a symbol for a full multi-index.
pub fn symbol_derivative_multi(f: &Symbol, beta: &MultiIndex) -> Symbol {
    assert_eq!(beta.0.len(), f.grid().axes(), "multi-index length");
    let mut out = f.clone();
    for (axis, &b) in beta.0.iter().enumerate() {
        if b > 0 {
            out = symbol_derivative(&out, axis, b);
        }
    }
    out
}

/// Sobolev-type symbol norm: `Σ_{|β| ≤ k} ‖∂^β f‖_{L^p}` with spectral
/// derivatives and the grid quadrature measure (`p = None` uses the sup).
pub fn sobolev_norm_symbol(f: &Symbol, k: u32, p: Option<f64>) -> f64 {
    MultiIndex::all_upto(f.grid().axes(), k)
        .iter()
        .map(|beta| {
            let df = symbol_derivative_multi(f, beta);
            match p {
                None => df.linf_norm(),
                Some(p) => df.lp_norm(p),
            }
        })
        .sum()
}

/// One named defect of a derivative-algebra identity.
#[derive(Clone, Debug)]
pub struct AlgebraDefect {
    /// Which identity was exercised.
    pub name: String,
    /// Largest entry-wise deviation, relative to the scale of the result.
    pub defect: f64,
}

/// Verifies the Leibniz rule, the inverse rule, and the quotient rule for
/// one pair of operators under the given scheme, returning relative
/// defects per axis.  `b` must be invertible with a moderate condition
/// number.
pub fn verify_derivative_algebra(
    a: &OperatorRep,
    b: &OperatorRep,
    scheme: DerivativeScheme,
) -> Result<Vec<AlgebraDefect>> {
    let grid = a.grid();
    if grid != b.grid() {
        return Err(QhaError::GridMismatch("operands live on different grids".into()));
    }
    let b_inv = b.inverse()?;
    let mut out = Vec::new();
    let rel = |defect: f64, scale: f64| defect / scale.max(1e-300);
    for axis in 0..grid.axes() {
        let da = derivative_axis(a, axis, scheme)?;
        let db = derivative_axis(b, axis, scheme)?;

        // Leibniz: ∂(ab) = (∂a)b + a(∂b).
        let lhs = derivative_axis(&a.compose(b)?, axis, scheme)?;
        let rhs = da.compose(b)?.add(&a.compose(&db)?)?;
        out.push(AlgebraDefect {
            name: format!("product_rule_axis{axis}"),
            defect: rel(lhs.max_abs_diff(&rhs), rhs.op_norm()),
        });

        // Inverse rule: ∂(b⁻¹) = -b⁻¹ (∂b) b⁻¹.
        let lhs = derivative_axis(&b_inv, axis, scheme)?;
        let rhs = b_inv
            .compose(&db)?
            .compose(&b_inv)?
            .scale(C64::new(-1.0, 0.0));
        out.push(AlgebraDefect {
            name: format!("inverse_rule_axis{axis}"),
            defect: rel(lhs.max_abs_diff(&rhs), rhs.op_norm().max(b_inv.op_norm())),
        });

        // Quotient rule: ∂(a b⁻¹) = (∂a) b⁻¹ − a b⁻¹ (∂b) b⁻¹.
        let lhs = derivative_axis(&a.compose(&b_inv)?, axis, scheme)?;
        let rhs = da
            .compose(&b_inv)?
            .sub(&a.compose(&b_inv)?.compose(&db)?.compose(&b_inv)?)?;
        out.push(AlgebraDefect {
            name: format!("quotient_rule_axis{axis}"),
            defect: rel(lhs.max_abs_diff(&rhs), rhs.op_norm().max(1.0)),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::fourier_weyl;
    use crate::quantize::op_weyl;
    use crate::samples;
    use crate::symbol::{make_symbol, SymbolFamily};
    use approx::assert_abs_diff_eq;

    fn grid16() -> PhaseGrid {
        PhaseGrid::new(1, 16, 8.0).unwrap()
    }

    /// Wide box: the quantized Gaussian's phase-space transform decays to
    /// ~e⁻³² before any coordinate wraps, so band-edge aliasing sits far
    /// below the spectral-identity tolerances.
    fn grid_wide() -> PhaseGrid {
        PhaseGrid::new(1, 64, 16.0).unwrap()
    }

    /// Operator with a smooth phase-space profile: quantized off-center
    /// Gaussian.  Its spectral content at the band edge is negligible, so
    /// the multiplier relation for derivatives holds to near rounding.
    fn gaussian_operator(g: &PhaseGrid) -> OperatorRep {
        let f = make_symbol(
            g,
            &SymbolFamily::Gaussian { center: vec![0.4, -0.3], width: 1.0 },
        )
        .unwrap();
        op_weyl(&f)
    }

    /// Rough (random full-band) operator; fine for purely algebraic
    /// identities, unsuitable for spectral-multiplier comparisons.
    fn rough_operator(g: &PhaseGrid, seed: u64) -> OperatorRep {
        let mut rng = samples::rng(seed);
        samples::random_matrix_operator(g, &mut rng)
    }

    #[test]
    fn multi_index_enumeration_is_graded() {
        let list = MultiIndex::all_upto(2, 3);
        assert_eq!(list.len(), 10); // orders 0..3 over 2 axes: 1+2+3+4
        let mut last_order = 0;
        for beta in &list {
            assert!(beta.order() >= last_order);
            last_order = beta.order();
        }
        assert_eq!(list[0], MultiIndex::zero(2));
        assert_eq!(list[1], MultiIndex(vec![1, 0]));
    }

    #[test]
    fn factorials_monomials_and_comparisons() {
        let beta = MultiIndex(vec![3, 2]);
        assert_abs_diff_eq!(beta.factorial(), 12.0);
        assert!(MultiIndex(vec![1, 2]).leq(&beta));
        assert!(!MultiIndex(vec![4, 0]).leq(&beta));
        assert_eq!(beta.sub(&MultiIndex(vec![1, 1])), MultiIndex(vec![2, 1]));
        let w = PhasePoint::new(vec![2.0, -1.5]);
        assert_abs_diff_eq!(beta.monomial(&w), 8.0 * 2.25);
        assert_abs_diff_eq!(symplectic_monomial(&w, 0), 1.5);
        assert_abs_diff_eq!(symplectic_monomial(&w, 1), 2.0);
        assert_abs_diff_eq!(
            symplectic_monomial_multi(&w, &MultiIndex(vec![2, 1])),
            1.5 * 1.5 * 2.0
        );
    }

    #[test]
    fn derivative_of_identity_vanishes() {
        let g = grid16();
        let id = OperatorRep::identity(&g);
        for axis in 0..2 {
            let dc = derivative_axis(&id, axis, DerivativeScheme::Commutator).unwrap();
            assert!(dc.hs_norm() < 1e-12);
            let df = derivative_axis(
                &id,
                axis,
                DerivativeScheme::FiniteDifference(FdConfig::default()),
            )
            .unwrap();
            assert!(df.hs_norm() < 1e-10);
        }
    }

    #[test]
    fn commutator_derivative_matches_spectral_multiplier_on_smooth_data() {
        let g = grid_wide();
        let a = gaussian_operator(&g);
        for axis in 0..2 {
            let da = derivative_axis(&a, axis, DerivativeScheme::Commutator).unwrap();
            let lhs = fourier_weyl(&da, 0.5);
            let rhs = fourier_weyl(&a, 0.5).map_indexed(|flat, v| {
                let w = g.point(flat);
                v * C64::new(0.0, symplectic_monomial(&w, axis))
            });
            assert!(lhs.max_abs_diff(&rhs) < 1e-8, "axis {axis}");
        }
    }

    #[test]
    fn schemes_agree_to_truncation_tolerance() {
        let g = grid16();
        let a = gaussian_operator(&g);
        for axis in 0..2 {
            let exact = derivative_axis(&a, axis, DerivativeScheme::Commutator).unwrap();
            let fd = derivative_axis(
                &a,
                axis,
                DerivativeScheme::FiniteDifference(FdConfig::default()),
            )
            .unwrap();
            let rel = fd.max_abs_diff(&exact) / exact.op_norm();
            assert!(rel < 1e-5, "axis {axis}: relative defect {rel}");
        }
    }

    #[test]
    fn schemes_agree_even_on_rough_data() {
        // Both schemes differentiate the same flow, so their agreement
        // does not require smoothness.
        let g = grid16();
        let a = rough_operator(&g, 41);
        let exact = derivative_axis(&a, 0, DerivativeScheme::Commutator).unwrap();
        let fd = derivative_axis(
            &a,
            0,
            DerivativeScheme::FiniteDifference(FdConfig::default()),
        )
        .unwrap();
        let rel = fd.max_abs_diff(&exact) / exact.op_norm();
        assert!(rel < 1e-4, "relative defect {rel}");
    }

    #[test]
    fn plain_central_difference_halves_like_second_order() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let exact = derivative_axis(&a, 1, DerivativeScheme::Commutator).unwrap();
        let err = |frac: f64| {
            derivative_axis(
                &a,
                1,
                DerivativeScheme::FiniteDifference(FdConfig {
                    step_fraction: frac,
                    richardson_levels: 0,
                }),
            )
            .unwrap()
            .max_abs_diff(&exact)
        };
        let ratio = err(4e-3) / err(2e-3);
        assert!(
            (3.0..=5.0).contains(&ratio),
            "halving ratio {ratio} outside the second-order window"
        );
    }

    #[test]
    fn step_floor_is_enforced() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let bad = FdConfig { step_fraction: 1e-11, richardson_levels: 2 };
        assert!(matches!(
            derivative_axis(&a, 0, DerivativeScheme::FiniteDifference(bad)),
            Err(QhaError::InvalidParameter(_))
        ));
    }

    #[test]
    fn multi_index_derivative_iterates_axes() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let beta = MultiIndex(vec![1, 1]);
        let both = derivative(&a, &beta, DerivativeScheme::Commutator).unwrap();
        let step = derivative_axis(
            &derivative_axis(&a, 0, DerivativeScheme::Commutator).unwrap(),
            1,
            DerivativeScheme::Commutator,
        )
        .unwrap();
        assert!(both.max_abs_diff(&step) < 1e-12);
        let too_deep = MultiIndex(vec![5, 4]);
        assert!(derivative(&a, &too_deep, DerivativeScheme::Commutator).is_err());
    }

    #[test]
    fn mixed_partials_commute_on_smooth_data() {
        let g = grid_wide();
        let a = gaussian_operator(&g);
        let d01 = derivative(&a, &MultiIndex(vec![1, 1]), DerivativeScheme::Commutator).unwrap();
        let d10 = derivative_axis(
            &derivative_axis(&a, 1, DerivativeScheme::Commutator).unwrap(),
            0,
            DerivativeScheme::Commutator,
        )
        .unwrap();
        assert!(d01.max_abs_diff(&d10) < 1e-8);
    }

    #[test]
    fn derivative_table_reuses_lower_orders_and_reports_truncation() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let table = derivative_table(&a, 2, DerivativeScheme::Commutator).unwrap();
        assert_eq!(table.order(), 2);
        assert_eq!(table.iter().count(), 6); // 1 + 2 + 3 multi-indices
        let zero = table.get(&MultiIndex::zero(2)).unwrap();
        assert!(zero.op.max_abs_diff(&a) == 0.0 && zero.truncation == 0.0);
        let entry = table.get(&MultiIndex(vec![1, 1])).unwrap();
        let direct = derivative(&a, &MultiIndex(vec![1, 1]), DerivativeScheme::Commutator).unwrap();
        assert!(entry.op.max_abs_diff(&direct) < 1e-12);

        let fd_table =
            derivative_table(&a, 1, DerivativeScheme::FiniteDifference(FdConfig::default()))
                .unwrap();
        let e10 = fd_table.get(&MultiIndex(vec![1, 0])).unwrap();
        assert!(e10.truncation > 0.0 && e10.truncation < 1e-3);

        assert!(derivative_table(&a, 9, DerivativeScheme::Commutator).is_err());
    }

    #[test]
    fn ck_norm_of_identity_is_one_and_monotone() {
        let g = grid16();
        let table =
            derivative_table(&OperatorRep::identity(&g), 3, DerivativeScheme::Commutator)
                .unwrap();
        for k in 0..=3 {
            assert_abs_diff_eq!(table.ck_norm(k), 1.0, epsilon = 1e-12);
        }
        let a = gaussian_operator(&g);
        let ta = derivative_table(&a, 3, DerivativeScheme::Commutator).unwrap();
        assert!(ta.ck_norm(3) >= ta.ck_norm(2));
        assert!(ta.ck_norm(2) >= ta.ck_norm(0));
    }

    #[test]
    fn schatten_norms_are_ordered_and_consistent() {
        let g = grid16();
        let a = rough_operator(&g, 13);
        let p1 = schatten_norm(&a, SchattenExponent::P(1.0));
        let p2 = schatten_norm(&a, SchattenExponent::P(2.0));
        let pinf = schatten_norm(&a, SchattenExponent::Inf);
        assert!(p1 >= p2 && p2 >= pinf && pinf > 0.0);
        assert_abs_diff_eq!(p2, a.hs_norm(), epsilon = 1e-10);
        assert_abs_diff_eq!(pinf, a.op_norm(), epsilon = 1e-12);
        assert!(p1 >= a.trace().norm() - 1e-10);
    }

    #[test]
    fn schatten_norms_are_unitarily_invariant() {
        let g = grid16();
        let a = rough_operator(&g, 15);
        let u = crate::operator::weyl_operator(&g, &g.lattice_point(&[3, -5]), 0.5);
        let v = crate::operator::weyl_operator(&g, &g.lattice_point(&[-2, 7]), 0.5);
        let uav = u.compose(&a).unwrap().compose(&v).unwrap();
        for p in [SchattenExponent::P(1.0), SchattenExponent::P(3.0), SchattenExponent::Inf] {
            assert_abs_diff_eq!(
                schatten_norm(&a, p),
                schatten_norm(&uav, p),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn sobolev_norm_of_zero_vanishes_and_table_version_sums() {
        let g = grid16();
        let z =
            derivative_table(&OperatorRep::zeros(&g), 2, DerivativeScheme::Commutator).unwrap();
        assert_abs_diff_eq!(z.sobolev_norm(2, SchattenExponent::P(1.0)), 0.0);
        let a = gaussian_operator(&g);
        let t = derivative_table(&a, 1, DerivativeScheme::Commutator).unwrap();
        let manual: f64 = t
            .iter()
            .filter(|(b, _)| b.order() <= 1)
            .map(|(_, e)| schatten_norm(&e.op, SchattenExponent::P(2.0)))
            .sum();
        assert_abs_diff_eq!(t.sobolev_norm(1, SchattenExponent::P(2.0)), manual, epsilon = 1e-12);
    }

    #[test]
    fn symbol_gaussian_l2_matches_closed_form() {
        // ∫_{ℝ²} exp(-|z|²/w²) dz = π w²; on this box both the spatial
        // tail at L/2 and the frequency-axis sampling error are ~e⁻⁶⁴.
        let g = grid_wide();
        let w = 1.0;
        let f = make_symbol(&g, &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: w })
            .unwrap();
        let l2 = sobolev_norm_symbol(&f, 0, Some(2.0));
        assert_abs_diff_eq!(l2, (std::f64::consts::PI * w * w).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn symbol_derivative_of_plane_wave_is_multiplication() {
        let g = grid16();
        // Frequencies on the dual lattice of each axis (position axis has
        // dual step 2π/L, frequency axis has dual step h).
        let kx = 2.0 * g.omega();
        let kxi = 3.0 * g.h();
        let f = Symbol::from_fn(&g, |z| {
            C64::from_polar(1.0, kx * z.x()[0] + kxi * z.xi()[0])
        });
        let df = symbol_derivative(&f, 0, 1);
        let expect = f.scale(C64::new(0.0, kx));
        assert!(df.max_abs_diff(&expect) < 1e-10);
        let df2 = symbol_derivative_multi(&f, &MultiIndex(vec![0, 2]));
        let expect2 = f.scale(C64::new(-kxi * kxi, 0.0));
        assert!(df2.max_abs_diff(&expect2) < 1e-9);
    }

    #[test]
    fn quantization_intertwines_derivatives_with_a_sign() {
        let g = grid_wide();
        let f = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.4, -0.3], width: 1.0 },
        )
        .unwrap();
        for axis in 0..2 {
            let lhs =
                derivative_axis(&op_weyl(&f), axis, DerivativeScheme::Commutator).unwrap();
            let rhs = op_weyl(&symbol_derivative(&f, axis, 1)).scale(C64::new(-1.0, 0.0));
            let rel = lhs.max_abs_diff(&rhs) / rhs.op_norm();
            assert!(rel < 1e-8, "axis {axis}: {rel}");
        }
    }

    #[test]
    fn derivative_algebra_is_exact_for_the_commutator_scheme() {
        // Derivation identities are commutator algebra; they hold at
        // rounding even for rough operators.
        let g = grid16();
        let a = rough_operator(&g, 19);
        let b = OperatorRep::identity(&g)
            .add(&rough_operator(&g, 21).scale(C64::new(0.05, 0.0)))
            .unwrap();
        let defects = verify_derivative_algebra(&a, &b, DerivativeScheme::Commutator).unwrap();
        assert_eq!(defects.len(), 6);
        for d in defects {
            assert!(d.defect < 1e-10, "{}: {}", d.name, d.defect);
        }
    }

    #[test]
    fn derivative_algebra_holds_for_finite_differences() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let b = OperatorRep::identity(&g)
            .add(&gaussian_operator(&g).scale(C64::new(0.05, 0.0)))
            .unwrap();
        let defects = verify_derivative_algebra(
            &a,
            &b,
            DerivativeScheme::FiniteDifference(FdConfig::default()),
        )
        .unwrap();
        for d in defects {
            assert!(d.defect < 1e-5, "{}: {}", d.name, d.defect);
        }
    }

    #[test]
    fn ill_conditioned_inverse_is_rejected() {
        let g = grid16();
        let a = gaussian_operator(&g);
        let singular = OperatorRep::zeros(&g);
        assert!(matches!(
            verify_derivative_algebra(&a, &singular, DerivativeScheme::Commutator),
            Err(QhaError::IllConditioned { .. })
        ));
    }
}
