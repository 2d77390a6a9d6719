//! Convolutions between functions and operators, the Bessel-smoothed
//! identity kernel, and two-sided Schatten boundedness estimates.
//!
//! With the phase-space measure calibrated as `n^{-d} Σ_z` (which equals
//! `(2π)^{-d}` times the geometric cell-volume quadrature), the three
//! convolutions
//!
//! * `f ∗ A = n^{-d} Σ_z f(z) α_z(A)`        (function ∗ operator),
//! * `A ∗ B (z) = tr(A · α_z(β₋ B))`          (operator ∗ operator, with
//!   `β₋` the parity conjugation),
//! * `f ∗ g (z) = n^{-d} Σ_w f(w) g(z-w)`     (function ∗ function),
//!
//! satisfy the exchange identities with the transforms at constant one:
//! `F_W(f∗A) = F_σ(f)·F_W(A)`, `F_σ(A∗B) = F_W(A)·F_W(B)`, and
//! `F_σ(f∗g) = F_σ(f)·F_σ(g)`, all exactly on the lattice.  The height-
//! `n^d` spike [`crate::symbol::delta_symbol`] has calibrated mass one and
//! is the convolution unit.  Total mass couples to traces through
//! `cell·Σ_z (A∗B)(z) = (2π)^d tr(A) tr(B)`.
//!
//! The smoothing kernel is `K = op^w(b)` where `b` is the inverse
//! transform of the Bessel multiplier `(1+|w|²)^{-d}`.  Because the
//! multiplier is inverted spectrally, the factorization
//! `op^w(f) = ((1-Δ)^d f) ∗ K` holds to rounding for every symbol, and it
//! converts Schatten norms of quantized operators into weighted `L^p`
//! norms of symbol derivatives — the two-sided boundedness estimates
//! reported by [`cv_bound`] and [`reverse_cv_bound`].

use crate::calculus::{
    derivative_axis, schatten_norm, sobolev_norm_symbol, DerivativeScheme, DerivativeTable,
    SchattenExponent,
};
use crate::error::{QhaError, Result};
use crate::fft;
use crate::fourier::fourier_sigma;
use crate::grid::PhaseGrid;
use crate::operator::{parity_conjugate, OperatorRep};
use crate::quantize::{op_weyl, symbol_of};
use crate::symbol::Symbol;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::fft::{addition_table, diff_table, shift_perm};

/// Modulation profiles of a symbol: `G[c·n^d + m] = Σ_e f[c,e] e^{2πi e·m/n}`,
/// the backward frequency-block transform of each position slice.
fn modulation_profiles(f: &Symbol) -> Vec<C64> {
    let grid = f.grid();
    let n = grid.n();
    let d = grid.d();
    let dim = grid.hilbert_dim();
    let shape = vec![n; d];
    let mut out = f.values().to_vec();
    for c in 0..dim {
        fft::dft_axis_multi(&mut out[c * dim..(c + 1) * dim], &shape, true);
    }
    out
}

/// Convolution of a function with an operator:
/// `f ∗ A = n^{-d} Σ_z f(z) α_z(A)` over the phase-space lattice.
///
/// In debug builds the trace-norm Young inequality
/// `‖f∗A‖_{T¹} ≤ ‖f‖_{L¹} ‖A‖_{T¹}` is asserted on the result.
pub fn conv_fn_op(f: &Symbol, a: &OperatorRep) -> Result<OperatorRep> {
    let grid = a.grid();
    if f.grid() != grid {
        return Err(QhaError::GridMismatch(
            "symbol and operator live on different grids".into(),
        ));
    }
    let n = grid.n();
    let d = grid.d();
    let dim = grid.hilbert_dim();
    let profiles = modulation_profiles(f);
    let diffs = diff_table(n, d);
    let scale = 1.0 / dim as f64;
    let am = a.matrix();
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    // Sequential over c keeps every entry's accumulation order fixed;
    // rows parallelize freely within each step.
    for c in 0..dim {
        let perm = shift_perm(n, d, c);
        let g_c = &profiles[c * dim..(c + 1) * dim];
        out.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
            let pi = perm[i] as usize;
            let di = &diffs[i * dim..(i + 1) * dim];
            for (j, slot) in row.iter_mut().enumerate() {
                let pj = perm[j] as usize;
                *slot += g_c[di[j] as usize] * am[(pi, pj)];
            }
        });
    }
    for v in &mut out {
        *v *= scale;
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| out[i * dim + j]);
    let result = OperatorRep::from_matrix(grid, m)?;
    #[cfg(debug_assertions)]
    {
        let lhs = schatten_norm(&result, SchattenExponent::P(1.0));
        let rhs = f.lp_norm(1.0) * schatten_norm(a, SchattenExponent::P(1.0));
        debug_assert!(
            lhs <= rhs * (1.0 + 1e-9) + 1e-12,
            "trace-norm Young inequality violated: {lhs} > {rhs}"
        );
    }
    Ok(result)
}

/// Convolution of two operators: the function
/// `(A ∗ B)(z) = tr(A · α_z(β₋ B))` on the phase-space lattice, where
/// `β₋` is the parity conjugation.  Commutative, and positivity-preserving
/// on positive operators.
pub fn conv_op_op(a: &OperatorRep, b: &OperatorRep) -> Result<Symbol> {
    let grid = a.grid();
    if b.grid() != grid {
        return Err(QhaError::GridMismatch("operators live on different grids".into()));
    }
    let n = grid.n();
    let d = grid.d();
    let dim = grid.hilbert_dim();
    let c_mat = parity_conjugate(b);
    let cm = c_mat.matrix();
    let am = a.matrix();
    let adds = addition_table(n, d);
    let shape = vec![n; d];
    let mut values = vec![C64::new(0.0, 0.0); dim * dim];
    values
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(c, chunk)| {
            let perm = shift_perm(n, d, c);
            // S[m] = Σ_i A[i, i⊕m] · C[(i⊕m)⊖c, i⊖c]; the frequency profile
            // of the output at this position step is its backward transform.
            for (m, slot) in chunk.iter_mut().enumerate() {
                let add_m = &adds[m * dim..(m + 1) * dim];
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..dim {
                    let ipm = add_m[i] as usize;
                    acc += am[(i, ipm)] * cm[(perm[ipm] as usize, perm[i] as usize)];
                }
                *slot = acc;
            }
            fft::dft_axis_multi(chunk, &shape, true);
        });
    Symbol::new(grid.clone(), values)
}

/// Convolution of two functions with the calibrated lattice measure:
/// `(f ∗ g)(z) = n^{-d} Σ_w f(w) g(z-w)`, evaluated spectrally through
/// the exchange identity `F_σ(f∗g) = F_σ(f)·F_σ(g)`.
pub fn conv_fn_fn(f: &Symbol, g: &Symbol) -> Result<Symbol> {
    if f.grid() != g.grid() {
        return Err(QhaError::GridMismatch("symbols live on different grids".into()));
    }
    let ff = fourier_sigma(f);
    let fg = fourier_sigma(g);
    Ok(fourier_sigma(&ff.mul(&fg)?))
}

/// The Bessel-smoothed delta: inverse transform of the multiplier
/// `(1+|w|²)^{-power}`.  Real, even, and summable; `power = d` gives the
/// symbol of the smoothing kernel.
pub fn bessel_delta(grid: &PhaseGrid, power: u32) -> Result<Symbol> {
    if power == 0 {
        return Err(QhaError::InvalidParameter(
            "bessel power must be at least 1".into(),
        ));
    }
    let mult = Symbol::from_fn(grid, |w| {
        C64::new((1.0 + w.norm_sq()).powi(-(power as i32)), 0.0)
    });
    Ok(fourier_sigma(&mult))
}

/// Applies the operator `(1-Δ)^{power}` to a symbol spectrally: the
/// transform is multiplied by `(1+|w|²)^{power}`.
pub fn bessel_power(f: &Symbol, power: u32) -> Symbol {
    let ff = fourier_sigma(f);
    let weighted = ff.map_indexed(|flat, v| {
        let w = f.grid().point(flat);
        v * C64::new((1.0 + w.norm_sq()).powi(power as i32), 0.0)
    });
    fourier_sigma(&weighted)
}

/// Applies `(1-Δ)^{power}` to an operator with the binomial expansion
/// `Σ_k C(power,k) (-Δ)^k` and iterated phase-space derivatives; `Δ` is
/// the sum of second derivatives over all `2d` axes.
pub fn bessel_power_operator(
    a: &OperatorRep,
    power: u32,
    scheme: DerivativeScheme,
) -> Result<OperatorRep> {
    let axes = a.grid().axes();
    let laplacian = |x: &OperatorRep| -> Result<OperatorRep> {
        let mut acc = OperatorRep::zeros(x.grid());
        for axis in 0..axes {
            let second = derivative_axis(&derivative_axis(x, axis, scheme)?, axis, scheme)?;
            acc = acc.add(&second)?;
        }
        Ok(acc)
    };
    let mut out = a.clone();
    let mut power_term = a.clone();
    for k in 1..=power {
        power_term = laplacian(&power_term)?;
        let coeff = (-1f64).powi(k as i32) * binomial(power, k);
        out = out.add(&power_term.scale(C64::new(coeff, 0.0)))?;
    }
    Ok(out)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// The trace-class smoothing kernel built from the Bessel-smoothed delta,
/// together with its trace norm and the defining symbol.
///
/// On a grid with an even number of points per axis the symmetric-ordering
/// Weyl family picks up a sign when an argument wraps a full period, so
/// quantizing a real symbol is self-adjoint only up to its band-edge
/// content.  The kernel is therefore the symmetrization
/// `(op^w(b) + op^w(b)†)/2`, which is exactly self-adjoint and agrees with
/// the plain quantization on every interior frequency bin; the smoothing
/// factorization is unaffected for symbols without band-edge content.
#[derive(Clone, Debug)]
pub struct CordesKernel {
    /// The kernel operator.
    pub k: OperatorRep,
    /// Its trace norm (sum of singular values).
    pub trace_norm: f64,
    /// The Bessel-smoothed delta it quantizes.
    pub bessel_symbol: Symbol,
}

impl CordesKernel {
    /// Grid the kernel lives on.
    pub fn grid(&self) -> &PhaseGrid {
        self.k.grid()
    }

    /// Distance from self-adjointness (zero in exact arithmetic: the
    /// symbol is real and even).
    pub fn selfadjoint_defect(&self) -> f64 {
        self.k.max_abs_diff(&self.k.adjoint())
    }
}

/// Builds the smoothing kernel for a grid.  In debug builds the
/// factorization `op^w(f) = ((1-Δ)^d f) ∗ K` is asserted on a Gaussian
/// probe symbol.
pub fn cordes_kernel(grid: &PhaseGrid) -> Result<CordesKernel> {
    let bessel_symbol = bessel_delta(grid, grid.d() as u32)?;
    let quantized = op_weyl(&bessel_symbol);
    let k = quantized.add(&quantized.adjoint())?.scale(C64::new(0.5, 0.0));
    let trace_norm = schatten_norm(&k, SchattenExponent::P(1.0));
    let kernel = CordesKernel { k, trace_norm, bessel_symbol };
    #[cfg(debug_assertions)]
    {
        // A band-interior probe has no content on the branch-cut bins, so
        // the factorization must close to rounding on every grid.
        let mut rng = crate::samples::rng(0x5eed);
        let kmax = (grid.n() as i64 / 2 - 1).clamp(1, 2);
        let probe = crate::samples::random_band_limited(grid, &mut rng, kmax, 1.0, false);
        let defect = factorization_defect(&probe, &kernel).expect("same grid");
        debug_assert!(
            defect < 1e-8,
            "smoothing-kernel factorization defect {defect} on the band-interior probe"
        );
    }
    Ok(kernel)
}

/// Relative defect of the factorization `op^w(f) = ((1-Δ)^d f) ∗ K`,
/// measured in the entry-wise max norm against the operator scale.
pub fn factorization_defect(f: &Symbol, kernel: &CordesKernel) -> Result<f64> {
    let direct = op_weyl(f);
    let sharped = bessel_power(f, f.grid().d() as u32);
    let via_kernel = conv_fn_op(&sharped, &kernel.k)?;
    Ok(direct.max_abs_diff(&via_kernel) / direct.op_norm().max(1e-300))
}

/// Relative defect of the reverse factorization
/// `sym^w(A) = ((1-Δ)^d A) ∗ K` with the operator-side Bessel power
/// applied through commutator derivatives.
pub fn reverse_factorization_defect(a: &OperatorRep, kernel: &CordesKernel) -> Result<f64> {
    let direct = symbol_of(a, 0.5);
    let sharped = bessel_power_operator(a, a.grid().d() as u32, DerivativeScheme::Commutator)?;
    let via_kernel = conv_op_op(&sharped, &kernel.k)?;
    Ok(direct.max_abs_diff(&via_kernel) / direct.linf_norm().max(1e-300))
}

/// Outcome of one boundedness estimate: measured norm, certified bound,
/// and their ratio.
#[derive(Clone, Debug)]
pub struct CvReport {
    /// The measured left-hand norm.
    pub lhs: f64,
    /// The certified right-hand bound.
    pub rhs: f64,
    /// `lhs / rhs` (zero when both vanish).
    pub ratio: f64,
    /// Whether `lhs ≤ rhs` up to a 1e-3 relative tolerance.
    pub pass: bool,
}

fn make_report(lhs: f64, rhs: f64) -> CvReport {
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    CvReport { lhs, rhs, ratio, pass: lhs <= rhs * (1.0 + 1e-3) + 1e-300 }
}

/// Schatten boundedness of quantization: checks
/// `‖op^w(f)‖_{S_p} ≤ (2π)^{d/p} ‖K‖_{T¹} · Σ_{|β| ≤ 2d} ‖∂^β f‖_{L^p}`.
pub fn cv_bound(f: &Symbol, p: f64, kernel: &CordesKernel) -> Result<CvReport> {
    if !(p >= 1.0) {
        return Err(QhaError::InvalidParameter("Schatten exponent must be ≥ 1".into()));
    }
    if f.grid() != kernel.grid() {
        return Err(QhaError::GridMismatch("symbol and kernel live on different grids".into()));
    }
    let d = f.grid().d() as i32;
    let lhs = schatten_norm(&op_weyl(f), SchattenExponent::P(p));
    let constant = (2.0 * std::f64::consts::PI).powf(d as f64 / p) * kernel.trace_norm;
    let rhs = constant * sobolev_norm_symbol(f, 2 * d as u32, Some(p));
    Ok(make_report(lhs, rhs))
}

/// Reverse boundedness: checks
/// `‖sym^w(A)‖_{L^p} ≤ (2π)^{d/p} ‖K‖_{T¹} · Σ_{|β| ≤ 2d} ‖∂^β A‖_{S_p}`
/// using a precomputed derivative table of `A` through order `2d`.
pub fn reverse_cv_bound(
    a: &OperatorRep,
    p: f64,
    kernel: &CordesKernel,
    table: &DerivativeTable,
) -> Result<CvReport> {
    if !(p >= 1.0) {
        return Err(QhaError::InvalidParameter("Schatten exponent must be ≥ 1".into()));
    }
    if a.grid() != kernel.grid() || table.grid() != a.grid() {
        return Err(QhaError::GridMismatch("operator, kernel, and table grids differ".into()));
    }
    let need = 2 * a.grid().d() as u32;
    if table.order() < need {
        return Err(QhaError::InvalidParameter(format!(
            "derivative table holds order {} but the bound needs {need}",
            table.order()
        )));
    }
    let d = a.grid().d() as f64;
    let lhs = symbol_of(a, 0.5).lp_norm(p);
    let constant = (2.0 * std::f64::consts::PI).powf(d / p) * kernel.trace_norm;
    let rhs = constant * table.sobolev_norm(need, SchattenExponent::P(p));
    Ok(make_report(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::derivative_table;
    use crate::fourier::{fourier_sigma, fourier_weyl};
    use crate::operator::op_shift;
    use crate::samples;
    use crate::symbol::{delta_symbol, make_symbol, SymbolFamily};

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1, 8, 8.0).unwrap()
    }

    fn grid16() -> PhaseGrid {
        PhaseGrid::new(1, 16, 8.0).unwrap()
    }

    fn grid_wide() -> PhaseGrid {
        PhaseGrid::new(1, 64, 16.0).unwrap()
    }

    fn random_symbol(g: &PhaseGrid, seed: u64) -> Symbol {
        let mut rng = samples::rng(seed);
        Symbol::new(
            g.clone(),
            (0..g.len()).map(|_| samples::complex_normal(&mut rng)).collect(),
        )
        .unwrap()
    }

    /// Direct-sum oracle: f∗A evaluated literally through shifted copies.
    fn conv_fn_op_naive(f: &Symbol, a: &OperatorRep) -> OperatorRep {
        let g = a.grid();
        let mut acc = OperatorRep::zeros(g);
        for flat in 0..g.len() {
            let z = g.point(flat);
            let shifted = op_shift(a, &z).scale(f.value(flat));
            acc = acc.add(&shifted).unwrap();
        }
        acc.scale(C64::new(1.0 / g.hilbert_dim() as f64, 0.0))
    }

    /// Direct-trace oracle for the operator convolution.
    fn conv_op_op_naive(a: &OperatorRep, b: &OperatorRep) -> Symbol {
        let g = a.grid();
        let pb = parity_conjugate(b);
        Symbol::from_fn(g, |_| C64::new(0.0, 0.0)).map_indexed(|flat, _| {
            let z = g.point(flat);
            let shifted = op_shift(&pb, &z);
            a.compose(&shifted).unwrap().trace()
        })
    }

    /// Direct double-sum oracle for the function convolution.
    fn conv_fn_fn_naive(f: &Symbol, g_sym: &Symbol) -> Symbol {
        let g = f.grid();
        let n = g.n() as i64;
        let scale = 1.0 / g.hilbert_dim() as f64;
        Symbol::from_fn(g, |_| C64::new(0.0, 0.0)).map_indexed(|flat, _| {
            let zi = g.multi_index(flat);
            let mut acc = C64::new(0.0, 0.0);
            for wf in 0..g.len() {
                let wi = g.multi_index(wf);
                let diff: Vec<i64> = zi
                    .iter()
                    .zip(&wi)
                    .map(|(&a, &b)| (a as i64 - b as i64).rem_euclid(n))
                    .collect();
                let df: usize = diff.iter().fold(0usize, |acc, &x| acc * n as usize + x as usize);
                acc += f.value(wf) * g_sym.value(df);
            }
            acc * scale
        })
    }

    #[test]
    fn delta_is_the_convolution_unit() {
        let g = grid16();
        let mut rng = samples::rng(3);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let out = conv_fn_op(&delta_symbol(&g), &a).unwrap();
        assert!(out.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn conv_fn_op_matches_direct_sum() {
        let g = grid();
        let mut rng = samples::rng(5);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let f = random_symbol(&g, 7);
        let fast = conv_fn_op(&f, &a).unwrap();
        let naive = conv_fn_op_naive(&f, &a);
        assert!(fast.max_abs_diff(&naive) < 1e-11);
    }

    #[test]
    fn function_operator_exchange_identity() {
        let g = grid16();
        let mut rng = samples::rng(9);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let f = random_symbol(&g, 11);
        let lhs = fourier_weyl(&conv_fn_op(&f, &a).unwrap(), 0.5);
        let rhs = fourier_sigma(&f).mul(&fourier_weyl(&a, 0.5)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn trace_norm_young_inequality_on_random_pairs() {
        let g = grid();
        for seed in 0..5u64 {
            let mut rng = samples::rng(100 + seed);
            let a = samples::random_matrix_operator(&g, &mut rng);
            let f = random_symbol(&g, 200 + seed);
            let out = conv_fn_op(&f, &a).unwrap();
            for p in [1.0, 2.0] {
                let lhs = schatten_norm(&out, SchattenExponent::P(p));
                let rhs = f.lp_norm(p) * schatten_norm(&a, SchattenExponent::P(1.0));
                assert!(lhs <= rhs * (1.0 + 1e-9), "p={p}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn conv_op_op_matches_direct_traces() {
        let g = grid();
        let mut rng = samples::rng(13);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let b = samples::random_matrix_operator(&g, &mut rng);
        let fast = conv_op_op(&a, &b).unwrap();
        let naive = conv_op_op_naive(&a, &b);
        assert!(fast.max_abs_diff(&naive) < 1e-11);
    }

    #[test]
    fn operator_convolution_is_commutative() {
        let g = grid16();
        let mut rng = samples::rng(17);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let b = samples::random_matrix_operator(&g, &mut rng);
        let ab = conv_op_op(&a, &b).unwrap();
        let ba = conv_op_op(&b, &a).unwrap();
        assert!(ab.max_abs_diff(&ba) < 1e-10);
    }

    #[test]
    fn operator_convolution_total_mass_couples_traces() {
        let g = grid16();
        let mut rng = samples::rng(19);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let b = samples::random_matrix_operator(&g, &mut rng);
        let ab = conv_op_op(&a, &b).unwrap();
        let mass: C64 = ab.values().iter().sum::<C64>() * g.cell_volume();
        let expected = a.trace() * b.trace() * (2.0 * std::f64::consts::PI).powi(g.d() as i32);
        assert!((mass - expected).norm() / expected.norm() < 1e-10);
    }

    #[test]
    fn operator_exchange_identity() {
        let g = grid16();
        let mut rng = samples::rng(23);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let b = samples::random_matrix_operator(&g, &mut rng);
        let lhs = fourier_sigma(&conv_op_op(&a, &b).unwrap());
        let rhs = fourier_weyl(&a, 0.5).mul(&fourier_weyl(&b, 0.5)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-8);
    }

    #[test]
    fn projector_self_convolution_is_positive_at_origin() {
        let g = grid16();
        // Parity-symmetric normalized Gaussian state.
        let phi: Vec<C64> = (0..g.n())
            .map(|i| C64::new((-(g.coord(0, i).powi(2)) / 2.0).exp(), 0.0))
            .collect();
        let norm: f64 = phi.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.h();
        let phi: Vec<C64> = phi.iter().map(|v| v / norm.sqrt()).collect();
        let p = OperatorRep::rank_one(&g, &phi, &phi).unwrap();
        let pp = conv_op_op(&p, &p).unwrap();
        let at0 = pp.value_at_steps(&[0, 0]);
        assert!(at0.im.abs() < 1e-12);
        assert!(at0.re > 0.0);
    }

    #[test]
    fn function_convolution_matches_double_sum_and_delta_unit() {
        let g = grid();
        let f = random_symbol(&g, 29);
        let h = random_symbol(&g, 31);
        let fast = conv_fn_fn(&f, &h).unwrap();
        let naive = conv_fn_fn_naive(&f, &h);
        assert!(fast.max_abs_diff(&naive) < 1e-11);
        let unit = conv_fn_fn(&delta_symbol(&g), &f).unwrap();
        assert!(unit.max_abs_diff(&f) < 1e-11);
    }

    #[test]
    fn quantization_is_a_convolution_homomorphism() {
        let g = grid16();
        let mut rng = samples::rng(37);
        let f = samples::random_band_limited(&g, &mut rng, 3, 1.5, false);
        let h = samples::random_band_limited(&g, &mut rng, 3, 1.5, false);
        // op^w(f) ∗ op^w(h) = f ∗ h as functions.
        let lhs = conv_op_op(&op_weyl(&f), &op_weyl(&h)).unwrap();
        let rhs = conv_fn_fn(&f, &h).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        // f ∗ op^w(h) = op^w(f ∗ h) as operators.
        let lhs_op = conv_fn_op(&f, &op_weyl(&h)).unwrap();
        let rhs_op = op_weyl(&conv_fn_fn(&f, &h).unwrap());
        assert!(lhs_op.max_abs_diff(&rhs_op) < 1e-9);
    }

    #[test]
    fn bessel_delta_is_real_even_and_inverts() {
        let g = grid16();
        let b = bessel_delta(&g, 1).unwrap();
        for flat in 0..g.len() {
            assert!(b.value(flat).im.abs() < 1e-12);
        }
        // Evenness on the lattice: value at -z equals value at z.
        for flat in 0..g.len() {
            let steps: Vec<i64> = g.multi_index(flat).iter().map(|&i| g.signed_index(i)).collect();
            let neg: Vec<i64> = steps.iter().map(|&s| -s).collect();
            let here = b.value(flat);
            let there = b.value_at_steps(&neg);
            assert!((here - there).norm() < 1e-12);
        }
        // Forward transform returns the multiplier.
        let back = fourier_sigma(&b);
        let expect = Symbol::from_fn(&g, |w| C64::new(1.0 / (1.0 + w.norm_sq()), 0.0));
        assert!(back.max_abs_diff(&expect) < 1e-10);
        assert!(bessel_delta(&g, 0).is_err());
    }

    #[test]
    fn bessel_power_inverts_bessel_delta_smoothing() {
        let g = grid16();
        let f = random_symbol(&g, 41);
        let smoothed = conv_fn_fn(&bessel_delta(&g, 1).unwrap(), &f).unwrap();
        let recovered = bessel_power(&smoothed, 1);
        assert!(recovered.max_abs_diff(&f) < 1e-9);
    }

    #[test]
    fn kernel_is_selfadjoint_with_positive_trace_norm() {
        let g = grid16();
        let k = cordes_kernel(&g).unwrap();
        assert!(k.trace_norm > 0.0);
        assert!(k.selfadjoint_defect() < 1e-10);
    }

    #[test]
    fn factorization_is_exact_inside_the_band() {
        let g = grid16();
        let kernel = cordes_kernel(&g).unwrap();
        // The chain op^w(f) = ((1-Δ)^d f) ∗ K closes through the spectral
        // multiplier, so it holds at rounding for every symbol whose
        // transform avoids the band-edge bins — even rough random ones.
        let mut rng = samples::rng(43);
        let f = samples::random_band_limited(&g, &mut rng, 5, 1.0, false);
        assert!(factorization_defect(&f, &kernel).unwrap() < 1e-10);
        // A Gaussian is only edge-free once the box is wide enough for both
        // its spatial and spectral tails; there the defect reaches rounding.
        let gw = grid_wide();
        let kernel_w = cordes_kernel(&gw).unwrap();
        let gauss = make_symbol(
            &gw,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.0 },
        )
        .unwrap();
        assert!(factorization_defect(&gauss, &kernel_w).unwrap() < 1e-11);
    }

    #[test]
    fn reverse_factorization_holds_on_smooth_operators() {
        let g = grid_wide();
        let kernel = cordes_kernel(&g).unwrap();
        let gauss = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.3, -0.2], width: 1.0 },
        )
        .unwrap();
        let a = op_weyl(&gauss);
        let defect = reverse_factorization_defect(&a, &kernel).unwrap();
        assert!(defect < 1e-4, "defect {defect}");
    }

    #[test]
    fn cv_bound_passes_on_standard_symbols() {
        let g = grid16();
        let kernel = cordes_kernel(&g).unwrap();

        let zero = Symbol::zeros(&g);
        let r = cv_bound(&zero, 2.0, &kernel).unwrap();
        assert!(r.pass && r.lhs == 0.0 && r.ratio == 0.0);

        let gauss = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.0 },
        )
        .unwrap();
        let r = cv_bound(&gauss, 2.0, &kernel).unwrap();
        assert!(r.pass && r.ratio < 1.0, "ratio {}", r.ratio);

        // Oscillatory symbol localized by a bump, checked in trace norm.
        let cs = make_symbol(&g, &SymbolFamily::CosSin { kx: 1.0, kxi: 1.0 }).unwrap();
        let bump = make_symbol(
            &g,
            &SymbolFamily::Bump { center: vec![0.0, 0.0], radius: 3.0 },
        )
        .unwrap();
        let r = cv_bound(&cs.mul(&bump).unwrap(), 1.0, &kernel).unwrap();
        assert!(r.pass, "ratio {}", r.ratio);

        assert!(cv_bound(&gauss, 0.5, &kernel).is_err());
    }

    #[test]
    fn reverse_cv_bound_passes_and_requires_table_depth() {
        let g = grid16();
        let kernel = cordes_kernel(&g).unwrap();
        let gauss = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.0 },
        )
        .unwrap();
        let a = op_weyl(&gauss);
        let table = derivative_table(&a, 2, DerivativeScheme::Commutator).unwrap();
        let r = reverse_cv_bound(&a, 2.0, &kernel, &table).unwrap();
        assert!(r.pass, "ratio {}", r.ratio);

        let zero = OperatorRep::zeros(&g);
        let zt = derivative_table(&zero, 2, DerivativeScheme::Commutator).unwrap();
        let rz = reverse_cv_bound(&zero, 2.0, &kernel, &zt).unwrap();
        assert!(rz.pass && rz.lhs == 0.0);

        let shallow = derivative_table(&a, 1, DerivativeScheme::Commutator).unwrap();
        assert!(reverse_cv_bound(&a, 2.0, &kernel, &shallow).is_err());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = samples::random_matrix_operator(&grid(), &mut samples::rng(1));
        let f = random_symbol(&grid16(), 2);
        assert!(conv_fn_op(&f, &a).is_err());
        assert!(conv_fn_fn(&f, &random_symbol(&grid(), 3)).is_err());
        let b = samples::random_matrix_operator(&grid16(), &mut samples::rng(4));
        assert!(conv_op_op(&a, &b).is_err());
    }

    #[test]
    fn d2_convolution_smoke() {
        let g = PhaseGrid::new(2, 4, 8.0).unwrap();
        let mut rng = samples::rng(47);
        let a = samples::random_matrix_operator(&g, &mut rng);
        let f = random_symbol(&g, 49);
        let fast = conv_fn_op(&f, &a).unwrap();
        let naive = conv_fn_op_naive(&f, &a);
        assert!(fast.max_abs_diff(&naive) < 1e-11);
        let b = samples::random_matrix_operator(&g, &mut rng);
        let ab = conv_op_op(&a, &b).unwrap();
        let ab_naive = conv_op_op_naive(&a, &b);
        assert!(ab.max_abs_diff(&ab_naive) < 1e-11);
    }
}
