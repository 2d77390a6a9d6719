//! Short-time Fourier transforms of symbols and of operators, the mixed
//! `L^{∞,1}` norm, and the derived modulation norms.
//!
//! The function-side transform pairs a symbol against shifted and
//! modulated copies of a window symbol `g`,
//!
//! ```text
//! V_g f(z, w) = ⟨f, γ_w(α_z g)⟩,
//! ```
//!
//! with the calibrated pairing `⟨u, v⟩ = n^{-d} Σ u·conj(v)`; each fixed-`z`
//! slice is then exactly one symplectic transform of `f·conj(α_z g)`.  The
//! operator-side transform pairs an operator against shifted and modulated
//! copies of a window operator `B` in the Hilbert–Schmidt pairing,
//! `V_B A(z, w) = tr(A·(γ_w α_z B)†)`.  Under the composite map
//! `A ↦ F_σ(F_W(A))` the two transforms agree entry for entry (for data
//! away from the frequency-band edge), which makes the induced modulation
//! norms match between a symbol and its quantization at constant one.
//!
//! The mixed norm integrates the sup over the translation variable:
//! `‖V‖_{L^{∞,1}} = Σ_w cell·sup_z |V(z,w)|`.  The sup is sampled on a
//! strided sub-lattice; the norm functions optionally sharpen it by
//! re-evaluating the transform at the full-resolution neighbors of each
//! per-`w` argmax.

use crate::calculus::{symbol_derivative_multi, MultiIndex};
use crate::error::{QhaError, Result};
use crate::fft::{self, addition_table, shift_perm};
use crate::fourier::fourier_sigma;
use crate::grid::PhaseGrid;
use crate::operator::OperatorRep;
use crate::symbol::{make_symbol, shift_function, Symbol, SymbolFamily};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write as IoWrite;
use std::path::Path;

/// A Schwartz-class STFT window: either a Gaussian symbol for the
/// function-side transform or a rank-one Gaussian state projector for the
/// operator side.
#[derive(Clone, Debug)]
pub enum WindowSpec {
    /// `exp(-|z-center|²/(2 width²))` on the phase-space grid
    /// (`center.len() == 2d`).
    GaussianSymbol {
        /// Phase-space center of the window.
        center: Vec<f64>,
        /// Gaussian width; must be positive.
        width: f64,
    },
    /// Normalized rank-one projector onto the Gaussian state
    /// `φ(t) ∝ exp(-|t-center|²/(2 width²))` (`center.len() == d`).
    GaussianProjector {
        /// Position-space center of the state.
        center: Vec<f64>,
        /// Gaussian width; must be positive.
        width: f64,
    },
}

impl WindowSpec {
    fn width(&self) -> f64 {
        match self {
            WindowSpec::GaussianSymbol { width, .. } => *width,
            WindowSpec::GaussianProjector { width, .. } => *width,
        }
    }

    fn check_nonzero(&self) -> Result<()> {
        let w = self.width();
        if !(w.is_finite() && w > 0.0) {
            return Err(QhaError::InvalidParameter(
                "window width must be a positive finite number".into(),
            ));
        }
        Ok(())
    }

    /// Realizes the window as a symbol for the function-side transform.
    pub fn symbol_window(&self, grid: &PhaseGrid) -> Result<Symbol> {
        self.check_nonzero()?;
        match self {
            WindowSpec::GaussianSymbol { center, width } => make_symbol(
                grid,
                &SymbolFamily::Gaussian { center: center.clone(), width: *width },
            ),
            WindowSpec::GaussianProjector { .. } => Err(QhaError::InvalidParameter(
                "a projector window cannot serve the function-side transform".into(),
            )),
        }
    }

    /// Realizes the window as a rank-one projector for the operator-side
    /// transform.
    pub fn projector_window(&self, grid: &PhaseGrid) -> Result<OperatorRep> {
        self.check_nonzero()?;
        match self {
            WindowSpec::GaussianProjector { center, width } => {
                if center.len() != grid.d() {
                    return Err(QhaError::InvalidParameter(
                        "projector center needs d coordinates".into(),
                    ));
                }
                let dim = grid.hilbert_dim();
                let mut phi: Vec<C64> = (0..dim)
                    .map(|i| {
                        let t = grid.pos_coords(i);
                        let q: f64 = t
                            .iter()
                            .zip(center)
                            .map(|(a, c)| (a - c) * (a - c))
                            .sum();
                        C64::new((-q / (2.0 * width * width)).exp(), 0.0)
                    })
                    .collect();
                let weight = grid.h().powi(grid.d() as i32);
                let norm_sq: f64 = phi.iter().map(|v| v.norm_sqr()).sum::<f64>() * weight;
                if !(norm_sq > 0.0) {
                    return Err(QhaError::InvalidParameter(
                        "window state has vanishing norm on this grid".into(),
                    ));
                }
                let s = norm_sq.sqrt();
                for v in &mut phi {
                    *v /= s;
                }
                OperatorRep::rank_one(grid, &phi, &phi)
            }
            WindowSpec::GaussianSymbol { .. } => Err(QhaError::InvalidParameter(
                "a symbol window cannot serve the operator-side transform".into(),
            )),
        }
    }
}

/// Sampling policy for the translation variable of an STFT.
#[derive(Clone, Copy, Debug)]
pub struct StftConfig {
    /// Sub-lattice stride for the translation variable `z`.
    pub stride: usize,
    /// Whether the norm functions sharpen each per-`w` sup by evaluating
    /// the full-resolution neighbors of the coarse argmax.
    pub refine: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig { stride: 2, refine: true }
    }
}

impl StftConfig {
    fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(QhaError::InvalidParameter("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Flat lattice indices whose multi-index components are all multiples of
/// `stride`, in ascending order.
fn coarse_points(grid: &PhaseGrid, stride: usize) -> Vec<usize> {
    (0..grid.len())
        .filter(|&flat| {
            grid.multi_index(flat).iter().all(|&i| i % stride == 0)
        })
        .collect()
}

/// An STFT sampled over a coarse translation grid `z` and the full
/// modulation lattice `w`.
#[derive(Clone, Debug)]
pub struct StftSample {
    grid: PhaseGrid,
    stride: usize,
    z_points: Vec<usize>,
    /// Values in `z`-major order: `data[zi * grid.len() + w_flat]`.
    data: Vec<C64>,
}

impl StftSample {
    /// Builds a sample from explicit rows; mainly useful for tests and
    /// external data.
    pub fn from_rows(
        grid: PhaseGrid,
        stride: usize,
        z_points: Vec<usize>,
        data: Vec<C64>,
    ) -> Result<Self> {
        if data.len() != z_points.len() * grid.len() {
            return Err(QhaError::InvalidParameter(
                "sample data must hold one full w-row per z point".into(),
            ));
        }
        if z_points.iter().any(|&z| z >= grid.len()) {
            return Err(QhaError::InvalidParameter("z point outside the lattice".into()));
        }
        Ok(StftSample { grid, stride, z_points, data })
    }

    /// Grid the sample lives on.
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Stride of the translation sub-lattice.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Flat lattice indices of the sampled translations.
    pub fn z_points(&self) -> &[usize] {
        &self.z_points
    }

    /// The `w`-row for the `zi`-th sampled translation.
    pub fn row(&self, zi: usize) -> &[C64] {
        let len = self.grid.len();
        &self.data[zi * len..(zi + 1) * len]
    }

    /// Value at the `zi`-th sampled translation and modulation bin `w`.
    pub fn value(&self, zi: usize, w_flat: usize) -> C64 {
        self.data[zi * self.grid.len() + w_flat]
    }

    /// Largest pointwise deviation from another sample on the same grid
    /// and translation set.
    pub fn max_abs_diff(&self, other: &StftSample) -> f64 {
        assert_eq!(self.z_points, other.z_points, "samples cover different translations");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Writes the magnitude of one `w`-row as CSV (`i_1,…,i_{2d},abs`).
    pub fn write_magnitude_csv(&self, zi: usize, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# z_flat = {}", self.z_points[zi])?;
        for (w, v) in self.row(zi).iter().enumerate() {
            let idx = self.grid.multi_index(w);
            let cols: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{},{}", cols.join(","), v.norm())?;
        }
        Ok(())
    }
}

/// One function-side STFT row: `V_g f(z, ·) = F_σ(f · conj(α_z g))`.
fn function_row(f: &Symbol, g: &Symbol, z_flat: usize) -> Vec<C64> {
    let zp = f.grid().point(z_flat);
    let gz = shift_function(g, &zp);
    let psi = f.map_indexed(|i, v| v * gz.value(i).conj());
    fourier_sigma(&psi).into_values()
}

fn check_function_inputs(f: &Symbol, g: &Symbol) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(QhaError::GridMismatch("symbol and window live on different grids".into()));
    }
    if g.linf_norm() == 0.0 {
        return Err(QhaError::InvalidParameter("the STFT window must be nonzero".into()));
    }
    Ok(())
}

/// Function-side STFT against an arbitrary symbol window.
pub fn stft_function_with(f: &Symbol, g: &Symbol, config: &StftConfig) -> Result<StftSample> {
    check_function_inputs(f, g)?;
    config.validate()?;
    let grid = f.grid().clone();
    let z_points = coarse_points(&grid, config.stride);
    let rows: Vec<Vec<C64>> = z_points
        .par_iter()
        .map(|&zf| function_row(f, g, zf))
        .collect();
    let data: Vec<C64> = rows.into_iter().flatten().collect();
    StftSample::from_rows(grid, config.stride, z_points, data)
}

/// Function-side STFT `V_g f(z,w) = ⟨f, γ_w(α_z g)⟩` with a standard
/// Gaussian window.
pub fn stft_function(f: &Symbol, window: &WindowSpec, config: &StftConfig) -> Result<StftSample> {
    let g = window.symbol_window(f.grid())?;
    stft_function_with(f, &g, config)
}

/// In-place evaluation of `C_w = W_{w/2}† A W_{w/2}†` on the column-major
/// matrix slice `cs`, using the factorization `W = e^{-ix·ξ/2} M_ξ S_x`
/// into a modulation diagonal and per-axis spectral shifts:
///
/// ```text
/// C_w = e^{i x̄·ξ̄} · S̄† M̄† · A · S̄† M̄†,     (x̄, ξ̄) = w/2.
/// ```
///
/// The diagonals scale rows and columns; the shifts become per-axis DFT
/// multipliers.  Left multiplication by `S̄†` puts `e^{+iν_k x̄}` on the
/// row-index axes; right multiplication acts through the transpose, which
/// reflects the frequency index, so the column-index axes carry
/// `e^{+iν_{(-k) mod n} x̄}`.  The two differ only at the band-edge bin of
/// an even grid — the reflection fixes that bin instead of negating it —
/// which is precisely the branch behavior of half-step shifts.
fn halfshift_sandwich(
    grid: &PhaseGrid,
    cs: &mut [C64],
    w: &crate::grid::PhasePoint,
    shape2: &[usize],
    digits2: &[u32],
) {
    let n = grid.n();
    let d = grid.d();
    let dim = grid.hilbert_dim();
    let xbar: Vec<f64> = (0..d).map(|ax| w.coords[ax] * 0.5).collect();
    let xibar: Vec<f64> = (0..d).map(|ax| w.coords[d + ax] * 0.5).collect();
    let mconj: Vec<C64> = (0..dim)
        .map(|i| {
            let t = grid.pos_coords(i);
            let dot: f64 = t.iter().zip(&xibar).map(|(a, b)| a * b).sum();
            C64::from_polar(1.0, -dot)
        })
        .collect();
    for j in 0..dim {
        let col = &mut cs[j * dim..(j + 1) * dim];
        for (v, m) in col.iter_mut().zip(&mconj) {
            *v *= m;
        }
    }
    fft::dft_axis_multi(cs, shape2, false);
    let scale = 1.0 / n as f64;
    let row_mult: Vec<Vec<C64>> = (0..d)
        .map(|ax| {
            let om = grid.axis_step(d + ax);
            (0..n)
                .map(|k| {
                    let nu = fft::signed_freq_index(k, n) as f64 * om;
                    C64::from_polar(scale, nu * xbar[ax])
                })
                .collect()
        })
        .collect();
    let col_mult: Vec<Vec<C64>> = (0..d)
        .map(|ax| {
            let om = grid.axis_step(d + ax);
            (0..n)
                .map(|k| {
                    let kr = (n - k) % n;
                    let nu = fft::signed_freq_index(kr, n) as f64 * om;
                    C64::from_polar(scale, nu * xbar[ax])
                })
                .collect()
        })
        .collect();
    let axes = 2 * d;
    for (flat, v) in cs.iter_mut().enumerate() {
        let dg = &digits2[flat * axes..(flat + 1) * axes];
        let mut m = C64::new(1.0, 0.0);
        for ax in 0..d {
            m *= col_mult[ax][dg[ax] as usize];
            m *= row_mult[ax][dg[d + ax] as usize];
        }
        *v *= m;
    }
    fft::dft_axis_multi(cs, shape2, true);
    let phase_dot: f64 = xbar.iter().zip(&xibar).map(|(a, b)| a * b).sum();
    let s2 = C64::from_polar(1.0, phase_dot);
    for j in 0..dim {
        let mj = mconj[j] * s2;
        let col = &mut cs[j * dim..(j + 1) * dim];
        for v in col.iter_mut() {
            *v *= mj;
        }
    }
}

/// Shared operator-side sweep.  One cyclic rearrangement turns
/// `tr(A·(γ_w α_z B)†)` into `tr(C_w · α_z(B†))` with
/// `C_w = W_{w/2}† A W_{w/2}†`, and for a lattice translation `z = (c, e)`
/// that trace is a phase-weighted sum over the wrapped diagonals of the
/// two factors,
///
/// ```text
/// tr(C_w α_z(B†)) = Σ_q e^{2πi e·q/n} Σ_i C_w[i, i+q] · B†[i+q-c, i-c],
/// ```
///
/// so the whole coarse translation row at fixed `w` is a batch of diagonal
/// correlations followed by one inverse DFT in `q`.  With `refine` set,
/// the full-resolution neighbors of each row's argmax sharpen the per-`w`
/// sup through the same diagonal formula.
fn operator_pass(
    a: &OperatorRep,
    b: &OperatorRep,
    config: &StftConfig,
    refine: bool,
) -> Result<(Vec<usize>, Vec<Vec<C64>>, Vec<f64>)> {
    if a.grid() != b.grid() {
        return Err(QhaError::GridMismatch(
            "operator and window live on different grids".into(),
        ));
    }
    if b.max_abs_diff(&OperatorRep::zeros(a.grid())) == 0.0 {
        return Err(QhaError::InvalidParameter("the STFT window must be nonzero".into()));
    }
    config.validate()?;
    let grid = a.grid().clone();
    let n = grid.n();
    let d = grid.d();
    let dim = grid.hilbert_dim();
    let stride = config.stride;
    let z_points = coarse_points(&grid, stride);
    let badj = b.adjoint();
    let adds = addition_table(n, d);
    let shape = vec![n; d];
    // Wrapped diagonals of B†: bdiags[q·dim + j] = B†[j+q, j] (indices added
    // per axis, mod n).  Column-major storage puts B†[r, c] at [c·dim + r].
    let bdiags: Vec<C64> = {
        let bs = badj.matrix().as_slice();
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        for q in 0..dim {
            let aq = &adds[q * dim..(q + 1) * dim];
            let row = &mut out[q * dim..(q + 1) * dim];
            for j in 0..dim {
                row[j] = bs[j * dim + aq[j] as usize];
            }
        }
        out
    };
    // Coarse sub-lattice structure shared by every w, plus the diagonals of
    // B† pre-permuted by each coarse position shift.
    let coarse_axis: Vec<usize> = (0..n).step_by(stride).collect();
    let coarse_pos: Vec<usize> = {
        let mut out = vec![0usize];
        for _ in 0..d {
            let mut next = Vec::with_capacity(out.len() * coarse_axis.len());
            for &base in &out {
                for &c in &coarse_axis {
                    next.push(base * n + c);
                }
            }
            out = next;
        }
        out
    };
    let coarse_freq = coarse_pos.clone();
    let bdiags_coarse: Vec<Vec<C64>> = coarse_pos
        .iter()
        .map(|&c| {
            let perm = shift_perm(n, d, c);
            let mut out = vec![C64::new(0.0, 0.0); dim * dim];
            for q in 0..dim {
                let src = &bdiags[q * dim..(q + 1) * dim];
                let dst = &mut out[q * dim..(q + 1) * dim];
                for (slot, &p) in dst.iter_mut().zip(&perm) {
                    *slot = src[p as usize];
                }
            }
            out
        })
        .collect();
    let am_slice: Vec<C64> = a.matrix().as_slice().to_vec();
    let shape2 = vec![n; 2 * d];
    let digits2 = fft::cube_multi_indices(n, 2 * d);
    let digits = fft::cube_multi_indices(n, d);
    let root: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();

    let per_w: Vec<(Vec<C64>, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|w_flat| {
            let wp = grid.point(w_flat);
            let mut cs = am_slice.clone();
            halfshift_sandwich(&grid, &mut cs, &wp, &shape2, &digits2);
            // Wrapped diagonals of C_w: adiags[q·dim + i] = C_w[i, i+q].
            let mut adiags = vec![C64::new(0.0, 0.0); dim * dim];
            for q in 0..dim {
                let aq = &adds[q * dim..(q + 1) * dim];
                let row = &mut adiags[q * dim..(q + 1) * dim];
                for i in 0..dim {
                    row[i] = cs[aq[i] as usize * dim + i];
                }
            }
            let mut column = Vec::with_capacity(z_points.len());
            let mut profile = vec![C64::new(0.0, 0.0); dim];
            for bd in &bdiags_coarse {
                for (q, slot) in profile.iter_mut().enumerate() {
                    let x = &adiags[q * dim..(q + 1) * dim];
                    let y = &bd[q * dim..(q + 1) * dim];
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..dim {
                        acc += x[i] * y[i];
                    }
                    *slot = acc;
                }
                fft::dft_axis_multi(&mut profile, &shape, true);
                for &ef in &coarse_freq {
                    column.push(profile[ef]);
                }
            }
            let mut sup = column.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if refine {
                let (zi_star, _) = column
                    .iter()
                    .enumerate()
                    .fold((0usize, -1.0f64), |(bi, bv), (i, v)| {
                        let nv = v.norm();
                        if nv > bv { (i, nv) } else { (bi, bv) }
                    });
                let star_multi = grid.multi_index(z_points[zi_star]);
                for steps in neighbor_steps(&star_multi, n) {
                    let c_flat = steps[..d]
                        .iter()
                        .fold(0usize, |acc, &s| acc * n + s as usize);
                    let perm = shift_perm(n, d, c_flat);
                    let mut val = C64::new(0.0, 0.0);
                    for q in 0..dim {
                        let x = &adiags[q * dim..(q + 1) * dim];
                        let bq = &bdiags[q * dim..(q + 1) * dim];
                        let mut acc = C64::new(0.0, 0.0);
                        for i in 0..dim {
                            acc += x[i] * bq[perm[i] as usize];
                        }
                        let mut phase = C64::new(1.0, 0.0);
                        let qd = &digits[q * d..(q + 1) * d];
                        for ax in 0..d {
                            let e_ax = steps[d + ax] as usize;
                            phase *= root[e_ax * qd[ax] as usize % n];
                        }
                        val += phase * acc;
                    }
                    sup = sup.max(val.norm());
                }
            }
            (column, sup)
        })
        .collect();

    let sups: Vec<f64> = per_w.iter().map(|(_, s)| *s).collect();
    let columns: Vec<Vec<C64>> = per_w.into_iter().map(|(c, _)| c).collect();
    Ok((z_points, columns, sups))
}

/// Full-resolution neighbor offsets of a lattice multi-index: every point
/// of the surrounding unit cube (including the center), as signed steps.
fn neighbor_steps(multi: &[usize], n: usize) -> Vec<Vec<i64>> {
    let axes = multi.len();
    let mut out = vec![vec![]];
    for ax in 0..axes {
        let mut next = Vec::with_capacity(out.len() * 3);
        for base in &out {
            for delta in [-1i64, 0, 1] {
                let mut s = base.clone();
                s.push((multi[ax] as i64 + delta).rem_euclid(n as i64));
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// Operator-side STFT against an arbitrary window operator.
pub fn stft_operator_with(
    a: &OperatorRep,
    b: &OperatorRep,
    config: &StftConfig,
) -> Result<StftSample> {
    let (z_points, columns, _) = operator_pass(a, b, config, false)?;
    let grid = a.grid().clone();
    let wdim = grid.len();
    let zcount = z_points.len();
    let mut data = vec![C64::new(0.0, 0.0); zcount * wdim];
    for (w, col) in columns.iter().enumerate() {
        for (zi, &v) in col.iter().enumerate() {
            data[zi * wdim + w] = v;
        }
    }
    StftSample::from_rows(grid, config.stride, z_points, data)
}

/// Operator-side STFT `V_B A(z,w) = tr(A·(γ_w α_z B)†)` with a rank-one
/// Gaussian projector window.
pub fn stft_operator(
    a: &OperatorRep,
    window: &WindowSpec,
    config: &StftConfig,
) -> Result<StftSample> {
    let b = window.projector_window(a.grid())?;
    stft_operator_with(a, &b, config)
}

/// The mixed norm `Σ_w cell·sup_z |V(z,w)|` of a sampled STFT, using the
/// translations present in the sample.
pub fn mixed_norm_inf1(sample: &StftSample) -> f64 {
    let wdim = sample.grid().len();
    let cell = sample.grid().cell_volume();
    let mut total = 0.0;
    for w in 0..wdim {
        let mut sup = 0.0f64;
        for zi in 0..sample.z_points().len() {
            sup = sup.max(sample.value(zi, w).norm());
        }
        total += sup;
    }
    cell * total
}

/// Modulation norm of a symbol against an arbitrary symbol window, with
/// optional argmax refinement of the per-`w` sups.
pub fn m_inf1_norm_with(f: &Symbol, g: &Symbol, config: &StftConfig) -> Result<f64> {
    let sample = stft_function_with(f, g, config)?;
    let grid = sample.grid().clone();
    let wdim = grid.len();
    let cell = grid.cell_volume();
    let mut sups = vec![0.0f64; wdim];
    for zi in 0..sample.z_points().len() {
        for (w, v) in sample.row(zi).iter().enumerate() {
            sups[w] = sups[w].max(v.norm());
        }
    }
    if config.refine {
        // Group the refinement requests (neighbors of each w's argmax) by
        // translation so each refined row is transformed once.
        let mut requests: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for w in 0..wdim {
            let mut best = (0usize, -1.0f64);
            for zi in 0..sample.z_points().len() {
                let v = sample.value(zi, w).norm();
                if v > best.1 {
                    best = (zi, v);
                }
            }
            let star_multi = grid.multi_index(sample.z_points()[best.0]);
            for steps in neighbor_steps(&star_multi, grid.n()) {
                let flat = steps
                    .iter()
                    .fold(0usize, |acc, &s| acc * grid.n() + s as usize);
                requests.entry(flat).or_default().push(w);
            }
        }
        let refined: Vec<(usize, Vec<usize>)> = requests.into_iter().collect();
        let rows: Vec<(Vec<usize>, Vec<C64>)> = refined
            .into_par_iter()
            .map(|(zf, ws)| (ws, function_row(f, g, zf)))
            .collect();
        for (ws, row) in rows {
            for w in ws {
                sups[w] = sups[w].max(row[w].norm());
            }
        }
    }
    Ok(cell * sups.iter().sum::<f64>())
}

/// Modulation norm `‖V_g f‖_{L^{∞,1}}` of a symbol with a Gaussian window.
pub fn m_inf1_norm(f: &Symbol, window: &WindowSpec, config: &StftConfig) -> Result<f64> {
    let g = window.symbol_window(f.grid())?;
    m_inf1_norm_with(f, &g, config)
}

/// Modulation norm of an operator against an arbitrary window operator.
pub fn m_inf1_norm_operator_with(
    a: &OperatorRep,
    b: &OperatorRep,
    config: &StftConfig,
) -> Result<f64> {
    let (_, _, sups) = operator_pass(a, b, config, config.refine)?;
    Ok(a.grid().cell_volume() * sups.iter().sum::<f64>())
}

/// Modulation norm `‖V_B A‖_{L^{∞,1}}` of an operator with a Gaussian
/// projector window.
pub fn m_inf1_norm_operator(
    a: &OperatorRep,
    window: &WindowSpec,
    config: &StftConfig,
) -> Result<f64> {
    let b = window.projector_window(a.grid())?;
    m_inf1_norm_operator_with(a, &b, config)
}

/// Range of the ratio `m_inf1(f, w1) / m_inf1(f, w2)` over a family of
/// symbols; distinct admissible windows induce equivalent norms, so the
/// range stays inside a fixed positive interval.
pub fn window_equivalence_ratios(
    family: &[Symbol],
    w1: &WindowSpec,
    w2: &WindowSpec,
    config: &StftConfig,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for f in family {
        let n1 = m_inf1_norm(f, w1, config)?;
        let n2 = m_inf1_norm(f, w2, config)?;
        if n1 == 0.0 && n2 == 0.0 {
            continue;
        }
        if n2 == 0.0 {
            return Err(QhaError::InvalidParameter(
                "degenerate window: vanishing modulation norm on a nonzero symbol".into(),
            ));
        }
        let r = n1 / n2;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if hi == 0.0 {
        return Err(QhaError::InvalidParameter(
            "window equivalence needs at least one nonzero symbol".into(),
        ));
    }
    Ok((lo, hi))
}

fn binom_u32(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// Quadrature bound for the smooth-function embedding into the modulation
/// class: `Σ_w cell · min_{|α| ≤ max_order} G_α / |w^α|`, where the window
/// factors `G_α = Σ_{β ≤ α} C(α,β)·‖∂^{α-β} g‖_{L¹}` come from applying
/// the product rule inside `w^α·V_g f` and bounding each term's transform
/// by its calibrated `L¹` norm.  Multiplying by
/// `max_{|β| ≤ max_order} ‖∂^β f‖_∞` dominates the modulation norm of `f`.
pub fn cb_embedding_bound(g: &Symbol, max_order: u32) -> f64 {
    let grid = g.grid();
    let axes = grid.axes();
    let calib = (2.0 * std::f64::consts::PI).powi(-(grid.d() as i32));
    let alphas = MultiIndex::all_upto(axes, max_order);
    let l1: Vec<f64> = alphas
        .iter()
        .map(|beta| calib * symbol_derivative_multi(g, beta).lp_norm(1.0))
        .collect();
    let g_factors: Vec<f64> = alphas
        .iter()
        .map(|alpha| {
            let mut acc = 0.0;
            for beta in &alphas {
                if beta.leq(alpha) {
                    let coeff: f64 = alpha
                        .0
                        .iter()
                        .zip(&beta.0)
                        .map(|(&a, &b)| binom_u32(a, b))
                        .product();
                    let rest = alpha.sub(beta);
                    let rest_idx = alphas.iter().position(|x| *x == rest).unwrap();
                    acc += coeff * l1[rest_idx];
                }
            }
            acc
        })
        .collect();
    let cell = grid.cell_volume();
    let mut total = 0.0;
    for flat in 0..grid.len() {
        let w = grid.point(flat);
        let mut best = f64::INFINITY;
        for (ai, alpha) in alphas.iter().enumerate() {
            // The empty index contributes mono = 1, so `best` is always finite.
            let mono = crate::calculus::symplectic_monomial_multi(&w, alpha).abs();
            if mono > 0.0 {
                best = best.min(g_factors[ai] / mono);
            }
        }
        total += best;
    }
    cell * total
}
