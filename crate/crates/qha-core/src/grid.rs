//! Discretized phase space.
//!
//! Phase space is `ℝ^{2d}` with points `z = (x, ξ)`: `d` position components
//! and `d` frequency components.  The discretization is a symplectically
//! self-dual lattice derived from a single pair `(n, L)`:
//!
//! * each position axis carries `n` points with spacing `h = L/n` and
//!   period `L`;
//! * each frequency axis carries `n` points with spacing `ω = 2π/L` and
//!   period `nω = 2πn/L`, i.e. the frequency band is `[-πn/L, πn/L)`.
//!
//! The two spacings satisfy `h·ω = 2π/n`, which makes the skew pairing
//! between lattice points an exact `n`-th root of unity and keeps the whole
//! Weyl-operator algebra exact in floating point.  The phase-space volume of
//! one lattice cell is `(hω)^d = (2π/n)^d`.
//!
//! Coordinates use the signed convention: index `i` represents the coordinate
//! `ĩ·step` with `ĩ = i` for `i < ⌈n/2⌉` and `ĩ = i - n` otherwise, so each
//! axis covers a symmetric window around the origin and index `0` is the
//! origin itself.  Storage of sampled data is row-major over the `2d` axes
//! with the `d` position axes first.

use crate::error::{QhaError, Result};
use std::f64::consts::PI;

/// A point of phase space: `d` position coordinates followed by `d`
/// frequency coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    /// Coordinates `(x_1..x_d, ξ_1..ξ_d)`.
    pub coords: Vec<f64>,
}

impl PhasePoint {
    /// Builds a point from explicit coordinates (length must be even).
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(coords.len() % 2 == 0, "phase point needs 2d coordinates");
        Self { coords }
    }

    /// The origin of `ℝ^{2d}`.
    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0.0; 2 * d] }
    }

    /// Number of position (or frequency) components.
    pub fn d(&self) -> usize {
        self.coords.len() / 2
    }

    /// Position components `x`.
    pub fn x(&self) -> &[f64] {
        &self.coords[..self.d()]
    }

    /// Frequency components `ξ`.
    pub fn xi(&self) -> &[f64] {
        &self.coords[self.d()..]
    }

    /// Component-wise sum.
    pub fn add(&self, other: &PhasePoint) -> PhasePoint {
        assert_eq!(self.coords.len(), other.coords.len());
        PhasePoint::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Component-wise negation.
    pub fn neg(&self) -> PhasePoint {
        PhasePoint::new(self.coords.iter().map(|a| -a).collect())
    }

    /// The point scaled by `s`.
    pub fn scale(&self, s: f64) -> PhasePoint {
        PhasePoint::new(self.coords.iter().map(|a| s * a).collect())
    }

    /// Unit step along one of the `2d` axes.
    pub fn unit(d: usize, axis: usize, length: f64) -> Self {
        let mut coords = vec![0.0; 2 * d];
        coords[axis] = length;
        Self { coords }
    }

    /// Euclidean norm squared `|x|² + |ξ|²`.
    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|a| a * a).sum()
    }
}

/// The standard symplectic form `σ(z, w) = y·ξ − x·η` for `z = (x, ξ)`,
/// `w = (y, η)`.
///
/// It is bilinear and antisymmetric, and on lattice points of a
/// [`PhaseGrid`] it evaluates to `2π/n` times an integer, so the characters
/// `e^{iσ(z,·)}` restrict to exact discrete Fourier characters.
pub fn symplectic_form(z: &PhasePoint, w: &PhasePoint) -> f64 {
    let d = z.d();
    assert_eq!(d, w.d(), "symplectic form needs points of equal dimension");
    let mut acc = 0.0;
    for j in 0..d {
        acc += w.x()[j] * z.xi()[j] - z.x()[j] * w.xi()[j];
    }
    acc
}

/// The discretization of phase space described in the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    d: usize,
    n: usize,
    l: f64,
}

impl PhaseGrid {
    /// Creates a grid with `d` position dimensions, `n` points per axis and
    /// position period `L = l`.
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if d == 0 {
            return Err(QhaError::InvalidParameter("d must be >= 1".into()));
        }
        if n < 2 {
            return Err(QhaError::InvalidParameter("n must be >= 2".into()));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(QhaError::InvalidParameter("L must be positive and finite".into()));
        }
        // Guard against index overflow in flattened storage (n^{2d} entries).
        let bits = (n as f64).log2() * 2.0 * d as f64;
        if bits > 40.0 {
            return Err(QhaError::InvalidParameter(format!(
                "grid too large: n^(2d) = {n}^{} exceeds addressable storage",
                2 * d
            )));
        }
        Ok(Self { d, n, l })
    }

    /// Number of position dimensions.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Position period `L`.
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Number of phase-space axes, `2d`.
    pub fn axes(&self) -> usize {
        2 * self.d
    }

    /// Total number of lattice points, `n^{2d}`.
    pub fn len(&self) -> usize {
        self.n.pow(2 * self.d as u32)
    }

    /// Whether the grid is empty (never true for a constructed grid).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension `n^d` of the discretized function space that operators act
    /// on.
    pub fn hilbert_dim(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Position spacing `h = L/n`.
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Frequency spacing `ω = 2π/L`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Half-open frequency band `[-πn/L, πn/L)` covered by each frequency
    /// axis.
    pub fn freq_band(&self) -> (f64, f64) {
        let b = PI * self.n as f64 / self.l;
        (-b, b)
    }

    /// Spacing along a given axis (`h` for position axes `0..d`, `ω` for
    /// frequency axes `d..2d`).
    pub fn axis_step(&self, axis: usize) -> f64 {
        assert!(axis < self.axes());
        if axis < self.d {
            self.h()
        } else {
            self.omega()
        }
    }

    /// Period along a given axis (`L` for position axes, `nω` for frequency
    /// axes).
    pub fn axis_period(&self, axis: usize) -> f64 {
        self.n as f64 * self.axis_step(axis)
    }

    /// Phase-space volume `(hω)^d = (2π/n)^d` of one lattice cell.  Sums over
    /// the lattice weighted by this volume play the role of `∫ … dz`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.n as f64).powi(self.d as i32)
    }

    /// Signed representative `ĩ ∈ [-⌊n/2⌋, ⌈n/2⌉)` of an index `0 ≤ i < n`.
    pub fn signed_index(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        let half = self.n.div_ceil(2);
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Reduces an arbitrary integer step to the storage index `0 ≤ i < n`.
    pub fn wrap_index(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// Signed coordinate of index `i` on `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.signed_index(i) as f64 * self.axis_step(axis)
    }

    /// All `n` signed coordinates of one axis, in storage order.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(axis, i)).collect()
    }

    /// Decomposes a flat row-major index into `2d` per-axis indices.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.len());
        let mut idx = vec![0usize; self.axes()];
        let mut rem = flat;
        for ax in (0..self.axes()).rev() {
            idx[ax] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    /// Flattens `2d` per-axis indices into the row-major storage index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.axes());
        let mut flat = 0usize;
        for &i in idx {
            debug_assert!(i < self.n);
            flat = flat * self.n + i;
        }
        flat
    }

    /// The phase-space point stored at a flat index.
    pub fn point(&self, flat: usize) -> PhasePoint {
        let idx = self.multi_index(flat);
        PhasePoint::new(
            idx.iter()
                .enumerate()
                .map(|(ax, &i)| self.coord(ax, i))
                .collect(),
        )
    }

    /// The lattice point reached by the given signed steps along each axis.
    pub fn lattice_point(&self, steps: &[i64]) -> PhasePoint {
        assert_eq!(steps.len(), self.axes());
        PhasePoint::new(
            steps
                .iter()
                .enumerate()
                .map(|(ax, &s)| s as f64 * self.axis_step(ax))
                .collect(),
        )
    }

    /// Flat storage index of the lattice point with the given signed steps.
    pub fn flat_from_steps(&self, steps: &[i64]) -> usize {
        assert_eq!(steps.len(), self.axes());
        let idx: Vec<usize> = steps.iter().map(|&s| self.wrap_index(s)).collect();
        self.flat_index(&idx)
    }

    /// Decomposes a flat index into signed per-axis steps.
    pub fn steps_from_flat(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat)
            .iter()
            .map(|&i| self.signed_index(i))
            .collect()
    }

    /// Decomposes a flat position index (`d` axes of length `n`) into
    /// per-axis indices.
    pub fn pos_multi_index(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.hilbert_dim());
        let mut idx = vec![0usize; self.d];
        let mut rem = flat;
        for ax in (0..self.d).rev() {
            idx[ax] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    /// Flattens `d` position indices into a row index of the operator
    /// representation.
    pub fn pos_flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.d);
        let mut flat = 0usize;
        for &i in idx {
            flat = flat * self.n + i;
        }
        flat
    }

    /// Signed position coordinates `t` of a row index of the operator
    /// representation.
    pub fn pos_coords(&self, flat: usize) -> Vec<f64> {
        self.pos_multi_index(flat)
            .iter()
            .map(|&i| self.signed_index(i) as f64 * self.h())
            .collect()
    }

    /// Reduces a real position difference to the fundamental window
    /// `[-L/2, L/2)` (component-wise on vectors).
    pub fn reduce_pos(&self, t: f64) -> f64 {
        let l = self.l;
        let mut r = t - (t / l).round() * l;
        // `.round()` maps half-integers away from zero; force the half-open
        // convention r ∈ [-L/2, L/2).
        if r >= l / 2.0 {
            r -= l;
        }
        if r < -l / 2.0 {
            r += l;
        }
        r
    }

    /// Consistency measurements for the grid geometry: each entry is a name
    /// and an exactly-zero-in-theory defect.
    pub fn geometry_defects(&self) -> Vec<(String, f64)> {
        let two_pi = 2.0 * PI;
        let d = self.d as i32;
        vec![
            (
                "step_product_times_n_vs_two_pi".into(),
                (self.h() * self.omega() * self.n as f64 - two_pi).abs() / two_pi,
            ),
            (
                "cell_volume_vs_formula".into(),
                (self.cell_volume() - (self.h() * self.omega()).powi(d)).abs()
                    / self.cell_volume(),
            ),
            (
                "freq_band_width_vs_n_omega".into(),
                {
                    let (lo, hi) = self.freq_band();
                    ((hi - lo) - self.n as f64 * self.omega()).abs() / (hi - lo)
                },
            ),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PhaseGrid::new(0, 8, 1.0).is_err());
        assert!(PhaseGrid::new(1, 1, 1.0).is_err());
        assert!(PhaseGrid::new(1, 8, 0.0).is_err());
        assert!(PhaseGrid::new(1, 8, -5.0).is_err());
        assert!(PhaseGrid::new(1, 8, f64::NAN).is_err());
    }

    #[test]
    fn spacings_are_self_dual() {
        let g = PhaseGrid::new(2, 16, 8.0).unwrap();
        assert_abs_diff_eq!(g.h(), 0.5);
        assert_abs_diff_eq!(g.omega(), 2.0 * PI / 8.0);
        assert_abs_diff_eq!(g.h() * g.omega() * 16.0, 2.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(
            g.cell_volume(),
            (2.0 * PI / 16.0).powi(2),
            epsilon = 1e-15
        );
        for (_, defect) in g.geometry_defects() {
            assert!(defect < 1e-14);
        }
    }

    #[test]
    fn signed_indices_cover_symmetric_window() {
        let g = PhaseGrid::new(1, 8, 8.0).unwrap();
        let signed: Vec<i64> = (0..8).map(|i| g.signed_index(i)).collect();
        assert_eq!(signed, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let g = PhaseGrid::new(1, 5, 5.0).unwrap();
        let signed: Vec<i64> = (0..5).map(|i| g.signed_index(i)).collect();
        assert_eq!(signed, vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn flat_and_multi_index_roundtrip() {
        let g = PhaseGrid::new(2, 4, 4.0).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        for flat in 0..g.hilbert_dim() {
            assert_eq!(g.pos_flat_index(&g.pos_multi_index(flat)), flat);
        }
    }

    #[test]
    fn lattice_points_hit_stored_coordinates() {
        let g = PhaseGrid::new(1, 8, 4.0).unwrap();
        let z = g.lattice_point(&[3, -2]);
        assert_abs_diff_eq!(z.x()[0], 3.0 * g.h(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.xi()[0], -2.0 * g.omega(), epsilon = 1e-15);
        let flat = g.flat_from_steps(&[3, -2]);
        assert_eq!(g.steps_from_flat(flat), vec![3, -2]);
        let p = g.point(flat);
        assert_abs_diff_eq!(p.x()[0], z.x()[0], epsilon = 1e-15);
        assert_abs_diff_eq!(p.xi()[0], z.xi()[0], epsilon = 1e-15);
    }

    #[test]
    fn symplectic_form_is_skew_and_lattice_rational() {
        let g = PhaseGrid::new(1, 8, 4.0).unwrap();
        let z = g.lattice_point(&[3, 1]);
        let w = g.lattice_point(&[-2, 5]);
        let s = symplectic_form(&z, &w);
        assert_abs_diff_eq!(s, -symplectic_form(&w, &z), epsilon = 1e-14);
        // On lattice points σ is (2π/n)·(integer).
        let quantum = 2.0 * PI / 8.0;
        assert_abs_diff_eq!((s / quantum).round(), s / quantum, epsilon = 1e-12);
    }

    #[test]
    fn position_reduction_uses_half_open_window() {
        let g = PhaseGrid::new(1, 8, 4.0).unwrap();
        assert_abs_diff_eq!(g.reduce_pos(2.0), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.reduce_pos(-2.0), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.reduce_pos(5.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.reduce_pos(-3.5), 0.5, epsilon = 1e-15);
    }
}
