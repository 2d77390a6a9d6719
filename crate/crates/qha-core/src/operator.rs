//! Operators on the discretized function space, and the Weyl system.
//!
//! An operator with integral kernel `k(t, s)` over the position grid is
//! represented by the matrix `M[i,j] = h^d·k(t_i, t_j)`, so that matrix
//! multiplication realizes operator composition, the matrix trace is the
//! operator trace, the Frobenius norm is the Hilbert–Schmidt norm, and
//! unitary operators are unitary matrices.
//!
//! The Weyl operator at `z = (x, ξ)` with ordering parameter `τ` is
//!
//! ```text
//! W_z^τ = e^{-iτ x·ξ} · M_ξ · S_x,
//! ```
//!
//! where `M_ξ` multiplies by `e^{iξ·t}` and `S_x` translates by `x`.
//! Translations by whole lattice steps are exact index rotations; fractional
//! translations act through the unitary band-limited interpolation, built
//! from one FFT per axis.  On lattice points the family obeys the exact
//! composition law `W_z^τ W_w^τ = m_τ(z,w)·W_{z+w}^τ` with the multiplier
//! returned by [`weyl_multiplier`], and `tr(W_z W_w^†) = n^d δ_{z,w}`, i.e.
//! the lattice Weyl operators are an orthogonal basis of the matrix space.

use crate::error::{QhaError, Result};
use crate::fft;
use crate::grid::{PhaseGrid, PhasePoint};
use crate::symbol::parse_grid_header;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// A dense operator over the position grid of a [`PhaseGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorRep {
    grid: PhaseGrid,
    m: DMatrix<C64>,
}

impl OperatorRep {
    /// Wraps an explicit matrix (must be `n^d × n^d`).
    pub fn from_matrix(grid: &PhaseGrid, m: DMatrix<C64>) -> Result<Self> {
        let dim = grid.hilbert_dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(QhaError::GridMismatch(format!(
                "expected a {dim}×{dim} matrix, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { grid: grid.clone(), m })
    }

    /// The identity operator.
    pub fn identity(grid: &PhaseGrid) -> Self {
        let dim = grid.hilbert_dim();
        Self { grid: grid.clone(), m: DMatrix::identity(dim, dim) }
    }

    /// The zero operator.
    pub fn zeros(grid: &PhaseGrid) -> Self {
        let dim = grid.hilbert_dim();
        Self { grid: grid.clone(), m: DMatrix::zeros(dim, dim) }
    }

    /// Samples an integral kernel `k(t, s)` on the position grid, applying
    /// the quadrature weight `h^d`.
    pub fn from_kernel(grid: &PhaseGrid, k: impl Fn(&[f64], &[f64]) -> C64) -> Self {
        let dim = grid.hilbert_dim();
        let weight = grid.h().powi(grid.d() as i32);
        let coords: Vec<Vec<f64>> = (0..dim).map(|i| grid.pos_coords(i)).collect();
        let m = DMatrix::from_fn(dim, dim, |i, j| k(&coords[i], &coords[j]) * weight);
        Self { grid: grid.clone(), m }
    }

    /// The rank-one operator `u ⟨v, ·⟩` built from two sample vectors, with
    /// the inner product `⟨v, ψ⟩ = h^d Σ v̄ ψ`.
    pub fn rank_one(grid: &PhaseGrid, u: &[C64], v: &[C64]) -> Result<Self> {
        let dim = grid.hilbert_dim();
        if u.len() != dim || v.len() != dim {
            return Err(QhaError::GridMismatch("rank_one vectors must have length n^d".into()));
        }
        let weight = grid.h().powi(grid.d() as i32);
        let m = DMatrix::from_fn(dim, dim, |i, j| u[i] * v[j].conj() * weight);
        Ok(Self { grid: grid.clone(), m })
    }

    /// The grid this operator belongs to.
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// Mutable access to the underlying matrix.
    pub fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.m
    }

    /// Kernel value `k(t_i, t_j) = M[i,j]/h^d`.
    pub fn kernel_value(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)] / C64::new(self.grid.h().powi(self.grid.d() as i32), 0.0)
    }

    fn check_same_grid(&self, other: &OperatorRep) -> Result<()> {
        if self.grid != other.grid {
            return Err(QhaError::GridMismatch("operators live on different grids".into()));
        }
        Ok(())
    }

    /// Sum of operators.
    pub fn add(&self, other: &OperatorRep) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid.clone(), m: &self.m + &other.m })
    }

    /// Difference of operators.
    pub fn sub(&self, other: &OperatorRep) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid.clone(), m: &self.m - &other.m })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid.clone(), m: self.m.map(|v| v * s) }
    }

    /// Operator composition (matrix product).
    pub fn compose(&self, other: &OperatorRep) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid.clone(), m: &self.m * &other.m })
    }

    /// Commutator `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &OperatorRep) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self { grid: self.grid.clone(), m: &self.m * &other.m - &other.m * &self.m })
    }

    /// Adjoint (conjugate transpose).
    pub fn adjoint(&self) -> Self {
        Self { grid: self.grid.clone(), m: self.m.adjoint() }
    }

    /// Operator trace.
    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Hilbert–Schmidt norm (Frobenius norm of the matrix).
    pub fn hs_norm(&self) -> f64 {
        self.m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies the operator to a sample vector.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        assert_eq!(psi.len(), self.m.ncols());
        let v = nalgebra::DVector::from_column_slice(psi);
        (&self.m * v).iter().copied().collect()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = self.m.clone().svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Inverse, refusing matrices whose condition number exceeds `1e8`.
    pub fn inverse(&self) -> Result<Self> {
        let sv = self.singular_values();
        let largest = sv.first().copied().unwrap_or(0.0);
        let smallest = sv.last().copied().unwrap_or(0.0);
        let condition = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
        if !(condition < 1e8) {
            return Err(QhaError::IllConditioned { condition });
        }
        let inv = self
            .m
            .clone()
            .try_inverse()
            .ok_or(QhaError::IllConditioned { condition })?;
        Ok(Self { grid: self.grid.clone(), m: inv })
    }

    /// Largest entry-wise deviation from another operator.
    pub fn max_abs_diff(&self, other: &OperatorRep) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// One-axis translation factor: the `n×n` matrix of translation by `x`.
fn shift_factor(grid: &PhaseGrid, x: f64) -> DMatrix<C64> {
    let n = grid.n();
    let steps = x / grid.h();
    let rounded = steps.round();
    if (steps - rounded).abs() < 1e-12 * steps.abs().max(1.0) {
        let c = (rounded as i64).rem_euclid(n as i64) as usize;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, (i + n - c) % n)] = C64::new(1.0, 0.0);
        }
        return m;
    }
    // Circulant: first column is the inverse DFT of the spectral ramp
    // e^{-i ν_k x} over the signed frequencies ν_k = (2π/L)·k̃.
    let mut col: Vec<C64> = (0..n)
        .map(|k| {
            let nu = fft::signed_freq_index(k, n) as f64 * grid.omega();
            C64::from_polar(1.0, -nu * x)
        })
        .collect();
    fft::dft_line(&mut col, true);
    let scale = 1.0 / n as f64;
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n] * scale)
}

/// One-axis modulation factor `diag(e^{iξ t})` over the signed coordinates.
fn modulation_factor(grid: &PhaseGrid, xi: f64) -> DMatrix<C64> {
    let n = grid.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let t = grid.signed_index(i) as f64 * grid.h();
            C64::from_polar(1.0, xi * t)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// The Weyl operator `W_z^τ = e^{-iτ x·ξ} M_ξ S_x` at an arbitrary real
/// phase-space point.
pub fn weyl_operator(grid: &PhaseGrid, z: &PhasePoint, tau: f64) -> OperatorRep {
    assert_eq!(z.coords.len(), grid.axes(), "weyl point needs 2d coordinates");
    let mut m: Option<DMatrix<C64>> = None;
    for j in 0..grid.d() {
        let factor = modulation_factor(grid, z.xi()[j]) * shift_factor(grid, z.x()[j]);
        m = Some(match m {
            None => factor,
            Some(acc) => acc.kronecker(&factor),
        });
    }
    let dot: f64 = z.x().iter().zip(z.xi()).map(|(a, b)| a * b).sum();
    let scalar = C64::from_polar(1.0, -tau * dot);
    OperatorRep { grid: grid.clone(), m: m.unwrap().map(|v| v * scalar) }
}

/// The composition multiplier `m_τ(z, w)` in
/// `W_z^τ W_w^τ = m_τ(z,w) W_{z+w}^τ` (exact on lattice points):
/// `m_τ(z,w) = e^{-i[(1-τ)·x·η − τ·y·ξ]}` for `z = (x,ξ)`, `w = (y,η)`.
pub fn weyl_multiplier(tau: f64, z: &PhasePoint, w: &PhasePoint) -> C64 {
    let xdot: f64 = z.x().iter().zip(w.xi()).map(|(a, b)| a * b).sum();
    let ydot: f64 = w.x().iter().zip(z.xi()).map(|(a, b)| a * b).sum();
    C64::from_polar(1.0, -((1.0 - tau) * xdot - tau * ydot))
}

/// Decides whether every component of `z` is a whole number of lattice
/// steps; returns those steps if so.
fn lattice_steps_of(grid: &PhaseGrid, z: &PhasePoint) -> Option<Vec<i64>> {
    let mut steps = Vec::with_capacity(grid.axes());
    for ax in 0..grid.axes() {
        let s = z.coords[ax] / grid.axis_step(ax);
        let rounded = s.round();
        if (s - rounded).abs() >= 1e-12 * s.abs().max(1.0) {
            return None;
        }
        steps.push(rounded as i64);
    }
    Some(steps)
}

/// Phase-space translation of an operator,
/// `α_z(A) = W_z A W_z^{-1}`.
///
/// The scalar prefactor of `W_z^τ` cancels, so the action does not depend
/// on `τ`.  Lattice offsets take a closed-form fast path
/// `(α_z A)[i,j] = e^{iξ·(t_i−t_j)} A[i−c, j−c]`; general offsets conjugate
/// by the unitary Weyl matrix.
pub fn op_shift(a: &OperatorRep, z: &PhasePoint) -> OperatorRep {
    let grid = a.grid();
    assert_eq!(z.coords.len(), grid.axes());
    if let Some(steps) = lattice_steps_of(grid, z) {
        let dim = grid.hilbert_dim();
        let n = grid.n();
        let c: Vec<usize> = steps[..grid.d()]
            .iter()
            .map(|&s| s.rem_euclid(n as i64) as usize)
            .collect();
        let phases: Vec<C64> = (0..dim)
            .map(|i| {
                let t = grid.pos_coords(i);
                let dot: f64 = t.iter().zip(z.xi()).map(|(a, b)| a * b).sum();
                C64::from_polar(1.0, dot)
            })
            .collect();
        let src_index = |i: usize| -> usize {
            let mi = grid.pos_multi_index(i);
            let shifted: Vec<usize> = mi
                .iter()
                .zip(&c)
                .map(|(&ii, &cc)| (ii + n - cc) % n)
                .collect();
            grid.pos_flat_index(&shifted)
        };
        let src: Vec<usize> = (0..dim).map(src_index).collect();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            a.matrix()[(src[i], src[j])] * phases[i] * phases[j].conj()
        });
        return OperatorRep { grid: grid.clone(), m };
    }
    let w = weyl_operator(grid, z, 0.0);
    let m = w.matrix() * a.matrix() * w.matrix().adjoint();
    OperatorRep { grid: grid.clone(), m }
}

/// Phase-space modulation of an operator,
/// `γ_z(A) = W_{z/2} A W_{z/2}` with `τ = 1/2` factors.
///
/// Under the Fourier–Weyl transform this shifts the transform by `z`,
/// mirroring how [`modulate_function`] intertwines with the symplectic
/// transform.  The shift identity is exact on bins that the translation
/// keeps inside the frequency band; bins wrapped across the torus acquire
/// the branch sign of the non-periodic `W^{1/2}` scalar, so operators with
/// band-interior transforms (smooth data) see the identity at full
/// precision.
///
/// [`modulate_function`]: crate::symbol::modulate_function
pub fn op_modulate(a: &OperatorRep, z: &PhasePoint) -> OperatorRep {
    let grid = a.grid();
    let half = z.scale(0.5);
    let w = weyl_operator(grid, &half, 0.5);
    let m = w.matrix() * a.matrix() * w.matrix();
    OperatorRep { grid: grid.clone(), m }
}

/// Conjugation by the parity operator `(Uψ)(t) = ψ(-t)`:
/// `β(A) = U A U`.
///
/// On each axis `U` sends index `i` to `(n−i) mod n`; the fixed points are
/// the origin and, for even `n`, the half-period sample.  On lattice Weyl
/// operators it realizes `U W_z U = W_{-z}` exactly.
pub fn parity_conjugate(a: &OperatorRep) -> OperatorRep {
    let grid = a.grid();
    let dim = grid.hilbert_dim();
    let n = grid.n();
    let refl: Vec<usize> = (0..dim)
        .map(|i| {
            let mi = grid.pos_multi_index(i);
            let r: Vec<usize> = mi.iter().map(|&ii| (n - ii) % n).collect();
            grid.pos_flat_index(&r)
        })
        .collect();
    let m = DMatrix::from_fn(dim, dim, |i, j| a.matrix()[(refl[i], refl[j])]);
    OperatorRep { grid: grid.clone(), m }
}

/// Writes an operator to CSV: a header comment with the grid, then rows
/// `i,j,re,im` in row-major order with bit-exact floating-point fields.
pub fn write_operator_csv(a: &OperatorRep, path: impl AsRef<Path>) -> Result<()> {
    let g = a.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# qha-operator d={} n={} L={}", g.d(), g.n(), g.l())?;
    let dim = g.hilbert_dim();
    for i in 0..dim {
        for j in 0..dim {
            let v = a.matrix()[(i, j)];
            writeln!(out, "{i},{j},{},{}", v.re, v.im)?;
        }
    }
    Ok(())
}

/// Reads an operator written by [`write_operator_csv`].
pub fn read_operator_csv(path: impl AsRef<Path>) -> Result<OperatorRep> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| QhaError::Parse("empty operator file".into()))??;
    let (d, n, l) = parse_grid_header(&header, "qha-operator")?;
    let grid = PhaseGrid::new(d, n, l)?;
    let dim = grid.hilbert_dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(QhaError::Parse("operator rows need 4 fields".into()));
        }
        let i: usize = fields[0].trim().parse().map_err(|_| QhaError::Parse("bad row index".into()))?;
        let j: usize = fields[1].trim().parse().map_err(|_| QhaError::Parse("bad col index".into()))?;
        if i >= dim || j >= dim {
            return Err(QhaError::Parse("matrix index out of range".into()));
        }
        let re: f64 = fields[2].trim().parse().map_err(|_| QhaError::Parse("bad real field".into()))?;
        let im: f64 = fields[3].trim().parse().map_err(|_| QhaError::Parse("bad imaginary field".into()))?;
        m[(i, j)] = C64::new(re, im);
        count += 1;
    }
    if count != dim * dim {
        return Err(QhaError::Parse("operator file is missing entries".into()));
    }
    OperatorRep::from_matrix(&grid, m)
}
