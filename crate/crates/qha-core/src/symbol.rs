//! Phase-space functions (symbols) sampled on a [`PhaseGrid`].
//!
//! A [`Symbol`] stores complex samples `f(z)` over all lattice points in
//! row-major order (position axes first).  Norms use the plain quadrature
//! measure `cell·Σ` with `cell = (2π/n)^d`; the *calibrated* measure
//! `(2π)^{-d}·cell·Σ = n^{-d}·Σ` that makes phase-space convolution unital
//! lives in [`crate::convolution`].

use crate::error::{QhaError, Result};
use crate::fft;
use crate::grid::{symplectic_form, PhaseGrid, PhasePoint};
use num_complex::Complex64 as C64;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

/// A sampled phase-space function.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    grid: PhaseGrid,
    values: Vec<C64>,
}

impl Symbol {
    /// Wraps explicit samples (length must be `n^{2d}`).
    pub fn new(grid: PhaseGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(QhaError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// The identically-zero symbol.
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// The constant symbol `f ≡ c`.
    pub fn constant(grid: &PhaseGrid, c: C64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples a closure over all lattice points.
    pub fn from_fn(grid: &PhaseGrid, f: impl Fn(&PhasePoint) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid: grid.clone(), values }
    }

    /// The grid the samples live on.
    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// All samples in storage order.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Mutable access to the samples.
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// Consumes the symbol, returning its samples.
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Sample at a flat index.
    pub fn value(&self, flat: usize) -> C64 {
        self.values[flat]
    }

    /// Sample at the lattice point given by signed steps.
    pub fn value_at_steps(&self, steps: &[i64]) -> C64 {
        self.values[self.grid.flat_from_steps(steps)]
    }

    /// Applies a function to every sample.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Applies a function of (flat index, sample).
    pub fn map_indexed(&self, f: impl Fn(usize, C64) -> C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect(),
        }
    }

    fn check_same_grid(&self, other: &Symbol) -> Result<()> {
        if self.grid != other.grid {
            return Err(QhaError::GridMismatch(
                "symbols live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Symbol) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Symbol) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Symbol) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Largest absolute sample, `‖f‖_∞`.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid `L^p` norm `(cell·Σ |f|^p)^{1/p}` for `1 ≤ p < ∞`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm needs p >= 1");
        let cell = self.grid.cell_volume();
        let sum: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (cell * sum).powf(1.0 / p)
    }

    /// Quadrature integral `cell·Σ f(z)`.
    pub fn mass(&self) -> C64 {
        self.values.iter().sum::<C64>() * C64::new(self.grid.cell_volume(), 0.0)
    }

    /// Largest pointwise deviation from another symbol.
    pub fn max_abs_diff(&self, other: &Symbol) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Storage shape `[n; 2d]` used by the axis transforms.
    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.grid.n(); self.grid.axes()]
    }
}

/// Parametrized families of test symbols.
#[derive(Clone, Debug)]
pub enum SymbolFamily {
    /// `exp(-|z - center|²/(2 width²))`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// Separable product `Π_j cos(kx·x_j) · Π_j sin(kxi·ξ_j)`.
    CosSin { kx: f64, kxi: f64 },
    /// Plane wave `e^{i freq·z}` (plain inner product of coordinates).
    PlaneWave { freq: Vec<f64> },
    /// Smooth compactly-supported bump `exp(1 - 1/(1-u²))` with
    /// `u = |z - center|/radius`, zero for `u ≥ 1`.
    Bump { center: Vec<f64>, radius: f64 },
    /// Samples read from a symbol CSV file (see [`write_symbol_csv`]).
    Imported { path: PathBuf },
}

/// Builds a member of one of the standard symbol families on a grid.
pub fn make_symbol(grid: &PhaseGrid, family: &SymbolFamily) -> Result<Symbol> {
    match family {
        SymbolFamily::Gaussian { center, width } => {
            if center.len() != grid.axes() {
                return Err(QhaError::InvalidParameter(
                    "gaussian center needs 2d coordinates".into(),
                ));
            }
            if !(*width > 0.0) {
                return Err(QhaError::InvalidParameter("gaussian width must be positive".into()));
            }
            let w2 = 2.0 * width * width;
            Ok(Symbol::from_fn(grid, |z| {
                let r2: f64 = z
                    .coords
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                C64::new((-r2 / w2).exp(), 0.0)
            }))
        }
        SymbolFamily::CosSin { kx, kxi } => Ok(Symbol::from_fn(grid, |z| {
            let mut v = 1.0;
            for &x in z.x() {
                v *= (kx * x).cos();
            }
            for &xi in z.xi() {
                v *= (kxi * xi).sin();
            }
            C64::new(v, 0.0)
        })),
        SymbolFamily::PlaneWave { freq } => {
            if freq.len() != grid.axes() {
                return Err(QhaError::InvalidParameter(
                    "plane wave frequency needs 2d coordinates".into(),
                ));
            }
            Ok(Symbol::from_fn(grid, |z| {
                let phase: f64 = z.coords.iter().zip(freq).map(|(a, k)| a * k).sum();
                C64::from_polar(1.0, phase)
            }))
        }
        SymbolFamily::Bump { center, radius } => {
            if center.len() != grid.axes() {
                return Err(QhaError::InvalidParameter(
                    "bump center needs 2d coordinates".into(),
                ));
            }
            if !(*radius > 0.0) {
                return Err(QhaError::InvalidParameter("bump radius must be positive".into()));
            }
            Ok(Symbol::from_fn(grid, |z| {
                let r2: f64 = z
                    .coords
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                let u2 = r2 / (radius * radius);
                if u2 >= 1.0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new((1.0 - 1.0 / (1.0 - u2)).exp(), 0.0)
                }
            }))
        }
        SymbolFamily::Imported { path } => read_symbol_csv(path),
    }
}

/// Discrete point mass at the origin, normalized as the unit of the
/// calibrated phase-space convolution: value `n^d` at `z = 0`, zero
/// elsewhere, so that `n^{-d}·Σ δ = 1`.  It equals the symplectic Fourier
/// transform of the constant-one symbol exactly.
pub fn delta_symbol(grid: &PhaseGrid) -> Symbol {
    let mut s = Symbol::zeros(grid);
    s.values_mut()[0] = C64::new(grid.hilbert_dim() as f64, 0.0);
    s
}

/// Translation `(α_z f)(w) = f(w - z)`.
///
/// Components of `z` that are whole lattice steps act as exact cyclic
/// rotations; fractional components act through the unitary band-limited
/// interpolation of [`fft::shift_axis`].
pub fn shift_function(f: &Symbol, z: &PhasePoint) -> Symbol {
    assert_eq!(z.coords.len(), f.grid().axes(), "shift offset needs 2d coordinates");
    let shape = f.shape();
    let mut out = f.clone();
    for ax in 0..f.grid().axes() {
        let steps = z.coords[ax] / f.grid().axis_step(ax);
        if steps != 0.0 {
            fft::shift_axis(out.values_mut(), &shape, ax, steps);
        }
    }
    out
}

/// Symplectic modulation `(γ_z f)(w) = e^{iσ(z,w)} f(w)`.
pub fn modulate_function(f: &Symbol, z: &PhasePoint) -> Symbol {
    assert_eq!(z.coords.len(), f.grid().axes(), "modulation point needs 2d coordinates");
    let grid = f.grid().clone();
    f.map_indexed(|flat, v| {
        let w = grid.point(flat);
        v * C64::from_polar(1.0, symplectic_form(z, &w))
    })
}

/// Writes a symbol to CSV: one header comment carrying the grid, then one
/// row `i_1,…,i_{2d},re,im` per sample in storage order.  The floating-point
/// fields use the shortest representation that round-trips, so
/// write-then-read reproduces the samples bit for bit.
pub fn write_symbol_csv(f: &Symbol, path: impl AsRef<Path>) -> Result<()> {
    let g = f.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# qha-symbol d={} n={} L={}", g.d(), g.n(), g.l())?;
    for (flat, v) in f.values().iter().enumerate() {
        let idx = g.multi_index(flat);
        let cols: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{},{},{}", cols.join(","), v.re, v.im)?;
    }
    Ok(())
}

/// Reads a symbol written by [`write_symbol_csv`].
pub fn read_symbol_csv(path: impl AsRef<Path>) -> Result<Symbol> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| QhaError::Parse("empty symbol file".into()))??;
    let (d, n, l) = parse_grid_header(&header, "qha-symbol")?;
    let grid = PhaseGrid::new(d, n, l)?;
    let mut values = vec![C64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != grid.axes() + 2 {
            return Err(QhaError::Parse(format!(
                "expected {} fields, got {}",
                grid.axes() + 2,
                fields.len()
            )));
        }
        let mut idx = Vec::with_capacity(grid.axes());
        for f in &fields[..grid.axes()] {
            let i: usize = f
                .trim()
                .parse()
                .map_err(|_| QhaError::Parse(format!("bad index field `{f}`")))?;
            if i >= grid.n() {
                return Err(QhaError::Parse(format!("index {i} out of range")));
            }
            idx.push(i);
        }
        let re: f64 = fields[grid.axes()]
            .trim()
            .parse()
            .map_err(|_| QhaError::Parse("bad real field".into()))?;
        let im: f64 = fields[grid.axes() + 1]
            .trim()
            .parse()
            .map_err(|_| QhaError::Parse("bad imaginary field".into()))?;
        let flat = grid.flat_index(&idx);
        values[flat] = C64::new(re, im);
        seen[flat] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(QhaError::Parse("symbol file is missing samples".into()));
    }
    Symbol::new(grid, values)
}

pub(crate) fn parse_grid_header(header: &str, tag: &str) -> Result<(usize, usize, f64)> {
    let rest = header
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix(tag))
        .ok_or_else(|| QhaError::Parse(format!("missing `# {tag}` header")))?;
    let mut d = None;
    let mut n = None;
    let mut l = None;
    for part in rest.split_whitespace() {
        if let Some(v) = part.strip_prefix("d=") {
            d = v.parse::<usize>().ok();
        } else if let Some(v) = part.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        } else if let Some(v) = part.strip_prefix("L=") {
            l = v.parse::<f64>().ok();
        }
    }
    match (d, n, l) {
        (Some(d), Some(n), Some(l)) => Ok((d, n, l)),
        _ => Err(QhaError::Parse("header must carry d=, n=, L=".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1, 8, 4.0).unwrap()
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let g = grid();
        let f = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: 1.0 },
        )
        .unwrap();
        assert_abs_diff_eq!(f.value(0).re, 1.0, epsilon = 1e-15);
        assert!(f.linf_norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn plane_wave_is_unimodular() {
        let g = grid();
        let f = make_symbol(&g, &SymbolFamily::PlaneWave { freq: vec![1.0, -0.5] }).unwrap();
        for v in f.values() {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let g = PhaseGrid::new(1, 16, 16.0).unwrap();
        let f = make_symbol(
            &g,
            &SymbolFamily::Bump { center: vec![0.0, 0.0], radius: 2.0 },
        )
        .unwrap();
        // A sample well outside the bump radius must be exactly zero.
        let far = g.flat_from_steps(&[8, 0]); // x = 8 > radius
        assert_eq!(f.value(far), C64::new(0.0, 0.0));
        assert_abs_diff_eq!(f.value(0).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lattice_shift_rotates_samples() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| C64::new(z.x()[0] + 2.0 * z.xi()[0], 0.0));
        let z = g.lattice_point(&[2, -1]);
        let shifted = shift_function(&f, &z);
        for flat in 0..g.len() {
            let steps = g.steps_from_flat(flat);
            let src = g.flat_from_steps(&[steps[0] - 2, steps[1] + 1]);
            assert_eq!(shifted.value(flat), f.value(src));
        }
    }

    #[test]
    fn modulation_preserves_modulus_and_composes() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| C64::new((z.x()[0] * 0.7).cos(), 0.3));
        let z = g.lattice_point(&[1, 3]);
        let w = g.lattice_point(&[-2, 1]);
        let m1 = modulate_function(&modulate_function(&f, &z), &w);
        let m2 = modulate_function(&f, &z.add(&w));
        assert!(m1.max_abs_diff(&m2) < 1e-12);
        for (a, b) in m1.values().iter().zip(f.values()) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-14);
        }
    }

    #[test]
    fn delta_symbol_has_unit_calibrated_mass() {
        let g = grid();
        let delta = delta_symbol(&g);
        let total: C64 = delta.values().iter().sum();
        let calibrated = total / C64::new(g.hilbert_dim() as f64, 0.0);
        assert_abs_diff_eq!(calibrated.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(calibrated.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_l2_matches_closed_form() {
        // ∫ exp(-|z|²/s²) dz over ℝ² = π s²; the grid L = 16 window holds the
        // mass to far better than the asserted tolerance.
        let g = PhaseGrid::new(1, 64, 16.0).unwrap();
        let s = 1.0;
        let f = make_symbol(
            &g,
            &SymbolFamily::Gaussian { center: vec![0.0, 0.0], width: s },
        )
        .unwrap();
        let l2 = f.lp_norm(2.0);
        assert_abs_diff_eq!(l2, (PI * s * s).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let g = grid();
        let f = Symbol::from_fn(&g, |z| {
            C64::new((z.x()[0] * 1.234).sin() * 1e-7, (z.xi()[0] * 3.21).cos() * 1e9)
        });
        let dir = std::env::temp_dir().join("qha-symbol-roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sym.csv");
        write_symbol_csv(&f, &path).unwrap();
        let back = read_symbol_csv(&path).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let dir = std::env::temp_dir().join("qha-symbol-bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "# wrong-tag d=1 n=4 L=1\n").unwrap();
        assert!(read_symbol_csv(&path).is_err());
        std::fs::write(&path, "# qha-symbol d=1 n=4 L=1\n0,0,notanumber,0\n").unwrap();
        assert!(read_symbol_csv(&path).is_err());
    }
}
