//! Seeded random test data: lattice points, matrices, band-limited symbols
//! and smoothed operators.
//!
//! All generators draw from a ChaCha stream cipher seeded explicitly, so
//! every consumer is reproducible bit for bit across runs, platforms, and
//! worker counts.

use crate::fourier::fourier_sigma;
use crate::grid::{PhaseGrid, PhasePoint};
use crate::operator::OperatorRep;
use crate::quantize::op_weyl;
use crate::symbol::Symbol;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic RNG for the given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives a stream-specific seed from a base seed and a textual tag
/// (FNV-1a folded with the base), so independent suites consume independent
/// streams while staying reproducible.
pub fn derive_seed(base: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ base.wrapping_mul(0x9e3779b97f4a7c15)
}

/// Standard normal draw via Box–Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Standard complex normal draw (independent real and imaginary parts).
pub fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

/// Uniformly random signed lattice steps, one per axis.
pub fn random_lattice_steps(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let n = grid.n() as i64;
    (0..grid.axes()).map(|_| rng.random_range(0..n) - n / 2).collect()
}

/// Random lattice steps with every component even (useful where an identity
/// needs `z/2` to stay on the lattice).
pub fn random_even_lattice_steps(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> Vec<i64> {
    random_lattice_steps(grid, rng)
        .into_iter()
        .map(|s| s - s.rem_euclid(2))
        .collect()
}

/// A random lattice point.
pub fn random_lattice_point(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> PhasePoint {
    grid.lattice_point(&random_lattice_steps(grid, rng))
}

/// A random off-lattice point, uniform over one fundamental period per axis.
pub fn random_point(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> PhasePoint {
    PhasePoint::new(
        (0..grid.axes())
            .map(|ax| (rng.random::<f64>() - 0.5) * grid.axis_period(ax))
            .collect(),
    )
}

/// A dense operator with iid complex-normal entries (no smoothness).
pub fn random_matrix_operator(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> OperatorRep {
    let dim = grid.hilbert_dim();
    let m = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng) / (dim as f64).sqrt());
    OperatorRep::from_matrix(grid, m).expect("dimensions match")
}

/// A random band-limited symbol: a finite combination of lattice plane
/// waves `e^{iσ(w_k, ·)}` with Gaussian-damped random coefficients, cut off
/// at `|k| ≤ kmax` steps per axis.
///
/// With `hermitian = true` the coefficients are symmetrized so the symbol is
/// real-valued.
pub fn random_band_limited(
    grid: &PhaseGrid,
    rng: &mut ChaCha8Rng,
    kmax: i64,
    decay: f64,
    hermitian: bool,
) -> Symbol {
    let coeffs = band_limited_coefficients(grid.axes(), rng, kmax, decay, hermitian);
    symbol_from_plane_wave_coefficients(grid, 1, &coeffs)
}

/// The coefficient list behind [`random_band_limited`]: pairs of signed
/// step vectors and amplitudes, enumerated in a fixed order independent of
/// the grid.
pub fn band_limited_coefficients(
    axes: usize,
    rng: &mut ChaCha8Rng,
    kmax: i64,
    decay: f64,
    hermitian: bool,
) -> Vec<(Vec<i64>, C64)> {
    let width = (2 * kmax + 1) as usize;
    let total = width.pow(axes as u32);
    let mut coeffs: Vec<(Vec<i64>, C64)> = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut k = vec![0i64; axes];
        for ax in (0..axes).rev() {
            k[ax] = (rem % width) as i64 - kmax;
            rem /= width;
        }
        let r2: f64 = k.iter().map(|&s| (s * s) as f64).sum();
        let amp = complex_normal(rng) * (-r2 / (2.0 * decay * decay)).exp();
        coeffs.push((k, amp));
    }
    if hermitian {
        // f real  ⟺  c(-k) = conj(c(k)).
        let index_of = |k: &[i64]| -> usize {
            let mut flat = 0usize;
            for &s in k {
                flat = flat * width + (s + kmax) as usize;
            }
            flat
        };
        for flat in 0..total {
            let k = coeffs[flat].0.clone();
            let neg: Vec<i64> = k.iter().map(|&s| -s).collect();
            let other = index_of(&neg);
            if other > flat {
                let avg = 0.5 * (coeffs[flat].1 + coeffs[other].1.conj());
                coeffs[flat].1 = avg;
                coeffs[other].1 = avg.conj();
            } else if other == flat {
                coeffs[flat].1 = C64::new(coeffs[flat].1.re, 0.0);
            }
        }
    }
    coeffs
}

/// Realizes `f = Σ_k c_k e^{iσ(w_k, ·)}` where `w_k` is the lattice point
/// with signed steps `scale·k` on position axes and `k` on frequency axes.
///
/// The position-step `scale` embeds coefficients drawn for a coarse grid
/// (spacing `scale·h`) into a finer grid with the same period `L`, so the
/// *same function* can be sampled at several resolutions.
pub fn symbol_from_plane_wave_coefficients(
    grid: &PhaseGrid,
    scale: i64,
    coeffs: &[(Vec<i64>, C64)],
) -> Symbol {
    // Build n^d·(coefficient spikes) in the transform domain, then apply the
    // involutive symplectic transform: F_σ(n^d δ_{w0})(z) = e^{iσ(w0, z)}.
    let mut spikes = Symbol::zeros(grid);
    let nd = grid.hilbert_dim() as f64;
    for (k, amp) in coeffs {
        assert_eq!(k.len(), grid.axes());
        let steps: Vec<i64> = k
            .iter()
            .enumerate()
            .map(|(ax, &s)| if ax < grid.d() { s * scale } else { s })
            .collect();
        let flat = grid.flat_from_steps(&steps);
        spikes.values_mut()[flat] += *amp * nd;
    }
    fourier_sigma(&spikes)
}

/// A smooth random operator: the Weyl quantization of a random band-limited
/// symbol.  Its Fourier–Weyl transform decays away from the frequency
/// origin, which keeps identities that are sensitive to the band edge at
/// their continuum accuracy.
pub fn random_smoothed_operator(
    grid: &PhaseGrid,
    rng: &mut ChaCha8Rng,
    kmax: i64,
    decay: f64,
) -> OperatorRep {
    let f = random_band_limited(grid, rng, kmax, decay, false);
    op_weyl(&f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeding_is_reproducible() {
        let g = PhaseGrid::new(1, 8, 4.0).unwrap();
        let mut r1 = rng(42);
        let mut r2 = rng(42);
        let a = random_matrix_operator(&g, &mut r1);
        let b = random_matrix_operator(&g, &mut r2);
        assert_eq!(a.matrix(), b.matrix());
        assert_ne!(derive_seed(1, "alpha"), derive_seed(1, "beta"));
        assert_eq!(derive_seed(7, "x"), derive_seed(7, "x"));
    }

    #[test]
    fn hermitian_band_limited_symbols_are_real() {
        let g = PhaseGrid::new(1, 16, 8.0).unwrap();
        let mut r = rng(5);
        let f = random_band_limited(&g, &mut r, 3, 2.0, true);
        let imag = f.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(imag < 1e-12);
    }

    #[test]
    fn coarse_coefficients_embed_into_finer_grids() {
        // The same coefficient set realizes the same function at n and 2n:
        // fine samples at even position indices / identical frequency steps
        // must agree with the coarse samples.
        let l = 8.0;
        let coarse = PhaseGrid::new(1, 8, l).unwrap();
        let fine = PhaseGrid::new(1, 16, l).unwrap();
        let mut r = rng(17);
        let coeffs = band_limited_coefficients(2, &mut r, 2, 1.5, false);
        let fc = symbol_from_plane_wave_coefficients(&coarse, 1, &coeffs);
        let ff = symbol_from_plane_wave_coefficients(&fine, 2, &coeffs);
        for a in -4i64..4 {
            for b in -4i64..4 {
                let v_coarse = fc.value_at_steps(&[a, b]);
                let v_fine = ff.value_at_steps(&[2 * a, b]);
                assert!((v_coarse - v_fine).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn even_steps_are_even() {
        let g = PhaseGrid::new(1, 16, 8.0).unwrap();
        let mut r = rng(23);
        for _ in 0..20 {
            for s in random_even_lattice_steps(&g, &mut r) {
                assert_eq!(s % 2, 0);
            }
        }
    }
}
