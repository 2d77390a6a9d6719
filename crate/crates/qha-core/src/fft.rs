//! Thin wrappers around `rustfft` for strided multi-axis transforms.
//!
//! Conventions: the *forward* transform of a length-`n` line is
//! `X_k = Σ_j x_j e^{-2πi jk/n}` and the *backward* transform is
//! `X_k = Σ_j x_j e^{+2πi jk/n}`; neither is normalized.  Callers divide by
//! `n` where needed.  Frequencies are labelled by the signed representative
//! `k̃ ∈ [-⌊n/2⌋, ⌈n/2⌉)` of the storage index, matching
//! [`PhaseGrid::signed_index`](crate::grid::PhaseGrid::signed_index).

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

/// Fetches (and caches per thread) a plan for length `len`.
fn plan(len: usize, backward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, backward))
            .or_insert_with(|| {
                if backward {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Unnormalized in-place DFT of a contiguous line.
pub fn dft_line(line: &mut [C64], backward: bool) {
    plan(line.len(), backward).process(line);
}

/// Unnormalized DFT along one axis of a row-major array of the given shape.
pub fn dft_axis(values: &mut [C64], shape: &[usize], axis: usize, backward: bool) {
    let len = shape[axis];
    let total: usize = shape.iter().product();
    assert_eq!(values.len(), total);
    let stride: usize = shape[axis + 1..].iter().product();
    let block = stride * len;
    let fft = plan(len, backward);
    let mut scratch = vec![C64::new(0.0, 0.0); len];
    for base in (0..total).step_by(block) {
        for off in 0..stride {
            for k in 0..len {
                scratch[k] = values[base + off + k * stride];
            }
            fft.process(&mut scratch);
            for k in 0..len {
                values[base + off + k * stride] = scratch[k];
            }
        }
    }
}

/// Unnormalized DFT along every axis of a row-major array.
pub fn dft_axis_multi(values: &mut [C64], shape: &[usize], backward: bool) {
    for axis in 0..shape.len() {
        dft_axis(values, shape, axis, backward);
    }
}

/// Signed frequency label of storage index `k` for a length-`n` transform.
pub fn signed_freq_index(k: usize, n: usize) -> i64 {
    let half = n.div_ceil(2);
    if k < half {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Translates samples along one axis: `g(t) = f(t - δ)` where `δ` is given
/// in units of the axis step.
///
/// Integer `delta_steps` is an exact cyclic index rotation.  Fractional
/// steps act through the spectral phase ramp `e^{-2πi k̃ δ/n}`, the unique
/// band-limited interpolation of the rotation; it is exactly unitary for
/// every real `δ`.
pub fn shift_axis(values: &mut [C64], shape: &[usize], axis: usize, delta_steps: f64) {
    let n = shape[axis];
    let rounded = delta_steps.round();
    if (delta_steps - rounded).abs() < 1e-12 * delta_steps.abs().max(1.0) {
        rotate_axis(values, shape, axis, rounded as i64);
        return;
    }
    let total: usize = shape.iter().product();
    assert_eq!(values.len(), total);
    let ramp: Vec<C64> = (0..n)
        .map(|k| {
            let kt = signed_freq_index(k, n) as f64;
            C64::from_polar(1.0, -2.0 * std::f64::consts::PI * kt * delta_steps / n as f64)
        })
        .collect();
    let stride: usize = shape[axis + 1..].iter().product();
    let block = stride * n;
    let fwd = plan(n, false);
    let bwd = plan(n, true);
    let scale = 1.0 / n as f64;
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    for base in (0..total).step_by(block) {
        for off in 0..stride {
            for k in 0..n {
                scratch[k] = values[base + off + k * stride];
            }
            fwd.process(&mut scratch);
            for k in 0..n {
                scratch[k] *= ramp[k];
            }
            bwd.process(&mut scratch);
            for k in 0..n {
                values[base + off + k * stride] = scratch[k] * scale;
            }
        }
    }
}

/// Exact cyclic rotation along one axis: `g[i] = f[(i - steps) mod n]`.
pub fn rotate_axis(values: &mut [C64], shape: &[usize], axis: usize, steps: i64) {
    let n = shape[axis];
    let shift = steps.rem_euclid(n as i64) as usize;
    if shift == 0 {
        return;
    }
    let total: usize = shape.iter().product();
    assert_eq!(values.len(), total);
    let stride: usize = shape[axis + 1..].iter().product();
    let block = stride * n;
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    for base in (0..total).step_by(block) {
        for off in 0..stride {
            for k in 0..n {
                scratch[k] = values[base + off + k * stride];
            }
            for k in 0..n {
                values[base + off + k * stride] = scratch[(k + n - shift) % n];
            }
        }
    }
}

/// Decodes every flat index of a `d`-fold `n`-cube into per-axis digits,
/// flattened as `multis[i*d + axis]`.
pub(crate) fn cube_multi_indices(n: usize, d: usize) -> Vec<u32> {
    let dim = n.pow(d as u32);
    (0..dim)
        .flat_map(|i| {
            let mut rem = i;
            let mut idx = vec![0u32; d];
            for ax in (0..d).rev() {
                idx[ax] = (rem % n) as u32;
                rem /= n;
            }
            idx
        })
        .collect()
}

/// Table of per-axis index differences, `diffs[i*dim + j] = (i − j) mod n`
/// componentwise, between flat indices of a `d`-fold `n`-cube.
pub(crate) fn diff_table(n: usize, d: usize) -> Vec<u32> {
    let dim = n.pow(d as u32);
    let multis = cube_multi_indices(n, d);
    let mut out = vec![0u32; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut flat = 0usize;
            for ax in 0..d {
                let a = multis[i * d + ax] as usize;
                let b = multis[j * d + ax] as usize;
                flat = flat * n + (a + n - b) % n;
            }
            out[i * dim + j] = flat as u32;
        }
    }
    out
}

/// Table of per-axis index sums, `adds[m*dim + i] = (m + i) mod n`
/// componentwise, between flat indices of a `d`-fold `n`-cube.
pub(crate) fn addition_table(n: usize, d: usize) -> Vec<u32> {
    let dim = n.pow(d as u32);
    let multis = cube_multi_indices(n, d);
    let mut out = vec![0u32; dim * dim];
    for m in 0..dim {
        for i in 0..dim {
            let mut flat = 0usize;
            for ax in 0..d {
                let a = multis[m * d + ax] as usize;
                let b = multis[i * d + ax] as usize;
                flat = flat * n + (a + b) % n;
            }
            out[m * dim + i] = flat as u32;
        }
    }
    out
}

/// Per-flat-index permutation `i ↦ (i − c) mod n` componentwise on a
/// `d`-fold `n`-cube, for one flat step `c`.
pub(crate) fn shift_perm(n: usize, d: usize, c_flat: usize) -> Vec<u32> {
    let dim = n.pow(d as u32);
    let mut c_multi = vec![0usize; d];
    let mut rem = c_flat;
    for ax in (0..d).rev() {
        c_multi[ax] = rem % n;
        rem /= n;
    }
    (0..dim)
        .map(|i| {
            let mut rem = i;
            let mut idx = vec![0usize; d];
            for ax in (0..d).rev() {
                idx[ax] = rem % n;
                rem /= n;
            }
            let mut flat = 0usize;
            for ax in 0..d {
                flat = flat * n + (idx[ax] + n - c_multi[ax]) % n;
            }
            flat as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn forward_dft_matches_direct_sum() {
        let n = 7;
        let data: Vec<C64> = (0..n)
            .map(|j| C64::new((j as f64).sin(), (j as f64 * 0.3).cos()))
            .collect();
        let mut out = data.clone();
        dft_line(&mut out, false);
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (j, x) in data.iter().enumerate() {
                acc += x * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64);
            }
            assert_abs_diff_eq!(out[k].re, acc.re, epsilon = 1e-12);
            assert_abs_diff_eq!(out[k].im, acc.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn axis_dft_acts_on_selected_axis_only() {
        // shape (2, 3): transform along axis 1 treats each row separately.
        let shape = [2usize, 3usize];
        let mut values: Vec<C64> = (0..6).map(|j| C64::new(j as f64, 0.0)).collect();
        dft_axis(&mut values, &shape, 1, false);
        for row in 0..2 {
            let base = 3 * row;
            let sum: f64 = (0..3).map(|c| (base + c) as f64).sum();
            assert_abs_diff_eq!(values[base].re, sum, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_shift_is_exact() {
        let shape = [5usize];
        let data: Vec<C64> = (0..5).map(|j| C64::new(j as f64, -(j as f64))).collect();
        let mut out = data.clone();
        shift_axis(&mut out, &shape, 0, 2.0);
        for i in 0..5 {
            assert_eq!(out[i], data[(i + 5 - 2) % 5]);
        }
    }

    #[test]
    fn fractional_shift_translates_band_limited_samples() {
        // f(t) = e^{i 2π·2 t/n}: a pure mode, shifted exactly by any δ.
        let n = 16;
        let shape = [n];
        let mode = |t: f64| C64::from_polar(1.0, 2.0 * PI * 2.0 * t / n as f64);
        let data: Vec<C64> = (0..n).map(|j| mode(j as f64)).collect();
        let delta = 0.37;
        let mut out = data.clone();
        shift_axis(&mut out, &shape, 0, delta);
        let expect: Vec<C64> = (0..n).map(|j| mode(j as f64 - delta)).collect();
        assert!(max_abs_diff(&out, &expect) < 1e-12);
    }

    #[test]
    fn fractional_shift_is_unitary() {
        let n = 12;
        let shape = [n];
        let data: Vec<C64> = (0..n)
            .map(|j| C64::new((j as f64 * 1.3).sin(), (j as f64 * 0.7).cos()))
            .collect();
        let norm: f64 = data.iter().map(|x| x.norm_sqr()).sum();
        let mut out = data.clone();
        shift_axis(&mut out, &shape, 0, 0.61803);
        let norm_after: f64 = out.iter().map(|x| x.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, norm_after, epsilon = 1e-10);
        // Round trip: shifting back restores the samples for any data.
        shift_axis(&mut out, &shape, 0, -0.61803);
        assert!(max_abs_diff(&out, &data) < 1e-12);
    }
}
