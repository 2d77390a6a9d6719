//! An exact Weyl system over the cyclic group `ℤ_N` with `N` odd.
//!
//! This module carries the same transform / quantization / convolution
//! package as the continuum grid model, but in a setting where every
//! identity closes to machine rounding and can be checked by full
//! enumeration: phase space is the finite set `ℤ_N × ℤ_N`, operators are
//! `N × N` matrices, and the Weyl matrices are phased cyclic shifts.
//!
//! # Conventions
//!
//! * Phase-space points `z = (x, ξ)` are flattened as `z = x·N + ξ`.
//!   Symbols (functions on phase space) are `Vec<Complex64>` of length
//!   `N²`; operators are dense [`DMatrix`] values.
//! * The averaging measure on phase space is `(1/N)·Σ`.  With it the
//!   symplectic transform [`fsigma_finite`] is self-inverse and isometric,
//!   and every convolution theorem holds with constant exactly one.
//! * A quantization family is indexed by a group homomorphism
//!   `Φ(t) = c·t mod N` ([`HomZn`]); the member with `2c ≡ 1 (mod N)` is
//!   the symmetric calibration ([`FiniteGroup::symmetric_hom`]), and its
//!   existence is why the modulus must be odd.
//! * All phases are computed as integer exponents reduced modulo `N`
//!   before a single table lookup of `e^{2πik/N}`, so no identity depends
//!   on floating-point angle reduction.

use crate::error::{QhaError, Result};
use crate::report::{NormReport, ReportEntry};
use crate::samples::{complex_normal, derive_seed, rng};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// The cyclic group `ℤ_N` (odd `N ≥ 3`) with its table of roots of unity.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    n: usize,
    roots: Vec<C64>,
}

impl FiniteGroup {
    /// A group of odd order `n ≥ 3`.
    ///
    /// Odd order makes `2` invertible modulo `n`, which is what the
    /// symmetric quantization calibration needs; even moduli are rejected.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(QhaError::InvalidParameter(format!(
                "group order must be odd and at least 3, got {n}"
            )));
        }
        let roots = (0..n)
            .map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        Ok(FiniteGroup { n, roots })
    }

    /// The group order `N`.
    pub fn modulus(&self) -> usize {
        self.n
    }

    /// Number of phase-space points, `N²`.
    pub fn points(&self) -> usize {
        self.n * self.n
    }

    /// `e^{2πik/N}` for any integer `k`, via lookup after reduction mod `N`.
    pub fn phase(&self, k: i64) -> C64 {
        self.roots[k.rem_euclid(self.n as i64) as usize]
    }

    /// Flat index of the phase-space point `(x, ξ)`, coordinates reduced
    /// mod `N`.
    pub fn flat(&self, x: i64, xi: i64) -> usize {
        let n = self.n as i64;
        (x.rem_euclid(n) * n + xi.rem_euclid(n)) as usize
    }

    /// Coordinates `(x, ξ)` of a flat phase-space index.
    pub fn coords(&self, z: usize) -> (i64, i64) {
        ((z / self.n) as i64, (z % self.n) as i64)
    }

    /// Pointwise sum of two phase-space points.
    pub fn add(&self, z: usize, w: usize) -> usize {
        let (x, xi) = self.coords(z);
        let (y, eta) = self.coords(w);
        self.flat(x + y, xi + eta)
    }

    /// Pointwise difference of two phase-space points.
    pub fn sub(&self, z: usize, w: usize) -> usize {
        let (x, xi) = self.coords(z);
        let (y, eta) = self.coords(w);
        self.flat(x - y, xi - eta)
    }

    /// The negated phase-space point.
    pub fn neg(&self, z: usize) -> usize {
        let (x, xi) = self.coords(z);
        self.flat(-x, -xi)
    }

    /// Integer symplectic form `σ(z, w) = y·ξ − x·η` for `z = (x, ξ)`,
    /// `w = (y, η)`, as an exponent for [`FiniteGroup::phase`].
    pub fn sigma(&self, z: usize, w: usize) -> i64 {
        let (x, xi) = self.coords(z);
        let (y, eta) = self.coords(w);
        y * xi - x * eta
    }

    /// The homomorphism `Φ(t) = c·t` with `2c ≡ 1 (mod N)`, i.e.
    /// `c = (N + 1)/2`.  It plays the role of the midpoint calibration:
    /// it is the unique member whose composition multiplier satisfies
    /// `m(w, −w) = 1`, so inverses of Weyl matrices are Weyl matrices of
    /// the negated point with no extra phase.
    pub fn symmetric_hom(&self) -> HomZn {
        HomZn::new(self, ((self.n + 1) / 2) as i64)
    }
}

/// A group homomorphism `ℤ_N → ℤ_N`, `Φ(t) = c·t mod N`, indexing one
/// member of the quantization family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomZn {
    c: usize,
}

impl HomZn {
    /// The homomorphism with multiplier `c` (reduced mod `N`).
    pub fn new(group: &FiniteGroup, c: i64) -> Self {
        HomZn {
            c: c.rem_euclid(group.n as i64) as usize,
        }
    }

    /// The zero homomorphism (`c = 0`).
    pub fn trivial() -> Self {
        HomZn { c: 0 }
    }

    /// The reduced multiplier `c`.
    pub fn multiplier(&self) -> usize {
        self.c
    }

    /// `Φ(t) = c·t mod N`.
    pub fn apply(&self, group: &FiniteGroup, t: i64) -> i64 {
        (self.c as i64 * t).rem_euclid(group.n as i64)
    }

    /// The complementary homomorphism `t ↦ (1 − c)·t`, which indexes the
    /// adjoint quantization: `W_z†` for multiplier `c` equals `W_{−z}` for
    /// multiplier `1 − c`.
    pub fn complement(&self, group: &FiniteGroup) -> Self {
        HomZn::new(group, 1 - self.c as i64)
    }
}

/// A matrix of the form `M[t, s] = phase[t] · δ_{s, (t − shift) mod N}`:
/// one unimodular entry per row.  Every Weyl matrix has this shape, the
/// shape is closed under products and adjoints, and products cost `O(N)`,
/// which keeps the exhaustive multiplier sweeps cheap.
#[derive(Clone, Debug)]
struct PhasedShift {
    shift: usize,
    phase: Vec<C64>,
}

impl PhasedShift {
    /// The Weyl matrix of `z = (x, ξ)` in the family `Φ`:
    /// `W[t, s] = ω^{ξ·t − ξ·Φ(x)} δ_{s, (t − x) mod N}`.
    fn weyl(g: &FiniteGroup, x: i64, xi: i64, phi: &HomZn) -> Self {
        let n = g.n as i64;
        let shift = x.rem_euclid(n) as usize;
        let twist = xi * phi.apply(g, x);
        let phase = (0..n).map(|t| g.phase(xi * t - twist)).collect();
        PhasedShift { shift, phase }
    }

    /// Matrix product `self · other`, staying in phased-shift form.
    fn compose(&self, other: &Self, g: &FiniteGroup) -> Self {
        let n = g.n;
        let phase = (0..n)
            .map(|t| self.phase[t] * other.phase[(t + n - self.shift) % n])
            .collect();
        PhasedShift {
            shift: (self.shift + other.shift) % n,
            phase,
        }
    }

    /// Conjugate transpose, staying in phased-shift form.
    fn adjoint(&self, g: &FiniteGroup) -> Self {
        let n = g.n;
        let phase = (0..n).map(|t| self.phase[(t + self.shift) % n].conj()).collect();
        PhasedShift {
            shift: (n - self.shift) % n,
            phase,
        }
    }

    /// Dense matrix form.
    fn dense(&self, g: &FiniteGroup) -> DMatrix<C64> {
        let n = g.n;
        let mut m = DMatrix::zeros(n, n);
        for t in 0..n {
            m[(t, (t + n - self.shift) % n)] = self.phase[t];
        }
        m
    }

    /// Largest entrywise deviation from another phased shift.  Shifts must
    /// agree; otherwise the supports differ and the comparison is meaningless.
    fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shift, other.shift, "phased shifts with different supports");
        self.phase
            .iter()
            .zip(&other.phase)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_symbol_len(g: &FiniteGroup, f: &[C64]) -> Result<()> {
    if f.len() != g.points() {
        return Err(QhaError::GridMismatch(format!(
            "symbol has {} entries, expected N² = {}",
            f.len(),
            g.points()
        )));
    }
    Ok(())
}

fn check_matrix_dim(g: &FiniteGroup, a: &DMatrix<C64>) -> Result<()> {
    if a.nrows() != g.n || a.ncols() != g.n {
        return Err(QhaError::GridMismatch(format!(
            "operator is {}×{}, expected {}×{}",
            a.nrows(),
            a.ncols(),
            g.n,
            g.n
        )));
    }
    Ok(())
}

/// The Weyl matrix of the phase-space point `(x, ξ)` in the quantization
/// family `Φ`:
///
/// ```text
/// W[t, s] = e^{−2πi ξ·Φ(x)/N} · e^{2πi ξ·t/N} · δ_{s, (t − x) mod N}.
/// ```
///
/// Each such matrix is exactly unitary (a phased cyclic shift), and the
/// family satisfies `W_z W_w = m_Φ(z, w) W_{z+w}` with a unimodular
/// multiplier `m_Φ`.
pub fn weyl_finite(g: &FiniteGroup, x: i64, xi: i64, phi: &HomZn) -> DMatrix<C64> {
    PhasedShift::weyl(g, x, xi, phi).dense(g)
}

/// Symplectic transform of a symbol:
/// `(F_σ f)(w) = (1/N) Σ_z f(z) e^{2πi σ(z,w)/N}`.
///
/// With the `1/N` averaging it is its own inverse and preserves `Σ|f|²`.
pub fn fsigma_finite(g: &FiniteGroup, f: &[C64]) -> Result<Vec<C64>> {
    check_symbol_len(g, f)?;
    let npts = g.points();
    let scale = 1.0 / g.n as f64;
    let mut out = vec![C64::new(0.0, 0.0); npts];
    for (w, slot) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (z, fz) in f.iter().enumerate() {
            acc += fz * g.phase(g.sigma(z, w));
        }
        *slot = scale * acc;
    }
    Ok(out)
}

/// Spectral transform of an operator in the family `Φ`:
/// `(F_W^Φ A)(w) = tr(A · (W_w^Φ)†)`, returned as raw traces over the flat
/// phase-space index.
///
/// Since `{W_w/√N}` is an orthonormal basis of the matrix space, the map is
/// injective with `Σ_w |F_W^Φ A(w)|² = N·‖A‖_F²` for every `Φ`.
pub fn fw_finite(g: &FiniteGroup, a: &DMatrix<C64>, phi: &HomZn) -> Result<Vec<C64>> {
    check_matrix_dim(g, a)?;
    let n = g.n;
    let mut out = vec![C64::new(0.0, 0.0); g.points()];
    for (w, slot) in out.iter_mut().enumerate() {
        let (y, eta) = g.coords(w);
        let ps = PhasedShift::weyl(g, y, eta, phi);
        let mut acc = C64::new(0.0, 0.0);
        for t in 0..n {
            acc += a[(t, (t + n - ps.shift) % n)] * ps.phase[t].conj();
        }
        *slot = acc;
    }
    Ok(out)
}

/// Quantization in the family `Φ`: the operator whose spectral transform is
/// the symplectic transform of `f`, realized through the reconstruction
/// formula `A = (1/N) Σ_w (F_σ f)(w) · W_w^Φ`.
///
/// The constant function `1` maps to the identity matrix exactly, and
/// [`symbol_phi_finite`] inverts the map exactly.
pub fn op_phi_finite(g: &FiniteGroup, f: &[C64], phi: &HomZn) -> Result<DMatrix<C64>> {
    let fs = fsigma_finite(g, f)?;
    let n = g.n;
    let scale = 1.0 / n as f64;
    let mut a = DMatrix::zeros(n, n);
    for (w, coeff) in fs.iter().enumerate() {
        let (y, eta) = g.coords(w);
        let ps = PhasedShift::weyl(g, y, eta, phi);
        for t in 0..n {
            a[(t, (t + n - ps.shift) % n)] += scale * coeff * ps.phase[t];
        }
    }
    Ok(a)
}

/// Symbol of an operator in the family `Φ`: the exact inverse of
/// [`op_phi_finite`], computed as `F_σ ∘ F_W^Φ`.
pub fn symbol_phi_finite(g: &FiniteGroup, a: &DMatrix<C64>, phi: &HomZn) -> Result<Vec<C64>> {
    let fw = fw_finite(g, a, phi)?;
    fsigma_finite(g, &fw)
}

/// Phase-space shift of an operator: `α_z(A) = W_z A W_z†`.
///
/// Conjugation kills the scalar phase that distinguishes the quantization
/// families, so the result is the same for every `Φ`; the entrywise form
/// is `α_z(A)[t, s] = phase[t] · conj(phase[s]) · A[t−x, s−x]`.
pub fn shift_finite(g: &FiniteGroup, a: &DMatrix<C64>, x: i64, xi: i64) -> Result<DMatrix<C64>> {
    check_matrix_dim(g, a)?;
    let n = g.n;
    let ps = PhasedShift::weyl(g, x, xi, &HomZn::trivial());
    let mut out = DMatrix::zeros(n, n);
    for t in 0..n {
        for s in 0..n {
            out[(t, s)] = ps.phase[t]
                * ps.phase[s].conj()
                * a[((t + n - ps.shift) % n, (s + n - ps.shift) % n)];
        }
    }
    Ok(out)
}

/// One-sided phase-space modulation of an operator in the family `Φ`:
/// `γ_z^Φ(A) = W_z^Φ · A`.
///
/// It shifts the spectral transform: `|F_W^Φ(γ_w A)(u)| = |F_W^Φ A(u − w)|`
/// for every `u` (the phases differ by the composition multiplier).
pub fn modulate_finite(
    g: &FiniteGroup,
    a: &DMatrix<C64>,
    x: i64,
    xi: i64,
    phi: &HomZn,
) -> Result<DMatrix<C64>> {
    check_matrix_dim(g, a)?;
    let n = g.n;
    let ps = PhasedShift::weyl(g, x, xi, phi);
    let mut out = DMatrix::zeros(n, n);
    for t in 0..n {
        let row = (t + n - ps.shift) % n;
        for s in 0..n {
            out[(t, s)] = ps.phase[t] * a[(row, s)];
        }
    }
    Ok(out)
}

/// The parity matrix `P[t, s] = δ_{t, (−s) mod N}`.  It satisfies
/// `P W_z P = W_{−z}` in every quantization family.
pub fn parity_finite(g: &FiniteGroup) -> DMatrix<C64> {
    let n = g.n;
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        p[((n - s) % n, s)] = C64::new(1.0, 0.0);
    }
    p
}

/// Convolution of a symbol with an operator:
/// `(f ∗ A) = (1/N) Σ_z f(z) · α_z(A)`, an operator.
///
/// Its spectral transform factors exactly:
/// `F_W^Φ(f ∗ A) = F_σ f · F_W^Φ A` for every `Φ`.
pub fn conv_fn_op_finite(g: &FiniteGroup, f: &[C64], a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_symbol_len(g, f)?;
    check_matrix_dim(g, a)?;
    let n = g.n;
    let scale = 1.0 / n as f64;
    let mut out = DMatrix::zeros(n, n);
    for (z, fz) in f.iter().enumerate() {
        let (x, xi) = g.coords(z);
        let shifted = shift_finite(g, a, x, xi)?;
        out += shifted * (scale * fz);
    }
    Ok(out)
}

/// Convolution of two operators: the symbol
/// `(A ∗ B)(z) = tr(A · α_z(P B P))` with `P` the parity matrix.
///
/// In the symmetric family (`2c ≡ 1 mod N`) its symplectic transform
/// factors exactly: `F_σ(A ∗ B) = F_W A · F_W B`.
pub fn conv_op_op_finite(g: &FiniteGroup, a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Vec<C64>> {
    check_matrix_dim(g, a)?;
    check_matrix_dim(g, b)?;
    let p = parity_finite(g);
    let checked = &p * b * &p;
    let mut out = vec![C64::new(0.0, 0.0); g.points()];
    for (z, slot) in out.iter_mut().enumerate() {
        let (x, xi) = g.coords(z);
        let shifted = shift_finite(g, &checked, x, xi)?;
        let mut acc = C64::new(0.0, 0.0);
        for t in 0..g.n {
            for s in 0..g.n {
                acc += a[(t, s)] * shifted[(s, t)];
            }
        }
        *slot = acc;
    }
    Ok(out)
}

/// Convolution of two symbols with the `1/N` averaging:
/// `(f ∗ h)(z) = (1/N) Σ_u f(u) h(z − u)`, so that
/// `F_σ(f ∗ h) = F_σ f · F_σ h` exactly.
pub fn conv_fn_fn_finite(g: &FiniteGroup, f: &[C64], h: &[C64]) -> Result<Vec<C64>> {
    check_symbol_len(g, f)?;
    check_symbol_len(g, h)?;
    let scale = 1.0 / g.n as f64;
    let mut out = vec![C64::new(0.0, 0.0); g.points()];
    for (z, slot) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (u, fu) in f.iter().enumerate() {
            acc += fu * h[g.sub(z, u)];
        }
        *slot = scale * acc;
    }
    Ok(out)
}

/// Re-expresses a symbol from the family `from` in the family `to`:
/// quantize with `from`, read the symbol back with `to`.  The map is an
/// exact linear bijection of the `N²`-dimensional symbol space.
pub fn change_of_quantization_finite(
    g: &FiniteGroup,
    f: &[C64],
    from: &HomZn,
    to: &HomZn,
) -> Result<Vec<C64>> {
    let a = op_phi_finite(g, f, from)?;
    symbol_phi_finite(g, &a, to)
}

fn random_matrix(g: &FiniteGroup, r: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(g.n, g.n, |_, _| complex_normal(r))
}

fn random_symbol(g: &FiniteGroup, r: &mut ChaCha8Rng) -> Vec<C64> {
    (0..g.points()).map(|_| complex_normal(r)).collect()
}

fn shift_symbol(g: &FiniteGroup, f: &[C64], z: usize) -> Vec<C64> {
    (0..g.points()).map(|u| f[g.sub(u, z)]).collect()
}

fn max_abs_vec(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs_mat(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest modulus over a transform minus `N` at the origin — the deviation
/// from `N·δ_0`.
fn delta_defect(g: &FiniteGroup, f: &[C64]) -> f64 {
    let mut worst = (f[0] - C64::new(g.n as f64, 0.0)).norm();
    for v in &f[1..] {
        worst = worst.max(v.norm());
    }
    worst
}

/// Checks the entire finite Weyl package at modulus `N` by enumeration and
/// returns one report entry per identity.  All bounds are `1e−12` except
/// the Plancherel-variance entry (`1e−20`) and the structural booleans.
///
/// Even moduli and `N > 13` are rejected: the sweeps are quartic-to-sextic
/// in `N`, and oddness is required for the symmetric calibration.
pub fn exhaustive_verify(n: usize) -> Result<NormReport> {
    if n > 13 {
        return Err(QhaError::InvalidParameter(format!(
            "exhaustive verification sweeps are limited to moduli ≤ 13, got {n}"
        )));
    }
    let g = FiniteGroup::new(n)?;
    let start = std::time::Instant::now();
    let seed = derive_seed(0xF17E, &format!("finite-exhaustive-{n}"));
    let mut r = rng(seed);
    let mut rep = NormReport::new("finite");
    rep.set_config("N", n);
    rep.set_config("seed", seed);

    let tol = 1e-12;
    let npts = g.points();
    let homs: Vec<HomZn> = (0..n).map(|c| HomZn::new(&g, c as i64)).collect();
    let sym = g.symmetric_hom();
    let identity = DMatrix::<C64>::identity(n, n);

    // The zero point quantizes to the identity in every family.
    let mut d = 0.0_f64;
    for phi in &homs {
        d = d.max(max_abs_mat(&weyl_finite(&g, 0, 0, phi), &identity));
    }
    rep.push(ReportEntry::defect("weyl-zero-is-identity", "finite-weyl-system", d, tol));

    // Unitarity of every Weyl matrix in every family, via dense products.
    let mut d = 0.0_f64;
    for phi in &homs {
        for z in 0..npts {
            let (x, xi) = g.coords(z);
            let w = weyl_finite(&g, x, xi, phi);
            d = d.max(max_abs_mat(&(&w * w.adjoint()), &identity));
        }
    }
    rep.push(ReportEntry::defect("weyl-unitary", "finite-weyl-system", d, tol));

    // Composition multiplier: W_z W_w = m(z,w) W_{z+w} with |m| = 1, for
    // all N⁴ pairs in all N families; then the multiplier ratio
    // m(z,w)/m(w,z) against the symplectic phase, and its independence of
    // the family.
    let mut closure = 0.0_f64;
    let mut ratio_vs_sigma = 0.0_f64;
    let mut ratio_vs_family = 0.0_f64;
    let mut ratio_base = vec![C64::new(0.0, 0.0); npts * npts];
    let mut m_table = vec![C64::new(0.0, 0.0); npts * npts];
    for (ci, phi) in homs.iter().enumerate() {
        let shifts: Vec<PhasedShift> = (0..npts)
            .map(|z| {
                let (x, xi) = g.coords(z);
                PhasedShift::weyl(&g, x, xi, phi)
            })
            .collect();
        for z in 0..npts {
            for w in 0..npts {
                let prod = shifts[z].compose(&shifts[w], &g);
                let sum = &shifts[g.add(z, w)];
                let m = prod.phase[0] * sum.phase[0].conj();
                closure = closure.max((m.norm() - 1.0).abs());
                for t in 0..n {
                    closure = closure.max((prod.phase[t] - m * sum.phase[t]).norm());
                }
                m_table[z * npts + w] = m;
            }
        }
        for z in 0..npts {
            for w in 0..npts {
                let ratio = m_table[z * npts + w] * m_table[w * npts + z].conj();
                ratio_vs_sigma = ratio_vs_sigma.max((ratio - g.phase(g.sigma(z, w))).norm());
                if ci == 0 {
                    ratio_base[z * npts + w] = ratio;
                } else {
                    ratio_vs_family =
                        ratio_vs_family.max((ratio - ratio_base[z * npts + w]).norm());
                }
            }
        }
    }
    rep.push(ReportEntry::defect("weyl-multiplier-closure", "finite-weyl-system", closure, tol));
    rep.push(ReportEntry::defect(
        "multiplier-ratio-is-symplectic-phase",
        "finite-weyl-system",
        ratio_vs_sigma,
        tol,
    ));
    rep.push(ReportEntry::defect(
        "multiplier-ratio-family-independent",
        "finite-weyl-system",
        ratio_vs_family,
        tol,
    ));

    // Adjoints live in the complementary family at the negated point.
    let mut d = 0.0_f64;
    for phi in &homs {
        let co = phi.complement(&g);
        for z in 0..npts {
            let (x, xi) = g.coords(z);
            let lhs = PhasedShift::weyl(&g, x, xi, phi).adjoint(&g);
            let rhs = PhasedShift::weyl(&g, -x, -xi, &co);
            d = d.max(lhs.max_abs_diff(&rhs));
        }
    }
    rep.push(ReportEntry::defect(
        "weyl-adjoint-in-complement-family",
        "finite-weyl-system",
        d,
        tol,
    ));

    // The identity matrix transforms to N·δ_0 in every family.
    let mut d = 0.0_f64;
    for phi in &homs {
        d = d.max(delta_defect(&g, &fw_finite(&g, &identity, phi)?));
    }
    rep.push(ReportEntry::defect(
        "transform-of-identity-is-scaled-delta",
        "finite-spectral-transform",
        d,
        tol,
    ));

    // Families differ by the explicit unimodular twist e^{2πi ξ·Φ(x)/N}.
    let mut d = 0.0_f64;
    for _ in 0..3 {
        let a = random_matrix(&g, &mut r);
        let base = fw_finite(&g, &a, &HomZn::trivial())?;
        for phi in &homs {
            let fc = fw_finite(&g, &a, phi)?;
            for w in 0..npts {
                let (x, xi) = g.coords(w);
                let twist = g.phase(xi * phi.apply(&g, x));
                d = d.max((fc[w] - twist * base[w]).norm());
            }
        }
    }
    rep.push(ReportEntry::defect("family-twist-formula", "finite-spectral-transform", d, tol));

    // Plancherel: Σ_w |F_W A|² = c·‖A‖_F² with one constant c = N across
    // 50 random draws.
    let mut consts = Vec::with_capacity(50);
    for _ in 0..50 {
        let a = random_matrix(&g, &mut r);
        let fw = fw_finite(&g, &a, &sym)?;
        let num: f64 = fw.iter().map(|v| v.norm_sqr()).sum();
        let den: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        consts.push(num / den);
    }
    let mean = consts.iter().sum::<f64>() / consts.len() as f64;
    let var = consts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / consts.len() as f64;
    rep.push(ReportEntry::measured("plancherel-constant", "finite-spectral-transform", mean));
    rep.push(ReportEntry::defect(
        "plancherel-constant-variance",
        "finite-spectral-transform",
        var,
        1e-20,
    ));
    rep.push(ReportEntry::defect(
        "plancherel-constant-is-group-order",
        "finite-spectral-transform",
        (mean - n as f64).abs(),
        1e-10,
    ));

    // The symplectic transform is self-inverse and preserves Σ|f|².
    let f = random_symbol(&g, &mut r);
    let ff = fsigma_finite(&g, &fsigma_finite(&g, &f)?)?;
    rep.push(ReportEntry::defect(
        "symplectic-transform-self-inverse",
        "finite-spectral-transform",
        max_abs_vec(&ff, &f),
        tol,
    ));
    let fs = fsigma_finite(&g, &f)?;
    let before: f64 = f.iter().map(|v| v.norm_sqr()).sum();
    let after: f64 = fs.iter().map(|v| v.norm_sqr()).sum();
    rep.push(ReportEntry::defect(
        "symplectic-transform-isometric",
        "finite-spectral-transform",
        (after - before).abs() / before,
        tol,
    ));

    // Quantization sends 1 to the identity and round-trips every basis
    // symbol, in every family.
    let mut unit = 0.0_f64;
    let mut roundtrip = 0.0_f64;
    let ones = vec![C64::new(1.0, 0.0); npts];
    for phi in &homs {
        unit = unit.max(max_abs_mat(&op_phi_finite(&g, &ones, phi)?, &identity));
        for z in 0..npts {
            let mut basis = vec![C64::new(0.0, 0.0); npts];
            basis[z] = C64::new(1.0, 0.0);
            let back = symbol_phi_finite(&g, &op_phi_finite(&g, &basis, phi)?, phi)?;
            roundtrip = roundtrip.max(max_abs_vec(&back, &basis));
        }
    }
    rep.push(ReportEntry::defect("unit-symbol-quantizes-to-identity", "finite-quantization", unit, tol));
    rep.push(ReportEntry::defect("symbol-roundtrip-on-basis", "finite-quantization", roundtrip, tol));

    // Covariance: α_z(op(f)) = op(f(· − z)) for all z and all families.
    let f = random_symbol(&g, &mut r);
    let mut d = 0.0_f64;
    for phi in &homs {
        let a = op_phi_finite(&g, &f, phi)?;
        for z in 0..npts {
            let (x, xi) = g.coords(z);
            let lhs = shift_finite(&g, &a, x, xi)?;
            let rhs = op_phi_finite(&g, &shift_symbol(&g, &f, z), phi)?;
            d = d.max(max_abs_mat(&lhs, &rhs));
        }
    }
    rep.push(ReportEntry::defect("quantization-shift-covariance", "finite-quantization", d, tol));

    // One-sided modulation shifts the modulus of the spectral transform.
    let a = random_matrix(&g, &mut r);
    let mut d = 0.0_f64;
    for phi in &homs {
        let base = fw_finite(&g, &a, phi)?;
        for w in 0..npts {
            let (x, xi) = g.coords(w);
            let moved = fw_finite(&g, &modulate_finite(&g, &a, x, xi, phi)?, phi)?;
            for u in 0..npts {
                d = d.max((moved[u].norm() - base[g.sub(u, w)].norm()).abs());
            }
        }
    }
    rep.push(ReportEntry::defect(
        "modulation-shifts-transform-modulus",
        "finite-quantization",
        d,
        tol,
    ));

    // Convolution theorems, each with constant exactly one:
    // symbol–symbol, symbol–operator (every family), operator–operator
    // (symmetric family).
    let f = random_symbol(&g, &mut r);
    let h = random_symbol(&g, &mut r);
    let lhs = fsigma_finite(&g, &conv_fn_fn_finite(&g, &f, &h)?)?;
    let ff = fsigma_finite(&g, &f)?;
    let fh = fsigma_finite(&g, &h)?;
    let rhs: Vec<C64> = ff.iter().zip(&fh).map(|(a, b)| a * b).collect();
    rep.push(ReportEntry::defect(
        "convolution-theorem-symbol-symbol",
        "finite-convolution",
        max_abs_vec(&lhs, &rhs),
        tol,
    ));

    let a = random_matrix(&g, &mut r);
    let c = conv_fn_op_finite(&g, &f, &a)?;
    let mut d = 0.0_f64;
    for phi in &homs {
        let lhs = fw_finite(&g, &c, phi)?;
        let fa = fw_finite(&g, &a, phi)?;
        let rhs: Vec<C64> = ff.iter().zip(&fa).map(|(x, y)| x * y).collect();
        d = d.max(max_abs_vec(&lhs, &rhs));
    }
    rep.push(ReportEntry::defect(
        "convolution-theorem-symbol-operator",
        "finite-convolution",
        d,
        tol,
    ));

    let b = random_matrix(&g, &mut r);
    let lhs = fsigma_finite(&g, &conv_op_op_finite(&g, &a, &b)?)?;
    let fa = fw_finite(&g, &a, &sym)?;
    let fb = fw_finite(&g, &b, &sym)?;
    let rhs: Vec<C64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    rep.push(ReportEntry::defect(
        "convolution-theorem-operator-operator",
        "finite-convolution",
        max_abs_vec(&lhs, &rhs),
        tol,
    ));

    // The scaled point mass N·δ_0 is the unit of symbol–operator
    // convolution.
    let mut delta = vec![C64::new(0.0, 0.0); npts];
    delta[0] = C64::new(n as f64, 0.0);
    rep.push(ReportEntry::defect(
        "delta-is-convolution-unit",
        "finite-convolution",
        max_abs_mat(&conv_fn_op_finite(&g, &delta, &a)?, &a),
        tol,
    ));

    // Shift-by-one difference operators commute with quantization on both
    // axes, in every family.
    let f = random_symbol(&g, &mut r);
    let mut d = 0.0_f64;
    for phi in &homs {
        let a = op_phi_finite(&g, &f, phi)?;
        for (dx, dxi) in [(1_i64, 0_i64), (0, 1)] {
            let step = g.flat(dx, dxi);
            let lhs = shift_finite(&g, &a, dx, dxi)? - &a;
            let diff: Vec<C64> = shift_symbol(&g, &f, step)
                .iter()
                .zip(&f)
                .map(|(s, o)| s - o)
                .collect();
            let rhs = op_phi_finite(&g, &diff, phi)?;
            d = d.max(max_abs_mat(&lhs, &rhs));
        }
    }
    rep.push(ReportEntry::defect(
        "difference-ops-commute-with-quantization",
        "finite-quantization",
        d,
        tol,
    ));

    // Changing the quantization family is an exact linear bijection:
    // round-trip defect, and full rank of the N² × N² transfer matrix.
    let from = HomZn::new(&g, 1);
    let f = random_symbol(&g, &mut r);
    let there = change_of_quantization_finite(&g, &f, &from, &sym)?;
    let back = change_of_quantization_finite(&g, &there, &sym, &from)?;
    rep.push(ReportEntry::defect(
        "change-of-quantization-roundtrip",
        "finite-quantization",
        max_abs_vec(&back, &f),
        tol,
    ));
    let mut transfer = DMatrix::<C64>::zeros(npts, npts);
    for z in 0..npts {
        let mut basis = vec![C64::new(0.0, 0.0); npts];
        basis[z] = C64::new(1.0, 0.0);
        let col = change_of_quantization_finite(&g, &basis, &from, &sym)?;
        for (u, v) in col.iter().enumerate() {
            transfer[(u, z)] = *v;
        }
    }
    let sv = transfer.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-8 * top).count();
    rep.push(ReportEntry::defect(
        "change-of-quantization-full-rank",
        "finite-quantization",
        (npts - rank) as f64,
        0.5,
    ));

    // Structural: the sweeps above exercised every multiplier c ∈ ℤ_N.
    rep.push(ReportEntry::boolean(
        "all-multipliers-exercised",
        "plumbing",
        homs.len() == n,
    ));

    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}
