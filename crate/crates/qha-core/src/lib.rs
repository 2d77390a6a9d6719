//! Numerical quantum harmonic analysis on a discretized phase space.
//!
//! The crate realizes the joint translation–modulation structure shared by
//! functions on phase space `ℝ^{2d}` and by operators on `L²(ℝ^d)`, on a
//! symplectically self-dual lattice where the whole algebra is exact in
//! floating point:
//!
//! * [`grid`]: the lattice, signed coordinates, the symplectic form;
//! * [`symbol`]: sampled phase-space functions, standard families, CSV IO;
//! * [`operator`]: matrix operator representations and the Weyl system
//!   `W_z^τ` with its composition multiplier;
//! * [`fourier`]: the involutive symplectic Fourier transform `F_σ` and the
//!   Fourier–Weyl transform `F_W^τ = tr(A·W_w^{τ†})` with exact Plancherel
//!   calibration;
//! * [`quantize`]: `τ`-quantizations `op_τ = (F_W^τ)^{-1}∘F_σ`, their
//!   inverses, and the ordering transforms linking them;
//! * [`calculus`]: phase-space derivatives of operators (commutator
//!   generators and finite differences), `C^k`/Sobolev/Schatten norms;
//! * [`stft`]: short-time Fourier transforms of functions and operators,
//!   mixed `M^{∞,1}` norms, window comparison and embedding constants;
//! * [`convolution`]: function–operator and operator–operator convolutions,
//!   the Bessel-type kernel factorization of quantization, and the
//!   Schatten-class boundedness estimates built on it;
//! * [`finite`]: the same structure over the cyclic group `ℤ_N` with odd
//!   `N`, where every identity is checked by exhaustive enumeration;
//! * [`analytic`]: operator Taylor series, series inversion, and fitted
//!   analyticity certificates `(C, R)` from derivative growth;
//! * [`report`]: structured pass/fail reports with deterministic JSON/CSV
//!   serialization;
//! * [`samples`]: seeded random lattice points, symbols, and operators.

pub mod analytic;
pub mod calculus;
pub mod convolution;
pub mod error;
pub mod fft;
pub mod finite;
pub mod fourier;
pub mod grid;
pub mod operator;
pub mod quantize;
pub mod report;
pub mod samples;
pub mod stft;
pub mod symbol;

pub use analytic::{
    analyticity_fit, analyticity_fit_operator, analyticity_fit_symbol, compose_series,
    evaluate_series, invert_series, operator_norm_map, series_coefficients, symbol_norm_map,
    AnalyticityFit, MIN_FIT_ORDER,
};
pub use calculus::{
    derivative, derivative_axis, derivative_table, schatten_norm, symbol_derivative,
    DerivativeScheme, DerivativeTable, MultiIndex, SchattenExponent,
};
pub use convolution::{
    bessel_delta, bessel_power, bessel_power_operator, conv_fn_fn, conv_fn_op, conv_op_op,
    cordes_kernel, cv_bound, reverse_cv_bound, CordesKernel, CvReport,
};
pub use error::{QhaError, Result};
pub use finite::{
    change_of_quantization_finite, conv_fn_fn_finite, conv_fn_op_finite, conv_op_op_finite,
    exhaustive_verify, fsigma_finite, fw_finite, modulate_finite, op_phi_finite, parity_finite,
    shift_finite, symbol_phi_finite, weyl_finite, FiniteGroup, HomZn,
};
pub use grid::{symplectic_form, PhaseGrid, PhasePoint};
pub use operator::{
    op_modulate, op_shift, parity_conjugate, weyl_multiplier, weyl_operator, OperatorRep,
};
pub use quantize::{n_tau, op_tau, op_weyl, symbol_of};
pub use report::{NormReport, ReportEntry};
pub use stft::{
    cb_embedding_bound, m_inf1_norm, m_inf1_norm_operator, m_inf1_norm_operator_with,
    m_inf1_norm_with, mixed_norm_inf1, stft_function, stft_function_with, stft_operator,
    stft_operator_with, window_equivalence_ratios, StftConfig, StftSample, WindowSpec,
};
pub use symbol::{make_symbol, modulate_function, shift_function, Symbol, SymbolFamily};
