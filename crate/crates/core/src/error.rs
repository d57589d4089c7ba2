//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by parameter validation and the physics kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter violates its declared invariant.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The dissipative coupling constant is zero, so ratio-based
    /// quantities (ω_h, the Fano detuning) are undefined.
    #[error("degenerate coupling: g_gamma must be nonzero")]
    DegenerateCoupling,

    /// The effective mechanical damping γ_M is not positive; the
    /// oscillator is anti-damped and no stationary occupation exists.
    #[error("instability: effective mechanical damping gamma_M = {gamma_m_eff:e} must be positive")]
    Instability { gamma_m_eff: f64 },

    /// Cooling below the thermal occupation is impossible (n_th·G ≤ 1).
    #[error("no cooling: n_th * G = {nth_g:e} must exceed 1")]
    NoCooling { nth_g: f64 },

    /// The effective interferometer mirror has (numerically) zero
    /// transmission, so no light couples into the cavity.
    #[error("dark port: effective mirror transmission tau is zero, no input coupling")]
    DarkPort,

    /// The adaptive integrator could not reach the requested relative
    /// tolerance within the subdivision budget.
    #[error("quadrature did not converge: relative error {rel_err:e} after {subdivisions} subdivisions (target {rel_tol:e})")]
    QuadratureNonConvergence {
        rel_err: f64,
        rel_tol: f64,
        subdivisions: usize,
    },

    /// The exact interferometer spectrum was requested at a point where
    /// its resonant denominator vanishes (lossless resonance).
    #[error("resonance singularity: lossless cavity evaluated exactly on resonance")]
    ResonanceSingularity,
}

pub type Result<T> = std::result::Result<T, Error>;
