//! Backaction force spectra, mechanical susceptibility and the
//! light-induced damping.
//!
//! Convention: f(ω) = ∫dt e^{iωt} f(t). Every spectrum returned here is
//! pre-multiplied by (x_zpf/ħ)², i.e. it is a rate; neither ħ nor the
//! oscillator mass ever appears in the numeric layer.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{SpectrumKind, SystemParams};

/// Characteristic frequency ω_h = 2Δ + γ·g_ω/g_γ of the quantum-noise
/// interference: the ideal force spectrum vanishes at ω = −ω_h.
pub fn omega_h(params: &SystemParams) -> Result<f64> {
    Ok(2.0 * params.cavity.detuning + params.coupling_ratio()?)
}

fn lorentzian_denominator(params: &SystemParams, omega: f64) -> f64 {
    let half = 0.5 * params.gamma_line();
    let shifted = omega + params.cavity.detuning;
    half * half + shifted * shifted
}

/// Ideal contribution: U·γ·(ω+ω_h)² / [(γ/2)² + (ω+Δ)²].
fn s_ideal(params: &SystemParams, omega: f64, w_h: f64) -> f64 {
    let num = omega + w_h;
    params.u() * params.cavity.gamma * num * num / lorentzian_denominator(params, omega)
}

/// Internal-loss contribution: U·γ_int·[(γ/2)² + (Δ+γg_ω/g_γ)²] over the
/// same Lorentzian. The numerator is frequency independent.
fn s_internal_loss(params: &SystemParams, omega: f64) -> Result<f64> {
    let half = 0.5 * params.gamma_line();
    let shift = params.cavity.detuning + params.coupling_ratio()?;
    let num = half * half + shift * shift;
    Ok(params.u() * params.cavity.gamma_int * num / lorentzian_denominator(params, omega))
}

/// Multimode (finite free-spectral-range) addition:
/// U·γ·(π·ω_h·ω/ω_FSR)² over the same Lorentzian.
fn s_multimode_extra(params: &SystemParams, omega: f64, w_h: f64) -> f64 {
    let num = std::f64::consts::PI * w_h * omega / params.cavity.fsr;
    params.u() * params.cavity.gamma * num * num / lorentzian_denominator(params, omega)
}

/// One-sided backaction force spectral density (normalized to a rate)
/// with the contributions selected by `kind`.
pub fn s_ff(omega: f64, params: &SystemParams, kind: SpectrumKind) -> Result<f64> {
    params.validate()?;
    let w_h = omega_h(params)?;
    let mut s = s_ideal(params, omega, w_h);
    if kind.includes_multimode() {
        s += s_multimode_extra(params, omega, w_h);
    }
    if kind.includes_internal_loss() {
        s += s_internal_loss(params, omega)?;
    }
    Ok(s)
}

/// The individual spectrum components, for kernels that need them
/// separately (quadrature breakdowns, damping routes).
pub(crate) fn s_ff_components(
    omega: f64,
    params: &SystemParams,
    kind: SpectrumKind,
) -> Result<SpectrumComponents> {
    let w_h = omega_h(params)?;
    Ok(SpectrumComponents {
        ideal: s_ideal(params, omega, w_h),
        internal_loss: if kind.includes_internal_loss() {
            s_internal_loss(params, omega)?
        } else {
            0.0
        },
        multimode: if kind.includes_multimode() {
            s_multimode_extra(params, omega, w_h)
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SpectrumComponents {
    pub ideal: f64,
    pub internal_loss: f64,
    pub multimode: f64,
}

/// Renormalized mechanical susceptibility χ(ω) = 1/(γ_M/2 − i(ω − ω_M)).
pub fn susceptibility(omega: f64, gamma_m_eff: f64, omega_m_eff: f64) -> Result<Complex64> {
    if gamma_m_eff.is_nan() || gamma_m_eff <= 0.0 {
        return Err(Error::Instability { gamma_m_eff });
    }
    Ok(Complex64::new(0.5 * gamma_m_eff, -(omega - omega_m_eff)).inv())
}

/// Light-pressure-induced mechanical decay rate
/// γ_opt = S(ω_M) − S(−ω_M), with S of the requested kind.
/// Negative values mean net heating; the caller composes
/// γ_M = γ_m + γ_opt.
pub fn gamma_opt(params: &SystemParams, omega_m_eff: f64, kind: SpectrumKind) -> Result<f64> {
    params.validate()?;
    Ok(s_ff(omega_m_eff, params, kind)? - s_ff(-omega_m_eff, params, kind)?)
}

/// γ_M = γ_m + γ_opt for the requested kind, using the params' own ω_M.
pub(crate) fn gamma_m_eff(params: &SystemParams, kind: SpectrumKind) -> Result<f64> {
    Ok(params.mech.gamma_m + gamma_opt(params, params.omega_m_eff(), kind)?)
}
