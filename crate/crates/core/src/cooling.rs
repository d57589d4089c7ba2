//! Phonon occupation: closed forms, imperfection corrections and an
//! independent quadrature oracle.

use crate::error::{Error, Result};
use crate::params::{SpectrumKind, SystemParams};
use crate::quad;
use crate::spectra;

/// How a [`CoolingResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Quadrature,
}

/// Phonon occupation with a per-source breakdown. For both methods the
/// total is the sum of the listed contributions.
#[derive(Debug, Clone)]
pub struct CoolingResult {
    pub n_total: f64,
    /// Residual thermal occupation γ_m·n_th/γ_M.
    pub n_thermal_residual: f64,
    /// Quantum backaction of the ideal spectrum.
    pub n_backaction: f64,
    /// Internal-loss noise contribution.
    pub n_int: f64,
    /// Detuning-inaccuracy contribution (analytic composition only).
    pub n_delta: f64,
    /// Coupling-ratio-inaccuracy contribution (analytic composition only).
    pub n_g: f64,
    /// Multimode (finite free-spectral-range) contribution.
    pub n_l: f64,
    /// Effective mechanical damping γ_M = γ_m + γ_opt.
    pub gamma_m_eff: f64,
    pub method: Method,
    /// γ_opt ≤ γ/10 (weak-coupling condition with a 10× margin).
    pub weak_coupling_ok: bool,
    /// γ_M ≤ ω_M/10 (underdamped condition with a 10× margin).
    pub underdamped_ok: bool,
}

/// Deviations of the experimental settings from their optimal values.
#[derive(Debug, Clone, Default)]
pub struct Deviations {
    /// Detuning offset δΔ (angular frequency).
    pub d_detuning: f64,
    /// Relative drive-power offset δU/U0.
    pub d_power_rel: f64,
    /// Relative coupling-ratio offset δ = (γg_ω/g_γ − 3ω_M)/(3ω_M).
    pub d_ratio_rel: f64,
}

impl Deviations {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("deviations.d_detuning", self.d_detuning),
            ("deviations.d_power_rel", self.d_power_rel),
            ("deviations.d_ratio_rel", self.d_ratio_rel),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {v} must be finite")));
            }
        }
        Ok(())
    }
}

/// Controls for the adaptive quadrature oracle.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative tolerance on the occupation integral.
    pub rel_tol: f64,
    /// Half-width of the mechanical-peak window, in multiples of γ_M.
    pub peak_window_halfwidth: f64,
    /// Integration extends to ±(|Δ| + ω_M + tail_extent·γ).
    pub tail_extent: f64,
    /// Bisection budget before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            peak_window_halfwidth: 1e3,
            tail_extent: 50.0,
            max_subdivisions: 10_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 || self.rel_tol > 1e-2 {
            return Err(Error::InvalidParam(format!(
                "quadrature.rel_tol = {} must lie in (0, 1e-2]",
                self.rel_tol
            )));
        }
        if self.peak_window_halfwidth.is_nan()
            || self.peak_window_halfwidth <= 0.0
            || self.tail_extent.is_nan()
            || self.tail_extent <= 0.0
        {
            return Err(Error::InvalidParam(
                "quadrature windows must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParam(
                "quadrature.max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Spectrum kind implied by the parameters: internal loss when
/// γ_int > 0, multimode when the free spectral range is finite.
pub fn inferred_kind(params: &SystemParams) -> SpectrumKind {
    match (params.cavity.gamma_int > 0.0, params.cavity.fsr.is_finite()) {
        (false, false) => SpectrumKind::Ideal,
        (true, false) => SpectrumKind::WithInternalLoss,
        (false, true) => SpectrumKind::Multimode,
        (true, true) => SpectrumKind::MultimodeWithInternalLoss,
    }
}

/// Maximal damping gain G0 = 16ω_M²/(γγ_m), reached at the optimal
/// coupling ratio.
pub fn g0_factor(params: &SystemParams) -> f64 {
    let wm = params.omega_m_eff();
    16.0 * wm * wm / (params.cavity.gamma * params.mech.gamma_m)
}

/// Damping gain G = G0/(1 + (3ω_M/γ − g_ω/g_γ)²) at the Fano detuning
/// for the actual coupling ratio.
pub fn g_factor(params: &SystemParams) -> Result<f64> {
    if params.coupling.g_gamma == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let mismatch = 3.0 * params.omega_m_eff() / params.cavity.gamma
        - params.coupling.g_omega / params.coupling.g_gamma;
    Ok(g0_factor(params) / (1.0 + mismatch * mismatch))
}

/// Sideband-cooling floor of the purely dispersive protocol,
/// n_disp = γ²/(16 ω_M²).
pub fn dispersive_floor(params: &SystemParams) -> f64 {
    let x = params.cavity.gamma / (4.0 * params.omega_m_eff());
    x * x
}

/// Internal-loss spectral weight ratio
/// β = [(γ/2)² + 16ω_M²] / [(γ/2)² + 4ω_M²], between 1 and 4.
pub fn beta_factor(params: &SystemParams) -> f64 {
    let half_sq = (0.5 * params.cavity.gamma).powi(2);
    let wm_sq = params.omega_m_eff().powi(2);
    (half_sq + 16.0 * wm_sq) / (half_sq + 4.0 * wm_sq)
}

fn validity_flags(params: &SystemParams, gamma_m_eff: f64) -> (bool, bool) {
    let gamma_opt = gamma_m_eff - params.mech.gamma_m;
    let weak = gamma_opt <= params.cavity.gamma / 10.0;
    let underdamped = gamma_m_eff <= params.omega_m_eff() / 10.0;
    (weak, underdamped)
}

/// Phonon occupation from the closed-form weak-coupling expression,
/// with the spectrum kind inferred from the parameters.
pub fn n_analytic(params: &SystemParams) -> Result<CoolingResult> {
    n_analytic_with_kind(params, inferred_kind(params))
}

/// Narrow-band and cavity-band pieces of the closed form, with the
/// thermal residual and γ_M they share.
struct ClosedFormParts {
    narrow: f64,
    broad: f64,
    thermal: f64,
    gamma_m_eff: f64,
}

/// The first bracket term is computed from Δ − Δ_fano so it is exactly
/// zero at the Fano detuning.
fn closed_form_parts(params: &SystemParams, kind: SpectrumKind) -> Result<ClosedFormParts> {
    params.validate()?;
    let gamma = params.cavity.gamma;
    let omega_m = params.omega_m_eff();
    let delta = params.cavity.detuning;
    let gamma_m_eff = spectra::gamma_m_eff(params, kind)?;
    if gamma_m_eff <= 0.0 {
        return Err(Error::Instability { gamma_m_eff });
    }
    let wh_minus_wm = 2.0 * (delta - params.fano_detuning()?);
    let wh_minus_delta = delta + params.coupling_ratio()?;
    let prefactor = params.u() * gamma
        / (0.25 * (gamma + gamma_m_eff).powi(2) + (omega_m - delta).powi(2));
    Ok(ClosedFormParts {
        narrow: prefactor * wh_minus_wm * wh_minus_wm / gamma_m_eff,
        broad: prefactor
            * (wh_minus_delta * wh_minus_delta / gamma + 0.25 * (gamma + gamma_m_eff)),
        thermal: params.mech.gamma_m * params.mech.n_th / gamma_m_eff,
        gamma_m_eff,
    })
}

/// Closed-form occupation
/// n = (γ_m/γ_M)·n_th + U·γ/[(γ+γ_M)²/4 + (ω_M−Δ)²] ·
///     [(ω_h−ω_M)²/γ_M + (ω_h−Δ)²/γ + (γ+γ_M)/4],
/// with γ_M = γ_m + γ_opt of the requested kind.
pub fn n_analytic_with_kind(params: &SystemParams, kind: SpectrumKind) -> Result<CoolingResult> {
    let parts = closed_form_parts(params, kind)?;
    let n_backaction = parts.narrow + parts.broad;
    let (weak_coupling_ok, underdamped_ok) = validity_flags(params, parts.gamma_m_eff);
    Ok(CoolingResult {
        n_total: parts.thermal + n_backaction,
        n_thermal_residual: parts.thermal,
        n_backaction,
        n_int: 0.0,
        n_delta: 0.0,
        n_g: 0.0,
        n_l: 0.0,
        gamma_m_eff: parts.gamma_m_eff,
        method: Method::Analytic,
        weak_coupling_ok,
        underdamped_ok,
    })
}

/// The two contributions the closed-form bracket separates, for
/// cancellation diagnostics: (narrow-band term, cavity-band remainder).
/// The narrow-band term is exactly zero at the Fano detuning.
pub fn bracket_decomposition(params: &SystemParams, kind: SpectrumKind) -> Result<(f64, f64)> {
    let parts = closed_form_parts(params, kind)?;
    Ok((parts.narrow, parts.broad))
}

/// Occupation n(U) = n_th/(1 + G·U) + U along the Fano-detuned power
/// axis.
pub fn n_at_power(params: &SystemParams, u: f64) -> Result<f64> {
    let g = g_factor(params)?;
    Ok(params.mech.n_th / (1.0 + g * u) + u)
}

/// Closed form plus the additive imperfection corrections implied by the
/// parameters and the supplied deviations. The loss and multimode terms
/// are the narrow-band noise of the corresponding spectrum components,
/// so they agree with what the quadrature sees.
pub fn n_with_corrections(
    params: &SystemParams,
    deviations: Option<&Deviations>,
) -> Result<CoolingResult> {
    let kind = inferred_kind(params);
    let mut out = n_analytic_with_kind(params, kind)?;
    let omega_m = params.omega_m_eff();

    if kind.includes_internal_loss() || kind.includes_multimode() {
        let comps = spectra::s_ff_components(-omega_m, params, kind)?;
        out.n_int = comps.internal_loss / out.gamma_m_eff;
        out.n_l = comps.multimode / out.gamma_m_eff;
    }
    if let Some(dev) = deviations {
        dev.validate()?;
        if dev.d_detuning != 0.0 {
            out.n_delta = n_detuning_error(params, dev.d_detuning)?;
        }
        if dev.d_ratio_rel != 0.0 {
            out.n_g = n_ratio_error(params, dev.d_ratio_rel);
        }
    }
    out.n_total =
        out.n_thermal_residual + out.n_backaction + out.n_int + out.n_delta + out.n_g + out.n_l;
    Ok(out)
}

/// Dispersive-coupling sideband cooling at the optimal red detuning:
/// n = (n_th + n_disp·V)/(1 + V).
pub fn n_dispersive(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let gamma = params.cavity.gamma;
    let wm = params.omega_m_eff();
    let d4 = (0.5 * gamma).powi(2) + 4.0 * wm * wm;
    let v = params.drive.photon_number * params.coupling.g_omega.powi(2) / d4 * 16.0 * wm * wm
        / (gamma * params.mech.gamma_m);
    Ok((params.mech.n_th + dispersive_floor(params) * v) / (1.0 + v))
}

/// Minimal occupation of the dissipative-assisted protocol at the Fano
/// detuning, and the drive U0 that reaches it. With `exact_minimization`
/// the full minimizer of n(U) is used; otherwise the deep-cooling
/// approximations n_diss = 2√(n_th/G), U0 = n_diss/2.
pub fn n_diss_limit(params: &SystemParams, exact_minimization: bool) -> Result<(f64, f64)> {
    params.validate()?;
    let g = g_factor(params)?;
    let nth_g = params.mech.n_th * g;
    if nth_g <= 1.0 {
        return Err(Error::NoCooling { nth_g });
    }
    if exact_minimization {
        let n = params.mech.n_th * (2.0 / nth_g.sqrt() - 1.0 / nth_g);
        let u0 = (nth_g.sqrt() - 1.0) / g;
        Ok((n, u0))
    } else {
        let n = 2.0 * (params.mech.n_th / g).sqrt();
        Ok((n, 0.5 * n))
    }
}

/// Deep-cooling limit at the optimal coupling ratio,
/// n_diss = ½·√(n_th/Q · γ/ω_M).
pub fn n_diss_optimal_ratio(params: &SystemParams) -> f64 {
    2.0 * (params.mech.n_th / g0_factor(params)).sqrt()
}

/// Internal-loss contribution to the minimal phonon number at the
/// optimized settings: n_int = (γ_int/γ)·n_disp·β.
pub fn n_internal_loss(params: &SystemParams) -> f64 {
    params.cavity.gamma_int / params.cavity.gamma * dispersive_floor(params) * beta_factor(params)
}

/// Internal-loss spectral weight
/// H = (γ_int/γ_m)·[(γ/2)² + (Δ+γg_ω/g_γ)²]/[(γ/2)² + (ω_M−Δ)²]
/// at the actual settings.
pub fn internal_loss_weight(params: &SystemParams) -> Result<f64> {
    let half_sq = (0.5 * params.cavity.gamma).powi(2);
    let shift = params.cavity.detuning + params.coupling_ratio()?;
    let miss = params.omega_m_eff() - params.cavity.detuning;
    Ok(params.cavity.gamma_int / params.mech.gamma_m * (half_sq + shift * shift)
        / (half_sq + miss * miss))
}

/// General-setting internal-loss contribution H·U/(1 + G·U), which
/// equals the loss-spectrum noise in the oscillator bandwidth.
pub fn n_internal_loss_general(params: &SystemParams) -> Result<f64> {
    let h = internal_loss_weight(params)?;
    let gu = g_factor(params)? * params.u();
    Ok(h * params.u() / (1.0 + gu))
}

/// Extra phonons from a detuning offset δΔ:
/// n_Δ = U·γ²/[(γ/2)² + (ω_M−Δ)²] · 4δΔ²/(γ·γ_M).
pub fn n_detuning_error(params: &SystemParams, d_delta: f64) -> Result<f64> {
    let gamma = params.cavity.gamma;
    let gamma_m_eff = spectra::gamma_m_eff(params, inferred_kind(params))?;
    if gamma_m_eff <= 0.0 {
        return Err(Error::Instability { gamma_m_eff });
    }
    let miss = params.omega_m_eff() - params.cavity.detuning;
    let lorentz = (0.5 * gamma).powi(2) + miss * miss;
    Ok(params.u() * gamma * gamma / lorentz * 4.0 * d_delta * d_delta / (gamma * gamma_m_eff))
}

/// Detuning-offset contribution at the optimized settings:
/// n_Δ = (δΔ/Δ)²·(γ/2)²/[(γ/2)² + 4ω_M²].
pub fn n_detuning_error_optimized(params: &SystemParams, d_delta: f64) -> f64 {
    let half_sq = (0.5 * params.cavity.gamma).powi(2);
    let wm_sq = params.omega_m_eff().powi(2);
    let rel = d_delta / params.cavity.detuning;
    rel * rel * half_sq / (half_sq + 4.0 * wm_sq)
}

/// Extra phonons from a relative coupling-ratio offset δ:
/// n_g = (n_diss/2)·(δ·3ω_M/γ)².
pub fn n_ratio_error(params: &SystemParams, delta_rel: f64) -> f64 {
    let x = delta_rel * 3.0 * params.omega_m_eff() / params.cavity.gamma;
    0.5 * n_diss_optimal_ratio(params) * x * x
}

/// Multimode contribution at the optimized settings:
/// n_L = (3π/2 · ω_M/ω_FSR)²·(γ/2)²/[(γ/2)² + 4ω_M²].
pub fn n_multimode(params: &SystemParams) -> f64 {
    let half_sq = (0.5 * params.cavity.gamma).powi(2);
    let wm = params.omega_m_eff();
    let x = 1.5 * std::f64::consts::PI * wm / params.cavity.fsr;
    x * x * half_sq / (half_sq + 4.0 * wm * wm)
}

/// Brute-force occupation oracle: integrates
/// S_bb(ω) = |χ(−ω)|²·[γ_m·n_th + S_FF(ω)] over ω/2π, resolving both the
/// γ_M-wide mechanical peak at ω = −ω_M and the γ-wide cavity
/// background. The breakdown fields carry the per-component integrals.
pub fn n_quadrature(
    params: &SystemParams,
    kind: SpectrumKind,
    cfg: &QuadratureConfig,
) -> Result<CoolingResult> {
    params.validate()?;
    cfg.validate()?;
    let gamma = params.cavity.gamma;
    let omega_m = params.omega_m_eff();
    let delta = params.cavity.detuning;
    let gamma_m_eff = spectra::gamma_m_eff(params, kind)?;
    if gamma_m_eff <= 0.0 {
        return Err(Error::Instability { gamma_m_eff });
    }
    let w_h = spectra::omega_h(params)?;

    let extent = delta.abs() + omega_m + cfg.tail_extent * gamma;
    let window = cfg.peak_window_halfwidth * gamma_m_eff;
    let mut interior = vec![-omega_m, 0.0, omega_m, -w_h, -delta];
    // Geometric ladder out from the mechanical peak: dense through the
    // peak window, then doubling until it leaves the domain.
    let mut step = gamma_m_eff;
    while step < extent + omega_m {
        interior.push(-omega_m - step);
        interior.push(-omega_m + step);
        step *= 2.0;
    }
    interior.push(-omega_m - window);
    interior.push(-omega_m + window);
    for m in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        interior.push(-delta - m * gamma);
        interior.push(-delta + m * gamma);
    }
    let bps = quad::breakpoints(-extent, extent, interior);

    let chi_sq = move |w: f64| 1.0 / ((0.5 * gamma_m_eff).powi(2) + (w + omega_m).powi(2));
    let two_pi = 2.0 * std::f64::consts::PI;

    let run = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let out = quad::integrate(f, &bps, cfg.rel_tol, cfg.max_subdivisions)?;
        Ok(out.value / two_pi)
    };

    let thermal_weight = params.mech.gamma_m * params.mech.n_th;
    let n_thermal_residual = run(&|w| thermal_weight * chi_sq(w))?;
    let n_backaction = if params.u() > 0.0 {
        run(&|w| {
            spectra::s_ff_components(w, params, SpectrumKind::Ideal)
                .expect("validated params")
                .ideal
                * chi_sq(w)
        })?
    } else {
        0.0
    };
    let n_int = if kind.includes_internal_loss() && params.cavity.gamma_int > 0.0 {
        run(&|w| {
            spectra::s_ff_components(w, params, kind)
                .expect("validated params")
                .internal_loss
                * chi_sq(w)
        })?
    } else {
        0.0
    };
    let n_l = if kind.includes_multimode() && params.cavity.fsr.is_finite() {
        run(&|w| {
            spectra::s_ff_components(w, params, kind)
                .expect("validated params")
                .multimode
                * chi_sq(w)
        })?
    } else {
        0.0
    };

    let (weak_coupling_ok, underdamped_ok) = validity_flags(params, gamma_m_eff);
    Ok(CoolingResult {
        n_total: n_thermal_residual + n_backaction + n_int + n_l,
        n_thermal_residual,
        n_backaction,
        n_int,
        n_delta: 0.0,
        n_g: 0.0,
        n_l,
        gamma_m_eff,
        method: Method::Quadrature,
        weak_coupling_ok,
        underdamped_ok,
    })
}
