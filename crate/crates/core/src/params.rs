//! System parameters: cavity, mechanics, couplings and drive.
//!
//! All frequencies and rates are angular (rad/s). Every quantity here is
//! a plain `f64`; validation is explicit via [`SystemParams::validate`].

use crate::error::{Error, Result};

/// Optical cavity parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    /// External (detection-port) decay rate γ > 0.
    pub gamma: f64,
    /// Internal decay rate γ_int ≥ 0 (loss not reaching the detector).
    pub gamma_int: f64,
    /// Detuning Δ = ω_L − ω_c of the drive from the cavity resonance.
    pub detuning: f64,
    /// Free spectral range ω_FSR > 0; `f64::INFINITY` selects the
    /// single-mode limit.
    pub fsr: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "cavity.gamma = {} must be a finite positive rate",
                self.gamma
            )));
        }
        if !self.gamma_int.is_finite() || self.gamma_int < 0.0 {
            return Err(Error::InvalidParam(format!(
                "cavity.gamma_int = {} must be finite and >= 0",
                self.gamma_int
            )));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParam(format!(
                "cavity.detuning = {} must be finite",
                self.detuning
            )));
        }
        if self.fsr.is_nan() || self.fsr <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "cavity.fsr = {} must be positive (or infinite)",
                self.fsr
            )));
        }
        Ok(())
    }
}

/// Mechanical oscillator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MechParams {
    /// Bare mechanical resonance frequency ω_m > 0.
    pub omega_m: f64,
    /// Intrinsic mechanical decay rate γ_m > 0.
    pub gamma_m: f64,
    /// Thermal phonon occupation n_th ≥ 0.
    pub n_th: f64,
}

impl MechParams {
    /// Quality factor Q = ω_m/γ_m of the decoupled oscillator.
    pub fn quality(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega_m.is_finite() || self.omega_m <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "mech.omega_m = {} must be a finite positive frequency",
                self.omega_m
            )));
        }
        if !self.gamma_m.is_finite() || self.gamma_m <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "mech.gamma_m = {} must be a finite positive rate",
                self.gamma_m
            )));
        }
        if !self.n_th.is_finite() || self.n_th < 0.0 {
            return Err(Error::InvalidParam(format!(
                "mech.n_th = {} must be finite and >= 0",
                self.n_th
            )));
        }
        Ok(())
    }
}

/// Optomechanical coupling constants. Both carry a sign; only the
/// combination γ·g_ω/g_γ enters the spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams {
    /// Dispersive coupling g_ω (displacement shifts the resonance).
    pub g_omega: f64,
    /// Dissipative coupling g_γ (displacement modulates the decay rate).
    pub g_gamma: f64,
}

impl CouplingParams {
    pub fn validate(&self) -> Result<()> {
        if !self.g_omega.is_finite() || !self.g_gamma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "coupling constants ({}, {}) must be finite",
                self.g_omega, self.g_gamma
            )));
        }
        Ok(())
    }
}

/// Drive strength, stored as the in-cavity photon number |a0|².
#[derive(Debug, Clone, PartialEq)]
pub struct DriveParams {
    /// Mean in-cavity photon number |a0|² ≥ 0.
    pub photon_number: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !self.photon_number.is_finite() || self.photon_number < 0.0 {
            return Err(Error::InvalidParam(format!(
                "drive.photon_number = {} must be finite and >= 0",
                self.photon_number
            )));
        }
        Ok(())
    }
}

/// Which contributions the force spectrum includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Single-mode, lossless cavity.
    Ideal,
    /// Adds the internal-loss vacuum-noise contribution.
    WithInternalLoss,
    /// Adds the finite free-spectral-range correction.
    Multimode,
    /// Both corrections.
    MultimodeWithInternalLoss,
}

impl SpectrumKind {
    pub fn includes_internal_loss(self) -> bool {
        matches!(
            self,
            SpectrumKind::WithInternalLoss | SpectrumKind::MultimodeWithInternalLoss
        )
    }

    pub fn includes_multimode(self) -> bool {
        matches!(
            self,
            SpectrumKind::Multimode | SpectrumKind::MultimodeWithInternalLoss
        )
    }
}

/// Complete description of one operating configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub cavity: CavityParams,
    pub mech: MechParams,
    pub coupling: CouplingParams,
    pub drive: DriveParams,
    /// Optional override for the renormalized mechanical frequency ω_M.
    /// Defaults to the bare ω_m (optical spring shift neglected).
    pub omega_m_override: Option<f64>,
    /// When set, the internal loss also broadens every cavity Lorentzian
    /// (γ → γ + γ_int in the spectral denominators). Off by default: the
    /// spectra then treat γ_int only as an extra noise port.
    pub strict_loss: bool,
}

impl SystemParams {
    pub fn new(
        cavity: CavityParams,
        mech: MechParams,
        coupling: CouplingParams,
        drive: DriveParams,
    ) -> Self {
        SystemParams {
            cavity,
            mech,
            coupling,
            drive,
            omega_m_override: None,
            strict_loss: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        self.mech.validate()?;
        self.coupling.validate()?;
        self.drive.validate()?;
        if let Some(w) = self.omega_m_override {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "omega_m_override = {w} must be a finite positive frequency"
                )));
            }
        }
        Ok(())
    }

    /// Renormalized mechanical frequency ω_M (the bare ω_m unless
    /// overridden).
    pub fn omega_m_eff(&self) -> f64 {
        self.omega_m_override.unwrap_or(self.mech.omega_m)
    }

    /// Dimensionless drive strength U = |a0|²·(g_γ/γ)².
    pub fn u(&self) -> f64 {
        let r = self.coupling.g_gamma / self.cavity.gamma;
        self.drive.photon_number * r * r
    }

    /// Sets the photon number so that `u()` equals the requested U.
    pub fn set_u(&mut self, u: f64) -> Result<()> {
        if self.coupling.g_gamma == 0.0 {
            return Err(Error::DegenerateCoupling);
        }
        let r = self.cavity.gamma / self.coupling.g_gamma;
        self.drive.photon_number = u * r * r;
        Ok(())
    }

    /// The coupling ratio γ·g_ω/g_γ. Requires g_γ ≠ 0.
    pub fn coupling_ratio(&self) -> Result<f64> {
        if self.coupling.g_gamma == 0.0 {
            return Err(Error::DegenerateCoupling);
        }
        Ok(self.cavity.gamma * self.coupling.g_omega / self.coupling.g_gamma)
    }

    /// Detuning satisfying the interference (Fano) condition
    /// Δ = (ω_M − γ·g_ω/g_γ)/2, at which the ideal force spectrum
    /// vanishes at ω = −ω_M.
    pub fn fano_detuning(&self) -> Result<f64> {
        Ok(0.5 * (self.omega_m_eff() - self.coupling_ratio()?))
    }

    /// Cavity linewidth entering the spectral Lorentzians: γ, or
    /// γ + γ_int in strict-loss mode.
    pub(crate) fn gamma_line(&self) -> f64 {
        if self.strict_loss {
            self.cavity.gamma + self.cavity.gamma_int
        } else {
            self.cavity.gamma
        }
    }
}
