//! Michelson–Sagnac interferometer: effective-mirror reduction to a
//! one-sided cavity, derived coupling constants, and the exact
//! backaction force spectrum.
//!
//! The beam-splitter/membrane subassembly acts as an input mirror whose
//! reflection amplitude ρ (complex) and transmission τ depend on the
//! membrane displacement x; the rest of the interferometer is a fixed
//! cavity of length L = L_a + l + l_s.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::CouplingParams;

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Transmissions below this are a closed port: the effective decay rate
/// τ²c/2L is then smaller than any physical rate and the one-sided-
/// cavity mapping has no input channel to normalize against.
const DARK_PORT_TAU: f64 = 1e-12;

/// Interferometer geometry. All amplitudes are real, positive scattering
/// coefficients; lengths are in meters.
#[derive(Debug, Clone)]
pub struct MsiGeometry {
    /// Beam-splitter transmission amplitude T.
    pub bs_t: f64,
    /// Beam-splitter reflection amplitude R.
    pub bs_r: f64,
    /// Membrane transmission amplitude t.
    pub mem_t: f64,
    /// Membrane reflection amplitude r.
    pub mem_r: f64,
    /// Beam-splitter to folding-mirror distance L_a.
    pub l_a: f64,
    /// Half the folding-mirror separation l.
    pub l: f64,
    /// End-mirror to beam-splitter distance l_s.
    pub l_s: f64,
    /// Membrane displacement from the symmetric position (signed).
    pub x: f64,
}

impl MsiGeometry {
    /// Effective cavity length L = L_a + l + l_s.
    pub fn total_length(&self) -> f64 {
        self.l_a + self.l + self.l_s
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("msi.bs_t", self.bs_t),
            ("msi.bs_r", self.bs_r),
            ("msi.mem_t", self.mem_t),
            ("msi.mem_r", self.mem_r),
        ] {
            if v.is_nan() || v <= 0.0 || v >= 1.0 {
                return Err(Error::InvalidParam(format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        let bs = self.bs_t * self.bs_t + self.bs_r * self.bs_r;
        if (bs - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "beam splitter amplitudes must satisfy T² + R² = 1 (got {bs})"
            )));
        }
        let mem = self.mem_t * self.mem_t + self.mem_r * self.mem_r;
        if (mem - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "membrane amplitudes must satisfy t² + r² = 1 (got {mem})"
            )));
        }
        for (name, v) in [("msi.l_a", self.l_a), ("msi.l", self.l), ("msi.l_s", self.l_s)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam(format!("{name} = {v} must be positive")));
            }
        }
        if !self.x.is_finite() {
            return Err(Error::InvalidParam(format!(
                "msi.x = {} must be finite",
                self.x
            )));
        }
        Ok(())
    }
}

/// The beam-splitter/membrane subassembly seen as one mirror.
#[derive(Debug, Clone)]
pub struct EffectiveMirror {
    /// Complex reflection amplitude ρ = |ρ|·e^{iμ}.
    pub rho: Complex64,
    /// Real transmission amplitude τ (sign-carrying).
    pub tau: f64,
    /// Reflection phase μ = arg ρ.
    pub mu: f64,
}

/// Monochromatic drive for the exact interferometer spectrum.
#[derive(Debug, Clone)]
pub struct MsiDrive {
    /// Drive frequency ω_L (rad/s).
    pub omega_l: f64,
    /// In-cavity photon number |a0|².
    pub photon_number: f64,
}

/// Effective mirror amplitudes for a wave of wavenumber k:
/// ρ = −2RTt − (R²−T²)·r·cos2kx + i·r·sin2kx,
/// τ = t(T²−R²) + 2RTr·cos2kx.
pub fn effective_mirror(geom: &MsiGeometry, k: f64) -> Result<EffectiveMirror> {
    geom.validate()?;
    let (t_bs, r_bs, t_m, r_m) = (geom.bs_t, geom.bs_r, geom.mem_t, geom.mem_r);
    let (c2, s2) = {
        let phase = 2.0 * k * geom.x;
        (phase.cos(), phase.sin())
    };
    let bs_asym = r_bs * r_bs - t_bs * t_bs; // R² − T²
    let rho = Complex64::new(
        -2.0 * r_bs * t_bs * t_m - bs_asym * r_m * c2,
        r_m * s2,
    );
    let tau = t_m * (-bs_asym) + 2.0 * r_bs * t_bs * r_m * c2;
    Ok(EffectiveMirror {
        rho,
        tau,
        mu: rho.arg(),
    })
}

/// Maps the interferometer to one-sided-cavity parameters:
/// γ = τ²c/(2L), ω_c = (c/2L)(2πN − μ) with N chosen nearest the drive
/// (ties toward the lower resonance), ω_FSR = πc/L.
pub fn cavity_from_msi(geom: &MsiGeometry, k: f64) -> Result<(f64, f64, f64)> {
    let m = effective_mirror(geom, k)?;
    if m.tau.abs() < DARK_PORT_TAU {
        return Err(Error::DarkPort);
    }
    let length = geom.total_length();
    let gamma = m.tau * m.tau * SPEED_OF_LIGHT / (2.0 * length);
    let fsr = std::f64::consts::PI * SPEED_OF_LIGHT / length;

    // ω_c(N) = (c/2L)(2πN − μ); pick N with ω_c nearest ω_L = ck.
    let two_pi = 2.0 * std::f64::consts::PI;
    let target = (2.0 * length * k + m.mu) / two_pi;
    let lower = target.floor();
    let n_index = if target - lower > 0.5 { lower + 1.0 } else { lower };
    let omega_c = SPEED_OF_LIGHT / (2.0 * length) * (two_pi * n_index - m.mu);
    Ok((gamma, omega_c, fsr))
}

/// Displacement derivatives of the effective mirror:
/// dτ/dx = −4krRT·sin2kx,
/// dμ/dx = −2kr·[2tRT·cos2kx − r(T²−R²)] / |ρ|².
///
/// The |ρ|² divisor is the quotient-rule normalization of arg ρ; it is
/// required for dμ/dx to be the actual derivative of μ(x) (and keeps
/// g_ω consistent with the exact spectrum reduction).
pub fn mirror_derivatives(geom: &MsiGeometry, k: f64) -> Result<(f64, f64)> {
    let m = effective_mirror(geom, k)?;
    let (t_bs, r_bs, t_m, r_m) = (geom.bs_t, geom.bs_r, geom.mem_t, geom.mem_r);
    let phase = 2.0 * k * geom.x;
    let (c2, s2) = (phase.cos(), phase.sin());
    let dtau_dx = -4.0 * k * r_m * r_bs * t_bs * s2;
    let dmu_dx = -2.0 * k * r_m
        * (2.0 * t_m * r_bs * t_bs * c2 - r_m * (t_bs * t_bs - r_bs * r_bs))
        / m.rho.norm_sqr();
    Ok((dmu_dx, dtau_dx))
}

/// Coupling constants of the equivalent one-sided cavity:
/// g_ω = (dμ/dx)·(c/2L)·x_zpf, g_γ = −τ·(dτ/dx)·(c/2L)·x_zpf.
pub fn couplings_from_msi(geom: &MsiGeometry, k: f64, x_zpf: f64) -> Result<CouplingParams> {
    let m = effective_mirror(geom, k)?;
    if m.tau.abs() < DARK_PORT_TAU {
        return Err(Error::DarkPort);
    }
    let (dmu_dx, dtau_dx) = mirror_derivatives(geom, k)?;
    let scale = SPEED_OF_LIGHT / (2.0 * geom.total_length()) * x_zpf;
    Ok(CouplingParams {
        g_omega: dmu_dx * scale,
        g_gamma: -m.tau * dtau_dx * scale,
    })
}

/// Exact backaction force spectrum of the interferometer, normalized as
/// a rate like `spectra::s_ff` (pre-multiplied by (x_zpf/ħ)²):
///
///   S(ω) = (ω_L·|a0|·x_zpf/L)²·(r²/γ)·|N(ω)|² / |1 − |ρ|·e^{iφ(ω)}|²,
///   N(ω) = α₁(1 + e^{2iLω/c}) + α₂·e^{2i(ω_L+ω)L/c} + α₂*·e^{−2iLω_L/c},
///   φ(ω) = 2(ω_L+ω)L/c + μ,
///
/// with α₁ = 2tRT·cos2kx − r(T²−R²) and α₂ = cos2kx + i(T²−R²)·sin2kx
/// evaluated at the carrier k = ω_L/c. The |ρ| in the round-trip factor
/// carries the input-coupling loss that gives the cavity its linewidth;
/// the denominator vanishes only for a lossless mirror exactly on
/// resonance.
pub fn s_ff_exact_msi(
    omega: f64,
    geom: &MsiGeometry,
    drive: &MsiDrive,
    x_zpf: f64,
) -> Result<f64> {
    geom.validate()?;
    if drive.omega_l.is_nan()
        || drive.omega_l <= 0.0
        || drive.photon_number.is_nan()
        || drive.photon_number < 0.0
    {
        return Err(Error::InvalidParam(
            "msi drive requires omega_l > 0 and photon_number >= 0".into(),
        ));
    }
    let k = drive.omega_l / SPEED_OF_LIGHT;
    let m = effective_mirror(geom, k)?;
    let length = geom.total_length();
    let (t_bs, r_bs, t_m, r_m) = (geom.bs_t, geom.bs_r, geom.mem_t, geom.mem_r);
    let phase_x = 2.0 * k * geom.x;
    let (c2, s2) = (phase_x.cos(), phase_x.sin());
    let bs_asym = t_bs * t_bs - r_bs * r_bs; // T² − R²

    let alpha1 = 2.0 * t_m * r_bs * t_bs * c2 - r_m * bs_asym;
    let alpha2 = Complex64::new(c2, bs_asym * s2);

    let lw_over_c = length * omega / SPEED_OF_LIGHT;
    let ll_over_c = length * drive.omega_l / SPEED_OF_LIGHT;
    let n_omega = alpha1 * (1.0 + Complex64::new(0.0, 2.0 * lw_over_c).exp())
        + alpha2 * Complex64::new(0.0, 2.0 * (ll_over_c + lw_over_c)).exp()
        + alpha2.conj() * Complex64::new(0.0, -2.0 * ll_over_c).exp();

    let round_trip_phase = 2.0 * (ll_over_c + lw_over_c) + m.mu;
    let denom = Complex64::new(1.0, 0.0)
        - m.rho.norm() * Complex64::new(0.0, round_trip_phase).exp();
    let denom_sq = denom.norm_sqr();
    if denom_sq == 0.0 {
        return Err(Error::ResonanceSingularity);
    }
    if m.tau.abs() < DARK_PORT_TAU {
        return Err(Error::DarkPort);
    }
    let gamma = m.tau * m.tau * SPEED_OF_LIGHT / (2.0 * length);
    let amp = drive.omega_l * drive.photon_number.sqrt() * x_zpf / length;
    Ok(amp * amp * r_m * r_m / gamma * n_omega.norm_sqr() / denom_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CavityParams, DriveParams, MechParams, SpectrumKind, SystemParams};
    use crate::spectra;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn geometry(bs_t: f64, mem_r: f64, x: f64) -> MsiGeometry {
        MsiGeometry {
            bs_t,
            bs_r: (1.0 - bs_t * bs_t).sqrt(),
            mem_t: (1.0 - mem_r * mem_r).sqrt(),
            mem_r,
            l_a: 0.4,
            l: 0.35,
            l_s: 0.25,
            x,
        }
    }

    fn random_geometry(rng: &mut StdRng, k: f64) -> MsiGeometry {
        let bs_t = rng.gen_range(0.2..0.98);
        let mem_r = rng.gen_range(0.05..0.95);
        let x = rng.gen_range(-1.0..1.0) * PI / k;
        geometry(bs_t, mem_r, x)
    }

    #[test]
    fn balanced_splitter_at_center() {
        // R = T = 1/√2, x = 0: ρ = −t, τ = r.
        let g = geometry(FRAC_1_SQRT_2, 0.45, 0.0);
        let m = effective_mirror(&g, 5.9e6).unwrap();
        assert!((m.rho.re + g.mem_t).abs() < 1e-15);
        assert!(m.rho.im.abs() < 1e-15);
        assert!((m.tau - g.mem_r).abs() < 1e-15);
        // γ = r²c/(2L) at this point.
        let (gamma, _, fsr) = cavity_from_msi(&g, 5.9e6).unwrap();
        let expect = g.mem_r * g.mem_r * SPEED_OF_LIGHT / (2.0 * g.total_length());
        assert!((gamma - expect).abs() / expect < 1e-14);
        // FSR spacing: ω_FSR·(2L/c) = 2π.
        assert!((fsr * 2.0 * g.total_length() / SPEED_OF_LIGHT - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn transparent_membrane() {
        let mut g = geometry(0.8, 0.3, 1e-7);
        g.mem_r = 1e-5; // effectively transparent
        g.mem_t = (1.0 - g.mem_r * g.mem_r).sqrt();
        let k = 5.9e6;
        let m = effective_mirror(&g, k).unwrap();
        let expect_rho = -2.0 * g.bs_r * g.bs_t * g.mem_t;
        let expect_tau = g.mem_t * (g.bs_t * g.bs_t - g.bs_r * g.bs_r);
        assert!((m.rho.re - expect_rho).abs() < 2e-5);
        assert!(m.rho.im.abs() < 2e-5);
        assert!((m.tau - expect_tau).abs() < 2e-5);
    }

    #[test]
    fn unitarity_over_draws() {
        let k = 5.906e6;
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..10_000 {
            let g = random_geometry(&mut rng, k);
            let m = effective_mirror(&g, k).unwrap();
            let unity = m.rho.norm_sqr() + m.tau * m.tau;
            assert!(
                (unity - 1.0).abs() < 1e-12,
                "|rho|²+tau² = {unity} departs from 1"
            );
        }
    }

    fn fd_mirror_derivatives(g: &MsiGeometry, k: f64, h: f64) -> (f64, f64) {
        let mut plus = g.clone();
        plus.x += h;
        let mut minus = g.clone();
        minus.x -= h;
        let mp = effective_mirror(&plus, k).unwrap();
        let mm = effective_mirror(&minus, k).unwrap();
        let fd_tau = (mp.tau - mm.tau) / (2.0 * h);
        let mut dmu_num = mp.mu - mm.mu;
        if dmu_num > PI {
            dmu_num -= 2.0 * PI;
        } else if dmu_num < -PI {
            dmu_num += 2.0 * PI;
        }
        (dmu_num / (2.0 * h), fd_tau)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = 5.906e6;
        // The step trades truncation against rounding noise; 1e-5/k
        // keeps both near 1e-8 relative.
        let h = 1e-5 / k;
        let mut rng = StdRng::seed_from_u64(43);
        let mut accepted = 0;
        while accepted < 300 {
            let g = random_geometry(&mut rng, k);
            let m = effective_mirror(&g, k).unwrap();
            if m.rho.norm() < 0.05 {
                continue;
            }
            let (dmu, dtau) = mirror_derivatives(&g, k).unwrap();
            // Keep the relative comparison meaningful.
            if dmu.abs() < 1e-3 * k * g.mem_r || dtau.abs() < 1e-3 * k * g.mem_r {
                continue;
            }
            let (fd_mu, fd_tau) = fd_mirror_derivatives(&g, k, h);
            assert!((fd_tau - dtau).abs() / dtau.abs() < 1e-6);
            assert!(
                (fd_mu - dmu).abs() / dmu.abs() < 1e-6,
                "fd {fd_mu} vs analytic {dmu}"
            );
            accepted += 1;
        }
    }

    #[test]
    fn derivatives_survive_the_tiny_reference_step() {
        // At h = 1e-9/k the centered difference sits just above the f64
        // noise floor, so the 1e-6 agreement only holds where the
        // derivatives are near their maximal k·r scale.
        let k = 5.906e6;
        let h = 1e-9 / k;
        let g = geometry(0.5, 0.9, 0.25 * PI / k);
        let (dmu, dtau) = mirror_derivatives(&g, k).unwrap();
        assert!(dmu.abs() > 0.5 * k * g.mem_r && dtau.abs() > 0.5 * k * g.mem_r);
        let (fd_mu, fd_tau) = fd_mirror_derivatives(&g, k, h);
        assert!((fd_tau - dtau).abs() / dtau.abs() < 1e-6);
        assert!((fd_mu - dmu).abs() / dmu.abs() < 1e-6);
    }

    #[test]
    fn balanced_center_is_purely_dispersive() {
        // Balanced BS, x = 0: g_γ = 0 and g_ω = −(2kr/t)·(c/2L)·x_zpf,
        // with the 1/t from the |ρ|² = t² normalization of dμ/dx.
        let g = geometry(FRAC_1_SQRT_2, 0.45, 0.0);
        let k = 5.906e6;
        let x_zpf = 1e-15;
        let c = couplings_from_msi(&g, k, x_zpf).unwrap();
        assert_eq!(c.g_gamma, 0.0);
        let expect =
            -2.0 * k * g.mem_r / g.mem_t * SPEED_OF_LIGHT / (2.0 * g.total_length()) * x_zpf;
        assert!((c.g_omega - expect).abs() / expect.abs() < 1e-12);
    }

    #[test]
    fn quarter_wave_point_is_dark_port_with_extremal_tau_slope() {
        // Balanced BS, 2kx = π/2: dμ/dx = 0 and dτ/dx = −2kr, but τ = 0
        // there, so the port is dark and the mapping refuses it.
        let k = 5.906e6;
        let g = geometry(FRAC_1_SQRT_2, 0.45, PI / (4.0 * k));
        let (dmu, dtau) = mirror_derivatives(&g, k).unwrap();
        assert!(dmu.abs() < 1e-9 * k);
        let expect = -2.0 * k * g.mem_r;
        assert!((dtau - expect).abs() / expect.abs() < 1e-9);
        let m = effective_mirror(&g, k).unwrap();
        // τ crosses zero here to within fp resolution of the
        // quarter-wave point, and the mapping must refuse the port.
        assert!(m.tau.abs() < 1e-15);
        assert!(matches!(
            couplings_from_msi(&g, k, 1e-15),
            Err(Error::DarkPort)
        ));
        assert!(matches!(cavity_from_msi(&g, k), Err(Error::DarkPort)));
    }

    #[test]
    fn coupling_ratio_reaches_any_target() {
        // g_ω/g_γ sweeps through (−∞, ∞) as x varies: root-find x for a
        // set of requested ratios.
        let k = 5.906e6;
        let x_zpf = 1e-15;
        let ratio_at = |x: f64| -> Option<f64> {
            let mut g = geometry(0.75, 0.5, 0.0);
            g.x = x;
            let c = couplings_from_msi(&g, k, x_zpf).ok()?;
            if c.g_gamma == 0.0 {
                return None;
            }
            Some(c.g_omega / c.g_gamma)
        };
        for target in [-5.0, -1.0, -0.1, 0.3, 2.0, 10.0] {
            let f = |x: f64| ratio_at(x).map(|r| r - target);
            // Scan a half period for a sign change, then bisect.
            let period = PI / k;
            let n = 4000;
            let mut bracket = None;
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..=n {
                let x = -0.5 * period + i as f64 * period / n as f64;
                if let Some(v) = f(x) {
                    if let Some((px, pv)) = prev {
                        if pv.signum() != v.signum() && pv.abs() < 1e3 && v.abs() < 1e3 {
                            bracket = Some((px, x));
                            break;
                        }
                    }
                    prev = Some((x, v));
                }
            }
            let (mut lo, mut hi) = bracket.expect("ratio target bracketed");
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid).unwrap_or(f64::INFINITY);
                let fl = f(lo).unwrap_or(f64::INFINITY);
                if fl.signum() == fm.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let found = ratio_at(0.5 * (lo + hi)).unwrap();
            assert!(
                (found - target).abs() <= 1e-6 * target.abs().max(1.0),
                "target {target}, found {found}"
            );
        }
    }

    #[test]
    fn scattering_phase_identity_holds() {
        // e^{−iμ}·α₂ must equal −α₁/|ρ| + i·(−2RT·sin2kx·τ)/|ρ|; this
        // ties the spectrum coefficients α₁, α₂ to the effective-mirror
        // amplitudes and pins all sign conventions at once.
        let k = 5.906e6;
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..500 {
            let g = random_geometry(&mut rng, k);
            let m = effective_mirror(&g, k).unwrap();
            if m.rho.norm() < 0.05 {
                continue;
            }
            let phase = 2.0 * k * g.x;
            let (c2, s2) = (phase.cos(), phase.sin());
            let bs_asym = g.bs_t * g.bs_t - g.bs_r * g.bs_r;
            let alpha1 = 2.0 * g.mem_t * g.bs_r * g.bs_t * c2 - g.mem_r * bs_asym;
            let alpha2 = Complex64::new(c2, bs_asym * s2);
            let rotated = Complex64::from_polar(1.0, -m.mu) * alpha2;
            let expect = Complex64::new(
                -alpha1,
                -2.0 * g.bs_r * g.bs_t * s2 * m.tau,
            ) / m.rho.norm();
            assert!(
                (rotated - expect).norm() < 1e-12,
                "rotated {rotated} vs {expect}"
            );
        }
    }

    /// Small-τ geometry with mixed couplings, drive detuned by ~0.2γ.
    fn reduction_setup() -> (MsiGeometry, MsiDrive, f64) {
        let k0 = 2.0 * PI / 1.064e-6; // 1064 nm carrier
        let eta: f64 = 0.02;
        let bs_t = (0.5 + eta).sqrt();
        let phi = 0.035;
        let g = geometry(bs_t, 0.45, (PI / 2.0 + phi) / (2.0 * k0));

        // Tune the drive onto a resonance, then detune by 0.2γ.
        let mut k = k0;
        for _ in 0..4 {
            let (_, omega_c, _) = cavity_from_msi(&g, k).unwrap();
            k = omega_c / SPEED_OF_LIGHT;
        }
        let (gamma, _, _) = cavity_from_msi(&g, k).unwrap();
        let omega_l = k * SPEED_OF_LIGHT + 0.2 * gamma;
        (
            g,
            MsiDrive {
                omega_l,
                photon_number: 1e6,
            },
            1e-15,
        )
    }

    fn mapped_params(geom: &MsiGeometry, drive: &MsiDrive, x_zpf: f64) -> SystemParams {
        let k = drive.omega_l / SPEED_OF_LIGHT;
        let (gamma, omega_c, fsr) = cavity_from_msi(geom, k).unwrap();
        let coupling = couplings_from_msi(geom, k, x_zpf).unwrap();
        SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: 0.0,
                detuning: drive.omega_l - omega_c,
                fsr,
            },
            MechParams {
                omega_m: 1.0,
                gamma_m: 1e-3,
                n_th: 0.0,
            },
            coupling,
            DriveParams {
                photon_number: drive.photon_number,
            },
        )
    }

    #[test]
    fn reduction_setup_is_in_the_small_parameter_regime() {
        let (g, drive, x_zpf) = reduction_setup();
        let p = mapped_params(&g, &drive, x_zpf);
        let k = drive.omega_l / SPEED_OF_LIGHT;
        let m = effective_mirror(&g, k).unwrap();
        assert!(m.tau * m.tau <= 1e-3, "tau² = {}", m.tau * m.tau);
        // The interference null sits outside the sampled band |ω| ≤ γ.
        let w_h = spectra::omega_h(&p).unwrap();
        assert!(w_h.abs() > 2.0 * p.cavity.gamma);
    }

    #[test]
    fn exact_spectrum_matches_reduced_form_in_band() {
        let (g, drive, x_zpf) = reduction_setup();
        let p = mapped_params(&g, &drive, x_zpf);
        let gamma = p.cavity.gamma;
        let length = g.total_length();
        let tau_sq = effective_mirror(&g, drive.omega_l / SPEED_OF_LIGHT)
            .unwrap()
            .tau
            .powi(2);
        for i in -20..=20 {
            let w = i as f64 / 20.0 * gamma;
            let exact = s_ff_exact_msi(w, &g, &drive, x_zpf).unwrap();
            let reduced = spectra::s_ff(w, &p, SpectrumKind::Multimode).unwrap();
            let bound = 10.0 * (tau_sq + w.abs() * length / SPEED_OF_LIGHT);
            let rel = (exact - reduced).abs() / reduced;
            assert!(rel <= bound, "omega {w:e}: rel {rel:e} > bound {bound:e}");
        }
    }

    #[test]
    fn exact_spectrum_reduces_to_bracket_identity() {
        // N(ω) against C·[g_ω(1+iLω/c) + g_γ(2Δ+ω)/γ] with
        // C = (2L/c)²·(cγ/(2ω_L·r))/x_zpf, to first order in the small
        // parameters.
        let (g, drive, x_zpf) = reduction_setup();
        let p = mapped_params(&g, &drive, x_zpf);
        let length = g.total_length();
        let gamma = p.cavity.gamma;

        let w = 0.4 * gamma;
        let exact = s_ff_exact_msi(w, &g, &drive, x_zpf).unwrap();
        let c_n = (2.0 * length / SPEED_OF_LIGHT).powi(2)
            * (SPEED_OF_LIGHT * gamma / (2.0 * drive.omega_l * g.mem_r))
            / x_zpf;
        let bracket = Complex64::new(
            p.coupling.g_omega
                + p.coupling.g_gamma * (2.0 * p.cavity.detuning + w) / gamma,
            p.coupling.g_omega * length * w / SPEED_OF_LIGHT,
        );
        let n_reduced = c_n * bracket.norm();
        let denom_sq = {
            let half = 0.5 * gamma;
            (2.0 * length / SPEED_OF_LIGHT).powi(2)
                * (half * half + (w + p.cavity.detuning).powi(2))
        };
        let amp = drive.omega_l * drive.photon_number.sqrt() * x_zpf / length;
        let reduced = amp * amp * g.mem_r * g.mem_r / gamma * n_reduced * n_reduced / denom_sq;
        assert!((exact - reduced).abs() / reduced < 0.05);
    }

    #[test]
    fn exact_spectrum_is_periodic_in_the_free_spectral_range() {
        let (g, drive, x_zpf) = reduction_setup();
        let fsr = PI * SPEED_OF_LIGHT / g.total_length();
        for w in [0.3e5, 2.1e5, -4.0e4] {
            let a = s_ff_exact_msi(w, &g, &drive, x_zpf).unwrap();
            let b = s_ff_exact_msi(w + fsr, &g, &drive, x_zpf).unwrap();
            assert!((a - b).abs() / a < 1e-4);
        }
    }

    #[test]
    fn exact_spectrum_refuses_a_dark_port() {
        let k0 = 2.0 * PI / 1.064e-6;
        let g = geometry(FRAC_1_SQRT_2, 0.45, PI / (4.0 * k0));
        let drive = MsiDrive {
            omega_l: k0 * SPEED_OF_LIGHT,
            photon_number: 1.0,
        };
        assert!(matches!(
            s_ff_exact_msi(1e4, &g, &drive, 1e-15),
            Err(Error::DarkPort)
        ));
    }
}
