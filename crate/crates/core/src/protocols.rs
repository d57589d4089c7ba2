//! Side-by-side comparison of the dissipative-assisted, dispersive
//! sideband, and feedback cooling protocols, including the photon
//! budget each needs.

use crate::cooling::{dispersive_floor, n_diss_optimal_ratio};
use crate::error::{Error, Result};
use crate::params::{MechParams, SystemParams};

/// Feedback-cooling inputs.
#[derive(Debug, Clone)]
pub struct FeedbackParams {
    /// Detector efficiency η ∈ (0, 1].
    pub eta_det: f64,
    /// Imperfection noise quanta; when absent it is computed from the
    /// drive and dispersive coupling as γγ_m/(64·|a0|²·g_ω²).
    pub n_imp: Option<f64>,
}

impl FeedbackParams {
    pub fn validate(&self) -> Result<()> {
        if self.eta_det.is_nan() || self.eta_det <= 0.0 || self.eta_det > 1.0 {
            return Err(Error::InvalidParam(format!(
                "feedback.eta_det = {} must lie in (0, 1]",
                self.eta_det
            )));
        }
        if let Some(n) = self.n_imp {
            if !n.is_finite() || n < 0.0 {
                return Err(Error::InvalidParam(format!(
                    "feedback.n_imp = {n} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// One protocol's limit and the photon number needed to reach it.
#[derive(Debug, Clone)]
pub struct ProtocolEntry {
    pub name: &'static str,
    /// Phonon occupation the protocol can reach.
    pub n_limit: f64,
    /// In-cavity photon number at that point, when defined.
    pub photon_number: Option<f64>,
    pub note: String,
}

/// Comparison across protocols plus the thresholds that decide which
/// regime applies.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub dissipative: ProtocolEntry,
    pub dispersive: ProtocolEntry,
    pub feedback: ProtocolEntry,
    /// Internal loss is negligible only below this γ_int/γ.
    pub loss_ratio_bound: f64,
    /// Photon-number ratio (dispersive over dissipative) to reach the
    /// same 2·n_disp occupation; about 8(ω_M/γ)² in the resolved
    /// sideband at g_ω ≈ g_γ.
    pub photon_gain_same_target: f64,
    pub warnings: Vec<String>,
}

/// Detector-controlled feedback floor n_det = ½(√(1/η) − 1).
pub fn detector_limit(eta_det: f64) -> f64 {
    0.5 * ((1.0 / eta_det).sqrt() - 1.0)
}

/// Imperfection quanta from the measurement backaction budget:
/// n_imp = γγ_m/(64·|a0|²·g_ω²).
pub fn n_imp_from_drive(params: &SystemParams) -> Result<f64> {
    let denom = 64.0 * params.drive.photon_number * params.coupling.g_omega.powi(2);
    if denom <= 0.0 {
        return Err(Error::InvalidParam(
            "n_imp from drive requires photon_number > 0 and g_omega != 0".into(),
        ));
    }
    Ok(params.cavity.gamma * params.mech.gamma_m / denom)
}

/// Feedback-cooling limit n_fb = n_det + (4/√η)·n_th·n_imp.
pub fn feedback_limit(mech: &MechParams, fb: &FeedbackParams) -> Result<f64> {
    mech.validate()?;
    fb.validate()?;
    let n_imp = fb.n_imp.ok_or_else(|| {
        Error::InvalidParam("feedback.n_imp required when no drive is supplied".into())
    })?;
    Ok(detector_limit(fb.eta_det) + 4.0 / fb.eta_det.sqrt() * mech.n_th * n_imp)
}

/// Photon numbers: (i) dissipative protocol at its limit,
/// (ii) dispersive protocol reaching 2·n_disp,
/// (iii) dissipative protocol reaching the same 2·n_disp.
#[derive(Debug, Clone)]
pub struct PhotonBudget {
    pub dissipative_at_limit: f64,
    pub dispersive_at_twice_floor: f64,
    pub dissipative_at_twice_floor: f64,
    /// (ii)/(iii); about 8(ω_M/γ)² in the resolved sideband at
    /// g_ω ≈ g_γ.
    pub gain_same_target: f64,
    /// Set when n_disp ≫ n_diss does not hold, which the (iii) estimate
    /// assumes.
    pub depth_warning: bool,
}

/// Evaluates the photon budget of the two red-sideband protocols.
pub fn photon_budget(params: &SystemParams) -> Result<PhotonBudget> {
    params.validate()?;
    if params.coupling.g_gamma == 0.0 || params.coupling.g_omega == 0.0 {
        return Err(Error::InvalidParam(
            "photon budget needs both coupling constants nonzero".into(),
        ));
    }
    let gamma = params.cavity.gamma;
    let omega_m = params.omega_m_eff();
    let q = params.mech.quality();
    let n_th = params.mech.n_th;
    let n_diss = n_diss_optimal_ratio(params);
    let n_disp = dispersive_floor(params);

    let dissipative_at_limit = 0.5 * n_diss * (gamma / params.coupling.g_gamma).powi(2);
    let d4 = (0.5 * gamma).powi(2) + 4.0 * omega_m * omega_m;
    let dispersive_at_twice_floor = n_th / q * omega_m / gamma * d4 / (gamma * gamma)
        * (gamma / params.coupling.g_omega).powi(2);
    let dissipative_at_twice_floor =
        n_th / (2.0 * q) * omega_m / gamma * (gamma / params.coupling.g_gamma).powi(2);

    Ok(PhotonBudget {
        dissipative_at_limit,
        dispersive_at_twice_floor,
        dissipative_at_twice_floor,
        gain_same_target: dispersive_at_twice_floor / dissipative_at_twice_floor,
        depth_warning: n_disp < 10.0 * n_diss,
    })
}

/// Tabulates the three protocols for one parameter set.
pub fn compare(params: &SystemParams, fb: &FeedbackParams) -> Result<ComparisonReport> {
    params.validate()?;
    fb.validate()?;
    let mut warnings = Vec::new();

    let n_imp = match (fb.n_imp, n_imp_from_drive(params)) {
        (Some(given), Ok(computed)) => {
            if computed > 0.0 && (given - computed).abs() / computed > 0.10 {
                warnings.push(format!(
                    "feedback.n_imp = {given:e} supplied, but the drive implies {computed:e}; using the supplied value"
                ));
            }
            given
        }
        (Some(given), Err(_)) => given,
        (None, Ok(computed)) => computed,
        (None, Err(e)) => return Err(e),
    };
    let n_fb = detector_limit(fb.eta_det) + 4.0 / fb.eta_det.sqrt() * params.mech.n_th * n_imp;

    let n_diss = n_diss_optimal_ratio(params);
    let n_disp = dispersive_floor(params);
    let loss_ratio_bound = n_diss / (2.0 * n_disp);

    let budget = photon_budget(params)?;
    if budget.depth_warning {
        warnings.push(format!(
            "n_disp = {n_disp:e} is not well above n_diss = {n_diss:e}; the dissipative protocol loses its validity margin"
        ));
    }
    let loss_note = if params.cavity.gamma_int > 0.0
        && params.cavity.gamma_int / params.cavity.gamma > loss_ratio_bound
    {
        let n_int = crate::cooling::n_internal_loss(params);
        format!(
            "internal loss dominates: limit degrades to beta*(gamma_int/gamma)*n_disp = {n_int:e}"
        )
    } else {
        String::new()
    };

    Ok(ComparisonReport {
        dissipative: ProtocolEntry {
            name: "dissipative-assisted",
            n_limit: n_diss,
            photon_number: Some(budget.dissipative_at_limit),
            note: loss_note,
        },
        dispersive: ProtocolEntry {
            name: "dispersive-sideband",
            n_limit: n_disp,
            photon_number: Some(budget.dispersive_at_twice_floor),
            note: "photon number quoted for reaching 2*n_disp".into(),
        },
        feedback: ProtocolEntry {
            name: "feedback",
            n_limit: n_fb,
            photon_number: None,
            note: format!("detector floor {:e}", detector_limit(fb.eta_det)),
        },
        loss_ratio_bound,
        photon_gain_same_target: budget.gain_same_target,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CavityParams, CouplingParams, DriveParams};

    fn case_study() -> SystemParams {
        let gamma = 16.0;
        let g_gamma = 1e-3 * gamma;
        SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: 0.0,
                detuning: -1.0,
                fsr: f64::INFINITY,
            },
            MechParams {
                omega_m: 1.0,
                gamma_m: 1e-9,
                n_th: 1e5,
            },
            CouplingParams {
                g_omega: 3.0 / gamma * g_gamma,
                g_gamma,
            },
            DriveParams { photon_number: 0.0 },
        )
    }

    #[test]
    fn feedback_case_study_is_detector_dominated() {
        let mech = MechParams {
            omega_m: 1.0,
            gamma_m: 1e-9,
            n_th: 1e5,
        };
        let fb = FeedbackParams {
            eta_det: 0.77,
            n_imp: Some(5.8e-8),
        };
        let n_det = detector_limit(0.77);
        assert!((n_det - 0.07).abs() < 5e-3);
        let n_fb = feedback_limit(&mech, &fb).unwrap();
        // The detector floor is the larger of the two contributions.
        assert!(n_det > n_fb - n_det);
    }

    #[test]
    fn perfect_detection_costs_nothing() {
        let mech = MechParams {
            omega_m: 1.0,
            gamma_m: 1e-9,
            n_th: 1e5,
        };
        let fb = FeedbackParams {
            eta_det: 1.0,
            n_imp: Some(0.0),
        };
        assert_eq!(feedback_limit(&mech, &fb).unwrap(), 0.0);
    }

    #[test]
    fn n_imp_computed_from_drive() {
        let mut p = case_study();
        p.drive.photon_number = 1e8;
        let expect = p.cavity.gamma * p.mech.gamma_m
            / (64.0 * p.drive.photon_number * p.coupling.g_omega.powi(2));
        assert_eq!(n_imp_from_drive(&p).unwrap(), expect);
    }

    #[test]
    fn photon_gain_in_resolved_sideband() {
        // g_ω = g_γ, γ/ω_M = 0.1: the same-target photon gain is close
        // to 8(ω_M/γ)².
        let gamma = 0.1;
        let g = 1e-4;
        let p = SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: 0.0,
                detuning: -1.0,
                fsr: f64::INFINITY,
            },
            MechParams {
                omega_m: 1.0,
                gamma_m: 1e-9,
                n_th: 1e5,
            },
            CouplingParams {
                g_omega: g,
                g_gamma: g,
            },
            DriveParams { photon_number: 0.0 },
        );
        let b = photon_budget(&p).unwrap();
        let approx = 8.0 * (1.0 / gamma).powi(2);
        assert!((b.gain_same_target - approx).abs() / approx < 0.01);
        // Exact form: 2[(γ/2)² + 4ω_M²]/γ².
        let exact = 2.0 * ((0.5 * gamma).powi(2) + 4.0) / (gamma * gamma);
        assert!((b.gain_same_target - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn compare_case_study_ordering_and_threshold() {
        let mut p = case_study();
        p.drive.photon_number = 1e6;
        let fb = FeedbackParams {
            eta_det: 0.77,
            n_imp: Some(5.8e-8),
        };
        let rep = compare(&p, &fb).unwrap();
        assert!((rep.dissipative.n_limit - 0.02).abs() < 1e-9);
        assert!(rep.dissipative.n_limit < detector_limit(0.77));
        assert!((rep.loss_ratio_bound - 6.25e-4).abs() / 6.25e-4 < 1e-12);
    }

    #[test]
    fn temperature_scaling_of_the_two_limits() {
        let p = case_study();
        let mut hot = p.clone();
        hot.mech.n_th *= 2.0;
        let diss_ratio = n_diss_optimal_ratio(&hot) / n_diss_optimal_ratio(&p);
        assert!((diss_ratio - 2f64.sqrt()).abs() < 1e-12);
        let fb = |pp: &SystemParams| {
            4.0 / 0.77f64.sqrt() * pp.mech.n_th * 5.8e-8
        };
        assert!((fb(&hot) / fb(&p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn supplied_n_imp_wins_with_a_consistency_warning() {
        let mut p = case_study();
        p.drive.photon_number = 1e8;
        let implied = n_imp_from_drive(&p).unwrap();
        let fb = FeedbackParams {
            eta_det: 0.77,
            n_imp: Some(implied * 2.0),
        };
        let rep = compare(&p, &fb).unwrap();
        assert!(rep.warnings.iter().any(|w| w.contains("n_imp")));
        let expect = detector_limit(0.77) + 4.0 / 0.77f64.sqrt() * p.mech.n_th * implied * 2.0;
        assert!((rep.feedback.n_limit - expect).abs() / expect < 1e-12);
        // Agreement within 10% stays silent.
        let fb_ok = FeedbackParams {
            eta_det: 0.77,
            n_imp: Some(implied * 1.05),
        };
        let rep_ok = compare(&p, &fb_ok).unwrap();
        assert!(!rep_ok.warnings.iter().any(|w| w.contains("n_imp")));
    }

    #[test]
    fn degenerate_feedback_always_wins() {
        let p = case_study();
        let fb = FeedbackParams {
            eta_det: 1.0,
            n_imp: Some(0.0),
        };
        let rep = compare(&p, &fb).unwrap();
        assert_eq!(rep.feedback.n_limit, 0.0);
        assert!(rep.dissipative.n_limit > rep.feedback.n_limit);
    }

    #[test]
    fn ordering_against_dispersive_holds_in_the_validity_domain() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(29);
        let mut n_checked = 0;
        while n_checked < 200 {
            let gamma = rng.gen_range(2.0..50.0);
            let q = 10f64.powf(rng.gen_range(5.0..9.0));
            let n_th = 10f64.powf(rng.gen_range(1.0..5.0));
            let g_gamma = 1e-3 * gamma;
            let p = SystemParams::new(
                CavityParams {
                    gamma,
                    gamma_int: 0.0,
                    detuning: -1.0,
                    fsr: f64::INFINITY,
                },
                MechParams {
                    omega_m: 1.0,
                    gamma_m: 1.0 / q,
                    n_th,
                },
                CouplingParams {
                    g_omega: 3.0 / gamma * g_gamma,
                    g_gamma,
                },
                DriveParams { photon_number: 0.0 },
            );
            let n_diss = n_diss_optimal_ratio(&p);
            let n_disp = dispersive_floor(&p);
            if n_diss >= 0.2 * n_disp {
                continue; // outside the margin-10 validity domain
            }
            assert!(n_diss < n_disp);
            // Even loss-dominated, the dissipative protocol stays below
            // the dispersive floor while βγ_int/γ < 1.
            let mut lossy = p.clone();
            lossy.cavity.gamma_int = 1e-2 * gamma;
            let n_int = crate::cooling::n_internal_loss(&lossy);
            let beta = crate::cooling::beta_factor(&lossy);
            if beta * 1e-2 < 1.0 {
                assert!(n_int < n_disp);
            }
            n_checked += 1;
        }
    }
}
