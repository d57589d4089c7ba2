//! Operating-point selection, applicability checks and tolerance
//! budgeting.

use crate::cooling::{self, beta_factor, dispersive_floor, g0_factor, g_factor};
use crate::error::{Error, Result};
use crate::optim;
use crate::params::SystemParams;
use crate::spectra;

/// Optimized protocol settings and the cooling limit they predict.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    /// Detuning satisfying the interference condition for `ratio_star`.
    pub detuning_star: f64,
    /// Optimal dimensionless drive U0.
    pub u0: f64,
    /// In-cavity photon number |a0|² realizing U0.
    pub photon_number: f64,
    /// Coupling-ratio target γ·g_ω/g_γ (3ω_M when free to choose).
    pub ratio_star: f64,
    /// Predicted minimal occupation at these settings.
    pub predicted_n: f64,
    /// Bad-cavity note: the damping gain is within 5% of its maximum
    /// G0 regardless of the ratio.
    pub g_close_to_g0: bool,
}

/// Pass/warn/fail flag for a "much smaller than" condition, using
/// margin ≥ 10 for pass and 3–10 for warn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionFlag {
    Pass,
    Warn,
    Fail,
}

impl ConditionFlag {
    pub fn from_margin(margin: f64) -> Self {
        if margin >= 10.0 {
            ConditionFlag::Pass
        } else if margin >= 3.0 {
            ConditionFlag::Warn
        } else {
            ConditionFlag::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionFlag::Pass => "pass",
            ConditionFlag::Warn => "warn",
            ConditionFlag::Fail => "fail",
        }
    }
}

/// Margins of the weak-coupling and underdamped conditions, and of the
/// consolidated applicability criteria.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    /// γ / γ_opt.
    pub weak_coupling_margin: f64,
    /// ω_M / γ_M.
    pub underdamped_margin: f64,
    /// (1/16)(γ/ω_M)³ over n_th/Q.
    pub criterion_1: f64,
    /// (1/16)(γ/ω_M) over n_th/Q.
    pub criterion_2: f64,
    /// 2·n_disp / n_diss (the protocol limit must sit well below the
    /// dispersive floor).
    pub depth_margin: f64,
    /// Same, weighted by ω_M/γ.
    pub depth_margin_damping: f64,
    pub weak_coupling: ConditionFlag,
    pub underdamped: ConditionFlag,
    pub criterion_1_flag: ConditionFlag,
    pub criterion_2_flag: ConditionFlag,
    pub depth_flag: ConditionFlag,
    pub depth_damping_flag: ConditionFlag,
}

/// Maximal setting errors that keep the excess occupation below a
/// caller-chosen fraction of the cooling limit.
#[derive(Debug, Clone)]
pub struct ToleranceBudget {
    /// |δΔ/Δ| bound.
    pub max_rel_detuning_error: f64,
    /// |δU/U0| bound.
    pub max_rel_power_error: f64,
    /// |δ| bound on the relative coupling-ratio error.
    pub max_rel_ratio_error: f64,
    /// γ_int/γ bound.
    pub max_loss_ratio: f64,
    /// ω_M/ω_FSR bound.
    pub max_fsr_ratio: f64,
}

/// Detuning at which the backaction noise at the mechanical sideband
/// vanishes: Δ = (ω_M − γ·g_ω/g_γ)/2.
pub fn fano_detuning(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    params.fano_detuning()
}

/// Computes the optimized operating point. With `fix_ratio` the actual
/// coupling ratio is kept and only detuning and power are optimized
/// (gain G); otherwise the ratio target 3ω_M is recommended (gain G0).
/// `exact_minimization` selects the exact power optimum over the
/// deep-cooling approximation.
pub fn optimize(
    params: &SystemParams,
    fix_ratio: bool,
    exact_minimization: bool,
) -> Result<OperatingPoint> {
    params.validate()?;
    let omega_m = params.omega_m_eff();
    let (ratio_star, detuning_star, g) = if fix_ratio {
        (
            params.coupling_ratio()?,
            params.fano_detuning()?,
            g_factor(params)?,
        )
    } else {
        (3.0 * omega_m, -omega_m, g0_factor(params))
    };
    let nth_g = params.mech.n_th * g;
    if nth_g <= 1.0 {
        return Err(Error::NoCooling { nth_g });
    }
    let (predicted_n, u0) = if exact_minimization {
        let n = params.mech.n_th * (2.0 / nth_g.sqrt() - 1.0 / nth_g);
        (n, (nth_g.sqrt() - 1.0) / g)
    } else {
        let n = 2.0 * (params.mech.n_th / g).sqrt();
        (n, 0.5 * n)
    };
    if params.coupling.g_gamma == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let photon_number = u0 * (params.cavity.gamma / params.coupling.g_gamma).powi(2);
    let g_close_to_g0 = g_factor(params)? >= 0.95 * g0_factor(params);
    Ok(OperatingPoint {
        detuning_star,
        u0,
        photon_number,
        ratio_star,
        predicted_n,
        g_close_to_g0,
    })
}

/// Numerically refined 2-D minimum of the closed-form occupation over
/// (Δ, U), seeded at an [`OperatingPoint`].
#[derive(Debug, Clone, Copy)]
pub struct RefinedPoint {
    pub detuning: f64,
    pub u: f64,
    pub n: f64,
}

/// Coordinate descent with golden-section line searches around the
/// closed-form operating point. The refined minimum sits a relative
/// O(n_diss, γ_M/γ) away from the closed-form settings: the closed form
/// neglects the detuning dependence of the cavity-band terms.
pub fn refine_operating_point(params: &SystemParams, seed: &OperatingPoint) -> Result<RefinedPoint> {
    params.validate()?;
    let objective = |detuning: f64, u: f64| -> f64 {
        if u < 0.0 {
            return f64::INFINITY;
        }
        let mut p = params.clone();
        p.cavity.detuning = detuning;
        if p.set_u(u).is_err() {
            return f64::INFINITY;
        }
        match cooling::n_analytic(&p) {
            Ok(r) => r.n_total,
            Err(_) => f64::INFINITY,
        }
    };
    let scale = (
        0.2 * seed.detuning_star.abs().max(params.omega_m_eff()),
        0.9 * seed.u0,
    );
    let ((detuning, u), n) = optim::coordinate_descent_2d(
        objective,
        (seed.detuning_star, seed.u0),
        scale,
        1e-10,
        120,
    );
    Ok(RefinedPoint { detuning, u, n })
}

/// Applicability margins at the supplied parameters (with their actual
/// drive).
pub fn validity(params: &SystemParams) -> Result<ValidityReport> {
    params.validate()?;
    let gamma = params.cavity.gamma;
    let omega_m = params.omega_m_eff();
    let kind = cooling::inferred_kind(params);
    let gamma_opt = spectra::gamma_opt(params, omega_m, kind)?;
    let gamma_m_eff = params.mech.gamma_m + gamma_opt;

    let weak_coupling_margin = if gamma_opt.abs() > 0.0 {
        gamma / gamma_opt.abs()
    } else {
        f64::INFINITY
    };
    let underdamped_margin = if gamma_m_eff > 0.0 {
        omega_m / gamma_m_eff
    } else {
        0.0
    };

    let nth_over_q = params.mech.n_th / params.mech.quality();
    let x = gamma / omega_m;
    let criterion_1 = if nth_over_q > 0.0 {
        x * x * x / 16.0 / nth_over_q
    } else {
        f64::INFINITY
    };
    let criterion_2 = if nth_over_q > 0.0 {
        x / 16.0 / nth_over_q
    } else {
        f64::INFINITY
    };

    let n_diss = cooling::n_diss_optimal_ratio(params);
    let n_disp = dispersive_floor(params);
    let depth_margin = 2.0 * n_disp / n_diss;
    let depth_margin_damping = depth_margin * omega_m / gamma;

    Ok(ValidityReport {
        weak_coupling_margin,
        underdamped_margin,
        criterion_1,
        criterion_2,
        depth_margin,
        depth_margin_damping,
        weak_coupling: ConditionFlag::from_margin(weak_coupling_margin),
        underdamped: ConditionFlag::from_margin(underdamped_margin),
        criterion_1_flag: ConditionFlag::from_margin(criterion_1),
        criterion_2_flag: ConditionFlag::from_margin(criterion_2),
        depth_flag: ConditionFlag::from_margin(depth_margin),
        depth_damping_flag: ConditionFlag::from_margin(depth_margin_damping),
    })
}

/// Inverts each imperfection formula for the largest setting error that
/// adds at most `target_excess`·n_diss phonons.
pub fn tolerance_budget(params: &SystemParams, target_excess: f64) -> Result<ToleranceBudget> {
    params.validate()?;
    if target_excess.is_nan() || target_excess <= 0.0 || target_excess > 1.0 {
        return Err(Error::InvalidParam(format!(
            "target_excess = {target_excess} must lie in (0, 1]"
        )));
    }
    let g0 = g0_factor(params);
    let nth_g = params.mech.n_th * g0;
    if nth_g <= 1.0 {
        return Err(Error::NoCooling { nth_g });
    }
    let gamma = params.cavity.gamma;
    let omega_m = params.omega_m_eff();
    let n_diss = cooling::n_diss_optimal_ratio(params);
    let n_disp = dispersive_floor(params);
    let beta = beta_factor(params);
    let half_sq = (0.5 * gamma).powi(2);
    let d4 = half_sq + 4.0 * omega_m * omega_m;

    // Quadratic inversions of the correction formulas.
    let max_rel_detuning_error = (target_excess * n_diss * d4 / half_sq).sqrt();
    let max_rel_ratio_error = (2.0 * target_excess).sqrt() * gamma / (3.0 * omega_m);
    let max_fsr_ratio =
        2.0 / (3.0 * std::f64::consts::PI) * (target_excess * n_diss * d4 / half_sq).sqrt();
    let max_loss_ratio = target_excess / beta * n_diss / n_disp;

    // Power: curvature of n(U) = n_th/(1+G0·U) + U at the exact optimum.
    let u0 = (nth_g.sqrt() - 1.0) / g0;
    let curvature = 2.0 * params.mech.n_th * g0 * g0 / (1.0 + g0 * u0).powi(3);
    let max_rel_power_error = (2.0 * target_excess * n_diss / curvature).sqrt() / u0;

    Ok(ToleranceBudget {
        max_rel_detuning_error,
        max_rel_power_error,
        max_rel_ratio_error,
        max_loss_ratio,
        max_fsr_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::{n_analytic, n_detuning_error_optimized, n_multimode, n_ratio_error};
    use crate::params::{CavityParams, CouplingParams, DriveParams, MechParams};

    fn case_study(u: f64) -> SystemParams {
        let gamma = 16.0;
        let g_gamma = 1e-3 * gamma;
        let mut p = SystemParams::new(
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
        );
        p.set_u(u).unwrap();
        p
    }

    #[test]
    fn fano_detuning_cases() {
        // Optimal ratio: Δ = −ω_M.
        let p = case_study(0.0);
        assert_eq!(fano_detuning(&p).unwrap(), -1.0);
        // Pure dissipative: Δ = ω_M/2.
        let mut q = p.clone();
        q.coupling.g_omega = 0.0;
        assert_eq!(fano_detuning(&q).unwrap(), 0.5);
        // γ = 16, g_ω/g_γ = 1: Δ = (1 − 16)/2 = −7.5.
        let mut r = p.clone();
        r.coupling.g_omega = r.coupling.g_gamma;
        assert_eq!(fano_detuning(&r).unwrap(), -7.5);
        let mut r2 = r.clone();
        r2.cavity.detuning = -7.5;
        assert_eq!(crate::spectra::omega_h(&r2).unwrap(), r2.omega_m_eff());
        // Degenerate coupling errors out.
        let mut s = p.clone();
        s.coupling.g_gamma = 0.0;
        assert_eq!(fano_detuning(&s), Err(Error::DegenerateCoupling));
    }

    #[test]
    fn optimize_case_study_point() {
        let p = case_study(0.0);
        let op = optimize(&p, false, false).unwrap();
        assert!((op.predicted_n - 0.02).abs() < 1e-9);
        assert_eq!(op.ratio_star, 3.0);
        assert_eq!(op.detuning_star, -1.0);
        assert_eq!(op.u0, 0.5 * op.predicted_n);
        let expect_photon = op.u0 * (p.cavity.gamma / p.coupling.g_gamma).powi(2);
        assert_eq!(op.photon_number, expect_photon);
        // The coupling here is ratio-optimal and the cavity is bad, so G
        // is already at its maximum.
        assert!(op.g_close_to_g0);
    }

    #[test]
    fn optimize_with_fixed_suboptimal_ratio_uses_reduced_gain() {
        let mut p = case_study(0.0);
        p.coupling.g_omega *= 2.0; // ratio 6ω_M
        let op = optimize(&p, true, false).unwrap();
        assert_eq!(op.ratio_star, 6.0);
        assert_eq!(op.detuning_star, -2.5);
        let free = optimize(&p, false, false).unwrap();
        assert!(op.predicted_n > free.predicted_n);
    }

    #[test]
    fn omega_m_override_threads_through_the_operating_point() {
        let mut p = case_study(0.0);
        p.omega_m_override = Some(1.2);
        // The interference condition and the ratio target both follow
        // the effective frequency, not the bare one.
        assert_eq!(fano_detuning(&p).unwrap(), 0.5 * (1.2 - 3.0));
        let op = optimize(&p, false, false).unwrap();
        assert_eq!(op.ratio_star, 3.0 * 1.2);
        assert_eq!(op.detuning_star, -1.2);
        assert!((cooling::g0_factor(&p) - 16.0 * 1.44 / (16.0 * 1e-9)).abs() < 1.0);
    }

    #[test]
    fn optimize_rejects_hopeless_cooling() {
        let mut p = case_study(0.0);
        p.mech.n_th = 1e-12;
        assert!(matches!(
            optimize(&p, false, false),
            Err(Error::NoCooling { .. })
        ));
    }

    #[test]
    fn refined_minimum_sits_near_the_closed_form_point() {
        let p = case_study(0.0);
        let op = optimize(&p, false, true).unwrap();
        let mut at = p.clone();
        at.cavity.detuning = op.detuning_star;
        at.set_u(op.u0).unwrap();
        let n_closed = n_analytic(&at).unwrap().n_total;

        let refined = refine_operating_point(&p, &op).unwrap();
        // The numeric minimum improves on the closed form by a
        // second-order amount and is displaced by a relative O(n_diss).
        assert!(refined.n <= n_closed);
        assert!(n_closed <= refined.n * 1.01);
        assert!((refined.detuning - op.detuning_star).abs() <= 0.05 * op.detuning_star.abs());
        assert!((refined.u - op.u0).abs() <= 0.2 * op.u0);

        // True minimum: both-sign finite differences increase n.
        let eval = |d: f64, u: f64| {
            let mut q = p.clone();
            q.cavity.detuning = d;
            q.set_u(u).unwrap();
            n_analytic(&q).unwrap().n_total
        };
        let hd = 1e-4 * refined.detuning.abs();
        let hu = 1e-4 * refined.u;
        for (dd, du) in [(hd, 0.0), (-hd, 0.0), (0.0, hu), (0.0, -hu)] {
            assert!(eval(refined.detuning + dd, refined.u + du) >= refined.n);
        }
    }

    #[test]
    fn validity_case_study_margins() {
        let p = case_study(0.01);
        let v = validity(&p).unwrap();
        // n_th/Q = 1e-4 against 256 and 1.
        assert!((v.criterion_1 - 2.56e6).abs() / 2.56e6 < 1e-12);
        assert!((v.criterion_2 - 1e4).abs() / 1e4 < 1e-12);
        assert_eq!(v.criterion_1_flag, ConditionFlag::Pass);
        assert_eq!(v.criterion_2_flag, ConditionFlag::Pass);
        assert_eq!(v.weak_coupling, ConditionFlag::Pass);
        assert_eq!(v.underdamped, ConditionFlag::Pass);
        // γ_opt/γ = n_diss/(2 n_disp): margins agree.
        let n_diss = cooling::n_diss_optimal_ratio(&p);
        let n_disp = dispersive_floor(&p);
        assert!((v.depth_margin - 2.0 * n_disp / n_diss).abs() < 1e-12);
        assert!(
            (v.weak_coupling_margin - v.depth_margin).abs() / v.depth_margin < 1e-9,
            "γ/γ_opt and 2n_disp/n_diss must coincide at the optimum"
        );
    }

    #[test]
    fn validity_flags_overdamped_oscillator() {
        // Strong drive on a low-Q oscillator: γ_M > ω_M.
        let gamma = 5.0;
        let g_gamma = 0.1;
        let mut p = SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: 0.0,
                detuning: 0.0,
                fsr: f64::INFINITY,
            },
            MechParams {
                omega_m: 1.0,
                gamma_m: 0.2,
                n_th: 10.0,
            },
            CouplingParams {
                g_omega: 3.0 / gamma * g_gamma,
                g_gamma,
            },
            DriveParams { photon_number: 0.0 },
        );
        p.cavity.detuning = p.fano_detuning().unwrap();
        p.set_u(0.7).unwrap();
        let v = validity(&p).unwrap();
        assert!(v.underdamped_margin < 1.0);
        assert_eq!(v.underdamped, ConditionFlag::Fail);
    }

    #[test]
    fn budget_round_trips_through_the_corrections() {
        let p = case_study(0.01);
        for target in [1.0, 0.3, 0.05] {
            let b = tolerance_budget(&p, target).unwrap();
            let n_diss = cooling::n_diss_optimal_ratio(&p);
            let allowed = target * n_diss * (1.0 + 1e-9);

            let d_delta = b.max_rel_detuning_error * p.cavity.detuning.abs();
            assert!(n_detuning_error_optimized(&p, d_delta) <= allowed);
            assert!(n_ratio_error(&p, b.max_rel_ratio_error) <= allowed);
            let mut q = p.clone();
            q.cavity.gamma_int = b.max_loss_ratio * q.cavity.gamma;
            assert!(cooling::n_internal_loss(&q) <= allowed);
            let mut r = p.clone();
            r.cavity.fsr = r.omega_m_eff() / b.max_fsr_ratio;
            assert!(n_multimode(&r) <= allowed);
        }
    }

    #[test]
    fn budget_shrinks_to_zero_with_the_target() {
        let p = case_study(0.01);
        let big = tolerance_budget(&p, 1.0).unwrap();
        let small = tolerance_budget(&p, 1e-6).unwrap();
        assert!(small.max_rel_detuning_error < 2e-3 * big.max_rel_detuning_error);
        assert!(small.max_loss_ratio < 2e-6 * big.max_loss_ratio);
        assert!(small.max_rel_ratio_error < 2e-3 * big.max_rel_ratio_error);
        assert!(small.max_fsr_ratio < 2e-3 * big.max_fsr_ratio);
        assert!(small.max_rel_power_error < 2e-3 * big.max_rel_power_error);
    }

    #[test]
    fn budgeted_loss_threshold_equals_damping_crossover() {
        // The γ_int budget at unit target equals (2/β)·γ_opt to 1e-9
        // when the drive sits at U0 = n_diss/2.
        let n_diss = cooling::n_diss_optimal_ratio(&case_study(0.0));
        let p = case_study(0.5 * n_diss);
        let b = tolerance_budget(&p, 1.0).unwrap();
        let gamma_opt =
            spectra::gamma_opt(&p, p.omega_m_eff(), crate::params::SpectrumKind::Ideal).unwrap();
        let crossover = 2.0 / beta_factor(&p) * gamma_opt;
        let budgeted = b.max_loss_ratio * p.cavity.gamma;
        assert!((budgeted - crossover).abs() / crossover < 1e-9);
    }

    #[test]
    fn budget_rejects_out_of_range_target() {
        let p = case_study(0.01);
        assert!(tolerance_budget(&p, 0.0).is_err());
        assert!(tolerance_budget(&p, 1.5).is_err());
    }
}
