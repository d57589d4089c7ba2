//! Built-in acceptance checks: every numbered criterion the toolkit must
//! satisfy, runnable from the test suite and from the CLI `selftest`
//! subcommand. All checks are deterministic (fixed RNG seeds) so two
//! runs render byte-identical reports.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cooling::{
    self, beta_factor, bracket_decomposition, dispersive_floor, n_analytic, n_at_power,
    n_diss_limit, n_quadrature, QuadratureConfig,
};
use crate::design;
use crate::msi::{self, MsiDrive, MsiGeometry, SPEED_OF_LIGHT};
use crate::optim::golden_section_min;
use crate::params::{
    CavityParams, CouplingParams, DriveParams, MechParams, SpectrumKind, SystemParams,
};
use crate::spectra;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Optimized-setting system with ω_m = 1: Δ at the Fano point for the
/// ratio target 3ω_M, drive set to the exact power optimum.
fn optimized_system(gamma: f64, q: f64, n_th: f64) -> SystemParams {
    let g_gamma = 1e-3 * gamma;
    let mut p = SystemParams::new(
        CavityParams {
            gamma,
            gamma_int: 0.0,
            detuning: 0.0,
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
    p.cavity.detuning = p.fano_detuning().expect("nonzero g_gamma");
    let (_, u0) = n_diss_limit(&p, true).expect("cooling headroom");
    p.set_u(u0).expect("nonzero g_gamma");
    p
}

fn criterion_1() -> CriterionOutcome {
    let started = Instant::now();
    let p = optimized_system(16.0, 1e9, 1e5);
    let op = design::optimize(&p, false, false).expect("case study optimizes");
    let n_det = crate::protocols::detector_limit(0.77);
    let threshold = op.predicted_n / (2.0 * dispersive_floor(&p));
    let runtime_ok = started.elapsed().as_millis() < 10;

    let n_diss_ok = (op.predicted_n - 0.020).abs() <= 0.001;
    let n_det_ok = (n_det - 0.070).abs() <= 0.005;
    let threshold_ok = (threshold - 6.25e-4).abs() / 6.25e-4 <= 0.05;
    CriterionOutcome {
        id: 1,
        name: "case-study reproduction",
        passed: n_diss_ok && n_det_ok && threshold_ok && runtime_ok,
        detail: format!(
            "n_diss={:.6e} (want 0.020±0.001), n_det={:.6e} (want 0.070±0.005), gamma_int threshold={:.6e} (want 6.25e-4±5%), runtime_ok={}",
            op.predicted_n, n_det, threshold, runtime_ok
        ),
    }
}

fn criterion_2() -> CriterionOutcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < 20 && attempts < 10_000 {
        attempts += 1;
        let gamma = rng.gen_range(5.0..50.0);
        let q = 10f64.powf(rng.gen_range(6.0..9.0));
        let n_th = 10f64.powf(rng.gen_range(2.0..5.0));
        let p = optimized_system(gamma, q, n_th);
        // 100x margins on the weak-coupling and underdamped conditions.
        let gamma_opt = spectra::gamma_opt(&p, 1.0, SpectrumKind::Ideal).expect("valid");
        let gamma_m_eff = p.mech.gamma_m + gamma_opt;
        if gamma_opt * 100.0 > gamma || gamma_m_eff * 100.0 > 1.0 {
            continue;
        }
        accepted += 1;
        let analytic = n_analytic(&p).expect("stable").n_total;
        let quad = n_quadrature(&p, SpectrumKind::Ideal, &cfg)
            .expect("converges")
            .n_total;
        worst = worst.max((quad - analytic).abs() / analytic);
    }
    let runtime_ok = started.elapsed().as_secs_f64() < 5.0;
    CriterionOutcome {
        id: 2,
        name: "oracle equivalence",
        passed: accepted >= 20 && worst < 0.05 && runtime_ok,
        detail: format!(
            "{accepted} draws, worst |n_quad-n_analytic|/n_analytic={worst:.6e} (want <0.05), runtime_ok={runtime_ok}"
        ),
    }
}

fn criterion_3() -> CriterionOutcome {
    let p = optimized_system(16.0, 1e9, 1e5);
    let (narrow, _broad) = bracket_decomposition(&p, SpectrumKind::Ideal).expect("stable");
    let bit_exact = narrow == 0.0;
    let reduced = n_at_power(&p, p.u()).expect("nonzero g_gamma");
    let quad = n_quadrature(&p, SpectrumKind::Ideal, &QuadratureConfig::default())
        .expect("converges")
        .n_total;
    let rel = (quad - reduced).abs() / reduced;
    CriterionOutcome {
        id: 3,
        name: "Fano cancellation",
        passed: bit_exact && rel < 0.10,
        detail: format!(
            "narrow-band bracket term={narrow:e} (want exactly 0), quadrature vs n_th/(1+GU)+U rel={rel:.6e} (want <0.10)"
        ),
    }
}

fn criterion_4() -> CriterionOutcome {
    // Deep unresolved-sideband point; the optimized-settings closed form
    // carries β, the injected spectrum reproduces it within 10% here.
    let base = optimized_system(32.0, 1e9, 1e4);
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for loss_ratio in [1e-4, 1e-3, 1e-2] {
        let mut p = base.clone();
        p.cavity.gamma_int = loss_ratio * p.cavity.gamma;
        let quad = n_quadrature(&p, SpectrumKind::WithInternalLoss, &cfg)
            .expect("converges")
            .n_int;
        let formula = cooling::n_internal_loss(&p);
        worst = worst.max((quad - formula).abs() / formula);
    }
    // β limits: 1 in the deep unresolved regime, 4 in the resolved one.
    let beta_flat = beta_factor(&optimized_system(1e3, 1e9, 1e4));
    let beta_resolved = beta_factor(&{
        let mut p = optimized_system(2.0, 1e9, 1e4);
        p.cavity.gamma = 1e-2;
        p
    });
    let limits_ok = (beta_flat - 1.0).abs() <= 0.01 && (beta_resolved - 4.0).abs() <= 0.04;
    CriterionOutcome {
        id: 4,
        name: "internal-loss correction",
        passed: worst < 0.10 && limits_ok,
        detail: format!(
            "worst quadrature-vs-(gamma_int/gamma)*n_disp*beta rel={worst:.6e} (want <0.10) over loss ratios 1e-4..1e-2, beta limits {beta_flat:.6e}->1 and {beta_resolved:.6e}->4 within 1%: {limits_ok}"
        ),
    }
}

fn criterion_5() -> CriterionOutcome {
    let p = optimized_system(16.0, 1e9, 1e4);
    let omega_m = p.omega_m_eff();
    let gamma = p.cavity.gamma;
    let d4 = (0.5 * gamma).powi(2) + 4.0 * omega_m * omega_m;

    // Detuning direction: central second difference of the closed form
    // against the quadratic coefficient of the optimized-settings
    // formula, n_Δ = (δΔ/Δ)²·(γ/2)²/[(γ/2)²+4ω_M²].
    let eval_at_detuning = |d: f64| {
        let mut q = p.clone();
        q.cavity.detuning = d;
        n_analytic(&q).expect("stable").n_total
    };
    let d0 = p.cavity.detuning;
    let h = 1e-3 * d0.abs();
    let curv_fd =
        (eval_at_detuning(d0 + h) - 2.0 * eval_at_detuning(d0) + eval_at_detuning(d0 - h))
            / (h * h);
    let curv_formula = 2.0 * (0.5 * gamma).powi(2) / (d0 * d0 * d4);
    let rel_detuning = (curv_fd - curv_formula).abs() / curv_formula;

    // Ratio direction: re-solve the Fano detuning per ratio, hold U.
    let u = p.u();
    let eval_at_ratio_offset = |delta: f64| {
        let mut q = p.clone();
        q.coupling.g_omega = (1.0 + delta) * 3.0 * omega_m / gamma * q.coupling.g_gamma;
        q.cavity.detuning = q.fano_detuning().expect("nonzero g_gamma");
        q.set_u(u).expect("nonzero g_gamma");
        n_analytic(&q).expect("stable").n_total
    };
    let hr = 0.05;
    let curv_fd_ratio = (eval_at_ratio_offset(hr) - 2.0 * eval_at_ratio_offset(0.0)
        + eval_at_ratio_offset(-hr))
        / (hr * hr);
    let n_diss = cooling::n_diss_optimal_ratio(&p);
    let curv_ratio_formula = n_diss * (3.0 * omega_m / gamma).powi(2);
    let rel_ratio = (curv_fd_ratio - curv_ratio_formula).abs() / curv_ratio_formula;

    CriterionOutcome {
        id: 5,
        name: "setting-error corrections",
        passed: rel_detuning < 0.05 && rel_ratio < 0.05,
        detail: format!(
            "detuning curvature rel={rel_detuning:.6e} (want <0.05), ratio curvature rel={rel_ratio:.6e} (want <0.05)"
        ),
    }
}

fn criterion_6() -> CriterionOutcome {
    let mut rng = StdRng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let gamma = rng.gen_range(0.5..100.0);
        let g_gamma = 10f64.powf(rng.gen_range(-4.0..0.0)) * gamma;
        let ratio = rng.gen_range(-10.0..10.0);
        let mut p = SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: 0.0,
                detuning: 0.0,
                fsr: f64::INFINITY,
            },
            MechParams {
                omega_m: 1.0,
                gamma_m: 10f64.powf(rng.gen_range(-9.0..-3.0)),
                n_th: 10f64.powf(rng.gen_range(1.0..5.0)),
            },
            CouplingParams {
                g_omega: ratio / gamma * g_gamma,
                g_gamma,
            },
            DriveParams { photon_number: 0.0 },
        );
        p.cavity.detuning = p.fano_detuning().expect("nonzero g_gamma");
        p.set_u(10f64.powf(rng.gen_range(-6.0..0.0))).expect("nonzero g_gamma");

        let from_spectra = spectra::gamma_opt(&p, 1.0, SpectrumKind::Ideal).expect("valid");
        let from_gain = p.u() * p.mech.gamma_m * cooling::g_factor(&p).expect("nonzero g_gamma");
        worst = worst.max((from_spectra - from_gain).abs() / from_gain.abs());
    }
    CriterionOutcome {
        id: 6,
        name: "damping consistency",
        passed: worst < 1e-9,
        detail: format!(
            "worst |gamma_opt(spectra) - U*gamma_m*G|/|.| = {worst:.6e} over 10000 draws (want <1e-9)"
        ),
    }
}

fn criterion_7() -> CriterionOutcome {
    let k = 5.906e6;
    let mut rng = StdRng::seed_from_u64(707);
    let mut worst_unitarity: f64 = 0.0;
    for _ in 0..10_000 {
        let bs_t: f64 = rng.gen_range(0.2..0.98);
        let mem_r: f64 = rng.gen_range(0.05..0.95);
        let g = MsiGeometry {
            bs_t,
            bs_r: (1.0 - bs_t * bs_t).sqrt(),
            mem_t: (1.0 - mem_r * mem_r).sqrt(),
            mem_r,
            l_a: 0.4,
            l: 0.35,
            l_s: 0.25,
            x: rng.gen_range(-1.0..1.0) * std::f64::consts::PI / k,
        };
        let m = msi::effective_mirror(&g, k).expect("valid geometry");
        worst_unitarity = worst_unitarity.max((m.rho.norm_sqr() + m.tau * m.tau - 1.0).abs());
    }

    // Analytic derivatives against centered finite differences. The
    // step balances truncation against f64 rounding noise.
    let h = 1e-5 / k;
    let mut worst_deriv: f64 = 0.0;
    let mut accepted = 0usize;
    while accepted < 200 {
        let bs_t: f64 = rng.gen_range(0.2..0.98);
        let mem_r: f64 = rng.gen_range(0.1..0.9);
        let g = MsiGeometry {
            bs_t,
            bs_r: (1.0 - bs_t * bs_t).sqrt(),
            mem_t: (1.0 - mem_r * mem_r).sqrt(),
            mem_r,
            l_a: 0.4,
            l: 0.35,
            l_s: 0.25,
            x: rng.gen_range(-1.0..1.0) * std::f64::consts::PI / k,
        };
        let m = msi::effective_mirror(&g, k).expect("valid geometry");
        if m.rho.norm() < 0.05 {
            continue;
        }
        let (dmu, dtau) = msi::mirror_derivatives(&g, k).expect("valid geometry");
        if dmu.abs() < 1e-3 * k * mem_r || dtau.abs() < 1e-3 * k * mem_r {
            continue;
        }
        let mut plus = g.clone();
        plus.x += h;
        let mut minus = g.clone();
        minus.x -= h;
        let mp = msi::effective_mirror(&plus, k).expect("valid geometry");
        let mm = msi::effective_mirror(&minus, k).expect("valid geometry");
        let fd_tau = (mp.tau - mm.tau) / (2.0 * h);
        let mut dmu_num = mp.mu - mm.mu;
        if dmu_num > std::f64::consts::PI {
            dmu_num -= 2.0 * std::f64::consts::PI;
        } else if dmu_num < -std::f64::consts::PI {
            dmu_num += 2.0 * std::f64::consts::PI;
        }
        let fd_mu = dmu_num / (2.0 * h);
        worst_deriv = worst_deriv
            .max((fd_tau - dtau).abs() / dtau.abs())
            .max((fd_mu - dmu).abs() / dmu.abs());
        accepted += 1;
    }

    // Exact spectrum against the reduced closed form over the cavity
    // band, for a small-τ geometry.
    let (geom, drive, x_zpf) = small_tau_setup();
    let k_drive = drive.omega_l / SPEED_OF_LIGHT;
    let (gamma, omega_c, fsr) = msi::cavity_from_msi(&geom, k_drive).expect("bright port");
    let coupling = msi::couplings_from_msi(&geom, k_drive, x_zpf).expect("bright port");
    let mapped = SystemParams::new(
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
    );
    let tau_sq = msi::effective_mirror(&geom, k_drive)
        .expect("valid geometry")
        .tau
        .powi(2);
    let length = geom.total_length();
    let mut reduction_ok = tau_sq <= 1e-3;
    let mut worst_reduction_slack: f64 = 0.0;
    for i in -20..=20 {
        let w = i as f64 / 20.0 * gamma;
        let exact = msi::s_ff_exact_msi(w, &geom, &drive, x_zpf).expect("off resonance");
        let reduced = spectra::s_ff(w, &mapped, SpectrumKind::Multimode).expect("valid");
        let rel = (exact - reduced).abs() / reduced;
        let bound = 10.0 * (tau_sq + w.abs() * length / SPEED_OF_LIGHT);
        reduction_ok &= rel <= bound;
        worst_reduction_slack = worst_reduction_slack.max(rel / bound);
    }

    CriterionOutcome {
        id: 7,
        name: "interferometer algebra",
        passed: worst_unitarity < 1e-12 && worst_deriv < 1e-6 && reduction_ok,
        detail: format!(
            "worst ||rho|^2+tau^2-1|={worst_unitarity:.6e} (want <1e-12) over 10000 draws, worst derivative rel={worst_deriv:.6e} (want <1e-6), exact-vs-reduced within 10(tau^2+|omega|L/c): {reduction_ok} (worst rel/bound={worst_reduction_slack:.6e})"
        ),
    }
}

fn small_tau_setup() -> (MsiGeometry, MsiDrive, f64) {
    let k0 = 2.0 * std::f64::consts::PI / 1.064e-6;
    let bs_t = (0.5f64 + 0.02).sqrt();
    let mem_r = 0.45f64;
    let geom = MsiGeometry {
        bs_t,
        bs_r: (1.0 - bs_t * bs_t).sqrt(),
        mem_t: (1.0 - mem_r * mem_r).sqrt(),
        mem_r,
        l_a: 0.4,
        l: 0.35,
        l_s: 0.25,
        x: (std::f64::consts::PI / 2.0 + 0.035) / (2.0 * k0),
    };
    let mut k = k0;
    for _ in 0..4 {
        let (_, omega_c, _) = msi::cavity_from_msi(&geom, k).expect("bright port");
        k = omega_c / SPEED_OF_LIGHT;
    }
    let (gamma, _, _) = msi::cavity_from_msi(&geom, k).expect("bright port");
    (
        geom,
        MsiDrive {
            omega_l: k * SPEED_OF_LIGHT + 0.2 * gamma,
            photon_number: 1e6,
        },
        1e-15,
    )
}

fn criterion_8() -> CriterionOutcome {
    let mut rng = StdRng::seed_from_u64(808);
    let mut worst_u: f64 = 0.0;
    let mut ordering_ok = true;
    for _ in 0..100 {
        let gamma = rng.gen_range(2.0..50.0);
        let q = 10f64.powf(rng.gen_range(5.0..9.0));
        let n_th = 10f64.powf(rng.gen_range(1.0..5.0));
        let p = optimized_system(gamma, q, n_th);
        let (_, u0) = n_diss_limit(&p, true).expect("headroom");
        let f = |u: f64| n_at_power(&p, u).expect("nonzero g_gamma");
        let (u_star, _) = golden_section_min(f, 1e-3 * u0, 1e3 * u0, 250);
        worst_u = worst_u.max((u_star - u0).abs() / u0);
        let (exact, _) = n_diss_limit(&p, true).expect("headroom");
        let (approx, _) = n_diss_limit(&p, false).expect("headroom");
        ordering_ok &= exact <= approx;
    }
    CriterionOutcome {
        id: 8,
        name: "power optimality",
        passed: worst_u < 1e-6 && ordering_ok,
        detail: format!(
            "worst |U*-U0|/U0={worst_u:.6e} over 100 draws (want <1e-6), exact minimum <= approximate: {ordering_ok}"
        ),
    }
}

/// Runs criteria 1–8 once.
pub fn run_criteria() -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ]
}

/// Canonical plain-text rendering, one line per criterion.
pub fn render(outcomes: &[CriterionOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&format!(
            "criterion {} ({}): {} - {}\n",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        ));
    }
    out
}

/// Runs the full suite: criteria 1–8 plus the determinism criterion,
/// which re-runs everything and compares the rendered reports
/// byte for byte.
pub fn run_all() -> Vec<CriterionOutcome> {
    let first = run_criteria();
    let second = run_criteria();
    let identical = render(&first) == render(&second);
    let mut out = first;
    out.push(CriterionOutcome {
        id: 9,
        name: "determinism",
        passed: identical,
        detail: format!("two in-process runs render byte-identical reports: {identical}"),
    });
    out
}
