//! Shared fixtures for the benchmarks.

use optocool_core::cooling::n_diss_limit;
use optocool_core::params::{
    CavityParams, CouplingParams, DriveParams, MechParams, SystemParams,
};

/// Case-study system at its optimized settings and drive.
pub fn case_study_system() -> SystemParams {
    let gamma = 16.0;
    let g_gamma = 1e-3 * gamma;
    let mut p = SystemParams::new(
        CavityParams {
            gamma,
            gamma_int: 1.6e-3,
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
    let (_, u0) = n_diss_limit(&p, true).expect("cooling headroom");
    p.set_u(u0).expect("nonzero g_gamma");
    p
}
