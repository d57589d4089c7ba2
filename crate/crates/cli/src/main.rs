//! `optocool`: batch evaluation of the dissipative-coupling-assisted
//! cooling protocol from flat config files, with deterministic JSON/CSV
//! output.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use optocool_core::cooling::{
    self, n_quadrature, n_with_corrections, CoolingResult,
};
use optocool_core::design;
use optocool_core::msi::{self, SPEED_OF_LIGHT};
use optocool_core::params::{SpectrumKind, SystemParams};
use optocool_core::protocols;
use optocool_core::selftest;
use optocool_core::Error as CoreError;

use config::RunConfig;
use emit::{fmt_f64, json_array, json_str_array, JsonObj};

const SCHEMA_VERSION: &str = "1";

#[derive(Parser)]
#[command(
    name = "optocool",
    about = "Cooling limits, spectra, operating points and tolerance budgets for dissipative-coupling-assisted optomechanical cooling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phonon occupation (closed form and quadrature) plus validity.
    Analyze(RunArgs),
    /// Optimal detuning, drive and coupling ratio with the predicted limit.
    Optimize(RunArgs),
    /// Setting-error budget holding a target excess occupation.
    Budget(RunArgs),
    /// Evaluate a parameter grid; one record per point, input order.
    Sweep(RunArgs),
    /// Map an interferometer geometry to effective cavity parameters and
    /// sample the exact vs reduced force spectrum.
    Msi(RunArgs),
    /// Compare dissipative, dispersive and feedback cooling.
    Compare(RunArgs),
    /// Run the built-in acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the flat key=value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; csv applies to sweeps only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Broaden all cavity Lorentzians by the internal loss
    /// (γ → γ + γ_int) instead of treating it only as a noise port.
    #[arg(long)]
    strict_loss: bool,
    /// Use the exact power optimum instead of the deep-cooling
    /// approximations.
    #[arg(long)]
    exact_min: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Process failure carrying the exit status mandated for its class:
/// 2 config, 3 physics domain, 4 quadrature convergence.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::InvalidParam(_) => 2,
            CoreError::QuadratureNonConvergence { .. } => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("optocool: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Analyze(a) => emit_record(&a, "analyze", analyze),
        Command::Optimize(a) => emit_record(&a, "optimize", optimize),
        Command::Budget(a) => emit_record(&a, "budget", budget),
        Command::Sweep(a) => sweep(&a),
        Command::Msi(a) => emit_record(&a, "msi", msi_map),
        Command::Compare(a) => emit_record(&a, "compare", compare),
        Command::Selftest(a) => selftest_cmd(&a),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Failure::config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    config::parse(&text).map_err(Failure::config)
}

fn system_for(args: &RunArgs, cfg: &RunConfig) -> Result<SystemParams, Failure> {
    let mut p = cfg.system_params().map_err(Failure::config)?;
    p.strict_loss = args.strict_loss;
    p.validate().map_err(Failure::from)?;
    Ok(p)
}

fn write_output(out: Option<&PathBuf>, payload: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, payload).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn record(subcommand: &str, args: &RunArgs, cfg: &RunConfig, results: String) -> String {
    let flags = JsonObj::new()
        .bool("strict_loss", args.strict_loss)
        .bool("exact_min", args.exact_min)
        .build();
    let mut s = JsonObj::new()
        .str("schema_version", SCHEMA_VERSION)
        .str("subcommand", subcommand)
        .raw("config", &cfg.echo_json())
        .raw("flags", &flags)
        .raw("results", &results)
        .build();
    s.push('\n');
    s
}

fn emit_record(
    args: &RunArgs,
    name: &str,
    body: fn(&RunArgs, &RunConfig) -> Result<String, Failure>,
) -> Result<ExitCode, Failure> {
    if args.format == Format::Csv {
        return Err(Failure::config("csv format is only available for sweep"));
    }
    let cfg = load(args)?;
    let results = body(args, &cfg)?;
    write_output(args.out.as_ref(), &record(name, args, &cfg, results))?;
    Ok(ExitCode::SUCCESS)
}

fn cooling_json(r: &CoolingResult) -> String {
    JsonObj::new()
        .num("n_total", r.n_total)
        .num("n_thermal_residual", r.n_thermal_residual)
        .num("n_backaction", r.n_backaction)
        .num("n_int", r.n_int)
        .num("n_delta", r.n_delta)
        .num("n_g", r.n_g)
        .num("n_l", r.n_l)
        .num("gamma_m_eff", r.gamma_m_eff)
        .str(
            "method",
            match r.method {
                cooling::Method::Analytic => "analytic",
                cooling::Method::Quadrature => "quadrature",
            },
        )
        .bool("weak_coupling_ok", r.weak_coupling_ok)
        .bool("underdamped_ok", r.underdamped_ok)
        .build()
}

fn validity_json(v: &design::ValidityReport) -> String {
    JsonObj::new()
        .num("weak_coupling_margin", v.weak_coupling_margin)
        .num("underdamped_margin", v.underdamped_margin)
        .num("criterion_1", v.criterion_1)
        .num("criterion_2", v.criterion_2)
        .num("depth_margin", v.depth_margin)
        .num("depth_margin_damping", v.depth_margin_damping)
        .str("weak_coupling", v.weak_coupling.as_str())
        .str("underdamped", v.underdamped.as_str())
        .str("criterion_1_flag", v.criterion_1_flag.as_str())
        .str("criterion_2_flag", v.criterion_2_flag.as_str())
        .str("depth_flag", v.depth_flag.as_str())
        .str("depth_damping_flag", v.depth_damping_flag.as_str())
        .build()
}

/// Warnings for deviations outside the quadratic-correction domain
/// (relative size above 0.3).
fn perturbative_warnings(p: &SystemParams, cfg: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(dev) = &cfg.deviations {
        let delta = p.cavity.detuning;
        if delta != 0.0 && (dev.d_detuning / delta).abs() > 0.3 {
            out.push(format!(
                "deviations.d_detuning/|detuning| = {} exceeds the 0.3 perturbative-domain threshold",
                fmt_f64((dev.d_detuning / delta).abs())
            ));
        }
        if dev.d_power_rel.abs() > 0.3 {
            out.push("deviations.d_power_rel exceeds the 0.3 perturbative-domain threshold".into());
        }
        if dev.d_ratio_rel.abs() > 0.3 {
            out.push("deviations.d_ratio_rel exceeds the 0.3 perturbative-domain threshold".into());
        }
    }
    out
}

fn analyze(_args: &RunArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = system_for(_args, cfg)?;
    let analytic = n_with_corrections(&p, cfg.deviations.as_ref())?;
    let quad = n_quadrature(&p, cooling::inferred_kind(&p), &cfg.quadrature)?;
    let validity = design::validity(&p)?;
    Ok(JsonObj::new()
        .raw("analytic", &cooling_json(&analytic))
        .raw("quadrature", &cooling_json(&quad))
        .raw("validity", &validity_json(&validity))
        .raw(
            "warnings",
            &json_str_array(&perturbative_warnings(&p, cfg)),
        )
        .build())
}

fn optimize(args: &RunArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = system_for(args, cfg)?;
    let op = design::optimize(&p, false, args.exact_min)?;
    Ok(JsonObj::new()
        .num("detuning_star", op.detuning_star)
        .num("u0", op.u0)
        .num("photon_number", op.photon_number)
        .num("ratio_star", op.ratio_star)
        .num("predicted_n", op.predicted_n)
        .bool("g_close_to_g0", op.g_close_to_g0)
        .build())
}

fn budget(args: &RunArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = system_for(args, cfg)?;
    let b = design::tolerance_budget(&p, cfg.budget_target)?;
    Ok(JsonObj::new()
        .num("target_excess", cfg.budget_target)
        .num("max_rel_detuning_error", b.max_rel_detuning_error)
        .num("max_rel_power_error", b.max_rel_power_error)
        .num("max_rel_ratio_error", b.max_rel_ratio_error)
        .num("max_loss_ratio", b.max_loss_ratio)
        .num("max_fsr_ratio", b.max_fsr_ratio)
        .build())
}

fn compare(args: &RunArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = system_for(args, cfg)?;
    let fb = cfg
        .feedback
        .clone()
        .ok_or_else(|| Failure::config("compare requires feedback.eta_det"))?;
    let rep = protocols::compare(&p, &fb)?;
    let entry = |e: &protocols::ProtocolEntry| {
        let mut o = JsonObj::new().str("name", e.name).num("n_limit", e.n_limit);
        o = match e.photon_number {
            Some(n) => o.num("photon_number", n),
            None => o.raw("photon_number", "null"),
        };
        o.str("note", &e.note).build()
    };
    Ok(JsonObj::new()
        .raw("dissipative", &entry(&rep.dissipative))
        .raw("dispersive", &entry(&rep.dispersive))
        .raw("feedback", &entry(&rep.feedback))
        .num("loss_ratio_bound", rep.loss_ratio_bound)
        .num("photon_gain_same_target", rep.photon_gain_same_target)
        .raw("warnings", &json_str_array(&rep.warnings))
        .build())
}

fn msi_map(_args: &RunArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let setup = cfg
        .msi
        .as_ref()
        .ok_or_else(|| Failure::config("msi subcommand requires msi.* keys"))?;
    let k = setup.drive.omega_l / SPEED_OF_LIGHT;
    let mirror = msi::effective_mirror(&setup.geometry, k)?;
    let (gamma, omega_c, fsr) = msi::cavity_from_msi(&setup.geometry, k)?;
    let coupling = msi::couplings_from_msi(&setup.geometry, k, setup.x_zpf)?;
    let detuning = setup.drive.omega_l - omega_c;

    // Reduced-model reference for the sample table.
    let mapped = {
        let mut p = SystemParams::new(
            optocool_core::params::CavityParams {
                gamma,
                gamma_int: setup.gamma_int,
                detuning,
                fsr,
            },
            optocool_core::params::MechParams {
                omega_m: 1.0,
                gamma_m: 1.0,
                n_th: 0.0,
            },
            coupling.clone(),
            optocool_core::params::DriveParams {
                photon_number: setup.drive.photon_number,
            },
        );
        p.strict_loss = _args.strict_loss;
        p
    };

    let mut samples = Vec::with_capacity(setup.samples);
    for i in 0..setup.samples {
        let frac = if setup.samples == 1 {
            0.0
        } else {
            2.0 * i as f64 / (setup.samples - 1) as f64 - 1.0
        };
        let w = frac * setup.span * gamma;
        let exact = msi::s_ff_exact_msi(w, &setup.geometry, &setup.drive, setup.x_zpf)?;
        let reduced = optocool_core::spectra::s_ff(w, &mapped, SpectrumKind::Multimode)?;
        let rel_err = if reduced != 0.0 {
            (exact - reduced).abs() / reduced
        } else {
            f64::INFINITY
        };
        samples.push(
            JsonObj::new()
                .num("omega", w)
                .num("exact", exact)
                .num("reduced", reduced)
                .num("rel_err", rel_err)
                .build(),
        );
    }

    Ok(JsonObj::new()
        .num("gamma", gamma)
        .num("omega_c", omega_c)
        .num("fsr", fsr)
        .num("detuning", detuning)
        .num("g_omega", coupling.g_omega)
        .num("g_gamma", coupling.g_gamma)
        .num("tau", mirror.tau)
        .num("mu", mirror.mu)
        .raw("samples", &json_array(samples))
        .build())
}

fn sweep(args: &RunArgs) -> Result<ExitCode, Failure> {
    let cfg = load(args)?;
    let spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| Failure::config("sweep requires sweep.parameter/start/stop/count"))?;
    let base = system_for(args, &cfg)?;
    // Validate the path once up front.
    config::apply_path(&mut base.clone(), &spec.parameter, spec.start)
        .map_err(Failure::config)?;

    let grid = config::sweep_grid(&spec);
    let threads = std::env::var("OPTOCOOL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(format!("cannot build thread pool: {e}")))?;

    let deviations = cfg.deviations.clone();
    let evaluated: Vec<Result<CoolingResult, CoreError>> = pool.install(|| {
        grid.par_iter()
            .map(|&value| {
                let mut p = base.clone();
                config::apply_path(&mut p, &spec.parameter, value)
                    .expect("path validated above");
                n_with_corrections(&p, deviations.as_ref())
            })
            .collect()
    });

    // Records are emitted in grid order regardless of evaluation order.
    let mut results = Vec::with_capacity(grid.len());
    for (value, r) in grid.iter().zip(evaluated) {
        match r {
            Ok(cr) => results.push((*value, cr)),
            Err(e) => {
                let mut f = Failure::from(e);
                f.message = format!("at {} = {}: {}", spec.parameter, fmt_f64(*value), f.message);
                return Err(f);
            }
        }
    }

    let payload = match args.format {
        Format::Json => {
            let points = results.iter().map(|(v, cr)| {
                JsonObj::new()
                    .num("value", *v)
                    .raw("analytic", &cooling_json(cr))
                    .build()
            });
            let sweep_obj = JsonObj::new()
                .str("parameter", &spec.parameter)
                .str(
                    "scale",
                    match spec.scale {
                        config::SweepScale::Linear => "linear",
                        config::SweepScale::Log => "log",
                    },
                )
                .raw("points", &json_array(points.collect::<Vec<_>>()))
                .build();
            record("sweep", args, &cfg, JsonObj::new().raw("sweep", &sweep_obj).build())
        }
        Format::Csv => {
            let mut out = format!(
                "{},n_total,n_thermal_residual,n_backaction,n_int,n_delta,n_g,n_l,gamma_m_eff,weak_coupling_ok,underdamped_ok\n",
                spec.parameter
            );
            for (v, cr) in &results {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    fmt_f64(*v),
                    fmt_f64(cr.n_total),
                    fmt_f64(cr.n_thermal_residual),
                    fmt_f64(cr.n_backaction),
                    fmt_f64(cr.n_int),
                    fmt_f64(cr.n_delta),
                    fmt_f64(cr.n_g),
                    fmt_f64(cr.n_l),
                    fmt_f64(cr.gamma_m_eff),
                    cr.weak_coupling_ok,
                    cr.underdamped_ok
                ));
            }
            out
        }
    };
    write_output(args.out.as_ref(), &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn selftest_cmd(args: &SelftestArgs) -> Result<ExitCode, Failure> {
    let outcomes = selftest::run_all();
    let all_passed = outcomes.iter().all(|o| o.passed);
    let items = outcomes.iter().map(|o| {
        JsonObj::new()
            .int("id", o.id as u64)
            .str("name", o.name)
            .bool("passed", o.passed)
            .str("detail", &o.detail)
            .build()
    });
    let results = JsonObj::new()
        .raw("criteria", &json_array(items.collect::<Vec<_>>()))
        .bool("all_passed", all_passed)
        .build();
    let mut payload = JsonObj::new()
        .str("schema_version", SCHEMA_VERSION)
        .str("subcommand", "selftest")
        .raw("config", "{}")
        .raw("results", &results)
        .build();
    payload.push('\n');
    write_output(args.out.as_ref(), &payload)?;
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
