//! Flat key/value configuration with dotted paths.
//!
//! Lines are `key = value`; `#` starts a comment. Frequencies and rates
//! are angular by default; `units = hertz` applies a single 2π
//! conversion at ingestion.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use optocool_core::cooling::{Deviations, QuadratureConfig};
use optocool_core::msi::{MsiDrive, MsiGeometry, SPEED_OF_LIGHT};
use optocool_core::params::{
    CavityParams, CouplingParams, DriveParams, MechParams, SystemParams,
};
use optocool_core::protocols::FeedbackParams;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Paths holding angular frequencies or rates, converted from Hz when
/// `units = hertz`.
const FREQUENCY_KEYS: &[&str] = &[
    "cavity.gamma",
    "cavity.gamma_int",
    "cavity.detuning",
    "cavity.fsr",
    "mech.omega_m",
    "mech.gamma_m",
    "mech.omega_m_eff",
    "coupling.g_omega",
    "coupling.g_gamma",
    "drive.omega_l",
    "deviations.d_detuning",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Angular,
    Hertz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: SweepScale,
}

/// The interferometer side of a configuration.
#[derive(Debug, Clone)]
pub struct MsiSetup {
    pub geometry: MsiGeometry,
    pub drive: MsiDrive,
    pub x_zpf: f64,
    pub gamma_int: f64,
    pub samples: usize,
    pub span: f64,
}

/// Fully parsed and unit-normalized run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    system: Option<SystemParams>,
    pub msi: Option<MsiSetup>,
    mech: Option<MechParams>,
    pub deviations: Option<Deviations>,
    pub feedback: Option<FeedbackParams>,
    pub sweep: Option<SweepSpec>,
    pub quadrature: QuadratureConfig,
    pub budget_target: f64,
    /// Normalized entries for the record echo, in sorted key order.
    echo: BTreeMap<String, String>,
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(format!("line {}: empty value for `{key}`", lineno + 1));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }
    build(map)
}

struct Reader {
    map: BTreeMap<String, String>,
    units: Units,
    echo: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn unit_scale(&self, key: &str) -> f64 {
        if self.units == Units::Hertz && FREQUENCY_KEYS.contains(&key) {
            TWO_PI
        } else {
            1.0
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, String> {
        let Some(raw) = self.take(key) else {
            return Ok(None);
        };
        let v = if raw == "infinite" || raw == "inf" {
            f64::INFINITY
        } else {
            raw.parse::<f64>()
                .map_err(|_| format!("key `{key}`: `{raw}` is not a number"))?
        };
        let v = v * self.unit_scale(key);
        self.echo.insert(key.to_string(), crate::emit::fmt_f64(v));
        Ok(Some(v))
    }

    fn f64_req(&mut self, key: &str) -> Result<f64, String> {
        self.f64_opt(key)?
            .ok_or_else(|| format!("missing required key `{key}`"))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, String> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, String> {
        let Some(raw) = self.take(key) else {
            return Ok(None);
        };
        let v = raw
            .parse::<usize>()
            .map_err(|_| format!("key `{key}`: `{raw}` is not a nonnegative integer"))?;
        self.echo.insert(key.to_string(), v.to_string());
        Ok(Some(v))
    }

    fn string_opt(&mut self, key: &str) -> Option<String> {
        let v = self.take(key);
        if let Some(ref s) = v {
            self.echo
                .insert(key.to_string(), format!("\"{}\"", crate::emit::escape(s)));
        }
        v
    }
}

const KNOWN_KEYS: &[&str] = &[
    "units",
    "cavity.gamma",
    "cavity.gamma_int",
    "cavity.detuning",
    "cavity.fsr",
    "mech.omega_m",
    "mech.gamma_m",
    "mech.n_th",
    "mech.omega_m_eff",
    "coupling.g_omega",
    "coupling.g_gamma",
    "drive.photon_number",
    "drive.u",
    "drive.omega_l",
    "msi.bs_t",
    "msi.bs_r",
    "msi.mem_t",
    "msi.mem_r",
    "msi.l_a",
    "msi.l",
    "msi.l_s",
    "msi.x",
    "msi.x_zpf",
    "msi.gamma_int",
    "msi.samples",
    "msi.span",
    "deviations.d_detuning",
    "deviations.d_power_rel",
    "deviations.d_ratio_rel",
    "feedback.eta_det",
    "feedback.n_imp",
    "sweep.parameter",
    "sweep.start",
    "sweep.stop",
    "sweep.count",
    "sweep.scale",
    "quadrature.rel_tol",
    "quadrature.peak_window_halfwidth",
    "quadrature.tail_extent",
    "quadrature.max_subdivisions",
    "budget.target_excess",
];

fn build(map: BTreeMap<String, String>) -> Result<RunConfig, String> {
    let unknown: Vec<String> = map
        .keys()
        .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(format!("unknown key(s): {}", unknown.join(", ")));
    }
    let units = match map.get("units").map(String::as_str) {
        None | Some("angular") => Units::Angular,
        Some("hertz") => Units::Hertz,
        Some(other) => return Err(format!("units = `{other}`: expected angular or hertz")),
    };
    let mut r = Reader {
        map,
        units,
        echo: BTreeMap::new(),
    };
    if let Some(u) = r.take("units") {
        r.echo.insert("units".into(), format!("\"{u}\""));
    }

    let has_cavity = r.map.keys().any(|k| k.starts_with("cavity.") || k.starts_with("coupling."));
    let has_msi = r.map.keys().any(|k| k.starts_with("msi."));
    if has_cavity && has_msi {
        return Err("config mixes cavity.*/coupling.* with msi.*: supply exactly one system description".into());
    }

    let mech = if r.map.keys().any(|k| k.starts_with("mech.")) {
        let m = MechParams {
            omega_m: r.f64_req("mech.omega_m")?,
            gamma_m: r.f64_req("mech.gamma_m")?,
            n_th: r.f64_req("mech.n_th")?,
        };
        Some(m)
    } else {
        None
    };
    let omega_m_eff = r.f64_opt("mech.omega_m_eff")?;

    let photon_number = r.f64_opt("drive.photon_number")?;
    let drive_u = r.f64_opt("drive.u")?;
    if photon_number.is_some() && drive_u.is_some() {
        return Err("supply drive.photon_number or drive.u, not both".into());
    }
    let omega_l = r.f64_opt("drive.omega_l")?;

    let system = if has_cavity {
        let cavity = CavityParams {
            gamma: r.f64_req("cavity.gamma")?,
            gamma_int: r.f64_or("cavity.gamma_int", 0.0)?,
            detuning: r.f64_or("cavity.detuning", 0.0)?,
            fsr: r.f64_or("cavity.fsr", f64::INFINITY)?,
        };
        let coupling = CouplingParams {
            g_omega: r.f64_req("coupling.g_omega")?,
            g_gamma: r.f64_req("coupling.g_gamma")?,
        };
        let mech = mech
            .clone()
            .ok_or_else(|| "cavity.* configs require mech.omega_m, mech.gamma_m, mech.n_th".to_string())?;
        let mut p = SystemParams::new(cavity, mech, coupling, DriveParams { photon_number: 0.0 });
        p.omega_m_override = omega_m_eff;
        if let Some(n) = photon_number {
            p.drive.photon_number = n;
        }
        if let Some(u) = drive_u {
            p.set_u(u).map_err(|e| e.to_string())?;
        }
        Some(p)
    } else {
        None
    };

    let msi = if has_msi {
        let bs_t = r.f64_opt("msi.bs_t")?;
        let bs_r = r.f64_opt("msi.bs_r")?;
        let (bs_t, bs_r) = complete_pair(bs_t, bs_r, "msi.bs_t", "msi.bs_r")?;
        let mem_t = r.f64_opt("msi.mem_t")?;
        let mem_r = r.f64_opt("msi.mem_r")?;
        let (mem_t, mem_r) = complete_pair(mem_t, mem_r, "msi.mem_t", "msi.mem_r")?;
        let geometry = MsiGeometry {
            bs_t,
            bs_r,
            mem_t,
            mem_r,
            l_a: r.f64_req("msi.l_a")?,
            l: r.f64_req("msi.l")?,
            l_s: r.f64_req("msi.l_s")?,
            x: r.f64_req("msi.x")?,
        };
        let omega_l =
            omega_l.ok_or_else(|| "msi.* configs require drive.omega_l".to_string())?;
        let photon_number = photon_number
            .ok_or_else(|| "msi.* configs require drive.photon_number".to_string())?;
        Some(MsiSetup {
            geometry,
            drive: MsiDrive {
                omega_l,
                photon_number,
            },
            x_zpf: r.f64_req("msi.x_zpf")?,
            gamma_int: r.f64_or("msi.gamma_int", 0.0)?,
            samples: r.usize_opt("msi.samples")?.unwrap_or(41),
            span: r.f64_or("msi.span", 2.0)?,
        })
    } else {
        None
    };

    let deviations = {
        let d = Deviations {
            d_detuning: r.f64_or("deviations.d_detuning", 0.0)?,
            d_power_rel: r.f64_or("deviations.d_power_rel", 0.0)?,
            d_ratio_rel: r.f64_or("deviations.d_ratio_rel", 0.0)?,
        };
        if d.d_detuning != 0.0 || d.d_power_rel != 0.0 || d.d_ratio_rel != 0.0 {
            Some(d)
        } else {
            None
        }
    };

    let feedback = match r.f64_opt("feedback.eta_det")? {
        Some(eta_det) => Some(FeedbackParams {
            eta_det,
            n_imp: r.f64_opt("feedback.n_imp")?,
        }),
        None => {
            if r.f64_opt("feedback.n_imp")?.is_some() {
                return Err("feedback.n_imp given without feedback.eta_det".into());
            }
            None
        }
    };

    let sweep = match r.string_opt("sweep.parameter") {
        Some(parameter) => {
            let scale = match r.string_opt("sweep.scale").as_deref() {
                None | Some("linear") => SweepScale::Linear,
                Some("log") => SweepScale::Log,
                Some(other) => {
                    return Err(format!("sweep.scale = `{other}`: expected linear or log"))
                }
            };
            let unit = if units == Units::Hertz && FREQUENCY_KEYS.contains(&parameter.as_str()) {
                TWO_PI
            } else {
                1.0
            };
            let start = r.f64_req("sweep.start")? * unit;
            let stop = r.f64_req("sweep.stop")? * unit;
            let count = r
                .usize_opt("sweep.count")?
                .ok_or_else(|| "missing required key `sweep.count`".to_string())?;
            if !(2..=10_000_000).contains(&count) {
                return Err(format!("sweep.count = {count} must lie in [2, 1e7]"));
            }
            if scale == SweepScale::Log && (start <= 0.0 || stop <= 0.0) {
                return Err("log-scaled sweeps need positive start/stop".into());
            }
            Some(SweepSpec {
                parameter,
                start,
                stop,
                count,
                scale,
            })
        }
        None => None,
    };

    let quadrature = {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            rel_tol: r.f64_or("quadrature.rel_tol", d.rel_tol)?,
            peak_window_halfwidth: r
                .f64_or("quadrature.peak_window_halfwidth", d.peak_window_halfwidth)?,
            tail_extent: r.f64_or("quadrature.tail_extent", d.tail_extent)?,
            max_subdivisions: r
                .usize_opt("quadrature.max_subdivisions")?
                .unwrap_or(d.max_subdivisions),
        }
    };
    let budget_target = r.f64_or("budget.target_excess", 1.0)?;

    if !r.map.is_empty() {
        let unknown: Vec<String> = r.map.keys().cloned().collect();
        return Err(format!("unknown key(s): {}", unknown.join(", ")));
    }

    Ok(RunConfig {
        system,
        msi,
        mech,
        deviations,
        feedback,
        sweep,
        quadrature,
        budget_target,
        echo: r.echo,
    })
}

fn complete_pair(
    t: Option<f64>,
    r: Option<f64>,
    t_key: &str,
    r_key: &str,
) -> Result<(f64, f64), String> {
    match (t, r) {
        (Some(t), Some(r)) => Ok((t, r)),
        (Some(t), None) => Ok((t, (1.0 - t * t).max(0.0).sqrt())),
        (None, Some(r)) => Ok(((1.0 - r * r).max(0.0).sqrt(), r)),
        (None, None) => Err(format!("missing `{t_key}` (or `{r_key}`)")),
    }
}

impl RunConfig {
    /// Effective one-sided-cavity parameters: direct, or mapped from the
    /// interferometer geometry.
    pub fn system_params(&self) -> Result<SystemParams, String> {
        if let Some(ref p) = self.system {
            return Ok(p.clone());
        }
        let Some(ref m) = self.msi else {
            return Err("config supplies neither cavity.*/coupling.* nor msi.*".into());
        };
        let mech = self
            .mech
            .clone()
            .ok_or_else(|| "msi-driven analysis requires mech.* parameters".to_string())?;
        let k = m.drive.omega_l / SPEED_OF_LIGHT;
        let (gamma, omega_c, fsr) =
            optocool_core::msi::cavity_from_msi(&m.geometry, k).map_err(|e| e.to_string())?;
        let coupling = optocool_core::msi::couplings_from_msi(&m.geometry, k, m.x_zpf)
            .map_err(|e| e.to_string())?;
        Ok(SystemParams::new(
            CavityParams {
                gamma,
                gamma_int: m.gamma_int,
                detuning: m.drive.omega_l - omega_c,
                fsr,
            },
            mech,
            coupling,
            DriveParams {
                photon_number: m.drive.photon_number,
            },
        ))
    }

    /// Normalized config entries as a JSON object (sorted keys).
    pub fn echo_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.echo.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "\"{}\":{}", crate::emit::escape(k), v);
        }
        out.push('}');
        out
    }
}

/// Grid values for a sweep, endpoints included, in input order.
pub fn sweep_grid(spec: &SweepSpec) -> Vec<f64> {
    let n = spec.count;
    let mut out = Vec::with_capacity(n);
    match spec.scale {
        SweepScale::Linear => {
            let step = (spec.stop - spec.start) / (n - 1) as f64;
            for i in 0..n {
                out.push(spec.start + step * i as f64);
            }
        }
        SweepScale::Log => {
            let (la, lb) = (spec.start.ln(), spec.stop.ln());
            let step = (lb - la) / (n - 1) as f64;
            for i in 0..n {
                out.push((la + step * i as f64).exp());
            }
        }
    }
    out
}

/// Writes `value` into the system parameter addressed by a dotted path.
pub fn apply_path(p: &mut SystemParams, path: &str, value: f64) -> Result<(), String> {
    match path {
        "cavity.gamma" => p.cavity.gamma = value,
        "cavity.gamma_int" => p.cavity.gamma_int = value,
        "cavity.detuning" => p.cavity.detuning = value,
        "cavity.fsr" => p.cavity.fsr = value,
        "mech.omega_m" => p.mech.omega_m = value,
        "mech.gamma_m" => p.mech.gamma_m = value,
        "mech.n_th" => p.mech.n_th = value,
        "mech.omega_m_eff" => p.omega_m_override = Some(value),
        "coupling.g_omega" => p.coupling.g_omega = value,
        "coupling.g_gamma" => p.coupling.g_gamma = value,
        "drive.photon_number" => p.drive.photon_number = value,
        "drive.u" => p.set_u(value).map_err(|e| e.to_string())?,
        other => return Err(format!("sweep.parameter `{other}` is not a sweepable path")),
    }
    Ok(())
}
