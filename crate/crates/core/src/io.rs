//! File formats: scenario config (TOML), wind traces and time series (CSV),
//! curve tables (TOML) and metrics (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aero::TurbineParams;
use crate::control::{ControlMode, ControllerConfig, PitchCompensation};
use crate::curves::{fit_deloaded_constant, CurveSet, LatchConfig, PitchTablePoint, DEFAULT_FIT_WINDS};
use crate::engine::{
    bundled_case6_trace, case_preset, CaseId, LoadEvent, Metrics, ScenarioConfig, Timeseries,
    WindProfile,
};
use crate::grid::PlantParams;

pub const SCHEMA_VERSION: u32 = 1;
pub const WIND_TRACE_HEADER: &str = "t_s,v_mps";

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn from_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let de = toml::Deserializer::parse(text).map_err(|e| InputError::Field {
        path: "(document)".into(),
        message: e.message().to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        InputError::Field {
            path: if path == "." { "(root)".into() } else { path },
            message: e.into_inner().message().to_string(),
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    controller: ControllerSection,
    turbine: Option<TurbineParams>,
    curves: Option<CurveSet>,
    #[serde(default)]
    grid: PlantParams,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    case: Option<String>,
    name: Option<String>,
    duration: Option<f64>,
    dt: Option<f64>,
    output_decimation: Option<usize>,
    wind: Option<WindSection>,
    load_events: Option<Vec<LoadEvent>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum WindSection {
    Constant {
        v: f64,
    },
    Ramp {
        v0: f64,
        v1: f64,
        t_start: f64,
        duration: f64,
    },
    /// `path` is relative to the config file; `bundled:case6` selects the
    /// shipped trace.
    Trace {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Mppt,
    Traditional,
    Proposed,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ControllerSection {
    mode: ModeName,
    k_v: f64,
    inv_r: f64,
    washout_tw: f64,
    nominal_freq: f64,
    pitch_kp: f64,
    pitch_ki: f64,
    freq_deadband: f64,
    latch: LatchConfig,
    pitch_compensation: PitchCompensation,
    area_v2: f64,
    area_v3: f64,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let base = ControllerConfig::default();
        let ControlMode::Traditional { k_v, inv_r } = ControlMode::LARGE_GAINS else {
            unreachable!()
        };
        Self {
            mode: ModeName::Proposed,
            k_v,
            inv_r,
            washout_tw: base.washout_tw,
            nominal_freq: base.nominal_freq,
            pitch_kp: base.pitch_kp,
            pitch_ki: base.pitch_ki,
            freq_deadband: base.freq_deadband,
            latch: base.latch,
            pitch_compensation: base.pitch_compensation,
            area_v2: base.area_v2,
            area_v3: base.area_v3,
        }
    }
}

impl ControllerSection {
    fn resolve(&self) -> ControllerConfig {
        let mode = match self.mode {
            ModeName::Mppt => ControlMode::Mppt,
            ModeName::Traditional => ControlMode::Traditional {
                k_v: self.k_v,
                inv_r: self.inv_r,
            },
            ModeName::Proposed => ControlMode::Proposed,
        };
        ControllerConfig {
            mode,
            washout_tw: self.washout_tw,
            nominal_freq: self.nominal_freq,
            pitch_kp: self.pitch_kp,
            pitch_ki: self.pitch_ki,
            freq_deadband: self.freq_deadband,
            latch: self.latch,
            pitch_compensation: self.pitch_compensation,
            area_v2: self.area_v2,
            area_v3: self.area_v3,
        }
    }
}

fn section_has(table: &toml::Table, section: &str, keys: &[&str]) -> bool {
    table
        .get(section)
        .and_then(|v| v.as_table())
        .is_some_and(|t| keys.iter().any(|k| t.contains_key(*k)))
}

/// Parses a scenario config. Trace paths are resolved against `base_dir`;
/// with `None`, only the bundled trace is available.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ScenarioConfig, InputError> {
    let file: ConfigFile = from_toml(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(InputError::Field {
            path: "schema_version".into(),
            message: format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            ),
        });
    }
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| InputError::Field {
        path: "(document)".into(),
        message: e.message().to_string(),
    })?;

    let controller = file.controller.resolve();
    let mut cfg = match &file.scenario.case {
        Some(id) => {
            let id: CaseId = id.parse().map_err(|e: crate::engine::EngineError| InputError::Field {
                path: "scenario.case".into(),
                message: e.to_string(),
            })?;
            case_preset(id, controller.mode)
        }
        None => ScenarioConfig::new("custom", WindProfile::Constant { v: 8.0 }, controller.mode),
    };
    cfg.controller = controller;

    let mut turbine = file.turbine.unwrap_or_default();
    let field = |path: &str, e: &dyn std::fmt::Display| InputError::Field {
        path: path.into(),
        message: e.to_string(),
    };
    if !section_has(&raw, "turbine", &["omega_base_mech", "power_calibration"]) {
        // Calibration divides by the geometry, so check it first.
        turbine.omega_base_mech = 1.0;
        turbine.power_calibration = 1.0;
        turbine.validate().map_err(|e| field("turbine", &e))?;
        turbine.calibrate();
    }
    turbine.validate().map_err(|e| field("turbine", &e))?;
    let mut curves = match file.curves {
        Some(c) if section_has(&raw, "curves", &["k_opt", "k_de", "k_de80"]) => c,
        Some(c) => {
            let fit = |reserve| fit_deloaded_constant(&turbine, reserve, DEFAULT_FIT_WINDS);
            let k_de = fit(c.d_reserve).map_err(|e| field("curves.d_reserve", &e))?.k;
            let k_de80 = fit(2.0 * c.d_reserve).map_err(|e| field("curves.d_reserve", &e))?.k;
            CurveSet {
                k_opt: crate::aero::BASE_OPTIMUM_POWER_PU / crate::aero::BASE_ROTOR_SPEED_PU.powi(3),
                k_de,
                k_de80,
                ..c
            }
        }
        None => CurveSet::calibrated(&turbine).map_err(|e| field("turbine", &e))?,
    };
    curves.sync_limits(&turbine);
    cfg.turbine = turbine;
    cfg.curves = curves;
    cfg.plant = file.grid;

    let s = file.scenario;
    if let Some(name) = s.name {
        cfg.name = name;
    }
    if let Some(d) = s.duration {
        cfg.duration = d;
    }
    if let Some(dt) = s.dt {
        cfg.dt = dt;
    }
    if let Some(n) = s.output_decimation {
        cfg.output_decimation = n;
    }
    if let Some(events) = s.load_events {
        cfg.load_events = events;
    }
    if let Some(w) = s.wind {
        cfg.wind = match w {
            WindSection::Constant { v } => WindProfile::Constant { v },
            WindSection::Ramp {
                v0,
                v1,
                t_start,
                duration,
            } => WindProfile::Ramp {
                v0,
                v1,
                t_start,
                duration,
            },
            WindSection::Trace { path } => load_trace_ref(&path, base_dir)?,
        };
    }
    cfg.validate().map_err(|e| InputError::Invalid(e.to_string()))?;
    Ok(cfg)
}

fn load_trace_ref(path: &str, base_dir: Option<&Path>) -> Result<WindProfile, InputError> {
    if path == "bundled:case6" {
        return Ok(WindProfile::Trace {
            source: path.to_string(),
            points: bundled_case6_trace(),
        });
    }
    let Some(base) = base_dir else {
        return Err(InputError::Field {
            path: "scenario.wind.path".into(),
            message: "external trace files need a config file location".into(),
        });
    };
    let full = base.join(path);
    let text = std::fs::read_to_string(&full).map_err(|source| InputError::Io {
        path: full.display().to_string(),
        source,
    })?;
    let points = parse_wind_trace(&text).map_err(|e| InputError::Invalid(format!("{}: {e}", full.display())))?;
    Ok(WindProfile::Trace {
        source: path.to_string(),
        points,
    })
}

/// Reads a config file from disk, resolving traces next to it.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, path.parent())
}

fn csv_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64, InputError> {
    let v: f64 = field.trim().parse().map_err(|_| InputError::Csv {
        line,
        message: format!("{what}: `{}` is not a number", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(InputError::Csv {
            line,
            message: format!("{what} must be finite"),
        });
    }
    Ok(v)
}

/// Two-column `t_s,v_mps` trace with strictly increasing time.
pub fn parse_wind_trace(text: &str) -> Result<Vec<(f64, f64)>, InputError> {
    let mut lines = csv_lines(text);
    match lines.next() {
        Some((_, h)) if h.trim() == WIND_TRACE_HEADER => {}
        Some((line, h)) => {
            return Err(InputError::Csv {
                line,
                message: format!("expected header `{WIND_TRACE_HEADER}`, found `{h}`"),
            })
        }
        None => return Err(InputError::Csv {
            line: 1,
            message: "empty wind trace".into(),
        }),
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (line, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 2 {
            return Err(InputError::Csv {
                line,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let t = parse_number(cols[0], line, "t_s")?;
        let v = parse_number(cols[1], line, "v_mps")?;
        if v < 0.0 {
            return Err(InputError::Csv {
                line,
                message: "wind speed must be >= 0".into(),
            });
        }
        if let Some(&(prev, _)) = points.last() {
            if !(t > prev) {
                return Err(InputError::Csv {
                    line,
                    message: format!("time {t} does not increase past {prev}"),
                });
            }
        }
        points.push((t, v));
    }
    if points.len() < 2 {
        return Err(InputError::Csv {
            line: 1,
            message: "wind trace needs at least two samples".into(),
        });
    }
    Ok(points)
}

/// `%.9g`-style formatting: nine significant digits, trailing zeros removed.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn timeseries_csv(ts: &Timeseries) -> String {
    let mut out = String::with_capacity(ts.len() * 96);
    out.push_str(&Timeseries::HEADER.join(","));
    out.push('\n');
    for i in 0..ts.len() {
        let row = [
            ts.t[i],
            ts.f_hz[i],
            ts.p_wind_sys[i],
            ts.p_wind_wt[i],
            ts.omega_r[i],
            ts.beta_deg[i],
            ts.p_thermal[i],
            ts.p_hydro[i],
        ];
        for x in row {
            out.push_str(&format_g9(x));
            out.push(',');
        }
        out.push(if ts.support[i] { '1' } else { '0' });
        out.push('\n');
    }
    out
}

/// Parses a CSV written by [`timeseries_csv`]; the header must match exactly.
pub fn parse_timeseries_csv(text: &str) -> Result<Timeseries, InputError> {
    let mut lines = csv_lines(text);
    let expected = Timeseries::HEADER.join(",");
    match lines.next() {
        Some((_, h)) if h.trim() == expected => {}
        Some((line, h)) => {
            return Err(InputError::Csv {
                line,
                message: format!("expected header `{expected}`, found `{h}`"),
            })
        }
        None => {
            return Err(InputError::Csv {
                line: 1,
                message: "empty time series".into(),
            })
        }
    }
    let mut ts = Timeseries::default();
    for (line, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != Timeseries::HEADER.len() {
            return Err(InputError::Csv {
                line,
                message: format!("expected {} columns, found {}", Timeseries::HEADER.len(), cols.len()),
            });
        }
        let mut nums = [0.0; 8];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = parse_number(cols[k], line, Timeseries::HEADER[k])?;
        }
        let support = match cols[8].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(InputError::Csv {
                    line,
                    message: format!("support must be 0 or 1, found `{other}`"),
                })
            }
        };
        if let Some(&prev) = ts.t.last() {
            if !(nums[0] > prev) {
                return Err(InputError::Csv {
                    line,
                    message: "time must increase".into(),
                });
            }
        }
        ts.t.push(nums[0]);
        ts.f_hz.push(nums[1]);
        ts.p_wind_sys.push(nums[2]);
        ts.p_wind_wt.push(nums[3]);
        ts.omega_r.push(nums[4]);
        ts.beta_deg.push(nums[5]);
        ts.p_thermal.push(nums[6]);
        ts.p_hydro.push(nums[7]);
        ts.support.push(support);
    }
    if ts.is_empty() {
        return Err(InputError::Csv {
            line: 2,
            message: "time series has no rows".into(),
        });
    }
    Ok(ts)
}

pub fn metrics_json(m: &Metrics) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("metrics serialise");
    s.push('\n');
    s
}

/// Fitted constants consumed by `run --curves`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveTable {
    pub schema_version: u32,
    pub reserve: f64,
    pub k_opt: f64,
    pub k_de: f64,
    pub k_de80: f64,
    pub pitch_compensation: PitchCompensation,
    #[serde(default)]
    pub pitch_table: Vec<PitchTablePoint>,
}

impl CurveTable {
    /// Installs the constants into a scenario.
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        cfg.curves.k_opt = self.k_opt;
        cfg.curves.k_de = self.k_de;
        cfg.curves.k_de80 = self.k_de80;
        cfg.curves.d_reserve = self.reserve;
        cfg.controller.pitch_compensation = self.pitch_compensation;
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(InputError::Field {
                path: "schema_version".into(),
                message: format!("unsupported schema version {}", self.schema_version),
            });
        }
        let pc = &self.pitch_compensation;
        let finite = [self.reserve, self.k_opt, self.k_de, self.k_de80, pc.lower, pc.upper, pc.plateau]
            .iter()
            .chain(pc.coefficients.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(InputError::Invalid("curve table values must be finite".into()));
        }
        if !(0.0 < self.k_de80 && self.k_de80 < self.k_de && self.k_de < self.k_opt) {
            return Err(InputError::Invalid("curve table needs 0 < k_de80 < k_de < k_opt".into()));
        }
        if !(self.reserve > 0.0 && self.reserve < 0.5) {
            return Err(InputError::Field {
                path: "reserve".into(),
                message: "must lie in (0, 0.5)".into(),
            });
        }
        Ok(())
    }
}

pub fn parse_curve_table(text: &str) -> Result<CurveTable, InputError> {
    let table: CurveTable = from_toml(text)?;
    table.validate()?;
    Ok(table)
}

pub fn curve_table_toml(table: &CurveTable) -> String {
    toml::to_string(table).expect("curve table serialises")
}
