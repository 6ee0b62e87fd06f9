use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use windfreq::aero::TurbineParams;
use windfreq::control::{ControlMode, PitchCompensation};
use windfreq::curves::{
    fit_deloaded_constant, fit_pitch_polynomial, pitch_compensation_table, pitch_table_winds,
    CurveSet, DEFAULT_FIT_WINDS,
};
use windfreq::engine::{case_preset, run_scenario, CaseId, EngineError, Metrics, ScenarioConfig};
use windfreq::io::{self, CurveTable, InputError};

use crate::output::{write_atomic, RunManifest};
use crate::{plot as svg, CompareArgs, ControllerArg, FitArgs, PlotArgs, RunArgs, SimArgs};

/// Reference constants the fit report is compared against.
const REFERENCE_K_DE: f64 = 0.2172;
const REFERENCE_K_LOWER: f64 = 0.1956;
const REFERENCE_PITCH_PLATEAU: f64 = 1.6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("simulation aborted: {0}")]
    Abort(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Abort(_) => 3,
            CliError::Fit(_) => 4,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidConfig(_) | EngineError::UnknownCase(_) | EngineError::SeriesTooShort { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Abort(e.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse_case(s: &str) -> Result<CaseId, CliError> {
    Ok(s.parse::<CaseId>()?)
}

fn apply_sim_overrides(cfg: &mut ScenarioConfig, sim: &SimArgs) -> Result<(), CliError> {
    if let Some(dt) = sim.dt {
        cfg.dt = dt;
    }
    if let Some(d) = sim.duration {
        cfg.duration = d;
    }
    if let Some(path) = &sim.curves {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let table = io::parse_curve_table(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        table.apply(cfg);
    }
    cfg.validate()?;
    Ok(())
}

/// Builds the scenario for `run` from a preset or config file plus flags.
pub fn resolve_scenario(a: &RunArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match (&a.config, &a.case) {
        (Some(path), _) => io::load_config(path)?,
        (None, Some(case)) => case_preset(parse_case(case)?, ControlMode::Proposed),
        (None, None) => return Err(CliError::Input("either --case or --config is required".into())),
    };
    let mut mode = match (a.controller, cfg.controller.mode) {
        (None, m) => m,
        (Some(ControllerArg::Mppt), _) => ControlMode::Mppt,
        (Some(ControllerArg::Proposed), _) => ControlMode::Proposed,
        (Some(ControllerArg::Traditional), m @ ControlMode::Traditional { .. }) => m,
        (Some(ControllerArg::Traditional), _) => ControlMode::LARGE_GAINS,
    };
    if a.kv.is_some() || a.inv_r.is_some() {
        let ControlMode::Traditional { k_v, inv_r } = &mut mode else {
            return Err(CliError::Input(
                "--kv and --inv-r apply only to the traditional controller".into(),
            ));
        };
        *k_v = a.kv.unwrap_or(*k_v);
        *inv_r = a.inv_r.unwrap_or(*inv_r);
    }
    cfg.controller.mode = mode;
    apply_sim_overrides(&mut cfg, &a.sim)?;
    Ok(cfg)
}

fn write_run(dir: &Path, cfg: &ScenarioConfig, ts_csv: &str, metrics: &Metrics) -> Result<(), CliError> {
    let ts_path = dir.join("timeseries.csv");
    let m_path = dir.join("metrics.json");
    write_file(&ts_path, ts_csv)?;
    write_file(&m_path, &io::metrics_json(metrics))?;
    let manifest = RunManifest::new(cfg, ts_path, m_path);
    write_file(&dir.join("manifest.json"), &manifest.to_json())
}

fn fmt_opt(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.decimals$}"))
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_scenario(a)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let (ts, metrics) = run_scenario(&cfg)?;
    write_run(&a.sim.out, &cfg, &io::timeseries_csv(&ts), &metrics)?;
    println!(
        "{} [{}]: fn {:.4} Hz at {:.2} s, steady {:.4} Hz, min omega {:.4} pu, guard trip {}",
        cfg.name,
        cfg.controller.mode.label(),
        metrics.fn_hz,
        metrics.fn_time,
        metrics.steady_f_hz,
        metrics.min_omega,
        fmt_opt(metrics.guard_trip_time, 2),
    );
    Ok(())
}

fn parse_gains(s: &str, flag: &str) -> Result<ControlMode, CliError> {
    let bad = || CliError::Input(format!("--{flag} expects KV,INV_R, got `{s}`"));
    let (kv, inv_r) = s.split_once(',').ok_or_else(bad)?;
    let k_v: f64 = kv.trim().parse().map_err(|_| bad())?;
    let inv_r: f64 = inv_r.trim().parse().map_err(|_| bad())?;
    Ok(ControlMode::Traditional { k_v, inv_r })
}

const COMPARE_COLUMNS: [&str; 10] = [
    "scheme",
    "k_v",
    "inv_r",
    "fn_hz",
    "fn_time",
    "secondary_fn_hz",
    "steady_f_hz",
    "min_omega",
    "peak_p_wind",
    "guard_trip_time",
];

pub fn compare(a: &CompareArgs) -> Result<(), CliError> {
    let id = parse_case(&a.case)?;
    let schemes = [
        ("mppt", ControlMode::Mppt),
        ("traditional_large", parse_gains(&a.large, "large")?),
        ("traditional_small", parse_gains(&a.small, "small")?),
        ("proposed", ControlMode::Proposed),
    ];
    let mut configs = Vec::with_capacity(schemes.len());
    for (_, mode) in schemes {
        let mut cfg = case_preset(id, mode);
        apply_sim_overrides(&mut cfg, &a.sim)?;
        configs.push(cfg);
    }

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || run_scenario(cfg).map(|(ts, m)| (io::timeseries_csv(&ts), m))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_err = None;
    for (((name, mode), cfg), result) in schemes.iter().zip(&configs).zip(results) {
        match result {
            Ok((csv, metrics)) => {
                write_run(&a.sim.out.join(name), cfg, &csv, &metrics)?;
                rows.push((*name, *mode, metrics));
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }

    let gains = |m: &ControlMode| match m {
        ControlMode::Traditional { k_v, inv_r } => (Some(*k_v), Some(*inv_r)),
        _ => (None, None),
    };
    let mut csv = COMPARE_COLUMNS.join(",");
    csv.push('\n');
    let mut table = String::new();
    let (lk, lr) = gains(&schemes[1].1);
    let (sk, sr) = gains(&schemes[2].1);
    let _ = writeln!(
        table,
        "{}  large gains: K_v={} 1/R={}  small gains: K_v={} 1/R={}",
        id.label(),
        fmt_opt(lk, 1),
        fmt_opt(lr, 1),
        fmt_opt(sk, 1),
        fmt_opt(sr, 1),
    );
    let _ = writeln!(
        table,
        "{:<18} {:>9} {:>8} {:>10} {:>9} {:>9} {:>9} {:>9}",
        "scheme", "fn_hz", "fn_time", "second_fn", "steady", "min_omega", "peak_p", "trip_t"
    );
    for (name, mode, m) in &rows {
        let (k_v, inv_r) = gains(mode);
        let fields = [
            k_v.map_or(String::new(), io::format_g9),
            inv_r.map_or(String::new(), io::format_g9),
            io::format_g9(m.fn_hz),
            io::format_g9(m.fn_time),
            m.secondary_fn_hz.map_or(String::new(), io::format_g9),
            io::format_g9(m.steady_f_hz),
            io::format_g9(m.min_omega),
            io::format_g9(m.peak_p_wind),
            m.guard_trip_time.map_or(String::new(), io::format_g9),
        ];
        let _ = writeln!(csv, "{name},{}", fields.join(","));
        let _ = writeln!(
            table,
            "{:<18} {:>9.4} {:>8.2} {:>10} {:>9.4} {:>9.4} {:>9.4} {:>9}",
            name,
            m.fn_hz,
            m.fn_time,
            fmt_opt(m.secondary_fn_hz, 4),
            m.steady_f_hz,
            m.min_omega,
            m.peak_p_wind,
            fmt_opt(m.guard_trip_time, 2),
        );
    }
    write_file(&a.sim.out.join("comparison.csv"), &csv)?;
    write_file(&a.sim.out.join("comparison.txt"), &table)?;
    print!("{table}");
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Relative deviation in percent.
fn deviation(x: f64, reference: f64) -> f64 {
    100.0 * (x - reference) / reference
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let reserve = a.reserve;
    if !(reserve > 0.0 && reserve < 0.9) {
        return Err(CliError::Input(format!("--reserve {reserve} must lie in (0, 0.9)")));
    }
    let lower_reserve = 2.0 * reserve;
    if lower_reserve >= 0.9 {
        return Err(CliError::Input(format!(
            "--reserve {reserve}: the lower curve needs twice the reserve below 0.9"
        )));
    }
    let fit_err = |e: &dyn std::fmt::Display| CliError::Fit(e.to_string());
    let mut turbine = TurbineParams::default();
    turbine.calibrate();
    let de = fit_deloaded_constant(&turbine, reserve, DEFAULT_FIT_WINDS).map_err(|e| fit_err(&e))?;
    let low = fit_deloaded_constant(&turbine, lower_reserve, DEFAULT_FIT_WINDS).map_err(|e| fit_err(&e))?;

    let mut curves = CurveSet::calibrated(&turbine).map_err(|e| fit_err(&e))?;
    curves.k_de = de.k;
    curves.k_de80 = low.k;
    curves.d_reserve = reserve;
    curves.validate().map_err(|e| fit_err(&e))?;

    let table = pitch_compensation_table(&turbine, &curves, &pitch_table_winds()).map_err(|e| fit_err(&e))?;
    let lower = PitchCompensation::default().lower;
    let upper = curves.deloaded_plateau();
    if !(lower < upper) {
        return Err(CliError::Fit(format!("empty pitch fit window [{lower}, {upper})")));
    }
    let pitch = fit_pitch_polynomial(&table, lower, upper).map_err(|e| fit_err(&e))?;

    let out = CurveTable {
        schema_version: io::SCHEMA_VERSION,
        reserve,
        k_opt: curves.k_opt,
        k_de: de.k,
        k_de80: low.k,
        pitch_compensation: pitch.compensation,
        pitch_table: table,
    };
    out.validate().map_err(|e| fit_err(&e))?;
    write_file(&a.out, &io::curve_table_toml(&out))?;

    let is_reference = (reserve - 0.1).abs() < 1e-12;
    let reference = |x: f64, r: f64| {
        if is_reference {
            format!("  (reference {r}, deviation {:+.2}%)", deviation(x, r))
        } else {
            String::new()
        }
    };
    println!(
        "k_de    reserve {reserve}: {:.6}{}  max equilibrium error {:.2e}",
        de.k,
        reference(de.k, REFERENCE_K_DE),
        de.max_rel_dev
    );
    println!(
        "k_lower reserve {lower_reserve}: {:.6}{}  max equilibrium error {:.2e}",
        low.k,
        reference(low.k, REFERENCE_K_LOWER),
        low.max_rel_dev
    );
    let c = &pitch.compensation;
    println!(
        "pitch law on [{lower}, {upper}): coefficients [{:.4}, {:.4}, {:.4}, {:.4}], rms {:.3} deg over {} points",
        c.coefficients[0], c.coefficients[1], c.coefficients[2], c.coefficients[3], pitch.rms, pitch.points_used
    );
    println!(
        "pitch law at {upper}: {:.3} deg{}; at {lower}: {:.3} deg",
        c.polynomial(upper),
        if is_reference {
            format!(" (reference plateau {REFERENCE_PITCH_PLATEAU})")
        } else {
            String::new()
        },
        c.polynomial(lower)
    );
    println!("wrote {}", a.out.display());
    Ok(())
}

fn default_label(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if stem == "timeseries" {
        if let Some(parent) = path.parent().and_then(Path::file_name) {
            return parent.to_string_lossy().into_owned();
        }
    }
    stem
}

pub fn plot(a: &PlotArgs) -> Result<(), CliError> {
    if !a.label.is_empty() && a.label.len() != a.csv.len() {
        return Err(CliError::Input(format!(
            "{} labels given for {} CSV files",
            a.label.len(),
            a.csv.len()
        )));
    }
    let mut series = Vec::with_capacity(a.csv.len());
    for (i, path) in a.csv.iter().enumerate() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let ts = io::parse_timeseries_csv(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let label = a.label.get(i).cloned().unwrap_or_else(|| default_label(path));
        series.push((label, ts));
    }
    write_file(&a.out, &svg::render(&series))?;
    println!("wrote {}", a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Abort(String::new()).exit_code(), 3);
        assert_eq!(CliError::Fit(String::new()).exit_code(), 4);
        let abort = EngineError::Aborted {
            module: "grid",
            time: 1.0,
            reason: "x".into(),
        };
        assert_eq!(CliError::from(abort).exit_code(), 3);
        assert_eq!(CliError::from(EngineError::UnknownCase("9".into())).exit_code(), 2);
    }

    #[test]
    fn gain_pairs() {
        assert_eq!(parse_gains("30,24", "large").unwrap(), ControlMode::LARGE_GAINS);
        assert_eq!(parse_gains(" 15 , 7 ", "small").unwrap(), ControlMode::SMALL_GAINS);
        assert!(parse_gains("30", "large").is_err());
        assert!(parse_gains("a,b", "large").is_err());
    }
}
