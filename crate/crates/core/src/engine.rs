//! Fixed-step scenario executor: wires turbine, controller and grid, applies
//! wind and load events, samples outputs and extracts response metrics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aero::{self, TurbineParams, STALL_GUARD_PU};
use crate::control::{ControlMode, Controller, ControllerConfig};
use crate::curves::CurveSet;
use crate::grid::{GridState, PlantParams};
use crate::numeric::highest_downcrossing;

/// Largest |Δf| in pu tolerated before a run is declared unstable.
pub const DELTA_F_SANITY_PU: f64 = 0.04;
/// Width of the averaging window for the steady frequency, s.
pub const STEADY_WINDOW_S: f64 = 10.0;
/// Recovery needed to separate two frequency dips, Hz.
pub const DIP_HYSTERESIS_HZ: f64 = 0.05;

pub const CASE6_SEED: u64 = 0x5eed_0006;
pub const CASE6_TRACE_CSV: &str = include_str!("../data/case6_wind.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("{module} aborted at t = {time:.3} s: {reason}")]
    Aborted {
        module: &'static str,
        time: f64,
        reason: String,
    },
    #[error("series too short for metrics: need data to {needed:.1} s, have {have:.1} s")]
    SeriesTooShort { needed: f64, have: f64 },
    #[error("unknown case `{0}` (expected 1, 1a, 1b, 2, 3, 4, 5 or 6)")]
    UnknownCase(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindProfile {
    Constant {
        v: f64,
    },
    Ramp {
        v0: f64,
        v1: f64,
        t_start: f64,
        duration: f64,
    },
    Trace {
        /// Where the samples came from, for the record.
        source: String,
        /// (t [s], v [m/s]) with strictly increasing t.
        points: Vec<(f64, f64)>,
    },
}

impl WindProfile {
    pub fn validate(&self, duration: f64) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        match self {
            Self::Constant { v } if !(v.is_finite() && *v > 0.0) => {
                bad(format!("constant wind speed {v} must be > 0"))
            }
            Self::Ramp { v0, v1, t_start, duration } => {
                if !(v0.is_finite() && v1.is_finite() && *v0 > 0.0 && *v1 > 0.0) {
                    bad("ramp wind speeds must be > 0".into())
                } else if !(t_start.is_finite() && duration.is_finite() && *duration >= 0.0) {
                    bad("ramp timing must be finite with duration >= 0".into())
                } else {
                    Ok(())
                }
            }
            Self::Trace { points, .. } => {
                if points.len() < 2 {
                    return bad("wind trace needs at least two samples".into());
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return bad("wind trace times must be strictly increasing".into());
                }
                if points.iter().any(|p| !(p.1.is_finite() && p.1 > 0.0)) {
                    return bad("wind trace speeds must be finite and > 0".into());
                }
                let (first, last) = (points[0].0, points[points.len() - 1].0);
                if first > 0.0 || last < duration {
                    return bad(format!(
                        "wind trace covers [{first}, {last}] s but the run needs [0, {duration}] s"
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Wind speed at time `t`.
pub fn wind_at(profile: &WindProfile, t: f64) -> f64 {
    match profile {
        WindProfile::Constant { v } => *v,
        WindProfile::Ramp { v0, v1, t_start, duration } => {
            if t <= *t_start {
                *v0
            } else if *duration <= 0.0 || t >= t_start + duration {
                *v1
            } else {
                v0 + (v1 - v0) * (t - t_start) / duration
            }
        }
        WindProfile::Trace { points, .. } => {
            let i = points.partition_point(|p| p.0 <= t);
            if i == 0 {
                return points[0].1;
            }
            if i == points.len() {
                return points[i - 1].1;
            }
            let (t0, v0) = points[i - 1];
            let (t1, v1) = points[i];
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadEvent {
    /// s
    pub t: f64,
    /// pu of system base; positive means more load.
    pub delta_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// s
    pub duration: f64,
    /// s
    pub dt: f64,
    pub output_decimation: usize,
    pub wind: WindProfile,
    pub load_events: Vec<LoadEvent>,
    pub controller: ControllerConfig,
    pub turbine: TurbineParams,
    pub curves: CurveSet,
    pub plant: PlantParams,
}

impl ScenarioConfig {
    /// Scenario with default physics; curves are calibrated to the turbine.
    pub fn new(name: impl Into<String>, wind: WindProfile, mode: ControlMode) -> Self {
        let turbine = TurbineParams::default();
        Self {
            name: name.into(),
            duration: 200.0,
            dt: 1e-3,
            output_decimation: 10,
            wind,
            load_events: vec![LoadEvent { t: 60.0, delta_p: 0.1 }],
            controller: ControllerConfig::new(mode),
            curves: CurveSet::default(),
            turbine,
            plant: PlantParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be > 0", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration = {} must be > 0", self.duration));
        }
        if self.dt > self.duration {
            return bad("dt exceeds duration".into());
        }
        if self.output_decimation == 0 {
            return bad("output_decimation must be >= 1".into());
        }
        for e in &self.load_events {
            if !(e.t.is_finite() && e.delta_p.is_finite() && e.t >= 0.0) {
                return bad(format!("load event {e:?} must have finite t >= 0"));
            }
            if !(e.t < self.duration) {
                return bad(format!("load event at {} s is past the duration", e.t));
            }
        }
        self.wind.validate(self.duration)?;
        let wrap = |e: &dyn std::fmt::Display| EngineError::InvalidConfig(e.to_string());
        self.turbine.validate().map_err(|e| wrap(&e))?;
        self.curves.validate().map_err(|e| wrap(&e))?;
        self.controller.validate().map_err(|e| wrap(&e))?;
        self.plant.validate().map_err(|e| wrap(&e))?;
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dt >= self.controller.washout_tw {
            out.push(format!(
                "dt = {} s is not below the washout time constant {} s",
                self.dt, self.controller.washout_tw
            ));
        }
        out
    }

    pub fn event_time(&self) -> Option<f64> {
        self.load_events.iter().map(|e| e.t).reduce(f64::min)
    }

    fn load_at(&self, t: f64) -> f64 {
        self.load_events
            .iter()
            .filter(|e| t >= e.t - 0.5 * self.dt)
            .map(|e| e.delta_p)
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timeseries {
    pub t: Vec<f64>,
    pub f_hz: Vec<f64>,
    /// Wind plant output, pu of system base.
    pub p_wind_sys: Vec<f64>,
    /// Single-turbine output, pu of turbine base.
    pub p_wind_wt: Vec<f64>,
    pub omega_r: Vec<f64>,
    pub beta_deg: Vec<f64>,
    pub p_thermal: Vec<f64>,
    pub p_hydro: Vec<f64>,
    pub support: Vec<bool>,
}

impl Timeseries {
    pub const HEADER: [&'static str; 9] = [
        "t",
        "f_hz",
        "p_wind_sys",
        "p_wind_wt",
        "omega_r",
        "beta_deg",
        "p_thermal",
        "p_hydro",
        "support",
    ];

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// True when every column has the same length.
    pub fn is_consistent(&self) -> bool {
        let n = self.t.len();
        [
            self.f_hz.len(),
            self.p_wind_sys.len(),
            self.p_wind_wt.len(),
            self.omega_r.len(),
            self.beta_deg.len(),
            self.p_thermal.len(),
            self.p_hydro.len(),
            self.support.len(),
        ]
        .iter()
        .all(|&l| l == n)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, t: f64, f_hz: f64, p_sys: f64, p_wt: f64, w: f64, b: f64, p_th: f64, p_hy: f64, s: bool) {
        self.t.push(t);
        self.f_hz.push(f_hz);
        self.p_wind_sys.push(p_sys);
        self.p_wind_wt.push(p_wt);
        self.omega_r.push(w);
        self.beta_deg.push(b);
        self.p_thermal.push(p_th);
        self.p_hydro.push(p_hy);
        self.support.push(s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub fn_hz: f64,
    pub fn_time: f64,
    pub secondary_fn_hz: Option<f64>,
    pub steady_f_hz: f64,
    pub min_omega: f64,
    pub peak_p_wind: f64,
    pub guard_trip_time: Option<f64>,
}

impl Metrics {
    pub const FIELDS: [&'static str; 7] = [
        "fn_hz",
        "fn_time",
        "secondary_fn_hz",
        "steady_f_hz",
        "min_omega",
        "peak_p_wind",
        "guard_trip_time",
    ];
}

/// Local minima of `f` after `from`, each confirmed by a recovery of at
/// least `hysteresis` Hz (or by the end of the series). Returns (t, f).
pub fn frequency_dips(t: &[f64], f: &[f64], from: f64, hysteresis: f64) -> Vec<(f64, f64)> {
    let mut dips = Vec::new();
    let mut falling = true;
    let (mut min_t, mut min_f) = (f64::NAN, f64::INFINITY);
    let mut max_f = f64::NEG_INFINITY;
    for (&ti, &fi) in t.iter().zip(f) {
        if ti < from {
            continue;
        }
        if falling {
            if fi < min_f {
                min_f = fi;
                min_t = ti;
            } else if fi >= min_f + hysteresis {
                dips.push((min_t, min_f));
                falling = false;
                max_f = fi;
            }
        } else if fi > max_f {
            max_f = fi;
        } else if fi <= max_f - hysteresis {
            falling = true;
            min_f = fi;
            min_t = ti;
        }
    }
    if falling && min_f.is_finite() && dips.last().is_none_or(|d| d.0 != min_t) {
        dips.push((min_t, min_f));
    }
    dips
}

/// Response metrics of a sampled run with the disturbance at `event_time`.
pub fn compute_metrics(ts: &Timeseries, event_time: f64) -> Result<Metrics, EngineError> {
    let have = ts.t.last().copied().unwrap_or(f64::NEG_INFINITY);
    let needed = event_time + STEADY_WINDOW_S;
    if ts.is_empty() || !ts.is_consistent() || have < needed {
        return Err(EngineError::SeriesTooShort {
            needed,
            have: have.max(0.0),
        });
    }
    let after = |i: &usize| ts.t[*i] >= event_time;
    let (mut fn_hz, mut fn_time) = (f64::INFINITY, event_time);
    let mut peak_p_wind = f64::NEG_INFINITY;
    for i in (0..ts.len()).filter(after) {
        if ts.f_hz[i] < fn_hz {
            fn_hz = ts.f_hz[i];
            fn_time = ts.t[i];
        }
        peak_p_wind = peak_p_wind.max(ts.p_wind_wt[i]);
    }
    let dips = frequency_dips(&ts.t, &ts.f_hz, event_time, DIP_HYSTERESIS_HZ);
    let secondary_fn_hz = dips
        .iter()
        .skip(1)
        .map(|d| d.1)
        .reduce(f64::min);
    let window: Vec<f64> = ts
        .t
        .iter()
        .zip(&ts.f_hz)
        .filter(|(t, _)| **t >= have - STEADY_WINDOW_S)
        .map(|(_, f)| *f)
        .collect();
    let steady_f_hz = window.iter().sum::<f64>() / window.len() as f64;
    let min_omega = ts.omega_r.iter().copied().fold(f64::INFINITY, f64::min);
    let guard_trip_time = ts
        .support
        .iter()
        .position(|s| !s)
        .map(|i| ts.t[i]);
    Ok(Metrics {
        fn_hz,
        fn_time,
        secondary_fn_hz,
        steady_f_hz,
        min_omega,
        peak_p_wind,
        guard_trip_time,
    })
}

/// Continuous part of the state advanced by the integrator.
#[derive(Debug, Clone, Copy)]
struct Plant {
    omega_r: f64,
    t_g: f64,
    grid: GridState,
}

impl Plant {
    fn add_scaled(&self, d: &Plant, h: f64) -> Plant {
        Plant {
            omega_r: self.omega_r + h * d.omega_r,
            t_g: self.t_g + h * d.t_g,
            grid: self.grid.add_scaled(&d.grid, h),
        }
    }
}

struct Model<'a> {
    cfg: &'a ScenarioConfig,
    p_e0: f64,
}

impl Model<'_> {
    fn derivative(&self, s: &Plant, t: f64, beta: f64, t_g_ref: f64) -> Plant {
        let turbine = &self.cfg.turbine;
        let v = wind_at(&self.cfg.wind, t);
        let omega = s.omega_r.max(STALL_GUARD_PU);
        let p_m = turbine.mechanical_power(v, omega, beta);
        let d_omega = aero::drivetrain_derivative(turbine, omega, p_m, s.t_g);
        let d_tg = if turbine.converter_tau_c > 0.0 {
            (t_g_ref - s.t_g) / turbine.converter_tau_c
        } else {
            0.0
        };
        let p_wind = self.cfg.plant.wind_share() * (s.t_g * s.omega_r - self.p_e0);
        Plant {
            omega_r: d_omega,
            t_g: d_tg,
            grid: s.grid.derivative(&self.cfg.plant, p_wind),
        }
    }

    fn rk4(&self, s: &Plant, t: f64, dt: f64, beta: f64, t_g_ref: f64) -> Plant {
        let k1 = self.derivative(s, t, beta, t_g_ref);
        let k2 = self.derivative(&s.add_scaled(&k1, 0.5 * dt), t + 0.5 * dt, beta, t_g_ref);
        let k3 = self.derivative(&s.add_scaled(&k2, 0.5 * dt), t + 0.5 * dt, beta, t_g_ref);
        let k4 = self.derivative(&s.add_scaled(&k3, dt), t + dt, beta, t_g_ref);
        s.add_scaled(&k1, dt / 6.0)
            .add_scaled(&k2, dt / 3.0)
            .add_scaled(&k3, dt / 3.0)
            .add_scaled(&k4, dt / 6.0)
    }
}

/// Pre-event operating point: rotor speed where capture equals the electrical
/// power commanded by the quiescent controller, with its pitch.
/// Returns (omega, t_g, beta).
pub fn initial_operating_point(cfg: &ScenarioConfig) -> Result<(f64, f64, f64), EngineError> {
    let v = wind_at(&cfg.wind, 0.0);
    let turbine = &cfg.turbine;
    let curves = &cfg.curves;
    let probe = Controller::new(cfg.controller);
    let reference = |w: f64| {
        let mut ctl = probe.clone();
        ctl.reference(turbine, curves, w, v, cfg.dt)
    };
    if let Err(e) = reference(1.0) {
        return Err(EngineError::Aborted {
            module: "control",
            time: 0.0,
            reason: e.to_string(),
        });
    }
    let g = |w: f64| match reference(w) {
        Ok(out) => turbine.mechanical_power(v, w, out.beta_ref) - out.t_g_ref * w,
        Err(_) => f64::NAN,
    };
    let hi = curves.omega_max + 0.4;
    let omega = highest_downcrossing(g, 2.0 * STALL_GUARD_PU, hi, 2000).ok_or_else(|| {
        EngineError::Aborted {
            module: "engine",
            time: 0.0,
            reason: format!("no pre-event equilibrium at {v} m/s"),
        }
    })?;
    let out = reference(omega).map_err(|e| EngineError::Aborted {
        module: "control",
        time: 0.0,
        reason: e.to_string(),
    })?;
    Ok((omega, out.t_g_ref, out.beta_ref))
}

/// Runs one scenario. Identical configurations give bit-identical results.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Timeseries, Metrics), EngineError> {
    cfg.validate()?;
    let (omega0, t_g0, beta0) = initial_operating_point(cfg)?;
    let model = Model {
        cfg,
        p_e0: t_g0 * omega0,
    };
    let mut plant = Plant {
        omega_r: omega0,
        t_g: t_g0,
        grid: GridState::default(),
    };
    let mut beta = beta0;
    let mut controller = Controller::new(cfg.controller);
    let turbine = &cfg.turbine;
    let nominal = cfg.controller.nominal_freq;
    let dt = cfg.dt;
    let n_steps = (cfg.duration / dt).round() as usize;
    let mut ts = Timeseries::default();
    let abort = |module: &'static str, time: f64, reason: String| EngineError::Aborted {
        module,
        time,
        reason,
    };

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        plant.grid.p_load = cfg.load_at(t);
        let v = wind_at(&cfg.wind, t);
        let f_hz = nominal * (1.0 + plant.grid.delta_f);
        controller.measure(t, f_hz, plant.omega_r, &cfg.curves, dt);
        let out = controller
            .reference(turbine, &cfg.curves, plant.omega_r, v, dt)
            .map_err(|e| abort("control", t, e.to_string()))?;

        if k % cfg.output_decimation == 0 {
            let p_e = plant.t_g * plant.omega_r;
            ts.push(
                t,
                f_hz,
                cfg.plant.wind_share() * p_e,
                p_e,
                plant.omega_r,
                beta,
                plant.grid.p_thermal(&cfg.plant),
                plant.grid.p_hydro(&cfg.plant),
                controller.support_enabled(),
            );
        }
        if k == n_steps {
            break;
        }

        let t_g_ref = out.t_g_ref;
        if turbine.converter_tau_c <= 0.0 {
            plant.t_g = t_g_ref;
        }
        let mut next = model.rk4(&plant, t, dt, beta, t_g_ref);
        next.t_g = turbine.clamp_torque(next.t_g);
        beta = aero::step_pitch(turbine, beta, out.beta_ref, dt);

        let t_next = t + dt;
        if !(next.omega_r.is_finite() && next.t_g.is_finite()) {
            return Err(abort("aero", t_next, "non-finite turbine state".into()));
        }
        if next.omega_r <= STALL_GUARD_PU {
            return Err(abort(
                "aero",
                t_next,
                format!("rotor stalled (omega_r = {:.4} pu)", next.omega_r),
            ));
        }
        if !next.grid.is_finite() {
            return Err(abort("grid", t_next, "non-finite grid state".into()));
        }
        if next.grid.delta_f.abs() > DELTA_F_SANITY_PU {
            return Err(abort(
                "grid",
                t_next,
                format!("frequency deviation {:.4} pu beyond sanity bound", next.grid.delta_f),
            ));
        }
        plant = next;
    }

    let metrics = compute_metrics(&ts, cfg.event_time().unwrap_or(0.0))?;
    Ok((ts, metrics))
}

/// Built-in case studies. Case 1 has two wind levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    Case1a,
    Case1b,
    Case2,
    Case3,
    Case4,
    Case5,
    Case6,
}

impl CaseId {
    pub const ALL: [CaseId; 7] = [
        CaseId::Case1a,
        CaseId::Case1b,
        CaseId::Case2,
        CaseId::Case3,
        CaseId::Case4,
        CaseId::Case5,
        CaseId::Case6,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CaseId::Case1a => "case1a",
            CaseId::Case1b => "case1b",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4 => "case4",
            CaseId::Case5 => "case5",
            CaseId::Case6 => "case6",
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_prefix("case").unwrap_or(&key);
        Ok(match key {
            "1" | "1a" => CaseId::Case1a,
            "1b" => CaseId::Case1b,
            "2" => CaseId::Case2,
            "3" => CaseId::Case3,
            "4" => CaseId::Case4,
            "5" => CaseId::Case5,
            "6" => CaseId::Case6,
            _ => return Err(EngineError::UnknownCase(s.to_string())),
        })
    }
}

/// Preset scenario for one of the case studies, all with a +0.1 pu load step
/// at 60 s and a 200 s horizon.
pub fn case_preset(id: CaseId, mode: ControlMode) -> ScenarioConfig {
    let wind = match id {
        CaseId::Case1a => WindProfile::Constant { v: 8.0 },
        CaseId::Case1b => WindProfile::Constant { v: 10.0 },
        CaseId::Case2 => WindProfile::Constant { v: 11.0 },
        CaseId::Case3 => WindProfile::Constant { v: 13.6 },
        CaseId::Case4 => WindProfile::Ramp {
            v0: 9.0,
            v1: 7.5,
            t_start: 60.0,
            duration: 10.0,
        },
        CaseId::Case5 => WindProfile::Ramp {
            v0: 9.0,
            v1: 7.5,
            t_start: 60.0,
            duration: 1.0,
        },
        CaseId::Case6 => WindProfile::Trace {
            source: "bundled:case6_wind.csv".into(),
            points: bundled_case6_trace(),
        },
    };
    ScenarioConfig::new(id.label(), wind, mode)
}

/// The bundled low-wind trace used by case 6.
pub fn bundled_case6_trace() -> Vec<(f64, f64)> {
    CASE6_TRACE_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (t, v) = l.split_once(',').expect("bundled trace has two columns");
            (
                t.trim().parse().expect("bundled trace time"),
                v.trim().parse().expect("bundled trace speed"),
            )
        })
        .collect()
}

/// Synthetic gusty low-wind trace: a mean-reverting AR(1) process sampled
/// every second, clipped to `[lo, hi]` and rounded to 1e-3 m/s.
pub fn synthetic_wind_trace(seed: u64, duration: f64, mean: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).expect("valid normal");
    let phi = 0.9;
    let mut v = mean;
    let n = duration.ceil() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            v = mean + phi * (v - mean) + noise.sample(&mut rng);
            v = v.clamp(lo, hi);
        }
        out.push((k as f64, (v * 1000.0).round() / 1000.0));
    }
    out
}

/// CSV text of a wind trace in the `t_s,v_mps` format.
pub fn wind_trace_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("t_s,v_mps\n");
    for (t, v) in points {
        s.push_str(&format!("{t},{v:.3}\n"));
    }
    s
}

/// Case 6 trace as shipped: seed `CASE6_SEED`, 200 s, mean 8 m/s in [6.5, 9.5].
pub fn generate_case6_trace() -> Vec<(f64, f64)> {
    synthetic_wind_trace(CASE6_SEED, 200.0, 8.0, 6.5, 9.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_interpolation() {
        let ramp = WindProfile::Ramp {
            v0: 9.0,
            v1: 7.5,
            t_start: 60.0,
            duration: 10.0,
        };
        assert_eq!(wind_at(&ramp, 65.0), 8.25);
        assert_eq!(wind_at(&ramp, 10.0), 9.0);
        assert_eq!(wind_at(&ramp, 100.0), 7.5);
        let fast = WindProfile::Ramp {
            v0: 9.0,
            v1: 7.5,
            t_start: 60.0,
            duration: 1.0,
        };
        assert_eq!(wind_at(&fast, 61.0), 7.5);
        assert_eq!(wind_at(&WindProfile::Constant { v: 8.0 }, 123.0), 8.0);
    }

    #[test]
    fn trace_interpolation() {
        let tr = WindProfile::Trace {
            source: "test".into(),
            points: vec![(0.0, 8.0), (1.0, 9.0), (3.0, 7.0)],
        };
        assert_eq!(wind_at(&tr, 0.5), 8.5);
        assert_eq!(wind_at(&tr, 1.0), 9.0);
        assert_eq!(wind_at(&tr, 2.0), 8.0);
        assert_eq!(wind_at(&tr, 3.0), 7.0);
    }

    #[test]
    fn trace_must_cover_duration() {
        let tr = WindProfile::Trace {
            source: "test".into(),
            points: vec![(0.0, 8.0), (100.0, 9.0)],
        };
        assert!(tr.validate(100.0).is_ok());
        assert!(tr.validate(150.0).is_err());
    }

    #[test]
    fn bundled_trace_matches_generator() {
        assert_eq!(wind_trace_csv(&generate_case6_trace()), CASE6_TRACE_CSV);
        let pts = bundled_case6_trace();
        assert_eq!(pts.len(), 201);
        assert!(pts.iter().all(|p| (6.5..=9.5).contains(&p.1)));
    }

    #[test]
    fn dips_on_synthetic_trace() {
        let f = [50.0, 49.7, 49.85, 49.6, 49.8];
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let dips = frequency_dips(&t, &f, 0.0, 0.05);
        assert_eq!(dips, vec![(1.0, 49.7), (3.0, 49.6)]);
    }

    #[test]
    fn case_parsing() {
        assert_eq!("1".parse::<CaseId>().unwrap(), CaseId::Case1a);
        assert_eq!("case1b".parse::<CaseId>().unwrap(), CaseId::Case1b);
        assert!("7".parse::<CaseId>().is_err());
    }
}
