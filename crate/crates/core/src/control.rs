//! Wind-side control: MPPT, fixed-gain auxiliary frequency control and the
//! gain-free curve scheme, with frequency measurement, the minimum-speed
//! guard and pitch control.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aero::TurbineParams;
use crate::curves::{CurveError, CurveSet, EventLatch, LatchConfig};
use crate::numeric::polyval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("de-loaded pitch infeasible at {wind} m/s")]
    PitchInfeasible { wind: f64 },
    #[error("wind speed measurement {0} m/s is not positive")]
    NoWindMeasurement(f64),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("invalid controller parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Scheme selection. The auxiliary-loop gains exist only on the traditional
/// variant, so the other schemes cannot read them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ControlMode {
    Mppt,
    Traditional {
        /// Inertial gain on df/dt in pu/s.
        k_v: f64,
        /// Droop gain 1/R on Δf in pu.
        inv_r: f64,
    },
    Proposed,
}

impl ControlMode {
    pub const LARGE_GAINS: Self = Self::Traditional { k_v: 30.0, inv_r: 24.0 };
    pub const SMALL_GAINS: Self = Self::Traditional { k_v: 15.0, inv_r: 7.0 };

    pub fn label(&self) -> String {
        match self {
            Self::Mppt => "mppt".into(),
            Self::Traditional { k_v, inv_r } => format!("traditional(kv={k_v},inv_r={inv_r})"),
            Self::Proposed => "proposed".into(),
        }
    }
}

/// Pitch offset Δβ(P_de): zero below `lower`, a cubic on `[lower, upper)`,
/// constant `plateau` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PitchCompensation {
    pub lower: f64,
    pub upper: f64,
    pub plateau: f64,
    /// Cubic coefficients, highest power first.
    pub coefficients: [f64; 4],
}

impl Default for PitchCompensation {
    fn default() -> Self {
        Self {
            lower: 0.38,
            upper: 0.9,
            plateau: 1.6,
            coefficients: [20.9, -48.17, 37.62, -8.42],
        }
    }
}

impl PitchCompensation {
    /// The raw cubic, without branch selection or clamping.
    pub fn polynomial(&self, p_de: f64) -> f64 {
        polyval(&self.coefficients, p_de)
    }

    /// Δβ in degrees, never negative.
    pub fn delta_beta(&self, p_de: f64) -> f64 {
        if p_de < self.lower {
            0.0
        } else if p_de < self.upper {
            self.polynomial(p_de).max(0.0)
        } else {
            self.plateau.max(0.0)
        }
    }

    /// Δβ' = (1 + Δf/Δf_max)·Δβ, clamped to [0, 2Δβ].
    pub fn compensate(&self, p_de: f64, delta_f: f64, delta_f_max: f64) -> f64 {
        let base = self.delta_beta(p_de);
        ((1.0 + delta_f / delta_f_max) * base).clamp(0.0, 2.0 * base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub mode: ControlMode,
    /// s
    pub washout_tw: f64,
    /// Hz
    pub nominal_freq: f64,
    pub pitch_kp: f64,
    pub pitch_ki: f64,
    /// Hz; deviations inside the band are treated as zero by the auxiliary loop.
    pub freq_deadband: f64,
    pub latch: LatchConfig,
    pub pitch_compensation: PitchCompensation,
    /// m/s; start of the medium-wind area for the traditional pitch law.
    pub area_v2: f64,
    /// m/s; start of the high-wind area.
    pub area_v3: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self::new(ControlMode::Proposed)
    }
}

impl ControllerConfig {
    pub fn new(mode: ControlMode) -> Self {
        Self {
            mode,
            washout_tw: 0.01,
            nominal_freq: 50.0,
            pitch_kp: 500.0,
            pitch_ki: 0.0,
            freq_deadband: 0.0,
            latch: LatchConfig::default(),
            pitch_compensation: PitchCompensation::default(),
            area_v2: 10.0,
            area_v3: 11.8,
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |field, reason: &str| {
            Err(ControlError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.washout_tw > 0.0) {
            return bad("washout_tw", "must be > 0");
        }
        if !(self.nominal_freq > 0.0) {
            return bad("nominal_freq", "must be > 0");
        }
        if !(self.pitch_kp >= 0.0 && self.pitch_ki >= 0.0) {
            return bad("pitch_kp", "pitch gains must be >= 0");
        }
        if !(self.freq_deadband >= 0.0) {
            return bad("freq_deadband", "must be >= 0");
        }
        if let ControlMode::Traditional { k_v, inv_r } = self.mode {
            if !(k_v >= 0.0 && inv_r >= 0.0) {
                return bad("k_v", "auxiliary gains must be >= 0");
            }
        }
        if !(self.area_v2 < self.area_v3) {
            return bad("area_v2", "must be below area_v3");
        }
        let pc = &self.pitch_compensation;
        if !(pc.lower < pc.upper) || pc.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("pitch_compensation", "needs lower < upper and finite coefficients");
        }
        Ok(())
    }
}

/// First-order washout s/(1 + T_w s), discretised with a first-order hold
/// on the input so ramps are reproduced exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Washout {
    prev_input: Option<f64>,
    output: f64,
}

impl Washout {
    pub fn output(&self) -> f64 {
        self.output
    }

    pub fn step(&mut self, input: f64, dt: f64, tw: f64) -> f64 {
        let Some(prev) = self.prev_input.replace(input) else {
            return self.output;
        };
        let slope = (input - prev) / dt;
        let decay = (-dt / tw).exp();
        self.output = slope + decay * (self.output - slope);
        self.output
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementState {
    pub f_filtered: f64,
    pub washout: Washout,
    pub delta_f: f64,
    pub dfdt: f64,
    pub support_enabled: bool,
}

impl MeasurementState {
    pub fn new(nominal_freq: f64) -> Self {
        Self {
            f_filtered: nominal_freq,
            washout: Washout::default(),
            delta_f: 0.0,
            dfdt: 0.0,
            support_enabled: true,
        }
    }

    /// Δf and df/dt as seen by the support loops; zero once the guard has
    /// disconnected the measurement.
    pub fn support_signals(&self) -> (f64, f64) {
        if self.support_enabled {
            (self.delta_f, self.dfdt)
        } else {
            (0.0, 0.0)
        }
    }
}

/// Feeds one frequency sample through the washout; returns df/dt in Hz/s.
pub fn washout_derivative(m: &mut MeasurementState, f_s: f64, dt: f64, tw: f64) -> f64 {
    m.f_filtered = f_s;
    m.dfdt = m.washout.step(f_s, dt, tw);
    m.dfdt
}

/// Disables support for the rest of the scenario once ω_r ≤ ω_min.
pub fn min_speed_guard(m: &mut MeasurementState, omega_r: f64, omega_min: f64) {
    if omega_r <= omega_min {
        m.support_enabled = false;
    }
}

/// Auxiliary power ΔP = −(K_v·df/dt + (1/R)·Δf) with frequencies in pu of
/// the nominal frequency.
pub fn afc_power(delta_f: f64, dfdt: f64, k_v: f64, inv_r: f64, nominal_freq: f64) -> f64 {
    -(k_v * dfdt / nominal_freq + inv_r * delta_f / nominal_freq)
}

/// Proportional(-integral) pitch action on rotor over-speed, clamped to the
/// pitch range.
pub fn pitch_mppt(omega_r: f64, integral: f64, cfg: &ControllerConfig, curves: &CurveSet, turbine: &TurbineParams) -> f64 {
    let err = (omega_r - curves.omega_max).max(0.0);
    turbine.clamp_pitch(cfg.pitch_kp * err + integral)
}

/// t_g_ref = p_ref / ω_r within the torque limits.
pub fn torque_reference(p_ref: f64, omega_r: f64, turbine: &TurbineParams) -> f64 {
    turbine.clamp_torque(p_ref / omega_r.max(crate::aero::STALL_GUARD_PU))
}

/// De-loaded pitch for the traditional scheme from the wind-area rule,
/// with the rotor held at `omega_max` in the medium and high areas.
pub fn deloaded_pitch(
    turbine: &TurbineParams,
    curves: &CurveSet,
    cfg: &ControllerConfig,
    v: f64,
) -> Result<f64, ControlError> {
    if !(v > 0.0) {
        return Err(ControlError::NoWindMeasurement(v));
    }
    if v < cfg.area_v2 {
        return Ok(turbine.pitch_min_deg);
    }
    let keep = 1.0 - curves.d_reserve;
    let target = if v < cfg.area_v3 {
        keep * turbine.optimum_capture(v, 0.0).1
    } else {
        let rated = turbine
            .mechanical_power(v, curves.omega_max, 0.0)
            .min(curves.p_nor);
        keep * rated
    };
    turbine
        .pitch_for_power(v, curves.omega_max, target)
        .ok_or(ControlError::PitchInfeasible { wind: v })
}

/// Real de-load ratio d' given the emitted reference.
pub fn real_deload_ratio(p_ref: f64, p_opt: f64, p_nor: f64, v: f64, area_v3: f64) -> f64 {
    let base = if v <= area_v3 { p_opt } else { p_nor };
    1.0 - p_ref / base
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlOutput {
    pub p_ref: f64,
    pub beta_ref: f64,
    pub t_g_ref: f64,
    /// p_ref minus the de-loaded (or MPPT) baseline.
    pub support_power: f64,
    pub d_prime: Option<f64>,
}

/// Stateful controller for one turbine.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub cfg: ControllerConfig,
    pub measurement: MeasurementState,
    pub latch: EventLatch,
    pitch_integral: f64,
    deload_pitch_cache: Option<(f64, f64, f64)>,
    guard_trip_time: Option<f64>,
}

impl Controller {
    pub fn new(cfg: ControllerConfig) -> Self {
        Self {
            measurement: MeasurementState::new(cfg.nominal_freq),
            cfg,
            latch: EventLatch::default(),
            pitch_integral: 0.0,
            deload_pitch_cache: None,
            guard_trip_time: None,
        }
    }

    pub fn guard_trip_time(&self) -> Option<f64> {
        self.guard_trip_time
    }

    pub fn support_enabled(&self) -> bool {
        self.measurement.support_enabled
    }

    /// Updates Δf, df/dt, the event latch and the speed guard from one
    /// frequency sample.
    pub fn measure(&mut self, t: f64, f_hz: f64, omega_r: f64, curves: &CurveSet, dt: f64) {
        let m = &mut self.measurement;
        washout_derivative(m, f_hz, dt, self.cfg.washout_tw);
        let raw = f_hz - self.cfg.nominal_freq;
        m.delta_f = if raw.abs() <= self.cfg.freq_deadband {
            0.0
        } else {
            raw - self.cfg.freq_deadband * raw.signum()
        };
        if matches!(self.cfg.mode, ControlMode::Mppt) {
            return;
        }
        let was_enabled = m.support_enabled;
        min_speed_guard(m, omega_r, curves.omega_min);
        if was_enabled && !m.support_enabled {
            self.guard_trip_time = Some(t);
            self.latch = EventLatch::default();
        }
        if m.support_enabled && matches!(self.cfg.mode, ControlMode::Proposed) {
            self.latch
                .update(&self.cfg.latch, m.delta_f, m.dfdt, omega_r, dt);
        }
    }

    /// Power, pitch and torque references for the current state.
    /// `v_measured` is only consulted by the traditional scheme.
    pub fn reference(
        &mut self,
        turbine: &TurbineParams,
        curves: &CurveSet,
        omega_r: f64,
        v_measured: f64,
        dt: f64,
    ) -> Result<ControlOutput, ControlError> {
        let (delta_f, dfdt) = self.measurement.support_signals();
        let ceiling = curves.torque_limit_power(omega_r).min(turbine.power_limit_pu);
        let beta_base = pitch_mppt(omega_r, self.pitch_integral, &self.cfg, curves, turbine);
        if self.cfg.pitch_ki > 0.0 {
            let err = omega_r - curves.omega_max;
            let next = self.pitch_integral + self.cfg.pitch_ki * err * dt;
            self.pitch_integral = next.clamp(0.0, turbine.pitch_max_deg);
        }
        let out = match self.cfg.mode {
            ControlMode::Mppt => {
                let p_ref = curves.mppt_power(omega_r).clamp(0.0, ceiling);
                ControlOutput {
                    p_ref,
                    beta_ref: beta_base,
                    t_g_ref: 0.0,
                    support_power: 0.0,
                    d_prime: None,
                }
            }
            ControlMode::Traditional { k_v, inv_r } => {
                let base = curves.deloaded_power(omega_r);
                let extra = afc_power(delta_f, dfdt, k_v, inv_r, self.cfg.nominal_freq);
                let p_ref = (base + extra).clamp(0.0, ceiling);
                let (beta_de, p_opt) = self.cached_deloaded_pitch(turbine, curves, v_measured)?;
                ControlOutput {
                    p_ref,
                    beta_ref: turbine.clamp_pitch(beta_base + beta_de),
                    t_g_ref: 0.0,
                    support_power: p_ref - base.clamp(0.0, ceiling),
                    d_prime: Some(real_deload_ratio(
                        p_ref,
                        p_opt,
                        curves.p_nor,
                        v_measured,
                        self.cfg.area_v3,
                    )),
                }
            }
            ControlMode::Proposed => {
                let base = curves.deloaded_power(omega_r);
                let p_ref = self.proposed_power(curves, omega_r, delta_f, dfdt)?.clamp(0.0, ceiling);
                let comp = self
                    .cfg
                    .pitch_compensation
                    .compensate(base, delta_f, curves.delta_f_max);
                ControlOutput {
                    p_ref,
                    beta_ref: turbine.clamp_pitch(beta_base + comp),
                    t_g_ref: 0.0,
                    support_power: p_ref - base.clamp(0.0, ceiling),
                    d_prime: None,
                }
            }
        };
        Ok(ControlOutput {
            t_g_ref: torque_reference(out.p_ref, omega_r, turbine),
            ..out
        })
    }

    fn proposed_power(
        &self,
        curves: &CurveSet,
        omega_r: f64,
        delta_f: f64,
        dfdt: f64,
    ) -> Result<f64, ControlError> {
        if !self.measurement.support_enabled {
            return Ok(curves.deloaded_power(omega_r));
        }
        if !self.latch.active {
            // Inside the arming deadband there is no event to scale against.
            return Ok(curves.droop_power(omega_r, delta_f));
        }
        Ok(curves.inertia_power(omega_r, delta_f, dfdt, &self.latch)?)
    }

    fn cached_deloaded_pitch(
        &mut self,
        turbine: &TurbineParams,
        curves: &CurveSet,
        v: f64,
    ) -> Result<(f64, f64), ControlError> {
        if let Some((cached_v, beta, p_opt)) = self.deload_pitch_cache {
            if cached_v == v {
                return Ok((beta, p_opt));
            }
        }
        let beta = deloaded_pitch(turbine, curves, &self.cfg, v)?;
        let p_opt = turbine.optimum_capture(v, 0.0).1;
        self.deload_pitch_cache = Some((v, beta, p_opt));
        Ok((beta, p_opt))
    }
}
