//! The power-versus-rotor-speed curve family used by the de-loaded turbine
//! controllers: MPPT, de-loaded, droop (frequency-shifted), torque-limit and
//! inertia curves, plus the event latch that parametrises the inertia curve.

mod equilibrium;
mod fit;

pub use equilibrium::{curve_equilibrium, solve_equilibrium, CurveKind};
pub use fit::{
    fit_deloaded_constant, fit_pitch_polynomial, pitch_compensation_table, DeloadFit, DeloadPoint, PitchFit,
    PitchTablePoint, DEFAULT_FIT_WINDS, pitch_table_winds,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aero::TurbineParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("invalid curve parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("event latch not armed")]
    LatchNotArmed,
    #[error("no equilibrium in rotor range at {wind} m/s")]
    NoEquilibrium { wind: f64 },
    #[error("wind speed {0} m/s outside the equilibrium search range")]
    WindOutOfRange(f64),
    #[error("reserve fraction {0} outside (0, 0.9)")]
    ReserveOutOfRange(f64),
    #[error("fit did not converge: {0}")]
    FitFailed(String),
}

/// Breakpoints and constants of every curve in the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSet {
    pub omega_min: f64,
    pub omega_0: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_max: f64,
    pub k_opt: f64,
    pub k_de: f64,
    /// Constant of the lower-limit curve (80% of available power).
    pub k_de80: f64,
    pub p_nor: f64,
    pub d_reserve: f64,
    /// Hz
    pub delta_f_max: f64,
    #[serde(skip)]
    pub power_limit_pu: f64,
    #[serde(skip)]
    pub torque_max_pu: f64,
    #[serde(skip)]
    pub torque_min_pu: f64,
}

impl Default for CurveSet {
    fn default() -> Self {
        Self::calibrated(&TurbineParams::default())
            .expect("default turbine yields a valid curve set")
    }
}

impl CurveSet {
    /// Breakpoints with the MPPT constant pinned to the calibrated optimum and
    /// both de-loaded constants fitted against the turbine's capture curve.
    pub fn calibrated(turbine: &TurbineParams) -> Result<Self, CurveError> {
        let mut set = Self::with_constants(turbine, 0.0, 0.0);
        set.k_opt = crate::aero::BASE_OPTIMUM_POWER_PU / crate::aero::BASE_ROTOR_SPEED_PU.powi(3);
        set.k_de = fit_deloaded_constant(turbine, set.d_reserve, DEFAULT_FIT_WINDS)?.k;
        set.k_de80 = fit_deloaded_constant(turbine, 2.0 * set.d_reserve, DEFAULT_FIT_WINDS)?.k;
        set.validate()?;
        Ok(set)
    }

    /// Same breakpoints with the published de-loaded constants (0.2172 / 0.1956).
    pub fn published_constants(turbine: &TurbineParams) -> Self {
        let mut set = Self::with_constants(turbine, 0.2172, 0.1956);
        set.k_opt = crate::aero::BASE_OPTIMUM_POWER_PU / crate::aero::BASE_ROTOR_SPEED_PU.powi(3);
        set
    }

    fn with_constants(turbine: &TurbineParams, k_de: f64, k_de80: f64) -> Self {
        Self {
            omega_min: 0.7,
            omega_0: 0.71,
            omega_1: 1.15,
            omega_2: 1.15,
            omega_max: 1.21,
            k_opt: 0.0,
            k_de,
            k_de80,
            p_nor: 1.0,
            d_reserve: 0.1,
            delta_f_max: 0.5,
            power_limit_pu: turbine.power_limit_pu,
            torque_max_pu: turbine.torque_max_pu,
            torque_min_pu: turbine.torque_min_pu,
        }
    }

    /// Copies the torque and power limits from the turbine.
    pub fn sync_limits(&mut self, turbine: &TurbineParams) {
        self.power_limit_pu = turbine.power_limit_pu;
        self.torque_max_pu = turbine.torque_max_pu;
        self.torque_min_pu = turbine.torque_min_pu;
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        let bad = |field, reason: &str| {
            Err(CurveError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        let all = [
            self.omega_min,
            self.omega_0,
            self.omega_1,
            self.omega_2,
            self.omega_max,
            self.k_opt,
            self.k_de,
            self.k_de80,
            self.p_nor,
            self.d_reserve,
            self.delta_f_max,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("curves", "all constants must be finite");
        }
        if !(self.omega_min > 0.0
            && self.omega_min < self.omega_0
            && self.omega_0 < self.omega_1
            && self.omega_1 <= self.omega_2
            && self.omega_2 < self.omega_max)
        {
            return bad(
                "omega_*",
                "breakpoints must satisfy 0 < min < 0 < 1 <= 2 < max",
            );
        }
        if !(0.0 < self.k_de80 && self.k_de80 < self.k_de && self.k_de < self.k_opt) {
            return bad("k_*", "constants must satisfy 0 < k_de80 < k_de < k_opt");
        }
        if !(self.d_reserve > 0.0 && 2.0 * self.d_reserve < 1.0) {
            return bad("d_reserve", "must lie in (0, 0.5)");
        }
        if !(self.delta_f_max > 0.0) {
            return bad("delta_f_max", "must be > 0");
        }
        if !(self.p_nor > 0.0) {
            return bad("p_nor", "must be > 0");
        }
        let cube = self.omega_2.powi(3);
        for (field, k, plateau) in [
            ("k_opt", self.k_opt, self.p_nor),
            ("k_de", self.k_de, self.deloaded_plateau()),
            ("k_de80", self.k_de80, self.lower_plateau()),
        ] {
            if k * cube > plateau {
                return bad(field, "cubic zone exceeds the plateau; curve would not be monotone");
            }
        }
        Ok(())
    }

    pub fn deloaded_plateau(&self) -> f64 {
        (1.0 - self.d_reserve) * self.p_nor
    }

    pub fn lower_plateau(&self) -> f64 {
        (1.0 - 2.0 * self.d_reserve) * self.p_nor
    }

    /// Generic four-branch curve: start-up line, cubic law, constant-speed
    /// line up to `omega_max`, constant plateau beyond.
    ///
    /// The start-up branch is the line from `(omega_min, 0)` to the cubic at
    /// `omega_0`, and the constant-speed branch is the line from the cubic at
    /// `omega_2` to the plateau at `omega_max`, so every curve is continuous.
    pub fn shaped(&self, omega_r: f64, k: f64, plateau: f64) -> f64 {
        if omega_r <= self.omega_min {
            0.0
        } else if omega_r < self.omega_0 {
            k * self.omega_0.powi(3) * (omega_r - self.omega_min) / (self.omega_0 - self.omega_min)
        } else if omega_r < self.omega_2 {
            k * omega_r.powi(3)
        } else if omega_r < self.omega_max {
            let knee = k * self.omega_2.powi(3);
            knee + (plateau - knee) * (omega_r - self.omega_2) / (self.omega_max - self.omega_2)
        } else {
            plateau
        }
    }

    pub fn mppt_power(&self, omega_r: f64) -> f64 {
        self.shaped(omega_r, self.k_opt, self.p_nor)
    }

    pub fn deloaded_power(&self, omega_r: f64) -> f64 {
        self.shaped(omega_r, self.k_de, self.deloaded_plateau())
    }

    /// Lower limit of the droop family (the 80%-power curve).
    pub fn lower_limit_power(&self, omega_r: f64) -> f64 {
        self.shaped(omega_r, self.k_de80, self.lower_plateau())
    }

    /// Normalised frequency deviation Δf/Δf_max clamped to [-1, 1].
    pub fn normalized_deviation(&self, delta_f: f64) -> f64 {
        (delta_f / self.delta_f_max).clamp(-1.0, 1.0)
    }

    /// Cubic-law constant of the droop curve at the given deviation.
    pub fn droop_constant(&self, delta_f: f64) -> f64 {
        let x = self.normalized_deviation(delta_f);
        if x < 0.0 {
            self.k_de - (self.k_opt - self.k_de) * x
        } else {
            self.k_de - (self.k_de - self.k_de80) * x
        }
    }

    /// De-loaded curve shifted toward MPPT (under-frequency) or toward the
    /// 80% curve (over-frequency), bounded by both.
    pub fn droop_power(&self, omega_r: f64, delta_f: f64) -> f64 {
        let x = self.normalized_deviation(delta_f);
        let plateau = (1.0 - self.d_reserve - self.d_reserve * x) * self.p_nor;
        let raw = self.shaped(omega_r, self.droop_constant(delta_f), plateau);
        raw.clamp(self.lower_limit_power(omega_r), self.mppt_power(omega_r))
    }

    /// P_Tlim(ω) = min(P_limit, T_max·ω).
    pub fn torque_limit_power(&self, omega_r: f64) -> f64 {
        self.power_limit_pu.min(self.torque_max_pu * omega_r.max(0.0))
    }

    /// Upper inertial line through `(omega_0, P_de(omega_0))` and
    /// `(omega_a, P_Tlim(omega_a))`.
    pub fn upper_inertia_power(&self, omega_r: f64, latch: &EventLatch) -> f64 {
        let anchor = self.deloaded_power(self.omega_0);
        let span = latch.omega_a - self.omega_0;
        if span.abs() < 1e-9 {
            return anchor;
        }
        let slope = (self.torque_limit_power(latch.omega_a) - anchor) / span;
        anchor + slope * (omega_r - self.omega_0)
    }

    /// Lower inertial line through `(omega_1, k_de80·omega_1³)` and
    /// `(omega_a, T_min·omega_a)`.
    pub fn lower_inertia_power(&self, omega_r: f64, latch: &EventLatch) -> f64 {
        let anchor = self.k_de80 * self.omega_1.powi(3);
        let span = latch.omega_a - self.omega_1;
        if span.abs() < 1e-9 {
            return anchor;
        }
        let slope = (self.torque_min_pu * latch.omega_a - anchor) / span;
        anchor + slope * (omega_r - self.omega_1)
    }

    /// Inertia curve: the droop curve pulled toward the upper (or lower)
    /// inertial line in proportion to |df/dt| / max|df/dt| of the event.
    ///
    /// Only a falling frequency below nominal (or a rising one above nominal)
    /// engages the inertial lines; every other combination, including the
    /// recovery phase, stays on the droop curve.
    pub fn inertia_power(
        &self,
        omega_r: f64,
        delta_f: f64,
        dfdt: f64,
        latch: &EventLatch,
    ) -> Result<f64, CurveError> {
        let droop = self.droop_power(omega_r, delta_f);
        let under = dfdt < 0.0 && delta_f < 0.0;
        let over = dfdt > 0.0 && delta_f > 0.0;
        if !(under || over) {
            return Ok(droop);
        }
        if !latch.active {
            return Err(CurveError::LatchNotArmed);
        }
        let ratio = latch.ratio(dfdt);
        if under {
            let target = self.upper_inertia_power(omega_r, latch).max(droop);
            Ok((droop + (target - droop) * ratio).min(self.power_limit_pu))
        } else {
            let target = self.lower_inertia_power(omega_r, latch).min(droop).max(0.0);
            Ok(droop + (target - droop) * ratio)
        }
    }
}

/// Deadbands and hold time of the event latch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatchConfig {
    /// Hz
    pub arm_deadband: f64,
    /// Hz
    pub release_deadband: f64,
    /// s
    pub release_hold: f64,
}

impl Default for LatchConfig {
    fn default() -> Self {
        Self {
            arm_deadband: 0.03,
            release_deadband: 0.03,
            release_hold: 5.0,
        }
    }
}

/// Per-event memory of the largest |df/dt| and the rotor speed at detection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLatch {
    /// Hz/s
    pub dfdt_max_abs: f64,
    pub omega_a: f64,
    pub active: bool,
    quiet_time: f64,
}

impl EventLatch {
    /// |df/dt| relative to the stored maximum, clamped to [0, 1].
    pub fn ratio(&self, dfdt: f64) -> f64 {
        if self.dfdt_max_abs > 0.0 {
            (dfdt.abs() / self.dfdt_max_abs).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Arms on |Δf| above the arming deadband, tracks the running maximum of
    /// |df/dt| while armed, and resets once |Δf| stays inside the release
    /// deadband for the hold time.
    pub fn update(&mut self, cfg: &LatchConfig, delta_f: f64, dfdt: f64, omega_r: f64, dt: f64) {
        if !self.active {
            if delta_f.abs() > cfg.arm_deadband {
                *self = Self {
                    dfdt_max_abs: dfdt.abs().max(f64::MIN_POSITIVE),
                    omega_a: omega_r,
                    active: true,
                    quiet_time: 0.0,
                };
            }
            return;
        }
        self.dfdt_max_abs = self.dfdt_max_abs.max(dfdt.abs());
        if delta_f.abs() < cfg.release_deadband {
            self.quiet_time += dt;
            if self.quiet_time + 1e-9 >= cfg.release_hold {
                *self = Self::default();
            }
        } else {
            self.quiet_time = 0.0;
        }
    }
}
