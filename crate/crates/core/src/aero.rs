//! Wind-turbine physics: aerodynamic capture, one-mass drivetrain and the
//! generator/pitch actuators of the simplified DFIG model.
//!
//! Everything is expressed in per-unit on the turbine base except wind speed
//! (m/s), pitch (degrees) and time (s).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{bisect, golden_section_max};

/// Rotor speed below which the drivetrain model is considered stalled.
pub const STALL_GUARD_PU: f64 = 0.1;

/// Smallest wind speed for which a tip-speed ratio is defined.
pub const WIND_FLOOR_MPS: f64 = 0.1;

/// Wind speed at which the calibrated optimum capture is pinned.
pub const BASE_WIND_MPS: f64 = 12.0;
/// Rotor speed (pu) that corresponds to the optimum tip-speed ratio at the base wind speed.
pub const BASE_ROTOR_SPEED_PU: f64 = 1.2;
/// Optimum capture at the base wind speed (pu of the turbine base).
pub const BASE_OPTIMUM_POWER_PU: f64 = 0.73;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AeroError {
    #[error("wind speed below cut-in floor ({0} m/s)")]
    WindBelowFloor(f64),
    #[error("rotor stalled: speed {0:.4} pu reached the {STALL_GUARD_PU} pu guard")]
    RotorStalled(f64),
    #[error("invalid turbine parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Physical constants of one turbine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineParams {
    /// kg/m³
    pub air_density: f64,
    /// m
    pub rotor_radius: f64,
    /// W
    pub p_base: f64,
    /// Mechanical speed (rad/s) that corresponds to 1.0 pu rotor speed.
    pub omega_base_mech: f64,
    /// s
    pub inertia_constant_h: f64,
    /// Generator/converter lag, s.
    pub converter_tau_c: f64,
    /// Pitch servo lag, s. Zero means pure rate limiter.
    pub pitch_tau_p: f64,
    pub pitch_min_deg: f64,
    pub pitch_max_deg: f64,
    /// deg/s
    pub pitch_rate_max: f64,
    pub torque_max_pu: f64,
    pub torque_min_pu: f64,
    pub power_limit_pu: f64,
    /// Scale applied to the aerodynamic power so that the optimum capture at
    /// 12 m/s is 0.73 pu.
    pub power_calibration: f64,
}

impl Default for TurbineParams {
    fn default() -> Self {
        let mut params = Self {
            air_density: 1.255,
            rotor_radius: 38.0,
            p_base: 1.5e6,
            omega_base_mech: 1.0,
            inertia_constant_h: 4.5,
            converter_tau_c: 0.020,
            pitch_tau_p: 0.0,
            pitch_min_deg: 0.0,
            pitch_max_deg: 45.0,
            pitch_rate_max: 2.0,
            torque_max_pu: 1.07,
            torque_min_pu: 0.05,
            power_limit_pu: 1.1,
            power_calibration: 1.0,
        };
        params.calibrate();
        params
    }
}

impl TurbineParams {
    /// Re-derives `omega_base_mech` and `power_calibration` from the current
    /// geometry so that 1.2 pu at 12 m/s sits on the optimum tip-speed ratio and
    /// delivers 0.73 pu.
    pub fn calibrate(&mut self) {
        let (lambda_opt, _) = optimal_tip_speed_ratio();
        self.omega_base_mech =
            lambda_opt * BASE_WIND_MPS / (self.rotor_radius * BASE_ROTOR_SPEED_PU);
        self.power_calibration = 1.0;
        let uncalibrated =
            self.mechanical_power(BASE_WIND_MPS, BASE_ROTOR_SPEED_PU, 0.0);
        self.power_calibration = BASE_OPTIMUM_POWER_PU / uncalibrated;
    }

    pub fn validate(&self) -> Result<(), AeroError> {
        let bad = |field, reason: &str| {
            Err(AeroError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        let positive = [
            ("air_density", self.air_density),
            ("rotor_radius", self.rotor_radius),
            ("p_base", self.p_base),
            ("omega_base_mech", self.omega_base_mech),
            ("inertia_constant_h", self.inertia_constant_h),
            ("pitch_rate_max", self.pitch_rate_max),
            ("power_limit_pu", self.power_limit_pu),
            ("power_calibration", self.power_calibration),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return bad(field, "must be finite and > 0");
            }
        }
        if !(self.converter_tau_c >= 0.0) {
            return bad("converter_tau_c", "must be >= 0");
        }
        if !(self.pitch_tau_p >= 0.0) {
            return bad("pitch_tau_p", "must be >= 0");
        }
        if !(self.pitch_min_deg < self.pitch_max_deg) {
            return bad("pitch_min_deg", "must be below pitch_max_deg");
        }
        if !(self.torque_min_pu < self.torque_max_pu) {
            return bad("torque_min_pu", "must be below torque_max_pu");
        }
        Ok(())
    }

    pub fn tip_speed_ratio(&self, omega_r: f64, v: f64) -> Result<f64, AeroError> {
        if !(v > WIND_FLOOR_MPS) {
            return Err(AeroError::WindBelowFloor(v));
        }
        Ok(omega_r * self.omega_base_mech * self.rotor_radius / v)
    }

    /// Aerodynamic power in watts, before calibration.
    pub fn aerodynamic_power_w(&self, v: f64, omega_r: f64, beta: f64) -> f64 {
        let Ok(lambda) = self.tip_speed_ratio(omega_r, v) else {
            return 0.0;
        };
        let swept = std::f64::consts::PI * self.rotor_radius * self.rotor_radius;
        0.5 * self.air_density * swept * v.powi(3) * power_coefficient(lambda, beta)
    }

    /// Captured mechanical power, pu of the turbine base.
    pub fn mechanical_power(&self, v: f64, omega_r: f64, beta: f64) -> f64 {
        (self.power_calibration * self.aerodynamic_power_w(v, omega_r, beta) / self.p_base).max(0.0)
    }

    /// Largest capture over rotor speed at fixed pitch, and the speed attaining it.
    pub fn optimum_capture(&self, v: f64, beta: f64) -> (f64, f64) {
        if v <= WIND_FLOOR_MPS {
            return (0.0, 0.0);
        }
        // λ ranges over the lobe of the Cp curve, i.e. [3, 8] at zero pitch.
        let to_omega = |lambda: f64| lambda * v / (self.omega_base_mech * self.rotor_radius);
        let (omega, p) = golden_section_max(
            |w| self.mechanical_power(v, w, beta),
            to_omega(3.0),
            to_omega(8.0),
            1e-10,
        );
        (omega, p)
    }

    /// Smallest pitch at which capture at `(v, omega_r)` drops to `target`.
    ///
    /// Returns `Some(pitch_min)` when capture is already at or below the target
    /// and `None` when even full feather cannot shed enough power.
    pub fn pitch_for_power(&self, v: f64, omega_r: f64, target: f64) -> Option<f64> {
        let g = |beta: f64| self.mechanical_power(v, omega_r, beta) - target;
        let mut lo = self.pitch_min_deg;
        if g(lo) <= 0.0 {
            return Some(lo);
        }
        let step = 0.05;
        while lo < self.pitch_max_deg {
            let hi = (lo + step).min(self.pitch_max_deg);
            if g(hi) <= 0.0 {
                return bisect(g, lo, hi, 1e-12);
            }
            lo = hi;
        }
        None
    }

    pub fn clamp_pitch(&self, beta: f64) -> f64 {
        beta.clamp(self.pitch_min_deg, self.pitch_max_deg)
    }

    pub fn clamp_torque(&self, t_g: f64) -> f64 {
        t_g.clamp(self.torque_min_pu, self.torque_max_pu)
    }
}

/// Power coefficient Cp(λ, β), β in degrees.
///
/// Only the first lobe of the sine is physical; outside it (λ < 3, λ beyond the
/// zero crossing, or pitch past the singular denominator) capture is zero.
/// Negative values are clamped to zero.
pub fn power_coefficient(lambda: f64, beta: f64) -> f64 {
    let denom = 5.0 - 0.3 * beta;
    if !(denom > 0.0) || !lambda.is_finite() {
        return 0.0;
    }
    let arg = std::f64::consts::PI * (lambda - 3.0) / denom;
    if !(0.0..=std::f64::consts::PI).contains(&arg) {
        return 0.0;
    }
    let cp = (0.44 - 0.0167 * beta) * arg.sin() - 0.00184 * (lambda - 3.0) * beta;
    cp.max(0.0)
}

/// Numeric argmax of Cp over λ at zero pitch. Returns (λ_opt, Cp_max).
pub fn optimal_tip_speed_ratio() -> (f64, f64) {
    golden_section_max(|l| power_coefficient(l, 0.0), 3.0, 8.0, 1e-12)
}

/// Dynamic state of one turbine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineState {
    pub omega_r: f64,
    pub beta: f64,
    pub t_g: f64,
    pub p_m: f64,
}

/// dω_r/dt of the one-mass drivetrain: 2H·dω/dt = P_m/ω − T_g.
pub fn drivetrain_derivative(params: &TurbineParams, omega_r: f64, p_m: f64, t_g: f64) -> f64 {
    (p_m / omega_r - t_g) / (2.0 * params.inertia_constant_h)
}

/// Advances the rotor speed one RK4 step with mechanical power and generator
/// torque held over the step.
pub fn step_drivetrain(
    params: &TurbineParams,
    state: &TurbineState,
    p_m: f64,
    t_g: f64,
    dt: f64,
) -> Result<TurbineState, AeroError> {
    let f = |w: f64| drivetrain_derivative(params, w.max(STALL_GUARD_PU), p_m, t_g);
    let w = state.omega_r;
    let k1 = f(w);
    let k2 = f(w + 0.5 * dt * k1);
    let k3 = f(w + 0.5 * dt * k2);
    let k4 = f(w + dt * k3);
    let next = w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !(next > STALL_GUARD_PU) {
        return Err(AeroError::RotorStalled(next));
    }
    Ok(TurbineState {
        omega_r: next,
        p_m,
        ..*state
    })
}

/// Moves the generator torque through its first-order lag and the pitch
/// through the rate limiter (plus servo lag when `pitch_tau_p > 0`).
pub fn step_actuators(
    params: &TurbineParams,
    state: &TurbineState,
    t_g_ref: f64,
    beta_ref: f64,
    dt: f64,
) -> TurbineState {
    let target_t = params.clamp_torque(t_g_ref);
    let t_g = if params.converter_tau_c > 0.0 {
        let decay = (-dt / params.converter_tau_c).exp();
        target_t + (state.t_g - target_t) * decay
    } else {
        target_t
    };
    TurbineState {
        t_g: params.clamp_torque(t_g),
        beta: step_pitch(params, state.beta, beta_ref, dt),
        ..*state
    }
}

/// Rate-limited (and optionally lagged) pitch servo.
pub fn step_pitch(params: &TurbineParams, beta: f64, beta_ref: f64, dt: f64) -> f64 {
    let target = params.clamp_pitch(beta_ref);
    let desired = if params.pitch_tau_p > 0.0 {
        let decay = (-dt / params.pitch_tau_p).exp();
        target + (beta - target) * decay
    } else {
        target
    };
    let max_move = params.pitch_rate_max * dt;
    params.clamp_pitch(beta + (desired - beta).clamp(-max_move, max_move))
}
