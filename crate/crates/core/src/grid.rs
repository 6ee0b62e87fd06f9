//! Single-bus frequency dynamics with a reheat thermal plant and a hydro
//! plant with transient-droop governor. All powers are deviations in pu of
//! the system base; frequency deviation is in pu of nominal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid plant parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalParams {
    pub capacity_mw: f64,
    pub droop: f64,
    pub governor_tg: f64,
    /// High-pressure fraction passing the reheater immediately.
    pub hp_fraction: f64,
    pub reheat_trh: f64,
    pub turbine_tch: f64,
    pub inertia_h: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        Self {
            capacity_mw: 700.0,
            droop: 0.05,
            governor_tg: 0.2,
            hp_fraction: 0.3,
            reheat_trh: 7.0,
            turbine_tch: 0.3,
            inertia_h: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydroParams {
    pub capacity_mw: f64,
    pub governor_tg: f64,
    pub permanent_droop: f64,
    pub temporary_droop: f64,
    pub reset_tr: f64,
    pub water_tw: f64,
    pub inertia_h: f64,
}

impl Default for HydroParams {
    fn default() -> Self {
        Self {
            capacity_mw: 400.0,
            governor_tg: 0.2,
            permanent_droop: 0.05,
            temporary_droop: 0.38,
            reset_tr: 5.0,
            water_tw: 1.0,
            inertia_h: 3.0,
        }
    }
}

impl HydroParams {
    /// Lag of the transient-droop compensator, (R_t / R_p)·T_R.
    pub fn compensator_lag(&self) -> f64 {
        self.temporary_droop / self.permanent_droop * self.reset_tr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    pub thermal: ThermalParams,
    pub hydro: HydroParams,
    pub wind_capacity_mw: f64,
    pub system_base_mw: f64,
    /// pu power per pu frequency
    pub load_damping_d: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            thermal: ThermalParams::default(),
            hydro: HydroParams::default(),
            wind_capacity_mw: 150.0,
            system_base_mw: 1250.0,
            load_damping_d: 1.0,
        }
    }
}

impl PlantParams {
    pub fn thermal_share(&self) -> f64 {
        self.thermal.capacity_mw / self.system_base_mw
    }

    pub fn hydro_share(&self) -> f64 {
        self.hydro.capacity_mw / self.system_base_mw
    }

    pub fn wind_share(&self) -> f64 {
        self.wind_capacity_mw / self.system_base_mw
    }

    /// Capacity-weighted inertia of the synchronous plants on the system base.
    pub fn h_sys(&self) -> f64 {
        (self.thermal.inertia_h * self.thermal.capacity_mw
            + self.hydro.inertia_h * self.hydro.capacity_mw)
            / self.system_base_mw
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let bad = |field, reason: &str| {
            Err(GridError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        let t = &self.thermal;
        let h = &self.hydro;
        let positive = [
            ("thermal.capacity_mw", t.capacity_mw),
            ("thermal.droop", t.droop),
            ("thermal.governor_tg", t.governor_tg),
            ("thermal.reheat_trh", t.reheat_trh),
            ("thermal.turbine_tch", t.turbine_tch),
            ("thermal.inertia_h", t.inertia_h),
            ("hydro.capacity_mw", h.capacity_mw),
            ("hydro.governor_tg", h.governor_tg),
            ("hydro.permanent_droop", h.permanent_droop),
            ("hydro.temporary_droop", h.temporary_droop),
            ("hydro.reset_tr", h.reset_tr),
            ("hydro.water_tw", h.water_tw),
            ("hydro.inertia_h", h.inertia_h),
            ("system_base_mw", self.system_base_mw),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return bad(field, "must be a finite value > 0");
            }
        }
        if !(0.0..=1.0).contains(&t.hp_fraction) {
            return bad("thermal.hp_fraction", "must lie in [0, 1]");
        }
        if !(self.wind_capacity_mw >= 0.0) {
            return bad("wind_capacity_mw", "must be >= 0");
        }
        if !(self.load_damping_d >= 0.0) {
            return bad("load_damping_d", "must be >= 0");
        }
        let total = t.capacity_mw + h.capacity_mw + self.wind_capacity_mw;
        if (total - self.system_base_mw).abs() > 1e-6 * self.system_base_mw {
            return bad("system_base_mw", "must equal the sum of plant capacities");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub governor: f64,
    pub turbine: f64,
    pub reheat: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub pilot: f64,
    /// Lagged pilot signal inside the transient-droop compensator.
    pub compensator: f64,
    /// Lagged gate signal inside the water-column model.
    pub water: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    /// pu of nominal frequency
    pub delta_f: f64,
    pub thermal: ThermalState,
    pub hydro: HydroState,
    /// Load deviation, pu of system base.
    pub p_load: f64,
}

impl ThermalState {
    pub fn derivative(&self, p: &ThermalParams, delta_f: f64) -> Self {
        Self {
            governor: (-delta_f / p.droop - self.governor) / p.governor_tg,
            turbine: (self.governor - self.turbine) / p.turbine_tch,
            reheat: (self.turbine - self.reheat) / p.reheat_trh,
        }
    }

    /// Mechanical power deviation on the plant's own base.
    pub fn output(&self, p: &ThermalParams) -> f64 {
        p.hp_fraction * self.turbine + (1.0 - p.hp_fraction) * self.reheat
    }

    fn add_scaled(&self, d: &Self, h: f64) -> Self {
        Self {
            governor: self.governor + h * d.governor,
            turbine: self.turbine + h * d.turbine,
            reheat: self.reheat + h * d.reheat,
        }
    }
}

impl HydroState {
    fn gate(&self, p: &HydroParams) -> f64 {
        let a = p.reset_tr / p.compensator_lag();
        a * self.pilot + (1.0 - a) * self.compensator
    }

    pub fn derivative(&self, p: &HydroParams, delta_f: f64) -> Self {
        let gate = self.gate(p);
        Self {
            pilot: (-delta_f / p.permanent_droop - self.pilot) / p.governor_tg,
            compensator: (self.pilot - self.compensator) / p.compensator_lag(),
            water: (gate - self.water) / (0.5 * p.water_tw),
        }
    }

    /// (1 − T_W s)/(1 + T_W s / 2) applied to the gate: −2·gate + 3·lagged gate.
    pub fn output(&self, p: &HydroParams) -> f64 {
        -2.0 * self.gate(p) + 3.0 * self.water
    }

    fn add_scaled(&self, d: &Self, h: f64) -> Self {
        Self {
            pilot: self.pilot + h * d.pilot,
            compensator: self.compensator + h * d.compensator,
            water: self.water + h * d.water,
        }
    }
}

impl GridState {
    pub fn p_thermal(&self, p: &PlantParams) -> f64 {
        p.thermal_share() * self.thermal.output(&p.thermal)
    }

    pub fn p_hydro(&self, p: &PlantParams) -> f64 {
        p.hydro_share() * self.hydro.output(&p.hydro)
    }

    /// Time derivative of the whole grid state given the wind plant's power
    /// deviation on the system base. `p_load` is held.
    pub fn derivative(&self, p: &PlantParams, p_wind: f64) -> Self {
        let imbalance = self.p_thermal(p) + self.p_hydro(p) + p_wind
            - self.p_load
            - p.load_damping_d * self.delta_f;
        Self {
            delta_f: imbalance / (2.0 * p.h_sys()),
            thermal: self.thermal.derivative(&p.thermal, self.delta_f),
            hydro: self.hydro.derivative(&p.hydro, self.delta_f),
            p_load: 0.0,
        }
    }

    pub fn add_scaled(&self, d: &Self, h: f64) -> Self {
        Self {
            delta_f: self.delta_f + h * d.delta_f,
            thermal: self.thermal.add_scaled(&d.thermal, h),
            hydro: self.hydro.add_scaled(&d.hydro, h),
            p_load: self.p_load,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.delta_f,
            self.thermal.governor,
            self.thermal.turbine,
            self.thermal.reheat,
            self.hydro.pilot,
            self.hydro.compensator,
            self.hydro.water,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

fn rk4<S: Copy>(s: S, dt: f64, f: impl Fn(&S) -> S, add: impl Fn(&S, &S, f64) -> S) -> S {
    let k1 = f(&s);
    let k2 = f(&add(&s, &k1, 0.5 * dt));
    let k3 = f(&add(&s, &k2, 0.5 * dt));
    let k4 = f(&add(&s, &k3, dt));
    let s = add(&s, &k1, dt / 6.0);
    let s = add(&s, &k2, dt / 3.0);
    let s = add(&s, &k3, dt / 3.0);
    add(&s, &k4, dt / 6.0)
}

/// Advances the thermal plant one step with Δf held; returns its output on
/// the system base.
pub fn step_thermal(p: &PlantParams, state: &mut GridState, dt: f64) -> f64 {
    let df = state.delta_f;
    state.thermal = rk4(
        state.thermal,
        dt,
        |s| s.derivative(&p.thermal, df),
        |s, d, h| s.add_scaled(d, h),
    );
    state.p_thermal(p)
}

/// Advances the hydro plant one step with Δf held; returns its output on the
/// system base.
pub fn step_hydro(p: &PlantParams, state: &mut GridState, dt: f64) -> f64 {
    let df = state.delta_f;
    state.hydro = rk4(
        state.hydro,
        dt,
        |s| s.derivative(&p.hydro, df),
        |s, d, h| s.add_scaled(d, h),
    );
    state.p_hydro(p)
}

/// Swing equation 2H·dΔf/dt = P_gen − P_load − D·Δf with generation and
/// load held over the step. Returns the new Δf.
pub fn step_swing(p: &PlantParams, state: &mut GridState, p_gen_total: f64, p_load: f64, dt: f64) -> f64 {
    let two_h = 2.0 * p.h_sys();
    let d = p.load_damping_d;
    let net = p_gen_total - p_load;
    state.delta_f = if d > 0.0 {
        let target = net / d;
        target + (state.delta_f - target) * (-d * dt / two_h).exp()
    } else {
        state.delta_f + net * dt / two_h
    };
    state.delta_f
}

/// Closed-form post-disturbance frequency deviation (pu) for a sustained
/// load step, from the aggregate droop and damping.
pub fn analytic_steady_frequency(p: &PlantParams, delta_p_load: f64, wind_droop_equiv: f64) -> f64 {
    let beta = p.thermal_share() / p.thermal.droop
        + p.hydro_share() / p.hydro.permanent_droop
        + p.load_damping_d
        + wind_droop_equiv;
    -delta_p_load / beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hold(p: &PlantParams, df: f64, seconds: f64) -> GridState {
        let mut s = GridState {
            delta_f: df,
            ..Default::default()
        };
        let dt = 1e-3;
        for _ in 0..(seconds / dt) as usize {
            step_thermal(p, &mut s, dt);
            step_hydro(p, &mut s, dt);
        }
        s
    }

    #[test]
    fn aggregate_inertia() {
        assert_relative_eq!(PlantParams::default().h_sys(), 3.76, epsilon = 1e-12);
        PlantParams::default().validate().unwrap();
    }

    #[test]
    fn zero_deviation_is_quiescent() {
        let p = PlantParams::default();
        let s = hold(&p, 0.0, 5.0);
        assert_eq!(s, GridState::default());
    }

    #[test]
    fn steady_contributions() {
        let p = PlantParams::default();
        let s = hold(&p, -0.005, 400.0);
        assert_relative_eq!(s.p_thermal(&p), 0.056, max_relative = 1e-6);
        assert_relative_eq!(s.p_hydro(&p), 0.032, max_relative = 1e-4);
    }

    #[test]
    fn thermal_reheat_first_stage() {
        let p = PlantParams::default();
        // After the fast lags settle but well before the reheater responds.
        let s = hold(&p, -0.005, 2.0);
        let fraction = s.p_thermal(&p) / 0.056;
        assert!(fraction > 0.3 && fraction < 0.45, "{fraction}");
    }

    #[test]
    fn hydro_is_non_minimum_phase() {
        let p = PlantParams::default();
        let mut s = GridState {
            delta_f: -0.005,
            ..Default::default()
        };
        let first = step_hydro(&p, &mut s, 1e-3);
        assert!(first < 0.0, "{first}");
        let s = hold(&p, -0.005, 400.0);
        assert!(s.p_hydro(&p) > 0.0);
    }

    #[test]
    fn swing_initial_rocof() {
        let p = PlantParams::default();
        let mut s = GridState::default();
        let dt = 1e-6;
        let df = step_swing(&p, &mut s, 0.0, 0.1, dt);
        let rocof_hz = df / dt * 50.0;
        assert_relative_eq!(rocof_hz, -0.1 / (2.0 * 3.76) * 50.0, max_relative = 1e-5);
        let mut s = GridState::default();
        assert_eq!(step_swing(&p, &mut s, 0.05, 0.05, 0.01), 0.0);
    }

    #[test]
    fn analytic_steady_state() {
        let p = PlantParams::default();
        assert_relative_eq!(analytic_steady_frequency(&p, 0.1, 0.0), -0.1 / 18.6, epsilon = 1e-15);
        assert_eq!(analytic_steady_frequency(&p, 0.0, 0.0), 0.0);
        let f_hz = 50.0 * (1.0 + analytic_steady_frequency(&p, 0.1, 0.0));
        assert!((f_hz - 49.731).abs() < 1e-3);
    }

    #[test]
    fn validation_checks_capacity_sum() {
        let mut p = PlantParams::default();
        p.hydro.capacity_mw = 300.0;
        assert!(p.validate().is_err());
    }
}
