//! Closed-form and independent-computation checks on the numerics.

use windfreq::aero::{step_drivetrain, TurbineParams, TurbineState};
use windfreq::control::{ControlMode, Washout};
use windfreq::curves::{curve_equilibrium, CurveKind, CurveSet, DEFAULT_FIT_WINDS};
use windfreq::engine::{case_preset, run_scenario, CaseId, ScenarioConfig, WindProfile};
use windfreq::grid::{analytic_steady_frequency, PlantParams};

#[test]
fn washout_reproduces_ramp_exactly() {
    let (dt, tw, slope) = (1e-3, 0.01, -0.2);
    let mut w = Washout::default();
    w.step(50.0, dt, tw);
    for k in 1..=200 {
        let t = k as f64 * dt;
        let y = w.step(50.0 + slope * t, dt, tw);
        let exact = slope * (1.0 - (-t / tw).exp());
        assert!((y - exact).abs() <= 1e-9 + 1e-6 * exact.abs(), "t {t}: {y} vs {exact}");
    }
}

#[test]
fn washout_step_response() {
    let (dt, tw, step) = (1e-3, 0.01, 0.05);
    let mut w = Washout::default();
    w.step(50.0, dt, tw);
    let mut area = 0.0;
    for k in 1..=100 {
        let y = w.step(50.0 + step, dt, tw);
        area += y * dt;
        // A step between samples sits mid-interval under linear interpolation.
        let t = k as f64 * dt - 0.5 * dt;
        let exact = step / tw * (-t / tw).exp();
        assert!((y - exact).abs() / exact < 1e-2, "k {k}: {y} vs {exact}");
    }
    assert!((area - step).abs() / step < 1e-3);
}

#[test]
fn drivetrain_free_deceleration_is_linear() {
    let p = TurbineParams::default();
    let (t_g, w0) = (0.4, 1.1);
    let mut s = TurbineState { omega_r: w0, beta: 0.0, t_g, p_m: 0.0 };
    for _ in 0..5000 {
        s = step_drivetrain(&p, &s, 0.0, t_g, 1e-3).unwrap();
    }
    let exact = w0 - t_g * 5.0 / (2.0 * p.inertia_constant_h);
    assert!((s.omega_r - exact).abs() < 1e-9);
}

#[test]
fn drivetrain_constant_power_and_torque() {
    // 2H dω/dt = P/ω − T  ⇒  t(ω) = 2H [ −(ω−ω0)/T − P/T² ln((P − Tω)/(P − Tω0)) ].
    let p = TurbineParams::default();
    let (power, torque, w0) = (0.6, 0.7, 1.0);
    let two_h = 2.0 * p.inertia_constant_h;
    let time_at = |w: f64| {
        two_h * (-(w - w0) / torque - power / torque.powi(2) * ((power - torque * w) / (power - torque * w0)).ln())
    };
    let mut s = TurbineState { omega_r: w0, beta: 0.0, t_g: torque, p_m: power };
    let dt = 1e-3;
    for k in 1..=10_000 {
        s = step_drivetrain(&p, &s, power, torque, dt).unwrap();
        if k % 1000 == 0 {
            let t = k as f64 * dt;
            let rate = (power / s.omega_r - torque) / two_h;
            let omega_err = (time_at(s.omega_r) - t) * rate;
            assert!(omega_err.abs() < 1e-6, "t {t}: {omega_err}");
        }
    }
}

#[test]
fn deloaded_constant_reproduces_reserve_equilibria() {
    let t = TurbineParams::default();
    let c = CurveSet::default();
    for &v in DEFAULT_FIT_WINDS {
        let (w_opt, p_opt) = t.optimum_capture(v, 0.0);
        let (w, p) = curve_equilibrium(&t, &c, v, CurveKind::Deloaded, 0.0).unwrap();
        // The start-up branch takes over near omega_min at the lowest winds.
        if w < c.omega_0 {
            continue;
        }
        assert!(w > w_opt, "{v}: over-speed side");
        assert!((p - 0.9 * p_opt).abs() / (0.9 * p_opt) < 1e-2, "{v}: {p} vs {}", 0.9 * p_opt);
    }
}

#[test]
fn mppt_steady_frequency_matches_droop_aggregation() {
    let cfg = case_preset(CaseId::Case1a, ControlMode::Mppt);
    let (_, m) = run_scenario(&cfg).unwrap();
    let plant = PlantParams::default();
    let exact = 50.0 * (1.0 + analytic_steady_frequency(&plant, 0.1, 0.0));
    assert!((m.steady_f_hz - exact).abs() < 1e-3, "{} vs {exact}", m.steady_f_hz);
}

fn quiet(mode: ControlMode, v: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("quiet", WindProfile::Constant { v }, mode);
    cfg.load_events.clear();
    cfg.duration = 30.0;
    cfg
}

#[test]
fn operating_point_persists_without_events() {
    for mode in [ControlMode::Mppt, ControlMode::LARGE_GAINS, ControlMode::Proposed] {
        for v in [7.0, 8.0, 11.0, 13.6] {
            let (ts, _) = run_scenario(&quiet(mode, v)).unwrap();
            let f_dev = ts.f_hz.iter().map(|f| (f - 50.0).abs()).fold(0.0, f64::max);
            let w0 = ts.omega_r[0];
            let w_dev = ts.omega_r.iter().map(|w| (w - w0).abs()).fold(0.0, f64::max);
            let b0 = ts.beta_deg[0];
            let b_dev = ts.beta_deg.iter().map(|b| (b - b0).abs()).fold(0.0, f64::max);
            let label = mode.label();
            assert!(f_dev < 1e-6, "{label} @ {v}: f drift {f_dev}");
            assert!(w_dev < 1e-5, "{label} @ {v}: omega drift {w_dev}");
            assert!(b_dev < 1e-6, "{label} @ {v}: pitch drift {b_dev}");
            assert!(ts.support.iter().all(|&s| s));
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = case_preset(CaseId::Case6, ControlMode::Proposed);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn halving_dt_barely_moves_the_nadir() {
    for mode in [ControlMode::Mppt, ControlMode::Proposed] {
        let coarse = case_preset(CaseId::Case1a, mode);
        let mut fine = coarse.clone();
        fine.dt /= 2.0;
        fine.output_decimation *= 2;
        let (_, a) = run_scenario(&coarse).unwrap();
        let (_, b) = run_scenario(&fine).unwrap();
        assert!((a.fn_hz - b.fn_hz).abs() < 1e-3, "{}: {} vs {}", mode.label(), a.fn_hz, b.fn_hz);
    }
}
