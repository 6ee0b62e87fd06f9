//! Offline fits: de-loaded cubic-law constants and the pitch-compensation
//! polynomial.

use serde::{Deserialize, Serialize};

use super::{CurveError, CurveSet};
use crate::aero::TurbineParams;
use crate::control::PitchCompensation;
use crate::numeric::{bisect, polyfit, polyval};

/// Wind speeds 5.0, 5.5, ..., 10.0 m/s.
pub const DEFAULT_FIT_WINDS: &[f64] = &[
    5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeloadPoint {
    pub v: f64,
    pub omega_opt: f64,
    pub p_opt: f64,
    /// Over-speed rotor speed delivering the target power.
    pub omega: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeloadFit {
    pub reserve: f64,
    pub k: f64,
    pub points: Vec<DeloadPoint>,
    /// Largest |k·ω³ − target| / target over the fitted points.
    pub max_rel_dev: f64,
}

/// Least-squares cubic-law constant whose right-side intersection with the
/// zero-pitch capture curve delivers `(1 − reserve)·P_opt(v)`.
pub fn fit_deloaded_constant(
    turbine: &TurbineParams,
    reserve: f64,
    winds: &[f64],
) -> Result<DeloadFit, CurveError> {
    if !(reserve > 0.0 && reserve < 0.9) {
        return Err(CurveError::ReserveOutOfRange(reserve));
    }
    if winds.is_empty() {
        return Err(CurveError::FitFailed("no wind speeds to fit".into()));
    }
    let mut points = Vec::with_capacity(winds.len());
    for &v in winds {
        let (omega_opt, p_opt) = turbine.optimum_capture(v, 0.0);
        if !(p_opt > 0.0) {
            return Err(CurveError::FitFailed(format!("no capture at {v} m/s")));
        }
        let target = (1.0 - reserve) * p_opt;
        // Capture falls to zero at the far edge of the Cp lobe (λ = 8).
        let omega_edge = 8.0 * v / (turbine.omega_base_mech * turbine.rotor_radius);
        let omega = bisect(
            |w| turbine.mechanical_power(v, w, 0.0) - target,
            omega_opt,
            omega_edge,
            1e-13,
        )
        .ok_or_else(|| CurveError::FitFailed(format!("no over-speed point at {v} m/s")))?;
        points.push(DeloadPoint {
            v,
            omega_opt,
            p_opt,
            omega,
            target,
        });
    }
    let num: f64 = points.iter().map(|p| p.target * p.omega.powi(3)).sum();
    let den: f64 = points.iter().map(|p| p.omega.powi(6)).sum();
    let k = num / den;
    if !k.is_finite() {
        return Err(CurveError::FitFailed("degenerate least-squares system".into()));
    }
    let max_rel_dev = points
        .iter()
        .map(|p| (k * p.omega.powi(3) - p.target).abs() / p.target)
        .fold(0.0, f64::max);
    Ok(DeloadFit {
        reserve,
        k,
        points,
        max_rel_dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchTablePoint {
    pub v: f64,
    pub p_de: f64,
    pub beta_mppt: f64,
    pub omega_de: f64,
    pub delta_beta: f64,
}

/// Extra pitch needed by de-loaded operation over MPPT operation, versus the
/// de-loaded power, generated from the capture model.
///
/// The de-loaded rotor speed is where the de-loaded curve delivers
/// `(1 − reserve)·P_av`; pitch removes whatever the capture at that speed
/// still exceeds it by. On the cubic part over-speed alone is enough.
pub fn pitch_compensation_table(
    turbine: &TurbineParams,
    curves: &CurveSet,
    winds: &[f64],
) -> Result<Vec<PitchTablePoint>, CurveError> {
    let infeasible = |v: f64| CurveError::FitFailed(format!("pitch solve failed at {v} m/s"));
    let mut table = Vec::with_capacity(winds.len());
    for &v in winds {
        let (omega_opt, _) = turbine.optimum_capture(v, 0.0);
        let omega_m = omega_opt.min(curves.omega_max);
        let p_av = turbine.mechanical_power(v, omega_m, 0.0).min(curves.p_nor);
        let beta_mppt = turbine
            .pitch_for_power(v, omega_m, p_av)
            .ok_or_else(|| infeasible(v))?;
        let p_de = (1.0 - curves.d_reserve) * p_av;
        let omega_de = if p_de >= curves.deloaded_power(curves.omega_max) {
            curves.omega_max
        } else {
            bisect(
                |w| curves.deloaded_power(w) - p_de,
                curves.omega_min,
                curves.omega_max,
                1e-12,
            )
            .ok_or_else(|| infeasible(v))?
        };
        let beta_de = turbine
            .pitch_for_power(v, omega_de, p_de)
            .ok_or_else(|| infeasible(v))?;
        table.push(PitchTablePoint {
            v,
            p_de,
            beta_mppt,
            omega_de,
            delta_beta: (beta_de - beta_mppt).max(0.0),
        });
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchFit {
    pub compensation: PitchCompensation,
    pub rms: f64,
    pub points_used: usize,
}

/// Cubic least-squares fit of Δβ over `[lower, upper)`; the plateau is the
/// cubic's value at `upper` so the fitted law is continuous there.
pub fn fit_pitch_polynomial(
    table: &[PitchTablePoint],
    lower: f64,
    upper: f64,
) -> Result<PitchFit, CurveError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .iter()
        .filter(|p| p.p_de >= lower && p.p_de < upper)
        .map(|p| (p.p_de, p.delta_beta))
        .unzip();
    let coeffs = polyfit(&xs, &ys, 3)
        .ok_or_else(|| CurveError::FitFailed(format!("{} points in fit window", xs.len())))?;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (polyval(&coeffs, x) - y).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let coefficients = [coeffs[0], coeffs[1], coeffs[2], coeffs[3]];
    Ok(PitchFit {
        compensation: PitchCompensation {
            lower,
            upper,
            plateau: polyval(&coefficients, upper),
            coefficients,
        },
        rms,
        points_used: xs.len(),
    })
}

/// Wind speeds 6.0, 6.1, ..., 16.0 m/s used for the pitch table.
pub fn pitch_table_winds() -> Vec<f64> {
    (0..=100).map(|i| 6.0 + 0.1 * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_constant_reproduces_reserve() {
        let t = TurbineParams::default();
        let fit = fit_deloaded_constant(&t, 0.1, DEFAULT_FIT_WINDS).unwrap();
        assert!(fit.max_rel_dev < 1e-6, "{}", fit.max_rel_dev);
        for p in &fit.points {
            assert!(p.omega > p.omega_opt);
        }
    }

    #[test]
    fn zero_reserve_limit_recovers_mppt_constant() {
        let t = TurbineParams::default();
        let k_opt = crate::aero::BASE_OPTIMUM_POWER_PU / crate::aero::BASE_ROTOR_SPEED_PU.powi(3);
        let k = fit_deloaded_constant(&t, 1e-7, DEFAULT_FIT_WINDS).unwrap().k;
        assert!((k - k_opt).abs() / k_opt < 1e-3, "{k} vs {k_opt}");
    }

    #[test]
    fn reserve_bounds() {
        let t = TurbineParams::default();
        for r in [0.0, -0.1, 0.9, 1.5, f64::NAN] {
            assert!(fit_deloaded_constant(&t, r, DEFAULT_FIT_WINDS).is_err());
        }
    }

    #[test]
    fn pitch_table_is_zero_in_low_wind() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        let table = pitch_compensation_table(&t, &c, &[7.0, 8.0, 9.0]).unwrap();
        for p in table {
            assert_eq!(p.delta_beta, 0.0, "{p:?}");
            assert_eq!(p.beta_mppt, 0.0);
        }
    }

    #[test]
    fn pitch_table_positive_above_rated() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        let table = pitch_compensation_table(&t, &c, &[14.0, 16.0]).unwrap();
        for p in table {
            assert!((p.p_de - 0.9).abs() < 1e-9);
            assert!(p.beta_mppt > 0.0);
            assert!(p.delta_beta > 0.5, "{p:?}");
        }
    }
}
