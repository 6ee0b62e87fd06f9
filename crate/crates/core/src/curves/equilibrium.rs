use super::{CurveError, CurveSet, EventLatch};
use crate::aero::TurbineParams;
use crate::numeric::highest_downcrossing;

/// Extra rotor-speed headroom above `omega_max` in equilibrium searches.
const SEARCH_MARGIN: f64 = 0.2;
const SEARCH_CELLS: usize = 800;

/// Which curve an equilibrium is computed against, with any frozen
/// frequency context it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    Mppt,
    Deloaded,
    LowerLimit,
    Droop { delta_f: f64 },
    UpperInertia { omega_a: f64 },
    Inertia { delta_f: f64, dfdt: f64, latch: EventLatch },
}

impl CurveKind {
    pub fn eval(&self, curves: &CurveSet, omega_r: f64) -> Result<f64, CurveError> {
        Ok(match *self {
            Self::Mppt => curves.mppt_power(omega_r),
            Self::Deloaded => curves.deloaded_power(omega_r),
            Self::LowerLimit => curves.lower_limit_power(omega_r),
            Self::Droop { delta_f } => curves.droop_power(omega_r, delta_f),
            Self::UpperInertia { omega_a } => {
                let latch = EventLatch {
                    omega_a,
                    dfdt_max_abs: 1.0,
                    active: true,
                    ..Default::default()
                };
                curves.upper_inertia_power(omega_r, &latch)
            }
            Self::Inertia { delta_f, dfdt, latch } => {
                curves.inertia_power(omega_r, delta_f, dfdt, &latch)?
            }
        })
    }
}

/// Stable intersection of the capture curve (at fixed pitch) with a control
/// curve: the highest rotor speed where capture minus curve crosses from
/// positive to negative.
pub fn curve_equilibrium(
    turbine: &TurbineParams,
    curves: &CurveSet,
    v: f64,
    kind: CurveKind,
    beta: f64,
) -> Result<(f64, f64), CurveError> {
    if !(4.0..=14.0).contains(&v) {
        return Err(CurveError::WindOutOfRange(v));
    }
    // Surface latch errors before the search swallows them.
    kind.eval(curves, curves.omega_0)?;
    solve_equilibrium(
        turbine,
        v,
        curves.omega_min,
        curves.omega_max + SEARCH_MARGIN,
        |w| (kind.eval(curves, w).unwrap_or(f64::NAN), beta),
    )
    .ok_or(CurveError::NoEquilibrium { wind: v })
}

/// General equilibrium search where both the power reference and the pitch
/// may depend on rotor speed. Returns `(omega, p_ref(omega))`.
pub fn solve_equilibrium<F>(
    turbine: &TurbineParams,
    v: f64,
    lo: f64,
    hi: f64,
    reference: F,
) -> Option<(f64, f64)>
where
    F: Fn(f64) -> (f64, f64),
{
    let g = |w: f64| {
        let (p_ref, beta) = reference(w);
        turbine.mechanical_power(v, w, beta) - p_ref
    };
    let omega = highest_downcrossing(g, lo, hi, SEARCH_CELLS)?;
    Some((omega, reference(omega).0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mppt_equilibria_match_reported_powers() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        let (w8, p8) = curve_equilibrium(&t, &c, 8.0, CurveKind::Mppt, 0.0).unwrap();
        assert!((p8 - 0.216).abs() < 0.005, "{p8}");
        assert!((w8 - 0.8).abs() < 1e-3);
        let (_, p11) = curve_equilibrium(&t, &c, 11.0, CurveKind::Mppt, 0.0).unwrap();
        assert!((p11 - 0.5623).abs() < 0.005, "{p11}");
    }

    #[test]
    fn deloaded_equilibrium_at_eight() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        let (w, p) = curve_equilibrium(&t, &c, 8.0, CurveKind::Deloaded, 0.0).unwrap();
        assert!((p - 0.194).abs() < 0.005, "{p}");
        assert!(w > 0.8);
    }

    #[test]
    fn out_of_range_wind() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        assert_eq!(
            curve_equilibrium(&t, &c, 3.0, CurveKind::Mppt, 0.0),
            Err(CurveError::WindOutOfRange(3.0))
        );
    }

    #[test]
    fn mppt_above_rated_needs_pitch() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        assert!(matches!(
            curve_equilibrium(&t, &c, 14.0, CurveKind::Mppt, 0.0),
            Err(CurveError::NoEquilibrium { .. })
        ));
    }

    #[test]
    fn unarmed_inertia_curve_is_an_error() {
        let t = TurbineParams::default();
        let c = CurveSet::default();
        let kind = CurveKind::Inertia {
            delta_f: -0.1,
            dfdt: -0.1,
            latch: EventLatch::default(),
        };
        assert_eq!(
            curve_equilibrium(&t, &c, 8.0, kind, 0.0),
            Err(CurveError::LatchNotArmed)
        );
    }
}
