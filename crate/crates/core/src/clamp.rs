//! Equilibrium-floating force-displacement converter and the clamp built
//! on the enlarged IB Magnet.
//!
//! The clamp is evaluated in two modes. `Replay` returns the measured net
//! clamping forces of a scenario file verbatim. `Model` derives them: a
//! disengaged rod transmits the applied control force with a given
//! efficiency, and an engaged rod lets the magnet close on an object that
//! is `grasp_interference` thicker than the closed finger gap, against a
//! linear structural compliance. The finger's gravity bias is always kept
//! apart from the net force.

use crate::error::{Error, Result};
use crate::force_curve::ForceCurve;
use crate::magnetic_spring::{sweep_grid, MagneticSpringPair};
use crate::scalar::Scalar;
use crate::unit_sim::UnitConfig;

const CONTACT_SCAN: usize = 1000;
const BISECTION_ITERATIONS: usize = 200;

/// A spring and an inverse spring meeting at a floating equilibrium point.
#[derive(Debug, Clone, PartialEq)]
pub struct Converter<T = f64> {
    /// Spring characteristic `F_s`, N.
    pub forward: ForceCurve<T>,
    /// Inverse-spring magnitude `|F_AS|`, ideally equal to `F_s`, N.
    pub inverse: ForceCurve<T>,
    pub equilibrium: T,
}

impl<T: Scalar> Converter<T> {
    /// Reads an IB Magnet as a converter: the magnetic spring is the
    /// spring, the attraction magnet the inverse spring, the rod the
    /// equilibrium point.
    pub fn from_pair(pair: &MagneticSpringPair<T>) -> Self {
        Self {
            forward: pair.repulsion.clone(),
            inverse: pair.attraction.clone(),
            equilibrium: T::zero(),
        }
    }

    /// `F_s(x) - |F_AS(x)|`.
    pub fn internal_force(&self, x: T) -> Result<T> {
        Ok(self.forward.eval_force(x)? - self.inverse.eval_force(x)?)
    }

    /// Internal force on `grid` evenly spaced points of `[0, stroke]`.
    pub fn profile(&self, stroke: T, grid: usize) -> Result<Vec<(T, T)>> {
        sweep_grid(stroke, grid)?
            .into_iter()
            .map(|x| Ok((x, self.internal_force(x)?)))
            .collect()
    }
}

/// Free-function form of [`Converter::internal_force`].
pub fn converter_internal_force<T: Scalar>(conv: &Converter<T>, x: T) -> Result<T> {
    conv.internal_force(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClampScenario<T = f64> {
    pub unit: UnitConfig<T>,
    /// Load from the active finger's own weight, N.
    pub finger_weight_bias: T,
    /// Control force applied to the rod in the disengaged state, N.
    pub control_force_applied: T,
    pub measured_net_without: T,
    pub measured_net_with: T,
    /// How much thicker the object is than the closed finger gap, mm.
    pub grasp_interference: T,
}

impl<T: Scalar> ClampScenario<T> {
    pub fn new(
        unit: UnitConfig<T>,
        finger_weight_bias: T,
        control_force_applied: T,
        measured_net_without: T,
        measured_net_with: T,
        grasp_interference: T,
    ) -> Result<Self> {
        for (name, v) in [
            ("bias", finger_weight_bias),
            ("control force", control_force_applied),
            ("net force without reduction", measured_net_without),
            ("net force with reduction", measured_net_with),
            ("interference", grasp_interference),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            unit,
            finger_weight_bias,
            control_force_applied,
            measured_net_without,
            measured_net_with,
            grasp_interference,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClampMode<T = f64> {
    Replay,
    Model {
        /// Fraction of the applied control force reaching the object.
        transmission_efficiency: Option<T>,
        /// Linear stiffness of finger and object in series, N/mm.
        contact_stiffness: Option<T>,
    },
}

/// Net clamping force (bias excluded) with the rod disengaged or engaged.
pub fn clamp_force<T: Scalar>(
    scenario: &ClampScenario<T>,
    rod_engaged: bool,
    mode: ClampMode<T>,
) -> Result<T> {
    match (mode, rod_engaged) {
        (ClampMode::Replay, false) => Ok(scenario.measured_net_without),
        (ClampMode::Replay, true) => Ok(scenario.measured_net_with),
        (
            ClampMode::Model {
                transmission_efficiency,
                ..
            },
            false,
        ) => {
            let eta = transmission_efficiency
                .ok_or_else(|| Error::Mode("model mode needs a transmission efficiency".into()))?;
            if !(eta >= T::zero() && eta <= T::one()) {
                return Err(Error::Mode(format!(
                    "transmission efficiency must lie in [0, 1], got {eta}"
                )));
            }
            Ok(scenario.control_force_applied * eta)
        }
        (
            ClampMode::Model {
                contact_stiffness, ..
            },
            true,
        ) => {
            let k = contact_stiffness
                .ok_or_else(|| Error::Mode("model mode needs a contact stiffness".into()))?;
            if !(k > T::zero()) || !k.is_finite() {
                return Err(Error::Mode(format!(
                    "contact stiffness must be > 0, got {k}"
                )));
            }
            engaged_force(
                &scenario.unit.pair.attraction,
                scenario.grasp_interference,
                k,
            )
        }
    }
}

/// Equilibrium of magnet pull against structural compliance.
///
/// The structure yields `δ` under load `k δ` while the magnet gap closes to
/// `i - δ`. The first `δ` where `k δ` catches up with the attraction is the
/// clamp force; if the magnet out-pulls the structure over the whole
/// interference the gap closes and the structure carries `k i`.
fn engaged_force<T: Scalar>(attraction: &ForceCurve<T>, interference: T, k: T) -> Result<T> {
    if interference == T::zero() {
        return attraction.eval_force(T::zero());
    }
    if !attraction.contains(interference) {
        return Err(Error::domain(format!(
            "attraction curve does not cover a gap of {interference} mm"
        )));
    }
    let h = |d: T| k * d - attraction.force_unchecked(interference - d);
    let step = interference / T::count(CONTACT_SCAN);
    let mut lo = T::zero();
    for i in 1..=CONTACT_SCAN {
        let hi = if i == CONTACT_SCAN {
            interference
        } else {
            step * T::count(i)
        };
        if h(hi) >= T::zero() {
            let mut hi = hi;
            for _ in 0..BISECTION_ITERATIONS {
                let mid = (lo + hi) * T::half();
                if mid <= lo || mid >= hi {
                    break;
                }
                if h(mid) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(k * (lo + hi) * T::half());
        }
        lo = hi;
    }
    Ok(k * interference)
}

/// Clamping force with the reduction relative to without it.
pub fn amplification_ratio<T: Scalar>(scenario: &ClampScenario<T>) -> Result<T> {
    ratio(scenario.measured_net_with, scenario.measured_net_without)
}

fn ratio<T: Scalar>(with: T, without: T) -> Result<T> {
    if !(without > T::zero()) {
        return Err(Error::domain(format!(
            "net force without reduction must be > 0, got {without}"
        )));
    }
    Ok(with / without)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampReport<T = f64> {
    pub bias: T,
    pub control_force: T,
    pub net_without: T,
    pub net_with: T,
    /// `net_with / net_without`; `None` when nothing is clamped without
    /// the reduction.
    pub amplification: Option<T>,
}

/// Evaluates both rod states of a scenario in the given mode.
pub fn clamp_report<T: Scalar>(
    scenario: &ClampScenario<T>,
    mode: ClampMode<T>,
) -> Result<ClampReport<T>> {
    let net_without = clamp_force(scenario, false, mode)?;
    let net_with = clamp_force(scenario, true, mode)?;
    let amplification = ratio(net_with, net_without).ok();
    Ok(ClampReport {
        bias: scenario.finger_weight_bias,
        control_force: scenario.control_force_applied,
        net_without,
        net_with,
        amplification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force_curve::PowerLawCurve;

    fn pair() -> MagneticSpringPair {
        let a: ForceCurve = PowerLawCurve::through_points((0.0, 151.0), (20.0, 9.0), 2.0)
            .unwrap()
            .into();
        let r = a.scaled(1.6).unwrap();
        MagneticSpringPair::new(a, r, 20.0, 2.0, 6.7).unwrap()
    }

    fn scenario(control: f64, without: f64, with: f64) -> ClampScenario {
        let unit = UnitConfig::from_pair(pair(), 0.0).unwrap();
        ClampScenario::new(unit, 12.9, control, without, with, 1.0).unwrap()
    }

    #[test]
    fn matched_converter_is_balanced() {
        let a: ForceCurve = PowerLawCurve::new(10.0, 1.0, 2.0).unwrap().into();
        let conv = Converter {
            forward: a.clone(),
            inverse: a,
            equilibrium: 0.0,
        };
        for x in [0.0, 0.5, 2.0, 9.0] {
            assert_eq!(conv.internal_force(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn converter_matches_pair_internal_force() {
        let p = pair();
        let conv = Converter::from_pair(&p);
        for i in 0..=40 {
            let x = 0.5 * i as f64;
            assert_eq!(
                conv.internal_force(x).unwrap(),
                p.internal_force(x).unwrap()
            );
        }
    }

    #[test]
    fn replay_returns_measurements() {
        let s = scenario(94.9, 18.5, 36.9);
        assert_eq!(clamp_force(&s, false, ClampMode::Replay).unwrap(), 18.5);
        assert_eq!(clamp_force(&s, true, ClampMode::Replay).unwrap(), 36.9);
        let r = amplification_ratio(&s).unwrap();
        assert!((r - 36.9 / 18.5).abs() < 1e-15);
    }

    #[test]
    fn amplification_edge_cases() {
        assert_eq!(amplification_ratio(&scenario(1.0, 5.0, 5.0)).unwrap(), 1.0);
        assert_eq!(amplification_ratio(&scenario(1.0, 5.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(
            amplification_ratio(&scenario(1.0, 0.0, 5.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn report_keeps_bias_apart() {
        let rep = clamp_report(&scenario(94.9, 18.5, 36.9), ClampMode::Replay).unwrap();
        assert_eq!(rep.bias, 12.9);
        assert_eq!(rep.net_with, 36.9);
        assert_eq!(rep.amplification, Some(36.9 / 18.5));
        let none = ClampMode::Model {
            transmission_efficiency: Some(0.0),
            contact_stiffness: Some(500.0),
        };
        assert_eq!(
            clamp_report(&scenario(94.9, 18.5, 36.9), none)
                .unwrap()
                .amplification,
            None
        );
    }

    #[test]
    fn model_mode_needs_parameters() {
        let s = scenario(94.9, 18.5, 36.9);
        let bare = ClampMode::Model {
            transmission_efficiency: None,
            contact_stiffness: None,
        };
        assert!(matches!(clamp_force(&s, false, bare), Err(Error::Mode(_))));
        assert!(matches!(clamp_force(&s, true, bare), Err(Error::Mode(_))));
    }

    #[test]
    fn zero_control_force_transmits_nothing() {
        let s = scenario(0.0, 18.5, 36.9);
        let m = ClampMode::Model {
            transmission_efficiency: Some(0.2),
            contact_stiffness: None,
        };
        assert_eq!(clamp_force(&s, false, m).unwrap(), 0.0);
    }

    #[test]
    fn engaged_model_balances_magnet_and_compliance() {
        let s = scenario(94.9, 18.5, 36.9);
        let k = 1000.0;
        let m = ClampMode::Model {
            transmission_efficiency: None,
            contact_stiffness: Some(k),
        };
        let f = clamp_force(&s, true, m).unwrap();
        let deflection = f / k;
        let pull = s.unit.pair.attraction.eval_force(1.0 - deflection).unwrap();
        assert!((f - pull).abs() < 1e-9);
        assert!(deflection > 0.0 && deflection < 1.0);
        // A structure too soft to stop the magnet ends up carrying k * i.
        let soft = ClampMode::Model {
            transmission_efficiency: None,
            contact_stiffness: Some(1.0),
        };
        assert_eq!(clamp_force(&s, true, soft).unwrap(), 1.0);
    }
}
