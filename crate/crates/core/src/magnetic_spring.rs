//! Magnetic-spring balancing: an unlike-pole attraction pair cancelled by a
//! like-pole repulsion pair held at the same gap.
//!
//! Both characteristics are stored as positive magnitudes. The internal
//! force on the control rod is `repulsion(x) - attraction(x)`, positive
//! when it pushes the rod outward.

use crate::error::{Error, Result};
use crate::force_curve::ForceCurve;
use crate::scalar::Scalar;

/// Reduction ratio reported for a conventional unit with six coil springs.
pub const COIL_SPRING_REDUCTION_RATIO: f64 = 0.118;
/// Reduction ratio reported for a conventional unit with a ring-shaped
/// Neidhart rubber spring.
pub const RUBBER_SPRING_REDUCTION_RATIO: f64 = 0.154;

pub const DEFAULT_SWEEP_GRID: usize = 1001;

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticSpringPair<T = f64> {
    /// Unlike-pole pair (rod magnet to target), N.
    pub attraction: ForceCurve<T>,
    /// Like-pole pair (rod magnet to frame magnet), N.
    pub repulsion: ForceCurve<T>,
    pub stroke: T,
    pub rod_weight: T,
    pub unit_weight: T,
}

impl<T: Scalar> MagneticSpringPair<T> {
    pub fn new(
        attraction: ForceCurve<T>,
        repulsion: ForceCurve<T>,
        stroke: T,
        rod_weight: T,
        unit_weight: T,
    ) -> Result<Self> {
        if !(stroke > T::zero()) || !stroke.is_finite() {
            return Err(Error::Config(format!("stroke must be > 0, got {stroke}")));
        }
        for (name, c) in [("attraction", &attraction), ("repulsion", &repulsion)] {
            if !c.contains(T::zero()) || !c.contains(stroke) {
                let (lo, hi) = c.domain();
                return Err(Error::Config(format!(
                    "{name} curve domain [{lo}, {hi}] does not cover the stroke [0, {stroke}]"
                )));
            }
        }
        if !(rod_weight >= T::zero() && unit_weight >= rod_weight) {
            return Err(Error::Config(format!(
                "need 0 <= rod weight ({rod_weight}) <= unit weight ({unit_weight})"
            )));
        }
        Ok(Self {
            attraction,
            repulsion,
            stroke,
            rod_weight,
            unit_weight,
        })
    }

    /// A pair whose repulsion mirrors the attraction exactly.
    pub fn ideal(
        attraction: ForceCurve<T>,
        stroke: T,
        rod_weight: T,
        unit_weight: T,
    ) -> Result<Self> {
        let repulsion = attraction.clone();
        Self::new(attraction, repulsion, stroke, rod_weight, unit_weight)
    }

    /// Exchanges the roles of the two curves.
    pub fn swapped(&self) -> Self {
        Self {
            attraction: self.repulsion.clone(),
            repulsion: self.attraction.clone(),
            ..self.clone()
        }
    }

    /// `F_r(x) - F_m(x)` along the pull-out axis.
    pub fn internal_force(&self, x: T) -> Result<T> {
        if !(x >= T::zero() && x <= self.stroke) {
            return Err(Error::domain(format!(
                "x = {x} mm outside the stroke [0, {}]",
                self.stroke
            )));
        }
        Ok(self.repulsion.force_unchecked(x) - self.attraction.force_unchecked(x))
    }

    /// Uniform sweep of the internal force over the stroke.
    pub fn deviation_profile(&self, grid: usize) -> Result<BalanceProfile<T>> {
        let xs = sweep_grid(self.stroke, grid)?;
        let samples: Vec<BalanceSample<T>> = xs
            .into_iter()
            .map(|x| {
                let f = self.internal_force(x)?;
                Ok(BalanceSample {
                    x,
                    internal_force: f,
                    deviation: f.abs(),
                })
            })
            .collect::<Result<_>>()?;
        let peak_index = argmax(samples.iter().map(|s| s.deviation));
        Ok(BalanceProfile {
            samples,
            peak_index,
        })
    }

    /// Largest control force over the stroke with a constant `bias` (rod
    /// and jig weight) added, found on the default sweep grid.
    pub fn peak_control_force(&self, bias: T) -> ControlForcePeak<T> {
        let xs = sweep_grid(self.stroke, DEFAULT_SWEEP_GRID).expect("default grid is valid");
        let forces: Vec<T> = xs
            .iter()
            .map(|&x| self.repulsion.force_unchecked(x) - self.attraction.force_unchecked(x))
            .collect();
        let i = argmax(forces.iter().map(|&f| f + bias));
        ControlForcePeak {
            total: forces[i] + bias,
            net: forces[i],
            bias,
            position: xs[i],
        }
    }
}

/// `grid` evenly spaced points on `[0, stroke]`, endpoints exact.
pub fn sweep_grid<T: Scalar>(stroke: T, grid: usize) -> Result<Vec<T>> {
    if grid < 2 {
        return Err(Error::domain(format!(
            "sweep grid needs >= 2 points, got {grid}"
        )));
    }
    let last = grid - 1;
    Ok((0..grid)
        .map(|k| {
            if k == last {
                stroke
            } else {
                stroke * T::count(k) / T::count(last)
            }
        })
        .collect())
}

/// Index of the first maximum.
pub(crate) fn argmax<T: Scalar>(values: impl Iterator<Item = T>) -> usize {
    let mut best = (0, T::neg_infinity());
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSample<T = f64> {
    pub x: T,
    pub internal_force: T,
    /// Magnitude of the imbalance, `|internal_force|`.
    pub deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceProfile<T = f64> {
    pub samples: Vec<BalanceSample<T>>,
    pub peak_index: usize,
}

impl<T: Scalar> BalanceProfile<T> {
    /// Sample with the largest deviation (first one on ties).
    pub fn peak(&self) -> &BalanceSample<T> {
        &self.samples[self.peak_index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlForcePeak<T = f64> {
    /// `net + bias`, N.
    pub total: T,
    /// Internal force at the peak, weight excluded, N.
    pub net: T,
    pub bias: T,
    pub position: T,
}

/// Peak rod-pull control force relative to the peak frame-pull force.
pub fn reduction_ratio<T: Scalar>(rod_peak_net: T, frame_peak_net: T) -> Result<T> {
    if !(frame_peak_net > T::zero()) {
        return Err(Error::domain(format!(
            "frame peak must be > 0, got {frame_peak_net}"
        )));
    }
    Ok(rod_peak_net / frame_peak_net)
}
