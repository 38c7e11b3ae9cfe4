use super::{assemble, min_margin, raw_delta_e, validate_stroke, SpringDesign, TangentLine};
use crate::error::{Error, Result};
use crate::force_curve::ForceCurve;
use crate::scalar::Scalar;

/// Largest tolerated excess of the snapped characteristic over the curve, N.
pub const SNAP_TOL: f64 = 1e-6;

const BISECTION_ITERATIONS: usize = 200;

/// Stiffnesses of the linear springs that are actually available.
#[derive(Debug, Clone, PartialEq)]
pub struct SpringCatalog<T = f64> {
    stiffnesses: Vec<T>,
}

impl<T: Scalar> SpringCatalog<T> {
    pub fn new(stiffnesses: Vec<T>) -> Result<Self> {
        if stiffnesses.is_empty() {
            return Err(Error::Catalog("catalog is empty".into()));
        }
        if let Some(bad) = stiffnesses
            .iter()
            .find(|k| !(**k > T::zero()) || !k.is_finite())
        {
            return Err(Error::Catalog(format!(
                "catalog stiffness must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { stiffnesses })
    }

    pub fn stiffnesses(&self) -> &[T] {
        &self.stiffnesses
    }

    /// Closest available stiffness; ties go to the softer spring.
    pub fn nearest(&self, k: T) -> T {
        let mut best = self.stiffnesses[0];
        for &c in &self.stiffnesses[1..] {
            let (d, db) = ((c - k).abs(), (best - k).abs());
            if d < db || (d == db && c < best) {
                best = c;
            }
        }
        best
    }
}

/// Replaces every spring stiffness with its nearest catalog entry and
/// re-solves the engagement ends.
///
/// Segment `i` keeps slope `-Σ_{j>=i} k'_j` and is raised until it touches
/// the curve on `[0, x_max]`: the tangent point when the slope occurs on
/// the stroke, otherwise the stroke end it rests on. Supporting lines of a
/// convex curve with decreasing slopes always chain into a valid envelope.
pub fn snap_to_catalog<T: Scalar>(
    design: &SpringDesign<T>,
    catalog: &SpringCatalog<T>,
    curve: &ForceCurve<T>,
) -> Result<SpringDesign<T>> {
    let x_max = design.x_max;
    validate_stroke(curve, x_max)?;
    let snapped: Vec<T> = design
        .springs
        .iter()
        .map(|s| catalog.nearest(s.stiffness))
        .collect();
    if snapped
        .iter()
        .zip(&design.springs)
        .all(|(k, s)| *k == s.stiffness)
    {
        return Ok(design.clone());
    }
    curve.check_convex_decreasing(T::zero(), x_max)?;

    let mut cumulative = T::zero();
    let mut slopes: Vec<T> = snapped
        .iter()
        .rev()
        .map(|k| {
            cumulative = cumulative + *k;
            cumulative
        })
        .collect();
    slopes.reverse();

    let tangents: Vec<TangentLine<T>> = slopes
        .iter()
        .map(|&k| {
            let x = support_point(curve, k, x_max);
            TangentLine {
                point: x,
                force: curve.force_unchecked(x),
                stiffness: k,
            }
        })
        .collect();
    let breaks: Vec<T> = tangents
        .windows(2)
        .map(|w| {
            let b = super::intersection(&w[0], &w[1]);
            // Coincident support points only differ by rounding here.
            b.max(w[0].point).min(w[1].point)
        })
        .collect();

    let mut out = assemble(tangents, breaks, x_max);
    let (at, margin) = min_margin(curve, &out, x_max);
    if margin < -T::lit(SNAP_TOL) {
        return Err(Error::Catalog(format!(
            "snapped characteristic exceeds the curve by {} N at x = {at}",
            -margin
        )));
    }
    out.residual_negative = margin < -T::lit(super::ENVELOPE_TOL);
    out.delta_e = raw_delta_e(curve, &out, x_max);
    Ok(out)
}

/// Minimizer of `F(x) + k x` on `[0, x_max]`, i.e. where `F'(x) = -k`
/// clamped to the stroke.
fn support_point<T: Scalar>(curve: &ForceCurve<T>, k: T, x_max: T) -> T {
    let g = |x: T| curve.slope_unchecked(x) + k;
    if g(T::zero()) >= T::zero() {
        return T::zero();
    }
    if g(x_max) <= T::zero() {
        return x_max;
    }
    let (mut lo, mut hi) = (T::zero(), x_max);
    for _ in 0..BISECTION_ITERATIONS {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::half()
}
