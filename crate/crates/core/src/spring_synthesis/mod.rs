//! Synthesis of the conventional nonlinear compensator.
//!
//! The compensator is a bank of cam-limited linear springs whose summed
//! characteristic traces the upper envelope of tangent lines placed on a
//! convex decreasing magnet curve. Tangent points are ordered increasing
//! in `x`, so tangent stiffness magnitudes decrease along the stroke.
//!
//! Each spring `j` pushes with `k_j (e_j - x)` while `x < d_j` and is
//! released by the cam at depth `d_j = min(e_j, x_max)`; the sum over all
//! springs is `S(x)`. On the `i`-th envelope segment the active springs
//! are `j >= i`, so the segment slope is `-K_i = -Σ_{j>=i} k_j`.

mod catalog;
mod optimize;

pub use catalog::{snap_to_catalog, SpringCatalog};
pub use optimize::{optimize_tangent_points, OPTIMIZER_STARTS};

use crate::error::{Error, Result};
use crate::force_curve::ForceCurve;
use crate::scalar::Scalar;

/// Absolute tolerance on `F - S` below which the envelope counts as
/// crossing the curve, in N.
pub const ENVELOPE_TOL: f64 = 1e-9;

/// Grid used to verify `S(x) <= F(x)` over the stroke.
pub const ENVELOPE_CHECK_GRID: usize = 1000;

/// A line tangent to a force curve, `T(x) = F(X) - K (x - X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentLine<T = f64> {
    /// Tangent point `X`, mm.
    pub point: T,
    /// Curve value at the tangent point, N.
    pub force: T,
    /// Stiffness magnitude `K = |dF/dx|` at the tangent point, N/mm.
    pub stiffness: T,
}

impl<T: Scalar> TangentLine<T> {
    pub fn value(&self, x: T) -> T {
        self.force - self.stiffness * (x - self.point)
    }

    /// Where the line reaches zero force.
    pub fn zero_crossing(&self) -> T {
        self.point + self.force / self.stiffness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring<T = f64> {
    /// Stiffness `k_j`, N/mm.
    pub stiffness: T,
    /// Position where the spring's own line reaches zero force, mm.
    pub engagement_end: T,
    /// Frame position where the cam releases the spring, mm.
    pub cam_depth: T,
}

impl<T: Scalar> Spring<T> {
    pub fn force(&self, x: T) -> T {
        if x < self.cam_depth {
            self.stiffness * (self.engagement_end - x).max(T::zero())
        } else {
            T::zero()
        }
    }

    /// ∫₀ᵘ of the spring force, for `u >= 0`.
    fn work_to(&self, u: T) -> T {
        let upper = u.min(self.cam_depth).min(self.engagement_end);
        if upper <= T::zero() {
            return T::zero();
        }
        self.stiffness * (self.engagement_end * upper - upper * upper * T::half())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpringDesign<T = f64> {
    pub springs: Vec<Spring<T>>,
    /// Lines the envelope was built from, one per spring.
    pub tangents: Vec<TangentLine<T>>,
    /// Intersections of consecutive tangent lines (`springs.len() - 1`).
    pub break_points: Vec<T>,
    pub x_max: T,
    /// Energy loss `∫₀^x_max (F - S) dx`, N·mm.
    pub delta_e: T,
    /// The last spring's engagement end lies beyond `x_max` and its cam
    /// cuts it off at the stroke end.
    pub clamped: bool,
    /// Force dropped by the cam at `x_max` when `clamped`, N.
    pub residual_step: T,
    /// Set when the characteristic exceeds the curve by more than
    /// [`ENVELOPE_TOL`] somewhere on the stroke.
    pub residual_negative: bool,
}

impl<T: Scalar> SpringDesign<T> {
    /// Summed spring characteristic `S(x)`.
    pub fn force(&self, x: T) -> T {
        self.springs
            .iter()
            .fold(T::zero(), |acc, s| acc + s.force(x))
    }

    /// ∫₀ᵘ S dx in closed form.
    pub fn work(&self, u: T) -> T {
        self.springs
            .iter()
            .fold(T::zero(), |acc, s| acc + s.work_to(u))
    }

    /// Cumulative stiffness `K_i = Σ_{j>=i} k_j` for each segment.
    pub fn segment_stiffness(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out: Vec<T> = self
            .springs
            .iter()
            .rev()
            .map(|s| {
                acc = acc + s.stiffness;
                acc
            })
            .collect();
        out.reverse();
        out
    }

    pub fn len(&self) -> usize {
        self.springs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.springs.is_empty()
    }

    /// A design with no springs, `S ≡ 0`.
    pub fn empty(x_max: T) -> Self {
        Self {
            springs: Vec::new(),
            tangents: Vec::new(),
            break_points: Vec::new(),
            x_max,
            delta_e: T::zero(),
            clamped: false,
            residual_step: T::zero(),
            residual_negative: false,
        }
    }
}

/// Free-function form of [`SpringDesign::force`].
pub fn spring_force<T: Scalar>(design: &SpringDesign<T>, x: T) -> T {
    design.force(x)
}

/// Tangent line to `curve` at `x`.
pub fn tangent_at<T: Scalar>(curve: &ForceCurve<T>, x: T) -> Result<TangentLine<T>> {
    let force = curve.eval_force(x)?;
    let slope = curve.eval_slope(x)?;
    if !(slope < T::zero()) {
        return Err(Error::shape(format!(
            "curve is not strictly decreasing at x = {x} (slope {slope})"
        )));
    }
    Ok(TangentLine {
        point: x,
        force,
        stiffness: -slope,
    })
}

/// Intersection of two tangent lines, ordered by increasing tangent point
/// and decreasing stiffness.
pub fn break_point<T: Scalar>(prev: &TangentLine<T>, next: &TangentLine<T>) -> Result<T> {
    if !(prev.stiffness > next.stiffness) {
        return Err(Error::shape(format!(
            "tangent stiffness must decrease along the stroke ({} then {})",
            prev.stiffness, next.stiffness
        )));
    }
    if !(prev.point < next.point) {
        return Err(Error::shape(format!(
            "tangent points must increase ({} then {})",
            prev.point, next.point
        )));
    }
    Ok(intersection(prev, next))
}

fn intersection<T: Scalar>(prev: &TangentLine<T>, next: &TangentLine<T>) -> T {
    (next.stiffness * next.point - prev.stiffness * prev.point + next.force - prev.force)
        / (next.stiffness - prev.stiffness)
}

/// Builds the spring bank whose characteristic is the tangent envelope at
/// `tangent_points`, clamped to zero and cut off at `x_max`.
pub fn build_design<T: Scalar>(
    curve: &ForceCurve<T>,
    tangent_points: &[T],
    x_max: T,
) -> Result<SpringDesign<T>> {
    validate_stroke(curve, x_max)?;
    if tangent_points.is_empty() {
        return Err(Error::domain("at least one tangent point is required"));
    }
    if tangent_points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("tangent points must be strictly increasing"));
    }
    if tangent_points
        .iter()
        .any(|&x| !(x >= T::zero() && x < x_max))
    {
        return Err(Error::domain(format!(
            "tangent points must lie in [0, {x_max})"
        )));
    }
    curve.check_convex_decreasing(T::zero(), x_max)?;

    let tangents = tangent_points
        .iter()
        .map(|&x| tangent_at(curve, x))
        .collect::<Result<Vec<_>>>()?;
    let mut breaks = Vec::with_capacity(tangents.len().saturating_sub(1));
    for pair in tangents.windows(2) {
        let b = break_point(&pair[0], &pair[1])?;
        if !(b >= pair[0].point && b <= pair[1].point) {
            return Err(Error::shape(format!(
                "break point {b} is not bracketed by tangent points {} and {}",
                pair[0].point, pair[1].point
            )));
        }
        breaks.push(b);
    }
    let mut design = assemble(tangents, breaks, x_max);
    design.delta_e = delta_e(curve, &design, x_max)?;
    Ok(design)
}

/// Turns an ordered set of envelope lines and their break points into a
/// spring bank. No validation; callers guarantee ordering.
pub(crate) fn assemble<T: Scalar>(
    tangents: Vec<TangentLine<T>>,
    breaks: Vec<T>,
    x_max: T,
) -> SpringDesign<T> {
    let n = tangents.len();
    let mut springs = Vec::with_capacity(n);
    for i in 0..n {
        let k_next = tangents.get(i + 1).map_or(T::zero(), |t| t.stiffness);
        let end = if i + 1 < n {
            breaks[i]
        } else {
            tangents[i].zero_crossing()
        };
        springs.push(Spring {
            stiffness: tangents[i].stiffness - k_next,
            engagement_end: end,
            cam_depth: end.min(x_max),
        });
    }
    let clamped = springs.last().is_some_and(|s| s.engagement_end > x_max);
    let residual_step = if clamped {
        springs.iter().fold(T::zero(), |acc, s| {
            acc + s.stiffness * (s.engagement_end - x_max).max(T::zero())
        })
    } else {
        T::zero()
    };
    SpringDesign {
        springs,
        tangents,
        break_points: breaks,
        x_max,
        delta_e: T::zero(),
        clamped,
        residual_step,
        residual_negative: false,
    }
}

pub(crate) fn validate_stroke<T: Scalar>(curve: &ForceCurve<T>, x_max: T) -> Result<()> {
    if !(x_max > T::zero()) || !x_max.is_finite() {
        return Err(Error::domain(format!("stroke must be > 0, got {x_max}")));
    }
    if !curve.contains(T::zero()) || !curve.contains(x_max) {
        let (lo, hi) = curve.domain();
        return Err(Error::domain(format!(
            "stroke [0, {x_max}] is not covered by curve domain [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Energy loss `∫₀^x_max (F - S) dx`.
///
/// Fails with a shape error when `S` exceeds `F` by more than
/// [`ENVELOPE_TOL`] anywhere on the check grid.
pub fn delta_e<T: Scalar>(curve: &ForceCurve<T>, design: &SpringDesign<T>, x_max: T) -> Result<T> {
    validate_stroke(curve, x_max)?;
    let worst = min_margin(curve, design, x_max);
    if worst.1 < -T::lit(ENVELOPE_TOL) {
        return Err(Error::shape(format!(
            "spring characteristic exceeds the curve by {} N at x = {}",
            -worst.1, worst.0
        )));
    }
    Ok(raw_delta_e(curve, design, x_max))
}

/// `∫F - ∫S` without the envelope check.
pub(crate) fn raw_delta_e<T: Scalar>(
    curve: &ForceCurve<T>,
    design: &SpringDesign<T>,
    x_max: T,
) -> T {
    let area = curve
        .work_integral(T::zero(), x_max)
        .expect("stroke validated against curve domain");
    area - design.work(x_max)
}

/// Smallest `F(x) - S(x)` over a uniform grid plus every tangent and break
/// point, with its location.
pub(crate) fn min_margin<T: Scalar>(
    curve: &ForceCurve<T>,
    design: &SpringDesign<T>,
    x_max: T,
) -> (T, T) {
    let n = ENVELOPE_CHECK_GRID;
    let step = x_max / T::count(n);
    let grid = (0..=n).map(|i| if i == n { x_max } else { step * T::count(i) });
    let extra = design
        .tangents
        .iter()
        .map(|t| t.point)
        .chain(design.break_points.iter().copied())
        .filter(|&x| x >= T::zero() && x <= x_max);
    grid.chain(extra)
        .map(|x| (x, curve.force_unchecked(x) - design.force(x)))
        .fold((T::zero(), T::infinity()), |best, cand| {
            if cand.1 < best.1 {
                cand
            } else {
                best
            }
        })
}
