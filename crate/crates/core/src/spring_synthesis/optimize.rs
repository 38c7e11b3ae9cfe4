//! Tangent-point placement minimizing the energy loss.
//!
//! Deterministic multistart coordinate search: every coordinate is
//! minimized in turn by golden-section search inside the gap left by its
//! neighbours, sweeping until no coordinate moves. Starts are drawn from a
//! seeded ChaCha stream, the first one being the uniform layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assemble, build_design, validate_stroke, SpringDesign, TangentLine};
use crate::error::{Error, Result};
use crate::force_curve::ForceCurve;
use crate::scalar::Scalar;

pub const OPTIMIZER_STARTS: usize = 10;

const MAX_SWEEPS: usize = 4000;
const GOLDEN_ITERATIONS: usize = 80;
/// Minimum spacing between neighbouring tangent points, relative to the stroke.
const MIN_GAP: f64 = 1e-6;

/// Places `n` tangent points on `[0, x_max)` to minimize ΔE.
pub fn optimize_tangent_points<T: Scalar>(
    curve: &ForceCurve<T>,
    n: usize,
    x_max: T,
    seed: u64,
) -> Result<SpringDesign<T>> {
    if n == 0 {
        return Err(Error::domain("number of springs must be >= 1"));
    }
    validate_stroke(curve, x_max)?;
    curve.check_convex_decreasing(T::zero(), x_max)?;

    let area = curve.work_integral(T::zero(), x_max)?;
    let objective = |points: &[T]| -> T {
        match envelope(curve, points, x_max) {
            Some(d) => area - d.work(x_max),
            None => T::infinity(),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(T, Vec<T>)> = None;
    for start in 0..OPTIMIZER_STARTS {
        let init = if start == 0 {
            uniform_layout(n, x_max)
        } else {
            random_layout(&mut rng, n, x_max)
        };
        let (value, points) = coordinate_search(&objective, init, x_max);
        let better = match &best {
            None => true,
            Some((bv, bp)) => value < *bv || (value == *bv && lexicographically_less(&points, bp)),
        };
        if better {
            best = Some((value, points));
        }
    }
    let (_, points) = best.expect("at least one start");
    build_design(curve, &points, x_max)
}

fn lexicographically_less<T: Scalar>(a: &[T], b: &[T]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn uniform_layout<T: Scalar>(n: usize, x_max: T) -> Vec<T> {
    (0..n)
        .map(|i| x_max * (T::count(i) + T::half()) / T::count(n))
        .collect()
}

fn random_layout<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, x_max: T) -> Vec<T> {
    let gap = T::lit(MIN_GAP) * x_max;
    loop {
        let mut pts: Vec<T> = (0..n)
            .map(|_| x_max * T::lit(rng.random::<f64>()))
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let spaced =
            pts.windows(2).all(|w| w[1] - w[0] > gap * T::two()) && pts[n - 1] < x_max - gap;
        if spaced {
            return pts;
        }
    }
}

/// Fast envelope for the objective: no shape or domain checks, `None`
/// when the break points fail to bracket.
fn envelope<T: Scalar>(curve: &ForceCurve<T>, points: &[T], x_max: T) -> Option<SpringDesign<T>> {
    let tangents: Vec<TangentLine<T>> = points
        .iter()
        .map(|&x| TangentLine {
            point: x,
            force: curve.force_unchecked(x),
            stiffness: -curve.slope_unchecked(x),
        })
        .collect();
    if tangents.iter().any(|t| !(t.stiffness > T::zero())) {
        return None;
    }
    let mut breaks = Vec::with_capacity(points.len().saturating_sub(1));
    for w in tangents.windows(2) {
        if !(w[0].stiffness > w[1].stiffness) {
            return None;
        }
        let b = super::intersection(&w[0], &w[1]);
        if !(b >= w[0].point && b <= w[1].point) {
            return None;
        }
        breaks.push(b);
    }
    Some(assemble(tangents, breaks, x_max))
}

fn coordinate_search<T, F>(objective: &F, mut points: Vec<T>, x_max: T) -> (T, Vec<T>)
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    let n = points.len();
    let gap = T::lit(MIN_GAP) * x_max;
    let x_tol = T::lit(1e-12) * x_max;
    let mut value = objective(&points);

    for _ in 0..MAX_SWEEPS {
        let before = value;
        let mut moved = T::zero();
        for i in 0..n {
            let lo = if i == 0 {
                T::zero()
            } else {
                points[i - 1] + gap
            };
            let hi = if i + 1 == n {
                x_max - gap
            } else {
                points[i + 1] - gap
            };
            if !(hi > lo) {
                continue;
            }
            let current = points[i];
            let mut trial = points.clone();
            let (x, fx) = golden_section(
                |x| {
                    trial[i] = x;
                    objective(&trial)
                },
                lo,
                hi,
                x_tol,
            );
            if fx < value {
                moved = moved.max((x - current).abs());
                points[i] = x;
                value = fx;
            }
        }
        let gain = before - value;
        if moved <= x_tol || gain <= T::epsilon() * value.abs() {
            break;
        }
    }
    (value, points)
}

/// Golden-section minimization on `[a, b]`; returns the best point seen,
/// including the bracket ends.
fn golden_section<T, F>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::half();
    let mut best = {
        let (fa, fb) = (f(a), f(b));
        if fa <= fb {
            (a, fa)
        } else {
            (b, fb)
        }
    };
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a) <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force_curve::{PowerLawCurve, SampledCurve};
    use crate::spring_synthesis::build_design;

    fn fitted() -> ForceCurve {
        PowerLawCurve::through_points((0.0, 8.4), (7.5, 0.5), 2.0)
            .unwrap()
            .into()
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x: f64| (x - 1.3).powi(2) + 2.0, 0.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_keeps_boundary_minimum() {
        let (x, _) = golden_section(|x: f64| x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn one_spring_on_linear_curve_is_lossless() {
        let pts: Vec<(f64, f64)> = (0..=5).map(|i| (i as f64, 10.0 - 2.0 * i as f64)).collect();
        let c: ForceCurve = SampledCurve::new(&pts).unwrap().into();
        let d = optimize_tangent_points(&c, 1, 5.0, 7).unwrap();
        assert!(d.delta_e.abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let c = fitted();
        let a = optimize_tangent_points(&c, 3, 7.5, 42).unwrap();
        let b = optimize_tangent_points(&c, 3, 7.5, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tangent_points_sit_mid_segment_at_optimum() {
        // Stationarity of ΔE in X_i puts each tangent point at the midpoint
        // of the interval on which its line is the envelope.
        let c = fitted();
        let d = optimize_tangent_points(&c, 3, 7.5, 1).unwrap();
        let mut edges = vec![0.0];
        edges.extend(&d.break_points);
        let last = d.springs.last().unwrap();
        edges.push(last.engagement_end.min(7.5));
        for (i, t) in d.tangents.iter().enumerate() {
            let mid = 0.5 * (edges[i] + edges[i + 1]);
            assert!(
                (t.point - mid).abs() < 1e-5,
                "tangent {i}: {} vs {mid}",
                t.point
            );
        }
    }

    #[test]
    fn more_springs_never_lose_more_energy() {
        let c = fitted();
        let one = optimize_tangent_points(&c, 1, 7.5, 0).unwrap();
        let two = optimize_tangent_points(&c, 2, 7.5, 0).unwrap();
        assert!(two.delta_e <= one.delta_e);
        let fixed = build_design(&c, &[1.0, 4.0], 7.5).unwrap();
        assert!(two.delta_e <= fixed.delta_e);
    }

    #[test]
    fn zero_springs_is_an_error() {
        assert!(optimize_tangent_points(&fitted(), 0, 7.5, 0).is_err());
    }
}
