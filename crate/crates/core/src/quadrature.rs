//! Adaptive Simpson quadrature with Richardson correction.

use crate::scalar::Scalar;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `breaks` are interior points where `f` may lose smoothness (spline
/// knots, hinge corners); each panel between them is refined on its own.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, breaks: &[T], rel_tol: T) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if b <= a {
        return T::zero();
    }
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.dedup();

    // Absolute tolerance anchored on a coarse estimate so panels where the
    // integrand nearly vanishes do not drive refinement forever.
    let coarse: T = edges
        .windows(2)
        .map(|w| simpson(&f, w[0], w[1]).2.abs())
        .fold(T::zero(), |acc, v| acc + v);
    let abs_tol = (rel_tol * coarse).max(T::epsilon() * T::lit(16.0) * coarse);

    let total_width = b - a;
    edges
        .windows(2)
        .map(|w| {
            let (fa, fm, whole) = simpson(&f, w[0], w[1]);
            let fb = f(w[1]);
            let tol = abs_tol * (w[1] - w[0]) / total_width;
            refine(&f, w[0], w[1], fa, fm, fb, whole, tol, MAX_DEPTH)
        })
        .fold(T::zero(), |acc, v| acc + v)
}

fn simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T, T) {
    let m = (a + b) * T::half();
    let (fa, fm, fb) = (f(a), f(m), f(b));
    (fa, fm, (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let m = (a + b) * T::half();
    let lm = (a + m) * T::half();
    let rm = (m + b) * T::half();
    let (flm, frm) = (f(lm), f(rm));
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol || m <= a || m >= b {
        return left + right + delta / T::lit(15.0);
    }
    let half_tol = tol * T::half();
    refine(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}
