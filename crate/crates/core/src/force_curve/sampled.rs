use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Measured force samples joined by a monotone piecewise-cubic Hermite
/// interpolant (Fritsch–Butland slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve<T = f64> {
    xs: Vec<T>,
    fs: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Scalar> SampledCurve<T> {
    pub fn new(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::domain(format!(
                "sampled curve needs at least 3 points, got {}",
                points.len()
            )));
        }
        let xs: Vec<T> = points.iter().map(|p| p.0).collect();
        let fs: Vec<T> = points.iter().map(|p| p.1).collect();
        if xs.iter().chain(&fs).any(|v| !v.is_finite()) {
            return Err(Error::domain("samples must be finite"));
        }
        if xs[0] < T::zero() {
            return Err(Error::domain("sample displacements must be >= 0"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "sample displacements must be strictly increasing",
            ));
        }
        if fs.iter().any(|&f| f < T::zero()) {
            return Err(Error::domain("sample forces must be non-negative"));
        }
        let slopes = pchip_slopes(&xs, &fs);
        Ok(Self { xs, fs, slopes })
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    pub fn knots(&self) -> &[T] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        let pts: Vec<(T, T)> = self.points().map(|(x, f)| (x, f * factor)).collect();
        Self::new(&pts)
    }

    /// Segment index and local coordinate, or the knot index on an exact hit.
    fn locate(&self, x: T) -> Locate<T> {
        let upper = self.xs.partition_point(|&k| k <= x);
        let i = upper.saturating_sub(1).min(self.xs.len() - 2);
        if self.xs[upper.saturating_sub(1)] == x {
            return Locate::Knot(upper - 1);
        }
        Locate::Segment(i, x - self.xs[i])
    }

    fn coefficients(&self, i: usize) -> (T, T) {
        let h = self.xs[i + 1] - self.xs[i];
        let delta = (self.fs[i + 1] - self.fs[i]) / h;
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let c2 = (T::lit(3.0) * delta - T::two() * d0 - d1) / h;
        let c3 = (d0 + d1 - T::two() * delta) / (h * h);
        (c2, c3)
    }

    pub(crate) fn force(&self, x: T) -> T {
        match self.locate(x) {
            Locate::Knot(k) => self.fs[k],
            Locate::Segment(i, s) => {
                let (c2, c3) = self.coefficients(i);
                self.fs[i] + s * (self.slopes[i] + s * (c2 + s * c3))
            }
        }
    }

    pub(crate) fn slope(&self, x: T) -> T {
        match self.locate(x) {
            Locate::Knot(k) => self.slopes[k],
            Locate::Segment(i, s) => {
                let (c2, c3) = self.coefficients(i);
                self.slopes[i] + s * (T::two() * c2 + T::lit(3.0) * s * c3)
            }
        }
    }
}

enum Locate<T> {
    Knot(usize),
    Segment(usize, T),
}

fn pchip_slopes<T: Scalar>(xs: &[T], fs: &[T]) -> Vec<T> {
    let n = xs.len();
    let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|i| (fs[i + 1] - fs[i]) / h[i]).collect();
    let mut d = vec![T::zero(); n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        d[k] = if a == b {
            a
        } else if a * b <= T::zero() {
            T::zero()
        } else {
            let w1 = T::two() * h[k] + h[k - 1];
            let w2 = h[k] + T::two() * h[k - 1];
            (w1 + w2) / (w1 / a + w2 / b)
        };
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope<T: Scalar>(h0: T, h1: T, m0: T, m1: T) -> T {
    if m0 == m1 {
        return m0;
    }
    let d = ((T::two() * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == T::zero() {
        T::zero()
    } else if m0.signum() != m1.signum() && d.abs() > T::lit(3.0) * m0.abs() {
        T::lit(3.0) * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> SampledCurve {
        let pts: Vec<(f64, f64)> = (0..=5).map(|i| (i as f64, 10.0 - 2.0 * i as f64)).collect();
        SampledCurve::new(&pts).unwrap()
    }

    #[test]
    fn reproduces_linear_data_exactly() {
        let c = linear();
        for x in [0.0, 0.3, 1.7, 2.5, 4.99, 5.0] {
            assert!((c.force(x) - (10.0 - 2.0 * x)).abs() < 1e-14);
            assert_eq!(c.slope(x), -2.0);
        }
    }

    #[test]
    fn knots_are_exact() {
        let pts = [(0.0, 8.4), (1.0, 4.2), (2.5, 2.1), (7.5, 0.5)];
        let c = SampledCurve::new(&pts).unwrap();
        for (x, f) in pts {
            assert_eq!(c.force(x), f);
        }
    }

    #[test]
    fn flat_segment_has_zero_slope() {
        let c = SampledCurve::new(&[(0.0, 3.0), (1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert_eq!(c.slope(0.4), 0.0);
        assert_eq!(c.force(1.5), 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SampledCurve::new(&[(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(SampledCurve::new(&[(0.0, 1.0), (1.0, 0.5), (1.0, 0.2)]).is_err());
        assert!(SampledCurve::new(&[(0.0, 1.0), (1.0, -0.5), (2.0, 0.2)]).is_err());
        assert!(SampledCurve::new(&[(-1.0, 1.0), (1.0, 0.5), (2.0, 0.2)]).is_err());
    }
}
