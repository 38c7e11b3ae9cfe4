//! Force-displacement characteristics of magnets and springs.
//!
//! All curves hold positive force magnitudes in newtons against
//! displacement in millimetres; attraction/repulsion signs are applied by
//! the consumers.

mod fit;
mod power_law;
mod sampled;

pub use fit::{fit_power_law, FIT_MAX_ITERATIONS};
pub use power_law::PowerLawCurve;
pub use sampled::SampledCurve;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;

/// Relative tolerance for quadrature over sampled curves.
pub const SAMPLED_WORK_REL_TOL: f64 = 1e-9;

/// Grid used by [`ForceCurve::check_convex_decreasing`].
pub const SHAPE_CHECK_GRID: usize = 1000;

/// Tolerance on second (and first) differences in the shape check, in N.
pub const SHAPE_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ForceCurve<T = f64> {
    PowerLaw(PowerLawCurve<T>),
    Sampled(SampledCurve<T>),
}

impl<T: Scalar> From<PowerLawCurve<T>> for ForceCurve<T> {
    fn from(c: PowerLawCurve<T>) -> Self {
        ForceCurve::PowerLaw(c)
    }
}

impl<T: Scalar> From<SampledCurve<T>> for ForceCurve<T> {
    fn from(c: SampledCurve<T>) -> Self {
        ForceCurve::Sampled(c)
    }
}

impl<T: Scalar> ForceCurve<T> {
    /// Closed interval the curve may be evaluated on. Power laws extend to
    /// infinity.
    pub fn domain(&self) -> (T, T) {
        match self {
            ForceCurve::PowerLaw(_) => (T::zero(), T::infinity()),
            ForceCurve::Sampled(s) => s.domain(),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    fn check(&self, x: T) -> Result<()> {
        if x.is_nan() || !self.contains(x) {
            let (lo, hi) = self.domain();
            return Err(Error::domain(format!("x = {x} mm outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn eval_force(&self, x: T) -> Result<T> {
        self.check(x)?;
        Ok(self.force_unchecked(x))
    }

    /// dF/dx in N/mm; negative for a decreasing curve.
    pub fn eval_slope(&self, x: T) -> Result<T> {
        self.check(x)?;
        Ok(self.slope_unchecked(x))
    }

    /// ∫ₐᵇ F dx in N·mm.
    pub fn work_integral(&self, a: T, b: T) -> Result<T> {
        if a > b {
            return Err(Error::domain(format!(
                "work interval [{a}, {b}] is reversed"
            )));
        }
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Ok(T::zero());
        }
        Ok(match self {
            ForceCurve::PowerLaw(p) => p.work(a, b),
            ForceCurve::Sampled(s) => adaptive_simpson(
                |x| s.force(x),
                a,
                b,
                s.knots(),
                T::lit(SAMPLED_WORK_REL_TOL),
            ),
        })
    }

    /// Multiplies every force by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Ok(match self {
            ForceCurve::PowerLaw(p) => p.scaled(factor)?.into(),
            ForceCurve::Sampled(s) => s.scaled(factor)?.into(),
        })
    }

    /// Points where the curve's smoothness may break (spline knots).
    pub fn knots(&self) -> &[T] {
        match self {
            ForceCurve::PowerLaw(_) => &[],
            ForceCurve::Sampled(s) => s.knots(),
        }
    }

    /// Verifies the curve is non-increasing and convex on `[a, b]` using
    /// first and second differences on a uniform grid.
    pub fn check_convex_decreasing(&self, a: T, b: T) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if let ForceCurve::PowerLaw(_) = self {
            // Positive, decreasing and convex for every admissible parameter set.
            return Ok(());
        }
        let tol = T::lit(SHAPE_CHECK_TOL);
        let n = SHAPE_CHECK_GRID;
        let step = (b - a) / T::count(n);
        let values: Vec<T> = (0..=n)
            .map(|i| {
                let x = if i == n { b } else { a + step * T::count(i) };
                self.force_unchecked(x)
            })
            .collect();
        for (i, w) in values.windows(2).enumerate() {
            if w[1] - w[0] > tol {
                return Err(Error::shape(format!(
                    "curve increases near x = {}",
                    a + step * T::count(i)
                )));
            }
        }
        for (i, w) in values.windows(3).enumerate() {
            if w[0] - T::two() * w[1] + w[2] < -tol {
                return Err(Error::shape(format!(
                    "curve is not convex near x = {}",
                    a + step * T::count(i + 1)
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn force_unchecked(&self, x: T) -> T {
        match self {
            ForceCurve::PowerLaw(p) => p.force(x),
            ForceCurve::Sampled(s) => s.force(x),
        }
    }

    pub(crate) fn slope_unchecked(&self, x: T) -> T {
        match self {
            ForceCurve::PowerLaw(p) => p.slope(x),
            ForceCurve::Sampled(s) => s.slope(x),
        }
    }
}
