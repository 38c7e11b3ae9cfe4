use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inverse-power attraction model `F(x) = A / (x + c)^p`.
///
/// `c` absorbs the cover thickness and the effective pole gap, so the
/// force at contact (`x = 0`) stays finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawCurve<T = f64> {
    amplitude: T,
    offset: T,
    exponent: T,
}

impl<T: Scalar> PowerLawCurve<T> {
    pub fn new(amplitude: T, offset: T, exponent: T) -> Result<Self> {
        if !(amplitude > T::zero() && amplitude.is_finite()) {
            return Err(Error::domain(format!(
                "amplitude must be > 0, got {amplitude}"
            )));
        }
        if !(offset > T::zero() && offset.is_finite()) {
            return Err(Error::domain(format!("offset must be > 0, got {offset}")));
        }
        if !(exponent >= T::one() && exponent.is_finite()) {
            return Err(Error::domain(format!(
                "exponent must be >= 1, got {exponent}"
            )));
        }
        Ok(Self {
            amplitude,
            offset,
            exponent,
        })
    }

    /// Inverse-square curve (`p = 2`).
    pub fn inverse_square(amplitude: T, offset: T) -> Result<Self> {
        Self::new(amplitude, offset, T::two())
    }

    /// The unique curve of exponent `p` passing through two samples.
    pub fn through_points(p0: (T, T), p1: (T, T), exponent: T) -> Result<Self> {
        let ((x0, f0), (x1, f1)) = (p0, p1);
        if x0 == x1 {
            return Err(Error::Fit("two-point solve needs distinct x".into()));
        }
        if !(f0 > T::zero() && f1 > T::zero()) {
            return Err(Error::Fit("forces must be positive".into()));
        }
        // f0 (x0 + c)^p = f1 (x1 + c)^p  =>  (x1 + c) = r (x0 + c)
        let r = (f0 / f1).powf(exponent.recip());
        if r == T::one() {
            return Err(Error::Fit("equal forces admit no finite offset".into()));
        }
        let offset = (x1 - r * x0) / (r - T::one());
        if !(offset > T::zero()) || !offset.is_finite() {
            return Err(Error::Fit(format!(
                "two-point solve gives non-positive offset c = {offset}"
            )));
        }
        let amplitude = f0 * (x0 + offset).powf(exponent);
        Self::new(amplitude, offset, exponent).map_err(|e| Error::Fit(e.to_string()))
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    /// Same shape with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.amplitude * factor, self.offset, self.exponent)
    }

    #[inline]
    pub(crate) fn force(&self, x: T) -> T {
        self.amplitude / (x + self.offset).powf(self.exponent)
    }

    #[inline]
    pub(crate) fn slope(&self, x: T) -> T {
        -self.exponent * self.amplitude / (x + self.offset).powf(self.exponent + T::one())
    }

    /// Closed-form antiderivative difference over `[a, b]`.
    pub(crate) fn work(&self, a: T, b: T) -> T {
        let (ua, ub) = (a + self.offset, b + self.offset);
        if self.exponent == T::one() {
            self.amplitude * (ub / ua).ln()
        } else {
            let q = T::one() - self.exponent;
            self.amplitude / (self.exponent - T::one()) * (ua.powf(q) - ub.powf(q))
        }
    }
}
