//! Least-squares fitting of the power-law attraction model.
//!
//! Parameters are solved in `(ln A, ln c, p)` so the amplitude and offset
//! stay positive throughout a Levenberg–Marquardt iteration. With a fixed
//! exponent and exactly two samples the interpolating curve is returned
//! in closed form.

use super::PowerLawCurve;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FIT_MAX_ITERATIONS: usize = 2000;

const START_EXPONENTS: [f64; 4] = [2.0, 1.5, 3.0, 4.0];

/// Fits `F(x) = A / (x + c)^p` to force samples.
///
/// When `p_fixed` is `None` the exponent is fitted too, which needs at
/// least three samples.
pub fn fit_power_law<T: Scalar>(
    samples: &[(T, T)],
    p_fixed: Option<T>,
) -> Result<PowerLawCurve<T>> {
    validate(samples, p_fixed)?;
    let first = samples[0];
    let last = samples[samples.len() - 1];

    if samples.len() == 2 {
        let p = p_fixed
            .ok_or_else(|| Error::Fit("fitting the exponent needs at least 3 samples".into()))?;
        return PowerLawCurve::through_points(first, last, p);
    }

    let starts: Vec<T> = match p_fixed {
        Some(p) => vec![p],
        None => START_EXPONENTS.iter().map(|&p| T::lit(p)).collect(),
    };
    let mut best: Option<(T, [T; 3])> = None;
    let mut last_err = None;
    for p0 in starts {
        let theta0 = initial_guess(samples, first, last, p0);
        match levenberg_marquardt(samples, theta0, p_fixed.is_none()) {
            Ok((cost, theta)) => {
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, theta));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (_, theta) =
        best.ok_or_else(|| last_err.unwrap_or(Error::Fit("no start converged".into())))?;
    let (amplitude, offset, exponent) = (theta[0].exp(), theta[1].exp(), theta[2]);
    if !(offset > T::zero()) || !offset.is_finite() {
        return Err(Error::Fit(format!(
            "fitted offset c = {offset} is not positive"
        )));
    }
    PowerLawCurve::new(amplitude, offset, exponent).map_err(|e| Error::Fit(e.to_string()))
}

fn validate<T: Scalar>(samples: &[(T, T)], p_fixed: Option<T>) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(x, f)| !x.is_finite() || !f.is_finite())
    {
        return Err(Error::Fit("samples must be finite".into()));
    }
    if samples.iter().any(|&(_, f)| f <= T::zero()) {
        return Err(Error::Fit("all sample forces must be positive".into()));
    }
    if samples.iter().any(|&(x, _)| x < T::zero()) {
        return Err(Error::Fit("sample displacements must be >= 0".into()));
    }
    let mut xs: Vec<T> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("sample displacements must be distinct".into()));
    }
    if let Some(p) = p_fixed {
        if !(p >= T::one()) {
            return Err(Error::Fit(format!("fixed exponent must be >= 1, got {p}")));
        }
    }
    Ok(())
}

fn initial_guess<T: Scalar>(samples: &[(T, T)], first: (T, T), last: (T, T), p: T) -> [T; 3] {
    if let Ok(c) = PowerLawCurve::through_points(first, last, p) {
        return [c.amplitude().ln(), c.offset().ln(), p];
    }
    // Data not consistent with a decreasing two-point solve: pick a unit
    // offset and the amplitude that is optimal for it.
    let offset = T::one();
    let (num, den) = samples
        .iter()
        .fold((T::zero(), T::zero()), |(n, d), &(x, f)| {
            let g = (x + offset).powf(-p);
            (n + f * g, d + g * g)
        });
    [(num / den).ln(), offset.ln(), p]
}

fn residuals<T: Scalar>(samples: &[(T, T)], theta: &[T; 3]) -> (Vec<T>, Vec<[T; 3]>) {
    let (a, c, p) = (theta[0].exp(), theta[1].exp(), theta[2]);
    samples
        .iter()
        .map(|&(x, f)| {
            let u = x + c;
            let m = a * u.powf(-p);
            (m - f, [m, -p * m * c / u, -m * u.ln()])
        })
        .unzip()
}

fn cost_of<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

fn levenberg_marquardt<T: Scalar>(
    samples: &[(T, T)],
    mut theta: [T; 3],
    free_exponent: bool,
) -> Result<(T, [T; 3])> {
    let dim = if free_exponent { 3 } else { 2 };
    let scale = cost_of(&samples.iter().map(|s| s.1).collect::<Vec<_>>());
    let (mut r, mut jac) = residuals(samples, &theta);
    let mut cost = cost_of(&r);
    let mut lambda = T::lit(1e-3);
    let floor = T::epsilon() * T::epsilon() * scale;

    for _ in 0..FIT_MAX_ITERATIONS {
        if cost <= floor {
            return Ok((cost, theta));
        }
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for (ri, ji) in r.iter().zip(&jac) {
            for a in 0..dim {
                jtr[a] = jtr[a] + ji[a] * *ri;
                for b in 0..dim {
                    jtj[a][b] = jtj[a][b] + ji[a] * ji[b];
                }
            }
        }
        let grad_norm = jtr[..dim].iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if grad_norm <= T::epsilon() * scale {
            return Ok((cost, theta));
        }

        loop {
            let mut lhs = jtj;
            for (a, row) in lhs.iter_mut().enumerate().take(dim) {
                row[a] = row[a] * (T::one() + lambda) + T::epsilon();
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2]];
            let step = solve(&lhs, &rhs, dim)
                .ok_or_else(|| Error::Fit("singular normal equations".into()))?;
            let mut trial = theta;
            for a in 0..dim {
                trial[a] = trial[a] + step[a];
            }
            let (tr, tj) = residuals(samples, &trial);
            let trial_cost = cost_of(&tr);
            if trial_cost.is_finite() && trial_cost <= cost {
                let step_size = (0..dim).fold(T::zero(), |m, a| m.max(step[a].abs()));
                let improvement = cost - trial_cost;
                theta = trial;
                r = tr;
                jac = tj;
                cost = trial_cost;
                lambda = (lambda / T::lit(3.0)).max(T::lit(1e-12));
                if step_size <= T::lit(1e-13) || improvement <= T::epsilon() * cost {
                    return Ok((cost, theta));
                }
                break;
            }
            lambda = lambda * T::lit(4.0);
            if lambda > T::lit(1e16) {
                // No descent direction left: we are at a (numerical) minimum.
                return Ok((cost, theta));
            }
        }
    }
    Err(Error::Fit(format!(
        "did not converge in {FIT_MAX_ITERATIONS} iterations"
    )))
}

/// Gaussian elimination with partial pivoting on the leading `dim` block.
fn solve<T: Scalar>(m: &[[T; 3]; 3], rhs: &[T; 3], dim: usize) -> Option<[T; 3]> {
    let mut a = *m;
    let mut b = *rhs;
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col] == T::zero() || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..dim {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *v = *v - factor * p;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for k in row + 1..dim {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

impl<T: Scalar> PowerLawCurve<T> {
    /// Model minus measurement at each sample, in N.
    pub fn residuals(&self, samples: &[(T, T)]) -> Vec<T> {
        samples.iter().map(|&(x, f)| self.force(x) - f).collect()
    }
}
