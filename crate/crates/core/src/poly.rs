//! Real polynomials in one variable, used for action profiles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, LinalgReal, Real};

/// Dense polynomial `c[0] + c[1] t + c[2] t^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = Poly { coeffs };
        if p.coeffs.is_empty() {
            p.coeffs.push(T::zero());
        }
        p
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::constant(T::zero());
        }
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * lit::<T>(k as f64)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(T::zero)
                        + other.coeffs.get(k).copied().unwrap_or_else(T::zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `p(t + a)` expanded in powers of `t`.
    pub fn shift(&self, a: T) -> Self {
        // Horner with polynomial arithmetic.
        let lin = Poly::new(vec![a, T::one()]);
        self.coeffs.iter().rev().fold(Poly::constant(T::zero()), |acc, &c| acc.mul(&lin).add(&Poly::constant(c)))
    }

    /// `p(s * t)`.
    pub fn rescale_arg(&self, s: T) -> Self {
        let mut f = T::one();
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let v = c * f;
                    f *= s;
                    v
                })
                .collect(),
        )
    }

    /// Least-squares fit of the given degree. Abscissae are centred and scaled
    /// internally before solving, then mapped back.
    pub fn fit(ts: &[T], ys: &[T], degree: usize) -> Result<Self>
    where
        T: LinalgReal,
    {
        if ts.len() != ys.len() || ts.len() <= degree {
            return Err(Error::InvalidInput(format!(
                "need more than {degree} samples for a degree-{degree} fit, got {}",
                ts.len()
            )));
        }
        let lo = ts.iter().copied().fold(T::infinity(), num_traits::Float::min);
        let hi = ts.iter().copied().fold(T::neg_infinity(), num_traits::Float::max);
        let mid = (lo + hi) * lit(0.5);
        let half = num_traits::Float::max((hi - lo) * lit(0.5), T::min_positive_value());
        let a = DMatrix::from_fn(ts.len(), degree + 1, |i, j| num_traits::Float::powi((ts[i] - mid) / half, j as i32));
        let b = DVector::from_iterator(ys.len(), ys.iter().copied());
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, T::default_epsilon())
            .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
        // p(t) = q((t - mid) / half)
        let q = Poly::new(x.iter().copied().collect());
        Ok(q.rescale_arg(T::one() / half).shift(-mid))
    }

    /// Root mean square of the residual of this polynomial against samples.
    pub fn rms_residual(&self, ts: &[T], ys: &[T]) -> T {
        if ts.is_empty() {
            return T::zero();
        }
        let s = ts
            .iter()
            .zip(ys)
            .map(|(&t, &y)| {
                let d = self.eval(t) - y;
                d * d
            })
            .fold(T::zero(), |a, b| a + b);
        (s / lit(ts.len() as f64)).sqrt()
    }

    /// Adds the lowest-degree interpolating correction so that
    /// `p(t_k) = y_k` exactly at every pin.
    pub fn pinned(&self, pins: &[(T, T)]) -> Self {
        if pins.is_empty() {
            return self.clone();
        }
        // Newton form of the interpolant through the residuals.
        let n = pins.len();
        let xs: Vec<T> = pins.iter().map(|p| p.0).collect();
        let mut dd: Vec<T> = pins.iter().map(|&(t, y)| y - self.eval(t)).collect();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
            }
        }
        let mut corr = Poly::constant(dd[n - 1]);
        for i in (0..n - 1).rev() {
            corr = corr.mul(&Poly::new(vec![-xs[i], T::one()])).add(&Poly::constant(dd[i]));
        }
        self.add(&corr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Poly::new(vec![1.0f64, -2.0, 0.5, 3.0]);
        let q = p.shift(0.7);
        for &t in &[-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(t) - p.eval(t + 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_exact_polynomial() {
        let p = Poly::new(vec![0.3, 1.5, -0.25, 0.125]);
        let ts: Vec<f64> = (0..20).map(|i| 2.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| p.eval(t)).collect();
        let q = Poly::fit(&ts, &ys, 3).unwrap();
        for (&t, &y) in ts.iter().zip(&ys) {
            assert!((q.eval(t) - y).abs() < 1e-9);
        }
        assert!(q.rms_residual(&ts, &ys) < 1e-9);
    }

    #[test]
    fn pinned_hits_pins() {
        let p = Poly::new(vec![0.0f64, 1.0]);
        let q = p.pinned(&[(0.5, 0.51), (1.5, 1.49)]);
        assert!((q.eval(0.5) - 0.51).abs() < 1e-14);
        assert!((q.eval(1.5) - 1.49).abs() < 1e-14);
    }

    #[test]
    fn fit_rejects_underdetermined() {
        assert!(Poly::<f64>::fit(&[0.0, 1.0], &[0.0, 1.0], 3).is_err());
    }
}
