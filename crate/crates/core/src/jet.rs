//! Truncated power series ("jets") at `t = 0`.
//!
//! A `Jet<C>` of order `N` holds the Taylor coefficients `c_0 ..= c_N`. The
//! coefficient type only needs ring operations plus division by small
//! integers, so the same code runs over `Complex<f64>` and over exact
//! Gaussian rationals.

use num_complex::Complex;
use num_traits::{FromPrimitive, Num};

use crate::poly::Poly;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<C> {
    coeffs: Vec<C>,
}

impl<C: Clone + Num + FromPrimitive> Jet<C> {
    /// Jet of order `order` built from `coeffs`, zero-padded or truncated to
    /// exactly `order + 1` entries.
    pub fn new(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        Jet { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Jet::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Jet::new(vec![C::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.order(), other.order());
        Jet { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn scale(&self, s: &C) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).fold(C::zero(), |acc, j| acc + self.coeffs[j].clone() * other.coeffs[k - j].clone()))
            .collect();
        Jet { coeffs }
    }

    /// `exp(p)` for a series with vanishing constant term, via the recursion
    /// `n e_n = sum_{k=1}^{n} k p_k e_{n-k}`.
    ///
    /// Panics if the constant term is non-zero.
    pub fn exp_nilpotent(&self) -> Self {
        assert!(self.coeffs[0].is_zero(), "exp_nilpotent needs p(0) = 0");
        let n = self.order();
        let mut e: Vec<C> = Vec::with_capacity(n + 1);
        e.push(C::one());
        for m in 1..=n {
            let mut acc = C::zero();
            for k in 1..=m {
                let kk = C::from_usize(k).expect("small integer");
                acc = acc + kk * self.coeffs[k].clone() * e[m - k].clone();
            }
            e.push(acc / C::from_usize(m).expect("small integer"));
        }
        Jet { coeffs: e }
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, t: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * t.clone() + c.clone())
    }
}

impl<T: Real> Jet<Complex<T>> {
    /// Jet of the unit-modulus transport factor `exp(i A(t))` for a real
    /// action polynomial `A`, expanded by series composition.
    pub fn unit_exp_of(action: &Poly<T>, order: usize) -> Self {
        let a = action.coeffs();
        let phase = Complex::new(T::zero(), a[0]).exp();
        let tail: Vec<Complex<T>> = std::iter::once(Complex::new(T::zero(), T::zero()))
            .chain(a.iter().skip(1).map(|&c| Complex::new(T::zero(), c)))
            .collect();
        Jet::new(tail, order).exp_nilpotent().scale(&phase)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn exp_of_linear_is_exponential_series() {
        // exp(t): coefficients 1/k!
        let p: Jet<f64> = Jet::new(vec![0.0, 1.0], 8);
        let e = p.exp_nilpotent();
        let mut f = 1.0;
        for k in 0..=8 {
            if k > 0 {
                f *= k as f64;
            }
            assert!((e.coeff(k) - 1.0 / f).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_exp_matches_pointwise_exponential() {
        // A(t) = 0.4 + 1.3 t - 0.2 t^2; compare Taylor polynomial to exp(iA) at small t.
        let a = Poly::new(vec![0.4, 1.3, -0.2]);
        let j = Jet::<Complex<f64>>::unit_exp_of(&a, 14);
        for &t in &[0.01, 0.05, -0.03] {
            let exact = Complex::new(0.0, a.eval(t)).exp();
            let approx = j.eval(&Complex::new(t, 0.0));
            assert!((exact - approx).norm() < 1e-13);
        }
    }

    #[test]
    fn exact_rational_exp() {
        // exp(t/2) truncated at order 3: 1, 1/2, 1/8, 1/48
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let p = Jet::new(vec![BigRational::from_integer(0.into()), half], 3);
        let e = p.exp_nilpotent();
        assert_eq!(e.coeff(3), &BigRational::new(1.into(), 48.into()));
    }

    #[test]
    fn product_with_inverse_is_one() {
        let a = Poly::new(vec![0.1, -0.7, 0.3, 0.05]);
        let j = Jet::<Complex<f64>>::unit_exp_of(&a, 10);
        let jinv = Jet::<Complex<f64>>::unit_exp_of(&a.scale(-1.0), 10);
        let one = j.mul(&jinv);
        assert!((one.coeff(0) - Complex::new(1.0, 0.0)).norm() < 1e-14);
        for k in 1..=10 {
            assert!(one.coeff(k).norm() < 1e-13);
        }
    }
}
