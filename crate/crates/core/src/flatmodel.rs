//! Leafwise flat sections near a hyperbolic point in normal-form coordinates
//! `(x, y)`, with `omega = dx ^ dy`, `F = xy` and potential
//! `Theta_0 = (x dy - y dx) / 2`.
//!
//! Off the axes a flat section is `a(xy) exp(-(i/2) xy ln|x/y|)` on each
//! open quadrant; it satisfies `Y(sigma) + i xy sigma = 0` for
//! `Y = x d/dx - y d/dy`. The four quadrant profiles glue to a smooth section
//! exactly when each is Taylor flat at `h = 0`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::exact_nullity;
use crate::scalar::{lit, Real};

/// Open quadrant of the hyperbolic cross, numbered counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn of<T: Real>(x: T, y: T) -> Option<Quadrant> {
        match (x > T::zero(), x < T::zero(), y > T::zero(), y < T::zero()) {
            (true, _, true, _) => Some(Quadrant::Q1),
            (_, true, true, _) => Some(Quadrant::Q2),
            (_, true, _, true) => Some(Quadrant::Q3),
            (true, _, _, true) => Some(Quadrant::Q4),
            _ => None,
        }
    }

    /// Signs of `(x, y)` on this quadrant.
    pub fn signs(self) -> (i8, i8) {
        match self {
            Quadrant::Q1 => (1, 1),
            Quadrant::Q2 => (-1, 1),
            Quadrant::Q3 => (-1, -1),
            Quadrant::Q4 => (1, -1),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Quadrant::Q1 => 0,
            Quadrant::Q2 => 1,
            Quadrant::Q3 => 2,
            Quadrant::Q4 => 3,
        }
    }
}

/// `(h, beta) = (xy, ln|x/y| / 2)`.
pub fn hb_coords<T: Real>(x: T, y: T) -> Result<(T, T)> {
    if x == T::zero() || y == T::zero() {
        return Err(Error::OnAxis(format!("({x}, {y})")));
    }
    Ok((x * y, (x / y).abs().ln() * lit(0.5)))
}

/// Inverse of [`hb_coords`] on the given quadrant. `h` must have the sign of
/// `xy` on that quadrant.
pub fn xy_from_hb<T: Real>(q: Quadrant, h: T, beta: T) -> Result<(T, T)> {
    let (sx, sy) = q.signs();
    if h == T::zero() || (h > T::zero()) != (sx == sy) {
        return Err(Error::OutOfRange(format!("h = {h} does not belong to quadrant {q:?}")));
    }
    let r = h.abs().sqrt();
    let x = r * beta.exp();
    let y = r * (-beta).exp();
    Ok((if sx > 0 { x } else { -x }, if sy > 0 { y } else { -y }))
}

type Profile<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// Transversal profile `a_j` on one quadrant.
#[derive(Clone)]
pub struct QuadrantSection<T> {
    pub quadrant: Quadrant,
    profile: Profile<T>,
    pub closed_form: Option<String>,
}

impl<T> fmt::Debug for QuadrantSection<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadrantSection")
            .field("quadrant", &self.quadrant)
            .field("closed_form", &self.closed_form)
            .finish()
    }
}

impl<T: Real> QuadrantSection<T> {
    pub fn new(
        quadrant: Quadrant,
        profile: impl Fn(T) -> Complex<T> + Send + Sync + 'static,
        closed_form: Option<&str>,
    ) -> Self {
        QuadrantSection { quadrant, profile: Arc::new(profile), closed_form: closed_form.map(str::to_owned) }
    }

    pub fn profile(&self, h: T) -> Complex<T> {
        (self.profile)(h)
    }
}

#[derive(Debug, Clone)]
pub struct LocalFlatSection<T> {
    pub quadrants: [QuadrantSection<T>; 4],
}

impl<T: Real> LocalFlatSection<T> {
    /// Same real profile on all four quadrants.
    pub fn uniform(a: impl Fn(T) -> T + Send + Sync + Clone + 'static, label: &str) -> Self {
        let mk = |q| {
            let a = a.clone();
            QuadrantSection::new(q, move |h| Complex::new(a(h), T::zero()), Some(label))
        };
        LocalFlatSection { quadrants: [mk(Quadrant::Q1), mk(Quadrant::Q2), mk(Quadrant::Q3), mk(Quadrant::Q4)] }
    }

    pub fn eval(&self, x: T, y: T) -> Complex<T> {
        flat_section_eval(self, x, y)
    }
}

/// Value of the section at `(x, y)`; zero on the axes.
pub fn flat_section_eval<T: Real>(s: &LocalFlatSection<T>, x: T, y: T) -> Complex<T> {
    let Some(q) = Quadrant::of(x, y) else {
        return Complex::zero();
    };
    let h = x * y;
    let a = s.quadrants[q.index()].profile(h);
    let phase = -(h * (x / y).abs().ln()) * lit(0.5);
    a * Complex::new(T::zero(), phase).exp()
}

/// `|Y(sigma) + i xy sigma|` at `(x, y)` with `Y` by centred differences.
pub fn flat_pde_residual<T: Real>(sigma: &dyn Fn(T, T) -> Complex<T>, x: T, y: T, step: T) -> T {
    let two_h = step + step;
    let dx = (sigma(x + step, y) - sigma(x - step, y)) / two_h;
    let dy = (sigma(x, y + step) - sigma(x, y - step)) / two_h;
    let y_sigma = dx * x - dy * y;
    let lhs = y_sigma + Complex::new(T::zero(), x * y) * sigma(x, y);
    lhs.norm()
}

/// Residuals at `step, step/2, step/4` and the two observed orders
/// `log2(r_k / r_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub steps: [T; 3],
    pub residuals: [T; 3],
    pub orders: [T; 2],
}

pub fn residual_convergence<T: Real>(sigma: &dyn Fn(T, T) -> Complex<T>, x: T, y: T, step: T) -> ConvergenceStudy<T> {
    let half = lit::<T>(0.5);
    let steps = [step, step * half, step * half * half];
    let residuals = steps.map(|h| flat_pde_residual(sigma, x, y, h));
    let order = |a: T, b: T| (a / b).log2();
    ConvergenceStudy {
        steps,
        residuals,
        orders: [order(residuals[0], residuals[1]), order(residuals[1], residuals[2])],
    }
}

/// Decay verdict for one power `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessOrder<T> {
    pub k: u32,
    pub pass: bool,
    /// First sample index after which `|f(h_m)| / h_m^k` never increases.
    pub monotone_from: usize,
    /// `r_last / r_monotone_from` (0 when the ratio underflows).
    pub tail_ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport<T> {
    pub h0: T,
    pub orders: Vec<FlatnessOrder<T>>,
}

impl<T: Real> FlatnessReport<T> {
    pub fn passes_up_to(&self, k: u32) -> bool {
        self.orders.iter().filter(|o| o.k <= k).all(|o| o.pass)
    }

    pub fn first_failure(&self) -> Option<u32> {
        self.orders.iter().find(|o| !o.pass).map(|o| o.k)
    }
}

pub const FLATNESS_SAMPLES: usize = 40;

/// Numerical certificate that `f` vanishes to order `k` at `0+` for each
/// `k <= k_max`, from the ratios `|f(h_m)| / h_m^k` on `h_m = h0 2^-m`.
///
/// Order `k` passes when the ratio sequence is eventually non-increasing
/// (from some `m <= 30`) and falls by at least three decades over its tail.
pub fn taylor_flatness_test<T: Real>(f: &dyn Fn(T) -> T, k_max: u32, h0: T) -> FlatnessReport<T> {
    let hs: Vec<T> = (0..=FLATNESS_SAMPLES).map(|m| h0 * lit::<T>(2.0).powi(-(m as i32))).collect();
    let vals: Vec<T> = hs.iter().map(|&h| f(h).abs()).collect();
    let orders = (0..=k_max)
        .map(|k| {
            let r: Vec<T> = hs
                .iter()
                .zip(&vals)
                .map(|(&h, &v)| if v == T::zero() { T::zero() } else { v / h.powi(k as i32) })
                .collect();
            let mut from = r.len() - 1;
            while from > 0 && r[from - 1] >= r[from] {
                from -= 1;
            }
            let last = r[r.len() - 1];
            let tail_ratio = if last == T::zero() { T::zero() } else { last / r[from] };
            let pass = from <= 30 && (last == T::zero() || tail_ratio <= lit(1e-3));
            FlatnessOrder { k, pass, monotone_from: from, tail_ratio }
        })
        .collect();
    FlatnessReport { h0, orders }
}

/// Coefficient equations of `Y(sigma) + i xy sigma = 0` for a real/imaginary
/// split `sigma = sum (a_ij + i b_ij) x^i y^j` of total degree `<= max_degree`.
///
/// Equation `(i, j)` reads `(i - j) a_ij - b_{i-1,j-1} = 0` and
/// `(i - j) b_ij + a_{i-1,j-1} = 0`. Every equation is kept whose unknowns
/// with non-zero coefficient all lie inside the truncation, which includes
/// the diagonal equations one degree pair above the top.
///
/// Returns `(rows, ncols)`; columns are `a_ij` then `b_ij` in degree order.
pub fn rigidity_system(max_degree: usize) -> (Vec<Vec<BigRational>>, usize) {
    let mut index = std::collections::HashMap::new();
    for d in 0..=max_degree {
        for i in 0..=d {
            let n = index.len();
            index.insert((i, d - i), n);
        }
    }
    let nmono = index.len();
    let ncols = 2 * nmono;
    let mut rows = Vec::new();
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    for d in 0..=(max_degree + 2) {
        for i in 0..=d {
            let j = d - i;
            let diag = i as i64 - j as i64;
            let here = index.get(&(i, j)).copied();
            let prev = if i > 0 && j > 0 { index.get(&(i - 1, j - 1)).copied() } else { None };
            let lower_in = i == 0 || j == 0 || prev.is_some();
            if (diag != 0 && here.is_none()) || !lower_in {
                continue;
            }
            // real part: diag * a_ij - b_prev
            let mut re = vec![int(0); ncols];
            let mut im = vec![int(0); ncols];
            if let Some(h) = here {
                re[h] = int(diag);
                im[nmono + h] = int(diag);
            }
            if let Some(p) = prev {
                re[nmono + p] = int(-1);
                im[p] = int(1);
            }
            if re.iter().any(|c| !c.is_zero()) {
                rows.push(re);
            }
            if im.iter().any(|c| !c.is_zero()) {
                rows.push(im);
            }
        }
    }
    (rows, ncols)
}

/// Exact nullity of [`rigidity_system`].
pub fn rigidity_nullity(max_degree: usize) -> usize {
    let (rows, ncols) = rigidity_system(max_degree);
    exact_nullity(&rows, ncols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn hb_examples() {
        assert_eq!(hb_coords(1.0, 1.0).unwrap(), (1.0, 0.0));
        let (h, b) = hb_coords(2.0f64, 0.5).unwrap();
        assert!((h - 1.0).abs() < 1e-15 && (b - 0.5 * 4f64.ln()).abs() < 1e-15);
        assert!(matches!(hb_coords(0.0, 2.0), Err(Error::OnAxis(_))));
    }

    #[test]
    fn hb_round_trip_quadrant_three() {
        let (x, y) = xy_from_hb(Quadrant::Q3, 0.3f64, -1.2).unwrap();
        assert!(x < 0.0 && y < 0.0);
        let (h, b) = hb_coords(x, y).unwrap();
        assert!((h - 0.3).abs() < 1e-12 && (b + 1.2).abs() < 1e-12);
    }

    #[test]
    fn quadrant_two_sign_convention() {
        let (x, y) = xy_from_hb(Quadrant::Q2, -0.25, 0.1).unwrap();
        assert!((x + 0.5 * 0.1f64.exp()).abs() < 1e-15);
        assert!((y - 0.5 * (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let s = LocalFlatSection::uniform(|h: f64| h, "h");
        assert!((s.eval(1.0, 1.0) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let s = LocalFlatSection::uniform(|h: f64| (-1.0 / (h * h)).exp(), "exp(-1/h^2)");
        // xy = 1, ln|x/y| = ln(1/4): phase = -(1/2) ln(1/4) = ln 2
        let expect = Complex::new(0.0, LN_2).exp() * (-1.0f64).exp();
        assert!((s.eval(0.5, 2.0) - expect).norm() < 1e-15);
        assert_eq!(s.eval(0.0, 0.3), Complex::zero());
        assert_eq!(s.eval(-0.2, 0.0), Complex::zero());
    }

    #[test]
    fn constant_is_not_flat() {
        let one = |_x: f64, _y: f64| Complex::new(1.0, 0.0);
        let r = flat_pde_residual(&one, 1.0, 1.0, 1e-4);
        assert!((r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn monomial_flatness_boundary() {
        let rep = taylor_flatness_test(&|h: f64| h * h * h, 6, 0.5);
        assert!(rep.passes_up_to(2));
        assert_eq!(rep.first_failure(), Some(3));
        assert!(rep.orders[4..].iter().all(|o| !o.pass));
    }

    #[test]
    fn zero_is_flat() {
        let rep = taylor_flatness_test(&|_h: f64| 0.0, 10, 0.5);
        assert!(rep.passes_up_to(10));
    }

    #[test]
    fn rigidity_small_degrees() {
        for d in 0..=6 {
            assert_eq!(rigidity_nullity(d), 0, "degree {d}");
        }
    }
}
