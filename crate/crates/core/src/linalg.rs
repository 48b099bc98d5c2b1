//! Rank computations: numeric (SVD threshold) and exact (Gaussian elimination
//! over a field).

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Zero};

use crate::scalar::{lit, LinalgReal, Real};

/// Exact complex field `Q(i)`.
pub type GaussianRational = Complex<BigRational>;

pub fn gq(re: i64, re_den: i64, im: i64, im_den: i64) -> GaussianRational {
    Complex::new(
        BigRational::new(BigInt::from(re), BigInt::from(re_den)),
        BigRational::new(BigInt::from(im), BigInt::from(im_den)),
    )
}

/// Outcome of a thresholded SVD rank computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo<T> {
    pub rank: usize,
    pub sigma_max: T,
    /// Smallest singular value counted in the rank (0 if rank is 0).
    pub sigma_min_kept: T,
    /// Largest singular value discarded (0 if none).
    pub sigma_max_dropped: T,
    /// Ratio of the kept/dropped gap; values near 1 mean the threshold is
    /// sitting inside a cluster.
    pub gap_ratio: T,
    pub near_threshold: bool,
}

impl<T: Real> RankInfo<T> {
    /// `sigma_max / sigma_min_kept`.
    pub fn condition(&self) -> T {
        if self.rank == 0 || self.sigma_min_kept <= T::zero() {
            T::one()
        } else {
            self.sigma_max / self.sigma_min_kept
        }
    }
}

/// Rank of a complex matrix: number of singular values above
/// `rel_tol * sigma_max`.
pub fn numeric_rank<T: LinalgReal>(m: &DMatrix<Complex<T>>, rel_tol: T) -> RankInfo<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo {
            rank: 0,
            sigma_max: T::zero(),
            sigma_min_kept: T::zero(),
            sigma_max_dropped: T::zero(),
            gap_ratio: T::infinity(),
            near_threshold: false,
        };
    }
    let sv = m.clone().svd(false, false).singular_values;
    let mut s: Vec<T> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let smax = s[0];
    let thr = rel_tol * smax;
    let rank = if smax <= T::zero() { 0 } else { s.iter().filter(|&&x| x > thr).count() };
    let kept = if rank > 0 { s[rank - 1] } else { T::zero() };
    let dropped = if rank < s.len() { s[rank] } else { T::zero() };
    let gap_ratio = if dropped > T::zero() { kept / dropped } else { T::infinity() };
    // Anything within two decades of the threshold on either side is suspicious.
    let near = (kept > T::zero() && kept < thr * lit(100.0)) || (dropped > T::zero() && dropped > thr * lit(0.01));
    RankInfo {
        rank,
        sigma_max: smax,
        sigma_min_kept: kept,
        sigma_max_dropped: dropped,
        gap_ratio,
        near_threshold: near,
    }
}

/// Exact rank by Gaussian elimination. `rows` is row-major; every row must
/// have the same length.
pub fn exact_rank<F: Clone + Num>(rows: &[Vec<F>]) -> usize {
    let mut a: Vec<Vec<F>> = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let p = a[rank][col].clone();
        for r in (rank + 1)..nrows {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / p.clone();
            let pivot_row = a[rank].clone();
            for (x, v) in a[r][col..ncols].iter_mut().zip(&pivot_row[col..ncols]) {
                *x = x.clone() - v.clone() * f.clone();
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// `ncols - rank`.
pub fn exact_nullity<F: Clone + Num>(rows: &[Vec<F>], ncols: usize) -> usize {
    ncols - exact_rank(rows)
}

/// Picks the given columns out of a dense matrix.
pub fn select_columns<T: nalgebra::Scalar + Zero>(m: &DMatrix<T>, cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_rank_of_rank_one() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex::new((i + 1) as f64 * (j + 2) as f64, 0.0));
        assert_eq!(numeric_rank(&m, 1e-8).rank, 1);
    }

    #[test]
    fn exact_rank_gaussian_rationals() {
        let i = gq(0, 1, 1, 1);
        let one = gq(1, 1, 0, 1);
        // [[1, i], [i, -1]] has rank 1 since row2 = i * row1
        let rows = vec![vec![one.clone(), i.clone()], vec![i.clone(), -one.clone()]];
        assert_eq!(exact_rank(&rows), 1);
        let rows = vec![vec![one.clone(), i.clone()], vec![i, one]];
        assert_eq!(exact_rank(&rows), 2);
    }

    #[test]
    fn empty_matrix_has_rank_zero() {
        let m: DMatrix<Complex<f64>> = DMatrix::zeros(0, 4);
        assert_eq!(numeric_rank(&m, 1e-8).rank, 0);
        assert_eq!(exact_rank::<BigRational>(&[]), 0);
    }
}
