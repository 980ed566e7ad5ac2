//! Dense SVD helpers: numeric rank, kernels, ranges and pseudo-inverse solves.
//!
//! Every rank decision in the crate goes through [`Spectrum`], which keeps the
//! singular values so that callers can report how far the decision was from
//! the threshold.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Singular values of a matrix (descending) together with a rank decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub singular_values: Vec<T>,
    /// Absolute threshold `tol * sigma_max`.
    pub threshold: T,
    pub rank: usize,
}

/// Serializable summary of a rank decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMargin {
    /// Smallest retained singular value relative to `sigma_max`.
    pub smallest_kept: Option<f64>,
    /// Largest discarded singular value relative to `sigma_max`.
    pub largest_dropped: Option<f64>,
    /// `min(smallest_kept / tol, tol / largest_dropped)`; infinite when nothing borders the threshold.
    pub margin: f64,
}

impl<T: Scalar> Spectrum<T> {
    pub fn sigma_max(&self) -> T {
        self.singular_values
            .first()
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// How decisively the threshold separated kept from dropped singular values.
    pub fn margin(&self, tol: T) -> RankMargin {
        let smax = self.sigma_max().to_f64_lossy();
        let tol = tol.to_f64_lossy();
        if smax == 0.0 {
            return RankMargin {
                smallest_kept: None,
                largest_dropped: Some(0.0),
                margin: f64::INFINITY,
            };
        }
        let smallest_kept =
            (self.rank > 0).then(|| self.singular_values[self.rank - 1].to_f64_lossy() / smax);
        let largest_dropped = self
            .singular_values
            .get(self.rank)
            .map(|s| s.to_f64_lossy() / smax);
        let kept_ratio = smallest_kept.map_or(f64::INFINITY, |s| s / tol);
        let dropped_ratio = largest_dropped.map_or(f64::INFINITY, |s| {
            if s == 0.0 {
                f64::INFINITY
            } else {
                tol / s
            }
        });
        RankMargin {
            smallest_kept,
            largest_dropped,
            margin: kept_ratio.min(dropped_ratio),
        }
    }
}

fn rank_from<T: Scalar>(sv: &[T], tol: T) -> (usize, T) {
    let smax = sv.first().copied().unwrap_or_else(T::zero);
    let threshold = tol * smax;
    let rank = if smax == T::zero() {
        0
    } else {
        sv.iter().filter(|&&s| s > threshold).count()
    };
    (rank, threshold)
}

struct SortedSvd<T: Scalar> {
    u: Option<DMatrix<T>>,
    sv: Vec<T>,
    v: Option<DMatrix<T>>,
}

fn sorted_svd<T: Scalar>(m: &DMatrix<T>, want_u: bool, want_v: bool) -> SortedSvd<T> {
    let svd = m.clone().svd(want_u, want_v);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = svd
        .u
        .map(|u| DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]));
    let v = svd
        .v_t
        .map(|vt| DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]));
    SortedSvd { u, sv, v }
}

/// Singular values and numeric rank of `m` (singular values `> tol * sigma_max`).
pub fn spectrum<T: Scalar>(m: &DMatrix<T>, tol: T) -> Spectrum<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Spectrum {
            singular_values: Vec::new(),
            threshold: T::zero(),
            rank: 0,
        };
    }
    let sv = sorted_svd(m, false, false).sv;
    let (rank, threshold) = rank_from(&sv, tol);
    Spectrum {
        singular_values: sv,
        threshold,
        rank,
    }
}

/// Count of singular values `> tol * sigma_max`; zero for a zero or empty matrix.
pub fn numeric_rank<T: Scalar>(m: &DMatrix<T>, tol: T) -> usize {
    spectrum(m, tol).rank
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
pub fn kernel_basis<T: Scalar>(m: &DMatrix<T>, tol: T) -> (DMatrix<T>, Spectrum<T>) {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        let spec = Spectrum {
            singular_values: Vec::new(),
            threshold: T::zero(),
            rank: 0,
        };
        return (DMatrix::identity(n, n), spec);
    }
    // Thin SVD only yields min(rows, cols) right singular vectors; pad with
    // zero rows so the full right basis is available.
    let padded;
    let work = if m.nrows() < n {
        padded = {
            let mut p = DMatrix::zeros(n, n);
            p.rows_mut(0, m.nrows()).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = sorted_svd(work, false, true);
    let (rank, threshold) = rank_from(&svd.sv, tol);
    let v = svd.v.expect("right singular vectors requested");
    let kernel = v.columns(rank, n - rank).into_owned();
    (
        kernel,
        Spectrum {
            singular_values: svd.sv,
            threshold,
            rank,
        },
    )
}

/// The `count` right singular vectors of `m` with the smallest singular values.
pub fn trailing_right_vectors<T: Scalar>(m: &DMatrix<T>, count: usize) -> DMatrix<T> {
    let n = m.ncols();
    let count = count.min(n);
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n)
            .columns(n - count, count)
            .into_owned();
    }
    let mut padded = DMatrix::zeros(m.nrows().max(n), n);
    padded.rows_mut(0, m.nrows()).copy_from(m);
    let v = sorted_svd(&padded, false, true)
        .v
        .expect("right singular vectors requested");
    v.columns(n - count, count).into_owned()
}

/// Orthonormal basis (as columns) of the numerical column space of `cols`.
pub fn range_basis<T: Scalar>(cols: &DMatrix<T>, tol: T) -> (DMatrix<T>, Spectrum<T>) {
    if cols.nrows() == 0 || cols.ncols() == 0 {
        let spec = Spectrum {
            singular_values: Vec::new(),
            threshold: T::zero(),
            rank: 0,
        };
        return (DMatrix::zeros(cols.nrows(), 0), spec);
    }
    let svd = sorted_svd(cols, true, false);
    let (rank, threshold) = rank_from(&svd.sv, tol);
    let u = svd.u.expect("left singular vectors requested");
    (
        u.columns(0, rank).into_owned(),
        Spectrum {
            singular_values: svd.sv,
            threshold,
            rank,
        },
    )
}

/// Minimum-norm least-squares solution of `m x = b` with singular values
/// below `tol * sigma_max` truncated.
pub fn pinv_solve<T: Scalar>(m: &DMatrix<T>, b: &DVector<T>, tol: T) -> DVector<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(m.ncols());
    }
    let svd = sorted_svd(m, true, true);
    let (rank, _) = rank_from(&svd.sv, tol);
    let u = svd.u.expect("u requested");
    let v = svd.v.expect("v requested");
    let mut x = DVector::zeros(m.ncols());
    for k in 0..rank {
        let coeff = u.column(k).dot(b) / svd.sv[k];
        x.axpy(coeff, &v.column(k), T::one());
    }
    x
}

/// Removes from `x` its component in the span of the orthonormal columns of `basis`.
pub fn project_out<T: Scalar>(basis: &DMatrix<T>, x: &DVector<T>) -> DVector<T> {
    if basis.ncols() == 0 {
        return x.clone();
    }
    let coeffs = basis.transpose() * x;
    x - basis * coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_of_zero_and_identity() {
        assert_eq!(numeric_rank(&DMatrix::<f64>::zeros(2, 2), 1e-9), 0);
        assert_eq!(numeric_rank(&DMatrix::<f64>::identity(3, 3), 1e-9), 3);
    }

    #[test]
    fn rank_one_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DVector::<f64>::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::<f64>::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let m = &a * b.transpose();
        assert_eq!(numeric_rank(&m, 1e-9), 1);
    }

    #[test]
    fn kernel_of_wide_matrix_is_complete() {
        let m = DMatrix::<f64>::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (k, spec) = kernel_basis(&m, 1e-9);
        assert_eq!(spec.rank, 1);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_empty_matrix_is_everything() {
        let m = DMatrix::<f64>::zeros(0, 4);
        let (k, _) = kernel_basis(&m, 1e-9);
        assert_eq!(k.ncols(), 4);
    }

    #[test]
    fn range_basis_drops_dependent_columns() {
        let m = DMatrix::<f64>::from_column_slice(3, 3, &[1., 0., 0., 2., 0., 0., 0., 1., 0.]);
        let (r, spec) = range_basis(&m, 1e-9);
        assert_eq!(spec.rank, 2);
        assert_eq!(r.ncols(), 2);
    }

    #[test]
    fn pinv_solve_recovers_min_norm_solution() {
        let m = DMatrix::<f64>::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = pinv_solve(&m, &DVector::from_vec(vec![2.0]), 1e-12);
        assert!((x - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn margin_reports_gap() {
        let m = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![1.0, 1e-3, 1e-14]));
        let spec = spectrum(&m, 1e-9);
        assert_eq!(spec.rank, 2);
        let margin = spec.margin(1e-9);
        assert!((margin.margin - 1e5).abs() < 1.0, "{margin:?}");
    }
}
