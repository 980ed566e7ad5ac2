//! The Lie algebra of the linear isometry group, isometry-group dimensions,
//! trivial-motion spaces and the associated dimension bounds.
//!
//! A matrix `A` generates a one-parameter family of linear isometries exactly
//! when the norm does not change to first order along `x -> A x`, i.e. when
//! `phi(x)(A x) = 0` at every smooth `x`. Sampling smooth unit vectors turns
//! this into a homogeneous linear system in the `d^2` entries of `A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::audit::{AuditRecord, AuditStatus};
use crate::error::{Error, Result};
use crate::graph::Placement;
use crate::linalg::{self, RankMargin, Spectrum};
use crate::normed_space::NormedSpace;
use crate::rigidity::MotionSpace;
use crate::sampling;
use crate::Scalar;

/// Stream offset separating validation samples from constraint samples.
const VALIDATION_STREAM: u64 = 1 << 40;
const VALIDATION_POINTS: usize = 100;
const VALIDATION_TIMES: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct LieConfig<T> {
    /// Number of sampled smooth unit vectors; `None` means `10 d^2`.
    pub nsamples: Option<usize>,
    pub seed: u64,
    /// Relative nullspace tolerance.
    pub tol: T,
    /// Allowed relative norm change of `exp(tA) x` during validation.
    pub validation_tol: T,
}

impl<T: Scalar> Default for LieConfig<T> {
    fn default() -> Self {
        let eps = T::default_epsilon();
        Self {
            nsamples: None,
            seed: 0,
            tol: T::lit(1e-8).max(eps * T::lit(1e3)),
            validation_tol: T::lit(1e-7).max(eps * T::lit(1e3)),
        }
    }
}

impl<T: Scalar> LieConfig<T> {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Basis of the Lie algebra of the linear isometry group.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraBasis<T: Scalar> {
    dim: usize,
    mats: Vec<DMatrix<T>>,
    margin: Option<RankMargin>,
    validation_worst: f64,
}

impl<T: Scalar> LieAlgebraBasis<T> {
    /// Wraps explicitly known generators (no sampling diagnostics).
    pub fn from_generators(dim: usize, mats: Vec<DMatrix<T>>) -> Self {
        Self {
            dim,
            mats,
            margin: None,
            validation_worst: 0.0,
        }
    }

    pub fn space_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[DMatrix<T>] {
        &self.mats
    }

    /// Singular-value margin of the nullspace decision, when computed by sampling.
    pub fn margin(&self) -> Option<RankMargin> {
        self.margin
    }

    pub fn validation_worst(&self) -> f64 {
        self.validation_worst
    }
}

fn sample_smooth_unit<T: Scalar>(space: &NormedSpace<T>, seed: u64, stream: u64) -> DVector<T> {
    let mut rng = sampling::trial_rng(seed, stream);
    loop {
        let x: DVector<T> = sampling::gaussian_vector(space.dim(), &mut rng);
        let n = space.norm_unchecked(&x);
        if n > T::zero() && space.is_smooth_point(&x, T::default_tol()).unwrap_or(false) {
            return x / n;
        }
    }
}

/// `exp(A)` by scaling and squaring a 16-term Taylor series.
///
/// After scaling `|A|_1 <= 1/2`, the truncated tail is below `0.5^17 / 17!`,
/// far under double precision rounding.
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let norm1 = (0..a.ncols())
        .map(|c| a.column(c).iter().fold(T::zero(), |s, x| s + x.abs()))
        .fold(T::zero(), |m, x| m.max(x));
    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm1 * scale > T::lit(0.5) {
        scale *= T::lit(0.5);
        squarings += 1;
    }
    let b = a * scale;
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=16 {
        term = &term * &b / T::from_usize(k).expect("small integer");
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Samples the constraint `phi(x)(A x) = 0` at smooth unit vectors and returns the validated nullspace.
pub fn linear_isometry_lie_algebra<T: Scalar>(
    space: &NormedSpace<T>,
    cfg: &LieConfig<T>,
) -> Result<LieAlgebraBasis<T>> {
    let d = space.dim();
    let nsamples = cfg.nsamples.unwrap_or(10 * d * d);
    if nsamples < 5 * d * d {
        return Err(Error::OutOfRange(format!(
            "need at least 5 d^2 = {} constraint samples, got {nsamples}",
            5 * d * d
        )));
    }
    let mut constraints = DMatrix::zeros(nsamples, d * d);
    for k in 0..nsamples {
        let x = sample_smooth_unit(space, cfg.seed, k as u64);
        let f = space.dual_map_with_tol(&x, T::default_tol())?;
        for i in 0..d {
            for j in 0..d {
                constraints[(k, i * d + j)] = f.coeffs()[i] * x[j];
            }
        }
    }
    let (kernel, spec) = linalg::kernel_basis(&constraints, cfg.tol);
    let mats: Vec<DMatrix<T>> = kernel
        .column_iter()
        .map(|col| DMatrix::from_fn(d, d, |i, j| col[i * d + j]))
        .collect();

    let mut worst = 0.0f64;
    for k in 0..VALIDATION_POINTS {
        let mut rng = sampling::trial_rng(cfg.seed, VALIDATION_STREAM + k as u64);
        let x: DVector<T> = sampling::gaussian_vector(d, &mut rng);
        let nx = space.norm_unchecked(&x);
        for a in &mats {
            for t in VALIDATION_TIMES {
                let moved = expm(&(a * T::lit(t))) * &x;
                let dev = ((space.norm_unchecked(&moved) - nx).abs() / nx).to_f64_lossy();
                worst = worst.max(dev);
            }
        }
    }
    if worst > cfg.validation_tol.to_f64_lossy() {
        return Err(Error::LieValidation { worst });
    }
    Ok(LieAlgebraBasis {
        dim: d,
        mats,
        margin: Some(spec.margin(cfg.tol)),
        validation_worst: worst,
    })
}

/// Generators of the linear isometries of the companion Euclidean structure:
/// `G^{-1} (E_ij - E_ji)` for `i < j`.
pub fn companion_lie_algebra<T: Scalar>(space: &NormedSpace<T>) -> LieAlgebraBasis<T> {
    let d = space.dim();
    let gram = space.companion_gram();
    let chol = gram
        .cholesky()
        .expect("companion gram is positive definite");
    let mut mats = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            let mut s = DMatrix::zeros(d, d);
            s[(i, j)] = T::one();
            s[(j, i)] = -T::one();
            mats.push(chol.solve(&s));
        }
    }
    LieAlgebraBasis::from_generators(d, mats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoDims {
    /// Dimension of the linear isometry group.
    pub lin_dim: usize,
    /// Dimension of the full isometry group, `d + lin_dim`.
    pub iso_dim: usize,
    pub euclidean: bool,
}

/// Isometry group dimensions, checked against the known Euclidean values and non-Euclidean bounds.
pub fn iso_dims<T: Scalar>(space: &NormedSpace<T>, lie: &LieAlgebraBasis<T>) -> Result<IsoDims> {
    let d = space.dim();
    let lin_dim = lie.dim();
    let iso_dim = d + lin_dim;
    let euclidean = space.is_euclidean();
    if euclidean {
        if lin_dim != d * (d - 1) / 2 {
            return Err(Error::BoundViolation(format!(
                "Euclidean space of dimension {d} must have {} linear isometry generators, found {lin_dim}",
                d * (d - 1) / 2
            )));
        }
    } else {
        let lin_max = (d - 1) * d.saturating_sub(2) / 2 + 1;
        let iso_max = d * (d - 1) / 2 + 1;
        if lin_dim > lin_max || iso_dim > iso_max || iso_dim < d {
            return Err(Error::BoundViolation(format!(
                "non-Euclidean space of dimension {d}: lin_dim {lin_dim} (max {lin_max}), iso_dim {iso_dim} (range {d}..={iso_max})"
            )));
        }
    }
    Ok(IsoDims {
        lin_dim,
        iso_dim,
        euclidean,
    })
}

/// Trivial motions of `p`: translations `(t, ..., t)` and `(A p_v)_v` for each Lie generator `A`.
pub fn trivial_motion_space<T: Scalar>(
    placement: &Placement<T>,
    lie: &LieAlgebraBasis<T>,
    tol: T,
) -> MotionSpace<T> {
    trivial_motion_space_with_spectrum(placement, lie, tol).0
}

pub fn trivial_motion_space_with_spectrum<T: Scalar>(
    placement: &Placement<T>,
    lie: &LieAlgebraBasis<T>,
    tol: T,
) -> (MotionSpace<T>, Spectrum<T>) {
    let d = lie.space_dim();
    let n = placement.len();
    let mut gens = DMatrix::zeros(d * n, d + lie.dim());
    for i in 0..d {
        for v in 0..n {
            gens[(v * d + i, i)] = T::one();
        }
    }
    for (k, a) in lie.mats().iter().enumerate() {
        for v in 0..n {
            let image = a * placement.point(v);
            gens.view_mut((v * d, d + k), (d, 1)).copy_from(&image);
        }
    }
    MotionSpace::span_of(&gens, tol)
}

/// `(n+1)(2d-n)/2`: trivial-motion dimension of a placement with `n`-dimensional affine span in Euclidean `d`-space.
pub fn euclidean_trivial_dim(n: usize, d: usize) -> Result<usize> {
    if n > d {
        return Err(Error::OutOfRange(format!(
            "affine span dimension {n} exceeds space dimension {d}"
        )));
    }
    Ok((n + 1) * (2 * d - n) / 2)
}

/// Whether the trivial motions of `p` attain the dimension of the isometry group.
pub fn is_full<T: Scalar>(placement: &Placement<T>, lie: &LieAlgebraBasis<T>, tol: T) -> bool {
    trivial_motion_space(placement, lie, tol).dim() == lie.space_dim() + lie.dim()
}

/// Checks the trivial-motion dimension bounds for `p`.
pub fn bound_audit<T: Scalar>(
    placement: &Placement<T>,
    space: &NormedSpace<T>,
    lie: &LieAlgebraBasis<T>,
    tol: T,
) -> Vec<AuditRecord> {
    let d = space.dim();
    let trivial = trivial_motion_space(placement, lie, tol).dim();
    let iso = d + lie.dim();
    let euclidean = space.is_euclidean();
    let n = placement.affine_span_dim(tol);
    let mut out = Vec::with_capacity(3);

    out.push(AuditRecord::check(
        "trivial_dim_within_iso_bounds",
        d <= trivial && trivial <= iso,
        trivial as f64,
        iso as f64,
        format!("{d} <= dim T(p) <= dim Iso(X)"),
    ));

    let formula = euclidean_trivial_dim(n, d).expect("affine span cannot exceed dimension");
    let (ok, note) = if euclidean {
        (
            trivial == formula,
            "Euclidean: dim T(p) equals (n+1)(2d-n)/2",
        )
    } else if n >= 1 {
        (
            trivial < formula,
            "non-Euclidean with n >= 1: dim T(p) strictly below (n+1)(2d-n)/2",
        )
    } else {
        (trivial <= formula, "n = 0: dim T(p) at most d")
    };
    out.push(AuditRecord::check(
        "affine_span_bound",
        ok,
        trivial as f64,
        formula as f64,
        format!("{note} (n = {n})"),
    ));

    let two_generic = placement.len() == 2 && placement.is_general_position(tol).unwrap_or(false);
    if two_generic {
        let bound = 2 * d - 1;
        let ok = if euclidean {
            trivial == bound
        } else {
            trivial < bound
        };
        out.push(AuditRecord::check(
            "two_point_bound",
            ok,
            trivial as f64,
            bound as f64,
            "two distinct points: dim T(p) <= 2d-1, equality iff Euclidean",
        ));
    } else {
        out.push(AuditRecord::new(
            "two_point_bound",
            AuditStatus::NotApplicable,
            None,
            None,
            "requires exactly two distinct points",
        ));
    }
    out
}
