//! Finite-dimensional normed spaces: norm evaluation, smooth points and the
//! dual map sending a smooth point to its unique support functional.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Scalar;

/// A point of the space, in standard coordinates.
pub type Vector<T> = DVector<T>;

/// A linear functional on the space, in dual standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector<T: Scalar>(DVector<T>);

impl<T: Scalar> Covector<T> {
    pub fn new(coeffs: DVector<T>) -> Self {
        Self(coeffs)
    }

    pub fn from_slice(coeffs: &[T]) -> Self {
        Self(DVector::from_column_slice(coeffs))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &DVector<T> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<T> {
        self.0
    }

    /// Evaluates the functional at `x`.
    pub fn apply(&self, x: &Vector<T>) -> T {
        self.0.dot(x)
    }

    pub fn scale(&self, a: T) -> Self {
        Self(&self.0 * a)
    }
}

/// The exponent of an `lp` norm; infinity is an explicit tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind<T: Scalar> {
    /// `norm(x) = sqrt(x^T G x)` for a symmetric positive definite Gram matrix `G`.
    Euclidean { gram: DMatrix<T> },
    /// The `lp` norm in standard coordinates.
    Lp { q: Exponent<T> },
    /// `norm(x) = max_f f(x)` over a centrally symmetric spanning set of functionals.
    Polyhedral { functionals: Vec<Covector<T>> },
}

/// A finite-dimensional real normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedSpace<T: Scalar> {
    dim: usize,
    kind: NormKind<T>,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl<T: Scalar> NormedSpace<T> {
    pub fn euclidean(gram: DMatrix<T>) -> Result<Self> {
        let d = gram.nrows();
        if d == 0 || gram.ncols() != d {
            return Err(Error::InvalidSpace(format!(
                "gram matrix must be square and non-empty, got {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        if gram.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidSpace(
                "gram matrix has non-finite entries".into(),
            ));
        }
        let scale = gram.amax();
        let asym = (&gram - gram.transpose()).amax();
        if asym > T::lit(1e-10) * scale {
            return Err(Error::InvalidSpace("gram matrix is not symmetric".into()));
        }
        let gram = (&gram + gram.transpose()) * T::lit(0.5);
        let eig = gram.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig <= T::lit(1e-12) * scale || scale == T::zero() {
            return Err(Error::InvalidSpace(
                "gram matrix is not positive definite".into(),
            ));
        }
        Ok(Self {
            dim: d,
            kind: NormKind::Euclidean { gram },
        })
    }

    /// `R^d` with the standard inner product.
    pub fn standard_euclidean(dim: usize) -> Result<Self> {
        Self::euclidean(DMatrix::identity(dim, dim))
    }

    /// `lp` norm with finite `q >= 1`.
    pub fn lp(dim: usize, q: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        if !q.is_finite() || q < T::one() {
            return Err(Error::InvalidSpace(format!(
                "lp exponent must be >= 1, got {q}"
            )));
        }
        Ok(Self {
            dim,
            kind: NormKind::Lp {
                q: Exponent::Finite(q),
            },
        })
    }

    pub fn l_inf(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            kind: NormKind::Lp {
                q: Exponent::Infinity,
            },
        })
    }

    /// Polyhedral norm given in support form by its functionals.
    pub fn polyhedral(functionals: Vec<Vec<T>>) -> Result<Self> {
        let first = functionals
            .first()
            .ok_or_else(|| Error::InvalidSpace("polyhedral norm needs functionals".into()))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        for f in &functionals {
            check_dim(d, f.len())?;
            if f.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSpace(
                    "non-finite functional coefficient".into(),
                ));
            }
        }
        let fs: Vec<DVector<T>> = functionals
            .iter()
            .map(|f| DVector::from_column_slice(f))
            .collect();
        let scale = fs.iter().map(|f| f.amax()).fold(T::zero(), |a, b| a.max(b));
        let eps = T::lit(1e-9) * scale;
        for (i, f) in fs.iter().enumerate() {
            if fs[..i].iter().any(|g| (f - g).amax() <= eps) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate functional at index {i}"
                )));
            }
            if !fs.iter().any(|g| (f + g).amax() <= eps) {
                return Err(Error::InvalidSpace(format!(
                    "functional {i} has no negation in the set (not centrally symmetric)"
                )));
            }
        }
        let m = DMatrix::from_fn(fs.len(), d, |r, c| fs[r][c]);
        if crate::linalg::numeric_rank(&m, T::lit(1e-10)) < d {
            return Err(Error::InvalidSpace(
                "functionals do not span the dual space (unit ball unbounded)".into(),
            ));
        }
        Ok(Self {
            dim: d,
            kind: NormKind::Polyhedral {
                functionals: fs.into_iter().map(Covector).collect(),
            },
        })
    }

    /// The `l1` norm written in support form: all `2^d` sign vectors.
    pub fn diamond(dim: usize) -> Result<Self> {
        if dim == 0 || dim > 16 {
            return Err(Error::InvalidSpace(
                "diamond norm supports 1..=16 dimensions".into(),
            ));
        }
        let fs = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            -T::one()
                        } else {
                            T::one()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::polyhedral(fs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind<T> {
        &self.kind
    }

    /// Euclidean structure, or `lp` with `q` exactly 2. Every norm on a line is Euclidean.
    pub fn is_euclidean(&self) -> bool {
        if self.dim == 1 {
            return true;
        }
        match &self.kind {
            NormKind::Euclidean { .. } => true,
            NormKind::Lp {
                q: Exponent::Finite(q),
            } => *q == T::lit(2.0),
            _ => false,
        }
    }

    /// Gram matrix of the Euclidean structure whose isometries contain those of this space.
    ///
    /// Exact for Euclidean spaces; the standard inner product for `lp` and
    /// for polyhedral norms whose symmetries are signed permutations.
    pub fn companion_gram(&self) -> DMatrix<T> {
        match &self.kind {
            NormKind::Euclidean { gram } => gram.clone(),
            _ => DMatrix::identity(self.dim, self.dim),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            NormKind::Euclidean { .. } => format!("euclidean(d={})", self.dim),
            NormKind::Lp {
                q: Exponent::Finite(q),
            } => format!("l{q}(d={})", self.dim),
            NormKind::Lp {
                q: Exponent::Infinity,
            } => format!("linf(d={})", self.dim),
            NormKind::Polyhedral { functionals } => {
                format!(
                    "polyhedral({} functionals, d={})",
                    functionals.len(),
                    self.dim
                )
            }
        }
    }

    pub fn norm(&self, x: &Vector<T>) -> Result<T> {
        check_dim(self.dim, x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &Vector<T>) -> T {
        match &self.kind {
            NormKind::Euclidean { gram } => (x.dot(&(gram * x))).max(T::zero()).sqrt(),
            NormKind::Lp { q } => lp_norm(x, *q),
            NormKind::Polyhedral { functionals } => functionals
                .iter()
                .map(|f| f.apply(x))
                .fold(T::zero(), |a, b| a.max(b)),
        }
    }

    /// Operator norm of a functional, `sup { f(x) : norm(x) <= 1 }`.
    pub fn dual_norm(&self, f: &Covector<T>) -> Result<T> {
        check_dim(self.dim, f.dim())?;
        let c = f.coeffs();
        Ok(match &self.kind {
            NormKind::Euclidean { gram } => {
                let inv = gram
                    .clone()
                    .cholesky()
                    .expect("gram validated positive definite")
                    .solve(c);
                c.dot(&inv).max(T::zero()).sqrt()
            }
            NormKind::Lp {
                q: Exponent::Infinity,
            } => lp_norm(c, Exponent::Finite(T::one())),
            NormKind::Lp {
                q: Exponent::Finite(q),
            } => {
                if *q == T::one() {
                    lp_norm(c, Exponent::Infinity)
                } else {
                    lp_norm(c, Exponent::Finite(*q / (*q - T::one())))
                }
            }
            NormKind::Polyhedral { .. } => self
                .unit_ball_vertices()?
                .iter()
                .map(|v| f.apply(v))
                .fold(T::zero(), |a, b| a.max(b)),
        })
    }

    /// Vertices of the unit ball of a polyhedral norm.
    ///
    /// Enumerates all `dim`-subsets of the functionals; limited to `10^6` subsets.
    pub fn unit_ball_vertices(&self) -> Result<Vec<Vector<T>>> {
        let NormKind::Polyhedral { functionals } = &self.kind else {
            return Err(Error::InvalidSpace(
                "unit ball vertices are only defined for polyhedral norms".into(),
            ));
        };
        let d = self.dim;
        let count = binomial(functionals.len(), d);
        if count > 1_000_000 {
            return Err(Error::SizeLimit {
                what: "functional subsets",
                found: count,
                limit: 1_000_000,
            });
        }
        let eps = T::lit(1e-9);
        let mut vertices: Vec<Vector<T>> = Vec::new();
        for subset in Combinations::new(functionals.len(), d) {
            let b = DMatrix::from_fn(d, d, |r, c| functionals[subset[r]].coeffs()[c]);
            let Some(x) = b.lu().solve(&DVector::from_element(d, T::one())) else {
                continue;
            };
            if !x.iter().all(|v| v.is_finite()) {
                continue;
            }
            if self.norm_unchecked(&x) > T::one() + eps {
                continue;
            }
            if !vertices.iter().any(|v| (v - &x).amax() <= eps) {
                vertices.push(x);
            }
        }
        Ok(vertices)
    }

    /// Whether `x` has a unique support functional, with ties decided relative to `tol * norm(x)`.
    pub fn is_smooth_point(&self, x: &Vector<T>, tol: T) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        let n = self.norm_unchecked(x);
        if n == T::zero() {
            return Err(Error::ZeroVector);
        }
        let gap = tol * n;
        Ok(match &self.kind {
            NormKind::Euclidean { .. } => true,
            NormKind::Lp {
                q: Exponent::Finite(q),
            } if *q > T::one() => true,
            NormKind::Lp {
                q: Exponent::Finite(_),
            } => x.iter().all(|c| c.abs() > gap),
            NormKind::Lp {
                q: Exponent::Infinity,
            } => {
                let (top, second) = top_two(x.iter().map(|c| c.abs()));
                second.is_none_or(|s| top.1 - s > gap)
            }
            NormKind::Polyhedral { functionals } => {
                let (top, second) = top_two(functionals.iter().map(|f| f.apply(x)));
                second.is_none_or(|s| top.1 - s > gap)
            }
        })
    }

    /// The dual map at `x` using the default smoothness tolerance.
    pub fn dual_map(&self, x: &Vector<T>) -> Result<Covector<T>> {
        self.dual_map_with_tol(x, T::default_tol())
    }

    /// The support functional of `x`: `dual_norm(phi) = norm(x)` and `phi(x) = norm(x)^2`.
    ///
    /// Returns zero at the origin and an error at non-smooth points.
    pub fn dual_map_with_tol(&self, x: &Vector<T>, tol: T) -> Result<Covector<T>> {
        check_dim(self.dim, x.len())?;
        let n = self.norm_unchecked(x);
        if n == T::zero() {
            return Ok(Covector::zeros(self.dim));
        }
        if !self.is_smooth_point(x, tol)? {
            return Err(Error::NonSmoothPoint(format!(
                "{:?} in {}",
                x.as_slice(),
                self.describe()
            )));
        }
        Ok(Covector(match &self.kind {
            NormKind::Euclidean { gram } => gram * x,
            NormKind::Lp {
                q: Exponent::Finite(q),
            } if *q == T::one() => x.map(|c| c.signum() * n),
            NormKind::Lp {
                q: Exponent::Finite(q),
            } => {
                let e = *q - T::one();
                x.map(|c| c.signum() * n * (c.abs() / n).powf(e))
            }
            NormKind::Lp {
                q: Exponent::Infinity,
            } => {
                let (i, _) = top_two(x.iter().map(|c| c.abs())).0;
                let mut out = DVector::zeros(self.dim);
                out[i] = x[i].signum() * n;
                out
            }
            NormKind::Polyhedral { functionals } => {
                let (i, _) = top_two(functionals.iter().map(|f| f.apply(x))).0;
                functionals[i].coeffs() * n
            }
        }))
    }
}

fn lp_norm<T: Scalar>(x: &DVector<T>, q: Exponent<T>) -> T {
    let m = x.amax();
    match q {
        Exponent::Infinity => m,
        Exponent::Finite(q) => {
            if m == T::zero() {
                return T::zero();
            }
            if q == T::one() {
                return x.iter().fold(T::zero(), |a, c| a + c.abs());
            }
            let s = x.iter().fold(T::zero(), |a, c| a + (c.abs() / m).powf(q));
            m * s.powf(T::one() / q)
        }
    }
}

/// Index and value of the maximum, plus the runner-up value.
fn top_two<T: Scalar>(values: impl Iterator<Item = T>) -> ((usize, T), Option<T>) {
    let mut best: Option<(usize, T)> = None;
    let mut second: Option<T> = None;
    for (i, v) in values.enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b => {
                second = Some(b);
                best = Some((i, v));
            }
            Some(_) => {
                if second.is_none_or(|s| v > s) {
                    second = Some(v);
                }
            }
        }
    }
    (best.expect("non-empty"), second)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(cur);
            }
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn variants(d: usize) -> Vec<NormedSpace<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
        let gram = &a * a.transpose() + DMatrix::identity(d, d);
        vec![
            NormedSpace::euclidean(gram).unwrap(),
            NormedSpace::standard_euclidean(d).unwrap(),
            NormedSpace::lp(d, 1.0).unwrap(),
            NormedSpace::lp(d, 1.5).unwrap(),
            NormedSpace::lp(d, 3.0).unwrap(),
            NormedSpace::l_inf(d).unwrap(),
            NormedSpace::diamond(d).unwrap(),
        ]
    }

    fn random_smooth(space: &NormedSpace<f64>, rng: &mut ChaCha8Rng) -> DVector<f64> {
        loop {
            let x = DVector::from_fn(space.dim(), |_, _| StandardNormal.sample(rng));
            if space.is_smooth_point(&x, 1e-6).unwrap() {
                return x;
            }
        }
    }

    #[test]
    fn norm_examples() {
        let l2 = NormedSpace::standard_euclidean(2).unwrap();
        assert_relative_eq!(l2.norm(&v(&[3.0, 4.0])).unwrap(), 5.0);
        let linf = NormedSpace::l_inf(2).unwrap();
        assert_relative_eq!(linf.norm(&v(&[3.0, -1.0])).unwrap(), 3.0);
        let l3 = NormedSpace::lp(2, 3.0).unwrap();
        assert_relative_eq!(
            l3.norm(&v(&[1.0, 1.0])).unwrap(),
            1.259921049894873,
            epsilon = 1e-12
        );
    }

    #[test]
    fn norm_rejects_dimension_mismatch() {
        let l2 = NormedSpace::<f64>::standard_euclidean(2).unwrap();
        assert_eq!(
            l2.norm(&v(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn smoothness_examples() {
        let linf = NormedSpace::l_inf(2).unwrap();
        assert!(!linf.is_smooth_point(&v(&[1.0, 1.0]), 1e-9).unwrap());
        let l1 = NormedSpace::lp(2, 1.0).unwrap();
        assert!(!l1.is_smooth_point(&v(&[1.0, 0.0]), 1e-9).unwrap());
        let l3 = NormedSpace::lp(2, 3.0).unwrap();
        assert!(l3.is_smooth_point(&v(&[1.0, -2.0]), 1e-9).unwrap());
        assert_eq!(
            l3.is_smooth_point(&v(&[0.0, 0.0]), 1e-9),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn dual_map_examples() {
        let l2 = NormedSpace::standard_euclidean(2).unwrap();
        assert_relative_eq!(
            l2.dual_map(&v(&[3.0, 4.0])).unwrap().into_inner(),
            v(&[3.0, 4.0])
        );

        let linf = NormedSpace::l_inf(2).unwrap();
        let f = linf.dual_map(&v(&[3.0, 1.0])).unwrap();
        assert_relative_eq!(f.coeffs().clone(), v(&[3.0, 0.0]));
        assert_relative_eq!(linf.dual_norm(&f).unwrap(), 3.0);
        assert_relative_eq!(f.apply(&v(&[3.0, 1.0])), 9.0);

        let l1 = NormedSpace::lp(2, 1.0).unwrap();
        let f = l1.dual_map(&v(&[1.0, -1.0])).unwrap();
        assert_relative_eq!(f.coeffs().clone(), v(&[2.0, -2.0]));
        assert_relative_eq!(l1.dual_norm(&f).unwrap(), 2.0);
        assert_relative_eq!(f.apply(&v(&[1.0, -1.0])), 4.0);

        let l3 = NormedSpace::lp(2, 3.0).unwrap();
        let x = v(&[1.0, 1.0]);
        let f = l3.dual_map(&x).unwrap();
        let c = 2f64.powf(-1.0 / 3.0);
        assert_relative_eq!(f.coeffs().clone(), v(&[c, c]), epsilon = 1e-14);
        let n = l3.norm(&x).unwrap();
        assert_relative_eq!(l3.dual_norm(&f).unwrap(), n, epsilon = 1e-12);
        assert_relative_eq!(f.apply(&x), n * n, epsilon = 1e-12);
    }

    #[test]
    fn dual_map_of_zero_is_zero_and_nonsmooth_is_error() {
        let linf = NormedSpace::l_inf(2).unwrap();
        assert_eq!(linf.dual_map(&v(&[0.0, 0.0])).unwrap(), Covector::zeros(2));
        assert!(matches!(
            linf.dual_map(&v(&[2.0, -2.0])),
            Err(Error::NonSmoothPoint(_))
        ));
    }

    #[test]
    fn construction_validation() {
        assert!(NormedSpace::<f64>::lp(2, 0.5).is_err());
        assert!(NormedSpace::<f64>::lp(2, f64::NAN).is_err());
        assert!(
            NormedSpace::euclidean(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err()
        );
        assert!(
            NormedSpace::euclidean(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err()
        );
        // not centrally symmetric
        assert!(
            NormedSpace::polyhedral(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]])
                .is_err()
        );
        // unbounded ball
        assert!(NormedSpace::polyhedral(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).is_err());
        assert!(NormedSpace::polyhedral(vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0]
        ])
        .is_ok());
    }

    #[test]
    fn q_near_two_stays_lp() {
        let s = NormedSpace::lp(2, 2.0 + 1e-13).unwrap();
        assert!(matches!(s.kind(), NormKind::Lp { .. }));
        assert!(!s.is_euclidean());
        assert!(NormedSpace::lp(2, 2.0).unwrap().is_euclidean());
    }

    #[test]
    fn diamond_matches_l1() {
        let diamond = NormedSpace::diamond(3).unwrap();
        let l1 = NormedSpace::lp(3, 1.0).unwrap();
        let x = v(&[0.3, -1.2, 2.0]);
        assert_relative_eq!(
            diamond.norm(&x).unwrap(),
            l1.norm(&x).unwrap(),
            epsilon = 1e-14
        );
        assert_eq!(diamond.unit_ball_vertices().unwrap().len(), 6);
    }

    #[test]
    fn defining_identities_on_random_smooth_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for d in [2usize, 3] {
            for space in variants(d) {
                for _ in 0..1000 {
                    let x = random_smooth(&space, &mut rng);
                    let n = space.norm(&x).unwrap();
                    let f = space.dual_map(&x).unwrap();
                    assert_relative_eq!(space.dual_norm(&f).unwrap(), n, max_relative = 1e-9);
                    assert_relative_eq!(f.apply(&x), n * n, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn dual_map_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for space in variants(3) {
            for a in [-3.5, -1.0, 0.25, 7.0] {
                let x = random_smooth(&space, &mut rng);
                let lhs = space.dual_map(&(&x * a)).unwrap().into_inner();
                let rhs = space.dual_map(&x).unwrap().into_inner() * a;
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn norm_derivative_matches_dual_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for space in variants(3) {
            for _ in 0..50 {
                let x = random_smooth(&space, &mut rng);
                let n = space.norm(&x).unwrap();
                let h = 1e-6 * n;
                let grad = space.dual_map(&x).unwrap().into_inner() / n;
                for i in 0..space.dim() {
                    let mut xp = x.clone();
                    xp[i] += h;
                    let mut xm = x.clone();
                    xm[i] -= h;
                    let fd = (space.norm(&xp).unwrap() - space.norm(&xm).unwrap()) / (2.0 * h);
                    assert!(
                        (fd - grad[i]).abs() <= 1e-5 * grad.amax(),
                        "{}: fd {fd} vs {}",
                        space.describe(),
                        grad[i]
                    );
                }
            }
        }
    }

    /// Hölder-style sanity bound `|phi(x+e) - phi(x)| <= C |e|^(1/2)` with `C = 10`
    /// for unit `x`.
    #[test]
    fn dual_map_continuity_sampling() {
        const C: f64 = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for space in variants(3) {
            for _ in 0..200 {
                let x = random_smooth(&space, &mut rng);
                let x = &x / space.norm(&x).unwrap();
                let dir = DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
                let e = &dir * (1e-8 / space.norm(&dir).unwrap());
                let y = &x + &e;
                if !space.is_smooth_point(&y, 1e-9).unwrap() {
                    continue;
                }
                let diff = space.dual_map(&y).unwrap().into_inner()
                    - space.dual_map(&x).unwrap().into_inner();
                assert!(diff.norm() <= C * space.norm(&e).unwrap().sqrt());
            }
        }
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(binomial(14, 7), 3432);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-100.0..100.0f64, d)
        }

        proptest! {
            #[test]
            fn norm_is_homogeneous_and_subadditive(
                x in arb_vec(3), y in arb_vec(3), a in -10.0..10.0f64, which in 0usize..7
            ) {
                let space = &variants(3)[which];
                let x = DVector::from_vec(x);
                let y = DVector::from_vec(y);
                let nx = space.norm(&x).unwrap();
                let ny = space.norm(&y).unwrap();
                let nax = space.norm(&(&x * a)).unwrap();
                prop_assert!((nax - a.abs() * nx).abs() <= 1e-10 * (1.0 + nax));
                prop_assert!(space.norm(&(&x + &y)).unwrap() <= nx + ny + 1e-10 * (1.0 + nx + ny));
                prop_assert!(nx >= 0.0);
            }
        }
    }
}
