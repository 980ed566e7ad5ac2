//! The rigidity map, the rigidity operator as a matrix, its kernel, and
//! sampling-based regularity and constancy probes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Framework, Graph, Placement};
use crate::linalg::{self, Spectrum};
use crate::normed_space::NormedSpace;
use crate::sampling;
use crate::Scalar;

/// Matrix of the rigidity operator: one row per edge, `dim` columns per vertex
/// in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    dim: usize,
}

impl<T: Scalar> RigidityMatrix<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// The `dim` entries of row `e` belonging to vertex `v`.
    pub fn block(&self, e: usize, v: usize) -> DVector<T> {
        self.matrix
            .row(e)
            .columns(v * self.dim, self.dim)
            .transpose()
            .into_owned()
    }

    pub fn spectrum(&self, tol: T) -> Spectrum<T> {
        linalg::spectrum(&self.matrix, tol)
    }

    pub fn rank(&self, tol: T) -> usize {
        self.spectrum(tol).rank
    }

    /// `|R u|` for a motion `u`.
    pub fn residual(&self, u: &DVector<T>) -> T {
        if self.matrix.nrows() == 0 {
            return T::zero();
        }
        (&self.matrix * u).norm()
    }
}

/// A subspace of `X^V` given by an orthonormal basis (columns) in standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSpace<T: Scalar> {
    basis: DMatrix<T>,
}

impl<T: Scalar> MotionSpace<T> {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<T>) -> Self {
        Self { basis }
    }

    /// Orthonormalizes the span of `generators` (columns) with relative tolerance `tol`.
    pub fn span_of(generators: &DMatrix<T>, tol: T) -> (Self, Spectrum<T>) {
        let (basis, spec) = linalg::range_basis(generators, tol);
        (Self { basis }, spec)
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn vector(&self, i: usize) -> DVector<T> {
        self.basis.column(i).into_owned()
    }

    pub fn project(&self, u: &DVector<T>) -> DVector<T> {
        if self.dim() == 0 {
            return DVector::zeros(u.len());
        }
        &self.basis * (self.basis.transpose() * u)
    }

    /// Norm of the component of `u` orthogonal to this space.
    pub fn distance(&self, u: &DVector<T>) -> T {
        linalg::project_out(&self.basis, u).norm()
    }

    /// Largest distance from a basis vector of `other` to this space.
    pub fn containment_residual(&self, other: &MotionSpace<T>) -> T {
        (0..other.dim())
            .map(|i| self.distance(&other.vector(i)))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Orthonormal basis of the part of `self` orthogonal to `sub`, keeping
    /// exactly `self.dim() - sub.dim()` directions when that is non-negative.
    pub fn complement_of(&self, sub: &MotionSpace<T>) -> Self {
        let target = self.dim().saturating_sub(sub.dim());
        if target == 0 {
            return Self::zero(self.ambient_dim());
        }
        // Coefficient vectors least aligned with `sub`.
        let overlap = sub.basis.transpose() * &self.basis;
        let coeffs = linalg::trailing_right_vectors(&overlap, target);
        Self {
            basis: &self.basis * coeffs,
        }
    }
}

/// Edge lengths `(norm(p_v - p_w))_{vw}` in edge order.
pub fn rigidity_map<T: Scalar>(fw: &Framework<T>) -> DVector<T> {
    DVector::from_iterator(
        fw.graph().edge_count(),
        (0..fw.graph().edge_count()).map(|e| fw.space().norm_unchecked(&fw.edge_vector(e))),
    )
}

pub fn rigidity_matrix<T: Scalar>(fw: &Framework<T>) -> Result<RigidityMatrix<T>> {
    rigidity_matrix_with_tol(fw, T::default_tol())
}

/// Row `vw` holds `phi((p_v - p_w)/norm)` in the `v` block and its negation in the `w` block.
pub fn rigidity_matrix_with_tol<T: Scalar>(fw: &Framework<T>, tol: T) -> Result<RigidityMatrix<T>> {
    fw.require_well_positioned(tol)?;
    let d = fw.dim();
    let g = fw.graph();
    let mut m = DMatrix::zeros(g.edge_count(), d * g.vertex_count());
    for (e, &(v, w)) in g.edges().iter().enumerate() {
        let x = fw.edge_vector(e);
        let n = fw.space().norm_unchecked(&x);
        let f = fw.space().dual_map_with_tol(&(x / n), tol)?;
        for i in 0..d {
            let c = f.coeffs()[i];
            m[(e, v * d + i)] = c;
            m[(e, w * d + i)] = -c;
        }
    }
    Ok(RigidityMatrix { matrix: m, dim: d })
}

/// Orthonormal basis of the infinitesimal flexes (kernel of the rigidity matrix).
pub fn flex_space<T: Scalar>(fw: &Framework<T>, tol: T) -> Result<MotionSpace<T>> {
    let r = rigidity_matrix_with_tol(fw, tol)?;
    Ok(flex_space_of(&r, fw.graph().vertex_count(), tol).0)
}

pub(crate) fn flex_space_of<T: Scalar>(
    r: &RigidityMatrix<T>,
    nverts: usize,
    tol: T,
) -> (MotionSpace<T>, Spectrum<T>) {
    let ncols = r.dim * nverts;
    if r.nrows() == 0 {
        return (
            MotionSpace::from_orthonormal(DMatrix::identity(ncols, ncols)),
            Spectrum {
                singular_values: Vec::new(),
                threshold: T::zero(),
                rank: 0,
            },
        );
    }
    let (k, spec) = linalg::kernel_basis(r.matrix(), tol);
    (MotionSpace::from_orthonormal(k), spec)
}

/// Outcome of comparing the rigidity matrix with finite differences of the rigidity map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub passed: bool,
    /// Largest `|fd - J| / max(1, |J|)` over all entries.
    pub max_rel_error: f64,
    /// Entry `(edge, column)` attaining the maximum.
    pub worst_entry: Option<(usize, usize)>,
    /// Columns whose perturbation left the well-positioned set and was retried with a halved step.
    pub resampled: usize,
}

/// Default finite-difference step `1e-6 * (1 + max |p|)`.
pub fn default_fd_step<T: Scalar>(p: &Placement<T>) -> T {
    let m = p
        .points()
        .iter()
        .map(|x| x.amax())
        .fold(T::zero(), |a, b| a.max(b));
    T::lit(1e-6) * (T::one() + m)
}

/// Checks entrywise that central differences of the rigidity map agree with the rigidity matrix.
pub fn jacobian_check<T: Scalar>(
    fw: &Framework<T>,
    step: Option<T>,
    tol: T,
) -> Result<JacobianReport> {
    let smooth_tol = T::default_tol();
    let r = rigidity_matrix_with_tol(fw, smooth_tol)?;
    let d = fw.dim();
    let base = fw.placement().flatten();
    let h0 = step.unwrap_or_else(|| default_fd_step(fw.placement()));
    let mut max_err = 0.0f64;
    let mut worst = None;
    let mut resampled = 0;
    for col in 0..base.len() {
        let mut h = h0;
        let mut attempt = 0;
        let fd = loop {
            let shifted = |sign: T| -> Result<Option<DVector<T>>> {
                let mut q = base.clone();
                q[col] += sign * h;
                let fq = fw.with_placement(Placement::from_flat(d, &q)?)?;
                match fq.first_non_smooth_edge(smooth_tol) {
                    Ok(None) => Ok(Some(rigidity_map(&fq))),
                    Ok(Some(_)) | Err(Error::DegenerateEdge { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            };
            match (shifted(T::one())?, shifted(-T::one())?) {
                (Some(plus), Some(minus)) => break (plus - minus) / (h + h),
                _ if attempt < 10 => {
                    attempt += 1;
                    resampled += 1;
                    h *= T::lit(0.5);
                }
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "finite differences for column {col} keep leaving the well-positioned set"
                    )))
                }
            }
        };
        for e in 0..r.nrows() {
            let j = r.matrix()[(e, col)];
            let err = ((fd[e] - j).abs() / j.abs().max(T::one())).to_f64_lossy();
            if err > max_err {
                max_err = err;
                worst = Some((e, col));
            }
        }
    }
    Ok(JacobianReport {
        passed: max_err < tol.to_f64_lossy(),
        max_rel_error: max_err,
        worst_entry: worst,
        resampled,
    })
}

/// A placement attaining the largest rigidity rank seen across seeded samples.
///
/// This certifies regularity only up to sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularSample<T: Scalar> {
    pub placement: Placement<T>,
    pub rank: usize,
    pub trials: usize,
    pub skipped: usize,
}

pub fn sample_regular<T: Scalar>(
    graph: &Graph,
    space: &NormedSpace<T>,
    trials: usize,
    seed: u64,
    tol: T,
) -> Result<RegularSample<T>> {
    let mut best: Option<(Placement<T>, usize)> = None;
    let mut skipped = 0;
    for trial in 0..trials {
        let mut rng = sampling::trial_rng(seed, trial as u64);
        let p = sampling::gaussian_placement(graph.vertex_count(), space.dim(), &mut rng);
        let fw = Framework::new(graph.clone(), p, space.clone())?;
        let r = match rigidity_matrix_with_tol(&fw, T::default_tol()) {
            Ok(r) => r,
            Err(Error::NotWellPositioned { .. } | Error::DegenerateEdge { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let rank = r.rank(tol);
        if best.as_ref().is_none_or(|(_, b)| rank > *b) {
            best = Some((fw.placement().clone(), rank));
        }
    }
    let (placement, rank) = best.ok_or(Error::NoWellPositionedSample { trials })?;
    Ok(RegularSample {
        placement,
        rank,
        trials,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRankProbe {
    /// Every accepted sample had the base rank.
    pub constant: bool,
    pub base_rank: usize,
    pub samples: usize,
    /// Samples rejected for leaving the well-positioned set.
    pub skipped: usize,
    pub min_rank: Option<usize>,
    pub max_rank: Option<usize>,
}

/// Samples placements in the box `|q - p|_inf <= radius` and compares rigidity ranks with `p`.
pub fn constant_rank_probe<T: Scalar>(
    fw: &Framework<T>,
    radius: T,
    nsamples: usize,
    seed: u64,
    tol: T,
) -> Result<ConstantRankProbe> {
    let base_rank = rigidity_matrix_with_tol(fw, T::default_tol())?.rank(tol);
    let base = fw.placement().flatten();
    let mut skipped = 0;
    let mut min_rank: Option<usize> = None;
    let mut max_rank: Option<usize> = None;
    for s in 0..nsamples {
        let mut rng = sampling::trial_rng(seed, s as u64);
        let q = &base + sampling::box_vector(base.len(), radius, &mut rng);
        let fq = fw.with_placement(Placement::from_flat(fw.dim(), &q)?)?;
        let rank = match rigidity_matrix_with_tol(&fq, T::default_tol()) {
            Ok(r) => r.rank(tol),
            Err(Error::NotWellPositioned { .. } | Error::DegenerateEdge { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        min_rank = Some(min_rank.map_or(rank, |m| m.min(rank)));
        max_rank = Some(max_rank.map_or(rank, |m| m.max(rank)));
    }
    Ok(ConstantRankProbe {
        constant: min_rank.is_none_or(|m| m == base_rank)
            && max_rank.is_none_or(|m| m == base_rank),
        base_rank,
        samples: nsamples,
        skipped,
        min_rank,
        max_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fw(graph: Graph, rows: &[&[f64]], space: NormedSpace<f64>) -> Framework<f64> {
        Framework::new(graph, Placement::from_rows(rows).unwrap(), space).unwrap()
    }

    fn l2() -> NormedSpace<f64> {
        NormedSpace::standard_euclidean(2).unwrap()
    }

    fn l3() -> NormedSpace<f64> {
        NormedSpace::lp(2, 3.0).unwrap()
    }

    const TRI: &[&[f64]] = &[&[0.1, -0.3], &[1.2, 0.2], &[0.4, 0.9]];
    const QUAD: &[&[f64]] = &[&[0.1, -0.3], &[1.2, 0.2], &[0.4, 0.9], &[-0.7, 0.5]];

    #[test]
    fn rigidity_map_examples() {
        let f = fw(Graph::complete(2), &[&[0., 0.], &[3., 4.]], l2());
        assert_relative_eq!(rigidity_map(&f)[0], 5.0);
        let f = fw(Graph::complete(2), &[&[0., 0.], &[1., 1.]], l3());
        assert_relative_eq!(rigidity_map(&f)[0], 2f64.powf(1.0 / 3.0), epsilon = 1e-14);
        let f = fw(
            Graph::cycle(4).unwrap(),
            &[&[0., 0.], &[1., 0.], &[1., 1.], &[0., 1.]],
            l2(),
        );
        assert_relative_eq!(rigidity_map(&f), DVector::from_element(4, 1.0));
    }

    #[test]
    fn rigidity_matrix_examples() {
        let f = fw(Graph::complete(2), &[&[0., 0.], &[1., 0.]], l2());
        let r = rigidity_matrix(&f).unwrap();
        assert_relative_eq!(r.block(0, 0), DVector::from_vec(vec![-1.0, 0.0]));
        assert_relative_eq!(r.block(0, 1), DVector::from_vec(vec![1.0, 0.0]));

        let f = fw(
            Graph::complete(2),
            &[&[0., 0.], &[1., 2.]],
            NormedSpace::l_inf(2).unwrap(),
        );
        let r = rigidity_matrix(&f).unwrap();
        assert_relative_eq!(r.block(0, 0), DVector::from_vec(vec![0.0, -1.0]));
        assert_relative_eq!(r.block(0, 1), DVector::from_vec(vec![0.0, 1.0]));

        let f = fw(Graph::complete(2), &[&[0., 0.], &[1., 1.]], l3());
        let r = rigidity_matrix(&f).unwrap();
        let c = 2f64.powf(-2.0 / 3.0);
        assert_relative_eq!(
            r.block(0, 0),
            DVector::from_vec(vec![-c, -c]),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            r.block(0, 1),
            DVector::from_vec(vec![c, c]),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rigidity_matrix_names_offending_edge() {
        let f = fw(
            Graph::complete(2),
            &[&[0., 0.], &[1., 1.]],
            NormedSpace::l_inf(2).unwrap(),
        );
        assert_eq!(
            rigidity_matrix(&f),
            Err(Error::NotWellPositioned {
                v: "v0".into(),
                w: "v1".into()
            })
        );
        let f = fw(Graph::complete(2), &[&[1., 1.], &[1., 1.]], l2());
        assert!(matches!(
            rigidity_matrix(&f),
            Err(Error::DegenerateEdge { .. })
        ));
    }

    #[test]
    fn flex_space_examples() {
        let f = fw(Graph::complete(2), &[&[0., 0.], &[1., 0.3]], l2());
        assert_eq!(flex_space(&f, 1e-9).unwrap().dim(), 3);
        let f = fw(Graph::complete(3), TRI, l2());
        assert_eq!(rigidity_matrix(&f).unwrap().rank(1e-9), 3);
        assert_eq!(flex_space(&f, 1e-9).unwrap().dim(), 3);
        let f = fw(Graph::edgeless(2), &[&[0., 0.], &[1., 0.3]], l2());
        assert_eq!(flex_space(&f, 1e-9).unwrap().dim(), 4);
    }

    #[test]
    fn translations_are_flexes_and_rank_nullity_holds() {
        let f = fw(Graph::complete(4), QUAD, l3());
        let r = rigidity_matrix(&f).unwrap();
        let flex = flex_space(&f, 1e-9).unwrap();
        assert_eq!(r.rank(1e-9) + flex.dim(), 8);
        for i in 0..2 {
            let t = DVector::from_fn(8, |k, _| if k % 2 == i { 1.0 } else { 0.0 });
            assert!(r.residual(&t) < 1e-10);
            assert!(flex.distance(&t) < 1e-10);
        }
        for e in 0..r.nrows() {
            let (v, w) = f.graph().edges()[e];
            assert_eq!(r.block(e, v) + r.block(e, w), DVector::zeros(2));
        }
    }

    #[test]
    fn jacobian_check_examples() {
        let f = fw(Graph::complete(3), TRI, l2());
        assert!(jacobian_check(&f, Some(1e-6), 1e-5).unwrap().passed);
        let f = fw(Graph::complete(4), QUAD, l3());
        assert!(jacobian_check(&f, None, 1e-5).unwrap().passed);
        // Edge direction within 1e-8 of an l_inf tie, step 1e-6 straddles it.
        let f = fw(
            Graph::complete(2),
            &[&[0., 0.], &[1., 1. + 1e-8]],
            NormedSpace::l_inf(2).unwrap(),
        );
        let report = jacobian_check(&f, Some(1e-6), 1e-5).unwrap();
        assert!(!report.passed);
        assert!(report.max_rel_error > 0.1);
    }

    #[test]
    fn sample_regular_examples() {
        let s = sample_regular(&Graph::complete(3), &l2(), 20, 1, 1e-9).unwrap();
        assert_eq!(s.rank, 3);
        let s = sample_regular(&Graph::complete(4), &l3(), 20, 1, 1e-9).unwrap();
        assert_eq!(s.rank, 6);
        let s = sample_regular(
            &Graph::complete(2),
            &NormedSpace::l_inf(3).unwrap(),
            5,
            3,
            1e-9,
        )
        .unwrap();
        assert_eq!(s.rank, 1);
    }

    #[test]
    fn sample_regular_is_seed_deterministic() {
        let a = sample_regular(&Graph::complete(4), &l3(), 10, 42, 1e-9).unwrap();
        let b = sample_regular(&Graph::complete(4), &l3(), 10, 42, 1e-9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_rank_probe_examples() {
        let f = fw(Graph::complete(4), QUAD, l3());
        assert!(
            constant_rank_probe(&f, 1e-3, 100, 0, 1e-9)
                .unwrap()
                .constant
        );
        let f = fw(Graph::complete(3), TRI, l2());
        assert!(
            constant_rank_probe(&f, 1e-3, 100, 0, 1e-9)
                .unwrap()
                .constant
        );
        let f = fw(
            Graph::complete(3),
            &[&[0., 0.], &[1., 0.], &[2.5, 0.]],
            l2(),
        );
        let probe = constant_rank_probe(&f, 1e-3, 50, 0, 1e-9).unwrap();
        assert_eq!(probe.base_rank, 2);
        assert!(!probe.constant);
        assert_eq!(probe.max_rank, Some(3));
    }

    #[test]
    fn independence_passes_to_subframeworks() {
        let f = fw(Graph::complete(4), QUAD, l3());
        let r = rigidity_matrix(&f).unwrap();
        assert_eq!(r.rank(1e-9), f.graph().edge_count());
        for e in 0..f.graph().edge_count() {
            let sub = f.with_graph(f.graph().without_edge(e)).unwrap();
            assert_eq!(
                rigidity_matrix(&sub).unwrap().rank(1e-9),
                sub.graph().edge_count()
            );
        }
        for drop in 0..4 {
            let keep: Vec<usize> = (0..4).filter(|&v| v != drop).collect();
            let sub = f.induced(&keep);
            assert_eq!(
                rigidity_matrix(&sub).unwrap().rank(1e-9),
                sub.graph().edge_count()
            );
        }
    }
}
