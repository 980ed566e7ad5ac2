//! Finite flexes: predictor-corrector tracing along nontrivial infinitesimal
//! flexes, and a sampling probe for local rigidity that compares nearby
//! equal-length configurations with the isometry orbit of the placement.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Framework, Placement};
use crate::isometry::{self, LieAlgebraBasis};
use crate::linalg;
use crate::normed_space::{Combinations, NormKind, NormedSpace};
use crate::rigidity::{self, MotionSpace};
use crate::sampling;
use crate::Scalar;

/// Orthonormal basis of the flexes orthogonal (in standard coordinates) to the trivial motions.
pub fn nontrivial_flex_directions<T: Scalar>(
    fw: &Framework<T>,
    lie: &LieAlgebraBasis<T>,
    tol: T,
) -> Result<MotionSpace<T>> {
    let flex = rigidity::flex_space(fw, tol)?;
    let trivial = isometry::trivial_motion_space(fw.placement(), lie, tol);
    Ok(flex.complement_of(&trivial))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig<T> {
    pub step: T,
    pub nsteps: usize,
    /// Maximum absolute edge-length error accepted by the corrector.
    pub corrector_tol: T,
    pub max_iters: usize,
    /// Step halving stops here.
    pub min_step: T,
    /// Relative rank tolerance.
    pub tol: T,
    /// Seed for the constancy probe stamped onto the path.
    pub seed: u64,
}

impl<T: Scalar> Default for TraceConfig<T> {
    fn default() -> Self {
        Self {
            step: T::lit(1e-2),
            nsteps: 50,
            corrector_tol: T::lit(1e-10).max(T::default_epsilon() * T::lit(1e3)),
            max_iters: 30,
            min_step: T::lit(1e-5),
            tol: T::default_tol(),
            seed: 0,
        }
    }
}

/// A traced finite flex.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexPath<T: Scalar> {
    /// Cumulative path parameter (sum of accepted step sizes).
    pub params: Vec<T>,
    pub configs: Vec<Placement<T>>,
    /// Per edge, the largest `|f(q_t) - f(p)|` along the path.
    pub edge_drift: Vec<T>,
    /// Per step, the relative size of the displacement's projection onto the trivial motions.
    pub trivial_component_norm: Vec<T>,
    /// Verdict of the constant-rank probe at the start point.
    pub constant_at_start: bool,
    pub step_halvings: usize,
}

impl<T: Scalar> FlexPath<T> {
    pub fn max_drift(&self) -> T {
        self.edge_drift
            .iter()
            .copied()
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn steps(&self) -> usize {
        self.configs.len().saturating_sub(1)
    }
}

enum CorrectorFailure<T> {
    NotSmooth(usize),
    Degenerate(usize),
    NoConvergence(T),
}

fn max_abs<T: Scalar>(v: &DVector<T>) -> T {
    if v.is_empty() {
        T::zero()
    } else {
        v.amax()
    }
}

struct Corrector<'a, T: Scalar> {
    /// Updates are kept orthogonal to the trivial motions when set.
    lie: Option<&'a LieAlgebraBasis<T>>,
    max_step: Option<T>,
    corrector_tol: T,
    max_iters: usize,
    tol: T,
}

/// Damped Gauss-Newton onto `f(q) = target` with minimum-norm updates.
fn project_to_lengths<T: Scalar>(
    fw: &Framework<T>,
    start: DVector<T>,
    target: &DVector<T>,
    c: &Corrector<'_, T>,
) -> std::result::Result<DVector<T>, CorrectorFailure<T>> {
    let Corrector {
        lie,
        max_step,
        corrector_tol,
        max_iters,
        tol,
    } = *c;
    let d = fw.dim();
    let smooth_tol = T::default_tol();
    let eval =
        |q: &DVector<T>| -> std::result::Result<(Framework<T>, DVector<T>), CorrectorFailure<T>> {
            let fq = fw
                .with_placement(Placement::from_flat(d, q).expect("flat length matches"))
                .expect("same graph and space");
            match fq.first_non_smooth_edge(smooth_tol) {
                Ok(None) => {}
                Ok(Some(e)) => return Err(CorrectorFailure::NotSmooth(e)),
                Err(_) => {
                    let e = (0..fq.graph().edge_count())
                        .find(|&e| fq.edge_vector(e).amax() == T::zero())
                        .unwrap_or(0);
                    return Err(CorrectorFailure::Degenerate(e));
                }
            }
            let r = rigidity::rigidity_map(&fq) - target;
            Ok((fq, r))
        };
    let mut q = start;
    let (mut fq, mut r) = eval(&q)?;
    for _ in 0..max_iters {
        if max_abs(&r) <= corrector_tol {
            return Ok(q);
        }
        let jac = rigidity::rigidity_matrix_with_tol(&fq, smooth_tol)
            .map_err(|_| CorrectorFailure::NoConvergence(max_abs(&r)))?;
        let mut delta = linalg::pinv_solve(jac.matrix(), &r, tol);
        if let Some(lie) = lie {
            let trivial = isometry::trivial_motion_space(fq.placement(), lie, tol);
            delta = linalg::project_out(trivial.basis(), &delta);
        }
        if let Some(cap) = max_step {
            let n = delta.norm();
            if n > cap {
                delta *= cap / n;
            }
        }
        let current = r.norm();
        let mut damping = T::one();
        let mut accepted = false;
        for _ in 0..8 {
            let cand = &q - &delta * damping;
            if let Ok((fc, rc)) = eval(&cand) {
                if rc.norm() < current || max_abs(&rc) <= corrector_tol {
                    q = cand;
                    fq = fc;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            damping *= T::lit(0.5);
        }
        if !accepted {
            return Err(CorrectorFailure::NoConvergence(max_abs(&r)));
        }
    }
    if max_abs(&r) <= corrector_tol {
        Ok(q)
    } else {
        Err(CorrectorFailure::NoConvergence(max_abs(&r)))
    }
}

fn edge_error<T: Scalar>(fw: &Framework<T>, e: usize, step: usize) -> Error {
    let (v, w) = fw.graph().edge_names(e);
    Error::PathNotSmooth {
        v: v.into(),
        w: w.into(),
        step,
    }
}

/// Traces a finite flex from `fw` starting along `direction`.
///
/// `direction` must lie (numerically) in the span of
/// [`nontrivial_flex_directions`]. Each step predicts along the current
/// tangent, corrects back onto the equal-length set, and refreshes the tangent
/// as the nontrivial flex of maximal overlap with the previous one.
pub fn trace_flex<T: Scalar>(
    fw: &Framework<T>,
    lie: &LieAlgebraBasis<T>,
    direction: &DVector<T>,
    cfg: &TraceConfig<T>,
) -> Result<FlexPath<T>> {
    let d = fw.dim();
    let nv = fw.graph().vertex_count();
    if direction.len() != d * nv {
        return Err(Error::DimensionMismatch {
            expected: d * nv,
            found: direction.len(),
        });
    }
    let dirs = nontrivial_flex_directions(fw, lie, cfg.tol)?;
    if dirs.dim() == 0 {
        return Err(Error::NoNontrivialDirection);
    }
    let dnorm = direction.norm();
    if dnorm == T::zero() {
        return Err(Error::InvalidDirection { residual: 0.0 });
    }
    let unit = direction / dnorm;
    let mut u = dirs.project(&unit);
    let off = (&unit - &u).norm();
    if off > T::lit(1e-6) || u.norm() < T::lit(0.5) {
        return Err(Error::InvalidDirection {
            residual: off.to_f64_lossy(),
        });
    }
    u /= u.norm();

    let constant_at_start =
        rigidity::constant_rank_probe(fw, T::lit(1e-3), 50, cfg.seed, cfg.tol)?.constant;
    let target = rigidity::rigidity_map(fw);
    let mut q = fw.placement().flatten();
    let mut params = vec![T::zero()];
    let mut configs = vec![fw.placement().clone()];
    let mut drift: DVector<T> = DVector::zeros(target.len());
    let mut trivial_component = Vec::with_capacity(cfg.nsteps);
    let corrector = Corrector {
        lie: Some(lie),
        max_step: None,
        corrector_tol: cfg.corrector_tol,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
    };
    let mut h = cfg.step;
    let mut t = T::zero();
    let mut halvings = 0;

    for step in 1..=cfg.nsteps {
        let corrected = loop {
            let pred = &q + &u * h;
            match project_to_lengths(fw, pred, &target, &corrector) {
                Ok(qn) => break qn,
                Err(CorrectorFailure::NotSmooth(e) | CorrectorFailure::Degenerate(e)) => {
                    return Err(edge_error(fw, e, step));
                }
                Err(CorrectorFailure::NoConvergence(res)) => {
                    h *= T::lit(0.5);
                    halvings += 1;
                    if h < cfg.min_step {
                        return Err(Error::CorrectorFailed {
                            step,
                            residual: res.to_f64_lossy(),
                        });
                    }
                }
            }
        };
        let prev = fw.with_placement(Placement::from_flat(d, &q)?)?;
        let next = fw.with_placement(Placement::from_flat(d, &corrected)?)?;
        if let Some(e) = next.first_non_smooth_edge(T::default_tol())? {
            return Err(edge_error(fw, e, step));
        }

        let disp = &corrected - &q;
        let trivial_prev = isometry::trivial_motion_space(prev.placement(), lie, cfg.tol);
        let dn = disp.norm();
        trivial_component.push(if dn > T::zero() {
            trivial_prev.project(&disp).norm() / dn
        } else {
            T::zero()
        });
        let lengths = rigidity::rigidity_map(&next);
        for (dr, (l, l0)) in drift.iter_mut().zip(lengths.iter().zip(target.iter())) {
            *dr = (*dr).max((*l - *l0).abs());
        }

        let dirs = nontrivial_flex_directions(&next, lie, cfg.tol)?;
        let mut un = dirs.project(&u);
        if un.norm() < T::lit(1e-3) {
            // Tangent lost; fall back to the secant direction.
            un = dirs.project(&disp);
            if un.norm() == T::zero() {
                return Err(Error::NoNontrivialDirection);
            }
        }
        u = &un / un.norm();
        t += h;
        q = corrected;
        params.push(t);
        configs.push(next.placement().clone());
        h = (h * T::lit(2.0)).min(cfg.step);
    }

    Ok(FlexPath {
        params,
        configs,
        edge_drift: drift.iter().copied().collect(),
        trivial_component_norm: trivial_component,
        constant_at_start,
        step_halvings: halvings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig<T> {
    /// Perturbation box half-width; `None` means `0.05 * placement scale`.
    pub radius: Option<T>,
    pub nrestarts: usize,
    pub seed: u64,
    pub tol: T,
    /// Orbit-distance threshold; `None` means `1e-6 * placement scale`.
    pub orbit_tol: Option<T>,
    pub corrector_tol: T,
    /// Gauss-Newton iterations; each update is capped at the radius.
    pub max_iters: usize,
}

impl<T: Scalar> Default for ProbeConfig<T> {
    fn default() -> Self {
        Self {
            radius: None,
            nrestarts: 100,
            seed: 0,
            tol: T::default_tol(),
            orbit_tol: None,
            corrector_tol: T::lit(1e-11).max(T::default_epsilon() * T::lit(1e3)),
            max_iters: 100,
        }
    }
}

/// Whether the orbit fit enumerated every linear isometry of the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitVerdict {
    Complete,
    /// Only translations were fitted.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitWitness {
    pub restart: usize,
    pub orbit_distance: f64,
    pub coordinates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub restarts: usize,
    pub radius: f64,
    pub orbit_tol: f64,
    pub on_orbit: usize,
    pub off_orbit: usize,
    pub failed: usize,
    /// Restarts whose projection ended farther than `2 * radius * sqrt(d|V|)` from its start.
    pub escaped: usize,
    pub max_on_orbit_distance: f64,
    pub verdict: OrbitVerdict,
    pub witnesses: Vec<OrbitWitness>,
}

/// Perturbs `p`, projects back onto equal edge lengths and tests orbit membership.
pub fn local_rigidity_probe<T: Scalar>(
    fw: &Framework<T>,
    cfg: &ProbeConfig<T>,
) -> Result<ProbeRecord> {
    fw.require_well_positioned(T::default_tol())?;
    let scale = fw.placement().scale();
    let radius = cfg.radius.unwrap_or(T::lit(0.05) * scale);
    let orbit_tol = cfg.orbit_tol.unwrap_or(T::lit(1e-6) * scale);
    let target = rigidity::rigidity_map(fw);
    let base = fw.placement().flatten();
    let group = LinearSymmetries::of(fw.space());
    // The start is within `radius * sqrt(len)` of the solution `p`.
    let corrector = Corrector {
        lie: None,
        max_step: Some(radius),
        corrector_tol: cfg.corrector_tol,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
    };
    let escape = T::lit(2.0) * radius * T::from_usize(base.len()).expect("length fits").sqrt();
    let mut record = ProbeRecord {
        restarts: cfg.nrestarts,
        radius: radius.to_f64_lossy(),
        orbit_tol: orbit_tol.to_f64_lossy(),
        on_orbit: 0,
        off_orbit: 0,
        failed: 0,
        escaped: 0,
        max_on_orbit_distance: 0.0,
        verdict: group.verdict(),
        witnesses: Vec::new(),
    };
    for restart in 0..cfg.nrestarts {
        let mut rng = sampling::trial_rng(cfg.seed, restart as u64);
        let start = &base + sampling::box_vector(base.len(), radius, &mut rng);
        let Ok(q) = project_to_lengths(fw, start.clone(), &target, &corrector) else {
            record.failed += 1;
            continue;
        };
        if (&q - &start).norm() > escape {
            record.escaped += 1;
            continue;
        }
        let qp = Placement::from_flat(fw.dim(), &q)?;
        let dist = group.orbit_distance(fw.space(), fw.placement(), &qp);
        if dist <= orbit_tol {
            record.on_orbit += 1;
            record.max_on_orbit_distance = record.max_on_orbit_distance.max(dist.to_f64_lossy());
        } else {
            record.off_orbit += 1;
            record.witnesses.push(OrbitWitness {
                restart,
                orbit_distance: dist.to_f64_lossy(),
                coordinates: qp
                    .points()
                    .iter()
                    .map(|p| p.iter().map(|c| c.to_f64_lossy()).collect())
                    .collect(),
            });
        }
    }
    Ok(record)
}

/// Largest dimension for which signed permutations are enumerated.
pub const SIGNED_PERMUTATION_LIMIT: usize = 5;

/// The linear parts used when fitting an isometry `x -> A x + t`.
enum LinearSymmetries<T: Scalar> {
    /// Orthogonal group of a Gram structure, fitted by Procrustes alignment.
    Orthogonal {
        gram_factor: DMatrix<T>,
    },
    Finite(Vec<DMatrix<T>>),
    TranslationsOnly,
}

impl<T: Scalar> LinearSymmetries<T> {
    fn of(space: &NormedSpace<T>) -> Self {
        let d = space.dim();
        if space.is_euclidean() {
            let l = space
                .companion_gram()
                .cholesky()
                .expect("gram is positive definite")
                .l();
            return Self::Orthogonal {
                gram_factor: l.transpose(),
            };
        }
        match space.kind() {
            NormKind::Polyhedral { functionals } => match polyhedral_symmetries(functionals, d) {
                Some(group) => Self::Finite(group),
                None => Self::TranslationsOnly,
            },
            _ if d <= SIGNED_PERMUTATION_LIMIT => Self::Finite(signed_permutations(d)),
            _ => Self::TranslationsOnly,
        }
    }

    fn verdict(&self) -> OrbitVerdict {
        match self {
            Self::TranslationsOnly => OrbitVerdict::Partial,
            _ => OrbitVerdict::Complete,
        }
    }

    /// `min_g max_v norm(g p_v - q_v)` with the translation fitted by least squares.
    fn orbit_distance(&self, space: &NormedSpace<T>, p: &Placement<T>, q: &Placement<T>) -> T {
        let d = p.dim();
        let n = T::from_usize(p.len().max(1)).expect("count fits");
        let mean = |pl: &Placement<T>| pl.points().iter().fold(DVector::zeros(d), |a, x| a + x) / n;
        let (cp, cq) = (mean(p), mean(q));
        let residual = |a: &DMatrix<T>| -> T {
            p.points()
                .iter()
                .zip(q.points())
                .map(|(x, y)| space.norm_unchecked(&(a * (x - &cp) + &cq - y)))
                .fold(T::zero(), |m, r| m.max(r))
        };
        match self {
            Self::Orthogonal { gram_factor } => {
                // Work in coordinates where the Gram structure is standard.
                let mut h = DMatrix::zeros(d, d);
                for (x, y) in p.points().iter().zip(q.points()) {
                    h += (gram_factor * (x - &cp)) * (gram_factor * (y - &cq)).transpose();
                }
                let svd = h.svd(true, true);
                let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
                let rot = vt.transpose() * u.transpose();
                let inv = gram_factor
                    .clone()
                    .try_inverse()
                    .expect("triangular factor invertible");
                residual(&(inv * rot * gram_factor))
            }
            Self::Finite(group) => group
                .iter()
                .map(residual)
                .fold(T::max_value().expect("bounded"), |a, b| a.min(b)),
            Self::TranslationsOnly => residual(&DMatrix::identity(d, d)),
        }
    }
}

fn signed_permutations<T: Scalar>(d: usize) -> Vec<DMatrix<T>> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..d {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..d)
                    .filter(|i| !p.contains(i))
                    .map(|i| {
                        let mut next = p.clone();
                        next.push(i);
                        next
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let mut out = Vec::with_capacity(perms.len() << d);
    for perm in &perms {
        for signs in 0..1usize << d {
            let mut m = DMatrix::zeros(d, d);
            for (row, &col) in perm.iter().enumerate() {
                m[(row, col)] = if signs >> row & 1 == 1 {
                    -T::one()
                } else {
                    T::one()
                };
            }
            out.push(m);
        }
    }
    out
}

/// Linear maps `A` with `f A` in the functional set for every `f`; `None` if enumeration is too large.
///
/// Fixes a basis `B` of functionals and tries every assignment of images
/// `B A = G`, keeping the maps that permute the whole set.
fn polyhedral_symmetries<T: Scalar>(
    functionals: &[crate::normed_space::Covector<T>],
    d: usize,
) -> Option<Vec<DMatrix<T>>> {
    let m = functionals.len();
    if (m as f64).powi(d as i32) > 1e6 {
        return None;
    }
    let rows = DMatrix::from_fn(m, d, |r, c| functionals[r].coeffs()[c]);
    let basis_idx = Combinations::new(m, d).find(|s| {
        let b = DMatrix::from_fn(d, d, |r, c| rows[(s[r], c)]);
        linalg::numeric_rank(&b, T::lit(1e-10)) == d
    })?;
    let b = DMatrix::from_fn(d, d, |r, c| rows[(basis_idx[r], c)]);
    let b_inv = b.try_inverse()?;
    let scale = rows.amax();
    let eps = T::lit(1e-9) * scale;
    let mut out: Vec<DMatrix<T>> = Vec::new();
    let mut choice = vec![0usize; d];
    loop {
        let g = DMatrix::from_fn(d, d, |r, c| rows[(choice[r], c)]);
        let a = &b_inv * g;
        let images = &rows * &a;
        let permutes = linalg::numeric_rank(&a, T::lit(1e-10)) == d
            && (0..m).all(|i| (0..m).any(|j| (images.row(i) - rows.row(j)).amax() <= eps));
        if permutes && !out.iter().any(|x| (x - &a).amax() <= eps) {
            out.push(a);
        }
        let mut k = 0;
        while k < d {
            choice[k] += 1;
            if choice[k] < m {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    Some(out)
}
