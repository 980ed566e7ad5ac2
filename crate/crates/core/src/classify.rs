//! Rigidity classification of a framework and audits of the counting
//! identities that link edge counts with flex and trivial-motion dimensions.

use serde::{Deserialize, Serialize};

use crate::audit::{AuditRecord, AuditStatus};
use crate::error::{Error, Result};
use crate::graph::Framework;
use crate::isometry::{self, LieAlgebraBasis, LieConfig};
use crate::linalg::RankMargin;
use crate::rigidity;
use crate::Scalar;

/// Margins below this multiple of the tolerance make a strict run fail.
pub const STRICT_MARGIN: f64 = 10.0;

/// Relative residual (to `sigma_max`) allowed for trivial motions under the rigidity matrix.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// Default vertex cap for [`subgraph_count_audit`].
pub const SUBGRAPH_AUDIT_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig<T> {
    /// Relative singular-value tolerance for every rank decision.
    pub tol: T,
    pub seed: u64,
    pub lie: LieConfig<T>,
}

impl<T: Scalar> Default for ClassifyConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::default_tol(),
            seed: 0,
            lie: LieConfig::default(),
        }
    }
}

impl<T: Scalar> ClassifyConfig<T> {
    pub fn new(tol: T, seed: u64) -> Self {
        Self {
            tol,
            seed,
            lie: LieConfig::with_seed(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub space: String,
    pub dim: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub well_positioned: bool,
    pub rank: usize,
    /// Dimension of the space of infinitesimal flexes.
    pub flex_dim: usize,
    /// Dimension of the space of trivial motions of the placement.
    pub trivial_dim: usize,
    pub iso_dim: usize,
    pub lin_dim: usize,
    pub affine_span_dim: usize,
    pub independent: bool,
    pub inf_rigid: bool,
    pub isostatic: bool,
    pub full: bool,
    pub small: bool,
    pub euclidean: bool,
    pub rank_margin: RankMargin,
    pub trivial_margin: RankMargin,
    pub lie_margin: Option<RankMargin>,
    /// `max |R t| / sigma_max` over the trivial-motion basis.
    pub containment_residual: f64,
    pub bound_audits: Vec<AuditRecord>,
    pub tol: f64,
    pub seed: u64,
}

impl RigidityReport {
    /// Smallest singular-value margin among the decisions behind the flags.
    pub fn min_margin(&self) -> f64 {
        let lie = self.lie_margin.map_or(f64::INFINITY, |m| m.margin);
        self.rank_margin
            .margin
            .min(self.trivial_margin.margin)
            .min(lie)
    }

    pub fn strict_ok(&self) -> bool {
        self.min_margin() >= STRICT_MARGIN
    }

    /// Names of failed internal consistency audits.
    pub fn inconsistencies(&self) -> Vec<&str> {
        self.bound_audits
            .iter()
            .filter(|a| a.failed())
            .map(|a| a.name.as_str())
            .collect()
    }
}

/// Classifies `fw`, sampling the isometry Lie algebra with `cfg.lie`.
pub fn classify<T: Scalar>(fw: &Framework<T>, cfg: &ClassifyConfig<T>) -> Result<RigidityReport> {
    let lie = isometry::linear_isometry_lie_algebra(fw.space(), &cfg.lie)?;
    classify_with_lie(fw, &lie, cfg)
}

/// Classifies `fw` with a precomputed Lie algebra basis for its space.
pub fn classify_with_lie<T: Scalar>(
    fw: &Framework<T>,
    lie: &LieAlgebraBasis<T>,
    cfg: &ClassifyConfig<T>,
) -> Result<RigidityReport> {
    let tol = cfg.tol;
    let space = fw.space();
    let d = space.dim();
    let nv = fw.graph().vertex_count();
    let ne = fw.graph().edge_count();
    if lie.space_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: lie.space_dim(),
        });
    }
    let dims = isometry::iso_dims(space, lie)?;
    let r = rigidity::rigidity_matrix_with_tol(fw, T::default_tol())?;
    let spec = r.spectrum(tol);
    let rank = spec.rank;
    let flex_dim = d * nv - rank;
    let (trivial, tspec) = isometry::trivial_motion_space_with_spectrum(fw.placement(), lie, tol);
    let trivial_dim = trivial.dim();

    let smax = spec.sigma_max();
    let containment_residual = if ne == 0 || smax == T::zero() {
        0.0
    } else {
        (0..trivial_dim)
            .map(|i| (r.residual(&trivial.vector(i)) / smax).to_f64_lossy())
            .fold(0.0, f64::max)
    };

    // (K_1, p) is isostatic by convention; edgeless frameworks are independent.
    let single = nv == 1;
    let independent = rank == ne || single;
    let inf_rigid = flex_dim == trivial_dim || single;
    let isostatic = independent && inf_rigid;
    let counts_match = ne + trivial_dim == d * nv;

    let mut audits = Vec::new();
    audits.push(AuditRecord::check(
        "trivial_motions_are_flexes",
        containment_residual < CONTAINMENT_TOL,
        containment_residual,
        CONTAINMENT_TOL,
        "trivial motions lie in the kernel of the rigidity matrix",
    ));
    let held = [counts_match, inf_rigid, independent];
    let two_hold = held.iter().filter(|&&h| h).count() >= 2;
    audits.push(if single {
        AuditRecord::new(
            "count_rigidity_independence_triad",
            AuditStatus::Vacuous,
            None,
            None,
            "single vertex: isostatic by convention",
        )
    } else if two_hold {
        AuditRecord::check(
            "count_rigidity_independence_triad",
            held.iter().all(|&h| h),
            ne as f64,
            (d * nv) as f64 - trivial_dim as f64,
            format!(
                "any two of (|E| = d|V| - dim T, inf. rigid, independent) imply the third; held = {held:?}"
            ),
        )
    } else {
        AuditRecord::new(
            "count_rigidity_independence_triad",
            AuditStatus::Vacuous,
            Some(ne as f64),
            Some((d * nv) as f64 - trivial_dim as f64),
            "fewer than two of the three properties hold",
        )
    });
    audits.extend(isometry::bound_audit(fw.placement(), space, lie, tol));

    Ok(RigidityReport {
        space: space.describe(),
        dim: d,
        vertex_count: nv,
        edge_count: ne,
        well_positioned: true,
        rank,
        flex_dim,
        trivial_dim,
        iso_dim: dims.iso_dim,
        lin_dim: dims.lin_dim,
        affine_span_dim: fw.placement().affine_span_dim(tol),
        independent,
        inf_rigid,
        isostatic,
        full: trivial_dim == dims.iso_dim,
        small: nv <= d + 1,
        euclidean: dims.euclidean,
        rank_margin: spec.margin(tol),
        trivial_margin: tspec.margin(tol),
        lie_margin: lie.margin(),
        containment_residual,
        bound_audits: audits,
        tol: tol.to_f64_lossy(),
        seed: cfg.seed,
    })
}

/// Edge-count identities for independent, infinitesimally rigid and isostatic frameworks.
pub fn maxwell_audit(report: &RigidityReport) -> Vec<AuditRecord> {
    let ne = report.edge_count as f64;
    let dv = (report.dim * report.vertex_count) as f64;
    let implication = |name: &str, hyp: bool, ok: bool, rhs: f64, note: &str| {
        if hyp {
            AuditRecord::check(name, ok, ne, rhs, note)
        } else {
            AuditRecord::new(
                name,
                AuditStatus::Vacuous,
                Some(ne),
                Some(rhs),
                format!("hypothesis false: {note}"),
            )
        }
    };
    let flex_rhs = dv - report.flex_dim as f64;
    let trivial_rhs = dv - report.trivial_dim as f64;
    let iso_rhs = dv - report.iso_dim as f64;
    vec![
        implication(
            "independent_edge_count",
            report.independent,
            ne == flex_rhs,
            flex_rhs,
            "independent => |E| = d|V| - dim F",
        ),
        implication(
            "rigid_edge_lower_bound",
            report.inf_rigid,
            ne >= trivial_rhs,
            trivial_rhs,
            "infinitesimally rigid => |E| >= d|V| - dim T",
        ),
        implication(
            "isostatic_edge_count",
            report.isostatic && report.vertex_count > report.dim,
            ne == iso_rhs,
            iso_rhs,
            "isostatic with |V| >= d+1 => |E| = d|V| - dim Iso",
        ),
    ]
}

/// Checks `|E(H)| <= d|V(H)| - dim Iso` over induced subgraphs with at least `d+1` vertices.
///
/// Induced subgraphs carry the most edges on a given vertex set, so they suffice.
pub fn subgraph_count_audit<T: Scalar>(
    fw: &Framework<T>,
    report: &RigidityReport,
    max_vertices: usize,
) -> Result<AuditRecord> {
    const NAME: &str = "subgraph_edge_bound";
    let d = report.dim;
    let n = fw.graph().vertex_count();
    if !report.independent {
        return Ok(AuditRecord::new(
            NAME,
            AuditStatus::NotApplicable,
            None,
            None,
            "framework is not independent",
        ));
    }
    if n < d + 1 {
        return Ok(AuditRecord::new(
            NAME,
            AuditStatus::NotApplicable,
            None,
            None,
            "requires |V| >= d+1",
        ));
    }
    if n > max_vertices {
        return Err(Error::SizeLimit {
            what: "subgraph audit",
            found: n,
            limit: max_vertices,
        });
    }
    let iso = report.iso_dim as i64;
    let mut worst_excess = i64::MIN;
    let mut worst_subset = Vec::new();
    let mut checked = 0usize;
    for mask in 1u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if k < d + 1 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let edges = fw.graph().induced_edge_count(&subset) as i64;
        let excess = edges - ((d * k) as i64 - iso);
        checked += 1;
        if excess > worst_excess {
            worst_excess = excess;
            worst_subset = subset;
        }
    }
    let names: Vec<&str> = worst_subset
        .iter()
        .map(|&v| fw.graph().vertices()[v].as_str())
        .collect();
    Ok(AuditRecord::check(
        NAME,
        worst_excess <= 0,
        worst_excess as f64,
        0.0,
        format!(
            "max over {checked} induced subgraphs of |E(H)| - (d|V(H)| - dim Iso), attained on {names:?}; induced subgraphs only"
        ),
    ))
}

/// Small frameworks (`|V| <= d+1`): flexible in non-Euclidean spaces, and in
/// Euclidean spaces isostatic exactly when complete and in general position.
pub fn small_framework_check<T: Scalar>(
    fw: &Framework<T>,
    report: &RigidityReport,
    tol: T,
) -> Result<AuditRecord> {
    const NAME: &str = "small_framework";
    let n = report.vertex_count;
    if n > report.dim + 1 {
        return Ok(AuditRecord::new(
            NAME,
            AuditStatus::NotApplicable,
            None,
            None,
            "framework is not small",
        ));
    }
    if !report.euclidean {
        if n < 2 {
            return Ok(AuditRecord::new(
                NAME,
                AuditStatus::Vacuous,
                None,
                None,
                "single vertex",
            ));
        }
        return Ok(AuditRecord::check(
            NAME,
            !report.inf_rigid,
            report.flex_dim as f64,
            report.trivial_dim as f64,
            "non-Euclidean small framework on >= 2 vertices must be infinitesimally flexible (dim F > dim T)",
        ));
    }
    let complete = fw.graph().is_complete();
    let general = fw.placement().is_general_position(tol)?;
    Ok(AuditRecord::check(
        NAME,
        report.isostatic == (complete && general),
        f64::from(u8::from(report.isostatic)),
        f64::from(u8::from(complete && general)),
        format!(
            "Euclidean: isostatic ({}) iff complete ({complete}) and general position ({general})",
            report.isostatic
        ),
    ))
}
