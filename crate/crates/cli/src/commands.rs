use std::fs;
use std::path::Path;

use normrig::audit::{AuditRecord, AuditStatus};
use normrig::classify::{self, ClassifyConfig, RigidityReport, SUBGRAPH_AUDIT_LIMIT};
use normrig::flexes::{self, ProbeConfig, TraceConfig};
use normrig::io::{self, SCHEMA_VERSION};
use normrig::isometry::{self, LieAlgebraBasis, LieConfig};
use normrig::{rigidity, Error, Framework64, NormedSpace64};
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;
pub const EXIT_NO_DIRECTION: u8 = 4;

pub struct RunConfig {
    pub tol: f64,
    pub seed: u64,
    pub strict: bool,
    pub json: bool,
}

impl RunConfig {
    fn to_value(&self) -> Value {
        json!({"tol": self.tol, "seed": self.seed, "strict": self.strict})
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.tol > 0.0 && self.tol < 1.0 {
            Ok(())
        } else {
            Err(Failure::new(
                EXIT_VALIDATION,
                format!("--tol must lie in (0, 1), got {}", self.tol),
            ))
        }
    }
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent(_) | Error::BoundViolation(_) | Error::LieValidation { .. } => {
                EXIT_INCONSISTENT
            }
            Error::NoNontrivialDirection => EXIT_NO_DIRECTION,
            Error::CorrectorFailed { .. }
            | Error::PathNotSmooth { .. }
            | Error::NoWellPositionedSample { .. } => EXIT_FAILURE,
            _ => EXIT_VALIDATION,
        };
        Self::new(code, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn load_framework(run: &RunConfig, path: &Path) -> Result<Framework64, Failure> {
    run.validate()?;
    Ok(io::parse_framework(&read(path)?, run.strict)?)
}

fn lie_for(run: &RunConfig, space: &NormedSpace64) -> Result<LieAlgebraBasis<f64>, Failure> {
    Ok(isometry::linear_isometry_lie_algebra(
        space,
        &LieConfig::with_seed(run.seed),
    )?)
}

fn classify_fw(run: &RunConfig, fw: &Framework64) -> Result<RigidityReport, Failure> {
    let lie = lie_for(run, fw.space())?;
    Ok(classify::classify_with_lie(
        fw,
        &lie,
        &ClassifyConfig::new(run.tol, run.seed),
    )?)
}

fn verdict(r: &RigidityReport) -> &'static str {
    match (r.inf_rigid, r.independent) {
        (true, true) => "isostatic",
        (true, false) => "rigid",
        (false, true) => "flexible (independent)",
        (false, false) => "flexible",
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

fn audit_rows(audits: &[AuditRecord]) -> String {
    let width = audits.iter().map(|a| a.name.len()).max().unwrap_or(0);
    audits
        .iter()
        .map(|a| {
            let status = match a.status {
                AuditStatus::Pass => "pass",
                AuditStatus::Fail => "FAIL",
                AuditStatus::Vacuous => "vacuous",
                AuditStatus::NotApplicable => "n/a",
            };
            format!(
                "  {:<width$}  {:<7}  lhs={} rhs={}  {}\n",
                a.name,
                status,
                fmt_opt(a.lhs),
                fmt_opt(a.rhs),
                a.note
            )
        })
        .collect()
}

fn emit(run: &RunConfig, value: Value, text: impl FnOnce() -> String) {
    if run.json {
        print!("{}", io::to_pretty(&value));
    } else {
        print!("{}", text());
    }
}

/// Audits that follow a classification: counting, subgraph counts and the small-framework check.
fn follow_up_audits(
    run: &RunConfig,
    fw: &Framework64,
    report: &RigidityReport,
) -> Result<Vec<AuditRecord>, Failure> {
    let mut audits = classify::maxwell_audit(report);
    if report.independent && fw.graph().vertex_count() <= SUBGRAPH_AUDIT_LIMIT {
        audits.push(classify::subgraph_count_audit(
            fw,
            report,
            SUBGRAPH_AUDIT_LIMIT,
        )?);
    }
    audits.push(classify::small_framework_check(fw, report, run.tol)?);
    Ok(audits)
}

fn exit_for(run: &RunConfig, report: &RigidityReport, audits: &[AuditRecord]) -> u8 {
    let failed = !report.inconsistencies().is_empty() || audits.iter().any(AuditRecord::failed);
    if failed || (run.strict && !report.strict_ok()) {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    }
}

pub fn analyze(
    run: &RunConfig,
    path: &Path,
    matrix_out: Option<&Path>,
    matrix_json: bool,
) -> CmdResult {
    let fw = load_framework(run, path)?;
    let report = classify_fw(run, &fw)?;
    let audits = follow_up_audits(run, &fw, &report)?;
    if let Some(out) = matrix_out {
        let r = rigidity::rigidity_matrix_with_tol(&fw, run.tol)?;
        let contents = if matrix_json {
            io::to_pretty(&io::matrix_to_value(&r, fw.graph()))
        } else {
            io::matrix_csv(&r, fw.graph())
        };
        write(out, &contents)?;
    }
    let code = exit_for(run, &report, &audits);
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "config": run.to_value(),
        "verdict": verdict(&report),
        "strict_ok": report.strict_ok(),
        "report": report,
        "audits": audits,
    });
    emit(run, value, || {
        let r = &report;
        let mut s = String::new();
        let rows: Vec<(&str, String)> = vec![
            ("space", r.space.clone()),
            ("vertices", r.vertex_count.to_string()),
            ("edges", r.edge_count.to_string()),
            ("verdict", verdict(r).into()),
            ("rank", r.rank.to_string()),
            ("flex_dim", r.flex_dim.to_string()),
            ("trivial_dim", r.trivial_dim.to_string()),
            ("iso_dim", r.iso_dim.to_string()),
            ("affine_span_dim", r.affine_span_dim.to_string()),
            ("independent", r.independent.to_string()),
            ("inf_rigid", r.inf_rigid.to_string()),
            ("isostatic", r.isostatic.to_string()),
            ("full", r.full.to_string()),
            ("small", r.small.to_string()),
            ("rank_margin", format!("{:.3e}", r.rank_margin.margin)),
            ("trivial_margin", format!("{:.3e}", r.trivial_margin.margin)),
            ("min_margin", format!("{:.3e}", r.min_margin())),
            ("tol", format!("{:e}", run.tol)),
            ("seed", run.seed.to_string()),
            ("strict", run.strict.to_string()),
        ];
        for (k, v) in rows {
            s += &format!("{k:<16} {v}\n");
        }
        s += "audits:\n";
        let all: Vec<AuditRecord> = r.bound_audits.iter().chain(&audits).cloned().collect();
        s += &audit_rows(&all);
        s
    });
    Ok(code)
}

pub fn audit(run: &RunConfig, path: &Path) -> CmdResult {
    let fw = load_framework(run, path)?;
    let report = classify_fw(run, &fw)?;
    let mut audits = report.bound_audits.clone();
    audits.extend(follow_up_audits(run, &fw, &report)?);
    let code = exit_for(run, &report, &audits);
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "audit",
        "config": run.to_value(),
        "audits": audits,
    });
    emit(run, value, || {
        format!(
            "tol {:e}  seed {}\n{}",
            run.tol,
            run.seed,
            audit_rows(&audits)
        )
    });
    Ok(code)
}

pub fn trace(
    run: &RunConfig,
    path: &Path,
    direction_index: usize,
    steps: usize,
    step_size: f64,
    out: Option<&Path>,
) -> CmdResult {
    let fw = load_framework(run, path)?;
    if step_size.is_nan() || step_size <= 0.0 || steps == 0 {
        return Err(Failure::new(
            EXIT_VALIDATION,
            "--steps and --step-size must be positive",
        ));
    }
    let lie = lie_for(run, fw.space())?;
    let dirs = flexes::nontrivial_flex_directions(&fw, &lie, run.tol)?;
    if dirs.dim() == 0 {
        return Err(Error::NoNontrivialDirection.into());
    }
    if direction_index >= dirs.dim() {
        return Err(Failure::new(
            EXIT_VALIDATION,
            format!(
                "--direction-index {direction_index} out of range (have {})",
                dirs.dim()
            ),
        ));
    }
    let cfg = TraceConfig {
        step: step_size,
        nsteps: steps,
        tol: run.tol,
        seed: run.seed,
        ..TraceConfig::default()
    };
    let path_ = flexes::trace_flex(&fw, &lie, &dirs.vector(direction_index), &cfg)?;
    let mut doc = io::flex_path_to_value(&path_, fw.graph());
    doc["config"] = json!({
        "tol": run.tol,
        "seed": run.seed,
        "strict": run.strict,
        "steps": steps,
        "step_size": step_size,
        "direction_index": direction_index,
        "nontrivial_directions": dirs.dim(),
    });
    let text = io::to_pretty(&doc);
    if let Some(out) = out {
        write(out, &text)?;
    }
    if run.json && out.is_none() {
        print!("{text}");
    } else {
        println!(
            "traced {} steps along direction {direction_index} of {}; max edge drift {:.3e}; step halvings {}",
            path_.steps(),
            dirs.dim(),
            path_.max_drift(),
            path_.step_halvings
        );
    }
    Ok(EXIT_OK)
}

pub fn probe(run: &RunConfig, path: &Path, radius: Option<f64>, restarts: usize) -> CmdResult {
    let fw = load_framework(run, path)?;
    let cfg = ProbeConfig {
        radius,
        nrestarts: restarts,
        seed: run.seed,
        tol: run.tol,
        ..ProbeConfig::default()
    };
    let record = flexes::local_rigidity_probe(&fw, &cfg)?;
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "probe",
        "config": {"tol": run.tol, "seed": run.seed, "strict": run.strict, "restarts": restarts},
        "probe": record,
    });
    emit(run, value, || {
        format!(
            "restarts {}  radius {:.3e}  orbit_tol {:.3e}\non_orbit {}  off_orbit {}  failed {}  escaped {}  orbit fit {:?}\n",
            record.restarts,
            record.radius,
            record.orbit_tol,
            record.on_orbit,
            record.off_orbit,
            record.failed,
            record.escaped,
            record.verdict
        )
    });
    Ok(EXIT_OK)
}

pub fn lie(run: &RunConfig, path: &Path) -> CmdResult {
    run.validate()?;
    let text = read(path)?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let space = if v.get("space").is_some() {
        io::parse_framework(&text, run.strict)?.space().clone()
    } else {
        io::space_from_value(&v, run.strict)?
    };
    let lie = lie_for(run, &space)?;
    let dims = isometry::iso_dims(&space, &lie)?;
    let d = space.dim();
    let basis: Vec<Vec<Vec<f64>>> = lie
        .mats()
        .iter()
        .map(|m| (0..d).map(|i| m.row(i).iter().copied().collect()).collect())
        .collect();
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "lie",
        "config": run.to_value(),
        "space": space.describe(),
        "dims": dims,
        "margin": lie.margin(),
        "validation_worst": lie.validation_worst(),
        "basis": basis,
    });
    emit(run, value, || {
        let mut s = format!(
            "space     {}\nlin_dim   {}\niso_dim   {}\neuclidean {}\ntol {:e}  seed {}\n",
            space.describe(),
            dims.lin_dim,
            dims.iso_dim,
            dims.euclidean,
            run.tol,
            run.seed
        );
        for (k, m) in basis.iter().enumerate() {
            s += &format!("basis[{k}]\n");
            for row in m {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:>10.6}")).collect();
                s += &format!("  {}\n", cells.join(" "));
            }
        }
        s
    });
    Ok(EXIT_OK)
}
