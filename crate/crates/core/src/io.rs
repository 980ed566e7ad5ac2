//! JSON encodings of spaces, frameworks and flex paths, and matrix export.
//!
//! Every document written here carries `"schema_version": 1`. Readers accept
//! the field but do not require it. In strict mode unknown fields are errors;
//! otherwise they are ignored.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flexes::FlexPath;
use crate::graph::{Framework, Graph, Placement};
use crate::normed_space::{Exponent, NormKind, NormedSpace};
use crate::rigidity::RigidityMatrix;

pub const SCHEMA_VERSION: u64 = 1;

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], context: &str) -> Result<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::Parse(format!("unknown field `{k}` in {context}"))),
        None => Ok(()),
    }
}

fn check_version(obj: &Map<String, Value>) -> Result<()> {
    match obj.get("schema_version") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::Parse(format!("unsupported schema_version {v}"))),
    }
}

fn real_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    Vec::<Vec<f64>>::deserialize(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn finite_rows(rows: &[Vec<f64>], what: &str) -> Result<()> {
    if rows.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Parse(format!("{what}: entries must be finite")))
    }
}

/// Decodes a space object (`{"type": "euclidean" | "lp" | "polyhedral", ...}`).
pub fn space_from_value(v: &Value, strict: bool) -> Result<NormedSpace<f64>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("space must be a JSON object".into()))?;
    check_version(obj)?;
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("space needs a string field `type`".into()))?;
    let dim = match obj.get("dim") {
        None => None,
        Some(d) => Some(
            d.as_u64()
                .ok_or_else(|| Error::Parse("space `dim` must be a non-negative integer".into()))?
                as usize,
        ),
    };
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| Error::Parse(format!("{kind} space needs field `{name}`")))
    };
    let space = match kind {
        "euclidean" => {
            if strict {
                reject_unknown(
                    obj,
                    &["type", "gram", "dim", "schema_version"],
                    "euclidean space",
                )?;
            }
            let rows = real_rows(field("gram")?, "gram")?;
            finite_rows(&rows, "gram")?;
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidSpace("gram must be square".into()));
            }
            NormedSpace::euclidean(DMatrix::from_fn(d, d, |i, j| rows[i][j]))?
        }
        "lp" => {
            if strict {
                reject_unknown(obj, &["type", "q", "dim", "schema_version"], "lp space")?;
            }
            let d = dim.ok_or_else(|| Error::Parse("lp space needs field `dim`".into()))?;
            match field("q")? {
                Value::String(s) if s == "inf" => NormedSpace::l_inf(d)?,
                Value::Number(n) => NormedSpace::lp(d, n.as_f64().unwrap_or(f64::NAN))?,
                other => {
                    return Err(Error::Parse(format!(
                        "lp `q` must be a number or \"inf\", found {other}"
                    )))
                }
            }
        }
        "polyhedral" => {
            if strict {
                reject_unknown(
                    obj,
                    &["type", "functionals", "dim", "schema_version"],
                    "polyhedral space",
                )?;
            }
            let rows = real_rows(field("functionals")?, "functionals")?;
            finite_rows(&rows, "functionals")?;
            NormedSpace::polyhedral(rows)?
        }
        other => return Err(Error::Parse(format!("unknown space type `{other}`"))),
    };
    if let Some(d) = dim {
        if d != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: space.dim(),
            });
        }
    }
    Ok(space)
}

pub fn parse_space(text: &str, strict: bool) -> Result<NormedSpace<f64>> {
    let v: Value = serde_json::from_str(text).map_err(parse_err)?;
    space_from_value(&v, strict)
}

pub fn space_to_value(space: &NormedSpace<f64>) -> Value {
    let d = space.dim();
    match space.kind() {
        NormKind::Euclidean { gram } => json!({
            "type": "euclidean",
            "dim": d,
            "gram": (0..d).map(|i| (0..d).map(|j| gram[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        NormKind::Lp {
            q: Exponent::Finite(q),
        } => json!({"type": "lp", "q": q, "dim": d}),
        NormKind::Lp {
            q: Exponent::Infinity,
        } => json!({"type": "lp", "q": "inf", "dim": d}),
        NormKind::Polyhedral { functionals } => json!({
            "type": "polyhedral",
            "dim": d,
            "functionals": functionals
                .iter()
                .map(|f| f.coeffs().iter().copied().collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
    }
}

#[derive(Deserialize)]
struct FrameworkDoc {
    space: Value,
    vertices: Vec<String>,
    coordinates: BTreeMap<String, Vec<f64>>,
    edges: Vec<(String, String)>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

/// Parses a framework document. Edges are deduplicated (in either orientation)
/// keeping the first occurrence.
pub fn parse_framework(text: &str, strict: bool) -> Result<Framework<f64>> {
    let doc: FrameworkDoc = serde_json::from_str(text).map_err(parse_err)?;
    match doc.extra.get("schema_version") {
        None => {}
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(Error::Parse(format!("unsupported schema_version {v}"))),
    }
    if strict {
        if let Some(k) = doc.extra.keys().find(|k| k.as_str() != "schema_version") {
            return Err(Error::Parse(format!("unknown field `{k}` in framework")));
        }
    }
    let space = space_from_value(&doc.space, strict)?;
    let d = space.dim();

    let mut points = Vec::with_capacity(doc.vertices.len());
    for name in &doc.vertices {
        let c = doc.coordinates.get(name).ok_or_else(|| {
            Error::InvalidPlacement(format!("vertex `{name}` has no coordinates"))
        })?;
        if c.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.len(),
            });
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPlacement(format!(
                "coordinates of `{name}` must be finite"
            )));
        }
        points.push(DVector::from_column_slice(c));
    }
    let names: HashSet<&str> = doc.vertices.iter().map(String::as_str).collect();
    if let Some(k) = doc.coordinates.keys().find(|k| !names.contains(k.as_str())) {
        return Err(Error::InvalidPlacement(format!(
            "coordinates given for unknown vertex `{k}`"
        )));
    }

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (a, b) in doc.edges {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if a == b || seen.insert(key) {
            edges.push((a, b));
        }
    }
    let graph = Graph::new(doc.vertices, edges)?;
    Framework::new(graph, Placement::new(d, points)?, space)
}

pub fn framework_to_value(fw: &Framework<f64>) -> Value {
    let g = fw.graph();
    let coordinates: BTreeMap<&str, Vec<f64>> = g
        .vertices()
        .iter()
        .zip(fw.placement().points())
        .map(|(n, p)| (n.as_str(), p.iter().copied().collect()))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space_to_value(fw.space()),
        "vertices": g.vertices(),
        "coordinates": coordinates,
        "edges": (0..g.edge_count()).map(|e| {
            let (a, b) = g.edge_names(e);
            [a, b]
        }).collect::<Vec<_>>(),
    })
}

fn column_labels(graph: &Graph, dim: usize) -> Vec<String> {
    graph
        .vertices()
        .iter()
        .flat_map(|v| (0..dim).map(move |i| format!("{v}[{i}]")))
        .collect()
}

fn edge_labels(graph: &Graph) -> Vec<String> {
    (0..graph.edge_count())
        .map(|e| {
            let (a, b) = graph.edge_names(e);
            format!("{a}-{b}")
        })
        .collect()
}

/// Row-major CSV with a header of column labels `vertex[i]` and a leading edge column.
pub fn matrix_csv(r: &RigidityMatrix<f64>, graph: &Graph) -> String {
    let mut out = String::from("edge");
    for c in column_labels(graph, r.dim()) {
        out.push(',');
        out.push_str(&c);
    }
    out.push('\n');
    for (e, label) in edge_labels(graph).iter().enumerate() {
        out.push_str(label);
        for c in 0..r.ncols() {
            write!(out, ",{:e}", r.matrix()[(e, c)]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn matrix_to_value(r: &RigidityMatrix<f64>, graph: &Graph) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "rows": edge_labels(graph),
        "columns": column_labels(graph, r.dim()),
        "vertices": graph.vertices(),
        "dim": r.dim(),
        "matrix": (0..r.nrows())
            .map(|e| r.matrix().row(e).iter().copied().collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn flex_path_to_value(path: &FlexPath<f64>, graph: &Graph) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "vertices": graph.vertices(),
        "edges": edge_labels(graph),
        "params": path.params,
        "configs": path.configs.iter().map(|p| {
            p.points().iter().map(|x| x.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "drift": path.edge_drift,
        "max_drift": path.max_drift(),
        "trivial_component": path.trivial_component_norm,
        "constant_rank_at_start": path.constant_at_start,
        "step_halvings": path.step_halvings,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializing a JSON value");
    s.push('\n');
    s
}
