//! Finite simple graphs, placements and frameworks, with positional predicates.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::normed_space::{Combinations, NormedSpace, Vector};
use crate::Scalar;

/// Default cap on vertex count for subset enumeration in [`Placement::is_general_position`].
pub const GENERAL_POSITION_LIMIT: usize = 16;

/// A finite simple graph. Column order of every matrix built from it follows
/// the listed vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    index: HashMap<String, usize>,
}

impl Graph {
    pub fn new<S: Into<String>>(vertices: Vec<S>, edges: Vec<(S, S)>) -> Result<Self> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex {v:?}")));
            }
        }
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            let lookup = |name: &String| {
                index.get(name).copied().ok_or_else(|| {
                    Error::InvalidGraph(format!("edge endpoint {name:?} is not a vertex"))
                })
            };
            idx_edges.push((lookup(&a)?, lookup(&b)?));
        }
        Self::check_edges(vertices.len(), &idx_edges, &vertices)?;
        Ok(Self {
            vertices,
            edges: idx_edges,
            index,
        })
    }

    /// Graph on vertices named `v0, v1, ...` with edges given by index.
    pub fn from_indices(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
        }
        Self::check_edges(n, edges, &names)?;
        let index = names
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        Ok(Self {
            vertices: names,
            edges: edges.to_vec(),
            index,
        })
    }

    fn check_edges(_n: usize, edges: &[(usize, usize)], names: &[String]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "loop at vertex {:?}",
                    names[a]
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!(
                    "parallel edge {:?}-{:?}",
                    names[a], names[b]
                )));
            }
        }
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::from_indices(n, &edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(
                "cycles need at least 3 vertices".into(),
            ));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_indices(n, &edges)
    }

    pub fn edgeless(n: usize) -> Self {
        Self::from_indices(n, &[]).expect("edgeless graph is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edge_names(&self, e: usize) -> (&str, &str) {
        let (a, b) = self.edges[e];
        (&self.vertices[a], &self.vertices[b])
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.edge_count() == n * n.saturating_sub(1) / 2
    }

    /// Subgraph induced by `keep` (indices into the vertex list, in the given order).
    pub fn induced_subgraph(&self, keep: &[usize]) -> Self {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let vertices: Vec<String> = keep.iter().map(|&v| self.vertices[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(a, b)| Some((*pos.get(a)?, *pos.get(b)?)))
            .collect();
        let index = vertices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        Self {
            vertices,
            edges,
            index,
        }
    }

    /// Number of edges with both endpoints in `subset`.
    pub fn induced_edge_count(&self, subset: &[usize]) -> usize {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        self.edges
            .iter()
            .filter(|(a, b)| set.contains(a) && set.contains(b))
            .count()
    }

    pub fn without_edge(&self, e: usize) -> Self {
        let mut g = self.clone();
        g.edges.remove(e);
        g
    }

    /// Same graph with vertices renamed and reordered by `perm` (new position `i` holds old vertex `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let vertices: Vec<String> = perm.iter().map(|&old| self.vertices[old].clone()).collect();
        let edges = self.edges.iter().map(|&(a, b)| (inv[a], inv[b])).collect();
        let index = vertices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        Self {
            vertices,
            edges,
            index,
        }
    }
}

/// Images of the vertices, aligned with the graph's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement<T: Scalar> {
    dim: usize,
    points: Vec<Vector<T>>,
}

impl<T: Scalar> Placement<T> {
    pub fn new(dim: usize, points: Vec<Vector<T>>) -> Result<Self> {
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPlacement("non-finite coordinate".into()));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(
            dim,
            rows.iter()
                .map(|r| DVector::from_iterator(r.len(), r.iter().map(|&c| T::lit(c))))
                .collect(),
        )
    }

    /// Inverse of [`Placement::flatten`].
    pub fn from_flat(dim: usize, flat: &DVector<T>) -> Result<Self> {
        if dim == 0 || !flat.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: flat.len(),
            });
        }
        let points = (0..flat.len() / dim)
            .map(|v| flat.rows(v * dim, dim).into_owned())
            .collect();
        Self::new(dim, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector<T>] {
        &self.points
    }

    pub fn point(&self, v: usize) -> &Vector<T> {
        &self.points[v]
    }

    /// Concatenated coordinates `(p_0, p_1, ...)` in vertex order.
    pub fn flatten(&self) -> DVector<T> {
        let mut out = DVector::zeros(self.dim * self.points.len());
        for (v, p) in self.points.iter().enumerate() {
            out.rows_mut(v * self.dim, self.dim).copy_from(p);
        }
        out
    }

    pub fn subset(&self, keep: &[usize]) -> Self {
        Self {
            dim: self.dim,
            points: keep.iter().map(|&v| self.points[v].clone()).collect(),
        }
    }

    /// Applies `x -> a x + t` to every point.
    pub fn transformed(&self, a: &DMatrix<T>, t: &Vector<T>) -> Self {
        Self {
            dim: self.dim,
            points: self.points.iter().map(|p| a * p + t).collect(),
        }
    }

    /// Largest coordinate magnitude of `p_v - centroid`; at least 1.
    pub fn scale(&self) -> T {
        if self.points.is_empty() {
            return T::one();
        }
        let n = T::from_usize(self.points.len()).expect("count fits in scalar");
        let centroid = self
            .points
            .iter()
            .fold(DVector::zeros(self.dim), |a, p| a + p)
            / n;
        self.points
            .iter()
            .map(|p| (p - &centroid).amax())
            .fold(T::one(), |a, b| a.max(b))
    }

    fn difference_matrix(points: &[&Vector<T>], dim: usize) -> DMatrix<T> {
        let base = points[0];
        DMatrix::from_fn(dim, points.len() - 1, |r, c| points[c + 1][r] - base[r])
    }

    /// Dimension of the affine span, by numeric rank of the differences `p_v - p_0`.
    pub fn affine_span_dim(&self, tol: T) -> usize {
        if self.points.len() < 2 {
            return 0;
        }
        let refs: Vec<&Vector<T>> = self.points.iter().collect();
        linalg::numeric_rank(&Self::difference_matrix(&refs, self.dim), tol)
    }

    /// Whether the points affinely span the whole space.
    pub fn is_spanning(&self, tol: T) -> bool {
        self.affine_span_dim(tol) == self.dim
    }

    /// Whether every subset of at most `dim + 1` points is affinely independent.
    ///
    /// Enumerates subsets, so it is limited to [`GENERAL_POSITION_LIMIT`] points.
    pub fn is_general_position(&self, tol: T) -> Result<bool> {
        let n = self.points.len();
        if n > GENERAL_POSITION_LIMIT {
            return Err(Error::SizeLimit {
                what: "placement",
                found: n,
                limit: GENERAL_POSITION_LIMIT,
            });
        }
        if n < 2 {
            return Ok(true);
        }
        // A dependent small subset stays dependent in every superset, so the
        // largest admissible size suffices.
        let k = n.min(self.dim + 1);
        for subset in Combinations::new(n, k) {
            let refs: Vec<&Vector<T>> = subset.iter().map(|&v| &self.points[v]).collect();
            let m = Self::difference_matrix(&refs, self.dim);
            if m.amax() == T::zero() || linalg::numeric_rank(&m, tol) < k - 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A bar-joint framework: a graph, a placement of its vertices and the ambient normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework<T: Scalar> {
    graph: Graph,
    placement: Placement<T>,
    space: NormedSpace<T>,
}

impl<T: Scalar> Framework<T> {
    pub fn new(graph: Graph, placement: Placement<T>, space: NormedSpace<T>) -> Result<Self> {
        if placement.len() != graph.vertex_count() {
            return Err(Error::InvalidPlacement(format!(
                "placement has {} points for {} vertices",
                placement.len(),
                graph.vertex_count()
            )));
        }
        if placement.dim() != space.dim() && !placement.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: placement.dim(),
            });
        }
        let placement = if placement.is_empty() {
            Placement::new(space.dim(), Vec::new())?
        } else {
            placement
        };
        Ok(Self {
            graph,
            placement,
            space,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn placement(&self) -> &Placement<T> {
        &self.placement
    }

    pub fn space(&self) -> &NormedSpace<T> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn with_placement(&self, placement: Placement<T>) -> Result<Self> {
        Self::new(self.graph.clone(), placement, self.space.clone())
    }

    pub fn with_graph(&self, graph: Graph) -> Result<Self> {
        Self::new(graph, self.placement.clone(), self.space.clone())
    }

    /// Subframework induced by the vertex indices `keep`.
    pub fn induced(&self, keep: &[usize]) -> Self {
        Self {
            graph: self.graph.induced_subgraph(keep),
            placement: self.placement.subset(keep),
            space: self.space.clone(),
        }
    }

    /// `p_v - p_w` for edge `e = vw`.
    pub fn edge_vector(&self, e: usize) -> Vector<T> {
        let (v, w) = self.graph.edges()[e];
        self.placement.point(v) - self.placement.point(w)
    }

    fn degenerate(&self, e: usize) -> Error {
        let (v, w) = self.graph.edge_names(e);
        Error::DegenerateEdge {
            v: v.into(),
            w: w.into(),
        }
    }

    /// First edge whose difference vector is not smooth, if any.
    ///
    /// Zero-length edges are reported as [`Error::DegenerateEdge`].
    pub fn first_non_smooth_edge(&self, tol: T) -> Result<Option<usize>> {
        for e in 0..self.graph.edge_count() {
            let x = self.edge_vector(e);
            match self.space.is_smooth_point(&x, tol) {
                Ok(true) => {}
                Ok(false) => return Ok(Some(e)),
                Err(Error::ZeroVector) => return Err(self.degenerate(e)),
                Err(other) => return Err(other),
            }
        }
        Ok(None)
    }

    /// Whether every edge difference is a smooth point; vacuously true without edges.
    pub fn is_well_positioned(&self, tol: T) -> Result<bool> {
        Ok(self.first_non_smooth_edge(tol)?.is_none())
    }

    /// Errors with the offending edge unless the framework is well-positioned.
    pub fn require_well_positioned(&self, tol: T) -> Result<()> {
        match self.first_non_smooth_edge(tol)? {
            None => Ok(()),
            Some(e) => {
                let (v, w) = self.graph.edge_names(e);
                Err(Error::NotWellPositioned {
                    v: v.into(),
                    w: w.into(),
                })
            }
        }
    }
}
