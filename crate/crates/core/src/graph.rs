//! Compact finite metric graphs with a Dirichlet boundary vertex set.
//!
//! A graph is a list of vertices (each `Dirichlet` or `Standard`) and a list
//! of edges with positive lengths. The standing assumptions are:
//!
//! * at least one Dirichlet vertex, and every Dirichlet vertex has degree 1;
//! * the complement of the Dirichlet set is connected;
//! * all lengths positive and finite.
//!
//! Loops are allowed and count twice towards the degree of their base
//! vertex. Edge orientation is the stored endpoint order; offsets along an
//! edge are measured from endpoint 0. Graphs are immutable: every surgery
//! operation returns a new graph with dense, renumbered ids.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use thiserror::Error;

/// Index of a vertex; dense and 0-based within a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

/// Index of an edge; dense and 0-based within a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Vertex condition: absorbing boundary or standard (Kirchhoff) junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Dirichlet,
    Standard,
}

/// An edge of the metric graph: an interval `[0, length]` whose endpoint 0
/// is `endpoints.0` and endpoint `length` is `endpoints.1`. Loops store the
/// same vertex twice.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub endpoints: (VertexId, VertexId),
    pub length: f64,
}

/// A point of the graph: an edge together with an offset in `[0, length]`.
/// Offsets 0 and `length` alias the endpoint vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub offset: f64,
}

impl GraphPoint {
    pub fn new(edge: EdgeId, offset: f64) -> Self {
        GraphPoint { edge, offset }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is not a loop")]
    NotALoop(EdgeId),
    #[error("offset {offset} outside the open interval (0, {length}) of edge {edge}")]
    OffsetOutOfRange { edge: EdgeId, offset: f64, length: f64 },
    #[error("vertex {0} is Dirichlet; operation requires a standard vertex")]
    DirichletVertex(VertexId),
    #[error("vertex {vertex} has degree {degree}; operation requires degree 1")]
    DegreeNotOne { vertex: VertexId, degree: usize },
    #[error("pendant graph must have no Dirichlet vertices")]
    PendantHasDirichlet,
    #[error("scale/lengthen factor must be positive, got {0}")]
    NonPositiveAmount(f64),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("graph file: {0}")]
    Parse(String),
}

/// Result of checking the standing assumptions; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.problems.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.problems.join("; "))
        }
    }
}

/// A compact finite metric graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<VertexKind>,
    edges: Vec<Edge>,
}

impl MetricGraph {
    /// Build a graph from vertex kinds and `(u, v, length)` triples. Edge
    /// ids are assigned in order. Panics only on out-of-range endpoints;
    /// semantic validity is checked separately by [`MetricGraph::validate`].
    pub fn new(vertices: Vec<VertexKind>, edge_list: Vec<(usize, usize, f64)>) -> Self {
        let n = vertices.len();
        let edges = edge_list
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, length))| {
                assert!(u < n && v < n, "edge endpoint out of range");
                Edge {
                    id: EdgeId(i),
                    endpoints: (VertexId(u), VertexId(v)),
                    length,
                }
            })
            .collect();
        MetricGraph { vertices, edges }
    }

    /// Interval `[0, length]`; `dirichlet_ends` marks endpoint 0 and/or 1.
    pub fn interval(length: f64, dirichlet_ends: (bool, bool)) -> Self {
        let kind = |d: bool| if d { VertexKind::Dirichlet } else { VertexKind::Standard };
        MetricGraph::new(
            vec![kind(dirichlet_ends.0), kind(dirichlet_ends.1)],
            vec![(0, 1, length)],
        )
    }

    /// Equilateral star: `arms` edges of length `arm_length` around a
    /// standard center (vertex 0); `dirichlet_leaves` of the outer vertices
    /// are Dirichlet, the rest standard.
    pub fn star(arms: usize, arm_length: f64, dirichlet_leaves: usize) -> Self {
        assert!(dirichlet_leaves <= arms);
        let mut vertices = vec![VertexKind::Standard];
        let mut edges = Vec::new();
        for i in 0..arms {
            vertices.push(if i < dirichlet_leaves {
                VertexKind::Dirichlet
            } else {
                VertexKind::Standard
            });
            edges.push((0, i + 1, arm_length));
        }
        MetricGraph::new(vertices, edges)
    }

    /// Lasso: pendant edge of length `pendant` from a Dirichlet vertex 0 to
    /// a standard vertex 1 carrying a loop of length `loop_len`.
    pub fn lasso(pendant: f64, loop_len: f64) -> Self {
        MetricGraph::new(
            vec![VertexKind::Dirichlet, VertexKind::Standard],
            vec![(0, 1, pendant), (1, 1, loop_len)],
        )
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge, GraphError> {
        self.edges.get(e.0).ok_or(GraphError::UnknownEdge(e))
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, VertexKind)> + '_ {
        self.vertices.iter().enumerate().map(|(i, &k)| (VertexId(i), k))
    }

    pub fn dirichlet_vertices(&self) -> Vec<VertexId> {
        self.vertices()
            .filter(|&(_, k)| k == VertexKind::Dirichlet)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn num_dirichlet(&self) -> usize {
        self.vertices.iter().filter(|&&k| k == VertexKind::Dirichlet).count()
    }

    /// Total volume `|G| = Σ ℓ_e`.
    pub fn volume(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Minimal edge length.
    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Maximal vertex degree (a loop counts twice at its base vertex).
    pub fn max_degree(&self) -> usize {
        (0..self.vertices.len())
            .map(|v| self.degree(VertexId(v)).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Number of incident edge ends at `v`; loops contribute 2.
    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        if v.0 >= self.vertices.len() {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(self
            .edges
            .iter()
            .map(|e| (e.endpoints.0 == v) as usize + (e.endpoints.1 == v) as usize)
            .sum())
    }

    /// Check the standing assumptions; returns every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        if self.vertices.is_empty() {
            problems.push("graph has no vertices".to_string());
        }
        if self.edges.is_empty() {
            problems.push("graph has no edges".to_string());
        }
        for e in &self.edges {
            if !(e.length > 0.0) || !e.length.is_finite() {
                problems.push(format!("edge {}: length must be positive and finite", e.id));
            }
        }
        let dirichlet: Vec<VertexId> = self.dirichlet_vertices();
        if dirichlet.is_empty() {
            problems.push("Dirichlet vertex set is empty".to_string());
        }
        for &v in &dirichlet {
            let d = self.degree(v).unwrap_or(0);
            if d != 1 {
                problems.push(format!("Dirichlet vertex {v} has degree {d}, expected 1"));
            }
        }
        for (v, kind) in self.vertices() {
            if kind == VertexKind::Standard && self.degree(v).unwrap_or(0) == 0 {
                problems.push(format!("standard vertex {v} is isolated"));
            }
        }
        // connectivity of the whole graph implies connectivity of G \ V_D
        // whenever all Dirichlet vertices have degree 1
        if !self.edges.is_empty() && !self.is_connected() {
            problems.push("graph minus Dirichlet set is not connected".to_string());
        }
        ValidationReport { problems }
    }

    /// Error out unless the graph satisfies every standing assumption.
    pub fn ensure_valid(&self) -> Result<(), GraphError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(GraphError::InvalidGraph(report))
        }
    }

    /// Like [`MetricGraph::validate`] but without requiring a nonempty
    /// Dirichlet set; the heat kernel and boundary flux remain well defined
    /// for an empty boundary.
    pub(crate) fn ensure_valid_kernel_domain(&self) -> Result<(), GraphError> {
        let report = self.validate();
        let residual: Vec<String> = report
            .problems
            .into_iter()
            .filter(|p| p != "Dirichlet vertex set is empty")
            .collect();
        if residual.is_empty() {
            Ok(())
        } else {
            Err(GraphError::InvalidGraph(ValidationReport { problems: residual }))
        }
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.endpoints.0 .0, e.endpoints.1 .0), (e.endpoints.1 .0, e.endpoints.0 .0)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    fn check_offset_interior(&self, e: EdgeId, offset: f64) -> Result<&Edge, GraphError> {
        let edge = self.edge(e)?;
        if offset <= 0.0 || offset >= edge.length {
            return Err(GraphError::OffsetOutOfRange {
                edge: e,
                offset,
                length: edge.length,
            });
        }
        Ok(edge)
    }

    /// Insert a standard degree-2 vertex at an interior point of an edge.
    /// Volume, spectrum and heat content are unchanged.
    pub fn subdivide(&self, e: EdgeId, offset: f64) -> Result<MetricGraph, GraphError> {
        let edge = self.check_offset_interior(e, offset)?.clone();
        let mut vertices = self.vertices.clone();
        let new_v = vertices.len();
        vertices.push(VertexKind::Standard);
        let mut edge_list: Vec<(usize, usize, f64)> = Vec::with_capacity(self.edges.len() + 1);
        for old in &self.edges {
            if old.id == e {
                edge_list.push((old.endpoints.0 .0, new_v, offset));
                edge_list.push((new_v, old.endpoints.1 .0, edge.length - offset));
            } else {
                edge_list.push((old.endpoints.0 .0, old.endpoints.1 .0, old.length));
            }
        }
        Ok(MetricGraph::new(vertices, edge_list))
    }

    /// Merge edges across every standard degree-2 vertex. Idempotent and
    /// volume preserving. A standard degree-2 vertex whose two edge ends
    /// belong to the same edge (an isolated cycle) is left untouched; such a
    /// component cannot carry a Dirichlet vertex and fails validation anyway.
    pub fn suppress_degree_two(&self) -> MetricGraph {
        let mut g = self.clone();
        'outer: loop {
            for v in 0..g.vertices.len() {
                let vid = VertexId(v);
                if g.vertices[v] != VertexKind::Standard {
                    continue;
                }
                // degree counts edge ends; a loop contributes two
                if g.degree(vid).unwrap_or(0) != 2 {
                    continue;
                }
                let incident: Vec<usize> = g
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.endpoints.0 == vid || e.endpoints.1 == vid)
                    .map(|(i, _)| i)
                    .collect();
                if incident.len() != 2 {
                    continue; // an isolated cycle; cannot carry a Dirichlet vertex
                }
                let (i1, i2) = (incident[0], incident[1]);
                let other = |e: &Edge| if e.endpoints.0 == vid { e.endpoints.1 } else { e.endpoints.0 };
                let (a, b) = (other(&g.edges[i1]), other(&g.edges[i2]));
                let merged = g.edges[i1].length + g.edges[i2].length;
                let mut vertices = g.vertices.clone();
                vertices.remove(v);
                let remap = |w: VertexId| VertexId(if w.0 > v { w.0 - 1 } else { w.0 });
                let mut edge_list = Vec::with_capacity(g.edges.len() - 1);
                for (i, e) in g.edges.iter().enumerate() {
                    if i == i1 || i == i2 {
                        continue;
                    }
                    edge_list.push((remap(e.endpoints.0).0, remap(e.endpoints.1).0, e.length));
                }
                edge_list.push((remap(a).0, remap(b).0, merged));
                g = MetricGraph::new(vertices, edge_list);
                continue 'outer;
            }
            break;
        }
        g
    }

    /// Replace a loop of length `ℓ` by two pendant edges of length `ℓ/2`
    /// ending at fresh standard degree-1 vertices. Heat-content preserving.
    pub fn midpoint_loop_cut(&self, e: EdgeId) -> Result<MetricGraph, GraphError> {
        let edge = self.edge(e)?;
        if edge.endpoints.0 != edge.endpoints.1 {
            return Err(GraphError::NotALoop(e));
        }
        let base = edge.endpoints.0;
        let half = edge.length / 2.0;
        let mut vertices = self.vertices.clone();
        let v1 = vertices.len();
        vertices.push(VertexKind::Standard);
        let v2 = vertices.len();
        vertices.push(VertexKind::Standard);
        let mut edge_list = Vec::with_capacity(self.edges.len() + 1);
        for old in &self.edges {
            if old.id == e {
                edge_list.push((base.0, v1, half));
                edge_list.push((base.0, v2, half));
            } else {
                edge_list.push((old.endpoints.0 .0, old.endpoints.1 .0, old.length));
            }
        }
        Ok(MetricGraph::new(vertices, edge_list))
    }

    /// `m`-fold mirrored graph: `m` disjoint copies glued along the copies
    /// of each vertex in `reflection_set`. Degrees at glued vertices
    /// multiply by `m`; volume and Dirichlet count multiply by `m`.
    pub fn mirror(&self, reflection_set: &[VertexId], m: usize) -> Result<MetricGraph, GraphError> {
        assert!(m >= 1, "mirror multiplicity must be at least 1");
        let set: BTreeSet<VertexId> = reflection_set.iter().copied().collect();
        for &v in &set {
            if v.0 >= self.vertices.len() {
                return Err(GraphError::UnknownVertex(v));
            }
            if self.vertices[v.0] == VertexKind::Dirichlet {
                return Err(GraphError::DirichletVertex(v));
            }
        }
        // shared vertices first, then per-copy blocks of the rest
        let shared: Vec<VertexId> = set.iter().copied().collect();
        let shared_index: BTreeMap<VertexId, usize> =
            shared.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let free: Vec<VertexId> = (0..self.vertices.len())
            .map(VertexId)
            .filter(|v| !set.contains(v))
            .collect();
        let free_index: BTreeMap<VertexId, usize> =
            free.iter().enumerate().map(|(i, &v)| (v, i)).collect();

        let mut vertices = Vec::new();
        for &v in &shared {
            vertices.push(self.vertices[v.0]);
        }
        for _copy in 0..m {
            for &v in &free {
                vertices.push(self.vertices[v.0]);
            }
        }
        let map = |v: VertexId, copy: usize| -> usize {
            if let Some(&i) = shared_index.get(&v) {
                i
            } else {
                shared.len() + copy * free.len() + free_index[&v]
            }
        };
        let mut edge_list = Vec::with_capacity(m * self.edges.len());
        for copy in 0..m {
            for e in &self.edges {
                edge_list.push((map(e.endpoints.0, copy), map(e.endpoints.1, copy), e.length));
            }
        }
        Ok(MetricGraph::new(vertices, edge_list))
    }

    /// Glue `pendant_root` of a Dirichlet-free pendant graph onto the
    /// standard vertex `at`. Raises the heat content at every time.
    pub fn attach_pendant(
        &self,
        at: VertexId,
        pendant: &MetricGraph,
        pendant_root: VertexId,
    ) -> Result<MetricGraph, GraphError> {
        if at.0 >= self.vertices.len() {
            return Err(GraphError::UnknownVertex(at));
        }
        if self.vertices[at.0] == VertexKind::Dirichlet {
            return Err(GraphError::DirichletVertex(at));
        }
        if pendant_root.0 >= pendant.vertices.len() {
            return Err(GraphError::UnknownVertex(pendant_root));
        }
        if pendant.vertices.contains(&VertexKind::Dirichlet) {
            return Err(GraphError::PendantHasDirichlet);
        }
        let mut vertices = self.vertices.clone();
        let mut map = vec![usize::MAX; pendant.vertices.len()];
        map[pendant_root.0] = at.0;
        for (i, &k) in pendant.vertices.iter().enumerate() {
            if i != pendant_root.0 {
                map[i] = vertices.len();
                vertices.push(k);
            }
        }
        let mut edge_list: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .map(|e| (e.endpoints.0 .0, e.endpoints.1 .0, e.length))
            .collect();
        for e in &pendant.edges {
            edge_list.push((map[e.endpoints.0 .0], map[e.endpoints.1 .0], e.length));
        }
        Ok(MetricGraph::new(vertices, edge_list))
    }

    /// Impose a Dirichlet condition at a standard degree-1 vertex. The
    /// result is returned componentwise; the heat content of the list is the
    /// sum over components.
    pub fn add_dirichlet(&self, v: VertexId) -> Result<Vec<MetricGraph>, GraphError> {
        if v.0 >= self.vertices.len() {
            return Err(GraphError::UnknownVertex(v));
        }
        if self.vertices[v.0] == VertexKind::Dirichlet {
            return Err(GraphError::DirichletVertex(v));
        }
        let d = self.degree(v)?;
        if d != 1 {
            return Err(GraphError::DegreeNotOne { vertex: v, degree: d });
        }
        let mut g = self.clone();
        g.vertices[v.0] = VertexKind::Dirichlet;
        Ok(g.components())
    }

    /// Impose a Dirichlet condition at an interior edge point by splitting
    /// the point into two degree-1 Dirichlet vertices. May disconnect the
    /// graph; the components are returned individually.
    pub fn add_dirichlet_at(&self, e: EdgeId, offset: f64) -> Result<Vec<MetricGraph>, GraphError> {
        let edge = self.check_offset_interior(e, offset)?.clone();
        let mut vertices = self.vertices.clone();
        let d1 = vertices.len();
        vertices.push(VertexKind::Dirichlet);
        let d2 = vertices.len();
        vertices.push(VertexKind::Dirichlet);
        let mut edge_list = Vec::with_capacity(self.edges.len() + 1);
        for old in &self.edges {
            if old.id == e {
                edge_list.push((old.endpoints.0 .0, d1, offset));
                edge_list.push((d2, old.endpoints.1 .0, edge.length - offset));
            } else {
                edge_list.push((old.endpoints.0 .0, old.endpoints.1 .0, old.length));
            }
        }
        Ok(MetricGraph::new(vertices, edge_list).components())
    }

    /// Connected components, with dense renumbering.
    pub fn components(&self) -> Vec<MetricGraph> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(v) = stack.pop() {
                for e in &self.edges {
                    for (a, b) in [(e.endpoints.0 .0, e.endpoints.1 .0), (e.endpoints.1 .0, e.endpoints.0 .0)] {
                        if a == v && comp[b] == usize::MAX {
                            comp[b] = count;
                            stack.push(b);
                        }
                    }
                }
            }
            count += 1;
        }
        (0..count)
            .map(|c| {
                let mut map = BTreeMap::new();
                let mut vertices = Vec::new();
                for v in 0..n {
                    if comp[v] == c {
                        map.insert(v, vertices.len());
                        vertices.push(self.vertices[v]);
                    }
                }
                let edge_list = self
                    .edges
                    .iter()
                    .filter(|e| comp[e.endpoints.0 .0] == c)
                    .map(|e| (map[&e.endpoints.0 .0], map[&e.endpoints.1 .0], e.length))
                    .collect();
                MetricGraph::new(vertices, edge_list)
            })
            .collect()
    }

    /// Same topology with `ℓ_e ↦ ℓ_e + s`.
    pub fn lengthen_edge(&self, e: EdgeId, s: f64) -> Result<MetricGraph, GraphError> {
        if !(s > 0.0) {
            return Err(GraphError::NonPositiveAmount(s));
        }
        self.edge(e)?;
        let mut g = self.clone();
        g.edges[e.0].length += s;
        Ok(g)
    }

    /// Every edge length multiplied by `s`.
    pub fn scale(&self, s: f64) -> Result<MetricGraph, GraphError> {
        if !(s > 0.0) {
            return Err(GraphError::NonPositiveAmount(s));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length *= s;
        }
        Ok(g)
    }

    /// Geodesic distance between two points: the direct within-edge segment
    /// (when both points share an edge) against all routes through the
    /// endpoint vertices, with vertex-to-vertex distances from Dijkstra.
    pub fn shortest_distance(&self, x: GraphPoint, y: GraphPoint) -> Result<f64, GraphError> {
        let ex = self.edge(x.edge)?;
        let ey = self.edge(y.edge)?;
        for (p, e) in [(x, ex), (y, ey)] {
            if p.offset < 0.0 || p.offset > e.length {
                return Err(GraphError::OffsetOutOfRange {
                    edge: p.edge,
                    offset: p.offset,
                    length: e.length,
                });
            }
        }
        let mut best = if x.edge == y.edge {
            (x.offset - y.offset).abs()
        } else {
            f64::INFINITY
        };
        let dist_from = |v: VertexId| self.vertex_distances(v);
        let dx0 = dist_from(ex.endpoints.0);
        let dx1 = dist_from(ex.endpoints.1);
        for (px, dv) in [(x.offset, &dx0), (ex.length - x.offset, &dx1)] {
            for (py, w) in [(y.offset, ey.endpoints.0), (ey.length - y.offset, ey.endpoints.1)] {
                let via = px + dv[w.0] + py;
                if via < best {
                    best = via;
                }
            }
        }
        Ok(best)
    }

    /// Single-source Dijkstra over vertices.
    fn vertex_distances(&self, source: VertexId) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                other.0.partial_cmp(&self.0).unwrap()
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        dist[source.0] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, source.0));
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for e in &self.edges {
                for (a, b) in [(e.endpoints.0 .0, e.endpoints.1 .0), (e.endpoints.1 .0, e.endpoints.0 .0)] {
                    if a == v && d + e.length < dist[b] {
                        dist[b] = d + e.length;
                        heap.push(Item(dist[b], b));
                    }
                }
            }
        }
        dist
    }

    /// Structural equality up to relabeling, decided on the degree-2
    /// suppressed forms by a backtracking matcher. Lengths compare within
    /// `1e-9` absolute. Intended for desk-scale graphs.
    pub fn same_shape(&self, other: &MetricGraph) -> bool {
        let a = self.suppress_degree_two();
        let b = other.suppress_degree_two();
        if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
            return false;
        }
        let sig = |g: &MetricGraph, v: usize| -> (VertexKind, usize, Vec<i64>) {
            let vid = VertexId(v);
            let mut lens: Vec<i64> = g
                .edges
                .iter()
                .flat_map(|e| {
                    let mut out = Vec::new();
                    if e.endpoints.0 == vid {
                        out.push((e.length / 1e-9).round() as i64);
                    }
                    if e.endpoints.1 == vid {
                        out.push((e.length / 1e-9).round() as i64);
                    }
                    out
                })
                .collect();
            lens.sort_unstable();
            (g.vertices[v], lens.len(), lens)
        };
        let mut sig_a: Vec<_> = (0..a.vertices.len()).map(|v| sig(&a, v)).collect();
        let mut sig_b: Vec<_> = (0..b.vertices.len()).map(|v| sig(&b, v)).collect();
        {
            let mut sa = sig_a.clone();
            let mut sb = sig_b.clone();
            sa.sort();
            sb.sort();
            if sa != sb {
                return false;
            }
        }
        // edge-length multiset between a mapped vertex pair must agree
        fn pair_lens(g: &MetricGraph, u: usize, v: usize) -> Vec<i64> {
            let mut out: Vec<i64> = g
                .edges
                .iter()
                .filter(|e| {
                    let (p, q) = (e.endpoints.0 .0, e.endpoints.1 .0);
                    (p == u && q == v) || (p == v && q == u)
                })
                .map(|e| (e.length / 1e-9).round() as i64)
                .collect();
            out.sort_unstable();
            out
        }
        fn backtrack(
            a: &MetricGraph,
            b: &MetricGraph,
            sig_a: &[(VertexKind, usize, Vec<i64>)],
            sig_b: &[(VertexKind, usize, Vec<i64>)],
            map: &mut Vec<Option<usize>>,
            used: &mut Vec<bool>,
            v: usize,
        ) -> bool {
            if v == a.vertices.len() {
                return true;
            }
            for w in 0..b.vertices.len() {
                if used[w] || sig_a[v] != sig_b[w] {
                    continue;
                }
                let mut ok = true;
                for u in 0..v {
                    let mu = map[u].unwrap();
                    if pair_lens(a, u, v) != pair_lens(b, mu, w) {
                        ok = false;
                        break;
                    }
                }
                if ok && pair_lens(a, v, v) == pair_lens(b, w, w) {
                    map[v] = Some(w);
                    used[w] = true;
                    if backtrack(a, b, sig_a, sig_b, map, used, v + 1) {
                        return true;
                    }
                    map[v] = None;
                    used[w] = false;
                }
            }
            false
        }
        let mut map = vec![None; a.vertices.len()];
        let mut used = vec![false; b.vertices.len()];
        sig_a.shrink_to_fit();
        sig_b.shrink_to_fit();
        backtrack(&a, &b, &sig_a, &sig_b, &mut map, &mut used, 0)
    }

    /// Parse the JSON graph format and reject anything that fails
    /// validation. Syntax errors carry the line/column from the parser.
    pub fn from_json_str(s: &str) -> Result<MetricGraph, GraphError> {
        let g = Self::from_json_str_unvalidated(s)?;
        let report = g.validate();
        if !report.is_ok() {
            return Err(GraphError::Parse(format!("validation failed: {report}")));
        }
        Ok(g)
    }

    /// Parse with structural checks only (ids dense, endpoints in range,
    /// lengths positive). Needed for pendant graphs, which legitimately
    /// carry no Dirichlet vertex.
    pub fn from_json_str_unvalidated(s: &str) -> Result<MetricGraph, GraphError> {
        let file: GraphFile = serde_json::from_str(s)
            .map_err(|e| GraphError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let n = file.vertices.len();
        let mut kinds = vec![None; n];
        for v in &file.vertices {
            if v.id >= n {
                return Err(GraphError::Parse(format!(
                    "vertex id {} out of range; ids must be dense 0..{}",
                    v.id,
                    n - 1
                )));
            }
            if kinds[v.id].replace(v.kind).is_some() {
                return Err(GraphError::Parse(format!("duplicate vertex id {}", v.id)));
            }
        }
        let vertices: Vec<VertexKind> = kinds
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| GraphError::Parse("vertex ids must be dense 0-based".to_string()))?;
        let m = file.edges.len();
        let mut slots: Vec<Option<(usize, usize, f64)>> = vec![None; m];
        for e in &file.edges {
            if e.id >= m {
                return Err(GraphError::Parse(format!(
                    "edge id {} out of range; ids must be dense 0..{}",
                    e.id,
                    m.saturating_sub(1)
                )));
            }
            if e.u >= n || e.v >= n {
                return Err(GraphError::Parse(format!("edge {}: endpoint out of range", e.id)));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(GraphError::Parse(format!(
                    "edge {}: length must be positive and finite, got {}",
                    e.id, e.length
                )));
            }
            if slots[e.id].replace((e.u, e.v, e.length)).is_some() {
                return Err(GraphError::Parse(format!("duplicate edge id {}", e.id)));
            }
        }
        let edge_list: Vec<(usize, usize, f64)> = slots
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| GraphError::Parse("edge ids must be dense 0-based".to_string()))?;
        Ok(MetricGraph::new(vertices, edge_list))
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            vertices: self
                .vertices()
                .map(|(v, kind)| VertexRec { id: v.0, kind })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRec {
                    id: e.id.0,
                    u: e.endpoints.0 .0,
                    v: e.endpoints.1 .0,
                    length: e.length,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRec {
    id: usize,
    kind: VertexKind,
}

#[derive(Serialize, Deserialize)]
struct EdgeRec {
    id: usize,
    u: usize,
    v: usize,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<VertexRec>,
    edges: Vec<EdgeRec>,
}

/// A closed region: a union of edge sub-intervals, connected, away from the
/// Dirichlet set, with all boundary points strictly inside edges.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    /// `(edge, a, b)` with `0 <= a < b <= length`.
    pub intervals: Vec<(EdgeId, f64, f64)>,
}

impl RegionSpec {
    pub fn new(intervals: Vec<(EdgeId, f64, f64)>) -> Self {
        RegionSpec { intervals }
    }

    /// Boundary points of the region: interval ends strictly inside edges.
    pub fn boundary_points(&self, graph: &MetricGraph) -> Result<Vec<GraphPoint>, GraphError> {
        self.check(graph)?;
        let mut out = Vec::new();
        for &(e, a, b) in &self.intervals {
            let len = graph.edge(e)?.length;
            if a > 0.0 {
                out.push(GraphPoint::new(e, a));
            }
            if b < len {
                out.push(GraphPoint::new(e, b));
            }
        }
        Ok(out)
    }

    /// Validate the region invariants against a graph.
    pub fn check(&self, graph: &MetricGraph) -> Result<(), GraphError> {
        let fail = |msg: String| Err(GraphError::InvalidRegion(msg));
        if self.intervals.is_empty() {
            return fail("region is empty".to_string());
        }
        let mut per_edge: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
        for &(e, a, b) in &self.intervals {
            let edge = graph.edge(e)?;
            if !(a >= 0.0 && b <= edge.length && a < b) {
                return fail(format!(
                    "interval {a}:{b} on edge {e} not a positive sub-interval of [0, {}]",
                    edge.length
                ));
            }
            per_edge.entry(e.0).or_default().push((a, b));
        }
        for (e, list) in per_edge.iter_mut() {
            list.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            for w in list.windows(2) {
                if w[0].1 >= w[1].0 {
                    return fail(format!("intervals on edge {e} overlap or touch"));
                }
            }
        }
        // a vertex is covered when some interval end reaches its coordinate;
        // covered vertices must have every incident edge end covered,
        // otherwise a boundary point would sit on a vertex
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for &(e, a, b) in &self.intervals {
            let edge = graph.edge(e)?;
            if a == 0.0 {
                covered.insert(edge.endpoints.0 .0);
            }
            if b == edge.length {
                covered.insert(edge.endpoints.1 .0);
            }
        }
        for &v in &covered {
            if graph.vertex_kind(VertexId(v)) == VertexKind::Dirichlet {
                return fail(format!("region touches Dirichlet vertex {v}"));
            }
            for edge in graph.edges() {
                for (end_vertex, is_zero_end) in
                    [(edge.endpoints.0 .0, true), (edge.endpoints.1 .0, false)]
                {
                    if end_vertex != v {
                        continue;
                    }
                    let reached = self.intervals.iter().any(|&(e2, a, b)| {
                        e2 == edge.id && ((is_zero_end && a == 0.0) || (!is_zero_end && b == edge.length))
                    });
                    if !reached {
                        return fail(format!(
                            "boundary point at vertex {v}: edge {} end not covered",
                            edge.id
                        ));
                    }
                }
            }
        }
        // connectivity of the union: intervals adjacent through covered vertices
        let k = self.intervals.len();
        let mut adj = vec![vec![false; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let share = {
                    let touch = |idx: usize| -> BTreeSet<usize> {
                        let (e, a, b) = self.intervals[idx];
                        let edge = graph.edge(e).unwrap();
                        let mut s = BTreeSet::new();
                        if a == 0.0 {
                            s.insert(edge.endpoints.0 .0);
                        }
                        if b == edge.length {
                            s.insert(edge.endpoints.1 .0);
                        }
                        s
                    };
                    !touch(i).is_disjoint(&touch(j))
                };
                if share {
                    adj[i][j] = true;
                    adj[j][i] = true;
                }
            }
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                if adj[i][j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return fail("region is not connected".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval3() -> MetricGraph {
        MetricGraph::interval(3.0, (true, false))
    }

    #[test]
    fn validation_examples() {
        assert!(interval3().validate().is_ok());

        let both_standard = MetricGraph::interval(3.0, (false, false));
        let report = both_standard.validate();
        assert!(!report.is_ok());
        assert!(report.problems.iter().any(|p| p.contains("Dirichlet")));

        // 3-star with the Dirichlet condition at the center (degree 3)
        let bad_star = MetricGraph::new(
            vec![
                VertexKind::Dirichlet,
                VertexKind::Standard,
                VertexKind::Standard,
                VertexKind::Standard,
            ],
            vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
        );
        let report = bad_star.validate();
        assert!(report.problems.iter().any(|p| p.contains("degree 3")));
    }

    #[test]
    fn degrees_count_loops_twice() {
        let lasso = MetricGraph::lasso(1.0, 2.0);
        assert_eq!(lasso.degree(VertexId(1)).unwrap(), 3);
        assert_eq!(lasso.degree(VertexId(0)).unwrap(), 1);

        // isolated loop vertex: loop only
        let loop_only = MetricGraph::new(vec![VertexKind::Standard], vec![(0, 0, 2.0)]);
        assert_eq!(loop_only.degree(VertexId(0)).unwrap(), 2);
        assert!(lasso.degree(VertexId(9)).is_err());
    }

    #[test]
    fn subdivide_and_suppress_are_inverse() {
        let g = interval3();
        let split = g.subdivide(EdgeId(0), 1.0).unwrap();
        assert_eq!(split.num_edges(), 2);
        assert!((split.volume() - 3.0).abs() < 1e-15);
        let lens: Vec<f64> = split.edges().iter().map(|e| e.length).collect();
        assert!(lens.contains(&1.0) && lens.contains(&2.0));
        assert!(split.suppress_degree_two().same_shape(&g));

        // loop of length 2 split at 1 -> two parallel edges of length 1
        let loop_g = MetricGraph::new(
            vec![VertexKind::Dirichlet, VertexKind::Standard],
            vec![(0, 1, 1.0), (1, 1, 2.0)],
        );
        let split = loop_g.subdivide(EdgeId(1), 1.0).unwrap();
        assert_eq!(split.num_edges(), 3);
        let new_v = VertexId(2);
        let parallel: Vec<&Edge> = split
            .edges()
            .iter()
            .filter(|e| e.endpoints.0 == new_v || e.endpoints.1 == new_v)
            .collect();
        assert_eq!(parallel.len(), 2);
        assert!(parallel.iter().all(|e| e.length == 1.0 && e.endpoints.0 != e.endpoints.1));

        assert!(g.subdivide(EdgeId(0), 0.0).is_err());
        assert!(g.subdivide(EdgeId(0), 3.0).is_err());
    }

    #[test]
    fn suppress_is_idempotent_and_volume_preserving() {
        let g = interval3().subdivide(EdgeId(0), 0.7).unwrap().subdivide(EdgeId(0), 0.2).unwrap();
        let s1 = g.suppress_degree_two();
        let s2 = s1.suppress_degree_two();
        assert!(s1.same_shape(&s2));
        assert!((s1.volume() - 3.0).abs() < 1e-12);
        assert_eq!(s1.num_edges(), 1);
    }

    #[test]
    fn loop_cut_turns_lasso_into_three_star() {
        let lasso = MetricGraph::lasso(1.0, 2.0);
        let cut = lasso.midpoint_loop_cut(EdgeId(1)).unwrap();
        let star = MetricGraph::star(3, 1.0, 1);
        assert!(cut.same_shape(&star));
        assert!((cut.volume() - lasso.volume()).abs() < 1e-15);
        assert!(lasso.midpoint_loop_cut(EdgeId(0)).is_err());
    }

    #[test]
    fn loop_cut_then_suppress_on_figure_eight() {
        // pendant Dirichlet edge + two loops at the same standard vertex
        let fig8 = MetricGraph::new(
            vec![VertexKind::Dirichlet, VertexKind::Standard],
            vec![(0, 1, 0.5), (1, 1, 1.0), (1, 1, 1.5)],
        );
        let cut = fig8.midpoint_loop_cut(EdgeId(1)).unwrap();
        assert!(cut.validate().is_ok());
        // 4-star with arms 0.5, 0.5, 0.5 plus remaining loop 1.5
        assert_eq!(cut.num_edges(), 4);
        assert_eq!(cut.degree(VertexId(1)).unwrap(), 5);
        let full = cut.midpoint_loop_cut(EdgeId(3)).unwrap().suppress_degree_two();
        // all loops cut: a 5-star with arms .5,.5,.5,.75,.75
        assert_eq!(full.max_degree(), 5);
        assert_eq!(full.num_edges(), 5);
    }

    #[test]
    fn mirror_bookkeeping() {
        // interval [0, l], Dirichlet at 0, mirrored at the standard end
        let g = MetricGraph::interval(1.5, (true, false));
        let m3 = g.mirror(&[VertexId(1)], 3).unwrap();
        assert!(m3.validate().is_ok());
        assert!((m3.volume() - 3.0 * g.volume()).abs() < 1e-15);
        assert_eq!(m3.num_dirichlet(), 3 * g.num_dirichlet());
        assert!(m3.same_shape(&MetricGraph::star(3, 1.5, 3)));

        let m1 = g.mirror(&[VertexId(1)], 1).unwrap();
        assert!(m1.same_shape(&g));

        assert!(g.mirror(&[VertexId(0)], 2).is_err());
    }

    #[test]
    fn mirror_path_middle_gives_pumpkin_chain() {
        // path D - a - b - N, mirrored twice at {a, b}: the middle edge
        // doubles into a 2-pumpkin, the outer edges stay pendant
        let path = MetricGraph::new(
            vec![
                VertexKind::Dirichlet,
                VertexKind::Standard,
                VertexKind::Standard,
                VertexKind::Standard,
            ],
            vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
        );
        let m2 = path.mirror(&[VertexId(1), VertexId(2)], 2).unwrap();
        assert!(m2.validate().is_ok());
        assert_eq!(m2.num_edges(), 6);
        assert_eq!(m2.num_dirichlet(), 2);
        // the two glued vertices have degree 2*2 = 4
        let degrees: Vec<usize> = (0..m2.num_vertices())
            .map(|v| m2.degree(VertexId(v)).unwrap())
            .collect();
        assert_eq!(degrees.iter().filter(|&&d| d == 4).count(), 2);
    }

    #[test]
    fn attach_pendant_rules() {
        let g = MetricGraph::interval(2.0, (true, false));
        let pendant = MetricGraph::new(vec![VertexKind::Standard, VertexKind::Standard], vec![(0, 1, 0.5)]);
        let bigger = g.attach_pendant(VertexId(1), &pendant, VertexId(0)).unwrap();
        assert!(bigger.validate().is_ok());
        assert!((bigger.volume() - 2.5).abs() < 1e-15);

        assert!(g.attach_pendant(VertexId(0), &pendant, VertexId(0)).is_err());
        let dirichlet_pendant = MetricGraph::interval(0.5, (true, false));
        assert!(g
            .attach_pendant(VertexId(1), &dirichlet_pendant, VertexId(1))
            .is_err());
    }

    #[test]
    fn add_dirichlet_marks_and_splits() {
        let g = interval3();
        let marked = g.add_dirichlet(VertexId(1)).unwrap();
        assert_eq!(marked.len(), 1);
        assert_eq!(marked[0].num_dirichlet(), 2);

        // splitting the interior of the interval disconnects it
        let parts = g.add_dirichlet_at(EdgeId(0), 1.0).unwrap();
        assert_eq!(parts.len(), 2);
        let mut vols: Vec<f64> = parts.iter().map(|p| p.volume()).collect();
        vols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vols[0] - 1.0).abs() < 1e-15 && (vols[1] - 2.0).abs() < 1e-15);

        // a loop interior split does not disconnect the lasso
        let lasso = MetricGraph::lasso(1.0, 2.0);
        let parts = lasso.add_dirichlet_at(EdgeId(1), 0.5).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].num_dirichlet(), 3);
    }

    #[test]
    fn distances() {
        let g = interval3();
        let d = g
            .shortest_distance(GraphPoint::new(EdgeId(0), 0.2), GraphPoint::new(EdgeId(0), 0.7))
            .unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        let same = g
            .shortest_distance(GraphPoint::new(EdgeId(0), 1.1), GraphPoint::new(EdgeId(0), 1.1))
            .unwrap();
        assert_eq!(same, 0.0);

        // loop of length 2: offsets 0.1 and 1.9 are 0.2 apart the short way
        let lasso = MetricGraph::lasso(1.0, 2.0);
        let d = lasso
            .shortest_distance(GraphPoint::new(EdgeId(1), 0.1), GraphPoint::new(EdgeId(1), 1.9))
            .unwrap();
        assert!((d - 0.2).abs() < 1e-15, "got {d}");
    }

    #[test]
    fn region_validation() {
        // star edges run from the center (vertex 0, offset 0) to the leaves
        let star = MetricGraph::star(3, 3.0, 1);
        let mid_third = RegionSpec::new(vec![(EdgeId(1), 1.0, 2.0)]);
        assert!(mid_third.check(&star).is_ok());
        assert_eq!(mid_third.boundary_points(&star).unwrap().len(), 2);

        // a region reaching the standard leaf of its arm is fine
        let with_leaf = RegionSpec::new(vec![(EdgeId(1), 1.0, 3.0)]);
        assert!(with_leaf.check(&star).is_ok());
        assert_eq!(with_leaf.boundary_points(&star).unwrap().len(), 1);

        // covering the center requires covering all three edge ends there
        let center_partial = RegionSpec::new(vec![(EdgeId(1), 0.0, 1.0)]);
        assert!(center_partial.check(&star).is_err());
        let center_full = RegionSpec::new(vec![
            (EdgeId(0), 0.0, 1.0),
            (EdgeId(1), 0.0, 1.0),
            (EdgeId(2), 0.0, 1.0),
        ]);
        assert!(center_full.check(&star).is_ok());
        assert_eq!(center_full.boundary_points(&star).unwrap().len(), 3);

        // touching the Dirichlet leaf (end of edge 0) is forbidden
        let touches_dirichlet = RegionSpec::new(vec![
            (EdgeId(0), 0.0, 3.0),
            (EdgeId(1), 0.0, 1.0),
            (EdgeId(2), 0.0, 1.0),
        ]);
        assert!(touches_dirichlet.check(&star).is_err());

        // disconnected region
        let disconnected = RegionSpec::new(vec![(EdgeId(1), 0.5, 1.0), (EdgeId(2), 0.5, 1.0)]);
        assert!(disconnected.check(&star).is_err());

        // overlap
        let overlap = RegionSpec::new(vec![(EdgeId(1), 0.5, 1.5), (EdgeId(1), 1.0, 2.0)]);
        assert!(overlap.check(&star).is_err());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let s = g.to_json_string();
        let back = MetricGraph::from_json_str(&s).unwrap();
        assert!(back.same_shape(&g));

        let bad = r#"{"vertices":[{"id":0,"kind":"standard"},{"id":1,"kind":"standard"}],
                      "edges":[{"id":0,"u":0,"v":1,"length":1.0}]}"#;
        let err = MetricGraph::from_json_str(bad).unwrap_err();
        assert!(err.to_string().contains("Dirichlet"));

        let negative = r#"{"vertices":[{"id":0,"kind":"dirichlet"},{"id":1,"kind":"standard"}],
                           "edges":[{"id":0,"u":0,"v":1,"length":-2.0}]}"#;
        assert!(MetricGraph::from_json_str(negative).is_err());

        let syntax = "{ not json";
        let err = MetricGraph::from_json_str(syntax).unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn scale_and_lengthen() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let s = g.scale(2.0).unwrap();
        assert!((s.volume() - 6.0).abs() < 1e-15);
        let l = g.lengthen_edge(EdgeId(0), 0.5).unwrap();
        assert!((l.volume() - 3.5).abs() < 1e-15);
        assert!(g.scale(0.0).is_err());
        assert!(g.lengthen_edge(EdgeId(0), -1.0).is_err());
    }
}
