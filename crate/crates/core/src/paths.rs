//! Directed paths on a metric graph and their scattering coefficients.
//!
//! Every edge yields two *bonds* (oriented copies); a directed path is a
//! sequence of consecutive bonds. Each interior vertex `u` of a path
//! contributes a factor
//!
//! ```text
//! β = −1                          if u is Dirichlet,
//! β = 2/deg(u) − [reflection]     otherwise,
//! ```
//!
//! and the product of these factors is the scattering coefficient
//! `α(p) ∈ [−1, 1]` (equal to 1 for paths of at most one bond). A
//! reflection means continuing with the reversal of the incoming bond; for
//! a loop the reversal is the opposite orientation of the same loop edge,
//! so running around a loop again in the same direction is a transfer.
//!
//! [`enumerate`] expands paths best-first by metric length, so they emerge
//! in non-decreasing length order and evaluators can stop at a certified
//! point. Partial paths whose next factor is 0 (reflection at a standard
//! degree-2 vertex) are pruned: their extensions all carry factor 0.

use crate::graph::{EdgeId, GraphError, MetricGraph, VertexId, VertexKind};
use std::collections::BinaryHeap;

/// Orientation of a bond relative to the stored edge endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// From endpoint 0 towards endpoint `length`.
    Forward,
    /// From endpoint `length` towards endpoint 0.
    Backward,
}

/// A directed edge. The two bonds of a loop are distinct: they represent
/// the two senses of running around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub edge: EdgeId,
    pub direction: Direction,
}

impl Bond {
    pub fn forward(edge: EdgeId) -> Self {
        Bond { edge, direction: Direction::Forward }
    }

    pub fn backward(edge: EdgeId) -> Self {
        Bond { edge, direction: Direction::Backward }
    }

    /// Dense index in `0..2·#E`: edge-major, forward first.
    pub fn index(&self) -> usize {
        2 * self.edge.0 + matches!(self.direction, Direction::Backward) as usize
    }

    pub fn from_index(i: usize) -> Self {
        Bond {
            edge: EdgeId(i / 2),
            direction: if i.is_multiple_of(2) { Direction::Forward } else { Direction::Backward },
        }
    }

    /// Initial vertex `∂⁻`.
    pub fn tail(&self, graph: &MetricGraph) -> VertexId {
        let e = &graph.edges()[self.edge.0];
        match self.direction {
            Direction::Forward => e.endpoints.0,
            Direction::Backward => e.endpoints.1,
        }
    }

    /// Final vertex `∂⁺`.
    pub fn head(&self, graph: &MetricGraph) -> VertexId {
        let e = &graph.edges()[self.edge.0];
        match self.direction {
            Direction::Forward => e.endpoints.1,
            Direction::Backward => e.endpoints.0,
        }
    }

    pub fn reversed(&self) -> Bond {
        Bond {
            edge: self.edge,
            direction: match self.direction {
                Direction::Forward => Direction::Backward,
                Direction::Backward => Direction::Forward,
            },
        }
    }
}

/// Scattering factor for the transition `incoming → outgoing` at the vertex
/// `∂⁺(incoming)`. Errors if the bonds are not consecutive.
pub fn beta(graph: &MetricGraph, incoming: Bond, outgoing: Bond) -> Result<f64, GraphError> {
    let at = incoming.head(graph);
    if outgoing.tail(graph) != at {
        return Err(GraphError::InvalidRegion(format!(
            "bonds not consecutive: {:?} ends at {at}, {:?} starts elsewhere",
            incoming, outgoing
        )));
    }
    Ok(beta_unchecked(graph, incoming, outgoing, at))
}

#[inline]
fn beta_unchecked(graph: &MetricGraph, incoming: Bond, outgoing: Bond, at: VertexId) -> f64 {
    match graph.vertex_kind(at) {
        VertexKind::Dirichlet => -1.0,
        VertexKind::Standard => {
            let deg = graph.degree(at).expect("vertex exists") as f64;
            let reflection = outgoing == incoming.reversed();
            2.0 / deg - if reflection { 1.0 } else { 0.0 }
        }
    }
}

/// A directed path with its cached invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedPath {
    start: VertexId,
    bonds: Vec<Bond>,
    length: f64,
    alpha: f64,
    edge_counts: Vec<u32>,
    vertex_counts: Vec<u32>,
}

impl DirectedPath {
    /// The trivial path at a vertex: no bonds, length 0, coefficient 1.
    pub fn trivial(graph: &MetricGraph, at: VertexId) -> Self {
        DirectedPath {
            start: at,
            bonds: Vec::new(),
            length: 0.0,
            alpha: 1.0,
            edge_counts: vec![0; graph.num_edges()],
            vertex_counts: {
                let mut v = vec![0; graph.num_vertices()];
                v[at.0] = 2; // counted as both initial and final vertex
                v
            },
        }
    }

    /// Build from a bond sequence, checking consecutiveness.
    pub fn from_bonds(graph: &MetricGraph, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        assert!(!bonds.is_empty(), "use DirectedPath::trivial for the empty path");
        let start = bonds[0].tail(graph);
        let mut length = 0.0;
        let mut alpha = 1.0;
        let mut edge_counts = vec![0u32; graph.num_edges()];
        let mut vertex_counts = vec![0u32; graph.num_vertices()];
        vertex_counts[start.0] += 1;
        for (i, b) in bonds.iter().enumerate() {
            length += graph.edges()[b.edge.0].length;
            edge_counts[b.edge.0] += 1;
            if i + 1 < bonds.len() {
                let next = bonds[i + 1];
                alpha *= beta(graph, *b, next)?;
                vertex_counts[b.head(graph).0] += 1;
            }
        }
        vertex_counts[bonds.last().unwrap().head(graph).0] += 1;
        Ok(DirectedPath { start, bonds, length, alpha, edge_counts, vertex_counts })
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self, graph: &MetricGraph) -> VertexId {
        self.bonds.last().map_or(self.start, |b| b.head(graph))
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Metric length `ℓ(p)`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Combinatorial length `#p`.
    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    /// Scattering coefficient `α(p)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of bonds running through edge `e`.
    pub fn edge_count(&self, e: EdgeId) -> u32 {
        self.edge_counts[e.0]
    }

    /// Number of times the path has `v` as initial or final vertex of a
    /// bond, counting the path endpoints once each.
    pub fn vertex_count(&self, v: VertexId) -> u32 {
        self.vertex_counts[v.0]
    }

    /// The reversed path: same length and coefficient, endpoints swapped.
    pub fn reverse(&self, graph: &MetricGraph) -> DirectedPath {
        if self.bonds.is_empty() {
            return self.clone();
        }
        let bonds: Vec<Bond> = self.bonds.iter().rev().map(Bond::reversed).collect();
        DirectedPath::from_bonds(graph, bonds).expect("reversal of a valid path is valid")
    }

    /// All pre-extensions (`side = Pre`: paths `q` with `q_- = self`) or
    /// post-extensions (`side = Post`: `q_+ = self`). Their number equals
    /// the degree of the corresponding path endpoint.
    pub fn extensions(&self, graph: &MetricGraph, side: Side) -> Vec<DirectedPath> {
        assert!(!self.bonds.is_empty(), "extension sets are defined for nontrivial paths");
        let mut out = Vec::new();
        match side {
            Side::Pre => {
                let v = self.start;
                for b in all_bonds(graph) {
                    if b.head(graph) == v {
                        let mut bonds = Vec::with_capacity(self.bonds.len() + 1);
                        bonds.push(b);
                        bonds.extend_from_slice(&self.bonds);
                        out.push(DirectedPath::from_bonds(graph, bonds).unwrap());
                    }
                }
            }
            Side::Post => {
                let v = self.end(graph);
                for b in all_bonds(graph) {
                    if b.tail(graph) == v {
                        let mut bonds = self.bonds.clone();
                        bonds.push(b);
                        out.push(DirectedPath::from_bonds(graph, bonds).unwrap());
                    }
                }
            }
        }
        out
    }

    /// Drop the first bond (`p_-`); trivial result for one-bond paths.
    pub fn drop_first(&self, graph: &MetricGraph) -> DirectedPath {
        match self.bonds.len() {
            0 => panic!("trivial path has no first bond"),
            1 => DirectedPath::trivial(graph, self.end(graph)),
            _ => DirectedPath::from_bonds(graph, self.bonds[1..].to_vec()).unwrap(),
        }
    }

    /// Drop the last bond (`p_+`); trivial result for one-bond paths.
    pub fn drop_last(&self, graph: &MetricGraph) -> DirectedPath {
        match self.bonds.len() {
            0 => panic!("trivial path has no last bond"),
            1 => DirectedPath::trivial(graph, self.start),
            _ => DirectedPath::from_bonds(graph, self.bonds[..self.bonds.len() - 1].to_vec()).unwrap(),
        }
    }

    /// Drop both outer bonds (`p_±`); for a single-bond path this is the
    /// reversed path, mirroring the double deletion convention.
    pub fn drop_both(&self, graph: &MetricGraph) -> DirectedPath {
        match self.bonds.len() {
            0 => panic!("trivial path has no outer bonds"),
            1 => self.reverse(graph),
            2 => DirectedPath::trivial(graph, self.bonds[0].head(graph)),
            _ => DirectedPath::from_bonds(graph, self.bonds[1..self.bonds.len() - 1].to_vec()).unwrap(),
        }
    }

    /// One line of the debug dump: `length alpha bond_ids...`.
    pub fn dump_line(&self) -> String {
        let ids: Vec<String> = self.bonds.iter().map(|b| b.index().to_string()).collect();
        format!("{} {} {}", self.length, self.alpha, ids.join(" "))
    }
}

/// Which end of a path an extension is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pre,
    Post,
}

pub fn all_bonds(graph: &MetricGraph) -> impl Iterator<Item = Bond> + '_ {
    (0..2 * graph.num_edges()).map(Bond::from_index)
}

/// Selector over directed paths, composable by intersection.
#[derive(Debug, Clone, Default)]
pub struct PathClass {
    pub start_in: Option<Vec<VertexId>>,
    pub end_in: Option<Vec<VertexId>>,
    pub min_bonds: usize,
    pub max_bonds: Option<usize>,
}

impl PathClass {
    /// All nontrivial paths.
    pub fn all() -> Self {
        PathClass { min_bonds: 1, ..Default::default() }
    }

    /// Paths that both start and end at Dirichlet vertices.
    pub fn boundary_to_boundary(graph: &MetricGraph) -> Self {
        let d = graph.dirichlet_vertices();
        PathClass {
            start_in: Some(d.clone()),
            end_in: Some(d),
            min_bonds: 1,
            max_bonds: None,
        }
    }

    pub fn with_min_bonds(mut self, n: usize) -> Self {
        self.min_bonds = self.min_bonds.max(n);
        self
    }

    pub fn with_max_bonds(mut self, n: usize) -> Self {
        self.max_bonds = Some(self.max_bonds.map_or(n, |m| m.min(n)));
        self
    }

    fn accepts(&self, graph: &MetricGraph, path: &DirectedPath) -> bool {
        if path.num_bonds() < self.min_bonds {
            return false;
        }
        if let Some(m) = self.max_bonds {
            if path.num_bonds() > m {
                return false;
            }
        }
        if let Some(s) = &self.start_in {
            if !s.contains(&path.start()) {
                return false;
            }
        }
        if let Some(e) = &self.end_in {
            if !e.contains(&path.end(graph)) {
                return false;
            }
        }
        true
    }
}

struct Node {
    bond: Bond,
    parent: Option<usize>,
    length: f64,
    alpha: f64,
    num_bonds: usize,
}

struct HeapEntry {
    length: f64,
    seq: u64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on (length, insertion order); lengths are finite
        other
            .length
            .partial_cmp(&self.length)
            .unwrap()
            .then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first enumerator over directed paths with `ℓ(p) ≤ l_max`, emitted
/// exactly once each in non-decreasing metric length. Paths share prefixes
/// through parent links, so memory is one node per expanded partial path.
pub struct PathEnumerator<'g> {
    graph: &'g MetricGraph,
    class: PathClass,
    l_max: f64,
    arena: Vec<Node>,
    heap: BinaryHeap<HeapEntry>,
    seq: u64,
}

impl<'g> PathEnumerator<'g> {
    fn materialize(&self, node: usize) -> DirectedPath {
        let mut bonds = Vec::with_capacity(self.arena[node].num_bonds);
        let mut cur = Some(node);
        while let Some(i) = cur {
            bonds.push(self.arena[i].bond);
            cur = self.arena[i].parent;
        }
        bonds.reverse();
        DirectedPath::from_bonds(self.graph, bonds).expect("expansion keeps consecutiveness")
    }

    fn push_initial(&mut self, bond: Bond) {
        let length = self.graph.edges()[bond.edge.0].length;
        if length > self.l_max {
            return;
        }
        self.arena.push(Node { bond, parent: None, length, alpha: 1.0, num_bonds: 1 });
        self.seq += 1;
        self.heap.push(HeapEntry { length, seq: self.seq, node: self.arena.len() - 1 });
    }
}

impl Iterator for PathEnumerator<'_> {
    type Item = DirectedPath;

    fn next(&mut self) -> Option<DirectedPath> {
        while let Some(HeapEntry { node, .. }) = self.heap.pop() {
            let (bond, length, alpha, num_bonds) = {
                let n = &self.arena[node];
                (n.bond, n.length, n.alpha, n.num_bonds)
            };
            // expand unless the bond budget is exhausted
            if self.class.max_bonds.is_none_or(|m| num_bonds < m) {
                let at = bond.head(self.graph);
                for next in all_bonds(self.graph) {
                    if next.tail(self.graph) != at {
                        continue;
                    }
                    let b = beta_unchecked(self.graph, bond, next, at);
                    if b == 0.0 {
                        continue; // dead branch: all extensions carry factor 0
                    }
                    let new_len = length + self.graph.edges()[next.edge.0].length;
                    if new_len > self.l_max {
                        continue;
                    }
                    self.arena.push(Node {
                        bond: next,
                        parent: Some(node),
                        length: new_len,
                        alpha: alpha * b,
                        num_bonds: num_bonds + 1,
                    });
                    self.seq += 1;
                    self.heap.push(HeapEntry { length: new_len, seq: self.seq, node: self.arena.len() - 1 });
                }
            }
            let path = self.materialize(node);
            if self.class.accepts(self.graph, &path) {
                return Some(path);
            }
        }
        None
    }
}

/// Enumerate every directed path in `class` with `ℓ(p) ≤ l_max`, in
/// non-decreasing metric length. The stream is finite because
/// `ℓ(p) ≥ #p·ℓ_min`.
pub fn enumerate<'g>(graph: &'g MetricGraph, class: PathClass, l_max: f64) -> PathEnumerator<'g> {
    let mut en = PathEnumerator {
        graph,
        class,
        l_max,
        arena: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
    };
    let initial: Vec<Bond> = all_bonds(graph)
        .filter(|b| match &en.class.start_in {
            Some(s) => s.contains(&b.tail(graph)),
            None => true,
        })
        .collect();
    for b in initial {
        en.push_initial(b);
    }
    en
}

/// Deterministic work splitting: the sub-stream of `enumerate` consisting of
/// paths whose first bond is `first`. The union over all bonds, merged in
/// bond-index order, recovers the full stream (each split is internally in
/// non-decreasing length; global monotonicity needs the single stream).
pub fn enumerate_split<'g>(
    graph: &'g MetricGraph,
    class: PathClass,
    l_max: f64,
    first: Bond,
) -> PathEnumerator<'g> {
    let mut en = PathEnumerator {
        graph,
        class,
        l_max,
        arena: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
    };
    let ok = match &en.class.start_in {
        Some(s) => s.contains(&first.tail(graph)),
        None => true,
    };
    if ok {
        en.push_initial(first);
    }
    en
}

/// Write the debug dump (one `length alpha bond_ids...` line per path).
pub fn dump_paths(graph: &MetricGraph, class: PathClass, l_max: f64) -> String {
    let mut out = String::new();
    for p in enumerate(graph, class, l_max) {
        out.push_str(&p.dump_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;
    use proptest::prelude::*;

    fn star3_one_dirichlet() -> MetricGraph {
        MetricGraph::star(3, 1.0, 1)
    }

    #[test]
    fn beta_values_at_a_three_star_center() {
        let g = star3_one_dirichlet();
        // incoming along edge 0 (leaf 1 -> center 0), outgoing along edge 1
        let incoming = Bond::backward(EdgeId(0));
        assert_eq!(incoming.head(&g), VertexId(0));
        let transfer = Bond::forward(EdgeId(1));
        let reflection = Bond::forward(EdgeId(0));
        assert!((beta(&g, incoming, transfer).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((beta(&g, incoming, reflection).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        // arriving at the Dirichlet leaf
        let to_leaf = Bond::forward(EdgeId(0));
        let back = Bond::backward(EdgeId(0));
        assert_eq!(beta(&g, to_leaf, back).unwrap(), -1.0);
        // non-consecutive bonds error out
        assert!(beta(&g, transfer, transfer).is_err());
    }

    #[test]
    fn beta_at_degree_two_vertices_is_transparent() {
        let g = MetricGraph::interval(3.0, (true, false)).subdivide(EdgeId(0), 1.0).unwrap();
        // the new vertex 2 has degree 2: transfer 1, reflection 0
        let v2 = VertexId(2);
        let inc = all_bonds(&g).find(|b| b.head(&g) == v2).unwrap();
        let through = all_bonds(&g)
            .find(|b| b.tail(&g) == v2 && *b != inc.reversed())
            .unwrap();
        assert_eq!(beta(&g, inc, through).unwrap(), 1.0);
        assert_eq!(beta(&g, inc, inc.reversed()).unwrap(), 0.0);
    }

    #[test]
    fn alpha_of_figure_two_path_is_two_ninths() {
        // S3, Dirichlet at leaf 1; path: leaf1 -> center -> leaf1 -> center -> leaf2
        // factors: (2/3 - 1) at center, (-1) at the Dirichlet leaf, 2/3 at center
        let g = star3_one_dirichlet();
        let p = DirectedPath::from_bonds(
            &g,
            vec![
                Bond::backward(EdgeId(0)),
                Bond::forward(EdgeId(0)),
                Bond::backward(EdgeId(0)),
                Bond::forward(EdgeId(1)),
            ],
        )
        .unwrap();
        assert!((p.alpha() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(p.num_bonds(), 4);
        assert!((p.length() - 4.0).abs() < 1e-15);

        let single = DirectedPath::from_bonds(&g, vec![Bond::forward(EdgeId(2))]).unwrap();
        assert_eq!(single.alpha(), 1.0);

        let rev = p.reverse(&g);
        assert_eq!(rev.alpha(), p.alpha());
        assert_eq!(rev.length(), p.length());
        assert_eq!(rev.start(), p.end(&g));
    }

    #[test]
    fn enumerate_interval_boundary_paths() {
        // interval [0, l], Dirichlet at 0: boundary-to-boundary paths bounce
        // off the standard end; lengths 2l, 4l, ... with alternating signs
        let l = 1.0;
        let g = MetricGraph::interval(l, (true, false));
        let paths: Vec<DirectedPath> =
            enumerate(&g, PathClass::boundary_to_boundary(&g), 5.0 * l).collect();
        assert_eq!(paths.len(), 2);
        assert!((paths[0].length() - 2.0 * l).abs() < 1e-15);
        assert!((paths[0].alpha() - 1.0).abs() < 1e-15);
        assert!((paths[1].length() - 4.0 * l).abs() < 1e-15);
        assert!((paths[1].alpha() + 1.0).abs() < 1e-15);

        // cutoff below the shortest boundary path: empty stream
        let none: Vec<_> = enumerate(&g, PathClass::boundary_to_boundary(&g), 1.5 * l).collect();
        assert!(none.is_empty());
    }

    #[test]
    fn enumeration_is_monotone_and_duplicate_free() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let paths: Vec<DirectedPath> = enumerate(&g, PathClass::all(), 6.0).collect();
        let mut prev = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for p in &paths {
            assert!(p.length() >= prev - 1e-12, "lengths must be non-decreasing");
            prev = p.length();
            let key: Vec<usize> = p.bonds().iter().map(Bond::index).collect();
            assert!(seen.insert(key), "duplicate path emitted");
            assert!(p.alpha().abs() <= 1.0 + 1e-12);
        }
        assert!(!paths.is_empty());
    }

    #[test]
    fn split_streams_cover_the_full_stream() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let class = PathClass::boundary_to_boundary(&g);
        let full: std::collections::BTreeSet<Vec<usize>> = enumerate(&g, class.clone(), 8.0)
            .map(|p| p.bonds().iter().map(Bond::index).collect())
            .collect();
        let mut merged = std::collections::BTreeSet::new();
        for b in all_bonds(&g) {
            for p in enumerate_split(&g, class.clone(), 8.0, b) {
                merged.insert(p.bonds().iter().map(Bond::index).collect::<Vec<usize>>());
            }
        }
        assert_eq!(full, merged);
    }

    #[test]
    fn dual_sum_identity_on_extensions() {
        // Σ_{q ∈ ⟨p⟩_-} α(q) = ∓α(p), sign − iff p starts at a Dirichlet
        // vertex; same on the post side with the end vertex.
        for g in [star3_one_dirichlet(), MetricGraph::lasso(1.0, 2.0)] {
            let l_max = 4.0 * 1.0;
            for p in enumerate(&g, PathClass::all(), l_max) {
                for (side, anchor) in [(Side::Pre, p.start()), (Side::Post, p.end(&g))] {
                    let exts = p.extensions(&g, side);
                    let expected_count = g.degree(anchor).unwrap();
                    assert_eq!(exts.len(), expected_count);
                    let sum: f64 = exts.iter().map(DirectedPath::alpha).sum();
                    let sign = if g.vertex_kind(anchor) == VertexKind::Dirichlet { -1.0 } else { 1.0 };
                    assert!(
                        (sum - sign * p.alpha()).abs() < 1e-12,
                        "dual sum failed on {:?}",
                        p.bonds()
                    );
                }
            }
        }
    }

    #[test]
    fn decomposition_lemma_partition() {
        // paths starting in W of >= 2 bonds are exactly the post-extensions
        // of paths starting in W, each arising once
        let g = star3_one_dirichlet();
        let w = g.dirichlet_vertices();
        let l_max = 5.0;
        let class = PathClass { start_in: Some(w), ..PathClass::all() };
        let key = |p: &DirectedPath| -> Vec<usize> { p.bonds().iter().map(Bond::index).collect() };
        let long_paths: std::collections::BTreeSet<Vec<usize>> =
            enumerate(&g, class.clone(), l_max)
                .filter(|p| p.num_bonds() >= 2)
                .map(|p| key(&p))
                .collect();
        let mut from_extensions = std::collections::BTreeSet::new();
        // post-extensions of shorter paths; enumerate up to l_max so every
        // extension with total length <= l_max has its parent included
        for p in enumerate(&g, class, l_max) {
            for q in p.extensions(&g, Side::Post) {
                if q.length() <= l_max {
                    assert!(from_extensions.insert(key(&q)), "extension sets must be disjoint");
                }
            }
        }
        for k in &long_paths {
            assert!(from_extensions.contains(k));
        }
        for k in &from_extensions {
            assert!(long_paths.contains(k));
        }
    }

    #[test]
    fn count_bound_holds_per_combinatorial_length() {
        for g in [star3_one_dirichlet(), MetricGraph::lasso(1.0, 2.0)] {
            let d = g.max_degree() as f64;
            let mut counts = std::collections::BTreeMap::new();
            for p in enumerate(&g, PathClass::boundary_to_boundary(&g), 6.0) {
                *counts.entry(p.num_bonds()).or_insert(0usize) += 1;
            }
            for (n, c) in counts {
                let bound = 2.0 * d.powi(n as i32 - 1);
                assert!(
                    (c as f64) <= bound,
                    "{c} boundary paths with {n} bonds exceeds 2·d^(n-1) = {bound}"
                );
            }
        }
    }

    #[test]
    fn subdivision_leaves_length_alpha_multiset_invariant() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let sub = g.subdivide(EdgeId(0), 0.4).unwrap();
        let collect = |g: &MetricGraph| -> Vec<(i64, i64)> {
            let mut v: Vec<(i64, i64)> = enumerate(g, PathClass::boundary_to_boundary(g), 6.0)
                .map(|p| {
                    (
                        (p.length() / 1e-9).round() as i64,
                        (p.alpha() / 1e-12).round() as i64,
                    )
                })
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(collect(&g), collect(&sub));
    }

    #[test]
    fn dump_format_is_stable() {
        let g = MetricGraph::interval(1.0, (true, false));
        let dump = dump_paths(&g, PathClass::boundary_to_boundary(&g), 4.0);
        assert_eq!(dump, "2 1 0 1\n4 -1 0 1 0 1\n");
    }

    /// Boundary paths on the lasso admit a closed reindexing: a path is a
    /// sequence of M pendant excursions carrying R loop traversals in
    /// total, and the coefficients of a fixed `(M, R)` class sum to
    /// `(−1)^{M−1}·[x^R] W(x)^M` with `W(x) = −1/3 + (8/9)·x/(1 − x/3)`
    /// (reflection, or entry/exit transfers around a geometric chain of
    /// in-loop choices). Expanded:
    ///
    /// ```text
    /// A(M,0) = (−1/3)^M,
    /// A(M,R) = Σ_k C(M,k)·C(R−1,k−1)·(−1/3)^{M−k}·(8/9)^k·(1/3)^{R−k}.
    /// ```
    ///
    /// Path lengths are `2M·ℓ₁ + R·ℓ₂`.
    #[test]
    fn lasso_boundary_paths_match_the_closed_double_sum() {
        fn binom(n: i64, k: i64) -> f64 {
            if k < 0 || k > n {
                return 0.0;
            }
            let mut out = 1.0;
            for i in 0..k {
                out = out * (n - i) as f64 / (i + 1) as f64;
            }
            out
        }
        fn coefficient_sum(m: i64, r: i64) -> f64 {
            if r == 0 {
                return (-1.0f64 / 3.0).powi(m as i32);
            }
            let mut a = 0.0;
            for k in 1..=m.min(r) {
                a += binom(m, k)
                    * binom(r - 1, k - 1)
                    * (-1.0f64 / 3.0).powi((m - k) as i32)
                    * (8.0f64 / 9.0).powi(k as i32)
                    * (1.0f64 / 3.0).powi((r - k) as i32);
            }
            a
        }
        let (l1, l2) = (1.0, 2.0);
        let g = MetricGraph::lasso(l1, l2);
        let l_max = 14.0;
        let mut groups: std::collections::BTreeMap<(i64, i64), f64> =
            std::collections::BTreeMap::new();
        for p in enumerate(&g, PathClass::boundary_to_boundary(&g), l_max) {
            let m = i64::from(p.edge_count(EdgeId(0))) / 2; // pendant excursions
            let r = i64::from(p.edge_count(EdgeId(1))); // loop traversals
            assert!((p.length() - (2.0 * m as f64 * l1 + r as f64 * l2)).abs() < 1e-12);
            *groups.entry((m, r)).or_insert(0.0) += p.alpha();
        }
        assert!(!groups.is_empty());
        for (&(m, r), &total) in &groups {
            let closed = if m % 2 == 1 { 1.0 } else { -1.0 } * coefficient_sum(m, r);
            assert!(
                (total - closed).abs() < 1e-12,
                "class (M={m}, R={r}): enumerated {total}, closed {closed}"
            );
        }
    }

    proptest! {
        #[test]
        fn reversal_is_an_involution(seed in 0u64..500) {
            let g = MetricGraph::lasso(1.0, 2.0);
            let paths: Vec<DirectedPath> = enumerate(&g, PathClass::all(), 5.0).collect();
            let p = &paths[(seed as usize) % paths.len()];
            let rr = p.reverse(&g).reverse(&g);
            prop_assert_eq!(rr.bonds(), p.bonds());
            prop_assert_eq!(rr.alpha(), p.alpha());
            prop_assert_eq!(rr.length(), p.length());
        }

        #[test]
        fn distance_is_a_metric_on_sampled_points(
            e1 in 0usize..2, o1 in 0.0f64..1.0, e2 in 0usize..2, o2 in 0.0f64..1.0,
            e3 in 0usize..2, o3 in 0.0f64..1.0,
        ) {
            let g = MetricGraph::lasso(1.0, 2.0);
            let scale = |e: usize, o: f64| GraphPointArgs(e, o * if e == 0 { 1.0 } else { 2.0 });
            struct GraphPointArgs(usize, f64);
            let mk = |a: &GraphPointArgs| crate::graph::GraphPoint::new(EdgeId(a.0), a.1);
            let (p1, p2, p3) = (scale(e1, o1), scale(e2, o2), scale(e3, o3));
            let d12 = g.shortest_distance(mk(&p1), mk(&p2)).unwrap();
            let d21 = g.shortest_distance(mk(&p2), mk(&p1)).unwrap();
            let d13 = g.shortest_distance(mk(&p1), mk(&p3)).unwrap();
            let d32 = g.shortest_distance(mk(&p3), mk(&p2)).unwrap();
            prop_assert!((d12 - d21).abs() < 1e-12);
            prop_assert!(d12 >= 0.0);
            prop_assert!(d12 <= d13 + d32 + 1e-12);
            let d11 = g.shortest_distance(mk(&p1), mk(&p1)).unwrap();
            prop_assert_eq!(d11, 0.0);
        }
    }
}
