//! Coefficient accumulation over traversal-count classes.
//!
//! The path expansions weight each directed path by `α(p)·K(ℓ(p))` for a
//! kernel `K` that depends only on the metric length (and, for the Hadamard
//! derivative, on per-edge traversal counts). Two paths with the same
//! traversal-count vector contribute the same kernel value, so instead of
//! materializing paths the evaluators propagate, layer by combinatorial
//! length, the *sum of coefficients* per state `(last bond, count vector)`.
//! On graphs with commensurable edge lengths this collapses the
//! exponentially many paths into polynomially many states; in the worst
//! case it degrades towards one state per path and the term cap cuts it
//! off.
//!
//! Count vectors are fixed 24-byte arrays (graphs above 24 edges or 255
//! layers fall back to the spectral oracle), and all maps are `BTreeMap`s,
//! so accumulation order is fixed and results are bit-reproducible. Work
//! splitting by initial bond preserves this: splits accumulate
//! independently and merge in index order.

use crate::graph::{EdgeId, MetricGraph, VertexId, VertexKind};
use crate::paths::{all_bonds, Bond};
use std::collections::BTreeMap;
use std::thread;

/// Hard ceiling on edges for the aggregated engine (count vector width).
pub(crate) const MAX_EDGES: usize = 24;
/// Hard ceiling on combinatorial depth (count range of one byte).
pub(crate) const MAX_LAYERS: u32 = 255;

/// Per-edge traversal counts, one byte each; the metric length is
/// `Σ comp[e]·ℓ_e`.
pub(crate) type Comp = [u8; MAX_EDGES];

const ZERO_COMP: Comp = [0u8; MAX_EDGES];

#[derive(Debug)]
pub(crate) enum SumError {
    /// State count exceeded the configured term budget.
    Budget { states: usize },
    /// Graph too large for the aggregated engine.
    TooManyEdges { edges: usize },
    /// Requested depth exceeds the count range.
    TooManyLayers { layers: u32 },
}

/// Successor table: `succ[b]` lists `(next bond, β factor)` with zero
/// factors (reflections at standard degree-2 vertices) already pruned.
pub(crate) struct BondTable {
    pub succ: Vec<Vec<(usize, f64)>>,
    pub edge_of: Vec<usize>,
    pub head_dirichlet: Vec<bool>,
    pub edge_lengths: Vec<f64>,
}

impl BondTable {
    pub fn new(graph: &MetricGraph) -> Self {
        let nb = 2 * graph.num_edges();
        let mut succ = vec![Vec::new(); nb];
        let mut edge_of = vec![0usize; nb];
        let mut head_dirichlet = vec![false; nb];
        for b in all_bonds(graph) {
            let i = b.index();
            edge_of[i] = b.edge.0;
            let at = b.head(graph);
            head_dirichlet[i] = graph.vertex_kind(at) == VertexKind::Dirichlet;
            let deg = graph.degree(at).expect("vertex exists") as f64;
            for next in all_bonds(graph) {
                if next.tail(graph) != at {
                    continue;
                }
                let beta = if head_dirichlet[i] {
                    -1.0
                } else if next == b.reversed() {
                    2.0 / deg - 1.0
                } else {
                    2.0 / deg
                };
                if beta != 0.0 {
                    succ[i].push((next.index(), beta));
                }
            }
        }
        BondTable {
            succ,
            edge_of,
            head_dirichlet,
            edge_lengths: graph.edges().iter().map(|e| e.length).collect(),
        }
    }

    fn check_size(&self, layers: u32) -> Result<(), SumError> {
        if self.edge_lengths.len() > MAX_EDGES {
            return Err(SumError::TooManyEdges { edges: self.edge_lengths.len() });
        }
        if layers > MAX_LAYERS {
            return Err(SumError::TooManyLayers { layers });
        }
        Ok(())
    }

    pub fn comp_length(&self, comp: &Comp) -> f64 {
        self.edge_lengths
            .iter()
            .zip(comp.iter())
            .map(|(&l, &c)| f64::from(c) * l)
            .sum()
    }
}

#[inline]
fn bump(comp: &Comp, edge: usize) -> Comp {
    let mut next = *comp;
    next[edge] += 1;
    next
}

/// Σ of `α(p)` over directed boundary-to-boundary paths of at most `n_max`
/// bonds whose first bond lies in `initial`, grouped by count vector.
fn boundary_buckets_split(
    table: &BondTable,
    graph: &MetricGraph,
    initial: &[usize],
    n_max: u32,
    cap: usize,
) -> Result<BTreeMap<Comp, f64>, SumError> {
    let dirichlet: Vec<bool> = (0..graph.num_vertices())
        .map(|v| graph.vertex_kind(VertexId(v)) == VertexKind::Dirichlet)
        .collect();
    let mut states: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
    for &b in initial {
        let bond = Bond::from_index(b);
        if dirichlet[bond.tail(graph).0] {
            *states.entry((b, bump(&ZERO_COMP, table.edge_of[b]))).or_insert(0.0) += 1.0;
        }
    }
    let mut buckets: BTreeMap<Comp, f64> = BTreeMap::new();
    let mut visited = 0usize;
    for layer in 1..=n_max {
        if states.is_empty() {
            break;
        }
        visited += states.len();
        if visited > cap {
            return Err(SumError::Budget { states: visited });
        }
        let mut next: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
        for ((b, comp), coeff) in &states {
            if table.head_dirichlet[*b] {
                *buckets.entry(*comp).or_insert(0.0) += coeff;
            }
            if layer < n_max {
                for &(nb, beta) in &table.succ[*b] {
                    let c = coeff * beta;
                    if c != 0.0 {
                        *next.entry((nb, bump(comp, table.edge_of[nb]))).or_insert(0.0) += c;
                    }
                }
            }
        }
        states = next;
    }
    Ok(buckets)
}

/// Aggregated boundary-to-boundary path sums over at most `n_max` bonds,
/// optionally split across `threads` workers by initial bond. The merge
/// order is fixed by split index, so results are reproducible for a fixed
/// thread count. Returns `(counts, length, Σα)` triples in count-vector
/// order.
pub(crate) fn boundary_buckets(
    graph: &MetricGraph,
    n_max: u32,
    cap: usize,
    threads: usize,
) -> Result<Vec<(Comp, f64, f64)>, SumError> {
    let table = BondTable::new(graph);
    table.check_size(n_max)?;
    let all: Vec<usize> = (0..2 * graph.num_edges()).collect();
    let threads = threads.max(1).min(all.len().max(1));
    let merged: BTreeMap<Comp, f64> = if threads <= 1 {
        boundary_buckets_split(&table, graph, &all, n_max, cap)?
    } else {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|k| all.iter().copied().filter(|b| b % threads == k).collect())
            .collect();
        let results: Vec<Result<BTreeMap<Comp, f64>, SumError>> = thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    let table = &table;
                    scope.spawn(move || {
                        boundary_buckets_split(table, graph, chunk, n_max, cap / threads + 1)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut merged: BTreeMap<Comp, f64> = BTreeMap::new();
        for r in results {
            for (comp, coeff) in r? {
                *merged.entry(comp).or_insert(0.0) += coeff;
            }
        }
        merged
    };
    Ok(merged
        .into_iter()
        .map(|(comp, coeff)| {
            let len = table.comp_length(&comp);
            (comp, len, coeff)
        })
        .collect())
}

/// One aggregated heat-kernel term: total path length (including the two
/// partial end segments) and the summed coefficient.
pub(crate) struct KernelTerm {
    pub length: f64,
    pub coeff: f64,
}

/// Aggregated composite path sums for the pointwise kernel between interior
/// points `x = (edge_x, off_x)` and `y = (edge_y, off_y)`: an exit bond out
/// of `edge_x`, at most `k_max` full middle bonds, and an entry bond into
/// `edge_y`. Coefficients are the full scattering products over the
/// junction vertices.
pub(crate) fn kernel_terms(
    graph: &MetricGraph,
    x: (EdgeId, f64),
    y: (EdgeId, f64),
    k_max: u32,
    cap: usize,
) -> Result<Vec<KernelTerm>, SumError> {
    let table = BondTable::new(graph);
    table.check_size(k_max)?;
    let lx = table.edge_lengths[x.0 .0];
    let ly = table.edge_lengths[y.0 .0];
    let exits = [
        (Bond::forward(x.0).index(), lx - x.1),
        (Bond::backward(x.0).index(), x.1),
    ];
    let entries = [
        (Bond::forward(y.0), y.1),
        (Bond::backward(y.0), ly - y.1),
    ];

    let mut raw: Vec<KernelTerm> = Vec::new();
    let mut visited = 0usize;
    for (exit, dist_x) in exits {
        let mut states: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
        states.insert((exit, ZERO_COMP), 1.0);
        for layer in 0..=k_max {
            if states.is_empty() {
                break;
            }
            visited += states.len();
            if visited > cap {
                return Err(SumError::Budget { states: visited });
            }
            let mut next: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
            for ((b, comp), coeff) in &states {
                let bond = Bond::from_index(*b);
                let head = bond.head(graph);
                for (entry, dist_y) in entries {
                    if entry.tail(graph) != head {
                        continue;
                    }
                    let beta = terminal_beta(graph, &table, *b, entry);
                    if beta != 0.0 {
                        raw.push(KernelTerm {
                            length: dist_x + table.comp_length(comp) + dist_y,
                            coeff: coeff * beta,
                        });
                    }
                }
                if layer < k_max {
                    for &(nb, beta) in &table.succ[*b] {
                        *next.entry((nb, bump(comp, table.edge_of[nb]))).or_insert(0.0) +=
                            coeff * beta;
                    }
                }
            }
            states = next;
        }
    }
    // aggregate identical lengths so cancellations happen before the kernel
    raw.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    let mut agg: Vec<KernelTerm> = Vec::new();
    for term in raw {
        match agg.last_mut() {
            Some(last) if (last.length - term.length).abs() <= 1e-13 * (1.0 + last.length.abs()) => {
                last.coeff += term.coeff;
            }
            _ => agg.push(term),
        }
    }
    Ok(agg)
}

fn terminal_beta(graph: &MetricGraph, table: &BondTable, from: usize, to: Bond) -> f64 {
    let bond = Bond::from_index(from);
    if table.head_dirichlet[from] {
        -1.0
    } else {
        let at = bond.head(graph);
        let deg = graph.degree(at).expect("vertex exists") as f64;
        2.0 / deg - if to == bond.reversed() { 1.0 } else { 0.0 }
    }
}

/// One aggregated flux pair: full lengths of the two outer edges, the
/// middle length, and the summed scattering coefficient.
pub(crate) struct FluxTerm {
    pub len_from: f64,
    pub len_to: f64,
    pub mid: f64,
    pub coeff: f64,
}

/// Aggregated composite sums between whole edges inside a region and whole
/// edges outside it: exit bond from an edge with `region_edges[e]`, at most
/// `k_max` middle bonds, entry bond into an edge outside.
pub(crate) fn flux_terms(
    graph: &MetricGraph,
    region_edges: &[bool],
    k_max: u32,
    cap: usize,
) -> Result<Vec<FluxTerm>, SumError> {
    let table = BondTable::new(graph);
    table.check_size(k_max)?;
    let ne = graph.num_edges();
    let mut grouped: BTreeMap<(usize, usize, Comp), f64> = BTreeMap::new();
    let mut visited = 0usize;
    for exit_edge in 0..ne {
        if !region_edges[exit_edge] {
            continue;
        }
        for exit in [
            Bond::forward(EdgeId(exit_edge)).index(),
            Bond::backward(EdgeId(exit_edge)).index(),
        ] {
            let mut states: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
            states.insert((exit, ZERO_COMP), 1.0);
            for layer in 0..=k_max {
                if states.is_empty() {
                    break;
                }
                visited += states.len();
                if visited > cap {
                    return Err(SumError::Budget { states: visited });
                }
                let mut next: BTreeMap<(usize, Comp), f64> = BTreeMap::new();
                for ((b, comp), coeff) in &states {
                    let bond = Bond::from_index(*b);
                    let head = bond.head(graph);
                    for entry in all_bonds(graph) {
                        if entry.tail(graph) != head || region_edges[entry.edge.0] {
                            continue;
                        }
                        let beta = terminal_beta(graph, &table, *b, entry);
                        if beta != 0.0 {
                            *grouped.entry((exit_edge, entry.edge.0, *comp)).or_insert(0.0) +=
                                coeff * beta;
                        }
                    }
                    if layer < k_max {
                        for &(nb, beta) in &table.succ[*b] {
                            *next.entry((nb, bump(comp, table.edge_of[nb]))).or_insert(0.0) +=
                                coeff * beta;
                        }
                    }
                }
                states = next;
            }
        }
    }
    Ok(grouped
        .into_iter()
        .map(|((ea, eb, comp), coeff)| FluxTerm {
            len_from: table.edge_lengths[ea],
            len_to: table.edge_lengths[eb],
            mid: table.comp_length(&comp),
            coeff,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{enumerate, PathClass};

    /// The aggregated buckets must reproduce the per-path enumeration.
    #[test]
    fn buckets_match_enumeration_on_the_lasso() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let n_max = 8;
        let buckets = boundary_buckets(&g, n_max, 1 << 20, 1).unwrap();
        let mut expect: BTreeMap<Comp, f64> = BTreeMap::new();
        let class = PathClass::boundary_to_boundary(&g).with_max_bonds(n_max as usize);
        for p in enumerate(&g, class, n_max as f64 * 2.0) {
            let mut comp = ZERO_COMP;
            for e in 0..g.num_edges() {
                comp[e] = p.edge_count(EdgeId(e)) as u8;
            }
            *expect.entry(comp).or_insert(0.0) += p.alpha();
        }
        expect.retain(|_, v| v.abs() > 1e-14);
        let got: BTreeMap<Comp, f64> = buckets
            .into_iter()
            .filter(|(_, _, c)| c.abs() > 1e-14)
            .map(|(comp, _, coeff)| (comp, coeff))
            .collect();
        assert_eq!(got.len(), expect.len());
        for (comp, coeff) in &expect {
            let g = got.get(comp).copied().unwrap_or(f64::NAN);
            assert!(
                (g - coeff).abs() < 1e-12,
                "bucket {:?}: aggregated {g}, enumerated {coeff}",
                &comp[..2]
            );
        }
    }

    #[test]
    fn split_merge_is_deterministic_and_consistent() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let one = boundary_buckets(&g, 10, 1 << 20, 1).unwrap();
        let two = boundary_buckets(&g, 10, 1 << 20, 2).unwrap();
        assert_eq!(one.len(), two.len());
        for (a, b) in one.iter().zip(two.iter()) {
            assert_eq!(a.0, b.0);
            assert!((a.2 - b.2).abs() < 1e-13);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = MetricGraph::star(3, 1.0, 1);
        assert!(matches!(
            boundary_buckets(&g, 40, 10, 1),
            Err(SumError::Budget { .. })
        ));
    }
}
