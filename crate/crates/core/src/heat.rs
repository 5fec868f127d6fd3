//! Exact path-sum evaluators with certified truncation error.
//!
//! The heat content of a validated graph is
//!
//! ```text
//! Q_t = |G| − (2√t/√π)·#V_D + 4√t·Σ_p α(p)·H(ℓ(p)/2√t),
//! ```
//!
//! the sum running over all *directed* paths that start and end at
//! Dirichlet vertices. (The equivalent undirected form carries `8√t`; the
//! directed normalization is the internal canonical one, since it needs no
//! notion of undirected path identity.) The evaluator keeps every path of
//! at most `n₀ = ⌈L/ℓ_min⌉` bonds — in particular every path of length at
//! most `L` — and certifies the rest by [`special::path_tail_bound`].
//! Tolerances split 90% to the analytic tail and 10% to summation rounding,
//! tracked by compensated summation.
//!
//! The same machinery drives the pointwise kernel, the boundary flux of a
//! region, and the Hadamard derivative of `Q_t` under lengthening one edge.

use crate::graph::{EdgeId, GraphError, GraphPoint, MetricGraph, RegionSpec, VertexKind};
use crate::paths::{enumerate, Bond, PathClass};
use crate::special::{self, CompensatedSum, TailBudget, FRAC_1_SQRT_PI};
use crate::spectral::{self, SpectralError};
use crate::sums::{self, SumError};
use std::f64::consts::PI;
use thiserror::Error;

/// Which evaluation route to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// The exact path expansion with a certified tail bound.
    PathSum,
    /// The finite-difference spectral solver (oracle-grade error estimate).
    Spectral,
    /// Path sum, falling back to spectral when the term budget is exceeded
    /// (which happens for large `t`, where the expansion converges slowly).
    #[default]
    Auto,
}

/// Evaluation parameters.
#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// Absolute tolerance for the certified error bound.
    pub tolerance: f64,
    /// Budget for aggregated summation states.
    pub max_terms: usize,
    pub method: Method,
    /// Worker threads for the path sums (deterministic merge per count).
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tolerance: 1e-10,
            max_terms: 10_000_000,
            method: Method::Auto,
            threads: 1,
        }
    }
}

impl EvalConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

/// A computed scalar together with a certified absolute error bound: the
/// true quantity lies in `[value − error_bound, value + error_bound]` under
/// the analytic bounds of this module (spectral-mode bounds are
/// Richardson-style estimates, not analytic certificates).
#[derive(Debug, Clone, Copy)]
pub struct HeatValue {
    pub value: f64,
    pub error_bound: f64,
    /// Number of aggregated terms actually summed.
    pub terms_used: usize,
    /// Every path of metric length up to this cutoff is included.
    pub cutoff_length: f64,
    /// The route that produced the value.
    pub method: Method,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("term budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("kernel arguments must avoid Dirichlet vertices")]
    KernelAtDirichletVertex,
    #[error("t = {t} outside the validity window (0, {window}) of the small-time bound")]
    OutsideValidityWindow { t: f64, window: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl From<SumError> for EvalError {
    fn from(e: SumError) -> Self {
        match e {
            SumError::Budget { states } => {
                EvalError::BudgetExceeded(format!("{states} summation states"))
            }
            SumError::TooManyEdges { edges } => {
                EvalError::BudgetExceeded(format!("{edges} edges exceed the aggregation limit"))
            }
            SumError::TooManyLayers { layers } => {
                EvalError::BudgetExceeded(format!("{layers} layers exceed the aggregation limit"))
            }
        }
    }
}

fn check_time(t: f64) -> Result<(), EvalError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(EvalError::NonPositiveTime(t))
    }
}

/// Smallest combinatorial depth whose tail bound fits the budget, or None.
fn required_depth(d_max: usize, l_min: f64, t: f64, budget: TailBudget) -> Option<u32> {
    (1..=sums::MAX_LAYERS)
        .find(|&n| special::path_tail_bound(d_max, l_min, t, f64::from(n) * l_min) <= budget.0)
}

/// Heat content at time `t` with a certified absolute error bound.
///
/// In [`Method::Auto`] mode the spectral oracle takes over when the path
/// expansion would exceed the term budget; the reported `method` records
/// which route produced the value. Fails with
/// [`EvalError::BudgetExceeded`] when neither route fits the budget.
pub fn heat_content(graph: &MetricGraph, t: f64, cfg: &EvalConfig) -> Result<HeatValue, EvalError> {
    graph.ensure_valid()?;
    check_time(t)?;
    match cfg.method {
        Method::PathSum => heat_content_path_sum(graph, t, cfg),
        Method::Spectral => heat_content_spectral(graph, t),
        Method::Auto => match heat_content_path_sum(graph, t, cfg) {
            Err(EvalError::BudgetExceeded(_)) => heat_content_spectral(graph, t),
            other => other,
        },
    }
}

/// Heat content of a disconnected boundary-value problem given as a list of
/// components: the sum of the component values.
pub fn heat_content_components(
    components: &[MetricGraph],
    t: f64,
    cfg: &EvalConfig,
) -> Result<HeatValue, EvalError> {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut terms = 0;
    let mut cutoff = f64::INFINITY;
    let mut method = Method::PathSum;
    for g in components {
        let hv = heat_content(g, t, cfg)?;
        value += hv.value;
        error += hv.error_bound;
        terms += hv.terms_used;
        cutoff = cutoff.min(hv.cutoff_length);
        if hv.method == Method::Spectral {
            method = Method::Spectral;
        }
    }
    Ok(HeatValue { value, error_bound: error, terms_used: terms, cutoff_length: cutoff, method })
}

fn heat_content_path_sum(
    graph: &MetricGraph,
    t: f64,
    cfg: &EvalConfig,
) -> Result<HeatValue, EvalError> {
    let l_min = graph.min_edge_length();
    let d_max = graph.max_degree();
    // 90% of the tolerance goes to the analytic tail, the rest covers
    // summation rounding
    let tail_budget = TailBudget::new(0.9 * cfg.tolerance);
    let n0 = required_depth(d_max, l_min, t, tail_budget).ok_or_else(|| {
        EvalError::BudgetExceeded(format!(
            "no certified cutoff below {} layers at t = {t}",
            sums::MAX_LAYERS
        ))
    })?;
    let tail = special::path_tail_bound(d_max, l_min, t, f64::from(n0) * l_min);
    let buckets = sums::boundary_buckets(graph, n0, cfg.max_terms, cfg.threads)?;
    let two_rt = 2.0 * t.sqrt();
    let mut sum = CompensatedSum::new();
    for (_, len, coeff) in &buckets {
        sum.add(coeff * special::h(len / two_rt));
    }
    let closed = graph.volume() - two_rt * FRAC_1_SQRT_PI * graph.num_dirichlet() as f64;
    let value = closed + 4.0 * t.sqrt() * sum.value();
    // rounding slack: compensated summation leaves O(ε)·Σ|terms|
    let rounding =
        4.0 * t.sqrt() * sum.abs_total() * f64::EPSILON * 4.0 + f64::EPSILON * closed.abs() * 4.0;
    Ok(HeatValue {
        value,
        error_bound: tail + rounding,
        terms_used: buckets.len(),
        cutoff_length: f64::from(n0) * l_min,
        method: Method::PathSum,
    })
}

fn heat_content_spectral(graph: &MetricGraph, t: f64) -> Result<HeatValue, EvalError> {
    let (value, error) = spectral::oracle_heat_content(graph, t)?;
    Ok(HeatValue { value, error_bound: error, terms_used: 0, cutoff_length: 0.0, method: Method::Spectral })
}

/// Non-topological part of the heat content, in closed form:
/// `|G| − (2√t/√π)·#E + 2√t·Σ_e H(ℓ_e/2√t)`. Only the within-edge direct
/// Gaussian terms; no path enumeration.
pub fn heat_content_nt(graph: &MetricGraph, t: f64) -> Result<f64, EvalError> {
    graph.ensure_valid_kernel_domain()?;
    check_time(t)?;
    let two_rt = 2.0 * t.sqrt();
    let mut sum = CompensatedSum::new();
    for e in graph.edges() {
        sum.add(special::h(e.length / two_rt));
    }
    Ok(graph.volume() - two_rt * FRAC_1_SQRT_PI * graph.num_edges() as f64
        + two_rt * sum.value())
}

/// Diagnostic route to the heat content through the intermediate expansion:
/// the non-topological closed form plus the four-term combination
///
/// ```text
/// √t·Σ_{#p ≥ 2, ℓ(p_±) ≤ L} α(p)·(H(ℓ(p)) − H(ℓ(p_-)) − H(ℓ(p_+)) + H(ℓ(p_±)))
/// ```
///
/// (arguments scaled by `1/2√t`). Converges to [`heat_content`] as `L`
/// grows; intended for small graphs as a cross-check, so it enumerates
/// paths individually.
pub fn heat_content_intermediate(
    graph: &MetricGraph,
    t: f64,
    l_max: f64,
) -> Result<f64, EvalError> {
    graph.ensure_valid()?;
    check_time(t)?;
    let two_rt = 2.0 * t.sqrt();
    let longest = graph.edges().iter().map(|e| e.length).fold(0.0, f64::max);
    let mut sum = CompensatedSum::new();
    let class = PathClass::all().with_min_bonds(2);
    for p in enumerate(graph, class, l_max + 2.0 * longest) {
        let inner = p.drop_both(graph).length();
        if inner > l_max {
            continue;
        }
        let minus = p.drop_first(graph).length();
        let plus = p.drop_last(graph).length();
        let combo = special::h(p.length() / two_rt) - special::h(minus / two_rt)
            - special::h(plus / two_rt)
            + special::h(inner / two_rt);
        sum.add(p.alpha() * combo);
    }
    Ok(heat_content_nt(graph, t)? + t.sqrt() * sum.value())
}

/// Doubly integrated Gaussian between the full extents of two edges
/// separated by a middle length `mid`:
///
/// ```text
/// ∫_0^a ∫_0^b e^{-(x + mid + y)²/4t} dy dx
///   = √(4π)·t·(H(m) − H(a+m) − H(b+m) + H(a+b+m)),   args scaled by 1/2√t.
/// ```
pub fn gauss_edge_pair(a: f64, b: f64, mid: f64, t: f64) -> f64 {
    let two_rt = 2.0 * t.sqrt();
    (4.0 * PI).sqrt()
        * t
        * (special::h(mid / two_rt) - special::h((a + mid) / two_rt)
            - special::h((b + mid) / two_rt)
            + special::h((a + b + mid) / two_rt))
}

/// [`gauss_edge_pair`] over the edges of an exit and an entry bond.
pub fn edge_pair_mass(
    graph: &MetricGraph,
    exit_bond: Bond,
    entry_bond: Bond,
    mid_length: f64,
    t: f64,
) -> Result<f64, EvalError> {
    check_time(t)?;
    let a = graph.edge(exit_bond.edge)?.length;
    let b = graph.edge(entry_bond.edge)?.length;
    Ok(gauss_edge_pair(a, b, mid_length, t))
}

/// Pointwise heat kernel `p_t(x, y)` by the path expansion, with a
/// certified truncation bound. The expansion may fail *at* Dirichlet
/// vertices, so those points are rejected; near-Dirichlet values are
/// cancellation-dominated and the error bound reflects that honestly.
pub fn heat_kernel(
    graph: &MetricGraph,
    x: GraphPoint,
    y: GraphPoint,
    t: f64,
    cfg: &EvalConfig,
) -> Result<HeatValue, EvalError> {
    graph.ensure_valid_kernel_domain()?;
    check_time(t)?;
    for p in [x, y] {
        let e = graph.edge(p.edge)?;
        if p.offset < 0.0 || p.offset > e.length {
            return Err(GraphError::OffsetOutOfRange {
                edge: p.edge,
                offset: p.offset,
                length: e.length,
            }
            .into());
        }
        for (vertex, at) in [(e.endpoints.0, 0.0), (e.endpoints.1, e.length)] {
            if p.offset == at && graph.vertex_kind(vertex) == VertexKind::Dirichlet {
                return Err(EvalError::KernelAtDirichletVertex);
            }
        }
    }
    let prefactor = 1.0 / (4.0 * PI * t).sqrt();
    let l_min = graph.min_edge_length();
    let d = graph.max_degree().max(1) as f64;
    let c = l_min * l_min / (4.0 * t);
    // discarded composites have > k middle bonds, middle length > k·ℓ_min;
    // at j middle bonds there are at most 2·d^j·2 of them (two exit and at
    // most two entry bonds)
    let tail_of = |k: u32| prefactor * 4.0 * crate::special::geometric_gauss_tail(d, c, k);
    let k_max = (0..=sums::MAX_LAYERS)
        .find(|&k| tail_of(k) <= 0.9 * cfg.tolerance)
        .ok_or_else(|| EvalError::BudgetExceeded("kernel tail does not certify".into()))?;
    let terms = sums::kernel_terms(graph, (x.edge, x.offset), (y.edge, y.offset), k_max, cfg.max_terms)?;
    let mut sum = CompensatedSum::new();
    if x.edge == y.edge {
        let d_off = x.offset - y.offset;
        sum.add((-d_off * d_off / (4.0 * t)).exp());
    }
    for term in &terms {
        sum.add(term.coeff * (-term.length * term.length / (4.0 * t)).exp());
    }
    let value = prefactor * sum.value();
    let rounding = prefactor * sum.abs_total() * f64::EPSILON * 4.0;
    Ok(HeatValue {
        value,
        error_bound: tail_of(k_max) + rounding,
        terms_used: terms.len(),
        cutoff_length: f64::from(k_max) * l_min,
        method: Method::PathSum,
    })
}

/// Subdivide so that every region boundary point becomes a standard
/// degree-2 vertex, and report which new edges lie inside the region.
fn subdivide_at_region(
    graph: &MetricGraph,
    region: &RegionSpec,
) -> Result<(MetricGraph, Vec<bool>), EvalError> {
    let points = region.boundary_points(graph)?;
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); graph.num_edges()];
    for p in &points {
        cuts[p.edge.0].push(p.offset);
    }
    for c in &mut cuts {
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let mut vertices: Vec<VertexKind> = graph.vertices().map(|(_, k)| k).collect();
    let mut edge_list: Vec<(usize, usize, f64)> = Vec::new();
    let mut inside: Vec<bool> = Vec::new();
    let in_region = |e: usize, lo: f64, hi: f64| -> bool {
        let midpoint = 0.5 * (lo + hi);
        region
            .intervals
            .iter()
            .any(|&(re, a, b)| re.0 == e && a <= midpoint && midpoint <= b)
    };
    for e in graph.edges() {
        let mut prev_vertex = e.endpoints.0 .0;
        let mut prev_off = 0.0;
        for &cut in &cuts[e.id.0] {
            let nv = vertices.len();
            vertices.push(VertexKind::Standard);
            edge_list.push((prev_vertex, nv, cut - prev_off));
            inside.push(in_region(e.id.0, prev_off, cut));
            prev_vertex = nv;
            prev_off = cut;
        }
        edge_list.push((prev_vertex, e.endpoints.1 .0, e.length - prev_off));
        inside.push(in_region(e.id.0, prev_off, e.length));
    }
    Ok((MetricGraph::new(vertices, edge_list), inside))
}

/// Heat flux out of a region over time `t`:
/// `∫_H ∫_{G∖H} p_t(x,y) dy dx`, with a certified truncation bound.
///
/// Subdivides at the region boundary (degree-2 vertices are invisible to
/// the expansion), then sums the doubly integrated Gaussian over all
/// composite paths from region edges to complement edges. As `t → 0⁺`,
/// `√π/√t` times the flux tends to the number of boundary points.
pub fn boundary_flux(
    graph: &MetricGraph,
    region: &RegionSpec,
    t: f64,
    cfg: &EvalConfig,
) -> Result<HeatValue, EvalError> {
    graph.ensure_valid_kernel_domain()?;
    check_time(t)?;
    region.check(graph)?;
    let (cut, inside) = subdivide_at_region(graph, region)?;
    let l_min = cut.min_edge_length();
    let d = cut.max_degree().max(1) as f64;
    let c = l_min * l_min / (4.0 * t);
    let n_region_edges = inside.iter().filter(|&&b| b).count() as f64;
    let prefactor = 1.0 / (4.0 * PI * t).sqrt();
    // |per-pair mass| <= √(4π)·t·H(mid/2√t) <= √(4π)·t·e^{-mid²/4t}/√π
    let tail_of = |k: u32| {
        prefactor
            * 2.0
            * n_region_edges
            * d
            * (4.0 * PI).sqrt()
            * t
            * FRAC_1_SQRT_PI
            * crate::special::geometric_gauss_tail(d, c, k)
    };
    let k_max = (0..=sums::MAX_LAYERS)
        .find(|&k| tail_of(k) <= 0.9 * cfg.tolerance)
        .ok_or_else(|| EvalError::BudgetExceeded("flux tail does not certify".into()))?;
    let terms = sums::flux_terms(&cut, &inside, k_max, cfg.max_terms)?;
    let mut sum = CompensatedSum::new();
    for term in &terms {
        sum.add(term.coeff * gauss_edge_pair(term.len_from, term.len_to, term.mid, t));
    }
    let value = prefactor * sum.value();
    let rounding = prefactor * sum.abs_total() * f64::EPSILON * 4.0;
    Ok(HeatValue {
        value,
        error_bound: tail_of(k_max) + rounding,
        terms_used: terms.len(),
        cutoff_length: f64::from(k_max) * l_min,
        method: Method::PathSum,
    })
}

/// Right-hand side of the small-time two-term estimate:
///
/// ```text
/// |Q_t − |G| + (2√t/√π)·#V_D| ≤ (8√t/√π)·e^{-ℓ_min²/4t}/(1 − d_max·e^{-ℓ_min²/2t})
/// ```
///
/// valid for `0 < t < ℓ_min²/(2·log d_max)` (every `t` when `d_max = 1`).
pub fn small_time_bound(graph: &MetricGraph, t: f64) -> Result<f64, EvalError> {
    graph.ensure_valid()?;
    check_time(t)?;
    let l_min = graph.min_edge_length();
    let d = graph.max_degree() as f64;
    let window = if d <= 1.0 { f64::INFINITY } else { l_min * l_min / (2.0 * d.ln()) };
    if t >= window {
        return Err(EvalError::OutsideValidityWindow { t, window });
    }
    let z = l_min * l_min / (4.0 * t);
    Ok(8.0 * t.sqrt() * FRAC_1_SQRT_PI * (-z).exp() / (1.0 - d * (-2.0 * z).exp()))
}

/// Derivative of `t ↦ Q_t` with respect to lengthening the edge `e0`,
/// evaluated at the unperturbed graph:
///
/// ```text
/// dQ_t/ds|₀ = 1 − 2·Σ_p α(p)·(#_{e0} p)·erfc(ℓ(p)/2√t),
/// ```
///
/// summed over directed boundary-to-boundary paths, with a certified tail
/// using `#_{e0} p ≤ #p`. Tends to 1 as `t → 0⁺`.
pub fn hadamard_derivative(
    graph: &MetricGraph,
    e0: EdgeId,
    t: f64,
    cfg: &EvalConfig,
) -> Result<HeatValue, EvalError> {
    graph.ensure_valid()?;
    check_time(t)?;
    graph.edge(e0)?;
    let l_min = graph.min_edge_length();
    let d_max = graph.max_degree();
    let tail_of = |n: u32| special::derivative_tail_bound(d_max, l_min, t, n);
    let n0 = (1..=sums::MAX_LAYERS)
        .find(|&n| tail_of(n) <= 0.9 * cfg.tolerance)
        .ok_or_else(|| EvalError::BudgetExceeded("derivative tail does not certify".into()))?;
    let buckets = sums::boundary_buckets(graph, n0, cfg.max_terms, cfg.threads)?;
    let two_rt = 2.0 * t.sqrt();
    let mut sum = CompensatedSum::new();
    for (comp, len, coeff) in &buckets {
        let crossings = f64::from(comp[e0.0]);
        if crossings > 0.0 {
            sum.add(coeff * crossings * special::erfc(len / two_rt));
        }
    }
    let value = 1.0 - 2.0 * sum.value();
    let rounding = 2.0 * sum.abs_total() * f64::EPSILON * 4.0 + 4.0 * f64::EPSILON;
    Ok(HeatValue {
        value,
        error_bound: tail_of(n0) + rounding,
        terms_used: buckets.len(),
        cutoff_length: f64::from(n0) * l_min,
        method: Method::PathSum,
    })
}
