//! Heat content and heat kernels on compact finite metric graphs.
//!
//! A metric graph is a combinatorial graph whose edges are intervals of
//! prescribed positive lengths, glued at vertices. Imposing Dirichlet
//! conditions at a set of degree-one vertices (the "boundary") and standard
//! (continuity + Kirchhoff) conditions elsewhere defines a Laplacian whose
//! heat semigroup loses mass through the boundary. The *heat content*
//!
//! ```text
//! Q_t = ∫∫ p_t(x,y) dx dy
//! ```
//!
//! admits an exact expansion as a sum over directed paths that start and end
//! at Dirichlet vertices, weighted by scattering coefficients and the
//! integrated-Gaussian kernel `H(x) = e^{-x²}/√π − x·erfc(x)`:
//!
//! ```text
//! Q_t = |G| − (2√t/√π)·#V_D + 4√t · Σ_p α(p) · H(ℓ(p)/2√t)
//! ```
//!
//! This crate evaluates that expansion with certified truncation bounds,
//! together with the pointwise heat kernel path sum, boundary heat flux,
//! the Hadamard derivative of `Q_t` under edge lengthening, and a family of
//! exact surgery identities (midpoint loop cut, mirroring, scaling). An
//! independent finite-difference spectral solver provides ground truth for
//! cross-validation; it shares no code with the path-sum evaluators.

// Negated float comparisons like `!(x > 0.0)` are deliberate throughout:
// they treat NaN as a validation failure, which `x <= 0.0` would not.
// Range loops whose index doubles as a vertex/edge id stay as ranges.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod graph;
pub mod heat;
pub mod paths;
pub mod special;
pub mod spectral;

mod sums;

pub use graph::{
    Edge, EdgeId, GraphPoint, MetricGraph, RegionSpec, ValidationReport, VertexId, VertexKind,
};
pub use heat::{EvalConfig, EvalError, HeatValue, Method};
pub use paths::{Bond, Direction, DirectedPath, PathClass};
pub use spectral::{ClosedForm, SpectralError, SpectralModel};
