//! Independent spectral ground truth for the path-sum evaluators.
//!
//! The graph Laplacian with Dirichlet/standard vertex conditions is
//! discretized by piecewise-linear finite elements with a lumped (diagonal)
//! mass matrix: per edge a uniform grid of spacing `≤ h`, continuity at the
//! vertices, Dirichlet nodes eliminated. The Kirchhoff condition is what
//! the assembled stiffness matrix expresses at the shared vertex rows, to
//! `O(h²)`.
//!
//! The generalized eigenproblem `K φ = λ M φ` is solved in the symmetric
//! form `M^{-1/2} K M^{-1/2}` by shift-invert Lanczos with full
//! reorthogonalization, started at the (scaled) constant vector — exactly
//! the modes with nonzero mean, the only ones that can contribute to the
//! heat content
//!
//! ```text
//! Q_t = Σ_k e^{-λ_k t} (∫ φ_k)².
//! ```
//!
//! Crank–Nicolson time stepping provides a second, eigendecomposition-free
//! route to `Q_t`. Both share one linear-solve kernel: interior chains of
//! each edge are eliminated by static condensation onto the small dense
//! vertex system, which keeps every solve `O(#nodes)`.
//!
//! Nothing in this module touches scattering coefficients, paths or the
//! `H` kernel; it is the cross-check, not the subject.

use crate::graph::{GraphError, MetricGraph, VertexKind};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("mesh size {h} too coarse; need h < min edge length / 4 = {limit}")]
    MeshTooCoarse { h: f64, limit: f64 },
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),
    #[error("linear solve failure: {0}")]
    SolveFailure(String),
    #[error("singular system: Dirichlet set is empty")]
    SingularSystem,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Per-edge chain of the discretization: end vertices (None = eliminated
/// Dirichlet node) and the contiguous block of interior dof indices.
struct EdgeChain {
    v0: Option<usize>,
    v1: Option<usize>,
    interior_start: usize,
    interior_len: usize,
    h: f64,
}

/// Finite-difference model of the graph Laplacian.
pub struct SpectralModel {
    chains: Vec<EdgeChain>,
    /// Lumped mass per dof.
    mass: Vec<f64>,
    /// Stiffness diagonal per dof.
    k_diag: Vec<f64>,
    n_vertex_dofs: usize,
    n_dofs: usize,
    volume: f64,
    /// Converged eigenpairs `(λ, ⟨1, φ⟩)` in ascending λ, lazily filled.
    modes: std::cell::RefCell<Vec<(f64, f64)>>,
}

impl SpectralModel {
    /// Discretize with target spacing `h`; requires `h < ℓ_min/4`.
    pub fn build(graph: &MetricGraph, h: f64) -> Result<SpectralModel, SpectralError> {
        graph.ensure_valid()?;
        let l_min = graph.min_edge_length();
        if !(h > 0.0) || h >= l_min / 4.0 {
            return Err(SpectralError::MeshTooCoarse { h, limit: l_min / 4.0 });
        }
        let mut vertex_dof = vec![None; graph.num_vertices()];
        let mut n = 0usize;
        for (v, kind) in graph.vertices() {
            if kind == VertexKind::Standard {
                vertex_dof[v.0] = Some(n);
                n += 1;
            }
        }
        let n_vertex_dofs = n;
        let mut chains = Vec::with_capacity(graph.num_edges());
        for e in graph.edges() {
            let cells = (e.length / h).ceil() as usize;
            let he = e.length / cells as f64;
            let interior = cells - 1;
            chains.push(EdgeChain {
                v0: vertex_dof[e.endpoints.0 .0],
                v1: vertex_dof[e.endpoints.1 .0],
                interior_start: n,
                interior_len: interior,
                h: he,
            });
            n += interior;
        }
        let mut mass = vec![0.0; n];
        let mut k_diag = vec![0.0; n];
        for c in &chains {
            // element contributions along the chain v0 - i0 - ... - v1
            let nodes: Vec<Option<usize>> = std::iter::once(c.v0)
                .chain((0..c.interior_len).map(|j| Some(c.interior_start + j)))
                .chain(std::iter::once(c.v1))
                .collect();
            for w in nodes.windows(2) {
                for node in [w[0], w[1]].into_iter().flatten() {
                    mass[node] += c.h / 2.0;
                    k_diag[node] += 1.0 / c.h;
                }
            }
        }
        Ok(SpectralModel {
            chains,
            mass,
            k_diag,
            n_vertex_dofs,
            n_dofs: n,
            volume: graph.volume(),
            modes: std::cell::RefCell::new(Vec::new()),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n_dofs
    }

    /// `y = K x` (stiffness matvec).
    fn k_apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, v) in y.iter_mut().enumerate() {
            *v = self.k_diag[i] * x[i];
        }
        for c in &self.chains {
            let off = -1.0 / c.h;
            let mut prev = c.v0;
            for j in 0..c.interior_len {
                let cur = c.interior_start + j;
                if let Some(p) = prev {
                    y[p] += off * x[cur];
                    y[cur] += off * x[p];
                }
                prev = Some(cur);
            }
            if let (Some(p), Some(v1)) = (prev, c.v1) {
                if c.interior_len == 0 {
                    if let Some(v0) = c.v0 {
                        y[v0] += off * x[v1];
                        y[v1] += off * x[v0];
                    }
                } else {
                    y[p] += off * x[v1];
                    y[v1] += off * x[p];
                }
            } else if c.interior_len == 0 {
                // both ends Dirichlet with no interior cannot happen (h < ℓ/4)
            } else if let (None, Some(_)) = (prev, c.v1) {
                unreachable!("chain bookkeeping");
            }
        }
    }
}

/// Cholesky-style factorization of `α·M + β·K` with the interior of every
/// edge chain eliminated onto the dense vertex block.
struct CondensedSolver<'m> {
    model: &'m SpectralModel,
    beta: f64,
    /// per chain: LDL factors of the interior tridiagonal block
    chain_d: Vec<Vec<f64>>,
    chain_l: Vec<Vec<f64>>,
    /// dense Cholesky factor of the condensed vertex system (row-major, lower)
    vertex_chol: Vec<f64>,
    nv: usize,
}

impl<'m> CondensedSolver<'m> {
    fn new(model: &'m SpectralModel, alpha: f64, beta: f64) -> Result<Self, SpectralError> {
        let nv = model.n_vertex_dofs;
        let diag =
            |i: usize| -> f64 { alpha * model.mass[i] + beta * model.k_diag[i] };
        let mut s = vec![0.0; nv * nv];
        for i in 0..nv {
            s[i * nv + i] = diag(i);
        }
        let mut chain_d = Vec::with_capacity(model.chains.len());
        let mut chain_l = Vec::with_capacity(model.chains.len());
        for c in &model.chains {
            let m = c.interior_len;
            let off = -beta / c.h;
            let mut d = Vec::with_capacity(m);
            let mut l = Vec::with_capacity(m.saturating_sub(1));
            for j in 0..m {
                let mut dj = diag(c.interior_start + j);
                if j > 0 {
                    let lj = off / d[j - 1];
                    dj -= lj * off;
                    l.push(lj);
                }
                if dj <= 0.0 {
                    return Err(SpectralError::SolveFailure(
                        "condensed pivot not positive".to_string(),
                    ));
                }
                d.push(dj);
            }
            // Schur corrections onto the (possibly equal) end vertices
            if m > 0 {
                let z00 = tridiag_inv_entry(&d, &l, m, 0, 0);
                let zmm = tridiag_inv_entry(&d, &l, m, m - 1, m - 1);
                let z0m = tridiag_inv_entry(&d, &l, m, 0, m - 1);
                if let Some(i0) = c.v0 {
                    s[i0 * nv + i0] -= off * off * z00;
                }
                if let Some(i1) = c.v1 {
                    s[i1 * nv + i1] -= off * off * zmm;
                }
                if let (Some(i0), Some(i1)) = (c.v0, c.v1) {
                    s[i0 * nv + i1] -= off * off * z0m;
                    if i0 != i1 {
                        s[i1 * nv + i0] -= off * off * z0m;
                    } else {
                        s[i0 * nv + i0] -= off * off * z0m;
                    }
                }
            } else if let (Some(i0), Some(i1)) = (c.v0, c.v1) {
                // direct vertex-vertex coupling
                s[i0 * nv + i1] += off;
                s[i1 * nv + i0] += off;
            }
            chain_d.push(d);
            chain_l.push(l);
        }
        // dense Cholesky of the vertex block
        for i in 0..nv {
            for j in 0..=i {
                let mut sum = s[i * nv + j];
                for k in 0..j {
                    sum -= s[i * nv + k] * s[j * nv + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(SpectralError::SolveFailure(
                            "vertex block not positive definite".to_string(),
                        ));
                    }
                    s[i * nv + j] = sum.sqrt();
                } else {
                    s[i * nv + j] = sum / s[j * nv + j];
                }
            }
        }
        Ok(CondensedSolver { model, beta, chain_d, chain_l, vertex_chol: s, nv })
    }

    /// Solve `(α·M + β·K) x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let model = self.model;
        let nv = self.nv;
        let mut x = vec![0.0; model.n_dofs];
        // forward-eliminate interiors into the vertex rhs
        let mut rv: Vec<f64> = b[..nv].to_vec();
        for (ci, c) in model.chains.iter().enumerate() {
            let m = c.interior_len;
            let off = -self.beta / c.h;
            if m == 0 {
                continue;
            }
            let bi = &b[c.interior_start..c.interior_start + m];
            let y = tridiag_solve(&self.chain_d[ci], &self.chain_l[ci], bi);
            if let Some(i0) = c.v0 {
                rv[i0] -= off * y[0];
            }
            if let Some(i1) = c.v1 {
                rv[i1] -= off * y[m - 1];
            }
        }
        // dense solve L Lᵀ xv = rv
        let chol = &self.vertex_chol;
        let mut xv = rv;
        for i in 0..nv {
            let mut sum = xv[i];
            for k in 0..i {
                sum -= chol[i * nv + k] * xv[k];
            }
            xv[i] = sum / chol[i * nv + i];
        }
        for i in (0..nv).rev() {
            let mut sum = xv[i];
            for k in (i + 1)..nv {
                sum -= chol[k * nv + i] * xv[k];
            }
            xv[i] = sum / chol[i * nv + i];
        }
        x[..nv].copy_from_slice(&xv);
        // back-substitute interiors: x_I = T^{-1}(b_I − coupling·xv)
        for (ci, c) in model.chains.iter().enumerate() {
            let m = c.interior_len;
            if m == 0 {
                continue;
            }
            let off = -self.beta / c.h;
            let mut rhs: Vec<f64> = b[c.interior_start..c.interior_start + m].to_vec();
            if let Some(i0) = c.v0 {
                rhs[0] -= off * xv[i0];
            }
            if let Some(i1) = c.v1 {
                rhs[m - 1] -= off * xv[i1];
            }
            let y = tridiag_solve(&self.chain_d[ci], &self.chain_l[ci], &rhs);
            x[c.interior_start..c.interior_start + m].copy_from_slice(&y);
        }
        x
    }
}

/// Solve the LDLᵀ-factored tridiagonal system.
fn tridiag_solve(d: &[f64], l: &[f64], b: &[f64]) -> Vec<f64> {
    let m = d.len();
    let mut y = b.to_vec();
    for j in 1..m {
        let carry = l[j - 1] * y[j - 1];
        y[j] -= carry;
    }
    for j in 0..m {
        y[j] /= d[j];
    }
    for j in (0..m.saturating_sub(1)).rev() {
        let carry = l[j] * y[j + 1];
        y[j] -= carry;
    }
    y
}

/// `(T^{-1})_{ij}` for the factored tridiagonal, via a unit-vector solve.
fn tridiag_inv_entry(d: &[f64], l: &[f64], m: usize, i: usize, j: usize) -> f64 {
    let mut e = vec![0.0; m];
    e[j] = 1.0;
    tridiag_solve(d, l, &e)[i]
}

/// Symmetric tridiagonal eigendecomposition (implicit QL with shifts).
/// `diag`/`off` are overwritten; `z` accumulates eigenvectors (columns).
fn tql2(diag: &mut [f64], off: &mut [f64], z: &mut [f64], n: usize) -> Result<(), SpectralError> {
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(SpectralError::EigenFailure("QL did not converge".to_string()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

impl SpectralModel {
    /// Shift-invert Lanczos from the scaled constant vector; fills the
    /// cached `(λ_k, ⟨1, φ_k⟩)` list until the tail factor `e^{-λ t}·|G|`
    /// drops below `slack` for the given `t`.
    fn ensure_modes(&self, t: f64, slack: f64) -> Result<(), SpectralError> {
        let lambda_stop = (self.volume / slack.max(1e-300)).ln().max(1.0) / t;
        {
            let modes = self.modes.borrow();
            if let Some(&(last, _)) = modes.last() {
                if last > lambda_stop {
                    return Ok(());
                }
            }
        }
        let n = self.n_dofs;
        let solver = CondensedSolver::new(self, 0.0, 1.0)?;
        let sqrt_m: Vec<f64> = self.mass.iter().map(|&m| m.sqrt()).collect();
        // apply B = M^{1/2} K^{-1} M^{1/2}
        let apply = |x: &[f64]| -> Vec<f64> {
            let rhs: Vec<f64> = x.iter().zip(&sqrt_m).map(|(&a, &s)| a * s).collect();
            let y = solver.solve(&rhs);
            y.iter().zip(&sqrt_m).map(|(&a, &s)| a * s).collect()
        };
        let b0: Vec<f64> = sqrt_m.clone(); // M^{1/2}·1
        let b0_norm = norm(&b0);
        let mut v_prev = vec![0.0; n];
        let mut v: Vec<f64> = b0.iter().map(|&x| x / b0_norm).collect();
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let j_max = n.min(500);
        let mut invariant = false;
        for _ in 0..j_max {
            let mut w = apply(&v);
            let a = dot(&w, &v);
            alphas.push(a);
            for i in 0..n {
                w[i] -= a * v[i] + if betas.is_empty() { 0.0 } else { betas[betas.len() - 1] * v_prev[i] };
            }
            // full reorthogonalization, twice for safety
            for _pass in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for i in 0..n {
                        w[i] -= c * q[i];
                    }
                }
            }
            let b = norm(&w);
            if b < 1e-13 {
                invariant = true;
                break;
            }
            betas.push(b);
            v_prev = v;
            v = w.iter().map(|&x| x / b).collect();
            basis.push(v.clone());
            // check whether enough Ritz values converged
            if alphas.len().is_multiple_of(24) {
                if let Some(done) =
                    self.try_extract(&alphas, &betas, &basis, b0_norm, lambda_stop)?
                {
                    if done {
                        return Ok(());
                    }
                }
            }
        }
        match self.try_extract(&alphas, &betas, &basis, b0_norm, lambda_stop)? {
            Some(true) => Ok(()),
            _ if invariant => {
                // Krylov space exhausted: every mean-carrying mode captured
                Ok(())
            }
            _ => Err(SpectralError::EigenFailure(format!(
                "Lanczos did not reach λ = {lambda_stop:.3} within {j_max} iterations"
            ))),
        }
    }

    /// Eigen-extract the current tridiagonal; update the cache. Returns
    /// Some(true) when the converged set reaches `lambda_stop`.
    fn try_extract(
        &self,
        alphas: &[f64],
        betas: &[f64],
        basis: &[Vec<f64>],
        b0_norm: f64,
        lambda_stop: f64,
    ) -> Result<Option<bool>, SpectralError> {
        let j = alphas.len();
        if j == 0 {
            return Ok(None);
        }
        let mut diag = alphas.to_vec();
        let mut off = vec![0.0; j];
        off[..j - 1].copy_from_slice(&betas[..j - 1]);
        let mut z = vec![0.0; j * j];
        for i in 0..j {
            z[i * j + i] = 1.0;
        }
        tql2(&mut diag, &mut off, &mut z, j)?;
        // Ritz pairs of B = A^{-1}: θ descending ↔ λ = 1/θ ascending
        let mut order: Vec<usize> = (0..j).collect();
        order.sort_by(|&a, &b| diag[b].partial_cmp(&diag[a]).unwrap());
        let beta_last = if betas.len() >= j { betas[j - 1] } else { 0.0 };
        let mut modes: Vec<(f64, f64)> = Vec::new();
        for &idx in &order {
            let theta = diag[idx];
            if theta <= 0.0 {
                break;
            }
            let resid = (beta_last * z[(j - 1) * j + idx]).abs();
            if resid > 1e-10 * theta {
                break; // later Ritz values are even less converged
            }
            let lambda = 1.0 / theta;
            // c = ⟨M^{1/2}·1, w⟩ = b0_norm · (first Lanczos coefficient)
            let mut first_coeff = 0.0;
            for (i, q) in basis.iter().take(j).enumerate() {
                let _ = q;
                first_coeff += if i == 0 { z[idx] } else { 0.0 };
            }
            let c = b0_norm * first_coeff;
            modes.push((lambda, c));
            if lambda > lambda_stop {
                self.modes.replace(modes);
                return Ok(Some(true));
            }
        }
        if modes.len() > self.modes.borrow().len() {
            self.modes.replace(modes);
        }
        Ok(Some(false))
    }

    /// `Q_t` through the eigenexpansion, truncated once the spectral tail
    /// bound `e^{-λ t}·|G|` falls below `slack`.
    pub fn eigen_heat_content(&self, t: f64, slack: f64) -> Result<f64, SpectralError> {
        assert!(t > 0.0);
        self.ensure_modes(t, slack)?;
        let modes = self.modes.borrow();
        let mut q = 0.0;
        for &(lambda, c) in modes.iter() {
            q += (-lambda * t).exp() * c * c;
        }
        Ok(q)
    }

    /// Smallest eigenvalue of the discrete operator.
    pub fn lambda_1(&self) -> Result<f64, SpectralError> {
        self.ensure_modes(1.0, 1e-6 * self.volume)?;
        let modes = self.modes.borrow();
        modes
            .first()
            .map(|&(l, _)| l)
            .ok_or_else(|| SpectralError::EigenFailure("no converged mode".to_string()))
    }

    /// Converged eigenvalues (ascending, mean-carrying modes only).
    pub fn eigenvalues(&self, count: usize, t_scale: f64) -> Result<Vec<f64>, SpectralError> {
        self.ensure_modes(t_scale, 1e-9 * self.volume)?;
        let modes = self.modes.borrow();
        Ok(modes.iter().take(count).map(|&(l, _)| l).collect())
    }

    /// Crank–Nicolson state `u(t)` from `u(0) = 1`, with `steps` steps.
    fn cn_state(&self, t: f64, steps: usize) -> Result<Vec<f64>, SpectralError> {
        let dt = t / steps as f64;
        let forward = CondensedSolver::new(self, 1.0, dt / 2.0)?;
        let mut u = vec![1.0; self.n_dofs];
        let mut ku = vec![0.0; self.n_dofs];
        for _ in 0..steps {
            self.k_apply(&u, &mut ku);
            let rhs: Vec<f64> = (0..self.n_dofs)
                .map(|i| self.mass[i] * u[i] - dt / 2.0 * ku[i])
                .collect();
            u = forward.solve(&rhs);
        }
        Ok(u)
    }

    fn mass_integral(&self, u: &[f64]) -> f64 {
        self.mass.iter().zip(u).map(|(&m, &x)| m * x).sum()
    }

    /// `Q_t` by adaptive Crank–Nicolson: step counts double until the
    /// change drops below the solver tolerance.
    pub fn stepper_heat_content(&self, t: f64) -> Result<f64, SpectralError> {
        assert!(t > 0.0);
        let mut steps = 64usize;
        let mut prev = self.mass_integral(&self.cn_state(t, steps)?);
        loop {
            steps *= 2;
            let cur = self.mass_integral(&self.cn_state(t, steps)?);
            if (cur - prev).abs() <= 1e-10 * (1.0 + cur.abs()) || steps >= (1 << 17) {
                return Ok(cur);
            }
            prev = cur;
        }
    }

    /// The pair `(Q_{2t} by stepping, ‖e^{tΔ}1‖²)` with a shared step size,
    /// which the discrete semigroup property makes equal to roundoff.
    pub fn l2_mass_identity(&self, t: f64) -> Result<(f64, f64), SpectralError> {
        let steps = 512usize;
        let u2 = self.cn_state(2.0 * t, 2 * steps)?;
        let q_2t = self.mass_integral(&u2);
        let u1 = self.cn_state(t, steps)?;
        let norm_sq = self.mass.iter().zip(&u1).map(|(&m, &x)| m * x * x).sum();
        Ok((q_2t, norm_sq))
    }

    /// Torsional rigidity `T = ∫ u` with `−Δu = 1`.
    pub fn torsional_rigidity(&self) -> Result<f64, SpectralError> {
        if self.n_dofs == 0 {
            return Err(SpectralError::SingularSystem);
        }
        let solver = CondensedSolver::new(self, 0.0, 1.0)?;
        let u = solver.solve(&self.mass);
        Ok(self.mass_integral(&u))
    }

    /// Least-squares slope of `−log Q_t` against `t` over the grid tail;
    /// approaches `λ₁` for large times.
    pub fn large_time_rate(&self, t_grid: &[f64]) -> Result<f64, SpectralError> {
        assert!(t_grid.len() >= 2);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &t in t_grid {
            let q = self.eigen_heat_content(t, 1e-14 * self.volume)?;
            if q <= 0.0 || !q.is_finite() {
                return Err(SpectralError::EigenFailure(format!("Q_t underflow at t = {t}")));
            }
            xs.push(t);
            ys.push(-q.ln());
        }
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
    }
}

/// Mesh pair with Richardson extrapolation; the error estimate is the
/// observed inter-mesh gap (conservative for an O(h²) method).
pub fn oracle_heat_content(graph: &MetricGraph, t: f64) -> Result<(f64, f64), SpectralError> {
    let l_min = graph.min_edge_length();
    let h1 = (l_min / 4.5).min(graph.volume() / 300.0);
    let coarse = SpectralModel::build(graph, h1)?;
    let fine = SpectralModel::build(graph, h1 / 2.0)?;
    let slack = 1e-13 * graph.volume();
    let q1 = coarse.eigen_heat_content(t, slack)?;
    let q2 = fine.eigen_heat_content(t, slack)?;
    let value = (4.0 * q2 - q1) / 3.0;
    let error = (q1 - q2).abs().max(5e-11);
    Ok((value, error))
}

/// Families with closed-form heat content.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `[0, ℓ]`, Dirichlet at one end.
    IntervalMixed { length: f64 },
    /// `[0, ℓ]`, Dirichlet at both ends.
    IntervalDirichlet { length: f64 },
    /// Equilateral star, all outer vertices Dirichlet.
    StarAllDirichlet { arms: usize, arm_length: f64 },
    /// `m` parallel copies of `[0, ℓ]` glued at interior cross sections,
    /// Dirichlet at one or both chain ends.
    PumpkinChain { multiplicity: usize, length: f64, dirichlet_ends: usize },
    /// The `m`-fold mirror of a length-`2ℓ` path with one Dirichlet end,
    /// mirrored at its midpoint: a `2m`-star with `m` Dirichlet and `m`
    /// standard leaves of arm length `ℓ`.
    MirroredHalfStar { multiplicity: usize, arm_length: f64 },
}

/// Lumped interval series `(8ℓ/π²)·Σ_k e^{-t(π(2k+1)·nd/2ℓ)²}/(2k+1)²`.
fn interval_series(length: f64, dirichlet_ends: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        let odd = f64::from(2 * k + 1);
        let rate = PI * odd * dirichlet_ends as f64 / (2.0 * length);
        let term = (-t * rate * rate).exp() / (odd * odd);
        sum += term;
        // k = 0 always contributes; stop on relative stagnation
        if k > 0 && term < 1e-17 * sum {
            break;
        }
        if k > 200_000 {
            break;
        }
        k += 1;
    }
    8.0 * length / (PI * PI) * sum
}

/// Evaluate a closed-form family to machine precision.
pub fn closed_form_heat_content(form: &ClosedForm, t: f64) -> Result<f64, SpectralError> {
    if !(t > 0.0) {
        return Err(SpectralError::EigenFailure(format!("time must be positive, got {t}")));
    }
    Ok(match *form {
        ClosedForm::IntervalMixed { length } => interval_series(length, 1, t),
        ClosedForm::IntervalDirichlet { length } => interval_series(length, 2, t),
        ClosedForm::StarAllDirichlet { arms, arm_length } => {
            arms as f64 * interval_series(arm_length, 1, t)
        }
        ClosedForm::PumpkinChain { multiplicity, length, dirichlet_ends } => {
            multiplicity as f64 * interval_series(length, dirichlet_ends, t)
        }
        ClosedForm::MirroredHalfStar { multiplicity, arm_length } => {
            multiplicity as f64 * interval_series(2.0 * arm_length, 1, t)
        }
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;

    #[test]
    fn interval_eigen_matches_series() {
        let g = MetricGraph::interval(3.0, (true, false));
        let model = SpectralModel::build(&g, 1e-3).unwrap();
        let t = 0.5;
        let q = model.eigen_heat_content(t, 1e-12).unwrap();
        let series = closed_form_heat_content(&ClosedForm::IntervalMixed { length: 3.0 }, t).unwrap();
        assert!((q - series).abs() < 5e-6, "eigen {q} vs series {series}");
    }

    #[test]
    fn interval_lambda1() {
        let g = MetricGraph::interval(3.0, (true, false));
        let model = SpectralModel::build(&g, 1e-3).unwrap();
        let l1 = model.lambda_1().unwrap();
        let exact = PI * PI / (4.0 * 9.0);
        assert!((l1 - exact).abs() < 1e-5 * exact, "λ1 {l1} vs exact {exact}");
    }

    #[test]
    fn poincare_floor_on_assorted_graphs() {
        let graphs = vec![
            MetricGraph::interval(2.7, (true, false)),
            MetricGraph::interval(1.3, (true, true)),
            MetricGraph::star(4, 0.9, 2),
            MetricGraph::lasso(0.8, 1.7),
        ];
        for g in graphs {
            let h = g.min_edge_length() / 60.0;
            let model = SpectralModel::build(&g, h).unwrap();
            let l1 = model.lambda_1().unwrap();
            let floor = PI * PI / (4.0 * g.volume() * g.volume());
            // the one-Dirichlet interval attains the floor exactly, and the
            // lumped discretization approaches λ1 from below at O(h²λ²)
            let slack = l1 * l1 * h * h;
            assert!(l1 >= floor - slack, "λ1 {l1} below Poincaré floor {floor}");
        }
    }

    #[test]
    fn stepper_agrees_with_eigen() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let model = SpectralModel::build(&g, 5e-3).unwrap();
        let t = 0.4;
        let qe = model.eigen_heat_content(t, 1e-12).unwrap();
        let qs = model.stepper_heat_content(t).unwrap();
        assert!((qe - qs).abs() < 1e-8, "eigen {qe} vs stepper {qs}");
    }

    #[test]
    fn torsional_rigidity_of_interval() {
        // −u'' = 1, u(0) = 0, u'(ℓ) = 0 integrates to ℓ³/3
        let l = 2.0;
        let g = MetricGraph::interval(l, (true, false));
        let model = SpectralModel::build(&g, 1e-3).unwrap();
        let t = model.torsional_rigidity().unwrap();
        assert!((t - l * l * l / 3.0).abs() < 1e-5, "T = {t}");
    }

    #[test]
    fn torsional_rigidity_equals_time_integral_of_heat_content() {
        // T = ∫_0^∞ Q_t dt: integrate the path-sum values over [0, |G|²]
        // (substituting t = u² removes the √t cusp at the origin) and close
        // with the single-mode tail Q(t*)/λ₁, accurate to e^{-(λ₂−λ₁)t*}.
        use crate::heat::{heat_content, EvalConfig, Method};
        let g = MetricGraph::lasso(1.0, 2.0);
        let c = EvalConfig::default().with_tolerance(1e-9).with_method(Method::PathSum);
        let q = |t: f64| heat_content(&g, t, &c).unwrap().value;
        let t_star = g.volume() * g.volume();
        let integrand = |u: f64| if u == 0.0 { 0.0 } else { 2.0 * u * q(u * u) };
        // composite Simpson in u; the integrand is smooth
        let n = 600;
        let hu = t_star.sqrt() / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * integrand(i as f64 * hu);
        }
        let head = acc * hu / 3.0;
        let model = SpectralModel::build(&g, 2e-3).unwrap();
        let l1 = model.lambda_1().unwrap();
        let integral = head + q(t_star) / l1;
        let torsion = model.torsional_rigidity().unwrap();
        assert!(
            (integral - torsion).abs() <= 1e-4 * torsion,
            "∫Q dt = {integral} vs T = {torsion}"
        );
    }

    #[test]
    fn polya_szego_inequality() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let model = SpectralModel::build(&g, 2e-3).unwrap();
        let t = model.torsional_rigidity().unwrap();
        let l1 = model.lambda_1().unwrap();
        assert!(l1 * t < g.volume());
    }

    #[test]
    fn l2_identity_holds() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let model = SpectralModel::build(&g, 5e-3).unwrap();
        let (q2t, norm_sq) = model.l2_mass_identity(0.3).unwrap();
        assert!((q2t - norm_sq).abs() < 1e-8 * (1.0 + q2t.abs()));
    }

    #[test]
    fn mesh_convergence_is_second_order() {
        let g = MetricGraph::lasso(1.0, 2.0);
        let t = 0.5;
        let exact = {
            let m = SpectralModel::build(&g, 6.25e-4).unwrap();
            m.eigen_heat_content(t, 1e-13).unwrap()
        };
        let e1 = {
            let m = SpectralModel::build(&g, 1e-2).unwrap();
            (m.eigen_heat_content(t, 1e-13).unwrap() - exact).abs()
        };
        let e2 = {
            let m = SpectralModel::build(&g, 5e-3).unwrap();
            (m.eigen_heat_content(t, 1e-13).unwrap() - exact).abs()
        };
        let ratio = e1 / e2;
        assert!(
            ratio > 2.5 && ratio < 6.5,
            "halving h should shrink the error ~4x, got {ratio} ({e1} -> {e2})"
        );
    }

    #[test]
    fn large_time_rate_approaches_lambda1() {
        let g = MetricGraph::interval(3.0, (true, false));
        let model = SpectralModel::build(&g, 2e-3).unwrap();
        let l1 = model.lambda_1().unwrap();
        let grid: Vec<f64> = (0..8).map(|i| (10.0 + 5.0 * i as f64) / l1).collect();
        let rate = model.large_time_rate(&grid).unwrap();
        assert!((rate - l1).abs() < 0.01 * l1, "rate {rate} vs λ1 {l1}");
    }

    #[test]
    fn time_derivatives_alternate_in_sign() {
        // dⁿQ/dtⁿ = Σ (−λ)ⁿ e^{-λt}·c² keeps the sign of (−1)ⁿ
        let g = MetricGraph::lasso(1.0, 2.0);
        let model = SpectralModel::build(&g, 2e-3).unwrap();
        let dt = 1e-3;
        for t in [0.2, 0.6, 1.5] {
            let qm = model.eigen_heat_content(t - dt, 1e-13).unwrap();
            let q0 = model.eigen_heat_content(t, 1e-13).unwrap();
            let qp = model.eigen_heat_content(t + dt, 1e-13).unwrap();
            assert!((qp - qm) / (2.0 * dt) < 0.0, "first derivative negative at t={t}");
            assert!((qp - 2.0 * q0 + qm) / (dt * dt) > 0.0, "second derivative positive at t={t}");
        }
    }

    #[test]
    fn build_rejects_coarse_mesh() {
        let g = MetricGraph::interval(1.0, (true, false));
        assert!(matches!(
            SpectralModel::build(&g, 0.3),
            Err(SpectralError::MeshTooCoarse { .. })
        ));
    }

    #[test]
    fn closed_forms_are_consistent() {
        // star = arms × mixed interval; pumpkin = m × interval
        let t = 0.2;
        let star = closed_form_heat_content(
            &ClosedForm::StarAllDirichlet { arms: 5, arm_length: 1.0 },
            t,
        )
        .unwrap();
        let mixed =
            closed_form_heat_content(&ClosedForm::IntervalMixed { length: 1.0 }, t).unwrap();
        assert!((star - 5.0 * mixed).abs() < 1e-15);
        let pumpkin = closed_form_heat_content(
            &ClosedForm::PumpkinChain { multiplicity: 3, length: 2.0, dirichlet_ends: 2 },
            t,
        )
        .unwrap();
        let dirichlet =
            closed_form_heat_content(&ClosedForm::IntervalDirichlet { length: 2.0 }, t).unwrap();
        assert!((pumpkin - 3.0 * dirichlet).abs() < 1e-15);
    }
}
