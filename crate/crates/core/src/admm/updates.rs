//! Primal and dual updates of one ADMM sweep.
//!
//! The `x` and `w` systems are the stationarity conditions of the augmented
//! Lagrangian in those variables, applied matrix-free and solved with CG. The
//! operator in `x` always contains `(ρ_box + ρ_sphere [+ ρ_must_copy]
//! [+ ρ_cannot_copy])·I` and is therefore positive definite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::lagrangian::coupling_residual;
use super::{Penalties, Problem, SolverConfig, SolverState};
use crate::data::dot;
use crate::linalg::{conjugate_gradient, CgOutcome, LinearOperator};
use crate::objective::distances_into;
use crate::ops::{c_into, perm_into, psi_t_into, sizes_into};

/// The linear system solved for `x` with every other variable held fixed.
pub struct XSystem<'a> {
    problem: &'a Problem,
    rho: Penalties,
    /// `P w`.
    pw: Vec<f64>,
    /// `E₂ᵀE₁ z_must`, the gradient of the must-link bilinear form in `x`.
    must_dir: Vec<f64>,
    /// `E₄ᵀE₃ z_cannot`.
    cannot_dir: Vec<f64>,
    identity_weight: f64,
    rhs: Vec<f64>,
}

impl<'a> XSystem<'a> {
    pub fn new(problem: &'a Problem, state: &SolverState, rho: &Penalties) -> Self {
        let shape = problem.shape;
        let (n, k, nk) = (shape.n, shape.k, shape.nk());
        let mut pw = vec![0.0; nk];
        perm_into(&shape, &state.w, &mut pw);
        let mut must_dir = vec![0.0; nk];
        let mut cannot_dir = vec![0.0; nk];

        let mut identity_weight = rho.box_copy + rho.sphere_copy;
        let mut g = vec![0.0; nk];
        distances_into(&problem.data, &shape, &state.w, &mut g);
        for i in 0..n {
            let psi_term = state.y_one_hot[i] - rho.one_hot;
            for j in 0..k {
                let q = i * k + j;
                g[q] += psi_term + state.y_box[q] - rho.box_copy * state.z_box[q]
                    + state.y_sphere[q]
                    - rho.sphere_copy * state.z_sphere[q];
            }
        }
        if let Some(u) = &problem.targets {
            for row in g.chunks_exact_mut(k) {
                for (j, gq) in row.iter_mut().enumerate() {
                    *gq += state.y_cardinality[j] - rho.cardinality * u[j];
                }
            }
        }
        // Mᵀ y_coupling with M = I − diag(Pw) C
        let weighted: Vec<f64> = pw.iter().zip(&state.y_coupling).map(|(p, y)| p * y).collect();
        let mut spread = vec![0.0; nk];
        c_into(&shape, &weighted, &mut spread);
        for q in 0..nk {
            g[q] += state.y_coupling[q] - spread[q];
        }
        if problem.has_must_links() {
            identity_weight += rho.must_copy;
            problem.must.backward_into(k, &state.z_must, &mut must_dir);
            let scale = state.y_must - rho.must_link * problem.v();
            for q in 0..nk {
                g[q] += scale * must_dir[q] + state.y_must_copy[q]
                    - rho.must_copy * state.z_must[q];
            }
        }
        if problem.has_cannot_links() {
            identity_weight += rho.cannot_copy;
            problem.cannot.backward_into(k, &state.z_cannot, &mut cannot_dir);
            for q in 0..nk {
                g[q] += state.y_cannot * cannot_dir[q] + state.y_cannot_copy[q]
                    - rho.cannot_copy * state.z_cannot[q];
            }
        }
        g.iter_mut().for_each(|v| *v = -*v);

        Self {
            problem,
            rho: *rho,
            pw,
            must_dir,
            cannot_dir,
            identity_weight,
            rhs: g,
        }
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Lower bound on `⟨Av, v⟩ / ‖v‖²` contributed by the identity block.
    pub fn identity_weight(&self) -> f64 {
        self.identity_weight
    }
}

impl LinearOperator for XSystem<'_> {
    fn dim(&self) -> usize {
        self.problem.shape.nk()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let shape = self.problem.shape;
        let (n, k, nk) = (shape.n, shape.k, shape.nk());
        let rho = &self.rho;
        for (o, vi) in out.iter_mut().zip(v) {
            *o = self.identity_weight * vi;
        }

        let mut per_point = vec![0.0; n];
        psi_t_into(&shape, v, &mut per_point);
        for (row, s) in out.chunks_exact_mut(k).zip(&per_point) {
            row.iter_mut().for_each(|o| *o += rho.one_hot * s);
        }

        if self.problem.has_cardinality() {
            let mut sizes = vec![0.0; k];
            sizes_into(&shape, v, &mut sizes);
            for row in out.chunks_exact_mut(k) {
                for (o, s) in row.iter_mut().zip(&sizes) {
                    *o += rho.cardinality * s;
                }
            }
        }

        // ρ Mᵀ M v
        let mut cv = vec![0.0; nk];
        c_into(&shape, v, &mut cv);
        let mv: Vec<f64> = (0..nk).map(|q| v[q] - self.pw[q] * cv[q]).collect();
        let weighted: Vec<f64> = mv.iter().zip(&self.pw).map(|(m, p)| m * p).collect();
        c_into(&shape, &weighted, &mut cv);
        for q in 0..nk {
            out[q] += rho.coupling * (mv[q] - cv[q]);
        }

        if self.problem.has_must_links() {
            let s = rho.must_link * dot(&self.must_dir, v);
            out.iter_mut().zip(&self.must_dir).for_each(|(o, a)| *o += s * a);
        }
        if self.problem.has_cannot_links() {
            let s = rho.cannot_link * dot(&self.cannot_dir, v);
            out.iter_mut().zip(&self.cannot_dir).for_each(|(o, a)| *o += s * a);
        }
    }
}

/// Solves the `x` system by CG, warm-started from the current `x`.
pub fn update_x(problem: &Problem, state: &mut SolverState, cfg: &SolverConfig) -> CgOutcome {
    let rho = cfg.penalties();
    let system = XSystem::new(problem, state, &rho);
    let cap = cfg.cg_cap(problem.shape.nk());
    conjugate_gradient(&system, system.rhs(), &mut state.x, cfg.cg_tol, cap)
}

/// The linear system solved for `w`. It is block diagonal over clusters; block
/// `j` is `2 m_j SᵀS + (ρ m_j² + ε) I` with `m_j` the mass of cluster `j`.
pub struct WSystem<'a> {
    problem: &'a Problem,
    masses: Vec<f64>,
    coupling: f64,
    ridge: f64,
    rhs: Vec<f64>,
}

impl<'a> WSystem<'a> {
    pub fn new(problem: &'a Problem, state: &SolverState, rho: &Penalties, ridge: f64) -> Self {
        let shape = problem.shape;
        let (n, k, d) = (shape.n, shape.k, shape.d);
        let data = &problem.data;
        let mut masses = vec![0.0; k];
        sizes_into(&shape, &state.x, &mut masses);

        let mut rhs = vec![0.0; shape.nk()];
        let mut weighted_sum = vec![0.0; d];
        for j in 0..k {
            weighted_sum.fill(0.0);
            for i in 0..n {
                let xij = state.x[i * k + j];
                for (acc, s) in weighted_sum.iter_mut().zip(data.point(i)) {
                    *acc += xij * s;
                }
            }
            for p in 0..n {
                let q = i_pm(p, j, k);
                rhs[j * n + p] = 2.0 * dot(data.point(p), &weighted_sum)
                    + masses[j] * state.y_coupling[q]
                    + rho.coupling * masses[j] * state.x[q];
            }
        }
        Self {
            problem,
            masses,
            coupling: rho.coupling,
            ridge,
            rhs,
        }
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn block(&self, j: usize) -> WBlock<'_> {
        let m = self.masses[j];
        WBlock {
            problem: self.problem,
            gram_weight: 2.0 * m,
            diagonal: self.coupling * m * m + self.ridge,
        }
    }

    /// Solves block by block, warm-started from `w`. Returns the worst outcome.
    pub fn solve(&self, w: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome {
        let n = self.problem.shape.n;
        let mut worst = CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
        for j in 0..self.problem.shape.k {
            let range = j * n..(j + 1) * n;
            let out = conjugate_gradient(&self.block(j), &self.rhs[range.clone()], &mut w[range], tol, max_iter);
            worst.iterations = worst.iterations.max(out.iterations);
            worst.relative_residual = worst.relative_residual.max(out.relative_residual);
            worst.converged &= out.converged;
        }
        worst
    }
}

#[inline]
fn i_pm(p: usize, j: usize, k: usize) -> usize {
    p * k + j
}

impl LinearOperator for WSystem<'_> {
    fn dim(&self) -> usize {
        self.problem.shape.nk()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.problem.shape.n;
        for j in 0..self.problem.shape.k {
            let range = j * n..(j + 1) * n;
            self.block(j).apply(&v[range.clone()], &mut out[range]);
        }
    }
}

struct WBlock<'a> {
    problem: &'a Problem,
    gram_weight: f64,
    diagonal: f64,
}

impl LinearOperator for WBlock<'_> {
    fn dim(&self) -> usize {
        self.problem.shape.n
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let data = &self.problem.data;
        let mut sv = vec![0.0; data.d()];
        for (p, &vp) in v.iter().enumerate() {
            for (acc, s) in sv.iter_mut().zip(data.point(p)) {
                *acc += vp * s;
            }
        }
        for (p, o) in out.iter_mut().enumerate() {
            *o = self.gram_weight * dot(data.point(p), &sv) + self.diagonal * v[p];
        }
    }
}

pub fn update_w(problem: &Problem, state: &mut SolverState, cfg: &SolverConfig) -> CgOutcome {
    let rho = cfg.penalties();
    let system = WSystem::new(problem, state, &rho, cfg.ridge_eps);
    let cap = cfg.cg_cap(problem.shape.nk());
    system.solve(&mut state.w, cfg.cg_tol, cap)
}

/// Clamp of `x + y_box/ρ` onto `[0, 1]`.
pub fn update_z_box(state: &mut SolverState, rho: &Penalties) {
    for ((z, x), y) in state.z_box.iter_mut().zip(&state.x).zip(&state.y_box) {
        *z = (x + y / rho.box_copy).clamp(0.0, 1.0);
    }
}

/// Projection of `x + y_sphere/ρ` onto the sphere of radius `√(nk)/2` centred
/// at `½1`. At the centre, where every direction is a projection, a seeded
/// random direction of length 1e-8 is used.
pub fn update_z_sphere(state: &mut SolverState, rho: &Penalties, seed: u64) {
    let nk = state.x.len();
    let mut shifted: Vec<f64> = state
        .x
        .iter()
        .zip(&state.y_sphere)
        .map(|(x, y)| x + y / rho.sphere_copy - 0.5)
        .collect();
    let mut norm = dot(&shifted, &shifted).sqrt();
    if norm == 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (state.iteration as u64).rotate_left(32));
        let dir: Vec<f64> = (0..nk).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = dot(&dir, &dir).sqrt();
        shifted = dir.iter().map(|v| 1e-8 * v / len).collect();
        norm = dot(&shifted, &shifted).sqrt();
    }
    let radius = (nk as f64).sqrt() / 2.0;
    for (z, s) in state.z_sphere.iter_mut().zip(&shifted) {
        *z = radius * s / norm + 0.5;
    }
}

/// Closed-form solve of `(ρ_link a aᵀ + ρ_copy I) z = r`.
fn rank_one_solve(dir: &[f64], rhs: &[f64], link: f64, copy: f64) -> Vec<f64> {
    let coef = link * dot(dir, rhs) / (copy * (copy + link * dot(dir, dir)));
    rhs.iter().zip(dir).map(|(r, a)| r / copy - coef * a).collect()
}

/// `[ρ aaᵀ + ρ' I] z_must = y' + ρ'x − y a + ρ v a` with `a = E₁ᵀE₂x`.
pub fn update_z_must(problem: &Problem, state: &mut SolverState, rho: &Penalties) {
    if !problem.has_must_links() {
        return;
    }
    let mut dir = vec![0.0; state.x.len()];
    problem.must.forward_into(problem.shape.k, &state.x, &mut dir);
    let scale = rho.must_link * problem.v() - state.y_must;
    let rhs: Vec<f64> = (0..dir.len())
        .map(|q| state.y_must_copy[q] + rho.must_copy * state.x[q] + scale * dir[q])
        .collect();
    state.z_must = rank_one_solve(&dir, &rhs, rho.must_link, rho.must_copy);
}

/// `[ρ bbᵀ + ρ' I] z_cannot = y' + ρ'x − y b` with `b = E₃ᵀE₄x`.
pub fn update_z_cannot(problem: &Problem, state: &mut SolverState, rho: &Penalties) {
    if !problem.has_cannot_links() {
        return;
    }
    let mut dir = vec![0.0; state.x.len()];
    problem.cannot.forward_into(problem.shape.k, &state.x, &mut dir);
    let rhs: Vec<f64> = (0..dir.len())
        .map(|q| state.y_cannot_copy[q] + rho.cannot_copy * state.x[q] - state.y_cannot * dir[q])
        .collect();
    state.z_cannot = rank_one_solve(&dir, &rhs, rho.cannot_link, rho.cannot_copy);
}

/// Dual ascent: every multiplier moves by its penalty times its residual.
pub fn update_duals(problem: &Problem, state: &mut SolverState, rho: &Penalties) {
    let shape = problem.shape;
    let x = &state.x;

    let mut per_point = vec![0.0; shape.n];
    psi_t_into(&shape, x, &mut per_point);
    for (y, s) in state.y_one_hot.iter_mut().zip(&per_point) {
        *y += rho.one_hot * (s - 1.0);
    }
    for q in 0..x.len() {
        state.y_box[q] += rho.box_copy * (x[q] - state.z_box[q]);
        state.y_sphere[q] += rho.sphere_copy * (x[q] - state.z_sphere[q]);
    }
    if let Some(u) = &problem.targets {
        let mut sizes = vec![0.0; shape.k];
        sizes_into(&shape, x, &mut sizes);
        for ((y, s), t) in state.y_cardinality.iter_mut().zip(&sizes).zip(u) {
            *y += rho.cardinality * (s - t);
        }
    }
    let coupling = coupling_residual(problem, x, &state.w);
    for (y, r) in state.y_coupling.iter_mut().zip(&coupling) {
        *y += rho.coupling * r;
    }
    if problem.has_must_links() {
        let r = problem.must.bilinear(shape.k, &state.z_must, x) - problem.v();
        state.y_must += rho.must_link * r;
        for q in 0..x.len() {
            state.y_must_copy[q] += rho.must_copy * (x[q] - state.z_must[q]);
        }
    }
    if problem.has_cannot_links() {
        let r = problem.cannot.bilinear(shape.k, &state.z_cannot, x);
        state.y_cannot += rho.cannot_link * r;
        for q in 0..x.len() {
            state.y_cannot_copy[q] += rho.cannot_copy * (x[q] - state.z_cannot[q]);
        }
    }
}
