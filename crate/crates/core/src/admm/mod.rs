//! ADMM solver for constrained K-means.
//!
//! The binary association vector is split into four copies: one clamped to
//! the box `[0, 1]^{nk}`, one projected onto the sphere
//! `‖a − ½1‖² = nk/4` (their intersection is exactly the binary vectors), and
//! one per pairwise family so that the must-link and cannot-link quadratics
//! become bilinear. Each sweep updates `x`, `w`, the copies, then the
//! multipliers, in that order.

mod lagrangian;
mod problem;
mod solver;
mod state;
mod updates;

#[cfg(test)]
mod testutil;

pub use lagrangian::{augmented_lagrangian, LagrangianValue};
pub use problem::Problem;
pub use solver::{extract_solution, run, run_from, Residuals, SolveResult, StoppingRule};
pub use state::{init_state, SolverState};
pub use updates::{
    update_duals, update_w, update_x, update_z_box, update_z_cannot, update_z_must,
    update_z_sphere, WSystem, XSystem,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Penalty weights of the nine relaxed constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    /// `Ψᵀx = 1`.
    pub one_hot: f64,
    /// `x = z_box`.
    pub box_copy: f64,
    /// `x = z_sphere`.
    pub sphere_copy: f64,
    /// `Q Pᵀ x = u`.
    pub cardinality: f64,
    /// `x = P w ⊙ C x`.
    pub coupling: f64,
    /// `z_mustᵀ E₁ᵀ E₂ x = v`.
    pub must_link: f64,
    /// `x = z_must`.
    pub must_copy: f64,
    /// `z_cannotᵀ E₃ᵀ E₄ x = 0`.
    pub cannot_link: f64,
    /// `x = z_cannot`.
    pub cannot_copy: f64,
}

impl Penalties {
    pub fn uniform(rho: f64) -> Self {
        Self {
            one_hot: rho,
            box_copy: rho,
            sphere_copy: rho,
            cardinality: rho,
            coupling: rho,
            must_link: rho,
            must_copy: rho,
            cannot_link: rho,
            cannot_copy: rho,
        }
    }
}

/// Rescaling applied to the point cloud before solving. Objectives and
/// traces are always reported in the caller's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scaling {
    /// Solve on the data as given.
    None,
    /// Rescale so the mean squared distance to the global mean equals the value.
    Spread(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Uniform penalty applied to every constraint.
    pub rho: f64,
    /// Relative residual at which the inner CG solves stop.
    pub cg_tol: f64,
    /// Inner CG iteration cap; `None` means `10·nk`.
    pub cg_max_iter: Option<usize>,
    pub max_outer_iters: usize,
    /// Number of trailing objective values inspected by the stopping rule.
    pub conv_window: usize,
    /// Standard deviation threshold of the stopping rule.
    pub conv_std: f64,
    /// Ridge added to the `w` system, whose operator is singular for empty clusters.
    pub ridge_eps: f64,
    /// Seeds the K-means warm start and the sphere-projection tie-break.
    pub seed: u64,
    /// Lloyd sweep cap for the warm start.
    pub kmeans_max_iters: usize,
    pub scaling: Scaling,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.1,
            cg_tol: 1e-8,
            cg_max_iter: None,
            max_outer_iters: 2000,
            conv_window: 10,
            conv_std: 1e-5,
            ridge_eps: 1e-9,
            seed: 0,
            kmeans_max_iters: 100,
            scaling: Scaling::Spread(DEFAULT_SPREAD),
        }
    }
}

/// Working mean squared spread used by [`Scaling::Spread`] by default.
pub const DEFAULT_SPREAD: f64 = 1e-3;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(msg.to_string()));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive and finite");
        }
        if !(self.cg_tol > 0.0) {
            return bad("cg_tol must be positive");
        }
        if self.conv_window < 2 {
            return bad("conv_window must be at least 2");
        }
        if !(self.conv_std >= 0.0) {
            return bad("conv_std must be non-negative");
        }
        if !(self.ridge_eps >= 0.0) {
            return bad("ridge_eps must be non-negative");
        }
        if self.max_outer_iters == 0 || self.kmeans_max_iters == 0 {
            return bad("iteration caps must be at least 1");
        }
        if let Scaling::Spread(s) = self.scaling {
            if !(s > 0.0 && s.is_finite()) {
                return bad("target spread must be positive");
            }
        }
        Ok(())
    }

    pub fn penalties(&self) -> Penalties {
        Penalties::uniform(self.rho)
    }

    pub(crate) fn cg_cap(&self, nk: usize) -> usize {
        self.cg_max_iter.unwrap_or(10 * nk).max(1)
    }
}
