use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::updates::{update_z_box, update_z_cannot, update_z_must, update_z_sphere};
use super::{init_state, update_duals, update_w, update_x, Problem, Scaling, SolverConfig, SolverState};
use crate::constraints::ConstraintSet;
use crate::data::DataMatrix;
use crate::error::Result;
use crate::kmeans::{align_to_cardinalities, labels_from_assignment, lloyd, to_assignment};
use crate::objective::{kmeans_objective, objective_value};
use crate::ops::psi_t_into;

/// Stop once the sample standard deviation of the last `window` objective
/// values is at most `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub window: usize,
    pub tol: f64,
}

impl StoppingRule {
    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self {
            window: cfg.conv_window,
            tol: cfg.conv_std,
        }
    }

    pub fn should_stop(&self, trace: &[f64]) -> bool {
        if trace.len() < self.window || self.window < 2 {
            return false;
        }
        let tail = &trace[trace.len() - self.window..];
        let mean = tail.iter().sum::<f64>() / self.window as f64;
        let var = tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (self.window - 1) as f64;
        var.sqrt() <= self.tol
    }

    /// Length of the shortest prefix of `trace` at which the rule fires.
    pub fn first_stop(&self, trace: &[f64]) -> Option<usize> {
        (1..=trace.len()).find(|&len| self.should_stop(&trace[..len]))
    }
}

/// Constraint residuals of the rounded solution plus convergence diagnostics
/// of the final relaxed iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max_i |Σ_j x_ij − 1|` of the relaxed iterate.
    pub onehot: f64,
    /// `max_j |size_j − u_j|` of the rounded labels (0 without cardinality).
    pub cardinality: f64,
    /// `v − xᵀE₁ᵀE₂x` on the rounded one-hot vector.
    pub mustlink_gap: f64,
    /// `xᵀE₃ᵀE₄x` on the rounded one-hot vector.
    pub cannotlink_value: f64,
    /// `max ‖x − z‖∞` over the active copies, before rounding.
    pub consensus: f64,
    /// Largest distance of an entry of the relaxed `x` from {0, 1}.
    pub integrality: f64,
}

impl Residuals {
    /// Every hard constraint holds on the rounded labels.
    pub fn feasible(&self) -> bool {
        self.cardinality == 0.0 && self.mustlink_gap == 0.0 && self.cannotlink_value == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub labels: Vec<usize>,
    pub x_final: Vec<f64>,
    /// Clustering objective of `labels` on the caller's data.
    pub objective: f64,
    pub converged: bool,
    /// The iterates became non-finite or left the bounded region.
    pub diverged: bool,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Coupled objective after every sweep (index 0 is the warm start), in
    /// the units of the caller's data.
    pub trace: Vec<f64>,
    /// Factor applied to the data before solving.
    pub scale: f64,
    /// Number of inner CG solves that hit their iteration cap.
    pub cg_failures: usize,
}

impl SolveResult {
    pub fn feasible(&self) -> bool {
        self.residuals.feasible()
    }
}

/// Full pipeline: rescale, K-means warm start, ADMM sweeps, rounding.
pub fn run(data: &DataMatrix, k: usize, constraints: &ConstraintSet, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let problem = Problem::new(data, k, constraints)?;
    let scale = match cfg.scaling {
        Scaling::None => 1.0,
        Scaling::Spread(target) => {
            let spread = data.mean_spread();
            if spread > 0.0 {
                (target / spread).sqrt()
            } else {
                1.0
            }
        }
    };
    let working = problem.rescaled(scale);
    let warm = lloyd(working.data(), k, cfg.seed, cfg.kmeans_max_iters)?;
    let labels = match &problem.constraints().cardinalities {
        Some(u) => align_to_cardinalities(&warm.labels, u),
        None => warm.labels,
    };
    let x_start = to_assignment(&labels, &problem.shape())?;
    let (state, converged, diverged, cg_failures) = iterate(&working, &x_start, cfg, 1.0 / (scale * scale))?;
    let mut result = extract_solution(&state, &problem, converged);
    result.diverged = diverged;
    result.scale = scale;
    result.cg_failures = cg_failures;
    Ok(result)
}

/// ADMM sweeps from a given one-hot warm start, on the problem as given.
pub fn run_from(problem: &Problem, x_start: &[f64], cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let (state, converged, diverged, cg_failures) = iterate(problem, x_start, cfg, 1.0)?;
    let mut result = extract_solution(&state, problem, converged);
    result.diverged = diverged;
    result.cg_failures = cg_failures;
    Ok(result)
}

/// Entries of `x` beyond this magnitude mark the run as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e6;

/// `unit` converts the working-scale objective back to the caller's units;
/// the trace and the stopping rule see the converted values.
fn iterate(
    problem: &Problem,
    x_start: &[f64],
    cfg: &SolverConfig,
    unit: f64,
) -> Result<(SolverState, bool, bool, usize)> {
    let mut state = init_state(problem, x_start)?;
    state.objective_trace[0] *= unit;
    let rule = StoppingRule::from_config(cfg);
    let rho = cfg.penalties();
    let k = problem.shape().k;
    let mut cg_failures = 0;

    for _ in 0..cfg.max_outer_iters {
        let previous = state.clone();
        if !update_x(problem, &mut state, cfg).converged {
            cg_failures += 1;
        }
        if !update_w(problem, &mut state, cfg).converged {
            cg_failures += 1;
        }
        update_z_box(&mut state, &rho);
        update_z_sphere(&mut state, &rho, cfg.seed);
        update_z_must(problem, &mut state, &rho);
        update_z_cannot(problem, &mut state, &rho);
        update_duals(problem, &mut state, &rho);
        state.iteration += 1;

        let objective = unit * objective_value(problem.data(), &state.x, &state.w, k)?;
        if !objective.is_finite() || !state.is_finite() {
            warn!("iterates became non-finite at sweep {}", state.iteration);
            return Ok((previous, false, true, cg_failures));
        }
        state.objective_trace.push(objective);
        if state.x.iter().any(|v| v.abs() > DIVERGENCE_BOUND) {
            warn!("assignment iterate left the bounded region at sweep {}", state.iteration);
            return Ok((state, false, true, cg_failures));
        }
        if rule.should_stop(&state.objective_trace) {
            debug!("converged after {} sweeps", state.iteration);
            return Ok((state, true, false, cg_failures));
        }
    }
    Ok((state, false, false, cg_failures))
}

/// Rounds `x` by row-wise argmax (ties to the lowest cluster) and measures
/// the rounded labels against the constraints of `problem`.
pub fn extract_solution(state: &SolverState, problem: &Problem, converged: bool) -> SolveResult {
    let shape = problem.shape();
    let cs = problem.constraints();
    let x = &state.x;
    let labels = labels_from_assignment(x, &shape).expect("state matches problem shape");
    let rounded = to_assignment(&labels, &shape).expect("argmax labels are in range");

    let mut per_point = vec![0.0; shape.n];
    psi_t_into(&shape, x, &mut per_point);
    let onehot = per_point.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let cardinality = match &cs.cardinalities {
        Some(_) => cs
            .cardinality_residual(&rounded, &shape)
            .expect("shape checked")
            .iter()
            .map(|r| r.abs())
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let mustlink_gap = cs.v() as f64 - cs.mustlink_quadratic(&rounded, &shape).expect("shape checked");
    let cannotlink_value = cs.cannotlink_quadratic(&rounded, &shape).expect("shape checked");

    let mut copies = vec![&state.z_box, &state.z_sphere];
    if problem.has_must_links() {
        copies.push(&state.z_must);
    }
    if problem.has_cannot_links() {
        copies.push(&state.z_cannot);
    }
    let consensus = copies
        .iter()
        .flat_map(|z| z.iter().zip(x).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let integrality = x
        .iter()
        .map(|v| v.abs().min((v - 1.0).abs()))
        .fold(0.0, f64::max);

    SolveResult {
        objective: kmeans_objective(problem.data(), &labels, shape.k).expect("labels in range"),
        labels,
        x_final: x.clone(),
        converged,
        diverged: false,
        iterations: state.iteration,
        residuals: Residuals {
            onehot,
            cardinality,
            mustlink_gap,
            cannotlink_value,
            consensus,
            integrality,
        },
        trace: state.objective_trace.clone(),
        scale: 1.0,
        cg_failures: 0,
    }
}
