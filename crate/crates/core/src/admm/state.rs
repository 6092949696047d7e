use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{check_len, Error, Result};
use crate::objective::objective_value;
use crate::ops::sizes_into;

/// Primal copies, multipliers and the objective trace of one ADMM run.
/// Point-major layout everywhere except `w` (cluster-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// Copy constrained to the box `[0, 1]^{nk}`.
    pub z_box: Vec<f64>,
    /// Copy constrained to the sphere `‖a − ½1‖² = nk/4`.
    pub z_sphere: Vec<f64>,
    /// Copy entering the must-link bilinear constraint.
    pub z_must: Vec<f64>,
    /// Copy entering the cannot-link bilinear constraint.
    pub z_cannot: Vec<f64>,
    /// Multiplier of `Ψᵀx = 1` (length `n`).
    pub y_one_hot: Vec<f64>,
    pub y_box: Vec<f64>,
    pub y_sphere: Vec<f64>,
    /// Multiplier of the cluster sizes (length `k`).
    pub y_cardinality: Vec<f64>,
    pub y_coupling: Vec<f64>,
    pub y_must: f64,
    pub y_must_copy: Vec<f64>,
    pub y_cannot: f64,
    pub y_cannot_copy: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iteration: usize,
}

impl SolverState {
    pub fn is_finite(&self) -> bool {
        let vecs = [
            &self.x,
            &self.w,
            &self.z_box,
            &self.z_sphere,
            &self.z_must,
            &self.z_cannot,
            &self.y_one_hot,
            &self.y_box,
            &self.y_sphere,
            &self.y_cardinality,
            &self.y_coupling,
            &self.y_must_copy,
            &self.y_cannot_copy,
        ];
        vecs.iter().all(|v| v.iter().all(|x| x.is_finite()))
            && self.y_must.is_finite()
            && self.y_cannot.is_finite()
    }
}

/// Starts from a one-hot warm start: every copy equals `x`, all multipliers
/// are zero, and `w_(p,j) = x_pj / |cluster j|`.
pub fn init_state(problem: &Problem, x_start: &[f64]) -> Result<SolverState> {
    let shape = problem.shape;
    check_len("warm start", x_start.len(), shape.nk())?;
    let mut sizes = vec![0.0; shape.k];
    sizes_into(&shape, x_start, &mut sizes);
    if let Some(j) = sizes.iter().position(|&s| s == 0.0) {
        return Err(Error::Validation(format!(
            "warm start leaves cluster {j} empty"
        )));
    }
    let mut w = vec![0.0; shape.nk()];
    for i in 0..shape.n {
        for j in 0..shape.k {
            w[shape.cm(i, j)] = x_start[shape.pm(i, j)] / sizes[j];
        }
    }
    let objective = objective_value(&problem.data, x_start, &w, shape.k)?;
    let nk = shape.nk();
    Ok(SolverState {
        x: x_start.to_vec(),
        w,
        z_box: x_start.to_vec(),
        z_sphere: x_start.to_vec(),
        z_must: x_start.to_vec(),
        z_cannot: x_start.to_vec(),
        y_one_hot: vec![0.0; shape.n],
        y_box: vec![0.0; nk],
        y_sphere: vec![0.0; nk],
        y_cardinality: vec![0.0; shape.k],
        y_coupling: vec![0.0; nk],
        y_must: 0.0,
        y_must_copy: vec![0.0; nk],
        y_cannot: 0.0,
        y_cannot_copy: vec![0.0; nk],
        objective_trace: vec![objective],
        iteration: 0,
    })
}
