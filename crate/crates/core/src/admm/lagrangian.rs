use super::{Penalties, Problem, SolverState};
use crate::data::dot;
use crate::objective::distances_into;
use crate::ops::{c_into, perm_into, psi_t_into, sizes_into};

const INDICATOR_TOL: f64 = 1e-9;

/// Value of the augmented Lagrangian at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianValue {
    /// Sum of every smooth term, with the two set indicators taken as zero.
    pub smooth: f64,
    /// Whether `z_box` lies in the box and `z_sphere` on the sphere (to 1e-9).
    pub indicators_feasible: bool,
}

impl LagrangianValue {
    /// `smooth` when both indicators vanish, `+∞` otherwise.
    pub fn total(&self) -> f64 {
        if self.indicators_feasible {
            self.smooth
        } else {
            f64::INFINITY
        }
    }
}

/// Evaluates the augmented Lagrangian term by term. Families absent from the
/// problem contribute nothing.
pub fn augmented_lagrangian(
    problem: &Problem,
    state: &SolverState,
    rho: &Penalties,
) -> LagrangianValue {
    let shape = problem.shape;
    let (n, nk) = (shape.n, shape.nk());
    let x = &state.x;

    let mut b = vec![0.0; nk];
    distances_into(&problem.data, &shape, &state.w, &mut b);
    let mut total = dot(x, &b);

    let mut one_hot = vec![0.0; n];
    psi_t_into(&shape, x, &mut one_hot);
    one_hot.iter_mut().for_each(|r| *r -= 1.0);
    total += linear_plus_penalty(&state.y_one_hot, &one_hot, rho.one_hot);

    let box_res: Vec<f64> = x.iter().zip(&state.z_box).map(|(a, z)| a - z).collect();
    total += linear_plus_penalty(&state.y_box, &box_res, rho.box_copy);
    let sphere_res: Vec<f64> = x.iter().zip(&state.z_sphere).map(|(a, z)| a - z).collect();
    total += linear_plus_penalty(&state.y_sphere, &sphere_res, rho.sphere_copy);

    if let Some(u) = &problem.targets {
        let mut sizes = vec![0.0; shape.k];
        sizes_into(&shape, x, &mut sizes);
        let res: Vec<f64> = sizes.iter().zip(u).map(|(s, t)| s - t).collect();
        total += linear_plus_penalty(&state.y_cardinality, &res, rho.cardinality);
    }

    let coupling = coupling_residual(problem, x, &state.w);
    total += linear_plus_penalty(&state.y_coupling, &coupling, rho.coupling);

    if problem.has_must_links() {
        let r = problem.must.bilinear(shape.k, &state.z_must, x) - problem.v();
        total += state.y_must * r + 0.5 * rho.must_link * r * r;
        let copy: Vec<f64> = x.iter().zip(&state.z_must).map(|(a, z)| a - z).collect();
        total += linear_plus_penalty(&state.y_must_copy, &copy, rho.must_copy);
    }
    if problem.has_cannot_links() {
        let r = problem.cannot.bilinear(shape.k, &state.z_cannot, x);
        total += state.y_cannot * r + 0.5 * rho.cannot_link * r * r;
        let copy: Vec<f64> = x.iter().zip(&state.z_cannot).map(|(a, z)| a - z).collect();
        total += linear_plus_penalty(&state.y_cannot_copy, &copy, rho.cannot_copy);
    }

    let in_box = state
        .z_box
        .iter()
        .all(|&v| (-INDICATOR_TOL..=1.0 + INDICATOR_TOL).contains(&v));
    let radius2 = nk as f64 / 4.0;
    let sphere = state.z_sphere.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>();
    let on_sphere = (sphere - radius2).abs() <= INDICATOR_TOL * radius2.max(1.0);

    LagrangianValue {
        smooth: total,
        indicators_feasible: in_box && on_sphere,
    }
}

fn linear_plus_penalty(dual: &[f64], residual: &[f64], rho: f64) -> f64 {
    dot(dual, residual) + 0.5 * rho * dot(residual, residual)
}

/// `x − P w ⊙ C x`.
pub(crate) fn coupling_residual(problem: &Problem, x: &[f64], w: &[f64]) -> Vec<f64> {
    let shape = problem.shape;
    let mut pw = vec![0.0; shape.nk()];
    perm_into(&shape, w, &mut pw);
    let mut cx = vec![0.0; shape.nk()];
    c_into(&shape, x, &mut cx);
    x.iter()
        .zip(pw.iter().zip(&cx))
        .map(|(a, (p, c))| a - p * c)
        .collect()
}
