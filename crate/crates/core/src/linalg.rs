//! Conjugate gradient over matrix-free symmetric operators.

use crate::data::dot;

/// A symmetric linear map applied without materializing its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b`, starting from the contents of `x`. Stops once the
/// relative residual drops to `tol` or after `max_iter` steps; on failure the
/// iterate with the smallest residual seen is left in `x`. Curvature
/// `pᵀAp ≤ 0` (an indefinite operator) also ends the iteration.
pub fn conjugate_gradient<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = op.dim();
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(x.len(), n);
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut ap = vec![0.0; n];
    op.apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best_res = rr.sqrt() / b_norm;
    let mut best_x = x.to_vec();
    let mut iterations = 0;

    while best_res > tol && iterations < max_iter {
        op.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            break;
        }
        let alpha = rr / curvature;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        iterations += 1;
        let rr_next = dot(&r, &r);
        let res = rr_next.sqrt() / b_norm;
        if res < best_res {
            best_res = res;
            best_x.copy_from_slice(x);
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }

    x.copy_from_slice(&best_x);
    CgOutcome {
        iterations,
        relative_residual: best_res,
        converged: best_res <= tol,
    }
}
