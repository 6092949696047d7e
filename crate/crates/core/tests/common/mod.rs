#![allow(dead_code)]

pub mod criteria;

use ckmeans::admm::{Problem, SolverState};
use ckmeans::linalg::LinearOperator;
use ckmeans::oracle::{brute_force_solve, DEFAULT_LIMIT};
use ckmeans::{ConstraintSet, DataMatrix};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Joint,
    CardinalityOnly,
    PairwiseOnly,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub data: DataMatrix,
    pub k: usize,
    pub constraints: ConstraintSet,
    pub optimum: f64,
}

fn pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let p = sample(rng, n, 2);
    (p.index(0), p.index(1))
}

/// Random sizes `u_j >= 1` summing to `n`: a uniformly random composition.
pub fn random_sizes(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = sample(rng, n - 1, k - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Standard-normal points, n in 6..=9, k in {2, 3}, d in {1, 2}; redrawn
/// until the exhaustive solver finds a feasible labelling.
pub fn random_instance(rng: &mut ChaCha8Rng, family: Family) -> Instance {
    loop {
        let n = rng.random_range(6..=9);
        let k = rng.random_range(2..=3);
        let d = rng.random_range(1..=2);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let data = DataMatrix::from_points(&points).unwrap();
        let sizes = random_sizes(rng, n, k);
        let (mut ml, mut cl) = (Vec::new(), Vec::new());
        if family != Family::CardinalityOnly {
            for _ in 0..rng.random_range(1..=3) {
                ml.push(pair(rng, n));
            }
            for _ in 0..rng.random_range(1..=3) {
                cl.push(pair(rng, n));
            }
        }
        let u = (family != Family::PairwiseOnly).then_some(sizes);
        let constraints = ConstraintSet::new(u, &ml, &cl);
        if constraints.validate(&ckmeans::Shape::of(&data, k).unwrap()).is_err() {
            continue;
        }
        let oracle = brute_force_solve(&data, k, &constraints, DEFAULT_LIMIT).unwrap();
        if let Some(optimum) = oracle.best_objective {
            return Instance {
                data,
                k,
                constraints,
                optimum,
            };
        }
    }
}

/// Instance with every family present on uniform points in [-2, 2]^d.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize) -> Problem {
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let u = random_sizes(rng, n, k);
    let ml = vec![pair(rng, n), pair(rng, n)];
    let cl: Vec<_> = (0..2)
        .map(|_| pair(rng, n))
        .filter(|&(a, b)| !ml.contains(&(a, b)) && !ml.contains(&(b, a)))
        .collect();
    let cs = ConstraintSet::new(Some(u), &ml, &cl);
    Problem::new(&DataMatrix::from_points(&points).unwrap(), k, &cs).unwrap()
}

/// Arbitrary iterate with every multiplier nonzero.
pub fn random_state(rng: &mut ChaCha8Rng, problem: &Problem) -> SolverState {
    let shape = problem.shape();
    let labels: Vec<usize> = (0..shape.n).map(|i| i % shape.k).collect();
    let x0 = ckmeans::kmeans::to_assignment(&labels, &shape).unwrap();
    let mut st = ckmeans::admm::init_state(problem, &x0).unwrap();
    let mut fill = |v: &mut Vec<f64>| v.iter_mut().for_each(|e| *e = rng.random_range(-1.0..1.5));
    for v in [
        &mut st.x,
        &mut st.w,
        &mut st.z_box,
        &mut st.z_sphere,
        &mut st.z_must,
        &mut st.z_cannot,
        &mut st.y_one_hot,
        &mut st.y_box,
        &mut st.y_sphere,
        &mut st.y_cardinality,
        &mut st.y_coupling,
        &mut st.y_must_copy,
        &mut st.y_cannot_copy,
    ] {
        fill(v);
    }
    st.y_must = rng.random_range(-1.0..1.0);
    st.y_cannot = rng.random_range(-1.0..1.0);
    st
}

pub fn dense<A: LinearOperator + ?Sized>(op: &A) -> Vec<Vec<f64>> {
    let n = op.dim();
    let mut cols = vec![vec![0.0; n]; n];
    let mut e = vec![0.0; n];
    for (c, col) in cols.iter_mut().enumerate() {
        e[c] = 1.0;
        op.apply(&e, col);
        e[c] = 0.0;
    }
    (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// `max |got − want| / max |want|`.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.iter()
        .zip(want)
        .fold(0.0f64, |m, (g, w)| m.max((g - w).abs()))
        / scale
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Central-difference gradient of `f` at `at`. Exact up to rounding when `f`
/// is quadratic, whatever the step.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    let mut p = at.to_vec();
    (0..at.len())
        .map(|q| {
            p[q] = at[q] + h;
            let hi = f(&p);
            p[q] = at[q] - h;
            let lo = f(&p);
            p[q] = at[q];
            (hi - lo) / (2.0 * h)
        })
        .collect()
}

/// Hessian-vector product by central differences of the gradient along `v`.
pub fn fd_hessian_vec(f: &dyn Fn(&[f64]) -> f64, at: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let plus: Vec<f64> = at.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = at.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let gp = fd_gradient(f, &plus, h);
    let gm = fd_gradient(f, &minus, h);
    gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

pub struct FdErrors {
    pub x_hessian: f64,
    pub x_rhs: f64,
    pub w_hessian: f64,
    pub w_rhs: f64,
}

/// Compares the `x` and `w` systems with finite differences of the augmented
/// Lagrangian at one state and returns the worst relative errors.
pub fn fd_errors(rng: &mut ChaCha8Rng, problem: &Problem, state: &SolverState, rho: f64) -> FdErrors {
    use ckmeans::admm::{augmented_lagrangian, Penalties, WSystem, XSystem};
    let pen = Penalties::uniform(rho);
    let nk = problem.shape().nk();
    let h = 0.25;

    let in_x = |x: &[f64]| {
        let mut st = state.clone();
        st.x = x.to_vec();
        augmented_lagrangian(problem, &st, &pen).smooth
    };
    let xs = XSystem::new(problem, state, &pen);
    let mut x_hessian: f64 = 0.0;
    for _ in 0..3 {
        let v = random_vec(rng, nk);
        let mut av = vec![0.0; nk];
        xs.apply(&v, &mut av);
        x_hessian = x_hessian.max(rel_err(&av, &fd_hessian_vec(&in_x, &state.x, &v, h)));
    }
    let neg_grad: Vec<f64> = fd_gradient(&in_x, &vec![0.0; nk], h).iter().map(|g| -g).collect();
    let x_rhs = rel_err(xs.rhs(), &neg_grad);

    let in_w = |w: &[f64]| {
        let mut st = state.clone();
        st.w = w.to_vec();
        augmented_lagrangian(problem, &st, &pen).smooth
    };
    let ws = WSystem::new(problem, state, &pen, 0.0);
    let mut w_hessian: f64 = 0.0;
    for _ in 0..3 {
        let v = random_vec(rng, nk);
        let mut av = vec![0.0; nk];
        ws.apply(&v, &mut av);
        w_hessian = w_hessian.max(rel_err(&av, &fd_hessian_vec(&in_w, &state.w, &v, h)));
    }
    let neg_grad: Vec<f64> = fd_gradient(&in_w, &vec![0.0; nk], h).iter().map(|g| -g).collect();
    let w_rhs = rel_err(ws.rhs(), &neg_grad);

    FdErrors {
        x_hessian,
        x_rhs,
        w_hessian,
        w_rhs,
    }
}
