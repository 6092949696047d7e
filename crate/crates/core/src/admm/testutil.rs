use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{init_state, Problem, SolverState};
use crate::constraints::ConstraintSet;
use crate::data::DataMatrix;
use crate::linalg::LinearOperator;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn line_problem(vals: &[f64], k: usize, cs: &ConstraintSet) -> Problem {
    let pts: Vec<[f64; 1]> = vals.iter().map(|&v| [v]).collect();
    Problem::new(&DataMatrix::from_points(&pts).unwrap(), k, cs).unwrap()
}

/// Random instance with every constraint family present.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize) -> Problem {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut u = vec![1usize; k];
    for _ in k..n {
        u[rng.random_range(0..k)] += 1;
    }
    let pair = |rng: &mut ChaCha8Rng| {
        let p = sample(rng, n, 2);
        (p.index(0), p.index(1))
    };
    let ml = vec![pair(rng), pair(rng)];
    let cl: Vec<_> = (0..2)
        .map(|_| pair(rng))
        .filter(|&(a, b)| !ml.contains(&(a, b)) && !ml.contains(&(b, a)))
        .collect();
    let cs = ConstraintSet::new(Some(u), &ml, &cl);
    Problem::new(&DataMatrix::from_points(&pts).unwrap(), k, &cs).unwrap()
}

/// Arbitrary (not necessarily feasible) iterate with nonzero multipliers.
pub fn random_state(rng: &mut ChaCha8Rng, problem: &Problem) -> SolverState {
    let shape = problem.shape();
    let labels: Vec<usize> = (0..shape.n).map(|i| i % shape.k).collect();
    let x0 = crate::kmeans::to_assignment(&labels, &shape).unwrap();
    let mut st = init_state(problem, &x0).unwrap();
    let mut fill = |v: &mut Vec<f64>, lo: f64, hi: f64| v.iter_mut().for_each(|e| *e = rng.random_range(lo..hi));
    fill(&mut st.x, -0.3, 1.3);
    fill(&mut st.w, -0.2, 0.8);
    fill(&mut st.z_box, 0.0, 1.0);
    fill(&mut st.z_sphere, -0.2, 1.2);
    fill(&mut st.z_must, -0.2, 1.2);
    fill(&mut st.z_cannot, -0.2, 1.2);
    fill(&mut st.y_one_hot, -1.0, 1.0);
    fill(&mut st.y_box, -1.0, 1.0);
    fill(&mut st.y_sphere, -1.0, 1.0);
    fill(&mut st.y_cardinality, -1.0, 1.0);
    fill(&mut st.y_coupling, -1.0, 1.0);
    fill(&mut st.y_must_copy, -1.0, 1.0);
    fill(&mut st.y_cannot_copy, -1.0, 1.0);
    st.y_must = rng.random_range(-1.0..1.0);
    st.y_cannot = rng.random_range(-1.0..1.0);
    st
}

/// Columns of the operator applied to the unit vectors, as rows of a dense matrix.
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

pub fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.iter()
        .zip(want)
        .fold(0.0f64, |m, (g, w)| m.max((g - w).abs()))
        / scale
}
