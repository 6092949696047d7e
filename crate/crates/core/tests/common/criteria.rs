//! Measurements behind the acceptance checks. Each returns a [`Check`] so the
//! same code backs both the integration tests and the acceptance report.

use std::time::Instant;

use ckmeans::admm::{
    run, update_z_box, update_z_cannot, update_z_must, update_z_sphere, Penalties, StoppingRule,
};
use ckmeans::ops::{
    c_apply, c_t_apply, centroid, cluster_sizes, lambda_apply, lambda_t_apply, perm_apply,
    perm_t_apply, psi_apply, psi_t_apply, q_apply, q_t_apply, Endpoint, PairCoupling,
    SelectionOperator, Shape,
};
use ckmeans::oracle::feasible_assignments;
use ckmeans::{ConstraintSet, DataMatrix, SolverConfig};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::*;

#[derive(Debug, Clone)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

pub const INSTANCES: usize = 50;
pub const SEEDS: [u64; 3] = [0, 1, 2];
pub const RHOS: [f64; 3] = [1e-2, 1e-1, 1.0];
pub const HIT_TOL: f64 = 1e-6;
pub const HIT_FRACTION: f64 = 0.8;
pub const REMAINDER_GAP: f64 = 0.05;
pub const CONSENSUS_TOL: f64 = 1e-3;

/// Best-of-grid outcome on one instance.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub optimum: f64,
    /// Lowest objective over runs whose rounded labels meet every constraint.
    pub best: Option<f64>,
    /// Worst `(consensus, integrality)` over the runs that converged.
    pub converged_residuals: Vec<(f64, f64)>,
}

impl InstanceOutcome {
    pub fn gap(&self) -> f64 {
        match self.best {
            Some(b) => (b - self.optimum) / self.optimum.max(f64::MIN_POSITIVE),
            None => f64::INFINITY,
        }
    }
}

/// Solves every instance of a family over the seed × rho grid.
pub fn solve_family(family: Family, seed: u64) -> Vec<InstanceOutcome> {
    let mut r = rng(seed);
    let instances: Vec<Instance> = (0..INSTANCES).map(|_| random_instance(&mut r, family)).collect();
    instances
        .par_iter()
        .map(|inst| {
            let mut best: Option<f64> = None;
            let mut converged_residuals = Vec::new();
            for seed in SEEDS {
                for rho in RHOS {
                    let cfg = SolverConfig {
                        seed,
                        rho,
                        ..SolverConfig::default()
                    };
                    let res = run(&inst.data, inst.k, &inst.constraints, &cfg).expect("valid instance");
                    if res.converged {
                        converged_residuals.push((res.residuals.consensus, res.residuals.integrality));
                    }
                    if inst.constraints.is_satisfied_by(&res.labels, inst.k) {
                        best = Some(best.map_or(res.objective, |b: f64| b.min(res.objective)));
                    }
                }
            }
            InstanceOutcome {
                optimum: inst.optimum,
                best,
                converged_residuals,
            }
        })
        .collect()
}

/// Hit rate at `HIT_TOL` must reach `HIT_FRACTION`, and every other instance
/// needs a feasible run within `REMAINDER_GAP`.
pub fn optimality(outcomes: &[InstanceOutcome]) -> Check {
    let gaps: Vec<f64> = outcomes.iter().map(InstanceOutcome::gap).collect();
    let hits = gaps.iter().filter(|&&g| g <= HIT_TOL).count();
    let misses: Vec<f64> = gaps.iter().copied().filter(|&g| g > HIT_TOL).collect();
    let within = misses.iter().filter(|&&g| g <= REMAINDER_GAP).count();
    let infeasible = outcomes.iter().filter(|o| o.best.is_none()).count();
    let worst = misses.iter().copied().fold(0.0, f64::max);
    let pass = hits as f64 >= HIT_FRACTION * outcomes.len() as f64 && within == misses.len();
    Check::new(
        pass,
        format!(
            "optimal {hits}/{} (need {:.0}), remainder within {:.0}%: {within}/{}, worst gap {worst:.4}, no feasible run: {infeasible}",
            outcomes.len(),
            (HIT_FRACTION * outcomes.len() as f64).ceil(),
            REMAINDER_GAP * 100.0,
            misses.len(),
        ),
    )
}

pub fn consensus(outcomes: &[InstanceOutcome]) -> Check {
    let all: Vec<(f64, f64)> = outcomes.iter().flat_map(|o| o.converged_residuals.iter().copied()).collect();
    let worst_cons = all.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_int = all.iter().map(|r| r.1).fold(0.0, f64::max);
    let runs = outcomes.len() * SEEDS.len() * RHOS.len();
    Check::new(
        !all.is_empty() && worst_cons <= CONSENSUS_TOL && worst_int <= CONSENSUS_TOL,
        format!(
            "{} of {runs} runs converged; max ‖x − z‖∞ {worst_cons:.2e}, max distance to {{0,1}} {worst_int:.2e} (tol {CONSENSUS_TOL:e})",
            all.len()
        ),
    )
}

fn one_hot(labels: &[usize], k: usize) -> Vec<f64> {
    let mut x = vec![0.0; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        x[i * k + l] = 1.0;
    }
    x
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Vec<(usize, usize)> {
    (0..rng.random_range(1..=max))
        .map(|_| {
            let p = sample(rng, n, 2);
            (p.index(0), p.index(1))
        })
        .collect()
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|e| e * e).sum()
}

/// Returns a description of the first identity that fails on `labels`.
fn identity_violation(cs: &ConstraintSet, labels: &[usize], k: usize) -> Option<String> {
    let n = labels.len();
    let shape = Shape { n, k, d: 1 };
    let x = one_hot(labels, k);
    let e = |pairs: &[(usize, usize)], end| SelectionOperator::new(pairs, end, n).unwrap().apply(&shape, &x).unwrap();
    let (ml, cl) = (&cs.must_links, &cs.cannot_links);
    let (v, ee) = (ml.len() as f64, cl.len() as f64);
    let ml_quad = cs.mustlink_quadratic(&x, &shape).unwrap();
    let cl_quad = cs.cannotlink_quadratic(&x, &shape).unwrap();

    let diff: Vec<f64> = e(ml, Endpoint::First).iter().zip(e(ml, Endpoint::Second)).map(|(a, b)| a - b).collect();
    if sq_norm(&diff) != 2.0 * v - 2.0 * ml_quad {
        return Some(format!("must-link identity at {labels:?}"));
    }
    let sum: Vec<f64> = e(cl, Endpoint::First).iter().zip(e(cl, Endpoint::Second)).map(|(a, b)| a + b).collect();
    if sq_norm(&sum) != 2.0 * ee + 2.0 * cl_quad {
        return Some(format!("cannot-link identity at {labels:?}"));
    }
    let ml_ok = ml.iter().all(|&(a, b)| labels[a] == labels[b]);
    let cl_ok = cl.iter().all(|&(a, b)| labels[a] != labels[b]);
    if (ml_quad == v) != ml_ok || (cl_quad == 0.0) != cl_ok {
        return Some(format!("satisfaction equivalence at {labels:?}"));
    }
    None
}

/// Pair identities on random one-hot vectors and on every labelling of the
/// small shapes, plus agreement with the feasible-labelling enumerator.
pub fn pair_identities() -> Check {
    let mut r = rng(3);
    let mut random_checked = 0;
    for _ in 0..1000 {
        let n = r.random_range(2..=8);
        let k = r.random_range(1..=4);
        let cs = ConstraintSet::new(None, &random_pairs(&mut r, n, 4), &random_pairs(&mut r, n, 4));
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        if let Some(msg) = identity_violation(&cs, &labels, k) {
            return Check::new(false, msg);
        }
        random_checked += 1;
    }
    let mut exhaustive = 0u64;
    for n in 2..=6 {
        for k in 1..=3 {
            for _ in 0..3 {
                let cs = ConstraintSet::new(None, &random_pairs(&mut r, n, 3), &random_pairs(&mut r, n, 3));
                let mut feasible = feasible_assignments(n, k, &cs);
                let mut next_feasible = feasible.next();
                let mut labels = vec![0usize; n];
                loop {
                    if let Some(msg) = identity_violation(&cs, &labels, k) {
                        return Check::new(false, msg);
                    }
                    let shape = Shape { n, k, d: 1 };
                    let x = one_hot(&labels, k);
                    let by_quadratics = cs.mustlink_quadratic(&x, &shape).unwrap() == cs.v() as f64
                        && cs.cannotlink_quadratic(&x, &shape).unwrap() == 0.0;
                    let enumerated = next_feasible.as_ref() == Some(&labels);
                    if by_quadratics != enumerated {
                        return Check::new(false, format!("enumerator disagrees at {labels:?}"));
                    }
                    if enumerated {
                        next_feasible = feasible.next();
                    }
                    exhaustive += 1;
                    if !advance(&mut labels, k) {
                        break;
                    }
                }
            }
        }
    }
    Check::new(
        true,
        format!("{random_checked} random one-hot vectors, {exhaustive} exhaustive labellings, exact equality"),
    )
}

fn advance(labels: &mut [usize], k: usize) -> bool {
    for pos in (0..labels.len()).rev() {
        labels[pos] += 1;
        if labels[pos] < k {
            return true;
        }
        labels[pos] = 0;
    }
    false
}

pub const FD_TOL: f64 = 1e-6;

pub fn gradients() -> Check {
    let mut r = rng(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(3..=8);
        let k = r.random_range(2..=3.min(n));
        let d = r.random_range(1..=3);
        let problem = random_problem(&mut r, n, k, d);
        let state = random_state(&mut r, &problem);
        let rho = r.random_range(0.05..3.0);
        let e = fd_errors(&mut r, &problem, &state, rho);
        worst = worst.max(e.x_hessian).max(e.x_rhs).max(e.w_hessian).max(e.w_rhs);
    }
    Check::new(
        worst <= FD_TOL,
        format!("20 states, nk ≤ 24, worst relative error {worst:.2e} (tol {FD_TOL:e})"),
    )
}

pub const SPHERE_TOL: f64 = 1e-12;
pub const RANK_ONE_TOL: f64 = 1e-10;

/// Projections and rank-one copy updates against their defining properties
/// and dense solves.
pub fn projections() -> Check {
    let mut r = rng(55);
    let mut sphere_res: f64 = 0.0;
    let mut idem: f64 = 0.0;
    let mut rank_one: f64 = 0.0;
    let mut box_ok = true;
    for case in 0..100 {
        let n = r.random_range(2..=8);
        let k = r.random_range(2..=3.min(n));
        let problem = random_problem(&mut r, n, k, 2);
        let nk = problem.shape().nk();
        let mut st = random_state(&mut r, &problem);
        let pen = Penalties::uniform(r.random_range(0.01..5.0));
        if case % 10 == 0 {
            st.x.iter_mut().for_each(|v| *v *= 50.0);
        }

        update_z_box(&mut st, &pen);
        update_z_sphere(&mut st, &pen, case);
        box_ok &= st.z_box.iter().all(|v| (0.0..=1.0).contains(v));
        let shifted: f64 = st.z_sphere.iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
        sphere_res = sphere_res.max((shifted - nk as f64 / 4.0).abs());

        let mut again = st.clone();
        again.y_box.fill(0.0);
        again.y_sphere.fill(0.0);
        again.x = st.z_box.clone();
        update_z_box(&mut again, &pen);
        idem = idem.max(rel_err(&again.z_box, &st.z_box));
        again.x = st.z_sphere.clone();
        update_z_sphere(&mut again, &pen, case);
        idem = idem.max(rel_err(&again.z_sphere, &st.z_sphere));

        let cs = problem.constraints();
        let shape = problem.shape();
        let must = PairCoupling::new(&cs.must_links).forward(&shape, &st.x).unwrap();
        let rhs: Vec<f64> = (0..nk)
            .map(|q| st.y_must_copy[q] + pen.must_copy * st.x[q] + (pen.must_link * cs.v() as f64 - st.y_must) * must[q])
            .collect();
        let want = dense_solve(rank_one_matrix(&must, pen.must_link, pen.must_copy), rhs);
        update_z_must(&problem, &mut st, &pen);
        rank_one = rank_one.max(rel_err(&st.z_must, &want));

        let cannot = PairCoupling::new(&cs.cannot_links).forward(&shape, &st.x).unwrap();
        if !cs.cannot_links.is_empty() {
            let rhs: Vec<f64> = (0..nk)
                .map(|q| st.y_cannot_copy[q] + pen.cannot_copy * st.x[q] - st.y_cannot * cannot[q])
                .collect();
            let want = dense_solve(rank_one_matrix(&cannot, pen.cannot_link, pen.cannot_copy), rhs);
            update_z_cannot(&problem, &mut st, &pen);
            rank_one = rank_one.max(rel_err(&st.z_cannot, &want));
        }
    }
    let pass = box_ok && sphere_res <= SPHERE_TOL && idem <= SPHERE_TOL && rank_one <= RANK_ONE_TOL;
    Check::new(
        pass,
        format!(
            "100 cases: sphere residual {sphere_res:.2e}, box {}, idempotence {idem:.2e}, rank-one vs dense {rank_one:.2e} (tols {SPHERE_TOL:e}, {RANK_ONE_TOL:e})",
            if box_ok { "ok" } else { "violated" }
        ),
    )
}

fn rank_one_matrix(a: &[f64], link: f64, copy: f64) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|r| (0..a.len()).map(|c| link * a[r] * a[c] + if r == c { copy } else { 0.0 }).collect())
        .collect()
}

pub const OPERATOR_TOL: f64 = 1e-12;

type Dense = Vec<Vec<f64>>;

fn zeros(rows: usize, cols: usize) -> Dense {
    vec![vec![0.0; cols]; rows]
}

fn transpose(a: &Dense, cols: usize) -> Dense {
    (0..cols).map(|c| a.iter().map(|row| row[c]).collect()).collect()
}

fn product(a: &Dense, b: &Dense, cols: usize) -> Dense {
    a.iter()
        .map(|row| (0..cols).map(|c| row.iter().zip(b).map(|(x, brow)| x * brow[c]).sum()).collect())
        .collect()
}

fn abs_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter().zip(want).fold(0.0, |m, (g, w)| m.max((g - w).abs()))
}

/// Every structured operator against its dense matrix, built from the
/// definitions, on every shape with `nk ≤ 64`.
pub fn operators() -> Check {
    let mut r = rng(64);
    let mut worst: f64 = 0.0;
    let mut shapes = 0;
    let mut products = 0;
    for n in 1..=64usize {
        for k in 1..=64 / n {
            shapes += 1;
            let shape = Shape { n, k, d: 1 };
            let nk = n * k;
            let mut psi = zeros(nk, n);
            let mut perm = zeros(nk, nk);
            let mut q = zeros(k, nk);
            for i in 0..n {
                for j in 0..k {
                    psi[shape.pm(i, j)][i] = 1.0;
                    perm[shape.pm(i, j)][shape.cm(i, j)] = 1.0;
                    q[j][shape.cm(i, j)] = 1.0;
                }
            }
            let perm_t = transpose(&perm, nk);
            let q_t = transpose(&q, nk);
            let sizes = product(&q, &perm_t, nk);
            let c = product(&product(&perm, &q_t, k), &sizes, nk);

            let d = r.random_range(1..=3);
            let data = (k <= n).then(|| {
                let pts: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, d)).collect();
                DataMatrix::from_points(&pts).unwrap()
            });
            let pairs = if n >= 2 { random_pairs(&mut r, n, 4) } else { Vec::new() };
            let mut sel = [zeros(k * pairs.len(), nk), zeros(k * pairs.len(), nk)];
            for (c_idx, &(a, b)) in pairs.iter().enumerate() {
                for j in 0..k {
                    sel[0][c_idx * k + j][shape.pm(a, j)] = 1.0;
                    sel[1][c_idx * k + j][shape.pm(b, j)] = 1.0;
                }
            }
            let coupling = product(&transpose(&sel[0], nk), &sel[1], nk);
            let coupling_t = transpose(&coupling, nk);
            let first = SelectionOperator::new(&pairs, Endpoint::First, n).unwrap();
            let second = SelectionOperator::new(&pairs, Endpoint::Second, n).unwrap();
            let fused = PairCoupling::new(&pairs);

            for _ in 0..20 {
                let v_nk = random_vec(&mut r, nk);
                let v_n = random_vec(&mut r, n);
                let v_k = random_vec(&mut r, k);
                let v_sel = random_vec(&mut r, k * pairs.len());
                let mut check = |got: Vec<f64>, want: Vec<f64>| {
                    worst = worst.max(abs_err(&got, &want));
                    products += 1;
                };
                check(psi_t_apply(&shape, &v_nk).unwrap(), matvec(&transpose(&psi, n), &v_nk));
                check(psi_apply(&shape, &v_n).unwrap(), matvec(&psi, &v_n));
                check(perm_apply(&shape, &v_nk).unwrap(), matvec(&perm, &v_nk));
                check(perm_t_apply(&shape, &v_nk).unwrap(), matvec(&perm_t, &v_nk));
                check(c_apply(&shape, &v_nk).unwrap(), matvec(&c, &v_nk));
                check(c_t_apply(&shape, &v_nk).unwrap(), matvec(&transpose(&c, nk), &v_nk));
                check(q_apply(&shape, &v_nk).unwrap(), matvec(&q, &v_nk));
                check(q_t_apply(&shape, &v_k).unwrap(), matvec(&q_t, &v_k));
                check(cluster_sizes(&shape, &v_nk).unwrap(), matvec(&sizes, &v_nk));
                let j = r.random_range(0..k);
                let mut lambda = zeros(n, nk);
                for p in 0..n {
                    lambda[p][shape.cm(p, j)] = 1.0;
                }
                check(lambda_apply(&shape, &v_nk, j).unwrap(), matvec(&lambda, &v_nk));
                check(lambda_t_apply(&shape, &v_n, j).unwrap(), matvec(&transpose(&lambda, nk), &v_n));
                if let Some(data) = &data {
                    let s: Dense = (0..data.d()).map(|f| (0..n).map(|p| data.point(p)[f]).collect()).collect();
                    check(centroid(data, &v_nk, j, k).unwrap(), matvec(&product(&s, &lambda, nk), &v_nk));
                }
                check(first.apply(&shape, &v_nk).unwrap(), matvec(&sel[0], &v_nk));
                check(second.apply(&shape, &v_nk).unwrap(), matvec(&sel[1], &v_nk));
                check(first.t_apply(&shape, &v_sel).unwrap(), matvec(&transpose(&sel[0], nk), &v_sel));
                check(second.t_apply(&shape, &v_sel).unwrap(), matvec(&transpose(&sel[1], nk), &v_sel));
                check(fused.forward(&shape, &v_nk).unwrap(), matvec(&coupling, &v_nk));
                check(fused.backward(&shape, &v_nk).unwrap(), matvec(&coupling_t, &v_nk));
            }
        }
    }
    Check::new(
        worst <= OPERATOR_TOL,
        format!("{shapes} shapes, {products} products, max abs error {worst:.2e} (tol {OPERATOR_TOL:e})"),
    )
}

/// Scripted objective trace: a decreasing head, nine values alternating by
/// ±1e-4, then constant. Any window holding one alternating value has a
/// sample std of about 3.2e-5, so the first window within 1e-5 is the all-flat
/// one ending at index 33.
pub fn stopping_rule() -> Check {
    let rule = StoppingRule::from_config(&SolverConfig::default());
    let mut trace: Vec<f64> = (0..15).map(|t| 10.0 / (t as f64 + 1.0)).collect();
    trace.extend((0..9).map(|t| 1.0 + if t % 2 == 0 { 1e-4 } else { -1e-4 }));
    trace.extend(std::iter::repeat_n(1.0, 20));
    let expected = 34;
    let recomputed = (10..=trace.len()).find(|&len| sample_std(&trace[len - 10..len]) <= 1e-5);
    let got = rule.first_stop(&trace);
    Check::new(
        rule.window == 10 && rule.tol == 1e-5 && got == Some(expected) && recomputed == Some(expected),
        format!("halts after {got:?} objectives, expected {expected} (window {}, tol {:e})", rule.window, rule.tol),
    )
}

fn sample_std(w: &[f64]) -> f64 {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    (w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (w.len() - 1) as f64).sqrt()
}

/// Time a check and pass it through.
pub fn timed(f: impl FnOnce() -> Check) -> (Check, f64) {
    let t = Instant::now();
    let c = f();
    (c, t.elapsed().as_secs_f64())
}

