//! Lloyd's algorithm with k-means++ seeding, used to warm-start the ADMM
//! solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{sq_dist, DataMatrix};
use crate::error::{check_len, Error, Result};
use crate::ops::Shape;

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    /// `k` centroids of dimension `d`.
    pub centroids: Vec<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every completed assign/update sweep.
    pub history: Vec<f64>,
}

/// Runs Lloyd iterations from a k-means++ seeding until the labels stop
/// changing or `max_iters` sweeps have run. The result never has an empty
/// cluster.
pub fn lloyd(data: &DataMatrix, k: usize, seed: u64, max_iters: usize) -> Result<KmeansResult> {
    Shape::of(data, k)?;
    if max_iters == 0 {
        return Err(Error::Validation("max_iters must be at least 1".into()));
    }
    let n = data.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(data, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut next: Vec<usize> = data.points().map(|p| nearest(p, &centroids).0).collect();
        repair_empty(data, &centroids, &mut next, k);
        let changed = next != labels;
        labels = next;
        centroids = means(data, &labels, k);
        history.push(inertia(data, &labels, &centroids));
        if !changed {
            break;
        }
    }

    Ok(KmeansResult {
        objective: *history.last().expect("at least one sweep"),
        labels,
        centroids,
        iterations,
        history,
    })
}

fn plus_plus(data: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.n();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = data
        .points()
        .map(|p| sq_dist(p, data.point(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (p, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = p;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // All remaining mass is zero: fall back to an unused index.
            let free: Vec<usize> = (0..n).filter(|p| !chosen.contains(p)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        for (p, w) in data.points().zip(d2.iter_mut()) {
            *w = w.min(sq_dist(p, data.point(pick)));
        }
    }
    chosen.iter().map(|&p| data.point(p).to_vec()).collect()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let dist = sq_dist(p, c);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

/// Moves the point farthest from its centroid into each empty cluster, taking
/// only from clusters that keep at least one member.
fn repair_empty(data: &DataMatrix, centroids: &[Vec<f64>], labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let donor = labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| counts[l] > 1)
            .map(|(p, &l)| (p, sq_dist(data.point(p), &centroids[l])))
            .fold(None::<(usize, f64)>, |best, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            });
        if let Some((p, _)) = donor {
            counts[labels[p]] -= 1;
            labels[p] = j;
            counts[j] = 1;
        }
    }
}

fn means(data: &DataMatrix, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; data.d()]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(data.point(p)) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn inertia(data: &DataMatrix, labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(p, &l)| sq_dist(data.point(p), &centroids[l]))
        .sum()
}

/// One-hot point-major encoding of a labelling.
pub fn to_assignment(labels: &[usize], shape: &Shape) -> Result<Vec<f64>> {
    check_len("labels", labels.len(), shape.n)?;
    let mut x = vec![0.0; shape.nk()];
    for (i, &l) in labels.iter().enumerate() {
        if l >= shape.k {
            return Err(Error::Index {
                what: "label",
                index: l,
                bound: shape.k,
            });
        }
        x[shape.pm(i, l)] = 1.0;
    }
    Ok(x)
}

/// Row-wise argmax of a point-major vector; ties go to the lowest cluster.
pub fn labels_from_assignment(x: &[f64], shape: &Shape) -> Result<Vec<usize>> {
    check_len("x", x.len(), shape.nk())?;
    Ok(x.chunks_exact(shape.k)
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect())
}

/// Renames clusters so the largest cluster gets the largest target size, the
/// second largest the second largest target, and so on (stable on ties).
/// Sizes are unaffected by pairwise constraints, so only cardinalities matter.
pub fn align_to_cardinalities(labels: &[usize], targets: &[usize]) -> Vec<usize> {
    let k = targets.len();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    let mut by_size: Vec<usize> = (0..k).collect();
    by_size.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut by_target: Vec<usize> = (0..k).collect();
    by_target.sort_by(|&a, &b| targets[b].cmp(&targets[a]).then(a.cmp(&b)));
    let mut rename = vec![0; k];
    for (&from, &to) in by_size.iter().zip(&by_target) {
        rename[from] = to;
    }
    labels.iter().map(|&l| rename[l]).collect()
}
