//! Synthetic Gaussian blobs with known labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{sq_dist, DataMatrix};
use crate::error::{Error, Result};

/// Attempts per center before falling back to a straight-line layout.
const PLACEMENT_TRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub data: DataMatrix,
    /// Blob of every point; points are ordered blob by blob.
    pub labels: Vec<usize>,
    /// One center per blob.
    pub centers: Vec<Vec<f64>>,
}

/// Draws `k` isotropic Gaussian blobs of `per_cluster` points each, with
/// standard deviation `spread` and centers pairwise at least `separation`
/// apart. Deterministic for a fixed seed.
pub fn gen_blobs(
    k: usize,
    per_cluster: usize,
    d: usize,
    spread: f64,
    separation: f64,
    seed: u64,
) -> Result<Blobs> {
    if k == 0 || per_cluster == 0 || d == 0 {
        return Err(Error::Validation(format!(
            "blob counts must be positive (k={k}, per_cluster={per_cluster}, d={d})"
        )));
    }
    if !(spread.is_finite() && spread >= 0.0 && separation.is_finite() && separation >= 0.0) {
        return Err(Error::Validation(format!(
            "spread and separation must be finite and non-negative (got {spread}, {separation})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = place_centers(&mut rng, k, d, separation);

    let mut points = Vec::with_capacity(k * per_cluster);
    let mut labels = Vec::with_capacity(k * per_cluster);
    for (j, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            let p: Vec<f64> = center
                .iter()
                .map(|c| c + spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            points.push(p);
            labels.push(j);
        }
    }
    Ok(Blobs {
        data: DataMatrix::from_points(&points)?,
        labels,
        centers,
    })
}

fn place_centers(rng: &mut ChaCha8Rng, k: usize, d: usize, separation: f64) -> Vec<Vec<f64>> {
    let side = 2.0 * separation * (k as f64).powf(1.0 / d as f64);
    let min_sq = separation * separation;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    'outer: for _ in 0..k {
        for _ in 0..PLACEMENT_TRIES {
            let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * side).collect();
            if centers.iter().all(|o| sq_dist(o, &c) >= min_sq) {
                centers.push(c);
                continue 'outer;
            }
        }
        return (0..k)
            .map(|j| {
                let mut c = vec![0.0; d];
                c[0] = j as f64 * separation;
                c
            })
            .collect();
    }
    centers
}
