//! Clustering objective in its fractional-centroid and coupled forms.

use crate::data::{sq_dist, DataMatrix};
use crate::error::{check_len, Error, Result};
use crate::ops::{centroid_into, Shape};

/// `B(i, j) = ‖s_i − S Λ_j w‖²`, stored row-major (`n × k`). The flattened
/// storage is therefore in point-major order and lines up with `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Point-major flattening (entry `(i, j)` at `i·k + j`).
    pub fn as_point_major(&self) -> &[f64] {
        &self.values
    }

    pub fn into_point_major(self) -> Vec<f64> {
        self.values
    }
}

/// Squared distance from every point to every coupled centroid `S Λ_j w`.
pub fn compute_b(data: &DataMatrix, w: &[f64], k: usize) -> Result<DistanceMatrix> {
    let shape = Shape::of(data, k)?;
    check_len("w", w.len(), shape.nk())?;
    let mut values = vec![0.0; shape.nk()];
    distances_into(data, &shape, w, &mut values);
    Ok(DistanceMatrix {
        n: shape.n,
        k,
        values,
    })
}

pub(crate) fn distances_into(data: &DataMatrix, shape: &Shape, w: &[f64], out: &mut [f64]) {
    let (n, k) = (shape.n, shape.k);
    let mut centre = vec![0.0; shape.d];
    for j in 0..k {
        centroid_into(data, &w[j * n..(j + 1) * n], &mut centre);
        for i in 0..n {
            out[i * k + j] = sq_dist(data.point(i), &centre);
        }
    }
}

/// `Σ_j Σ_i x_ij ‖s_i − S Λ_j w‖²`.
pub fn objective_value(data: &DataMatrix, x: &[f64], w: &[f64], k: usize) -> Result<f64> {
    let b = compute_b(data, w, k)?;
    check_len("x", x.len(), b.values.len())?;
    Ok(x.iter().zip(&b.values).map(|(a, b)| a * b).sum())
}

/// Within-cluster sum of squared distances to the arithmetic cluster means.
/// Empty clusters contribute nothing.
pub fn kmeans_objective(data: &DataMatrix, labels: &[usize], k: usize) -> Result<f64> {
    check_len("labels", labels.len(), data.n())?;
    let d = data.d();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (p, &l) in labels.iter().enumerate() {
        if l >= k {
            return Err(Error::Index {
                what: "label",
                index: l,
                bound: k,
            });
        }
        counts[l] += 1;
        for (s, v) in sums[l * d..(l + 1) * d].iter_mut().zip(data.point(p)) {
            *s += v;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= c as f64);
        }
    }
    Ok(labels
        .iter()
        .enumerate()
        .map(|(p, &l)| sq_dist(data.point(p), &sums[l * d..(l + 1) * d]))
        .sum())
}
