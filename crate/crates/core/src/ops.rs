//! Matrix-free structured operators.
//!
//! Two orderings of the `n·k` association variables are used throughout:
//!
//! * point-major: entry `(i, j)` (point `i`, cluster `j`) lives at `i·k + j`;
//!   used for `x`, the `z` copies and most multipliers.
//! * cluster-major: entry `(p, j)` lives at `j·n + p`; used for the coupling
//!   weights `w`.
//!
//! Every operator is implemented by index arithmetic. Dense matrices are only
//! ever built in tests.

use crate::data::DataMatrix;
use crate::error::{check_len, Error, Result};

/// Problem dimensions: `n` points, `k` clusters, `d` features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl Shape {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        if n == 0 || k == 0 || d == 0 {
            return Err(Error::Validation(format!(
                "shape requires n, k, d >= 1 (got n={n}, k={k}, d={d})"
            )));
        }
        if k > n {
            return Err(Error::Validation(format!(
                "cannot form k={k} clusters from n={n} points"
            )));
        }
        Ok(Self { n, k, d })
    }

    /// Shape of a data matrix clustered into `k` groups.
    pub fn of(data: &DataMatrix, k: usize) -> Result<Self> {
        Self::new(data.n(), k, data.d())
    }

    /// Length of the association vectors.
    pub fn nk(&self) -> usize {
        self.n * self.k
    }

    /// Point-major index of `(point, cluster)`.
    #[inline]
    pub fn pm(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    /// Cluster-major index of `(point, cluster)`.
    #[inline]
    pub fn cm(&self, p: usize, j: usize) -> usize {
        j * self.n + p
    }
}

/// `Ψᵀx`: per-point sum of the `k` association values.
pub fn psi_t_apply(shape: &Shape, x: &[f64]) -> Result<Vec<f64>> {
    check_len("x", x.len(), shape.nk())?;
    let mut out = vec![0.0; shape.n];
    psi_t_into(shape, x, &mut out);
    Ok(out)
}

/// `Ψy`: replicates each point's scalar across its `k` slots.
pub fn psi_apply(shape: &Shape, y: &[f64]) -> Result<Vec<f64>> {
    check_len("y", y.len(), shape.n)?;
    let mut out = vec![0.0; shape.nk()];
    psi_into(shape, y, &mut out);
    Ok(out)
}

/// `P v`: cluster-major to point-major.
pub fn perm_apply(shape: &Shape, v: &[f64]) -> Result<Vec<f64>> {
    check_len("cluster-major vector", v.len(), shape.nk())?;
    let mut out = vec![0.0; shape.nk()];
    perm_into(shape, v, &mut out);
    Ok(out)
}

/// `Pᵀ v`: point-major to cluster-major. Exact inverse of [`perm_apply`].
pub fn perm_t_apply(shape: &Shape, v: &[f64]) -> Result<Vec<f64>> {
    check_len("point-major vector", v.len(), shape.nk())?;
    let mut out = vec![0.0; shape.nk()];
    perm_t_into(shape, v, &mut out);
    Ok(out)
}

/// `C x`: the mass of cluster `j`, written into every point's slot `j`.
pub fn c_apply(shape: &Shape, x: &[f64]) -> Result<Vec<f64>> {
    check_len("x", x.len(), shape.nk())?;
    let mut out = vec![0.0; shape.nk()];
    c_into(shape, x, &mut out);
    Ok(out)
}

/// `Cᵀ v`. `C` is symmetric, so this is the same map as [`c_apply`].
pub fn c_t_apply(shape: &Shape, v: &[f64]) -> Result<Vec<f64>> {
    c_apply(shape, v)
}

/// `Q xc`: per-cluster sum of a cluster-major vector.
pub fn q_apply(shape: &Shape, xc: &[f64]) -> Result<Vec<f64>> {
    check_len("cluster-major vector", xc.len(), shape.nk())?;
    Ok(xc.chunks_exact(shape.n).map(|b| b.iter().sum()).collect())
}

/// `Qᵀ y`: replicates `y_j` over cluster `j`'s block (cluster-major).
pub fn q_t_apply(shape: &Shape, y: &[f64]) -> Result<Vec<f64>> {
    check_len("y", y.len(), shape.k)?;
    let mut out = vec![0.0; shape.nk()];
    for (block, &yj) in out.chunks_exact_mut(shape.n).zip(y) {
        block.fill(yj);
    }
    Ok(out)
}

/// Cluster sizes `Q Pᵀ x` of a point-major vector.
pub fn cluster_sizes(shape: &Shape, x: &[f64]) -> Result<Vec<f64>> {
    check_len("x", x.len(), shape.nk())?;
    let mut out = vec![0.0; shape.k];
    sizes_into(shape, x, &mut out);
    Ok(out)
}

/// `Λ_j w`: block `j` of a cluster-major vector.
pub fn lambda_apply(shape: &Shape, w: &[f64], j: usize) -> Result<Vec<f64>> {
    check_len("w", w.len(), shape.nk())?;
    check_cluster(shape, j)?;
    Ok(w[j * shape.n..(j + 1) * shape.n].to_vec())
}

/// `Λ_jᵀ v`: embeds an `n`-vector as block `j` of a zero cluster-major vector.
pub fn lambda_t_apply(shape: &Shape, v: &[f64], j: usize) -> Result<Vec<f64>> {
    check_len("v", v.len(), shape.n)?;
    check_cluster(shape, j)?;
    let mut out = vec![0.0; shape.nk()];
    out[j * shape.n..(j + 1) * shape.n].copy_from_slice(v);
    Ok(out)
}

/// `S Λ_j w = Σ_p w_(p,j) s_p`.
pub fn centroid(data: &DataMatrix, w: &[f64], j: usize, k: usize) -> Result<Vec<f64>> {
    let shape = Shape::new(data.n(), k, data.d())?;
    check_len("w", w.len(), shape.nk())?;
    check_cluster(&shape, j)?;
    let mut out = vec![0.0; shape.d];
    centroid_into(data, &w[j * shape.n..(j + 1) * shape.n], &mut out);
    Ok(out)
}

fn check_cluster(shape: &Shape, j: usize) -> Result<()> {
    if j < shape.k {
        Ok(())
    } else {
        Err(Error::Index {
            what: "cluster",
            index: j,
            bound: shape.k,
        })
    }
}

pub(crate) fn psi_t_into(shape: &Shape, x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(x.chunks_exact(shape.k)) {
        *o = row.iter().sum();
    }
}

pub(crate) fn psi_into(shape: &Shape, y: &[f64], out: &mut [f64]) {
    for (row, &yi) in out.chunks_exact_mut(shape.k).zip(y) {
        row.fill(yi);
    }
}

pub(crate) fn perm_into(shape: &Shape, v: &[f64], out: &mut [f64]) {
    for i in 0..shape.n {
        for j in 0..shape.k {
            out[shape.pm(i, j)] = v[shape.cm(i, j)];
        }
    }
}

pub(crate) fn perm_t_into(shape: &Shape, v: &[f64], out: &mut [f64]) {
    for i in 0..shape.n {
        for j in 0..shape.k {
            out[shape.cm(i, j)] = v[shape.pm(i, j)];
        }
    }
}

pub(crate) fn sizes_into(shape: &Shape, x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for row in x.chunks_exact(shape.k) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

pub(crate) fn c_into(shape: &Shape, x: &[f64], out: &mut [f64]) {
    let mut sizes = vec![0.0; shape.k];
    sizes_into(shape, x, &mut sizes);
    for row in out.chunks_exact_mut(shape.k) {
        row.copy_from_slice(&sizes);
    }
}

pub(crate) fn centroid_into(data: &DataMatrix, weights: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (p, &wp) in weights.iter().enumerate() {
        if wp != 0.0 {
            for (o, s) in out.iter_mut().zip(data.point(p)) {
                *o += wp * s;
            }
        }
    }
}

/// Which endpoint of each constrained pair a selection operator picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    First,
    Second,
}

/// Selection matrix stacking the `k` association values of one endpoint of
/// every constrained pair (`E₁`/`E₂` for must-links, `E₃`/`E₄` for
/// cannot-links). Output has `k · count` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionOperator {
    pairs: Vec<(usize, usize)>,
    endpoint: Endpoint,
}

impl SelectionOperator {
    pub fn new(pairs: &[(usize, usize)], endpoint: Endpoint, n: usize) -> Result<Self> {
        for &(a, b) in pairs {
            for p in [a, b] {
                if p >= n {
                    return Err(Error::Index {
                        what: "pair endpoint",
                        index: p,
                        bound: n,
                    });
                }
            }
            if a == b {
                return Err(Error::Validation(format!("pair ({a}, {b}) links a point to itself")));
            }
        }
        Ok(Self {
            pairs: pairs.to_vec(),
            endpoint,
        })
    }

    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    fn point(&self, c: usize) -> usize {
        match self.endpoint {
            Endpoint::First => self.pairs[c].0,
            Endpoint::Second => self.pairs[c].1,
        }
    }

    pub fn apply(&self, shape: &Shape, x: &[f64]) -> Result<Vec<f64>> {
        check_len("x", x.len(), shape.nk())?;
        let k = shape.k;
        let mut out = vec![0.0; k * self.count()];
        for (c, row) in out.chunks_exact_mut(k).enumerate() {
            let a = self.point(c);
            row.copy_from_slice(&x[a * k..(a + 1) * k]);
        }
        Ok(out)
    }

    pub fn t_apply(&self, shape: &Shape, y: &[f64]) -> Result<Vec<f64>> {
        let k = shape.k;
        check_len("selection output", y.len(), k * self.count())?;
        let mut out = vec![0.0; shape.nk()];
        for (c, row) in y.chunks_exact(k).enumerate() {
            let a = self.point(c);
            for (o, v) in out[a * k..(a + 1) * k].iter_mut().zip(row) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// Fused products of a pair of selection operators over the same pair list:
/// `E_aᵀ E_b` and its transpose, without materializing the `k·count` rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCoupling {
    pairs: Vec<(usize, usize)>,
}

impl PairCoupling {
    pub fn new(pairs: &[(usize, usize)]) -> Self {
        Self {
            pairs: pairs.to_vec(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// `E_firstᵀ E_second x`: each pair's first endpoint receives the second
    /// endpoint's label row.
    pub(crate) fn forward_into(&self, k: usize, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(a, b) in &self.pairs {
            for j in 0..k {
                out[a * k + j] += x[b * k + j];
            }
        }
    }

    /// `E_secondᵀ E_first z`.
    pub(crate) fn backward_into(&self, k: usize, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(a, b) in &self.pairs {
            for j in 0..k {
                out[b * k + j] += z[a * k + j];
            }
        }
    }

    /// `(E_first z)ᵀ (E_second x)`.
    pub(crate) fn bilinear(&self, k: usize, z: &[f64], x: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(a, b)| {
                (0..k).map(|j| z[a * k + j] * x[b * k + j]).sum::<f64>()
            })
            .sum()
    }

    pub fn forward(&self, shape: &Shape, x: &[f64]) -> Result<Vec<f64>> {
        check_len("x", x.len(), shape.nk())?;
        let mut out = vec![0.0; shape.nk()];
        self.forward_into(shape.k, x, &mut out);
        Ok(out)
    }

    pub fn backward(&self, shape: &Shape, z: &[f64]) -> Result<Vec<f64>> {
        check_len("z", z.len(), shape.nk())?;
        let mut out = vec![0.0; shape.nk()];
        self.backward_into(shape.k, z, &mut out);
        Ok(out)
    }
}
