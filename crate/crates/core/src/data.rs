use crate::error::{Error, Result};

/// The d×n point matrix. Column `p` is data point `s_p`; storage is
/// column-major so each point is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    d: usize,
    n: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from column-major storage (`values[p * d + r]` is
    /// feature `r` of point `p`).
    pub fn from_columns(d: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::Validation(format!(
                "data matrix must have d >= 1 and n >= 1 (got d={d}, n={n})"
            )));
        }
        if values.len() != d * n {
            return Err(Error::Dimension {
                what: "data matrix storage",
                expected: d * n,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite coordinate at point {}, feature {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { d, n, values })
    }

    /// Builds a matrix from one slice per point.
    pub fn from_points<R: AsRef<[f64]>>(points: &[R]) -> Result<Self> {
        let n = points.len();
        let d = points.first().map_or(0, |p| p.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for (p, row) in points.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Validation(format!(
                    "point {p} has {} features, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_columns(d, n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Data point `s_p`.
    pub fn point(&self, p: usize) -> &[f64] {
        &self.values[p * self.d..(p + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Mean squared distance of the points to their global mean.
    pub fn mean_spread(&self) -> f64 {
        let mut mean = vec![0.0; self.d];
        for p in self.points() {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        self.points().map(|p| sq_dist(p, &mean)).sum::<f64>() / self.n as f64
    }

    /// Copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            d: self.d,
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
