//! Constraint families: exact cluster sizes, must-link and cannot-link pairs.
//!
//! For a one-hot assignment the pairwise families each collapse to one scalar
//! quadratic. With `a = E₁x`, `b = E₂x` stacked over the `v` must-links,
//! `‖a − b‖² = 2v − 2 aᵀb`, so all must-links hold iff `aᵀb = v`. For the `e`
//! cannot-links, `‖E₃x + E₄x‖² = 2e + 2 (E₃x)ᵀ(E₄x)` and all hold iff the
//! product is zero.

use std::collections::BTreeSet;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::ops::{sizes_into, Shape};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Target size of every cluster, if cardinality is constrained.
    pub cardinalities: Option<Vec<usize>>,
    /// Unordered, deduplicated, stored as `(min, max)`.
    pub must_links: Vec<(usize, usize)>,
    pub cannot_links: Vec<(usize, usize)>,
}

/// Non-fatal findings from [`ConstraintSet::validate`]: the set is well formed
/// but no assignment can satisfy it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infeasibility {
    /// A cannot-link joins two points that the must-link closure forces together.
    LinkConflict { a: usize, b: usize },
    /// A must-link component is larger than every target cluster size.
    ComponentTooLarge { size: usize, max_cardinality: usize },
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::LinkConflict { a, b } => write!(
                f,
                "cannot-link ({a}, {b}) contradicts the transitive closure of the must-links"
            ),
            Self::ComponentTooLarge {
                size,
                max_cardinality,
            } => write!(
                f,
                "must-link component of {size} points exceeds the largest cluster size {max_cardinality}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub warnings: Vec<Infeasibility>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

fn normalize(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

impl ConstraintSet {
    pub fn new(
        cardinalities: Option<Vec<usize>>,
        must_links: &[(usize, usize)],
        cannot_links: &[(usize, usize)],
    ) -> Self {
        Self {
            cardinalities,
            must_links: normalize(must_links),
            cannot_links: normalize(cannot_links),
        }
    }

    pub fn unconstrained() -> Self {
        Self::default()
    }

    /// Number of distinct must-links (`v`).
    pub fn v(&self) -> usize {
        self.must_links.len()
    }

    /// Number of distinct cannot-links (`e`).
    pub fn e(&self) -> usize {
        self.cannot_links.len()
    }

    /// Checks the hard invariants and reports closure-level infeasibility.
    pub fn validate(&self, shape: &Shape) -> Result<ValidationReport> {
        let n = shape.n;
        if let Some(u) = &self.cardinalities {
            check_len("cardinalities", u.len(), shape.k)?;
            let total: usize = u.iter().sum();
            if total != n {
                return Err(Error::Validation(format!(
                    "cardinalities sum {total} \u{2260} n={n}"
                )));
            }
        }
        for (kind, pairs) in [("must-link", &self.must_links), ("cannot-link", &self.cannot_links)] {
            for &(a, b) in pairs {
                if a >= n || b >= n {
                    return Err(Error::Validation(format!(
                        "{kind} ({a}, {b}) references a point outside 0..{n}"
                    )));
                }
                if a == b {
                    return Err(Error::Validation(format!(
                        "{kind} ({a}, {b}) links a point to itself"
                    )));
                }
            }
        }
        let ml: BTreeSet<_> = normalize(&self.must_links).into_iter().collect();
        for &(a, b) in &normalize(&self.cannot_links) {
            if ml.contains(&(a, b)) {
                return Err(Error::Validation(format!(
                    "pair ({a}, {b}) is both a must-link and a cannot-link"
                )));
            }
        }

        let mut uf = UnionFind::<usize>::new(n);
        for &(a, b) in &self.must_links {
            uf.union(a, b);
        }
        let mut warnings = Vec::new();
        for &(a, b) in &self.cannot_links {
            if uf.equiv(a, b) {
                warnings.push(Infeasibility::LinkConflict { a, b });
            }
        }
        if let Some(u) = &self.cardinalities {
            let max_cardinality = u.iter().copied().max().unwrap_or(0);
            let mut sizes = vec![0usize; n];
            (0..n).for_each(|p| sizes[uf.find(p)] += 1);
            if let Some(&size) = sizes.iter().filter(|&&s| s > max_cardinality).max() {
                warnings.push(Infeasibility::ComponentTooLarge {
                    size,
                    max_cardinality,
                });
            }
        }
        Ok(ValidationReport { warnings })
    }

    /// `xᵀ E₁ᵀ E₂ x = Σ_(a,b) Σ_j x_aj x_bj`; equals `v` on a one-hot `x`
    /// exactly when every must-link is satisfied.
    pub fn mustlink_quadratic(&self, x: &[f64], shape: &Shape) -> Result<f64> {
        check_len("x", x.len(), shape.nk())?;
        Ok(pair_products(&self.must_links, x, shape.k))
    }

    /// `xᵀ E₃ᵀ E₄ x`; on a one-hot `x` this counts violated cannot-links.
    pub fn cannotlink_quadratic(&self, x: &[f64], shape: &Shape) -> Result<f64> {
        check_len("x", x.len(), shape.nk())?;
        Ok(pair_products(&self.cannot_links, x, shape.k))
    }

    /// `Q Pᵀ x − u`.
    pub fn cardinality_residual(&self, x: &[f64], shape: &Shape) -> Result<Vec<f64>> {
        check_len("x", x.len(), shape.nk())?;
        let u = self.cardinalities.as_ref().ok_or_else(|| {
            Error::Validation("no cardinality constraints were given".into())
        })?;
        check_len("cardinalities", u.len(), shape.k)?;
        let mut sizes = vec![0.0; shape.k];
        sizes_into(shape, x, &mut sizes);
        Ok(sizes.iter().zip(u).map(|(s, &t)| s - t as f64).collect())
    }

    /// Whether a hard labelling meets every constraint.
    pub fn is_satisfied_by(&self, labels: &[usize], k: usize) -> bool {
        if let Some(u) = &self.cardinalities {
            let mut sizes = vec![0usize; k];
            for &l in labels {
                match sizes.get_mut(l) {
                    Some(s) => *s += 1,
                    None => return false,
                }
            }
            if sizes != *u {
                return false;
            }
        }
        self.must_links.iter().all(|&(a, b)| labels[a] == labels[b])
            && self.cannot_links.iter().all(|&(a, b)| labels[a] != labels[b])
    }
}

fn pair_products(pairs: &[(usize, usize)], x: &[f64], k: usize) -> f64 {
    pairs
        .iter()
        .map(|&(a, b)| (0..k).map(|j| x[a * k + j] * x[b * k + j]).sum::<f64>())
        .sum()
}
