//! Exhaustive enumeration of all `kⁿ` labellings for tiny instances.

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::objective::kmeans_objective;

pub const DEFAULT_LIMIT: u128 = 10_000_000;

/// Objectives within this distance of the optimum count as optimal.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Lexicographically smallest optimal labelling; empty if infeasible.
    pub best_labels: Vec<usize>,
    /// `None` when no labelling satisfies the constraints.
    pub best_objective: Option<f64>,
    pub feasible_count: u64,
    /// Labellings (not partitions) attaining the optimum.
    pub optimal_count: u64,
}

impl OracleResult {
    pub fn infeasible(&self) -> bool {
        self.feasible_count == 0
    }
}

/// Iterator over every labelling in lexicographic order that satisfies all
/// constraints of the set.
pub struct FeasibleAssignments<'a> {
    constraints: &'a ConstraintSet,
    k: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for FeasibleAssignments<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        while !self.done {
            let candidate = self.current.clone();
            self.advance();
            if self.constraints.is_satisfied_by(&candidate, self.k) {
                return Some(candidate);
            }
        }
        None
    }
}

impl FeasibleAssignments<'_> {
    fn advance(&mut self) {
        for pos in (0..self.current.len()).rev() {
            self.current[pos] += 1;
            if self.current[pos] < self.k {
                return;
            }
            self.current[pos] = 0;
        }
        self.done = true;
    }
}

pub fn feasible_assignments(n: usize, k: usize, constraints: &ConstraintSet) -> FeasibleAssignments<'_> {
    FeasibleAssignments {
        constraints,
        k,
        current: vec![0; n],
        done: n == 0 || k == 0,
    }
}

fn search_size(n: usize, k: usize) -> u128 {
    (0..n).try_fold(1u128, |acc, _| acc.checked_mul(k as u128)).unwrap_or(u128::MAX)
}

/// Global optimum of the clustering objective over every labelling that meets
/// the constraints.
pub fn brute_force_solve(
    data: &DataMatrix,
    k: usize,
    constraints: &ConstraintSet,
    limit: u128,
) -> Result<OracleResult> {
    let n = data.n();
    let size = search_size(n, k);
    if size > limit {
        return Err(Error::TooLarge { size, limit });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut feasible_count = 0;
    let mut optimal_count = 0;
    for labels in feasible_assignments(n, k, constraints) {
        feasible_count += 1;
        let obj = kmeans_objective(data, &labels, k)?;
        match &best {
            Some((b, _)) if obj > b + TIE_TOL => {}
            Some((b, _)) if obj >= b - TIE_TOL => optimal_count += 1,
            _ => {
                best = Some((obj, labels));
                optimal_count = 1;
            }
        }
    }
    Ok(match best {
        Some((obj, labels)) => OracleResult {
            best_labels: labels,
            best_objective: Some(obj),
            feasible_count,
            optimal_count,
        },
        None => OracleResult {
            best_labels: Vec::new(),
            best_objective: None,
            feasible_count: 0,
            optimal_count: 0,
        },
    })
}
