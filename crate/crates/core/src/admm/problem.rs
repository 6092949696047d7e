use crate::constraints::{ConstraintSet, ValidationReport};
use crate::data::DataMatrix;
use crate::error::Result;
use crate::ops::{PairCoupling, Shape};

/// A validated instance: data, cluster count and constraints, plus the fused
/// pair operators the updates need.
#[derive(Debug, Clone)]
pub struct Problem {
    pub(crate) data: DataMatrix,
    pub(crate) shape: Shape,
    pub(crate) constraints: ConstraintSet,
    pub(crate) targets: Option<Vec<f64>>,
    /// `E₁ᵀE₂` over the must-links.
    pub(crate) must: PairCoupling,
    /// `E₃ᵀE₄` over the cannot-links.
    pub(crate) cannot: PairCoupling,
    report: ValidationReport,
}

impl Problem {
    pub fn new(data: &DataMatrix, k: usize, constraints: &ConstraintSet) -> Result<Self> {
        let shape = Shape::of(data, k)?;
        let constraints = ConstraintSet::new(
            constraints.cardinalities.clone(),
            &constraints.must_links,
            &constraints.cannot_links,
        );
        let report = constraints.validate(&shape)?;
        Ok(Self {
            data: data.clone(),
            shape,
            targets: constraints
                .cardinalities
                .as_ref()
                .map(|u| u.iter().map(|&v| v as f64).collect()),
            must: PairCoupling::new(&constraints.must_links),
            cannot: PairCoupling::new(&constraints.cannot_links),
            constraints,
            report,
        })
    }

    /// Same instance with the points rescaled by `factor`.
    pub(crate) fn rescaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.scaled(factor),
            ..self.clone()
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.report
    }

    pub fn has_cardinality(&self) -> bool {
        self.targets.is_some()
    }

    pub fn has_must_links(&self) -> bool {
        !self.must.is_empty()
    }

    pub fn has_cannot_links(&self) -> bool {
        !self.cannot.is_empty()
    }

    /// `v` as a real.
    pub(crate) fn v(&self) -> f64 {
        self.must.len() as f64
    }
}
