//! Constrained K-means with exact cluster sizes, must-link and cannot-link
//! pairs, posed as one binary program and solved by ADMM over a sphere-box
//! relaxation of the binary set. An exhaustive solver certifies results on
//! small instances.

pub mod admm;
pub mod constraints;
pub mod data;
pub mod error;
pub mod io;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod objective;
pub mod ops;
pub mod oracle;
pub mod report;
pub mod synth;

pub use admm::{run, SolveResult, SolverConfig};
pub use constraints::ConstraintSet;
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use ops::Shape;
