pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod risk;
pub mod scalar;
pub mod selection;
pub mod solvers;

pub use error::{Error, Result};
pub use estimators::CoefficientVector;
pub use linalg::Matrix;
pub use solvers::{LassoPath, PathStep, StopReason, StopRule};
