//! Penalized regression functionals, their influence functions and the
//! robustness diagnostics built on them (sensitivity curves, asymptotic
//! variance, mean squared error), with brute-force oracles for checking.

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod influence;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod normal;
pub mod oracle;
pub mod penalties;
pub mod spec;
pub mod verify;

pub use error::{Error, Result};
pub use functionals::{Control, FunctionalResult, Method, SparseLTSParams};
pub use losses::{LossKind, LossSpec};
pub use model::{Dataset, MCConfig, Population, RegressionModel};
pub use penalties::{PenaltyKind, PenaltySpec};
pub use spec::{EstimatorSpec, FunctionalSpec};
