//! Policy averaging for the data-driven newsvendor problem.
//!
//! Candidate ordering policies (parametric, data-driven, kernel and neural)
//! are fitted on cross-validation folds, and their held-out order quantities
//! are combined by box-constrained weights from an exact linear program.

pub mod analytics;
pub mod candidates;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod newsvendor;
pub mod optimizer;
pub mod paa;
pub mod rng;
pub mod scalar;
pub mod special;

pub use error::{PaaError, Result};
pub use newsvendor::{
    critical_ratio, empirical_cost, newsvendor_cost, saa_quantile, weighted_quantile, CostParams, Dataset, FoldPlan, Observation, WeightBox,
};
pub use optimizer::{LinearProgram, LpSolution, LpStatus};
pub use scalar::Real;
pub use special::Tolerance;

pub type CostParamsF32 = CostParams<f32>;
pub type CostParamsF64 = CostParams<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type DatasetF64 = Dataset<f64>;
pub type WeightBoxF32 = WeightBox<f32>;
pub type WeightBoxF64 = WeightBox<f64>;
pub type LinearProgramF32 = LinearProgram<f32>;
pub type LinearProgramF64 = LinearProgram<f64>;
