//! Shrinkage estimation for heteroscedastic hierarchical models whose
//! sampling family has a quadratic variance function, driven by unbiased
//! risk estimates.

pub mod baseball;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod families;
pub mod isotonic;
pub mod numeric;
pub mod optim;
pub mod regularity;
pub mod rng;
pub mod sim;
pub mod ure;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use estimators::{Estimator, FitOptions, FitResult, Rule};
pub use families::FamilyKind;
pub use ure::{ParamRule, SemiRule};
