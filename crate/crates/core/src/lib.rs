pub mod dataset;
pub mod error;
pub mod finite_model;
pub mod kernels;
pub mod local;
pub mod nonlocal;
pub mod optimize;
pub mod registry;
pub mod relative;
pub mod report;
pub mod svm;
pub mod threshold;
pub mod vapnik;

pub use error::{Error, Result};
pub use finite_model::{kl, FiniteHypothesisClass, PosteriorWeights};
pub use report::{BoundReport, Optimized};
