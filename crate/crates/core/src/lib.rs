//! Simultaneous safe screening of features and samples for sparse linear
//! models with an elastic-net penalty and a smoothed hinge or smoothed
//! epsilon-insensitive loss, plus bounds for the LP-based SVM.
//!
//! Everything numeric is generic over [`Float`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI uses.

pub mod error;
pub mod gap_spheres;
pub mod lp_svm;
pub mod objective;
pub mod path;
pub mod rules;
pub mod scalar;
pub mod solver;
pub mod sparse_data;
pub mod synth;

pub use error::{Error, Result};
pub use objective::{ProblemSpec, SolutionPair};
pub use rules::{FeatureStatus, Pin, SampleStatus, ScreeningLedger, ScreeningMode};
pub use scalar::Float;
pub use solver::{solve, SolveOutput, SolverOptions, SolverState};
pub use sparse_data::{Dataset, MaskedNorms, SparseDesignMatrix, Task};

pub type Dataset64 = Dataset<f64>;
pub type Matrix64 = SparseDesignMatrix<f64>;
pub type Spec64 = ProblemSpec<f64>;
pub type Pair64 = SolutionPair<f64>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type SolveOutput64 = SolveOutput<f64>;
