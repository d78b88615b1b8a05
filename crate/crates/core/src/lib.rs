//! Numerical certification of operator extensions of weak monotonicity and
//! strong subadditivity.
//!
//! The crate is layered bottom-up: [`linalg`] (dense complex kernels and the
//! Hermitian spectral calculus), [`tensor`] (labeled factors, embeddings,
//! partial traces), [`state`] (density matrices), [`inequality`] (dilations and
//! Löwner-order checks), [`search`] (adversarial Nelder-Mead search) and
//! [`harness`] (the command-line runner and report writers).

pub mod error;
pub mod harness;
pub mod inequality;
pub mod linalg;
pub mod search;
pub mod state;
pub mod tensor;

pub use error::{LabError, Result};
pub use inequality::{Inequality, Isometry, LoewnerReport, ObstructionReport, Verdict};
pub use linalg::{ComplexMatrix, HermitianEigen, MatrixFunction, C64};
pub use search::{SearchRecord, SearchResult, SearchTarget, StateParams};
pub use state::{DensityMatrix, PureState};
pub use tensor::SystemShape;
