//! Symbolic slice fitting and lifting into a new variable.

pub mod complexity;
pub mod enumerate;
pub mod expr;
pub mod fit;
pub mod frame;
pub mod grammar;
pub mod lift;
mod program;
pub mod search;

pub use complexity::{complexity, ComplexityScore};
pub use expr::{BinaryOp, Expression, UnaryOp};
pub use fit::{fit_points, FitSettings, SearchBudget, SliceFit, SlicePoints};
pub use frame::SliceFrame;
pub use grammar::Grammar;
pub use lift::{lift_constants, restrict, CandidateLifting};
pub use search::{fit_slice, search_hyperpolation, search_hyperpolation_with, SearchOptions, SearchOutcome};
