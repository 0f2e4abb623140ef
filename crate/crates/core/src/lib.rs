//! Unitary CPT operators for massive and massless particles of arbitrary
//! spin, and the resource theory of CPT superselection built on them.

pub mod alignment_protocol;
pub mod cpt_operators;
pub mod dfs_codec;
pub mod error;
pub mod linalg;
pub mod momentum_grid;
pub mod report;
pub mod resource_theory;
pub mod seeding;
pub mod spin_spaces;
pub mod suites;

pub use error::{CptError, Result};
pub use report::{Check, Report};
