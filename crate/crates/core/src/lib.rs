//! Minimal weighted L^p extensions of holomorphic data from a submanifold,
//! computed two ways (direct descent and iteratively reweighted least squares)
//! and cross-checked through a residual ledger.

pub mod cli;
pub mod config;
pub mod error;
pub mod function_space;
pub mod geometry;
pub mod instance;
pub mod irls;
pub mod l2_solver;
pub mod linalg;
pub mod lp_solver;
pub mod verifier;

pub use error::{Error, Result};
