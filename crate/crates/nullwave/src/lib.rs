//! First-order reductions of the 3+1 wave equation on Cauchy, null-plane
//! and null-cone slicings, with quadrature checks of the associated
//! energy balance identities and estimates.

pub mod cauchy;
pub mod config;
pub mod datagen;
pub mod error;
pub mod estimate;
pub mod field;
pub mod grid;
pub mod nullcone;
pub mod nullplane;
pub mod ops;
pub mod oracle;
pub mod report;
pub mod runner;

pub use error::{NullwaveError, Result};
