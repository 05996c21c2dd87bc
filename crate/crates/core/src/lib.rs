//! Spin(7) structures on ℝ⁸: exterior algebra, the 7 ⊕ 21 splitting of 2-forms,
//! the complex anti-self-dual picture on ℂ⁴, index arithmetic, a radial gluing
//! model and a lattice instanton solver.

pub mod casd;
pub mod cli;
pub mod error;
pub mod forms;
pub mod gluing;
pub mod index;
pub mod lattice;
pub mod selfcheck;
pub mod split;

pub use error::{Error, Result};

/// Crate version and the revision of the model definitions it implements.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (model 1.0)");
