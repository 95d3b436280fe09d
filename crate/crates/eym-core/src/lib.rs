//! Einstein-Yang-Mills fields on conformally compact manifolds.
//!
//! Numerical core: Riemannian tensor calculus on ball and collar charts,
//! Lie-algebra-valued gauge fields, the gauged field-equation map with
//! Bianchi-Coulomb gauge fixing, indicial analysis for the linearized
//! operators, a Newton continuation solver for the Dirichlet problem at
//! infinity near a trivial solution, and an executable identity suite.

pub mod charts;
pub mod error;
pub mod eym;
pub mod field;
pub mod indicial;
pub mod jet;
pub mod forms;
pub mod lie;
pub mod stencil;
pub mod tensor;

pub use error::{EymError, Result};
