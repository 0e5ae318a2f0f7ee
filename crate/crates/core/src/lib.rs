//! Solvers, hardness-gadget generators, and brute-force certification
//! oracles for attacks on issue-importance weights in spatial-model
//! plurality elections.

pub mod error;
pub mod gadgets;
pub mod io;
pub mod linprog;
pub mod model;
pub mod oracles;
pub mod pnorm;
pub mod programs;
pub mod solvers;
pub mod qp;

pub use error::{Error, Result};
