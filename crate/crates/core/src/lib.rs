//! Exact kernel for directional variational analysis on finite unions of
//! convex polyhedra with rational data.

pub mod cells;
pub mod cones;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod pwa;
pub mod rat;
pub mod rules;
pub mod union;
pub mod verdict;

pub use error::{Error, Result};
pub use rat::{Rat, Vector};
