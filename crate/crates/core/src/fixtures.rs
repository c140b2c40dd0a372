//! Shared polyhedral fixtures used across the test suites and the task files.

use crate::geometry::HPoly;
use crate::rat::{vec_i64, zeros, Vector};
use crate::union::UnionSet;

/// Ray `R_+ x {0}` in the plane.
pub fn xplus_ray() -> HPoly {
    HPoly::cone_from_rows(vec![vec_i64(&[-1, 0])], vec![vec_i64(&[0, 1])], 2)
}

/// Ray `{0} x R_+`.
pub fn yplus_ray() -> HPoly {
    HPoly::cone_from_rows(vec![vec_i64(&[0, -1])], vec![vec_i64(&[1, 0])], 2)
}

/// Ray `{0} x R_-`.
pub fn yminus_ray() -> HPoly {
    HPoly::cone_from_rows(vec![vec_i64(&[0, 1])], vec![vec_i64(&[1, 0])], 2)
}

/// The complementarity set `(R_+ x {0}) u ({0} x R_+)`.
pub fn mpcc() -> UnionSet {
    UnionSet::new(2, vec![xplus_ray(), yplus_ray()])
}

/// The graph of the normal-cone map of `R_+`: `(R_+ x {0}) u ({0} x R_-)`.
pub fn cplm() -> UnionSet {
    UnionSet::new(2, vec![xplus_ray(), yminus_ray()])
}

pub fn origin(n: usize) -> Vector {
    zeros(n)
}
