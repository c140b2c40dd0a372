//! Exact Gaussian elimination: reduced row echelon form, linear solves and
//! nullspace bases over the rationals.

use crate::rat::{dot, is_zero_vec, zeros, Rat, Vector};
use num::{One, Signed, Zero};

/// Row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: Vec<Vector>,
    pub cols: usize,
}

impl Mat {
    pub fn new(rows: Vec<Vector>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row width mismatch");
        }
        Mat { rows, cols }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Mat::new(rows.iter().map(|r| crate::rat::vec_i64(r)).collect(), cols)
    }

    pub fn identity(n: usize) -> Self {
        Mat::new((0..n).map(|i| crate::rat::unit(n, i)).collect(), n)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Vector {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    /// Transpose-times-vector, `A^T y`.
    pub fn t_mul_vec(&self, y: &[Rat]) -> Vector {
        let mut out = zeros(self.cols);
        for (r, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(r) {
                *o += yi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut rows = vec![zeros(self.nrows()); self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, a) in r.iter().enumerate() {
                rows[j][i] = a.clone();
            }
        }
        Mat::new(rows, self.nrows())
    }
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref(rows: &mut Vec<Vector>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut lead = 0usize;
    for col in 0..ncols {
        let Some(pr) = (lead..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(lead, pr);
        let inv = rows[lead][col].clone();
        for x in rows[lead].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..rows.len() {
            if i != lead && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                let lead_row = rows[lead].clone();
                for (x, l) in rows[i].iter_mut().zip(&lead_row) {
                    *x = &*x - &f * l;
                }
            }
        }
        pivots.push(col);
        lead += 1;
        if lead == rows.len() {
            break;
        }
    }
    rows.retain(|r| !is_zero_vec(r));
    pivots
}

pub fn rank(rows: &[Vector]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// One solution of `A x = b`, or `None` when inconsistent.
pub fn solve(a: &[Vector], b: &[Rat]) -> Option<Vector> {
    let n = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vector> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&n) {
        return None; // pivot in the augmented column
    }
    let mut x = zeros(n);
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[n].clone();
    }
    Some(x)
}

/// Basis of `{x : A x = 0}` in canonical reduced echelon form of the span:
/// each generator primitive with positive leading entry, sorted by the
/// position of its free column.
pub fn nullspace(a: &[Vector], n: usize) -> Vec<Vector> {
    let mut m: Vec<Vector> = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = zeros(n);
        v[f] = Rat::one();
        for (row, &p) in m.iter().zip(&pivots) {
            v[p] = -row[f].clone();
        }
        basis.push(v);
    }
    canonical_span_basis(&basis, n)
}

/// Canonical basis of the span of `gens`: RREF rows scaled primitive with the
/// first nonzero entry positive. Equal subspaces yield identical bases.
pub fn canonical_span_basis(gens: &[Vector], n: usize) -> Vec<Vector> {
    let mut m: Vec<Vector> = gens.iter().filter(|g| !is_zero_vec(g)).cloned().collect();
    if m.is_empty() {
        return Vec::new();
    }
    debug_assert!(m.iter().all(|g| g.len() == n));
    rref(&mut m);
    m.iter()
        .map(|r| {
            let (p, _) = crate::rat::primitive_signed(r).unwrap();
            p
        })
        .collect()
}

/// Whether `v` lies in the span of `gens`.
pub fn in_span(v: &[Rat], gens: &[Vector]) -> bool {
    if is_zero_vec(v) {
        return true;
    }
    let mut m: Vec<Vector> = gens.to_vec();
    let r0 = rref(&mut m).len();
    m.push(v.to_vec());
    rref(&mut m).len() == r0
}

/// Projection of `p` onto the affine solution set of `A x = b` (minimum-norm
/// correction), or `None` when the system is inconsistent.
pub fn affine_projection(a: &[Vector], b: &[Rat], p: &[Rat]) -> Option<Vector> {
    let n = p.len();
    // KKT system: x + A^T lambda = p, A x = b.
    let m = a.len();
    let mut rows: Vec<Vector> = Vec::with_capacity(n + m);
    let mut rhs: Vector = Vec::with_capacity(n + m);
    for i in 0..n {
        let mut row = zeros(n + m);
        row[i] = Rat::one();
        for (j, ar) in a.iter().enumerate() {
            row[n + j] = ar[i].clone();
        }
        rows.push(row);
        rhs.push(p[i].clone());
    }
    for (ar, bi) in a.iter().zip(b) {
        let mut row = zeros(n + m);
        row[..n].clone_from_slice(ar);
        rows.push(row);
        rhs.push(bi.clone());
    }
    // The KKT matrix can be singular when A has dependent rows; any solution
    // gives the same x block because the projection is unique.
    let sol = solve(&rows, &rhs)?;
    Some(sol[..n].to_vec())
}

/// Sign of a rational as -1/0/+1.
pub fn sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat, vec_i64};

    #[test]
    fn solve_and_nullspace() {
        let a = vec![vec_i64(&[1, 1, 0]), vec_i64(&[0, 1, 1])];
        let b = vec![int(3), int(5)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(dot(&a[0], &x), int(3));
        assert_eq!(dot(&a[1], &x), int(5));
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        assert!(dot(&a[0], &ns[0]).is_zero() && dot(&a[1], &ns[0]).is_zero());

        let inconsistent = vec![vec_i64(&[1, 0]), vec_i64(&[1, 0])];
        assert!(solve(&inconsistent, &[int(1), int(2)]).is_none());
    }

    #[test]
    fn canonical_basis_is_representation_independent() {
        let b1 = canonical_span_basis(&[vec_i64(&[1, 1, 0]), vec_i64(&[0, 0, 2])], 3);
        let b2 = canonical_span_basis(&[vec_i64(&[2, 2, 2]), vec_i64(&[-1, -1, 3])], 3);
        assert_eq!(b1, b2);
    }

    #[test]
    fn affine_projection_matches_hand_solution() {
        // Project (1,1) onto {x1 + x2 = 1}.
        let a = vec![vec_i64(&[1, 1])];
        let x = affine_projection(&a, &[int(1)], &[int(1), int(1)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
    }
}
