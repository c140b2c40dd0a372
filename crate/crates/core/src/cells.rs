//! Sign-cell enumeration for hyperplane arrangements.
//!
//! A cell is a maximal region on which every arrangement row `a . x - b` has a
//! fixed sign in {-1, 0, +1}. Enumeration is a depth-first walk over sign
//! prefixes with exact LP feasibility pruning, so the node count is bounded by
//! the number of faces of the arrangement rather than `3^rows`.

use crate::error::{Error, Result};
use crate::lp::{self, Constraint};
use crate::rat::{neg, primitive_signed, Rat, Vector};

/// Default ceiling on enumerated cells; callers may override.
pub const DEFAULT_MAX_CELLS: usize = 200_000;

/// Deduplicated oriented hyperplane list. Parallel rows collapse to one entry
/// with a per-insertion orientation so sign bookkeeping stays consistent.
#[derive(Debug, Clone, Default)]
pub struct RowTable {
    rows: Vec<(Vector, Rat)>, // canonical (a, b) with (a, -b) primitive, first nonzero of a positive
}

impl RowTable {
    pub fn new() -> Self {
        RowTable::default()
    }

    /// Inserts hyperplane `a . x = b`; returns its index and the orientation
    /// `s` such that the stored row equals `s * (a, b)` up to positive scale.
    /// Zero rows are rejected.
    pub fn insert(&mut self, a: &[Rat], b: &Rat) -> Option<(usize, i8)> {
        let mut joint = a.to_vec();
        joint.push(-b.clone());
        let (p, flipped) = primitive_signed(&joint)?;
        let s: i8 = if flipped { -1 } else { 1 };
        let n = a.len();
        let key = (p[..n].to_vec(), -p[n].clone());
        if let Some(idx) = self.rows.iter().position(|r| *r == key) {
            return Some((idx, s));
        }
        self.rows.push(key);
        Some((self.rows.len() - 1, s))
    }

    pub fn rows(&self) -> &[(Vector, Rat)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sign vector of a point with respect to all rows.
    pub fn signs_at(&self, x: &[Rat]) -> Vec<i8> {
        self.rows
            .iter()
            .map(|(a, b)| crate::linalg::sign(&(crate::rat::dot(a, x) - b)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub signs: Vec<i8>,
    pub witness: Vector,
}

impl Cell {
    /// Whether `x` belongs to the closure of the cell: every strict sign
    /// relaxed to its non-strict inequality still holds at `x`.
    pub fn closure_contains(&self, table: &RowTable, x: &[Rat]) -> bool {
        self.signs
            .iter()
            .zip(table.rows())
            .all(|(&s, (a, b))| match s {
                0 => crate::rat::dot(a, x) == *b,
                1 => crate::rat::dot(a, x) >= *b,
                _ => crate::rat::dot(a, x) <= *b,
            })
    }
}

/// Options for an enumeration run.
pub struct CellQuery<'a> {
    pub n: usize,
    pub table: &'a RowTable,
    /// Constraints every cell witness must satisfy (an ambient slice or cone).
    pub ambient: Vec<Constraint>,
    /// Prunes subtrees: given the partial sign prefix, return false to cut.
    pub prefix_filter: Option<&'a dyn Fn(&[i8]) -> bool>,
    pub max_cells: usize,
}

impl<'a> CellQuery<'a> {
    pub fn new(n: usize, table: &'a RowTable) -> Self {
        CellQuery {
            n,
            table,
            ambient: Vec::new(),
            prefix_filter: None,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

/// Enumerates all realizable cells (meeting the ambient constraints).
pub fn enumerate_cells(q: &CellQuery) -> Result<Vec<Cell>> {
    let rows = q.table.rows();
    let mut out: Vec<Cell> = Vec::new();
    let mut prefix: Vec<i8> = Vec::new();
    let mut cons: Vec<Constraint> = q.ambient.clone();
    let mut strict: Vec<bool> = vec![false; cons.len()];
    dfs(q, rows, &mut prefix, &mut cons, &mut strict, &mut out)?;
    Ok(out)
}

fn dfs(
    q: &CellQuery,
    rows: &[(Vector, Rat)],
    prefix: &mut Vec<i8>,
    cons: &mut Vec<Constraint>,
    strict: &mut Vec<bool>,
    out: &mut Vec<Cell>,
) -> Result<()> {
    let witness = match lp::feasible_strict(q.n, cons, strict) {
        Some(w) => w,
        None => return Ok(()),
    };
    if let Some(f) = q.prefix_filter {
        if !f(prefix) {
            return Ok(());
        }
    }
    if prefix.len() == rows.len() {
        if out.len() >= q.max_cells {
            return Err(Error::ResourceLimit(format!(
                "cell enumeration exceeded the limit of {} cells",
                q.max_cells
            )));
        }
        out.push(Cell { signs: prefix.clone(), witness });
        return Ok(());
    }
    let (a, b) = &rows[prefix.len()];
    for s in [-1i8, 0, 1] {
        prefix.push(s);
        match s {
            0 => {
                cons.push(lp::eq(a.clone(), b.clone()));
                strict.push(false);
            }
            -1 => {
                cons.push(lp::le(a.clone(), b.clone()));
                strict.push(true);
            }
            _ => {
                cons.push(lp::le(neg(a), -b.clone()));
                strict.push(true);
            }
        }
        dfs(q, rows, prefix, cons, strict, out)?;
        cons.pop();
        strict.pop();
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, vec_i64};

    #[test]
    fn two_lines_give_nine_cells() {
        let mut t = RowTable::new();
        t.insert(&vec_i64(&[1, 0]), &int(0));
        t.insert(&vec_i64(&[0, 2]), &int(0)); // scaled duplicate direction is a new plane? no: distinct normal
        assert_eq!(t.len(), 2);
        let cells = enumerate_cells(&CellQuery::new(2, &t)).unwrap();
        assert_eq!(cells.len(), 9);
    }

    #[test]
    fn parallel_rows_dedup_with_orientation() {
        let mut t = RowTable::new();
        let (i, s1) = t.insert(&vec_i64(&[-2, 0]), &int(0)).unwrap();
        let (j, s2) = t.insert(&vec_i64(&[1, 0]), &int(0)).unwrap();
        assert_eq!(i, j);
        assert_eq!(s1, -1);
        assert_eq!(s2, 1);
        assert!(t.insert(&vec_i64(&[0, 0]), &int(0)).is_none());
    }

    #[test]
    fn ambient_slice_restricts_cells() {
        let mut t = RowTable::new();
        t.insert(&vec_i64(&[1, 0]), &int(0));
        let mut q = CellQuery::new(2, &t);
        // Slice x1 = 1: only the positive side remains.
        q.ambient = vec![lp::eq(vec_i64(&[1, 0]), int(1))];
        let cells = enumerate_cells(&q).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].signs, vec![1]);
    }

    #[test]
    fn closure_membership_is_sign_relaxation() {
        let mut t = RowTable::new();
        t.insert(&vec_i64(&[1, 0]), &int(0));
        t.insert(&vec_i64(&[0, 1]), &int(0));
        let cells = enumerate_cells(&CellQuery::new(2, &t)).unwrap();
        let open_quadrant = cells.iter().find(|c| c.signs == vec![1, 1]).unwrap();
        assert!(open_quadrant.closure_contains(&t, &vec_i64(&[1, 0])));
        assert!(!open_quadrant.closure_contains(&t, &vec_i64(&[-1, 0])));
    }
}
