//! Exact rational linear programming.
//!
//! Dense two-phase simplex with Bland's rule over `Rat`. Instances here are
//! desk-scale (tens of rows, a dozen variables), so a tableau with exact
//! pivots is both simple and fast enough. Strict inequalities are handled by
//! maximizing an auxiliary slack.

use crate::rat::{int, zeros, Rat, Vector};
use num::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vector,
    pub rel: Rel,
    pub rhs: Rat,
}

pub fn le(coeffs: Vector, rhs: Rat) -> Constraint {
    Constraint { coeffs, rel: Rel::Le, rhs }
}

pub fn eq(coeffs: Vector, rhs: Rat) -> Constraint {
    Constraint { coeffs, rel: Rel::Eq, rhs }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vector, value: Rat },
}

struct Tableau {
    rows: Vec<Vector>, // m x (ncols + 1), last column is the rhs
    basis: Vec<usize>,
    ncols: usize,
    obj: Vector, // reduced-cost row, length ncols + 1 (last entry = objective value)
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].clone();
        debug_assert!(!inv.is_zero());
        for x in self.rows[r].iter_mut() {
            *x = &*x / &inv;
        }
        let pivot_row = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i != r && !self.rows[i][c].is_zero() {
                let f = self.rows[i][c].clone();
                for (x, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * p;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * p;
            }
        }
        self.basis[r] = c;
    }

    /// Re-derives the reduced-cost row for cost vector `cost` (maximize).
    fn canonicalize_obj(&mut self, cost: &[Rat]) {
        self.obj = cost.to_vec();
        self.obj.push(Rat::zero());
        for i in 0..self.rows.len() {
            let cb = self.obj[self.basis[i]].clone();
            if !cb.is_zero() {
                let row = self.rows[i].clone();
                for (x, p) in self.obj.iter_mut().zip(&row) {
                    *x = &*x - &cb * p;
                }
            }
        }
    }

    /// Simplex iterations with Bland's rule; `allowed` masks enterable columns.
    /// Returns false when the objective is unbounded above.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let Some(enter) = (0..self.ncols)
                .find(|&j| allowed(j) && self.obj[j].is_positive())
            else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Maximizes `objective . x` subject to the constraints; variables are free.
pub fn maximize(n: usize, cons: &[Constraint], objective: &[Rat]) -> LpOutcome {
    debug_assert_eq!(objective.len(), n);
    for c in cons {
        debug_assert_eq!(c.coeffs.len(), n);
    }
    // x = u - w with u, w >= 0; columns: 2n structural, then slacks, then artificials.
    let m = cons.len();
    let nslack = cons.iter().filter(|c| c.rel == Rel::Le).count();
    let ncols_noart = 2 * n + nslack;

    let mut rows: Vec<Vector> = Vec::with_capacity(m);
    let mut slack_col = ncols_noart - nslack;
    let mut needs_artificial: Vec<bool> = Vec::with_capacity(m);
    for c in cons {
        let negate_row = c.rhs.is_negative();
        let mut row = zeros(ncols_noart);
        for (j, a) in c.coeffs.iter().enumerate() {
            let v = if negate_row { -a } else { a.clone() };
            row[j] = v.clone();
            row[n + j] = -v;
        }
        let mut art = true;
        if c.rel == Rel::Le {
            row[slack_col] = if negate_row { -Rat::one() } else { Rat::one() };
            art = negate_row;
            slack_col += 1;
        }
        let rhs = if negate_row { -&c.rhs } else { c.rhs.clone() };
        row.push(rhs);
        rows.push(row);
        needs_artificial.push(art);
    }
    let nart = needs_artificial.iter().filter(|&&b| b).count();
    let ncols = ncols_noart + nart;
    let mut basis = Vec::with_capacity(m);
    let mut art_col = ncols_noart;
    for (i, row) in rows.iter_mut().enumerate() {
        let rhs = row.pop().unwrap();
        row.resize(ncols, Rat::zero());
        if needs_artificial[i] {
            row[art_col] = Rat::one();
            basis.push(art_col);
            art_col += 1;
        } else {
            // Slack column of this row is the basic variable.
            let sc = (2 * n..ncols_noart)
                .find(|&j| row[j].is_one())
                .expect("slack basic column");
            basis.push(sc);
        }
        row.push(rhs);
    }

    let mut tab = Tableau { rows, basis, ncols, obj: Vec::new() };

    // Phase I: maximize minus the sum of artificials.
    if nart > 0 {
        let mut cost = zeros(ncols);
        for j in ncols_noart..ncols {
            cost[j] = -Rat::one();
        }
        tab.canonicalize_obj(&cost);
        let fine = tab.run(&|_| true);
        debug_assert!(fine, "phase one is bounded by construction");
        // obj[ncols] carries the negated objective value.
        if tab.obj[ncols].is_positive() {
            return LpOutcome::Infeasible;
        }
        // Pivot artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= ncols_noart {
                match (0..ncols_noart).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase II on structural + slack columns only.
    let mut cost = zeros(ncols);
    for j in 0..n {
        cost[j] = objective[j].clone();
        cost[n + j] = -objective[j].clone();
    }
    tab.canonicalize_obj(&cost);
    if !tab.run(&|j| j < ncols_noart) {
        return LpOutcome::Unbounded;
    }

    let mut x = zeros(n);
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] += tab.rhs(i).clone();
        } else if b < 2 * n {
            x[b - n] -= tab.rhs(i).clone();
        }
    }
    let value = tab.obj[ncols].clone();
    LpOutcome::Optimal { x, value: -value }
}

/// A feasible point of the system, if any.
pub fn feasible_point(n: usize, cons: &[Constraint]) -> Option<Vector> {
    match maximize(n, cons, &zeros(n)) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// A point satisfying every constraint, with the flagged `Le` rows strictly.
/// Maximizes an auxiliary gap variable capped at 1; strict feasibility is a
/// strictly positive optimum.
pub fn feasible_strict(n: usize, cons: &[Constraint], strict: &[bool]) -> Option<Vector> {
    debug_assert_eq!(cons.len(), strict.len());
    if strict.iter().all(|s| !s) {
        return feasible_point(n, cons);
    }
    let mut aug: Vec<Constraint> = Vec::with_capacity(cons.len() + 1);
    for (c, &s) in cons.iter().zip(strict) {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(if s {
            debug_assert_eq!(c.rel, Rel::Le, "strict rows must be inequalities");
            Rat::one()
        } else {
            Rat::zero()
        });
        aug.push(Constraint { coeffs, rel: c.rel, rhs: c.rhs.clone() });
    }
    let mut cap = zeros(n + 1);
    cap[n] = Rat::one();
    aug.push(le(cap.clone(), int(1)));
    match maximize(n + 1, &aug, &cap) {
        LpOutcome::Optimal { x, value } if value.is_positive() => Some(x[..n].to_vec()),
        _ => None,
    }
}
