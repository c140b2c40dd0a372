//! Piecewise-affine functions and maps on polyhedral domains.
//!
//! A `PWAFunc` is an extended-real lsc function: finitely many affine pieces
//! on closed polyhedral domains, `+infinity` outside, with the value at a
//! point defined as the minimum over the pieces containing it. The epigraph
//! is then exactly the union of the piece epigraphs, hence closed, so lower
//! semicontinuity holds by construction. Pieces may disagree where domains
//! overlap; `PWAFunc::new` validates agreement (the continuous case) while
//! `new_lsc` admits jumps, which is the test bed for the vertical-direction
//! machinery.
//!
//! A `PWAMap` is single-valued: overlap agreement is always validated.

use std::collections::BTreeSet;

use crate::cells::{enumerate_cells, CellQuery, RowTable};
use crate::error::{Error, Result};
use crate::geometry::{affine_preimage, tangent_cone_poly, HPoly};
use crate::linalg::{sign, Mat};
use crate::lp::{self, LpOutcome};
use crate::rat::{add, concat, dot, is_zero_vec, neg, zeros, Rat, Vector};
use crate::union::UnionSet;
use num::{One, Zero};

#[derive(Debug, Clone)]
pub struct FuncPiece {
    pub domain: HPoly,
    pub a: Vector,
    pub c: Rat,
}

impl FuncPiece {
    pub fn value_at(&self, x: &[Rat]) -> Rat {
        dot(&self.a, x) + &self.c
    }
}

#[derive(Debug, Clone)]
pub struct PWAFunc {
    pub n: usize,
    pub pieces: Vec<FuncPiece>,
}

impl PWAFunc {
    /// Validated constructor: affine values must agree on every overlap.
    pub fn new(n: usize, pieces: Vec<FuncPiece>) -> Result<Self> {
        let f = PWAFunc::new_lsc(n, pieces);
        f.validate_agreement()?;
        Ok(f)
    }

    /// Min-over-containing-pieces semantics without overlap agreement.
    pub fn new_lsc(n: usize, pieces: Vec<FuncPiece>) -> Self {
        for p in &pieces {
            assert_eq!(p.domain.ambient_dim(), n);
            assert_eq!(p.a.len(), n);
        }
        PWAFunc { n, pieces }
    }

    pub fn affine(a: Vector, c: Rat) -> Self {
        let n = a.len();
        PWAFunc::new_lsc(n, vec![FuncPiece { domain: HPoly::full_space(n), a, c }])
    }

    /// `|x|` on the line.
    pub fn abs1() -> Self {
        let pos = HPoly::from_ineqs(vec![(vec![-Rat::one()], Rat::zero())], 1);
        let neg_dom = HPoly::from_ineqs(vec![(vec![Rat::one()], Rat::zero())], 1);
        PWAFunc::new_lsc(
            1,
            vec![
                FuncPiece { domain: pos, a: vec![Rat::one()], c: Rat::zero() },
                FuncPiece { domain: neg_dom, a: vec![-Rat::one()], c: Rat::zero() },
            ],
        )
    }

    /// Indicator-style: 0 on the given domain, +infinity outside.
    pub fn zero_on(domain: HPoly) -> Self {
        let n = domain.ambient_dim();
        PWAFunc::new_lsc(n, vec![FuncPiece { domain, a: zeros(n), c: Rat::zero() }])
    }

    fn validate_agreement(&self) -> Result<()> {
        for i in 0..self.pieces.len() {
            for j in (i + 1)..self.pieces.len() {
                let pi = &self.pieces[i];
                let pj = &self.pieces[j];
                let overlap = pi.domain.intersect(&pj.domain);
                let diff_a = crate::rat::sub(&pi.a, &pj.a);
                let diff_c = &pi.c - &pj.c;
                if !affine_vanishes_on(&overlap, &diff_a, &diff_c) {
                    return Err(Error::InvalidInput(format!(
                        "pieces {i} and {j} disagree on their overlap"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dom(&self) -> UnionSet {
        UnionSet::new(self.n, self.pieces.iter().map(|p| p.domain.clone()).collect())
    }

    /// `f(x)`, or `None` outside the effective domain.
    pub fn value(&self, x: &[Rat]) -> Option<Rat> {
        self.pieces
            .iter()
            .filter(|p| p.domain.contains(x))
            .map(|p| p.value_at(x))
            .min()
    }

    /// Epigraph as a union of polyhedra in `R^{n+1}`.
    pub fn epi(&self) -> UnionSet {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let mut rows = Vec::new();
            let mut b = Vector::new();
            let mut eq = BTreeSet::new();
            for i in 0..p.domain.nrows() {
                let mut row = p.domain.a.rows[i].clone();
                row.push(Rat::zero());
                if p.domain.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(p.domain.b[i].clone());
            }
            let mut bound = p.a.clone();
            bound.push(-Rat::one());
            rows.push(bound);
            b.push(-p.c.clone());
            pieces.push(HPoly::new(Mat::new(rows, self.n + 1), b, eq));
        }
        UnionSet::new(self.n + 1, pieces)
    }

    /// Refinement of the domain into closed cells on each of which one piece
    /// attains the min over containing pieces. Returns `(cell, piece index)`
    /// pairs; ties produce one entry per attaining piece. The union of these
    /// graphs over all cells, read with min semantics, is exactly `f`.
    pub fn argmin_cells(&self) -> Result<Vec<(HPoly, usize)>> {
        let mut table = RowTable::new();
        // (piece, row) -> (table idx, orient); None for zero rows.
        let mut dom_reqs: Vec<Vec<(usize, i8, bool)>> = Vec::new();
        for p in &self.pieces {
            let mut reqs = Vec::new();
            for i in 0..p.domain.nrows() {
                if let Some((idx, o)) = table.insert(&p.domain.a.rows[i], &p.domain.b[i]) {
                    reqs.push((idx, o, p.domain.eq_rows.contains(&i)));
                }
            }
            dom_reqs.push(reqs);
        }
        // Pairwise value comparisons: sign of (a_i - a_j) . x - (c_j - c_i).
        enum Cmp {
            Row(usize, i8),
            Const(i8),
        }
        let k = self.pieces.len();
        let mut cmp: Vec<Vec<Option<Cmp>>> = (0..k).map(|_| (0..k).map(|_| None).collect()).collect();
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let da = crate::rat::sub(&self.pieces[i].a, &self.pieces[j].a);
                let dc = &self.pieces[j].c - &self.pieces[i].c;
                cmp[i][j] = Some(match table.insert(&da, &dc) {
                    Some((idx, o)) => Cmp::Row(idx, o),
                    None => Cmp::Const(sign(&(&self.pieces[i].c - &self.pieces[j].c))),
                });
            }
        }
        let q = CellQuery::new(self.n, &table);
        let cells = enumerate_cells(&q)?;
        let mut out = Vec::new();
        for cell in cells {
            let containing: Vec<usize> = (0..k)
                .filter(|&i| {
                    dom_reqs[i].iter().all(|&(idx, o, is_eq)| {
                        let s = cell.signs[idx] * o;
                        if is_eq {
                            s == 0
                        } else {
                            s <= 0
                        }
                    })
                })
                .collect();
            if containing.is_empty() {
                continue;
            }
            let le = |i: usize, j: usize| -> bool {
                match cmp[i][j].as_ref().unwrap() {
                    Cmp::Const(s) => *s <= 0,
                    Cmp::Row(idx, o) => cell.signs[*idx] * o <= 0,
                }
            };
            let closure = closed_cell(&table, &cell.signs, self.n);
            for &i in &containing {
                if containing.iter().all(|&j| j == i || le(i, j)) {
                    out.push((closure.clone(), i));
                }
            }
        }
        Ok(out)
    }

    /// Graphical derivative values `Df(x)(h)`: finite set of slopes realized
    /// along admissible in-graph sequences from direction `h`.
    pub fn graph_deriv(&self, x: &[Rat], h: &[Rat]) -> Result<Vec<Rat>> {
        let fx = self.value(x).ok_or(Error::DomainError)?;
        let mut vals: Vec<Rat> = Vec::new();
        for (cell, i) in self.argmin_cells()? {
            if !cell.contains(x) {
                continue;
            }
            if self.pieces[i].value_at(x) != fx {
                continue;
            }
            let t = tangent_cone_poly(&cell, x)?;
            if t.contains(h) {
                let v = dot(&self.pieces[i].a, h);
                if !vals.contains(&v) {
                    vals.push(v);
                }
            }
        }
        vals.sort();
        Ok(vals)
    }

    /// Calmness at `x` in direction `h` (with respect to the domain), decided
    /// exactly: every argmin cell reachable from `x` along `h` must attain the
    /// value `f(x)` at `x`; a value gap forces unbounded difference quotients.
    pub fn is_calm_dir(&self, x: &[Rat], h: &[Rat]) -> Result<bool> {
        let fx = self.value(x).ok_or(Error::DomainError)?;
        for (cell, i) in self.argmin_cells()? {
            if !cell.contains(x) {
                continue;
            }
            let t = tangent_cone_poly(&cell, x)?;
            if t.contains(h) && self.pieces[i].value_at(x) != fx {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `f` is real-valued and continuous on its domain (argmin-cell
    /// values agree wherever cell closures meet).
    pub fn is_continuous(&self) -> Result<bool> {
        let cells = self.argmin_cells()?;
        for (ci, i) in &cells {
            for (cj, j) in &cells {
                let overlap = ci.intersect(cj);
                let da = crate::rat::sub(&self.pieces[*i].a, &self.pieces[*j].a);
                let dc = &self.pieces[*j].c - &self.pieces[*i].c;
                if !affine_vanishes_on(&overlap, &da, &dc) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Exact level set `{x : f(x) = value}` for continuous `f`.
    pub fn level_set(&self, value: &Rat) -> Result<UnionSet> {
        if !self.is_continuous()? {
            return Err(Error::InvalidInput(
                "level_set is exact only for continuous functions".into(),
            ));
        }
        let mut pieces = Vec::new();
        for (cell, i) in self.argmin_cells()? {
            let p = &self.pieces[i];
            let mut piece = cell;
            let m = piece.nrows();
            let mut rows = piece.a.rows.clone();
            rows.push(p.a.clone());
            let mut b = piece.b.clone();
            b.push(value - &p.c);
            let mut eq = piece.eq_rows.clone();
            eq.insert(m);
            piece = HPoly::new(Mat::new(rows, self.n), b, eq);
            pieces.push(piece);
        }
        Ok(UnionSet::new(self.n, pieces).canonicalize())
    }

    /// Pointwise minimum: pieces pool (min semantics absorbs the rest).
    pub fn pointwise_min(fs: &[PWAFunc]) -> PWAFunc {
        let n = fs[0].n;
        let mut pieces = Vec::new();
        for f in fs {
            assert_eq!(f.n, n);
            pieces.extend(f.pieces.clone());
        }
        PWAFunc::new_lsc(n, pieces)
    }

    /// Pointwise sum: domain-combination pieces.
    pub fn pointwise_sum(fs: &[PWAFunc]) -> PWAFunc {
        let n = fs[0].n;
        let mut acc = fs[0].clone();
        for f in &fs[1..] {
            assert_eq!(f.n, n);
            let mut pieces = Vec::new();
            for p in &acc.pieces {
                for q in &f.pieces {
                    pieces.push(FuncPiece {
                        domain: p.domain.intersect(&q.domain),
                        a: add(&p.a, &q.a),
                        c: &p.c + &q.c,
                    });
                }
            }
            acc = PWAFunc::new_lsc(n, pieces);
        }
        acc
    }

    /// Pointwise maximum via epigraph intersection and lower-bound splitting.
    pub fn pointwise_max(fs: &[PWAFunc]) -> Result<PWAFunc> {
        let n = fs[0].n;
        let mut epi = fs[0].epi();
        for f in &fs[1..] {
            assert_eq!(f.n, n);
            epi = epi.intersect(&f.epi());
        }
        func_from_epi_union(n, &epi)
    }

    /// Separable sum on the product space.
    pub fn separable(fs: &[PWAFunc]) -> PWAFunc {
        let total: usize = fs.iter().map(|f| f.n).sum();
        let mut acc: Vec<FuncPiece> = vec![FuncPiece {
            domain: HPoly::full_space(0),
            a: Vector::new(),
            c: Rat::zero(),
        }];
        let mut offset = 0usize;
        for f in fs {
            let mut next = Vec::new();
            for base in &acc {
                for p in &f.pieces {
                    // Extend the accumulated domain with p's domain on the next block.
                    let mut rows = Vec::new();
                    let mut b = Vector::new();
                    let mut eq = BTreeSet::new();
                    let bd = &base.domain;
                    for i in 0..bd.nrows() {
                        let mut row = bd.a.rows[i].clone();
                        row.extend(zeros(f.n));
                        if bd.eq_rows.contains(&i) {
                            eq.insert(rows.len());
                        }
                        rows.push(row);
                        b.push(bd.b[i].clone());
                    }
                    for i in 0..p.domain.nrows() {
                        let mut row = zeros(offset);
                        row.extend(p.domain.a.rows[i].clone());
                        if p.domain.eq_rows.contains(&i) {
                            eq.insert(rows.len());
                        }
                        rows.push(row);
                        b.push(p.domain.b[i].clone());
                    }
                    next.push(FuncPiece {
                        domain: HPoly::new(Mat::new(rows, offset + f.n), b, eq),
                        a: concat(&base.a, &p.a),
                        c: &base.c + &p.c,
                    });
                }
            }
            offset += f.n;
            acc = next;
        }
        debug_assert_eq!(offset, total);
        PWAFunc::new_lsc(total, acc)
    }

    /// Restriction `x -> f(x, y0)` fixing the trailing coordinates.
    pub fn restrict_tail(&self, y0: &[Rat]) -> PWAFunc {
        let keep = self.n - y0.len();
        let fixed: Vec<(usize, Rat)> = (0..y0.len()).map(|i| (keep + i, y0[i].clone())).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| FuncPiece {
                domain: crate::geometry::substitute(&p.domain, &fixed),
                a: p.a[..keep].to_vec(),
                c: &p.c + dot(&p.a[keep..], y0),
            })
            .collect();
        PWAFunc::new_lsc(keep, pieces)
    }
}

fn affine_vanishes_on(region: &HPoly, a: &[Rat], c: &Rat) -> bool {
    if is_zero_vec(a) {
        return c.is_zero() || region.is_empty();
    }
    let cons = region.constraints();
    let n = region.ambient_dim();
    let hi = match lp::maximize(n, &cons, &a.to_vec()) {
        LpOutcome::Infeasible => return true,
        LpOutcome::Unbounded => return false,
        LpOutcome::Optimal { value, .. } => value,
    };
    if &hi + c > Rat::zero() {
        return false;
    }
    let lo = match lp::maximize(n, &cons, &neg(a)) {
        LpOutcome::Infeasible => return true,
        LpOutcome::Unbounded => return false,
        LpOutcome::Optimal { value, .. } => -value,
    };
    &lo + c == Rat::zero() && &hi + c == Rat::zero()
}

/// Closed cell from relaxed sign constraints.
fn closed_cell(table: &RowTable, signs: &[i8], n: usize) -> HPoly {
    let mut rows = Vec::new();
    let mut b = Vector::new();
    let mut eq = BTreeSet::new();
    for (&s, (a, off)) in signs.iter().zip(table.rows()) {
        match s {
            0 => {
                eq.insert(rows.len());
                rows.push(a.clone());
                b.push(off.clone());
            }
            -1 => {
                rows.push(a.clone());
                b.push(off.clone());
            }
            _ => {
                rows.push(neg(a));
                b.push(-off.clone());
            }
        }
    }
    HPoly::new(Mat::new(rows, n), b, eq)
}

/// Reads a piecewise-affine function off an epigraph-shaped union: each piece
/// must be upward closed in the last coordinate; multiple affine lower bounds
/// are split along their argmax regions. Errors with `UnboundedBelow` when a
/// nonempty piece has no lower bound.
pub fn func_from_epi_union(n: usize, epi: &UnionSet) -> Result<PWAFunc> {
    assert_eq!(epi.dim, n + 1);
    let mut pieces = Vec::new();
    for p in &epi.pieces {
        if p.is_empty() {
            continue;
        }
        let mut dom_rows: Vec<(Vector, Rat, bool)> = Vec::new();
        let mut lower: Vec<(Vector, Rat)> = Vec::new(); // alpha >= a . x + c
        for i in 0..p.nrows() {
            let row = &p.a.rows[i];
            let beta = &row[n];
            let head = row[..n].to_vec();
            let is_eq = p.eq_rows.contains(&i);
            match sign(beta) {
                0 => dom_rows.push((head, p.b[i].clone(), is_eq)),
                -1 => {
                    // head . x + beta alpha <= b  =>  alpha >= (head . x - b)/(-beta)
                    let scale = -beta.clone();
                    let a: Vector = head.iter().map(|v| v / &scale).collect();
                    let c = -&p.b[i] / &scale;
                    lower.push((a, c));
                    if is_eq {
                        // An equality pins alpha to the bound; the upward
                        // closure of a genuine epigraph never carries one.
                        return Err(Error::InvalidInput(
                            "epigraph piece with an equality involving the value coordinate"
                                .into(),
                        ));
                    }
                }
                _ => {
                    return Err(Error::UnboundedBelow);
                }
            }
        }
        if lower.is_empty() {
            return Err(Error::UnboundedBelow);
        }
        let mk_dom = |extra: Vec<(Vector, Rat)>| -> HPoly {
            let mut rows = Vec::new();
            let mut b = Vector::new();
            let mut eq = BTreeSet::new();
            for (a, bi, is_eq) in &dom_rows {
                if *is_eq {
                    eq.insert(rows.len());
                }
                rows.push(a.clone());
                b.push(bi.clone());
            }
            for (a, bi) in extra {
                rows.push(a);
                b.push(bi);
            }
            HPoly::new(Mat::new(rows, n), b, eq)
        };
        for r in 0..lower.len() {
            // Region where bound r dominates: a_r x + c_r >= a_s x + c_s.
            let mut extra = Vec::new();
            for s in 0..lower.len() {
                if s != r {
                    let a = crate::rat::sub(&lower[s].0, &lower[r].0);
                    let bi = &lower[r].1 - &lower[s].1;
                    extra.push((a, bi));
                }
            }
            let domain = mk_dom(extra);
            if domain.is_empty() {
                continue;
            }
            pieces.push(FuncPiece { domain, a: lower[r].0.clone(), c: lower[r].1.clone() });
        }
    }
    Ok(PWAFunc::new_lsc(n, pieces))
}

#[derive(Debug, Clone)]
pub struct MapPiece {
    pub domain: HPoly,
    pub a: Mat,
    pub c: Vector,
}

/// Single-valued piecewise affine map; overlapping pieces must agree.
#[derive(Debug, Clone)]
pub struct PWAMap {
    pub n: usize,
    pub m: usize,
    pub pieces: Vec<MapPiece>,
}

impl PWAMap {
    pub fn new(n: usize, m: usize, pieces: Vec<MapPiece>) -> Result<Self> {
        for p in &pieces {
            assert_eq!(p.domain.ambient_dim(), n);
            assert_eq!(p.a.nrows(), m);
            assert_eq!(p.a.cols, n);
            assert_eq!(p.c.len(), m);
        }
        let map = PWAMap { n, m, pieces };
        map.validate_agreement()?;
        Ok(map)
    }

    pub fn affine(a: Mat, c: Vector) -> Self {
        let n = a.cols;
        let m = a.nrows();
        PWAMap {
            n,
            m,
            pieces: vec![MapPiece { domain: HPoly::full_space(n), a, c }],
        }
    }

    pub fn identity(n: usize) -> Self {
        PWAMap::affine(Mat::identity(n), zeros(n))
    }

    /// `x -> |x|` on the line.
    pub fn abs1() -> Self {
        let pos = HPoly::from_ineqs(vec![(vec![-Rat::one()], Rat::zero())], 1);
        let negd = HPoly::from_ineqs(vec![(vec![Rat::one()], Rat::zero())], 1);
        PWAMap {
            n: 1,
            m: 1,
            pieces: vec![
                MapPiece { domain: pos, a: Mat::identity(1), c: zeros(1) },
                MapPiece { domain: negd, a: Mat::from_i64(&[&[-1]]), c: zeros(1) },
            ],
        }
    }

    fn validate_agreement(&self) -> Result<()> {
        for i in 0..self.pieces.len() {
            for j in (i + 1)..self.pieces.len() {
                let pi = &self.pieces[i];
                let pj = &self.pieces[j];
                let overlap = pi.domain.intersect(&pj.domain);
                for r in 0..self.m {
                    let da = crate::rat::sub(&pi.a.rows[r], &pj.a.rows[r]);
                    let dc = &pi.c[r] - &pj.c[r];
                    if !affine_vanishes_on(&overlap, &da, &dc) {
                        return Err(Error::InvalidInput(format!(
                            "map pieces {i} and {j} disagree on their overlap"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Vector> {
        for p in &self.pieces {
            if p.domain.contains(x) {
                return Ok(add(&p.a.mul_vec(x), &p.c));
            }
        }
        Err(Error::DomainError)
    }

    pub fn in_domain(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|p| p.domain.contains(x))
    }

    pub fn dom(&self) -> UnionSet {
        UnionSet::new(self.n, self.pieces.iter().map(|p| p.domain.clone()).collect())
    }

    /// Graph as a union of polyhedra in `R^{n+m}`.
    pub fn graph(&self) -> UnionSet {
        let mut out = Vec::new();
        for p in &self.pieces {
            let mut rows = Vec::new();
            let mut b = Vector::new();
            let mut eq = BTreeSet::new();
            for i in 0..p.domain.nrows() {
                let mut row = p.domain.a.rows[i].clone();
                row.extend(zeros(self.m));
                if p.domain.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(p.domain.b[i].clone());
            }
            for r in 0..self.m {
                let mut row = p.a.rows[r].clone();
                let mut unit = zeros(self.m);
                unit[r] = -Rat::one();
                row.extend(unit);
                eq.insert(rows.len());
                rows.push(row);
                b.push(-p.c[r].clone());
            }
            out.push(HPoly::new(Mat::new(rows, self.n + self.m), b, eq));
        }
        UnionSet::new(self.n + self.m, out)
    }

    /// Directional derivative `Dphi(x)(h)`: single-valued on tangent
    /// directions of the domain, `None` otherwise.
    pub fn dir_deriv(&self, x: &[Rat], h: &[Rat]) -> Result<Option<Vector>> {
        if !self.in_domain(x) {
            return Err(Error::DomainError);
        }
        for p in &self.pieces {
            if !p.domain.contains(x) {
                continue;
            }
            let t = tangent_cone_poly(&p.domain, x)?;
            if t.contains(h) {
                return Ok(Some(p.a.mul_vec(h)));
            }
        }
        Ok(None)
    }

    /// The scalarization `x -> <ystar, phi(x)>`.
    pub fn scalarize(&self, ystar: &[Rat]) -> PWAFunc {
        assert_eq!(ystar.len(), self.m);
        let pieces = self
            .pieces
            .iter()
            .map(|p| FuncPiece {
                domain: p.domain.clone(),
                a: p.a.t_mul_vec(ystar),
                c: dot(&p.c, ystar),
            })
            .collect();
        PWAFunc::new_lsc(self.n, pieces)
    }

    /// Composition `g(phi(x))` of a scalar function after this map.
    pub fn compose_into(&self, g: &PWAFunc) -> PWAFunc {
        assert_eq!(g.n, self.m);
        let mut pieces = Vec::new();
        for mp in &self.pieces {
            for gp in &g.pieces {
                let pullback = affine_preimage(&gp.domain, &mp.a, &mp.c);
                pieces.push(FuncPiece {
                    domain: mp.domain.intersect(&pullback),
                    a: mp.a.t_mul_vec(&gp.a),
                    c: dot(&gp.a, &mp.c) + &gp.c,
                });
            }
        }
        PWAFunc::new_lsc(self.n, pieces)
    }

    /// Preimage `phi^{-1}(q)` of a union, intersected with the domain.
    pub fn preimage_union(&self, q: &UnionSet) -> UnionSet {
        assert_eq!(q.dim, self.m);
        let mut pieces = Vec::new();
        for mp in &self.pieces {
            for qp in &q.pieces {
                let pull = affine_preimage(qp, &mp.a, &mp.c);
                pieces.push(mp.domain.intersect(&pull));
            }
        }
        UnionSet::new(self.n, pieces).canonicalize()
    }

    /// Forward image `phi(c)` of a union (restricted to the domain).
    pub fn image_union(&self, c: &UnionSet) -> UnionSet {
        assert_eq!(c.dim, self.n);
        let mut pieces = Vec::new();
        for mp in &self.pieces {
            for cp in &c.pieces {
                let dom = mp.domain.intersect(cp);
                pieces.push(crate::geometry::affine_image(&dom, &mp.a, &mp.c));
            }
        }
        UnionSet::new(self.m, pieces).canonicalize()
    }
}

/// A continuous scalar `PWAFunc` as a single-valued map into the line.
pub fn map_from_scalar_func(f: &PWAFunc) -> Result<PWAMap> {
    let cells = f.argmin_cells()?;
    let pieces = cells
        .into_iter()
        .map(|(cell, i)| MapPiece {
            domain: cell,
            a: Mat::new(vec![f.pieces[i].a.clone()], f.n),
            c: vec![f.pieces[i].c.clone()],
        })
        .collect();
    PWAMap::new(f.n, 1, pieces)
}

/// Stacks scalar maps into a vector-valued map on the common domain refinement.
pub fn stack_maps(components: &[PWAMap]) -> Result<PWAMap> {
    let n = components[0].n;
    let mut acc: Vec<(HPoly, Vec<Vector>, Vector)> =
        vec![(HPoly::full_space(n), Vec::new(), Vector::new())];
    for comp in components {
        assert_eq!(comp.n, n);
        let mut next = Vec::new();
        for (dom, rows, c) in &acc {
            for p in &comp.pieces {
                let d = dom.intersect(&p.domain);
                if d.is_empty() {
                    continue;
                }
                let mut rows2 = rows.clone();
                rows2.extend(p.a.rows.clone());
                let mut c2 = c.clone();
                c2.extend(p.c.clone());
                next.push((d, rows2, c2));
            }
        }
        acc = next;
    }
    let m: usize = components.iter().map(|c| c.m).sum();
    let pieces = acc
        .into_iter()
        .map(|(domain, rows, c)| MapPiece { domain, a: Mat::new(rows, n), c })
        .collect();
    PWAMap::new(n, m, pieces)
}
