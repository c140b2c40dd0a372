//! Convex polyhedral primitives over exact rationals: inequality-form
//! polyhedra, generator-form cones, representation conversion, polarity,
//! membership, projection and feasibility.
//!
//! Representation conversion works by face enumeration: a generator of a cone
//! spans the one-dimensional quotient of some active-set nullspace. That is
//! quadratic-exponential in the row count and entirely adequate at desk scale;
//! inputs beyond the soft limits are rejected with `ResourceLimit`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{affine_projection, in_span, nullspace, sign, Mat};
use crate::lp::{self, Constraint, LpOutcome};
use crate::rat::{
    add, dot, is_zero_vec, lex_cmp, neg, primitive, primitive_signed, scale, sub, zeros, Rat,
    Vector,
};
use num::{One, Signed, Zero};

/// Soft limit on inequality rows in a double-description conversion.
pub const MAX_DD_ROWS: usize = 26;
/// Soft limit on enumerated active-set subsets per conversion.
pub const MAX_DD_SUBSETS: usize = 4_000_000;

/// Convex polyhedron `{x : A_i x <= b_i (i not in eq_rows), A_i x = b_i (i in eq_rows)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPoly {
    pub a: Mat,
    pub b: Vector,
    pub eq_rows: BTreeSet<usize>,
}

impl HPoly {
    pub fn new(a: Mat, b: Vector, eq_rows: BTreeSet<usize>) -> Self {
        assert_eq!(a.nrows(), b.len(), "row count mismatch");
        HPoly { a, b, eq_rows }
    }

    pub fn full_space(n: usize) -> Self {
        HPoly::new(Mat::new(Vec::new(), n), Vec::new(), BTreeSet::new())
    }

    /// The canonical empty polyhedron `0 . x <= -1`.
    pub fn empty(n: usize) -> Self {
        HPoly::new(
            Mat::new(vec![zeros(n)], n),
            vec![-Rat::one()],
            BTreeSet::new(),
        )
    }

    pub fn from_ineqs(rows: Vec<(Vector, Rat)>, n: usize) -> Self {
        let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        HPoly::new(Mat::new(a, n), b, BTreeSet::new())
    }

    /// Cone from inequality rows `a . x <= 0` and equality rows `e . x = 0`.
    pub fn cone_from_rows(ineq: Vec<Vector>, eq: Vec<Vector>, n: usize) -> Self {
        let mut rows = ineq;
        let k = rows.len();
        rows.extend(eq);
        let m = rows.len();
        HPoly::new(Mat::new(rows, n), zeros(m), (k..m).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.cols
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_cone(&self) -> bool {
        self.b.iter().all(|x| x.is_zero())
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        if x.len() != self.ambient_dim() {
            return false;
        }
        self.a.rows.iter().zip(&self.b).enumerate().all(|(i, (r, bi))| {
            let v = dot(r, x);
            if self.eq_rows.contains(&i) {
                v == *bi
            } else {
                v <= *bi
            }
        })
    }

    /// Indices of rows satisfied with equality at `x`.
    pub fn active_rows(&self, x: &[Rat]) -> Vec<usize> {
        (0..self.nrows())
            .filter(|&i| dot(&self.a.rows[i], x) == self.b[i])
            .collect()
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        (0..self.nrows())
            .map(|i| Constraint {
                coeffs: self.a.rows[i].clone(),
                rel: if self.eq_rows.contains(&i) {
                    lp::Rel::Eq
                } else {
                    lp::Rel::Le
                },
                rhs: self.b[i].clone(),
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        lp::feasible_point(self.ambient_dim(), &self.constraints()).is_none()
    }

    pub fn witness(&self) -> Option<Vector> {
        lp::feasible_point(self.ambient_dim(), &self.constraints())
    }

    /// Intersection by row concatenation.
    pub fn intersect(&self, other: &HPoly) -> HPoly {
        assert_eq!(self.ambient_dim(), other.ambient_dim());
        let mut rows = self.a.rows.clone();
        let mut b = self.b.clone();
        let mut eq = self.eq_rows.clone();
        let off = rows.len();
        rows.extend(other.a.rows.clone());
        b.extend(other.b.clone());
        eq.extend(other.eq_rows.iter().map(|i| i + off));
        HPoly::new(Mat::new(rows, self.ambient_dim()), b, eq)
    }

    /// `{x : x - p in self}`.
    pub fn translate(&self, p: &[Rat]) -> HPoly {
        let b = self
            .a
            .rows
            .iter()
            .zip(&self.b)
            .map(|(r, bi)| bi + dot(r, p))
            .collect();
        HPoly::new(self.a.clone(), b, self.eq_rows.clone())
    }

    /// Recession cone `{d : A d <= 0, eq rows = 0}`.
    pub fn recession_cone(&self) -> HPoly {
        HPoly::new(self.a.clone(), zeros(self.nrows()), self.eq_rows.clone())
    }

    /// Canonical row form: jointly primitive `(a, b)` rows, equality rows with
    /// canonical orientation, duplicates and trivial rows removed, rows sorted.
    /// Infeasible-by-trivial-row inputs collapse to the canonical empty form.
    pub fn canonicalize(&self) -> HPoly {
        let n = self.ambient_dim();
        let mut ineq: BTreeSet<Vector> = BTreeSet::new();
        let mut eq: BTreeSet<Vector> = BTreeSet::new();
        for i in 0..self.nrows() {
            let mut row = self.a.rows[i].clone();
            row.push(-self.b[i].clone());
            let is_eq = self.eq_rows.contains(&i);
            if is_zero_vec(&self.a.rows[i]) {
                let fail = if is_eq {
                    !self.b[i].is_zero()
                } else {
                    self.b[i].is_negative()
                };
                if fail {
                    return HPoly::empty(n);
                }
                continue;
            }
            if is_eq {
                let (p, _) = primitive_signed(&row).unwrap();
                eq.insert(p);
            } else {
                ineq.insert(primitive(&row).unwrap());
            }
        }
        // An inequality whose orientation-normalized form matches an equality
        // row is implied by it.
        ineq.retain(|r| {
            let (p, _) = primitive_signed(r).unwrap();
            !eq.contains(&p)
        });
        let mut rows: Vec<Vector> = Vec::new();
        let mut b = Vec::new();
        let mut eqset = BTreeSet::new();
        for r in ineq {
            let (head, tail) = r.split_at(n);
            rows.push(head.to_vec());
            b.push(-tail[0].clone());
        }
        for r in eq {
            eqset.insert(rows.len());
            let (head, tail) = r.split_at(n);
            rows.push(head.to_vec());
            b.push(-tail[0].clone());
        }
        HPoly::new(Mat::new(rows, n), b, eqset)
    }

    /// Whether `self` is a subset of `other` (both convex). Decided by one LP
    /// per row of `other`.
    pub fn subset_of(&self, other: &HPoly) -> bool {
        if self.is_empty() {
            return true;
        }
        let cons = self.constraints();
        let n = self.ambient_dim();
        for i in 0..other.nrows() {
            let row = &other.a.rows[i];
            let bi = &other.b[i];
            match lp::maximize(n, &cons, row) {
                LpOutcome::Infeasible => return true,
                LpOutcome::Unbounded => return false,
                LpOutcome::Optimal { value, .. } => {
                    if value > *bi {
                        return false;
                    }
                }
            }
            if other.eq_rows.contains(&i) {
                match lp::maximize(n, &cons, &neg(row)) {
                    LpOutcome::Infeasible => return true,
                    LpOutcome::Unbounded => return false,
                    LpOutcome::Optimal { value, .. } => {
                        if -value < *bi {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Bounded iff every coordinate has finite range (empty counts as bounded).
    pub fn is_bounded(&self) -> bool {
        let n = self.ambient_dim();
        let cons = self.constraints();
        for i in 0..n {
            for dir in [Rat::one(), -Rat::one()] {
                let mut c = zeros(n);
                c[i] = dir;
                match lp::maximize(n, &cons, &c) {
                    LpOutcome::Unbounded => return false,
                    LpOutcome::Infeasible => return true,
                    LpOutcome::Optimal { .. } => {}
                }
            }
        }
        true
    }
}

/// Polyhedral cone in generator form: `cone(rays) + span(lineality)`.
///
/// Canonical invariants: generators are primitive integer vectors, no ray lies
/// in the lineality span, the lineality basis is the reduced echelon basis of
/// its span, rays are sorted lexicographically. Canonicalized values of equal
/// cones are structurally equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VCone {
    pub dim: usize,
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

impl VCone {
    pub fn trivial(n: usize) -> VCone {
        VCone { dim: n, rays: Vec::new(), lineality: Vec::new() }
    }

    pub fn full_space(n: usize) -> VCone {
        VCone {
            dim: n,
            rays: Vec::new(),
            lineality: (0..n).map(|i| crate::rat::unit(n, i)).collect(),
        }
    }

    /// From raw generators; reduces to canonical form via the H-form round trip.
    pub fn from_generators(rays: Vec<Vector>, lineality: Vec<Vector>, n: usize) -> Result<VCone> {
        let raw = VCone { dim: n, rays, lineality };
        let h = dd_h_from_v(&raw)?;
        dd_v_from_h(&h)
    }

    pub fn is_trivial(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    /// Exact membership: `x = R lambda + L mu` with `lambda >= 0` solvable.
    pub fn contains(&self, x: &[Rat]) -> bool {
        assert_eq!(x.len(), self.dim);
        if is_zero_vec(x) {
            return true;
        }
        let k = self.rays.len();
        let l = self.lineality.len();
        if k + l == 0 {
            return false;
        }
        let mut cons = Vec::new();
        for i in 0..self.dim {
            let mut coeffs = zeros(k + l);
            for (j, r) in self.rays.iter().enumerate() {
                coeffs[j] = r[i].clone();
            }
            for (j, g) in self.lineality.iter().enumerate() {
                coeffs[k + j] = g[i].clone();
            }
            cons.push(lp::eq(coeffs, x[i].clone()));
        }
        for j in 0..k {
            let mut coeffs = zeros(k + l);
            coeffs[j] = -Rat::one();
            cons.push(lp::le(coeffs, Rat::zero()));
        }
        lp::feasible_point(k + l, &cons).is_some()
    }

    /// Some nonzero element, if the cone is not `{0}`.
    pub fn nonzero_element(&self) -> Option<Vector> {
        self.lineality
            .first()
            .or_else(|| self.rays.first())
            .cloned()
    }

    /// `cone(A rays) + span(A lineality)`.
    pub fn linear_image(&self, map: &Mat) -> Result<VCone> {
        VCone::from_generators(
            self.rays.iter().map(|r| map.mul_vec(r)).collect(),
            self.lineality.iter().map(|g| map.mul_vec(g)).collect(),
            map.nrows(),
        )
    }

    /// All generators (rays plus both lineality orientations).
    pub fn generators_closed(&self) -> Vec<Vector> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(neg(l));
        }
        g
    }

    /// Subset test against another convex cone: generator membership suffices.
    pub fn subset_of(&self, other: &VCone) -> bool {
        self.generators_closed().iter().all(|g| other.contains(g))
    }
}

/// Double description, H to V: exact extreme rays and lineality basis of
/// `{x : A x <= 0, E x = 0}` by active-set enumeration.
pub fn dd_v_from_h(c: &HPoly) -> Result<VCone> {
    if !c.is_cone() {
        return Err(Error::InvalidInput("dd conversion needs a cone (b = 0)".into()));
    }
    let n = c.ambient_dim();
    let mut eq: Vec<Vector> = Vec::new();
    let mut ineq: Vec<Vector> = Vec::new();
    for i in 0..c.nrows() {
        if is_zero_vec(&c.a.rows[i]) {
            continue;
        }
        if c.eq_rows.contains(&i) {
            eq.push(c.a.rows[i].clone());
        } else {
            ineq.push(c.a.rows[i].clone());
        }
    }
    if ineq.len() > MAX_DD_ROWS {
        return Err(Error::ResourceLimit(format!(
            "dd conversion with {} inequality rows exceeds the soft limit {}",
            ineq.len(),
            MAX_DD_ROWS
        )));
    }
    let mut all_rows = eq.clone();
    all_rows.extend(ineq.iter().cloned());
    let lineality = nullspace(&all_rows, n);
    let ldim = lineality.len();
    if ldim == n {
        return Ok(VCone::full_space(n));
    }

    let m = ineq.len();
    let max_size = n.min(m);
    let mut rays: BTreeSet<Vector> = BTreeSet::new();
    let mut budget = MAX_DD_SUBSETS;
    // Iterate subsets of inequality rows as candidate active sets.
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, subset)) = stack.pop() {
        budget = budget.checked_sub(1).ok_or_else(|| {
            Error::ResourceLimit("dd subset enumeration budget exhausted".into())
        })?;
        let mut rows = eq.clone();
        rows.extend(subset.iter().map(|&i| ineq[i].clone()));
        let ns = nullspace(&rows, n);
        if ns.len() == ldim + 1 {
            if let Some(w) = ns.iter().find(|g| !in_span(g, &lineality)) {
                for cand in [w.clone(), neg(w)] {
                    if ineq.iter().all(|r| !dot(r, &cand).is_positive())
                        && !in_span(&cand, &lineality)
                    {
                        rays.insert(primitive(&cand).unwrap());
                    }
                }
            }
        }
        if ns.len() > ldim + 1 && subset.len() < max_size {
            for i in start..m {
                let mut s = subset.clone();
                s.push(i);
                stack.push((i + 1, s));
            }
        }
    }
    let mut rays: Vec<Vector> = rays.into_iter().collect();
    rays.sort_by(|a, b| lex_cmp(a, b));
    Ok(VCone { dim: n, rays, lineality })
}

/// H-form of the polar cone of a V-form cone: rays become inequality rows and
/// lineality generators become equality rows.
pub fn polar_hform(c: &VCone) -> HPoly {
    HPoly::cone_from_rows(c.rays.clone(), c.lineality.clone(), c.dim)
}

/// Polar of a V-form cone, again in V-form.
pub fn polar(c: &VCone) -> Result<VCone> {
    dd_v_from_h(&polar_hform(c))
}

/// Polar of an H-form cone, directly in V-form: outward row normals generate it.
pub fn polar_of_hcone(c: &HPoly) -> Result<VCone> {
    if !c.is_cone() {
        return Err(Error::InvalidInput("polar_of_hcone needs a cone".into()));
    }
    let mut rays = Vec::new();
    let mut lin = Vec::new();
    for i in 0..c.nrows() {
        if is_zero_vec(&c.a.rows[i]) {
            continue;
        }
        if c.eq_rows.contains(&i) {
            lin.push(c.a.rows[i].clone());
        } else {
            rays.push(c.a.rows[i].clone());
        }
    }
    VCone::from_generators(rays, lin, c.ambient_dim())
}

/// Double description, V to H: bipolar round trip. The resulting rows are the
/// extreme rays / lineality of the polar, i.e. an irredundant description.
pub fn dd_h_from_v(c: &VCone) -> Result<HPoly> {
    let pol = dd_v_from_h(&polar_hform(c))?;
    Ok(polar_hform(&pol).canonicalize())
}

/// Tangent cone of a polyhedron at a member point: active rows, homogenized.
pub fn tangent_cone_poly(p: &HPoly, x: &[Rat]) -> Result<HPoly> {
    if !p.contains(x) {
        return Err(Error::PointNotInSet);
    }
    let mut ineq = Vec::new();
    let mut eq = Vec::new();
    for i in 0..p.nrows() {
        if p.eq_rows.contains(&i) {
            eq.push(p.a.rows[i].clone());
        } else if dot(&p.a.rows[i], x) == p.b[i] {
            ineq.push(p.a.rows[i].clone());
        }
    }
    Ok(HPoly::cone_from_rows(ineq, eq, p.ambient_dim()))
}

/// Normal cone (convex analysis) of a polyhedron at a member point.
pub fn convex_normal_cone_poly(p: &HPoly, x: &[Rat]) -> Result<VCone> {
    let t = tangent_cone_poly(p, x)?;
    polar_of_hcone(&t)
}

/// Exact Euclidean projection onto a nonempty polyhedron, by active-set
/// enumeration: the projection is the affine projection onto the span of its
/// active face, verified by feasibility and a normal-cone membership test.
pub fn project_onto_poly(p: &HPoly, x: &[Rat]) -> Result<Vector> {
    if p.contains(x) {
        return Ok(x.to_vec());
    }
    if p.is_empty() {
        return Err(Error::EmptySet);
    }
    let ineq_idx: Vec<usize> = (0..p.nrows()).filter(|i| !p.eq_rows.contains(i)).collect();
    let m = ineq_idx.len();
    if m > MAX_DD_ROWS {
        return Err(Error::ResourceLimit(format!(
            "projection with {m} inequality rows exceeds the soft limit {MAX_DD_ROWS}"
        )));
    }
    let mut best: Option<(Rat, Vector)> = None;
    for mask in 0u64..(1u64 << m) {
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vector = Vec::new();
        for &i in &p.eq_rows {
            rows.push(p.a.rows[i].clone());
            rhs.push(p.b[i].clone());
        }
        for (bit, &i) in ineq_idx.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                rows.push(p.a.rows[i].clone());
                rhs.push(p.b[i].clone());
            }
        }
        let Some(z) = affine_projection(&rows, &rhs, x) else {
            continue;
        };
        if !p.contains(&z) {
            continue;
        }
        let d = crate::rat::norm_sq(&sub(x, &z));
        match &best {
            Some((bd, _)) if *bd <= d => {}
            _ => best = Some((d, z)),
        }
    }
    let (_, z) = best.ok_or(Error::EmptySet)?;
    debug_assert!(convex_normal_cone_poly(p, &z)?.contains(&sub(x, &z)));
    Ok(z)
}

/// A rational point satisfying all constraints, with the listed inequality
/// rows strict, or `None`.
pub fn feasible(p: &HPoly, strict_rows: &BTreeSet<usize>) -> Option<Vector> {
    let strict: Vec<bool> = (0..p.nrows())
        .map(|i| strict_rows.contains(&i) && !p.eq_rows.contains(&i))
        .collect();
    lp::feasible_strict(p.ambient_dim(), &p.constraints(), &strict)
}

/// Fourier-Motzkin / pivot elimination of the listed coordinates. The output
/// lives in the remaining coordinates, in their original order.
pub fn project_out(p: &HPoly, drop: &[usize]) -> HPoly {
    let mut ineq: Vec<Vector> = Vec::new();
    let mut eq: Vec<Vector> = Vec::new();
    let n = p.ambient_dim();
    for i in 0..p.nrows() {
        let mut row = p.a.rows[i].clone();
        row.push(-p.b[i].clone());
        if p.eq_rows.contains(&i) {
            eq.push(row);
        } else {
            ineq.push(row);
        }
    }
    let mut drop_sorted: Vec<usize> = drop.to_vec();
    drop_sorted.sort_unstable();
    drop_sorted.dedup();
    // Eliminate from the highest index so lower indices stay valid; the
    // homogenizing column sits at the end and is never eliminated.
    for &col in drop_sorted.iter().rev() {
        if let Some(pos) = eq.iter().position(|r| !r[col].is_zero()) {
            let pivot_row = eq.swap_remove(pos);
            let pv = pivot_row[col].clone();
            let elim = |r: &mut Vector| {
                if !r[col].is_zero() {
                    let f = &r[col] / &pv;
                    for (x, pr) in r.iter_mut().zip(&pivot_row) {
                        *x = &*x - &f * pr;
                    }
                }
                r.remove(col);
            };
            for r in eq.iter_mut() {
                elim(r);
            }
            for r in ineq.iter_mut() {
                elim(r);
            }
            continue;
        }
        let mut pos_rows = Vec::new();
        let mut neg_rows = Vec::new();
        let mut zero_rows = Vec::new();
        for r in ineq.drain(..) {
            match sign(&r[col]) {
                1 => pos_rows.push(r),
                -1 => neg_rows.push(r),
                _ => zero_rows.push(r),
            }
        }
        let mut out: BTreeSet<Vector> = BTreeSet::new();
        for mut r in zero_rows {
            r.remove(col);
            if let Some(p) = primitive(&r) {
                out.insert(p);
            }
        }
        for rp in &pos_rows {
            for rn in &neg_rows {
                // rp[col] * rn - rn[col] * rp has a zero in `col`.
                let mut comb = sub(&scale(&rp[col], rn), &scale(&rn[col], rp));
                comb.remove(col);
                if let Some(pr) = primitive(&comb) {
                    out.insert(pr);
                } else if comb.last().map(|t| t.is_negative()).unwrap_or(false) {
                    // 0 <= negative constant: empty.
                    return HPoly::empty(n - drop_sorted.len());
                }
            }
        }
        for r in eq.iter_mut() {
            r.remove(col);
        }
        ineq = out.into_iter().collect();
        ineq = prune_redundant(ineq, &eq);
    }
    let nn = n - drop_sorted.len();
    let mut rows = Vec::new();
    let mut b = Vector::new();
    let mut eqset = BTreeSet::new();
    for r in ineq {
        let (head, tail) = r.split_at(nn);
        rows.push(head.to_vec());
        b.push(-tail[0].clone());
    }
    for r in eq {
        if is_zero_vec(&r[..nn]) {
            if !r[nn].is_zero() {
                return HPoly::empty(nn);
            }
            continue;
        }
        eqset.insert(rows.len());
        let (head, tail) = r.split_at(nn);
        rows.push(head.to_vec());
        b.push(-tail[0].clone());
    }
    HPoly::new(Mat::new(rows, nn), b, eqset).canonicalize()
}

/// LP-based redundancy pruning for homogenized inequality rows, applied once
/// the row count grows past what Fourier-Motzkin keeps tidy on its own.
fn prune_redundant(rows: Vec<Vector>, eq: &[Vector]) -> Vec<Vector> {
    const PRUNE_THRESHOLD: usize = 24;
    if rows.len() <= PRUNE_THRESHOLD {
        return rows;
    }
    let width = rows[0].len();
    let n = width - 1;
    let mut kept: Vec<Vector> = Vec::new();
    let mut remaining = rows;
    for i in 0..remaining.len() {
        let row = remaining[i].clone();
        let mut cons: Vec<Constraint> = Vec::new();
        for (j, r) in remaining.iter().enumerate() {
            if j != i {
                cons.push(lp::le(r[..n].to_vec(), -r[n].clone()));
            }
        }
        for e in eq {
            cons.push(lp::eq(e[..n].to_vec(), -e[n].clone()));
        }
        let redundant = match lp::maximize(n, &cons, &row[..n].to_vec()) {
            LpOutcome::Optimal { value, .. } => value <= -row[n].clone(),
            LpOutcome::Infeasible => true,
            LpOutcome::Unbounded => false,
        };
        if redundant {
            remaining[i] = zeros(width); // neutralized
        } else {
            kept.push(row);
        }
    }
    kept.retain(|r| !is_zero_vec(r));
    kept
}

/// `{x : A x + c in q}`.
pub fn affine_preimage(q: &HPoly, map: &Mat, c: &[Rat]) -> HPoly {
    assert_eq!(q.ambient_dim(), map.nrows());
    let rows: Vec<Vector> = q.a.rows.iter().map(|r| map.t_mul_vec(r)).collect();
    let b: Vector = q
        .a
        .rows
        .iter()
        .zip(&q.b)
        .map(|(r, bi)| bi - dot(r, c))
        .collect();
    HPoly::new(Mat::new(rows, map.cols), b, q.eq_rows.clone())
}

/// `{A x + c : x in p}` by projection of the graph.
pub fn affine_image(p: &HPoly, map: &Mat, c: &[Rat]) -> HPoly {
    let n = p.ambient_dim();
    let m = map.nrows();
    assert_eq!(map.cols, n);
    // Variables (x, y): p rows on x; equalities y - A x = c.
    let mut rows = Vec::new();
    let mut b = Vector::new();
    let mut eq = BTreeSet::new();
    for i in 0..p.nrows() {
        let mut row = p.a.rows[i].clone();
        row.extend(zeros(m));
        rows.push(row);
        b.push(p.b[i].clone());
        if p.eq_rows.contains(&i) {
            eq.insert(i);
        }
    }
    for j in 0..m {
        let mut row = neg(&map.rows[j]);
        row.extend(crate::rat::unit(m, j));
        eq.insert(rows.len());
        rows.push(row);
        b.push(c[j].clone());
    }
    let graph = HPoly::new(Mat::new(rows, n + m), b, eq);
    project_out(&graph, &(0..n).collect::<Vec<_>>())
}

/// Minkowski sum of two polyhedra in the same space.
pub fn minkowski_sum(p: &HPoly, q: &HPoly) -> HPoly {
    let n = p.ambient_dim();
    assert_eq!(n, q.ambient_dim());
    // Variables (x, a): a in p, x - a in q; project onto x.
    let mut rows = Vec::new();
    let mut b = Vector::new();
    let mut eq = BTreeSet::new();
    for i in 0..p.nrows() {
        let mut row = zeros(n);
        row.extend(p.a.rows[i].clone());
        if p.eq_rows.contains(&i) {
            eq.insert(rows.len());
        }
        rows.push(row);
        b.push(p.b[i].clone());
    }
    for i in 0..q.nrows() {
        let mut row = q.a.rows[i].clone();
        row.extend(neg(&q.a.rows[i]));
        if q.eq_rows.contains(&i) {
            eq.insert(rows.len());
        }
        rows.push(row);
        b.push(q.b[i].clone());
    }
    let joint = HPoly::new(Mat::new(rows, 2 * n), b, eq);
    project_out(&joint, &(n..2 * n).collect::<Vec<_>>())
}

/// Substitutes fixed values for the listed coordinates, producing a polyhedron
/// over the remaining coordinates in their original order.
pub fn substitute(p: &HPoly, fixed: &[(usize, Rat)]) -> HPoly {
    let n = p.ambient_dim();
    let keep: Vec<usize> = (0..n).filter(|i| !fixed.iter().any(|(j, _)| j == i)).collect();
    let mut rows = Vec::new();
    let mut b = Vector::new();
    for i in 0..p.nrows() {
        let mut shift = Rat::zero();
        for (j, v) in fixed {
            shift += &p.a.rows[i][*j] * v;
        }
        rows.push(keep.iter().map(|&k| p.a.rows[i][k].clone()).collect());
        b.push(&p.b[i] - shift);
    }
    HPoly::new(Mat::new(rows, keep.len()), b, p.eq_rows.clone())
}

/// Relative-interior witnesses, one per nonempty face of the polyhedron.
/// A face is identified by the set of inequality rows held at equality; the
/// witness satisfies all remaining rows strictly.
pub fn face_witnesses(p: &HPoly) -> Result<Vec<Vector>> {
    let ineq_idx: Vec<usize> = (0..p.nrows()).filter(|i| !p.eq_rows.contains(i)).collect();
    let m = ineq_idx.len();
    if m > 20 {
        return Err(Error::ResourceLimit(format!(
            "face enumeration with {m} inequality rows exceeds the soft limit 20"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << m) {
        let mut cons = p.constraints();
        let mut strict = vec![false; cons.len()];
        for (bit, &i) in ineq_idx.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                cons[i].rel = lp::Rel::Eq;
            } else {
                strict[i] = true;
            }
        }
        if let Some(w) = lp::feasible_strict(p.ambient_dim(), &cons, &strict) {
            out.push(w);
        }
    }
    Ok(out)
}

/// Generator form of a polyhedron: face witnesses as points plus the recession
/// cone's rays and lineality. `p = conv(points) + cone(rays) + span(lineality)`.
pub fn generator_form(p: &HPoly) -> Result<(Vec<Vector>, VCone)> {
    let points = face_witnesses(p)?;
    let rec = dd_v_from_h(&p.recession_cone())?;
    Ok((points, rec))
}

/// Closed convex hull of a family of (point, recession) generator sets, via
/// homogenization: H-form rows of `cl conv(U pieces)`.
pub fn convex_hull_hform(pieces: &[(Vec<Vector>, VCone)], n: usize) -> Result<HPoly> {
    let mut rays = Vec::new();
    let mut lin = Vec::new();
    let mut any_point = false;
    for (points, rec) in pieces {
        for pt in points {
            let mut v = pt.clone();
            v.push(Rat::one());
            rays.push(v);
            any_point = true;
        }
        for r in &rec.rays {
            let mut v = r.clone();
            v.push(Rat::zero());
            rays.push(v);
        }
        for g in &rec.lineality {
            let mut v = g.clone();
            v.push(Rat::zero());
            lin.push(v);
        }
    }
    if !any_point {
        return Ok(HPoly::empty(n));
    }
    let cone = VCone::from_generators(rays, lin, n + 1)?;
    let h = dd_h_from_v(&cone)?;
    // Dehomogenize at last coordinate = 1.
    Ok(substitute(&h, &[(n, Rat::one())]).canonicalize())
}

/// Convenience: the sum `x + d` for direction realization tests.
pub fn point_plus(x: &[Rat], d: &[Rat]) -> Vector {
    add(x, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat, vec_i64};

    fn cone2(ineq: &[&[i64]], eq: &[&[i64]]) -> HPoly {
        let n = ineq.first().or(eq.first()).map_or(2, |r| r.len());
        HPoly::cone_from_rows(
            ineq.iter().map(|r| vec_i64(r)).collect(),
            eq.iter().map(|r| vec_i64(r)).collect(),
            n,
        )
    }

    #[test]
    fn dd_coordinate_octant() {
        // {x <= 0, y <= 0} -> rays (-1,0), (0,-1).
        let c = cone2(&[&[1, 0], &[0, 1]], &[]);
        let v = dd_v_from_h(&c).unwrap();
        assert_eq!(v.lineality.len(), 0);
        assert_eq!(v.rays, vec![vec_i64(&[-1, 0]), vec_i64(&[0, -1])]);
    }

    #[test]
    fn dd_line() {
        // {x = 0} in R^2 -> lineality (0,1).
        let c = cone2(&[], &[&[1, 0]]);
        let v = dd_v_from_h(&c).unwrap();
        assert!(v.rays.is_empty());
        assert_eq!(v.lineality, vec![vec_i64(&[0, 1])]);
    }

    #[test]
    fn dd_wedge_extreme_rays() {
        // {x+y <= 0, x-y <= 0} -> rays (-1,-1), (-1,1) up to order.
        let c = cone2(&[&[1, 1], &[1, -1]], &[]);
        let v = dd_v_from_h(&c).unwrap();
        assert_eq!(v.rays, vec![vec_i64(&[-1, -1]), vec_i64(&[-1, 1])]);
        assert!(v.lineality.is_empty());
    }

    #[test]
    fn dd_round_trip_same_point_set() {
        let c = cone2(&[&[1, 1], &[1, -1]], &[]);
        let v = dd_v_from_h(&c).unwrap();
        let h = dd_h_from_v(&v).unwrap();
        let v2 = dd_v_from_h(&h).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn polar_examples_and_involution() {
        // R^2_+ polar = R^2_-.
        let quad = VCone::from_generators(vec![vec_i64(&[1, 0]), vec_i64(&[0, 1])], vec![], 2)
            .unwrap();
        let p = polar(&quad).unwrap();
        assert_eq!(p.rays, vec![vec_i64(&[-1, 0]), vec_i64(&[0, -1])]);
        assert_eq!(polar(&p).unwrap(), quad);

        // Full space -> {0}.
        let full = VCone::full_space(2);
        assert!(polar(&full).unwrap().is_trivial());
        assert_eq!(polar(&VCone::trivial(2)).unwrap(), full);

        // Single ray (1,1): polar is the halfplane y1 + y2 <= 0.
        let ray = VCone::from_generators(vec![vec_i64(&[1, 1])], vec![], 2).unwrap();
        let p = polar(&ray).unwrap();
        assert_eq!(polar(&p).unwrap(), ray);
        assert!(p.contains(&vec_i64(&[-1, -1])));
        assert!(p.contains(&vec_i64(&[1, -1])));
        assert!(!p.contains(&vec_i64(&[1, 0])));
    }

    #[test]
    fn tangent_and_normal_cones() {
        // P = R^2_+.
        let p = cone2(&[&[-1, 0], &[0, -1]], &[]);
        let t0 = tangent_cone_poly(&p, &vec_i64(&[0, 0])).unwrap();
        assert_eq!(t0.nrows(), 2);
        let t1 = tangent_cone_poly(&p, &vec_i64(&[1, 0])).unwrap();
        let v1 = dd_v_from_h(&t1).unwrap();
        // {h : h2 >= 0}.
        assert!(v1.contains(&vec_i64(&[5, 1])) && !v1.contains(&vec_i64(&[0, -1])));
        assert_eq!(
            convex_normal_cone_poly(&p, &vec_i64(&[0, 0])).unwrap().rays,
            vec![vec_i64(&[-1, 0]), vec_i64(&[0, -1])]
        );
        assert_eq!(
            convex_normal_cone_poly(&p, &vec_i64(&[1, 0])).unwrap().rays,
            vec![vec_i64(&[0, -1])]
        );
        // Equality row: P = {x1 = 0}, normal cone = span (1,0).
        let line = cone2(&[], &[&[1, 0]]);
        let nc = convex_normal_cone_poly(&line, &vec_i64(&[0, 0])).unwrap();
        assert!(nc.rays.is_empty());
        assert_eq!(nc.lineality, vec![vec_i64(&[1, 0])]);
        assert_eq!(
            tangent_cone_poly(&p, &vec_i64(&[-1, 0])),
            Err(Error::PointNotInSet)
        );
        // P = {x1+x2 <= 1, x >= 0} at (1,0): {h1+h2 <= 0, h2 >= 0}.
        let tri = HPoly::new(
            Mat::from_i64(&[&[1, 1], &[-1, 0], &[0, -1]]),
            vec![int(1), int(0), int(0)],
            BTreeSet::new(),
        );
        let t = tangent_cone_poly(&tri, &vec_i64(&[1, 0])).unwrap();
        let tv = dd_v_from_h(&t).unwrap();
        assert_eq!(tv.rays, vec![vec_i64(&[-1, 0]), vec_i64(&[-1, 1])]);
    }

    #[test]
    fn projection_examples() {
        let quad = cone2(&[&[-1, 0], &[0, -1]], &[]);
        assert_eq!(
            project_onto_poly(&quad, &vec![int(-1), int(2)]).unwrap(),
            vec![int(0), int(2)]
        );
        let half = cone2(&[&[1, 1]], &[]);
        assert_eq!(
            project_onto_poly(&half, &vec![int(1), int(1)]).unwrap(),
            vec![int(0), int(0)]
        );
        // Simplex face: project (1,1) onto {x1+x2 = 1, x >= 0}.
        let simplex = HPoly::new(
            Mat::from_i64(&[&[1, 1], &[-1, 0], &[0, -1]]),
            vec![int(1), int(0), int(0)],
            [0usize].into_iter().collect(),
        );
        assert_eq!(
            project_onto_poly(&simplex, &vec![int(1), int(1)]).unwrap(),
            vec![rat(1, 2), rat(1, 2)]
        );
        assert_eq!(
            project_onto_poly(&HPoly::empty(2), &vec![int(0), int(0)]),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn feasible_with_strict_rows() {
        // {x <= 0, -x <= 0} strict first row: impossible.
        let p = HPoly::from_ineqs(vec![(vec_i64(&[1]), int(0)), (vec_i64(&[-1]), int(0))], 1);
        assert!(feasible(&p, &[0usize].into_iter().collect()).is_none());
        // {x <= 1} strict: some x < 1.
        let p = HPoly::from_ineqs(vec![(vec_i64(&[1]), int(1))], 1);
        let w = feasible(&p, &[0usize].into_iter().collect()).unwrap();
        assert!(w[0] < int(1));
        // {x1+x2 <= 0 strict, x1 >= 0}.
        let p = HPoly::from_ineqs(
            vec![(vec_i64(&[1, 1]), int(0)), (vec_i64(&[-1, 0]), int(0))],
            2,
        );
        let w = feasible(&p, &[0usize].into_iter().collect()).unwrap();
        assert!(dot(&vec_i64(&[1, 1]), &w).is_negative() && !w[0].is_negative());
    }

    #[test]
    fn fm_projection_shadow() {
        // P = {0 <= x <= 1, 0 <= y <= 1, x + y <= 3/2}; projecting out y gives [0,1].
        let p = HPoly::from_ineqs(
            vec![
                (vec_i64(&[-1, 0]), int(0)),
                (vec_i64(&[1, 0]), int(1)),
                (vec_i64(&[0, -1]), int(0)),
                (vec_i64(&[0, 1]), int(1)),
                (vec_i64(&[1, 1]), rat(3, 2)),
            ],
            2,
        );
        let q = project_out(&p, &[1]);
        assert!(q.contains(&vec![int(0)]) && q.contains(&vec![int(1)]));
        assert!(!q.contains(&vec![rat(11, 10)]) && !q.contains(&vec![rat(-1, 10)]));
        // Equality pivot path: {x = y, 0 <= y <= 1} project out y -> [0,1].
        let p = HPoly::new(
            Mat::from_i64(&[&[1, -1], &[0, -1], &[0, 1]]),
            vec![int(0), int(0), int(1)],
            [0usize].into_iter().collect(),
        );
        let q = project_out(&p, &[1]);
        assert!(q.contains(&vec![rat(1, 2)]) && !q.contains(&vec![int(2)]));
    }

    #[test]
    fn affine_image_and_preimage() {
        let quad = cone2(&[&[-1, 0], &[0, -1]], &[]);
        // Image of R^2_+ under (x,y) -> x + y is R_+.
        let sum = Mat::from_i64(&[&[1, 1]]);
        let img = affine_image(&quad, &sum, &[int(0)]);
        assert!(img.contains(&vec![int(3)]) && !img.contains(&vec![int(-1)]));
        // Preimage of R_+ under x -> (x, x) is R_+.
        let dup = Mat::from_i64(&[&[1], &[1]]);
        let pre = affine_preimage(&quad, &dup, &[int(0), int(0)]);
        assert!(pre.contains(&vec![int(2)]) && !pre.contains(&vec![int(-2)]));
    }

    #[test]
    fn minkowski_sum_of_orthants() {
        let xplus = cone2(&[&[-1, 0]], &[&[0, 1]]); // R_+ x {0}
        let yminus = cone2(&[&[0, 1]], &[&[1, 0]]); // {0} x R_-
        let s = minkowski_sum(&xplus, &yminus);
        assert!(s.contains(&vec![int(2), int(-3)]));
        assert!(!s.contains(&vec![int(-1), int(-1)]));
    }

    #[test]
    fn face_witnesses_cover_all_faces() {
        // Unit square: 4 vertices + 4 edges + interior = 9 faces.
        let sq = HPoly::from_ineqs(
            vec![
                (vec_i64(&[-1, 0]), int(0)),
                (vec_i64(&[1, 0]), int(1)),
                (vec_i64(&[0, -1]), int(0)),
                (vec_i64(&[0, 1]), int(1)),
            ],
            2,
        );
        let f = face_witnesses(&sq).unwrap();
        assert_eq!(f.len(), 9);
    }

    #[test]
    fn convex_hull_of_two_boxes() {
        let seg = |lo: i64, hi: i64| {
            HPoly::from_ineqs(vec![(vec_i64(&[-1]), int(-lo)), (vec_i64(&[1]), int(hi))], 1)
        };
        let a = generator_form(&seg(0, 1)).unwrap();
        let b = generator_form(&seg(3, 4)).unwrap();
        let hull = convex_hull_hform(&[a, b], 1).unwrap();
        assert!(hull.contains(&vec![int(2)]));
        assert!(!hull.contains(&vec![int(5)]) && !hull.contains(&vec![int(-1)]));
    }

    #[test]
    fn canonical_form_is_stable() {
        let p = HPoly::from_ineqs(
            vec![
                (vec![int(2), int(4)], int(6)),
                (vec![int(1), int(2)], int(3)),
                (vec![int(0), int(0)], int(1)),
            ],
            2,
        );
        let c = p.canonicalize();
        assert_eq!(c.nrows(), 1);
        assert_eq!(c.canonicalize(), c);
    }
}
