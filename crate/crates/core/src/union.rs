//! Finite unions of convex polyhedra and of convex polyhedral cones, with
//! exact inclusion and equality decision procedures.
//!
//! Inclusion of a convex target in a finite union is decided recursively:
//! `T` is covered by `B u rest` iff every way of strictly violating one row of
//! `B` leaves a region covered by `rest`. The base cases are exact strict-row
//! LPs, so the test is a decision procedure, not a heuristic.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::geometry::{dd_h_from_v, dd_v_from_h, minkowski_sum, HPoly, VCone};
use crate::linalg::Mat;
use crate::lp::{self, Constraint};
use crate::rat::{neg, zeros, Rat, Vector};

/// Finite union of convex polyhedra; the empty union is the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionSet {
    pub dim: usize,
    pub pieces: Vec<HPoly>,
}

impl UnionSet {
    pub fn new(dim: usize, pieces: Vec<HPoly>) -> Self {
        for p in &pieces {
            assert_eq!(p.ambient_dim(), dim, "piece dimension mismatch");
        }
        UnionSet { dim, pieces }
    }

    pub fn empty(dim: usize) -> Self {
        UnionSet { dim, pieces: Vec::new() }
    }

    pub fn full_space(dim: usize) -> Self {
        UnionSet::new(dim, vec![HPoly::full_space(dim)])
    }

    pub fn singleton(x: &[Rat]) -> Self {
        let n = x.len();
        let rows: Vec<Vector> = (0..n).map(|i| crate::rat::unit(n, i)).collect();
        let p = HPoly::new(Mat::new(rows, n), x.to_vec(), (0..n).collect());
        UnionSet::new(n, vec![p])
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn is_empty_set(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    pub fn witness(&self) -> Option<Vector> {
        self.pieces.iter().find_map(|p| p.witness())
    }

    /// Canonical form: canonical nonempty pieces, pieces absorbed by another
    /// single piece dropped, sorted by row encoding.
    pub fn canonicalize(&self) -> UnionSet {
        let mut pieces: Vec<HPoly> = self
            .pieces
            .iter()
            .map(|p| p.canonicalize())
            .filter(|p| !p.is_empty())
            .collect();
        pieces.sort_by_key(piece_key);
        pieces.dedup();
        let mut keep: Vec<bool> = vec![true; pieces.len()];
        for i in 0..pieces.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..pieces.len() {
                if i != j && keep[j] && keep[i] && pieces[i].subset_of(&pieces[j]) {
                    // On mutual inclusion keep the later piece arbitrarily but
                    // deterministically.
                    if !(pieces[j].subset_of(&pieces[i]) && j < i) {
                        keep[i] = false;
                    }
                }
            }
        }
        let pieces = pieces
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        UnionSet::new(self.dim, pieces)
    }

    /// Set inclusion `self` in `other`, exactly.
    pub fn subset_of(&self, other: &UnionSet) -> bool {
        self.uncovered_witness(other).is_none()
    }

    /// A point of `self` outside `other`, if one exists.
    pub fn uncovered_witness(&self, other: &UnionSet) -> Option<Vector> {
        for p in &self.pieces {
            let target = StrictTarget::from_poly(p);
            if let Some(w) = uncovered(&target, &other.pieces) {
                return Some(w);
            }
        }
        None
    }

    pub fn eq_set(&self, other: &UnionSet) -> bool {
        self.subset_of(other) && other.subset_of(self)
    }

    /// Pairwise intersection with another union.
    pub fn intersect(&self, other: &UnionSet) -> UnionSet {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                pieces.push(p.intersect(q));
            }
        }
        UnionSet::new(self.dim, pieces).canonicalize()
    }

    /// Union by concatenation.
    pub fn union(&self, other: &UnionSet) -> UnionSet {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.clone());
        UnionSet::new(self.dim, pieces).canonicalize()
    }

    /// Cartesian product.
    pub fn product(&self, other: &UnionSet) -> UnionSet {
        let n = self.dim;
        let m = other.dim;
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                let mut rows = Vec::new();
                let mut b = Vector::new();
                let mut eq = BTreeSet::new();
                for i in 0..p.nrows() {
                    let mut row = p.a.rows[i].clone();
                    row.extend(zeros(m));
                    if p.eq_rows.contains(&i) {
                        eq.insert(rows.len());
                    }
                    rows.push(row);
                    b.push(p.b[i].clone());
                }
                for i in 0..q.nrows() {
                    let mut row = zeros(n);
                    row.extend(q.a.rows[i].clone());
                    if q.eq_rows.contains(&i) {
                        eq.insert(rows.len());
                    }
                    rows.push(row);
                    b.push(q.b[i].clone());
                }
                pieces.push(HPoly::new(Mat::new(rows, n + m), b, eq));
            }
        }
        UnionSet::new(n + m, pieces)
    }

    /// Minkowski sum, distributed over pieces.
    pub fn minkowski(&self, other: &UnionSet) -> UnionSet {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                pieces.push(minkowski_sum(p, q));
            }
        }
        UnionSet::new(self.dim, pieces).canonicalize()
    }

    /// `{A x + c : x in self}` piecewise.
    pub fn affine_image(&self, map: &Mat, c: &[Rat]) -> UnionSet {
        let pieces = self
            .pieces
            .iter()
            .map(|p| crate::geometry::affine_image(p, map, c))
            .collect();
        UnionSet::new(map.nrows(), pieces).canonicalize()
    }

    /// `{x : A x + c in self}` piecewise.
    pub fn affine_preimage(&self, map: &Mat, c: &[Rat]) -> UnionSet {
        let pieces = self
            .pieces
            .iter()
            .map(|p| crate::geometry::affine_preimage(p, map, c))
            .collect();
        UnionSet::new(map.cols, pieces)
    }

    /// Coordinate projection (drops the listed coordinates) piecewise.
    pub fn project_out(&self, drop: &[usize]) -> UnionSet {
        let pieces = self
            .pieces
            .iter()
            .map(|p| crate::geometry::project_out(p, drop))
            .collect();
        UnionSet::new(self.dim - drop.len(), pieces).canonicalize()
    }

    /// Substitutes values for the listed coordinates piecewise.
    pub fn substitute(&self, fixed: &[(usize, Rat)]) -> UnionSet {
        let pieces = self
            .pieces
            .iter()
            .map(|p| crate::geometry::substitute(p, fixed))
            .collect();
        UnionSet::new(self.dim - fixed.len(), pieces)
    }

    pub fn translate(&self, p: &[Rat]) -> UnionSet {
        UnionSet::new(self.dim, self.pieces.iter().map(|q| q.translate(p)).collect())
    }

    /// Representative points covering every face of every piece.
    pub fn face_representatives(&self) -> Result<Vec<Vector>> {
        let mut out: Vec<Vector> = Vec::new();
        for p in &self.pieces {
            for w in crate::geometry::face_witnesses(p)? {
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        Ok(out)
    }

    /// Whether the union is a bounded set.
    pub fn is_bounded(&self) -> bool {
        self.pieces.iter().all(|p| p.is_bounded())
    }
}

fn piece_key(p: &HPoly) -> String {
    let mut s = String::new();
    for i in 0..p.nrows() {
        s.push(if p.eq_rows.contains(&i) { 'e' } else { 'i' });
        for x in &p.a.rows[i] {
            s.push_str(&crate::rat::fmt_rat(x));
            s.push(',');
        }
        s.push_str(&crate::rat::fmt_rat(&p.b[i]));
        s.push(';');
    }
    s
}

/// A convex region given by base constraints plus strict-row flags.
#[derive(Debug, Clone)]
struct StrictTarget {
    n: usize,
    cons: Vec<Constraint>,
    strict: Vec<bool>,
}

impl StrictTarget {
    fn from_poly(p: &HPoly) -> Self {
        let cons = p.constraints();
        let strict = vec![false; cons.len()];
        StrictTarget { n: p.ambient_dim(), cons, strict }
    }

    fn with(&self, c: Constraint, strict: bool) -> Self {
        let mut t = self.clone();
        t.cons.push(c);
        t.strict.push(strict);
        t
    }

    fn witness(&self) -> Option<Vector> {
        lp::feasible_strict(self.n, &self.cons, &self.strict)
    }

    /// Whether the whole region lies inside the convex piece (strictness only
    /// shrinks the region, so the relaxed check is sufficient).
    fn inside_convex(&self, piece: &HPoly) -> bool {
        for i in 0..piece.nrows() {
            let row = &piece.a.rows[i];
            let bi = &piece.b[i];
            match lp::maximize(self.n, &self.cons, row) {
                lp::LpOutcome::Infeasible => return true,
                lp::LpOutcome::Unbounded => return false,
                lp::LpOutcome::Optimal { value, .. } => {
                    if value > *bi {
                        return false;
                    }
                }
            }
            if piece.eq_rows.contains(&i) {
                match lp::maximize(self.n, &self.cons, &neg(row)) {
                    lp::LpOutcome::Infeasible => return true,
                    lp::LpOutcome::Unbounded => return false,
                    lp::LpOutcome::Optimal { value, .. } => {
                        if -value < *bi {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A point of `target` not covered by the union of `cover`, or `None`.
fn uncovered(target: &StrictTarget, cover: &[HPoly]) -> Option<Vector> {
    target.witness()?;
    let Some((first, rest)) = cover.split_first() else {
        return target.witness();
    };
    if target.inside_convex(first) {
        return None;
    }
    // Pieces that already contain the whole target would have returned above;
    // walk the complement of `first` branch by branch.
    for i in 0..first.nrows() {
        let row = first.a.rows[i].clone();
        let bi = first.b[i].clone();
        // Violate row i strictly: a . x > b.
        let sub = target.with(lp::le(neg(&row), -bi.clone()), true);
        if let Some(w) = uncovered(&sub, rest) {
            return Some(w);
        }
        if first.eq_rows.contains(&i) {
            let sub = target.with(lp::le(row, bi), true);
            if let Some(w) = uncovered(&sub, rest) {
                return Some(w);
            }
        }
    }
    None
}

/// Finite union of convex polyhedral cones in generator form; the value type
/// of every limiting cone. Every piece contains the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeUnion {
    pub dim: usize,
    pub pieces: Vec<VCone>,
}

impl ConeUnion {
    pub fn new(dim: usize, pieces: Vec<VCone>) -> Self {
        for p in &pieces {
            assert_eq!(p.dim, dim, "piece dimension mismatch");
        }
        ConeUnion { dim, pieces }
    }

    /// The empty cone union (distinct from `{0}`).
    pub fn empty(dim: usize) -> Self {
        ConeUnion { dim, pieces: Vec::new() }
    }

    pub fn zero(dim: usize) -> Self {
        ConeUnion { dim, pieces: vec![VCone::trivial(dim)] }
    }

    pub fn is_empty_set(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Exactly `{0}`.
    pub fn is_zero(&self) -> bool {
        !self.pieces.is_empty() && self.pieces.iter().all(|p| p.is_trivial())
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn nonzero_element(&self) -> Option<Vector> {
        self.pieces.iter().find_map(|p| p.nonzero_element())
    }

    /// Canonical form: canonical pieces, pieces absorbed by a single other
    /// piece dropped (mutual-membership test on generators), sorted.
    pub fn canonicalize(&self) -> ConeUnion {
        let mut pieces = self.pieces.clone();
        pieces.sort();
        pieces.dedup();
        let mut keep = vec![true; pieces.len()];
        for i in 0..pieces.len() {
            for j in 0..pieces.len() {
                if i != j && keep[i] && keep[j] && pieces[i].subset_of(&pieces[j]) {
                    if !(pieces[j].subset_of(&pieces[i]) && j < i) {
                        keep[i] = false;
                    }
                }
            }
        }
        let pieces: Vec<VCone> = pieces
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        ConeUnion::new(self.dim, pieces)
    }

    /// H-form view of the union.
    pub fn to_union_set(&self) -> Result<UnionSet> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            pieces.push(dd_h_from_v(p)?);
        }
        Ok(UnionSet::new(self.dim, pieces))
    }

    pub fn from_hcones(dim: usize, cones: &[HPoly]) -> Result<ConeUnion> {
        let mut pieces = Vec::new();
        for c in cones {
            let v = dd_v_from_h(c)?;
            // An infeasible H-cone is impossible (0 always belongs); keep all.
            pieces.push(v);
        }
        Ok(ConeUnion::new(dim, pieces).canonicalize())
    }

    pub fn subset_of(&self, other: &ConeUnion) -> Result<bool> {
        Ok(self.to_union_set()?.subset_of(&other.to_union_set()?))
    }

    pub fn eq_cone(&self, other: &ConeUnion) -> Result<bool> {
        Ok(self.subset_of(other)? && other.subset_of(self)?)
    }

    /// Union with canonical simplification.
    pub fn union(&self, other: &ConeUnion) -> ConeUnion {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.clone());
        ConeUnion::new(self.dim, pieces).canonicalize()
    }

    /// Cartesian product of cone unions.
    pub fn product(&self, other: &ConeUnion) -> Result<ConeUnion> {
        let n = self.dim;
        let m = other.dim;
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                let pad = |v: &Vector, front: bool| -> Vector {
                    if front {
                        crate::rat::concat(v, &zeros(m))
                    } else {
                        crate::rat::concat(&zeros(n), v)
                    }
                };
                let rays: Vec<Vector> = p
                    .rays
                    .iter()
                    .map(|r| pad(r, true))
                    .chain(q.rays.iter().map(|r| pad(r, false)))
                    .collect();
                let lin: Vec<Vector> = p
                    .lineality
                    .iter()
                    .map(|l| pad(l, true))
                    .chain(q.lineality.iter().map(|l| pad(l, false)))
                    .collect();
                pieces.push(VCone::from_generators(rays, lin, n + m)?);
            }
        }
        Ok(ConeUnion::new(n + m, pieces).canonicalize())
    }

    /// Minkowski sum distributed over pieces; sums of convex cones pool
    /// generators.
    pub fn minkowski(&self, other: &ConeUnion) -> Result<ConeUnion> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                let mut rays = p.rays.clone();
                rays.extend(q.rays.clone());
                let mut lin = p.lineality.clone();
                lin.extend(q.lineality.clone());
                pieces.push(VCone::from_generators(rays, lin, self.dim)?);
            }
        }
        Ok(ConeUnion::new(self.dim, pieces).canonicalize())
    }

    /// Image under a linear map, piecewise.
    pub fn linear_image(&self, map: &Mat) -> Result<ConeUnion> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            pieces.push(p.linear_image(map)?);
        }
        Ok(ConeUnion::new(map.nrows(), pieces).canonicalize())
    }

    /// Convex hull: for unions of convex cones this is the Minkowski sum of
    /// all pieces, i.e. the cone generated by the pooled generators.
    pub fn convex_hull(&self) -> Result<VCone> {
        let mut rays = Vec::new();
        let mut lin = Vec::new();
        for p in &self.pieces {
            rays.extend(p.rays.clone());
            lin.extend(p.lineality.clone());
        }
        VCone::from_generators(rays, lin, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, vec_i64};

    fn halfplane(a: &[i64], b: i64) -> HPoly {
        HPoly::from_ineqs(vec![(vec_i64(a), int(b))], a.len())
    }

    fn quadrant_pp() -> HPoly {
        HPoly::from_ineqs(vec![(vec_i64(&[-1, 0]), int(0)), (vec_i64(&[0, -1]), int(0))], 2)
    }

    #[test]
    fn union_inclusion_is_not_generatorwise() {
        // R^2_+ is not inside ray(x) u ray(y) even though the generators are.
        let rays = UnionSet::new(
            2,
            vec![
                HPoly::cone_from_rows(vec![vec_i64(&[-1, 0])], vec![vec_i64(&[0, 1])], 2),
                HPoly::cone_from_rows(vec![vec_i64(&[0, -1])], vec![vec_i64(&[1, 0])], 2),
            ],
        );
        let quad = UnionSet::new(2, vec![quadrant_pp()]);
        assert!(!quad.subset_of(&rays));
        let w = quad.uncovered_witness(&rays).unwrap();
        assert!(quad.contains(&w) && !rays.contains(&w));
        assert!(rays.subset_of(&quad));
    }

    #[test]
    fn union_of_halfplanes_covers_plane_minus_strip() {
        // {x <= 0} u {x >= 1} does not cover R, but covers itself.
        let u = UnionSet::new(2, vec![halfplane(&[1, 0], 0), halfplane(&[-1, 0], -1)]);
        assert!(!UnionSet::full_space(2).subset_of(&u));
        assert!(u.subset_of(&UnionSet::full_space(2)));
        assert!(u.eq_set(&u.canonicalize()));
    }

    #[test]
    fn splitting_a_halfplane_is_an_equality() {
        // {y >= 0} = {y >= 0, x <= 0} u {y >= 0, x >= 0}.
        let upper = UnionSet::new(2, vec![halfplane(&[0, -1], 0)]);
        let split = UnionSet::new(
            2,
            vec![
                upper.pieces[0].intersect(&halfplane(&[1, 0], 0)),
                upper.pieces[0].intersect(&halfplane(&[-1, 0], 0)),
            ],
        );
        assert!(upper.eq_set(&split));
    }

    #[test]
    fn cone_union_canonicalization_absorbs_pieces() {
        let quad = VCone::from_generators(vec![vec_i64(&[1, 0]), vec_i64(&[0, 1])], vec![], 2)
            .unwrap();
        let ray = VCone::from_generators(vec![vec_i64(&[1, 1])], vec![], 2).unwrap();
        let cu = ConeUnion::new(2, vec![ray, quad.clone()]).canonicalize();
        assert_eq!(cu.pieces, vec![quad]);
    }

    #[test]
    fn cone_union_equality_via_hform() {
        let upper = VCone::from_generators(
            vec![],
            vec![vec_i64(&[1, 0])],
            2,
        )
        .unwrap(); // x-axis line
        let two_rays = ConeUnion::new(
            2,
            vec![
                VCone::from_generators(vec![vec_i64(&[1, 0])], vec![], 2).unwrap(),
                VCone::from_generators(vec![vec_i64(&[-1, 0])], vec![], 2).unwrap(),
            ],
        );
        let line = ConeUnion::new(2, vec![upper]);
        assert!(line.eq_cone(&two_rays).unwrap());
    }

    #[test]
    fn minkowski_and_product_of_cone_unions() {
        let xm = ConeUnion::new(
            1,
            vec![VCone::from_generators(vec![vec_i64(&[-1])], vec![], 1).unwrap()],
        );
        let z = ConeUnion::zero(1);
        let prod = z.product(&xm).unwrap();
        assert!(prod.contains(&vec_i64(&[0, -2])));
        assert!(!prod.contains(&vec_i64(&[1, -2])) && !prod.contains(&vec_i64(&[0, 1])));
        let sum = prod.minkowski(&ConeUnion::zero(2)).unwrap();
        assert!(sum.eq_cone(&prod).unwrap());
    }
}
