//! Tangent, Fréchet, limiting and directional limiting normal cones of finite
//! unions of convex polyhedra.
//!
//! The exact algorithm runs in three steps, each of which is covered by the
//! oracle suite rather than assumed:
//!   1. conic localization: near a member point the union coincides with the
//!      point plus the union of the tangent cones of its active pieces;
//!   2. homogeneity: Fréchet cones of a polyhedral cone are constant along
//!      open rays, so the directional limiting cone at `x` in direction `u`
//!      is the plain limiting cone of the localized cone at the point `u`;
//!   3. stratification: that limiting cone is the union of the (constant)
//!      Fréchet cones over all realizable sign cells of the localized
//!      arrangement whose closure contains `u`.
//!
//! The union formula of step 3 is an implementation theorem for polyhedral
//! unions, validated definition-level by the `oracle` module; the paper-level
//! calculus only provides one-sided estimates for unions.

use std::collections::BTreeMap;

use crate::cells::{enumerate_cells, Cell, CellQuery, RowTable, DEFAULT_MAX_CELLS};
use crate::error::{Error, Result};
use crate::geometry::{dd_v_from_h, tangent_cone_poly, HPoly, VCone};
use crate::rat::{dot, is_zero_vec, Rat, Vector};
use crate::union::{ConeUnion, UnionSet};
use num::{Signed, Zero};

/// A direction; all directional operations are invariant under positive
/// scaling, so representatives are never normalized and stay rational.
pub type Direction = Vector;

/// Allowed sign pattern of one tangent-piece row on a cell.
#[derive(Debug, Clone, Copy)]
enum SignReq {
    /// Inequality row: the oriented sign must be <= 0.
    NonPos(i8),
    /// Equality row: the sign must be 0.
    Zero,
}

impl SignReq {
    fn admits(&self, sign: i8) -> bool {
        match self {
            SignReq::Zero => sign == 0,
            SignReq::NonPos(orient) => sign * orient <= 0,
        }
    }
}

/// One arrangement cell of the localized tangent union, with its containment
/// pattern and the Fréchet normal cone value (constant on the cell).
#[derive(Debug, Clone)]
pub struct SignCell {
    pub signs: Vec<i8>,
    /// A rational representative direction in the cell.
    pub witness: Vector,
    /// Indices (into the active-piece list) of tangent pieces containing the cell.
    pub containing: Vec<usize>,
    /// Fréchet normal cone of the localized union at any point of the cell.
    pub frechet: VCone,
}

/// The full stratification of a union at a member point.
#[derive(Debug, Clone)]
pub struct Stratification {
    pub dim: usize,
    pub table: RowTable,
    /// H-form tangent cones of the pieces containing the base point.
    pub tangent_pieces: Vec<HPoly>,
    pub cells: Vec<SignCell>,
}

impl Stratification {
    /// Whether the direction lies in the localized tangent union.
    pub fn tangent_contains(&self, u: &[Rat]) -> bool {
        self.tangent_pieces.iter().any(|t| t.contains(u))
    }

    /// Cells whose closure contains `u` (the directions realizing the limit).
    pub fn cells_adjacent_to(&self, u: &[Rat]) -> Vec<&SignCell> {
        self.cells
            .iter()
            .filter(|c| closure_contains(&self.table, &c.signs, u))
            .collect()
    }

    /// The directional limiting normal cone read off the stratification.
    pub fn directional_cone(&self, u: &[Rat]) -> ConeUnion {
        if !self.tangent_contains(u) {
            return ConeUnion::empty(self.dim);
        }
        let pieces = self
            .cells_adjacent_to(u)
            .into_iter()
            .map(|c| c.frechet.clone())
            .collect();
        ConeUnion::new(self.dim, pieces).canonicalize()
    }
}

fn closure_contains(table: &RowTable, signs: &[i8], u: &[Rat]) -> bool {
    signs.iter().zip(table.rows()).all(|(&s, (a, b))| {
        debug_assert!(b.is_zero(), "localized arrangement rows pass through 0");
        let v = dot(a, u);
        match s {
            0 => v.is_zero(),
            1 => !v.is_negative(),
            _ => !v.is_positive(),
        }
    })
}

/// Builds the stratification of `d` at `x in d`.
pub fn stratify(d: &UnionSet, x: &[Rat]) -> Result<Stratification> {
    stratify_with_limit(d, x, DEFAULT_MAX_CELLS)
}

pub fn stratify_with_limit(d: &UnionSet, x: &[Rat], max_cells: usize) -> Result<Stratification> {
    if x.len() != d.dim {
        return Err(Error::DimensionMismatch { expected: d.dim, got: x.len() });
    }
    let active: Vec<&HPoly> = d.pieces.iter().filter(|p| p.contains(x)).collect();
    if active.is_empty() {
        return Err(Error::PointNotInSet);
    }
    let mut tangent_pieces = Vec::new();
    let mut table = RowTable::new();
    // Per piece: (table row, requirement) pairs.
    let mut reqs: Vec<Vec<(usize, SignReq)>> = Vec::new();
    let zero = Rat::from_integer(0.into());
    for p in &active {
        let t = tangent_cone_poly(p, x)?;
        let mut r = Vec::new();
        for i in 0..t.nrows() {
            let Some((idx, orient)) = table.insert(&t.a.rows[i], &zero) else {
                continue; // zero row, trivially satisfied
            };
            let req = if t.eq_rows.contains(&i) {
                SignReq::Zero
            } else {
                SignReq::NonPos(orient)
            };
            r.push((idx, req));
        }
        reqs.push(r);
        tangent_pieces.push(t);
    }

    // Prune prefixes on which every piece is already violated.
    let reqs_ref = &reqs;
    let filter = move |prefix: &[i8]| -> bool {
        reqs_ref.iter().any(|piece| {
            piece
                .iter()
                .all(|(idx, req)| *idx >= prefix.len() || req.admits(prefix[*idx]))
        })
    };
    let raw = {
        let mut q = CellQuery::new(d.dim, &table);
        q.prefix_filter = Some(&filter);
        q.max_cells = max_cells;
        enumerate_cells(&q)?
    };

    let mut cells = Vec::new();
    let mut tangent_cache: BTreeMap<(usize, Vec<usize>), VCone> = BTreeMap::new();
    for Cell { signs, witness } in raw {
        let containing: Vec<usize> = (0..active.len())
            .filter(|&i| reqs[i].iter().all(|(idx, req)| req.admits(signs[*idx])))
            .collect();
        if containing.is_empty() {
            continue;
        }
        // Pool tangent-cone generators of the containing pieces at the cell,
        // then take the polar: the Fréchet cone of the union at the cell.
        let mut pooled_rays: Vec<Vector> = Vec::new();
        let mut pooled_lin: Vec<Vector> = Vec::new();
        for &i in &containing {
            let t = &tangent_pieces[i];
            let active_rows: Vec<usize> = (0..t.nrows())
                .filter(|&r| {
                    t.eq_rows.contains(&r)
                        || is_zero_vec(&t.a.rows[r])
                        || dot(&t.a.rows[r], &witness).is_zero()
                })
                .collect();
            let key = (i, active_rows.clone());
            let v = match tangent_cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let ineq: Vec<Vector> = active_rows
                        .iter()
                        .filter(|r| !t.eq_rows.contains(r))
                        .map(|&r| t.a.rows[r].clone())
                        .collect();
                    let eq: Vec<Vector> = t
                        .eq_rows
                        .iter()
                        .map(|&r| t.a.rows[r].clone())
                        .collect();
                    let cone = HPoly::cone_from_rows(ineq, eq, d.dim);
                    let v = dd_v_from_h(&cone)?;
                    tangent_cache.insert(key, v.clone());
                    v
                }
            };
            pooled_rays.extend(v.rays);
            pooled_lin.extend(v.lineality);
        }
        let pooled = VCone { dim: d.dim, rays: pooled_rays, lineality: pooled_lin };
        let frechet = crate::geometry::polar(&pooled)?;
        cells.push(SignCell { signs, witness, containing, frechet });
    }
    Ok(Stratification { dim: d.dim, table, tangent_pieces, cells })
}

/// Tangent (Bouligand) cone of the union at `x`, as a canonical cone union.
pub fn tangent_cone(d: &UnionSet, x: &[Rat]) -> Result<ConeUnion> {
    let pieces = tangent_cone_hpieces(d, x)?;
    ConeUnion::from_hcones(d.dim, &pieces)
}

/// H-form tangent cones of the pieces containing `x`.
pub fn tangent_cone_hpieces(d: &UnionSet, x: &[Rat]) -> Result<Vec<HPoly>> {
    if x.len() != d.dim {
        return Err(Error::DimensionMismatch { expected: d.dim, got: x.len() });
    }
    let mut out = Vec::new();
    for p in &d.pieces {
        if p.contains(x) {
            out.push(tangent_cone_poly(p, x)?);
        }
    }
    if out.is_empty() {
        return Err(Error::PointNotInSet);
    }
    Ok(out)
}

/// Fréchet (regular) normal cone: the polar of the tangent cone, i.e. the
/// intersection of the active pieces' convex normal cones. Always convex.
pub fn frechet_normal_cone(d: &UnionSet, x: &[Rat]) -> Result<VCone> {
    let tangents = tangent_cone_hpieces(d, x)?;
    // Polar of a union: concatenate the H-forms of the piecewise polars.
    let mut rows_ineq: Vec<Vector> = Vec::new();
    let mut rows_eq: Vec<Vector> = Vec::new();
    for t in &tangents {
        let tv = dd_v_from_h(t)?;
        rows_ineq.extend(tv.rays);
        rows_eq.extend(tv.lineality);
    }
    let h = HPoly::cone_from_rows(rows_ineq, rows_eq, d.dim);
    dd_v_from_h(&h)
}

/// Exact directional limiting normal cone `N_d(x; u)`. Empty when `u` is not
/// tangent; the plain limiting cone when `u = 0`.
pub fn dir_limiting_normal_cone(d: &UnionSet, x: &[Rat], u: &[Rat]) -> Result<ConeUnion> {
    if u.len() != d.dim {
        return Err(Error::DimensionMismatch { expected: d.dim, got: u.len() });
    }
    let s = stratify(d, x)?;
    Ok(s.directional_cone(u))
}

/// Exact limiting (Mordukhovich) normal cone `N_d(x)`.
pub fn limiting_normal_cone(d: &UnionSet, x: &[Rat]) -> Result<ConeUnion> {
    let s = stratify(d, x)?;
    Ok(s.directional_cone(&crate::rat::zeros(d.dim)))
}

/// Product upper estimate: the Cartesian product of the componentwise
/// directional cones.
pub fn product_bound(ds: &[UnionSet], xs: &[Vector], hs: &[Direction]) -> Result<ConeUnion> {
    if ds.len() != xs.len() || ds.len() != hs.len() || ds.is_empty() {
        return Err(Error::InvalidInput(
            "product_bound needs equally many sets, points and directions".into(),
        ));
    }
    let mut acc: Option<ConeUnion> = None;
    for ((d, x), h) in ds.iter().zip(xs).zip(hs) {
        let c = dir_limiting_normal_cone(d, x, h)?;
        acc = Some(match acc {
            None => c,
            Some(a) => a.product(&c)?,
        });
    }
    Ok(acc.unwrap())
}

/// One representative direction per arrangement cell of the tangent cone,
/// covering every value of the directional limiting cone.
pub fn enumerate_direction_strata(d: &UnionSet, x: &[Rat]) -> Result<Vec<(Direction, Vec<i8>)>> {
    let s = stratify(d, x)?;
    Ok(s.cells.iter().map(|c| (c.witness.clone(), c.signs.clone())).collect())
}

/// Convenience: directional cone from a prebuilt stratification plus the
/// fallback smoothness law `N = {0}` for interior directions is exercised in
/// tests through the public entry points.
pub fn to_hform_union(c: &ConeUnion) -> Result<UnionSet> {
    c.to_union_set()
}

/// Union of directional cones over all strata (plus the Fréchet cone), i.e.
/// the right-hand side of the limiting-cone decomposition over directions.
pub fn decomposition_rhs(d: &UnionSet, x: &[Rat]) -> Result<ConeUnion> {
    let s = stratify(d, x)?;
    let mut acc = ConeUnion::new(d.dim, vec![frechet_normal_cone(d, x)?]);
    for cell in &s.cells {
        if is_zero_vec(&cell.witness) {
            continue;
        }
        acc = acc.union(&s.directional_cone(&cell.witness));
    }
    Ok(acc.canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cplm, mpcc, origin};
    use crate::rat::{int, rat, vec_i64};

    fn vcone(rays: &[&[i64]], lin: &[&[i64]], n: usize) -> VCone {
        VCone::from_generators(
            rays.iter().map(|r| vec_i64(r)).collect(),
            lin.iter().map(|l| vec_i64(l)).collect(),
            n,
        )
        .unwrap()
    }

    fn cu(pieces: Vec<VCone>) -> ConeUnion {
        ConeUnion::new(2, pieces).canonicalize()
    }

    #[test]
    fn tangent_cones_of_fixtures() {
        let t = tangent_cone(&mpcc(), &origin(2)).unwrap();
        let expected = cu(vec![
            vcone(&[&[1, 0]], &[], 2),
            vcone(&[&[0, 1]], &[], 2),
        ]);
        assert!(t.eq_cone(&expected).unwrap());

        let t = tangent_cone(&cplm(), &origin(2)).unwrap();
        let expected = cu(vec![vcone(&[&[1, 0]], &[], 2), vcone(&[&[0, -1]], &[], 2)]);
        assert!(t.eq_cone(&expected).unwrap());

        // Interior of a facet: full line.
        let t = tangent_cone(&cplm(), &vec_i64(&[1, 0])).unwrap();
        assert!(t.eq_cone(&cu(vec![vcone(&[], &[&[1, 0]], 2)])).unwrap());
    }

    #[test]
    fn frechet_cones_of_fixtures() {
        let f = frechet_normal_cone(&mpcc(), &origin(2)).unwrap();
        assert_eq!(f, vcone(&[&[-1, 0], &[0, -1]], &[], 2));

        let f = frechet_normal_cone(&cplm(), &origin(2)).unwrap();
        assert_eq!(f, vcone(&[&[-1, 0], &[0, 1]], &[], 2));

        // Relative interior of the lower ray of cplm: normal is the x-axis.
        let f = frechet_normal_cone(&cplm(), &vec![int(0), int(-1)]).unwrap();
        assert_eq!(f, vcone(&[], &[&[1, 0]], 2));
    }

    #[test]
    fn directional_cones_of_fixtures() {
        let yaxis = vcone(&[], &[&[0, 1]], 2);
        let n = dir_limiting_normal_cone(&mpcc(), &origin(2), &vec_i64(&[1, 0])).unwrap();
        assert!(n.eq_cone(&cu(vec![yaxis.clone()])).unwrap());

        let n = dir_limiting_normal_cone(&cplm(), &origin(2), &vec_i64(&[1, 0])).unwrap();
        assert!(n.eq_cone(&cu(vec![yaxis])).unwrap());

        // u outside the tangent cone: empty.
        let n = dir_limiting_normal_cone(&mpcc(), &origin(2), &vec_i64(&[1, 1])).unwrap();
        assert!(n.is_empty_set());
    }

    #[test]
    fn limiting_cones_of_fixtures() {
        let n = limiting_normal_cone(&mpcc(), &origin(2)).unwrap();
        let expected = cu(vec![
            vcone(&[&[-1, 0], &[0, -1]], &[], 2),
            vcone(&[], &[&[0, 1]], 2),
            vcone(&[], &[&[1, 0]], 2),
        ]);
        assert!(n.eq_cone(&expected).unwrap());
        assert_eq!(n.pieces.len(), 3);

        let n = limiting_normal_cone(&cplm(), &origin(2)).unwrap();
        let expected = cu(vec![
            vcone(&[&[-1, 0], &[0, 1]], &[], 2),
            vcone(&[], &[&[0, 1]], 2),
            vcone(&[], &[&[1, 0]], 2),
        ]);
        assert!(n.eq_cone(&expected).unwrap());

        // Convex case: limiting = Fréchet.
        let half = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[1, 0])], vec![], 2)],
        );
        let n = limiting_normal_cone(&half, &origin(2)).unwrap();
        assert!(n.eq_cone(&cu(vec![vcone(&[&[1, 0]], &[], 2)])).unwrap());
    }

    #[test]
    fn monotonicity_and_homogeneity() {
        let d = mpcc();
        let full = limiting_normal_cone(&d, &origin(2)).unwrap();
        for u in [vec_i64(&[1, 0]), vec_i64(&[0, 1]), vec_i64(&[0, 0])] {
            let n = dir_limiting_normal_cone(&d, &origin(2), &u).unwrap();
            assert!(n.subset_of(&full).unwrap());
            let scaled: Vector = u.iter().map(|x| x * rat(7, 3)).collect();
            let n2 = dir_limiting_normal_cone(&d, &origin(2), &scaled).unwrap();
            assert_eq!(n.canonicalize(), n2.canonicalize());
        }
    }

    #[test]
    fn interior_directions_are_trivial() {
        // Halfspace {x1 <= 0} at boundary 0: direction into the interior.
        let half = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[1, 0])], vec![], 2)],
        );
        let n = dir_limiting_normal_cone(&half, &origin(2), &vec_i64(&[-1, 0])).unwrap();
        assert!(n.is_zero());
        // Boundary direction keeps the outward ray.
        let n = dir_limiting_normal_cone(&half, &origin(2), &vec_i64(&[0, 1])).unwrap();
        assert!(n.eq_cone(&cu(vec![vcone(&[&[1, 0]], &[], 2)])).unwrap());
    }

    #[test]
    fn decomposition_over_directions() {
        for d in [mpcc(), cplm()] {
            let lhs = limiting_normal_cone(&d, &origin(2)).unwrap();
            let rhs = decomposition_rhs(&d, &origin(2)).unwrap();
            assert!(lhs.eq_cone(&rhs).unwrap());
        }
    }

    #[test]
    fn strata_representatives_of_mpcc() {
        let strata = enumerate_direction_strata(&mpcc(), &origin(2)).unwrap();
        // Cells: origin, open positive x-axis, open positive y-axis.
        assert_eq!(strata.len(), 3);
        let witnesses: Vec<Vector> = strata.iter().map(|(w, _)| w.clone()).collect();
        assert!(witnesses.contains(&vec![int(0), int(0)]));
        assert!(witnesses.iter().any(|w| w[0].is_positive() && w[1].is_zero()));
        assert!(witnesses.iter().any(|w| w[1].is_positive() && w[0].is_zero()));
    }

    #[test]
    fn product_bound_equals_exact_on_product_instance() {
        // C1 = C2 = R_+ in R; x = (0,0); h = (1,0).
        let rplus = UnionSet::new(
            1,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[-1])], vec![], 1)],
        );
        let bound = product_bound(
            &[rplus.clone(), rplus.clone()],
            &[vec![int(0)], vec![int(0)]],
            &[vec![int(1)], vec![int(0)]],
        )
        .unwrap();
        // {0} x R_-.
        let expected = cu(vec![vcone(&[&[0, -1]], &[], 2)]);
        assert!(bound.eq_cone(&expected).unwrap());
        // Exact directional cone of the product set agrees here.
        let prod = rplus.product(&rplus);
        let exact = dir_limiting_normal_cone(&prod, &origin(2), &vec_i64(&[1, 0])).unwrap();
        assert!(exact.eq_cone(&bound).unwrap());
        // A component direction outside its tangent cone empties the product.
        let bound = product_bound(
            &[rplus.clone(), rplus],
            &[vec![int(0)], vec![int(0)]],
            &[vec![int(-1)], vec![int(0)]],
        )
        .unwrap();
        assert!(bound.is_empty_set());
    }

    #[test]
    fn rejects_outside_points_and_bad_dims() {
        assert_eq!(
            tangent_cone(&mpcc(), &vec_i64(&[1, 1])).unwrap_err(),
            Error::PointNotInSet
        );
        assert!(matches!(
            dir_limiting_normal_cone(&mpcc(), &origin(2), &vec![int(1)]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }
}
