//! Calculus rules for directional limiting normal cones: pre-images,
//! intersections, constraint systems, images and unions, each with its
//! qualification condition, an exact left-hand side (polyhedral data is
//! closed under every operation here) and an inclusion certificate.

use std::collections::BTreeSet;

use crate::cells::{enumerate_cells, CellQuery, RowTable};
use crate::cones::{
    dir_limiting_normal_cone, frechet_normal_cone, tangent_cone_hpieces,
};
use crate::error::{Error, Result};
use crate::geometry::{dd_v_from_h, project_out, HPoly};
use crate::linalg::Mat;
use crate::lp::{self, Constraint};
use crate::pwa::PWAMap;
use crate::rat::{dot, is_zero_vec, neg, zeros, Rat, Vector};
use crate::union::{ConeUnion, UnionSet};
use crate::verdict::{QcOutcome, QcStatus, Verdict};
use num::Zero;

/// Caller-supplied assumption certificates for rules whose hypotheses the
/// engine cannot decide from the data.
#[derive(Debug, Clone, Copy, Default)]
pub struct Certs {
    /// Calmness of the map in the reference direction.
    pub calmness: bool,
    /// Metric subregularity of the associated feasibility map.
    pub subregularity: bool,
}

/// Inner-stability certificate for image-type rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerCert {
    Semicompact,
    /// Inner semicontinuity at the supplied reference solution.
    Semicontinuous,
    /// Inner calmness at the supplied reference solution.
    InnerCalm,
}

/// `{xi : exists lambda in lam_piece with (xi, -lambda) in ngr_piece}`,
/// unioned over pieces: the image of a multiplier set under the coderivative
/// read from graph normals.
pub fn apply_coderivative(n: usize, m: usize, ngr: &UnionSet, lam: &UnionSet) -> UnionSet {
    assert_eq!(ngr.dim, n + m);
    assert_eq!(lam.dim, m);
    let mut pieces = Vec::new();
    for g in &ngr.pieces {
        for l in &lam.pieces {
            // Variables (xi, lambda).
            let mut rows = Vec::new();
            let mut b = Vector::new();
            let mut eq = BTreeSet::new();
            for i in 0..g.nrows() {
                let gx = &g.a.rows[i][..n];
                let gy = &g.a.rows[i][n..];
                let mut row = gx.to_vec();
                row.extend(neg(gy));
                if g.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(g.b[i].clone());
            }
            for i in 0..l.nrows() {
                let mut row = zeros(n);
                row.extend(l.a.rows[i].clone());
                if l.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(l.b[i].clone());
            }
            let joint = HPoly::new(Mat::new(rows, n + m), b, eq);
            pieces.push(project_out(&joint, &(n..n + m).collect::<Vec<_>>()));
        }
    }
    UnionSet::new(n, pieces).canonicalize()
}

/// `{eta : exists xi in cset with (xi, -eta) in ngr_piece}`: the dual pairing
/// used by image-type rules.
pub fn coderivative_hits(n: usize, m: usize, ngr: &UnionSet, cset: &UnionSet) -> UnionSet {
    assert_eq!(ngr.dim, n + m);
    assert_eq!(cset.dim, n);
    let mut pieces = Vec::new();
    for g in &ngr.pieces {
        for cp in &cset.pieces {
            // Variables (eta, xi).
            let mut rows = Vec::new();
            let mut b = Vector::new();
            let mut eq = BTreeSet::new();
            for i in 0..g.nrows() {
                let gx = &g.a.rows[i][..n];
                let gy = &g.a.rows[i][n..];
                let mut row = neg(gy);
                row.extend(gx.to_vec());
                if g.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(g.b[i].clone());
            }
            for i in 0..cp.nrows() {
                let mut row = zeros(m);
                row.extend(cp.a.rows[i].clone());
                if cp.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(cp.b[i].clone());
            }
            let joint = HPoly::new(Mat::new(rows, m + n), b, eq);
            pieces.push(project_out(&joint, &(m..m + n).collect::<Vec<_>>()));
        }
    }
    UnionSet::new(m, pieces).canonicalize()
}

/// A nonzero solution of `lambda_i in family_i`, `sum lambda_i = 0`, if any.
/// Families are unions of cones in a common space.
pub fn sum_to_zero_witness(families: &[UnionSet]) -> Result<Option<Vec<Vector>>> {
    let l = families.len();
    let m = families[0].dim;
    let mut combo = vec![0usize; l];
    loop {
        // Joint cone over (lambda_1, ..., lambda_l).
        let mut rows = Vec::new();
        let mut b = Vector::new();
        let mut eq = BTreeSet::new();
        let mut feasible_combo = true;
        for (k, f) in families.iter().enumerate() {
            if f.pieces.is_empty() {
                feasible_combo = false;
                break;
            }
            let piece = &f.pieces[combo[k]];
            for i in 0..piece.nrows() {
                let mut row = zeros(m * l);
                row[k * m..(k + 1) * m].clone_from_slice(&piece.a.rows[i]);
                if piece.eq_rows.contains(&i) {
                    eq.insert(rows.len());
                }
                rows.push(row);
                b.push(piece.b[i].clone());
            }
        }
        if feasible_combo {
            for j in 0..m {
                let mut row = zeros(m * l);
                for k in 0..l {
                    row[k * m + j] = Rat::from_integer(1.into());
                }
                eq.insert(rows.len());
                rows.push(row);
                b.push(Rat::zero());
            }
            let joint = HPoly::new(Mat::new(rows, m * l), b, eq);
            let v = dd_v_from_h(&joint)?;
            if let Some(gen) = v.nonzero_element() {
                let parts: Vec<Vector> = (0..l).map(|k| gen[k * m..(k + 1) * m].to_vec()).collect();
                return Ok(Some(parts));
            }
        }
        // Next combination.
        let mut k = 0;
        loop {
            if k == l {
                return Ok(None);
            }
            combo[k] += 1;
            if combo[k] < families[k].pieces.len() {
                break;
            }
            combo[k] = 0;
            k += 1;
        }
    }
}

/// A nonzero point of the intersection of two cone unions, if any.
pub fn intersection_nonzero_witness(a: &UnionSet, b: &UnionSet) -> Result<Option<Vector>> {
    for pa in &a.pieces {
        for pb in &b.pieces {
            let v = dd_v_from_h(&pa.intersect(pb))?;
            if let Some(w) = v.nonzero_element() {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Graph normal cone `N_{Gr phi}((x, phi x); (h, v))` in H-form.
fn graph_normals(phi: &PWAMap, x: &[Rat], hv: &[Rat]) -> Result<UnionSet> {
    let graph = phi.graph();
    let y = phi.eval(x)?;
    let point = crate::rat::concat(x, &y);
    dir_limiting_normal_cone(&graph, &point, hv)?.to_union_set()
}

/// `{lambda : 0 in D* phi(x; (h,v))(lambda)}` as a union of cones.
fn kernel_multipliers(phi: &PWAMap, ngr: &UnionSet) -> UnionSet {
    let n = phi.n;
    let m = phi.m;
    let mut pieces = Vec::new();
    for g in &ngr.pieces {
        // (0, -lambda) in piece: substitute the xi block by zero, negate.
        let mut rows = Vec::new();
        let mut b = Vector::new();
        for i in 0..g.nrows() {
            rows.push(neg(&g.a.rows[i][n..]));
            b.push(g.b[i].clone());
        }
        pieces.push(HPoly::new(Mat::new(rows, m), b, g.eq_rows.clone()));
    }
    UnionSet::new(m, pieces).canonicalize()
}

/// FOSCMS-type sufficient condition for directional metric subregularity of
/// `F(x) = Omega - phi(x)` at `(x, 0)` in direction `u`: over every
/// `w in D phi(x)(u)` tangent to `Omega`, multipliers satisfying
/// `0 in D* phi(x;(u,w))(lambda)` and `lambda in N_Omega(phi(x); w)` must
/// vanish. Returns the witness on failure (the condition is sufficient only).
pub fn qc_foscms(phi: &PWAMap, omega: &UnionSet, x: &[Rat], u: &[Rat]) -> Result<Verdict> {
    let y = phi.eval(x)?;
    if !omega.contains(&y) {
        return Err(Error::PointNotInSet);
    }
    let outcome = foscms_outcome(phi, omega, x, u)?;
    let v = Verdict::new(UnionSet::empty(phi.m), None)
        .with_qc(QcStatus::checked("FOSCMS", outcome))
        .with_note("pure qualification-condition evaluation; no bound computed");
    Ok(v)
}

fn foscms_outcome(phi: &PWAMap, omega: &UnionSet, x: &[Rat], u: &[Rat]) -> Result<QcOutcome> {
    let y = phi.eval(x)?;
    let Some(w) = phi.dir_deriv(x, u)? else {
        return Ok(QcOutcome::Holds);
    };
    let tangent_pieces = tangent_cone_hpieces(omega, &y)?;
    if !tangent_pieces.iter().any(|t| t.contains(&w)) {
        return Ok(QcOutcome::Holds);
    }
    let ngr = graph_normals(phi, x, &crate::rat::concat(u, &w))?;
    let lam1 = kernel_multipliers(phi, &ngr);
    let lam2 = dir_limiting_normal_cone(omega, &y, &w)?.to_union_set()?;
    match intersection_nonzero_witness(&lam1, &lam2)? {
        Some(wit) => Ok(QcOutcome::FailsWithWitness(vec![wit])),
        None => Ok(QcOutcome::Holds),
    }
}

/// Directions `v` with `(0, v)` tangent to the graph and `v` nonzero and
/// tangent to `q` at `y`: the irregular branch of pre-image-type rules.
fn irregular_branch_dirs(phi: &PWAMap, q: &UnionSet, x: &[Rat], y: &[Rat]) -> Result<Vec<Vector>> {
    let graph = phi.graph();
    let point = crate::rat::concat(x, y);
    let tg = tangent_cone_hpieces(&graph, &point)?;
    let mut table = RowTable::new();
    let n = phi.n;
    let m = phi.m;
    // Rows of the graph tangent pieces sliced at the first block = 0, plus
    // tangent rows of q, over the v space.
    for t in &tg {
        for i in 0..t.nrows() {
            let row = t.a.rows[i][n..].to_vec();
            table.insert(&row, &Rat::zero());
        }
    }
    for t in tangent_cone_hpieces(q, y)? {
        for i in 0..t.nrows() {
            table.insert(&t.a.rows[i], &Rat::zero());
        }
    }
    let cells = enumerate_cells(&CellQuery::new(m, &table))?;
    let mut out: Vec<Vector> = Vec::new();
    let tq = tangent_cone_hpieces(q, y)?;
    for c in cells {
        let v = nonzero_cell_witness(m, &table, &c.signs)?;
        let Some(v) = v else { continue };
        let zero_v = crate::rat::concat(&zeros(n), &v);
        let in_graph_tangent = tg.iter().any(|t| t.contains(&zero_v));
        let in_tq = tq.iter().any(|t| t.contains(&v));
        if in_graph_tangent && in_tq && !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// A nonzero point of the (closed) cell, when the cell is not `{0}`.
fn nonzero_cell_witness(n: usize, table: &RowTable, signs: &[i8]) -> Result<Option<Vector>> {
    let mut cons: Vec<Constraint> = Vec::new();
    let mut strict: Vec<bool> = Vec::new();
    for (&s, (a, b)) in signs.iter().zip(table.rows()) {
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
    }
    for j in 0..n {
        for dir in [Rat::from_integer(1.into()), Rat::from_integer((-1).into())] {
            let mut row = zeros(n);
            row[j] = -dir.clone();
            let mut c2 = cons.clone();
            let mut s2 = strict.clone();
            c2.push(lp::le(row, Rat::zero()));
            s2.push(true);
            if let Some(w) = lp::feasible_strict(n, &c2, &s2) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Pre-image rule: directional normal cone of `C = phi^{-1}(q)` bounded by
/// coderivative images of the directional cones of `q`. The second union
/// (over nonzero `v` with `0 in D phi(x)(v)`... direction pairs `(0, v)`) is
/// added when calmness is not certified; piecewise affine maps are calm on
/// their domains, so with PWA data that branch is empty anyway.
pub fn preimage_bound(
    phi: &PWAMap,
    q: &UnionSet,
    x: &[Rat],
    h: &[Rat],
    certs: Certs,
) -> Result<Verdict> {
    let y = phi.eval(x)?;
    if !q.contains(&y) {
        return Err(Error::PointNotInSet);
    }
    let n = phi.n;
    let m = phi.m;
    let mut bound = UnionSet::empty(n);
    if let Some(v) = phi.dir_deriv(x, h)? {
        let tangent_ok = tangent_cone_hpieces(q, &y)?.iter().any(|t| t.contains(&v));
        if tangent_ok {
            let ngr = graph_normals(phi, x, &crate::rat::concat(h, &v))?;
            let nq = dir_limiting_normal_cone(q, &y, &v)?.to_union_set()?;
            bound = bound.union(&apply_coderivative(n, m, &ngr, &nq));
        }
    }
    let mut verdict_notes: Vec<String> = Vec::new();
    if !certs.calmness {
        // PWA maps are calm on their domains; the irregular branch exists for
        // the general first-order interface and is retained for fidelity.
        for v in irregular_branch_dirs(phi, q, x, &y)? {
            let hv = crate::rat::concat(&zeros(n), &v);
            let ngr = graph_normals(phi, x, &hv)?;
            let nq = dir_limiting_normal_cone(q, &y, &v)?.to_union_set()?;
            bound = bound.union(&apply_coderivative(n, m, &ngr, &nq));
        }
        verdict_notes.push("calmness not certified: irregular branch included".into());
    }
    let c = phi.preimage_union(q);
    let exact = dir_limiting_normal_cone(&c, x, h)?.to_union_set()?;
    let mut v = Verdict::new(bound, Some(exact));
    v.qc.push(if certs.subregularity {
        QcStatus::asserted("metric subregularity of F = Q - phi")
    } else {
        QcStatus::checked("FOSCMS", foscms_outcome(phi, q, x, h)?)
    });
    for note in verdict_notes {
        v.notes.push(note);
    }
    Ok(v)
}

/// Intersection rule: Minkowski-sum bound with the sum-to-zero qualification
/// condition, exact side from the pairwise piece intersections.
pub fn intersection_bound(cs: &[UnionSet], x: &[Rat], h: &[Rat]) -> Result<Verdict> {
    if cs.is_empty() {
        return Err(Error::InvalidInput("need at least one set".into()));
    }
    let n = cs[0].dim;
    for c in cs {
        if !c.contains(x) {
            return Err(Error::PointNotInSet);
        }
    }
    let mut cones: Vec<ConeUnion> = Vec::new();
    for c in cs {
        cones.push(dir_limiting_normal_cone(c, x, h)?);
    }
    let mut bound_cone: Option<ConeUnion> = None;
    for c in &cones {
        bound_cone = Some(match bound_cone {
            None => c.clone(),
            Some(acc) => acc.minkowski(c)?,
        });
    }
    let bound = bound_cone.unwrap().to_union_set()?;

    let mut inter = cs[0].clone();
    for c in &cs[1..] {
        inter = inter.intersect(c);
    }
    let exact = dir_limiting_normal_cone(&inter, x, h)?.to_union_set()?;

    let families: Vec<UnionSet> = cones
        .iter()
        .map(|c| c.to_union_set())
        .collect::<Result<Vec<_>>>()?;
    let qc = match sum_to_zero_witness(&families)? {
        None => QcOutcome::Holds,
        Some(wit) => QcOutcome::FailsWithWitness(wit),
    };
    let _ = n;
    Ok(Verdict::new(bound, Some(exact)).with_qc(QcStatus::checked("capCQ", qc)))
}

/// Constraint-structure rule for `C = {x in P : phi(x) in Q}`.
pub fn constraint_bound(
    p_set: &UnionSet,
    phi: &PWAMap,
    q: &UnionSet,
    x: &[Rat],
    h: &[Rat],
    certs: Certs,
) -> Result<Verdict> {
    if !p_set.contains(x) {
        return Err(Error::PointNotInSet);
    }
    let y = phi.eval(x)?;
    if !q.contains(&y) {
        return Err(Error::PointNotInSet);
    }
    let n = phi.n;
    let m = phi.m;
    let np_h = dir_limiting_normal_cone(p_set, x, h)?.to_union_set()?;
    let mut bound = UnionSet::empty(n);
    let mut qc_outcome = QcOutcome::Holds;
    if let Some(v) = phi.dir_deriv(x, h)? {
        let tangent_ok = tangent_cone_hpieces(q, &y)?.iter().any(|t| t.contains(&v));
        if tangent_ok {
            let ngr = graph_normals(phi, x, &crate::rat::concat(h, &v))?;
            let nq = dir_limiting_normal_cone(q, &y, &v)?.to_union_set()?;
            let pullback = apply_coderivative(n, m, &ngr, &nq);
            bound = bound.union(&pullback.minkowski(&np_h));
            // Displayed condition: lambda1 in -D*phi(x;(h,v))(lambda2) and
            // lambda1 in N_P(x;h), lambda2 in N_Q(phi x;v) force both zero.
            qc_outcome = constraint_qc(n, m, &ngr, &np_h, &nq)?;
        }
    }
    if !certs.calmness {
        let np_0 = dir_limiting_normal_cone(p_set, x, &zeros(n))?.to_union_set()?;
        for v in irregular_branch_dirs(phi, q, x, &y)? {
            let hv = crate::rat::concat(&zeros(n), &v);
            let ngr = graph_normals(phi, x, &hv)?;
            let nq = dir_limiting_normal_cone(q, &y, &v)?.to_union_set()?;
            bound = bound.union(&apply_coderivative(n, m, &ngr, &nq).minkowski(&np_0));
        }
    }
    let c = p_set.intersect(&phi.preimage_union(q));
    let exact = dir_limiting_normal_cone(&c, x, h)?.to_union_set()?;
    let mut verdict = Verdict::new(bound, Some(exact));
    verdict.qc.push(if certs.subregularity {
        QcStatus::asserted("metric subregularity of F = P x Q - (x, phi)")
    } else {
        QcStatus::checked("constraint-structure QC", qc_outcome)
    });
    Ok(verdict)
}

fn constraint_qc(
    n: usize,
    m: usize,
    ngr: &UnionSet,
    np: &UnionSet,
    nq: &UnionSet,
) -> Result<QcOutcome> {
    // Nonzero (lambda1, lambda2): (-lambda1, -lambda2) in graph normal piece,
    // lambda1 in N_P piece, lambda2 in N_Q piece.
    for g in &ngr.pieces {
        for pp in &np.pieces {
            for qp in &nq.pieces {
                let mut rows = Vec::new();
                let mut b = Vector::new();
                let mut eq = BTreeSet::new();
                for i in 0..g.nrows() {
                    rows.push(neg(&g.a.rows[i]));
                    if g.eq_rows.contains(&i) {
                        eq.insert(rows.len() - 1);
                    }
                    b.push(g.b[i].clone());
                }
                for i in 0..pp.nrows() {
                    let mut row = pp.a.rows[i].clone();
                    row.extend(zeros(m));
                    if pp.eq_rows.contains(&i) {
                        eq.insert(rows.len());
                    }
                    rows.push(row);
                    b.push(pp.b[i].clone());
                }
                for i in 0..qp.nrows() {
                    let mut row = zeros(n);
                    row.extend(qp.a.rows[i].clone());
                    if qp.eq_rows.contains(&i) {
                        eq.insert(rows.len());
                    }
                    rows.push(row);
                    b.push(qp.b[i].clone());
                }
                let joint = HPoly::new(Mat::new(rows, n + m), b, eq);
                let v = dd_v_from_h(&joint)?;
                if let Some(w) = v.nonzero_element() {
                    return Ok(QcOutcome::FailsWithWitness(vec![
                        w[..n].to_vec(),
                        w[n..].to_vec(),
                    ]));
                }
            }
        }
    }
    Ok(QcOutcome::Holds)
}

/// Image rule: directional normal cone of `Q = phi(C)` bounded through the
/// solution map `Psi(y) = phi^{-1}(y) n C`. The union over reference
/// solutions runs over face representatives of `Psi(y)` (semicompact case) or
/// the supplied solution; the direction union runs over representatives of the
/// joint arrangement of the graph tangent sliced at `v` and the tangent cones
/// of `C`.
pub fn image_bound(
    phi: &PWAMap,
    cset: &UnionSet,
    y: &[Rat],
    v: &[Rat],
    inner: InnerCert,
    xbar: Option<&Vector>,
) -> Result<Verdict> {
    let n = phi.n;
    let m = phi.m;
    let q = phi.image_union(cset);
    if !q.contains(y) {
        return Err(Error::PointNotInImage);
    }
    // Psi(y) = phi^{-1}(y) n C as an explicit union.
    let mut psi_pieces = Vec::new();
    for mp in &phi.pieces {
        for cp in &cset.pieces {
            let mut piece = mp.domain.intersect(cp);
            let base = piece.nrows();
            let mut rows = piece.a.rows.clone();
            let mut b = piece.b.clone();
            let mut eq = piece.eq_rows.clone();
            for r in 0..m {
                rows.push(mp.a.rows[r].clone());
                b.push(&y[r] - &mp.c[r]);
                eq.insert(base + r);
            }
            piece = HPoly::new(Mat::new(rows, n), b, eq);
            pieces_push_nonempty(&mut psi_pieces, piece);
        }
    }
    let psi = UnionSet::new(n, psi_pieces).canonicalize();

    let mut notes: Vec<String> = Vec::new();
    let mut qc: Vec<QcStatus> = Vec::new();
    let solutions: Vec<Vector> = match inner {
        InnerCert::Semicompact => {
            if psi.is_bounded() {
                qc.push(QcStatus::checked(
                    "inner semicompactness (bounding box of Psi)",
                    QcOutcome::Holds,
                ));
            } else {
                qc.push(QcStatus::asserted("inner semicompactness"));
                notes.push("bounding-box confirmation failed; certificate kept as asserted".into());
            }
            psi.face_representatives()?
        }
        InnerCert::Semicontinuous | InnerCert::InnerCalm => {
            let xb = xbar.ok_or_else(|| {
                Error::InvalidInput("pointed inner certificate needs a reference solution".into())
            })?;
            if !psi.contains(xb) {
                return Err(Error::InvalidInput("reference solution is not in Psi(y)".into()));
            }
            qc.push(QcStatus::asserted(match inner {
                InnerCert::Semicontinuous => "inner semicontinuity at (y, xbar)",
                _ => "inner calmness at (y, xbar)",
            }));
            vec![xb.clone()]
        }
    };

    let mut bound = UnionSet::empty(m);
    for xb in &solutions {
        bound = bound.union(&image_bound_at(phi, cset, xb, y, v)?);
        if inner != InnerCert::InnerCalm {
            bound = bound.union(&image_irregular_at(phi, cset, xb, y)?);
        }
    }
    let exact = dir_limiting_normal_cone(&q, y, v)?.to_union_set()?;
    let mut verdict = Verdict::new(bound, Some(exact));
    verdict.qc = qc;
    verdict.notes = notes;
    Ok(verdict)
}

fn pieces_push_nonempty(pieces: &mut Vec<HPoly>, p: HPoly) {
    if !p.is_empty() {
        pieces.push(p);
    }
}

/// Union over direction strata of `{y* : D*phi(xb;(h,v))(y*) n N_C(xb;h) != empty}`.
fn image_bound_at(
    phi: &PWAMap,
    cset: &UnionSet,
    xb: &[Rat],
    y: &[Rat],
    v: &[Rat],
) -> Result<UnionSet> {
    let n = phi.n;
    let m = phi.m;
    let graph = phi.graph();
    let point = crate::rat::concat(xb, y);
    let tg = tangent_cone_hpieces(&graph, &point)?;
    let tc = tangent_cone_hpieces(cset, xb)?;
    let mut table = RowTable::new();
    for t in &tg {
        for i in 0..t.nrows() {
            // Row (a_x, a_y) sliced at second block = v: a_x . h <= -a_y . v.
            let head = t.a.rows[i][..n].to_vec();
            let off = -dot(&t.a.rows[i][n..], v);
            table.insert(&head, &off);
        }
    }
    for t in &tc {
        for i in 0..t.nrows() {
            table.insert(&t.a.rows[i], &Rat::zero());
        }
    }
    let cells = enumerate_cells(&CellQuery::new(n, &table))?;
    let mut bound = UnionSet::empty(m);
    let mut seen: Vec<Vec<i8>> = Vec::new();
    for cell in cells {
        if seen.contains(&cell.signs) {
            continue;
        }
        seen.push(cell.signs.clone());
        let h = &cell.witness;
        if !tc.iter().any(|t| t.contains(h)) {
            continue;
        }
        if phi.dir_deriv(xb, h)? != Some(v.to_vec()) {
            continue;
        }
        let ngr = graph_normals(phi, xb, &crate::rat::concat(h, v))?;
        let nc = dir_limiting_normal_cone(cset, xb, h)?.to_union_set()?;
        bound = bound.union(&coderivative_hits(n, m, &ngr, &nc));
    }
    Ok(bound)
}

/// The irregular branch of the image rule: nonzero `h` with `0 in D phi(xb)(h)`.
fn image_irregular_at(
    phi: &PWAMap,
    cset: &UnionSet,
    xb: &[Rat],
    y: &[Rat],
) -> Result<UnionSet> {
    let n = phi.n;
    let m = phi.m;
    let graph = phi.graph();
    let point = crate::rat::concat(xb, y);
    let tg = tangent_cone_hpieces(&graph, &point)?;
    let tc = tangent_cone_hpieces(cset, xb)?;
    let mut table = RowTable::new();
    let zero_v = zeros(m);
    for t in &tg {
        for i in 0..t.nrows() {
            let head = t.a.rows[i][..n].to_vec();
            table.insert(&head, &Rat::zero());
        }
    }
    for t in &tc {
        for i in 0..t.nrows() {
            table.insert(&t.a.rows[i], &Rat::zero());
        }
    }
    let cells = enumerate_cells(&CellQuery::new(n, &table))?;
    let mut bound = UnionSet::empty(m);
    for cell in cells {
        let Some(h) = nonzero_cell_witness(n, &table, &cell.signs)? else {
            continue;
        };
        if !tc.iter().any(|t| t.contains(&h)) {
            continue;
        }
        if phi.dir_deriv(xb, &h)? != Some(zero_v.clone()) {
            continue;
        }
        let ngr = graph_normals(phi, xb, &crate::rat::concat(&h, &zero_v))?;
        let nc = dir_limiting_normal_cone(cset, xb, &h)?.to_union_set()?;
        bound = bound.union(&coderivative_hits(n, m, &ngr, &nc));
    }
    Ok(bound)
}

/// Union rule: bound over the active-and-tangent index set, plus the tighter
/// refinement combining the Fréchet intersection with the directional unions.
pub fn union_bound(cs: &[UnionSet], x: &[Rat], h: &[Rat]) -> Result<Verdict> {
    if cs.is_empty() {
        return Err(Error::InvalidInput("need at least one set".into()));
    }
    let n = cs[0].dim;
    let active: Vec<usize> = (0..cs.len()).filter(|&i| cs[i].contains(x)).collect();
    if active.is_empty() {
        return Err(Error::PointNotInSet);
    }
    let mut concat_pieces = Vec::new();
    for c in cs {
        concat_pieces.extend(c.pieces.clone());
    }
    let whole = UnionSet::new(n, concat_pieces);

    let mut bound = UnionSet::empty(n);
    for &i in &active {
        let tangent = tangent_cone_hpieces(&cs[i], x)?;
        if tangent.iter().any(|t| t.contains(h)) {
            bound = bound.union(&dir_limiting_normal_cone(&cs[i], x, h)?.to_union_set()?);
        }
    }
    let exact = dir_limiting_normal_cone(&whole, x, h)?.to_union_set()?;

    // Refinement (for the plain limiting cone): Fréchet cones intersected,
    // united with the directional unions over nonzero strata of T_whole.
    let refined = if is_zero_vec(h) {
        let mut frechet_rows_ineq: Vec<Vector> = Vec::new();
        let mut frechet_rows_eq: Vec<Vector> = Vec::new();
        for &i in &active {
            let f = frechet_normal_cone(&cs[i], x)?;
            let hform = crate::geometry::dd_h_from_v(&f)?;
            for r in 0..hform.nrows() {
                if hform.eq_rows.contains(&r) {
                    frechet_rows_eq.push(hform.a.rows[r].clone());
                } else {
                    frechet_rows_ineq.push(hform.a.rows[r].clone());
                }
            }
        }
        let frechet_cap = dd_v_from_h(&HPoly::cone_from_rows(frechet_rows_ineq, frechet_rows_eq, n))?;
        let mut refined = ConeUnion::new(n, vec![frechet_cap]).to_union_set()?;
        for (u, _) in crate::cones::enumerate_direction_strata(&whole, x)? {
            if is_zero_vec(&u) {
                continue;
            }
            for &i in &active {
                let tangent = tangent_cone_hpieces(&cs[i], x)?;
                if tangent.iter().any(|t| t.contains(&u)) {
                    refined =
                        refined.union(&dir_limiting_normal_cone(&cs[i], x, &u)?.to_union_set()?);
                }
            }
        }
        refined
    } else {
        bound.clone()
    };

    let mut verdict = Verdict::new(bound, Some(exact));
    verdict.refined_bound = Some(refined);
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{mpcc, origin};
    use crate::rat::{int, vec_i64};
    use num::Signed;

    fn rplus2() -> UnionSet {
        UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(
                vec![vec_i64(&[-1, 0]), vec_i64(&[0, -1])],
                vec![],
                2,
            )],
        )
    }

    fn duplicate_map() -> PWAMap {
        PWAMap::affine(Mat::from_i64(&[&[1], &[1]]), zeros(2))
    }

    #[test]
    fn foscms_examples() {
        // phi(x) = (x, x), Omega = R^2_+, u = 1: holds.
        let v = qc_foscms(&duplicate_map(), &rplus2(), &[int(0)], &[int(1)]).unwrap();
        assert!(v.qc_all_hold());

        // phi(x) = (x, -x), u = 0: fails with an antidiagonal witness.
        let phi = PWAMap::affine(Mat::from_i64(&[&[1], &[-1]]), zeros(2));
        let v = qc_foscms(&phi, &rplus2(), &[int(0)], &[int(0)]).unwrap();
        match &v.qc[0].outcome {
            QcOutcome::FailsWithWitness(ws) => {
                let lam = &ws[0];
                // Witness re-verifies: lambda in N_Omega(0;0) = R^2_- and
                // 0 = lambda_1 - lambda_2.
                assert!(!lam[0].is_positive() && !lam[1].is_positive());
                assert_eq!(lam[0], lam[1]);
                assert!(!crate::rat::is_zero_vec(lam));
            }
            o => panic!("expected failure, got {o:?}"),
        }

        // Omega = full space: holds vacuously.
        let v = qc_foscms(
            &duplicate_map(),
            &UnionSet::full_space(2),
            &[int(0)],
            &[int(0)],
        )
        .unwrap();
        assert!(v.qc_all_hold());
    }

    #[test]
    fn preimage_rule_examples() {
        let phi = duplicate_map();
        let q = rplus2();
        // h = 0: bound = R_- = exact.
        let v = preimage_bound(&phi, &q, &[int(0)], &[int(0)], Certs::default()).unwrap();
        assert!(v.inclusion_certified());
        assert!(v.qc_all_hold());
        let rminus = UnionSet::new(
            1,
            vec![HPoly::from_ineqs(vec![(vec![int(1)], int(0))], 1)],
        );
        assert!(v.bound.eq_set(&rminus));
        assert!(v.exact.as_ref().unwrap().eq_set(&rminus));

        // h = 1: bound = {0} = exact.
        let v = preimage_bound(&phi, &q, &[int(0)], &[int(1)], Certs::default()).unwrap();
        assert!(v.bound.eq_set(&UnionSet::singleton(&[int(0)])));
        assert!(v.inclusion_certified());

        // h = -1 not tangent: exact empty, inclusion certified trivially.
        let v = preimage_bound(&phi, &q, &[int(0)], &[int(-1)], Certs::default()).unwrap();
        assert!(v.exact.as_ref().unwrap().is_empty_set());
        assert!(v.inclusion_certified());
    }

    #[test]
    fn intersection_rule_examples() {
        let c1 = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[-1, 0])], vec![], 2)],
        );
        let c2 = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[0, -1])], vec![], 2)],
        );
        let x = origin(2);
        // h = (1,0): bound = {0} + {0} x R_- = {0} x R_-.
        let v = intersection_bound(&[c1.clone(), c2.clone()], &x, &vec_i64(&[1, 0])).unwrap();
        assert!(v.qc_all_hold());
        assert!(v.inclusion_certified());
        let expected = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[0, 1])], vec![vec_i64(&[1, 0])], 2)],
        );
        assert!(v.bound.eq_set(&expected));
        assert!(v.exact.as_ref().unwrap().eq_set(&expected));

        // h = 0: bound = R_- x R_- = exact; capCQ holds.
        let v = intersection_bound(&[c1, c2], &x, &vec_i64(&[0, 0])).unwrap();
        assert!(v.qc_all_hold() && v.inclusion_certified());

        // Opposing halfspaces: capCQ fails with opposing witnesses, bound
        // still computed, inclusion certified separately.
        let left = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[1, 0])], vec![], 2)],
        );
        let right = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[-1, 0])], vec![], 2)],
        );
        let v = intersection_bound(&[left, right], &x, &vec_i64(&[0, 0])).unwrap();
        match &v.qc[0].outcome {
            QcOutcome::FailsWithWitness(ws) => {
                assert_eq!(ws.len(), 2);
                assert_eq!(crate::rat::add(&ws[0], &ws[1]), zeros(2));
                assert!(!crate::rat::is_zero_vec(&ws[0]));
            }
            o => panic!("expected capCQ failure, got {o:?}"),
        }
        assert!(v.inclusion_certified());
    }

    #[test]
    fn constraint_rule_examples() {
        // P = R_+, phi = id, Q = R_-: C = {0}; bound = R = exact.
        let p = UnionSet::new(
            1,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[-1])], vec![], 1)],
        );
        let q = UnionSet::new(
            1,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[1])], vec![], 1)],
        );
        let v = constraint_bound(
            &p,
            &PWAMap::identity(1),
            &q,
            &[int(0)],
            &[int(0)],
            Certs::default(),
        )
        .unwrap();
        assert!(v.bound.eq_set(&UnionSet::full_space(1)));
        assert!(v.exact.as_ref().unwrap().eq_set(&UnionSet::full_space(1)));
        assert!(v.inclusion_certified());

        // P = R^2, phi = id, Q = MPCC at h = (1,0): reduces to the pre-image
        // case with bound {0} x R.
        let v = constraint_bound(
            &UnionSet::full_space(2),
            &PWAMap::identity(2),
            &mpcc(),
            &origin(2),
            &vec_i64(&[1, 0]),
            Certs::default(),
        )
        .unwrap();
        let yaxis = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![], vec![vec_i64(&[1, 0])], 2)],
        );
        assert!(v.bound.eq_set(&yaxis));
        assert!(v.inclusion_certified());

        // P = {x2 = 0}, phi = first coordinate, Q = R_+: bound = {0} x R.
        let p = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![], vec![vec_i64(&[0, 1])], 2)],
        );
        let phi = PWAMap::affine(Mat::from_i64(&[&[1, 0]]), zeros(1));
        let q = UnionSet::new(
            1,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[-1])], vec![], 1)],
        );
        let v = constraint_bound(&p, &phi, &q, &origin(2), &vec_i64(&[1, 0]), Certs::default())
            .unwrap();
        let yaxis = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![], vec![vec_i64(&[1, 0])], 2)],
        );
        assert!(v.bound.eq_set(&yaxis));
        assert!(v.exact.as_ref().unwrap().eq_set(&yaxis));
        assert!(v.inclusion_certified());
    }

    #[test]
    fn image_rule_examples() {
        // phi(x1,x2) = x1 + x2, C = R^2_+, y = 0, v = 1, inner calm at 0.
        let phi = PWAMap::affine(Mat::from_i64(&[&[1, 1]]), zeros(1));
        let c = rplus2();
        let v = image_bound(
            &phi,
            &c,
            &[int(0)],
            &[int(1)],
            InnerCert::InnerCalm,
            Some(&origin(2)),
        )
        .unwrap();
        assert!(v.bound.eq_set(&UnionSet::singleton(&[int(0)])));
        assert!(v.inclusion_certified());

        // Same with v = 0: bound = R_- = exact.
        let v = image_bound(
            &phi,
            &c,
            &[int(0)],
            &[int(0)],
            InnerCert::Semicompact,
            None,
        )
        .unwrap();
        let rminus = UnionSet::new(
            1,
            vec![HPoly::from_ineqs(vec![(vec![int(1)], int(0))], 1)],
        );
        let _ = rminus;
        let expected = UnionSet::new(
            1,
            vec![HPoly::cone_from_rows(vec![vec_i64(&[1])], vec![], 1)],
        );
        assert!(v.exact.as_ref().unwrap().eq_set(&expected));
        assert!(v.bound.eq_set(&expected));
        assert!(v.inclusion_certified());

        // Identity sanity: bound = exact.
        let v = image_bound(
            &PWAMap::identity(2),
            &mpcc(),
            &origin(2),
            &vec_i64(&[1, 0]),
            InnerCert::InnerCalm,
            Some(&origin(2)),
        )
        .unwrap();
        assert!(v.inclusion_certified());
        assert!(v.bound.eq_set(v.exact.as_ref().unwrap()));
    }

    #[test]
    fn union_rule_examples() {
        let pieces: Vec<UnionSet> = mpcc()
            .pieces
            .iter()
            .map(|p| UnionSet::new(2, vec![p.clone()]))
            .collect();
        // h = (1,0): only the first piece is tangent-active.
        let v = union_bound(&pieces, &origin(2), &vec_i64(&[1, 0])).unwrap();
        let yaxis = UnionSet::new(
            2,
            vec![HPoly::cone_from_rows(vec![], vec![vec_i64(&[1, 0])], 2)],
        );
        assert!(v.bound.eq_set(&yaxis));
        assert!(v.inclusion_certified());

        // h = 0: the plain bound is strictly larger than exact; the refined
        // bound is exact.
        let v = union_bound(&pieces, &origin(2), &vec_i64(&[0, 0])).unwrap();
        let exact = v.exact.as_ref().unwrap();
        assert!(v.inclusion_certified());
        let refined = v.refined_bound.as_ref().unwrap();
        assert!(refined.subset_of(&v.bound));
        assert!(refined.eq_set(exact));
        assert!(!v.bound.subset_of(exact), "classical bound should be strictly larger");

        // Single piece: bound = exact.
        let single = union_bound(&pieces[..1], &origin(2), &vec_i64(&[0, 0])).unwrap();
        assert!(single.bound.eq_set(single.exact.as_ref().unwrap()));
    }
}
