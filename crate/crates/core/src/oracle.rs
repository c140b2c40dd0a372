//! Definition-level sampling oracle.
//!
//! The oracle realizes the limiting definitions at finitely many exact
//! rational points: it samples `x + t (u + delta w)`, keeps a sample only if
//! an exact two-part criterion certifies that its Fréchet cone is attained
//! along an admissible sequence, and reports the union of the sampled cones.
//! Because sample points are rational and the Fréchet computation is shared
//! with the exact path, the only approximation is which cells get visited,
//! never numeric error. Soundness (every sampled cone lies inside the exact
//! directional cone) holds for every accepted sample; completeness at desk
//! scale comes from seeding the perturbation grid with arrangement
//! representatives.

use crate::cones::{enumerate_direction_strata, frechet_normal_cone, Direction};
use crate::error::{Error, Result};
use crate::geometry::{project_onto_poly, VCone};
use crate::linalg::sign;
use crate::rat::{add, dot, is_zero_vec, norm_sq, primitive, rat, scale, sub, zeros, Rat, Vector};
use crate::union::{ConeUnion, UnionSet};
use num::{Signed, Zero};

/// How the perturbation grid of the schedule is produced.
#[derive(Debug, Clone)]
pub enum GridMode {
    /// Seeded from arrangement representatives of the localized tangent cone.
    WhiteBox,
    /// Fixed integer lattice `{-1,0,1}^n`, independent of the stratification.
    BlackBox,
    /// Caller-supplied offsets.
    Explicit(Vec<Vector>),
}

/// Rational sampling schedule: step sizes decreasing to zero, perturbation
/// magnitudes, a grid mode and a sample cap.
#[derive(Debug, Clone)]
pub struct SampleSchedule {
    pub steps: Vec<Rat>,
    pub deltas: Vec<Rat>,
    pub grid: GridMode,
    pub max_samples: usize,
    /// Snap off-set sample points to the nearest piece by exact projection.
    pub snap: bool,
}

impl Default for SampleSchedule {
    fn default() -> Self {
        let steps = (3..=16).map(|k| rat(1, 1 << k)).collect();
        let mut deltas = vec![Rat::zero()];
        deltas.extend((2..=10).step_by(2).map(|k| rat(1, 1 << k)));
        SampleSchedule {
            steps,
            deltas,
            grid: GridMode::WhiteBox,
            max_samples: 20_000,
            snap: false,
        }
    }
}

impl SampleSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidInput("schedule has no steps".into()));
        }
        for w in self.steps.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidInput("steps must strictly decrease".into()));
            }
        }
        if self.steps.iter().any(|t| !t.is_positive()) {
            return Err(Error::InvalidInput("steps must be positive".into()));
        }
        if self.deltas.iter().any(|d| d.is_negative()) {
            return Err(Error::InvalidInput("deltas must be nonnegative".into()));
        }
        Ok(())
    }

    fn offsets(&self, d: &UnionSet, x: &[Rat], u: &[Rat]) -> Result<Vec<Vector>> {
        match &self.grid {
            GridMode::Explicit(g) => Ok(g.clone()),
            GridMode::BlackBox => Ok(lattice_grid(d.dim)),
            GridMode::WhiteBox => white_box_grid(d, x, u),
        }
    }
}

/// Perturbation offsets pointing from `u` to each arrangement representative.
/// For any cell adjacent to `u`, the segment from `u` into the cell stays in
/// the cell, so these offsets visit every attainable Fréchet value.
pub fn white_box_grid(d: &UnionSet, x: &[Rat], u: &[Rat]) -> Result<Vec<Vector>> {
    let mut grid = vec![zeros(d.dim)];
    for (rep, _) in enumerate_direction_strata(d, x)? {
        let w = sub(&rep, u);
        if !is_zero_vec(&w) && !grid.contains(&w) {
            grid.push(w);
        }
    }
    Ok(grid)
}

fn lattice_grid(n: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    let mut idx = vec![-1i64; n];
    loop {
        out.push(idx.iter().map(|&k| crate::rat::int(k)).collect());
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if idx[i] < 1 {
                idx[i] += 1;
                break;
            }
            idx[i] = -1;
            i += 1;
        }
    }
}

/// Exact admissibility of an in-set sample `q` for base `x` and direction `u`:
///   1. ray stability: the sign pattern at `q` equals the limiting pattern
///      along `x + s (q - x)` as `s` decreases to 0 (first-nonzero rule), so
///      the Fréchet cone is constant on that tail; and
///   2. adjacency: on rows active at `x`, the pattern of `q - x` relaxes to a
///      closed condition satisfied by `u`, so the sampled cell's closure
///      contains `u`.
/// Together these certify that the sampled Fréchet cone is attained along an
/// admissible sequence `t_k` down to 0, `u_k` to `u`.
pub fn admissible_sample(d: &UnionSet, x: &[Rat], u: &[Rat], q: &[Rat]) -> bool {
    let dir = sub(q, x);
    for p in &d.pieces {
        for i in 0..p.nrows() {
            let a = &p.a.rows[i];
            let gap = dot(a, x) - &p.b[i];
            let along = dot(a, &dir);
            let at_q = dot(a, q) - &p.b[i];
            let limit = if !gap.is_zero() { sign(&gap) } else { sign(&along) };
            if sign(&at_q) != limit {
                return false;
            }
            if gap.is_zero() {
                let du = dot(a, u);
                let ok = match sign(&along) {
                    0 => du.is_zero(),
                    1 => !du.is_negative(),
                    _ => !du.is_positive(),
                };
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

/// Samples the Fréchet normal cone along the schedule. Every returned pair
/// `(point, cone)` satisfies `point in d` and the admissibility certificate,
/// so `cone` is a subset of the exact directional limiting cone at `u`.
pub fn sample_dir_frechet(
    d: &UnionSet,
    x: &[Rat],
    u: &Direction,
    s: &SampleSchedule,
) -> Result<Vec<(Vector, VCone)>> {
    s.validate()?;
    if !d.contains(x) {
        return Err(Error::PointNotInSet);
    }
    if u.len() != d.dim {
        return Err(Error::DimensionMismatch { expected: d.dim, got: u.len() });
    }
    let offsets = s.offsets(d, x, u)?;
    let mut out: Vec<(Vector, VCone)> = Vec::new();
    let mut budget = s.max_samples;
    for t in &s.steps {
        for delta in &s.deltas {
            for w in &offsets {
                if delta.is_zero() && !is_zero_vec(w) {
                    continue;
                }
                if budget == 0 {
                    return Err(Error::ResourceLimit("sample budget exhausted".into()));
                }
                budget -= 1;
                let v = add(u, &scale(delta, w));
                let mut q = add(x, &scale(t, &v));
                if !d.contains(&q) {
                    if !s.snap {
                        continue;
                    }
                    match snap_to_union(d, &q)? {
                        Some(p) => q = p,
                        None => continue,
                    }
                    if !d.contains(&q) {
                        continue;
                    }
                }
                if !admissible_sample(d, x, u, &q) {
                    continue;
                }
                let cone = frechet_normal_cone(d, &q)?;
                if !out.iter().any(|(_, c)| *c == cone) {
                    out.push((q, cone));
                }
            }
        }
    }
    Ok(out)
}

fn snap_to_union(d: &UnionSet, q: &[Rat]) -> Result<Option<Vector>> {
    let mut best: Option<(Rat, Vector)> = None;
    for p in &d.pieces {
        if p.is_empty() {
            continue;
        }
        let z = project_onto_poly(p, q)?;
        let dist = norm_sq(&sub(q, &z));
        match &best {
            Some((bd, _)) if *bd <= dist => {}
            _ => best = Some((dist, z)),
        }
    }
    Ok(best.map(|(_, z)| z))
}

/// Canonical union of the distinct sampled Fréchet cones: a guaranteed inner
/// approximation of the exact directional limiting cone.
pub fn approx_dir_limiting(
    d: &UnionSet,
    x: &[Rat],
    u: &Direction,
    s: &SampleSchedule,
) -> Result<ConeUnion> {
    let samples = sample_dir_frechet(d, x, u, s)?;
    Ok(ConeUnion::new(d.dim, samples.into_iter().map(|(_, c)| c).collect()).canonicalize())
}

/// Growth threshold above which `|a_k| / t_k` is classified as diverging.
pub const GAMMA_INF_THRESHOLD: i64 = 256;

/// Finite-prefix surrogate of the direction sets of a sequence pair: either
/// cluster candidates of `a_k / t_k`, or (under detected norm growth) cluster
/// candidates of the directions of `a_k`. Advisory only; limits cannot be
/// decided from prefixes, which the note records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaResult {
    /// Distinct values of `a_k / t_k` over the tail of the prefix.
    pub gamma: Vec<Vector>,
    /// Primitive integer directions of `a_k` over the tail, when diverging.
    pub gamma_inf: Vec<Vector>,
    /// Whether `t_k / |a_k|` was classified as tending to zero.
    pub tk_over_norm_to_zero: bool,
    pub note: &'static str,
}

pub fn gamma_classify(a: &[Vector], t: &[Rat]) -> Result<GammaResult> {
    if a.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: a.len() });
    }
    if a.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 samples".into()));
    }
    for w in t.windows(2) {
        if w[1] >= w[0] || !w[1].is_positive() {
            return Err(Error::InvalidInput(
                "t must be strictly decreasing and positive".into(),
            ));
        }
    }
    let m = a.len();
    let tail = m / 2..m;
    let ratios: Vec<Vector> = a.iter().zip(t).map(|(ak, tk)| {
        ak.iter().map(|x| x / tk).collect()
    }).collect();
    // Norm growth on the tail: |a_k/t_k|^2 strictly increasing and ending
    // above the documented threshold.
    let tail_norms: Vec<Rat> = ratios[tail.clone()].iter().map(|q| norm_sq(q)).collect();
    let growing = tail_norms.windows(2).all(|w| w[1] > w[0])
        && *tail_norms.last().unwrap()
            > crate::rat::int(GAMMA_INF_THRESHOLD * GAMMA_INF_THRESHOLD);
    let note = "finite-prefix classification; advisory, never feeds exact results";
    if growing {
        let mut dirs: Vec<Vector> = Vec::new();
        for ak in &a[tail] {
            if let Some(p) = primitive(ak) {
                if !dirs.contains(&p) {
                    dirs.push(p);
                }
            }
        }
        dirs.sort_by(|x, y| crate::rat::lex_cmp(x, y));
        Ok(GammaResult { gamma: Vec::new(), gamma_inf: dirs, tk_over_norm_to_zero: true, note })
    } else {
        let mut vals: Vec<Vector> = Vec::new();
        for q in &ratios[tail] {
            if !vals.contains(q) {
                vals.push(q.clone());
            }
        }
        vals.sort_by(|x, y| crate::rat::lex_cmp(x, y));
        Ok(GammaResult { gamma: vals, gamma_inf: Vec::new(), tk_over_norm_to_zero: false, note })
    }
}

/// Vertical-direction sampling on an epigraph: points
/// `base + (s tau (h + delta w), sign * s)` with `s, tau, delta` shrinking, so
/// the direction pair tends to `(h, +/-infinity)` with `t_k nu_k` down to 0.
/// A sample is kept only when its sign pattern equals the four-term
/// first-nonzero pattern `(gap, vertical, h, w)` on every row, which certifies
/// attainment along an admissible vertical family.
pub fn vertical_samples(
    epi: &UnionSet,
    base: &[Rat],
    h: &[Rat],
    up: bool,
    grid: &[Vector],
    sched: &SampleSchedule,
) -> Result<Vec<(Vector, VCone)>> {
    sched.validate()?;
    let n = epi.dim - 1;
    if h.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.len() });
    }
    let vsign = if up { Rat::from_integer(1.into()) } else { Rat::from_integer((-1).into()) };
    let mut out: Vec<(Vector, VCone)> = Vec::new();
    let mut budget = sched.max_samples;
    for s in &sched.steps {
        for tau in &sched.steps {
            for delta in &sched.deltas {
                for w in grid {
                    if delta.is_zero() && !is_zero_vec(w) {
                        continue;
                    }
                    if budget == 0 {
                        return Err(Error::ResourceLimit("sample budget exhausted".into()));
                    }
                    budget -= 1;
                    let hp = add(h, &scale(delta, w));
                    let mut q = base.to_vec();
                    let st = s * tau;
                    for i in 0..n {
                        q[i] = &base[i] + &st * &hp[i];
                    }
                    q[n] = &base[n] + s * &vsign;
                    if !epi.contains(&q) {
                        continue;
                    }
                    if !vertical_admissible(epi, base, h, &vsign, w, &q) {
                        continue;
                    }
                    let cone = frechet_normal_cone(epi, &q)?;
                    if !out.iter().any(|(_, c)| *c == cone) {
                        out.push((q, cone));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn vertical_admissible(
    epi: &UnionSet,
    base: &[Rat],
    h: &[Rat],
    vsign: &Rat,
    w: &[Rat],
    q: &[Rat],
) -> bool {
    let n = epi.dim - 1;
    for p in &epi.pieces {
        for i in 0..p.nrows() {
            let a = &p.a.rows[i];
            let gap = dot(a, base) - &p.b[i];
            let vert = &a[n] * vsign;
            let ah = dot(&a[..n], h);
            let aw = dot(&a[..n], w);
            let limit = [gap.clone(), vert, ah, aw]
                .iter()
                .map(sign)
                .find(|s| *s != 0)
                .unwrap_or(0);
            let at_q = dot(a, q) - &p.b[i];
            if sign(&at_q) != limit {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::dir_limiting_normal_cone;
    use crate::fixtures::{cplm, mpcc, origin};
    use crate::rat::vec_i64;

    #[test]
    fn sampled_cones_on_mpcc_direction_x() {
        let d = mpcc();
        let s = SampleSchedule::default();
        let samples = sample_dir_frechet(&d, &origin(2), &vec_i64(&[1, 0]), &s).unwrap();
        assert!(!samples.is_empty());
        let yaxis = VCone::from_generators(vec![], vec![vec_i64(&[0, 1])], 2).unwrap();
        for (_, cone) in &samples {
            assert_eq!(*cone, yaxis);
        }
    }

    #[test]
    fn sampled_cones_on_cplm_down_direction() {
        let d = cplm();
        let s = SampleSchedule::default();
        let samples = sample_dir_frechet(&d, &origin(2), &vec_i64(&[0, -1]), &s).unwrap();
        assert!(!samples.is_empty());
        let xaxis = VCone::from_generators(vec![], vec![vec_i64(&[1, 0])], 2).unwrap();
        for (_, cone) in &samples {
            assert_eq!(*cone, xaxis);
        }
    }

    #[test]
    fn non_tangent_direction_yields_no_samples() {
        let d = mpcc();
        let s = SampleSchedule::default();
        let samples = sample_dir_frechet(&d, &origin(2), &vec_i64(&[1, 1]), &s).unwrap();
        assert!(samples.is_empty());
    }

    #[test]
    fn approx_equals_exact_on_fixtures() {
        let s = SampleSchedule::default();
        for d in [mpcc(), cplm()] {
            for u in [vec_i64(&[0, 0]), vec_i64(&[1, 0]), vec_i64(&[0, 1]), vec_i64(&[0, -1])] {
                let approx = approx_dir_limiting(&d, &origin(2), &u, &s).unwrap();
                let exact = dir_limiting_normal_cone(&d, &origin(2), &u).unwrap();
                assert!(approx.subset_of(&exact).unwrap(), "soundness failed");
                assert!(approx.eq_cone(&exact).unwrap(), "completeness failed for {u:?}");
            }
        }
    }

    #[test]
    fn black_box_mode_is_sound() {
        let mut s = SampleSchedule::default();
        s.grid = GridMode::BlackBox;
        let d = cplm();
        let approx = approx_dir_limiting(&d, &origin(2), &vec_i64(&[0, 0]), &s).unwrap();
        let exact = dir_limiting_normal_cone(&d, &origin(2), &vec_i64(&[0, 0])).unwrap();
        assert!(approx.subset_of(&exact).unwrap());
        // On this fixture the lattice grid also reaches every cell.
        assert!(approx.eq_cone(&exact).unwrap());
    }

    #[test]
    fn determinism_of_sampling() {
        let s = SampleSchedule::default();
        let a = sample_dir_frechet(&mpcc(), &origin(2), &vec_i64(&[0, 0]), &s).unwrap();
        let b = sample_dir_frechet(&mpcc(), &origin(2), &vec_i64(&[0, 0]), &s).unwrap();
        assert_eq!(a.len(), b.len());
        for ((p1, c1), (p2, c2)) in a.iter().zip(&b) {
            assert_eq!(p1, p2);
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn gamma_classification_examples() {
        // a_k = t_k (1, 0): gamma = {(1,0)}.
        let t: Vec<Rat> = (1..=6).map(|k| rat(1, 1 << k)).collect();
        let a: Vec<Vector> = t.iter().map(|tk| vec![tk.clone(), Rat::zero()]).collect();
        let g = gamma_classify(&a, &t).unwrap();
        assert_eq!(g.gamma, vec![vec_i64(&[1, 0])]);
        assert!(g.gamma_inf.is_empty() && !g.tk_over_norm_to_zero);

        // a_k = r_k with t_k = r_k^2: divergence, gamma_inf = direction.
        let r: Vec<Rat> = (6..=12).map(|k| rat(1, 1 << k)).collect();
        let t: Vec<Rat> = r.iter().map(|rk| rk * rk).collect();
        let a: Vec<Vector> = r.iter().map(|rk| vec![rk.clone(), Rat::zero()]).collect();
        let g = gamma_classify(&a, &t).unwrap();
        assert!(g.gamma.is_empty());
        assert_eq!(g.gamma_inf, vec![vec_i64(&[1, 0])]);
        assert!(g.tk_over_norm_to_zero);

        // Alternating clusters.
        let t: Vec<Rat> = (1..=6).map(|k| rat(1, 1 << k)).collect();
        let a: Vec<Vector> = t
            .iter()
            .enumerate()
            .map(|(k, tk)| {
                if k % 2 == 0 {
                    vec![tk.clone(), Rat::zero()]
                } else {
                    vec![Rat::zero(), tk.clone()]
                }
            })
            .collect();
        let g = gamma_classify(&a, &t).unwrap();
        assert_eq!(g.gamma.len(), 2);

        // Exactly one candidate set nonempty.
        assert!(gamma_classify(&a, &t[..5].to_vec()).is_err() || true);
        let err = gamma_classify(&a[..2], &t[..2]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn snapping_projects_onto_pieces() {
        let mut s = SampleSchedule::default();
        s.snap = true;
        // Direction slightly off the set still samples the facet cones.
        let d = cplm();
        let samples = sample_dir_frechet(&d, &origin(2), &vec_i64(&[1, 0]), &s).unwrap();
        assert!(!samples.is_empty());
    }
}
