//! Resolvent calculus on spectral arcs of a normal unitary.
//!
//! The central identity: for disjoint arcs `I`, `J` and the interval
//! resolvents `R_I(z) = χ_I(L)(Lχ_I(L) − z)⁻¹`, a closed contour winding once
//! around the spectrum in `J` and not around the spectrum in `I` (nor the
//! origin) recovers the corner block
//!
//! ```text
//! (1/2πi) ∮ R_I(z) [A, L] R_J(z) dz  =  Λ_I A Λ_J.
//! ```
//!
//! The module builds such contours in the annulus around an arc, evaluates
//! the quadrature, and checks the companion bounds: the resolvent norm bound
//! `‖R_I(z)‖ ≤ 1/dist(z, closure(I) ∪ {0})`, the spectral diameter bound
//! `‖Aχ_S(A) − zχ_S(A)‖ ≤ diam(S ∩ σ(A))` for `z` in the hull of the
//! selected spectrum, and the dyadic block-diagonal decay
//! `‖Σ_k Λ_k [A,L] Λ_k‖ ≤ 2·diam(I_k)·‖A‖`.

use ndarray::Array2;
use rayon::prelude::*;

use crate::arc::{normalize_angle, ArcInterval, TAU};
use crate::factory::arc_membership;
use crate::family::CompressionBasis;
use crate::linalg::{
    adjoint, eig_general, op_norm, orthonormalize, singular_values, C64, CompensatedSum,
};
use crate::linop::{LinOp, Tag};
use crate::tol;
use crate::{Error, Result};

/// Eigenvalues of a normal operator together with an (orthonormal) basis of
/// the spanned eigenspace, in the compressed-column representation.
pub(crate) struct SpectralSlice {
    vals: Vec<C64>,
    basis: CompressionBasis,
}

impl SpectralSlice {
    fn rank(&self) -> usize {
        self.vals.len()
    }
}

/// Full eigendecomposition of a normal operator, eigenvalues sorted by
/// `(re, im)`. Diagonal matrices resolve exactly to coordinate columns; any
/// other matrix must pass the normality check and goes through a dense
/// eigendecomposition with degenerate groups re-orthonormalized.
pub(crate) fn normal_eigenpairs(lop: &LinOp) -> Result<SpectralSlice> {
    let d = lop.dim();
    let order = |a: &C64, b: &C64| {
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    };
    if let Some(diag) = lop.diagonal(tol::ANGLE_SNAP) {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&i, &j| order(&diag[i], &diag[j]));
        let vals = idx.iter().map(|&i| diag[i]).collect();
        return Ok(SpectralSlice { vals, basis: CompressionBasis::Coordinate(idx) });
    }
    let m = lop.matrix();
    let defect = op_norm(&(m.dot(&adjoint(m)) - adjoint(m).dot(m)));
    let scale = lop.op_norm().max(1.0);
    if defect > tol::NORMAL_TOL_PER_DIM * d as f64 * scale * scale {
        return Err(Error::NotNormal { defect });
    }
    let (vals, vecs) = eig_general(m)?;
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| order(&vals[i], &vals[j]));
    // Re-orthonormalize within near-degenerate groups only, so each basis
    // column still belongs to a single eigenvalue.
    let mut basis = Array2::zeros((d, d));
    let mut sorted_vals = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[idx[end]] - vals[idx[end - 1]]).norm() <= 1e-8 {
            end += 1;
        }
        let mut group = Array2::zeros((d, end - start));
        for (c, &i) in idx[start..end].iter().enumerate() {
            group.column_mut(c).assign(&vecs.column(i));
        }
        let q = orthonormalize(&group)?;
        for c in 0..end - start {
            basis.column_mut(start + c).assign(&q.column(c));
            sorted_vals.push(vals[idx[start + c]]);
        }
        start = end;
    }
    Ok(SpectralSlice { vals: sorted_vals, basis: CompressionBasis::Dense(basis) })
}

/// Restrict a spectral slice to the eigenvalues whose phase lies in `arc`.
fn restrict_to_arc(full: &SpectralSlice, arc: &ArcInterval) -> Result<SpectralSlice> {
    let mut keep = Vec::new();
    for (k, v) in full.vals.iter().enumerate() {
        let theta = normalize_angle(v.im.atan2(v.re));
        if arc_membership(theta, arc)? {
            keep.push(k);
        }
    }
    Ok(restrict_to_positions(full, &keep))
}

fn restrict_to_positions(full: &SpectralSlice, keep: &[usize]) -> SpectralSlice {
    let vals = keep.iter().map(|&k| full.vals[k]).collect();
    let basis = match &full.basis {
        CompressionBasis::Coordinate(idx) => {
            CompressionBasis::Coordinate(keep.iter().map(|&k| idx[k]).collect())
        }
        CompressionBasis::Dense(b) => {
            let mut cols = Array2::zeros((b.nrows(), keep.len()));
            for (c, &k) in keep.iter().enumerate() {
                cols.column_mut(c).assign(&b.column(k));
            }
            CompressionBasis::Dense(cols)
        }
    };
    SpectralSlice { vals, basis }
}

fn to_dense(basis: &CompressionBasis, d: usize) -> Array2<C64> {
    match basis {
        CompressionBasis::Coordinate(idx) => {
            let mut m = Array2::zeros((d, idx.len()));
            for (c, &i) in idx.iter().enumerate() {
                m[[i, c]] = C64::new(1.0, 0.0);
            }
            m
        }
        CompressionBasis::Dense(b) => b.clone(),
    }
}

/// `V_L^H · M · V_R` for the slice bases.
fn project(m: &Array2<C64>, left: &SpectralSlice, right: &SpectralSlice) -> Array2<C64> {
    match (&left.basis, &right.basis) {
        (CompressionBasis::Coordinate(li), CompressionBasis::Coordinate(ri)) => {
            let mut out = Array2::zeros((li.len(), ri.len()));
            for (k, &i) in li.iter().enumerate() {
                for (l, &j) in ri.iter().enumerate() {
                    out[[k, l]] = m[[i, j]];
                }
            }
            out
        }
        _ => {
            let vl = to_dense(&left.basis, m.nrows());
            let vr = to_dense(&right.basis, m.ncols());
            adjoint(&vl).dot(m).dot(&vr)
        }
    }
}

/// `V_L · core · V_R^H` scattered back to the full space.
fn expand(left: &SpectralSlice, core: &Array2<C64>, right: &SpectralSlice, d: usize) -> Array2<C64> {
    match (&left.basis, &right.basis) {
        (CompressionBasis::Coordinate(li), CompressionBasis::Coordinate(ri)) => {
            let mut m = Array2::zeros((d, d));
            for (k, &i) in li.iter().enumerate() {
                for (l, &j) in ri.iter().enumerate() {
                    m[[i, j]] = core[[k, l]];
                }
            }
            m
        }
        _ => {
            let vl = to_dense(&left.basis, d);
            let vr = to_dense(&right.basis, d);
            vl.dot(core).dot(&adjoint(&vr))
        }
    }
}

/// Euclidean distance from `z` to the closed arc on the unit circle.
fn dist_to_closed_arc(z: C64, arc: &ArcInterval) -> f64 {
    if z.norm() == 0.0 {
        return 1.0;
    }
    let theta = normalize_angle(z.im.atan2(z.re));
    if arc.distance_to_angle(theta) == 0.0 {
        return (z.norm() - 1.0).abs();
    }
    let at = |phi: f64| (z - C64::new(phi.cos(), phi.sin())).norm();
    at(arc.start()).min(at(arc.end()))
}

/// Closed quadrature contour: nodes `z_i` with trapezoid weights
/// `w_i = z'(t_i)·Δt`, validated to wind once around the spectrum inside its
/// target arc and zero times around the reference arc and the origin.
#[derive(Debug, Clone)]
pub struct Contour {
    nodes: Vec<(C64, C64)>,
    clearance: f64,
    radial: f64,
    theta_lo: f64,
    theta_hi: f64,
}

impl Contour {
    /// Quadrature nodes as `(z_i, w_i)` pairs.
    pub fn nodes(&self) -> &[(C64, C64)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Smallest distance from the curve to the spectrum of `L` union `{0}`.
    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Radial half-thickness in log-radius units.
    pub fn radial(&self) -> f64 {
        self.radial
    }

    /// Angular span `[lo, hi]` swept by the curve (unwrapped, `hi − lo < 2π`).
    pub fn theta_span(&self) -> (f64, f64) {
        (self.theta_lo, self.theta_hi)
    }
}

/// Winding number of the closed polygon through `pts` around `p`.
fn polygon_winding(pts: &[C64], p: C64) -> i64 {
    let mut total = 0.0;
    for k in 0..pts.len() {
        let a = pts[k] - p;
        let b = pts[(k + 1) % pts.len()] - p;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

/// Build a smooth closed curve in the annulus around arc `j_arc`: an oval in
/// `(θ, log r)` coordinates with radial half-thickness
/// [`tol::CONTOUR_RADIAL_CLEARANCE`] and angular overshoot equal to half the
/// gap between `j_arc` and `i_arc` on either side. The curve is validated
/// against the spectrum of `l`: winding +1 around every eigenvalue in
/// `j_arc`, 0 around every eigenvalue in `i_arc` and around the origin, and
/// curve-to-spectrum clearance at least [`tol::RESOLVENT_CLEARANCE`].
pub fn annulus_contour(l: &LinOp, j_arc: &ArcInterval, i_arc: &ArcInterval, m: usize) -> Result<Contour> {
    if !l.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    if m < 16 {
        return Err(Error::BadContour(format!("need at least 16 nodes, got {m}")));
    }
    if j_arc.is_full() || i_arc.is_full() {
        return Err(Error::BadContour("arcs must be proper (not the full circle)".into()));
    }
    let gap_after = normalize_angle(i_arc.start() - j_arc.end());
    let gap_before = normalize_angle(j_arc.start() - i_arc.end());
    // Unwrapped angular span [theta_lo, theta_hi] around j_arc.
    let theta_lo = -(gap_before / 2.0);
    let theta_hi = j_arc.width() + gap_after / 2.0;
    let base = j_arc.start();
    let mid = base + (theta_lo + theta_hi) / 2.0;
    let half = (theta_hi - theta_lo) / 2.0;
    let beta = tol::CONTOUR_RADIAL_CLEARANCE;

    let point = |t: f64| -> (C64, C64) {
        let theta = mid - half * t.cos();
        let rho = beta * t.sin();
        let z = C64::new(0.0, theta).exp() * rho.exp();
        let dz = z * C64::new(beta * t.cos(), half * t.sin());
        (z, dz)
    };

    let dt = TAU / m as f64;
    let nodes: Vec<(C64, C64)> = (0..m)
        .map(|k| {
            let (z, dz) = point(k as f64 * dt);
            (z, dz * dt)
        })
        .collect();

    // Validate winding and clearance on a refined polygon so near-curve
    // eigenvalues cannot slip between coarse nodes.
    let fine = m.max(1024);
    let poly: Vec<C64> = (0..fine).map(|k| point(k as f64 * TAU / fine as f64).0).collect();
    let spectrum = normal_eigenpairs(l)?.vals;
    let mut clearance = f64::INFINITY;
    for p in &poly {
        clearance = clearance.min(p.norm());
        for v in &spectrum {
            clearance = clearance.min((p - v).norm());
        }
    }
    if clearance < tol::RESOLVENT_CLEARANCE {
        return Err(Error::BadContour(format!(
            "curve clearance {clearance:.3e} below {:.1e}; move the arc cuts off the spectrum",
            tol::RESOLVENT_CLEARANCE
        )));
    }
    if polygon_winding(&poly, C64::new(0.0, 0.0)) != 0 {
        return Err(Error::BadContour("curve winds around the origin".into()));
    }
    for v in &spectrum {
        let theta = normalize_angle(v.im.atan2(v.re));
        let in_j = arc_membership(theta, j_arc)?;
        let in_i = arc_membership(theta, i_arc)?;
        if in_j && in_i {
            return Err(Error::BadContour(format!("arcs overlap at eigenphase {theta:.6}")));
        }
        let w = polygon_winding(&poly, *v);
        if in_j && w != 1 {
            return Err(Error::BadContour(format!("winding {w} ≠ +1 at enclosed eigenphase {theta:.6}")));
        }
        if in_i && w != 0 {
            return Err(Error::BadContour(format!("winding {w} ≠ 0 at excluded eigenphase {theta:.6}")));
        }
    }
    Ok(Contour { nodes, clearance, radial: beta, theta_lo: base + theta_lo, theta_hi: base + theta_hi })
}

/// Interval resolvent `R_I(z) = χ_I(L)(Lχ_I(L) − z)⁻¹` with its reported
/// norm bound.
#[derive(Debug)]
pub struct ResolventReport {
    pub op: LinOp,
    /// Operator norm of the assembled resolvent.
    pub norm: f64,
    /// Distance from `z` to `closure(I) ∪ {0}`.
    pub dist: f64,
    /// Whether `norm · dist ≤ 1 + 1e-9`.
    pub bound_ok: bool,
}

/// Assemble the interval resolvent of a normal unitary from its eigenpairs.
///
/// `z` must keep distance at least [`tol::RESOLVENT_CLEARANCE`] from the
/// closed arc and from the origin (the kernel of `Lχ_I(L)` contributes the
/// eigenvalue 0 at finite dimension; bounding the distance against
/// `closure(I) ∪ {0}` covers it).
pub fn interval_resolvent(l: &LinOp, arc: &ArcInterval, z: C64) -> Result<ResolventReport> {
    if !l.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    let dist = dist_to_closed_arc(z, arc).min(z.norm());
    if dist < tol::RESOLVENT_CLEARANCE {
        return Err(Error::InvalidParameter(format!(
            "resolvent point at distance {dist:.3e} from the arc (or origin); need at least {:.1e}",
            tol::RESOLVENT_CLEARANCE
        )));
    }
    let full = normal_eigenpairs(l)?;
    let slice = restrict_to_arc(&full, arc)?;
    let r = slice.rank();
    let mut core = Array2::zeros((r, r));
    for (k, v) in slice.vals.iter().enumerate() {
        core[[k, k]] = C64::new(1.0, 0.0) / (v - z);
    }
    let matrix = expand(&slice, &core, &slice, l.dim());
    let norm = op_norm(&matrix);
    let op = l.with_matrix(matrix)?;
    Ok(ResolventReport { op, norm, dist, bound_ok: norm * dist <= 1.0 + 1e-9 })
}

/// Corner block recovered by contour quadrature, next to the directly
/// projected corner and the operator-norm residual between them.
#[derive(Debug)]
pub struct BlockRecovery {
    pub recovered: LinOp,
    pub direct: LinOp,
    pub residual: f64,
}

/// Weighted double-Cauchy sums `Σ_i w_i / ((a_k − z_i)(b_l − z_i))`, node
/// chunks evaluated in parallel, chunk results combined compensated.
fn weighted_cauchy_sum(nodes: &[(C64, C64)], a: &[C64], b: &[C64]) -> Array2<C64> {
    let chunks: Vec<Array2<C64>> = nodes
        .par_chunks(32)
        .map(|chunk| {
            let mut acc = Array2::zeros((a.len(), b.len()));
            for &(z, w) in chunk {
                for (k, &ak) in a.iter().enumerate() {
                    let fa = w / (ak - z);
                    for (l, &bl) in b.iter().enumerate() {
                        acc[[k, l]] += fa / (bl - z);
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = CompensatedSum::zeros(a.len(), b.len());
    for c in &chunks {
        sum.add(c);
    }
    sum.finish()
}

/// Evaluate `(1/2πi) ∮ R_I(z) [A, L] R_J(z) dz` along `contour` and compare
/// it with the directly projected corner `Λ_I A Λ_J`.
///
/// The quadrature is evaluated in the eigenbasis of `L`: with
/// `B = V_I^H [A,L] V_J`, each node contributes the elementwise-scaled
/// `B_kl / ((λ^I_k − z)(λ^J_l − z))`, which is `V_I^H R_I(z)[A,L]R_J(z) V_J`
/// exactly. The node sum converges to `B_kl / (λ^J_l − λ^I_k) = (V_I^H A V_J)_kl`.
pub fn contour_recover_block(
    a: &LinOp,
    l: &LinOp,
    i_arc: &ArcInterval,
    j_arc: &ArcInterval,
    contour: &Contour,
) -> Result<BlockRecovery> {
    a.same_map(l)?;
    if !l.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    let d = l.dim();
    let full = normal_eigenpairs(l)?;
    let si = restrict_to_arc(&full, i_arc)?;
    let sj = restrict_to_arc(&full, j_arc)?;
    let comm = a.commutator(l)?;
    let b = project(comm.matrix(), &si, &sj);
    let c = weighted_cauchy_sum(contour.nodes(), &si.vals, &sj.vals);
    // 1/(2πi) = −i/(2π)
    let scale = C64::new(0.0, -1.0 / TAU);
    let core = (&b * &c).mapv(|v| v * scale);
    let recovered = expand(&si, &core, &sj, d);
    let direct = expand(&si, &project(a.matrix(), &si, &sj), &sj, d);
    let residual = op_norm(&(&recovered - &direct));
    Ok(BlockRecovery {
        recovered: a.with_matrix(recovered)?,
        direct: a.with_matrix(direct)?,
        residual,
    })
}

/// Which part of the spectrum a diameter bound is taken over.
#[derive(Debug, Clone)]
pub enum SpectralSubset {
    /// Eigenvalues whose phase lies in the arc (for unitary-like spectra).
    Arc(ArcInterval),
    /// Positions into the `(re, im)`-sorted eigenvalue list.
    Indices(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct DiamBound {
    /// `‖Aχ_S(A) − zχ_S(A)‖`.
    pub lhs: f64,
    /// `diam(S ∩ σ(A))`: largest pairwise eigenvalue distance.
    pub rhs: f64,
    pub z: C64,
    pub selected: usize,
    /// `lhs ≤ rhs + DIAM_SLACK`.
    pub ok: bool,
}

/// Convex hull by monotone chain; returns the hull vertices in
/// counterclockwise order (1 or 2 points for degenerate input).
fn convex_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    if lower.len() + upper.len() < 3 {
        // All points collinear: the two chains collapse to the segment ends.
        let mut seg = vec![*p.first().unwrap(), *p.last().unwrap()];
        seg.dedup();
        return seg;
    }
    lower.extend(upper);
    lower
}

fn dist_point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let (wx, wy) = (p.0 - a.0, p.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 { 0.0 } else { ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0) };
    let (dx, dy) = (p.0 - (a.0 + t * vx), p.1 - (a.1 + t * vy));
    (dx * dx + dy * dy).sqrt()
}

/// Whether `p` lies in the closed convex hull of `pts`, with `slack`
/// tolerance toward the outside.
fn in_convex_hull(pts: &[(f64, f64)], p: (f64, f64), slack: f64) -> bool {
    let hull = convex_hull(pts);
    match hull.len() {
        0 => false,
        1 => dist_point_segment(p, hull[0], hull[0]) <= slack,
        2 => dist_point_segment(p, hull[0], hull[1]) <= slack,
        _ => {
            for k in 0..hull.len() {
                let a = hull[k];
                let b = hull[(k + 1) % hull.len()];
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                // CCW hull: interior points have every cross ≥ 0.
                if cross < 0.0 && dist_point_segment(p, a, b) > slack {
                    return false;
                }
            }
            true
        }
    }
}

/// Check `‖Aχ_S(A) − zχ_S(A)‖ ≤ diam(S ∩ σ(A))` for a normal `A` and a point
/// `z` in the closed convex hull of the selected eigenvalues. The hull
/// membership is a precondition: the bound is claimed only there.
pub fn diam_bound_check(a: &LinOp, subset: &SpectralSubset, z: C64) -> Result<DiamBound> {
    let d = a.dim();
    let full = normal_eigenpairs(a)?;
    let slice = match subset {
        SpectralSubset::Arc(arc) => restrict_to_arc(&full, arc)?,
        SpectralSubset::Indices(idx) => {
            let mut seen = std::collections::BTreeSet::new();
            for &i in idx {
                if i >= d {
                    return Err(Error::InvalidParameter(format!("eigenvalue position {i} out of range 0..{d}")));
                }
                if !seen.insert(i) {
                    return Err(Error::InvalidParameter(format!("duplicate eigenvalue position {i}")));
                }
            }
            let keep: Vec<usize> = seen.into_iter().collect();
            restrict_to_positions(&full, &keep)
        }
    };
    if slice.rank() == 0 {
        return Err(Error::InvalidParameter("empty spectral subset".into()));
    }
    let pts: Vec<(f64, f64)> = slice.vals.iter().map(|v| (v.re, v.im)).collect();
    if !in_convex_hull(&pts, (z.re, z.im), tol::DIAM_SLACK) {
        return Err(Error::InvalidParameter(format!(
            "z = {z} lies outside the convex hull of the selected eigenvalues"
        )));
    }
    let mut rhs: f64 = 0.0;
    for i in 0..slice.vals.len() {
        for j in i + 1..slice.vals.len() {
            rhs = rhs.max((slice.vals[i] - slice.vals[j]).norm());
        }
    }
    // ‖(A − z)χ_S‖ in the eigenbasis: the selected block is diagonal.
    let r = slice.rank();
    let mut core = Array2::zeros((r, r));
    for (k, v) in slice.vals.iter().enumerate() {
        core[[k, k]] = v - z;
    }
    let lhs = op_norm(&expand(&slice, &core, &slice, d));
    Ok(DiamBound { lhs, rhs, z, selected: r, ok: lhs <= rhs + tol::DIAM_SLACK })
}

/// One level of the dyadic block-diagonal decay table.
#[derive(Debug, Clone)]
pub struct DyadicLevel {
    pub level: u32,
    /// Number of arcs at this level (`2^level`).
    pub arcs: usize,
    /// Arcs that actually contain spectrum; empty arcs contribute nothing.
    pub occupied: usize,
    /// `‖Σ_k Λ_k [A,L] Λ_k‖`.
    pub t_norm: f64,
    /// `2 · chord(2π/2ⁿ) · ‖A‖` (chord = Euclidean diameter of one arc).
    pub chord_bound: f64,
    /// `2 · (2π/2ⁿ) · ‖A‖` (coarser arc-length form).
    pub arclen_bound: f64,
    /// `t_norm ≤ chord_bound + DIAM_SLACK`.
    pub ok: bool,
}

/// Block-diagonal compressions of `[A, L]` along dyadic arc partitions of the
/// circle, levels `1..=levels`. Level `n` splits the circle into `2ⁿ`
/// half-open arcs `[2π(k−1)/2ⁿ, 2πk/2ⁿ)`; an eigenphase exactly on a dyadic
/// boundary joins the arc starting there (dyadic boundaries are exact in
/// floating point, so no guard band is needed).
pub fn dyadic_commutator_decay(a: &LinOp, l: &LinOp, levels: u32) -> Result<Vec<DyadicLevel>> {
    a.same_map(l)?;
    if !l.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    if levels == 0 || levels > 12 {
        return Err(Error::InvalidParameter(format!("levels must be in 1..=12, got {levels}")));
    }
    let d = l.dim();
    let full = normal_eigenpairs(l)?;
    let comm = a.commutator(l)?;
    let core = project(comm.matrix(), &full, &full);
    let phases: Vec<f64> = full.vals.iter().map(|v| normalize_angle(v.im.atan2(v.re))).collect();
    let a_norm = a.op_norm();
    let mut out = Vec::with_capacity(levels as usize);
    for n in 1..=levels {
        let arcs = 1usize << n;
        let width = TAU / arcs as f64;
        let bins: Vec<usize> = phases.iter().map(|&t| ((t / width) as usize).min(arcs - 1)).collect();
        let mut masked = core.clone();
        for i in 0..d {
            for j in 0..d {
                if bins[i] != bins[j] {
                    masked[[i, j]] = C64::new(0.0, 0.0);
                }
            }
        }
        let t_norm = op_norm(&expand(&full, &masked, &full, d));
        let occupied = bins.iter().collect::<std::collections::BTreeSet<_>>().len();
        let chord_bound = 2.0 * 2.0 * (width / 2.0).sin() * a_norm;
        let arclen_bound = 2.0 * width * a_norm;
        out.push(DyadicLevel {
            level: n,
            arcs,
            occupied,
            t_norm,
            chord_bound,
            arclen_bound,
            ok: t_norm <= chord_bound + tol::DIAM_SLACK,
        });
    }
    Ok(out)
}

/// Contract checks on the raw weighted node sum `Σ_i w_i R_I(z_i) A R_J(z_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureContract {
    /// `‖Σ_i w_i F_i A G_i‖`.
    pub norm_lhs: f64,
    /// `(Σ_i |w_i| ‖F_i‖ ‖G_i‖) · ‖A‖`.
    pub norm_rhs: f64,
    pub norm_ok: bool,
    /// `|tr(Σ_i w_i F_i A G_i) − Σ_i w_i tr(F_i A G_i)|`, the two sides
    /// evaluated in genuinely different summation orders.
    pub interchange_defect: f64,
    pub interchange_ok: bool,
    /// Trace norm of the assembled sum.
    pub trace_norm_lhs: f64,
    /// `(Σ_i |w_i| ‖F_i‖ ‖G_i‖) · ‖A‖_tr`.
    pub trace_norm_rhs: f64,
    pub trace_norm_ok: bool,
}

/// Verify the quadrature-assembly contracts for the interval resolvents
/// `F(z) = R_I(z)`, `G(z) = R_J(z)` along `contour`: the triangle bound on
/// the operator norm, exactness of trace/sum interchange, and the triangle
/// bound on the trace norm.
pub fn quadrature_contract_check(
    a: &LinOp,
    l: &LinOp,
    i_arc: &ArcInterval,
    j_arc: &ArcInterval,
    contour: &Contour,
) -> Result<QuadratureContract> {
    a.same_map(l)?;
    if !l.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    let d = l.dim();
    let full = normal_eigenpairs(l)?;
    let si = restrict_to_arc(&full, i_arc)?;
    let sj = restrict_to_arc(&full, j_arc)?;
    let b = project(a.matrix(), &si, &sj);
    let c = weighted_cauchy_sum(contour.nodes(), &si.vals, &sj.vals);
    let assembled = expand(&si, &(&b * &c), &sj, d);

    let res_norm = |vals: &[C64], z: C64| -> f64 {
        vals.iter().map(|v| 1.0 / (v - z).norm()).fold(0.0, f64::max)
    };
    let mut factor = CompensatedSum::zeros(1, 1);
    for &(z, w) in contour.nodes() {
        let t = w.norm() * res_norm(&si.vals, z) * res_norm(&sj.vals, z);
        factor.add(&Array2::from_elem((1, 1), C64::new(t, 0.0)));
    }
    let factor = factor.finish()[[0, 0]].re;

    let a_norm = a.op_norm();
    let norm_lhs = op_norm(&assembled);
    let norm_rhs = factor * a_norm;

    // Per-node traces, serial and in node order: a different evaluation
    // order than the parallel chunked assembly above.
    let gram = project(&crate::linalg::eye(d), &sj, &si); // V_J^H V_I
    let mut tr_sum = CompensatedSum::zeros(1, 1);
    for &(z, w) in contour.nodes() {
        let mut t = C64::new(0.0, 0.0);
        for (k, &ak) in si.vals.iter().enumerate() {
            for (l_, &bl) in sj.vals.iter().enumerate() {
                t += b[[k, l_]] / ((ak - z) * (bl - z)) * gram[[l_, k]];
            }
        }
        tr_sum.add(&Array2::from_elem((1, 1), w * t));
    }
    let tr_nodes = tr_sum.finish()[[0, 0]];
    let tr_assembled: C64 = (0..d).map(|i| assembled[[i, i]]).sum();
    let interchange_defect = (tr_assembled - tr_nodes).norm();
    let scale = tr_assembled.norm().max(1.0);

    let trace_norm_lhs: f64 = singular_values(&assembled).sum();
    let trace_norm_rhs = factor * singular_values(a.matrix()).sum();

    Ok(QuadratureContract {
        norm_lhs,
        norm_rhs,
        norm_ok: norm_lhs <= norm_rhs * (1.0 + 1e-12) + tol::DIAM_SLACK,
        interchange_defect,
        interchange_ok: interchange_defect <= tol::QUADRATURE_INTERCHANGE_TOL * scale,
        trace_norm_lhs,
        trace_norm_rhs,
        trace_norm_ok: trace_norm_lhs <= trace_norm_rhs * (1.0 + 1e-12) + tol::DIAM_SLACK,
    })
}
