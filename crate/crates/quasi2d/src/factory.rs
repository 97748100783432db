//! Constructors for the operators under study: the planar flux unitary, its
//! spectral projections and block families, truncated shifts, the canonical
//! self-adjoint unitary, and permutation unitaries realizing a prescribed
//! vector of block indices.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::arc::{circular_distance, ArcInterval};
use crate::family::ProjectionFamily;
use crate::geometry::{Geometry, SiteMap};
use crate::linalg::{adjoint, eig_general, op_norm, orthonormalize, C64};
use crate::linop::{LinOp, Tag};
use crate::tol;
use crate::{Error, Result};

/// Flux unitary: diagonal in the site basis with entry `exp(i·arg(x + iy))`
/// at site `(x, y)` (acting as the identity on internal channels). The origin
/// carries the entry `1`, assigning it the angle 0.
pub fn laughlin_flux(map: &Arc<SiteMap>) -> Result<LinOp> {
    match map.geometry() {
        Geometry::SquareZ2 { .. } => {}
        g => {
            return Err(Error::GeometryMismatch { expected: "square patch".into(), found: g.describe() });
        }
    }
    let mut diag = vec![C64::new(1.0, 0.0); map.dim()];
    for s in 0..map.n_sites() {
        let phase = match map.angle(s) {
            Some(a) => C64::new(a.cos(), a.sin()),
            None => C64::new(1.0, 0.0),
        };
        for ch in 0..map.dof() {
            diag[map.basis_index(s, ch)] = phase;
        }
    }
    let mut op = LinOp::from_diagonal(&diag, map.clone())?;
    op.add_tag(Tag::Unitary)?;
    Ok(op)
}

/// Coordinate projection onto the half space `{x_axis ≥ 0}`.
pub fn half_space_projection(map: &Arc<SiteMap>, axis: usize) -> Result<LinOp> {
    let keep = |s: usize| -> Result<bool> {
        match (map.geometry(), map.site(s)) {
            (Geometry::SquareZ2 { .. }, crate::geometry::Site::Square { x, y }) => match axis {
                0 => Ok(x >= 0),
                1 => Ok(y >= 0),
                _ => Err(Error::InvalidParameter(format!("axis {axis} out of range for the square patch"))),
            },
            (Geometry::LineZ { .. }, crate::geometry::Site::Line { x }) => {
                if axis == 0 {
                    Ok(x >= 0)
                } else {
                    Err(Error::InvalidParameter(format!("axis {axis} out of range for the line")))
                }
            }
            (g, _) => Err(Error::GeometryMismatch { expected: "square patch or line segment".into(), found: g.describe() }),
        }
    };
    let d = map.dim();
    let mut m: Array2<C64> = Array2::zeros((d, d));
    for s in 0..map.n_sites() {
        if keep(s)? {
            for ch in 0..map.dof() {
                let b = map.basis_index(s, ch);
                m[[b, b]] = C64::new(1.0, 0.0);
            }
        }
    }
    LinOp::tagged(m, map.clone(), &[Tag::Projection, Tag::SelfAdjoint])
}

/// Boundary handling for truncated shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftBoundary {
    /// Wrap around: the shift is a permutation, hence exactly unitary.
    Periodic,
    /// Drop matrix elements leaving the patch: a partial isometry.
    Open,
}

/// Translation by `power` steps along `axis`: maps the basis vector at site
/// `x` to the one at `x + power·e_axis`, acting as the identity on channels.
pub fn shift(map: &Arc<SiteMap>, axis: usize, power: i64, boundary: ShiftBoundary) -> Result<LinOp> {
    let d = map.dim();
    let mut m: Array2<C64> = Array2::zeros((d, d));
    let periodic = boundary == ShiftBoundary::Periodic;
    for s in 0..map.n_sites() {
        let mut target = Some(s);
        let steps = power.unsigned_abs();
        let dir = if power >= 0 { 1 } else { -1 };
        for _ in 0..steps {
            target = match target {
                Some(t) => map.translate(t, axis, dir, periodic)?,
                None => None,
            };
        }
        if let Some(t) = target {
            for ch in 0..map.dof() {
                m[[map.basis_index(t, ch), map.basis_index(s, ch)]] = C64::new(1.0, 0.0);
            }
        }
    }
    let mut op = LinOp::new(m, map.clone())?;
    if periodic {
        op.add_tag(Tag::Unitary)?;
    }
    Ok(op)
}

/// Inward unilateral shift power on the half line: `power ≥ 1` maps the basis
/// vector at `k` to the one at `k − power` (vectors with `k ≤ power` map to
/// zero); negative powers shift outward.
pub fn unilateral_shift(map: &Arc<SiteMap>, power: i64) -> Result<LinOp> {
    let len = match map.geometry() {
        Geometry::HalfLineN { length } => length as i64,
        g => return Err(Error::GeometryMismatch { expected: "half line".into(), found: g.describe() }),
    };
    let d = map.dim();
    let mut m: Array2<C64> = Array2::zeros((d, d));
    for s in 0..map.n_sites() {
        let k = s as i64 + 1;
        let kt = k - power;
        if kt >= 1 && kt <= len {
            let t = (kt - 1) as usize;
            for ch in 0..map.dof() {
                m[[map.basis_index(t, ch), map.basis_index(s, ch)]] = C64::new(1.0, 0.0);
            }
        }
    }
    LinOp::new(m, map.clone())
}

/// Decide membership of a spectral angle in an arc, with a snap band for
/// exact endpoint hits and a guard band that rejects ambiguous angles.
pub(crate) fn arc_membership(theta: f64, arc: &ArcInterval) -> Result<bool> {
    if arc.is_full() {
        return Ok(true);
    }
    let d_start = circular_distance(theta, arc.start());
    let d_end = circular_distance(theta, arc.end());
    if d_start <= tol::ANGLE_SNAP && (arc.is_degenerate() || d_start <= d_end) {
        return Ok(arc.closed_start() || (arc.is_degenerate() && arc.closed_end()));
    }
    if d_end <= tol::ANGLE_SNAP {
        return Ok(arc.closed_end());
    }
    let dmin = d_start.min(d_end);
    if dmin < tol::ANGLE_GUARD {
        let endpoint = if d_start <= d_end { arc.start() } else { arc.end() };
        return Err(Error::AmbiguousBoundary { angle: theta, endpoint, dist: dmin });
    }
    Ok(arc.contains(theta))
}

/// Spectral projection `χ_arc(U)` of a normal unitary.
///
/// Diagonal unitaries are resolved exactly from their entries; any other
/// normal unitary goes through a dense eigendecomposition with the selected
/// eigenvectors re-orthonormalized. Eigenphases within the guard band of an
/// arc endpoint (without sitting exactly on it) are rejected as ambiguous.
pub fn spectral_projection_of_unitary(u: &LinOp, arc: &ArcInterval) -> Result<LinOp> {
    if !u.has_tag(Tag::Unitary) {
        return Err(Error::TagViolation { tag: "unitary".into(), defect: f64::NAN, bound: f64::NAN });
    }
    let d = u.dim();
    if let Some(diag) = u.diagonal(tol::ANGLE_SNAP) {
        let mut m: Array2<C64> = Array2::zeros((d, d));
        for (i, z) in diag.iter().enumerate() {
            let theta = crate::arc::normalize_angle(z.im.atan2(z.re));
            if arc_membership(theta, arc)? {
                m[[i, i]] = C64::new(1.0, 0.0);
            }
        }
        return LinOp::tagged(m, u.map().clone(), &[Tag::Projection, Tag::SelfAdjoint]);
    }
    let normality = {
        let uu = u.matrix().dot(&adjoint(u.matrix())) - adjoint(u.matrix()).dot(u.matrix());
        op_norm(&uu)
    };
    if normality > tol::UNITARY_TOL_PER_DIM * d as f64 {
        return Err(Error::NotNormal { defect: normality });
    }
    let (vals, vecs) = eig_general(u.matrix())?;
    let mut selected = Vec::new();
    for i in 0..d {
        let theta = crate::arc::normalize_angle(vals[i].im.atan2(vals[i].re));
        if arc_membership(theta, arc)? {
            selected.push(i);
        }
    }
    if selected.is_empty() {
        return LinOp::tagged(Array2::zeros((d, d)), u.map().clone(), &[Tag::Projection, Tag::SelfAdjoint]);
    }
    let mut cols = Array2::zeros((d, selected.len()));
    for (c, &i) in selected.iter().enumerate() {
        cols.column_mut(c).assign(&vecs.column(i));
    }
    let q = orthonormalize(&cols)?;
    let p = q.dot(&adjoint(&q));
    LinOp::tagged(p, u.map().clone(), &[Tag::Projection, Tag::SelfAdjoint])
}

/// Partition the spectrum of the flux unitary into arcs `[cut_j, cut_{j+1})`
/// and return the family of spectral projections, one block per arc.
///
/// Cuts must be strictly increasing in `[0, 2π)`, at least two. A lattice
/// angle exactly on a cut joins the arc starting there; a lattice angle
/// within the guard band of a cut without coinciding is a collision error.
/// The origin site carries angle 0.
pub fn laughlin_family(map: &Arc<SiteMap>, cuts: &[f64]) -> Result<ProjectionFamily> {
    match map.geometry() {
        Geometry::SquareZ2 { .. } => {}
        g => {
            return Err(Error::GeometryMismatch { expected: "square patch".into(), found: g.describe() });
        }
    }
    if cuts.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 cuts".into()));
    }
    for c in cuts {
        if !c.is_finite() || *c < 0.0 || *c >= crate::arc::TAU {
            return Err(Error::InvalidParameter(format!("cut {c} outside [0, 2π)")));
        }
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("cuts must be strictly increasing".into()));
    }
    let m = cuts.len();
    let block_of_angle = |theta: f64| -> Result<usize> {
        // Exact coincidence (within snap) joins the arc starting at the cut.
        for (j, c) in cuts.iter().enumerate() {
            let dist = circular_distance(theta, *c);
            if dist <= tol::ANGLE_SNAP {
                return Ok(j);
            }
            if dist < tol::ANGLE_GUARD {
                return Err(Error::CutCollision { cut: *c, angle: theta, dist });
            }
        }
        // Last arc wraps: angles below the first cut belong to it.
        if theta < cuts[0] {
            return Ok(m - 1);
        }
        let j = cuts.iter().rposition(|c| *c <= theta).expect("theta >= cuts[0]");
        Ok(j)
    };
    let mut assignment = vec![0usize; map.dim()];
    for s in 0..map.n_sites() {
        let theta = map.angle(s).unwrap_or(0.0);
        let j = block_of_angle(theta)?;
        for ch in 0..map.dof() {
            assignment[map.basis_index(s, ch)] = j;
        }
    }
    let labels: Vec<Option<ArcInterval>> = (0..m)
        .map(|j| {
            let start = cuts[j];
            let end = cuts[(j + 1) % m];
            ArcInterval::new(start, end, true, false).map(Some)
        })
        .collect::<Result<_>>()?;
    ProjectionFamily::from_assignment(map.clone(), &assignment, m, labels)
}

/// The canonical self-adjoint unitary of a coordinate family: diagonal with
/// entry `(−1)^k` on the `k`-th basis vector of each block (1-based within
/// the block's ascending support order), so each block alternates starting
/// with `−1`.
pub fn canonical_sau(fam: &ProjectionFamily) -> Result<LinOp> {
    let d = fam.dim();
    let mut diag = vec![C64::new(0.0, 0.0); d];
    for j in 0..fam.m() {
        let support = fam.support(j).ok_or_else(|| {
            Error::FamilyInvariant("the canonical alternating-sign unitary needs coordinate blocks".into())
        })?;
        for (pos, &b) in support.iter().enumerate() {
            let k = pos + 1;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            diag[b] = C64::new(sign, 0.0);
        }
    }
    let mut op = LinOp::from_diagonal(&diag, fam.map().clone())?;
    op.add_tag(Tag::Unitary)?;
    op.add_tag(Tag::SelfAdjoint)?;
    Ok(op)
}

/// Construction style for [`prescribed_index_unitary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrescriptionStyle {
    /// Unilateral shift powers per block with a vertex-end patch permutation;
    /// needs the shifts to sum to zero.
    FiniteStyle,
    /// Bilateral shift powers on L-shaped chains through the block array;
    /// arbitrary shifts, with flagged periodic closure links per chain.
    InfiniteStyle,
}

/// A target vector of block indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPrescription {
    pub shifts: Vec<i64>,
    pub style: PrescriptionStyle,
}

impl IndexPrescription {
    pub fn finite(shifts: Vec<i64>) -> Self {
        IndexPrescription { shifts, style: PrescriptionStyle::FiniteStyle }
    }

    pub fn infinite(shifts: Vec<i64>) -> Self {
        IndexPrescription { shifts, style: PrescriptionStyle::InfiniteStyle }
    }

    pub fn max_abs(&self) -> i64 {
        self.shifts.iter().map(|s| s.abs()).max().unwrap_or(0)
    }
}

/// A permutation unitary with prescribed block indices, together with the
/// links that exist only because the truncation is finite.
#[derive(Debug, Clone)]
pub struct PrescribedUnitary {
    pub op: LinOp,
    /// Artificial far-end closure links `(source basis index, target basis
    /// index)`; index computations must prune these.
    pub closure_links: Vec<(usize, usize)>,
    /// The vertex-end patch permutation links (part of the construction
    /// proper, kept for inspection).
    pub patch_links: Vec<(usize, usize)>,
    pub prescription: IndexPrescription,
}

/// Build a permutation unitary whose block indices against `fam` equal the
/// prescription.
///
/// `FiniteStyle` (shifts summing to zero): block `j` carries the `s_j`-th
/// inward unilateral shift power on its ordered basis; basis vectors shifted
/// to zero are patched onto the basis vectors nothing maps to, pairing both
/// lists in ascending (block, position) order. The same pairing at the far
/// ends closes the truncation; those links are reported as artificial.
///
/// `InfiniteStyle` (arbitrary shifts): the block array is partitioned into
/// L-shaped chains, chain `n` holding positions `(n, k ≥ n)` down block `n`
/// and `(j > n, n)` across the block array, ordered from the deep column end
/// around the corner to the row end; chain `n` carries the `s_n`-th cyclic
/// shift power, whose wrap-around links are reported as artificial.
pub fn prescribed_index_unitary(fam: &ProjectionFamily, prescription: &IndexPrescription) -> Result<PrescribedUnitary> {
    let m = fam.m();
    if prescription.shifts.len() != m {
        return Err(Error::BadPrescription(format!(
            "{} shifts for {} blocks",
            prescription.shifts.len(),
            m
        )));
    }
    let supports: Vec<&[usize]> = (0..m)
        .map(|j| {
            fam.support(j)
                .ok_or_else(|| Error::BadPrescription("index prescriptions need coordinate blocks".into()))
        })
        .collect::<Result<_>>()?;
    let max_abs = prescription.max_abs() as usize;
    match prescription.style {
        PrescriptionStyle::FiniteStyle => {
            if prescription.shifts.iter().sum::<i64>() != 0 {
                return Err(Error::BadPrescription("finite-style shifts must sum to zero".into()));
            }
            for (j, s) in supports.iter().enumerate() {
                if s.len() < 2 * max_abs + 2 {
                    return Err(Error::BadPrescription(format!(
                        "block {j} has rank {}, need at least {} for shifts up to {max_abs}",
                        s.len(),
                        2 * max_abs + 2
                    )));
                }
            }
            build_finite_style(fam, &supports, &prescription.shifts, prescription)
        }
        PrescriptionStyle::InfiniteStyle => {
            for (j, s) in supports.iter().enumerate() {
                let need = (j + 1) + max_abs + 2;
                if s.len() < need {
                    return Err(Error::BadPrescription(format!(
                        "block {j} has rank {}, need at least {need} for the chain layout",
                        s.len()
                    )));
                }
            }
            build_infinite_style(fam, &supports, &prescription.shifts, prescription)
        }
    }
}

fn build_finite_style(
    fam: &ProjectionFamily,
    supports: &[&[usize]],
    shifts: &[i64],
    prescription: &IndexPrescription,
) -> Result<PrescribedUnitary> {
    let d = fam.dim();
    let mut image: Vec<Option<usize>> = vec![None; d];
    // Vertex-end bookkeeping: vectors shifted to zero, and vectors nothing
    // maps to, each as (block, position) in ascending order.
    let mut zero_mapped: Vec<usize> = Vec::new();
    let mut unmapped_to: Vec<usize> = Vec::new();
    // Far-end bookkeeping: overflow sources and holes.
    let mut overflow: Vec<usize> = Vec::new();
    let mut far_holes: Vec<usize> = Vec::new();
    for (j, s) in shifts.iter().enumerate() {
        let sup = supports[j];
        let r = sup.len() as i64;
        for (pos, &b) in sup.iter().enumerate() {
            let k = pos as i64 + 1;
            let kt = k - s;
            if kt >= 1 && kt <= r {
                image[b] = Some(sup[(kt - 1) as usize]);
            } else if kt < 1 {
                zero_mapped.push(b);
            } else {
                overflow.push(b);
            }
        }
        if *s > 0 {
            for k in (r - s + 1)..=r {
                far_holes.push(sup[(k - 1) as usize]);
            }
            for k in 1..=*s {
                unmapped_to.push(sup[(k - 1) as usize]);
            }
        }
    }
    // `zero_mapped` collects from blocks with s_j > 0 (targets sit in blocks
    // with s_j < 0) and `overflow` from blocks with s_j < 0; the zero-sum
    // constraint makes the list lengths match. Lists were filled in ascending
    // (block, position) order already.
    let mut unmapped_neg: Vec<usize> = Vec::new();
    let mut far_holes_all = far_holes;
    for (j, s) in shifts.iter().enumerate() {
        if *s < 0 {
            let sup = supports[j];
            for k in 1..=s.unsigned_abs() as usize {
                unmapped_neg.push(sup[k - 1]);
            }
        }
    }
    if zero_mapped.len() != unmapped_neg.len() || overflow.len() != far_holes_all.len() {
        return Err(Error::BadPrescription("patch pairing counts disagree; prescription is inconsistent".into()));
    }
    let mut patch_links = Vec::new();
    for (src, tgt) in zero_mapped.iter().zip(unmapped_neg.iter()) {
        image[*src] = Some(*tgt);
        patch_links.push((*src, *tgt));
    }
    let mut closure_links = Vec::new();
    far_holes_all.sort_unstable();
    for (src, tgt) in overflow.iter().zip(far_holes_all.iter()) {
        image[*src] = Some(*tgt);
        closure_links.push((*src, *tgt));
    }
    finish_permutation(fam, image, closure_links, patch_links, prescription)
}

fn build_infinite_style(
    fam: &ProjectionFamily,
    supports: &[&[usize]],
    shifts: &[i64],
    prescription: &IndexPrescription,
) -> Result<PrescribedUnitary> {
    let m = fam.m();
    let d = fam.dim();
    let mut image: Vec<Option<usize>> = vec![None; d];
    let mut closure_links = Vec::new();
    // Chain n (1-based): deep column of block n first, then the corner, then
    // across the row. Basis positions inside blocks are 1-based.
    for n in 1..=m {
        let sup_n = supports[n - 1];
        let r_n = sup_n.len();
        let mut chain: Vec<usize> = Vec::new();
        for k in (n..=r_n).rev() {
            chain.push(sup_n[k - 1]);
        }
        for j in (n + 1)..=m {
            chain.push(supports[j - 1][n - 1]);
        }
        let len = chain.len() as i64;
        let s = shifts[n - 1];
        for (p, &b) in chain.iter().enumerate() {
            let q = p as i64 + s;
            let qw = q.rem_euclid(len) as usize;
            image[b] = Some(chain[qw]);
            if q != qw as i64 {
                closure_links.push((b, chain[qw]));
            }
        }
    }
    finish_permutation(fam, image, closure_links, Vec::new(), prescription)
}

fn finish_permutation(
    fam: &ProjectionFamily,
    image: Vec<Option<usize>>,
    closure_links: Vec<(usize, usize)>,
    patch_links: Vec<(usize, usize)>,
    prescription: &IndexPrescription,
) -> Result<PrescribedUnitary> {
    let d = fam.dim();
    let mut seen = vec![false; d];
    let mut matrix: Array2<C64> = Array2::zeros((d, d));
    for (src, tgt) in image.iter().enumerate() {
        let t = tgt.ok_or_else(|| Error::BadPrescription(format!("basis vector {src} left unmapped")))?;
        if seen[t] {
            return Err(Error::BadPrescription(format!("basis vector {t} targeted twice")));
        }
        seen[t] = true;
        matrix[[t, src]] = C64::new(1.0, 0.0);
    }
    let op = LinOp::tagged(matrix, fam.map().clone(), &[Tag::Unitary])?;
    Ok(PrescribedUnitary { op, closure_links, patch_links, prescription: prescription.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Site;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// Independent angle enumeration: counts sites per half-open arc
    /// `[cut_j, cut_{j+1})` directly from coordinates, origin counted at
    /// angle 0. Kept free of the factory and arc code paths.
    fn enumeration_block_counts(radius: i64, cuts: &[f64]) -> Vec<usize> {
        let m = cuts.len();
        let mut counts = vec![0usize; m];
        for x in -radius..=radius {
            for y in -radius..=radius {
                let theta = if x == 0 && y == 0 {
                    0.0
                } else {
                    let a = (y as f64).atan2(x as f64);
                    if a < 0.0 {
                        a + std::f64::consts::TAU
                    } else {
                        a
                    }
                };
                let mut j = m - 1;
                for w in 0..m - 1 {
                    if theta >= cuts[w] && theta < cuts[w + 1] {
                        j = w;
                        break;
                    }
                }
                counts[j] += 1;
            }
        }
        counts
    }

    fn square_map(r: u32) -> Arc<SiteMap> {
        SiteMap::new(Geometry::SquareZ2 { radius: r }, 1).unwrap()
    }

    #[test]
    fn flux_is_diagonal_unimodular_with_unit_origin() {
        let map = square_map(3);
        let l = laughlin_flux(&map).unwrap();
        assert!(l.has_tag(Tag::Unitary));
        let diag = l.diagonal(0.0).expect("diagonal by construction");
        for z in &diag {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
        let origin = map.index_of(&Site::Square { x: 0, y: 0 }).unwrap();
        assert_eq!(diag[map.basis_index(origin, 0)], C64::new(1.0, 0.0));
        let ne = map.index_of(&Site::Square { x: 1, y: 1 }).unwrap();
        let want = C64::new(FRAC_PI_4.cos(), FRAC_PI_4.sin());
        assert!((diag[map.basis_index(ne, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn flux_eigenphase_multiplicity_on_diagonal_ray() {
        // Oracle: at radius 8 the angle π/4 is carried by exactly the sites
        // (t, t), t = 1..8.
        let map = square_map(8);
        let l = laughlin_flux(&map).unwrap();
        let diag = l.diagonal(0.0).unwrap();
        let want = C64::new(FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let mult = diag.iter().filter(|z| (**z - want).norm() < 1e-14).count();
        assert_eq!(mult, 8);
    }

    #[test]
    fn spectral_projection_of_degenerate_arc_is_positive_axis() {
        let map = square_map(4);
        let l = laughlin_flux(&map).unwrap();
        let q = spectral_projection_of_unitary(&l, &ArcInterval::degenerate(FRAC_PI_2)).unwrap();
        let rank: f64 = (0..q.dim()).map(|i| q.matrix()[[i, i]].re).sum();
        assert_eq!(rank.round() as i64, 4);
        for y in 1..=4 {
            let s = map.index_of(&Site::Square { x: 0, y }).unwrap();
            assert!((q.matrix()[[s, s]] - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn disjoint_arcs_give_orthogonal_projections() {
        let map = square_map(3);
        let l = laughlin_flux(&map).unwrap();
        let p1 = spectral_projection_of_unitary(&l, &ArcInterval::new(0.1, 1.0, true, false).unwrap()).unwrap();
        let p2 = spectral_projection_of_unitary(&l, &ArcInterval::new(2.0, 3.0, true, false).unwrap()).unwrap();
        let prod = p1.mul(&p2).unwrap();
        assert!(prod.op_norm() < 1e-12);
    }

    #[test]
    fn ambiguous_eigenphase_near_endpoint_rejected() {
        let map = square_map(2);
        let l = laughlin_flux(&map).unwrap();
        // (1, 1) carries eigenphase π/4; an endpoint offset by less than the
        // guard band must be rejected as ambiguous.
        let arc = ArcInterval::new(FRAC_PI_4 + 0.4e-12, 2.0, true, false).unwrap();
        let err = spectral_projection_of_unitary(&l, &arc).unwrap_err();
        assert!(matches!(err, Error::AmbiguousBoundary { .. }));
    }

    #[test]
    fn family_ranks_match_enumeration_oracle_two_cuts() {
        let map = square_map(4);
        let fam = laughlin_family(&map, &[0.0, PI]).unwrap();
        let oracle = enumeration_block_counts(4, &[0.0, PI]);
        assert_eq!(oracle, vec![41, 40]);
        assert_eq!(fam.m(), 2);
        for j in 0..2 {
            assert_eq!(fam.rank(j), oracle[j], "block {j}");
        }
    }

    #[test]
    fn family_ranks_match_enumeration_oracle_quadrants() {
        let map = square_map(4);
        let cuts = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
        let fam = laughlin_family(&map, &cuts).unwrap();
        let oracle = enumeration_block_counts(4, &cuts);
        // The origin (angle 0) joins the first quadrant arc; the three others
        // are images of each other under the quarter rotation.
        assert_eq!(oracle, vec![21, 20, 20, 20]);
        for j in 0..4 {
            assert_eq!(fam.rank(j), oracle[j], "block {j}");
        }
        let labels: Vec<f64> = (0..4).map(|j| fam.label(j).unwrap().start()).collect();
        assert_eq!(labels, cuts.to_vec());
    }

    #[test]
    fn cut_collision_detected() {
        let map = square_map(3);
        // Angle of (1, 1) is π/4; a cut within the guard band but off the
        // exact angle must collide.
        let err = laughlin_family(&map, &[0.5e-13 + FRAC_PI_4 + 1.0e-13, PI]).unwrap_err();
        assert!(matches!(err, Error::CutCollision { .. }));
    }

    #[test]
    fn periodic_shift_is_unitary_permutation() {
        let map = SiteMap::new(Geometry::LineZ { half_width: 4 }, 1).unwrap();
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        assert!(r.has_tag(Tag::Unitary));
        // δ_4 wraps to δ_{−4}.
        let from = map.index_of(&Site::Line { x: 4 }).unwrap();
        let to = map.index_of(&Site::Line { x: -4 }).unwrap();
        assert_eq!(r.matrix()[[to, from]], C64::new(1.0, 0.0));
        let open = shift(&map, 0, 1, ShiftBoundary::Open).unwrap();
        assert_eq!(open.matrix()[[to, from]], C64::new(0.0, 0.0));
    }

    #[test]
    fn unilateral_shift_kills_vertex_vectors() {
        let map = SiteMap::new(Geometry::HalfLineN { length: 6 }, 1).unwrap();
        let s2 = unilateral_shift(&map, 2).unwrap();
        // k=1,2 map to zero; k=3 maps to k=1.
        assert!(s2.matrix().column(0).iter().all(|z| z.norm() == 0.0));
        assert!(s2.matrix().column(1).iter().all(|z| z.norm() == 0.0));
        assert_eq!(s2.matrix()[[0, 2]], C64::new(1.0, 0.0));
    }

    #[test]
    fn canonical_sau_alternates_within_blocks() {
        let map = SiteMap::new(Geometry::HalfLineN { length: 8 }, 1).unwrap();
        let assignment = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let fam = ProjectionFamily::from_assignment(map, &assignment, 2, vec![None, None]).unwrap();
        let x = canonical_sau(&fam).unwrap();
        assert!(x.has_tag(Tag::Unitary) && x.has_tag(Tag::SelfAdjoint));
        let diag = x.diagonal(0.0).unwrap();
        let signs: Vec<f64> = diag.iter().map(|z| z.re).collect();
        assert_eq!(signs, vec![-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
    }

    fn abstract_family(ranks: &[usize]) -> ProjectionFamily {
        let d: usize = ranks.iter().sum();
        let map = SiteMap::new(Geometry::HalfLineN { length: d as u32 }, 1).unwrap();
        let mut assignment = Vec::new();
        for (j, r) in ranks.iter().enumerate() {
            assignment.extend(std::iter::repeat(j).take(*r));
        }
        let labels = vec![None; ranks.len()];
        ProjectionFamily::from_assignment(map, &assignment, ranks.len(), labels).unwrap()
    }

    #[test]
    fn finite_style_is_permutation_with_expected_links() {
        let fam = abstract_family(&[8, 8, 8]);
        let p = IndexPrescription::finite(vec![1, 1, -2]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        assert!(u.op.has_tag(Tag::Unitary));
        // Vertex patch: φ¹_1 → φ³_1 and φ²_1 → φ³_2.
        assert_eq!(u.patch_links, vec![(0, 16), (8, 17)]);
        // Far end: two closure links into the top slots of blocks 1 and 2.
        assert_eq!(u.closure_links.len(), 2);
        for (src, tgt) in &u.closure_links {
            assert!(*src >= 16, "closure source in block 3, got {src}");
            assert!(*tgt == 7 || *tgt == 15, "closure target at a far-end hole, got {tgt}");
        }
    }

    #[test]
    fn finite_style_requires_zero_sum() {
        let fam = abstract_family(&[8, 8]);
        let err = prescribed_index_unitary(&fam, &IndexPrescription::finite(vec![1, 1])).unwrap_err();
        assert!(matches!(err, Error::BadPrescription(_)));
    }

    #[test]
    fn infinite_style_is_permutation_with_flagged_wraps() {
        let fam = abstract_family(&[8, 8, 8]);
        let p = IndexPrescription::infinite(vec![1, -1, 2]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        assert!(u.op.has_tag(Tag::Unitary));
        // Each chain with a nonzero shift wraps |s_n| links.
        assert_eq!(u.closure_links.len(), 1 + 1 + 2);
        // Off-block rank stays bounded by 2Σ|s| + m.
        let mut off_block = 0usize;
        let assign = fam.basis_assignment().unwrap().to_vec();
        for src in 0..fam.dim() {
            for tgt in 0..fam.dim() {
                if u.op.matrix()[[tgt, src]].norm() > 0.5 && assign[src] != assign[tgt] {
                    off_block += 1;
                }
            }
        }
        assert!(off_block <= 2 * 4 + 3, "off-block rank {off_block}");
    }

    #[test]
    fn infinite_style_rejects_thin_blocks() {
        let fam = abstract_family(&[4, 4, 4]);
        let err = prescribed_index_unitary(&fam, &IndexPrescription::infinite(vec![0, 0, 3])).unwrap_err();
        assert!(matches!(err, Error::BadPrescription(_)));
    }
}
