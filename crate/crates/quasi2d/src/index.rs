//! Block Fredholm indices at finite truncation, computed by two independent
//! routes: a localized trace of `P − U*PU`, and kernel-minus-cokernel
//! counting over the singular vectors of the block compression. Both routes
//! separate the physical index (localized near the center of the truncation)
//! from boundary artifacts through a windowing scheme with a guard gap.

use ndarray::Array2;
use serde::Serialize;

use crate::family::ProjectionFamily;
use crate::geometry::SiteMap;
use crate::linalg::{adjoint, svd_full, C64};
use crate::linop::{LinOp, Tag};
use crate::tol;
use crate::{Error, Result};

/// How window membership of a basis vector is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// By the site's distance from the truncation center (max-norm radius on
    /// the square patch, |x| on the line, coordinate on the half line,
    /// vertex distance on the star).
    CenterDistance,
    /// By the 1-based position of the basis vector inside its block's
    /// ordered basis; needs a coordinate projection family for context.
    BlockDepth,
}

/// A window isolating the physical index region, with a guard gap that marks
/// the outermost shell as boundary territory.
///
/// Basis vectors split into three zones: `Window` (inside), `Boundary`
/// (within `guard` of the truncation edge), and `Buffer` (between). Index
/// contributions are read inside the window, boundary contributions are
/// attributed to the artificial truncation, and buffer mass is the quality
/// measure: a resolved index needs negligible buffer mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialWindow {
    pub kind: WindowKind,
    pub w: u64,
    pub guard: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Window,
    Buffer,
    Boundary,
}

impl SpatialWindow {
    pub fn center(w: u64, guard: u64) -> Self {
        SpatialWindow { kind: WindowKind::CenterDistance, w, guard }
    }

    pub fn depth(w: u64, guard: u64) -> Self {
        SpatialWindow { kind: WindowKind::BlockDepth, w, guard }
    }

    /// Default window for a truncation: a quarter of the linear extent, with
    /// a guard gap of an eighth.
    pub fn default_center(map: &SiteMap) -> Self {
        let ext = map.max_center_distance();
        SpatialWindow { kind: WindowKind::CenterDistance, w: (ext / 4).max(1), guard: (ext / 8).max(1) }
    }

    /// Zone of every basis index. `fam` provides block context for
    /// [`WindowKind::BlockDepth`] windows.
    pub fn zones(&self, map: &SiteMap, fam: Option<&ProjectionFamily>) -> Result<Vec<Zone>> {
        match self.kind {
            WindowKind::CenterDistance => {
                let ext = map.max_center_distance();
                if self.w + self.guard > ext {
                    return Err(Error::BadWindow(format!(
                        "w = {} plus guard = {} exceeds the linear extent {ext}",
                        self.w, self.guard
                    )));
                }
                let mut zones = vec![Zone::Buffer; map.dim()];
                for (b, z) in zones.iter_mut().enumerate() {
                    let dist = map.center_distance(map.site_of_basis(b));
                    *z = if dist <= self.w {
                        Zone::Window
                    } else if dist > ext - self.guard {
                        Zone::Boundary
                    } else {
                        Zone::Buffer
                    };
                }
                Ok(zones)
            }
            WindowKind::BlockDepth => {
                let fam = fam.ok_or_else(|| {
                    Error::BadWindow("block-depth windows need a projection family for context".into())
                })?;
                if fam.map().as_ref() != map {
                    return Err(Error::SiteMapMismatch);
                }
                let min_rank = (0..fam.m()).map(|j| fam.rank(j)).min().unwrap_or(0) as u64;
                if self.w + self.guard > min_rank {
                    return Err(Error::BadWindow(format!(
                        "w = {} plus guard = {} exceeds the smallest block rank {min_rank}",
                        self.w, self.guard
                    )));
                }
                let mut zones = vec![Zone::Buffer; map.dim()];
                for j in 0..fam.m() {
                    let support = fam.support(j).ok_or_else(|| {
                        Error::BadWindow("block-depth windows need coordinate blocks".into())
                    })?;
                    let r = support.len() as u64;
                    for (pos, &b) in support.iter().enumerate() {
                        let depth = pos as u64 + 1;
                        zones[b] = if depth <= self.w {
                            Zone::Window
                        } else if depth > r - self.guard {
                            Zone::Boundary
                        } else {
                            Zone::Buffer
                        };
                    }
                }
                Ok(zones)
            }
        }
    }
}

/// Outcome of the localized-trace route.
#[derive(Debug, Clone, Serialize)]
pub struct TraceOutcome {
    pub value: Option<i64>,
    /// Real part of the windowed trace before rounding.
    pub raw: f64,
    /// Absolute diagonal mass of `P − U*PU` in the buffer zone.
    pub tail_mass: f64,
    pub reason: Option<String>,
}

/// Outcome of the kernel-counting route.
#[derive(Debug, Clone, Serialize)]
pub struct KernelOutcome {
    pub value: Option<i64>,
    pub kernel_count: usize,
    pub cokernel_count: usize,
    /// Near-null singular vectors excluded as boundary artifacts.
    pub boundary_excluded: usize,
    /// Singular values of the compression, descending.
    pub singular_values: Vec<f64>,
    pub reason: Option<String>,
}

/// Remove artificial closure links (entries `U[target, source]`) before an
/// index computation.
fn pruned_matrix(u: &LinOp, closure_links: &[(usize, usize)]) -> Array2<C64> {
    let mut m = u.matrix().clone();
    for (src, tgt) in closure_links {
        m[[*tgt, *src]] = C64::new(0.0, 0.0);
    }
    m
}

/// Localized trace index: `round(Re tr(χ_W (P − U*PU) χ_W))`.
///
/// The sign convention makes the bilateral right shift against the right
/// half-line projection come out at −1. `closure_links` lists artificial
/// wrap-around matrix elements to prune (empty for operators without them);
/// `fam` supplies block context for depth windows.
pub fn windowed_trace_index(
    u: &LinOp,
    p: &LinOp,
    window: &SpatialWindow,
    closure_links: &[(usize, usize)],
    fam: Option<&ProjectionFamily>,
) -> Result<TraceOutcome> {
    if !u.has_tag(Tag::Unitary) {
        return Err(Error::InvalidParameter("the trace route needs a validated unitary".into()));
    }
    if !p.has_tag(Tag::Projection) {
        return Err(Error::InvalidParameter("the trace route needs a validated projection".into()));
    }
    u.same_map(p)?;
    let zones = window.zones(u.map(), fam)?;
    let um = pruned_matrix(u, closure_links);
    let t = p.matrix() - &adjoint(&um).dot(p.matrix()).dot(&um);
    let mut raw = 0.0;
    let mut tail = 0.0;
    for (b, z) in zones.iter().enumerate() {
        match z {
            Zone::Window => raw += t[[b, b]].re,
            Zone::Buffer => tail += t[[b, b]].norm(),
            Zone::Boundary => {}
        }
    }
    // A pruned closure target inside the window was, before the closure, fed
    // from beyond the truncation at the same depth; restore that book entry
    // so a cut feed does not masquerade as index flow.
    for (_, tgt) in closure_links {
        if zones[*tgt] == Zone::Window {
            raw -= p.matrix()[[*tgt, *tgt]].re;
        }
    }
    if tail > tol::TAIL_MASS_EPS {
        return Ok(TraceOutcome {
            value: None,
            raw,
            tail_mass: tail,
            reason: Some(format!(
                "buffer-zone index mass {tail:.3e} exceeds {:.3e}; the window missed part of the index flow",
                tol::TAIL_MASS_EPS
            )),
        });
    }
    let nearest = raw.round();
    if (raw - nearest).abs() > tol::TRACE_INT_TOL {
        return Ok(TraceOutcome {
            value: None,
            raw,
            tail_mass: tail,
            reason: Some(format!(
                "windowed trace {raw:.6} is not within {:.2} of an integer",
                tol::TRACE_INT_TOL
            )),
        });
    }
    Ok(TraceOutcome { value: Some(nearest as i64), raw, tail_mass: tail, reason: None })
}

/// Kernel-counting index: near-null right-singular vectors of the block
/// compression localized in the window, minus near-null left-singular
/// vectors localized there. Near-null vectors localized in the boundary zone
/// are truncation artifacts and are excluded; singular values inside the gap
/// band `(0.1, 0.9)` whose vectors are not boundary artifacts make the block
/// unresolved.
pub fn windowed_kernel_index(
    u: &LinOp,
    p: &LinOp,
    window: &SpatialWindow,
    closure_links: &[(usize, usize)],
    fam: Option<&ProjectionFamily>,
) -> Result<KernelOutcome> {
    if !p.has_tag(Tag::Projection) {
        return Err(Error::InvalidParameter("the kernel route needs a validated projection".into()));
    }
    u.same_map(p)?;
    let zones = window.zones(u.map(), fam)?;
    let um = pruned_matrix(u, closure_links);
    let pruned = u.with_matrix(um)?;
    let comp = crate::family::block_compress(&pruned, p)?;
    let r = comp.rank();
    let d = u.dim();
    if r == 0 {
        return Ok(KernelOutcome {
            value: Some(0),
            kernel_count: 0,
            cokernel_count: 0,
            boundary_excluded: 0,
            singular_values: Vec::new(),
            reason: None,
        });
    }
    let (umat, svals, vh) = svd_full(&comp.matrix)?;
    let zone_mass = |vec: &ndarray::Array1<C64>| -> (f64, f64, f64) {
        let full = comp.basis.embed(vec, d);
        let mut win = 0.0;
        let mut buf = 0.0;
        let mut bnd = 0.0;
        for (b, z) in zones.iter().enumerate() {
            let m = full[b].norm_sqr();
            match z {
                Zone::Window => win += m,
                Zone::Buffer => buf += m,
                Zone::Boundary => bnd += m,
            }
        }
        (win, buf, bnd)
    };
    let localized = 1.0 - tol::KERNEL_MASS_EPS;
    let mut kernel = 0usize;
    let mut cokernel = 0usize;
    let mut excluded = 0usize;
    for i in 0..r {
        let sigma = svals[i];
        let right = vh.row(i).mapv(|z| z.conj());
        let left = umat.column(i).to_owned();
        if sigma >= tol::GAP_BAND_HIGH {
            continue;
        }
        if sigma > tol::GAP_BAND_LOW {
            let (_, _, rb) = zone_mass(&right);
            let (_, _, lb) = zone_mass(&left);
            if rb >= localized && lb >= localized {
                // A mid-band singular value carried entirely by the boundary
                // shell is a truncation artifact.
                excluded += 1;
                continue;
            }
            return Ok(KernelOutcome {
                value: None,
                kernel_count: 0,
                cokernel_count: 0,
                boundary_excluded: excluded,
                singular_values: svals.to_vec(),
                reason: Some(format!(
                    "singular value {sigma:.4} lies inside the gap band ({}, {})",
                    tol::GAP_BAND_LOW,
                    tol::GAP_BAND_HIGH
                )),
            });
        }
        // Near-null pair: classify each side independently.
        for (vec, is_right) in [(&right, true), (&left, false)] {
            let (win, _, bnd) = zone_mass(vec);
            if win >= localized {
                if is_right {
                    kernel += 1;
                } else {
                    cokernel += 1;
                }
            } else if bnd >= localized {
                excluded += 1;
            } else {
                return Ok(KernelOutcome {
                    value: None,
                    kernel_count: kernel,
                    cokernel_count: cokernel,
                    boundary_excluded: excluded,
                    singular_values: svals.to_vec(),
                    reason: Some(format!(
                        "near-null singular vector has window mass {win:.3} and boundary mass {bnd:.3}; \
                         neither localized enough to count nor to discard"
                    )),
                });
            }
        }
    }
    Ok(KernelOutcome {
        value: Some(kernel as i64 - cokernel as i64),
        kernel_count: kernel,
        cokernel_count: cokernel,
        boundary_excluded: excluded,
        singular_values: svals.to_vec(),
        reason: None,
    })
}

/// Per-block result of running both routes.
#[derive(Debug, Clone, Serialize)]
pub struct BlockIndex {
    pub block: usize,
    /// Set when both methods resolve and agree.
    pub accepted: Option<i64>,
    pub trace: TraceOutcome,
    pub kernel: KernelOutcome,
}

/// Index vector of a unitary against a projection family.
#[derive(Debug, Clone, Serialize)]
pub struct IndexVector {
    pub entries: Vec<BlockIndex>,
    /// For exactly-unitary inputs with all entries accepted: whether the
    /// indices sum to zero.
    pub sum_rule: Option<bool>,
}

impl IndexVector {
    /// The accepted per-block values, if every block resolved.
    pub fn accepted(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(|e| e.accepted).collect()
    }
}

/// Run both index routes on every block of the family.
pub fn index_vector(
    u: &LinOp,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    closure_links: &[(usize, usize)],
) -> Result<IndexVector> {
    let mut entries = Vec::with_capacity(fam.m());
    for j in 0..fam.m() {
        let trace = windowed_trace_index(u, fam.block(j), window, closure_links, Some(fam))?;
        let kernel = windowed_kernel_index(u, fam.block(j), window, closure_links, Some(fam))?;
        let accepted = match (trace.value, kernel.value) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        entries.push(BlockIndex { block: j, accepted, trace, kernel });
    }
    let sum_rule = if u.has_tag(Tag::Unitary) {
        entries
            .iter()
            .map(|e| e.accepted)
            .collect::<Option<Vec<i64>>>()
            .map(|v| v.iter().sum::<i64>() == 0)
    } else {
        None
    };
    Ok(IndexVector { entries, sum_rule })
}

/// The pairing index of a projection against a unitary: the same localized
/// trace with the roles swapped. The commutator-compactness precondition is
/// reported as a single-size diagnostic (`commutator_norm`); cross-size
/// decay checks live with the locality profiles.
pub fn projection_pairing_index(
    p: &LinOp,
    uop: &LinOp,
    window: &SpatialWindow,
) -> Result<(TraceOutcome, f64)> {
    let commutator_norm = p.commutator(uop)?.op_norm();
    let outcome = windowed_trace_index(uop, p, window, &[], None)?;
    Ok((outcome, commutator_norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{
        canonical_sau, half_space_projection, prescribed_index_unitary, shift, unilateral_shift,
        IndexPrescription, PrescribedUnitary, ShiftBoundary,
    };
    use crate::geometry::Geometry;
    use std::sync::Arc;

    fn line(w: u32) -> Arc<SiteMap> {
        SiteMap::new(Geometry::LineZ { half_width: w }, 1).unwrap()
    }

    fn abstract_family(ranks: &[usize]) -> ProjectionFamily {
        let d: usize = ranks.iter().sum();
        let map = SiteMap::new(Geometry::HalfLineN { length: d as u32 }, 1).unwrap();
        let mut assignment = Vec::new();
        for (j, r) in ranks.iter().enumerate() {
            assignment.extend(std::iter::repeat(j).take(*r));
        }
        ProjectionFamily::from_assignment(map, &assignment, ranks.len(), vec![None; ranks.len()]).unwrap()
    }

    /// Construction-level oracle: for a permutation unitary, the block index
    /// is the number of vertex-end patch links leaving the block minus the
    /// number arriving, independent of the trace and kernel routes.
    fn patch_link_oracle(u: &PrescribedUnitary, fam: &ProjectionFamily) -> Vec<i64> {
        let assign = fam.basis_assignment().unwrap();
        let mut v = vec![0i64; fam.m()];
        for (src, tgt) in &u.patch_links {
            v[assign[*src]] += 1;
            v[assign[*tgt]] -= 1;
        }
        v
    }

    #[test]
    fn identity_has_zero_index() {
        let map = line(16);
        let id = LinOp::identity(map.clone());
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(4, 2);
        let out = windowed_trace_index(&id, &p, &w, &[], None).unwrap();
        assert_eq!(out.value, Some(0));
        assert_eq!(out.raw, 0.0);
    }

    #[test]
    fn right_shift_against_half_line_is_minus_one() {
        let map = line(64);
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(16, 8);
        let out = windowed_trace_index(&r, &p, &w, &[], None).unwrap();
        assert_eq!(out.value, Some(-1));
        assert!(out.tail_mass == 0.0);
        let k = windowed_kernel_index(&r, &p, &w, &[], None).unwrap();
        assert_eq!(k.value, Some(-1));
        assert_eq!((k.kernel_count, k.cokernel_count), (0, 1));
    }

    #[test]
    fn shift_powers_scale_the_index() {
        let map = line(64);
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(16, 8);
        for k in 1..=3i64 {
            let rk = shift(&map, 0, k, ShiftBoundary::Periodic).unwrap();
            let t = windowed_trace_index(&rk, &p, &w, &[], None).unwrap();
            assert_eq!(t.value, Some(-k), "trace route at power {k}");
            // Independent oracle for the trace route: kernel counting.
            let kk = windowed_kernel_index(&rk, &p, &w, &[], None).unwrap();
            assert_eq!(kk.value, Some(-k), "kernel route at power {k}");
        }
    }

    #[test]
    fn inward_shift_square_counts_two_kernel_vectors() {
        let map = SiteMap::new(Geometry::HalfLineN { length: 32 }, 1).unwrap();
        let s2 = unilateral_shift(&map, 2).unwrap();
        let p = LinOp::identity(map);
        let w = SpatialWindow::center(8, 4);
        let out = windowed_kernel_index(&s2, &p, &w, &[], None).unwrap();
        assert_eq!((out.kernel_count, out.cokernel_count), (2, 0));
        assert_eq!(out.value, Some(2));
        assert_eq!(out.boundary_excluded, 2, "far-end cokernel vectors excluded");
    }

    #[test]
    fn canonical_sau_has_all_zero_indices() {
        let fam = abstract_family(&[12, 12, 12]);
        let x = canonical_sau(&fam).unwrap();
        let w = SpatialWindow::depth(4, 2);
        let v = index_vector(&x, &fam, &w, &[]).unwrap();
        assert_eq!(v.accepted(), Some(vec![0, 0, 0]));
        assert_eq!(v.sum_rule, Some(true));
    }

    #[test]
    fn finite_style_indices_match_prescription_and_oracle() {
        let fam = abstract_family(&[32, 32, 32]);
        let p = IndexPrescription::finite(vec![1, 1, -2]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        let w = SpatialWindow::depth(8, 4);
        let v = index_vector(&u.op, &fam, &w, &u.closure_links).unwrap();
        assert_eq!(v.accepted(), Some(vec![1, 1, -2]));
        assert_eq!(v.sum_rule, Some(true));
        assert_eq!(patch_link_oracle(&u, &fam), vec![1, 1, -2]);
    }

    #[test]
    fn finite_style_two_minus_one_minus_one() {
        let fam = abstract_family(&[32, 32, 32]);
        let p = IndexPrescription::finite(vec![2, -1, -1]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        assert_eq!(patch_link_oracle(&u, &fam), vec![2, -1, -1]);
        let w = SpatialWindow::depth(8, 4);
        let v = index_vector(&u.op, &fam, &w, &u.closure_links).unwrap();
        assert_eq!(v.accepted(), Some(vec![2, -1, -1]));
    }

    #[test]
    fn infinite_style_indices_match_prescription() {
        let fam = abstract_family(&[24, 24, 24, 24]);
        let p = IndexPrescription::infinite(vec![1, 0, -1, 0]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        let w = SpatialWindow::depth(8, 4);
        let v = index_vector(&u.op, &fam, &w, &u.closure_links).unwrap();
        assert_eq!(v.accepted(), Some(vec![1, 0, -1, 0]));
    }

    #[test]
    fn infinite_style_nonzero_sum_resolves() {
        let fam = abstract_family(&[24, 24, 24]);
        let p = IndexPrescription::infinite(vec![1, 2, 1]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        let w = SpatialWindow::depth(10, 5);
        let v = index_vector(&u.op, &fam, &w, &u.closure_links).unwrap();
        assert_eq!(v.accepted(), Some(vec![1, 2, 1]));
        // The wrap links carried the compensating flow; after pruning them the
        // sum rule fails by design, and the report must say so.
        assert_eq!(v.sum_rule, Some(false));
    }

    #[test]
    fn unpruned_closure_links_cancel_the_index() {
        // Without pruning, the wrap-around flow cancels the physical index on
        // the trace route for chain constructions.
        let fam = abstract_family(&[24, 24]);
        let p = IndexPrescription::infinite(vec![1, -1]);
        let u = prescribed_index_unitary(&fam, &p).unwrap();
        let w = SpatialWindow::depth(8, 4);
        let pruned = windowed_trace_index(&u.op, fam.block(0), &w, &u.closure_links, Some(&fam)).unwrap();
        assert_eq!(pruned.value, Some(1));
        let unpruned = windowed_trace_index(&u.op, fam.block(0), &w, &[], Some(&fam)).unwrap();
        assert_eq!(unpruned.value, Some(0), "wrap flow hides the index when not pruned");
    }

    #[test]
    fn pairing_of_commuting_pair_is_zero() {
        let map = SiteMap::new(Geometry::SquareZ2 { radius: 8 }, 1).unwrap();
        let l = crate::factory::laughlin_flux(&map).unwrap();
        let q = crate::factory::spectral_projection_of_unitary(
            &l,
            &crate::arc::ArcInterval::new(0.3, 2.0, true, false).unwrap(),
        )
        .unwrap();
        let w = SpatialWindow::center(2, 1);
        let (out, comm) = projection_pairing_index(&q, &l, &w).unwrap();
        assert_eq!(out.value, Some(0));
        assert!(comm < 1e-12);
    }

    #[test]
    fn pairing_of_half_space_with_shift_is_minus_one() {
        let map = line(64);
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(16, 8);
        let (out, comm) = projection_pairing_index(&p, &r, &w).unwrap();
        assert_eq!(out.value, Some(-1));
        assert!(comm > 0.5, "shift does not commute with the half-space projection");
    }

    #[test]
    fn rotated_projection_keeps_the_pairing_index() {
        // Conjugating the half-space projection by a permutation unitary with
        // canceling block indices leaves the pairing unchanged.
        let map = line(64);
        let d = map.dim();
        let assignment: Vec<usize> = (0..d).map(|b| if b < d / 2 { 0 } else { 1 }).collect();
        let fam = ProjectionFamily::from_assignment(map.clone(), &assignment, 2, vec![None, None]).unwrap();
        let u = prescribed_index_unitary(&fam, &IndexPrescription::finite(vec![1, -1])).unwrap();
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let p = half_space_projection(&map, 0).unwrap();
        let p_rot = u.op.mul(&p).unwrap().mul(&u.op.adjoint()).unwrap();
        let mut p_rot = p_rot;
        p_rot.add_tag(Tag::Projection).unwrap();
        let w = SpatialWindow::center(16, 8);
        let (direct, _) = projection_pairing_index(&p, &r, &w).unwrap();
        let (rotated, _) = projection_pairing_index(&p_rot, &r, &w).unwrap();
        assert_eq!(direct.value, Some(-1));
        assert_eq!(rotated.value, Some(-1));
    }

    #[test]
    fn window_must_fit_truncation() {
        let map = line(8);
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(7, 4);
        assert!(matches!(
            windowed_trace_index(&r, &p, &w, &[], None),
            Err(Error::BadWindow(_))
        ));
    }

    #[test]
    fn multiplicativity_for_shift_powers() {
        let map = line(64);
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(16, 8);
        let a = shift(&map, 0, 2, ShiftBoundary::Periodic).unwrap();
        let b = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let ab = a.mul(&b).unwrap();
        let ia = windowed_trace_index(&a, &p, &w, &[], None).unwrap().value.unwrap();
        let ib = windowed_trace_index(&b, &p, &w, &[], None).unwrap().value.unwrap();
        let iab = windowed_trace_index(&ab, &p, &w, &[], None).unwrap().value.unwrap();
        assert_eq!(iab, ia + ib);
    }

    #[test]
    fn index_stable_under_window_interior_perturbation() {
        use rand::SeedableRng;
        let map = line(64);
        let d = map.dim();
        let r = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let p = half_space_projection(&map, 0).unwrap();
        let w = SpatialWindow::center(16, 8);
        let zones = w.zones(&map, None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut e: Array2<C64> = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                if zones[i] == Zone::Window && zones[j] == Zone::Window {
                    e[[i, j]] = crate::linalg::gaussian_c64(&mut rng);
                }
            }
        }
        let norm = crate::linalg::op_norm(&e);
        let e = e.mapv(|z| z * C64::new(0.1 / norm, 0.0));
        let perturbed = r.matrix() + &e;
        let (uq, _) = crate::linalg::polar(&perturbed).unwrap();
        let up = LinOp::tagged(uq, map.clone(), &[Tag::Unitary]).unwrap();
        let out = windowed_trace_index(&up, &p, &w, &[], None).unwrap();
        assert_eq!(out.value, Some(-1), "index must survive a windowed perturbation");
    }
}
