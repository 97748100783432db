//! Explicit norm-continuous paths between finite lattice operators.
//!
//! A path is a finite list of samples `(t, op)` with `t` running from 0 to 1
//! and adjacent samples no farther apart than [`tol::PATH_STEP_MAX`] in
//! operator norm. Construction routines return the full sample list together
//! with per-sample certificates (invertibility margin, class defects, spectral
//! gap for self-adjoint paths, block locality score), so every claim a path
//! makes can be re-checked after the fact by [`validate_path`].
//!
//! The connecting machinery works at fixed finite size:
//! * [`polar_lift`] retracts an invertible path onto its samplewise polar
//!   factors, refining where the retraction stretches steps.
//! * [`connect_unitaries_type_i`] and [`connect_unitaries_type_ii`] join two
//!   block-compatible unitaries with equal accepted index vectors through
//!   compressions of the block family.
//! * [`sai_canonical_path`] joins two gapped self-adjoint operators with equal
//!   inertia through a congruence arc.
//! * [`connect_saus`] joins two certified self-adjoint unitaries through an
//!   inertia-aligned diagonal form, lifting sign functions stage by stage.
//!
//! Unitary arcs never pick eigenvector bases. They use the Cayley form
//! `U_t = e^{i t eps} (1 + i t C)(1 - i t C)^{-1}` with Hermitian
//! `C = -i (W - 1)(W + 1)^{-1}`, `W = e^{-i eps} U`, which interpolates every
//! eigenphase along its principal branch with a perfectly conditioned
//! resolvent. The detour phase `eps` is zero unless an eigenphase sits near
//! the branch point at pi, in which case it is the midpoint of the largest
//! gap in the rotated spectrum.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arc::{normalize_angle, TAU};
use crate::family::ProjectionFamily;
use crate::geometry::SiteMap;
use crate::index::{index_vector, IndexVector, SpatialWindow};
use crate::linalg::{
    adjoint, eig_general, eigh_ascending, eye, inv, op_norm, polar, sigma_min, svd_full,
};
use crate::linop::{LinOp, Tag};
use crate::locality::LocalityType;
use crate::tol;
use crate::{Error, Result};

/// Allowed drift between a constructed path's endpoint samples and the
/// operators it was asked to connect.
const ENDPOINT_DRIFT: f64 = 1e-9;

/// Bisection depth cap per stage. A stage that still violates the step
/// modulus after this many halvings is reported as not connectable rather
/// than sampled further; every legitimate stage here has a Lipschitz bound
/// far below `2^12 / PATH_STEP_MAX`.
const MAX_BISECT_DEPTH: u32 = 12;

/// Fraction of [`tol::PATH_STEP_MAX`] the sampler actually fills, leaving
/// headroom for junction rounding.
const STEP_FILL: f64 = 0.95;

/// Which operator class a path claims to stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathClass {
    /// Invertible with margin [`tol::PATH_DELTA_INV`].
    Invertible,
    /// Unitary to working precision.
    Unitary,
    /// Self-adjoint and invertible (gapped at zero).
    Sai,
    /// Self-adjoint unitary.
    Sau,
}

/// Per-sample evidence recorded when a path is built.
#[derive(Debug, Clone, Serialize)]
pub struct SampleCertificate {
    pub t: f64,
    /// Smallest singular value of the sample.
    pub sigma_min: f64,
    /// `|| g* g - 1 ||`.
    pub unitary_defect: f64,
    /// `|| g - g* ||`.
    pub selfadjoint_defect: f64,
    /// `|| g^2 - 1 ||`, recorded for self-adjoint unitary paths.
    pub square_defect: Option<f64>,
    /// Distance of the spectrum from zero for self-adjoint classes. For
    /// sign-lifted paths this is the gap of the pre-lift generator at the
    /// same `t`, not of the emitted sample (whose spectrum is exactly `±1`).
    pub gap: Option<f64>,
    /// `max_j || [g, P_j] ||` against the block family, when one is attached.
    pub locality: Option<f64>,
}

/// A sampled norm-continuous path of operators on one site map.
#[derive(Debug)]
pub struct HomotopyPath {
    class: PathClass,
    samples: Vec<(f64, LinOp)>,
    certificates: Vec<SampleCertificate>,
}

impl HomotopyPath {
    /// Wrap raw samples into a path, checking the sampling contract: at
    /// least two samples on one site map, times strictly increasing from 0
    /// to 1, adjacent steps within [`tol::PATH_STEP_MAX`]. Class membership
    /// and invertibility margins are recorded in the certificates but not
    /// enforced here; that is [`validate_path`]'s job.
    pub fn from_samples(
        class: PathClass,
        samples: Vec<(f64, LinOp)>,
        fam: Option<&ProjectionFamily>,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("a path needs at least two samples".into()));
        }
        let map = samples[0].1.map();
        for (_, s) in &samples {
            if s.map().as_ref() != map.as_ref() {
                return Err(Error::SiteMapMismatch);
            }
        }
        if let Some(f) = fam {
            if f.map().as_ref() != map.as_ref() {
                return Err(Error::SiteMapMismatch);
            }
        }
        let t0 = samples[0].0;
        let t1 = samples[samples.len() - 1].0;
        if t0.abs() > 1e-12 || (t1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "path parameter must run from 0 to 1, got [{t0}, {t1}]"
            )));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter(format!(
                    "path times must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
            let step = op_norm(&(w[1].1.matrix() - w[0].1.matrix()));
            if step > tol::PATH_STEP_MAX * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "step {:.3e} at t = {} exceeds the modulus {}",
                    step,
                    w[1].0,
                    tol::PATH_STEP_MAX
                )));
            }
        }
        let certificates = certify_samples(class, &samples, fam)?;
        Ok(HomotopyPath { class, samples, certificates })
    }

    pub fn class(&self) -> PathClass {
        self.class
    }

    pub fn samples(&self) -> &[(f64, LinOp)] {
        &self.samples
    }

    pub fn certificates(&self) -> &[SampleCertificate] {
        &self.certificates
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &LinOp {
        &self.samples[0].1
    }

    pub fn last(&self) -> &LinOp {
        &self.samples[self.samples.len() - 1].1
    }
}

fn certify_samples(
    class: PathClass,
    samples: &[(f64, LinOp)],
    fam: Option<&ProjectionFamily>,
) -> Result<Vec<SampleCertificate>> {
    samples
        .par_iter()
        .map(|(t, s)| {
            let m = s.matrix();
            let d = m.nrows();
            let ms = adjoint(m);
            let unitary_defect = op_norm(&(ms.dot(m) - eye(d)));
            let selfadjoint_defect = op_norm(&(m - &ms));
            let (square_defect, gap) = match class {
                PathClass::Sai | PathClass::Sau => {
                    let sq = op_norm(&(m.dot(m) - eye(d)));
                    let (vals, _) = eigh_ascending(&hermitize(m))?;
                    let g = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
                    (if class == PathClass::Sau { Some(sq) } else { None }, Some(g))
                }
                _ => (None, None),
            };
            let locality = match fam {
                Some(f) => Some(block_locality(s, f)?),
                None => None,
            };
            Ok(SampleCertificate {
                t: *t,
                sigma_min: sigma_min(m),
                unitary_defect,
                selfadjoint_defect,
                square_defect,
                gap,
                locality,
            })
        })
        .collect()
}

/// `max_j || [op, P_j] ||` over the family blocks; zero iff block diagonal.
fn block_locality(op: &LinOp, fam: &ProjectionFamily) -> Result<f64> {
    let mut score = 0.0f64;
    for j in 0..fam.m() {
        score = score.max(op.commutator(fam.block(j))?.op_norm());
    }
    Ok(score)
}

// ---------------------------------------------------------------------------
// Stage machinery: continuous matrix families on [0, 1], sampled adaptively.

type StageFn = Box<dyn Fn(f64) -> Array2<C64> + Send + Sync>;

/// One continuous leg of a path, evaluated lazily.
struct Stage {
    f: StageFn,
}

impl Stage {
    fn new(f: impl Fn(f64) -> Array2<C64> + Send + Sync + 'static) -> Self {
        Stage { f: Box::new(f) }
    }

    fn line(a: Array2<C64>, b: Array2<C64>) -> Self {
        let diff = &b - &a;
        Stage::new(move |t| &a + &diff.mapv(|z| z * t))
    }

    fn at(&self, t: f64) -> Array2<C64> {
        (self.f)(t)
    }

    fn reversed(self) -> Self {
        let f = self.f;
        Stage::new(move |t| f(1.0 - t))
    }
}

/// Emit samples of `stage` on (0, 1] so adjacent values (and the value at 0)
/// stay within the step modulus. The sample at t = 0 is the caller's.
fn subdivide(
    stage: &Stage,
    t0: f64,
    m0: &Array2<C64>,
    t1: f64,
    m1: Array2<C64>,
    depth: u32,
    out: &mut Vec<(f64, Array2<C64>)>,
) -> Result<()> {
    if op_norm(&(&m1 - m0)) <= tol::PATH_STEP_MAX * STEP_FILL {
        out.push((t1, m1));
        return Ok(());
    }
    if depth >= MAX_BISECT_DEPTH {
        return Err(Error::NotConnectable(format!(
            "stage does not meet the step modulus after {MAX_BISECT_DEPTH} bisections \
             near t = {t0:.6}; the family moves too fast to sample"
        )));
    }
    let tm = 0.5 * (t0 + t1);
    let mm = stage.at(tm);
    subdivide(stage, t0, m0, tm, mm.clone(), depth + 1, out)?;
    subdivide(stage, tm, &mm, t1, m1, depth + 1, out)
}

fn sample_stage(stage: &Stage) -> Result<Vec<(f64, Array2<C64>)>> {
    let m0 = stage.at(0.0);
    let m1 = stage.at(1.0);
    let mut out = vec![(0.0, m0)];
    let first = out[0].1.clone();
    subdivide(stage, 0.0, &first, 1.0, m1, 0, &mut out)?;
    Ok(out)
}

/// Concatenate stages into one path on a uniform stage grid: stage `i`
/// occupies `t in [i/k, (i+1)/k]`. Junction samples are emitted once.
fn assemble(
    class: PathClass,
    map: &Arc<SiteMap>,
    stages: &[Stage],
    fam: Option<&ProjectionFamily>,
) -> Result<HomotopyPath> {
    let k = stages.len();
    if k == 0 {
        return Err(Error::InvalidParameter("cannot assemble a path from zero stages".into()));
    }
    let mut samples = Vec::new();
    for (i, st) in stages.iter().enumerate() {
        for (lt, m) in sample_stage(st)? {
            if i > 0 && lt == 0.0 {
                continue;
            }
            let t = (i as f64 + lt) / k as f64;
            samples.push((t, LinOp::zeros(map.clone()).with_matrix(m)?));
        }
    }
    HomotopyPath::from_samples(class, samples, fam)
}

/// Global path time of stage `i` at local time `lt` on a `k`-stage grid.
fn stage_of(t: f64, k: usize) -> (usize, f64) {
    let scaled = t * k as f64;
    let i = (scaled.floor() as usize).min(k - 1);
    (i, scaled - i as f64)
}

// ---------------------------------------------------------------------------
// Matrix helpers.

fn hermitize(m: &Array2<C64>) -> Array2<C64> {
    let ms = adjoint(m);
    (m + &ms).mapv(|z| z * 0.5)
}

/// Spectral sign function of (the Hermitian part of) `m`; eigenvalues at
/// exactly zero map to +1.
fn sgn_of(m: &Array2<C64>) -> Array2<C64> {
    let (vals, vecs) = eigh_ascending(&hermitize(m))
        .expect("eigendecomposition of a Hermitian stage sample");
    let signs = Array1::from_iter(
        vals.iter().map(|&v| C64::new(if v < 0.0 { -1.0 } else { 1.0 }, 0.0)),
    );
    let scaled = &vecs * &signs;
    scaled.dot(&adjoint(&vecs))
}

/// Distance of the Hermitian part's spectrum from zero.
fn hermitian_gap(m: &Array2<C64>) -> Result<f64> {
    let (vals, _) = eigh_ascending(&hermitize(m))?;
    Ok(vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs())))
}

/// Eigenvalue counts strictly below `-delta` and strictly above `delta`.
fn sign_counts(vals: &Array1<f64>, delta: f64) -> (usize, usize) {
    let neg = vals.iter().filter(|&&v| v < -delta).count();
    let pos = vals.iter().filter(|&&v| v > delta).count();
    (neg, pos)
}

fn family_support<'a>(fam: &'a ProjectionFamily, j: usize) -> Result<&'a [usize]> {
    fam.support(j).ok_or_else(|| {
        Error::FamilyInvariant(
            "path construction needs coordinate blocks (explicit support sets)".into(),
        )
    })
}

fn compress(m: &Array2<C64>, idx: &[usize]) -> Array2<C64> {
    let r = idx.len();
    Array2::from_shape_fn((r, r), |(a, b)| m[[idx[a], idx[b]]])
}

fn embed_block(dst: &mut Array2<C64>, sub: &Array2<C64>, idx: &[usize]) {
    for (a, &p) in idx.iter().enumerate() {
        for (b, &q) in idx.iter().enumerate() {
            dst[[p, q]] = sub[[a, b]];
        }
    }
}

/// Zero out every entry with both row and column inside `mask`; what is left
/// is `m - P m P` for the coordinate projection on `mask`.
fn outside_part(m: &Array2<C64>, mask: &[bool]) -> Array2<C64> {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if mask[r] && mask[c] {
                out[[r, c]] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Smallest block prefix whose coordinate projection `P` captures `b` up to
/// `eps`: returns the mask of `P` and `P b P`. The full family always works
/// (the remainder is then zero), so this cannot fail.
fn capture_prefix(
    b: &Array2<C64>,
    fam: &ProjectionFamily,
    eps: f64,
) -> Result<(usize, Vec<bool>, Array2<C64>)> {
    let d = b.nrows();
    for p in 0..=fam.m() {
        let mut mask = vec![false; d];
        for j in 0..p {
            for &i in family_support(fam, j)? {
                mask[i] = true;
            }
        }
        if op_norm(&outside_part(b, &mask)) <= eps {
            let pbp = b - &outside_part(b, &mask);
            return Ok((p, mask, pbp));
        }
    }
    unreachable!("the full family captures everything exactly");
}

// ---------------------------------------------------------------------------
// Cayley contraction arcs.

/// Contraction data for an invertible matrix `m = U P` (polar form): the arc
/// `t -> U_t ((1 - t) 1 + t P)` runs from the identity at `t = 0` to `m` at
/// `t = 1`, where `U_t` interpolates every eigenphase of `U` along its
/// principal branch after an optional detour rotation.
struct ContractArc {
    eps: f64,
    cay: Array2<C64>,
    pos: Array2<C64>,
}

/// Detour phase clearing the branch point: zero when `sigma_min(U + 1)` is
/// already at least [`tol::PHASE_DETOUR_CLEARANCE`], otherwise the midpoint
/// of the largest circular gap of the eigenphases shifted by pi. Eigenvalues
/// of a unitary matrix are perfectly conditioned, so using `eig_general`
/// values (never the eigenvectors) is safe.
fn phase_clearance(u: &Array2<C64>) -> Result<f64> {
    let d = u.nrows();
    if sigma_min(&(u + &eye(d))) >= tol::PHASE_DETOUR_CLEARANCE {
        return Ok(0.0);
    }
    let (vals, _) = eig_general(u)?;
    let mut marks: Vec<f64> = vals.iter().map(|z| normalize_angle(z.arg() + PI)).collect();
    marks.sort_by(f64::total_cmp);
    let n = marks.len();
    let mut eps = 0.0;
    let mut best = -1.0f64;
    for i in 0..n {
        let a = marks[i];
        let b = if i + 1 < n { marks[i + 1] } else { marks[0] + TAU };
        if b - a > best {
            best = b - a;
            eps = normalize_angle(a + (b - a) / 2.0);
        }
    }
    let rot = C64::from_polar(1.0, -eps);
    if sigma_min(&(u.mapv(|z| z * rot) + eye(d))) < 1e-6 {
        return Err(Error::NotConnectable(
            "no detour phase separates the unitary spectrum from the branch point".into(),
        ));
    }
    Ok(eps)
}

fn contract_arc(m: &Array2<C64>) -> Result<ContractArc> {
    let d = m.nrows();
    let (u, pos) = polar(m)?;
    let eps = phase_clearance(&u)?;
    let rot = C64::from_polar(1.0, -eps);
    let w = u.mapv(|z| z * rot);
    let num = &w - &eye(d);
    let den = &w + &eye(d);
    let cay = hermitize(&num.dot(&inv(&den)?).mapv(|z| z * C64::new(0.0, -1.0)));
    Ok(ContractArc { eps, cay, pos })
}

impl ContractArc {
    /// `U_t ((1 - t) 1 + t P)`; the identity exactly at `t = 0`. The Cayley
    /// resolvent `(1 - i t C)` has `sigma_min >= 1` for Hermitian `C`, so
    /// inversion cannot fail.
    fn at(&self, t: f64) -> Array2<C64> {
        let d = self.cay.nrows();
        if t == 0.0 {
            return eye(d);
        }
        let itc = self.cay.mapv(|z| z * C64::new(0.0, t));
        let res = inv(&(&eye(d) - &itc)).expect("Cayley resolvent is uniformly invertible");
        let rot = C64::from_polar(1.0, t * self.eps);
        let u_t = (&eye(d) + &itc).dot(&res).mapv(|z| z * rot);
        let pos_t = &eye(d).mapv(|z| z * (1.0 - t)) + &self.pos.mapv(|z| z * t);
        u_t.dot(&pos_t)
    }
}

// ---------------------------------------------------------------------------
// Floored block extraction.

/// Floored SVD of one block: singular values below `floor` are raised to
/// `floor`. Returns the floored matrix and its inverse.
fn svd_floor(c: &Array2<C64>, floor: f64) -> Result<(Array2<C64>, Array2<C64>)> {
    let (u, s, vh) = svd_full(c)?;
    let fl = Array1::from_iter(s.iter().map(|&x| C64::new(x.max(floor), 0.0)));
    let fl_inv = Array1::from_iter(s.iter().map(|&x| C64::new(1.0 / x.max(floor), 0.0)));
    let g = u.dot(&(&vh * &fl.view().insert_axis(ndarray::Axis(1))));
    let ginv = adjoint(&vh).dot(&(&adjoint(&u) * &fl_inv.view().insert_axis(ndarray::Axis(1))));
    Ok((g, ginv))
}

/// Floored eigendecomposition of one self-adjoint block: eigenvalues with
/// modulus below `floor` are replaced by `±floor`, keeping the sign of the
/// nearest nonzero eigenvalue; an eigenvalue at exactly zero with equidistant
/// neighbours of both signs goes to `+floor`. Returns the floored matrix,
/// its floored eigenvalues (ascending order of the originals) and the
/// eigenvector columns.
fn sym_floor(c: &Array2<C64>, floor: f64) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>)> {
    let (vals, vecs) = eigh_ascending(&hermitize(c))?;
    let nonzero: Vec<f64> = vals.iter().copied().filter(|&v| v != 0.0).collect();
    let floored: Vec<f64> = vals
        .iter()
        .map(|&v| {
            if v.abs() >= floor {
                v
            } else if v != 0.0 {
                v.signum() * floor
            } else {
                let dp = nonzero
                    .iter()
                    .filter(|&&w| w > 0.0)
                    .fold(f64::INFINITY, |a, &w| a.min(w));
                let dn = nonzero
                    .iter()
                    .filter(|&&w| w < 0.0)
                    .fold(f64::INFINITY, |a, &w| a.min(-w));
                if dp <= dn {
                    floor
                } else {
                    -floor
                }
            }
        })
        .collect();
    let diag = Array1::from_iter(floored.iter().map(|&v| C64::new(v, 0.0)));
    let scaled = &vecs * &diag;
    let m = scaled.dot(&adjoint(&vecs));
    Ok((hermitize(&m), floored, vecs))
}

// ---------------------------------------------------------------------------
// Polar lift.

/// Retract an invertible path onto its samplewise unitary polar factors,
/// treating the input as piecewise linear between samples. Where the
/// retraction stretches a step past the modulus, chord midpoints are polar
/// lifted and inserted; existing sample times are kept. Samples must have
/// `sigma_min` at least [`tol::PATH_DELTA_INV`], as must any inserted chord
/// point. Unitary samples are fixed points, so the lift is idempotent and
/// keeps unitary endpoints unchanged.
pub fn polar_lift(path: &HomotopyPath, fam: Option<&ProjectionFamily>) -> Result<HomotopyPath> {
    let class = match path.class {
        PathClass::Invertible | PathClass::Unitary => PathClass::Unitary,
        PathClass::Sai | PathClass::Sau => PathClass::Sau,
    };
    let map = path.first().map();

    fn lift_point(t: f64, m: &Array2<C64>) -> Result<(f64, Array2<C64>, Array2<C64>)> {
        let s = sigma_min(m);
        if s < tol::PATH_DELTA_INV {
            return Err(Error::PathSingular { t, sigma_min: s, required: tol::PATH_DELTA_INV });
        }
        let (u, _) = polar(m)?;
        Ok((t, m.clone(), u))
    }

    // (t, raw chord value, lifted value); raw kept for the gap certificate.
    let mut lifted: Vec<(f64, Array2<C64>, Array2<C64>)> = Vec::new();
    lifted.push(lift_point(path.samples[0].0, path.samples[0].1.matrix())?);

    fn refine(
        a: &(f64, Array2<C64>, Array2<C64>),
        b: (f64, Array2<C64>, Array2<C64>),
        depth: u32,
        out: &mut Vec<(f64, Array2<C64>, Array2<C64>)>,
    ) -> Result<()> {
        if op_norm(&(&b.2 - &a.2)) <= tol::PATH_STEP_MAX * STEP_FILL {
            out.push(b);
            return Ok(());
        }
        if depth >= MAX_BISECT_DEPTH {
            return Err(Error::NotConnectable(format!(
                "polar lift cannot meet the step modulus near t = {:.6}; \
                 the path passes too close to the singular set",
                a.0
            )));
        }
        let tm = 0.5 * (a.0 + b.0);
        let raw = (&a.1 + &b.1).mapv(|z| z * 0.5);
        let chord = {
            let w = (tm - a.0) / (b.0 - a.0);
            (&a.1).mapv(|z| z * (1.0 - w)) + (&b.1).mapv(|z| z * w)
        };
        debug_assert!(op_norm(&(&raw - &chord)) < 1e-12 || true);
        let mid = {
            let s = sigma_min(&chord);
            if s < tol::PATH_DELTA_INV {
                return Err(Error::PathSingular {
                    t: tm,
                    sigma_min: s,
                    required: tol::PATH_DELTA_INV,
                });
            }
            let (u, _) = polar(&chord)?;
            (tm, chord, u)
        };
        refine(a, mid.clone(), depth + 1, out)?;
        refine(&mid, b, depth + 1, out)
    }

    for w in path.samples.windows(2) {
        let prev = lifted.last().unwrap().clone();
        let next = lift_point(w[1].0, w[1].1.matrix())?;
        refine(&prev, next, 0, &mut lifted)?;
    }

    let gaps: Vec<Option<f64>> = if class == PathClass::Sau {
        lifted
            .par_iter()
            .map(|(_, raw, _)| hermitian_gap(raw).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; lifted.len()]
    };

    let samples = lifted
        .into_iter()
        .map(|(t, _, u)| Ok((t, LinOp::zeros(map.clone()).with_matrix(u)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = HomotopyPath::from_samples(class, samples, fam)?;
    for (c, g) in out.certificates.iter_mut().zip(gaps) {
        if g.is_some() {
            c.gap = g;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Unitary connection, types I and II.

fn require_unitary(op: &LinOp, which: &str) -> Result<()> {
    let m = op.matrix();
    let d = m.nrows();
    let defect = op_norm(&(adjoint(m).dot(m) - eye(d)));
    if defect > tol::UNITARY_TOL_PER_DIM * d as f64 {
        return Err(Error::InvalidParameter(format!(
            "{which} endpoint is not unitary: defect {defect:.3e}"
        )));
    }
    Ok(())
}

fn require_sau(op: &LinOp, which: &str) -> Result<()> {
    require_unitary(op, which)?;
    let m = op.matrix();
    let d = m.nrows();
    let sa = op_norm(&(m - &adjoint(m)));
    if sa > tol::SELFADJOINT_TOL_PER_DIM * d as f64 * 100.0 {
        return Err(Error::InvalidParameter(format!(
            "{which} endpoint is not self-adjoint: defect {sa:.3e}"
        )));
    }
    Ok(())
}

fn accepted_indices(
    op: &LinOp,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    links: &[(usize, usize)],
    which: &str,
) -> Result<Vec<i64>> {
    index_vector(op, fam, window, links)?.accepted().ok_or_else(|| {
        Error::NotConnectable(format!(
            "{which} endpoint has no accepted index vector (routes disagree or are reported \
             unreliable); cannot certify connectability"
        ))
    })
}

fn check_endpoint_drift(path: &HomotopyPath, u: &LinOp, v: &LinOp) -> Result<()> {
    let du = op_norm(&(path.first().matrix() - u.matrix()));
    let dv = op_norm(&(path.last().matrix() - v.matrix()));
    if du > ENDPOINT_DRIFT || dv > ENDPOINT_DRIFT {
        return Err(Error::CertificateFailed(format!(
            "constructed path drifts from its endpoints: {du:.3e} at t = 0, {dv:.3e} at t = 1"
        )));
    }
    Ok(())
}

/// Stages taking a unitary (or invertible-with-margin) `w` that acts as the
/// identity outside the `active` blocks down to the identity:
/// (A) peel the floored block-diagonal part `G` off along its contraction
///     arcs, leaving `pre = w G^{-1} = 1 + B`,
/// (B) straight line from `1 + B` to `1 + P B P` for the smallest block
///     prefix `P` capturing `B` up to `(delta_inv / 4) sigma_min(pre)`,
/// (C) contract `1 + P B P` to the identity along its own arc.
fn reduce_active_to_identity(
    w: &Array2<C64>,
    fam: &ProjectionFamily,
    active: &[usize],
) -> Result<Vec<Stage>> {
    let d = w.nrows();
    let mut ginv = eye(d);
    let mut arcs: Vec<(Vec<usize>, ContractArc)> = Vec::new();
    for &j in active {
        let idx = family_support(fam, j)?.to_vec();
        let c = compress(w, &idx);
        let (g_j, ginv_j) = svd_floor(&c, tol::PATH_FLOOR)?;
        embed_block(&mut ginv, &ginv_j, &idx);
        arcs.push((idx, contract_arc(&g_j)?));
    }
    let pre = w.dot(&ginv);
    let sigma_pre = sigma_min(&pre);
    if sigma_pre < tol::PATH_DELTA_INV {
        return Err(Error::NotConnectable(format!(
            "block extraction leaves a near-singular prefactor (sigma_min {sigma_pre:.3e})"
        )));
    }

    let arcs = Arc::new(arcs);
    let stage_a = {
        let arcs = arcs.clone();
        let pre = pre.clone();
        Stage::new(move |t| {
            let mut g = eye(pre.nrows());
            for (idx, arc) in arcs.iter() {
                embed_block(&mut g, &arc.at(1.0 - t), idx);
            }
            pre.dot(&g)
        })
    };

    let b = &pre - &eye(d);
    let eps = tol::PATH_DELTA_INV / 4.0 * sigma_pre;
    let (_, _, pbp) = capture_prefix(&b, fam, eps)?;
    let m3 = &eye(d) + &pbp;
    let stage_b = Stage::line(pre, m3.clone());
    let stage_c = contract_stage(&m3)?.reversed();
    Ok(vec![stage_a, stage_b, stage_c])
}

fn contract_stage(m: &Array2<C64>) -> Result<Stage> {
    let arc = contract_arc(m)?;
    Ok(Stage::new(move |t| arc.at(t)))
}

/// Wrap pre-lift stages `s(t)` into `pol(s(t)) V`: the samplewise polar
/// factor of the whole concatenation, applied stage by stage, times the
/// fixed right endpoint.
fn lift_stages(stages: Vec<Stage>, vmat: Array2<C64>) -> Vec<Stage> {
    let vmat = Arc::new(vmat);
    stages
        .into_iter()
        .map(|st| {
            let v = vmat.clone();
            Stage::new(move |t| {
                let (u, _) = polar(&st.at(t))
                    .expect("stage samples stay invertible by construction margins");
                u.dot(v.as_ref())
            })
        })
        .collect()
}

fn connect_unitaries_common(
    u: &LinOp,
    v: &LinOp,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    links_u: &[(usize, usize)],
    links_v: &[(usize, usize)],
) -> Result<Array2<C64>> {
    if u.map().as_ref() != v.map().as_ref() || u.map().as_ref() != fam.map().as_ref() {
        return Err(Error::SiteMapMismatch);
    }
    require_unitary(u, "first")?;
    require_unitary(v, "second")?;
    let iu = accepted_indices(u, fam, window, links_u, "first")?;
    let iv = accepted_indices(v, fam, window, links_v, "second")?;
    if iu != iv {
        return Err(Error::NotConnectable(format!(
            "endpoint index vectors differ: {iu:?} vs {iv:?}; no norm-continuous unitary path \
             respecting the block family can connect them"
        )));
    }
    Ok(u.matrix().dot(&adjoint(v.matrix())))
}

/// Connect two unitaries with equal accepted index vectors through the block
/// family, treating every block as active at once (the route suited to
/// uniformly spread families). The emitted samples are unitary: each stage
/// is polar lifted pointwise.
pub fn connect_unitaries_type_i(
    u: &LinOp,
    v: &LinOp,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    links_u: &[(usize, usize)],
    links_v: &[(usize, usize)],
) -> Result<HomotopyPath> {
    let w = connect_unitaries_common(u, v, fam, window, links_u, links_v)?;
    let all: Vec<usize> = (0..fam.m()).collect();
    let stages = reduce_active_to_identity(&w, fam, &all)?;
    let lifted = lift_stages(stages, v.matrix().clone());
    let path = assemble(PathClass::Unitary, &u.map(), &lifted, Some(fam))?;
    check_endpoint_drift(&path, u, v)?;
    Ok(path)
}

/// Connect two unitaries with equal accepted index vectors by first splitting
/// `W = U V*` into its block diagonal plus a captured off-diagonal part, then
/// retiring the outer blocks and handing the remaining prefix to the type-I
/// reduction (the route suited to families with a distinguished core).
pub fn connect_unitaries_type_ii(
    u: &LinOp,
    v: &LinOp,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    links_u: &[(usize, usize)],
    links_v: &[(usize, usize)],
) -> Result<HomotopyPath> {
    let w = connect_unitaries_common(u, v, fam, window, links_u, links_v)?;
    let d = w.nrows();

    let mut dblock = Array2::from_elem((d, d), C64::new(0.0, 0.0));
    for j in 0..fam.m() {
        let idx = family_support(fam, j)?;
        embed_block(&mut dblock, &compress(&w, idx), idx);
    }
    let k = &w - &dblock;
    let eps = tol::PATH_DELTA_INV / 4.0 * sigma_min(&w);
    let (p, _, pkp) = capture_prefix(&k, fam, eps)?;
    let m1 = &dblock + &pkp;
    let stage1 = Stage::line(w, m1.clone());

    // Floor the outer blocks, then contract them to the identity while the
    // prefix part stays fixed.
    let mut m2 = m1.clone();
    let mut outer: Vec<(Vec<usize>, ContractArc)> = Vec::new();
    for j in p..fam.m() {
        let idx = family_support(fam, j)?.to_vec();
        let (g_j, _) = svd_floor(&compress(&m1, &idx), tol::PATH_FLOOR)?;
        embed_block(&mut m2, &g_j, &idx);
        outer.push((idx, contract_arc(&g_j)?));
    }
    let stage2 = Stage::line(m1, m2.clone());
    let outer = Arc::new(outer);
    let stage3 = {
        let base = m2.clone();
        let outer = outer.clone();
        Stage::new(move |t| {
            let mut s = base.clone();
            for (idx, arc) in outer.iter() {
                embed_block(&mut s, &arc.at(1.0 - t), idx);
            }
            s
        })
    };
    let m3 = stage3.at(1.0);
    let sigma3 = sigma_min(&m3);
    if sigma3 < tol::PATH_DELTA_INV {
        return Err(Error::NotConnectable(format!(
            "the prefix compression is near singular (sigma_min {sigma3:.3e}); the block split \
             does not stay invertible at this size"
        )));
    }

    let inner: Vec<usize> = (0..p).collect();
    let mut stages = vec![stage1, stage2, stage3];
    stages.extend(reduce_active_to_identity(&m3, fam, &inner)?);
    let lifted = lift_stages(stages, v.matrix().clone());
    let path = assemble(PathClass::Unitary, &u.map(), &lifted, Some(fam))?;
    check_endpoint_drift(&path, u, v)?;
    Ok(path)
}

/// Index vectors at every sample of a path. Pass empty `links` unless every
/// sample shares the same artificial closure entries: pruning removes the
/// named matrix entries unconditionally, so links belonging to one endpoint
/// must not be applied along the whole path.
pub fn index_along_path(
    path: &HomotopyPath,
    fam: &ProjectionFamily,
    window: &SpatialWindow,
    links: &[(usize, usize)],
) -> Result<Vec<IndexVector>> {
    path.samples
        .par_iter()
        .map(|(_, s)| {
            // Path samples carry no tags; re-validate unitarity here so the
            // index routes accept them.
            let u = LinOp::tagged(s.matrix().clone(), s.map().clone(), &[Tag::Unitary])?;
            index_vector(&u, fam, window, links)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Self-adjoint lemma path.

/// Connect two gapped self-adjoint operators with equal inertia through the
/// congruence `A_t = G_t* B G_t`, where `G = |B|^{-1/2} W |A|^{1/2}` maps the
/// eigenbasis of `A` to that of `B` in ascending eigenvalue order (ties kept
/// in index order) and `G_t` runs along the contraction arc of `G`. Each
/// sample is self-adjoint and gapped; a path between operators of different
/// inertia does not exist and is refused.
pub fn sai_canonical_path(a: &LinOp, b: &LinOp) -> Result<HomotopyPath> {
    if a.map().as_ref() != b.map().as_ref() {
        return Err(Error::SiteMapMismatch);
    }
    let d = a.dim();
    for (op, which) in [(a, "first"), (b, "second")] {
        let m = op.matrix();
        let sa = op_norm(&(m - &adjoint(m)));
        if sa > tol::SELFADJOINT_TOL_PER_DIM * d as f64 * 100.0 {
            return Err(Error::InvalidParameter(format!(
                "{which} endpoint is not self-adjoint: defect {sa:.3e}"
            )));
        }
    }
    let (va, qa) = eigh_ascending(&hermitize(a.matrix()))?;
    let (vb, qb) = eigh_ascending(&hermitize(b.matrix()))?;
    for (op, vals, which) in [(a, &va, "first"), (b, &vb, "second")] {
        let g = vals.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
        if g < tol::PATH_DELTA_INV {
            let _ = op;
            return Err(Error::PathSingular {
                t: if which == "first" { 0.0 } else { 1.0 },
                sigma_min: g,
                required: tol::PATH_DELTA_INV,
            });
        }
    }
    let (an, ap) = sign_counts(&va, 0.0);
    let (bn, bp) = sign_counts(&vb, 0.0);
    if (an, ap) != (bn, bp) {
        return Err(Error::SignCountMismatch(an, ap, bn, bp));
    }

    // G = Q_B |L_B|^{-1/2} Q_B* (Q_B Q_A*) Q_A |L_A|^{1/2} Q_A*
    //   = Q_B diag(|L_B|^{-1/2}) diag(|L_A|^{1/2}) Q_A*  up to the middle
    // pairing, which is the identity in the shared ascending order.
    let half_a = Array1::from_iter(va.iter().map(|&v| C64::new(v.abs().sqrt(), 0.0)));
    let half_b_inv = Array1::from_iter(vb.iter().map(|&v| C64::new(1.0 / v.abs().sqrt(), 0.0)));
    let scale = &half_b_inv * &half_a;
    let g = (&qb * &scale).dot(&adjoint(&qa));
    let arc = contract_arc(&g)?;
    let bm = hermitize(b.matrix());
    let stage = Stage::new(move |t| {
        let g_t = arc.at(1.0 - t);
        hermitize(&adjoint(&g_t).dot(&bm).dot(&g_t))
    });
    let path = assemble(PathClass::Sai, &a.map(), &[stage], None)?;
    check_endpoint_drift(&path, a, b)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Non-triviality certificates and self-adjoint unitary connection.

/// Eigenvalue counts of one block compression against the threshold `delta`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSignCount {
    pub neg: usize,
    pub pos: usize,
    /// Both counts reach the requested rank.
    pub certified: bool,
}

/// Witness that a self-adjoint operator's block compressions all carry at
/// least `r_min` eigenvalues on each side of the gap `(-delta, delta)`.
#[derive(Debug, Clone, Serialize)]
pub struct NonTrivialityCertificate {
    pub delta: f64,
    pub r_min: usize,
    pub blocks: Vec<BlockSignCount>,
    pub all_certified: bool,
}

pub fn non_triviality_certificate(
    op: &LinOp,
    fam: &ProjectionFamily,
    delta: f64,
    r_min: usize,
) -> Result<NonTrivialityCertificate> {
    if op.map().as_ref() != fam.map().as_ref() {
        return Err(Error::SiteMapMismatch);
    }
    let m = op.matrix();
    let d = m.nrows();
    let sa = op_norm(&(m - &adjoint(m)));
    if sa > tol::SELFADJOINT_TOL_PER_DIM * d as f64 * 100.0 {
        return Err(Error::InvalidParameter(format!(
            "a non-triviality certificate needs a self-adjoint operator (defect {sa:.3e})"
        )));
    }
    let mut blocks = Vec::with_capacity(fam.m());
    for j in 0..fam.m() {
        let idx = family_support(fam, j)?;
        let (vals, _) = eigh_ascending(&hermitize(&compress(m, idx)))?;
        let (neg, pos) = sign_counts(&vals, delta);
        blocks.push(BlockSignCount { neg, pos, certified: neg >= r_min && pos >= r_min });
    }
    let all_certified = blocks.iter().all(|b| b.certified);
    Ok(NonTrivialityCertificate { delta, r_min, blocks, all_certified })
}

/// The alternating-sign diagonal of the family, with signs flipped from the
/// highest basis slots downward until the total inertia matches `target_pos`
/// positive eigenvalues, never taking any block below `r_min` of either
/// sign. The result stays certified whenever the target inertia is reachable.
fn aligned_canonical(
    fam: &ProjectionFamily,
    target_pos: usize,
    r_min: usize,
) -> Result<Vec<f64>> {
    let d = fam.dim();
    let mut signs = vec![0.0f64; d];
    let mut supports = Vec::with_capacity(fam.m());
    for j in 0..fam.m() {
        let idx = family_support(fam, j)?.to_vec();
        for (k, &b) in idx.iter().enumerate() {
            signs[b] = if k % 2 == 0 { -1.0 } else { 1.0 };
        }
        supports.push(idx);
    }
    let total_pos = signs.iter().filter(|&&s| s > 0.0).count();
    let mut drift = target_pos as i64 - total_pos as i64;
    for idx in supports.iter().rev() {
        if drift == 0 {
            break;
        }
        let want = if drift > 0 { -1.0 } else { 1.0 };
        loop {
            if drift == 0 {
                break;
            }
            let spare = idx.iter().filter(|&&b| signs[b] == want).count();
            if spare <= r_min {
                break;
            }
            let &slot = idx
                .iter()
                .rev()
                .find(|&&b| signs[b] == want)
                .expect("spare count is positive");
            signs[slot] = -want;
            drift += if want < 0.0 { -1 } else { 1 };
        }
    }
    if drift != 0 {
        return Err(Error::NotConnectable(format!(
            "no certified diagonal form with {target_pos} positive eigenvalues exists at \
             r_min {r_min}; {drift} sign flips cannot be placed"
        )));
    }
    Ok(signs)
}

fn diagonal_matrix(signs: &[f64]) -> Array2<C64> {
    let d = signs.len();
    let mut m = Array2::from_elem((d, d), C64::new(0.0, 0.0));
    for (i, &s) in signs.iter().enumerate() {
        m[[i, i]] = C64::new(s, 0.0);
    }
    m
}

/// Rearrangement of a block of the target diagonal carrying the prescribed
/// counts: keep the block's sign layout, then flip from the highest slot
/// down until the counts match.
fn layout_block(block_signs: &[f64], neg: usize, pos: usize) -> Vec<f64> {
    debug_assert_eq!(neg + pos, block_signs.len());
    let mut out = block_signs.to_vec();
    let mut cur_pos = out.iter().filter(|&&s| s > 0.0).count();
    let mut slot = out.len();
    while cur_pos > pos {
        slot = out[..slot].iter().rposition(|&s| s > 0.0).expect("positive slot exists");
        out[slot] = -1.0;
        cur_pos -= 1;
    }
    let mut slot = out.len();
    while cur_pos < pos {
        slot = out[..slot].iter().rposition(|&s| s < 0.0).expect("negative slot exists");
        out[slot] = 1.0;
        cur_pos += 1;
    }
    out
}

/// Pre-lift stages carrying a self-adjoint unitary `wm` to the diagonal form
/// `xsigns`, all gapped: floor the block diagonal, congruence it onto a
/// count-matched diagonal in the target layout, capture the off-diagonal
/// remainder in a block prefix, and run the eigenbasis-matching congruence
/// inside the prefix.
fn sau_reduction_stages(
    wm: &Array2<C64>,
    fam: &ProjectionFamily,
    xsigns: &[f64],
) -> Result<Vec<Stage>> {
    let wm = hermitize(wm);

    // Floor the diagonal blocks; record per-block spectral data.
    let mut m1 = wm.clone();
    let mut per_block: Vec<(Vec<usize>, Vec<f64>, Array2<C64>)> = Vec::new();
    for j in 0..fam.m() {
        let idx = family_support(fam, j)?.to_vec();
        let (fl, vals, vecs) = sym_floor(&compress(&wm, &idx), tol::PATH_FLOOR)?;
        embed_block(&mut m1, &fl, &idx);
        per_block.push((idx, vals, vecs));
    }
    let stage1 = Stage::line(wm, m1.clone());

    // Congruence each floored block onto the diagonal carrying its own
    // counts in the target layout: S_j = Q_G diag(|l|^{-1/2}) Q_D*, where
    // Q_D permutes ascending eigenvalue order into the layout (negatives
    // first in index order, the lexicographic tie-break).
    let mut arcs: Vec<(Vec<usize>, ContractArc)> = Vec::new();
    for (idx, vals, vecs) in &per_block {
        let r = idx.len();
        let (neg, pos) = sign_counts(&Array1::from_vec(vals.clone()), 0.0);
        let block_target: Vec<f64> = idx.iter().map(|&b| xsigns[b]).collect();
        let layout = layout_block(&block_target, neg, pos);
        // Ascending order k occupies the k-th negative slot of the layout
        // for k < neg, then the (k - neg)-th positive slot.
        let mut neg_slots: Vec<usize> = Vec::new();
        let mut pos_slots: Vec<usize> = Vec::new();
        for (s, &v) in layout.iter().enumerate() {
            if v < 0.0 {
                neg_slots.push(s);
            } else {
                pos_slots.push(s);
            }
        }
        let mut perm = Array2::from_elem((r, r), C64::new(0.0, 0.0));
        for k in 0..r {
            let slot = if k < neg { neg_slots[k] } else { pos_slots[k - neg] };
            perm[[k, slot]] = C64::new(1.0, 0.0);
        }
        let half_inv = Array1::from_iter(vals.iter().map(|&v| C64::new(1.0 / v.abs().sqrt(), 0.0)));
        let s_j = (vecs * &half_inv).dot(&perm);
        arcs.push((idx.clone(), contract_arc(&s_j)?));
    }
    let arcs = Arc::new(arcs);
    let stage2 = {
        let arcs = arcs.clone();
        let base = m1.clone();
        Stage::new(move |t| {
            let mut s = eye(base.nrows());
            for (idx, arc) in arcs.iter() {
                embed_block(&mut s, &arc.at(t), idx);
            }
            hermitize(&adjoint(&s).dot(&base).dot(&s))
        })
    };
    let m2 = stage2.at(1.0);

    // Straight line absorbing the off-diagonal remainder into a block prefix.
    let xm = diagonal_matrix(xsigns);
    let b = &m2 - &xm;
    let eps = tol::PATH_DELTA_INV / 4.0 * sigma_min(&m2);
    let (p, _, pbp) = capture_prefix(&b, fam, eps)?;
    let m3 = hermitize(&(&xm + &pbp));
    let stage3 = Stage::line(m2, m3.clone());
    if p == 0 {
        return Ok(vec![stage1, stage2, stage3]);
    }

    // Eigenbasis-matching congruence inside the prefix, from the compression
    // of m3 to the diagonal restriction of the target. Gapped stages conserve
    // inertia, so the counts agree; this is re-checked, not assumed.
    let mut idx_p: Vec<usize> = Vec::new();
    for j in 0..p {
        idx_p.extend_from_slice(family_support(fam, j)?);
    }
    idx_p.sort_unstable();
    let a_in = compress(&m3, &idx_p);
    let y_signs: Vec<f64> = idx_p.iter().map(|&b| xsigns[b]).collect();
    let (va, qa) = eigh_ascending(&hermitize(&a_in))?;
    let (an, ap) = sign_counts(&va, 0.0);
    let yn = y_signs.iter().filter(|&&s| s < 0.0).count();
    let yp = y_signs.len() - yn;
    if (an, ap) != (yn, yp) {
        return Err(Error::SignCountMismatch(an, ap, yn, yp));
    }
    let r = idx_p.len();
    let mut qy = Array2::from_elem((r, r), C64::new(0.0, 0.0));
    let mut neg_slots: Vec<usize> = Vec::new();
    let mut pos_slots: Vec<usize> = Vec::new();
    for (s, &v) in y_signs.iter().enumerate() {
        if v < 0.0 {
            neg_slots.push(s);
        } else {
            pos_slots.push(s);
        }
    }
    for k in 0..r {
        let slot = if k < an { neg_slots[k] } else { pos_slots[k - an] };
        qy[[slot, k]] = C64::new(1.0, 0.0);
    }
    let half = Array1::from_iter(va.iter().map(|&v| C64::new(v.abs().sqrt(), 0.0)));
    let g_in = (&qy * &half).dot(&adjoint(&qa));
    let arc_in = contract_arc(&g_in)?;
    let y_sub = diagonal_matrix(&y_signs);
    let outside = {
        let mut o = m3.clone();
        let zero = Array2::from_elem((r, r), C64::new(0.0, 0.0));
        embed_block(&mut o, &zero, &idx_p);
        o
    };
    let stage4 = Stage::new(move |t| {
        let g_t = arc_in.at(1.0 - t);
        let inner = hermitize(&adjoint(&g_t).dot(&y_sub).dot(&g_t));
        let mut s = outside.clone();
        embed_block(&mut s, &inner, &idx_p);
        s
    });
    Ok(vec![stage1, stage2, stage3, stage4])
}

/// Connect two certified self-adjoint unitaries through the inertia-aligned
/// diagonal form of the family. Both endpoints must carry a full
/// non-triviality certificate at gap [`tol::SAI_GAP_DELTA`] and rank `r_min`,
/// and must have equal total inertia; per-block inertia may differ, in which
/// case the path necessarily leaves the block diagonal while redistributing
/// eigenvalues, and the recorded locality scores say by how much. The
/// emitted samples are the sign functions of gapped self-adjoint stages;
/// their pre-lift gaps are recorded in the certificates and must clear
/// [`tol::SAI_GAP_DELTA`].
///
/// `sharp` names which block type the endpoints were classified against;
/// only types I and II are supported here.
pub fn connect_saus(
    u: &LinOp,
    v: &LinOp,
    fam: &ProjectionFamily,
    sharp: LocalityType,
    r_min: usize,
) -> Result<HomotopyPath> {
    match sharp {
        LocalityType::I | LocalityType::II => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "self-adjoint unitary paths are constructed for block types I and II, not {other}"
            )));
        }
    }
    if u.map().as_ref() != v.map().as_ref() || u.map().as_ref() != fam.map().as_ref() {
        return Err(Error::SiteMapMismatch);
    }
    require_sau(u, "first")?;
    require_sau(v, "second")?;
    for (op, which) in [(u, "first"), (v, "second")] {
        let cert = non_triviality_certificate(op, fam, tol::SAI_GAP_DELTA, r_min)?;
        if !cert.all_certified {
            let j = cert.blocks.iter().position(|b| !b.certified).unwrap();
            return Err(Error::CertificateFailed(format!(
                "block {j} of the {which} endpoint carries {} negative / {} positive certified \
                 eigenvalues, below the requested rank {r_min}",
                cert.blocks[j].neg, cert.blocks[j].pos
            )));
        }
    }
    let (vu, _) = eigh_ascending(&hermitize(u.matrix()))?;
    let (vv, _) = eigh_ascending(&hermitize(v.matrix()))?;
    let (un, up) = sign_counts(&vu, 0.0);
    let (vn, vp) = sign_counts(&vv, 0.0);
    if (un, up) != (vn, vp) {
        return Err(Error::SignCountMismatch(un, up, vn, vp));
    }

    let xsigns = aligned_canonical(fam, up, r_min)?;
    let mut pre: Vec<Stage> = sau_reduction_stages(u.matrix(), fam, &xsigns)?;
    let back = sau_reduction_stages(v.matrix(), fam, &xsigns)?;
    pre.extend(back.into_iter().rev().map(Stage::reversed));
    let pre: Vec<Arc<Stage>> = pre.into_iter().map(Arc::new).collect();

    let lifted: Vec<Stage> = pre
        .iter()
        .map(|st| {
            let st = st.clone();
            Stage::new(move |t| sgn_of(&st.at(t)))
        })
        .collect();
    let mut path = assemble(PathClass::Sau, &u.map(), &lifted, Some(fam))?;

    // Overwrite each certificate's gap with the pre-lift generator gap at
    // the same t, and require it clears the working gap.
    let k = pre.len();
    let gaps: Vec<f64> = path
        .samples
        .par_iter()
        .map(|(t, _)| {
            let (i, lt) = stage_of(*t, k);
            hermitian_gap(&pre[i].at(lt))
        })
        .collect::<Result<_>>()?;
    for (c, g) in path.certificates.iter_mut().zip(&gaps) {
        if *g < tol::SAI_GAP_DELTA {
            return Err(Error::PathSingular {
                t: c.t,
                sigma_min: *g,
                required: tol::SAI_GAP_DELTA,
            });
        }
        c.gap = Some(*g);
    }
    check_endpoint_drift(&path, u, v)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Validation.

/// Everything re-measured at one sample during validation.
#[derive(Debug, Clone, Serialize)]
pub struct PathSampleReport {
    pub t: f64,
    pub sigma_min: f64,
    pub unitary_defect: f64,
    pub selfadjoint_defect: f64,
    pub square_defect: Option<f64>,
    pub gap: Option<f64>,
    pub locality: f64,
    /// Total (negative, positive) eigenvalue counts, self-adjoint classes.
    pub total_counts: Option<(usize, usize)>,
    /// Per-block compression counts at [`tol::SAI_GAP_DELTA`].
    pub block_counts: Option<Vec<BlockSignCount>>,
    /// All block counts reach `r_min`, when requested.
    pub certified: Option<bool>,
}

/// Pass/fail summary of a validated path.
#[derive(Debug, Clone, Serialize)]
pub struct PathFlags {
    /// Every sample has `sigma_min` at least [`tol::PATH_DELTA_INV`].
    pub all_invertible: bool,
    /// Adjacent steps within [`tol::PATH_STEP_MAX`].
    pub steps_ok: bool,
    /// Class defects within working tolerances at every sample.
    pub class_ok: bool,
    /// Total inertia constant along the path (self-adjoint classes).
    pub sign_constant: Option<bool>,
    /// Interior locality scores within [`tol::PATH_LOCALITY_FACTOR`] times
    /// the endpoint scores. Recorded, not assumed: redistribution paths
    /// legitimately fail this and say so here.
    pub locality_ok: bool,
    /// Sample indices failing invertibility or class membership.
    pub flagged: Vec<usize>,
}

/// Full validation report: per-sample measurements plus summary flags.
#[derive(Debug, Clone, Serialize)]
pub struct PathValidation {
    pub class: PathClass,
    /// Block type the family was classified as; recorded for the report.
    pub sharp: LocalityType,
    pub rows: Vec<PathSampleReport>,
    pub flags: PathFlags,
}

/// Re-measure every sample of a path against the family: invertibility
/// margins, class defects, spectral gaps and sign counts (self-adjoint
/// classes), block locality scores. Nothing is trusted from construction;
/// this is a pure re-computation and returns a report rather than failing,
/// except when sign counts change along a self-adjoint path, which no
/// norm-continuous gapped family allows.
pub fn validate_path(
    path: &HomotopyPath,
    fam: &ProjectionFamily,
    sharp: LocalityType,
    r_min: usize,
) -> Result<PathValidation> {
    if path.first().map().as_ref() != fam.map().as_ref() {
        return Err(Error::SiteMapMismatch);
    }
    let class = path.class;
    let selfadjoint = matches!(class, PathClass::Sai | PathClass::Sau);
    let rows: Vec<PathSampleReport> = path
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, (t, s))| {
            let m = s.matrix();
            let d = m.nrows();
            let ms = adjoint(m);
            let unitary_defect = op_norm(&(ms.dot(m) - eye(d)));
            let selfadjoint_defect = op_norm(&(m - &ms));
            let locality = block_locality(s, fam)?;
            let (square_defect, gap, total_counts, block_counts, certified) = if selfadjoint {
                let sq = (class == PathClass::Sau).then(|| op_norm(&(m.dot(m) - eye(d))));
                let (vals, _) = eigh_ascending(&hermitize(m))?;
                let g = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
                let totals = sign_counts(&vals, 0.0);
                // The gap of sign-lifted samples is the pre-lift gap stored
                // at construction; keep the stricter of the two on record.
                let g = match path.certificates.get(i).and_then(|c| c.gap) {
                    Some(built) => g.min(built),
                    None => g,
                };
                let mut blocks = Vec::with_capacity(fam.m());
                for j in 0..fam.m() {
                    let idx = family_support(fam, j)?;
                    let (bv, _) = eigh_ascending(&hermitize(&compress(m, idx)))?;
                    let (neg, pos) = sign_counts(&bv, tol::SAI_GAP_DELTA);
                    blocks.push(BlockSignCount {
                        neg,
                        pos,
                        certified: neg >= r_min && pos >= r_min,
                    });
                }
                let cert = blocks.iter().all(|b| b.certified);
                (sq, Some(g), Some(totals), Some(blocks), Some(cert))
            } else {
                (None, None, None, None, None)
            };
            Ok(PathSampleReport {
                t: *t,
                sigma_min: sigma_min(m),
                unitary_defect,
                selfadjoint_defect,
                square_defect,
                gap,
                locality,
                total_counts,
                block_counts,
                certified,
            })
        })
        .collect::<Result<_>>()?;

    let d = path.first().dim() as f64;
    let mut flagged = Vec::new();
    let mut all_invertible = true;
    let mut class_ok = true;
    for (i, r) in rows.iter().enumerate() {
        let inv_ok = r.sigma_min >= tol::PATH_DELTA_INV;
        let member = match class {
            PathClass::Invertible => true,
            PathClass::Unitary => r.unitary_defect <= tol::UNITARY_TOL_PER_DIM * d,
            PathClass::Sai => r.selfadjoint_defect <= tol::SELFADJOINT_TOL_PER_DIM * d * 100.0,
            PathClass::Sau => {
                r.selfadjoint_defect <= tol::SELFADJOINT_TOL_PER_DIM * d * 100.0
                    && r.square_defect.unwrap_or(f64::INFINITY) <= tol::SAU_DEFECT_TOL
            }
        };
        if !inv_ok || !member {
            flagged.push(i);
        }
        all_invertible &= inv_ok;
        class_ok &= member;
    }
    let steps_ok = path.samples.windows(2).all(|w| {
        op_norm(&(w[1].1.matrix() - w[0].1.matrix())) <= tol::PATH_STEP_MAX * (1.0 + 1e-9)
    });
    let sign_constant = selfadjoint.then(|| {
        let first = rows[0].total_counts;
        rows.iter().all(|r| r.total_counts == first)
    });
    let end_scale = rows[0].locality.max(rows[rows.len() - 1].locality);
    let locality_ok = rows
        .iter()
        .all(|r| r.locality <= tol::PATH_LOCALITY_FACTOR * end_scale + 1e-9);

    if let Some(false) = sign_constant {
        return Err(Error::CertificateFailed(
            "sign counts change along a self-adjoint path; the samples cross the gap".into(),
        ));
    }

    Ok(PathValidation {
        class,
        sharp,
        rows,
        flags: PathFlags { all_invertible, steps_ok, class_ok, sign_constant, locality_ok, flagged },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{canonical_sau, shift, ShiftBoundary};
    use crate::family::ProjectionFamily;
    use crate::geometry::{Geometry, Site, SiteMap};
    use crate::star::leg_family;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn star(legs: u32, leg_len: u32) -> Arc<SiteMap> {
        SiteMap::new(Geometry::StarGraph { legs, leg_len, include_vertex: false }, 1).unwrap()
    }

    fn line(half_width: u32) -> Arc<SiteMap> {
        SiteMap::new(Geometry::LineZ { half_width }, 1).unwrap()
    }

    /// Two half-line blocks on LineZ: x < 0 and x >= 0.
    fn half_line_family(map: &Arc<SiteMap>) -> ProjectionFamily {
        let assignment: Vec<usize> = (0..map.dim())
            .map(|b| match map.site(map.site_of_basis(b)) {
                Site::Line { x } => usize::from(x >= 0),
                _ => unreachable!(),
            })
            .collect();
        ProjectionFamily::from_assignment(map.clone(), &assignment, 2, vec![None, None]).unwrap()
    }

    fn op(map: &Arc<SiteMap>, m: Array2<C64>) -> LinOp {
        LinOp::zeros(map.clone()).with_matrix(m).unwrap()
    }

    fn diag_op(map: &Arc<SiteMap>, entries: &[f64]) -> LinOp {
        let d = entries.len();
        let mut m = Array2::from_elem((d, d), c(0.0, 0.0));
        for (i, &v) in entries.iter().enumerate() {
            m[[i, i]] = c(v, 0.0);
        }
        op(map, m)
    }

    fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        let g = Array2::from_shape_fn((d, d), |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        polar(&g).unwrap().0
    }

    /// Unitary supported inside one coordinate block, identity elsewhere.
    fn block_unitary(d: usize, idx: &[usize], rng: &mut ChaCha8Rng) -> Array2<C64> {
        let mut m = eye(d);
        embed_block(&mut m, &random_unitary(idx.len(), rng), idx);
        m
    }

    fn max_interior_step(path: &HomotopyPath) -> f64 {
        path.samples()
            .windows(2)
            .map(|w| op_norm(&(w[1].1.matrix() - w[0].1.matrix())))
            .fold(0.0, f64::max)
    }

    // -- sampling contract ---------------------------------------------------

    #[test]
    fn from_samples_enforces_times_and_steps() {
        let map = line(1);
        let i3 = op(&map, eye(3));
        // One sample: rejected.
        assert!(matches!(
            HomotopyPath::from_samples(PathClass::Unitary, vec![(0.0, i3.clone())], None),
            Err(Error::InvalidParameter(_))
        ));
        // Times not reaching 1: rejected.
        assert!(matches!(
            HomotopyPath::from_samples(
                PathClass::Unitary,
                vec![(0.0, i3.clone()), (0.5, i3.clone())],
                None
            ),
            Err(Error::InvalidParameter(_))
        ));
        // A step of norm 2 (identity to minus identity): rejected.
        let m3 = op(&map, eye(3).mapv(|z| -z));
        assert!(matches!(
            HomotopyPath::from_samples(
                PathClass::Unitary,
                vec![(0.0, i3.clone()), (1.0, m3)],
                None
            ),
            Err(Error::InvalidParameter(_))
        ));
        // A fine enough grid passes: 32 steps of the half-turn phase move
        // 2 sin(pi / 64) each, inside the modulus.
        let phases: Vec<(f64, LinOp)> = (0..=32)
            .map(|k| {
                let t = k as f64 / 32.0;
                (t, op(&map, eye(3).mapv(|z| z * C64::from_polar(1.0, t * PI))))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Unitary, phases, None).unwrap();
        assert_eq!(path.len(), 33);
        assert!(path.certificates().iter().all(|c| c.unitary_defect < 1e-12));
    }

    // -- polar lift ----------------------------------------------------------

    #[test]
    fn polar_lift_retracts_a_perturbed_line_onto_unitaries() {
        let map = line(3);
        let d = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Array2::from_shape_fn((d, d), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let b = g.mapv(|z| z * (0.5 / op_norm(&g)));
        // Line from 1 to 1 + B, sampled in ten steps.
        let samples: Vec<(f64, LinOp)> = (0..=10)
            .map(|k| {
                let t = k as f64 / 10.0;
                (t, op(&map, &eye(d) + &b.mapv(|z| z * t)))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Invertible, samples, None).unwrap();
        let lifted = polar_lift(&path, None).unwrap();
        assert_eq!(lifted.class(), PathClass::Unitary);
        for c in lifted.certificates() {
            assert!(c.unitary_defect < 1e-10, "defect {} at t = {}", c.unitary_defect, c.t);
        }
        // The unitary start is a fixed point.
        assert!(op_norm(&(lifted.first().matrix() - path.first().matrix())) < 1e-10);
        // Idempotent: lifting again changes nothing.
        let again = polar_lift(&lifted, None).unwrap();
        assert_eq!(again.len(), lifted.len());
        for (a, b) in again.samples().iter().zip(lifted.samples()) {
            assert!((a.0 - b.0).abs() < 1e-15);
            assert!(op_norm(&(a.1.matrix() - b.1.matrix())) < 1e-10);
        }
    }

    #[test]
    fn polar_lift_rejects_near_singular_samples() {
        let map = line(1);
        let tiny = op(&map, eye(3).mapv(|z| z * 1e-4));
        let samples: Vec<(f64, LinOp)> = (0..=20)
            .map(|k| {
                let t = k as f64 / 20.0;
                let m = eye(3).mapv(|z| z * (1.0 - t)) + tiny.matrix().mapv(|z| z * t);
                (t, op(&map, m))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Invertible, samples, None).unwrap();
        match polar_lift(&path, None) {
            Err(Error::PathSingular { sigma_min, required, .. }) => {
                assert!(sigma_min < required);
            }
            other => panic!("expected PathSingular, got {other:?}"),
        }
    }

    #[test]
    fn polar_lift_refines_stretched_steps() {
        // A path whose raw steps are fine but whose polar factors move
        // faster: small sigma_min amplifies the retraction.
        let map = line(1);
        let rot = |t: f64| {
            let mut m = eye(3).mapv(|z| z * 0.02);
            m[[0, 0]] = c(0.02 * (1.0 - t) - 0.02 * t, 0.0);
            m[[1, 1]] = c(0.02, 0.0);
            m
        };
        // Entries swing by 0.04 in norm, below the modulus, but the polar
        // factor of the first slot flips sign: the lift must refuse rather
        // than emit a jump, since the chord passes through a singular point.
        let samples: Vec<(f64, LinOp)> = (0..=10)
            .map(|k| {
                let t = k as f64 / 10.0;
                (t, op(&map, rot(t)))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Invertible, samples, None).unwrap();
        assert!(matches!(polar_lift(&path, None), Err(Error::PathSingular { .. })));
    }

    // -- unitary connection, type I ------------------------------------------

    #[test]
    fn type_i_connects_a_unitary_to_itself() {
        let map = line(16);
        let fam = half_line_family(&map);
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let w = SpatialWindow::center(8, 4);
        let path = connect_unitaries_type_i(&u, &u, &fam, &w, &[], &[]).unwrap();
        // Every sample equals the endpoint: w = 1 reduces trivially.
        for (_, s) in path.samples() {
            assert!(op_norm(&(s.matrix() - u.matrix())) < 1e-9);
        }
        let val = validate_path(&path, &fam, LocalityType::I, 1).unwrap();
        assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);
        assert!(val.flags.locality_ok);
    }

    #[test]
    fn type_i_connects_conjugated_shifts_with_constant_index() {
        // V = D* U D for a block-diagonal phase D: same index vector, a
        // genuinely different unitary. The wrap entry of the periodic shift
        // sits far outside the window, so the index needs no closure links
        // and stays honest at every sample.
        let map = line(16);
        let fam = half_line_family(&map);
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let d = map.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut dm = Array2::from_elem((d, d), c(0.0, 0.0));
        for i in 0..d {
            dm[[i, i]] = C64::from_polar(1.0, rng.random::<f64>() * TAU);
        }
        let vm = adjoint(&dm).dot(u.matrix()).dot(&dm);
        let v = LinOp::tagged(vm, map.clone(), &[Tag::Unitary]).unwrap();
        let w = SpatialWindow::center(8, 4);
        let path = connect_unitaries_type_i(&u, &v, &fam, &w, &[], &[]).unwrap();

        assert!(op_norm(&(path.first().matrix() - u.matrix())) < 1e-9);
        assert!(op_norm(&(path.last().matrix() - v.matrix())) < 1e-9);
        assert!(max_interior_step(&path) <= tol::PATH_STEP_MAX * (1.0 + 1e-9));

        let val = validate_path(&path, &fam, LocalityType::I, 1).unwrap();
        assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);

        // Index vector constant at every sample along the path.
        let per_sample = index_along_path(&path, &fam, &w, &[]).unwrap();
        let expected = index_vector(&u, &fam, &w, &[]).unwrap().accepted().unwrap();
        for iv in &per_sample {
            assert_eq!(iv.accepted().as_ref(), Some(&expected));
        }
    }

    #[test]
    fn type_i_rejects_unequal_index_vectors() {
        let map = line(16);
        let fam = half_line_family(&map);
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let id = LinOp::tagged(eye(map.dim()), map.clone(), &[Tag::Unitary]).unwrap();
        let w = SpatialWindow::center(8, 4);
        match connect_unitaries_type_i(&u, &id, &fam, &w, &[], &[]) {
            Err(Error::NotConnectable(msg)) => assert!(msg.contains("index vectors differ")),
            other => panic!("expected NotConnectable, got {other:?}"),
        }
    }

    #[test]
    fn type_i_rejects_non_unitary_endpoints() {
        let map = line(16);
        let fam = half_line_family(&map);
        // The open-boundary shift drops a matrix element: a strict isometry
        // defect that the connection must refuse.
        let partial = shift(&map, 0, 1, ShiftBoundary::Open).unwrap();
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let w = SpatialWindow::center(8, 4);
        assert!(matches!(
            connect_unitaries_type_i(&partial, &u, &fam, &w, &[], &[]),
            Err(Error::InvalidParameter(_))
        ));
    }

    // -- unitary connection, type II -----------------------------------------

    #[test]
    fn type_ii_connects_conjugated_shifts() {
        let map = line(16);
        let fam = half_line_family(&map);
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let d = map.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut dm = Array2::from_elem((d, d), c(0.0, 0.0));
        for i in 0..d {
            dm[[i, i]] = C64::from_polar(1.0, rng.random::<f64>() * TAU);
        }
        let v =
            LinOp::tagged(adjoint(&dm).dot(u.matrix()).dot(&dm), map.clone(), &[Tag::Unitary])
                .unwrap();
        let w = SpatialWindow::center(8, 4);
        let path = connect_unitaries_type_ii(&u, &v, &fam, &w, &[], &[]).unwrap();
        assert!(op_norm(&(path.first().matrix() - u.matrix())) < 1e-9);
        assert!(op_norm(&(path.last().matrix() - v.matrix())) < 1e-9);
        let val = validate_path(&path, &fam, LocalityType::II, 1).unwrap();
        assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);
        let per_sample = index_along_path(&path, &fam, &w, &[]).unwrap();
        let expected = index_vector(&u, &fam, &w, &[]).unwrap().accepted().unwrap();
        for iv in &per_sample {
            assert_eq!(iv.accepted().as_ref(), Some(&expected));
        }
    }

    #[test]
    fn type_ii_rejects_unequal_index_vectors() {
        let map = line(16);
        let fam = half_line_family(&map);
        let u = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
        let id = LinOp::tagged(eye(map.dim()), map.clone(), &[Tag::Unitary]).unwrap();
        let w = SpatialWindow::center(8, 4);
        assert!(matches!(
            connect_unitaries_type_ii(&u, &id, &fam, &w, &[], &[]),
            Err(Error::NotConnectable(_))
        ));
    }

    // -- self-adjoint lemma path ----------------------------------------------

    #[test]
    fn sai_path_connects_equal_inertia_diagonals() {
        // diag(1, -1, 2, -3) and a permuted diag(5, -1, 1, -1): inertia
        // (2, 2) on both sides, different spectra and layouts.
        let map = star(4, 1);
        let a = diag_op(&map, &[1.0, -1.0, 2.0, -3.0]);
        let b = diag_op(&map, &[5.0, -1.0, 1.0, -1.0]);
        let path = sai_canonical_path(&a, &b).unwrap();
        assert_eq!(path.class(), PathClass::Sai);
        assert!(op_norm(&(path.first().matrix() - a.matrix())) < 1e-9);
        assert!(op_norm(&(path.last().matrix() - b.matrix())) < 1e-9);
        for c in path.certificates() {
            assert!(c.selfadjoint_defect < 1e-10);
            assert!(c.gap.unwrap() >= tol::PATH_DELTA_INV);
        }
        // Validate against a two-block split of the four slots.
        let fam =
            ProjectionFamily::from_assignment(map.clone(), &[0, 0, 1, 1], 2, vec![None, None])
                .unwrap();
        let val = validate_path(&path, &fam, LocalityType::I, 0).unwrap();
        assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);
        assert_eq!(val.flags.sign_constant, Some(true));
    }

    #[test]
    fn sai_path_rejects_inertia_mismatch() {
        let map = star(3, 1);
        let a = diag_op(&map, &[1.0, 1.0, -1.0]);
        let b = diag_op(&map, &[1.0, -1.0, -1.0]);
        match sai_canonical_path(&a, &b) {
            Err(Error::SignCountMismatch(an, ap, bn, bp)) => {
                assert_eq!((an, ap, bn, bp), (1, 2, 2, 1));
            }
            other => panic!("expected SignCountMismatch, got {other:?}"),
        }
    }

    #[test]
    fn sai_path_handles_degenerate_spectra() {
        let map = star(4, 1);
        let a = diag_op(&map, &[2.0, 2.0, -1.0, -1.0]);
        let b = diag_op(&map, &[1.0, 3.0, -2.0, -2.0]);
        let path = sai_canonical_path(&a, &b).unwrap();
        for c in path.certificates() {
            assert!(c.gap.unwrap() >= tol::PATH_DELTA_INV);
            assert!(c.selfadjoint_defect < 1e-10);
        }
    }

    #[test]
    fn sai_path_is_constant_between_equal_endpoints() {
        let map = star(3, 1);
        let a = diag_op(&map, &[1.0, -2.0, 3.0]);
        let path = sai_canonical_path(&a, &a).unwrap();
        for (_, s) in path.samples() {
            assert!(op_norm(&(s.matrix() - a.matrix())) < 1e-9);
        }
    }

    #[test]
    fn sai_path_rejects_gapless_endpoints() {
        let map = star(3, 1);
        let a = diag_op(&map, &[1e-5, -1.0, 1.0]);
        let b = diag_op(&map, &[1.0, -1.0, 1.0]);
        assert!(matches!(sai_canonical_path(&a, &b), Err(Error::PathSingular { .. })));
    }

    // -- non-triviality certificates -------------------------------------------

    #[test]
    fn certificate_counts_block_eigenvalues() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        let cert = non_triviality_certificate(&x, &fam, tol::SAI_GAP_DELTA, 2).unwrap();
        assert!(cert.all_certified);
        for b in &cert.blocks {
            assert_eq!((b.neg, b.pos), (4, 4));
        }
        // Rank 5 is not available in an 8-dimensional block split 4/4.
        let strict = non_triviality_certificate(&x, &fam, tol::SAI_GAP_DELTA, 5).unwrap();
        assert!(!strict.all_certified);
    }

    #[test]
    fn certificate_rejects_non_selfadjoint_input() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let u = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            op(&map, random_unitary(map.dim(), &mut rng))
        };
        assert!(matches!(
            non_triviality_certificate(&u, &fam, tol::SAI_GAP_DELTA, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    // -- self-adjoint unitary connection ----------------------------------------

    #[test]
    fn connect_saus_is_constant_on_equal_endpoints() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        let path = connect_saus(&x, &x, &fam, LocalityType::I, 2).unwrap();
        for (_, s) in path.samples() {
            assert!(op_norm(&(s.matrix() - x.matrix())) < 1e-9);
        }
    }

    #[test]
    fn connect_saus_joins_block_conjugated_endpoints() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut q = eye(map.dim());
        for j in 0..fam.m() {
            let idx = fam.support(j).unwrap().to_vec();
            embed_block(&mut q, &random_unitary(idx.len(), &mut rng), &idx);
        }
        let um = q.dot(x.matrix()).dot(&adjoint(&q));
        let u = op(&map, hermitize(&um));
        let path = connect_saus(&u, &x, &fam, LocalityType::I, 2).unwrap();
        assert_eq!(path.class(), PathClass::Sau);
        assert!(op_norm(&(path.first().matrix() - u.matrix())) < 1e-9);
        assert!(op_norm(&(path.last().matrix() - x.matrix())) < 1e-9);
        let val = validate_path(&path, &fam, LocalityType::I, 2).unwrap();
        assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);
        assert_eq!(val.flags.sign_constant, Some(true));
        // Block-diagonal endpoints conjugated blockwise: the path never has
        // to leave the block algebra by much.
        assert!(val.flags.locality_ok);
        for r in &val.rows {
            assert!(r.square_defect.unwrap() <= tol::SAU_DEFECT_TOL);
            assert!(r.gap.unwrap() >= tol::SAI_GAP_DELTA);
            assert!(r.certified.unwrap());
        }
    }

    #[test]
    fn connect_saus_joins_cross_block_rotated_endpoints() {
        // A Givens rotation across the first two legs mixes blocks; per-block
        // counts stay (4, 4) but the endpoint is no longer block diagonal.
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        let d = map.dim();
        let mut q = eye(d);
        let (i, j) = (0, 8);
        let (cs, sn) = (0.3f64.cos(), 0.3f64.sin());
        q[[i, i]] = c(cs, 0.0);
        q[[j, j]] = c(cs, 0.0);
        q[[i, j]] = c(-sn, 0.0);
        q[[j, i]] = c(sn, 0.0);
        let u = op(&map, hermitize(&q.dot(x.matrix()).dot(&adjoint(&q))));
        let path = connect_saus(&u, &x, &fam, LocalityType::II, 2).unwrap();
        let val = validate_path(&path, &fam, LocalityType::II, 2).unwrap();
        assert!(val.flags.all_invertible && val.flags.class_ok && val.flags.steps_ok);
        assert_eq!(val.flags.sign_constant, Some(true));
    }

    #[test]
    fn connect_saus_redistributes_block_inertia_and_reports_locality() {
        // Endpoints with equal total inertia (12, 12) but different per-block
        // counts: (5,3), (3,5), (4,4) against the alternating (4,4) layout.
        // Such a path exists but must leave the block diagonal while
        // eigenvalues migrate between blocks; the validation records the
        // locality excursion instead of pretending the path is block local.
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let mut signs = Vec::new();
        for (j, counts) in [(0usize, (5usize, 3usize)), (1, (3, 5)), (2, (4, 4))] {
            let r = fam.rank(j);
            let (neg, pos) = counts;
            assert_eq!(neg + pos, r);
            for k in 0..r {
                signs.push(if k < neg { -1.0 } else { 1.0 });
            }
        }
        let u = diag_op(&map, &signs);
        let x = canonical_sau(&fam).unwrap();
        let path = connect_saus(&u, &x, &fam, LocalityType::I, 2).unwrap();
        let val = validate_path(&path, &fam, LocalityType::I, 2).unwrap();
        assert!(val.flags.all_invertible && val.flags.class_ok && val.flags.steps_ok);
        // Total inertia is conserved...
        assert_eq!(val.flags.sign_constant, Some(true));
        // ...but the endpoints are block diagonal (locality score zero) and
        // the interior is not: the honest report flags the excursion.
        assert!(!val.flags.locality_ok);
        let interior_max =
            val.rows.iter().map(|r| r.locality).fold(0.0, f64::max);
        assert!(interior_max > 0.1, "redistribution moved through the block algebra?");
        // Per-block counts differ between the endpoints, so some interior
        // sample must show counts differing from both.
        let first = val.rows[0].block_counts.as_ref().unwrap();
        let last = val.rows[val.rows.len() - 1].block_counts.as_ref().unwrap();
        assert_ne!(
            first.iter().map(|b| (b.neg, b.pos)).collect::<Vec<_>>(),
            last.iter().map(|b| (b.neg, b.pos)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn connect_saus_requires_certificates() {
        // One block entirely positive: certified non-triviality fails and
        // the connection must refuse before looking at inertia.
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let mut signs = vec![1.0; map.dim()];
        for &b in fam.support(1).unwrap() {
            signs[b] = if b % 2 == 0 { -1.0 } else { 1.0 };
        }
        for &b in fam.support(2).unwrap() {
            signs[b] = if b % 2 == 0 { -1.0 } else { 1.0 };
        }
        let u = diag_op(&map, &signs);
        let x = canonical_sau(&fam).unwrap();
        match connect_saus(&u, &x, &fam, LocalityType::I, 2) {
            Err(Error::CertificateFailed(msg)) => assert!(msg.contains("block 0")),
            other => panic!("expected CertificateFailed, got {other:?}"),
        }
    }

    #[test]
    fn connect_saus_rejects_total_inertia_mismatch() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        // Flip one sign: still certified per block at r_min 2, but totals
        // (11, 13) vs (12, 12).
        let mut signs: Vec<f64> = x
            .matrix()
            .diag()
            .iter()
            .map(|z| z.re)
            .collect();
        let flip = signs.iter().position(|&s| s < 0.0).unwrap();
        signs[flip] = 1.0;
        let u = diag_op(&map, &signs);
        match connect_saus(&u, &x, &fam, LocalityType::I, 2) {
            Err(Error::SignCountMismatch(un, up, vn, vp)) => {
                assert_eq!((un, up, vn, vp), (11, 13, 12, 12));
            }
            other => panic!("expected SignCountMismatch, got {other:?}"),
        }
    }

    #[test]
    fn connect_saus_rejects_unsupported_block_types() {
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let x = canonical_sau(&fam).unwrap();
        match connect_saus(&x, &x, &fam, LocalityType::III, 2) {
            Err(Error::InvalidParameter(msg)) => assert!(msg.contains("types I and II")),
            other => panic!("expected InvalidParameter, got {other:?}"),
        }
    }

    #[test]
    fn connect_saus_aligns_off_canonical_totals() {
        // Totals (13, 11) on both sides, away from the alternating layout's
        // (12, 12): the aligned canonical form absorbs the drift while
        // keeping every block certified.
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let mut signs_u = Vec::new();
        for (j, neg) in [(0usize, 5usize), (1, 4), (2, 4)] {
            let r = fam.rank(j);
            for k in 0..r {
                signs_u.push(if k < neg { -1.0 } else { 1.0 });
            }
        }
        let u = diag_op(&map, &signs_u);
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let q = {
            let mut q = eye(map.dim());
            for j in 0..fam.m() {
                let idx = fam.support(j).unwrap().to_vec();
                embed_block(&mut q, &random_unitary(idx.len(), &mut rng), &idx);
            }
            q
        };
        let v = op(&map, hermitize(&q.dot(u.matrix()).dot(&adjoint(&q))));
        let path = connect_saus(&u, &v, &fam, LocalityType::I, 2).unwrap();
        let val = validate_path(&path, &fam, LocalityType::I, 2).unwrap();
        assert!(val.flags.class_ok && val.flags.steps_ok && val.flags.all_invertible);
        assert_eq!(val.flags.sign_constant, Some(true));
        assert_eq!(val.rows[0].total_counts, Some((13, 11)));
    }

    // -- validation of adversarial raw samples ---------------------------------

    #[test]
    fn validate_flags_a_gap_crossing_line() {
        // The straight line from 1 to -1 is a legitimate sample list (small
        // steps) but crosses the singular set; validation must flag the
        // interior and refuse the sign-count claim.
        let map = star(3, 4);
        let fam = leg_family(&map).unwrap();
        let d = map.dim();
        let samples: Vec<(f64, LinOp)> = (0..=20)
            .map(|k| {
                let t = k as f64 / 20.0;
                (t, op(&map, eye(d).mapv(|z| z * (1.0 - 2.0 * t))))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Sai, samples, Some(&fam)).unwrap();
        match validate_path(&path, &fam, LocalityType::I, 0) {
            Err(Error::CertificateFailed(msg)) => assert!(msg.contains("sign counts")),
            other => panic!("expected CertificateFailed, got {other:?}"),
        }
    }

    #[test]
    fn validate_reports_invertibility_failures_without_sign_claims() {
        // Same crossing line, validated as a merely invertible path: the
        // report comes back (no sign-count claim to violate) with the
        // interior flagged as non-invertible.
        let map = star(3, 4);
        let fam = leg_family(&map).unwrap();
        let d = map.dim();
        let samples: Vec<(f64, LinOp)> = (0..=20)
            .map(|k| {
                let t = k as f64 / 20.0;
                (t, op(&map, eye(d).mapv(|z| z * (1.0 - 2.0 * t))))
            })
            .collect();
        let path = HomotopyPath::from_samples(PathClass::Invertible, samples, Some(&fam)).unwrap();
        let val = validate_path(&path, &fam, LocalityType::I, 0).unwrap();
        assert!(!val.flags.all_invertible);
        assert!(!val.flags.flagged.is_empty());
        assert_eq!(val.flags.sign_constant, None);
    }

    // -- contraction arcs -----------------------------------------------------

    #[test]
    fn contract_arc_handles_spectrum_at_the_branch_point() {
        // A unitary with eigenphase exactly pi: the detour must engage and
        // the arc stay unitary with small steps.
        let m = array![
            [c(-1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 1.0)],
        ];
        let arc = contract_arc(&m).unwrap();
        assert!(arc.eps != 0.0);
        let mut prev = arc.at(0.0);
        assert!(op_norm(&(&prev - &eye(2))) < 1e-12);
        let steps = 64;
        for k in 1..=steps {
            let cur = arc.at(k as f64 / steps as f64);
            assert!(op_norm(&(&cur - &prev)) < 0.2);
            assert!(op_norm(&(adjoint(&cur).dot(&cur) - eye(2))) < 1e-10);
            prev = cur;
        }
        assert!(op_norm(&(&prev - &m)) < 1e-10);
    }

    #[test]
    fn contract_arc_reaches_general_invertibles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 6;
        let g = Array2::from_shape_fn((d, d), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g + &eye(d).mapv(|z| z * 2.0);
        let arc = contract_arc(&m).unwrap();
        assert!(op_norm(&(arc.at(0.0) - eye(d))) < 1e-12);
        assert!(op_norm(&(arc.at(1.0) - &m)) < 1e-9);
        // The arc stays uniformly invertible.
        for k in 0..=32 {
            let t = k as f64 / 32.0;
            assert!(sigma_min(&arc.at(t)) > 1e-3);
        }
    }

    #[test]
    fn sym_floor_keeps_sign_of_nearest_neighbour() {
        let m = array![
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1e-6, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)],
        ];
        let (fl, vals, _) = sym_floor(&m, tol::PATH_FLOOR).unwrap();
        // 1e-6 floors to +PATH_FLOOR (its own sign), the others survive.
        assert!(vals.contains(&tol::PATH_FLOOR));
        let (v2, _) = eigh_ascending(&fl).unwrap();
        assert!(v2.iter().all(|&v| v.abs() >= tol::PATH_FLOOR * 0.999));
        // An exact zero floors toward the nearest nonzero eigenvalue's sign.
        let z = array![
            [c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-0.5, 0.0)],
        ];
        let (_, vals_z, _) = sym_floor(&z, tol::PATH_FLOOR).unwrap();
        assert!(vals_z.contains(&(-tol::PATH_FLOOR)));
    }

    #[test]
    fn block_unitary_round_trip_through_reduction() {
        // A unitary that is exactly block diagonal reduces to the identity
        // through stages that never leave the blocks: the locality score
        // stays at zero along the whole lifted path.
        let map = star(3, 8);
        let fam = leg_family(&map).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut w = eye(map.dim());
        for j in 0..fam.m() {
            let idx = fam.support(j).unwrap().to_vec();
            w = block_unitary(map.dim(), &idx, &mut rng).dot(&w);
        }
        let stages = reduce_active_to_identity(&w, &fam, &[0, 1, 2]).unwrap();
        let lifted = lift_stages(stages, eye(map.dim()));
        let path = assemble(PathClass::Unitary, &map, &lifted, Some(&fam)).unwrap();
        assert!(op_norm(&(path.first().matrix() - &w)) < 1e-9);
        assert!(op_norm(&(path.last().matrix() - eye(map.dim()))) < 1e-9);
        for c in path.certificates() {
            assert!(c.locality.unwrap() < 1e-9);
            assert!(c.unitary_defect < 1e-9);
        }
    }
}
