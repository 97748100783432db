//! Orthogonal projection families, block compressions, and the block-diagonal
//! part superoperator.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::arc::ArcInterval;
use crate::geometry::SiteMap;
use crate::linalg::{adjoint, eigh_ascending, fro_norm, op_norm, C64};
use crate::linop::{LinOp, Tag};
use crate::tol;
use crate::{Error, Result};

/// Entry modulus below which a matrix element counts as structurally zero
/// when detecting coordinate projections.
const COORDINATE_DETECT_TOL: f64 = 1e-12;

/// An ordered family of pairwise-orthogonal projections summing to the
/// identity, with optional arc labels (the spectral arcs the blocks came
/// from, or synthetic labels for abstract block structures).
#[derive(Debug, Clone)]
pub struct ProjectionFamily {
    blocks: Vec<LinOp>,
    labels: Vec<Option<ArcInterval>>,
    supports: Vec<Option<Vec<usize>>>,
    block_of_basis: Option<Vec<usize>>,
}

impl ProjectionFamily {
    /// Validate and assemble a family. Checks, in order: at least two blocks,
    /// a common site map, the projection tag on every block, pairwise
    /// orthogonality, completeness, and minimum rank/corank per block.
    pub fn new(blocks: Vec<LinOp>, labels: Vec<Option<ArcInterval>>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::FamilyInvariant("a projection family needs at least 2 blocks".into()));
        }
        if labels.len() != blocks.len() {
            return Err(Error::FamilyInvariant(format!(
                "{} labels provided for {} blocks",
                labels.len(),
                blocks.len()
            )));
        }
        let map = blocks[0].map().clone();
        for b in &blocks {
            if b.map().as_ref() != map.as_ref() {
                return Err(Error::SiteMapMismatch);
            }
            if !b.has_tag(Tag::Projection) {
                return Err(Error::FamilyInvariant("every block must carry a validated projection tag".into()));
            }
        }
        let d = map.dim();
        for j in 0..blocks.len() {
            for k in (j + 1)..blocks.len() {
                let prod = blocks[j].matrix().dot(blocks[k].matrix());
                let defect = fro_norm(&prod);
                let defect = if defect <= tol::FAMILY_ORTHO_TOL { defect } else { op_norm(&prod) };
                if defect > tol::FAMILY_ORTHO_TOL {
                    return Err(Error::FamilyInvariant(format!(
                        "blocks {j} and {k} are not orthogonal: ‖Λ_{j}Λ_{k}‖ = {defect:.3e}"
                    )));
                }
            }
        }
        let mut sum: Array2<C64> = Array2::zeros((d, d));
        for b in &blocks {
            sum = sum + b.matrix();
        }
        for i in 0..d {
            sum[[i, i]] -= C64::new(1.0, 0.0);
        }
        let completeness = fro_norm(&sum);
        let completeness = if completeness <= tol::FAMILY_COMPLETE_TOL { completeness } else { op_norm(&sum) };
        if completeness > tol::FAMILY_COMPLETE_TOL {
            return Err(Error::FamilyInvariant(format!(
                "blocks do not sum to the identity: defect {completeness:.3e}"
            )));
        }
        for (j, b) in blocks.iter().enumerate() {
            let rank = projection_rank(b);
            let corank = d - rank;
            if rank < tol::FAMILY_R_MIN || corank < tol::FAMILY_R_MIN {
                return Err(Error::FamilyInvariant(format!(
                    "block {j} has rank {rank} and corank {corank}; both must be at least {}",
                    tol::FAMILY_R_MIN
                )));
            }
        }
        let supports: Vec<Option<Vec<usize>>> = blocks.iter().map(coordinate_support).collect();
        let block_of_basis = if supports.iter().all(|s| s.is_some()) {
            let mut assignment = vec![usize::MAX; d];
            for (j, s) in supports.iter().enumerate() {
                for &b in s.as_ref().expect("all supports present") {
                    assignment[b] = j;
                }
            }
            debug_assert!(assignment.iter().all(|&j| j != usize::MAX), "completeness guarantees coverage");
            Some(assignment)
        } else {
            None
        };
        Ok(ProjectionFamily { blocks, labels, supports, block_of_basis })
    }

    /// Build a coordinate family from a basis-index-to-block assignment.
    pub fn from_assignment(
        map: Arc<SiteMap>,
        assignment: &[usize],
        m: usize,
        labels: Vec<Option<ArcInterval>>,
    ) -> Result<Self> {
        if assignment.len() != map.dim() {
            return Err(Error::DimensionMismatch { expected: map.dim(), found: assignment.len() });
        }
        if let Some(&bad) = assignment.iter().find(|&&j| j >= m) {
            return Err(Error::FamilyInvariant(format!("assignment references block {bad}, only {m} blocks exist")));
        }
        let d = map.dim();
        let mut blocks = Vec::with_capacity(m);
        for j in 0..m {
            let mut mat: Array2<C64> = Array2::zeros((d, d));
            for (b, &bj) in assignment.iter().enumerate() {
                if bj == j {
                    mat[[b, b]] = C64::new(1.0, 0.0);
                }
            }
            blocks.push(LinOp::tagged(mat, map.clone(), &[Tag::Projection, Tag::SelfAdjoint])?);
        }
        ProjectionFamily::new(blocks, labels)
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn map(&self) -> &Arc<SiteMap> {
        self.blocks[0].map()
    }

    pub fn dim(&self) -> usize {
        self.map().dim()
    }

    pub fn block(&self, j: usize) -> &LinOp {
        &self.blocks[j]
    }

    pub fn blocks(&self) -> &[LinOp] {
        &self.blocks
    }

    pub fn label(&self, j: usize) -> Option<&ArcInterval> {
        self.labels[j].as_ref()
    }

    pub fn rank(&self, j: usize) -> usize {
        projection_rank(&self.blocks[j])
    }

    /// Basis indices spanning block `j` when it is a coordinate projection.
    pub fn support(&self, j: usize) -> Option<&[usize]> {
        self.supports[j].as_deref()
    }

    /// Block index of each basis vector, when every block is a coordinate
    /// projection.
    pub fn basis_assignment(&self) -> Option<&[usize]> {
        self.block_of_basis.as_deref()
    }

    /// Projection onto the union of the given blocks.
    pub fn union_projection(&self, block_set: &[usize]) -> Result<LinOp> {
        let d = self.dim();
        let mut mat: Array2<C64> = Array2::zeros((d, d));
        for &j in block_set {
            if j >= self.m() {
                return Err(Error::InvalidParameter(format!("block index {j} out of range")));
            }
            mat = mat + self.blocks[j].matrix();
        }
        LinOp::tagged(mat, self.map().clone(), &[Tag::Projection, Tag::SelfAdjoint])
    }

    /// Block-diagonal part `𝔻(A) = Σ_j Λ_j A Λ_j`.
    pub fn block_diagonal_part(&self, a: &LinOp) -> Result<LinOp> {
        if a.map().as_ref() != self.map().as_ref() {
            return Err(Error::SiteMapMismatch);
        }
        let d = self.dim();
        if let Some(assign) = &self.block_of_basis {
            let mut out = a.matrix().clone();
            for i in 0..d {
                for j in 0..d {
                    if assign[i] != assign[j] {
                        out[[i, j]] = C64::new(0.0, 0.0);
                    }
                }
            }
            let mut op = LinOp::new(out, self.map().clone())?;
            if a.has_tag(Tag::SelfAdjoint) {
                op.add_tag(Tag::SelfAdjoint)?;
            }
            return Ok(op);
        }
        let mut sum: Array2<C64> = Array2::zeros((d, d));
        for b in &self.blocks {
            let p = b.matrix();
            sum = sum + p.dot(a.matrix()).dot(p);
        }
        let mut op = LinOp::new(sum, self.map().clone())?;
        if a.has_tag(Tag::SelfAdjoint) {
            op.add_tag(Tag::SelfAdjoint)?;
        }
        Ok(op)
    }

    /// Compression of `A` to block `j`, using the cached coordinate support
    /// when available.
    pub fn compress(&self, a: &LinOp, j: usize) -> Result<Compression> {
        if a.map().as_ref() != self.map().as_ref() {
            return Err(Error::SiteMapMismatch);
        }
        if let Some(support) = self.support(j) {
            Ok(compress_on_support(a.matrix(), support))
        } else {
            block_compress(a, &self.blocks[j])
        }
    }
}

/// Rank of a projection, read off the trace.
fn projection_rank(p: &LinOp) -> usize {
    let tr: f64 = (0..p.dim()).map(|i| p.matrix()[[i, i]].re).sum();
    tr.round().max(0.0) as usize
}

/// Support of a coordinate (0/1 diagonal) projection, `None` for any other
/// projection.
fn coordinate_support(p: &LinOp) -> Option<Vec<usize>> {
    let d = p.dim();
    let m = p.matrix();
    let mut support = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let z = m[[i, j]];
            if i == j {
                if (z - C64::new(1.0, 0.0)).norm() <= COORDINATE_DETECT_TOL {
                    support.push(i);
                } else if z.norm() > COORDINATE_DETECT_TOL {
                    return None;
                }
            } else if z.norm() > COORDINATE_DETECT_TOL {
                return None;
            }
        }
    }
    Some(support)
}

/// Orthonormal basis of the range of a projection.
#[derive(Debug, Clone)]
pub enum CompressionBasis {
    /// Standard basis vectors at these full-space indices, in ascending order.
    Coordinate(Vec<usize>),
    /// Dense orthonormal columns.
    Dense(Array2<C64>),
}

impl CompressionBasis {
    pub fn rank(&self) -> usize {
        match self {
            CompressionBasis::Coordinate(v) => v.len(),
            CompressionBasis::Dense(m) => m.ncols(),
        }
    }

    /// Full-space dimension.
    pub fn dim(&self) -> usize {
        match self {
            CompressionBasis::Coordinate(_) => usize::MAX,
            CompressionBasis::Dense(m) => m.nrows(),
        }
    }

    /// Embed a block-space vector into the full space (dimension `d`).
    pub fn embed(&self, v: &Array1<C64>, d: usize) -> Array1<C64> {
        match self {
            CompressionBasis::Coordinate(idx) => {
                let mut out = Array1::zeros(d);
                for (k, &i) in idx.iter().enumerate() {
                    out[i] = v[k];
                }
                out
            }
            CompressionBasis::Dense(b) => b.dot(v),
        }
    }
}

/// The matrix of `P A P` restricted to `im P`, with the basis realizing the
/// restriction.
#[derive(Debug, Clone)]
pub struct Compression {
    pub matrix: Array2<C64>,
    pub basis: CompressionBasis,
}

impl Compression {
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }
}

/// Compress `A` to the range of the projection `P`. For coordinate
/// projections the retained basis is the ascending list of support indices;
/// otherwise an orthonormal eigenbasis of `P` (eigenvalue 1) is used.
pub fn block_compress(a: &LinOp, p: &LinOp) -> Result<Compression> {
    a.same_map(p)?;
    if !p.has_tag(Tag::Projection) {
        return Err(Error::FamilyInvariant("compression target must carry a validated projection tag".into()));
    }
    if let Some(support) = coordinate_support(p) {
        return Ok(compress_on_support(a.matrix(), &support));
    }
    let (vals, vecs) = eigh_ascending(p.matrix())?;
    let d = p.dim();
    let selected: Vec<usize> = (0..d).filter(|&i| vals[i] >= 0.5).collect();
    let mut basis = Array2::zeros((d, selected.len()));
    for (col, &i) in selected.iter().enumerate() {
        basis.column_mut(col).assign(&vecs.column(i));
    }
    let compressed = adjoint(&basis).dot(a.matrix()).dot(&basis);
    Ok(Compression { matrix: compressed, basis: CompressionBasis::Dense(basis) })
}

fn compress_on_support(a: &Array2<C64>, support: &[usize]) -> Compression {
    let r = support.len();
    let mut m = Array2::zeros((r, r));
    for (bi, &i) in support.iter().enumerate() {
        for (bj, &j) in support.iter().enumerate() {
            m[[bi, bj]] = a[[i, j]];
        }
    }
    Compression { matrix: m, basis: CompressionBasis::Coordinate(support.to_vec()) }
}

/// A rule producing size-indexed truncations of one construction, used by
/// the compactness proxies to track singular-value tails across growing
/// volumes.
pub struct TruncationFamily<T> {
    sizes: Vec<u32>,
    build: Box<dyn Fn(u32) -> Result<T> + Send + Sync>,
}

impl<T> TruncationFamily<T> {
    /// `sizes` must be strictly increasing with at least 3 entries.
    pub fn new(sizes: Vec<u32>, build: impl Fn(u32) -> Result<T> + Send + Sync + 'static) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::InvalidParameter("a truncation family needs at least 3 sizes".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("truncation sizes must be strictly increasing".into()));
        }
        Ok(TruncationFamily { sizes, build: Box::new(build) })
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn instantiate(&self, size: u32) -> Result<T> {
        (self.build)(size)
    }
}
