//! Dense operators bound to a site map, with validated structural tags and a
//! documented on-disk format.

use std::collections::BTreeSet;
use std::io::{Read as IoRead, Write as IoWrite};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::geometry::{Geometry, SiteMap};
use crate::linalg::{adjoint, eye, fro_norm, op_norm, C64};
use crate::tol;
use crate::{Error, Result};

/// Structural claims about an operator, validated at tagging time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Unitary,
    SelfAdjoint,
    Projection,
}

impl Tag {
    /// Per-dimension defect bound for this tag.
    pub fn bound(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            Tag::Unitary => tol::UNITARY_TOL_PER_DIM * d,
            Tag::SelfAdjoint => tol::SELFADJOINT_TOL_PER_DIM * d,
            Tag::Projection => tol::PROJECTION_TOL_PER_DIM * d,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Unitary => "unitary",
            Tag::SelfAdjoint => "self-adjoint",
            Tag::Projection => "projection",
        }
    }
}

/// A dense operator on the Hilbert space enumerated by a [`SiteMap`].
#[derive(Debug, Clone)]
pub struct LinOp {
    matrix: Array2<C64>,
    map: Arc<SiteMap>,
    tags: BTreeSet<Tag>,
}

impl LinOp {
    /// Wrap a matrix without structural claims.
    pub fn new(matrix: Array2<C64>, map: Arc<SiteMap>) -> Result<Self> {
        if matrix.nrows() != map.dim() || matrix.ncols() != map.dim() {
            return Err(Error::DimensionMismatch { expected: map.dim(), found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(LinOp { matrix, map, tags: BTreeSet::new() })
    }

    /// Wrap a matrix and validate the claimed tags.
    pub fn tagged(matrix: Array2<C64>, map: Arc<SiteMap>, tags: &[Tag]) -> Result<Self> {
        let mut op = LinOp::new(matrix, map)?;
        for &t in tags {
            op.validate_tag(t)?;
            op.tags.insert(t);
        }
        Ok(op)
    }

    /// Validate and attach a tag to an existing operator.
    pub fn add_tag(&mut self, tag: Tag) -> Result<()> {
        self.validate_tag(tag)?;
        self.tags.insert(tag);
        Ok(())
    }

    /// Defect of a tag on this operator, regardless of whether it is attached.
    pub fn tag_defect(&self, tag: Tag) -> f64 {
        let a = &self.matrix;
        let diff = match tag {
            Tag::Unitary => adjoint(a).dot(a) - eye(self.dim()),
            Tag::SelfAdjoint => a - &adjoint(a),
            Tag::Projection => a.dot(a) - a,
        };
        // The Frobenius norm dominates the operator norm, so it decides most
        // checks without an SVD; only near-threshold cases pay for one.
        let fro = fro_norm(&diff);
        if fro <= tag.bound(self.dim()) {
            fro
        } else {
            op_norm(&diff)
        }
    }

    fn validate_tag(&self, tag: Tag) -> Result<()> {
        let defect = self.tag_defect(tag);
        let bound = tag.bound(self.dim());
        if defect > bound {
            return Err(Error::TagViolation { tag: tag.name().into(), defect, bound });
        }
        Ok(())
    }

    pub fn identity(map: Arc<SiteMap>) -> Self {
        let d = map.dim();
        LinOp {
            matrix: eye(d),
            map,
            tags: [Tag::Unitary, Tag::SelfAdjoint, Tag::Projection].into_iter().collect(),
        }
    }

    pub fn from_diagonal(diag: &[C64], map: Arc<SiteMap>) -> Result<Self> {
        if diag.len() != map.dim() {
            return Err(Error::DimensionMismatch { expected: map.dim(), found: diag.len() });
        }
        let mut m = Array2::zeros((diag.len(), diag.len()));
        for (i, z) in diag.iter().enumerate() {
            m[[i, i]] = *z;
        }
        LinOp::new(m, map)
    }

    pub fn zeros(map: Arc<SiteMap>) -> Self {
        let d = map.dim();
        LinOp { matrix: Array2::zeros((d, d)), map, tags: BTreeSet::new() }
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn map(&self) -> &Arc<SiteMap> {
        &self.map
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        self.tags.iter().copied()
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn adjoint(&self) -> Self {
        LinOp { matrix: adjoint(&self.matrix), map: self.map.clone(), tags: self.tags.clone() }
    }

    /// Product; keeps the unitary tag when both factors carry it.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_map(other)?;
        let mut tags = BTreeSet::new();
        if self.has_tag(Tag::Unitary) && other.has_tag(Tag::Unitary) {
            tags.insert(Tag::Unitary);
        }
        Ok(LinOp { matrix: self.matrix.dot(&other.matrix), map: self.map.clone(), tags })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_map(other)?;
        let mut tags = BTreeSet::new();
        if self.has_tag(Tag::SelfAdjoint) && other.has_tag(Tag::SelfAdjoint) {
            tags.insert(Tag::SelfAdjoint);
        }
        Ok(LinOp { matrix: &self.matrix + &other.matrix, map: self.map.clone(), tags })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_map(other)?;
        let mut tags = BTreeSet::new();
        if self.has_tag(Tag::SelfAdjoint) && other.has_tag(Tag::SelfAdjoint) {
            tags.insert(Tag::SelfAdjoint);
        }
        Ok(LinOp { matrix: &self.matrix - &other.matrix, map: self.map.clone(), tags })
    }

    pub fn scale(&self, z: C64) -> Self {
        LinOp { matrix: self.matrix.mapv(|w| w * z), map: self.map.clone(), tags: BTreeSet::new() }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_map(other)?;
        let m = self.matrix.dot(&other.matrix) - other.matrix.dot(&self.matrix);
        Ok(LinOp { matrix: m, map: self.map.clone(), tags: BTreeSet::new() })
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn fro_norm(&self) -> f64 {
        fro_norm(&self.matrix)
    }

    pub fn same_map(&self, other: &Self) -> Result<()> {
        if self.map.as_ref() == other.map.as_ref() {
            Ok(())
        } else {
            Err(Error::SiteMapMismatch)
        }
    }

    /// Diagonal entries when every off-diagonal entry is at most `tol` in
    /// modulus; `None` otherwise.
    pub fn diagonal(&self, tol: f64) -> Option<Vec<C64>> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if i != j && self.matrix[[i, j]].norm() > tol {
                    return None;
                }
            }
        }
        Some((0..d).map(|i| self.matrix[[i, i]]).collect())
    }

    /// Replace the matrix, keeping map and dropping tags. Dimensions must match.
    pub fn with_matrix(&self, matrix: Array2<C64>) -> Result<Self> {
        LinOp::new(matrix, self.map.clone())
    }

    /// Write the operator to `path` in the `quasi2d-linop` v1 format:
    /// a single JSON header line
    /// `{"format":"quasi2d-linop","version":1,"geometry":…,"dof":…,"dim":…,"ordering":"site-major-v1","tags":[…]}`
    /// terminated by `\n`, followed by `dim·dim` matrix entries in row-major
    /// order, each entry as two little-endian IEEE-754 f64 values (real part,
    /// then imaginary part).
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let header = LinOpHeader {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            geometry: self.map.geometry(),
            dof: self.map.dof(),
            dim: self.dim(),
            ordering: ORDERING_NAME.into(),
            tags: self.tags.iter().copied().collect(),
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut f, &header)?;
        f.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(self.dim() * self.dim() * 16);
        for row in self.matrix.rows() {
            for z in row.iter() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        f.write_all(&buf)?;
        Ok(())
    }

    /// Read an operator written by [`Self::write_to`], revalidating tags.
    pub fn read_from(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut header_line = Vec::new();
        {
            use std::io::BufRead;
            f.read_until(b'\n', &mut header_line)?;
        }
        let header: LinOpHeader = serde_json::from_slice(&header_line)?;
        if header.format != FORMAT_NAME {
            return Err(Error::Serialization(format!("unknown format `{}`", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(Error::Serialization(format!("unsupported format version {}", header.version)));
        }
        if header.ordering != ORDERING_NAME {
            return Err(Error::Serialization(format!("unknown basis ordering `{}`", header.ordering)));
        }
        let map = SiteMap::new(header.geometry, header.dof)?;
        if map.dim() != header.dim {
            return Err(Error::Serialization(format!(
                "header dimension {} does not match geometry dimension {}",
                header.dim,
                map.dim()
            )));
        }
        let d = header.dim;
        let mut bytes = vec![0u8; d * d * 16];
        f.read_exact(&mut bytes)?;
        let mut matrix = Array2::zeros((d, d));
        let mut off = 0;
        for i in 0..d {
            for j in 0..d {
                let re = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("slice length is 8"));
                let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().expect("slice length is 8"));
                matrix[[i, j]] = C64::new(re, im);
                off += 16;
            }
        }
        LinOp::tagged(matrix, map, &header.tags)
    }
}

const FORMAT_NAME: &str = "quasi2d-linop";
const FORMAT_VERSION: u32 = 1;
const ORDERING_NAME: &str = "site-major-v1";

#[derive(Serialize, Deserialize)]
struct LinOpHeader {
    format: String,
    version: u32,
    geometry: Geometry,
    dof: usize,
    dim: usize,
    ordering: String,
    tags: Vec<Tag>,
}
