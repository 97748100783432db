use thiserror::Error;

/// Unified error type for construction, classification, and path building.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry mismatch: expected {expected}, found {found}")]
    GeometryMismatch { expected: String, found: String },

    #[error("operands live on different site maps")]
    SiteMapMismatch,

    #[error("matrix dimension {found} does not match site map dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tag `{tag}` violated: defect {defect:.3e} exceeds bound {bound:.3e}")]
    TagViolation { tag: String, defect: f64, bound: f64 },

    #[error("projection family invariant violated: {0}")]
    FamilyInvariant(String),

    #[error("operator is not normal: commutator defect {defect:.3e}")]
    NotNormal { defect: f64 },

    #[error("arc cut at angle {cut:.17} collides with lattice angle {angle:.17} (distance {dist:.3e})")]
    CutCollision { cut: f64, angle: f64, dist: f64 },

    #[error("spectral angle {angle:.17} is within {dist:.3e} of arc endpoint {endpoint:.17}")]
    AmbiguousBoundary { angle: f64, endpoint: f64, dist: f64 },

    #[error("index prescription invalid: {0}")]
    BadPrescription(String),

    #[error("window does not fit the truncation: {0}")]
    BadWindow(String),

    #[error("homotopy endpoints not connectable: {0}")]
    NotConnectable(String),

    #[error("path sample at t={t:.6} lost invertibility: smallest singular value {sigma_min:.3e} < {required:.3e}")]
    PathSingular { t: f64, sigma_min: f64, required: f64 },

    #[error("non-triviality certificate failed: {0}")]
    CertificateFailed(String),

    #[error("sign counts differ: ({0}, {1}) vs ({2}, {3})")]
    SignCountMismatch(usize, usize, usize, usize),

    #[error("contour construction failed: {0}")]
    BadContour(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("linear algebra backend error: {0}")]
    Backend(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Backend(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
