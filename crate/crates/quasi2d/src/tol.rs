//! Central numerical tolerances and default thresholds.
//!
//! Every structural check in the crate reads from here; none of the modules
//! hard-code their own literals. Tolerances that scale with matrix dimension
//! are documented as per-dimension factors.

/// Unitarity defect bound per dimension: `‖A*A − 1‖ ≤ UNITARY_TOL_PER_DIM · d`.
pub const UNITARY_TOL_PER_DIM: f64 = 1e-10;

/// Self-adjointness defect bound per dimension: `‖A − A*‖ ≤ SELFADJOINT_TOL_PER_DIM · d`.
pub const SELFADJOINT_TOL_PER_DIM: f64 = 1e-12;

/// Projection defect bound per dimension: `‖A² − A‖ ≤ PROJECTION_TOL_PER_DIM · d`.
pub const PROJECTION_TOL_PER_DIM: f64 = 1e-10;

/// Pairwise orthogonality bound for projection families: `‖Λ_j Λ_k‖ ≤ FAMILY_ORTHO_TOL`.
pub const FAMILY_ORTHO_TOL: f64 = 1e-10;

/// Completeness bound for projection families: `‖Σ_j Λ_j − 1‖ ≤ FAMILY_COMPLETE_TOL`.
pub const FAMILY_COMPLETE_TOL: f64 = 1e-10;

/// Minimum block rank (and corank) for a usable projection family.
pub const FAMILY_R_MIN: usize = 2;

/// Angular guard: a lattice angle closer than this to an arc cut (without
/// coinciding with it) is ambiguous, as is a spectral angle this close to an
/// arc endpoint.
pub const ANGLE_GUARD: f64 = 1e-12;

/// Angles closer than this are treated as exactly coincident. Absorbs the
/// one-ulp noise of computing the same geometric angle along different
/// floating-point routes.
pub const ANGLE_SNAP: f64 = 1e-14;

/// Invertibility margin along homotopy paths: every sample must keep its
/// smallest singular value at or above this.
pub const PATH_DELTA_INV: f64 = 1e-3;

/// Largest allowed operator-norm distance between adjacent path samples.
pub const PATH_STEP_MAX: f64 = 0.2;

/// Unitarity defect allowed on path endpoints after a polar lift.
pub const PATH_ENDPOINT_TOL: f64 = 1e-10;

/// Self-adjoint-unitary defect bound along sign-lifted paths: `‖γ² − 1‖`.
pub const SAU_DEFECT_TOL: f64 = 1e-9;

/// Spectral gap floor for self-adjoint path samples and eigenvalue flooring.
pub const SAI_GAP_DELTA: f64 = 1e-3;

/// Factor by which a per-sample locality score may exceed the endpoint scores.
pub const PATH_LOCALITY_FACTOR: f64 = 2.0;

/// Level to which block extractions floor singular values (or self-adjoint
/// eigenvalue moduli). An order above [`PATH_DELTA_INV`] so every floored
/// stage clears the path invertibility margin with room to spare.
pub const PATH_FLOOR: f64 = 1e-2;

/// Smallest allowed `σ_min(U + 1)` before a unitary phase arc applies the
/// deterministic branch detour (pre-rotate so no eigenphase sits near π).
pub const PHASE_DETOUR_CLEARANCE: f64 = 5e-2;

/// Tail fraction used by the compactness proxy: the tracked singular value is
/// `σ_k` with `k = ⌈TAIL_ALPHA · d⌉` (1-indexed).
pub const TAIL_ALPHA: f64 = 0.05;

/// Decay factor: the tracked singular value must drop by at least this factor
/// across the size range for a `Decaying` verdict.
pub const TAIL_RHO: f64 = 4.0;

/// Non-decay band: if the tracked singular value stays within this relative
/// band of its maximum across all sizes, the verdict is `NonDecaying`.
pub const TAIL_FLAT_BAND: f64 = 0.2;

/// Singular values at or below this absolute floor count as exactly zero for
/// the compactness proxy.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Band of singular values that blocks kernel-based index counting: values
/// inside `(GAP_BAND_LOW, GAP_BAND_HIGH)` mean the near-null cluster is not
/// separated from the bulk.
pub const GAP_BAND_LOW: f64 = 0.1;
/// See [`GAP_BAND_LOW`].
pub const GAP_BAND_HIGH: f64 = 0.9;

/// Minimum window mass for a near-null singular vector to count as physical:
/// mass inside the spatial window must be at least `1 − KERNEL_MASS_EPS`.
pub const KERNEL_MASS_EPS: f64 = 0.25;

/// Acceptance bound on the distance between a raw windowed trace and its
/// nearest integer.
pub const TRACE_INT_TOL: f64 = 0.25;

/// Bound on the trace-norm proxy of the index pairing outside the window.
pub const TAIL_MASS_EPS: f64 = 0.1;

/// Normality defect bound per dimension: `‖AA* − A*A‖ ≤ NORMAL_TOL_PER_DIM · d`.
pub const NORMAL_TOL_PER_DIM: f64 = 1e-10;

/// Minimum distance from a resolvent evaluation point to the closed spectral
/// arc (union the origin) for the evaluation to be accepted.
pub const RESOLVENT_CLEARANCE: f64 = 1e-6;

/// Additive slack allowed on the spectral diameter bound
/// `‖Aχ_S(A) − zχ_S(A)‖ ≤ diam(S ∩ σ(A))`.
pub const DIAM_SLACK: f64 = 1e-10;

/// Default contour quadrature node count.
pub const CONTOUR_NODES: usize = 512;

/// Radial half-thickness of spectral contours, in log-radius units.
pub const CONTOUR_RADIAL_CLEARANCE: f64 = 0.1;

/// Residual floor for quadrature convergence studies: below this, halving the
/// node count no longer needs to improve the residual.
pub const QUADRATURE_FLOOR: f64 = 1e-8;

/// Tolerance for trace/sum interchange identities in quadrature assembly.
pub const QUADRATURE_INTERCHANGE_TOL: f64 = 1e-9;

/// Smallest leg separation angle for which the distance comparability factor
/// `D(θ) = sqrt(1 + 2/|sin θ|)` is certified.
pub const STAR_THETA_MIN: f64 = std::f64::consts::PI / 6.0;

/// Exhaustive pair enumeration cap for distance comparability checks; beyond
/// this many pairs a seeded sample is used.
pub const STAR_PAIR_CAP: usize = 10_000;
