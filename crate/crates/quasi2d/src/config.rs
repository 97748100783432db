//! Experiment configuration schema for the batch runner.
//!
//! A config file is a single JSON object: a `name`, a `kind` tag, and the
//! kind's own fields inline. [`ExperimentConfig::validate`] checks every
//! field before any computation starts and names the offending key in the
//! error, so a bad config dies with exit 1 and a usable message instead of
//! burning time on partial work.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arc::TAU;
use crate::{Error, Result};
use crate::factory::PrescriptionStyle;
use crate::locality::ProfileThresholds;
use crate::tol;

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.into(), message: message.into() }
}

/// A named experiment: the unit the runner executes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    LocalityAudit(LocalityAuditConfig),
    IndexSuite(IndexSuiteConfig),
    HomotopySuite(HomotopySuiteConfig),
    ContourSuite(ContourSuiteConfig),
    StarSuite(StarSuiteConfig),
    Counterexample(CounterexampleConfig),
}

impl ExperimentKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentKind::LocalityAudit(_) => "locality-audit",
            ExperimentKind::IndexSuite(_) => "index-suite",
            ExperimentKind::HomotopySuite(_) => "homotopy-suite",
            ExperimentKind::ContourSuite(_) => "contour-suite",
            ExperimentKind::StarSuite(_) => "star-suite",
            ExperimentKind::Counterexample(_) => "counterexample",
        }
    }

    /// The configured seed, for kinds that draw random samples.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentKind::LocalityAudit(c) => Some(c.seed),
            ExperimentKind::HomotopySuite(c) => Some(c.seed),
            ExperimentKind::ContourSuite(c) => Some(c.seed),
            ExperimentKind::StarSuite(c) => Some(c.seed),
            ExperimentKind::IndexSuite(_) | ExperimentKind::Counterexample(_) => None,
        }
    }

    /// Replace the seed. A no-op for fully deterministic kinds.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentKind::LocalityAudit(c) => c.seed = seed,
            ExperimentKind::HomotopySuite(c) => c.seed = seed,
            ExperimentKind::ContourSuite(c) => c.seed = seed,
            ExperimentKind::StarSuite(c) => c.seed = seed,
            ExperimentKind::IndexSuite(_) | ExperimentKind::Counterexample(_) => {}
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            bad("config", format!("cannot read {}: {e}", path.display()))
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| bad("config", format!("invalid experiment JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(bad("name", "experiment name must be nonempty"));
        }
        match &self.kind {
            ExperimentKind::LocalityAudit(c) => c.validate(),
            ExperimentKind::IndexSuite(c) => c.validate(),
            ExperimentKind::HomotopySuite(c) => c.validate(),
            ExperimentKind::ContourSuite(c) => c.validate(),
            ExperimentKind::StarSuite(c) => c.validate(),
            ExperimentKind::Counterexample(c) => c.validate(),
        }
    }
}

// -- shared pieces -----------------------------------------------------------

/// Compactness-profile thresholds with per-field defaulting, so the report
/// can state which values came from the config and which are built in.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ThresholdsConfig {
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub flat_band: Option<f64>,
}

/// One resolved tolerance with its origin, echoed verbatim into the report.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ThresholdRow {
    pub key: String,
    pub value: f64,
    /// "config" when the value was supplied, "built-in" otherwise.
    pub source: &'static str,
}

impl ThresholdRow {
    pub fn resolved(key: &str, configured: Option<f64>, built_in: f64) -> (f64, Self) {
        let value = configured.unwrap_or(built_in);
        let source = if configured.is_some() { "config" } else { "built-in" };
        (value, ThresholdRow { key: key.into(), value, source })
    }

    pub fn built_in(key: &str, value: f64) -> Self {
        ThresholdRow { key: key.into(), value, source: "built-in" }
    }
}

impl ThresholdsConfig {
    /// Resolve against the built-in profile defaults under `prefix`.
    pub fn resolve(&self, prefix: &str) -> (ProfileThresholds, Vec<ThresholdRow>) {
        let d = ProfileThresholds::default();
        let (alpha, ra) = ThresholdRow::resolved(&format!("{prefix}alpha"), self.alpha, d.alpha);
        let (rho, rr) = ThresholdRow::resolved(&format!("{prefix}rho"), self.rho, d.rho);
        let (flat_band, rf) =
            ThresholdRow::resolved(&format!("{prefix}flat-band"), self.flat_band, d.flat_band);
        (ProfileThresholds { alpha, rho, flat_band }, vec![ra, rr, rf])
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(bad(&format!("{prefix}alpha"), format!("tail fraction must lie in (0, 1), got {a}")));
            }
        }
        if let Some(r) = self.rho {
            if !(r > 1.0) {
                return Err(bad(&format!("{prefix}rho"), format!("decay factor must exceed 1, got {r}")));
            }
        }
        if let Some(f) = self.flat_band {
            if !(f > 0.0 && f < 1.0) {
                return Err(bad(&format!("{prefix}flat-band"), format!("flat band must lie in (0, 1), got {f}")));
            }
        }
        Ok(())
    }
}

fn validate_sizes(key: &str, sizes: &[u32]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(bad(key, format!("need at least 3 sizes for a decay profile, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(key, "sizes must be strictly increasing"));
    }
    Ok(())
}

fn validate_cuts(key: &str, cuts: &[f64]) -> Result<()> {
    if cuts.len() < 2 {
        return Err(bad(key, format!("need at least 2 sector cuts, got {}", cuts.len())));
    }
    for c in cuts {
        if !c.is_finite() || *c < 0.0 || *c >= TAU {
            return Err(bad(key, format!("cut {c} outside [0, 2π)")));
        }
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(key, "cuts must be strictly increasing"));
    }
    Ok(())
}

// -- locality audit ----------------------------------------------------------

/// Classify one operator suite against all five locality types and audit the
/// implication lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LocalityAuditConfig {
    pub seed: u64,
    /// Truncation sizes (square radii or star leg lengths, by subject).
    pub sizes: Vec<u32>,
    pub subject: AuditSubject,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    /// Expected verdict per type, keys "i".."v", values
    /// "holds"/"fails"/"inconclusive"; unlisted types are reported unasserted.
    #[serde(default)]
    pub expect: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditSubject {
    /// Flux unitary against its own angular sectors on the square patch.
    FluxVsSectors {
        #[serde(default)]
        cuts: Option<Vec<f64>>,
    },
    /// Lattice shift against angular sectors: the IV-holds-but-I-fails case.
    ShiftVsSectors {
        #[serde(default)]
        axis: usize,
        #[serde(default = "one_i64")]
        power: i64,
        #[serde(default)]
        cuts: Option<Vec<f64>>,
    },
    /// Seeded exponentially local operator against the leg family.
    ExpLocalVsLegs { legs: u32, mu: f64, amplitude: f64 },
}

fn one_i64() -> i64 {
    1
}

impl LocalityAuditConfig {
    fn validate(&self) -> Result<()> {
        validate_sizes("sizes", &self.sizes)?;
        self.thresholds.validate("thresholds.")?;
        match &self.subject {
            AuditSubject::FluxVsSectors { cuts } | AuditSubject::ShiftVsSectors { cuts, .. } => {
                if let Some(cuts) = cuts {
                    validate_cuts("subject.cuts", cuts)?;
                }
                if let AuditSubject::ShiftVsSectors { axis, .. } = &self.subject {
                    if *axis > 1 {
                        return Err(bad("subject.axis", format!("square axes are 0 and 1, got {axis}")));
                    }
                }
            }
            AuditSubject::ExpLocalVsLegs { legs, mu, amplitude } => {
                if *legs < 3 {
                    return Err(bad("subject.legs", format!("a star needs at least 3 legs, got {legs}")));
                }
                if !(*mu > 0.0) {
                    return Err(bad("subject.mu", format!("decay rate must be positive, got {mu}")));
                }
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(bad("subject.amplitude", format!("amplitude must be positive, got {amplitude}")));
                }
            }
        }
        for (ty, verdict) in &self.expect {
            if !matches!(ty.as_str(), "i" | "ii" | "iii" | "iv" | "v") {
                return Err(bad("expect", format!("unknown locality type key `{ty}`; use i, ii, iii, iv, v")));
            }
            if !matches!(verdict.as_str(), "holds" | "fails" | "inconclusive") {
                return Err(bad("expect", format!("unknown verdict `{verdict}` for type `{ty}`; use holds, fails, inconclusive")));
            }
        }
        Ok(())
    }
}

// -- index suite --------------------------------------------------------------

/// Cross-validated block index computations with pinned expected values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IndexSuiteConfig {
    pub entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum IndexEntry {
    /// Periodic lattice shift to the `power` against the two half-line
    /// blocks; expected index (+power, −power).
    ShiftPower {
        power: i64,
        #[serde(default = "default_half_width")]
        half_width: u32,
        #[serde(default)]
        window: Option<WindowConfig>,
    },
    /// Permutation unitary with prescribed per-block indices on an abstract
    /// block array; expected index exactly `shifts`.
    Prescription {
        shifts: Vec<i64>,
        #[serde(default = "default_style")]
        style: PrescriptionStyle,
        #[serde(default = "default_rank")]
        rank: u32,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct WindowConfig {
    pub w: u64,
    pub guard: u64,
}

fn default_half_width() -> u32 {
    64
}

fn default_style() -> PrescriptionStyle {
    PrescriptionStyle::FiniteStyle
}

fn default_rank() -> u32 {
    32
}

impl IndexSuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(bad("entries", "need at least one index case"));
        }
        for (k, entry) in self.entries.iter().enumerate() {
            match entry {
                IndexEntry::ShiftPower { power, half_width, window } => {
                    let key = format!("entries[{k}]");
                    if *half_width < 8 {
                        return Err(bad(&format!("{key}.half-width"), format!("half width must be at least 8, got {half_width}")));
                    }
                    if power.unsigned_abs() >= u64::from(*half_width) / 4 {
                        return Err(bad(&format!("{key}.power"), format!("|power| = {} must stay below half-width/4 = {} so the window resolves it", power.abs(), half_width / 4)));
                    }
                    if let Some(w) = window {
                        if w.w == 0 || w.w + w.guard > u64::from(*half_width) {
                            return Err(bad(&format!("{key}.window"), format!("window {} + guard {} must fit inside half width {half_width}", w.w, w.guard)));
                        }
                    }
                }
                IndexEntry::Prescription { shifts, style, rank } => {
                    let key = format!("entries[{k}]");
                    if shifts.is_empty() {
                        return Err(bad(&format!("{key}.shifts"), "need at least one block shift"));
                    }
                    if matches!(style, PrescriptionStyle::FiniteStyle)
                        && shifts.iter().sum::<i64>() != 0
                    {
                        return Err(bad(&format!("{key}.shifts"), format!("finite-style shifts must sum to zero, got {:?}", shifts)));
                    }
                    let max_abs = shifts.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
                    if u64::from(*rank) < 4 * (max_abs + 1) {
                        return Err(bad(&format!("{key}.rank"), format!("block rank {rank} too small for max |shift| {max_abs}; need at least {}", 4 * (max_abs + 1))));
                    }
                }
            }
        }
        Ok(())
    }
}

// -- homotopy suite ------------------------------------------------------------

/// Seeded endpoint pairs connected through the explicit path constructions,
/// with per-sample certificates and invariant tracking.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct HomotopySuiteConfig {
    pub seed: u64,
    pub variant: HomotopyVariant,
    pub pairs: usize,
    /// Star legs (block count) for the self-adjoint variants.
    #[serde(default = "default_legs")]
    pub legs: u32,
    /// Star leg length for the self-adjoint variants.
    #[serde(default = "default_leg_len_small")]
    pub leg_len: u32,
    /// Line half width for the unitary variants.
    #[serde(default = "default_path_half_width")]
    pub half_width: u32,
    /// Certified non-triviality rank floor.
    #[serde(default = "default_r_min")]
    pub r_min: usize,
    /// Also construct mismatched / uncertified inputs and require rejection.
    #[serde(default = "default_true")]
    pub check_rejection: bool,
    /// Dump the first pair's path samples as .linop files.
    #[serde(default)]
    pub dump_paths: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomotopyVariant {
    #[serde(rename = "unitary-type-i")]
    UnitaryTypeI,
    #[serde(rename = "unitary-type-ii")]
    UnitaryTypeII,
    #[serde(rename = "sau-type-i")]
    SauTypeI,
    #[serde(rename = "sau-type-ii")]
    SauTypeII,
}

fn default_legs() -> u32 {
    3
}

fn default_leg_len_small() -> u32 {
    8
}

fn default_path_half_width() -> u32 {
    16
}

fn default_r_min() -> usize {
    tol::FAMILY_R_MIN
}

fn default_true() -> bool {
    true
}

impl HomotopySuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.pairs == 0 {
            return Err(bad("pairs", "need at least one endpoint pair"));
        }
        if self.r_min == 0 {
            return Err(bad("r-min", "certified rank floor must be at least 1"));
        }
        match self.variant {
            HomotopyVariant::SauTypeI | HomotopyVariant::SauTypeII => {
                if self.legs < 3 {
                    return Err(bad("legs", format!("a star needs at least 3 legs, got {}", self.legs)));
                }
                if (self.leg_len as usize) < 2 * self.r_min {
                    return Err(bad("leg-len", format!("leg length {} cannot certify both signs at rank {}; need at least {}", self.leg_len, self.r_min, 2 * self.r_min)));
                }
            }
            HomotopyVariant::UnitaryTypeI | HomotopyVariant::UnitaryTypeII => {
                if self.half_width < 8 {
                    return Err(bad("half-width", format!("half width must be at least 8, got {}", self.half_width)));
                }
            }
        }
        Ok(())
    }
}

// -- contour suite ---------------------------------------------------------------

/// Quadrature recovery of off-diagonal blocks, with the dyadic decay,
/// diameter, resolvent, and norm-contract side checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ContourSuiteConfig {
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub radius: u32,
    /// Number of seeded exponentially local sample operators.
    #[serde(default = "default_operators")]
    pub operators: usize,
    /// Quadrature node counts, ascending; the residual tolerance applies at
    /// the largest.
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
    /// Target and source arcs as [start, end) angle pairs.
    #[serde(default)]
    pub arcs: Option<ArcsConfig>,
    /// Decay rate of the sample operators.
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Dyadic commutator decay levels to check; 0 skips the check.
    #[serde(default)]
    pub dyadic_levels: u32,
    /// Seeded diameter-bound triples to check; 0 skips the check.
    #[serde(default)]
    pub diam_triples: usize,
    /// Seeded resolvent norm-bound probes per operator; 0 skips the check.
    #[serde(default)]
    pub resolvent_probes: usize,
    /// Also run the quadrature norm/trace-norm contract check.
    #[serde(default)]
    pub contract: bool,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Required residual improvement factor per node-count doubling.
    #[serde(default = "default_ratio_min")]
    pub ratio_min: f64,
    /// Residuals below this floor are quadrature-converged; the ratio
    /// requirement stops applying once both sides sit under it.
    #[serde(default = "default_residual_floor")]
    pub residual_floor: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ArcsConfig {
    pub j: [f64; 2],
    pub i: [f64; 2],
}

fn default_radius() -> u32 {
    4
}

fn default_operators() -> usize {
    20
}

fn default_m_values() -> Vec<usize> {
    vec![64, 128, 256, 512]
}

fn default_mu() -> f64 {
    0.5
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_residual_tol() -> f64 {
    1e-6
}

fn default_ratio_min() -> f64 {
    4.0
}

fn default_residual_floor() -> f64 {
    1e-11
}

impl ContourSuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.radius < 2 {
            return Err(bad("radius", format!("square radius must be at least 2, got {}", self.radius)));
        }
        if self.radius > 8 {
            return Err(bad("radius", format!("square radius above 8 makes the dense quadrature unreasonably slow, got {}", self.radius)));
        }
        if self.operators == 0 {
            return Err(bad("operators", "need at least one sample operator"));
        }
        if self.m_values.is_empty() {
            return Err(bad("m-values", "need at least one node count"));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("m-values", "node counts must be strictly increasing"));
        }
        if self.m_values.iter().any(|&m| m < 16) {
            return Err(bad("m-values", "node counts below 16 cannot resolve an arc"));
        }
        if let Some(arcs) = &self.arcs {
            for (key, pair) in [("arcs.j", arcs.j), ("arcs.i", arcs.i)] {
                if !pair.iter().all(|v| v.is_finite()) || pair[0] >= pair[1] {
                    return Err(bad(key, format!("arc [{}, {}) must have start < end", pair[0], pair[1])));
                }
            }
        }
        if !(self.mu > 0.0) {
            return Err(bad("mu", format!("decay rate must be positive, got {}", self.mu)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(bad("amplitude", format!("amplitude must be positive, got {}", self.amplitude)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(bad("residual-tol", "residual tolerance must be positive"));
        }
        if !(self.ratio_min > 1.0) {
            return Err(bad("ratio-min", "improvement factor must exceed 1"));
        }
        Ok(())
    }
}

// -- star suite ---------------------------------------------------------------

/// Star-geometry checks: distance comparability, exponential-locality
/// classification, and chiral vertex indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct StarSuiteConfig {
    pub seed: u64,
    #[serde(default = "default_leg_counts")]
    pub leg_counts: Vec<u32>,
    #[serde(default = "default_leg_len")]
    pub leg_len: u32,
    /// Minimum angular separation for seeded embeddings, degrees.
    #[serde(default = "default_theta_min_degrees")]
    pub theta_min_degrees: f64,
    /// Seeded embeddings per leg count, on top of the uniform one.
    #[serde(default = "default_embeddings")]
    pub embeddings: usize,
    #[serde(default = "default_true")]
    pub comparability: bool,
    #[serde(default)]
    pub exp_local: Option<ExpLocalConfig>,
    #[serde(default)]
    pub chiral: Option<ChiralConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExpLocalConfig {
    pub mu: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_true")]
    pub self_adjoint: bool,
    pub sizes: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ChiralConfig {
    /// Per-leg index prescription; must sum to zero.
    pub shifts: Vec<i64>,
}

fn default_leg_counts() -> Vec<u32> {
    vec![3, 4, 5]
}

fn default_leg_len() -> u32 {
    32
}

fn default_theta_min_degrees() -> f64 {
    30.0
}

fn default_embeddings() -> usize {
    3
}

impl StarSuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.leg_counts.is_empty() {
            return Err(bad("leg-counts", "need at least one leg count"));
        }
        if self.leg_counts.iter().any(|&k| k < 3) {
            return Err(bad("leg-counts", "a star needs at least 3 legs"));
        }
        if self.leg_len < 2 {
            return Err(bad("leg-len", format!("leg length must be at least 2, got {}", self.leg_len)));
        }
        if !(self.theta_min_degrees > 0.0 && self.theta_min_degrees <= 120.0) {
            return Err(bad("theta-min-degrees", format!("angular floor must lie in (0, 120], got {}", self.theta_min_degrees)));
        }
        let max_k = f64::from(*self.leg_counts.iter().max().unwrap());
        if self.theta_min_degrees * max_k > 360.0 {
            return Err(bad("theta-min-degrees", format!("{} legs cannot all be {} degrees apart", max_k, self.theta_min_degrees)));
        }
        if let Some(e) = &self.exp_local {
            if !(e.mu > 0.0) {
                return Err(bad("exp-local.mu", format!("decay rate must be positive, got {}", e.mu)));
            }
            if !(e.amplitude > 0.0 && e.amplitude.is_finite()) {
                return Err(bad("exp-local.amplitude", format!("amplitude must be positive, got {}", e.amplitude)));
            }
            validate_sizes("exp-local.sizes", &e.sizes)?;
        }
        if let Some(c) = &self.chiral {
            if c.shifts.len() < 3 {
                return Err(bad("chiral.shifts", format!("need at least 3 legs of shifts, got {}", c.shifts.len())));
            }
            if c.shifts.iter().sum::<i64>() != 0 {
                return Err(bad("chiral.shifts", format!("per-leg shifts must sum to zero, got {:?}", c.shifts)));
            }
        }
        Ok(())
    }
}

// -- counterexample -------------------------------------------------------------

/// The ray-defect study: metric locality without commutator compactness.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CounterexampleConfig {
    pub radii: Vec<u32>,
    /// Asserted verdict for the defect profile. The construction is
    /// non-decaying; asserting "decaying" ships a guaranteed assertion
    /// failure for exit-code testing.
    #[serde(default = "default_expect")]
    pub expect: ExpectedVerdict,
    /// Also classify the hop's separated corner blocks, which do decay.
    #[serde(default = "default_true")]
    pub corner_blocks: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedVerdict {
    Decaying,
    NonDecaying,
}

fn default_expect() -> ExpectedVerdict {
    ExpectedVerdict::NonDecaying
}

impl CounterexampleConfig {
    fn validate(&self) -> Result<()> {
        if self.radii.len() < 3 {
            return Err(bad("radii", format!("the ray-defect study needs at least 3 radii, got {}", self.radii.len())));
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("radii", "radii must be strictly increasing"));
        }
        if let Some(&r) = self.radii.iter().find(|&&r| r < 2) {
            return Err(bad("radii", format!("radius {r} has no interior; use radii of at least 2")));
        }
        Ok(())
    }
}
