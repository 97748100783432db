//! Experiment runner: dispatches a validated config to the library, collects
//! the configured assertions, and writes the report tree.
//!
//! Artifacts under the output directory:
//! `report.json` (all numbers plus the provenance of every tolerance),
//! `config.json` (the resolved config echoed back), `tables/*.csv`,
//! `plots/*.svg`, and for path dumps `paths/`. Outputs are deterministic:
//! the same config and seed produce byte-identical reports and plots.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arc::{normalize_angle, ArcInterval, TAU};
use crate::config::{
    ArcsConfig, AuditSubject, ContourSuiteConfig, CounterexampleConfig, ExpectedVerdict,
    ExperimentConfig, ExperimentKind, HomotopySuiteConfig, HomotopyVariant, IndexEntry,
    IndexSuiteConfig, LocalityAuditConfig, StarSuiteConfig, ThresholdRow,
};
use crate::contour::{
    annulus_contour, contour_recover_block, diam_bound_check, dyadic_commutator_decay,
    interval_resolvent, quadrature_contract_check, SpectralSubset,
};
use crate::factory::{
    canonical_sau, half_space_projection, laughlin_family, laughlin_flux,
    prescribed_index_unitary, shift, IndexPrescription, PrescriptionStyle, ShiftBoundary,
};
use crate::family::ProjectionFamily;
use crate::geometry::{Geometry, Site, SiteMap};
use crate::homotopy::{
    connect_saus, connect_unitaries_type_i, connect_unitaries_type_ii, index_along_path,
    validate_path, HomotopyPath, PathValidation,
};
use crate::index::{index_vector, windowed_kernel_index, windowed_trace_index, SpatialWindow};
use crate::linalg::{adjoint, eye, op_norm, random_unitary};
use crate::linop::{LinOp, Tag};
use crate::locality::{
    classify_all, classify_type_iv, default_interval_pairs, implication_audit, instantiate_all,
    LocalityReport, LocalityType, ProfileThresholds, SizedInstance, TypeEntry, TypeVerdict,
    Verdict, Violation,
};
use crate::plot::{emit_plot, PlotKind, PlotSeries};
use crate::star::{
    chiral_vertex_indices, counterexample_2d, distance_comparability, exp_implies_type_i,
    exp_local_sampler, exp_local_star_family, leg_family, ChiralIndexReport, ChiralSystem,
    ComparabilityReport, CounterexampleReport, ExpLocalityReport, StarEmbedding,
};
use crate::tol;
use crate::{Error, Result};

/// Summary of a finished run: the exit decision and where the report went.
#[derive(Debug)]
pub struct RunOutcome {
    pub pass: bool,
    pub report_path: PathBuf,
    /// Names of the assertions that failed, for the exit message.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AssertionRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Default)]
struct Assertions {
    rows: Vec<AssertionRow>,
}

impl Assertions {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.rows.push(AssertionRow { name: name.into(), passed, detail: detail.into() });
    }

    fn failures(&self) -> Vec<String> {
        self.rows.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect()
    }
}

/// Report envelope shared by every experiment kind. Field order here is the
/// field order in `report.json`.
#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct Report<'a, T: Serialize> {
    name: &'a str,
    kind: &'static str,
    seed: Option<u64>,
    thresholds: &'a [ThresholdRow],
    results: &'a T,
    assertions: &'a [AssertionRow],
    pass: bool,
}

/// Run one experiment, writing all artifacts under `out`.
pub fn run_config(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out.join("tables"))?;
    std::fs::create_dir_all(out.join("plots"))?;
    write_json(&out.join("config.json"), cfg)?;
    match &cfg.kind {
        ExperimentKind::LocalityAudit(c) => run_locality_audit(&cfg.name, c, out),
        ExperimentKind::IndexSuite(c) => run_index_suite(&cfg.name, c, out),
        ExperimentKind::HomotopySuite(c) => run_homotopy_suite(&cfg.name, c, out),
        ExperimentKind::ContourSuite(c) => run_contour_suite(&cfg.name, c, out),
        ExperimentKind::StarSuite(c) => run_star_suite(&cfg.name, c, out),
        ExperimentKind::Counterexample(c) => run_counterexample(&cfg.name, c, out),
    }
}

fn finish<T: Serialize>(
    name: &str,
    kind: &'static str,
    seed: Option<u64>,
    thresholds: &[ThresholdRow],
    results: &T,
    asserts: Assertions,
    out: &Path,
) -> Result<RunOutcome> {
    let pass = asserts.rows.iter().all(|r| r.passed);
    let report = Report { name, kind, seed, thresholds, results, assertions: &asserts.rows, pass };
    let report_path = out.join("report.json");
    write_json(&report_path, &report)?;
    Ok(RunOutcome { pass, report_path, failures: asserts.failures() })
}

// -- artifact writers ----------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn fe(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

const LINOP_MAGIC: &[u8; 14] = b"quasi2d-linop\0";
const LINOP_VERSION: u32 = 1;

/// Dump a sample matrix: magic, version (u32 LE), dimension (u64 LE), then
/// row-major (re, im) f64 LE pairs.
fn write_linop(path: &Path, op: &LinOp) -> Result<()> {
    let d = op.dim();
    let mut buf = Vec::with_capacity(LINOP_MAGIC.len() + 12 + 16 * d * d);
    buf.extend_from_slice(LINOP_MAGIC);
    buf.extend_from_slice(&LINOP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(d as u64).to_le_bytes());
    for r in 0..d {
        for c in 0..d {
            let z = op.matrix()[[r, c]];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

// -- shared construction -------------------------------------------------------

fn square_map(radius: u32) -> Result<Arc<SiteMap>> {
    SiteMap::new(Geometry::SquareZ2 { radius }, 1)
}

fn line_map(half_width: u32) -> Result<Arc<SiteMap>> {
    SiteMap::new(Geometry::LineZ { half_width }, 1)
}

fn star_map(legs: u32, leg_len: u32) -> Result<Arc<SiteMap>> {
    SiteMap::new(Geometry::StarGraph { legs, leg_len, include_vertex: false }, 1)
}

/// Two half-line blocks on LineZ: x < 0 and x >= 0.
fn half_line_blocks(map: &Arc<SiteMap>) -> Result<ProjectionFamily> {
    let assignment: Vec<usize> = (0..map.dim())
        .map(|b| match map.site(map.site_of_basis(b)) {
            Site::Line { x } => usize::from(x >= 0),
            _ => 0,
        })
        .collect();
    ProjectionFamily::from_assignment(map.clone(), &assignment, 2, vec![None, None])
}

/// Contiguous abstract block array of `m` blocks with the given rank.
fn block_array_family(m: usize, rank: usize) -> Result<ProjectionFamily> {
    let map = SiteMap::new(Geometry::HalfLineN { length: (m * rank) as u32 }, 1)?;
    let assignment: Vec<usize> = (0..m * rank).map(|b| b / rank).collect();
    ProjectionFamily::from_assignment(map, &assignment, m, vec![None; m])
}

fn quarter_cuts() -> Vec<f64> {
    vec![0.0, TAU / 4.0, TAU / 2.0, 3.0 * TAU / 4.0]
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Decaying => "decaying",
        Verdict::NonDecaying => "non-decaying",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn type_verdict_name(v: TypeVerdict) -> &'static str {
    match v {
        TypeVerdict::Holds => "holds",
        TypeVerdict::Fails => "fails",
        TypeVerdict::Inconclusive => "inconclusive",
    }
}

fn type_key(ty: LocalityType) -> &'static str {
    match ty {
        LocalityType::I => "i",
        LocalityType::II => "ii",
        LocalityType::III => "iii",
        LocalityType::IV => "iv",
        LocalityType::V => "v",
    }
}

// -- index suite -----------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct IndexCaseResult {
    label: String,
    expected: Vec<i64>,
    trace: Vec<Option<i64>>,
    kernel: Vec<Option<i64>>,
    accepted: Vec<Option<i64>>,
    agree: bool,
    sum_rule: Option<bool>,
}

#[derive(Serialize)]
struct IndexSuiteResults {
    cases: Vec<IndexCaseResult>,
}

fn run_index_suite(name: &str, c: &IndexSuiteConfig, out: &Path) -> Result<RunOutcome> {
    let mut asserts = Assertions::default();
    let mut cases = Vec::new();
    let mut csv = Vec::new();

    for (k, entry) in c.entries.iter().enumerate() {
        match entry {
            IndexEntry::ShiftPower { power, half_width, window } => {
                let map = line_map(*half_width)?;
                let u = shift(&map, 0, *power, ShiftBoundary::Periodic)?;
                let p = half_space_projection(&map, 0)?;
                let w = window
                    .map(|wc| SpatialWindow::center(wc.w, wc.guard))
                    .unwrap_or_else(|| {
                        SpatialWindow::center(u64::from(*half_width) / 4, u64::from(*half_width) / 8)
                    });
                let t = windowed_trace_index(&u, &p, &w, &[], None)?;
                let kn = windowed_kernel_index(&u, &p, &w, &[], None)?;
                let expected = -*power;
                let agree = t.value.is_some() && t.value == kn.value;
                let accepted = if agree { t.value } else { None };
                asserts.check(
                    format!("case {k}: half-space index of shift^{power} is {expected} by both routes"),
                    accepted == Some(expected),
                    format!("trace {:?}, kernel {:?}", t.value, kn.value),
                );
                csv.push(vec![
                    k.to_string(),
                    format!("shift-power {power}"),
                    "0".into(),
                    expected.to_string(),
                    fmt_opt(&t.value),
                    fmt_opt(&kn.value),
                    fmt_opt(&accepted),
                ]);
                cases.push(IndexCaseResult {
                    label: format!("shift-power {power}"),
                    expected: vec![expected],
                    trace: vec![t.value],
                    kernel: vec![kn.value],
                    accepted: vec![accepted],
                    agree,
                    sum_rule: None,
                });
            }
            IndexEntry::Prescription { shifts, style, rank } => {
                let fam = block_array_family(shifts.len(), *rank as usize)?;
                let pres = prescribed_index_unitary(
                    &fam,
                    &IndexPrescription { shifts: shifts.clone(), style: *style },
                )?;
                let w = SpatialWindow::depth(
                    (u64::from(*rank) / 4).max(1),
                    (u64::from(*rank) / 8).max(1),
                );
                let iv = index_vector(&pres.op, &fam, &w, &pres.closure_links)?;
                let trace: Vec<Option<i64>> = iv.entries.iter().map(|e| e.trace.value).collect();
                let kernel: Vec<Option<i64>> = iv.entries.iter().map(|e| e.kernel.value).collect();
                let accepted: Vec<Option<i64>> = iv.entries.iter().map(|e| e.accepted).collect();
                let label = format!("prescription {shifts:?}");
                let ok = accepted.len() == shifts.len()
                    && accepted.iter().zip(shifts).all(|(a, e)| *a == Some(*e));
                asserts.check(
                    format!("case {k}: prescribed indices {shifts:?} reproduced by both routes"),
                    ok,
                    format!("accepted {accepted:?}"),
                );
                if matches!(style, PrescriptionStyle::FiniteStyle) {
                    asserts.check(
                        format!("case {k}: finite-style indices sum to zero"),
                        iv.sum_rule == Some(true),
                        format!("sum rule {:?}", iv.sum_rule),
                    );
                }
                for (j, e) in iv.entries.iter().enumerate() {
                    csv.push(vec![
                        k.to_string(),
                        label.clone(),
                        j.to_string(),
                        shifts[j].to_string(),
                        fmt_opt(&e.trace.value),
                        fmt_opt(&e.kernel.value),
                        fmt_opt(&e.accepted),
                    ]);
                }
                cases.push(IndexCaseResult {
                    label,
                    expected: shifts.clone(),
                    trace,
                    kernel,
                    accepted,
                    agree: ok,
                    sum_rule: iv.sum_rule,
                });
            }
        }
    }

    write_csv(
        &out.join("tables/indices.csv"),
        &["case", "label", "block", "expected", "trace", "kernel", "accepted"],
        &csv,
    )?;
    let thresholds = vec![
        ThresholdRow::built_in("index.trace-integrality", tol::TRACE_INT_TOL),
        ThresholdRow::built_in("index.tail-mass", tol::TAIL_MASS_EPS),
        ThresholdRow::built_in("index.kernel-mass", tol::KERNEL_MASS_EPS),
    ];
    finish(name, "index-suite", None, &thresholds, &IndexSuiteResults { cases }, asserts, out)
}

// -- locality audit ----------------------------------------------------------------

#[derive(Serialize)]
struct LocalityAuditResults {
    report: LocalityReport,
    violations: Vec<Violation>,
}

fn run_locality_audit(name: &str, c: &LocalityAuditConfig, out: &Path) -> Result<RunOutcome> {
    let (thresholds, mut trows) = c.thresholds.resolve("thresholds.");
    let instances: Vec<SizedInstance> = match &c.subject {
        AuditSubject::FluxVsSectors { cuts } => {
            let cuts = cuts.clone().unwrap_or_else(quarter_cuts);
            c.sizes
                .iter()
                .map(|&r| {
                    let map = square_map(r)?;
                    let fam = laughlin_family(&map, &cuts)?;
                    let op = laughlin_flux(&map)?;
                    Ok(SizedInstance { n: r, op, fam })
                })
                .collect::<Result<_>>()?
        }
        AuditSubject::ShiftVsSectors { axis, power, cuts } => {
            let cuts = cuts.clone().unwrap_or_else(quarter_cuts);
            c.sizes
                .iter()
                .map(|&r| {
                    let map = square_map(r)?;
                    let fam = laughlin_family(&map, &cuts)?;
                    let op = shift(&map, *axis, *power, ShiftBoundary::Open)?;
                    Ok(SizedInstance { n: r, op, fam })
                })
                .collect::<Result<_>>()?
        }
        AuditSubject::ExpLocalVsLegs { legs, mu, amplitude } => {
            let fam = exp_local_star_family(*legs, 1, &c.sizes, *mu, *amplitude, true, c.seed)?;
            instantiate_all(&fam)?
        }
    };

    let report = classify_all(name, &instances, c.seed, thresholds)?;
    let violations = implication_audit(std::slice::from_ref(&report));

    let mut asserts = Assertions::default();
    for (key, want) in &c.expect {
        let entry = report.entries.iter().find(|e| type_key(e.ty) == key.as_str());
        let got = entry.map(|e| type_verdict_name(e.verdict)).unwrap_or("absent");
        asserts.check(
            format!("type {key} verdict is {want}"),
            got == want.as_str(),
            format!("classified {got}"),
        );
    }
    asserts.check(
        "implication diagram has no violations",
        violations.is_empty(),
        format!("{} violation(s)", violations.len()),
    );

    let mut csv = Vec::new();
    let mut series = Vec::new();
    for entry in &report.entries {
        let key = type_key(entry.ty);
        for wit in &entry.witnesses {
            for s in &wit.profile.samples {
                csv.push(vec![
                    key.into(),
                    type_verdict_name(entry.verdict).into(),
                    wit.witness.clone(),
                    verdict_name(wit.profile.verdict).into(),
                    s.n.to_string(),
                    s.dim.to_string(),
                    s.tail_rank.to_string(),
                    fe(s.tail_sigma),
                ]);
            }
        }
        // One plotted witness per type: the one with the heaviest final tail.
        if let Some(wit) = entry.witnesses.iter().max_by(|a, b| {
            let fa = a.profile.samples.last().map(|s| s.tail_sigma).unwrap_or(0.0);
            let fb = b.profile.samples.last().map(|s| s.tail_sigma).unwrap_or(0.0);
            fa.total_cmp(&fb)
        }) {
            series.push(PlotSeries::new(
                format!("type-{key}"),
                wit.profile.samples.iter().map(|s| (s.dim as f64, s.tail_sigma)).collect(),
            ));
        }
    }
    write_csv(
        &out.join("tables/locality.csv"),
        &["type", "verdict", "witness", "witness-verdict", "n", "dim", "tail-rank", "tail-sigma"],
        &csv,
    )?;
    emit_plot(
        &out.join("plots/decay.svg"),
        PlotKind::DecayLoglog,
        &format!("{name}: singular value tails"),
        &series,
    )?;

    trows.push(ThresholdRow::built_in("family.r-min", tol::FAMILY_R_MIN as f64));
    finish(
        name,
        "locality-audit",
        Some(c.seed),
        &trows,
        &LocalityAuditResults { report, violations },
        asserts,
        out,
    )
}

// -- homotopy suite ----------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct PairRow {
    pair: usize,
    connected: bool,
    samples: usize,
    max_step: f64,
    min_sigma_min: f64,
    max_unitary_defect: Option<f64>,
    max_square_defect: Option<f64>,
    min_gap: Option<f64>,
    sign_constant: Option<bool>,
    index_constant: Option<bool>,
    all_invertible: bool,
    steps_ok: bool,
    class_ok: bool,
    locality_ok: bool,
    error: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct RejectionRow {
    scenario: String,
    rejected: bool,
    error: String,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct HomotopyResults {
    pairs: Vec<PairRow>,
    rejections: Vec<RejectionRow>,
    /// Full per-sample validation of the first pair's path.
    first_path: Option<PathValidation>,
}

fn max_step_of(path: &HomotopyPath) -> f64 {
    path.samples()
        .windows(2)
        .map(|w| op_norm(&(w[1].1.matrix() - w[0].1.matrix())))
        .fold(0.0, f64::max)
}

/// Conjugate `u` by a random diagonal phase: same index vector, genuinely
/// different unitary.
fn phase_conjugate(u: &LinOp, rng: &mut ChaCha8Rng) -> Result<LinOp> {
    let d = u.dim();
    let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
    for i in 0..d {
        dm[[i, i]] = C64::from_polar(1.0, rng.random::<f64>() * TAU);
    }
    let vm = adjoint(&dm).dot(u.matrix()).dot(&dm);
    LinOp::tagged(vm, u.map().clone(), &[Tag::Unitary])
}

/// Conjugate a block-diagonal SAU by independent per-block unitaries,
/// re-symmetrized against rounding.
fn block_conjugate(x: &LinOp, fam: &ProjectionFamily, rng: &mut ChaCha8Rng) -> Result<LinOp> {
    let d = x.dim();
    let mut q = eye(d);
    for j in 0..fam.m() {
        let idx = fam.support(j).ok_or(Error::InvalidParameter(
            "the conjugation needs a coordinate block family".into(),
        ))?;
        let small = random_unitary(rng, idx.len())?;
        for (r, &br) in idx.iter().enumerate() {
            for (s, &bs) in idx.iter().enumerate() {
                q[[br, bs]] = small[[r, s]];
            }
        }
    }
    let m = q.dot(x.matrix()).dot(&adjoint(&q));
    let sym = (&m + &adjoint(&m)).mapv(|z| z * 0.5);
    LinOp::new(sym, x.map().clone())
}

/// A cross-block Givens rotation between the first basis vectors of blocks 0
/// and 1, applied by conjugation: block counts survive, block-diagonality
/// does not.
fn givens_conjugate(x: &LinOp, fam: &ProjectionFamily, angle: f64) -> Result<LinOp> {
    let d = x.dim();
    let i = fam.support(0).and_then(|s| s.first().copied()).unwrap_or(0);
    let j = fam.support(1).and_then(|s| s.first().copied()).unwrap_or(1);
    let mut q = eye(d);
    let (cs, sn) = (angle.cos(), angle.sin());
    q[[i, i]] = C64::new(cs, 0.0);
    q[[j, j]] = C64::new(cs, 0.0);
    q[[i, j]] = C64::new(-sn, 0.0);
    q[[j, i]] = C64::new(sn, 0.0);
    let m = q.dot(x.matrix()).dot(&adjoint(&q));
    let sym = (&m + &adjoint(&m)).mapv(|z| z * 0.5);
    LinOp::new(sym, x.map().clone())
}

fn run_homotopy_suite(name: &str, c: &HomotopySuiteConfig, out: &Path) -> Result<RunOutcome> {
    match c.variant {
        HomotopyVariant::UnitaryTypeI | HomotopyVariant::UnitaryTypeII => {
            run_homotopy_unitary(name, c, out)
        }
        HomotopyVariant::SauTypeI | HomotopyVariant::SauTypeII => run_homotopy_sau(name, c, out),
    }
}

fn dump_first_path(out: &Path, path: &HomotopyPath) -> Result<()> {
    let dir = out.join("paths/pair-000");
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut times = Vec::new();
    for (i, (t, s)) in path.samples().iter().enumerate() {
        let file = format!("sample-{i:03}.linop");
        write_linop(&dir.join(&file), s)?;
        files.push(format!("pair-000/{file}"));
        times.push(*t);
    }
    #[derive(Serialize)]
    #[serde(rename_all = "kebab-case")]
    struct PathManifest<'a> {
        class: &'a str,
        geometry: Geometry,
        dim: usize,
        times: Vec<f64>,
        files: Vec<String>,
    }
    let manifest = PathManifest {
        class: match path.class() {
            crate::homotopy::PathClass::Invertible => "invertible",
            crate::homotopy::PathClass::Unitary => "unitary",
            crate::homotopy::PathClass::Sai => "sai",
            crate::homotopy::PathClass::Sau => "sau",
        },
        geometry: path.first().map().geometry(),
        dim: path.first().dim(),
        times,
        files,
    };
    write_json(&out.join("paths/manifest.json"), &manifest)
}

fn certificate_artifacts(out: &Path, name: &str, val: &PathValidation) -> Result<()> {
    let csv: Vec<Vec<String>> = val
        .rows
        .iter()
        .map(|r| {
            vec![
                fe(r.t),
                fe(r.sigma_min),
                fe(r.unitary_defect),
                fe(r.selfadjoint_defect),
                r.square_defect.map(fe).unwrap_or_default(),
                r.gap.map(fe).unwrap_or_default(),
                fe(r.locality),
            ]
        })
        .collect();
    write_csv(
        &out.join("tables/certificates.csv"),
        &["t", "sigma-min", "unitary-defect", "selfadjoint-defect", "square-defect", "gap", "locality"],
        &csv,
    )?;
    let mut series = vec![
        PlotSeries::new("sigma-min", val.rows.iter().map(|r| (r.t, r.sigma_min)).collect()),
        PlotSeries::new("locality", val.rows.iter().map(|r| (r.t, r.locality)).collect()),
    ];
    if val.rows.iter().all(|r| r.gap.is_some()) {
        series.push(PlotSeries::new(
            "gap",
            val.rows.iter().map(|r| (r.t, r.gap.unwrap_or(0.0))).collect(),
        ));
    } else {
        series.push(PlotSeries::new(
            "unitary-defect",
            val.rows.iter().map(|r| (r.t, r.unitary_defect)).collect(),
        ));
    }
    emit_plot(
        &out.join("plots/certificates.svg"),
        PlotKind::CertificateVsT,
        &format!("{name}: first pair certificates"),
        &series,
    )
}

fn run_homotopy_unitary(name: &str, c: &HomotopySuiteConfig, out: &Path) -> Result<RunOutcome> {
    let map = line_map(c.half_width)?;
    let fam = half_line_blocks(&map)?;
    let base = shift(&map, 0, 1, ShiftBoundary::Periodic)?;
    let w = SpatialWindow::center(u64::from(c.half_width) / 2, u64::from(c.half_width) / 4);
    let sharp = match c.variant {
        HomotopyVariant::UnitaryTypeI => LocalityType::I,
        _ => LocalityType::II,
    };
    let connect = |u: &LinOp, v: &LinOp| -> Result<HomotopyPath> {
        match sharp {
            LocalityType::I => connect_unitaries_type_i(u, v, &fam, &w, &[], &[]),
            _ => connect_unitaries_type_ii(u, v, &fam, &w, &[], &[]),
        }
    };

    let endpoints: Vec<(LinOp, LinOp)> = (0..c.pairs)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(p as u64));
            Ok((phase_conjugate(&base, &mut rng)?, phase_conjugate(&base, &mut rng)?))
        })
        .collect::<Result<_>>()?;

    let expected_index = index_vector(&base, &fam, &w, &[])?
        .accepted()
        .ok_or_else(|| Error::InvalidParameter("base shift index did not resolve".into()))?;

    let mut pairs = Vec::new();
    let mut first_path: Option<(HomotopyPath, PathValidation)> = None;
    for (p, (u, v)) in endpoints.iter().enumerate() {
        match connect(u, v) {
            Ok(path) => {
                let val = validate_path(&path, &fam, sharp, 1)?;
                let per_sample = index_along_path(&path, &fam, &w, &[]);
                let (index_constant, index_err) = match &per_sample {
                    Ok(vs) => {
                        (Some(vs.iter().all(|iv| iv.accepted().as_deref() == Some(&expected_index))), None)
                    }
                    Err(e) => (Some(false), Some(e.to_string())),
                };
                pairs.push(PairRow {
                    pair: p,
                    connected: true,
                    samples: path.len(),
                    max_step: max_step_of(&path),
                    min_sigma_min: val.rows.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
                    max_unitary_defect: Some(
                        val.rows.iter().map(|r| r.unitary_defect).fold(0.0, f64::max),
                    ),
                    max_square_defect: None,
                    min_gap: None,
                    sign_constant: val.flags.sign_constant,
                    index_constant,
                    all_invertible: val.flags.all_invertible,
                    steps_ok: val.flags.steps_ok,
                    class_ok: val.flags.class_ok,
                    locality_ok: val.flags.locality_ok,
                    error: index_err,
                });
                if first_path.is_none() {
                    first_path = Some((path, val));
                }
            }
            Err(e) => pairs.push(PairRow {
                pair: p,
                connected: false,
                samples: 0,
                max_step: 0.0,
                min_sigma_min: 0.0,
                max_unitary_defect: None,
                max_square_defect: None,
                min_gap: None,
                sign_constant: None,
                index_constant: None,
                all_invertible: false,
                steps_ok: false,
                class_ok: false,
                locality_ok: false,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut rejections = Vec::new();
    if c.check_rejection {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ 0x5eed);
        let u1 = phase_conjugate(&base, &mut rng)?;
        let shifted2 = shift(&map, 0, 2, ShiftBoundary::Periodic)?;
        let u2 = phase_conjugate(&shifted2, &mut rng)?;
        let res = connect(&u1, &u2);
        rejections.push(RejectionRow {
            scenario: "unequal index vectors".into(),
            rejected: matches!(res, Err(Error::NotConnectable(_))),
            error: res.err().map(|e| e.to_string()).unwrap_or_default(),
        });
        let partial = shift(&map, 0, 1, ShiftBoundary::Open)?;
        let res = connect(&partial, &base);
        rejections.push(RejectionRow {
            scenario: "non-unitary endpoint".into(),
            rejected: res.is_err(),
            error: res.err().map(|e| e.to_string()).unwrap_or_default(),
        });
    }

    let mut asserts = Assertions::default();
    let connected = pairs.iter().filter(|r| r.connected).count();
    asserts.check(
        format!("all {} equal-index pairs connect", c.pairs),
        connected == c.pairs,
        format!("{connected} of {} connected", c.pairs),
    );
    asserts.check(
        "every sample is invertible with admissible steps and class defects",
        pairs.iter().all(|r| r.connected && r.all_invertible && r.steps_ok && r.class_ok),
        "from per-sample validation",
    );
    asserts.check(
        "index vector is constant along every path",
        pairs.iter().all(|r| r.index_constant == Some(true)),
        format!("expected {expected_index:?} at every sample"),
    );
    if c.check_rejection {
        asserts.check(
            "unequal index vectors are rejected at the precondition",
            rejections.iter().any(|r| r.scenario == "unequal index vectors" && r.rejected),
            fmt_opt(&rejections.first().map(|r| r.error.clone())),
        );
        asserts.check(
            "non-unitary endpoints are rejected",
            rejections.iter().any(|r| r.scenario == "non-unitary endpoint" && r.rejected),
            "strict isometry defect refused",
        );
    }

    write_pair_csv(out, &pairs)?;
    if let Some((path, val)) = &first_path {
        certificate_artifacts(out, name, val)?;
        if c.dump_paths {
            dump_first_path(out, path)?;
        }
    }

    let thresholds = vec![
        ThresholdRow::built_in("path.step-max", tol::PATH_STEP_MAX),
        ThresholdRow::built_in("path.delta-inv", tol::PATH_DELTA_INV),
        ThresholdRow::built_in("path.unitary-defect-per-dim", tol::UNITARY_TOL_PER_DIM),
        ThresholdRow::built_in("path.locality-factor", tol::PATH_LOCALITY_FACTOR),
    ];
    let results = HomotopyResults { pairs, rejections, first_path: first_path.map(|(_, v)| v) };
    finish(name, "homotopy-suite", Some(c.seed), &thresholds, &results, asserts, out)
}

fn run_homotopy_sau(name: &str, c: &HomotopySuiteConfig, out: &Path) -> Result<RunOutcome> {
    let map = star_map(c.legs, c.leg_len)?;
    let fam = leg_family(&map)?;
    let x = canonical_sau(&fam)?;
    let sharp = match c.variant {
        HomotopyVariant::SauTypeI => LocalityType::I,
        _ => LocalityType::II,
    };

    let endpoints: Vec<(LinOp, LinOp)> = (0..c.pairs)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(p as u64));
            let u = block_conjugate(&x, &fam, &mut rng)?;
            let v = if sharp == LocalityType::II && p % 2 == 1 {
                // Mix blocks: still equal inertia, no longer block diagonal.
                let angle = 0.2 + 0.3 * rng.random::<f64>();
                givens_conjugate(&block_conjugate(&x, &fam, &mut rng)?, &fam, angle)?
            } else {
                block_conjugate(&x, &fam, &mut rng)?
            };
            Ok((u, v))
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut first_path: Option<(HomotopyPath, PathValidation)> = None;
    for (p, (u, v)) in endpoints.iter().enumerate() {
        match connect_saus(u, v, &fam, sharp, c.r_min) {
            Ok(path) => {
                let val = validate_path(&path, &fam, sharp, c.r_min)?;
                pairs.push(PairRow {
                    pair: p,
                    connected: true,
                    samples: path.len(),
                    max_step: max_step_of(&path),
                    min_sigma_min: val.rows.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
                    max_unitary_defect: None,
                    max_square_defect: Some(
                        val.rows.iter().filter_map(|r| r.square_defect).fold(0.0, f64::max),
                    ),
                    min_gap: Some(
                        val.rows.iter().filter_map(|r| r.gap).fold(f64::INFINITY, f64::min),
                    ),
                    sign_constant: val.flags.sign_constant,
                    index_constant: None,
                    all_invertible: val.flags.all_invertible,
                    steps_ok: val.flags.steps_ok,
                    class_ok: val.flags.class_ok,
                    locality_ok: val.flags.locality_ok,
                    error: None,
                });
                if first_path.is_none() {
                    first_path = Some((path, val));
                }
            }
            Err(e) => pairs.push(PairRow {
                pair: p,
                connected: false,
                samples: 0,
                max_step: 0.0,
                min_sigma_min: 0.0,
                max_unitary_defect: None,
                max_square_defect: None,
                min_gap: None,
                sign_constant: None,
                index_constant: None,
                all_invertible: false,
                steps_ok: false,
                class_ok: false,
                locality_ok: false,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut rejections = Vec::new();
    if c.check_rejection {
        // One block entirely positive: the non-triviality certificate fails.
        let d = map.dim();
        let mut signs = vec![1.0; d];
        for j in 1..fam.m() {
            if let Some(idx) = fam.support(j) {
                for (pos, &b) in idx.iter().enumerate() {
                    signs[b] = if pos % 2 == 0 { -1.0 } else { 1.0 };
                }
            }
        }
        let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
        for (i, &s) in signs.iter().enumerate() {
            dm[[i, i]] = C64::new(s, 0.0);
        }
        let bad = LinOp::new(dm, map.clone())?;
        let res = connect_saus(&bad, &x, &fam, sharp, c.r_min);
        rejections.push(RejectionRow {
            scenario: "uncertified block".into(),
            rejected: matches!(res, Err(Error::CertificateFailed(_))),
            error: res.err().map(|e| e.to_string()).unwrap_or_default(),
        });

        // Flip one sign of the canonical SAU: totals differ, connection must refuse.
        let mut vals: Vec<f64> = x.matrix().diag().iter().map(|z| z.re).collect();
        if let Some(flip) = vals.iter().position(|&s| s < 0.0) {
            vals[flip] = 1.0;
        }
        let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
        for (i, &s) in vals.iter().enumerate() {
            dm[[i, i]] = C64::new(s, 0.0);
        }
        let mismatched = LinOp::new(dm, map.clone())?;
        let res = connect_saus(&mismatched, &x, &fam, sharp, c.r_min);
        rejections.push(RejectionRow {
            scenario: "total inertia mismatch".into(),
            rejected: matches!(res, Err(Error::SignCountMismatch(..))),
            error: res.err().map(|e| e.to_string()).unwrap_or_default(),
        });
    }

    let mut asserts = Assertions::default();
    let connected = pairs.iter().filter(|r| r.connected).count();
    asserts.check(
        format!("all {} certified SAU pairs connect", c.pairs),
        connected == c.pairs,
        format!("{connected} of {} connected", c.pairs),
    );
    let worst_sq = pairs.iter().filter_map(|r| r.max_square_defect).fold(0.0, f64::max);
    asserts.check(
        "involution defect stays within tolerance at every sample",
        pairs.iter().all(|r| r.connected) && worst_sq <= tol::SAU_DEFECT_TOL,
        format!("max ||gamma^2 - 1|| = {worst_sq:e} vs {:e}", tol::SAU_DEFECT_TOL),
    );
    let worst_gap = pairs.iter().filter_map(|r| r.min_gap).fold(f64::INFINITY, f64::min);
    asserts.check(
        "spectral gap stays at or above delta at every sample",
        pairs.iter().all(|r| r.connected) && worst_gap >= tol::SAI_GAP_DELTA,
        format!("min gap = {worst_gap:e} vs {:e}", tol::SAI_GAP_DELTA),
    );
    asserts.check(
        "sign counts are constant along every path",
        pairs.iter().all(|r| r.sign_constant == Some(true)),
        "totals re-measured per sample",
    );
    asserts.check(
        "every sample is invertible with admissible steps and class defects",
        pairs.iter().all(|r| r.connected && r.all_invertible && r.steps_ok && r.class_ok),
        "from per-sample validation",
    );
    if c.check_rejection {
        asserts.check(
            "certificate-failing input is rejected",
            rejections.iter().any(|r| r.scenario == "uncertified block" && r.rejected),
            fmt_opt(&rejections.first().map(|r| r.error.clone())),
        );
        asserts.check(
            "total inertia mismatch is rejected",
            rejections.iter().any(|r| r.scenario == "total inertia mismatch" && r.rejected),
            fmt_opt(&rejections.last().map(|r| r.error.clone())),
        );
    }

    write_pair_csv(out, &pairs)?;
    if let Some((path, val)) = &first_path {
        certificate_artifacts(out, name, val)?;
        if c.dump_paths {
            dump_first_path(out, path)?;
        }
    }

    let thresholds = vec![
        ThresholdRow::built_in("path.step-max", tol::PATH_STEP_MAX),
        ThresholdRow::built_in("path.delta-inv", tol::PATH_DELTA_INV),
        ThresholdRow::built_in("path.square-defect", tol::SAU_DEFECT_TOL),
        ThresholdRow::built_in("path.gap-delta", tol::SAI_GAP_DELTA),
        ThresholdRow::built_in("path.locality-factor", tol::PATH_LOCALITY_FACTOR),
    ];
    let results = HomotopyResults { pairs, rejections, first_path: first_path.map(|(_, v)| v) };
    finish(name, "homotopy-suite", Some(c.seed), &thresholds, &results, asserts, out)
}

fn write_pair_csv(out: &Path, pairs: &[PairRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|r| {
            vec![
                r.pair.to_string(),
                r.connected.to_string(),
                r.samples.to_string(),
                fe(r.max_step),
                fe(r.min_sigma_min),
                r.max_unitary_defect.map(fe).unwrap_or_default(),
                r.max_square_defect.map(fe).unwrap_or_default(),
                r.min_gap.map(fe).unwrap_or_default(),
                fmt_opt(&r.sign_constant),
                fmt_opt(&r.index_constant),
                r.locality_ok.to_string(),
                fmt_opt(&r.error),
            ]
        })
        .collect();
    write_csv(
        &out.join("tables/pairs.csv"),
        &[
            "pair",
            "connected",
            "samples",
            "max-step",
            "min-sigma-min",
            "max-unitary-defect",
            "max-square-defect",
            "min-gap",
            "sign-constant",
            "index-constant",
            "locality-ok",
            "error",
        ],
        &rows,
    )
}

// -- contour suite -----------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ResidualRow {
    op: usize,
    m: usize,
    residual: f64,
    corner_norm: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct DyadicRow {
    op: usize,
    level: u32,
    arcs: usize,
    occupied: usize,
    t_norm: f64,
    chord_bound: f64,
    arclen_bound: f64,
    ok: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct DiamRow {
    triple: usize,
    selected: usize,
    lhs: f64,
    rhs: f64,
    slack: f64,
    ok: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ResolventRow {
    probe: usize,
    z_re: f64,
    z_im: f64,
    norm: f64,
    dist: f64,
    bound_ok: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ContractRow {
    op: usize,
    norm_lhs: f64,
    norm_rhs: f64,
    norm_ok: bool,
    interchange_defect: f64,
    interchange_ok: bool,
    trace_norm_lhs: f64,
    trace_norm_rhs: f64,
    trace_norm_ok: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ContourResults {
    residuals: Vec<ResidualRow>,
    dyadic: Vec<DyadicRow>,
    diam: Vec<DiamRow>,
    resolvent: Vec<ResolventRow>,
    contract: Vec<ContractRow>,
}

fn config_arcs(arcs: &Option<ArcsConfig>) -> Result<(ArcInterval, ArcInterval)> {
    let named = |key: &str, pair: [f64; 2]| -> Result<ArcInterval> {
        ArcInterval::new(pair[0], pair[1], true, false)
            .map_err(|e| Error::Config { key: key.into(), message: e.to_string() })
    };
    match arcs {
        Some(a) => Ok((named("arcs.j", a.j)?, named("arcs.i", a.i)?)),
        None => Ok((
            ArcInterval::new(0.0, TAU / 4.0, true, false)?,
            ArcInterval::new(3.0 * TAU / 8.0, 5.0 * TAU / 8.0, true, false)?,
        )),
    }
}

fn run_contour_suite(name: &str, c: &ContourSuiteConfig, out: &Path) -> Result<RunOutcome> {
    let map = square_map(c.radius)?;
    let l = laughlin_flux(&map)?;
    let (jarc, iarc) = config_arcs(&c.arcs)?;

    let ops: Vec<LinOp> = (0..c.operators)
        .map(|i| exp_local_sampler(&map, c.mu, c.amplitude, false, c.seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;

    let contours = c
        .m_values
        .iter()
        .map(|&m| {
            annulus_contour(&l, &jarc, &iarc, m)
                .map(|ct| (m, ct))
                .map_err(|e| Error::Config { key: "arcs".into(), message: e.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;

    let residuals: Vec<ResidualRow> = ops
        .par_iter()
        .enumerate()
        .map(|(idx, a)| {
            contours
                .iter()
                .map(|(m, ct)| {
                    let rec = contour_recover_block(a, &l, &iarc, &jarc, ct)?;
                    Ok(ResidualRow {
                        op: idx,
                        m: *m,
                        residual: rec.residual,
                        corner_norm: rec.direct.op_norm(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut asserts = Assertions::default();
    let m_last = *c.m_values.last().expect("validated nonempty");
    let worst_final = residuals
        .iter()
        .filter(|r| r.m == m_last)
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    asserts.check(
        format!("recovery residual at M = {m_last} within tolerance for all {} operators", c.operators),
        worst_final <= c.residual_tol,
        format!("max residual {worst_final:e} vs {:e}", c.residual_tol),
    );
    if c.m_values.len() > 1 {
        let mut worst_ratio = f64::INFINITY;
        let mut all_ok = true;
        for idx in 0..c.operators {
            let per_op: Vec<f64> = residuals
                .iter()
                .filter(|r| r.op == idx)
                .map(|r| r.residual)
                .collect();
            for win in per_op.windows(2) {
                let (coarse, fine) = (win[0], win[1]);
                if fine <= c.residual_floor {
                    continue;
                }
                let ratio = coarse / fine;
                worst_ratio = worst_ratio.min(ratio);
                if ratio < c.ratio_min {
                    all_ok = false;
                }
            }
        }
        asserts.check(
            format!("residual contracts by at least {} per node doubling above the floor", c.ratio_min),
            all_ok,
            format!("worst ratio {worst_ratio:.3}"),
        );
    }

    let dyadic: Vec<DyadicRow> = if c.dyadic_levels > 0 {
        ops.par_iter()
            .enumerate()
            .map(|(idx, a)| {
                let rows = dyadic_commutator_decay(a, &l, c.dyadic_levels)?;
                Ok(rows
                    .into_iter()
                    .map(|r| DyadicRow {
                        op: idx,
                        level: r.level,
                        arcs: r.arcs,
                        occupied: r.occupied,
                        t_norm: r.t_norm,
                        chord_bound: r.chord_bound,
                        arclen_bound: r.arclen_bound,
                        ok: r.ok && r.t_norm <= r.arclen_bound + tol::DIAM_SLACK,
                    })
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    } else {
        Vec::new()
    };
    if c.dyadic_levels > 0 {
        asserts.check(
            format!("dyadic commutator bound holds at levels 1..{} for every operator", c.dyadic_levels),
            dyadic.iter().all(|r| r.ok),
            format!("{} of {} level rows pass", dyadic.iter().filter(|r| r.ok).count(), dyadic.len()),
        );
    }

    let diam: Vec<DiamRow> = if c.diam_triples > 0 {
        let d = map.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ 0xd1a3);
        let mut rows = Vec::with_capacity(c.diam_triples);
        for triple in 0..c.diam_triples {
            // A seeded normal operator with known eigenphases, so arc
            // membership and the convex combination need no spectral solve.
            let phases: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * TAU).collect();
            let v = random_unitary(&mut rng, d)?;
            let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
            for (i, &p) in phases.iter().enumerate() {
                dm[[i, i]] = C64::from_polar(1.0, p);
            }
            let a = LinOp::new(v.dot(&dm).dot(&adjoint(&v)), map.clone())?;
            let (arc, inside) = loop {
                let start = rng.random::<f64>() * TAU;
                let len = 0.3 + rng.random::<f64>() * (TAU / 2.0 - 0.3);
                let arc = ArcInterval::new(start, start + len, true, true)?;
                let inside: Vec<f64> = phases
                    .iter()
                    .copied()
                    .filter(|&p| arc.contains(normalize_angle(p)))
                    .collect();
                if inside.len() >= 2 {
                    break (arc, inside);
                }
            };
            let mut weights: Vec<f64> = inside.iter().map(|_| rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let z: C64 = inside
                .iter()
                .zip(&weights)
                .map(|(&p, &w)| C64::from_polar(1.0, p) * C64::new(w, 0.0))
                .sum();
            let res = diam_bound_check(&a, &SpectralSubset::Arc(arc), z)?;
            rows.push(DiamRow {
                triple,
                selected: res.selected,
                lhs: res.lhs,
                rhs: res.rhs,
                slack: res.rhs - res.lhs,
                ok: res.ok,
            });
        }
        rows
    } else {
        Vec::new()
    };
    if c.diam_triples > 0 {
        let worst = diam.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        asserts.check(
            format!("diameter bound holds for all {} seeded triples", c.diam_triples),
            diam.iter().all(|r| r.ok),
            format!("min slack {worst:e}"),
        );
    }

    let resolvent: Vec<ResolventRow> = if c.resolvent_probes > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ 0x7e50);
        let mut rows = Vec::with_capacity(c.resolvent_probes);
        let mut probe = 0;
        while rows.len() < c.resolvent_probes {
            probe += 1;
            if probe > 100 * c.resolvent_probes {
                break;
            }
            let r = 0.05 + 2.95 * rng.random::<f64>();
            let phi = TAU * rng.random::<f64>();
            let z = C64::new(r * phi.cos(), r * phi.sin());
            // Keep clear of the masked spectrum: the arc on the unit circle
            // and the zero eigenvalue of the masked operator.
            let near_circle = (z.norm() - 1.0).abs() < 0.05;
            let near_arc = near_circle && {
                let ang = normalize_angle(z.im.atan2(z.re));
                jarc.contains(ang)
                    || jarc.contains(normalize_angle(ang + 0.05))
                    || jarc.contains(normalize_angle(ang - 0.05))
            };
            if z.norm() < 0.05 || near_arc {
                continue;
            }
            let rep = interval_resolvent(&l, &jarc, z)?;
            rows.push(ResolventRow {
                probe: rows.len(),
                z_re: z.re,
                z_im: z.im,
                norm: rep.norm,
                dist: rep.dist,
                bound_ok: rep.bound_ok,
            });
        }
        rows
    } else {
        Vec::new()
    };
    if c.resolvent_probes > 0 {
        asserts.check(
            format!("resolvent norm bound holds at all {} probes", c.resolvent_probes),
            resolvent.len() == c.resolvent_probes && resolvent.iter().all(|r| r.bound_ok),
            format!("{} probes checked", resolvent.len()),
        );
    }

    let contract: Vec<ContractRow> = if c.contract {
        let (_, last_ct) = contours.last().expect("validated nonempty");
        ops.par_iter()
            .enumerate()
            .map(|(idx, a)| {
                let qc = quadrature_contract_check(a, &l, &iarc, &jarc, last_ct)?;
                Ok(ContractRow {
                    op: idx,
                    norm_lhs: qc.norm_lhs,
                    norm_rhs: qc.norm_rhs,
                    norm_ok: qc.norm_ok,
                    interchange_defect: qc.interchange_defect,
                    interchange_ok: qc.interchange_ok,
                    trace_norm_lhs: qc.trace_norm_lhs,
                    trace_norm_rhs: qc.trace_norm_rhs,
                    trace_norm_ok: qc.trace_norm_ok,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    if c.contract {
        asserts.check(
            "quadrature norm, interchange, and trace-norm contracts hold for every operator",
            contract.iter().all(|r| r.norm_ok && r.interchange_ok && r.trace_norm_ok),
            format!("{} of {} operators pass", contract.iter().filter(|r| r.norm_ok && r.interchange_ok && r.trace_norm_ok).count(), contract.len()),
        );
    }

    // Tables.
    write_csv(
        &out.join("tables/residuals.csv"),
        &["op", "m", "residual", "corner-norm"],
        &residuals
            .iter()
            .map(|r| vec![r.op.to_string(), r.m.to_string(), fe(r.residual), fe(r.corner_norm)])
            .collect::<Vec<_>>(),
    )?;
    if !dyadic.is_empty() {
        write_csv(
            &out.join("tables/dyadic.csv"),
            &["op", "level", "arcs", "occupied", "t-norm", "chord-bound", "arclen-bound", "ok"],
            &dyadic
                .iter()
                .map(|r| {
                    vec![
                        r.op.to_string(),
                        r.level.to_string(),
                        r.arcs.to_string(),
                        r.occupied.to_string(),
                        fe(r.t_norm),
                        fe(r.chord_bound),
                        fe(r.arclen_bound),
                        r.ok.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }
    if !diam.is_empty() {
        write_csv(
            &out.join("tables/diam.csv"),
            &["triple", "selected", "lhs", "rhs", "slack", "ok"],
            &diam
                .iter()
                .map(|r| {
                    vec![
                        r.triple.to_string(),
                        r.selected.to_string(),
                        fe(r.lhs),
                        fe(r.rhs),
                        fe(r.slack),
                        r.ok.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }
    if !resolvent.is_empty() {
        write_csv(
            &out.join("tables/resolvent.csv"),
            &["probe", "z-re", "z-im", "norm", "dist", "bound-ok"],
            &resolvent
                .iter()
                .map(|r| {
                    vec![
                        r.probe.to_string(),
                        fe(r.z_re),
                        fe(r.z_im),
                        fe(r.norm),
                        fe(r.dist),
                        r.bound_ok.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }
    if !contract.is_empty() {
        write_csv(
            &out.join("tables/contract.csv"),
            &["op", "norm-lhs", "norm-rhs", "norm-ok", "interchange-defect", "interchange-ok", "trace-norm-lhs", "trace-norm-rhs", "trace-norm-ok"],
            &contract
                .iter()
                .map(|r| {
                    vec![
                        r.op.to_string(),
                        fe(r.norm_lhs),
                        fe(r.norm_rhs),
                        r.norm_ok.to_string(),
                        fe(r.interchange_defect),
                        r.interchange_ok.to_string(),
                        fe(r.trace_norm_lhs),
                        fe(r.trace_norm_rhs),
                        r.trace_norm_ok.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }

    // Residual summary plot across operators.
    let mut series = Vec::new();
    for (label, pick) in [
        ("max", f64::max as fn(f64, f64) -> f64),
        ("min", f64::min as fn(f64, f64) -> f64),
    ] {
        let init = if label == "max" { 0.0 } else { f64::INFINITY };
        let pts: Vec<(f64, f64)> = c
            .m_values
            .iter()
            .map(|&m| {
                let v = residuals
                    .iter()
                    .filter(|r| r.m == m)
                    .map(|r| r.residual)
                    .fold(init, pick);
                (m as f64, v)
            })
            .collect();
        series.push(PlotSeries::new(format!("{label} residual"), pts));
    }
    emit_plot(
        &out.join("plots/residuals.svg"),
        PlotKind::ResidualVsM,
        &format!("{name}: recovery residual vs quadrature nodes"),
        &series,
    )?;

    let thresholds = vec![
        ThresholdRow { key: "residual-tol".into(), value: c.residual_tol, source: "config" },
        ThresholdRow { key: "ratio-min".into(), value: c.ratio_min, source: "config" },
        ThresholdRow { key: "residual-floor".into(), value: c.residual_floor, source: "config" },
        ThresholdRow::built_in("contour.diam-slack", tol::DIAM_SLACK),
        ThresholdRow::built_in("contour.resolvent-clearance", tol::RESOLVENT_CLEARANCE),
    ];
    let results = ContourResults { residuals, dyadic, diam, resolvent, contract };
    finish(name, "contour-suite", Some(c.seed), &thresholds, &results, asserts, out)
}

// -- star suite ---------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ComparabilityOutcome {
    legs: u32,
    embedding: String,
    report: ComparabilityReport,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ExpLocalOutcome {
    legs: u32,
    report: ExpLocalityReport,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ChiralOutcome {
    shifts: Vec<i64>,
    report: ChiralIndexReport,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct StarResults {
    comparability: Vec<ComparabilityOutcome>,
    exp_local: Vec<ExpLocalOutcome>,
    chiral: Option<ChiralOutcome>,
}

/// Seeded leg angles with all circular gaps at or above `theta_min`.
fn seeded_embedding(k: u32, theta_min: f64, rng: &mut ChaCha8Rng) -> Result<StarEmbedding> {
    for _ in 0..10_000 {
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * TAU).collect();
        angles.sort_by(f64::total_cmp);
        let mut ok = true;
        for i in 0..angles.len() {
            let next = if i + 1 == angles.len() { angles[0] + TAU } else { angles[i + 1] };
            if next - angles[i] < theta_min {
                ok = false;
                break;
            }
        }
        if ok {
            return StarEmbedding::new(angles);
        }
    }
    Err(Error::InvalidParameter(format!(
        "could not draw {k} rays with minimum separation {theta_min:.3} rad"
    )))
}

fn run_star_suite(name: &str, c: &StarSuiteConfig, out: &Path) -> Result<RunOutcome> {
    let mut asserts = Assertions::default();
    let mut comparability = Vec::new();

    if c.comparability {
        let theta_min = c.theta_min_degrees.to_radians();
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        for &k in &c.leg_counts {
            let map = star_map(k, c.leg_len)?;
            let mut embeddings = vec![("uniform".to_string(), StarEmbedding::uniform(k)?)];
            for e in 0..c.embeddings {
                embeddings.push((format!("seeded-{e}"), seeded_embedding(k, theta_min, &mut rng)?));
            }
            for (label, emb) in embeddings {
                let report = distance_comparability(&map, &emb, c.seed)?;
                comparability.push(ComparabilityOutcome { legs: k, embedding: label, report });
            }
        }
        let all_bound = comparability.iter().all(|r| r.report.bound_ok);
        let all_lower = comparability.iter().all(|r| r.report.lower_ok);
        let worst = comparability
            .iter()
            .map(|r| r.report.max_ratio / r.report.bound)
            .fold(0.0, f64::max);
        asserts.check(
            "graph/Euclidean ratio within the angular bound on every embedding",
            all_bound,
            format!("worst ratio/bound = {worst:.4}"),
        );
        asserts.check(
            "Euclidean distance never exceeds graph distance",
            all_lower,
            "chord vs path length",
        );
    }

    let mut exp_local = Vec::new();
    if let Some(e) = &c.exp_local {
        for &k in &c.leg_counts {
            let fam =
                exp_local_star_family(k, 1, &e.sizes, e.mu, e.amplitude, e.self_adjoint, c.seed)?;
            let report = exp_implies_type_i(&fam, e.mu, e.amplitude, ProfileThresholds::default())?;
            exp_local.push(ExpLocalOutcome { legs: k, report });
        }
        asserts.check(
            format!("exponentially local samples (mu = {}) classify as single-block decaying", e.mu),
            exp_local
                .iter()
                .all(|r| {
                    r.report.report.entry(LocalityType::I).map(|t| t.verdict) == Some(TypeVerdict::Holds)
                }),
            "type-entry verdicts",
        );
        asserts.check(
            "cross-size trace-norm certificate holds for every leg count",
            exp_local.iter().all(|r| r.report.trace_ok),
            format!("bound per size: 2 c (k-1) N^2 (q/(1-q))^2"),
        );
    }

    let mut chiral = None;
    if let Some(ch) = &c.chiral {
        let k = ch.shifts.len() as u32;
        let map = star_map(k, c.leg_len)?;
        let fam = leg_family(&map)?;
        let pres =
            prescribed_index_unitary(&fam, &IndexPrescription::finite(ch.shifts.clone()))?;
        let sys = ChiralSystem::new(pres.op.clone())?;
        let w = SpatialWindow::center(
            u64::from(c.leg_len / 4).max(1),
            u64::from(c.leg_len / 8).max(1),
        );
        let report = chiral_vertex_indices(&sys, &fam, &w, &pres.closure_links)?;
        let got = report.indices.accepted();
        asserts.check(
            format!("chiral vertex indices reproduce {:?}", ch.shifts),
            got.as_deref() == Some(&ch.shifts[..]),
            format!("accepted {got:?}"),
        );
        asserts.check(
            "chiral indices sum to zero",
            report.indices.sum_rule == Some(true),
            format!("sum rule {:?}", report.indices.sum_rule),
        );
        asserts.check(
            "chiral spectrum is plus/minus symmetric",
            report.symmetry_defect <= 1e-9,
            format!("pairing defect {:e}", report.symmetry_defect),
        );
        chiral = Some(ChiralOutcome { shifts: ch.shifts.clone(), report });
    }

    // Tables.
    if !comparability.is_empty() {
        write_csv(
            &out.join("tables/comparability.csv"),
            &["legs", "embedding", "theta-min-deg", "bound", "max-ratio", "bound-ok", "lower-ok", "pairs", "exhaustive"],
            &comparability
                .iter()
                .map(|r| {
                    vec![
                        r.legs.to_string(),
                        r.embedding.clone(),
                        fe(r.report.theta_min.to_degrees()),
                        fe(r.report.bound),
                        fe(r.report.max_ratio),
                        r.report.bound_ok.to_string(),
                        r.report.lower_ok.to_string(),
                        r.report.pairs_checked.to_string(),
                        r.report.exhaustive.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
        let pts: Vec<(f64, f64)> = comparability
            .iter()
            .map(|r| (r.report.max_ratio / r.report.bound, 1.0))
            .collect();
        emit_plot(
            &out.join("plots/ratios.svg"),
            PlotKind::RatioHistogram,
            &format!("{name}: max ratio relative to bound"),
            &[PlotSeries::new("ratio/bound", pts)],
        )?;
    }
    if !exp_local.is_empty() {
        let mut csv = Vec::new();
        let mut series = Vec::new();
        for r in &exp_local {
            for row in &r.report.trace_proxy {
                csv.push(vec![
                    r.legs.to_string(),
                    row.n.to_string(),
                    fe(row.max_trace_norm),
                    fe(r.report.trace_bound),
                ]);
            }
            series.push(PlotSeries::new(
                format!("k = {}", r.legs),
                r.report.trace_proxy.iter().map(|row| (f64::from(row.n), row.max_trace_norm)).collect(),
            ));
        }
        write_csv(
            &out.join("tables/exp-local.csv"),
            &["legs", "n", "max-trace-norm", "trace-bound"],
            &csv,
        )?;
        emit_plot(
            &out.join("plots/exp-local.svg"),
            PlotKind::DecayLoglog,
            &format!("{name}: leg commutator trace norms"),
            &series,
        )?;
    }
    if let Some(ch) = &chiral {
        write_csv(
            &out.join("tables/chiral.csv"),
            &["leg", "expected", "trace", "kernel", "accepted"],
            &ch.report
                .indices
                .entries
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    vec![
                        j.to_string(),
                        ch.shifts[j].to_string(),
                        fmt_opt(&e.trace.value),
                        fmt_opt(&e.kernel.value),
                        fmt_opt(&e.accepted),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }

    let thresholds = vec![
        ThresholdRow { key: "theta-min-degrees".into(), value: c.theta_min_degrees, source: "config" },
        ThresholdRow::built_in("star.theta-min-honest", tol::STAR_THETA_MIN.to_degrees()),
        ThresholdRow::built_in("chiral.symmetry-defect", 1e-9),
    ];
    let results = StarResults { comparability, exp_local, chiral };
    finish(name, "star-suite", Some(c.seed), &thresholds, &results, asserts, out)
}

// -- counterexample --------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct CounterexampleResults {
    report: CounterexampleReport,
    /// Separated-corner classification of the same hop, when requested.
    corner_blocks: Option<TypeEntry>,
}

fn run_counterexample(name: &str, c: &CounterexampleConfig, out: &Path) -> Result<RunOutcome> {
    let report = counterexample_2d(&c.radii)?;

    let corner_blocks = if c.corner_blocks {
        let cuts = quarter_cuts();
        let instances: Vec<SizedInstance> = c
            .radii
            .iter()
            .map(|&r| {
                let map = square_map(r)?;
                let fam = laughlin_family(&map, &cuts)?;
                let op = shift(&map, 0, 1, ShiftBoundary::Open)?;
                Ok(SizedInstance { n: r, op, fam })
            })
            .collect::<Result<_>>()?;
        let thresholds = ProfileThresholds { alpha: 0.01, ..ProfileThresholds::default() };
        Some(classify_type_iv(&instances, &default_interval_pairs(4, true), thresholds)?)
    } else {
        None
    };

    let mut asserts = Assertions::default();
    let sigma_floor = 1.0 - 1e-10;
    let worst_sigma = report.rows.iter().map(|r| r.sigma_top).fold(f64::INFINITY, f64::min);
    asserts.check(
        "ray defect norm is pinned at 1 at every radius",
        report.rows.iter().all(|r| r.sigma_top >= sigma_floor),
        format!("min sigma-top {worst_sigma:.12}"),
    );
    let want = match c.expect {
        ExpectedVerdict::Decaying => Verdict::Decaying,
        ExpectedVerdict::NonDecaying => Verdict::NonDecaying,
    };
    asserts.check(
        format!("defect profile verdict is {}", verdict_name(want)),
        report.defect_profile.verdict == want,
        format!("classified {}", verdict_name(report.defect_profile.verdict)),
    );
    asserts.check(
        "axis-decaying reference profile decays",
        report.reference_profile.verdict == Verdict::Decaying,
        format!("classified {}", verdict_name(report.reference_profile.verdict)),
    );
    if let Some(entry) = &corner_blocks {
        asserts.check(
            "separated corner blocks of the hop decay",
            entry.verdict == TypeVerdict::Holds,
            format!("classified {}", type_verdict_name(entry.verdict)),
        );
    }

    write_csv(
        &out.join("tables/counterexample.csv"),
        &["radius", "dim", "sigma-top", "defect-rank", "identity-defect"],
        &report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.radius.to_string(),
                    r.dim.to_string(),
                    fe(r.sigma_top),
                    r.defect_rank.to_string(),
                    fe(r.identity_defect),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    let series = vec![
        PlotSeries::new(
            "ray defect",
            report.defect_profile.samples.iter().map(|s| (s.dim as f64, s.tail_sigma)).collect(),
        ),
        PlotSeries::new(
            "axis-decaying reference",
            report
                .reference_profile
                .samples
                .iter()
                .map(|s| (s.dim as f64, s.tail_sigma))
                .collect(),
        ),
    ];
    emit_plot(
        &out.join("plots/defect.svg"),
        PlotKind::DecayLoglog,
        &format!("{name}: defect tail vs reference"),
        &series,
    )?;

    let thresholds = vec![
        ThresholdRow::built_in("counterexample.sigma-floor", sigma_floor),
        ThresholdRow::built_in("counterexample.alpha", 0.01),
    ];
    let results = CounterexampleResults { report, corner_blocks };
    finish(name, "counterexample", None, &thresholds, &results, asserts, out)
}
