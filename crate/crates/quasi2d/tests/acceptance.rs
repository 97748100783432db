//! Acceptance gate: ten criteria, one test each, run serially so the wall
//! clock budgets are honest. Every tolerance and budget is pinned as a
//! constant below. Run with `-- --nocapture` to see the per-criterion lines
//! with measured values.

use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasi2d::arc::{normalize_angle, ArcInterval, TAU};
use quasi2d::contour::{
    annulus_contour, contour_recover_block, diam_bound_check, dyadic_commutator_decay,
    SpectralSubset,
};
use quasi2d::factory::{
    canonical_sau, half_space_projection, laughlin_family, laughlin_flux,
    prescribed_index_unitary, IndexPrescription, ShiftBoundary,
};
use quasi2d::factory::shift;
use quasi2d::family::ProjectionFamily;
use quasi2d::geometry::{Geometry, Site, SiteMap};
use quasi2d::homotopy::{
    connect_saus, connect_unitaries_type_i, index_along_path, non_triviality_certificate,
    validate_path,
};
use quasi2d::index::{index_vector, windowed_kernel_index, windowed_trace_index, SpatialWindow};
use quasi2d::linalg::{adjoint, eye, random_unitary};
use quasi2d::linop::{LinOp, Tag};
use quasi2d::locality::{
    classify_type_iv, default_interval_pairs, LocalityType, ProfileThresholds, SizedInstance,
    TypeVerdict, Verdict,
};
use quasi2d::star::{
    chiral_vertex_indices, counterexample_2d, distance_comparability, exp_implies_type_i,
    exp_local_sampler, exp_local_star_family, leg_family, ChiralSystem, StarEmbedding,
};
use quasi2d::{tol, Error};

// Pinned tolerances.
const SHIFT_WINDOW_W: u64 = 16;
const SHIFT_WINDOW_GUARD: u64 = 8;
const BLOCK_RANK: usize = 32;
const RESIDUAL_TOL: f64 = 1e-6;
const RATIO_MIN: f64 = 4.0;
const RESIDUAL_FLOOR: f64 = 1e-11;
const SQUARE_DEFECT_TOL: f64 = 1e-9;
const SIGMA_TOP_FLOOR: f64 = 1.0 - 1e-10;
const CORNER_ALPHA: f64 = 0.01;
const DIAM_TRIPLES: usize = 200;
const EXP_MU_MIN: f64 = 0.25;
const THETA_MIN_DEGREES: f64 = 30.0;
const CHIRAL_SYMMETRY_TOL: f64 = 1e-9;

// Pinned wall clock budgets.
const C1_BUDGET: Duration = Duration::from_secs(5);
const C2_BUDGET: Duration = Duration::from_secs(60);
const C3_BUDGET: Duration = Duration::from_secs(300);
const C4_BUDGET: Duration = Duration::from_secs(300);
const C5_BUDGET: Duration = Duration::from_secs(120);
const C6_BUDGET: Duration = Duration::from_secs(120);
const C7_BUDGET: Duration = Duration::from_secs(60);
const C8_BUDGET: Duration = Duration::from_secs(30);
const C9_BUDGET: Duration = Duration::from_secs(120);

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn done(n: u32, what: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("criterion {n}: pass ({elapsed:.2?} of {budget:.2?} budget) {what}");
    assert!(
        elapsed <= budget,
        "criterion {n} exceeded its wall clock budget: {elapsed:.2?} > {budget:.2?}"
    );
}

fn line(half_width: u32) -> std::sync::Arc<SiteMap> {
    SiteMap::new(Geometry::LineZ { half_width }, 1).unwrap()
}

fn square(radius: u32) -> std::sync::Arc<SiteMap> {
    SiteMap::new(Geometry::SquareZ2 { radius }, 1).unwrap()
}

fn star(legs: u32, leg_len: u32) -> std::sync::Arc<SiteMap> {
    SiteMap::new(Geometry::StarGraph { legs, leg_len, include_vertex: false }, 1).unwrap()
}

fn half_line_blocks(map: &std::sync::Arc<SiteMap>) -> ProjectionFamily {
    let assignment: Vec<usize> = (0..map.dim())
        .map(|b| match map.site(map.site_of_basis(b)) {
            Site::Line { x } => usize::from(x >= 0),
            _ => 0,
        })
        .collect();
    ProjectionFamily::from_assignment(map.clone(), &assignment, 2, vec![None, None]).unwrap()
}

fn block_array_family(m: usize, rank: usize) -> ProjectionFamily {
    let map = SiteMap::new(Geometry::HalfLineN { length: (m * rank) as u32 }, 1).unwrap();
    let assignment: Vec<usize> = (0..m * rank).map(|b| b / rank).collect();
    ProjectionFamily::from_assignment(map, &assignment, m, vec![None; m]).unwrap()
}

#[test]
fn criterion_01_half_space_index_of_shift_powers() {
    let _g = serial();
    let started = Instant::now();
    let map = line(64);
    let p = half_space_projection(&map, 0).unwrap();
    let w = SpatialWindow::center(SHIFT_WINDOW_W, SHIFT_WINDOW_GUARD);
    for k in 1..=3i64 {
        let u = shift(&map, 0, k, ShiftBoundary::Periodic).unwrap();
        let t = windowed_trace_index(&u, &p, &w, &[], None).unwrap();
        let kr = windowed_kernel_index(&u, &p, &w, &[], None).unwrap();
        assert_eq!(t.value, Some(-k), "trace route for power {k}: {t:?}");
        assert_eq!(kr.value, Some(-k), "kernel route for power {k}: {kr:?}");
    }
    done(1, "half-space index of the k-th shift power is -k by both routes, k = 1, 2, 3", started, C1_BUDGET);
}

/// All integer vectors of length `m` with entries in [-3, 3] summing to zero.
fn sum_zero_vectors(m: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; m];
    fn rec(cur: &mut Vec<i64>, pos: usize, out: &mut Vec<Vec<i64>>) {
        if pos == cur.len() {
            if cur.iter().sum::<i64>() == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in -3..=3 {
            cur[pos] = v;
            rec(cur, pos + 1, out);
        }
    }
    rec(&mut cur, 0, &mut out);
    out
}

#[test]
fn criterion_02_prescribed_block_indices() {
    let _g = serial();
    let started = Instant::now();
    // A single block of full rank has no complement to carry the balancing
    // flow, and the block family itself requires a corank of at least 2, so
    // the enumeration starts at m = 2. The m = 1 case is the empty statement
    // s = (0).
    let mut cases = 0usize;
    let mut saw_112 = false;
    for m in 2..=4usize {
        let fam = block_array_family(m, BLOCK_RANK);
        let w = SpatialWindow::depth((BLOCK_RANK / 4) as u64, (BLOCK_RANK / 8) as u64);
        for s in sum_zero_vectors(m) {
            let pres = prescribed_index_unitary(&fam, &IndexPrescription::finite(s.clone()))
                .unwrap_or_else(|e| panic!("prescription {s:?} failed: {e}"));
            let iv = index_vector(&pres.op, &fam, &w, &pres.closure_links).unwrap();
            for (j, entry) in iv.entries.iter().enumerate() {
                assert_eq!(entry.trace.value, Some(s[j]), "trace route, s = {s:?}, block {j}");
                assert_eq!(entry.kernel.value, Some(s[j]), "kernel route, s = {s:?}, block {j}");
            }
            assert_eq!(iv.sum_rule, Some(true), "sum rule for {s:?}");
            if s == [1, 1, -2] {
                saw_112 = true;
            }
            cases += 1;
        }
    }
    assert_eq!(cases, 7 + 37 + 231, "enumeration covers every sum-zero vector");
    assert!(saw_112, "the (1, 1, -2) vector is part of the sweep");
    done(2, "all 275 sum-zero prescriptions at block rank 32 reproduce s by both routes", started, C2_BUDGET);
}

fn phase_conjugate(u: &LinOp, rng: &mut ChaCha8Rng) -> LinOp {
    let d = u.dim();
    let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
    for i in 0..d {
        dm[[i, i]] = C64::from_polar(1.0, rng.random::<f64>() * TAU);
    }
    let vm = adjoint(&dm).dot(u.matrix()).dot(&dm);
    LinOp::tagged(vm, u.map().clone(), &[Tag::Unitary]).unwrap()
}

#[test]
fn criterion_03_equal_index_unitaries_connect() {
    let _g = serial();
    let started = Instant::now();
    let map = line(16);
    let fam = half_line_blocks(&map);
    let base = shift(&map, 0, 1, ShiftBoundary::Periodic).unwrap();
    let w = SpatialWindow::center(8, 4);
    let expected = index_vector(&base, &fam, &w, &[]).unwrap().accepted().unwrap();

    for p in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + p);
        let u = phase_conjugate(&base, &mut rng);
        let v = phase_conjugate(&base, &mut rng);
        let path = connect_unitaries_type_i(&u, &v, &fam, &w, &[], &[])
            .unwrap_or_else(|e| panic!("pair {p} failed to connect: {e}"));
        let val = validate_path(&path, &fam, LocalityType::I, 1).unwrap();
        assert!(val.flags.all_invertible, "pair {p}: a sample lost invertibility");
        assert!(val.flags.steps_ok, "pair {p}: a step exceeded the cap");
        assert!(val.flags.class_ok, "pair {p}: a sample left the unitary class");
        assert!(val.flags.locality_ok, "pair {p}: a sample broke the locality budget");
        let along = index_along_path(&path, &fam, &w, &[]).unwrap();
        assert!(
            along.iter().all(|iv| iv.accepted().as_deref() == Some(&expected[..])),
            "pair {p}: index vector moved along the path"
        );
    }

    // Different index vectors must be refused before any path is attempted.
    let mut rng = ChaCha8Rng::seed_from_u64(3999);
    let u1 = phase_conjugate(&base, &mut rng);
    let u2 = phase_conjugate(&shift(&map, 0, 2, ShiftBoundary::Periodic).unwrap(), &mut rng);
    match connect_unitaries_type_i(&u1, &u2, &fam, &w, &[], &[]) {
        Err(Error::NotConnectable(_)) => {}
        other => panic!("unequal-index pair was not rejected: {other:?}"),
    }
    done(3, "10 seeded equal-index pairs connect with constant index; unequal pair rejected", started, C3_BUDGET);
}

fn block_conjugate(x: &LinOp, fam: &ProjectionFamily, rng: &mut ChaCha8Rng) -> LinOp {
    let d = x.dim();
    let mut q = eye(d);
    for j in 0..fam.m() {
        let idx = fam.support(j).unwrap();
        let small = random_unitary(rng, idx.len()).unwrap();
        for (r, &br) in idx.iter().enumerate() {
            for (s, &bs) in idx.iter().enumerate() {
                q[[br, bs]] = small[[r, s]];
            }
        }
    }
    let m = q.dot(x.matrix()).dot(&adjoint(&q));
    let sym = (&m + &adjoint(&m)).mapv(|z| z * 0.5);
    LinOp::new(sym, x.map().clone()).unwrap()
}

fn givens_conjugate(x: &LinOp, fam: &ProjectionFamily, angle: f64) -> LinOp {
    let d = x.dim();
    let i = fam.support(0).unwrap()[0];
    let j = fam.support(1).unwrap()[0];
    let mut q = eye(d);
    let (cs, sn) = (angle.cos(), angle.sin());
    q[[i, i]] = C64::new(cs, 0.0);
    q[[j, j]] = C64::new(cs, 0.0);
    q[[i, j]] = C64::new(-sn, 0.0);
    q[[j, i]] = C64::new(sn, 0.0);
    let m = q.dot(x.matrix()).dot(&adjoint(&q));
    let sym = (&m + &adjoint(&m)).mapv(|z| z * 0.5);
    LinOp::new(sym, x.map().clone()).unwrap()
}

fn diagonal_sau(map: &std::sync::Arc<SiteMap>, signs: &[f64]) -> LinOp {
    let d = signs.len();
    let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
    for (i, &s) in signs.iter().enumerate() {
        dm[[i, i]] = C64::new(s, 0.0);
    }
    LinOp::new(dm, map.clone()).unwrap()
}

#[test]
fn criterion_04_certified_saus_connect() {
    let _g = serial();
    let started = Instant::now();
    let map = star(3, 8);
    let fam = leg_family(&map).unwrap();
    let x = canonical_sau(&fam).unwrap();
    let r_min = tol::FAMILY_R_MIN;

    for (sharp, seed0) in [(LocalityType::I, 4000u64), (LocalityType::II, 4500u64)] {
        for p in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed0 + p);
            let u = block_conjugate(&x, &fam, &mut rng);
            let v = if sharp == LocalityType::II && p % 2 == 1 {
                givens_conjugate(&block_conjugate(&x, &fam, &mut rng), &fam, 0.3)
            } else {
                block_conjugate(&x, &fam, &mut rng)
            };
            for (tag, e) in [("u", &u), ("v", &v)] {
                let cert = non_triviality_certificate(e, &fam, tol::SAI_GAP_DELTA, r_min).unwrap();
                assert!(cert.all_certified, "{sharp:?} pair {p}: endpoint {tag} not certified");
            }
            let path = connect_saus(&u, &v, &fam, sharp, r_min)
                .unwrap_or_else(|e| panic!("{sharp:?} pair {p} failed to connect: {e}"));
            let val = validate_path(&path, &fam, sharp, r_min).unwrap();
            for row in &val.rows {
                let sq = row.square_defect.expect("SAU path rows carry a square defect");
                assert!(
                    sq <= SQUARE_DEFECT_TOL,
                    "{sharp:?} pair {p}: square defect {sq:e} at t = {}",
                    row.t
                );
                let gap = row.gap.expect("SAU path rows carry a gap");
                assert!(
                    gap >= tol::SAI_GAP_DELTA,
                    "{sharp:?} pair {p}: gap {gap:e} at t = {}",
                    row.t
                );
            }
            assert_eq!(val.flags.sign_constant, Some(true), "{sharp:?} pair {p}: sign counts moved");
            assert!(val.flags.all_invertible && val.flags.steps_ok && val.flags.class_ok);
        }
    }

    // A block whose compression has no negative directions fails the
    // certificate and must be refused.
    let d = map.dim();
    let mut signs = vec![1.0; d];
    for j in 1..fam.m() {
        for (pos, &b) in fam.support(j).unwrap().iter().enumerate() {
            signs[b] = if pos % 2 == 0 { -1.0 } else { 1.0 };
        }
    }
    let uncertified = diagonal_sau(&map, &signs);
    match connect_saus(&uncertified, &x, &fam, LocalityType::I, r_min) {
        Err(Error::CertificateFailed(_)) => {}
        other => panic!("uncertified endpoint was not rejected: {other:?}"),
    }

    // Unequal total inertia must be refused.
    let mut vals: Vec<f64> = x.matrix().diag().iter().map(|z| z.re).collect();
    let flip = vals.iter().position(|&s| s < 0.0).unwrap();
    vals[flip] = 1.0;
    let mismatched = diagonal_sau(&map, &vals);
    match connect_saus(&mismatched, &x, &fam, LocalityType::I, r_min) {
        Err(Error::SignCountMismatch(..)) => {}
        other => panic!("inertia mismatch was not rejected: {other:?}"),
    }
    done(4, "10 certified SAU pairs connect per sharpness with bounded defects and constant signs", started, C4_BUDGET);
}

fn quarter_j() -> ArcInterval {
    ArcInterval::new(0.0, TAU / 4.0, true, false).unwrap()
}

fn offset_i() -> ArcInterval {
    ArcInterval::new(3.0 * TAU / 8.0, 5.0 * TAU / 8.0, true, false).unwrap()
}

fn contour_ops(map: &std::sync::Arc<SiteMap>, count: usize) -> Vec<LinOp> {
    (0..count)
        .map(|i| exp_local_sampler(map, 0.5, 1.0, false, 500 + i as u64).unwrap())
        .collect()
}

#[test]
fn criterion_05_contour_recovery_residuals() {
    let _g = serial();
    let started = Instant::now();
    let map = square(8);
    let l = laughlin_flux(&map).unwrap();
    let (jarc, iarc) = (quarter_j(), offset_i());
    let ops = contour_ops(&map, 20);
    let m_values = [64usize, 128, 256, 512];
    let contours: Vec<_> =
        m_values.iter().map(|&m| annulus_contour(&l, &jarc, &iarc, m).unwrap()).collect();

    for (idx, a) in ops.iter().enumerate() {
        let residuals: Vec<f64> = contours
            .iter()
            .map(|ct| contour_recover_block(a, &l, &iarc, &jarc, ct).unwrap().residual)
            .collect();
        let last = *residuals.last().unwrap();
        assert!(
            last <= RESIDUAL_TOL,
            "operator {idx}: residual {last:e} at M = 512 exceeds {RESIDUAL_TOL:e}"
        );
        for win in residuals.windows(2) {
            let (coarse, fine) = (win[0], win[1]);
            if fine <= RESIDUAL_FLOOR {
                continue;
            }
            assert!(
                coarse / fine >= RATIO_MIN,
                "operator {idx}: residual ratio {:.2} under node doubling fell below {RATIO_MIN}",
                coarse / fine
            );
        }
    }
    done(5, "20 seeded operators recover their corner to 1e-6 at M = 512, quartering per doubling", started, C5_BUDGET);
}

#[test]
fn criterion_06_ray_defect_never_decays() {
    let _g = serial();
    let started = Instant::now();
    let radii = [4u32, 8, 16];
    let report = counterexample_2d(&radii).unwrap();
    for row in &report.rows {
        assert!(
            row.sigma_top >= SIGMA_TOP_FLOOR,
            "radius {}: top singular value {} dipped below 1",
            row.radius,
            row.sigma_top
        );
    }
    assert_eq!(report.defect_profile.verdict, Verdict::NonDecaying, "ray defect must not decay");
    assert_eq!(report.reference_profile.verdict, Verdict::Decaying, "reference must decay");

    // The same hop, compressed to separated angular corners, does decay.
    let cuts = [0.0, TAU / 4.0, TAU / 2.0, 3.0 * TAU / 4.0];
    let instances: Vec<SizedInstance> = radii
        .iter()
        .map(|&r| {
            let map = square(r);
            let fam = laughlin_family(&map, &cuts).unwrap();
            let op = shift(&map, 0, 1, ShiftBoundary::Open).unwrap();
            SizedInstance { n: r, op, fam }
        })
        .collect();
    let thresholds = ProfileThresholds { alpha: CORNER_ALPHA, ..ProfileThresholds::default() };
    let entry = classify_type_iv(&instances, &default_interval_pairs(4, true), thresholds).unwrap();
    assert_eq!(entry.verdict, TypeVerdict::Holds, "separated corner blocks must decay");
    done(6, "hop defect stays at norm 1 and never decays while separated corner blocks decay", started, C6_BUDGET);
}

#[test]
fn criterion_07_dyadic_commutator_bounds() {
    let _g = serial();
    let started = Instant::now();
    let map = square(8);
    let l = laughlin_flux(&map).unwrap();
    let ops = contour_ops(&map, 20);
    for (idx, a) in ops.iter().enumerate() {
        let norm_a = a.op_norm();
        let rows = dyadic_commutator_decay(a, &l, 5).unwrap();
        assert_eq!(rows.len(), 5, "operator {idx}: expected levels 1 through 5");
        for row in &rows {
            let bound = 2.0 * (TAU / f64::from(1u32 << row.level)) * norm_a;
            assert!(
                (row.arclen_bound - bound).abs() <= 1e-12 * bound.max(1.0),
                "operator {idx} level {}: reported bound drifted from 2 (2 pi / 2^n) ||A||",
                row.level
            );
            assert!(
                row.t_norm <= bound + tol::DIAM_SLACK,
                "operator {idx} level {}: ||T_n|| = {:e} exceeds {:e}",
                row.level,
                row.t_norm,
                bound
            );
        }
    }
    done(7, "dyadic block norms stay under 2 (2 pi / 2^n) ||A|| at levels 1..5 for all 20 operators", started, C7_BUDGET);
}

#[test]
fn criterion_08_diameter_bound_triples() {
    let _g = serial();
    let started = Instant::now();
    let map = square(4);
    let d = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1a3);
    for triple in 0..DIAM_TRIPLES {
        let phases: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * TAU).collect();
        let v = random_unitary(&mut rng, d).unwrap();
        let mut dm = Array2::from_elem((d, d), C64::new(0.0, 0.0));
        for (i, &p) in phases.iter().enumerate() {
            dm[[i, i]] = C64::from_polar(1.0, p);
        }
        let a = LinOp::new(v.dot(&dm).dot(&adjoint(&v)), map.clone()).unwrap();
        let (arc, inside) = loop {
            let s = rng.random::<f64>() * TAU;
            let len = 0.3 + rng.random::<f64>() * (TAU / 2.0 - 0.3);
            let arc = ArcInterval::new(s, s + len, true, true).unwrap();
            let inside: Vec<f64> =
                phases.iter().copied().filter(|&p| arc.contains(normalize_angle(p))).collect();
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
        let res = diam_bound_check(&a, &SpectralSubset::Arc(arc), z).unwrap();
        assert!(res.ok, "triple {triple}: bound check failed");
        assert!(
            res.rhs - res.lhs >= 0.0,
            "triple {triple}: negative slack {:e}",
            res.rhs - res.lhs
        );
    }
    done(8, "200 seeded diameter-bound triples hold with nonnegative slack", started, C8_BUDGET);
}

fn seeded_embedding(k: u32, theta_min: f64, rng: &mut ChaCha8Rng) -> StarEmbedding {
    loop {
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
            return StarEmbedding::new(angles).unwrap();
        }
    }
}

#[test]
fn criterion_09_star_geometry_and_chiral_indices() {
    let _g = serial();
    let started = Instant::now();
    let theta_min = THETA_MIN_DEGREES.to_radians();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in [3u32, 4, 5] {
        let map = star(k, 32);
        let mut embeddings = vec![StarEmbedding::uniform(k).unwrap()];
        for _ in 0..3 {
            embeddings.push(seeded_embedding(k, theta_min, &mut rng));
        }
        for (e, emb) in embeddings.iter().enumerate() {
            let rep = distance_comparability(&map, emb, 31).unwrap();
            assert!(
                rep.theta_min >= theta_min - 1e-12,
                "k = {k} embedding {e}: minimum angle {:.3} under the floor",
                rep.theta_min
            );
            assert!(
                rep.bound_ok,
                "k = {k} embedding {e}: max ratio {:.4} exceeded the angular bound {:.4}",
                rep.max_ratio, rep.bound
            );
            assert!(rep.lower_ok, "k = {k} embedding {e}: chord exceeded path length");
        }
    }

    for k in [3u32, 4, 5] {
        let fam = exp_local_star_family(k, 1, &[8, 16, 32], EXP_MU_MIN, 1.0, true, 31).unwrap();
        let rep = exp_implies_type_i(&fam, EXP_MU_MIN, 1.0, ProfileThresholds::default()).unwrap();
        let verdict = rep.report.entry(LocalityType::I).map(|t| t.verdict);
        assert_eq!(verdict, Some(TypeVerdict::Holds), "k = {k}: exp-local sample not single-block decaying");
        assert!(rep.trace_ok, "k = {k}: cross-size trace-norm certificate failed");
    }

    let shifts = vec![1i64, 1, -2];
    let map = star(3, 32);
    let fam = leg_family(&map).unwrap();
    let pres = prescribed_index_unitary(&fam, &IndexPrescription::finite(shifts.clone())).unwrap();
    let sys = ChiralSystem::new(pres.op.clone()).unwrap();
    let w = SpatialWindow::center(8, 4);
    let rep = chiral_vertex_indices(&sys, &fam, &w, &pres.closure_links).unwrap();
    assert_eq!(rep.indices.accepted().as_deref(), Some(&shifts[..]), "chiral indices");
    assert_eq!(rep.indices.sum_rule, Some(true), "chiral sum rule");
    assert!(
        rep.symmetry_defect <= CHIRAL_SYMMETRY_TOL,
        "spectral symmetry defect {:e}",
        rep.symmetry_defect
    );
    done(9, "ratios within the angular bound; exp-local is single-block decaying; chiral indices match", started, C9_BUDGET);
}

#[test]
fn criterion_10_readme_scope_statement() {
    let _g = serial();
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .expect("README.md at the workspace root");
    for needle in [
        "not reproducible at desk scale",
        "property-based stand-ins",
        "precondition rejection",
    ] {
        assert!(
            readme.contains(needle),
            "README.md must state the finite-size scope of the path results (missing: {needle:?})"
        );
    }
    println!("criterion 10: pass README states the finite-size scope and the stand-in methodology");
}
