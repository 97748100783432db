//! Python bindings for the operator laboratory: lattices, the operator
//! factory, block index computation by both routes, homotopy connection,
//! and the experiment runner.

use std::path::Path;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use quasi2d::config::ExperimentConfig;
use quasi2d::factory::{self, IndexPrescription, ShiftBoundary};
use quasi2d::family::ProjectionFamily;
use quasi2d::geometry::{Geometry, SiteMap};
use quasi2d::homotopy::{
    connect_saus, connect_unitaries_type_i, connect_unitaries_type_ii, validate_path,
};
use quasi2d::index::{index_vector, windowed_kernel_index, windowed_trace_index, SpatialWindow};
use quasi2d::linop::{LinOp, Tag};
use quasi2d::locality::LocalityType;
use quasi2d::runner::run_config as run_config_impl;
use quasi2d::star;

fn pyerr(e: quasi2d::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite lattice: a line segment, a square patch, or a star graph.
#[pyclass(frozen, module = "quasi2d_py")]
struct Lattice {
    map: Arc<SiteMap>,
}

#[pymethods]
impl Lattice {
    /// Integer line x in [-half_width, half_width].
    #[staticmethod]
    fn line(half_width: u32) -> PyResult<Self> {
        Ok(Self { map: SiteMap::new(Geometry::LineZ { half_width }, 1).map_err(pyerr)? })
    }

    /// Square patch |x|, |y| <= radius.
    #[staticmethod]
    fn square(radius: u32) -> PyResult<Self> {
        Ok(Self { map: SiteMap::new(Geometry::SquareZ2 { radius }, 1).map_err(pyerr)? })
    }

    /// Star graph: `legs` rays of `leg_len` sites joined at a removed vertex.
    #[staticmethod]
    fn star(legs: u32, leg_len: u32) -> PyResult<Self> {
        Ok(Self {
            map: SiteMap::new(Geometry::StarGraph { legs, leg_len, include_vertex: false }, 1)
                .map_err(pyerr)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn __repr__(&self) -> String {
        format!("Lattice(dim={})", self.map.dim())
    }
}

/// A dense operator on a lattice.
#[pyclass(frozen, module = "quasi2d_py")]
struct Operator {
    op: LinOp,
}

#[pymethods]
impl Operator {
    #[getter]
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn op_norm(&self) -> f64 {
        self.op.op_norm()
    }

    fn is_unitary(&self) -> bool {
        self.op.has_tag(Tag::Unitary)
    }

    /// Dense entries as nested lists of (re, im) pairs.
    fn matrix(&self) -> Vec<Vec<(f64, f64)>> {
        let m = self.op.matrix();
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| (m[[r, c]].re, m[[r, c]].im)).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={})", self.op.dim())
    }
}

/// An orthogonal family of coordinate blocks.
#[pyclass(frozen, module = "quasi2d_py")]
struct BlockFamily {
    fam: ProjectionFamily,
}

#[pymethods]
impl BlockFamily {
    #[getter]
    fn blocks(&self) -> usize {
        self.fam.m()
    }

    fn rank(&self, j: usize) -> usize {
        self.fam.rank(j)
    }

    fn support(&self, j: usize) -> Option<Vec<usize>> {
        self.fam.support(j).map(|s| s.to_vec())
    }

    fn __repr__(&self) -> String {
        format!("BlockFamily(blocks={})", self.fam.m())
    }
}

/// A unitary built to carry one prescribed index per block, together with
/// the index-carrying links its truncation window must exclude.
#[pyclass(frozen, module = "quasi2d_py")]
struct PrescribedUnitary {
    op: LinOp,
    closure_links: Vec<(usize, usize)>,
}

#[pymethods]
impl PrescribedUnitary {
    fn operator(&self) -> Operator {
        Operator { op: self.op.clone() }
    }

    fn closure_links(&self) -> Vec<(usize, usize)> {
        self.closure_links.clone()
    }
}

/// Per-sample validation flags of a connecting path.
#[pyclass(frozen, module = "quasi2d_py")]
struct PathSummary {
    #[pyo3(get)]
    samples: usize,
    #[pyo3(get)]
    all_invertible: bool,
    #[pyo3(get)]
    steps_ok: bool,
    #[pyo3(get)]
    class_ok: bool,
    #[pyo3(get)]
    locality_ok: bool,
    #[pyo3(get)]
    sign_constant: Option<bool>,
}

/// Lattice translation by `power` steps along `axis`, periodic or open.
#[pyfunction]
#[pyo3(signature = (lattice, axis = 0, power = 1, periodic = true))]
fn shift(lattice: &Lattice, axis: usize, power: i64, periodic: bool) -> PyResult<Operator> {
    let boundary = if periodic { ShiftBoundary::Periodic } else { ShiftBoundary::Open };
    Ok(Operator { op: factory::shift(&lattice.map, axis, power, boundary).map_err(pyerr)? })
}

/// Coordinate projection onto sites with nonnegative `axis` coordinate.
#[pyfunction]
#[pyo3(signature = (lattice, axis = 0))]
fn half_space_projection(lattice: &Lattice, axis: usize) -> PyResult<Operator> {
    Ok(Operator { op: factory::half_space_projection(&lattice.map, axis).map_err(pyerr)? })
}

/// The diagonal flux-insertion unitary on a square patch.
#[pyfunction]
fn laughlin_flux(lattice: &Lattice) -> PyResult<Operator> {
    Ok(Operator { op: factory::laughlin_flux(&lattice.map).map_err(pyerr)? })
}

/// Angular sector blocks on a square patch, one block per cut interval.
#[pyfunction]
fn laughlin_family(lattice: &Lattice, cuts: Vec<f64>) -> PyResult<BlockFamily> {
    Ok(BlockFamily { fam: factory::laughlin_family(&lattice.map, &cuts).map_err(pyerr)? })
}

/// One block per leg of a star lattice.
#[pyfunction]
fn leg_family(lattice: &Lattice) -> PyResult<BlockFamily> {
    Ok(BlockFamily { fam: star::leg_family(&lattice.map).map_err(pyerr)? })
}

/// The reference self-adjoint unitary with balanced signs on every block.
#[pyfunction]
fn canonical_sau(family: &BlockFamily) -> PyResult<Operator> {
    Ok(Operator { op: factory::canonical_sau(&family.fam).map_err(pyerr)? })
}

/// A unitary carrying the prescribed integer index on each block.
#[pyfunction]
#[pyo3(signature = (family, shifts, finite = true))]
fn prescribed_unitary(
    family: &BlockFamily,
    shifts: Vec<i64>,
    finite: bool,
) -> PyResult<PrescribedUnitary> {
    let prescription =
        if finite { IndexPrescription::finite(shifts) } else { IndexPrescription::infinite(shifts) };
    let pres =
        factory::prescribed_index_unitary(&family.fam, &prescription).map_err(pyerr)?;
    Ok(PrescribedUnitary { op: pres.op, closure_links: pres.closure_links })
}

/// Half-space pairing index of a unitary: `(trace_route, kernel_route)`,
/// `None` where a route declined to certify an integer.
#[pyfunction]
#[pyo3(signature = (op, projection, w, guard))]
fn half_space_index(
    op: &Operator,
    projection: &Operator,
    w: u64,
    guard: u64,
) -> PyResult<(Option<i64>, Option<i64>)> {
    let window = SpatialWindow::center(w, guard);
    let t = windowed_trace_index(&op.op, &projection.op, &window, &[], None).map_err(pyerr)?;
    let k = windowed_kernel_index(&op.op, &projection.op, &window, &[], None).map_err(pyerr)?;
    Ok((t.value, k.value))
}

/// Per-block index vector of a unitary against a block family:
/// `(accepted_per_block, sum_rule)`. Both routes must agree for a block to
/// be accepted.
#[pyfunction]
#[pyo3(signature = (op, family, w, guard, depth = false, closure_links = vec![]))]
fn block_index_vector(
    op: &Operator,
    family: &BlockFamily,
    w: u64,
    guard: u64,
    depth: bool,
    closure_links: Vec<(usize, usize)>,
) -> PyResult<(Vec<Option<i64>>, Option<bool>)> {
    let window =
        if depth { SpatialWindow::depth(w, guard) } else { SpatialWindow::center(w, guard) };
    let iv = index_vector(&op.op, &family.fam, &window, &closure_links).map_err(pyerr)?;
    Ok((iv.entries.iter().map(|e| e.accepted).collect(), iv.sum_rule))
}

/// Connect two equal-index unitaries and validate every path sample.
#[pyfunction]
#[pyo3(signature = (u, v, family, w, guard, two_block = false))]
fn connect_unitaries(
    u: &Operator,
    v: &Operator,
    family: &BlockFamily,
    w: u64,
    guard: u64,
    two_block: bool,
) -> PyResult<PathSummary> {
    let window = SpatialWindow::center(w, guard);
    let (path, sharp) = if two_block {
        (
            connect_unitaries_type_ii(&u.op, &v.op, &family.fam, &window, &[], &[])
                .map_err(pyerr)?,
            LocalityType::II,
        )
    } else {
        (
            connect_unitaries_type_i(&u.op, &v.op, &family.fam, &window, &[], &[])
                .map_err(pyerr)?,
            LocalityType::I,
        )
    };
    let val = validate_path(&path, &family.fam, sharp, 1).map_err(pyerr)?;
    Ok(PathSummary {
        samples: path.len(),
        all_invertible: val.flags.all_invertible,
        steps_ok: val.flags.steps_ok,
        class_ok: val.flags.class_ok,
        locality_ok: val.flags.locality_ok,
        sign_constant: val.flags.sign_constant,
    })
}

/// Connect two certified self-adjoint unitaries and validate every sample.
#[pyfunction]
#[pyo3(signature = (u, v, family, two_block = false, r_min = 2))]
fn connect_sau_pair(
    u: &Operator,
    v: &Operator,
    family: &BlockFamily,
    two_block: bool,
    r_min: usize,
) -> PyResult<PathSummary> {
    let sharp = if two_block { LocalityType::II } else { LocalityType::I };
    let path = connect_saus(&u.op, &v.op, &family.fam, sharp, r_min).map_err(pyerr)?;
    let val = validate_path(&path, &family.fam, sharp, r_min).map_err(pyerr)?;
    Ok(PathSummary {
        samples: path.len(),
        all_invertible: val.flags.all_invertible,
        steps_ok: val.flags.steps_ok,
        class_ok: val.flags.class_ok,
        locality_ok: val.flags.locality_ok,
        sign_constant: val.flags.sign_constant,
    })
}

/// Run an experiment config, writing the report tree under `out_dir`.
/// Returns `(pass, report_path)`; config errors raise `ValueError`.
#[pyfunction]
fn run_config(config_path: &str, out_dir: &str) -> PyResult<(bool, String)> {
    let cfg = ExperimentConfig::from_path(Path::new(config_path)).map_err(pyerr)?;
    let outcome = run_config_impl(&cfg, Path::new(out_dir)).map_err(pyerr)?;
    Ok((outcome.pass, outcome.report_path.display().to_string()))
}

/// The experiment kinds a config may declare.
#[pyfunction]
fn experiment_kinds() -> Vec<&'static str> {
    vec![
        "locality-audit",
        "index-suite",
        "homotopy-suite",
        "contour-suite",
        "star-suite",
        "counterexample",
    ]
}

#[pymodule]
fn quasi2d_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_class::<Operator>()?;
    m.add_class::<BlockFamily>()?;
    m.add_class::<PrescribedUnitary>()?;
    m.add_class::<PathSummary>()?;
    m.add_function(wrap_pyfunction!(shift, m)?)?;
    m.add_function(wrap_pyfunction!(half_space_projection, m)?)?;
    m.add_function(wrap_pyfunction!(laughlin_flux, m)?)?;
    m.add_function(wrap_pyfunction!(laughlin_family, m)?)?;
    m.add_function(wrap_pyfunction!(leg_family, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_sau, m)?)?;
    m.add_function(wrap_pyfunction!(prescribed_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(half_space_index, m)?)?;
    m.add_function(wrap_pyfunction!(block_index_vector, m)?)?;
    m.add_function(wrap_pyfunction!(connect_unitaries, m)?)?;
    m.add_function(wrap_pyfunction!(connect_sau_pair, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_kinds, m)?)?;
    Ok(())
}
