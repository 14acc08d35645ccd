//! Python bindings: graphs and their core stages, finite-dimensional
//! algebras and correspondences, and the instance-level checks.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use corrbi::bicat::coherence_sample;
use corrbi::corr::{graph_correspondence, is_hilbert_bimodule, katsura_ideal, tensor, Correspondence as CoreCorr, GraphSpec};
use corrbi::cstar::FdCStarAlgebra;
use corrbi::instance::{parse_graph, Instance};
use corrbi::linalg::{self, Matrix, Scalar};
use corrbi::pimsner::{bratteli, core_embedding, core_stage, trichotomy};
use corrbi::report::{all_passed, reports_to_json, Report};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn from_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn reports<'py>(py: Python<'py>, r: &[Report]) -> PyResult<(bool, Bound<'py, PyAny>)> {
    Ok((all_passed(r), from_json(py, &reports_to_json(r))?))
}

#[pyclass(frozen, skip_from_py_object, module = "corrbi_py")]
#[derive(Clone)]
struct Graph(GraphSpec);

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (vertices, edges, relative = Vec::new()))]
    fn new(vertices: usize, edges: Vec<(usize, usize)>, relative: Vec<usize>) -> PyResult<Self> {
        GraphSpec::from_indices(vertices, &edges, &relative).map(Graph).map_err(err)
    }

    /// Parse `{"vertices": [...], "edges": [{"s":..,"r":..}], "J": [...]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_graph(text).map(Graph).map_err(err)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    /// `(source, range)` pairs.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().to_vec()
    }

    #[getter]
    fn relative(&self) -> Vec<usize> {
        self.0.relative().iter().copied().collect()
    }

    fn receivers(&self) -> Vec<usize> {
        self.0.receivers().into_iter().collect()
    }

    /// Rows by range, columns by source.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.0.adjacency()
    }

    fn with_relative(&self, relative: Vec<usize>) -> Graph {
        Graph(self.0.with_relative(relative))
    }

    fn core_stage(&self, level: usize) -> PyResult<Stage> {
        let st = core_stage(&self.0, level).map_err(err)?;
        Ok(Stage { level, blocks: st.block_sizes(), oracle_dim: st.oracle_dim() })
    }

    /// Multiplicities of the embedding of stage `level` into the next one.
    fn core_embedding(&self, level: usize) -> PyResult<Vec<Vec<usize>>> {
        core_embedding(&self.0, level).map_err(err)
    }

    #[pyo3(signature = (level, format = "json"))]
    fn bratteli<'py>(&self, py: Python<'py>, level: usize, format: &str) -> PyResult<Bound<'py, PyAny>> {
        let d = bratteli(&self.0, level).map_err(err)?;
        match format {
            "json" => from_json(py, &serde_json::to_string(&d).map_err(err)?),
            "dot" => Ok(d.to_dot().into_pyobject(py)?.into_any()),
            other => Err(PyValueError::new_err(format!("unknown format `{other}`"))),
        }
    }

    /// The three characterizations of a bimodule triple, computed separately.
    fn trichotomy<'py>(&self, py: Python<'py>, max_level: usize) -> PyResult<Bound<'py, PyDict>> {
        let t = trichotomy(&self.0, max_level).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("stage_maps", t.stage_maps.clone())?;
        d.set_item("bimodule", t.bimodule)?;
        d.set_item("restricted_action", t.restricted_action)?;
        d.set_item("coincide", t.coincide())?;
        Ok(d)
    }

    fn correspondence(&self) -> PyResult<Correspondence> {
        graph_correspondence(&self.0).map(|g| Correspondence(g.corr)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={:?}, relative={:?})", self.0.num_vertices(), self.0.edges(), self.relative())
    }
}

#[pyclass(frozen, get_all, module = "corrbi_py")]
struct Stage {
    level: usize,
    blocks: Vec<usize>,
    oracle_dim: usize,
}

#[pymethods]
impl Stage {
    #[getter]
    fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    fn __repr__(&self) -> String {
        format!("Stage(level={}, blocks={:?})", self.level, self.blocks)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "corrbi_py")]
#[derive(Clone)]
struct Algebra(FdCStarAlgebra);

#[pymethods]
impl Algebra {
    #[new]
    fn new(blocks: Vec<usize>) -> PyResult<Self> {
        FdCStarAlgebra::new(blocks).map(Algebra).map_err(err)
    }

    #[getter]
    fn blocks(&self) -> Vec<usize> {
        self.0.blocks().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __eq__(&self, other: &Algebra) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Algebra({:?})", self.0.blocks())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "corrbi_py")]
#[derive(Clone)]
struct Correspondence(CoreCorr);

#[pymethods]
impl Correspondence {
    /// Block-diagonal correspondence with `multiplicity[i][j]` copies of
    /// source block i in target block j.
    #[staticmethod]
    fn canonical(source: &Algebra, target: &Algebra, multiplicity: Vec<Vec<usize>>) -> PyResult<Self> {
        CoreCorr::canonical(&source.0, &target.0, &multiplicity).map(Correspondence).map_err(err)
    }

    #[staticmethod]
    fn identity(a: &Algebra) -> Self {
        Correspondence(CoreCorr::identity(&a.0))
    }

    #[getter]
    fn source(&self) -> Algebra {
        Algebra(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> Algebra {
        Algebra(self.0.target().clone())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn multiplicity(&self) -> Vec<Vec<usize>> {
        self.0.multiplicity().0
    }

    /// Blocks of the Katsura ideal.
    fn katsura(&self) -> Vec<usize> {
        katsura_ideal(&self.0).blocks().iter().copied().collect()
    }

    fn is_bimodule(&self) -> bool {
        is_hilbert_bimodule(&self.0).is_some()
    }

    fn tensor(&self, other: &Correspondence) -> PyResult<Correspondence> {
        tensor(&self.0, &other.0).map(|t| Correspondence(t.product)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Correspondence({:?} -> {:?}, multiplicity={:?})", self.0.source().blocks(), self.0.target().blocks(), self.0.multiplicity().0)
    }
}

/// Exact rank of a matrix with Gaussian-integer entries.
#[pyfunction]
fn rank(rows: Vec<Vec<num_complex_entry::Entry>>) -> PyResult<usize> {
    let rows: Vec<Vec<Scalar>> = rows.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect();
    Ok(linalg::rank(&Matrix::from_rows(rows).map_err(err)?))
}

mod num_complex_entry {
    use pyo3::prelude::*;

    use corrbi::linalg::Scalar;

    /// An int, or a complex with integral parts.
    pub struct Entry(pub Scalar);

    impl<'a, 'py> FromPyObject<'a, 'py> for Entry {
        type Error = PyErr;

        fn extract(ob: Borrowed<'a, 'py, PyAny>) -> PyResult<Self> {
            if let Ok(n) = ob.extract::<i64>() {
                return Ok(Entry(Scalar::from_int(n)));
            }
            let c: num_complex::Complex64 = ob.extract()?;
            if c.re.fract() != 0.0 || c.im.fract() != 0.0 {
                return Err(pyo3::exceptions::PyValueError::new_err("entries must have integral real and imaginary parts"));
            }
            Ok(Entry(&Scalar::from_int(c.re as i64) + &(&Scalar::i() * &Scalar::from_int(c.im as i64))))
        }
    }
}

/// Validate a JSON instance; returns `(all passed, reports)`.
#[pyfunction]
fn validate<'py>(py: Python<'py>, text: &str) -> PyResult<(bool, Bound<'py, PyAny>)> {
    let inst = Instance::parse(text).map_err(err)?;
    reports(py, &inst.validate())
}

/// Reflector round trips for the arrows and 2-arrows of a JSON instance.
#[pyfunction]
#[pyo3(signature = (text, level = 2))]
fn reflect<'py>(py: Python<'py>, text: &str, level: usize) -> PyResult<(bool, Bound<'py, PyAny>)> {
    let inst = Instance::parse(text).map_err(err)?;
    reports(py, &inst.reflect(level, false))
}

/// Pentagon and triangle on `samples` seeded random chains.
#[pyfunction]
#[pyo3(signature = (samples, seed = 0))]
fn coherence<'py>(py: Python<'py>, samples: usize, seed: u64) -> PyResult<(bool, Bound<'py, PyAny>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let (p, t) = coherence_sample(&mut rng, false).map_err(err)?;
        let prefix = format!("sample {k:03}");
        out.push(Report::from_coherence(&prefix, &p));
        out.push(Report::from_coherence(&prefix, &t));
    }
    reports(py, &out)
}

#[pymodule]
pub fn corrbi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Stage>()?;
    m.add_class::<Algebra>()?;
    m.add_class::<Correspondence>()?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(reflect, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    Ok(())
}
