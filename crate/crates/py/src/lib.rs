//! Python bindings. Bit strings cross the boundary as `'0'`/`'1'` text.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use aidlab::complexity::{self, Estimator};
use aidlab::dynsys::{trajectory, Boundary, EcaSpec, Environment};
use aidlab::evomodel::{self, EvolveParams};
use aidlab::labctl::{self, ExperimentConfig};
use aidlab::perturb::{self, EdgeMode, SimpleGraph};
use aidlab::refmachine::{self, ProgramBits};
use aidlab::seeds;
use aidlab::{Bits, LabError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(pyaidlab, AidlabError, PyException);

fn err(e: LabError) -> PyErr {
    AidlabError::new_err(format!("{}: {e}", e.kind()))
}

fn bits(s: &str) -> PyResult<Bits> {
    s.parse().map_err(err)
}

/// Compressor code for `x`.
#[pyfunction]
fn compress(x: &str) -> PyResult<String> {
    Ok(complexity::compress(&bits(x)?).to_string())
}

#[pyfunction]
fn decompress(code: &str) -> PyResult<String> {
    Ok(complexity::decompress(&bits(code)?).map_err(err)?.to_string())
}

/// Compression-based upper bound on K(x), in bits.
#[pyfunction]
fn compress_upper(x: &str) -> PyResult<f64> {
    Ok(complexity::compress_upper(&bits(x)?).upper)
}

/// Conditional upper bound on K(z | w).
#[pyfunction]
fn cond_upper(z: &str, w: &str) -> PyResult<f64> {
    Ok(complexity::cond_upper(&bits(z)?, &bits(w)?).upper)
}

/// Exhaustive search for the shortest program of at most `len_cap` bits
/// printing `z` given `w`. Returns `(lower, upper, witness)`; `upper` is
/// infinite when nothing was found.
#[pyfunction]
#[pyo3(signature = (z, w, len_cap, step_budget=1000))]
fn bounded_exact_k(z: &str, w: &str, len_cap: u32, step_budget: u64) -> PyResult<(f64, f64, Option<String>)> {
    let e = complexity::bounded_exact_k(&bits(z)?, &bits(w)?, len_cap, step_budget).map_err(err)?;
    Ok((e.lower, e.upper, e.witness.map(|w| w.to_string())))
}

/// Runs an encoded program on `condition`. Returns `(halted, steps, output)`.
#[pyfunction]
#[pyo3(signature = (program, condition="", step_budget=1000))]
fn run_program(program: &str, condition: &str, step_budget: u64) -> PyResult<(bool, u64, String)> {
    let p = ProgramBits(bits(program)?);
    let r = refmachine::run_bits(&p, &bits(condition)?, step_budget).map_err(err)?;
    Ok((r.halted, r.steps, r.output.to_string()))
}

#[pyfunction]
fn is_valid_program(program: &str) -> PyResult<bool> {
    Ok(ProgramBits::is_valid(&bits(program)?))
}

#[pyfunction]
fn copy_program() -> String {
    refmachine::copy_program().encode().0.to_string()
}

/// Coding-theorem frequency table over all `states`-state machines.
#[pyclass(frozen)]
struct CtmTable {
    inner: Arc<complexity::CtmTable>,
}

#[pymethods]
impl CtmTable {
    #[staticmethod]
    #[pyo3(signature = (states=2, steps=1000, workers=None))]
    fn build(py: Python<'_>, states: u32, steps: u64, workers: Option<usize>) -> Self {
        let t = py.detach(|| complexity::ctm_build(states, steps, workers));
        CtmTable { inner: Arc::new(t) }
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(CtmTable {
            inner: Arc::new(complexity::CtmTable::from_text(text).map_err(err)?),
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn machines(&self) -> u64 {
        self.inner.machines
    }

    #[getter]
    fn halters(&self) -> u64 {
        self.inner.halters
    }

    /// `-log2` of the output frequency of `x`.
    fn ctm_k(&self, x: &str) -> PyResult<f64> {
        Ok(self.inner.ctm_k(&bits(x)?).map_err(err)?.upper)
    }

    /// Block decomposition estimate with the given block size.
    #[pyo3(signature = (x, block=4))]
    fn bdm(&self, x: &str, block: usize) -> PyResult<f64> {
        let est = Estimator::Bdm {
            table: self.inner.clone(),
            block,
        };
        est.bits(&bits(x)?).map_err(err)
    }
}

/// States `S_0 .. S_steps` of a periodic elementary cellular automaton.
#[pyfunction]
fn eca_trajectory(rule: u8, s0: &str, steps: u64) -> PyResult<Vec<String>> {
    let s0 = bits(s0)?;
    let sys = EcaSpec::new(rule, s0.len(), Boundary::Periodic);
    let t = trajectory(&sys, &s0, &Environment::none(), 0, steps).map_err(err)?;
    Ok(t.states.iter().map(|s| s.to_string()).collect())
}

/// Simple undirected graph on vertices `0..n`.
#[pyclass(skip_from_py_object)]
struct Graph {
    inner: SimpleGraph,
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Graph {
            inner: SimpleGraph::from_edges(n, edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        Graph {
            inner: SimpleGraph::complete(n),
        }
    }

    #[staticmethod]
    fn ring(n: usize) -> Self {
        Graph {
            inner: SimpleGraph::ring(n),
        }
    }

    #[staticmethod]
    fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        Graph {
            inner: SimpleGraph::erdos_renyi(n, p, &mut ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    #[staticmethod]
    fn barabasi_albert(n: usize, m: usize, seed: u64) -> PyResult<Self> {
        Ok(Graph {
            inner: SimpleGraph::barabasi_albert(n, m, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?,
        })
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// Upper-triangular adjacency bits, row-major.
    fn encode(&self) -> String {
        self.inner.encode().to_string()
    }

    fn delete_edges(&self, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
        Ok(Graph {
            inner: perturb::edge_perturb(&self.inner, &edges, EdgeMode::Delete).map_err(err)?,
        })
    }

    fn insert_edges(&self, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
        Ok(Graph {
            inner: perturb::edge_perturb(&self.inner, &edges, EdgeMode::Insert).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n, self.inner.edge_count())
    }
}

/// Mutation/selection run from the minimal organism. Returns the accepted
/// lineage as `(t, fitness_bits, k_compress)` rows.
#[pyfunction]
#[pyo3(signature = (seed, mutations=10_000, budget=1000, s_max=2))]
fn evolve(py: Python<'_>, seed: u64, mutations: u64, budget: u64, s_max: u32) -> PyResult<Vec<(u64, usize, f64)>> {
    let params = EvolveParams::new(mutations, budget, s_max);
    let h = py
        .detach(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            evomodel::evolve(evomodel::minimal_organism(), &params, &mut rng, None)
        })
        .map_err(err)?;
    Ok(h.lineage().map(|r| (r.t, r.fitness_bits, r.k_compress)).collect())
}

#[pyfunction]
fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    seeds::derive_seed(master, label, index)
}

/// Runs an experiment described by a TOML config and returns the run
/// manifest as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_toml: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml(config_toml).map_err(err)?;
    let m = py.detach(|| labctl::run_experiment(&cfg)).map_err(err)?;
    serde_json::to_string(&m).map_err(|e| AidlabError::new_err(e.to_string()))
}

/// Regenerates charts for a run directory; returns the summary as JSON.
#[pyfunction]
fn report(run_dir: PathBuf) -> PyResult<String> {
    let s = labctl::report(&run_dir).map_err(err)?;
    serde_json::to_string(&s).map_err(|e| AidlabError::new_err(e.to_string()))
}

#[pymodule]
fn pyaidlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AidlabError", m.py().get_type::<AidlabError>())?;
    m.add_class::<CtmTable>()?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(decompress, m)?)?;
    m.add_function(wrap_pyfunction!(compress_upper, m)?)?;
    m.add_function(wrap_pyfunction!(cond_upper, m)?)?;
    m.add_function(wrap_pyfunction!(bounded_exact_k, m)?)?;
    m.add_function(wrap_pyfunction!(run_program, m)?)?;
    m.add_function(wrap_pyfunction!(is_valid_program, m)?)?;
    m.add_function(wrap_pyfunction!(copy_program, m)?)?;
    m.add_function(wrap_pyfunction!(eca_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
