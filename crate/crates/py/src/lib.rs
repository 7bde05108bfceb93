//! Python bindings: codes, constructions, repair reports and the simulator.
//!
//! Reports cross the boundary as Python dicts decoded from their JSON form.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::linrepair::blocks::{check_block_intersection_bound, Block};
use ::linrepair::code::{ArrayCode, MdsVerdict, DEFAULT_MDS_CAP};
use ::linrepair::constructions::{build_exceptional, build_two_parity_code, ExceptionalCase};
use ::linrepair::field::Field;
use ::linrepair::linalg::DEFAULT_ENUMERATION_BUDGET;
use ::linrepair::repair::{counting_bound as bound, optimal_alpha, repair_report};
use ::linrepair::sim::simulate;

fn err(e: ::linrepair::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// GF(q) arithmetic on integer-encoded elements.
#[pyclass(name = "Field", module = "linrepair")]
struct PyField {
    inner: Field,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u32) -> PyResult<Self> {
        Ok(PyField { inner: Field::of_order(q).map_err(err)? })
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        self.inner.check(a).map_err(err)?;
        self.inner.check(b).map_err(err)?;
        Ok(self.inner.add(a, b))
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        self.inner.check(a).map_err(err)?;
        self.inner.check(b).map_err(err)?;
        Ok(self.inner.mul(a, b))
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.inner.check(a).map_err(err)?;
        self.inner
            .inv(a)
            .ok_or_else(|| PyValueError::new_err("zero has no inverse"))
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.q())
    }
}

/// An MDS array code given by its parity-check blocks.
#[pyclass(name = "Code", module = "linrepair")]
struct PyCode {
    inner: ArrayCode,
}

#[pymethods]
impl PyCode {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyCode { inner: ArrayCode::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn ell(&self) -> usize {
        self.inner.ell()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    /// Parity-check blocks as nested lists, rows first.
    fn blocks(&self) -> Vec<Vec<Vec<u32>>> {
        self.inner.blocks().iter().map(|b| b.row_vecs()).collect()
    }

    fn is_mds(&self) -> PyResult<bool> {
        match self.inner.is_mds(DEFAULT_MDS_CAP).map_err(err)? {
            MdsVerdict::Mds => Ok(true),
            MdsVerdict::Fails { .. } => Ok(false),
            MdsVerdict::NotVerified { subsets, cap } => {
                Err(PyValueError::new_err(format!("{subsets} subsets exceed the cap {cap}")))
            }
        }
    }

    #[pyo3(signature = (budget = DEFAULT_ENUMERATION_BUDGET))]
    fn repair_report<'py>(&self, py: Python<'py>, budget: u128) -> PyResult<Bound<'py, PyAny>> {
        let rep = py.detach(|| repair_report(&self.inner, budget)).map_err(err)?;
        to_dict(py, &rep)
    }

    /// Repairs `node` with its bandwidth-optimal scheme over `trials` seeded codewords.
    #[pyo3(signature = (node, trials = 1, seed = 0, budget = DEFAULT_ENUMERATION_BUDGET))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        node: usize,
        trials: usize,
        seed: u64,
        budget: u128,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (_, witness) = optimal_alpha(&self.inner, node, budget).map_err(err)?;
        let summary = simulate(&self.inner, &witness, trials, seed).map_err(err)?;
        to_dict(py, &summary)
    }

    fn __repr__(&self) -> String {
        format!(
            "Code(n={}, k={}, ell={}, q={})",
            self.inner.n(),
            self.inner.k(),
            self.inner.ell(),
            self.inner.q()
        )
    }
}

#[pyfunction]
fn counting_bound(n: u32, r: u32, ell: u32, q: u32) -> PyResult<i128> {
    bound(n, r, ell, q).map_err(err)
}

/// Attaining two-parity code of length `n` on the Desarguesian spread.
#[pyfunction]
#[pyo3(signature = (q, n, ell = 2))]
fn construct_desarguesian(q: u32, n: usize, ell: u32) -> PyResult<PyCode> {
    Ok(PyCode { inner: build_two_parity_code(q, ell, n).map_err(err)?.code })
}

#[pyfunction]
fn construct_exceptional(case: &str) -> PyResult<PyCode> {
    let case: ExceptionalCase = case.parse().map_err(err)?;
    Ok(PyCode { inner: build_exceptional(case).map_err(err)?.code })
}

#[pyfunction]
fn check_lemma_c1<'py>(py: Python<'py>, family: Vec<Vec<usize>>) -> PyResult<Bound<'py, PyAny>> {
    let blocks: Vec<Block> = family.into_iter().map(|b| b.into_iter().collect()).collect();
    to_dict(py, &check_block_intersection_bound(&blocks))
}

#[pymodule]
#[pyo3(name = "linrepair")]
fn linrepair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyCode>()?;
    m.add_function(wrap_pyfunction!(counting_bound, m)?)?;
    m.add_function(wrap_pyfunction!(construct_desarguesian, m)?)?;
    m.add_function(wrap_pyfunction!(construct_exceptional, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemma_c1, m)?)?;
    Ok(())
}
