//! Python bindings for the dualqp core: the three problem families, critical
//! point enumeration, certification, and the golden reproduction runs.
//!
//! Matrices cross the boundary as lists of rows; dual points for the box
//! family as a `(varsigma, sigma)` pair. Invalid input raises `ValueError`,
//! numeric failures (singular systems, poles) raise `RuntimeError`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dualqp_core::binary;
use dualqp_core::boxqp::{self, BoxDualPoint};
use dualqp_core::linalg::SymMatrix;
use dualqp_core::oracle::{self, OracleConfig};
use dualqp_core::problem_file;
use dualqp_core::qc;
use dualqp_core::report;
use dualqp_core::repro;
use dualqp_core::Error as CoreError;

fn py_err(e: CoreError) -> PyErr {
    match e {
        CoreError::InvalidProblem(_)
        | CoreError::UnsupportedShape(_)
        | CoreError::OutOfRange { .. }
        | CoreError::InstanceTooLarge { .. }
        | CoreError::WrongBranch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<SymMatrix> {
    SymMatrix::from_rows(rows).map_err(py_err)
}

fn config(seed: u64, samples: usize) -> OracleConfig {
    OracleConfig {
        seed,
        samples,
        ..OracleConfig::default()
    }
}

/// One claim verdict: id, CONFIRMED/REFUTED/PASS/FAIL status, the numeric
/// values backing it, and the refuting witness when one exists.
#[pyclass(name = "ClaimVerdict", frozen)]
struct PyClaimVerdict {
    inner: report::ClaimVerdict,
}

#[pymethods]
impl PyClaimVerdict {
    #[getter]
    fn claim_id(&self) -> String {
        self.inner.claim_id.clone()
    }

    #[getter]
    fn status(&self) -> String {
        self.inner.status.to_string()
    }

    #[getter]
    fn tolerance(&self) -> f64 {
        self.inner.tolerance
    }

    #[getter]
    fn values(&self) -> BTreeMap<String, f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn witness_point(&self) -> Option<Vec<f64>> {
        self.inner.witness.as_ref().map(|w| w.point.clone())
    }

    #[getter]
    fn witness_value(&self) -> Option<f64> {
        self.inner.witness.as_ref().map(|w| w.value)
    }

    fn __repr__(&self) -> String {
        format!(
            "ClaimVerdict('{}', {})",
            self.inner.claim_id, self.inner.status
        )
    }
}

/// Quadratic objective over one quadratic inequality constraint.
#[pyclass(name = "QcProblem", frozen)]
struct PyQcProblem {
    inner: qc::QcProblem,
}

/// Outcome of checking the applicable minimizer claim at one critical
/// multiplier of the constrained family.
#[pyclass(name = "QcReport", frozen)]
struct PyQcReport {
    inner: qc::QcRefutationReport,
}

#[pymethods]
impl PyQcReport {
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.critical.sigma
    }

    #[getter]
    fn dual_value(&self) -> f64 {
        self.inner.critical.dual_value
    }

    /// Definiteness class of A + ςC: "PositiveDefinite", "NegativeDefinite",
    /// "Indefinite", or "SingularOrSemidefinite".
    #[getter]
    fn matrix_class(&self) -> String {
        self.inner.critical.matrix_class.class.to_string()
    }

    #[getter]
    fn x_bar(&self) -> Vec<f64> {
        self.inner.critical.x_bar.clone()
    }

    #[getter]
    fn primal_value(&self) -> f64 {
        self.inner.critical.primal_value
    }

    #[getter]
    fn constraint_slack(&self) -> f64 {
        self.inner.critical.constraint_slack
    }

    /// Sampling classification of the recovered point: "LocalMin",
    /// "LocalMax", or "NeitherWitnessed".
    #[getter]
    fn extremum(&self) -> String {
        format!("{:?}", self.inner.extremum.verdict)
    }

    #[getter]
    fn claim(&self) -> Option<PyClaimVerdict> {
        self.inner
            .claim
            .clone()
            .map(|inner| PyClaimVerdict { inner })
    }
}

#[pymethods]
impl PyQcProblem {
    #[new]
    fn new(a: Vec<Vec<f64>>, c: Vec<Vec<f64>>, f: Vec<f64>, lam: f64) -> PyResult<Self> {
        let inner = qc::QcProblem::new(matrix(&a)?, matrix(&c)?, f, lam).map_err(py_err)?;
        Ok(PyQcProblem { inner })
    }

    /// The bundled two-variable instance with critical multipliers {1, 2, 5}.
    #[staticmethod]
    fn counterexample() -> Self {
        PyQcProblem {
            inner: qc::QcProblem::counterexample(),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    fn primal_value(&self, x: Vec<f64>) -> f64 {
        self.inner.primal_value(&x)
    }

    fn is_feasible(&self, x: Vec<f64>) -> bool {
        self.inner.is_feasible(&x)
    }

    fn dual_value(&self, sigma: f64) -> PyResult<f64> {
        self.inner.dual_value(sigma).map_err(py_err)
    }

    fn dual_derivative(&self, sigma: f64) -> PyResult<f64> {
        self.inner.dual_derivative(sigma).map_err(py_err)
    }

    /// Primal candidate x̄(ς) = (A + ςC)⁻¹ f.
    fn recover_primal(&self, sigma: f64) -> PyResult<Vec<f64>> {
        self.inner.recover_primal(sigma).map_err(py_err)
    }

    fn poles(&self) -> Vec<f64> {
        self.inner.poles()
    }

    /// All critical multipliers of the dual on its default scan interval.
    #[pyo3(signature = (tol = 1e-8))]
    fn critical_sigmas(&self, tol: f64) -> PyResult<Vec<f64>> {
        self.inner
            .find_critical_points(self.inner.default_interval(), tol)
            .map_err(py_err)
    }

    /// Objective profile along the constraint boundary (n = 2, C = I only),
    /// as (t, value) pairs with t spanning (−π, π].
    fn boundary_profile(&self, samples: usize) -> PyResult<Vec<(f64, f64)>> {
        self.inner.boundary_profile(samples).map_err(py_err)
    }

    /// Checks the minimizer claim applicable at the critical multiplier
    /// `sigma` by sampling feasible neighbors of the recovered point.
    #[pyo3(signature = (sigma, seed = 42, samples = 10_000))]
    fn verify_minimizer_claim(&self, sigma: f64, seed: u64, samples: usize) -> PyResult<PyQcReport> {
        let cfg = OracleConfig {
            radius: 0.15,
            margin: 1e-6,
            ..config(seed, samples)
        };
        let inner = self.inner.verify_minimizer_claim(sigma, &cfg).map_err(py_err)?;
        Ok(PyQcReport { inner })
    }
}

/// Quartic-plus-quadratic objective over a box.
#[pyclass(name = "BoxProblem", frozen)]
struct PyBoxProblem {
    inner: boxqp::BoxProblem,
}

/// Outcome of checking the extremality claims at one dual critical point of
/// the box family.
#[pyclass(name = "BoxReport", frozen)]
struct PyBoxReport {
    inner: boxqp::BoxRefutationReport,
}

#[pymethods]
impl PyBoxReport {
    /// Branch membership: "NotInSa", "SaOnly", "SaPlus", or "SaMinus".
    #[getter]
    fn membership(&self) -> String {
        self.inner.membership.to_string()
    }

    #[getter]
    fn gradient_residual(&self) -> f64 {
        self.inner.gradient_residual
    }

    #[getter]
    fn x_bar(&self) -> Vec<f64> {
        self.inner.x_bar.clone()
    }

    #[getter]
    fn primal_value(&self) -> f64 {
        self.inner.primal_value
    }

    #[getter]
    fn dual_value(&self) -> f64 {
        self.inner.dual_value
    }

    #[getter]
    fn identity_gap(&self) -> f64 {
        self.inner.identity_gap
    }

    #[getter]
    fn claims(&self) -> Vec<PyClaimVerdict> {
        self.inner
            .claims
            .iter()
            .cloned()
            .map(|inner| PyClaimVerdict { inner })
            .collect()
    }
}

#[pymethods]
impl PyBoxProblem {
    #[new]
    fn new(
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
        alpha: f64,
        ell: Vec<f64>,
    ) -> PyResult<Self> {
        let inner = boxqp::BoxProblem::new(matrix(&a)?, b, c, alpha, ell).map_err(py_err)?;
        Ok(PyBoxProblem { inner })
    }

    /// The bundled two-variable instance with dual critical point (1, (1, 1))
    /// and matching primal/dual value −15/2.
    #[staticmethod]
    fn counterexample() -> Self {
        PyBoxProblem {
            inner: boxqp::BoxProblem::counterexample(),
        }
    }

    /// The (varsigma, sigma) pair at the center of the bundled instance.
    #[staticmethod]
    fn counterexample_critical_point() -> (f64, Vec<f64>) {
        let d = boxqp::BoxProblem::counterexample_critical_point();
        (d.sigma0, d.sigma)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn primal_value(&self, x: Vec<f64>) -> f64 {
        self.inner.primal_value(&x)
    }

    fn is_feasible(&self, x: Vec<f64>) -> bool {
        self.inner.is_feasible(&x)
    }

    fn dual_value(&self, varsigma: f64, sigma: Vec<f64>) -> PyResult<f64> {
        self.inner
            .dual_value(&BoxDualPoint::new(varsigma, sigma))
            .map_err(py_err)
    }

    fn dual_gradient(&self, varsigma: f64, sigma: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .dual_gradient(&BoxDualPoint::new(varsigma, sigma))
            .map_err(py_err)
    }

    fn recover_primal(&self, varsigma: f64, sigma: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .recover_primal(&BoxDualPoint::new(varsigma, sigma))
            .map_err(py_err)
    }

    /// Branch membership of a dual point: "NotInSa", "SaOnly", "SaPlus", or
    /// "SaMinus".
    fn set_membership(&self, varsigma: f64, sigma: Vec<f64>) -> String {
        self.inner
            .set_membership(&BoxDualPoint::new(varsigma, sigma))
            .to_string()
    }

    /// Checks the extremality claims applicable at the dual critical point
    /// `(varsigma, sigma)`.
    #[pyo3(signature = (varsigma, sigma, seed = 42, samples = 10_000))]
    fn verify_extremum_claims(
        &self,
        varsigma: f64,
        sigma: Vec<f64>,
        seed: u64,
        samples: usize,
    ) -> PyResult<PyBoxReport> {
        let d = BoxDualPoint::new(varsigma, sigma);
        let inner = self
            .inner
            .verify_extremum_claims(&d, &config(seed, samples))
            .map_err(py_err)?;
        Ok(PyBoxReport { inner })
    }
}

/// One enumerated dual critical point of a binary instance and its paired
/// binary target.
#[pyclass(name = "CriticalPair", frozen)]
struct PyCriticalPair {
    inner: binary::CriticalPair,
}

#[pymethods]
impl PyCriticalPair {
    #[getter]
    fn bits(&self) -> String {
        self.inner.bits.clone()
    }

    #[getter]
    fn x_star(&self) -> Vec<f64> {
        self.inner.x_star.clone()
    }

    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.inner.sigma.clone()
    }

    /// "SharpPlus", "SharpMinus", or "Rejected".
    #[getter]
    fn branch(&self) -> String {
        self.inner.branch.to_string()
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.inner.degenerate
    }

    #[getter]
    fn dual_value(&self) -> f64 {
        self.inner.dual_value
    }

    #[getter]
    fn primal_value(&self) -> f64 {
        self.inner.primal_value
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    fn __repr__(&self) -> String {
        format!(
            "CriticalPair(bits='{}', branch={}, dual_value={})",
            self.inner.bits, self.inner.branch, self.inner.dual_value
        )
    }
}

/// Certificate for one extremal-pairing claim: overall pass flag plus the
/// individual clauses that were checked.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate {
    inner: binary::Certificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn branch(&self) -> String {
        self.inner.branch.to_string()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    /// (name, status, detail) triples, one per checked clause.
    #[getter]
    fn clauses(&self) -> Vec<(String, String, String)> {
        self.inner
            .clauses
            .iter()
            .map(|c| (c.name.clone(), c.status.to_string(), c.detail.clone()))
            .collect()
    }

    #[getter]
    fn epsilon(&self) -> Option<f64> {
        self.inner.epsilon
    }

    #[getter]
    fn binary_minimum(&self) -> f64 {
        self.inner.binary_minimum
    }

    #[getter]
    fn binary_argmins(&self) -> Vec<String> {
        self.inner.binary_argmins.clone()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(branch={}, passed={})",
            self.inner.branch, self.inner.pass
        )
    }
}

/// 0-1 quadratic program with closed-form dual critical enumeration.
#[pyclass(name = "BinaryProblem", frozen)]
struct PyBinaryProblem {
    inner: binary::BinaryProblem,
}

#[pymethods]
impl PyBinaryProblem {
    #[new]
    fn new(q: Vec<Vec<f64>>, f: Vec<f64>) -> PyResult<Self> {
        let inner = binary::BinaryProblem::new(matrix(&q)?, f).map_err(py_err)?;
        Ok(PyBinaryProblem { inner })
    }

    /// Seeded random instance with entries in [−scale, scale].
    #[staticmethod]
    fn random_instance(seed: u64, n: usize, scale: f64) -> Self {
        PyBinaryProblem {
            inner: oracle::random_instance(seed, n, scale),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        self.inner.q().rows()
    }

    #[getter]
    fn f(&self) -> Vec<f64> {
        self.inner.f().to_vec()
    }

    fn primal_value(&self, x: Vec<f64>) -> f64 {
        self.inner.primal_value(&x)
    }

    /// Total complementary function Ξ(x, σ).
    fn xi_value(&self, x: Vec<f64>, sigma: Vec<f64>) -> f64 {
        self.inner.xi_value(&x, &sigma)
    }

    fn dual_value(&self, sigma: Vec<f64>) -> PyResult<f64> {
        self.inner.dual_value(&sigma).map_err(py_err)
    }

    fn dual_gradient(&self, sigma: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.dual_gradient(&sigma).map_err(py_err)
    }

    fn dual_hessian(&self, sigma: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.dual_hessian(&sigma).map_err(py_err)?.rows())
    }

    /// One critical pair per binary point, in lexicographic bit order.
    fn enumerate_criticals(&self) -> PyResult<Vec<PyCriticalPair>> {
        Ok(self
            .inner
            .enumerate_criticals()
            .map_err(py_err)?
            .into_iter()
            .map(|inner| PyCriticalPair { inner })
            .collect())
    }

    /// Explicit (epsilon, center) neighborhood for a negative-branch pair.
    fn epsilon_ball(&self, pair: &PyCriticalPair) -> PyResult<(f64, Vec<f64>)> {
        let ball = self.inner.epsilon_ball(&pair.inner).map_err(py_err)?;
        Ok((ball.epsilon, ball.center))
    }

    /// Certifies global minimality of the binary point paired with a
    /// positive-branch critical multiplier.
    #[pyo3(signature = (pair, seed = 42, samples = 10_000))]
    fn certify_global_min(
        &self,
        pair: &PyCriticalPair,
        seed: u64,
        samples: usize,
    ) -> PyResult<PyCertificate> {
        let inner = self
            .inner
            .certify_global_min(&pair.inner, &config(seed, samples))
            .map_err(py_err)?;
        Ok(PyCertificate { inner })
    }

    /// Certifies local minimality (on an explicit ε-ball) of the binary point
    /// paired with a negative-branch critical multiplier.
    #[pyo3(signature = (pair, seed = 42, samples = 10_000))]
    fn certify_local_min(
        &self,
        pair: &PyCriticalPair,
        seed: u64,
        samples: usize,
    ) -> PyResult<PyCertificate> {
        let inner = self
            .inner
            .certify_local_min(&pair.inner, &config(seed, samples))
            .map_err(py_err)?;
        Ok(PyCertificate { inner })
    }
}

/// Objective value along the primal perturbation path of the bundled box
/// instance; strictly above −15/2 on (0, 1).
#[pyfunction]
fn perturbation_primal(gamma: f64) -> PyResult<f64> {
    boxqp::perturbation_primal(gamma).map_err(py_err)
}

/// Dual value along the dual perturbation path of the bundled box instance;
/// strictly below −15/2 on (0, 1).
#[pyfunction]
fn perturbation_dual(gamma: f64) -> PyResult<f64> {
    boxqp::perturbation_dual(gamma).map_err(py_err)
}

#[pyfunction]
fn perturbation_primal_point(gamma: f64) -> Vec<f64> {
    boxqp::perturbation_primal_point(gamma)
}

#[pyfunction]
fn perturbation_dual_point(gamma: f64) -> (f64, Vec<f64>) {
    let d = boxqp::perturbation_dual_point(gamma);
    (d.sigma0, d.sigma)
}

/// Golden reproduction run on the bundled constrained instance; returns the
/// full report as JSON. A `lam` override produces a non-golden run.
#[pyfunction]
#[pyo3(signature = (lam = None))]
fn reproduce_example1(lam: Option<f64>) -> PyResult<String> {
    let opts = repro::Example1Options {
        lambda_override: lam,
        command: "python reproduce_example1".into(),
        ..Default::default()
    };
    let run = repro::run_example1(&opts).map_err(py_err)?;
    Ok(run.report.to_json())
}

/// Golden reproduction run on the bundled box instance; returns the full
/// report as JSON.
#[pyfunction]
#[pyo3(signature = (gamma = 0.25))]
fn reproduce_example2(gamma: f64) -> PyResult<String> {
    let opts = repro::Example2Options {
        gamma,
        command: "python reproduce_example2".into(),
        ..Default::default()
    };
    let run = repro::run_example2(&opts).map_err(py_err)?;
    Ok(run.report.to_json())
}

/// SHA-256 digest of the canonical form of a problem-file JSON text.
#[pyfunction]
fn problem_digest(text: &str) -> PyResult<String> {
    let file = problem_file::parse_problem_file(text).map_err(py_err)?;
    Ok(repro::problem_digest(&file))
}

#[pymodule]
fn dualqp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQcProblem>()?;
    m.add_class::<PyQcReport>()?;
    m.add_class::<PyBoxProblem>()?;
    m.add_class::<PyBoxReport>()?;
    m.add_class::<PyBinaryProblem>()?;
    m.add_class::<PyCriticalPair>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyClaimVerdict>()?;
    m.add_function(wrap_pyfunction!(perturbation_primal, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_dual, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_primal_point, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_dual_point, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_example1, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_example2, m)?)?;
    m.add_function(wrap_pyfunction!(problem_digest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
