//! Python bindings: distributions, weightings, endemic states, equilibria,
//! the social optimum and the power-law threshold bounds.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use vaxgame::bounds::{self, PowerLawBoundContext};
use vaxgame::scenario::{self, Command, Scenario};
use vaxgame::{dbmf, game, planner, weighting};

fn to_py(e: vaxgame::Error) -> PyErr {
    use vaxgame::Error::*;
    match e {
        Range(_) | Domain(_) | UnknownDegree(_) | Precondition(_) | Consistency(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "DegreeDistribution", module = "pyvaxgame", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    inner: vaxgame::DegreeDistribution,
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    fn power_law(d_min: u32, d_max: u32, beta: f64) -> PyResult<Self> {
        vaxgame::DegreeDistribution::power_law(d_min, d_max, beta).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Masses keyed by degree; normalized to sum to one.
    #[staticmethod]
    fn explicit(mass: BTreeMap<u32, f64>) -> PyResult<Self> {
        vaxgame::DegreeDistribution::explicit(&mass).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn degrees(&self) -> Vec<u32> {
        self.inner.degrees().to_vec()
    }

    #[getter]
    fn mass(&self) -> Vec<f64> {
        self.inner.mass().to_vec()
    }

    #[getter]
    fn mean_degree(&self) -> f64 {
        self.inner.mean_degree()
    }

    #[getter]
    fn second_moment(&self) -> f64 {
        self.inner.second_moment()
    }

    #[getter]
    fn kappa(&self) -> Option<f64> {
        self.inner.kappa()
    }

    fn neighbor_prob(&self, d: u32) -> PyResult<f64> {
        self.inner.neighbor_prob(d).map_err(to_py)
    }

    fn tail_mass(&self, d: u32) -> f64 {
        self.inner.tail_mass(d)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "DegreeDistribution(degrees {}..{}, n={}, mean={:.6})",
            self.inner.min_degree(),
            self.inner.max_degree(),
            self.inner.len(),
            self.inner.mean_degree()
        )
    }
}

#[pyclass(name = "Weighting", module = "pyvaxgame", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyWeighting {
    inner: vaxgame::WeightingSpec,
}

#[pymethods]
impl PyWeighting {
    #[staticmethod]
    fn identity() -> Self {
        Self { inner: vaxgame::WeightingSpec::Identity }
    }

    #[staticmethod]
    fn prelec(alpha: f64) -> PyResult<Self> {
        vaxgame::WeightingSpec::prelec(alpha).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.alpha()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn weight(&self, x: f64) -> PyResult<f64> {
        self.inner.weight(x).map_err(to_py)
    }

    fn weight_inverse(&self, y: f64) -> PyResult<f64> {
        self.inner.weight_inverse(y).map(|p| p.value()).map_err(to_py)
    }

    /// `w(w^{-1}(y))` carried in log space.
    fn round_trip(&self, y: f64) -> PyResult<f64> {
        let p = self.inner.weight_inverse(y).map_err(to_py)?;
        Ok(self.inner.weight_probability(p).value())
    }

    fn check_shape(&self, grid_size: usize) -> PyResult<bool> {
        weighting::verify_shape(&self.inner, grid_size).map(|r| r.passed()).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Weighting({})", self.inner.label())
    }
}

fn params(dist: &PyDistribution, delta: f64) -> PyResult<vaxgame::EpidemicParams> {
    vaxgame::EpidemicParams::new(delta, dist.inner.clone()).map_err(to_py)
}

/// Endemic neighbor-infection level and per-degree infection probabilities.
#[pyfunction]
fn endemic_state<'py>(
    py: Python<'py>,
    dist: &PyDistribution,
    delta: f64,
    unprotected: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let params = params(dist, delta)?;
    let x = vaxgame::SocialState::new(&dist.inner, unprotected).map_err(to_py)?;
    let e = dbmf::endemic_state(&params, &x, dbmf::DEFAULT_TOL).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("v", e.v)?;
    out.set_item("p", e.p.clone())?;
    out.set_item("reproduction", e.reproduction)?;
    out.set_item("residual", e.residual)?;
    out.set_item("near_critical", e.near_critical)?;
    out.set_item("expected_infected", e.expected_infected(&x))?;
    Ok(out)
}

#[pyclass(name = "Game", module = "pyvaxgame", frozen)]
struct PyGame {
    inner: vaxgame::GameSpec,
}

#[pymethods]
impl PyGame {
    #[new]
    fn new(dist: &PyDistribution, delta: f64, weighting: &PyWeighting, cost: f64) -> PyResult<Self> {
        vaxgame::GameSpec::new(params(dist, delta)?, weighting.inner, cost).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn critical_load(&self) -> f64 {
        self.inner.critical_load()
    }

    fn solve_pne<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let eq = game::solve_pne(&self.inner).map_err(to_py)?;
        let cert = game::verify_pne(&self.inner, &eq, scenario::PNE_CERTIFICATE_TOL).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("threshold", eq.threshold())?;
        out.set_item("fraction", eq.state.fraction)?;
        out.set_item("case", format!("{:?}", eq.case).to_lowercase())?;
        out.set_item("v", eq.v)?;
        out.set_item("unprotected", eq.social_state.unprotected().to_vec())?;
        out.set_item("expected_infected", eq.expected_infected)?;
        out.set_item("social_cost", eq.social_cost)?;
        out.set_item("max_violation", cert.max_violation)?;
        Ok(out)
    }

    fn social_optimum<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let opt = planner::solve_social_optimum(self.inner.params(), self.inner.cost()).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("threshold", opt.state.threshold)?;
        out.set_item("fraction", opt.state.fraction)?;
        out.set_item("unprotected", opt.social_state.unprotected().to_vec())?;
        out.set_item("social_cost", opt.cost.total)?;
        out.set_item("infected_term", opt.cost.infected_term)?;
        out.set_item("vaccination_term", opt.cost.vaccination_term)?;
        Ok(out)
    }

    fn inefficiency<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rep = planner::inefficiency(&self.inner).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("pne_threshold", rep.pne.threshold())?;
        out.set_item("opt_threshold", rep.optimum.state.threshold)?;
        out.set_item("gap", rep.gap)?;
        out.set_item("bound", rep.bound)?;
        out.set_item("ordering_holds", rep.ordering_holds())?;
        out.set_item("bound_holds", rep.bound_holds())?;
        Ok(out)
    }
}

/// Upper bound on the equilibrium threshold for a power-law population.
#[pyfunction]
fn threshold_upper_bound(dist: &PyDistribution, delta: f64, weighting: &PyWeighting, cost: f64) -> PyResult<f64> {
    let ctx = PowerLawBoundContext::new(&params(dist, delta)?).map_err(to_py)?;
    bounds::threshold_upper_bound(&ctx, &weighting.inner, cost).map_err(to_py)
}

/// Threshold sandwich rows, one dict per cost.
#[pyfunction]
fn ratio_sandwich<'py>(
    py: Python<'py>,
    dist: &PyDistribution,
    delta: f64,
    alpha: f64,
    costs: Vec<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ctx = PowerLawBoundContext::new(&params(dist, delta)?).map_err(to_py)?;
    let rows = bounds::ratio_sandwich(&ctx, alpha, &costs).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let out = PyDict::new(py);
            out.set_item("c", r.c)?;
            out.set_item("d_t", r.d_t)?;
            out.set_item("d_w", r.d_w)?;
            out.set_item("lower_t", r.lower_t)?;
            out.set_item("upper_t", r.upper_t)?;
            out.set_item("lower_w", r.lower_w)?;
            out.set_item("upper_w", r.upper_w)?;
            out.set_item("ratio", r.ratio)?;
            out.set_item("theta_proxy", r.theta_proxy)?;
            out.set_item("uninformative", r.uninformative())?;
            Ok(out)
        })
        .collect()
}

/// Runs a batch command on a JSON scenario and returns the rendered table.
#[pyfunction]
#[pyo3(signature = (command, scenario_json, format = "csv"))]
fn run_scenario(command: &str, scenario_json: &str, format: &str) -> PyResult<String> {
    let command = match command {
        "pne" => Command::Pne,
        "opt" => Command::Opt,
        "bounds" => Command::Bounds,
        "dynamics" => Command::Dynamics,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let run = || -> Result<vaxgame::table::Table, scenario::ScenarioError> {
        let s = Scenario::from_json(scenario_json)?;
        scenario::run(command, &s)
    };
    let table = run().map_err(|e| PyValueError::new_err(format!("{}: {e}", e.kind())))?;
    match format {
        "csv" => Ok(table.to_csv()),
        "json" => Ok(table.to_json()),
        other => Err(PyValueError::new_err(format!("unknown format {other:?}"))),
    }
}

#[pymodule]
fn pyvaxgame(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyWeighting>()?;
    m.add_class::<PyGame>()?;
    m.add_function(wrap_pyfunction!(endemic_state, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_sandwich, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("PRELEC_FIXED_POINT", weighting::PRELEC_FIXED_POINT)?;
    Ok(())
}
