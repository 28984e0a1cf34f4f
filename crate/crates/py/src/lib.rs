use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use stackgame::analysis::{self, Figure, FigureOptions, GameModel, DEFAULT_INDEPENDENCE_TOL};
use stackgame::{oracle, sequence, Error};

create_exception!(stackgame_py, StackgameError, PyException);
create_exception!(stackgame_py, RegularityError, StackgameError);
create_exception!(stackgame_py, NonInteriorError, StackgameError);
create_exception!(stackgame_py, InvalidInputError, StackgameError);

fn to_py(e: Error) -> PyErr {
    let message = e.to_string();
    match e.root() {
        Error::RegularityViolated { .. }
        | Error::DegenerateSlope { .. }
        | Error::DegenerateDenominator => RegularityError::new_err(message),
        Error::NonInterior { .. } => NonInteriorError::new_err(message),
        Error::NoConvergence { .. } | Error::Jet(_) => StackgameError::new_err(message),
        _ => InvalidInputError::new_err(message),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

/// Inverse demand `a (xbar - X)` or `a (xbar - X) - eps sin(k pi X)` with unit cost `c`.
#[pyclass(name = "DemandModel", module = "stackgame_py", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyDemandModel(stackgame::DemandModel);

#[pymethods]
impl PyDemandModel {
    #[staticmethod]
    #[pyo3(signature = (a, xbar, c = 0.0))]
    fn linear(a: f64, xbar: f64, c: f64) -> PyResult<Self> {
        stackgame::DemandModel::linear(a, xbar, c).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (a, xbar, eps, k = 5, c = 0.0))]
    fn sine(a: f64, xbar: f64, eps: f64, k: u32, c: f64) -> PyResult<Self> {
        stackgame::DemandModel::sine(a, xbar, eps, k, c).map(Self).map_err(to_py)
    }

    #[getter]
    fn family(&self) -> &'static str {
        if self.0.is_linear() {
            "linear"
        } else {
            "sine"
        }
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn xbar(&self) -> f64 {
        self.0.xbar()
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.cost()
    }

    fn price(&self, x: f64) -> f64 {
        self.0.price(x)
    }

    fn g(&self, x: f64) -> f64 {
        self.0.g(x)
    }

    /// Quantity where price meets cost.
    fn competitive_quantity(&self) -> PyResult<f64> {
        self.0.competitive_quantity().map(|b| b.xbar_c).map_err(to_py)
    }

    fn to_json(&self) -> String {
        GameModel::Demand(self.0).to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "DemandModel(family={:?}, a={}, xbar={}, eps={}, k={}, c={})",
            self.family(),
            self.0.a(),
            self.0.xbar(),
            self.0.eps(),
            self.0.k(),
            self.0.cost()
        )
    }
}

/// Any payoff specification: demand, quadratic or heterogeneous linear.
#[pyclass(name = "GameModel", module = "stackgame_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyGameModel(GameModel);

#[pymethods]
impl PyGameModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        GameModel::from_json(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha1, alpha2, beta2, alpha0 = 0.0, beta1 = 0.0))]
    fn quadratic(alpha1: f64, alpha2: f64, beta2: f64, alpha0: f64, beta1: f64) -> Self {
        Self(GameModel::Quadratic(stackgame::QuadraticPayoff::new(
            alpha0, alpha1, alpha2, beta1, beta2,
        )))
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("GameModel({})", self.0.to_json())
    }
}

#[derive(FromPyObject)]
enum ModelArg {
    Demand(PyDemandModel),
    Game(PyGameModel),
    Json(String),
}

impl ModelArg {
    fn game(self) -> PyResult<GameModel> {
        match self {
            ModelArg::Demand(m) => Ok(GameModel::Demand(m.0)),
            ModelArg::Game(g) => Ok(g.0),
            ModelArg::Json(s) => GameModel::from_json(&s).map_err(to_py),
        }
    }

    fn demand(self) -> PyResult<stackgame::DemandModel> {
        match self.game()? {
            GameModel::Demand(m) => Ok(m),
            _ => Err(PyValueError::new_err("a linear or sine demand model is required")),
        }
    }
}

fn sequence(counts: Vec<u32>) -> PyResult<stackgame::PeriodSequence> {
    stackgame::PeriodSequence::new(counts).map_err(to_py)
}

/// Firm counts per period.
#[pyclass(name = "PeriodSequence", module = "stackgame_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPeriodSequence(stackgame::PeriodSequence);

#[pymethods]
impl PyPeriodSequence {
    #[new]
    fn new(counts: Vec<u32>) -> PyResult<Self> {
        sequence(counts).map(Self)
    }

    #[getter]
    fn counts(&self) -> Vec<u32> {
        self.0.counts().to_vec()
    }

    #[getter]
    fn periods(&self) -> usize {
        self.0.periods()
    }

    #[getter]
    fn total_firms(&self) -> u64 {
        self.0.total_firms()
    }

    /// Observation-path counts `S_1..S_T`.
    fn s_measures(&self) -> PyResult<Vec<u64>> {
        stackgame::s_measures(&self.0)
            .map(|s| s.values().to_vec())
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.periods()
    }

    fn __repr__(&self) -> String {
        format!("PeriodSequence({:?})", self.0.counts())
    }
}

/// Equilibrium quantities, grouped by period.
#[pyclass(name = "EquilibriumOutcome", module = "stackgame_py", frozen)]
struct PyOutcome(stackgame::EquilibriumOutcome);

#[pymethods]
impl PyOutcome {
    #[getter]
    fn total(&self) -> f64 {
        self.0.total
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn price(&self) -> Option<f64> {
        self.0.price
    }

    #[getter]
    fn competitive_quantity(&self) -> Option<f64> {
        self.0.competitive_quantity
    }

    /// Per-firm quantity in each period.
    #[getter]
    fn period_quantities(&self) -> Vec<f64> {
        self.0.groups.iter().map(|g| g.quantity).collect()
    }

    /// `(period, firm_index, quantity, profit)` for every firm.
    fn firms(&self) -> Vec<(usize, usize, f64, Option<f64>)> {
        self.0
            .firms()
            .iter()
            .map(|f| (f.period, f.firm_index, f.quantity, f.profit))
            .collect()
    }

    fn to_csv(&self) -> String {
        analysis::outcome_csv(&self.0)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &serde_json::to_value(&self.0).expect("outcome serializes"))
    }

    fn __repr__(&self) -> String {
        format!(
            "EquilibriumOutcome(total={}, quantities={:?})",
            self.0.total,
            self.period_quantities()
        )
    }
}

/// Subgame-perfect equilibrium with the solver matching the model family.
#[pyfunction]
fn solve(model: ModelArg, periods: Vec<u32>) -> PyResult<PyOutcome> {
    analysis::solve(&model.game()?, &sequence(periods)?)
        .map(PyOutcome)
        .map_err(to_py)
}

/// The general fixed-point solver, bypassing closed forms.
#[pyfunction]
fn solve_general(model: ModelArg, periods: Vec<u32>) -> PyResult<PyOutcome> {
    stackgame::solve_general(&model.demand()?, &sequence(periods)?)
        .map(PyOutcome)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (model, prefix, suffixes, tol = DEFAULT_INDEPENDENCE_TOL))]
fn check_independence<'py>(
    py: Python<'py>,
    model: ModelArg,
    prefix: Vec<u32>,
    suffixes: Vec<Vec<u32>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (model, prefix) = (model.game()?, sequence(prefix)?);
    let report = py
        .detach(|| analysis::check_independence(&model, &prefix, &suffixes, tol))
        .map_err(to_py)?;
    json_to_py(py, &serde_json::to_value(&report).expect("report serializes"))
}

#[pyfunction]
fn infer_competitive_quantity(x_observed: f64, prefix: Vec<u32>) -> PyResult<f64> {
    if !(x_observed > 0.0) {
        return Err(PyValueError::new_err("x_observed must be > 0"));
    }
    Ok(analysis::infer_competitive_quantity(x_observed, &prefix))
}

/// Rows of `limit_sweep` as dicts.
#[pyfunction]
fn limit_sweep<'py>(
    py: Python<'py>,
    model: ModelArg,
    base: Vec<u32>,
    t: usize,
    grid: Vec<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let (model, base) = (model.demand()?, sequence(base)?);
    let rows = py
        .detach(|| analysis::limit_sweep(&model, &base, t, &grid))
        .map_err(to_py)?;
    json_to_py(py, &serde_json::to_value(&rows).expect("rows serialize"))
}

/// `{"figure", "series": {"header", "rows"}, "demand"}` for `fig1`, `fig2` or `fig3`.
#[pyfunction]
#[pyo3(signature = (figure, n_max = None, eps = None, k = None))]
fn figure_data<'py>(
    py: Python<'py>,
    figure: &str,
    n_max: Option<u32>,
    eps: Option<f64>,
    k: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let figure: Figure = figure.parse().map_err(to_py)?;
    let data = py
        .detach(|| analysis::figure_data(figure, FigureOptions { n_max, eps, k }))
        .map_err(to_py)?;
    json_to_py(py, &serde_json::to_value(&data).expect("figure serializes"))
}

/// Grid backward induction. Returns the outcome, whether every subgame
/// converged and the on-path best-response gap.
#[pyfunction]
#[pyo3(signature = (model, periods, step = None, max_action = None, max_sweeps = 200))]
fn backward_induction_grid(
    py: Python<'_>,
    model: ModelArg,
    periods: Vec<u32>,
    step: Option<f64>,
    max_action: Option<f64>,
    max_sweeps: usize,
) -> PyResult<(PyOutcome, bool, f64)> {
    let (game, n) = (model.game()?, sequence(periods)?);
    let max_action = match max_action {
        Some(m) => m,
        None => game.scale().map_err(to_py)?,
    };
    let grid = oracle::GridSpec::new(step.unwrap_or(max_action / 2000.0), max_action, max_sweeps)
        .map_err(to_py)?;
    let payoff = game.payoff_model(&n).map_err(to_py)?;
    let out = py
        .detach(|| oracle::backward_induction_grid(&payoff, &n, &grid))
        .map_err(to_py)?;
    Ok((PyOutcome(out.outcome), out.converged, out.gap))
}

/// `(leader_quantity, total)` maximizing the leader's profit directly.
#[pyfunction]
#[pyo3(signature = (model, followers, step = None))]
fn nested_leader_optimum(
    py: Python<'_>,
    model: ModelArg,
    followers: u32,
    step: Option<f64>,
) -> PyResult<(f64, f64)> {
    let model = model.demand()?;
    let scale = model.competitive_quantity().map_err(to_py)?.xbar_c;
    let grid = oracle::GridSpec::new(step.unwrap_or(scale / 2000.0), scale, 200).map_err(to_py)?;
    let o = py
        .detach(|| oracle::nested_leader_optimum(&model, followers, &grid))
        .map_err(to_py)?;
    Ok((o.leader_quantity, o.total))
}

#[pyfunction]
fn s_measures(counts: Vec<u32>) -> PyResult<Vec<u64>> {
    sequence::SMeasures::of_counts(&counts)
        .map(|s| s.values().to_vec())
        .map_err(to_py)
}

#[pymodule]
pub fn stackgame_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("StackgameError", py.get_type::<StackgameError>())?;
    m.add("RegularityError", py.get_type::<RegularityError>())?;
    m.add("NonInteriorError", py.get_type::<NonInteriorError>())?;
    m.add("InvalidInputError", py.get_type::<InvalidInputError>())?;
    m.add_class::<PyDemandModel>()?;
    m.add_class::<PyGameModel>()?;
    m.add_class::<PyPeriodSequence>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_general, m)?)?;
    m.add_function(wrap_pyfunction!(check_independence, m)?)?;
    m.add_function(wrap_pyfunction!(infer_competitive_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(limit_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(figure_data, m)?)?;
    m.add_function(wrap_pyfunction!(backward_induction_grid, m)?)?;
    m.add_function(wrap_pyfunction!(nested_leader_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(s_measures, m)?)?;
    Ok(())
}
