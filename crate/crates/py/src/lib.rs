//! Python bindings: thin wrappers over the core model types plus seeded
//! entry points for the samplers, chain certificates, closed-form bounds,
//! and Monte Carlo drivers.
//!
//! Randomized functions take a `seed` argument instead of an RNG handle, so
//! every call is deterministic given its inputs. Core validation errors
//! surface as `ValueError`.

use std::cell::RefCell;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use swarm_escape::bounds::OscillationWindow;
use swarm_escape::chains::{ChainKind, ChainTag, TerminalLabel};
use swarm_escape::experiments::{InitialCondition, PsoCoefficients};
use swarm_escape::rng::replication_rng;
use swarm_escape::{bounds, chains, experiments, kernel, model};

fn value_err(e: swarm_escape::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Fixed environment of the stagnated agent: inertia weight, acceleration
/// coefficients, the box, and the two frozen attractors.
#[pyclass(name = "SwarmParams", frozen)]
struct PySwarmParams {
    inner: model::SwarmParams,
}

#[pymethods]
impl PySwarmParams {
    #[new]
    fn new(omega: f64, c1: f64, c2: f64, lb: f64, ub: f64, pb: f64, gb: f64) -> PyResult<Self> {
        model::SwarmParams::new(omega, c1, c2, lb, ub, pb, gb)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2
    }

    #[getter]
    fn lb(&self) -> f64 {
        self.inner.lb
    }

    #[getter]
    fn ub(&self) -> f64 {
        self.inner.ub
    }

    #[getter]
    fn pb(&self) -> f64 {
        self.inner.pb
    }

    #[getter]
    fn gb(&self) -> f64 {
        self.inner.gb
    }

    /// Box width `ub - lb`.
    fn width(&self) -> f64 {
        self.inner.width()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SwarmParams(omega={}, c1={}, c2={}, lb={}, ub={}, pb={}, gb={})",
            p.omega, p.c1, p.c2, p.lb, p.ub, p.pb, p.gb
        )
    }
}

/// Target interval `[l_g, u_g]` inside the box.
#[pyclass(name = "GoalRegion", frozen)]
struct PyGoalRegion {
    inner: model::GoalRegion,
}

#[pymethods]
impl PyGoalRegion {
    #[new]
    fn new(l_g: f64, u_g: f64, params: &PySwarmParams) -> PyResult<Self> {
        model::GoalRegion::new(l_g, u_g, &params.inner)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn l_g(&self) -> f64 {
        self.inner.l_g
    }

    #[getter]
    fn u_g(&self) -> f64 {
        self.inner.u_g
    }

    fn width(&self) -> f64 {
        self.inner.width()
    }

    fn contains(&self, x: f64) -> bool {
        self.inner.contains(x)
    }

    fn __repr__(&self) -> String {
        format!("GoalRegion({}, {})", self.inner.l_g, self.inner.u_g)
    }
}

/// Agent state `[x, v]`: current position and the velocity that produced it.
#[pyclass(name = "AgentState", frozen)]
struct PyAgentState {
    inner: model::AgentState,
}

#[pymethods]
impl PyAgentState {
    #[new]
    fn new(x: f64, v: f64) -> Self {
        Self { inner: model::AgentState::new(x, v) }
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn v(&self) -> f64 {
        self.inner.v
    }

    fn __repr__(&self) -> String {
        format!("AgentState(x={}, v={})", self.inner.x, self.inner.v)
    }
}

/// One-step velocity distribution: a trapezoid density, or a point mass when
/// both attraction pulls vanish.
#[pyclass(name = "TrapezoidDensity", frozen)]
struct PyTrapezoidDensity {
    inner: kernel::TrapezoidDensity,
}

#[pymethods]
impl PyTrapezoidDensity {
    /// Support endpoints (equal for a point mass).
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    /// Location of the atom, if the distribution is degenerate.
    fn point_mass(&self) -> Option<f64> {
        self.inner.point_mass()
    }

    /// Sorted knots and plateau height, when not degenerate.
    fn knots(&self) -> Option<(Vec<f64>, f64)> {
        self.inner.as_parts().map(|(vf, hf)| (vf.to_vec(), hf))
    }

    fn density(&self, v: f64) -> PyResult<f64> {
        self.inner.density(v).map_err(value_err)
    }

    fn cdf(&self, v: f64) -> f64 {
        self.inner.cdf(v)
    }

    /// Probability of the closed interval `[a, b]`.
    fn interval_prob(&self, a: f64, b: f64) -> f64 {
        self.inner.interval_prob(a, b)
    }

    fn __repr__(&self) -> String {
        match self.inner.point_mass() {
            Some(at) => format!("TrapezoidDensity(point_mass={at})"),
            None => {
                let (lo, hi) = self.inner.support();
                format!("TrapezoidDensity(support=({lo}, {hi}))")
            }
        }
    }
}

/// Closed-form iteration counts and log-probability floors for the three-leg
/// escape maneuver.
#[pyclass(name = "EscapeBounds", frozen)]
struct PyEscapeBounds {
    inner: bounds::EscapeBounds,
}

#[pymethods]
impl PyEscapeBounds {
    #[getter]
    fn t_0a(&self) -> u64 {
        self.inner.t_0a
    }

    #[getter]
    fn t_ab(&self) -> u64 {
        self.inner.t_ab
    }

    #[getter]
    fn t_bg(&self) -> u64 {
        self.inner.t_bg
    }

    #[getter]
    fn t_e0(&self) -> u64 {
        self.inner.t_e0
    }

    #[getter]
    fn log_p_0a(&self) -> f64 {
        self.inner.log_p_0a
    }

    #[getter]
    fn log_p_ab(&self) -> f64 {
        self.inner.log_p_ab
    }

    #[getter]
    fn log_p_bg(&self) -> f64 {
        self.inner.log_p_bg
    }

    #[getter]
    fn log_p_e0(&self) -> f64 {
        self.inner.log_p_e0
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        format!(
            "EscapeBounds(t_0a={}, t_ab={}, t_bg={}, t_e0={}, log_p_e0={})",
            b.t_0a, b.t_ab, b.t_bg, b.t_e0, b.log_p_e0
        )
    }
}

fn kind_str(k: ChainKind) -> &'static str {
    match k {
        ChainKind::Position => "position-chain",
        ChainKind::Velocity => "velocity-chain",
    }
}

fn tag_str(t: ChainTag) -> &'static str {
    match t {
        ChainTag::WallRun => "wall_run",
        ChainTag::WallBrake => "wall_brake",
        ChainTag::GoalDescent => "goal_descent",
    }
}

fn terminal_str(t: TerminalLabel) -> &'static str {
    match t {
        TerminalLabel::UpperWall => "upper_wall",
        TerminalLabel::Midpoint => "midpoint",
        TerminalLabel::Window => "oscillation_window",
        TerminalLabel::Goal => "goal",
        TerminalLabel::Handoff => "handoff",
    }
}

/// An ordered interval chain certifying one leg of the escape maneuver.
#[pyclass(name = "ChainSpec", frozen)]
struct PyChainSpec {
    inner: chains::ChainSpec,
}

#[pymethods]
impl PyChainSpec {
    #[getter]
    fn kind(&self) -> &'static str {
        kind_str(self.inner.kind)
    }

    #[getter]
    fn tag(&self) -> &'static str {
        tag_str(self.inner.tag)
    }

    #[getter]
    fn terminal(&self) -> &'static str {
        terminal_str(self.inner.terminal)
    }

    #[getter]
    fn origin(&self) -> PyAgentState {
        PyAgentState { inner: self.inner.origin }
    }

    /// Interval endpoints in transition order.
    fn intervals(&self) -> Vec<(f64, f64)> {
        self.inner.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    /// Branch fractions, one per interval for position chains.
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.intervals.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainSpec(tag={:?}, kind={:?}, intervals={})",
            tag_str(self.inner.tag),
            kind_str(self.inner.kind),
            self.inner.intervals.len()
        )
    }
}

/// Outcome of checking a chain: overall verdict, per-condition failures,
/// and the certified log-probability floor.
#[pyclass(name = "FeasibilityReport", frozen)]
struct PyFeasibilityReport {
    inner: chains::FeasibilityReport,
}

#[pymethods]
impl PyFeasibilityReport {
    #[getter]
    fn feasible(&self) -> bool {
        self.inner.feasible
    }

    #[getter]
    fn log_prob_lower_bound(&self) -> f64 {
        self.inner.log_prob_lower_bound
    }

    /// Failures as `(condition, interval_index, slack)` triples.
    #[getter]
    fn failed_conditions(&self) -> Vec<(String, usize, f64)> {
        self.inner
            .failed_conditions
            .iter()
            .map(|f| (f.condition.clone(), f.index, f.slack))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "FeasibilityReport(feasible={}, failures={}, log_prob_lower_bound={})",
            self.inner.feasible,
            self.inner.failed_conditions.len(),
            self.inner.log_prob_lower_bound
        )
    }
}

/// Empirical cumulative escape probabilities over `t = 0..=max_iters`.
#[pyclass(name = "EscapeCurve", frozen)]
struct PyEscapeCurve {
    inner: experiments::EscapeCurve,
}

#[pymethods]
impl PyEscapeCurve {
    #[getter]
    fn t_values(&self) -> Vec<usize> {
        self.inner.t_values.clone()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs.clone()
    }

    #[getter]
    fn stderr(&self) -> Vec<f64> {
        self.inner.stderr.clone()
    }

    #[getter]
    fn n_runs(&self) -> u64 {
        self.inner.n_runs
    }

    /// Escape probability at the iteration cap.
    fn final_prob(&self) -> f64 {
        *self.inner.probs.last().expect("curve has at least one point")
    }

    fn __len__(&self) -> usize {
        self.inner.probs.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "EscapeCurve(points={}, n_runs={}, final_prob={})",
            self.inner.probs.len(),
            self.inner.n_runs,
            self.final_prob()
        )
    }
}

/// Histogram of the position at one iteration: interior bin masses plus the
/// two wall atoms and the goal mass.
#[pyclass(name = "PositionHistogram", frozen)]
struct PyPositionHistogram {
    inner: experiments::PositionHistogram,
}

#[pymethods]
impl PyPositionHistogram {
    #[getter]
    fn bin_edges(&self) -> Vec<f64> {
        self.inner.bin_edges.clone()
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.inner.masses.clone()
    }

    #[getter]
    fn atom_lb(&self) -> f64 {
        self.inner.atom_lb
    }

    #[getter]
    fn atom_ub(&self) -> f64 {
        self.inner.atom_ub
    }

    #[getter]
    fn goal_mass(&self) -> f64 {
        self.inner.goal_mass
    }
}

/// Personal-best history of a full swarm run.
#[pyclass(name = "PbestHistory", frozen)]
struct PyPbestHistory {
    inner: experiments::PbestHistory,
}

#[pymethods]
impl PyPbestHistory {
    #[getter]
    fn gbest(&self) -> Vec<f64> {
        self.inner.gbest.clone()
    }

    #[getter]
    fn gbest_obj(&self) -> f64 {
        self.inner.gbest_obj
    }

    #[getter]
    fn n_agents(&self) -> usize {
        self.inner.objectives.len()
    }

    /// Personal-best objective values of one agent, nonincreasing in `t`.
    fn objectives(&self, agent: usize) -> PyResult<Vec<f64>> {
        self.inner
            .objectives
            .get(agent)
            .cloned()
            .ok_or_else(|| PyValueError::new_err(format!("agent index {agent} out of range")))
    }

    /// Personal-best coordinate track of one agent along one dimension.
    fn positions(&self, agent: usize, dim: usize) -> PyResult<Vec<f64>> {
        self.inner
            .positions
            .get(agent)
            .and_then(|dims| dims.get(dim))
            .cloned()
            .ok_or_else(|| {
                PyValueError::new_err(format!("agent {agent} / dim {dim} out of range"))
            })
    }

    fn __repr__(&self) -> String {
        format!(
            "PbestHistory(n_agents={}, gbest_obj={})",
            self.inner.objectives.len(),
            self.inner.gbest_obj
        )
    }
}

/// Scalar or `(lo, hi)` range, for initial-condition arguments.
#[derive(FromPyObject)]
enum Span {
    Point(f64),
    Range((f64, f64)),
}

impl Span {
    fn pair(&self) -> (f64, f64) {
        match *self {
            Span::Point(a) => (a, a),
            Span::Range(r) => r,
        }
    }
}

fn init_from(x: &Span, v: &Span) -> PyResult<InitialCondition> {
    let init = match (x, v) {
        (Span::Point(x), Span::Point(v)) => {
            InitialCondition::Point(model::AgentState::new(*x, *v))
        }
        (x, v) => InitialCondition::BoxUniform { x: x.pair(), v: v.pair() },
    };
    init.validate().map_err(value_err)?;
    Ok(init)
}

fn window_from(window: Option<(f64, f64)>) -> PyResult<OscillationWindow> {
    match window {
        None => Ok(OscillationWindow::default()),
        Some((lambda, mu)) => OscillationWindow::new(lambda, mu).map_err(value_err),
    }
}

fn require_positive(name: &str, n: u64) -> PyResult<()> {
    if n == 0 {
        return Err(PyValueError::new_err(format!("{name} must be positive")));
    }
    Ok(())
}

/// Absorbing walls: positions beyond a boundary stick to that boundary.
#[pyfunction]
fn clamp(x: f64, lb: f64, ub: f64) -> f64 {
    model::clamp(x, lb, ub)
}

/// One transition with explicit uniform draws `r1, r2` in `[0, 1]`.
#[pyfunction]
fn step(state: &PyAgentState, params: &PySwarmParams, r1: f64, r2: f64) -> PyResult<PyAgentState> {
    for (name, r) in [("r1", r1), ("r2", r2)] {
        if !(0.0..=1.0).contains(&r) {
            return Err(PyValueError::new_err(format!("{name} must lie in [0, 1], got {r}")));
        }
    }
    Ok(PyAgentState { inner: model::step(&state.inner, &params.inner, r1, r2) })
}

/// One transition with draws from the seeded replication stream.
#[pyfunction]
fn sample_step(state: &PyAgentState, params: &PySwarmParams, seed: u64) -> PyAgentState {
    let mut rng = replication_rng(seed, 0);
    PyAgentState { inner: model::sample_step(&state.inner, &params.inner, &mut rng) }
}

/// Simulate until the goal is hit or `max_iters` transitions have run.
/// Returns the `(x, v)` path (index 0 is the start) and the hit time, if any.
#[pyfunction]
fn run_trajectory(
    state: &PyAgentState,
    params: &PySwarmParams,
    goal: &PyGoalRegion,
    max_iters: usize,
    seed: u64,
) -> (Vec<(f64, f64)>, Option<usize>) {
    let mut rng = replication_rng(seed, 0);
    let traj = model::run_trajectory(&state.inner, &params.inner, &goal.inner, max_iters, &mut rng);
    (traj.states.iter().map(|s| (s.x, s.v)).collect(), traj.hit_time)
}

/// First goal-hit index, or `None` if the cap is reached first.
#[pyfunction]
fn first_hit_time(
    state: &PyAgentState,
    params: &PySwarmParams,
    goal: &PyGoalRegion,
    max_iters: usize,
    seed: u64,
) -> Option<usize> {
    let mut rng = replication_rng(seed, 0);
    model::first_hit_time(&state.inner, &params.inner, &goal.inner, max_iters, &mut rng)
}

/// Distribution of the next velocity from `state`.
#[pyfunction]
fn velocity_support(state: &PyAgentState, params: &PySwarmParams) -> PyTrapezoidDensity {
    PyTrapezoidDensity { inner: kernel::velocity_support(&state.inner, &params.inner) }
}

/// Minimum useful jump scale `min(c1, c2, 1) * (gb - pb)`.
#[pyfunction]
fn d0(params: &PySwarmParams) -> f64 {
    kernel::d0(&params.inner)
}

/// Universal floor on the probability of any width-`x` velocity window.
#[pyfunction]
fn h_bound(params: &PySwarmParams, x: f64) -> f64 {
    kernel::h_bound(&params.inner, x)
}

/// `ln h_bound(x)`, finite for every `x > 0`.
#[pyfunction]
fn log_h_bound(params: &PySwarmParams, x: f64) -> f64 {
    kernel::log_h_bound(&params.inner, x)
}

/// Hard cap on attainable speed: `(c1 + c2 + 1) * (ub - lb)`.
#[pyfunction]
fn v_upper_bound(params: &PySwarmParams) -> f64 {
    kernel::v_upper_bound(&params.inner)
}

/// Floor on the per-step speed-refresh probability `P{|v| >= d0/4}`.
#[pyfunction]
fn lemma1_bound(params: &PySwarmParams) -> PyResult<f64> {
    kernel::lemma1_bound(&params.inner).map_err(value_err)
}

/// Iteration counts and log-probability floors for the full maneuver.
/// Requires `omega = 1` and separated attractors.
#[pyfunction]
fn escape_bounds(params: &PySwarmParams, goal: &PyGoalRegion) -> PyResult<PyEscapeBounds> {
    bounds::escape_bounds(&params.inner, &goal.inner)
        .map(|inner| PyEscapeBounds { inner })
        .map_err(value_err)
}

/// Lower bound on the escape probability within `n` iterations.
#[pyfunction]
fn pe_lower_bound(bounds_: &PyEscapeBounds, n: u64) -> f64 {
    bounds::pe_lower_bound(&bounds_.inner, n)
}

/// Wall-run certificate: interval chain from `origin` to the upper wall.
#[pyfunction]
fn build_step1_chain(origin: &PyAgentState, params: &PySwarmParams) -> PyResult<PyChainSpec> {
    chains::build_step1_chain(origin.inner, &params.inner)
        .map(|inner| PyChainSpec { inner })
        .map_err(value_err)
}

/// Wall-brake certificate: velocity descent into the exit window.
/// `window` is an optional `(lambda, mu)` pair.
#[pyfunction]
#[pyo3(signature = (origin, params, window=None))]
fn build_step2_chain(
    origin: &PyAgentState,
    params: &PySwarmParams,
    window: Option<(f64, f64)>,
) -> PyResult<PyChainSpec> {
    chains::build_step2_chain(origin.inner, &params.inner, &window_from(window)?)
        .map(|inner| PyChainSpec { inner })
        .map_err(value_err)
}

/// Goal-descent certificate from a fresh wall exit.
/// `window` is an optional `(lambda, mu)` pair.
#[pyfunction]
#[pyo3(signature = (prev_x, origin, params, goal, window=None))]
fn build_step3_chain(
    prev_x: f64,
    origin: &PyAgentState,
    params: &PySwarmParams,
    goal: &PyGoalRegion,
    window: Option<(f64, f64)>,
) -> PyResult<PyChainSpec> {
    chains::build_step3_chain(
        prev_x,
        origin.inner,
        &params.inner,
        &goal.inner,
        &window_from(window)?,
    )
    .map(|inner| PyChainSpec { inner })
    .map_err(value_err)
}

/// Check every feasibility condition of a chain against the environment.
#[pyfunction]
fn verify_chain(chain: &PyChainSpec, params: &PySwarmParams) -> PyFeasibilityReport {
    PyFeasibilityReport { inner: chains::verify_chain(&chain.inner, &params.inner) }
}

/// Certified log-probability floor of traversing the whole chain.
#[pyfunction]
fn chain_log_prob(chain: &PyChainSpec, params: &PySwarmParams) -> f64 {
    chains::chain_log_prob(&chain.inner, &params.inner)
}

/// Empirical escape curve from `n_runs` trajectories. `x` and `v` accept a
/// scalar (a point mass) or a `(lo, hi)` tuple (uniform over the range).
#[pyfunction]
fn estimate_escape_curve(
    params: &PySwarmParams,
    goal: &PyGoalRegion,
    x: Span,
    v: Span,
    n_runs: u64,
    max_iters: usize,
    seed: u64,
) -> PyResult<PyEscapeCurve> {
    require_positive("n_runs", n_runs)?;
    let init = init_from(&x, &v)?;
    let inner =
        experiments::estimate_escape_curve(&params.inner, &goal.inner, &init, n_runs, max_iters, seed);
    Ok(PyEscapeCurve { inner })
}

/// Estimate `(pe_hat, stderr)` for escape within `iter_cap` iterations.
#[pyfunction]
fn estimate_pe(
    params: &PySwarmParams,
    goal: &PyGoalRegion,
    x: Span,
    v: Span,
    n_runs: u64,
    iter_cap: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    require_positive("n_runs", n_runs)?;
    require_positive("iter_cap", iter_cap as u64)?;
    let init = init_from(&x, &v)?;
    Ok(experiments::estimate_pe(&params.inner, &goal.inner, &init, n_runs, iter_cap, seed))
}

/// Position histograms at `t = 0..=t_max` from a fixed starting state.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn position_distribution(
    params: &PySwarmParams,
    x0: f64,
    v0: f64,
    goal: &PyGoalRegion,
    t_max: usize,
    n_runs: u64,
    n_bins: usize,
    seed: u64,
) -> PyResult<Vec<PyPositionHistogram>> {
    require_positive("n_runs", n_runs)?;
    if n_bins < 2 {
        return Err(PyValueError::new_err("n_bins must be at least 2"));
    }
    if !(params.inner.lb <= x0 && x0 <= params.inner.ub) {
        return Err(PyValueError::new_err(format!(
            "x0 must lie inside the box [{}, {}], got {x0}",
            params.inner.lb, params.inner.ub
        )));
    }
    if !v0.is_finite() {
        return Err(PyValueError::new_err(format!("v0 must be finite, got {v0}")));
    }
    let hists = experiments::position_distribution(
        &params.inner,
        model::AgentState::new(x0, v0),
        &goal.inner,
        t_max,
        n_runs,
        n_bins,
        seed,
    );
    Ok(hists.into_iter().map(|inner| PyPositionHistogram { inner }).collect())
}

/// Rastrigin objective; zero exactly at the origin.
#[pyfunction]
fn rastrigin(x: Vec<f64>) -> f64 {
    experiments::rastrigin(&x)
}

/// Run a plain global-best PSO on a cube. The default objective is
/// Rastrigin; pass any callable taking a list of floats to override it.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (lb, ub, n_agents, dims, t_max, omega, c1, c2, seed, objective=None))]
fn run_full_pso(
    lb: f64,
    ub: f64,
    n_agents: usize,
    dims: usize,
    t_max: usize,
    omega: f64,
    c1: f64,
    c2: f64,
    seed: u64,
    objective: Option<Bound<'_, PyAny>>,
) -> PyResult<PyPbestHistory> {
    let coeffs = PsoCoefficients::new(omega, c1, c2).map_err(value_err)?;
    require_positive("n_agents", n_agents as u64)?;
    require_positive("dims", dims as u64)?;
    if !(lb < ub) {
        return Err(PyValueError::new_err(format!(
            "box must have positive width, got [{lb}, {ub}]"
        )));
    }
    let lb_vec = vec![lb; dims];
    let ub_vec = vec![ub; dims];

    let inner = match objective {
        None => experiments::run_full_pso(
            experiments::rastrigin,
            &lb_vec,
            &ub_vec,
            n_agents,
            dims,
            t_max,
            &coeffs,
            seed,
        ),
        Some(f) => {
            // The core driver expects an infallible objective; stash the
            // first Python error and surface it after the run.
            let caught: RefCell<Option<PyErr>> = RefCell::new(None);
            let history = experiments::run_full_pso(
                |x: &[f64]| {
                    if caught.borrow().is_some() {
                        return f64::INFINITY;
                    }
                    match f.call1((x.to_vec(),)).and_then(|v| v.extract::<f64>()) {
                        Ok(val) => val,
                        Err(e) => {
                            *caught.borrow_mut() = Some(e);
                            f64::INFINITY
                        }
                    }
                },
                &lb_vec,
                &ub_vec,
                n_agents,
                dims,
                t_max,
                &coeffs,
                seed,
            );
            if let Some(e) = caught.into_inner() {
                return Err(e);
            }
            history
        }
    };
    Ok(PyPbestHistory { inner })
}

/// Integer plateaus in a swarm's personal-best tracks, as
/// `(agent, dim, start_iter, end_iter, nearest_integer)` tuples.
#[pyfunction]
fn stagnation_report(
    history: &PyPbestHistory,
    tolerance: f64,
) -> PyResult<Vec<(usize, usize, usize, usize, i64)>> {
    if !(tolerance > 0.0) {
        return Err(PyValueError::new_err(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(experiments::stagnation_report(&history.inner, tolerance)
        .into_iter()
        .map(|s| (s.agent, s.dim, s.start_iter, s.end_iter, s.nearest_integer))
        .collect())
}

#[pymodule]
fn swarm_escape_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySwarmParams>()?;
    m.add_class::<PyGoalRegion>()?;
    m.add_class::<PyAgentState>()?;
    m.add_class::<PyTrapezoidDensity>()?;
    m.add_class::<PyEscapeBounds>()?;
    m.add_class::<PyChainSpec>()?;
    m.add_class::<PyFeasibilityReport>()?;
    m.add_class::<PyEscapeCurve>()?;
    m.add_class::<PyPositionHistogram>()?;
    m.add_class::<PyPbestHistory>()?;
    m.add_function(wrap_pyfunction!(clamp, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(sample_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(first_hit_time, m)?)?;
    m.add_function(wrap_pyfunction!(velocity_support, m)?)?;
    m.add_function(wrap_pyfunction!(d0, m)?)?;
    m.add_function(wrap_pyfunction!(h_bound, m)?)?;
    m.add_function(wrap_pyfunction!(log_h_bound, m)?)?;
    m.add_function(wrap_pyfunction!(v_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(escape_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(pe_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(build_step1_chain, m)?)?;
    m.add_function(wrap_pyfunction!(build_step2_chain, m)?)?;
    m.add_function(wrap_pyfunction!(build_step3_chain, m)?)?;
    m.add_function(wrap_pyfunction!(verify_chain, m)?)?;
    m.add_function(wrap_pyfunction!(chain_log_prob, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_escape_curve, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_pe, m)?)?;
    m.add_function(wrap_pyfunction!(position_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(rastrigin, m)?)?;
    m.add_function(wrap_pyfunction!(run_full_pso, m)?)?;
    m.add_function(wrap_pyfunction!(stagnation_report, m)?)?;
    Ok(())
}
