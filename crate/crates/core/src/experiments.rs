//! Monte Carlo experiments on the stagnated-agent chain: escape-probability
//! curves, long-horizon escape frequencies, the evolving distribution of the
//! position, velocity-sign behavior segmentation, and a small full-swarm
//! optimizer used to demonstrate stagnation on the Rastrigin function.
//!
//! Replications fan out over per-replication RNG streams and merge through
//! associative integer counters, so every estimate is deterministic for a
//! fixed seed regardless of thread count or scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{clamp, first_hit_time, sample_step, AgentState, GoalRegion, SwarmParams, Trajectory};
use crate::rng::replication_rng;

/// Distribution of the agent's state at iteration 0: either a fixed point or
/// independent uniforms over an interval per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    Point(AgentState),
    BoxUniform { x: (f64, f64), v: (f64, f64) },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, (lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "initial {name} range must be finite, got [{lo}, {hi}]"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidParams(format!(
                    "initial {name} range must be ordered, got [{lo}, {hi}]"
                )));
            }
            Ok(())
        };
        match self {
            Self::Point(s) => {
                check("position", (s.x, s.x))?;
                check("velocity", (s.v, s.v))
            }
            Self::BoxUniform { x, v } => {
                check("position", *x)?;
                check("velocity", *v)
            }
        }
    }

    /// Draw one initial state. A point consumes no randomness; a box consumes
    /// two uniforms, position first.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AgentState {
        match self {
            Self::Point(s) => *s,
            Self::BoxUniform { x, v } => {
                let xs = x.0 + (x.1 - x.0) * rng.random::<f64>();
                let vs = v.0 + (v.1 - v.0) * rng.random::<f64>();
                AgentState::new(xs, vs)
            }
        }
    }
}

/// The (environment, goal, initial distribution) triple an estimate was run
/// against, carried alongside the numbers so results are self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: SwarmParams,
    pub goal: GoalRegion,
    pub init: InitialCondition,
}

/// Empirical cumulative escape probabilities: `probs[i]` estimates
/// `P{T <= t_values[i]}` where `T` is the first goal-hit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeCurve {
    pub t_values: Vec<usize>,
    pub probs: Vec<f64>,
    pub n_runs: u64,
    pub config: ExperimentConfig,
    /// Binomial standard error `sqrt(p (1 - p) / n_runs)` per point.
    pub stderr: Vec<f64>,
}

/// Estimate the escape curve over `t = 0..=max_iters` from `n_runs`
/// independent trajectories. `probs[t]` is the fraction whose first hit time
/// is at most `t`, so the curve is nondecreasing by construction.
pub fn estimate_escape_curve(
    params: &SwarmParams,
    goal: &GoalRegion,
    init: &InitialCondition,
    n_runs: u64,
    max_iters: usize,
    seed: u64,
) -> EscapeCurve {
    assert!(n_runs >= 1, "need at least one replication");
    init.validate().expect("invalid initial condition");

    let zero = || vec![0u64; max_iters + 1];
    // hit_at[t] counts runs whose first hit is exactly t.
    let hit_at = (0..n_runs)
        .into_par_iter()
        .fold(zero, |mut acc, rep| {
            let mut rng = replication_rng(seed, rep);
            let initial = init.sample(&mut rng);
            if let Some(t) = first_hit_time(&initial, params, goal, max_iters, &mut rng) {
                acc[t] += 1;
            }
            acc
        })
        .reduce(zero, merge_counts);

    let n = n_runs as f64;
    let mut cumulative = 0u64;
    let mut probs = Vec::with_capacity(max_iters + 1);
    let mut stderr = Vec::with_capacity(max_iters + 1);
    for count in hit_at {
        cumulative += count;
        let p = cumulative as f64 / n;
        probs.push(p);
        stderr.push((p * (1.0 - p) / n).sqrt());
    }

    EscapeCurve {
        t_values: (0..=max_iters).collect(),
        probs,
        n_runs,
        config: ExperimentConfig { params: *params, goal: *goal, init: *init },
        stderr,
    }
}

/// Estimate the probability of escaping within `iter_cap` iterations.
/// Returns `(pe_hat, stderr)`. For a finite cap this lower-bounds the
/// infinite-horizon escape probability; runs sharing a seed consume
/// identical draw sequences, so the estimate is nondecreasing in `iter_cap`.
pub fn estimate_pe(
    params: &SwarmParams,
    goal: &GoalRegion,
    init: &InitialCondition,
    n_runs: u64,
    iter_cap: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(iter_cap >= 1, "iteration cap must be positive");
    assert!(n_runs >= 1, "need at least one replication");
    init.validate().expect("invalid initial condition");

    let hits: u64 = (0..n_runs)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let initial = init.sample(&mut rng);
            u64::from(first_hit_time(&initial, params, goal, iter_cap, &mut rng).is_some())
        })
        .sum();

    let n = n_runs as f64;
    let p = hits as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Histogram of the position at one iteration: interior mass over uniform
/// bins spanning the open box, plus point masses on the two walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionHistogram {
    /// `n_bins + 1` edges; first is `lb`, last is `ub`.
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub atom_lb: f64,
    pub atom_ub: f64,
    /// Fraction of runs inside the goal at this iteration (walls included
    /// when a wall lies in the goal).
    pub goal_mass: f64,
}

struct HistogramCounts {
    bins: Vec<Vec<u64>>,
    atom_lb: Vec<u64>,
    atom_ub: Vec<u64>,
    goal: Vec<u64>,
}

impl HistogramCounts {
    fn zero(n_times: usize, n_bins: usize) -> Self {
        Self {
            bins: vec![vec![0; n_bins]; n_times],
            atom_lb: vec![0; n_times],
            atom_ub: vec![0; n_times],
            goal: vec![0; n_times],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.atom_lb.iter_mut().zip(other.atom_lb) {
            *a += b;
        }
        for (a, b) in self.atom_ub.iter_mut().zip(other.atom_ub) {
            *a += b;
        }
        for (a, b) in self.goal.iter_mut().zip(other.goal) {
            *a += b;
        }
        self
    }

    fn record(&mut self, t: usize, x: f64, params: &SwarmParams, goal: &GoalRegion, n_bins: usize) {
        // The clamp emits the bounds exactly; the tolerance only picks up
        // interior positions indistinguishable from a wall.
        if (x - params.lb).abs() <= 1e-12 {
            self.atom_lb[t] += 1;
        } else if (params.ub - x).abs() <= 1e-12 {
            self.atom_ub[t] += 1;
        } else {
            let idx = (((x - params.lb) / params.width()) * n_bins as f64).floor() as usize;
            self.bins[t][idx.min(n_bins - 1)] += 1;
        }
        if goal.contains(x) {
            self.goal[t] += 1;
        }
    }
}

/// Evolve `n_runs` trajectories from a common initial state for `t_max`
/// transitions (no stopping at the goal) and histogram the position at every
/// iteration. Returns `t_max + 1` histograms, index 0 being the start.
pub fn position_distribution(
    params: &SwarmParams,
    initial: AgentState,
    goal: &GoalRegion,
    t_max: usize,
    n_runs: u64,
    n_bins: usize,
    seed: u64,
) -> Vec<PositionHistogram> {
    assert!(n_bins >= 2, "need at least two bins");
    assert!(n_runs >= 1, "need at least one replication");

    let n_times = t_max + 1;
    let zero = || HistogramCounts::zero(n_times, n_bins);
    let counts = (0..n_runs)
        .into_par_iter()
        .fold(zero, |mut acc, rep| {
            let mut rng = replication_rng(seed, rep);
            let mut state = initial;
            acc.record(0, state.x, params, goal, n_bins);
            for t in 1..n_times {
                state = sample_step(&state, params, &mut rng);
                acc.record(t, state.x, params, goal, n_bins);
            }
            acc
        })
        .reduce(zero, HistogramCounts::merge);

    let mut edges = Vec::with_capacity(n_bins + 1);
    for i in 0..=n_bins {
        edges.push(params.lb + params.width() * i as f64 / n_bins as f64);
    }
    edges[0] = params.lb;
    edges[n_bins] = params.ub;

    let n = n_runs as f64;
    (0..n_times)
        .map(|t| PositionHistogram {
            bin_edges: edges.clone(),
            masses: counts.bins[t].iter().map(|&c| c as f64 / n).collect(),
            atom_lb: counts.atom_lb[t] as f64 / n,
            atom_ub: counts.atom_ub[t] as f64 / n,
            goal_mass: counts.goal[t] as f64 / n,
        })
        .collect()
}

/// Qualitative label for a stretch of a trajectory, by velocity sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    #[serde(rename = "inertial-right")]
    InertialRight,
    #[serde(rename = "inertial-left")]
    InertialLeft,
    #[serde(rename = "oscillation-turn-left")]
    OscillationTurnLeft,
    #[serde(rename = "oscillation-turn-right")]
    OscillationTurnRight,
}

/// One maximal stretch of uniform behavior; iteration indices are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSegment {
    pub kind: SegmentKind,
    pub start_iter: usize,
    pub end_iter: usize,
}

// Zero velocities carry no direction of their own: each takes the sign of
// the next signed velocity, trailing zeros take the preceding one, and an
// all-zero trajectory is treated as a single rightward drift.
fn resolved_signs(states: &[AgentState]) -> Vec<i8> {
    let mut signs: Vec<i8> = states
        .iter()
        .map(|s| {
            if s.v > 0.0 {
                1
            } else if s.v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let mut carry = 0i8;
    for s in signs.iter_mut().rev() {
        if *s != 0 {
            carry = *s;
        } else {
            *s = carry;
        }
    }
    let mut carry = 1i8;
    for s in signs.iter_mut() {
        if *s != 0 {
            carry = *s;
        } else {
            *s = carry;
        }
    }
    signs
}

/// Split a trajectory into maximal constant-velocity-sign stretches. Each
/// sign flip spends one iteration as an oscillation turn (turn-left when the
/// preceding sign was positive) and the remainder of the stretch, if any, is
/// inertial. The segments tile `0..states.len()` without gaps or overlap.
pub fn segment_behavior(traj: &Trajectory, _params: &SwarmParams) -> Vec<BehaviorSegment> {
    assert!(traj.states.len() >= 2, "need at least two states to segment");
    let signs = resolved_signs(&traj.states);
    let n = signs.len();

    let mut segments = Vec::new();
    let mut run_start = 0;
    for t in 1..=n {
        if t < n && signs[t] == signs[run_start] {
            continue;
        }
        let mut inertial_start = run_start;
        if run_start > 0 {
            let kind = if signs[run_start - 1] > 0 {
                SegmentKind::OscillationTurnLeft
            } else {
                SegmentKind::OscillationTurnRight
            };
            segments.push(BehaviorSegment { kind, start_iter: run_start, end_iter: run_start });
            inertial_start = run_start + 1;
        }
        if inertial_start < t {
            let kind = if signs[run_start] > 0 {
                SegmentKind::InertialRight
            } else {
                SegmentKind::InertialLeft
            };
            segments.push(BehaviorSegment { kind, start_iter: inertial_start, end_iter: t - 1 });
        }
        run_start = t;
    }
    segments
}

/// `f(x) = sum_i (x_i^2 - 10 cos(2 pi x_i) + 10)`; global minimum 0 at the
/// origin, local minima near the other integer lattice points.
pub fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|&xi| xi * xi - 10.0 * (2.0 * std::f64::consts::PI * xi).cos() + 10.0)
        .sum()
}

/// Inertia and acceleration coefficients for the full swarm, where the
/// attractors are live rather than frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoCoefficients {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
}

impl PsoCoefficients {
    pub fn new(omega: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(omega.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidParams(format!("omega must lie in (0, 1], got {omega}")));
        }
        if c1 <= 0.0 || c2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "acceleration coefficients must be positive, got c1={c1} c2={c2}"
            )));
        }
        Ok(Self { omega, c1, c2 })
    }
}

/// Personal-best history of a full swarm run: positions per agent, per
/// dimension, per iteration (index 0 is the start), the matching objective
/// values, and the final global best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbestHistory {
    /// `positions[agent][dim][t]`.
    pub positions: Vec<Vec<Vec<f64>>>,
    /// `objectives[agent][t]`, nonincreasing in `t` for each agent.
    pub objectives: Vec<Vec<f64>>,
    pub gbest: Vec<f64>,
    pub gbest_obj: f64,
}

/// Run a plain global-best PSO: positions start uniform in the box,
/// velocities start at zero, personal bests update as each agent moves, and
/// the global best refreshes after every agent has moved (synchronous
/// update). Positions clamp to the box per dimension; velocities do not.
/// Deterministic for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn run_full_pso<F: Fn(&[f64]) -> f64>(
    objective: F,
    lb_vec: &[f64],
    ub_vec: &[f64],
    n_agents: usize,
    dims: usize,
    t_max: usize,
    coeffs: &PsoCoefficients,
    seed: u64,
) -> PbestHistory {
    assert!(n_agents >= 1, "need at least one agent");
    assert!(dims >= 1, "need at least one dimension");
    assert_eq!(lb_vec.len(), dims, "lower-bound vector length must equal dims");
    assert_eq!(ub_vec.len(), dims, "upper-bound vector length must equal dims");
    for d in 0..dims {
        assert!(lb_vec[d] < ub_vec[d], "box must have positive width in every dimension");
    }

    let mut rng = replication_rng(seed, 0);
    let mut x: Vec<Vec<f64>> = (0..n_agents)
        .map(|_| {
            (0..dims)
                .map(|d| lb_vec[d] + (ub_vec[d] - lb_vec[d]) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut v: Vec<Vec<f64>> = vec![vec![0.0; dims]; n_agents];
    let mut pbest = x.clone();
    let mut pbest_obj: Vec<f64> = pbest.iter().map(|p| objective(p)).collect();

    let mut gbest_obj = pbest_obj[0];
    let mut gbest = pbest[0].clone();
    for i in 1..n_agents {
        if pbest_obj[i] < gbest_obj {
            gbest_obj = pbest_obj[i];
            gbest.copy_from_slice(&pbest[i]);
        }
    }

    let mut positions = vec![vec![Vec::with_capacity(t_max + 1); dims]; n_agents];
    let mut objectives = vec![Vec::with_capacity(t_max + 1); n_agents];
    let record = |positions: &mut Vec<Vec<Vec<f64>>>,
                  objectives: &mut Vec<Vec<f64>>,
                  pbest: &[Vec<f64>],
                  pbest_obj: &[f64]| {
        for i in 0..n_agents {
            for d in 0..dims {
                positions[i][d].push(pbest[i][d]);
            }
            objectives[i].push(pbest_obj[i]);
        }
    };
    record(&mut positions, &mut objectives, &pbest, &pbest_obj);

    for _ in 1..=t_max {
        for i in 0..n_agents {
            for d in 0..dims {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vel = coeffs.omega * v[i][d]
                    + coeffs.c1 * r1 * (pbest[i][d] - x[i][d])
                    + coeffs.c2 * r2 * (gbest[d] - x[i][d]);
                v[i][d] = vel;
                x[i][d] = clamp(x[i][d] + vel, lb_vec[d], ub_vec[d]);
            }
            let obj = objective(&x[i]);
            if obj < pbest_obj[i] {
                pbest_obj[i] = obj;
                pbest[i].copy_from_slice(&x[i]);
            }
        }
        for i in 0..n_agents {
            if pbest_obj[i] < gbest_obj {
                gbest_obj = pbest_obj[i];
                gbest.copy_from_slice(&pbest[i]);
            }
        }
        record(&mut positions, &mut objectives, &pbest, &pbest_obj);
    }

    PbestHistory { positions, objectives, gbest, gbest_obj }
}

/// One maximal stretch over which a personal-best coordinate stays within
/// `tolerance` of a constant, with the integer nearest its midrange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagnationInterval {
    pub agent: usize,
    pub dim: usize,
    pub start_iter: usize,
    pub end_iter: usize,
    pub nearest_integer: i64,
}

impl StagnationInterval {
    /// Number of iterations the plateau spans.
    pub fn span(&self) -> usize {
        self.end_iter - self.start_iter + 1
    }
}

/// Greedily split every personal-best coordinate series into maximal
/// plateaus whose range (max minus min) stays within `tolerance`. Each
/// iteration lands in exactly one plateau, so the intervals tile the series.
pub fn stagnation_report(history: &PbestHistory, tolerance: f64) -> Vec<StagnationInterval> {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let mut out = Vec::new();
    for (agent, per_dim) in history.positions.iter().enumerate() {
        for (dim, series) in per_dim.iter().enumerate() {
            if series.is_empty() {
                continue;
            }
            let mut start = 0;
            let mut lo = series[0];
            let mut hi = series[0];
            for t in 1..=series.len() {
                if t < series.len() && series[t].max(hi) - series[t].min(lo) <= tolerance {
                    lo = lo.min(series[t]);
                    hi = hi.max(series[t]);
                    continue;
                }
                out.push(StagnationInterval {
                    agent,
                    dim,
                    start_iter: start,
                    end_iter: t - 1,
                    nearest_integer: (0.5 * (lo + hi)).round() as i64,
                });
                if t < series.len() {
                    start = t;
                    lo = series[t];
                    hi = series[t];
                }
            }
        }
    }
    out
}

fn merge_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
