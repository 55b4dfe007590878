//! Dynamics of a stagnated agent along one dimension.
//!
//! During stagnation the personal and global best positions stop moving, so
//! a single agent's coordinate evolves as a time-homogeneous Markov chain:
//! the velocity update draws two fresh uniforms each step, the position is
//! the previous one plus the new velocity, clamped to the box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed environment of the stagnated agent: inertia weight, acceleration
/// coefficients, the box, and the two (frozen) attractors.
///
/// Labeling convention: the attractors are interchangeable, so the smaller
/// one is always called `pb` and the larger `gb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub lb: f64,
    pub ub: f64,
    pub pb: f64,
    pub gb: f64,
}

impl SwarmParams {
    pub fn new(omega: f64, c1: f64, c2: f64, lb: f64, ub: f64, pb: f64, gb: f64) -> Result<Self> {
        let p = Self { omega, c1, c2, lb, ub, pb, gb };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega", self.omega),
            ("c1", self.c1),
            ("c2", self.c2),
            ("lb", self.lb),
            ("ub", self.ub),
            ("pb", self.pb),
            ("gb", self.gb),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "omega must lie in (0, 1], got {}",
                self.omega
            )));
        }
        if self.c1 <= 0.0 || self.c2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "acceleration coefficients must be positive, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if !(self.lb < self.ub) {
            return Err(Error::InvalidParams(format!(
                "box must have positive width, got [{}, {}]",
                self.lb, self.ub
            )));
        }
        if !(self.lb <= self.pb && self.pb <= self.gb && self.gb <= self.ub) {
            return Err(Error::InvalidParams(format!(
                "attractors must satisfy lb <= pb <= gb <= ub, got lb={} pb={} gb={} ub={}",
                self.lb, self.pb, self.gb, self.ub
            )));
        }
        Ok(())
    }

    /// Box width `ub - lb`.
    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }
}

/// Target interval `[l_g, u_g]` the agent should reach, inside the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub l_g: f64,
    pub u_g: f64,
}

impl GoalRegion {
    pub fn new(l_g: f64, u_g: f64, params: &SwarmParams) -> Result<Self> {
        if !(l_g.is_finite() && u_g.is_finite()) {
            return Err(Error::InvalidGoal(format!("bounds must be finite, got [{l_g}, {u_g}]")));
        }
        if !(l_g < u_g) {
            return Err(Error::InvalidGoal(format!(
                "goal must have positive width, got [{l_g}, {u_g}]"
            )));
        }
        if l_g < params.lb || u_g > params.ub {
            return Err(Error::InvalidGoal(format!(
                "goal [{l_g}, {u_g}] must lie inside the box [{}, {}]",
                params.lb, params.ub
            )));
        }
        Ok(Self { l_g, u_g })
    }

    pub fn width(&self) -> f64 {
        self.u_g - self.l_g
    }

    pub fn contains(&self, x: f64) -> bool {
        self.l_g <= x && x <= self.u_g
    }
}

/// Agent state `[x, v]`: current position and the velocity that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub v: f64,
}

impl AgentState {
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }
}

/// Absorbing walls: positions beyond a boundary stick to that boundary.
pub fn clamp(x: f64, lb: f64, ub: f64) -> f64 {
    if x <= lb {
        lb
    } else if x >= ub {
        ub
    } else {
        x
    }
}

/// One transition with explicit uniform draws `r1, r2` in `[0, 1]`.
///
/// The stored velocity is the raw update, not the post-clamp displacement;
/// the next step uses it unchanged even when the position was clamped.
pub fn step(state: &AgentState, params: &SwarmParams, r1: f64, r2: f64) -> AgentState {
    let v = params.omega * state.v
        + params.c1 * r1 * (params.pb - state.x)
        + params.c2 * r2 * (params.gb - state.x);
    AgentState { x: clamp(state.x + v, params.lb, params.ub), v }
}

/// One transition with draws taken from `rng`.
pub fn sample_step<R: Rng + ?Sized>(state: &AgentState, params: &SwarmParams, rng: &mut R) -> AgentState {
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    step(state, params, r1, r2)
}

/// A simulated path. `states[0]` is the initial state; `hit_time` is the
/// first index whose position lies in the goal, if any occurred before the
/// iteration cap. The path stops at the hit, so
/// `states.len() == min(hit_time, max_iters) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<AgentState>,
    pub hit_time: Option<usize>,
}

/// Simulate until the goal is hit or `max_iters` transitions have run.
/// Index 0 counts: an agent born inside the goal has `hit_time == Some(0)`.
pub fn run_trajectory<R: Rng + ?Sized>(
    initial: &AgentState,
    params: &SwarmParams,
    goal: &GoalRegion,
    max_iters: usize,
    rng: &mut R,
) -> Trajectory {
    let mut states = Vec::with_capacity(16.min(max_iters + 1));
    states.push(*initial);
    if goal.contains(initial.x) {
        return Trajectory { states, hit_time: Some(0) };
    }
    let mut current = *initial;
    for t in 1..=max_iters {
        current = sample_step(&current, params, rng);
        states.push(current);
        if goal.contains(current.x) {
            return Trajectory { states, hit_time: Some(t) };
        }
    }
    Trajectory { states, hit_time: None }
}

/// First goal-hit index, or `None` if the cap is reached first.
/// Identical law to [`run_trajectory`] without storing the path.
pub fn first_hit_time<R: Rng + ?Sized>(
    initial: &AgentState,
    params: &SwarmParams,
    goal: &GoalRegion,
    max_iters: usize,
    rng: &mut R,
) -> Option<usize> {
    if goal.contains(initial.x) {
        return Some(0);
    }
    let mut current = *initial;
    for t in 1..=max_iters {
        current = sample_step(&current, params, rng);
        if goal.contains(current.x) {
            return Some(t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_0_20(omega: f64, c: f64) -> SwarmParams {
        SwarmParams::new(omega, c, c, 0.0, 20.0, 3.0, 4.0).unwrap()
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(SwarmParams::new(0.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0).is_err());
        assert!(SwarmParams::new(1.1, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0).is_err());
        assert!(SwarmParams::new(1.0, -2.0, 2.0, 0.0, 20.0, 3.0, 4.0).is_err());
        assert!(SwarmParams::new(1.0, 2.0, 2.0, 20.0, 0.0, 3.0, 4.0).is_err());
        assert!(SwarmParams::new(1.0, 2.0, 2.0, 0.0, 20.0, 4.0, 3.0).is_err());
        assert!(SwarmParams::new(1.0, 2.0, 2.0, 0.0, 20.0, -1.0, 4.0).is_err());
        assert!(SwarmParams::new(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 21.0).is_err());
        assert!(SwarmParams::new(f64::NAN, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0).is_err());
        assert!(SwarmParams::new(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 3.0).is_ok());
    }

    #[test]
    fn goal_region_validation() {
        let p = params_0_20(1.0, 2.0);
        assert!(GoalRegion::new(19.0, 20.0, &p).is_ok());
        assert!(GoalRegion::new(20.0, 19.0, &p).is_err());
        assert!(GoalRegion::new(19.0, 19.0, &p).is_err());
        assert!(GoalRegion::new(-0.5, 1.0, &p).is_err());
        assert!(GoalRegion::new(19.5, 20.5, &p).is_err());
    }

    #[test]
    fn clamp_sticks_to_walls() {
        assert_eq!(clamp(-3.0, 0.0, 20.0), 0.0);
        assert_eq!(clamp(25.0, 0.0, 20.0), 20.0);
        assert_eq!(clamp(7.5, 0.0, 20.0), 7.5);
        assert_eq!(clamp(0.0, 0.0, 20.0), 0.0);
        assert_eq!(clamp(20.0, 0.0, 20.0), 20.0);
    }

    #[test]
    fn step_matches_hand_computation() {
        // x=10, v=1, omega=1, c1=c2=2, pb=3, gb=4, box [0,10], r1=r2=1:
        // v' = 1 + 2(3-10) + 2(4-10) = -25, x' = clamp(10-25) = 0.
        let p = SwarmParams::new(1.0, 2.0, 2.0, 0.0, 10.0, 3.0, 4.0).unwrap();
        let s = step(&AgentState::new(10.0, 1.0), &p, 1.0, 1.0);
        assert_eq!(s.v, -25.0);
        assert_eq!(s.x, 0.0);
    }

    #[test]
    fn inertia_only_steps_form_arithmetic_sequence() {
        // r1=r2=0 with omega=1 preserves velocity exactly.
        let p = SwarmParams::new(1.0, 2.0, 2.0, 0.0, 10.0, 3.0, 4.0).unwrap();
        assert_eq!(step(&AgentState::new(1.0, 1.0), &p, 0.0, 0.0), AgentState::new(2.0, 1.0));
        assert_eq!(step(&AgentState::new(9.0, 1.0), &p, 0.0, 0.0), AgentState::new(10.0, 1.0));
    }

    #[test]
    fn velocity_survives_clamping_unchanged() {
        let p = SwarmParams::new(1.0, 2.0, 2.0, 0.0, 10.0, 3.0, 4.0).unwrap();
        let s = step(&AgentState::new(10.0, 1.0), &p, 1.0, 1.0);
        // The raw update is kept even though the position stuck to the wall.
        assert_eq!(s.v, -25.0);
        let s2 = step(&s, &p, 0.0, 0.0);
        assert_eq!(s2.v, -25.0);
        assert_eq!(s2.x, 0.0);
    }

    #[test]
    fn fixed_point_when_attractors_coincide_at_agent() {
        let p = SwarmParams::new(0.5, 2.0, 2.0, 0.0, 20.0, 3.0, 3.0).unwrap();
        // Resting on the common attractor is an exact fixed point.
        let mut s = AgentState::new(3.0, 0.0);
        for _ in 0..10 {
            s = step(&s, &p, 0.3, 0.9);
            assert_eq!(s, AgentState::new(3.0, 0.0));
        }
        // With the attraction terms drawn to zero, only inertia remains.
        let mut s = AgentState::new(3.0, 0.8);
        for _ in 0..10 {
            s = step(&s, &p, 0.0, 0.0);
        }
        assert!((s.v - 0.8 * 0.5f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn forced_inertia_walk_hits_goal_at_five() {
        // Positions 1,2,3,4,5,6 under r1=r2=0; x(5)=6 lands in [5.8, 6.2].
        let p = params_0_20(1.0, 2.0);
        let goal = GoalRegion::new(5.8, 6.2, &p).unwrap();
        let mut s = AgentState::new(1.0, 1.0);
        let mut hit = None;
        for t in 1..=10 {
            s = step(&s, &p, 0.0, 0.0);
            if goal.contains(s.x) {
                hit = Some(t);
                break;
            }
        }
        assert_eq!(hit, Some(5));
    }

    #[test]
    fn trajectory_hit_at_time_zero() {
        let p = params_0_20(1.0, 2.0);
        let goal = GoalRegion::new(19.0, 20.0, &p).unwrap();
        let mut rng = crate::rng::replication_rng(1, 0);
        let traj = run_trajectory(&AgentState::new(19.5, 0.0), &p, &goal, 100, &mut rng);
        assert_eq!(traj.hit_time, Some(0));
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn trajectory_length_matches_hit_time() {
        let p = params_0_20(1.0, 2.0);
        let goal = GoalRegion::new(19.0, 20.0, &p).unwrap();
        for rep in 0..50 {
            let mut rng = crate::rng::replication_rng(3, rep);
            let traj = run_trajectory(&AgentState::new(1.0, 0.0), &p, &goal, 500, &mut rng);
            match traj.hit_time {
                Some(t) => {
                    assert_eq!(traj.states.len(), t + 1);
                    assert!(goal.contains(traj.states[t].x));
                    for s in &traj.states[..t] {
                        assert!(!goal.contains(s.x));
                    }
                }
                None => assert_eq!(traj.states.len(), 501),
            }
        }
    }

    #[test]
    fn first_hit_agrees_with_trajectory() {
        let p = params_0_20(1.0, 2.5);
        let goal = GoalRegion::new(19.0, 20.0, &p).unwrap();
        for rep in 0..50 {
            let t1 = {
                let mut rng = crate::rng::replication_rng(9, rep);
                run_trajectory(&AgentState::new(1.0, 0.5), &p, &goal, 300, &mut rng).hit_time
            };
            let t2 = {
                let mut rng = crate::rng::replication_rng(9, rep);
                first_hit_time(&AgentState::new(1.0, 0.5), &p, &goal, 300, &mut rng)
            };
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn positions_stay_inside_box() {
        let p = params_0_20(0.9, 2.4);
        let goal = GoalRegion::new(19.0, 20.0, &p).unwrap();
        for rep in 0..20 {
            let mut rng = crate::rng::replication_rng(5, rep);
            let traj = run_trajectory(&AgentState::new(1.0, 0.0), &p, &goal, 200, &mut rng);
            for s in &traj.states {
                assert!(s.x >= p.lb && s.x <= p.ub);
            }
        }
    }
}
