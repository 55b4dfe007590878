//! Closed-form escape-time bounds, all probabilities in natural-log domain.
//!
//! The escape argument runs in three legs: gather speed and ride inertia to
//! the upper wall, shed velocity at the wall into a small leftward window,
//! then descend under control into the goal. Each leg has an iteration cap
//! and a log-probability floor; the composed pair (t_e0, log_p_e0) yields a
//! geometric lower bound on escaping within n blocks of t_e0 iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{d0, log_h_bound, v_upper_bound};
use crate::model::{AgentState, GoalRegion, SwarmParams};

/// Velocity window `(-mu*d0, -lambda*d0)` the wall phase aims for,
/// as fractions of d0. Requires `0 < lambda < mu <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct OscillationWindow {
    lambda: f64,
    mu: f64,
}

impl OscillationWindow {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite() && 0.0 < lambda && lambda < mu && mu <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "oscillation window must satisfy 0 < lambda < mu <= 1/2, got ({lambda}, {mu})"
            )));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for OscillationWindow {
    fn default() -> Self {
        Self { lambda: 1.0 / 40.0, mu: 1.0 / 20.0 }
    }
}

impl TryFrom<(f64, f64)> for OscillationWindow {
    type Error = Error;
    fn try_from(t: (f64, f64)) -> Result<Self> {
        Self::new(t.0, t.1)
    }
}

impl From<OscillationWindow> for (f64, f64) {
    fn from(w: OscillationWindow) -> Self {
        (w.lambda, w.mu)
    }
}

/// Iteration caps and log-probability floors for the three escape legs and
/// their composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeBounds {
    pub t_0a: u64,
    pub t_ab: u64,
    pub t_bg: u64,
    pub t_e0: u64,
    pub log_p_0a: f64,
    pub log_p_ab: f64,
    pub log_p_bg: f64,
    pub log_p_e0: f64,
}

/// d0 with the shared degeneracy guard: attractors closer than 1e-12 of the
/// box width make every count astronomically large and meaningless.
fn guarded_d0(params: &SwarmParams) -> Result<f64> {
    let d = d0(params);
    if d < 1e-12 * params.width() {
        return Err(Error::DegenerateAttractors(format!(
            "d0 = {d} is below 1e-12 of the box width; escape counts are unbounded"
        )));
    }
    Ok(d)
}

fn ceil_count(x: f64) -> u64 {
    debug_assert!(x.is_finite() && x > 0.0);
    x.ceil() as u64
}

/// Leg 1: from adequate initial speed to the upper wall.
/// `t_0a = 13 * ceil(w/d0)`, log-probability `t_0a * ln h(d0^2 / (128 w))`.
pub fn step1_bounds(params: &SwarmParams) -> Result<(u64, f64)> {
    let d = guarded_d0(params)?;
    let w = params.width();
    let t_0a = 13 * ceil_count(w / d);
    let log_p = t_0a as f64 * log_h_bound(params, d * d / (128.0 * w));
    Ok((t_0a, log_p))
}

/// Leg 2: shed wall velocity into the window.
/// `t_ab = 2 * ceil(v_u/d0)`; the first factor is the window width's h-mass.
pub fn step2_bounds(params: &SwarmParams, window: &OscillationWindow) -> Result<(u64, f64)> {
    let d = guarded_d0(params)?;
    let t_ab = 2 * ceil_count(v_upper_bound(params) / d);
    let log_p =
        log_h_bound(params, (window.mu - window.lambda) * d) + t_ab as f64 * log_h_bound(params, d / 4.0);
    Ok((t_ab, log_p))
}

/// Leg 3: controlled descent from the window into the goal.
/// `t_bg = ceil(80 w / d0)`.
pub fn step3_bounds(params: &SwarmParams, goal: &GoalRegion) -> Result<(u64, f64)> {
    let d = guarded_d0(params)?;
    let w = params.width();
    let t_bg = ceil_count(80.0 * w / d);
    let log_p = t_bg as f64 * log_h_bound(params, 1e-5 * d * d * d / (w * w))
        + log_h_bound(params, goal.width());
    Ok((t_bg, log_p))
}

/// Composed bound: within any t_e0 consecutive iterations the agent escapes
/// into the goal with probability at least exp(log_p_e0), from any state.
/// Only proven for omega = 1.
pub fn escape_bounds(params: &SwarmParams, goal: &GoalRegion) -> Result<EscapeBounds> {
    if params.omega != 1.0 {
        return Err(Error::BoundNotApplicable(format!(
            "escape bounds hold only for omega = 1, got {}",
            params.omega
        )));
    }
    let d = guarded_d0(params)?;
    let w = params.width();
    let window = OscillationWindow::default();
    let (t_0a, log_p_0a) = step1_bounds(params)?;
    let (t_ab, log_p_ab) = step2_bounds(params, &window)?;
    let (t_bg, log_p_bg) = step3_bounds(params, goal)?;
    let t_e0 = ceil_count((2.0 * (params.c1 + params.c2) + 100.0 * w) / d);
    let log_p_e0 = t_e0 as f64 * log_h_bound(params, 1e-5 * d * d * d / (w * w))
        + log_h_bound(params, goal.width());
    Ok(EscapeBounds { t_0a, t_ab, t_bg, t_e0, log_p_0a, log_p_ab, log_p_bg, log_p_e0 })
}

/// log(1 - (1 - p_e0)^n): probability of escaping within n blocks of t_e0
/// iterations. Stable for log_p_e0 anywhere down to -1e9 and lower.
pub fn pe_lower_bound(bounds: &EscapeBounds, n: u64) -> f64 {
    let l = bounds.log_p_e0;
    if l >= 0.0 {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    if l + ln_n < -30.0 {
        // 1 - (1-p)^n = n p (1 + O(n p)); the correction is below f64 noise.
        return ln_n + l;
    }
    let p = l.exp();
    let q = n as f64 * (-p).ln_1p();
    (-q.exp_m1()).ln()
}

/// Membership in the wall-exit window: previous position at the upper wall
/// (absolute tolerance 1e-12) and velocity strictly inside (-mu d0, -lambda d0).
pub fn sb_membership(
    prev_x: f64,
    state: &AgentState,
    params: &SwarmParams,
    window: &OscillationWindow,
) -> bool {
    let d = d0(params);
    (prev_x - params.ub).abs() <= 1e-12
        && -window.mu * d < state.v
        && state.v < -window.lambda * d
}
