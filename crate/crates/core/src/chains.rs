//! Constructive interval chains for the three escape legs, plus a numeric
//! feasibility verifier.
//!
//! A chain is a sequence of closed intervals, each one-step reachable from
//! its predecessor with probability bounded below by the kernel floor h.
//! Builders emit chains whose transitions are tight by construction (one
//! covering-set corner lands exactly on the next interval); the verifier
//! re-checks every transition numerically with signed slacks.

use serde::{Deserialize, Serialize};

use crate::bounds::{sb_membership, OscillationWindow};
use crate::error::{Error, Result};
use crate::kernel::{d0, log_h_bound, v_upper_bound};
use crate::model::{AgentState, GoalRegion, SwarmParams};

/// Closed interval, serialized as a `[lo, hi]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(p: [f64; 2]) -> Result<Self> {
        if !(p[0].is_finite() && p[1].is_finite() && p[0] <= p[1]) {
            return Err(Error::InvalidParams(format!(
                "interval endpoints must be finite with lo <= hi, got [{}, {}]",
                p[0], p[1]
            )));
        }
        Ok(Self { lo: p[0], hi: p[1] })
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    #[serde(rename = "position-chain")]
    Position,
    #[serde(rename = "velocity-chain")]
    Velocity,
}

/// What the final interval certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalLabel {
    /// The last interval clears the upper boundary; the clamp parks the agent on it.
    UpperWall,
    /// The last interval sits at or above the attractor midpoint.
    Midpoint,
    /// The last interval is exactly the leftward exit-velocity window.
    #[serde(rename = "oscillation_window")]
    Window,
    /// The last interval is contained in the goal region.
    Goal,
    /// The last interval has descended to the upper branch threshold.
    Handoff,
}

/// Which leg's construction produced the chain; fixes the travel direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainTag {
    WallRun,
    WallBrake,
    GoalDescent,
}

/// An ordered transition chain. Position chains carry one branch fraction
/// per interval (the lambda of the transition into it); velocity chains
/// carry none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: ChainKind,
    pub origin: AgentState,
    pub intervals: Vec<Interval>,
    pub lambdas: Vec<f64>,
    pub terminal: TerminalLabel,
    pub tag: ChainTag,
    pub goal: Option<GoalRegion>,
    pub window: Option<OscillationWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCondition {
    pub condition: String,
    pub index: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub failed_conditions: Vec<FailedCondition>,
    pub log_prob_lower_bound: f64,
}

/// One-step position covering set: the interval of next positions reachable
/// from any random draw, given the previous and current positions. Branches
/// on which side of `lambda*pb + (1-lambda)*gb` the current position sits.
pub fn covering_set_position(
    x_prev: f64,
    x_curr: f64,
    params: &SwarmParams,
    lambda: f64,
) -> Interval {
    let base = 2.0 * x_curr - x_prev;
    let delta = params.gb - params.pb;
    if x_curr > lambda * params.pb + (1.0 - lambda) * params.gb {
        Interval { lo: base - params.c1 * (1.0 - lambda) * delta, hi: base }
    } else {
        Interval { lo: base, hi: base + params.c2 * lambda * delta }
    }
}

/// One-step velocity covering set for an agent parked at the upper wall.
pub fn covering_set_velocity(v_curr: f64, params: &SwarmParams) -> Interval {
    Interval { lo: v_curr - d0(params), hi: v_curr }
}

/// omega = 1 and non-degenerate attractor gap, shared by all builders.
fn chain_regime(params: &SwarmParams) -> Result<f64> {
    if params.omega != 1.0 {
        return Err(Error::BoundNotApplicable(format!(
            "chain constructions hold only for omega = 1, got {}",
            params.omega
        )));
    }
    let d = d0(params);
    if d < 1e-12 * params.width() {
        return Err(Error::DegenerateAttractors(format!(
            "d0 = {d} is below 1e-12 of the box width; no chain geometry exists"
        )));
    }
    Ok(d)
}

fn cap_error() -> Error {
    Error::PreconditionViolated("chain construction exceeded its iteration cap".into())
}

/// Decelerating rightward envelope: intervals [a_t - delta, a_t] with
/// a_t = x0 + t v0 - t(t-1) delta, stopping at the first envelope point past
/// ub. The corner identity 2 a_t - a_{t-1} = a_{t+1} + 2 delta makes every
/// transition exactly tight on the upper covering corner. A final interval
/// astride the wall is clipped to its at-or-above-ub part: only that part
/// pins the agent to the wall, and it stays inside the covering set. Every
/// interval before the capture sits inside the box, which the transition
/// arithmetic needs (clamping never moves an in-box position).
fn ascend_to_wall(
    x0: f64,
    v0: f64,
    lambda: f64,
    d: f64,
    params: &SwarmParams,
    cap: usize,
    intervals: &mut Vec<Interval>,
    lambdas: &mut Vec<f64>,
) -> Result<()> {
    let delta = ((1.0 - lambda) * d / 4.0).min(d * d / (128.0 * params.width()));
    let mut t = 0u64;
    loop {
        t += 1;
        if intervals.len() >= cap {
            return Err(cap_error());
        }
        let tf = t as f64;
        let a_t = x0 + tf * v0 - tf * (tf - 1.0) * delta;
        if a_t > params.ub {
            intervals.push(Interval { lo: (a_t - delta).max(params.ub), hi: a_t });
            lambdas.push(lambda);
            return Ok(());
        }
        intervals.push(Interval { lo: a_t - delta, hi: a_t });
        lambdas.push(lambda);
    }
}

/// Leg 1: from adequate rightward velocity anywhere in the box to the upper
/// wall. Above the quarter threshold a single decelerating run suffices;
/// below it, an accelerating run first climbs past the midpoint, then hands
/// its worst-case position and velocity to a second run.
pub fn build_step1_chain(origin: AgentState, params: &SwarmParams) -> Result<ChainSpec> {
    let d = chain_regime(params)?;
    if !(origin.v >= d / 4.0) {
        return Err(Error::PreconditionViolated(format!(
            "wall run needs initial velocity >= d0/4 = {}, got {}",
            d / 4.0,
            origin.v
        )));
    }
    if !(origin.x >= params.lb && origin.x <= params.ub) {
        return Err(Error::PreconditionViolated(format!(
            "origin position {} outside the box", origin.x
        )));
    }
    let cap = 13 * (params.width() / d).ceil() as usize + 8;
    let thr = 0.25 * params.pb + 0.75 * params.gb;
    let mut intervals = Vec::new();
    let mut lambdas = Vec::new();
    if origin.x >= thr {
        ascend_to_wall(origin.x, origin.v, 0.25, d, params, cap, &mut intervals, &mut lambdas)?;
    } else {
        // Accelerating climb [b_t, b_t + delta_b]; the first interval poking
        // above the quarter threshold is the handoff. A step that crosses
        // the wall outright ends the chain as a capture instead, clipped to
        // its at-or-above-ub part when it lands astride the wall.
        let delta_b = d / 16.0;
        let mut t = 0u64;
        let mut handoff = None;
        loop {
            t += 1;
            if intervals.len() >= cap {
                return Err(cap_error());
            }
            let tf = t as f64;
            let b_t = origin.x + tf * origin.v + tf * (tf - 1.0) * delta_b;
            if b_t + delta_b > params.ub {
                intervals.push(Interval { lo: b_t.max(params.ub), hi: b_t + delta_b });
                lambdas.push(0.25);
                break;
            }
            intervals.push(Interval { lo: b_t, hi: b_t + delta_b });
            lambdas.push(0.25);
            if b_t + delta_b >= thr {
                // The next run must ascend from the covering corner of this
                // interval (its top), with the worst-case carry velocity out
                // of the last two intervals; anchoring anywhere else leaves
                // the second post-junction transition short by delta_b.
                let v_hand = if t == 1 {
                    origin.v - delta_b
                } else {
                    origin.v + (2.0 * tf - 4.0) * delta_b
                };
                handoff = Some((b_t + delta_b, v_hand));
                break;
            }
        }
        if let Some((x_hand, v_hand)) = handoff {
            ascend_to_wall(x_hand, v_hand, 0.5, d, params, cap, &mut intervals, &mut lambdas)?;
        }
    }
    Ok(ChainSpec {
        kind: ChainKind::Position,
        origin,
        intervals,
        lambdas,
        terminal: TerminalLabel::UpperWall,
        tag: ChainTag::WallRun,
        goal: None,
        window: None,
    })
}

/// Leg 2: shed rightward velocity at the wall down into the leftward exit
/// window. K half-open-down steps of size v/K land exactly on zero, then
/// one more step reaches the window.
pub fn build_step2_chain(
    origin: AgentState,
    params: &SwarmParams,
    window: &OscillationWindow,
) -> Result<ChainSpec> {
    let d = chain_regime(params)?;
    if !((origin.x - params.ub).abs() <= 1e-12 && origin.v > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "wall brake needs the agent parked at the upper wall with rightward velocity, got ({}, {})",
            origin.x, origin.v
        )));
    }
    if origin.v > v_upper_bound(params) {
        return Err(Error::PreconditionViolated(format!(
            "velocity {} exceeds the kinematic bound {}",
            origin.v,
            v_upper_bound(params)
        )));
    }
    // Rounding up keeps every gap within d0: per-step drop v/K <= 2 d0 / 3.
    let k = (3.0 * origin.v / (2.0 * d)).ceil() as u64;
    let step = origin.v / k as f64;
    let mut intervals = Vec::with_capacity(k as usize + 1);
    for t in 1..=k {
        let tf = t as f64;
        intervals.push(Interval {
            lo: origin.v - tf * step,
            hi: origin.v - (tf - 0.5) * step,
        });
    }
    intervals.push(Interval { lo: -window.mu() * d, hi: -window.lambda() * d });
    Ok(ChainSpec {
        kind: ChainKind::Velocity,
        origin,
        intervals,
        lambdas: Vec::new(),
        terminal: TerminalLabel::Window,
        tag: ChainTag::WallBrake,
        goal: None,
        window: Some(*window),
    })
}

/// Leg 3: from a fresh wall exit, descend under control into the goal.
/// When the goal hugs the wall the origin is already inside it; otherwise a
/// decelerating descent aims the last interval exactly at the goal's upper
/// edge, with a two-run split (and a handoff) when the goal lies below the
/// lower branch anchor.
pub fn build_step3_chain(
    origin_prev_x: f64,
    origin: AgentState,
    params: &SwarmParams,
    goal: &GoalRegion,
    window: &OscillationWindow,
) -> Result<ChainSpec> {
    let d = chain_regime(params)?;
    if !sb_membership(origin_prev_x, &origin, params, window) {
        return Err(Error::PreconditionViolated(format!(
            "goal descent needs a fresh wall exit: previous position at ub, velocity in (-{}, -{})",
            window.mu() * d,
            window.lambda() * d
        )));
    }
    let speed = -origin.v;
    let mut intervals = Vec::new();
    let mut lambdas = Vec::new();
    let cap = (80.0 * params.width() / d).ceil() as usize + 8;

    if params.ub - goal.u_g <= d / 3.0 {
        if !goal.contains(origin.x) {
            return Err(Error::PreconditionViolated(format!(
                "goal hugs the wall but the origin position {} is outside it",
                origin.x
            )));
        }
        // Direct membership: nothing to construct.
    } else if goal.u_g >= 0.75 * params.pb + 0.25 * params.gb {
        descend_onto(params.ub, speed, goal.u_g, Some(goal.l_g), 0.75, cap, &mut intervals, &mut lambdas)?;
    } else {
        // Two runs: upper-branch descent to the quarter threshold, then a
        // lower-branch descent from the worst-case handoff state.
        let thr = 0.25 * params.pb + 0.75 * params.gb;
        let t2 = descend_onto(params.ub, speed, thr, None, 0.75, cap, &mut intervals, &mut lambdas)?;
        // The lower run descends from the covering corner of the junction
        // interval (its bottom, one width below the threshold), with the
        // worst-case carry speed out of the last two intervals.
        let delta_b = intervals[0].width();
        let x_hand = thr - delta_b;
        let speed_hand = speed + (2.0 * t2 as f64 - 4.0) * delta_b;
        let t3 = ((x_hand - goal.u_g) / speed_hand).floor() as i64 + 1;
        if t3 < 2 {
            return Err(Error::DegenerateChain(
                "velocity too large for this goal geometry".into(),
            ));
        }
        if intervals.len() + t3 as usize > cap {
            return Err(cap_error());
        }
        let t3f = t3 as f64;
        let delta_c = (goal.u_g - x_hand + t3f * speed_hand) / (t3f * (t3f - 1.0) + 1.0);
        for t in 1..=t3 {
            let tf = t as f64;
            let c_t = x_hand - tf * speed_hand + tf * (tf - 1.0) * delta_c;
            let lo = if t == t3 { c_t.max(goal.l_g) } else { c_t };
            intervals.push(Interval { lo, hi: c_t + delta_c });
            lambdas.push(0.25);
        }
    }
    Ok(ChainSpec {
        kind: ChainKind::Position,
        origin,
        intervals,
        lambdas,
        terminal: TerminalLabel::Goal,
        tag: ChainTag::GoalDescent,
        goal: Some(*goal),
        window: Some(*window),
    })
}

/// Decelerating leftward envelope from the wall: intervals [b_t - delta, b_t]
/// with b_t = ub - (t+1) speed - t(t-1) delta, and delta chosen so the run
/// closes exactly on `target` at its final step. `clip_lo` clips the final
/// interval's lower end (goal landing); returns the number of steps.
fn descend_onto(
    ub: f64,
    speed: f64,
    target: f64,
    clip_lo: Option<f64>,
    lambda: f64,
    cap: usize,
    intervals: &mut Vec<Interval>,
    lambdas: &mut Vec<f64>,
) -> Result<i64> {
    let span = ub - target;
    let steps = (span / speed).floor() as i64 - 2;
    if steps < 2 {
        return Err(Error::DegenerateChain(
            "velocity too large for this goal geometry".into(),
        ));
    }
    if intervals.len() + steps as usize > cap {
        return Err(cap_error());
    }
    let sf = steps as f64;
    let delta = (span - (sf + 1.0) * speed) / (sf * (sf - 1.0));
    for t in 1..=steps {
        let tf = t as f64;
        let b_t = ub - (tf + 1.0) * speed - tf * (tf - 1.0) * delta;
        let mut lo = b_t - delta;
        if t == steps {
            if let Some(floor) = clip_lo {
                lo = lo.max(floor);
            }
        }
        intervals.push(Interval { lo, hi: b_t });
        lambdas.push(lambda);
    }
    Ok(steps)
}

/// Sum of per-interval log floors; the chain's log-probability lower bound.
pub fn chain_log_prob(chain: &ChainSpec, params: &SwarmParams) -> f64 {
    chain.intervals.iter().map(|iv| log_h_bound(params, iv.width())).sum()
}

/// Numerically re-checks a chain: interval sanity, strict monotone ordering
/// in the tag's travel direction, corner-point covering-set containment for
/// every transition, and the terminal condition. Failures are reported with
/// signed slacks, never thrown; strict inequalities get a tolerance of
/// 1e-9 of the box width.
pub fn verify_chain(chain: &ChainSpec, params: &SwarmParams) -> FeasibilityReport {
    let tol = 1e-9 * params.width();
    let mut failed = Vec::new();

    let shape_ok = match chain.kind {
        ChainKind::Velocity => {
            chain.tag == ChainTag::WallBrake
                && chain.lambdas.is_empty()
                && chain.terminal == TerminalLabel::Window
        }
        ChainKind::Position => {
            chain.tag != ChainTag::WallBrake
                && chain.lambdas.len() == chain.intervals.len()
                && chain.terminal != TerminalLabel::Window
        }
    };
    if !shape_ok {
        failed.push(FailedCondition {
            condition: "chain-shape".into(),
            index: 0,
            slack: f64::NEG_INFINITY,
        });
    } else {
        match chain.kind {
            ChainKind::Position => verify_position(chain, params, tol, &mut failed),
            ChainKind::Velocity => verify_velocity(chain, params, tol, &mut failed),
        }
    }

    FeasibilityReport {
        feasible: failed.is_empty(),
        failed_conditions: failed,
        log_prob_lower_bound: chain_log_prob(chain, params),
    }
}

fn point(x: f64) -> Interval {
    Interval { lo: x, hi: x }
}

fn verify_position(
    chain: &ChainSpec,
    params: &SwarmParams,
    tol: f64,
    failed: &mut Vec<FailedCondition>,
) {
    let delta_attr = params.gb - params.pb;
    // Two-point prelude: the covering set needs the previous position, which
    // for omega = 1 is x - v.
    let mut seq = Vec::with_capacity(chain.intervals.len() + 2);
    seq.push(point(chain.origin.x - chain.origin.v));
    seq.push(point(chain.origin.x));
    seq.extend(chain.intervals.iter().copied());
    let upward = chain.tag == ChainTag::WallRun;

    for i in 1..seq.len() {
        let (cur, next) = (seq[i - 1], seq[i]);
        let t_idx = i - 1;
        if next.lo > next.hi {
            failed.push(FailedCondition {
                condition: "interval-order".into(),
                index: t_idx,
                slack: next.hi - next.lo,
            });
        }
        let slack = if upward { next.lo - cur.hi } else { cur.lo - next.hi };
        if slack < -tol {
            failed.push(FailedCondition {
                condition: "monotonic-ordering".into(),
                index: t_idx,
                slack,
            });
        }
    }

    // Intervals other than a wall-capture terminal must sit inside the box:
    // the transition arithmetic identifies velocities with position
    // differences, which clamping would break.
    for (k, iv) in chain.intervals.iter().enumerate() {
        let s_lo = iv.lo - params.lb;
        if s_lo < -tol {
            failed.push(FailedCondition {
                condition: "box-lower".into(),
                index: k,
                slack: s_lo,
            });
        }
        let wall_capture =
            chain.terminal == TerminalLabel::UpperWall && k == chain.intervals.len() - 1;
        if !wall_capture {
            let s_hi = params.ub - iv.hi;
            if s_hi < -tol {
                failed.push(FailedCondition {
                    condition: "box-upper".into(),
                    index: k,
                    slack: s_hi,
                });
            }
        }
    }

    for i in 2..seq.len() {
        let (prev, cur, next) = (seq[i - 2], seq[i - 1], seq[i]);
        let t_idx = i - 1;
        let lambda = chain.lambdas[i - 2];
        if !(lambda > 0.0 && lambda < 1.0) {
            failed.push(FailedCondition {
                condition: "branch-side".into(),
                index: t_idx,
                slack: f64::NEG_INFINITY,
            });
            continue;
        }
        let thr = lambda * params.pb + (1.0 - lambda) * params.gb;
        // The branch is decided by the source interval's side of the
        // threshold; a source straddling it has no single covering set.
        let (e_lo_max, e_hi_min) = if cur.hi <= thr + tol {
            (
                2.0 * cur.hi - prev.lo,
                2.0 * cur.lo - prev.hi + params.c2 * lambda * delta_attr,
            )
        } else if cur.lo >= thr - tol {
            (
                2.0 * cur.hi - prev.lo - params.c1 * (1.0 - lambda) * delta_attr,
                2.0 * cur.lo - prev.hi,
            )
        } else {
            failed.push(FailedCondition {
                condition: "branch-side".into(),
                index: t_idx,
                slack: -(thr - cur.lo).min(cur.hi - thr),
            });
            continue;
        };
        let s_lo = next.lo - e_lo_max;
        if s_lo < -tol {
            failed.push(FailedCondition {
                condition: "reachability-lower".into(),
                index: t_idx,
                slack: s_lo,
            });
        }
        let s_hi = e_hi_min - next.hi;
        if s_hi < -tol {
            failed.push(FailedCondition {
                condition: "reachability-upper".into(),
                index: t_idx,
                slack: s_hi,
            });
        }
    }

    let last = *seq.last().unwrap();
    let t_last = seq.len() - 2;
    let slack = match chain.terminal {
        TerminalLabel::UpperWall => last.lo - params.ub,
        TerminalLabel::Midpoint => last.lo - 0.5 * (params.pb + params.gb),
        TerminalLabel::Handoff => (0.25 * params.pb + 0.75 * params.gb) - last.hi,
        TerminalLabel::Goal => match chain.goal {
            Some(g) => (last.lo - g.l_g).min(g.u_g - last.hi),
            None => f64::NEG_INFINITY,
        },
        TerminalLabel::Window => unreachable!("shape gate rejects window terminals on position chains"),
    };
    if slack < -tol {
        failed.push(FailedCondition { condition: "terminal".into(), index: t_last, slack });
    }
}

fn verify_velocity(
    chain: &ChainSpec,
    params: &SwarmParams,
    tol: f64,
    failed: &mut Vec<FailedCondition>,
) {
    let d = d0(params);
    let mut seq = Vec::with_capacity(chain.intervals.len() + 1);
    seq.push(point(chain.origin.v));
    seq.extend(chain.intervals.iter().copied());

    for i in 1..seq.len() {
        let (cur, next) = (seq[i - 1], seq[i]);
        if next.lo > next.hi {
            failed.push(FailedCondition {
                condition: "interval-order".into(),
                index: i,
                slack: next.hi - next.lo,
            });
        }
        let s_ord = cur.lo - next.hi;
        if s_ord < -tol {
            failed.push(FailedCondition {
                condition: "monotonic-ordering".into(),
                index: i,
                slack: s_ord,
            });
        }
        // Covering set from the worst corners of the current interval.
        let s_lo = next.lo - (cur.hi - d);
        if s_lo < -tol {
            failed.push(FailedCondition {
                condition: "reachability-lower".into(),
                index: i,
                slack: s_lo,
            });
        }
        if s_ord < -tol {
            failed.push(FailedCondition {
                condition: "reachability-upper".into(),
                index: i,
                slack: s_ord,
            });
        }
    }

    let last = *seq.last().unwrap();
    let slack = match chain.window {
        Some(w) => {
            let dev = (last.lo + w.mu() * d).abs().max((last.hi + w.lambda() * d).abs());
            -dev
        }
        None => f64::NEG_INFINITY,
    };
    if slack < -tol {
        failed.push(FailedCondition {
            condition: "terminal".into(),
            index: seq.len() - 1,
            slack,
        });
    }
}
