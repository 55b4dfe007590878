//! Seeded samplers behind `kernel-check` and `chain-verify`: random
//! environments across two decades of box width, states inside the box, and
//! origins satisfying each chain builder's precondition.

use rand::Rng;
use swarm_escape::bounds::OscillationWindow;
use swarm_escape::kernel::{d0, v_upper_bound};
use swarm_escape::model::{AgentState, GoalRegion, SwarmParams};

/// Random environment at a fixed inertia weight, with the attractor gap
/// bounded away from zero so no draw is degenerate.
pub fn params_with_omega<R: Rng + ?Sized>(rng: &mut R, omega: f64) -> SwarmParams {
    let w = 10f64.powf(rng.random_range(-0.3..1.7));
    let lb = rng.random_range(-25.0..25.0);
    let c1 = rng.random_range(0.1..4.0);
    let c2 = rng.random_range(0.1..4.0);
    let gap = w * rng.random_range(0.02..0.5);
    let pb = lb + rng.random_range(0.0..1.0) * (w - gap);
    SwarmParams::new(omega, c1, c2, lb, lb + w, pb, pb + gap).unwrap()
}

/// Random environment for chain fuzzing: inertia 1, and w/d0 kept under 32
/// so chain lengths stay in the thousands.
pub fn chain_params<R: Rng + ?Sized>(rng: &mut R) -> SwarmParams {
    let w = 10f64.powf(rng.random_range(-0.3..1.5));
    let lb = rng.random_range(-20.0..20.0);
    let c1 = rng.random_range(0.25..4.0);
    let c2 = rng.random_range(0.25..4.0);
    let gap = w * rng.random_range(0.125..0.5);
    let pb = lb + rng.random_range(0.0..1.0) * (w - gap);
    SwarmParams::new(1.0, c1, c2, lb, lb + w, pb, pb + gap).unwrap()
}

/// Random state: position in the box, speed up to one box width.
pub fn state_in_box<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    let w = p.width();
    AgentState::new(rng.random_range(p.lb..=p.ub), rng.random_range(-w..w))
}

/// Wall-run origin: anywhere in the box with adequate rightward speed.
pub fn wall_run_origin<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    let lo = d0(p) / 4.0;
    let v = lo * (v_upper_bound(p) / lo).powf(rng.random());
    AgentState::new(rng.random_range(p.lb..=p.ub), v)
}

/// Wall-brake origin: parked at the upper wall, any speed up to the
/// kinematic cap.
pub fn wall_brake_origin<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    AgentState::new(p.ub, v_upper_bound(p) * rng.random_range(1e-4..=1.0))
}

/// Goal-descent origin: a fresh wall exit strictly inside the window.
pub fn goal_descent_origin<R: Rng + ?Sized>(
    rng: &mut R,
    p: &SwarmParams,
    win: &OscillationWindow,
) -> AgentState {
    let frac = rng.random_range(0.01..0.99);
    let v = -(win.lambda() + frac * (win.mu() - win.lambda())) * d0(p);
    AgentState::new(p.ub + v, v)
}

/// Random goal in the upper 90% of the box, never wider than 30% of it.
pub fn goal_region<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> GoalRegion {
    let w = p.width();
    let u_g = p.ub - rng.random_range(0.0..0.9) * w;
    let l_g = p.lb.max(u_g - rng.random_range(0.01..0.3) * w);
    GoalRegion::new(l_g, u_g, p).unwrap()
}
