//! Shared oracles and fuzzers for the integration suites.
//!
//! The density oracle re-derives the next-velocity law from the update rule
//! alone: a shift plus two independent uniform pulls, composed through the
//! textbook uniform-convolution identity. It shares no code with the kernel
//! under test.

#![allow(dead_code)]

use rand::Rng;
use swarm_escape::bounds::OscillationWindow;
use swarm_escape::kernel::{d0, v_upper_bound, TrapezoidDensity};
use swarm_escape::model::{AgentState, GoalRegion, SwarmParams};

/// Inertia shift and the two attraction pull ranges, straight from the
/// update rule.
pub fn pull_ranges(state: &AgentState, params: &SwarmParams) -> (f64, (f64, f64), (f64, f64)) {
    let base = params.omega * state.v;
    let a = params.c1 * (params.pb - state.x);
    let b = params.c2 * (params.gb - state.x);
    (base, (a.min(0.0), a.max(0.0)), (b.min(0.0), b.max(0.0)))
}

/// Density of `base + U[r1] + U[r2]` at `v` via the convolution identity
/// `f(z) = (F2(z - lo1) - F2(z - hi1)) / (hi1 - lo1)`.
pub fn oracle_density(base: f64, r1: (f64, f64), r2: (f64, f64), v: f64) -> f64 {
    // Keep a nondegenerate factor in the F2 role.
    let (r1, r2) = if r2.1 > r2.0 { (r1, r2) } else { (r2, r1) };
    assert!(r2.1 > r2.0, "a double point mass has no density");
    let z = v - base;
    let cdf2 = |u: f64| ((u - r2.0) / (r2.1 - r2.0)).clamp(0.0, 1.0);
    if r1.1 > r1.0 {
        (cdf2(z - r1.0) - cdf2(z - r1.1)) / (r1.1 - r1.0)
    } else if r2.0 <= z - r1.0 && z - r1.0 <= r2.1 {
        1.0 / (r2.1 - r2.0)
    } else {
        0.0
    }
}

/// CDF of the same sum at `v`: midpoint integration between the corner
/// sums, where the density is linear, so the rule is exact.
pub fn oracle_cdf(base: f64, r1: (f64, f64), r2: (f64, f64), v: f64) -> f64 {
    let z = v - base;
    let mut corners = [r1.0 + r2.0, r1.0 + r2.1, r1.1 + r2.0, r1.1 + r2.1];
    corners.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for pair in corners.windows(2) {
        let (lo, hi) = (pair[0], pair[1].min(z));
        if hi > lo {
            acc += (hi - lo) * oracle_density(base, r1, r2, base + 0.5 * (lo + hi));
        }
    }
    acc.clamp(0.0, 1.0)
}

/// Black-box integral of a kernel density over its support: midpoint rule
/// between knots, subdivided to catch anything hiding off the knot grid.
pub fn density_quadrature(d: &TrapezoidDensity) -> f64 {
    let (vf, _) = d.as_parts().expect("quadrature needs a nondegenerate density");
    let mut acc = 0.0;
    for pair in vf.windows(2) {
        let n = 8;
        let h = (pair[1] - pair[0]) / n as f64;
        for k in 0..n {
            let mid = pair[0] + (k as f64 + 0.5) * h;
            acc += h * d.density(mid).unwrap();
        }
    }
    acc
}

/// Two-sided Kolmogorov-Smirnov statistic between sorted samples and a
/// reference CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    d
}

/// Random parameters across two decades of box width, with the attractor
/// gap bounded away from zero so no fuzz case is degenerate.
pub fn fuzz_params<R: Rng + ?Sized>(rng: &mut R, omega_one: bool) -> SwarmParams {
    let w = 10f64.powf(rng.random_range(-0.3..1.7));
    let lb = rng.random_range(-25.0..25.0);
    let c1 = rng.random_range(0.1..4.0);
    let c2 = rng.random_range(0.1..4.0);
    let gap = w * rng.random_range(0.02..0.5);
    let pb = lb + rng.random_range(0.0..1.0) * (w - gap);
    let omega = if omega_one { 1.0 } else { rng.random_range(0.05..1.0) };
    SwarmParams::new(omega, c1, c2, lb, lb + w, pb, pb + gap).unwrap()
}

/// Random parameters for chain fuzzing: inertia 1, and w/d0 kept under 32
/// so chain lengths stay in the thousands.
pub fn fuzz_chain_params<R: Rng + ?Sized>(rng: &mut R) -> SwarmParams {
    let w = 10f64.powf(rng.random_range(-0.3..1.5));
    let lb = rng.random_range(-20.0..20.0);
    let c1 = rng.random_range(0.25..4.0);
    let c2 = rng.random_range(0.25..4.0);
    let gap = w * rng.random_range(0.125..0.5);
    let pb = lb + rng.random_range(0.0..1.0) * (w - gap);
    SwarmParams::new(1.0, c1, c2, lb, lb + w, pb, pb + gap).unwrap()
}

/// Random state: position in the box, speed up to one box width.
pub fn fuzz_state<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    let w = p.width();
    AgentState::new(rng.random_range(p.lb..=p.ub), rng.random_range(-w..w))
}

/// Valid wall-run origin: anywhere in the box with adequate rightward speed.
pub fn step1_origin<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    let lo = d0(p) / 4.0;
    let v = lo * (v_upper_bound(p) / lo).powf(rng.random());
    AgentState::new(rng.random_range(p.lb..=p.ub), v)
}

/// Valid wall-brake origin: parked at the upper wall, any speed up to the
/// kinematic cap.
pub fn step2_origin<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> AgentState {
    AgentState::new(p.ub, v_upper_bound(p) * rng.random_range(1e-4..=1.0))
}

/// Valid goal-descent origin: a fresh wall exit strictly inside the window.
pub fn step3_origin<R: Rng + ?Sized>(
    rng: &mut R,
    p: &SwarmParams,
    win: &OscillationWindow,
) -> AgentState {
    let frac = rng.random_range(0.01..0.99);
    let v = -(win.lambda() + frac * (win.mu() - win.lambda())) * d0(p);
    AgentState::new(p.ub + v, v)
}

/// Random goal in the upper 90% of the box, never wider than 30% of it.
pub fn fuzz_goal<R: Rng + ?Sized>(rng: &mut R, p: &SwarmParams) -> GoalRegion {
    let w = p.width();
    let u_g = p.ub - rng.random_range(0.0..0.9) * w;
    let l_g = p.lb.max(u_g - rng.random_range(0.01..0.3) * w);
    GoalRegion::new(l_g, u_g, p).unwrap()
}
