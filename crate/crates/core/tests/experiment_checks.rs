//! Directional trend checks on the Monte Carlo escape estimates: the
//! escape probability should rise with inertia and with the attraction
//! coefficients, and fall as the goal moves away from the start.

use swarm_escape::experiments::{estimate_pe, InitialCondition};
use swarm_escape::model::{GoalRegion, SwarmParams};

fn init() -> InitialCondition {
    InitialCondition::BoxUniform { x: (0.0, 2.0), v: (-1.0, 1.0) }
}

fn pe(omega: f64, c: f64, goal_lo: f64, iter_cap: usize) -> f64 {
    let p = SwarmParams::new(omega, c, c, 0.0, 20.0, 3.0, 4.0).unwrap();
    let goal = GoalRegion::new(goal_lo, goal_lo + 1.0, &p).unwrap();
    estimate_pe(&p, &goal, &init(), 400, iter_cap, 99).0
}

/// Adjacent pairs moving the expected way; one inversion is tolerated as
/// Monte Carlo noise.
fn count_trend(values: &[f64], nondecreasing: bool) -> usize {
    values
        .windows(2)
        .filter(|w| if nondecreasing { w[1] >= w[0] } else { w[1] <= w[0] })
        .count()
}

#[test]
fn escape_probability_rises_with_inertia() {
    let pes: Vec<f64> =
        [0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.0].map(|o| pe(o, 2.0, 19.0, 400)).to_vec();
    assert!(count_trend(&pes, true) >= 5, "{pes:?}");
    assert!(pes[6] > pes[0], "{pes:?}");
}

#[test]
fn escape_probability_rises_with_attraction() {
    let pes: Vec<f64> =
        [1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8].map(|c| pe(0.9, c, 19.0, 400)).to_vec();
    assert!(count_trend(&pes, true) >= 5, "{pes:?}");
    assert!(pes[6] > pes[0], "{pes:?}");
}

#[test]
fn escape_probability_falls_with_goal_distance() {
    let pes: Vec<f64> =
        [13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0].map(|g| pe(0.85, 2.0, g, 400)).to_vec();
    assert!(count_trend(&pes, false) >= 5, "{pes:?}");
    assert!(pes[6] < pes[0], "{pes:?}");
}
