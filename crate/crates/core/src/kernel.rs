//! Exact one-step velocity distribution and the elementary bounds built on it.
//!
//! Given the current state, the next velocity is the inertia term plus two
//! independent uniform attraction pulls, so its density is the convolution of
//! two uniforms: a trapezoid (rectangle and triangle as degenerate shapes),
//! or a point mass when both pulls vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentState, SwarmParams};

/// Distribution of `v(t+1)` given `[x, v]`.
///
/// Non-degenerate case: piecewise-linear density with knots
/// `vf[0] <= vf[1] <= vf[2] <= vf[3]`, plateau height `hf`, total mass 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrapezoidDensity {
    Trapezoid { vf: [f64; 4], hf: f64 },
    PointMass { at: f64 },
}

impl TrapezoidDensity {
    /// Support endpoints (equal endpoints for a point mass).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Trapezoid { vf, .. } => (vf[0], vf[3]),
            Self::PointMass { at } => (*at, *at),
        }
    }

    pub fn point_mass(&self) -> Option<f64> {
        match self {
            Self::PointMass { at } => Some(*at),
            Self::Trapezoid { .. } => None,
        }
    }

    /// Knots and plateau height, when not degenerate.
    pub fn as_parts(&self) -> Option<([f64; 4], f64)> {
        match self {
            Self::Trapezoid { vf, hf } => Some((*vf, *hf)),
            Self::PointMass { .. } => None,
        }
    }

    /// Density at `v`. Branches own half-open pieces `(knot_i, knot_{i+1}]`,
    /// so zero-width ramps are never divided by; values at knots follow the
    /// left-continuous convention.
    pub fn density(&self, v: f64) -> Result<f64> {
        match self {
            Self::PointMass { .. } => Err(Error::DegenerateDistribution),
            Self::Trapezoid { vf, hf } => Ok({
                if v <= vf[0] || v > vf[3] {
                    0.0
                } else if v <= vf[1] {
                    hf * (v - vf[0]) / (vf[1] - vf[0])
                } else if v <= vf[2] {
                    *hf
                } else {
                    hf * (vf[3] - v) / (vf[3] - vf[2])
                }
            }),
        }
    }

    /// Exact piecewise-quadratic antiderivative of the density.
    /// `cdf(vf[0]) = 0` and `cdf(vf[3]) = 1` exactly.
    pub fn cdf(&self, v: f64) -> f64 {
        match self {
            Self::PointMass { at } => {
                if v >= *at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Trapezoid { vf, hf } => {
                if v <= vf[0] {
                    0.0
                } else if v <= vf[1] {
                    0.5 * hf * (v - vf[0]) * (v - vf[0]) / (vf[1] - vf[0])
                } else if v <= vf[2] {
                    0.5 * hf * (vf[1] - vf[0]) + hf * (v - vf[1])
                } else if v < vf[3] {
                    1.0 - 0.5 * hf * (vf[3] - v) * (vf[3] - v) / (vf[3] - vf[2])
                } else {
                    1.0
                }
            }
        }
    }

    /// Probability of the closed interval `[a, b]` (expects `a <= b`).
    pub fn interval_prob(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return 0.0;
        }
        match self {
            Self::PointMass { at } => {
                if a <= *at && *at <= b {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (self.cdf(b) - self.cdf(a)).max(0.0),
        }
    }
}

/// Distribution of the next velocity from `state`.
///
/// The two attraction pulls are uniform on `[min(a,0), max(a,0)]` and
/// `[min(b,0), max(b,0)]` with `a = c1(pb - x)`, `b = c2(gb - x)`; the knots
/// are the sorted corner sums shifted by the inertia term `omega * v`.
pub fn velocity_support(state: &AgentState, params: &SwarmParams) -> TrapezoidDensity {
    let base = params.omega * state.v;
    let a = params.c1 * (params.pb - state.x);
    let b = params.c2 * (params.gb - state.x);
    if a == 0.0 && b == 0.0 {
        return TrapezoidDensity::PointMass { at: base };
    }
    let (la, ua) = (a.min(0.0), a.max(0.0));
    let (lb, ub) = (b.min(0.0), b.max(0.0));
    let mid1 = la + ub;
    let mid2 = ua + lb;
    let vf = [
        base + (la + lb),
        base + mid1.min(mid2),
        base + mid1.max(mid2),
        base + (ua + ub),
    ];
    debug_assert!(vf[0] <= vf[1] && vf[1] <= vf[2] && vf[2] <= vf[3]);
    // (vf4 - vf1) + (vf3 - vf2) = |a| + |b| + ||a| - |b|| = 2 max(|a|, |b|) > 0
    let hf = 2.0 / ((vf[3] - vf[0]) + (vf[2] - vf[1]));
    TrapezoidDensity::Trapezoid { vf, hf }
}

/// Density of the next velocity at `v` (see [`TrapezoidDensity::density`]).
pub fn density(state: &AgentState, params: &SwarmParams, v: f64) -> Result<f64> {
    velocity_support(state, params).density(v)
}

/// CDF of the next velocity at `v`.
pub fn cdf(state: &AgentState, params: &SwarmParams, v: f64) -> f64 {
    velocity_support(state, params).cdf(v)
}

/// Probability that the next velocity lands in `[a, b]`.
pub fn interval_prob(state: &AgentState, params: &SwarmParams, a: f64, b: f64) -> f64 {
    velocity_support(state, params).interval_prob(a, b)
}

/// Guaranteed width of the one-step velocity support when the attractors
/// differ: `min{c1, c2, 1} * (gb - pb)`.
pub fn d0(params: &SwarmParams) -> f64 {
    params.c1.min(params.c2).min(1.0) * (params.gb - params.pb)
}

/// Universal lower bound on the probability that the next velocity lands in
/// any width-`x` subinterval of its support, for any state.
pub fn h_bound(params: &SwarmParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let w = params.width();
    let linear = x / (2.0 * params.c1.max(params.c2) * w);
    let quadratic = x * x / (2.0 * params.c1 * params.c2 * w * w);
    linear.min(quadratic)
}

/// `ln h_bound(x)`, finite for every `x > 0`. The log form survives the
/// astronomically small products the escape bounds take powers of.
pub fn log_h_bound(params: &SwarmParams, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let w = params.width();
    let linear = x.ln() - (2.0 * params.c1.max(params.c2) * w).ln();
    let quadratic = 2.0 * x.ln() - (2.0 * params.c1 * params.c2 * w * w).ln();
    linear.min(quadratic)
}

/// Hard cap on |v(t)| along any trajectory whose initial speed is at most
/// the box width: `(c1 + c2 + 1) * (ub - lb)`.
pub fn v_upper_bound(params: &SwarmParams) -> f64 {
    (params.c1 + params.c2 + 1.0) * params.width()
}

/// Lower bound on P{|v(t+1)| >= d0/4} from any state: `h_bound(d0/4)`.
pub fn lemma1_bound(params: &SwarmParams) -> Result<f64> {
    if params.gb <= params.pb {
        return Err(Error::DegenerateAttractors(
            "pb = gb gives d0 = 0; the speed-refresh bound is vacuous".into(),
        ));
    }
    Ok(h_bound(params, d0(params) / 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SwarmParams;

    fn params(omega: f64, c1: f64, c2: f64, lb: f64, ub: f64, pb: f64, gb: f64) -> SwarmParams {
        SwarmParams::new(omega, c1, c2, lb, ub, pb, gb).unwrap()
    }

    #[test]
    fn knots_left_of_pb() {
        // x <= pb: both pulls rightward; U(0,4) + U(0,6).
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(1.0, 0.0), &p);
        let (vf, hf) = d.as_parts().unwrap();
        assert_eq!(vf, [0.0, 4.0, 6.0, 10.0]);
        assert!((hf - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn knots_right_of_gb() {
        // x >= gb: both pulls leftward; U(-4,0) + U(-2,0).
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(5.0, 0.0), &p);
        let (vf, hf) = d.as_parts().unwrap();
        assert_eq!(vf, [-6.0, -4.0, -2.0, 0.0]);
        assert!((hf - 0.25).abs() < 1e-15);
    }

    #[test]
    fn knots_interior_triangle() {
        // x strictly between the attractors with equal pull widths:
        // U(-1,0) + U(0,1) shifted by v=1 collapses the plateau.
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(3.5, 1.0), &p);
        let (vf, hf) = d.as_parts().unwrap();
        assert_eq!(vf, [0.0, 1.0, 1.0, 2.0]);
        assert!((hf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_when_both_pulls_vanish() {
        let p = params(0.5, 2.0, 2.0, 0.0, 20.0, 3.0, 3.0);
        let d = velocity_support(&AgentState::new(3.0, 0.3), &p);
        assert_eq!(d.point_mass(), Some(0.15));
        assert!(d.density(0.15).is_err());
        assert_eq!(d.cdf(0.15), 1.0);
        assert_eq!(d.cdf(0.1499), 0.0);
        assert_eq!(d.interval_prob(0.1, 0.2), 1.0);
        assert_eq!(d.interval_prob(0.2, 0.3), 0.0);
    }

    #[test]
    fn density_values_on_trapezoid() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(1.0, 0.0), &p);
        assert_eq!(d.density(-1.0).unwrap(), 0.0);
        assert_eq!(d.density(11.0).unwrap(), 0.0);
        assert!((d.density(5.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((d.density(2.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        // Left-continuity at the support edges.
        assert_eq!(d.density(0.0).unwrap(), 0.0);
        assert!((d.density(10.0).unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_case_has_no_ramp_division() {
        // x = pb makes the c1 pull zero-width: a rectangle, both ramps empty.
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(3.0, 0.0), &p);
        let (vf, hf) = d.as_parts().unwrap();
        // a = 0, b = 2: uniform on [0, 2].
        assert_eq!(vf, [0.0, 0.0, 2.0, 2.0]);
        assert!((hf - 0.5).abs() < 1e-15);
        assert_eq!(d.density(0.0).unwrap(), 0.0);
        assert!((d.density(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.density(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.cdf(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdf_values_on_trapezoid() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(1.0, 0.0), &p);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(10.0), 1.0);
        assert_eq!(d.cdf(-5.0), 0.0);
        assert_eq!(d.cdf(12.0), 1.0);
        assert!((d.cdf(4.0) - 1.0 / 3.0).abs() < 1e-15);
        // Continuity across knots.
        for v in [4.0, 6.0] {
            let below = d.cdf(v - 1e-9);
            let above = d.cdf(v + 1e-9);
            assert!((above - below).abs() < 1e-8);
        }
    }

    #[test]
    fn interval_prob_basics() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let d = velocity_support(&AgentState::new(1.0, 0.0), &p);
        assert!((d.interval_prob(0.0, 10.0) - 1.0).abs() < 1e-15);
        assert_eq!(d.interval_prob(3.0, 3.0), 0.0);
        assert_eq!(d.interval_prob(5.0, 4.0), 0.0);
        assert!((d.interval_prob(4.0, 6.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn free_functions_match_methods() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let s = AgentState::new(1.0, 0.0);
        let d = velocity_support(&s, &p);
        assert_eq!(density(&s, &p, 5.0).unwrap(), d.density(5.0).unwrap());
        assert_eq!(cdf(&s, &p, 4.0), d.cdf(4.0));
        assert_eq!(interval_prob(&s, &p, 4.0, 6.0), d.interval_prob(4.0, 6.0));
    }

    #[test]
    fn d0_values() {
        assert_eq!(d0(&params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0)), 1.0);
        assert_eq!(d0(&params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 3.0)), 0.0);
        assert_eq!(d0(&params(1.0, 0.5, 2.0, -5.0, 5.0, 0.0, 2.0)), 1.0);
    }

    #[test]
    fn h_bound_values() {
        let p = params(1.0, 2.0, 2.0, 0.0, 10.0, 3.0, 4.0);
        assert_eq!(h_bound(&p, 0.0), 0.0);
        assert_eq!(h_bound(&p, -1.0), 0.0);
        assert!((h_bound(&p, 1.0) - 0.00125).abs() < 1e-18);
        // Monotone nondecreasing.
        let mut prev = 0.0;
        for i in 1..=100 {
            let v = h_bound(&p, i as f64 * 0.1);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn log_h_bound_matches_h_bound() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        for x in [1e-9, 1e-3, 0.25, 1.0, 7.0] {
            let diff = (log_h_bound(&p, x) - h_bound(&p, x).ln()).abs();
            assert!(diff < 1e-12, "x={x}: {diff}");
        }
        assert_eq!(log_h_bound(&p, 0.0), f64::NEG_INFINITY);
        // Stays finite where h itself would underflow any power.
        assert!(log_h_bound(&p, 2.5e-8).is_finite());
    }

    #[test]
    fn v_upper_bound_values() {
        assert_eq!(v_upper_bound(&params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0)), 100.0);
        let tiny = params(1.0, 1e-9, 1e-9, 0.0, 20.0, 3.0, 4.0);
        assert!((v_upper_bound(&tiny) - 20.0).abs() < 1e-6);
    }

    #[test]
    fn lemma1_bound_value_and_degeneracy() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        // h(0.25) = min{0.25/80, 0.0625/3200} = 1.953125e-5.
        assert!((lemma1_bound(&p).unwrap() - 1.953125e-5).abs() < 1e-19);
        let degenerate = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 3.0);
        assert!(lemma1_bound(&degenerate).is_err());
    }

    #[test]
    fn tail_mass_dominates_lemma1_bound() {
        let p = params(1.0, 2.0, 2.0, 0.0, 20.0, 3.0, 4.0);
        let bound = lemma1_bound(&p).unwrap();
        let quarter = d0(&p) / 4.0;
        for (x, v) in [(1.0, 0.0), (10.0, 3.0), (19.5, -2.0), (3.2, 0.1), (0.0, 0.0)] {
            let d = velocity_support(&AgentState::new(x, v), &p);
            let (lo, hi) = d.support();
            let mass = d.interval_prob(lo, -quarter) + d.interval_prob(quarter, hi);
            assert!(mass >= bound, "state [{x},{v}]: {mass} < {bound}");
        }
    }
}
