//! Escape analysis for a particle-swarm agent stuck at a local optimum.
//!
//! During stagnation the agent's two attractors stop moving and each
//! coordinate evolves independently as a Markov chain on position and
//! velocity. This crate models that chain and answers one question about it:
//! how likely is the agent to leave the attractors' neighborhood and reach a
//! distant goal interval?
//!
//! The pieces fit together in layers:
//!
//! - [`model`]: the chain itself (parameters, clamped transition, sampled
//!   trajectories, first hit times).
//! - [`kernel`]: the exact one-step velocity distribution, a trapezoid whose
//!   knots come from the two uniform accelerations.
//! - [`chains`]: interval-chain certificates. A chain is a sequence of
//!   position or velocity windows, each reachable from its predecessor with
//!   probability bounded below by the trapezoid's floor; a verified chain is
//!   a machine-checkable witness that a multi-step maneuver has positive
//!   probability.
//! - [`bounds`]: closed-form iteration counts and log-probability floors for
//!   the full escape maneuver (climb the wall, brake on it, descend to the
//!   goal), valid in the non-decaying regime `omega = 1`.
//! - [`experiments`]: Monte Carlo drivers that estimate the same quantities
//!   empirically, histogram the position over time, segment trajectories by
//!   velocity sign, and run a small full swarm on the Rastrigin function to
//!   show stagnation arising naturally.
//!
//! Everything downstream of a seed is deterministic, including the parallel
//! estimators.

pub mod bounds;
pub mod chains;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod model;
pub mod rng;

pub use bounds::{escape_bounds, pe_lower_bound, EscapeBounds, OscillationWindow};
pub use chains::{
    build_step1_chain, build_step2_chain, build_step3_chain, chain_log_prob, verify_chain,
    ChainKind, ChainSpec, FeasibilityReport, Interval,
};
pub use error::{Error, Result};
pub use experiments::{
    estimate_escape_curve, estimate_pe, position_distribution, rastrigin, run_full_pso,
    segment_behavior, stagnation_report, EscapeCurve, InitialCondition, PositionHistogram,
};
pub use kernel::{velocity_support, TrapezoidDensity};
pub use model::{clamp, step, AgentState, GoalRegion, SwarmParams, Trajectory};
