//! Core algorithms for the GRAND family of greedy-randomized packing policies.
//!
//! A service system has `I` customer types and an unlimited pool of servers.
//! Each server holds a *configuration* `k` (a vector counting the customers of
//! each type it serves), constrained to a finite monotone feasible set.
//! Arriving customers are placed uniformly at random among the servers that can
//! still fit them plus a policy-controlled number of designated empty
//! "zero-servers"; customers leave after exponential service times.
//!
//! The crate provides:
//!
//! - [`packing`]: configurations, the monotone feasible set and its edge
//!   structure;
//! - [`policies`]: the zero-server functions (GRAND(aZ), GRAND(c),
//!   GRAND(Z^p)) and the placement probability law;
//! - [`simulator`]: an exact event-driven simulation of the resulting Markov
//!   chain with seeded, reproducible randomness;
//! - [`fluid`]: the deterministic fluid-limit ODE, the entropy-like Lyapunov
//!   function `L^(a)` and its drift `Xi`;
//! - [`optimal`]: the fluid-scale LP optimum, the entropy-program optimum
//!   `x^{*,a}` (two independent solvers) and distances to the optimal set;
//! - [`analysis`]: steady-state estimation and simulation-vs-fluid
//!   comparisons.

pub mod analysis;
mod error;
pub mod fluid;
mod linalg;
pub mod optimal;
pub mod packing;
pub mod policies;
pub mod simulator;

pub use error::{Error, Result};
pub use fluid::FluidState;
pub use optimal::OperatingPoint;
pub use packing::{ConfigSet, Configuration, Edge};
pub use policies::{PlacementDistribution, PlacementTarget, Policy};
pub use simulator::{SimState, SystemSpec, Trajectory, TrajectoryKind};
