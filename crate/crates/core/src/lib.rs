//! Mean-field and stochastic simulation of a two-population
//! (excitatory/inhibitory) network whose weights and thresholds are
//! regulated by Hebbian covariance plasticity, plus the phase-plane and
//! bifurcation tools used to show that the regulated parameters settle on
//! critical surfaces.
//!
//! Modules, bottom up:
//!
//! * [`dynamics`]: vector fields, nullclines, Jacobians, analytic thresholds.
//! * [`glauber`]: finite-N asynchronous binary network.
//! * [`evolution`]: RK4 integration, moving averages, covariance rules.
//! * [`analysis`]: fixed points, attractors, critical curves, region maps.

pub mod analysis;
pub mod dynamics;
pub mod evolution;
pub mod glauber;
pub mod svg;

pub use dynamics::{ActivityPoint, FiringThresholds, SynapticWeights, SystemParams, Variant};
