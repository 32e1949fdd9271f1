//! Rigid-body state, mass properties and explicit time stepping.

mod mass;
mod template;
mod world;

pub use mass::MassProperties;
pub use template::{GrainTemplate, SphereField, CLUSTER_SIZE};
pub use world::{
    integrate_step, stable_timestep, stable_timestep_from, RigidBodyState, StepReport, World,
};

/// Default safety factor of the timestep estimate.
pub const DEFAULT_TIMESTEP_FACTOR: f64 = 0.1;
