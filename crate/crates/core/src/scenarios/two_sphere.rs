use nalgebra::Vector3;

use super::{PDeltaRecord, PDeltaSample, RecordMetadata};
use crate::contact::ContactFormulation;
use crate::dynamics::{GrainTemplate, RigidBodyState, SphereField, StepReport, World};
use crate::error::SimulationError;
use crate::geometry::Pose;
use crate::real::Real;

/// Central compression of two equal spheres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSphereParams<T: Real> {
    /// mm
    pub radius: T,
    /// Target node spacing (mm).
    pub sdp: T,
    /// Level-set grid step of the lower sphere (mm).
    pub vdp: T,
    pub formulation: ContactFormulation<T>,
    /// Final overlap (mm).
    pub delta_max: T,
    /// Approach speed of the upper sphere (mm/s).
    pub speed: T,
    /// Number of equal overlap increments.
    pub increments: usize,
    /// tonne/mm³
    pub density: T,
    /// Position of the lower sphere's centre; the whole scene moves with it.
    pub origin: Vector3<T>,
}

impl<T: Real> TwoSphereParams<T> {
    pub fn new(radius: T, sdp: T, vdp: T, formulation: ContactFormulation<T>, delta_max: T) -> Self {
        Self {
            radius,
            sdp,
            vdp,
            formulation,
            delta_max,
            speed: T::lit(5.0),
            increments: 100,
            density: T::lit(2.5e-9),
            origin: Vector3::zeros(),
        }
    }
}

/// Lower sphere fixed, upper sphere driven down at constant speed from
/// first touch; P is the magnitude of the contact force on the upper sphere.
///
/// Both spheres share one template: the lower one acts through its grid,
/// the upper one through its nodes.
pub fn run_two_sphere_compression<T: Real>(
    params: &TwoSphereParams<T>,
) -> Result<PDeltaRecord<T>, SimulationError> {
    run_two_sphere_compression_with(params, &mut |_, _| {})
}

/// [`run_two_sphere_compression`] calling `on_step` with the step index and
/// report after every step.
pub fn run_two_sphere_compression_with<T: Real>(
    params: &TwoSphereParams<T>,
    on_step: &mut dyn FnMut(u64, &StepReport<T>),
) -> Result<PDeltaRecord<T>, SimulationError> {
    let p = params;
    p.formulation.validate()?;
    if !(p.radius > T::zero()) || !(p.speed > T::zero()) || p.increments == 0 {
        return Err(SimulationError::InvalidScenario(
            "radius, speed and increment count must be positive".into(),
        ));
    }
    if !(p.delta_max > T::zero()) || p.delta_max > p.radius * T::lit(0.5) {
        return Err(SimulationError::InvalidScenario(format!(
            "overlap {} mm is outside the penalty regime of a {} mm sphere",
            p.delta_max, p.radius
        )));
    }
    let template = GrainTemplate::sphere(
        "sphere",
        p.radius,
        p.sdp,
        SphereField::Grid { step: p.vdp },
        p.density,
    )?;
    let nodes = template.nodes.len();
    let sdp = template.nodes.spacing;
    let mut world = World::new(p.formulation);
    world.add_template(template);
    let lower = world.add_body(RigidBodyState::kinematic(0, Pose::translation(p.origin), Vector3::zeros()));
    let start = p.origin + Vector3::new(T::zero(), T::zero(), p.radius * T::lit(2.0));
    let upper = world.add_body(RigidBodyState::kinematic(
        0,
        Pose::translation(start),
        Vector3::new(T::zero(), T::zero(), -p.speed),
    ));

    let mut record = PDeltaRecord::new(RecordMetadata {
        scenario: "two_sphere".into(),
        formulation: p.formulation,
        sdp,
        vdp: p.vdp,
        nodes_per_grain: nodes,
        total_nodes: 2 * nodes,
    });
    let dt = p.delta_max / (p.speed * T::count(p.increments));
    for _ in 0..=p.increments {
        let gap = world.bodies[upper].position.z - world.bodies[lower].position.z;
        let delta = p.radius * T::lit(2.0) - gap;
        let time = world.time;
        let report = world.step(dt)?;
        on_step(world.step_index, &report);
        record.samples.push(PDeltaSample {
            time,
            delta,
            load: report.wrenches[upper].force.norm(),
            kinetic_energy: T::zero(),
            contacts: report.contacts,
        });
    }
    Ok(record)
}
