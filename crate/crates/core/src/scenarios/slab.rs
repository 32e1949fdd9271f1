use nalgebra::{UnitQuaternion, Vector3};

use super::{PDeltaRecord, PDeltaSample, RecordMetadata};
use crate::contact::ContactFormulation;
use crate::dynamics::{stable_timestep, GrainTemplate, RigidBodyState, StepReport, World};
use crate::error::SimulationError;
use crate::geometry::Pose;
use crate::levelset::GridBuildOptions;
use crate::real::Real;
use crate::surface::interlocking_block_mesh;

/// Geometry and material of a square interlocked slab.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabSpec<T: Real> {
    /// Base side of a block (mm).
    pub block_side: T,
    /// Face incline (degrees).
    pub incline_deg: T,
    /// Block height = slab thickness (mm).
    pub thickness: T,
    /// Blocks per side.
    pub blocks_per_side: usize,
    /// mm
    pub indenter_radius: T,
    pub mu: T,
    /// tonne/mm³
    pub density: T,
    /// Inward shift of each block face before placement (mm).
    pub gap: T,
    /// Initial distance between the indenter and the slab top (mm).
    pub indenter_clearance: T,
    /// mm/s²
    pub gravity: T,
}

impl<T: Real> SlabSpec<T> {
    /// 6×6 blocks of 8.33 mm, 2.5° incline, 3.18 mm thick, μ = 0.23,
    /// loaded by a 2.5 mm sphere.
    pub fn standard() -> Self {
        Self {
            block_side: T::lit(8.33),
            incline_deg: T::lit(2.5),
            thickness: T::lit(3.18),
            blocks_per_side: 6,
            indenter_radius: T::lit(2.5),
            mu: T::lit(0.23),
            density: T::lit(2.5e-9),
            gap: T::lit(1e-3),
            indenter_clearance: T::lit(0.05),
            gravity: T::lit(9810.0),
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: &str| Err(SimulationError::InvalidScenario(m.to_string()));
        if self.blocks_per_side < 3 {
            return bad("a slab needs at least 3 blocks per side");
        }
        if !(self.block_side > T::zero()) || !(self.thickness > T::zero()) {
            return bad("block side and thickness must be positive");
        }
        if !(self.indenter_radius > T::zero()) || !(self.density > T::zero()) {
            return bad("indenter radius and density must be positive");
        }
        if !(self.gap >= T::zero()) || self.gap * T::lit(4.0) >= self.block_side {
            return bad("placement gap must be small and non-negative");
        }
        if !(self.mu >= T::zero()) || !(self.indenter_clearance >= T::zero()) {
            return bad("friction and indenter clearance must be non-negative");
        }
        Ok(())
    }

    /// `1e-9 · m · g · thickness` for the given dynamic mass (mJ).
    pub fn default_ke_threshold(&self, dynamic_mass: T) -> T {
        T::lit(1e-9) * dynamic_mass * self.gravity * self.thickness
    }
}

/// An assembled slab and the roles of its bodies.
#[derive(Clone, Debug)]
pub struct Slab<T: Real> {
    pub world: World<T>,
    pub spec: SlabSpec<T>,
    pub indenter: usize,
    /// Row-major block bodies, `blocks[j * n + i]`.
    pub blocks: Vec<usize>,
    pub fixed: Vec<usize>,
    pub interior: Vec<usize>,
    pub central: usize,
    /// Achieved node spacing (mm).
    pub sdp: T,
    pub vdp: T,
}

/// Places the blocks on a checkerboard of 90° rotations with the boundary
/// ring fixed, and a kinematic spherical indenter above the central block.
///
/// Bodies: 0 is the indenter, then blocks row by row. The central block is
/// `(n/2, n/2)`.
pub fn build_interlocked_slab<T: Real>(
    spec: &SlabSpec<T>,
    sdp: T,
    vdp: T,
    formulation: ContactFormulation<T>,
) -> Result<Slab<T>, SimulationError> {
    spec.validate()?;
    let mut formulation = formulation;
    formulation.mu = spec.mu;
    formulation.validate()?;
    let (l, h, n) = (spec.block_side, spec.thickness, spec.blocks_per_side);

    let mut mesh = interlocking_block_mesh(l, spec.incline_deg, h)?;
    let center = mesh.aabb().center();
    mesh.scale_about(&center, T::one() - spec.gap / (l * T::lit(0.5)));
    let block = GrainTemplate::from_mesh("block", &mesh, sdp, vdp, spec.density, &GridBuildOptions::default())?;
    let offset = block.mass.com_offset;
    let achieved = block.nodes.spacing;
    let indenter = GrainTemplate::analytic_indenter("indenter", spec.indenter_radius, spec.density)?;

    let mut world = World::new(formulation);
    world.gravity = Vector3::new(T::zero(), T::zero(), -spec.gravity);
    let ti = world.add_template(indenter);
    let tb = world.add_template(block);

    let half = T::lit(0.5);
    let mid = T::count(n - 1) * half;
    let place = |i: usize| (T::count(i) - mid) * l;
    let c = n / 2;
    let top = Vector3::new(
        place(c),
        place(c),
        h + spec.indenter_radius + spec.indenter_clearance,
    );
    let indenter_id = world.add_body(RigidBodyState::kinematic(ti, Pose::translation(top), Vector3::zeros()));

    let quarter = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), T::frac_pi_2());
    let mut blocks = Vec::with_capacity(n * n);
    let (mut fixed, mut interior) = (Vec::new(), Vec::new());
    for j in 0..n {
        for i in 0..n {
            let q = if (i + j) % 2 == 1 {
                quarter
            } else {
                UnitQuaternion::identity()
            };
            // build-frame origin (block bottom centre) goes to (x, y, 0)
            let origin = Vector3::new(place(i), place(j), T::zero());
            let pose = Pose::new(origin + q * offset, q);
            let boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            let body = if boundary {
                RigidBodyState::kinematic(tb, pose, Vector3::zeros())
            } else {
                RigidBodyState::dynamic(tb, pose)
            };
            let id = world.add_body(body);
            blocks.push(id);
            if boundary {
                fixed.push(id);
            } else {
                interior.push(id);
            }
        }
    }
    let central = blocks[c * n + c];
    if let Some((m, s, depth)) = world.deepest_penetration() {
        if depth > T::lit(1e-6) {
            return Err(SimulationError::InitialPenetration {
                master: m,
                slave: s,
                depth: depth.as_f64(),
            });
        }
    }
    Ok(Slab {
        world,
        spec: *spec,
        indenter: indenter_id,
        blocks,
        fixed,
        interior,
        central,
        sdp: achieved,
        vdp,
    })
}

/// Settings of the damped settling phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxParams<T: Real> {
    /// Viscous damping during settling (1/s).
    pub damping: T,
    /// Kinetic energy regarded as zero (mJ).
    pub ke_threshold: T,
    /// s
    pub dt: T,
    pub max_steps: u64,
    /// Steps the energy must stay below the threshold.
    pub quiet_steps: u64,
    /// Keep every `trace_every`-th kinetic energy value.
    pub trace_every: u64,
}

/// Outcome of a settling phase.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxReport<T: Real> {
    pub steps: u64,
    pub final_energy: T,
    /// Sampled kinetic energy history (mJ).
    pub trace: Vec<T>,
    /// Contact force on each body at the last step.
    pub contact_force: Vec<Vector3<T>>,
}

/// Steps the world with damping until its kinetic energy stays below the
/// threshold for `quiet_steps` consecutive steps.
pub fn relax_under_gravity<T: Real>(
    world: &mut World<T>,
    params: &RelaxParams<T>,
) -> Result<RelaxReport<T>, SimulationError> {
    if !(params.damping > T::zero()) {
        return Err(SimulationError::InvalidParameter(
            "settling needs positive damping".into(),
        ));
    }
    let saved = world.damping;
    world.damping = params.damping;
    let result = relax_loop(world, params);
    world.damping = saved;
    result
}

fn relax_loop<T: Real>(
    world: &mut World<T>,
    params: &RelaxParams<T>,
) -> Result<RelaxReport<T>, SimulationError> {
    let mut trace = Vec::new();
    let mut energy = world.kinetic_energy();
    if world.gravity == Vector3::zeros() && energy < params.ke_threshold {
        return Ok(RelaxReport {
            steps: 0,
            final_energy: energy,
            trace: vec![energy],
            contact_force: vec![Vector3::zeros(); world.bodies.len()],
        });
    }
    let mut quiet = 0;
    let every = params.trace_every.max(1);
    for step in 0..params.max_steps {
        let report = world.step(params.dt)?;
        energy = world.kinetic_energy();
        if step % every == 0 {
            trace.push(energy);
        }
        quiet = if energy < params.ke_threshold { quiet + 1 } else { 0 };
        if quiet >= params.quiet_steps {
            trace.push(energy);
            return Ok(RelaxReport {
                steps: step + 1,
                final_energy: energy,
                trace,
                contact_force: report.wrenches.iter().map(|w| w.force).collect(),
            });
        }
    }
    Err(SimulationError::RelaxationStalled {
        steps: params.max_steps,
        last_energy: energy.as_f64(),
        trace: trace.iter().map(|e| e.as_f64()).collect(),
    })
}

/// Settings of the loading phase.
#[derive(Clone, Debug, PartialEq)]
pub struct IndentationParams<T: Real> {
    /// Indenter speed (mm/s).
    pub speed: T,
    /// Indenter travel after first contact (mm).
    pub delta_max: T,
    /// s
    pub dt: T,
    /// Damping during loading (1/s).
    pub damping: T,
    /// Keep every `record_every`-th step in the curve.
    pub record_every: u64,
    /// Displacements at which all poses are stored (mm), ascending.
    pub snapshot_deltas: Vec<T>,
    pub max_steps: u64,
}

/// Poses of all bodies at one indenter displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T: Real> {
    pub delta: T,
    pub poses: Vec<Pose<T>>,
}

/// Failure-mechanism summary at the end of loading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mechanism<T: Real> {
    /// Downward displacement of the central block (mm).
    pub central_drop: T,
    /// Largest downward displacement among the other interior blocks (mm).
    pub runner_up_drop: T,
    pub runner_up: usize,
    /// The central block is pushed through: its drop exceeds twice the
    /// runner-up's.
    pub push_through: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndentationResult<T: Real> {
    pub record: PDeltaRecord<T>,
    pub snapshots: Vec<Snapshot<T>>,
    /// `drops[s][b]`: downward displacement of body `b` since the start of
    /// loading, at snapshot `s` (mm).
    pub drops: Vec<Vec<T>>,
    pub mechanism: Mechanism<T>,
    pub steps: u64,
}

/// Loading aborted; `last_snapshot` holds the last finite poses.
#[derive(Debug)]
pub struct IndentationFailure<T: Real> {
    pub error: SimulationError,
    pub last_snapshot: Snapshot<T>,
}

impl<T: Real> std::fmt::Display for IndentationFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "indentation aborted at δ = {} mm: {}", self.last_snapshot.delta, self.error)
    }
}

impl<T: Real> std::error::Error for IndentationFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Drives the indenter down at constant speed. P is the upward contact
/// force on the indenter and δ its travel since the first contact.
pub fn run_indentation<T: Real>(
    slab: &mut Slab<T>,
    params: &IndentationParams<T>,
) -> Result<IndentationResult<T>, IndentationFailure<T>> {
    run_indentation_with(slab, params, &mut |_, _| {})
}

/// [`run_indentation`] calling `on_step` with the step index and report
/// after every loading step.
pub fn run_indentation_with<T: Real>(
    slab: &mut Slab<T>,
    params: &IndentationParams<T>,
    on_step: &mut dyn FnMut(u64, &StepReport<T>),
) -> Result<IndentationResult<T>, IndentationFailure<T>> {
    let world = &mut slab.world;
    let ind = slab.indenter;
    world.damping = params.damping;
    world.bodies[ind].prescribed_velocity = Vector3::new(T::zero(), T::zero(), -params.speed);
    let reference: Vec<T> = world.bodies.iter().map(|b| b.position.z).collect();
    let template = &world.templates[world.bodies[slab.central].template];
    let mut record = PDeltaRecord::new(RecordMetadata {
        scenario: "slab".into(),
        formulation: world.formulation,
        sdp: slab.sdp,
        vdp: slab.vdp,
        nodes_per_grain: template.nodes.len(),
        total_nodes: template.nodes.len() * slab.blocks.len(),
    });
    let poses = |w: &World<T>| w.bodies.iter().map(|b| b.pose()).collect::<Vec<_>>();
    let mut snapshots: Vec<Snapshot<T>> = Vec::new();
    let mut touch: Option<T> = None;
    let every = params.record_every.max(1);
    let mut steps = 0;
    loop {
        let z = world.bodies[ind].position.z;
        let delta = touch.map_or(T::zero(), |z0| z0 - z);
        if touch.is_some() {
            while let Some(&target) = params.snapshot_deltas.get(snapshots.len()) {
                if delta < target {
                    break;
                }
                snapshots.push(Snapshot {
                    delta,
                    poses: poses(world),
                });
            }
            if delta >= params.delta_max && snapshots.len() == params.snapshot_deltas.len() {
                break;
            }
        }
        if steps >= params.max_steps {
            return Err(IndentationFailure {
                error: SimulationError::InvalidScenario(format!(
                    "indenter travel {delta} mm below {} mm after {steps} steps",
                    params.delta_max
                )),
                last_snapshot: Snapshot {
                    delta,
                    poses: poses(world),
                },
            });
        }
        let before = poses(world);
        let time = world.time;
        let report = match world.step(params.dt) {
            Ok(r) => r,
            Err(error) => {
                return Err(IndentationFailure {
                    error,
                    last_snapshot: Snapshot {
                        delta,
                        poses: before,
                    },
                })
            }
        };
        steps += 1;
        on_step(world.step_index, &report);
        let indenter_contacts: usize = report
            .pairs
            .iter()
            .filter(|p| p.master == ind)
            .map(|p| p.count)
            .sum();
        if touch.is_none() && indenter_contacts > 0 {
            touch = Some(z);
        }
        if touch.is_some() && (steps % every == 0 || record.samples.is_empty()) {
            record.samples.push(PDeltaSample {
                time,
                delta,
                load: report.wrenches[ind].force.z,
                kinetic_energy: world.kinetic_energy(),
                contacts: report.contacts,
            });
        }
    }
    let drops: Vec<Vec<T>> = snapshots
        .iter()
        .map(|s| {
            s.poses
                .iter()
                .zip(&reference)
                .map(|(p, z0)| *z0 - p.position.z)
                .collect()
        })
        .collect();
    let last = drops.last().cloned().unwrap_or_else(|| vec![T::zero(); reference.len()]);
    let mechanism = classify_mechanism(&last, slab.central, &slab.interior);
    Ok(IndentationResult {
        record,
        snapshots,
        drops,
        mechanism,
        steps,
    })
}

/// Compares the central block's drop with the other interior blocks'.
pub fn classify_mechanism<T: Real>(drops: &[T], central: usize, interior: &[usize]) -> Mechanism<T> {
    let (runner_up, runner_up_drop) = interior
        .iter()
        .filter(|&&b| b != central)
        .map(|&b| (b, drops[b]))
        .fold((central, T::lit(f64::MIN)), |best, x| if x.1 > best.1 { x } else { best });
    let central_drop = drops[central];
    let runner_up_drop = runner_up_drop.max(T::zero());
    Mechanism {
        central_drop,
        runner_up_drop,
        runner_up,
        push_through: central_drop > T::lit(2.0) * runner_up_drop,
    }
}

/// Everything needed to build, settle and load a slab.
#[derive(Clone, Debug, PartialEq)]
pub struct SlabRunParams<T: Real> {
    pub spec: SlabSpec<T>,
    pub formulation: ContactFormulation<T>,
    /// Target node spacing (mm).
    pub sdp: T,
    /// Level-set grid step (mm).
    pub vdp: T,
    /// Fraction of the stable step used when `dt` is not given.
    pub timestep_factor: T,
    /// Fixed step (s); overrides `timestep_factor`.
    pub dt: Option<T>,
    /// Damping while settling (1/s).
    pub relax_damping: T,
    /// Settling threshold (mJ); defaults to [`SlabSpec::default_ke_threshold`].
    pub ke_threshold: Option<T>,
    pub relax_max_steps: u64,
    /// Indenter speed (mm/s).
    pub speed: T,
    /// Indenter travel after first contact (mm).
    pub delta_max: T,
    /// Damping while loading (1/s).
    pub loading_damping: T,
    pub record_every: u64,
    /// Displacements at which poses are stored (mm), ascending.
    pub snapshot_deltas: Vec<T>,
    /// Step budget of the loading phase.
    pub max_steps: u64,
}

impl<T: Real> SlabRunParams<T> {
    /// 6×6 standard slab at a coarse discretization that runs in minutes
    /// on one core.
    pub fn desk_scale(formulation: ContactFormulation<T>) -> Self {
        Self {
            spec: SlabSpec::standard(),
            formulation,
            sdp: T::lit(0.78),
            vdp: T::lit(0.2),
            timestep_factor: T::lit(0.25),
            dt: None,
            relax_damping: T::lit(50.0),
            ke_threshold: None,
            relax_max_steps: 2_000_000,
            speed: T::lit(100.0),
            delta_max: T::lit(5.0),
            loading_damping: T::zero(),
            record_every: 100,
            snapshot_deltas: (0..=5).map(|d| T::count(d)).collect(),
            max_steps: 5_000_000,
        }
    }

    pub fn build(&self) -> Result<Slab<T>, SimulationError> {
        build_interlocked_slab(&self.spec, self.sdp, self.vdp, self.formulation)
    }
}

/// A settled and loaded slab.
#[derive(Clone, Debug)]
pub struct SlabOutcome<T: Real> {
    pub dt: T,
    pub relax: RelaxReport<T>,
    pub indentation: IndentationResult<T>,
}

/// Settles `slab` under gravity, then drives the indenter.
pub fn run_slab<T: Real>(
    slab: &mut Slab<T>,
    params: &SlabRunParams<T>,
) -> Result<SlabOutcome<T>, IndentationFailure<T>> {
    run_slab_with(slab, params, &mut |_, _| {})
}

/// [`run_slab`] with a loading-phase step observer.
pub fn run_slab_with<T: Real>(
    slab: &mut Slab<T>,
    params: &SlabRunParams<T>,
    on_step: &mut dyn FnMut(u64, &StepReport<T>),
) -> Result<SlabOutcome<T>, IndentationFailure<T>> {
    let abort = |slab: &Slab<T>, error: SimulationError| IndentationFailure {
        error,
        last_snapshot: Snapshot {
            delta: T::zero(),
            poses: slab.world.bodies.iter().map(|b| b.pose()).collect(),
        },
    };
    let dt = match params.dt {
        Some(dt) if dt > T::zero() => dt,
        Some(dt) => {
            let e = SimulationError::InvalidParameter(format!("time step must be positive, got {dt}"));
            return Err(abort(slab, e));
        }
        None => stable_timestep(&slab.world, params.timestep_factor).map_err(|e| abort(slab, e))?,
    };
    let ke_threshold = params
        .ke_threshold
        .unwrap_or_else(|| slab.spec.default_ke_threshold(slab.world.dynamic_mass()));
    let relax = relax_under_gravity(
        &mut slab.world,
        &RelaxParams {
            damping: params.relax_damping,
            ke_threshold,
            dt,
            max_steps: params.relax_max_steps,
            quiet_steps: 100,
            trace_every: 1000,
        },
    )
    .map_err(|e| abort(slab, e))?;
    let indentation = run_indentation_with(
        slab,
        &IndentationParams {
            speed: params.speed,
            delta_max: params.delta_max,
            dt,
            damping: params.loading_damping,
            record_every: params.record_every,
            snapshot_deltas: params.snapshot_deltas.clone(),
            max_steps: params.max_steps,
        },
        on_step,
    )?;
    Ok(SlabOutcome {
        dt,
        relax,
        indentation,
    })
}
