use nalgebra::{UnitQuaternion, Vector3};
use rayon::prelude::*;

use super::GrainTemplate;
use crate::contact::{
    accumulate_wrench, detect_penetrating_nodes, nodal_normal_force, point_velocity,
    ContactFormulation, ContactLedger, ContactSummary, MasterView, PairHistory, SlaveView, Wrench,
};
use crate::error::SimulationError;
use crate::geometry::Pose;
use crate::real::Real;

/// State of one rigid body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBodyState<T: Real> {
    pub template: usize,
    /// Centre of mass (mm).
    pub position: Vector3<T>,
    pub orientation: UnitQuaternion<T>,
    /// mm/s
    pub velocity: Vector3<T>,
    /// Body axes (rad/s).
    pub angular_velocity: Vector3<T>,
    /// Kinematic bodies follow `prescribed_velocity` and ignore forces.
    pub kinematic: bool,
    pub prescribed_velocity: Vector3<T>,
}

impl<T: Real> RigidBodyState<T> {
    pub fn dynamic(template: usize, pose: Pose<T>) -> Self {
        Self {
            template,
            position: pose.position,
            orientation: pose.orientation,
            velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            kinematic: false,
            prescribed_velocity: Vector3::zeros(),
        }
    }

    pub fn kinematic(template: usize, pose: Pose<T>, velocity: Vector3<T>) -> Self {
        Self {
            kinematic: true,
            prescribed_velocity: velocity,
            ..Self::dynamic(template, pose)
        }
    }

    pub fn pose(&self) -> Pose<T> {
        Pose::new(self.position, self.orientation)
    }

    pub fn linear_velocity(&self) -> Vector3<T> {
        if self.kinematic {
            self.prescribed_velocity
        } else {
            self.velocity
        }
    }

    pub fn angular_velocity_world(&self) -> Vector3<T> {
        self.orientation * self.angular_velocity
    }

    /// Kinematic and not moving.
    pub fn is_fixed(&self) -> bool {
        self.kinematic
            && self.prescribed_velocity == Vector3::zeros()
            && self.angular_velocity == Vector3::zeros()
    }
}

/// Contact results of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T: Real> {
    /// Contact wrench on every body, kinematic ones included.
    pub wrenches: Vec<Wrench<T>>,
    /// One entry per pair with at least one contact node.
    pub pairs: Vec<ContactSummary<T>>,
    pub contacts: usize,
    /// Penetrating nodes skipped for a vanishing gradient.
    pub degenerate: usize,
    /// mJ
    pub penalty_energy: T,
}

/// Templates, bodies and the contact law they interact through.
#[derive(Clone, Debug)]
pub struct World<T: Real> {
    pub templates: Vec<GrainTemplate<T>>,
    pub bodies: Vec<RigidBodyState<T>>,
    pub formulation: ContactFormulation<T>,
    /// mm/s²
    pub gravity: Vector3<T>,
    /// Global viscous damping (1/s).
    pub damping: T,
    pub ledger: ContactLedger<T>,
    /// s
    pub time: T,
    pub step_index: u64,
}

struct PairOutcome<T: Real> {
    pair: (usize, usize),
    on_master: Wrench<T>,
    on_slave: Wrench<T>,
    summary: Option<ContactSummary<T>>,
    degenerate: usize,
    history: PairHistory<T>,
}

impl<T: Real> World<T> {
    pub fn new(formulation: ContactFormulation<T>) -> Self {
        Self {
            templates: Vec::new(),
            bodies: Vec::new(),
            formulation,
            gravity: Vector3::zeros(),
            damping: T::zero(),
            ledger: ContactLedger::new(),
            time: T::zero(),
            step_index: 0,
        }
    }

    pub fn add_template(&mut self, template: GrainTemplate<T>) -> usize {
        self.templates.push(template);
        self.templates.len() - 1
    }

    pub fn add_body(&mut self, body: RigidBodyState<T>) -> usize {
        assert!(body.template < self.templates.len(), "unknown template");
        self.bodies.push(body);
        self.bodies.len() - 1
    }

    pub fn template_of(&self, body: usize) -> &GrainTemplate<T> {
        &self.templates[self.bodies[body].template]
    }

    /// Pairs `(master, slave)` with `master < slave` whose boxes overlap.
    /// Pairs of two fixed bodies and slaves without nodes are left out.
    pub fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let boxes: Vec<_> = self
            .bodies
            .iter()
            .map(|b| {
                let t = &self.templates[b.template];
                (
                    t.field.bounds().transformed(&b.position, &b.orientation),
                    t.node_bounds.transformed(&b.position, &b.orientation),
                )
            })
            .collect();
        let mut pairs = Vec::new();
        for i in 0..self.bodies.len() {
            for j in i + 1..self.bodies.len() {
                if self.bodies[i].is_fixed() && self.bodies[j].is_fixed() {
                    continue;
                }
                if self.template_of(j).nodes.is_empty() {
                    continue;
                }
                if boxes[i].0.intersects(&boxes[j].1) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Detects contacts, evaluates nodal forces and updates the friction
    /// ledger for a step of length `dt`.
    pub fn contact_forces(&mut self, dt: T) -> StepReport<T> {
        let pairs = self.candidate_pairs();
        let histories: Vec<_> = pairs.iter().map(|&p| (p, self.ledger.take(p))).collect();
        self.ledger.clear();
        let step = self.step_index;
        let this = &*self;
        let outcomes: Vec<PairOutcome<T>> = histories
            .into_par_iter()
            .map(|(pair, history)| this.pair_forces(pair, history, dt, step))
            .collect();

        let mut wrenches = vec![Wrench::zero(); self.bodies.len()];
        let mut summaries = Vec::new();
        let mut contacts = 0;
        let mut degenerate = 0;
        let mut energy = T::zero();
        for o in outcomes {
            let (m, s) = o.pair;
            wrenches[m].add(&o.on_master);
            wrenches[s].add(&o.on_slave);
            degenerate += o.degenerate;
            if let Some(summary) = o.summary {
                contacts += summary.count;
                energy += summary.penalty_energy;
                summaries.push(summary);
            }
            self.ledger.restore(o.pair, o.history);
        }
        StepReport {
            wrenches,
            pairs: summaries,
            contacts,
            degenerate,
            penalty_energy: energy,
        }
    }

    fn pair_forces(
        &self,
        pair: (usize, usize),
        mut history: PairHistory<T>,
        dt: T,
        step: u64,
    ) -> PairOutcome<T> {
        let (m, s) = pair;
        let (mb, sb) = (&self.bodies[m], &self.bodies[s]);
        let (mt, st) = (self.template_of(m), self.template_of(s));
        let detection = detect_penetrating_nodes(
            &MasterView {
                id: m,
                field: &mt.field,
                pose: mb.pose(),
            },
            &SlaveView {
                id: s,
                nodes: &st.nodes,
                clusters: Some(&st.clusters),
                pose: sb.pose(),
            },
        );
        let f = &self.formulation;
        let (vm, wm) = (mb.linear_velocity(), mb.angular_velocity_world());
        let (vs, ws) = (sb.linear_velocity(), sb.angular_velocity_world());
        let mut normal = Vec::with_capacity(detection.contacts.len());
        let mut tangential = Vec::with_capacity(detection.contacts.len());
        let mut total = Vec::with_capacity(detection.contacts.len());
        for c in &detection.contacts {
            let fn_a = nodal_normal_force(c, f);
            let fs_a = if f.mu > T::zero() {
                let v_rel = point_velocity(&vs, &ws, &c.slave_arm)
                    - point_velocity(&vm, &wm, &c.master_arm);
                history.update(c, &v_rel, dt, f, step)
            } else {
                Vector3::zeros()
            };
            normal.push(fn_a);
            tangential.push(fs_a);
            total.push(fn_a + fs_a);
        }
        history.drop_inactive(step);
        let w = accumulate_wrench(&detection.contacts, &total);
        PairOutcome {
            pair,
            on_master: w.on_master,
            on_slave: w.on_slave,
            summary: ContactSummary::from_contacts(&detection.contacts, &normal, &tangential, f),
            degenerate: detection.degenerate,
            history,
        }
    }

    /// One full step: contact forces, then integration.
    pub fn step(&mut self, dt: T) -> Result<StepReport<T>, SimulationError> {
        let report = self.contact_forces(dt);
        integrate_step(self, dt, &report.wrenches)?;
        Ok(report)
    }

    /// Kinetic energy of the dynamic bodies (mJ).
    pub fn kinetic_energy(&self) -> T {
        let half = T::lit(0.5);
        self.bodies
            .iter()
            .filter(|b| !b.kinematic)
            .fold(T::zero(), |acc, b| {
                let mp = &self.templates[b.template].mass;
                let w = &b.angular_velocity;
                acc + half * mp.mass * b.velocity.norm_squared() + half * w.dot(&(mp.inertia * w))
            })
    }

    /// Total linear momentum of the dynamic bodies (tonne·mm/s).
    pub fn linear_momentum(&self) -> Vector3<T> {
        self.bodies
            .iter()
            .filter(|b| !b.kinematic)
            .fold(Vector3::zeros(), |acc, b| {
                acc + b.velocity * self.templates[b.template].mass.mass
            })
    }

    pub fn dynamic_mass(&self) -> T {
        self.bodies
            .iter()
            .filter(|b| !b.kinematic)
            .fold(T::zero(), |acc, b| acc + self.templates[b.template].mass.mass)
    }

    /// Deepest penetration over all candidate pairs, without touching the
    /// friction ledger: `(master, slave, depth)`.
    pub fn deepest_penetration(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for (m, s) in self.candidate_pairs() {
            let d = detect_penetrating_nodes(
                &MasterView {
                    id: m,
                    field: &self.template_of(m).field,
                    pose: self.bodies[m].pose(),
                },
                &SlaveView {
                    id: s,
                    nodes: &self.template_of(s).nodes,
                    clusters: Some(&self.template_of(s).clusters),
                    pose: self.bodies[s].pose(),
                },
            );
            for c in d.contacts {
                if best.map_or(true, |(_, _, b)| c.depth > b) {
                    best = Some((m, s, c.depth));
                }
            }
        }
        best
    }

    /// Moves every body by `offset`.
    pub fn translate(&mut self, offset: &Vector3<T>) {
        for b in &mut self.bodies {
            b.position += offset;
        }
    }
}

/// `α·sqrt(m_min / K_max)`.
pub fn stable_timestep_from<T: Real>(min_mass: T, max_stiffness: T, alpha: T) -> T {
    alpha * (min_mass / max_stiffness).sqrt()
}

/// Explicit timestep estimate from the lightest dynamic body and the
/// stiffest template (per-node stiffness times node count).
pub fn stable_timestep<T: Real>(world: &World<T>, alpha: T) -> Result<T, SimulationError> {
    let min_mass = world
        .bodies
        .iter()
        .filter(|b| !b.kinematic)
        .map(|b| world.templates[b.template].mass.mass)
        .reduce(|a, b| a.min(b))
        .ok_or(SimulationError::NoDynamicBody)?;
    let max_stiffness = world
        .bodies
        .iter()
        .map(|b| world.templates[b.template].stiffness_bound(&world.formulation))
        .fold(T::zero(), |a, b| a.max(b));
    if !(max_stiffness > T::zero()) {
        return Err(SimulationError::InvalidScenario(
            "no body carries surface nodes".into(),
        ));
    }
    Ok(stable_timestep_from(min_mass, max_stiffness, alpha))
}

/// Semi-implicit Euler update of every body using the given contact
/// wrenches, the world's gravity and damping.
pub fn integrate_step<T: Real>(
    world: &mut World<T>,
    dt: T,
    wrenches: &[Wrench<T>],
) -> Result<(), SimulationError> {
    assert_eq!(wrenches.len(), world.bodies.len());
    let decay = T::one() - world.damping * dt;
    let gravity = world.gravity;
    for (id, (b, w)) in world.bodies.iter_mut().zip(wrenches).enumerate() {
        if b.kinematic {
            b.position += b.prescribed_velocity * dt;
            if b.angular_velocity != Vector3::zeros() {
                b.orientation = renormalized(
                    b.orientation * UnitQuaternion::from_scaled_axis(b.angular_velocity * dt),
                );
            }
            continue;
        }
        let t = &world.templates[b.template];
        let mp = &t.mass;
        let accel = w.force / mp.mass + gravity;
        b.velocity = (b.velocity + accel * dt) * decay;
        b.position += b.velocity * dt;

        let torque_body = b.orientation.inverse() * w.torque;
        let omega = b.angular_velocity;
        let gyro = omega.cross(&(mp.inertia * omega));
        let alpha = t.inertia_inv * (torque_body - gyro);
        b.angular_velocity = (omega + alpha * dt) * decay;
        b.orientation = renormalized(
            b.orientation * UnitQuaternion::from_scaled_axis(b.angular_velocity * dt),
        );

        let finite = b.position.iter().all(|v| v.is_finite_value())
            && b.velocity.iter().all(|v| v.is_finite_value())
            && b.angular_velocity.iter().all(|v| v.is_finite_value());
        if !finite {
            return Err(SimulationError::NonFinite {
                body: id,
                step: world.step_index,
                time: world.time.as_f64(),
            });
        }
    }
    world.time += dt;
    world.step_index += 1;
    Ok(())
}

fn renormalized<T: Real>(q: UnitQuaternion<T>) -> UnitQuaternion<T> {
    UnitQuaternion::new_normalize(q.into_inner())
}
