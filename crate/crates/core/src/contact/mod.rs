//! Node-to-level-set contact between rigid grains.
//!
//! For every pair the body with the lower index is the master (its level set
//! is sampled) and the other is the slave (its surface nodes are tested).
//! Forces computed here act on the slave; the master receives the exact
//! negative at the same point.

mod cluster;
mod detect;
mod ledger;

pub use cluster::{Cluster, NodeClusters};
pub use detect::{detect_penetrating_nodes, Detection, MasterView, SlaveView};
pub(crate) use detect::point_velocity;
pub use ledger::{ContactLedger, PairHistory, TangentialEntry};

use nalgebra::Vector3;

use crate::error::SimulationError;
use crate::real::Real;

/// Which penalty law the contact kernel applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormulationMode {
    /// Force per unit penetration at every node (`k_n`, `k_s`).
    Original,
    /// Traction per unit penetration, weighted by the node's tributary area
    /// (`k_n*`, `k_s*`).
    Adapted,
}

impl FormulationMode {
    pub fn name(&self) -> &'static str {
        match self {
            FormulationMode::Original => "original",
            FormulationMode::Adapted => "adapted",
        }
    }
}

/// Penalty and friction parameters in internal units (N, mm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactFormulation<T: Real> {
    pub mode: FormulationMode,
    /// N/mm
    pub k_n: T,
    /// N/mm
    pub k_s: T,
    /// N/mm³
    pub k_n_star: T,
    /// N/mm³
    pub k_s_star: T,
    pub mu: T,
}

impl<T: Real> ContactFormulation<T> {
    pub fn original(k_n: T, k_s: T, mu: T) -> Self {
        Self {
            mode: FormulationMode::Original,
            k_n,
            k_s,
            k_n_star: T::zero(),
            k_s_star: T::zero(),
            mu,
        }
    }

    pub fn adapted(k_n_star: T, k_s_star: T, mu: T) -> Self {
        Self {
            mode: FormulationMode::Adapted,
            k_n: T::zero(),
            k_s: T::zero(),
            k_n_star,
            k_s_star,
            mu,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let (kn, ks, names) = match self.mode {
            FormulationMode::Original => (self.k_n, self.k_s, ("k_n", "k_s")),
            FormulationMode::Adapted => (self.k_n_star, self.k_s_star, ("k_n_star", "k_s_star")),
        };
        if !(kn > T::zero()) || !kn.is_finite_value() {
            return Err(SimulationError::InvalidParameter(format!(
                "{} must be positive, got {kn}",
                names.0
            )));
        }
        if !(ks > T::zero()) || !ks.is_finite_value() {
            return Err(SimulationError::InvalidParameter(format!(
                "{} must be positive, got {ks}",
                names.1
            )));
        }
        if !(self.mu >= T::zero()) {
            return Err(SimulationError::InvalidParameter(format!(
                "friction coefficient must be non-negative, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Normal stiffness of one node (N/mm).
    #[inline]
    pub fn normal_stiffness(&self, area: T) -> T {
        match self.mode {
            FormulationMode::Original => self.k_n,
            FormulationMode::Adapted => self.k_n_star * area,
        }
    }

    /// Tangential stiffness of one node (N/mm).
    #[inline]
    pub fn tangential_stiffness(&self, area: T) -> T {
        match self.mode {
            FormulationMode::Original => self.k_s,
            FormulationMode::Adapted => self.k_s_star * area,
        }
    }

    /// Copy with every stiffness multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            k_n: self.k_n * factor,
            k_s: self.k_s * factor,
            k_n_star: self.k_n_star * factor,
            k_s_star: self.k_s_star * factor,
            ..*self
        }
    }
}

/// One slave node found inside the master's level set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalContact<T: Real> {
    pub master: usize,
    pub slave: usize,
    pub node: usize,
    /// World position of the node.
    pub position: Vector3<T>,
    /// Node position relative to the slave's centre of mass (world axes).
    pub slave_arm: Vector3<T>,
    /// Node position relative to the master's centre of mass (world axes).
    pub master_arm: Vector3<T>,
    /// Penetration depth, strictly positive.
    pub depth: T,
    /// Unit outward normal of the master's level set, world axes.
    pub normal: Vector3<T>,
    pub area: T,
}

/// Normal force on the slave: `k·d·n̂` with `k = k_n` or `k_n*·A_a`.
#[inline]
pub fn nodal_normal_force<T: Real>(c: &NodalContact<T>, f: &ContactFormulation<T>) -> Vector3<T> {
    c.normal * (f.normal_stiffness(c.area) * c.depth)
}

/// Incremental Coulomb friction force on the slave.
///
/// The stored force is projected onto the current tangent plane, incremented
/// by `−k·ΔS` with `ΔS` the tangential slip over `dt`, and capped at
/// `μ|F_n|`. `previous` is the stored force from the last step (zero for a
/// fresh contact).
pub fn nodal_tangential_force<T: Real>(
    c: &NodalContact<T>,
    relative_velocity: &Vector3<T>,
    dt: T,
    f: &ContactFormulation<T>,
    previous: &Vector3<T>,
) -> Vector3<T> {
    let n = &c.normal;
    let slip = (relative_velocity - n * relative_velocity.dot(n)) * dt;
    let carried = previous - n * previous.dot(n);
    let trial = carried - slip * f.tangential_stiffness(c.area);
    let cap = f.mu * f.normal_stiffness(c.area) * c.depth;
    let magnitude = trial.norm();
    if magnitude > cap {
        if magnitude > T::zero() {
            trial * (cap / magnitude)
        } else {
            Vector3::zeros()
        }
    } else {
        trial
    }
}

/// Force and torque increment on one body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrench<T: Real> {
    pub force: Vector3<T>,
    /// About the body's centre of mass, world axes (N·mm).
    pub torque: Vector3<T>,
}

impl<T: Real> Wrench<T> {
    pub fn zero() -> Self {
        Self {
            force: Vector3::zeros(),
            torque: Vector3::zeros(),
        }
    }

    pub fn add(&mut self, other: &Wrench<T>) {
        self.force += other.force;
        self.torque += other.torque;
    }
}

/// Resultant wrenches of one master/slave pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairWrench<T: Real> {
    pub on_slave: Wrench<T>,
    pub on_master: Wrench<T>,
}

/// Sums nodal forces into the pair's slave and master wrenches.
///
/// The master's force is accumulated from the negated nodal forces in the
/// same order, so it is the exact negative of the slave's.
pub fn accumulate_wrench<T: Real>(
    contacts: &[NodalContact<T>],
    forces: &[Vector3<T>],
) -> PairWrench<T> {
    assert_eq!(contacts.len(), forces.len());
    let mut on_slave = Wrench::zero();
    let mut on_master = Wrench::zero();
    for (c, f) in contacts.iter().zip(forces) {
        let reaction = -f;
        on_slave.force += f;
        on_slave.torque += c.slave_arm.cross(f);
        on_master.force += reaction;
        on_master.torque += c.master_arm.cross(&reaction);
    }
    PairWrench {
        on_slave,
        on_master,
    }
}

/// Whole-contact penetration stiffness (N/mm).
///
/// Original: `|ΣF_n| / mean(d)`. Adapted: `Σ |F_a| / d_a`, which equals
/// `k_n*·ΣA_a`. `None` for an empty contact set.
pub fn grain_penetration_stiffness<T: Real>(
    contacts: &[NodalContact<T>],
    f: &ContactFormulation<T>,
) -> Option<T> {
    match f.mode {
        FormulationMode::Original => resultant_stiffness(contacts, f),
        FormulationMode::Adapted => summed_stiffness(contacts, f),
    }
}

/// `|ΣF_n| / mean(d)`.
pub fn resultant_stiffness<T: Real>(
    contacts: &[NodalContact<T>],
    f: &ContactFormulation<T>,
) -> Option<T> {
    if contacts.is_empty() {
        return None;
    }
    let mut total = Vector3::zeros();
    let mut depth = T::zero();
    for c in contacts {
        total += nodal_normal_force(c, f);
        depth += c.depth;
    }
    let mean = depth / T::count(contacts.len());
    Some(total.norm() / mean)
}

/// `Σ |F_a| / d_a`.
pub fn summed_stiffness<T: Real>(
    contacts: &[NodalContact<T>],
    f: &ContactFormulation<T>,
) -> Option<T> {
    if contacts.is_empty() {
        return None;
    }
    Some(
        contacts
            .iter()
            .fold(T::zero(), |acc, c| acc + nodal_normal_force(c, f).norm() / c.depth),
    )
}

/// Per-pair contact statistics for one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactSummary<T: Real> {
    pub master: usize,
    pub slave: usize,
    pub count: usize,
    pub mean_depth: T,
    pub total_area: T,
    pub resultant_stiffness: T,
    pub summed_stiffness: T,
    pub normal_force: T,
    pub tangential_force: T,
    /// `Σ ½·k·d²` over the pair's nodes (mJ).
    pub penalty_energy: T,
}

impl<T: Real> ContactSummary<T> {
    pub fn from_contacts(
        contacts: &[NodalContact<T>],
        normal: &[Vector3<T>],
        tangential: &[Vector3<T>],
        f: &ContactFormulation<T>,
    ) -> Option<Self> {
        let first = contacts.first()?;
        let n = T::count(contacts.len());
        let mut depth = T::zero();
        let mut area = T::zero();
        let mut fn_sum = Vector3::zeros();
        let mut fs_sum = Vector3::zeros();
        let mut energy = T::zero();
        let mut summed = T::zero();
        let half = T::lit(0.5);
        for ((c, fn_a), fs_a) in contacts.iter().zip(normal).zip(tangential) {
            depth += c.depth;
            area += c.area;
            fn_sum += fn_a;
            fs_sum += fs_a;
            summed += fn_a.norm() / c.depth;
            energy += half * f.normal_stiffness(c.area) * c.depth * c.depth;
        }
        let mean_depth = depth / n;
        Some(Self {
            master: first.master,
            slave: first.slave,
            count: contacts.len(),
            mean_depth,
            total_area: area,
            resultant_stiffness: fn_sum.norm() / mean_depth,
            summed_stiffness: summed,
            normal_force: fn_sum.norm(),
            tangential_force: fs_sum.norm(),
            penalty_energy: energy,
        })
    }
}

#[cfg(test)]
mod tests;
