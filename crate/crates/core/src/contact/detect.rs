use nalgebra::Vector3;

use super::{NodeClusters, NodalContact};
use crate::geometry::Pose;
use crate::levelset::{ContactField, DEGENERATE_GRADIENT};
use crate::real::Real;
use crate::surface::SurfaceNodeSet;

/// The level-set side of a pair.
#[derive(Clone, Copy, Debug)]
pub struct MasterView<'a, T: Real> {
    pub id: usize,
    pub field: &'a ContactField<T>,
    pub pose: Pose<T>,
}

/// The node side of a pair.
#[derive(Clone, Copy, Debug)]
pub struct SlaveView<'a, T: Real> {
    pub id: usize,
    pub nodes: &'a SurfaceNodeSet<T>,
    /// Optional grouping used to skip distant nodes; results are the same
    /// with or without it.
    pub clusters: Option<&'a NodeClusters<T>>,
    pub pose: Pose<T>,
}

/// Contacts found for one pair, ordered by node index.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection<T: Real> {
    pub contacts: Vec<NodalContact<T>>,
    /// Penetrating nodes skipped because the gradient vanished.
    pub degenerate: usize,
}

/// Tests the slave's nodes against the master's level set.
///
/// A node is in contact when the sampled value is strictly negative; nodes
/// outside the master's field domain are ignored.
pub fn detect_penetrating_nodes<T: Real>(
    master: &MasterView<'_, T>,
    slave: &SlaveView<'_, T>,
) -> Detection<T> {
    // slave body frame -> master body frame
    let rel = master.pose.relative(&slave.pose);
    let offset = slave.pose.position - master.pose.position;
    let eps = T::lit(DEGENERATE_GRADIENT);
    let mut out = Detection {
        contacts: Vec::new(),
        degenerate: 0,
    };

    let mut test = |node: usize| {
        let p = &slave.nodes.nodes[node];
        let q = rel.to_world(p);
        let Some(s) = master.field.sample(&q) else {
            return;
        };
        if !(s.value < T::zero()) {
            return;
        }
        let g = s.gradient.norm();
        if !(g >= eps) {
            out.degenerate += 1;
            return;
        }
        let normal = master.pose.orientation * (s.gradient / g);
        let slave_arm = slave.pose.orientation * p;
        out.contacts.push(NodalContact {
            master: master.id,
            slave: slave.id,
            node,
            position: slave.pose.position + slave_arm,
            slave_arm,
            master_arm: offset + slave_arm,
            depth: -s.value,
            normal,
            area: slave.nodes.tributary_area[node],
        });
    };

    match slave.clusters {
        None => (0..slave.nodes.len()).for_each(&mut test),
        Some(groups) => {
            let bounds = master.field.bounds();
            let lipschitz = master.field.lipschitz();
            for c in &groups.clusters {
                let q = rel.to_world(&c.center);
                if bounds.distance_squared(&q) > c.radius * c.radius {
                    continue;
                }
                let far = match master.field.sample(&q) {
                    // φ(node) ≥ φ(centre) − L·|node − centre|
                    Some(s) => s.value > lipschitz * c.radius * T::lit(1.0 + 1e-9),
                    None => false,
                };
                if !far {
                    groups.members(c).iter().for_each(|&n| test(n));
                }
            }
            out.contacts.sort_by_key(|c| c.node);
        }
    }
    out
}

/// World-axis velocity of a point at `arm` from a body's centre of mass.
#[inline]
pub(crate) fn point_velocity<T: Real>(
    velocity: &Vector3<T>,
    angular_velocity_world: &Vector3<T>,
    arm: &Vector3<T>,
) -> Vector3<T> {
    velocity + angular_velocity_world.cross(arm)
}
