use nalgebra::Vector3;

use super::generate::onto_sphere;
use super::TriangleMesh;
use crate::error::GeometryError;
use crate::real::Real;

/// Default cap on refined node count per grain.
pub const DEFAULT_NODE_CAP: usize = 4_000_000;

/// How new midpoints are placed while refining.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Refinement<T: Real> {
    /// Flat faces: midpoints stay on the edge.
    Planar,
    /// Sphere about the origin: midpoints are reprojected radially.
    Sphere { radius: T },
}

/// Surface nodes of a grain with their tributary areas.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceNodeSet<T: Real> {
    pub nodes: Vec<Vector3<T>>,
    pub tributary_area: Vec<T>,
    pub total_area: T,
    /// Achieved median edge length of the refined mesh (SDP).
    pub spacing: T,
}

impl<T: Real> SurfaceNodeSet<T> {
    /// Node set on the vertices of `mesh`, each node carrying
    /// `total_area / N`.
    pub fn uniform(mesh: &TriangleMesh<T>) -> Self {
        let total_area = mesh.area();
        let n = mesh.vertices.len();
        let each = total_area / T::count(n.max(1));
        Self {
            nodes: mesh.vertices.clone(),
            tributary_area: vec![each; n],
            total_area,
            spacing: mesh.median_edge_length(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn translate(&mut self, offset: &Vector3<T>) {
        for p in &mut self.nodes {
            *p += offset;
        }
    }
}

/// Refines `mesh` by midpoint subdivision until its median edge length is at
/// most `target_spacing`, then seeds one node per vertex with the uniform
/// tributary area rule.
pub fn seed_nodes_and_areas<T: Real>(
    mesh: &TriangleMesh<T>,
    target_spacing: T,
    refinement: Refinement<T>,
    node_cap: usize,
) -> Result<(TriangleMesh<T>, SurfaceNodeSet<T>), GeometryError> {
    if !(target_spacing > T::zero()) {
        return Err(GeometryError::InvalidParameter(format!(
            "node spacing must be positive, got {target_spacing}"
        )));
    }
    let feature = match refinement {
        Refinement::Planar => mesh.min_edge_length(),
        Refinement::Sphere { radius } => radius * T::lit(2.0),
    };
    let limit = feature * T::lit(0.25);
    if target_spacing > limit {
        return Err(GeometryError::InvalidParameter(format!(
            "node spacing {target_spacing} exceeds a quarter of the smallest feature ({limit})"
        )));
    }
    let mut refined = mesh.clone();
    while refined.median_edge_length() > target_spacing {
        let next = refined.subdivided_vertex_count();
        if next > node_cap {
            return Err(GeometryError::TooManyNodes {
                nodes: next,
                cap: node_cap,
            });
        }
        refined = match refinement {
            Refinement::Planar => refined.subdivide(|p| p),
            Refinement::Sphere { radius } => refined.subdivide(onto_sphere(radius)),
        };
    }
    let nodes = SurfaceNodeSet::uniform(&refined);
    Ok((refined, nodes))
}
