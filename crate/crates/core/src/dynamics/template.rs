use nalgebra::{Matrix3, Vector3};

use super::MassProperties;
use crate::contact::NodeClusters;
use crate::error::GeometryError;
use crate::geometry::Aabb;
use crate::levelset::{build_grid_from_mesh, AnalyticSphere, ContactField, GridBuildOptions};
use crate::real::Real;
use crate::surface::{
    icosphere_mesh, seed_nodes_and_areas, Refinement, SurfaceNodeSet, TriangleMesh,
    DEFAULT_NODE_CAP,
};

/// Nodes per culling cluster.
pub const CLUSTER_SIZE: usize = 32;

/// Immutable shape data shared by every body that uses it.
///
/// All geometry is stored in the body frame, whose origin is the centre of
/// mass. `mass.com_offset` keeps where that centre sat in the frame the
/// geometry was built in.
#[derive(Clone, Debug)]
pub struct GrainTemplate<T: Real> {
    pub name: String,
    /// Refined surface mesh (its vertices are the nodes).
    pub mesh: TriangleMesh<T>,
    pub nodes: SurfaceNodeSet<T>,
    pub clusters: NodeClusters<T>,
    pub field: ContactField<T>,
    pub mass: MassProperties<T>,
    pub inertia_inv: Matrix3<T>,
    /// Box around the nodes.
    pub node_bounds: Aabb<T>,
}

/// How a sphere template represents its volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SphereField<T: Real> {
    /// Exact distance evaluated on the fly.
    Analytic,
    /// Exact distance sampled on a grid with this step (VDP).
    Grid { step: T },
}

impl<T: Real> GrainTemplate<T> {
    /// Assembles a template and moves everything so the centre of mass is
    /// the origin.
    pub fn new(
        name: impl Into<String>,
        mut mesh: TriangleMesh<T>,
        mut nodes: SurfaceNodeSet<T>,
        mut field: ContactField<T>,
        mass: MassProperties<T>,
    ) -> Result<Self, GeometryError> {
        let inertia_inv = mass.inertia.try_inverse().ok_or_else(|| {
            GeometryError::InvalidParameter("inertia tensor is singular".into())
        })?;
        let shift = -mass.com_offset;
        mesh.translate(&shift);
        nodes.translate(&shift);
        field.translate(&shift);
        let clusters = NodeClusters::build(&nodes.nodes, CLUSTER_SIZE);
        let node_bounds = Aabb::from_points(nodes.nodes.iter());
        Ok(Self {
            name: name.into(),
            mesh,
            nodes,
            clusters,
            field,
            mass,
            inertia_inv,
            node_bounds,
        })
    }

    /// Template from a closed planar-faced mesh: nodes seeded at spacing
    /// `sdp`, level set sampled from the unrefined mesh at step `vdp`, mass
    /// by voxel integration.
    pub fn from_mesh(
        name: impl Into<String>,
        mesh: &TriangleMesh<T>,
        sdp: T,
        vdp: T,
        density: T,
        options: &GridBuildOptions,
    ) -> Result<Self, GeometryError> {
        let (refined, nodes) = seed_nodes_and_areas(mesh, sdp, Refinement::Planar, DEFAULT_NODE_CAP)?;
        let grid = build_grid_from_mesh(mesh, vdp, vdp * T::lit(2.0), options)?;
        let mass = MassProperties::from_grid(&grid, density)?;
        Self::new(name, refined, nodes, ContactField::Grid(grid), mass)
    }

    /// Sphere of `radius` centred at the origin with icosphere nodes at
    /// spacing `sdp`.
    pub fn sphere(
        name: impl Into<String>,
        radius: T,
        sdp: T,
        field: SphereField<T>,
        density: T,
    ) -> Result<Self, GeometryError> {
        let base = icosphere_mesh(radius, 0)?;
        let (mesh, nodes) =
            seed_nodes_and_areas(&base, sdp, Refinement::Sphere { radius }, DEFAULT_NODE_CAP)?;
        let exact = AnalyticSphere::new(Vector3::zeros(), radius);
        let field = match field {
            SphereField::Analytic => ContactField::Sphere(exact),
            SphereField::Grid { step } => {
                if !(step > T::zero()) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "grid step must be positive, got {step}"
                    )));
                }
                ContactField::Grid(exact.to_grid(step, step * T::lit(2.0)))
            }
        };
        let mass = MassProperties::solid_sphere(radius, density, Vector3::zeros());
        Self::new(name, mesh, nodes, field, mass)
    }

    /// Sphere that only ever acts as a master (no surface nodes), such as an
    /// indenter.
    pub fn analytic_indenter(
        name: impl Into<String>,
        radius: T,
        density: T,
    ) -> Result<Self, GeometryError> {
        let mesh = icosphere_mesh(radius, 3)?;
        let nodes = SurfaceNodeSet {
            nodes: Vec::new(),
            tributary_area: Vec::new(),
            total_area: mesh.area(),
            spacing: mesh.median_edge_length(),
        };
        let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), radius));
        let mass = MassProperties::solid_sphere(radius, density, Vector3::zeros());
        Self::new(name, mesh, nodes, field, mass)
    }

    /// Largest contact stiffness the template can present (N/mm): per-node
    /// stiffness times node count.
    pub fn stiffness_bound(&self, f: &crate::contact::ContactFormulation<T>) -> T {
        match self.nodes.tributary_area.first() {
            Some(&a) => f.normal_stiffness(a) * T::count(self.nodes.len()),
            None => T::zero(),
        }
    }
}
