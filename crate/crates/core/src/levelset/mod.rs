//! Level-set (signed distance) representation of grain volumes.

mod grid;
mod mesh_sdf;
mod sphere;

pub use grid::{FieldSample, LevelSetGrid};
pub use mesh_sdf::{build_grid_from_mesh, GridBuildOptions, MeshDistance};
pub use sphere::{AnalyticSphere, SphereSample};

use crate::geometry::Aabb;
use crate::real::Real;
use nalgebra::Vector3;

/// Gradients shorter than this are treated as undefined.
pub const DEGENERATE_GRADIENT: f64 = 1e-8;

/// The volume representation a grain exposes to contact detection.
#[derive(Clone, Debug, PartialEq)]
pub enum ContactField<T: Real> {
    Grid(LevelSetGrid<T>),
    Sphere(AnalyticSphere<T>),
}

impl<T: Real> ContactField<T> {
    /// Samples the field in the grain's body frame; `None` outside the
    /// field's domain.
    #[inline]
    pub fn sample(&self, p: &Vector3<T>) -> Option<FieldSample<T>> {
        match self {
            ContactField::Grid(g) => g.sample(p),
            ContactField::Sphere(s) => Some(s.sample(p)),
        }
    }

    /// Body-frame box outside which the field reports no penetration.
    pub fn bounds(&self) -> Aabb<T> {
        match self {
            ContactField::Grid(g) => g.bounds(),
            ContactField::Sphere(s) => s.bounds(),
        }
    }

    /// Bound on `|∇φ|` over the domain, used to cull node clusters.
    pub fn lipschitz(&self) -> T {
        match self {
            // each axis derivative of a trilinear interpolant of 1-Lipschitz
            // node data is at most one in magnitude
            ContactField::Grid(_) => T::lit(3f64.sqrt()),
            ContactField::Sphere(_) => T::one(),
        }
    }

    pub fn translate(&mut self, offset: &Vector3<T>) {
        match self {
            ContactField::Grid(g) => g.origin += offset,
            ContactField::Sphere(s) => s.center += offset,
        }
    }
}

#[cfg(test)]
mod tests;
