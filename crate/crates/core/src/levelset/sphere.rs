use nalgebra::Vector3;

use super::grid::{FieldSample, LevelSetGrid};
use crate::geometry::Aabb;
use crate::real::Real;

/// Exact signed distance of a sphere: `|x − c| − R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticSphere<T: Real> {
    pub center: Vector3<T>,
    pub radius: T,
}

/// Value and gradient of the analytic sphere field. The gradient is `None`
/// at the centre, where it is undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSample<T: Real> {
    pub value: T,
    pub gradient: Option<Vector3<T>>,
}

impl<T: Real> AnalyticSphere<T> {
    pub fn new(center: Vector3<T>, radius: T) -> Self {
        assert!(radius > T::zero(), "sphere radius must be positive");
        Self { center, radius }
    }

    pub fn evaluate(&self, p: &Vector3<T>) -> SphereSample<T> {
        let r = p - self.center;
        let dist = r.norm();
        let gradient = if dist > T::zero() { Some(r / dist) } else { None };
        SphereSample {
            value: dist - self.radius,
            gradient,
        }
    }

    /// Same as [`evaluate`](Self::evaluate) but with a zero gradient at the
    /// centre, which the contact search treats as degenerate.
    pub fn sample(&self, p: &Vector3<T>) -> FieldSample<T> {
        let s = self.evaluate(p);
        FieldSample {
            value: s.value,
            gradient: s.gradient.unwrap_or_else(Vector3::zeros),
        }
    }

    pub fn bounds(&self) -> Aabb<T> {
        Aabb::new(
            self.center.add_scalar(-self.radius),
            self.center.add_scalar(self.radius),
        )
    }

    /// Samples the exact field on a grid with spacing `step` and `margin`
    /// around the sphere.
    pub fn to_grid(&self, step: T, margin: T) -> LevelSetGrid<T> {
        let (origin, dims) = super::grid::grid_layout(&self.bounds(), step, margin);
        LevelSetGrid::from_fn(origin, step, dims, |p| (p - self.center).norm() - self.radius)
    }
}
