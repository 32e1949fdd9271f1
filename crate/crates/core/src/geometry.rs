//! Small geometric helpers shared across modules.

use nalgebra::{UnitQuaternion, Vector3};

use crate::real::Real;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T: Real> {
    pub min: Vector3<T>,
    pub max: Vector3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vector3<T>, max: Vector3<T>) -> Self {
        Self { min, max }
    }

    /// Inverted box that any `grow` call will replace.
    pub fn empty() -> Self {
        let big = T::lit(f64::MAX);
        Self {
            min: Vector3::repeat(big),
            max: Vector3::repeat(-big),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vector3<T>>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vector3<T>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|k| self.min[k] > self.max[k])
    }

    pub fn extent(&self) -> Vector3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vector3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn expanded(&self, margin: T) -> Self {
        Self {
            min: self.min.add_scalar(-margin),
            max: self.max.add_scalar(margin),
        }
    }

    pub fn contains(&self, p: &Vector3<T>) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: &Vector3<T>) -> T {
        let mut d2 = T::zero();
        for k in 0..3 {
            let d = (self.min[k] - p[k]).max(p[k] - self.max[k]).max(T::zero());
            d2 += d * d;
        }
        d2
    }

    /// World box enclosing this body-frame box under the rigid transform.
    pub fn transformed(&self, position: &Vector3<T>, orientation: &UnitQuaternion<T>) -> Self {
        let mut out = Self::empty();
        for i in 0..8 {
            let corner = Vector3::new(
                if i & 1 == 0 { self.min.x } else { self.max.x },
                if i & 2 == 0 { self.min.y } else { self.max.y },
                if i & 4 == 0 { self.min.z } else { self.max.z },
            );
            out.grow(&(position + orientation * corner));
        }
        out
    }
}

/// Rigid placement of a body frame in the world.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose<T: Real> {
    pub position: Vector3<T>,
    pub orientation: UnitQuaternion<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vector3<T>, orientation: UnitQuaternion<T>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), UnitQuaternion::identity())
    }

    pub fn translation(position: Vector3<T>) -> Self {
        Self::new(position, UnitQuaternion::identity())
    }

    pub fn to_world(&self, p: &Vector3<T>) -> Vector3<T> {
        self.position + self.orientation * p
    }

    /// Maps a point of `other`'s frame into this frame, going through the
    /// position difference only, so a common translation of both poses
    /// cancels before any rotation is applied.
    pub fn relative(&self, other: &Pose<T>) -> Pose<T> {
        let inv = self.orientation.inverse();
        Pose::new(
            inv * (other.position - self.position),
            inv * other.orientation,
        )
    }
}
