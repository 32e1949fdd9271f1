use nalgebra::Vector3;

use crate::geometry::Aabb;
use crate::real::Real;

/// Level-set value and its spatial gradient at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T: Real> {
    pub value: T,
    pub gradient: Vector3<T>,
}

/// Signed distance sampled on a uniform Cartesian grid (negative inside).
///
/// Values are stored x-fastest: node `(i, j, k)` lives at
/// `i + dims[0] * (j + dims[1] * k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetGrid<T: Real> {
    pub origin: Vector3<T>,
    pub step: T,
    pub dims: [usize; 3],
    pub values: Vec<T>,
}

impl<T: Real> LevelSetGrid<T> {
    /// Fills a grid by evaluating `f` at every node.
    pub fn from_fn(
        origin: Vector3<T>,
        step: T,
        dims: [usize; 3],
        f: impl Fn(&Vector3<T>) -> T,
    ) -> Self {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    values.push(f(&node_position(&origin, step, i, j, k)));
                }
            }
        }
        Self {
            origin,
            step,
            dims,
            values,
        }
    }

    #[inline(always)]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline(always)]
    pub fn value_at(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.index(i, j, k)]
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vector3<T> {
        node_position(&self.origin, self.step, i, j, k)
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Closed box spanned by the grid nodes.
    pub fn bounds(&self) -> Aabb<T> {
        let far = Vector3::new(
            T::count(self.dims[0] - 1),
            T::count(self.dims[1] - 1),
            T::count(self.dims[2] - 1),
        ) * self.step;
        Aabb::new(self.origin, self.origin + far)
    }

    /// Trilinear value and the exact gradient of the trilinear interpolant.
    ///
    /// Cells are half-open `[lo, hi)` along each axis, except that points on
    /// the far face of the box belong to the last cell. Returns `None` for
    /// points outside the grid box.
    pub fn sample(&self, p: &Vector3<T>) -> Option<FieldSample<T>> {
        let inv = T::one() / self.step;
        let mut cell = [0usize; 3];
        let mut frac = [T::zero(); 3];
        for a in 0..3 {
            let last = self.dims[a] - 1;
            // same expression as `bounds` so the far face is inside
            let far = self.origin[a] + T::count(last) * self.step;
            if !(p[a] >= self.origin[a]) || p[a] > far {
                return None;
            }
            let u = ((p[a] - self.origin[a]) * inv).min(T::count(last));
            let i = (u.floor_i64().max(0) as usize).min(last - 1);
            cell[a] = i;
            frac[a] = u - T::count(i);
        }
        let [i, j, k] = cell;
        let [fx, fy, fz] = frac;
        let base = self.index(i, j, k);
        let sx = 1;
        let sy = self.dims[0];
        let sz = self.dims[0] * self.dims[1];
        let v = &self.values;
        let c000 = v[base];
        let c100 = v[base + sx];
        let c010 = v[base + sy];
        let c110 = v[base + sx + sy];
        let c001 = v[base + sz];
        let c101 = v[base + sx + sz];
        let c011 = v[base + sy + sz];
        let c111 = v[base + sx + sy + sz];

        let one = T::one();
        let (gx, gy, gz) = (one - fx, one - fy, one - fz);

        // interpolate along x on the four x-edges
        let e00 = c000 * gx + c100 * fx;
        let e10 = c010 * gx + c110 * fx;
        let e01 = c001 * gx + c101 * fx;
        let e11 = c011 * gx + c111 * fx;
        // then along y, then z
        let f0 = e00 * gy + e10 * fy;
        let f1 = e01 * gy + e11 * fy;
        let value = f0 * gz + f1 * fz;

        let dx = ((c100 - c000) * gy * gz
            + (c110 - c010) * fy * gz
            + (c101 - c001) * gy * fz
            + (c111 - c011) * fy * fz)
            * inv;
        let dy = ((e10 - e00) * gz + (e11 - e01) * fz) * inv;
        let dz = (f1 - f0) * inv;

        Some(FieldSample {
            value,
            gradient: Vector3::new(dx, dy, dz),
        })
    }
}

#[inline(always)]
fn node_position<T: Real>(origin: &Vector3<T>, step: T, i: usize, j: usize, k: usize) -> Vector3<T> {
    origin + Vector3::new(T::count(i), T::count(j), T::count(k)) * step
}

/// Origin and node counts of a grid with spacing `step` covering `bounds`
/// grown by `margin` on every side.
pub(crate) fn grid_layout<T: Real>(bounds: &Aabb<T>, step: T, margin: T) -> (Vector3<T>, [usize; 3]) {
    let origin = bounds.min.add_scalar(-margin);
    let extent = bounds.extent().add_scalar(margin * T::lit(2.0));
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let cells = (extent[a] / step).ceil().as_f64() as usize;
        dims[a] = cells.max(1) + 1;
    }
    (origin, dims)
}
