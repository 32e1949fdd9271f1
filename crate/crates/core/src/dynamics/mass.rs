use nalgebra::{Matrix3, Vector3};

use crate::error::GeometryError;
use crate::levelset::LevelSetGrid;
use crate::real::Real;

/// Rigid-body mass data of a grain template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProperties<T: Real> {
    /// tonne
    pub mass: T,
    /// About the centre of mass, body axes (tonne·mm²).
    pub inertia: Matrix3<T>,
    /// Centre of mass in the frame the geometry was built in (mm).
    pub com_offset: Vector3<T>,
}

impl<T: Real> MassProperties<T> {
    /// Solid sphere centred at `center`.
    pub fn solid_sphere(radius: T, density: T, center: Vector3<T>) -> Self {
        let mass = density * T::lit(4.0 / 3.0) * T::pi() * radius * radius * radius;
        let i = T::lit(0.4) * mass * radius * radius;
        Self {
            mass,
            inertia: Matrix3::from_diagonal_element(i),
            com_offset: center,
        }
    }

    /// Voxel integration over the cells of `grid` whose centre sample is
    /// negative. Each counted cell is a uniform cube of side `grid.step`.
    pub fn from_grid(grid: &LevelSetGrid<T>, density: T) -> Result<Self, GeometryError> {
        if !(density > T::zero()) {
            return Err(GeometryError::InvalidParameter(format!(
                "density must be positive, got {density}"
            )));
        }
        let h = grid.step;
        let inside = inside_cells(grid);
        if inside.is_empty() {
            return Err(GeometryError::EmptyInterior);
        }
        let n = T::count(inside.len());
        let mut first = Vector3::zeros();
        for c in &inside {
            first += c;
        }
        let com = first / n;
        let mut second = Matrix3::zeros();
        for c in &inside {
            let r = c - com;
            second += r * r.transpose();
        }
        let cell_mass = density * h * h * h;
        let mass = cell_mass * n;
        // point masses plus each cube's own inertia (h²/6 per axis)
        let trace = second.trace();
        let inertia = (Matrix3::from_diagonal_element(trace) - second) * cell_mass
            + Matrix3::from_diagonal_element(mass * h * h / T::lit(6.0));
        Ok(Self {
            mass,
            inertia,
            com_offset: com,
        })
    }
}

/// Centres of cells whose trilinear centre value is negative.
fn inside_cells<T: Real>(grid: &LevelSetGrid<T>) -> Vec<Vector3<T>> {
    let [nx, ny, nz] = grid.dims;
    let half = grid.step * T::lit(0.5);
    let eighth = T::lit(0.125);
    let mut out = Vec::new();
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut sum = T::zero();
                for (di, dj, dk) in CORNERS {
                    sum += grid.value_at(i + di, j + dj, k + dk);
                }
                if sum * eighth < T::zero() {
                    out.push(grid.node_position(i, j, k).add_scalar(half));
                }
            }
        }
    }
    out
}

const CORNERS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (1, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
];
