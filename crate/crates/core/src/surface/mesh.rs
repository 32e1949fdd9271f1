use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::GeometryError;
use crate::geometry::Aabb;
use crate::real::Real;

/// Closed, outward-oriented triangle mesh in millimetres.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh<T: Real> {
    pub vertices: Vec<Vector3<T>>,
    pub triangles: Vec<[usize; 3]>,
}

impl<T: Real> TriangleMesh<T> {
    pub fn new(vertices: Vec<Vector3<T>>, triangles: Vec<[usize; 3]>) -> Self {
        Self {
            vertices,
            triangles,
        }
    }

    pub fn corners(&self, tri: usize) -> [Vector3<T>; 3] {
        let [a, b, c] = self.triangles[tri];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Non-normalized face normal (twice the area, outward for CCW winding).
    pub fn face_normal_scaled(&self, tri: usize) -> Vector3<T> {
        let [a, b, c] = self.corners(tri);
        (b - a).cross(&(c - a))
    }

    pub fn triangle_area(&self, tri: usize) -> T {
        self.face_normal_scaled(tri).norm() * T::lit(0.5)
    }

    pub fn area(&self) -> T {
        (0..self.triangles.len()).fold(T::zero(), |acc, t| acc + self.triangle_area(t))
    }

    /// Enclosed volume by the divergence theorem.
    pub fn volume(&self) -> T {
        let sixth = T::lit(1.0 / 6.0);
        (0..self.triangles.len()).fold(T::zero(), |acc, t| {
            let [a, b, c] = self.corners(t);
            acc + a.dot(&b.cross(&c)) * sixth
        })
    }

    pub fn aabb(&self) -> Aabb<T> {
        Aabb::from_points(self.vertices.iter())
    }

    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn edge_lengths(&self) -> Vec<T> {
        self.edges()
            .into_iter()
            .map(|(a, b)| (self.vertices[b] - self.vertices[a]).norm())
            .collect()
    }

    /// Median of the unique edge lengths (upper median for even counts).
    pub fn median_edge_length(&self) -> T {
        let mut lengths = self.edge_lengths();
        if lengths.is_empty() {
            return T::zero();
        }
        lengths.sort_by(|a, b| a.partial_cmp(b).expect("finite edge length"));
        lengths[lengths.len() / 2]
    }

    pub fn min_edge_length(&self) -> T {
        self.edge_lengths()
            .into_iter()
            .fold(T::max_value().unwrap_or_else(|| T::lit(f64::MAX)), |m, l| {
                m.min(l)
            })
    }

    /// Checks that every edge is shared by exactly two triangles with
    /// opposite orientation and that no index is out of range.
    pub fn validate_closed(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(GeometryError::BadIndex(t, v));
                }
            }
            let [a, b, c] = *tri;
            for e in [(a, b), (b, c), (c, a)] {
                *directed.entry(e).or_default() += 1;
            }
        }
        let mut keys: Vec<_> = directed.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let fwd = directed[&(a, b)];
            let rev = directed.get(&(b, a)).copied().unwrap_or(0);
            if fwd + rev != 2 {
                return Err(GeometryError::OpenMesh(a.min(b), a.max(b), fwd + rev));
            }
            if fwd != 1 {
                return Err(GeometryError::InconsistentWinding(a.min(b), a.max(b)));
            }
        }
        Ok(())
    }

    /// Number of triangles whose area is below `rel_tol` times the squared
    /// bounding-box diagonal.
    pub fn degenerate_count(&self, rel_tol: T) -> usize {
        let diag = self.aabb().extent().norm();
        let threshold = rel_tol * diag * diag;
        (0..self.triangles.len())
            .filter(|&t| self.triangle_area(t) <= threshold)
            .count()
    }

    pub fn translate(&mut self, offset: &Vector3<T>) {
        for v in &mut self.vertices {
            *v += offset;
        }
    }

    /// Uniform scaling about `center`.
    pub fn scale_about(&mut self, center: &Vector3<T>, factor: T) {
        for v in &mut self.vertices {
            *v = center + (*v - center) * factor;
        }
    }

    pub fn centroid_of_vertices(&self) -> Vector3<T> {
        let sum = self
            .vertices
            .iter()
            .fold(Vector3::zeros(), |acc: Vector3<T>, v| acc + v);
        sum / T::count(self.vertices.len().max(1))
    }

    /// One round of 1-to-4 midpoint subdivision. New vertices are appended
    /// in order of first appearance so results are deterministic.
    pub fn subdivide(&self, project: impl Fn(Vector3<T>) -> Vector3<T>) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        let half = T::lit(0.5);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vector3<T>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = project((vertices[a] + vertices[b]) * half);
                vertices.push(m);
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([b, bc, ab]);
            triangles.push([c, ca, bc]);
            triangles.push([ab, bc, ca]);
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// Vertex count after one subdivision round (V + E).
    pub fn subdivided_vertex_count(&self) -> usize {
        self.vertices.len() + self.edges().len()
    }
}
