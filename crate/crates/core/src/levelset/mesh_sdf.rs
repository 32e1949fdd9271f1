use std::collections::HashMap;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::grid::{grid_layout, LevelSetGrid};
use crate::error::GeometryError;
use crate::geometry::Aabb;
use crate::real::Real;
use crate::surface::TriangleMesh;

/// Limits applied when building a grid from a mesh.
#[derive(Clone, Copy, Debug)]
pub struct GridBuildOptions {
    /// Maximum number of grid nodes (memory guard).
    pub max_nodes: u64,
    /// Largest tolerated fraction of zero-area triangles.
    pub degenerate_fraction: f64,
    /// Area threshold for "zero-area", relative to the squared box diagonal.
    pub degenerate_area: f64,
}

impl Default for GridBuildOptions {
    fn default() -> Self {
        Self {
            max_nodes: 64 << 20,
            degenerate_fraction: 0.01,
            degenerate_area: 1e-14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Feature {
    Vertex(usize),
    Edge(usize, usize),
    Face,
}

/// Closest point on triangle `abc` to `p`, with the feature it lies on
/// (local vertex indices 0, 1, 2).
fn closest_on_triangle<T: Real>(
    p: &Vector3<T>,
    a: &Vector3<T>,
    b: &Vector3<T>,
    c: &Vector3<T>,
) -> (Vector3<T>, Feature) {
    let zero = T::zero();
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= zero && d2 <= zero {
        return (*a, Feature::Vertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= zero && d4 <= d3 {
        return (*b, Feature::Vertex(1));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= zero && d1 >= zero && d3 <= zero {
        let v = d1 / (d1 - d3);
        return (a + ab * v, Feature::Edge(0, 1));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= zero && d5 <= d6 {
        return (*c, Feature::Vertex(2));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= zero && d2 >= zero && d6 <= zero {
        let w = d2 / (d2 - d6);
        return (a + ac * w, Feature::Edge(0, 2));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= zero && (d4 - d3) >= zero && (d5 - d6) >= zero {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, Feature::Edge(1, 2));
    }
    let denom = T::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, Feature::Face)
}

struct BvhNode<T: Real> {
    bounds: Aabb<T>,
    /// Leaf: `[start, end)` into `order`. Inner: children at `left` and `left + 1`... stored explicitly.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

const LEAF_SIZE: usize = 4;

/// Exact signed distance to a closed triangle mesh, accelerated by a
/// bounding-volume hierarchy. Signs come from angle-weighted pseudo-normals
/// of the closest feature.
pub struct MeshDistance<'a, T: Real> {
    mesh: &'a TriangleMesh<T>,
    order: Vec<usize>,
    nodes: Vec<BvhNode<T>>,
    face_normals: Vec<Vector3<T>>,
    vertex_normals: Vec<Vector3<T>>,
    edge_normals: HashMap<(usize, usize), Vector3<T>>,
}

impl<'a, T: Real> MeshDistance<'a, T> {
    pub fn new(mesh: &'a TriangleMesh<T>, degenerate_area: T) -> Self {
        let nt = mesh.triangles.len();
        let diag = mesh.aabb().extent().norm();
        let threshold = degenerate_area * diag * diag;
        let mut face_normals = Vec::with_capacity(nt);
        let mut vertex_normals = vec![Vector3::zeros(); mesh.vertices.len()];
        let mut edge_normals: HashMap<(usize, usize), Vector3<T>> = HashMap::new();
        let mut order = Vec::with_capacity(nt);
        for t in 0..nt {
            let scaled = mesh.face_normal_scaled(t);
            let area = scaled.norm() * T::lit(0.5);
            if area <= threshold {
                face_normals.push(Vector3::zeros());
                continue;
            }
            let n = scaled / (area * T::lit(2.0));
            face_normals.push(n);
            order.push(t);
            let tri = mesh.triangles[t];
            let pts = mesh.corners(t);
            for k in 0..3 {
                let e1 = pts[(k + 1) % 3] - pts[k];
                let e2 = pts[(k + 2) % 3] - pts[k];
                let cos = (e1.dot(&e2) / (e1.norm() * e2.norm())).clamp(-T::one(), T::one());
                vertex_normals[tri[k]] += n * cos.acos();
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_normals
                    .entry((a.min(b), a.max(b)))
                    .or_insert_with(Vector3::zeros) += n;
            }
        }
        let mut this = Self {
            mesh,
            order,
            nodes: Vec::new(),
            face_normals,
            vertex_normals,
            edge_normals,
        };
        let count = this.order.len();
        if count > 0 {
            this.build(0, count);
        }
        this
    }

    fn tri_bounds(&self, t: usize) -> Aabb<T> {
        let c = self.mesh.corners(t);
        Aabb::from_points(c.iter())
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let bounds = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |b, &t| b.merge(&self.tri_bounds(t)));
        let id = self.nodes.len();
        self.nodes.push(BvhNode {
            bounds,
            start,
            end,
            children: None,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let extent = bounds.extent();
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let mesh = self.mesh;
        let centroid = |t: usize| {
            let [a, b, c] = mesh.corners(t);
            a[axis] + b[axis] + c[axis]
        };
        let mid = (start + end) / 2;
        self.order[start..end].sort_by(|&x, &y| {
            centroid(x)
                .partial_cmp(&centroid(y))
                .expect("finite vertex")
                .then(x.cmp(&y))
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    /// Signed distance at `p` (negative inside).
    pub fn signed_distance(&self, p: &Vector3<T>) -> T {
        self.signed_distance_within(p, T::lit(f64::MAX))
    }

    /// Like [`signed_distance`](Self::signed_distance), with a known upper
    /// bound on `|d|` used to prune the search.
    pub fn signed_distance_within(&self, p: &Vector3<T>, bound: T) -> T {
        let found = match self.nearest(p, bound * bound) {
            Some(hit) => Some(hit),
            None => self.nearest(p, T::lit(f64::MAX)),
        };
        let Some((d2, t, q, feature)) = found else {
            return T::lit(f64::MAX);
        };
        let tri = self.mesh.triangles[t];
        let normal = match feature {
            Feature::Face => self.face_normals[t],
            Feature::Vertex(k) => self.vertex_normals[tri[k]],
            Feature::Edge(i, j) => {
                let (a, b) = (tri[i], tri[j]);
                self.edge_normals[&(a.min(b), a.max(b))]
            }
        };
        let dist = d2.sqrt();
        if (p - q).dot(&normal) < T::zero() {
            -dist
        } else {
            dist
        }
    }

    fn nearest(&self, p: &Vector3<T>, bound2: T) -> Option<(T, usize, Vector3<T>, Feature)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(T, usize, Vector3<T>, Feature)> = None;
        let mut best_d2 = bound2;
        // depth of a median-split tree stays far below this
        let mut stack = [0usize; 128];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let id = stack[top];
            let node = &self.nodes[id];
            if node.bounds.distance_squared(p) > best_d2 {
                continue;
            }
            match node.children {
                None => {
                    for &t in &self.order[node.start..node.end] {
                        let [a, b, c] = self.mesh.corners(t);
                        let (q, feature) = closest_on_triangle(p, &a, &b, &c);
                        let d2 = (p - q).norm_squared();
                        if d2 < best_d2 {
                            best_d2 = d2;
                            best = Some((d2, t, q, feature));
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = self.nodes[l].bounds.distance_squared(p);
                    let dr = self.nodes[r].bounds.distance_squared(p);
                    let (near, far) = if dl < dr { (l, r) } else { (r, l) };
                    stack[top] = far;
                    stack[top + 1] = near;
                    top += 2;
                }
            }
        }
        best
    }
}

/// Samples the exact signed distance to `mesh` on a grid with spacing `step`
/// extending `margin` beyond the mesh bounding box.
pub fn build_grid_from_mesh<T: Real>(
    mesh: &TriangleMesh<T>,
    step: T,
    margin: T,
    options: &GridBuildOptions,
) -> Result<LevelSetGrid<T>, GeometryError> {
    if !(step > T::zero()) {
        return Err(GeometryError::InvalidParameter(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if !(margin >= step * T::lit(2.0)) {
        return Err(GeometryError::InvalidParameter(format!(
            "margin {margin} must be at least twice the step {step}"
        )));
    }
    mesh.validate_closed()?;
    let degenerate = mesh.degenerate_count(T::lit(options.degenerate_area));
    let total = mesh.triangles.len();
    if degenerate as f64 > options.degenerate_fraction * total as f64 {
        return Err(GeometryError::DegenerateMesh {
            degenerate,
            total,
            tolerance: options.degenerate_fraction,
        });
    }
    let (origin, dims) = grid_layout(&mesh.aabb(), step, margin);
    let nodes = dims.iter().map(|&d| d as u64).product::<u64>();
    if nodes > options.max_nodes {
        return Err(GeometryError::GridTooLarge {
            nodes,
            budget: options.max_nodes,
        });
    }
    let sdf = MeshDistance::new(mesh, T::lit(options.degenerate_area));
    let slice = dims[0] * dims[1];
    let mut values = vec![T::zero(); nodes as usize];
    values
        .par_chunks_mut(slice)
        .enumerate()
        .for_each(|(k, chunk)| {
            // |d| is 1-Lipschitz, so the previous node bounds the next one
            let slack = T::lit(1.0 + 1e-9);
            for j in 0..dims[1] {
                let mut bound = T::lit(f64::MAX);
                for i in 0..dims[0] {
                    let p = origin
                        + Vector3::new(T::count(i), T::count(j), T::count(k)) * step;
                    let d = sdf.signed_distance_within(&p, bound);
                    chunk[i + dims[0] * j] = d;
                    bound = (d.abs() + step) * slack;
                }
            }
        });
    Ok(LevelSetGrid {
        origin,
        step,
        dims,
        values,
    })
}
