use nalgebra::Vector3;

use super::TriangleMesh;
use crate::error::GeometryError;
use crate::real::Real;

/// Upper bound on icosphere subdivision rounds (10·4⁹+2 ≈ 2.6M vertices).
pub const MAX_ICOSPHERE_SUBDIVISIONS: u32 = 9;

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

fn icosahedron<T: Real>(radius: T) -> TriangleMesh<T> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let vertices = raw
        .iter()
        .map(|p| {
            let v = Vector3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2]));
            v.normalize() * radius
        })
        .collect();
    TriangleMesh::new(vertices, ICOSAHEDRON_FACES.to_vec())
}

/// Projects a point radially onto the sphere of `radius` about the origin.
pub(crate) fn onto_sphere<T: Real>(radius: T) -> impl Fn(Vector3<T>) -> Vector3<T> {
    move |p: Vector3<T>| p.normalize() * radius
}

/// Icosahedron centred at the origin, subdivided `subdivisions` times with
/// every new vertex pushed onto the sphere. Has `10·4ⁿ + 2` vertices.
pub fn icosphere_mesh<T: Real>(
    radius: T,
    subdivisions: u32,
) -> Result<TriangleMesh<T>, GeometryError> {
    if !(radius > T::zero()) {
        return Err(GeometryError::InvalidParameter(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    if subdivisions > MAX_ICOSPHERE_SUBDIVISIONS {
        return Err(GeometryError::InvalidParameter(format!(
            "{subdivisions} subdivisions exceeds the cap of {MAX_ICOSPHERE_SUBDIVISIONS}"
        )));
    }
    let mut mesh = icosahedron(radius);
    for _ in 0..subdivisions {
        mesh = mesh.subdivide(onto_sphere(radius));
    }
    Ok(mesh)
}

/// Splits the quad `[a, b, c, d]` (cyclic, outward winding) along the
/// diagonal through its lowest vertex index.
fn split_quad(quad: [usize; 4]) -> [[usize; 3]; 2] {
    let k = (0..4).min_by_key(|&i| quad[i]).expect("non-empty quad");
    let q = [quad[k], quad[(k + 1) % 4], quad[(k + 2) % 4], quad[(k + 3) % 4]];
    [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
}

/// Interlocking building block.
///
/// The bottom face is the `side × side` square at `z = 0`. With `z`, the two
/// lateral faces normal to `x` lean outward by `incline_deg` and the two
/// normal to `y` lean inward, so the top is the rectangle
/// `(side + 2h·tanθ) × (side − 2h·tanθ)` at `z = h`. A copy rotated by 90°
/// about `z` mates with it along both in-plane axes.
pub fn interlocking_block_mesh<T: Real>(
    side: T,
    incline_deg: T,
    height: T,
) -> Result<TriangleMesh<T>, GeometryError> {
    if !(side > T::zero()) || !(height > T::zero()) {
        return Err(GeometryError::InvalidParameter(format!(
            "block side and height must be positive (side {side}, height {height})"
        )));
    }
    if !(incline_deg >= T::zero()) || !(incline_deg < T::lit(45.0)) {
        return Err(GeometryError::InvalidParameter(format!(
            "incline must lie in [0, 45) degrees, got {incline_deg}"
        )));
    }
    let half = side * T::lit(0.5);
    let offset = height * (incline_deg * T::pi() / T::lit(180.0)).tan();
    if !(offset < half) {
        return Err(GeometryError::InvalidParameter(format!(
            "height·tan(incline) = {offset} must be below side/2 = {half}"
        )));
    }
    let (wx, wy) = (half + offset, half - offset);
    let z = T::zero();
    let v = |x: T, y: T, z: T| Vector3::new(x, y, z);
    let vertices = vec![
        v(-half, -half, z),
        v(half, -half, z),
        v(half, half, z),
        v(-half, half, z),
        v(-wx, -wy, height),
        v(wx, -wy, height),
        v(wx, wy, height),
        v(-wx, wy, height),
    ];
    let quads = [
        [0, 3, 2, 1], // bottom
        [4, 5, 6, 7], // top
        [0, 1, 5, 4], // -y
        [1, 2, 6, 5], // +x
        [2, 3, 7, 6], // +y
        [3, 0, 4, 7], // -x
    ];
    let triangles = quads.into_iter().flat_map(split_quad).collect();
    Ok(TriangleMesh::new(vertices, triangles))
}
