use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;
use crate::error::GeometryError;
use crate::surface::{icosphere_mesh, interlocking_block_mesh};

fn sphere_sdf_grid(step: f64) -> LevelSetGrid<f64> {
    AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(step, 2.0 * step)
}

#[test]
fn mesh_grid_matches_sphere_oracle() {
    let mesh = icosphere_mesh(1.0f64, 5).unwrap();
    let step = 0.02f64;
    // margin large enough that (2, 0, 0) is inside the box
    let grid = build_grid_from_mesh(&mesh, step, 1.04, &GridBuildOptions::default()).unwrap();
    let oracle = AnalyticSphere::new(Vector3::zeros(), 1.0);
    for p in [Vector3::zeros(), Vector3::new(2.0, 0.0, 0.0)] {
        let s = grid.sample(&p).unwrap();
        let exact = oracle.evaluate(&p).value;
        assert!((s.value - exact).abs() < 5e-3, "at {p:?}: {} vs {exact}", s.value);
    }
    // every node on the box boundary lies outside the grain
    let [nx, ny, nz] = grid.dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let on_face = i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1;
                if on_face {
                    assert!(grid.value_at(i, j, k) > 0.0);
                }
            }
        }
    }
}

#[test]
fn block_grid_is_exact_inside_and_signed() {
    let (l, theta, h) = (8.33f64, 2.5f64, 3.18f64);
    let mesh = interlocking_block_mesh(l, theta, h).unwrap();
    let step = 0.1;
    let grid = build_grid_from_mesh(&mesh, step, 2.0 * step, &GridBuildOptions::default()).unwrap();
    // planes of the convex block: outward unit normals and offsets
    let planes: Vec<(Vector3<f64>, f64)> = (0..mesh.triangles.len())
        .map(|t| {
            let n = mesh.face_normal_scaled(t).normalize();
            (n, n.dot(&mesh.corners(t)[0]))
        })
        .collect();
    let off = h * theta.to_radians().tan();
    let inside = |p: &Vector3<f64>| {
        p.z > 0.0
            && p.z < h
            && p.x.abs() < l / 2.0 + off * p.z / h
            && p.y.abs() < l / 2.0 - off * p.z / h
    };
    let [nx, ny, nz] = grid.dims;
    let mut interior = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.node_position(i, j, k);
                let v = grid.value_at(i, j, k);
                let plane_max = planes
                    .iter()
                    .map(|(n, d)| n.dot(&p) - d)
                    .fold(f64::MIN, f64::max);
                if plane_max.abs() < 1e-9 {
                    continue;
                }
                assert_eq!(v < 0.0, inside(&p), "sign at {p:?}");
                if inside(&p) {
                    interior += 1;
                    assert!((v - plane_max).abs() < 1e-12, "{v} vs {plane_max}");
                }
                if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                    assert!(v > 0.0);
                }
            }
        }
    }
    assert!(interior > 1000);
}

#[test]
fn linear_field_is_reproduced() {
    let grid = LevelSetGrid::from_fn(Vector3::new(-1.0f64, -2.0, 0.5), 0.25, [9, 7, 5], |p| p.x);
    for p in [
        Vector3::new(-0.3, -1.1, 0.9),
        Vector3::new(0.999, -0.5, 1.5),
        Vector3::new(-1.0, -2.0, 0.5),
        Vector3::new(1.0, -0.5, 1.5),
    ] {
        let s = grid.sample(&p).unwrap();
        assert!((s.value - p.x).abs() < 1e-15);
        assert_eq!(s.gradient, Vector3::new(1.0, 0.0, 0.0));
    }
}

#[test]
fn constant_field_has_zero_gradient() {
    let grid = LevelSetGrid::from_fn(Vector3::zeros(), 0.5, [4, 4, 4], |_| 0.7f64);
    let s = grid.sample(&Vector3::new(0.3, 1.2, 0.9)).unwrap();
    assert_eq!(s.gradient, Vector3::zeros());
    assert!((s.value - 0.7).abs() < 1e-15);
}

#[test]
fn sphere_grid_sample_near_surface() {
    // nodes sit half a step off the axes; with a node on y = z = 0 the
    // transverse gradient of the interpolant is O(step) instead
    let step = 0.02f64;
    let grid = LevelSetGrid::from_fn(Vector3::repeat(-1.05), step, [106, 106, 106], |p| {
        p.norm() - 1.0
    });
    let s = grid.sample(&Vector3::new(0.995, 0.0, 0.0)).unwrap();
    assert!((s.value + 0.005).abs() < 4e-4, "{}", s.value);
    let n = s.gradient.normalize();
    assert!((n - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-2);
}

#[test]
fn outside_box_is_out_of_domain() {
    let grid = sphere_sdf_grid(0.1);
    let b = grid.bounds();
    assert!(grid.sample(&(b.max + Vector3::new(1e-9, 0.0, 0.0))).is_none());
    assert!(grid.sample(&(b.min - Vector3::new(0.0, 0.0, 1e-9))).is_none());
    assert!(grid.sample(&b.max).is_some());
    assert!(grid.sample(&b.min).is_some());
    assert!(grid.sample(&Vector3::new(f64::NAN, 0.0, 0.0)).is_none());
}

#[test]
fn half_open_cells_pick_upper_cell_on_faces() {
    // field is x² so the gradient jumps across the node plane x = 1
    let grid = LevelSetGrid::from_fn(Vector3::<f64>::zeros(), 1.0, [4, 2, 2], |p| p.x * p.x);
    let on_face = grid.sample(&Vector3::new(1.0, 0.5, 0.5)).unwrap();
    // cell [1, 2): slope (4 − 1) / 1
    assert_eq!(on_face.gradient.x, 3.0);
    let far_face = grid.sample(&Vector3::new(3.0, 0.5, 0.5)).unwrap();
    assert_eq!(far_face.gradient.x, 5.0);
}

#[test]
fn analytic_sphere_examples() {
    let s = AnalyticSphere::new(Vector3::zeros(), 1.0f64);
    let a = s.evaluate(&Vector3::new(3.0, 0.0, 0.0));
    assert_eq!(a.value, 2.0);
    assert_eq!(a.gradient, Some(Vector3::new(1.0, 0.0, 0.0)));
    let c = s.evaluate(&Vector3::zeros());
    assert_eq!(c.value, -1.0);
    assert_eq!(c.gradient, None);
    let q = s.evaluate(&Vector3::new(0.3, 0.4, 0.0));
    assert!((q.value + 0.5).abs() < 1e-15);
    assert!((q.gradient.unwrap() - Vector3::new(0.6, 0.8, 0.0)).norm() < 1e-15);
}

#[test]
fn sphere_grid_error_is_second_order() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let points: Vec<Vector3<f64>> = (0..10_000)
        .map(|_| loop {
            let p = Vector3::new(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            );
            // the cone tip at the centre is not smooth; stay in the shell
            let r = p.norm();
            if (0.5..1.5).contains(&r) {
                break p;
            }
        })
        .collect();
    let oracle = AnalyticSphere::new(Vector3::zeros(), 1.0);
    let max_err = |step: f64| {
        let grid = AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(step, 0.6);
        points
            .iter()
            .map(|p| (grid.sample(p).unwrap().value - oracle.evaluate(p).value).abs())
            .fold(0.0, f64::max)
    };
    let coarse = max_err(0.1);
    let fine = max_err(0.05);
    assert!(coarse / fine >= 3.0, "{coarse} / {fine}");
}

#[test]
fn gradient_matches_finite_differences() {
    let grid = sphere_sdf_grid(0.1);
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let h = grid.step / 10.0;
    for _ in 0..500 {
        // pick a cell and a point in its middle region
        let cell = [
            rng.gen_range(0..grid.dims[0] - 1),
            rng.gen_range(0..grid.dims[1] - 1),
            rng.gen_range(0..grid.dims[2] - 1),
        ];
        let frac = Vector3::new(
            rng.gen_range(0.2..0.8),
            rng.gen_range(0.2..0.8),
            rng.gen_range(0.2..0.8),
        );
        let p = grid.node_position(cell[0], cell[1], cell[2]) + frac * grid.step;
        let g = grid.sample(&p).unwrap().gradient;
        for a in 0..3 {
            let mut e = Vector3::zeros();
            e[a] = h;
            let fd = (grid.sample(&(p + e)).unwrap().value - grid.sample(&(p - e)).unwrap().value)
                / (2.0 * h);
            assert!((fd - g[a]).abs() <= 1e-6 * g.norm().max(1e-3), "{fd} vs {}", g[a]);
        }
    }
}

#[test]
fn rejects_open_mesh_and_budget() {
    let mut mesh = icosphere_mesh(1.0f64, 2).unwrap();
    let opts = GridBuildOptions::default();
    assert!(matches!(
        build_grid_from_mesh(&mesh, 0.1, 0.2, &GridBuildOptions { max_nodes: 100, ..opts }),
        Err(GeometryError::GridTooLarge { .. })
    ));
    assert!(build_grid_from_mesh(&mesh, 0.1, 0.1, &opts).is_err());
    assert!(build_grid_from_mesh(&mesh, 0.0, 0.1, &opts).is_err());
    mesh.triangles.truncate(mesh.triangles.len() - 3);
    assert!(matches!(
        build_grid_from_mesh(&mesh, 0.1, 0.2, &opts),
        Err(GeometryError::OpenMesh(..))
    ));
}

#[test]
fn rejects_degenerate_mesh() {
    // tetrahedron with a collapsed apex has zero-area faces
    let mesh = crate::surface::TriangleMesh::new(
        vec![
            Vector3::new(0.0f64, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.5, 0.5, 0.0),
        ],
        vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]],
    );
    assert!(matches!(
        build_grid_from_mesh(&mesh, 0.1, 0.2, &GridBuildOptions::default()),
        Err(GeometryError::DegenerateMesh { .. })
    ));
}

#[test]
fn field_enum_dispatch() {
    let sphere = AnalyticSphere::new(Vector3::new(1.0, 0.0, 0.0), 2.0f64);
    let field = ContactField::Sphere(sphere);
    assert_eq!(field.sample(&Vector3::new(1.0, 0.0, 0.0)).unwrap().gradient, Vector3::zeros());
    assert_eq!(field.bounds().min, Vector3::new(-1.0, -2.0, -2.0));
    let grid = ContactField::Grid(sphere.to_grid(0.25, 0.5));
    let s = grid.sample(&Vector3::new(2.0, 0.0, 0.0)).unwrap();
    assert!((s.value + 1.0).abs() < 0.05);
}

#[test]
fn f32_grid_sampling() {
    let grid = LevelSetGrid::from_fn(Vector3::new(0.0f32, 0.0, 0.0), 0.5, [5, 5, 5], |p| p.y);
    let s = grid.sample(&Vector3::new(1.1, 1.3, 0.2)).unwrap();
    assert!((s.value - 1.3).abs() < 1e-6);
    assert!((s.gradient.y - 1.0).abs() < 1e-6);
}

proptest! {
    #[test]
    fn trilinear_fields_are_reproduced(
        c in proptest::array::uniform8(-3.0f64..3.0),
        fx in 0.0f64..1.0, fy in 0.0f64..1.0, fz in 0.0f64..1.0,
    ) {
        let f = |p: &Vector3<f64>| {
            c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.z
                + c[4] * p.x * p.y + c[5] * p.y * p.z + c[6] * p.x * p.z + c[7] * p.x * p.y * p.z
        };
        let grid = LevelSetGrid::from_fn(Vector3::new(-1.0, -0.5, -2.0), 0.3, [8, 8, 8], f);
        let b = grid.bounds();
        let p = b.min + b.extent().component_mul(&Vector3::new(fx, fy, fz));
        let s = grid.sample(&p).unwrap();
        prop_assert!((s.value - f(&p)).abs() < 1e-12 * (1.0 + f(&p).abs()) * 100.0);
    }
}
