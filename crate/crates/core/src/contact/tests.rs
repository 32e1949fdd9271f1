use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

use super::*;
use crate::geometry::Pose;
use crate::levelset::{AnalyticSphere, ContactField};
use crate::surface::{icosphere_mesh, SurfaceNodeSet};

fn sphere_nodes(radius: f64, level: u32) -> SurfaceNodeSet<f64> {
    SurfaceNodeSet::uniform(&icosphere_mesh(radius, level).unwrap())
}

fn contact(depth: f64, normal: Vector3<f64>, area: f64) -> NodalContact<f64> {
    NodalContact {
        master: 0,
        slave: 1,
        node: 0,
        position: Vector3::zeros(),
        slave_arm: Vector3::zeros(),
        master_arm: Vector3::zeros(),
        depth,
        normal,
        area,
    }
}

/// Unit sphere at the origin as master, slave sphere of the same size
/// centred at `slave_center`.
fn two_sphere_detection(
    field: &ContactField<f64>,
    nodes: &SurfaceNodeSet<f64>,
    slave_center: Vector3<f64>,
    clusters: Option<&NodeClusters<f64>>,
) -> Detection<f64> {
    let master = MasterView {
        id: 0,
        field,
        pose: Pose::identity(),
    };
    let slave = SlaveView {
        id: 1,
        nodes,
        clusters,
        pose: Pose::translation(slave_center),
    };
    detect_penetrating_nodes(&master, &slave)
}

#[test]
fn separated_spheres_have_no_contacts() {
    let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), 1.0));
    let nodes = sphere_nodes(1.0, 3);
    let d = two_sphere_detection(&field, &nodes, Vector3::new(3.0, 0.0, 0.0), None);
    assert!(d.contacts.is_empty());
    let grid = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(0.05, 0.1));
    let d = two_sphere_detection(&grid, &nodes, Vector3::new(3.0, 0.0, 0.0), None);
    assert!(d.contacts.is_empty());
}

#[test]
fn overlapping_spheres_match_analytic_overlap() {
    let step = 0.02;
    let field = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(step, 2.0 * step));
    let nodes = sphere_nodes(1.0, 5);
    let center = Vector3::new(0.0, 0.0, 1.9);
    let d = two_sphere_detection(&field, &nodes, center, None);
    assert!(!d.contacts.is_empty());
    // trilinear interpolation of |x| − 1 overestimates by at most ~step²/(2r)
    let tol = step * step;
    let mut penetrating = 0;
    for (i, p) in nodes.nodes.iter().enumerate() {
        let exact = 1.0 - (p + center).norm();
        if exact > tol {
            penetrating += 1;
            assert!(d.contacts.iter().any(|c| c.node == i), "node {i} missed");
        }
    }
    for c in &d.contacts {
        let exact = 1.0 - c.position.norm();
        assert!(exact > -tol);
        assert!(c.depth <= 0.1 + tol);
        assert!((c.depth - exact).abs() <= tol);
        assert!(c.normal.dot(&Vector3::z()) > 0.0);
        assert!((c.normal.norm() - 1.0).abs() < 1e-9);
    }
    assert!(penetrating > 10);
}

#[test]
fn surface_node_is_not_a_contact() {
    let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), 1.0));
    let nodes = SurfaceNodeSet {
        nodes: vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(0.0, 0.0, -3.0)],
        tributary_area: vec![0.5, 0.5],
        total_area: 1.0,
        spacing: 1.0,
    };
    // first node lands exactly on the master's surface at (0, 0, 1)
    let d = two_sphere_detection(&field, &nodes, Vector3::new(0.0, 0.0, 2.0), None);
    assert!(d.contacts.is_empty());
    let d = two_sphere_detection(&field, &nodes, Vector3::new(0.0, 0.0, 1.75), None);
    assert_eq!(d.contacts.len(), 1);
    assert_eq!(d.contacts[0].node, 0);
    assert_eq!(d.contacts[0].depth, 0.25);
}

#[test]
fn degenerate_gradient_is_skipped_and_counted() {
    let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), 1.0));
    let nodes = SurfaceNodeSet {
        nodes: vec![Vector3::zeros()],
        tributary_area: vec![1.0],
        total_area: 1.0,
        spacing: 1.0,
    };
    let d = two_sphere_detection(&field, &nodes, Vector3::zeros(), None);
    assert!(d.contacts.is_empty());
    assert_eq!(d.degenerate, 1);
}

#[test]
fn clustered_detection_equals_brute_force() {
    let field = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(0.05, 0.1));
    let nodes = sphere_nodes(1.0, 4);
    let groups = NodeClusters::build(&nodes.nodes, 16);
    let mut seen: Vec<usize> = groups.order.clone();
    seen.sort_unstable();
    assert_eq!(seen, (0..nodes.len()).collect::<Vec<_>>());
    for center in [
        Vector3::new(0.0, 0.0, 1.9),
        Vector3::new(0.3, -1.2, 1.1),
        Vector3::new(0.0, 0.0, 0.4),
        Vector3::new(2.5, 0.0, 0.0),
    ] {
        let brute = two_sphere_detection(&field, &nodes, center, None);
        let fast = two_sphere_detection(&field, &nodes, center, Some(&groups));
        assert_eq!(brute, fast);
    }
}

#[test]
fn normal_force_examples() {
    let n = Vector3::new(0.0, 0.0, 1.0);
    let original = ContactFormulation::original(2e9, 1e9, 0.0);
    let f = nodal_normal_force(&contact(1e-6, n, 0.157), &original);
    assert!((f.norm() - 2e3).abs() < 1e-9);
    assert_eq!(f.normalize(), n);
    // 2 GPa/mm = 2e3 N/mm³; 2e3 · 1e-6 · 0.157 = 3.14e-4 N
    let adapted = ContactFormulation::adapted(2e3, 1e3, 0.0);
    let f = nodal_normal_force(&contact(1e-6, n, 0.157), &adapted);
    assert!((f.norm() - 3.14e-4).abs() < 1e-15);
    for d in [1e-3, 1e-9, 1e-15] {
        assert!(nodal_normal_force(&contact(d, n, 0.157), &adapted).norm() <= 2e3 * d * 0.157 * (1.0 + 1e-15));
    }
}

#[test]
fn formulation_swap_is_bitwise() {
    let n = Vector3::new(0.6, 0.0, 0.8);
    let area = 0.1234567;
    let adapted = ContactFormulation::adapted(2e3, 1.7e3, 0.23);
    let original = ContactFormulation::original(2e3 * area, 1.7e3 * area, 0.23);
    let c = contact(3.3e-4, n, area);
    assert_eq!(nodal_normal_force(&c, &adapted), nodal_normal_force(&c, &original));
    let v = Vector3::new(1.0, 2.0, -0.5);
    let prev = Vector3::new(1e-3, 0.0, 0.0);
    assert_eq!(
        nodal_tangential_force(&c, &v, 1e-6, &adapted, &prev),
        nodal_tangential_force(&c, &v, 1e-6, &original, &prev)
    );
}

#[test]
fn quadrupled_stiffness_quadruples_forces_exactly() {
    let field = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(0.05, 0.1));
    let nodes = sphere_nodes(1.0, 4);
    let d = two_sphere_detection(&field, &nodes, Vector3::new(0.1, 0.0, 1.85), None);
    for f in [
        ContactFormulation::original(3.3, 1.1, 0.0),
        ContactFormulation::adapted(3.3, 1.1, 0.0),
    ] {
        let f4 = f.scaled(4.0);
        let forces: Vec<_> = d.contacts.iter().map(|c| nodal_normal_force(c, &f)).collect();
        let forces4: Vec<_> = d.contacts.iter().map(|c| nodal_normal_force(c, &f4)).collect();
        for (a, b) in forces.iter().zip(&forces4) {
            assert_eq!(a * 4.0, *b);
        }
        let w = accumulate_wrench(&d.contacts, &forces);
        let w4 = accumulate_wrench(&d.contacts, &forces4);
        assert_eq!(w.on_slave.force * 4.0, w4.on_slave.force);
        assert_eq!(w.on_master.torque * 4.0, w4.on_master.torque);
    }
}

#[test]
fn zero_friction_gives_zero_tangential_force() {
    let f = ContactFormulation::adapted(2e3, 2e3, 0.0);
    let c = contact(1e-3, Vector3::z(), 0.1);
    let t = nodal_tangential_force(&c, &Vector3::new(5.0, 1.0, 0.0), 1e-5, &f, &Vector3::zeros());
    assert_eq!(t, Vector3::zeros());
}

#[test]
fn sticking_step_is_elastic() {
    let f = ContactFormulation::original(1e3, 500.0, 0.5);
    let c = contact(1e-2, Vector3::z(), 0.1);
    // |k·ΔS| = 500 · 2 · 1e-5 = 1e-2 < μ|F_n| = 5
    let v = Vector3::new(2.0, 0.0, 3.0);
    let t = nodal_tangential_force(&c, &v, 1e-5, &f, &Vector3::zeros());
    assert_eq!(t, Vector3::new(-500.0 * 2.0 * 1e-5, 0.0, 0.0));
}

#[test]
fn persistent_sliding_reaches_coulomb_cap() {
    let f = ContactFormulation::adapted(2e3, 2e3, 0.23);
    let mut ledger = ContactLedger::new();
    let c = contact(2e-3, Vector3::new(0.0, 0.6, 0.8), 0.3);
    let v = Vector3::new(10.0, 0.0, 0.0);
    let cap = 0.23 * 2e3 * 0.3 * 2e-3;
    let mut last = Vector3::zeros();
    for step in 0..2000 {
        last = ledger.tangential_force(&c, &v, 1e-5, &f, step);
        assert!(last.norm() <= cap * (1.0 + 1e-12));
    }
    assert!((last.norm() - cap).abs() <= 1e-12 * cap);
    assert!(last.dot(&v) < 0.0);
}

#[test]
fn ledger_forgets_separated_nodes() {
    let f = ContactFormulation::adapted(2e3, 2e3, 0.5);
    let mut ledger = ContactLedger::new();
    let mut a = contact(1e-3, Vector3::z(), 0.1);
    let mut b = a;
    b.node = 7;
    let v = Vector3::new(1.0, 0.0, 0.0);
    ledger.tangential_force(&a, &v, 1e-4, &f, 0);
    ledger.tangential_force(&b, &v, 1e-4, &f, 0);
    ledger.end_step(0);
    assert_eq!(ledger.len(), 2);
    a.depth = 2e-3;
    ledger.tangential_force(&a, &v, 1e-4, &f, 1);
    ledger.end_step(1);
    assert_eq!(ledger.len(), 1);
    assert!(ledger.get((1, 0), 7).is_none());
    assert!(ledger.get((0, 1), 0).is_some());
    ledger.end_step(2);
    assert!(ledger.is_empty());
}

#[test]
fn stored_force_is_reprojected_onto_new_tangent_plane() {
    let f = ContactFormulation::adapted(2e3, 2e3, 10.0);
    let c = contact(1e-2, Vector3::z(), 1.0);
    let prev = Vector3::new(1.0, 0.0, 0.5);
    let t = nodal_tangential_force(&c, &Vector3::zeros(), 1e-5, &f, &prev);
    assert_eq!(t, Vector3::new(1.0, 0.0, 0.0));
}

#[test]
fn single_node_torque() {
    let mut c = contact(1e-3, Vector3::z(), 1.0);
    c.slave_arm = Vector3::new(1.0, 2.0, 0.0);
    c.master_arm = Vector3::new(0.0, 0.0, -3.0);
    let force = Vector3::new(0.0, 0.5, 2.0);
    let w = accumulate_wrench(&[c], &[force]);
    assert_eq!(w.on_slave.force, force);
    assert_eq!(w.on_slave.torque, c.slave_arm.cross(&force));
    assert_eq!(w.on_master.force, -force);
    assert_eq!(w.on_master.torque, c.master_arm.cross(&(-force)));
}

#[test]
fn head_on_contact_has_no_net_torque() {
    let radius = 1.0;
    let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), radius));
    let nodes = sphere_nodes(radius, 4);
    let center = Vector3::new(0.0, 0.0, 1.9);
    let d = two_sphere_detection(&field, &nodes, center, None);
    let f = ContactFormulation::adapted(2e3, 2e3, 0.0);
    let forces: Vec<_> = d.contacts.iter().map(|c| nodal_normal_force(c, &f)).collect();
    let w = accumulate_wrench(&d.contacts, &forces);
    let scale = w.on_slave.force.norm() * radius;
    assert!(w.on_slave.torque.norm() < 1e-9 * scale);
    assert!(w.on_master.torque.norm() < 1e-9 * scale);
    assert_eq!(w.on_slave.force + w.on_master.force, Vector3::zeros());
}

#[test]
fn stiffness_diagnostics_examples() {
    let f = ContactFormulation::original(5.0, 1.0, 0.0);
    let contacts: Vec<_> = (0..100)
        .map(|i| contact(1e-3 * (1.0 + (i % 7) as f64), Vector3::z(), 0.01))
        .collect();
    let k = grain_penetration_stiffness(&contacts, &f).unwrap();
    assert!((k - 500.0).abs() < 1e-12 * 500.0, "{k}");

    let f = ContactFormulation::adapted(2.0, 1.0, 0.0);
    let contacts: Vec<_> = [0.5, 1.0, 1.5]
        .iter()
        .enumerate()
        .map(|(i, &a)| contact(1e-3 * (i + 1) as f64, Vector3::x(), a))
        .collect();
    assert_eq!(grain_penetration_stiffness(&contacts, &f), Some(6.0));
    assert_eq!(grain_penetration_stiffness(&[], &f), None);
}

#[test]
fn adapted_stiffness_is_resolution_independent() {
    let field = ContactField::Sphere(AnalyticSphere::new(Vector3::zeros(), 1.0));
    let f = ContactFormulation::adapted(2.0, 1.0, 0.0);
    let center = Vector3::new(0.0, 0.0, 1.8);
    let k: Vec<f64> = [5, 6]
        .iter()
        .map(|&level| {
            let nodes = sphere_nodes(1.0, level);
            let d = two_sphere_detection(&field, &nodes, center, None);
            grain_penetration_stiffness(&d.contacts, &f).unwrap()
        })
        .collect();
    assert!((k[1] / k[0] - 1.0).abs() < 0.02, "{k:?}");
}

#[test]
fn resultant_force_scaling_with_node_count() {
    let field = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(0.02, 0.04));
    let center = Vector3::new(0.0, 0.0, 1.9);
    let resultant = |f: &ContactFormulation<f64>, level: u32| {
        let nodes = sphere_nodes(1.0, level);
        let d = two_sphere_detection(&field, &nodes, center, None);
        let forces: Vec<_> = d.contacts.iter().map(|c| nodal_normal_force(c, f)).collect();
        (accumulate_wrench(&d.contacts, &forces).on_slave.force.norm(), nodes.len() as f64)
    };
    let original = ContactFormulation::original(1.0, 1.0, 0.0);
    let (p1, n1) = resultant(&original, 4);
    let (p4, n4) = resultant(&original, 5);
    assert!(((p4 / p1) / (n4 / n1) - 1.0).abs() < 0.1, "{}", p4 / p1);
    let adapted = ContactFormulation::adapted(1.0, 1.0, 0.0);
    let (a1, _) = resultant(&adapted, 4);
    let (a4, _) = resultant(&adapted, 5);
    assert!((a4 / a1 - 1.0).abs() < 0.05, "{}", a4 / a1);
}

#[test]
fn detection_is_translation_invariant_for_exact_shifts() {
    let field = ContactField::Grid(AnalyticSphere::new(Vector3::zeros(), 1.0).to_grid(0.0625, 0.125));
    let nodes = sphere_nodes(1.0, 4);
    let q = UnitQuaternion::from_euler_angles(0.2, -0.1, 0.7);
    let run = |shift: Vector3<f64>| {
        let master = MasterView {
            id: 0,
            field: &field,
            pose: Pose::new(shift, q),
        };
        let slave = SlaveView {
            id: 1,
            nodes: &nodes,
            clusters: None,
            pose: Pose::new(Vector3::new(0.25, 0.5, 1.75) + shift, q.inverse()),
        };
        detect_penetrating_nodes(&master, &slave)
    };
    let a = run(Vector3::zeros());
    let b = run(Vector3::new(1024.0, -64.0, 8.0));
    assert_eq!(a.contacts.len(), b.contacts.len());
    for (x, y) in a.contacts.iter().zip(&b.contacts) {
        assert_eq!((x.depth, x.normal, x.slave_arm, x.master_arm), (y.depth, y.normal, y.slave_arm, y.master_arm));
    }
}

#[test]
fn rejects_invalid_parameters() {
    assert!(ContactFormulation::adapted(0.0, 1.0, 0.1).validate().is_err());
    assert!(ContactFormulation::original(1.0, 1.0, -0.1).validate().is_err());
    assert!(ContactFormulation::original(1.0, f64::NAN, 0.1).validate().is_err());
    assert!(ContactFormulation::adapted(1.0, 1.0, 0.23).validate().is_ok());
}

proptest! {
    #[test]
    fn coulomb_cap_holds(
        steps in proptest::collection::vec(
            (
                (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0),
                (-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0),
                1e-6f64..1e-2,
            ),
            1..40,
        ),
        mu in 0.0f64..1.0,
        adapted in any::<bool>(),
    ) {
        let f = if adapted {
            ContactFormulation::adapted(2e3, 1.5e3, mu)
        } else {
            ContactFormulation::original(2e2, 1.5e2, mu)
        };
        let mut ledger = ContactLedger::new();
        for (step, (n, v, d)) in steps.into_iter().enumerate() {
            let n = Vector3::new(n.0, n.1, n.2).normalize();
            let c = contact(d, n, 0.2);
            let fs = ledger.tangential_force(&c, &Vector3::new(v.0, v.1, v.2), 1e-4, &f, step as u64);
            let fn_mag = nodal_normal_force(&c, &f).norm();
            prop_assert!(fs.norm() <= mu * fn_mag + 1e-12);
            prop_assert!(fs.dot(&n).abs() <= 1e-12 * (1.0 + fs.norm()));
        }
    }

    #[test]
    fn pair_forces_cancel_exactly(
        forces in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), 1..60),
    ) {
        let contacts: Vec<_> = forces
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mut c = contact(1e-3, Vector3::z(), 0.1);
                c.node = i;
                c.slave_arm = Vector3::new(i as f64 * 0.1, 0.3, -0.2);
                c.master_arm = c.slave_arm + Vector3::new(0.0, 0.0, 2.0);
                c
            })
            .collect();
        let forces: Vec<_> = forces.iter().map(|f| Vector3::new(f.0, f.1, f.2)).collect();
        let w = accumulate_wrench(&contacts, &forces);
        prop_assert_eq!(w.on_slave.force + w.on_master.force, Vector3::zeros());
    }
}
