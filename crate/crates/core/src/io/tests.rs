use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

use super::*;
use crate::contact::{ContactFormulation, FormulationMode};
use crate::error::ConfigError;
use crate::geometry::Pose;
use crate::levelset::LevelSetGrid;
use crate::scenarios::{PDeltaRecord, PDeltaSample, RecordMetadata, SweepRow, SweepTable};
use crate::surface::icosphere_mesh;

const MINIMAL: &str = "\
[run]
scenario = two_sphere
formulation = adapted

[contact]
kn_star = 2 GPa/mm
mu = 0.0

[discretization]
sdp = 1.6 mm
vdp = 0.4 mm
";

fn record(n: usize) -> PDeltaRecord<f64> {
    let mut r = PDeltaRecord::new(RecordMetadata {
        scenario: "two_sphere".into(),
        formulation: ContactFormulation::adapted(2e3, 2e3, 0.0),
        sdp: 1.57,
        vdp: 0.4,
        nodes_per_grain: 2562,
        total_nodes: 5124,
    });
    for i in 0..n {
        let x = i as f64;
        r.samples.push(PDeltaSample {
            time: 0.002 * x,
            delta: 0.01 * x + 1e-7,
            load: 1.234567891234e3 * x * x,
            kinetic_energy: 3.3e-12 * x,
            contacts: 10 * i,
        });
    }
    r
}

#[test]
fn area_stiffness_converts_to_internal_units() {
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!(c.formulation.mode, FormulationMode::Adapted);
    assert_eq!(c.formulation.k_n_star, 2e3);
    assert_eq!(c.formulation.k_s_star, 2e3);
    assert_eq!(c.sdp, 1.6);
    assert_eq!(c.scenario, Scenario::TwoSphere);
}

#[test]
fn force_stiffness_converts_to_internal_units() {
    let text = MINIMAL
        .replace("adapted", "original")
        .replace("kn_star = 2 GPa/mm", "kn = 2 GN/mm\nks = 500 kN/mm");
    let c = parse_config(&text).unwrap();
    assert_eq!(c.formulation.k_n, 2e9);
    assert_eq!(c.formulation.k_s, 5e5);
}

#[test]
fn density_in_kg_per_mm3() {
    let c = parse_config(&format!("{MINIMAL}\n[material]\ndensity = 2.5e-6 kg/mm3\n")).unwrap();
    assert!((c.density - 2.5e-9).abs() <= 1e-24);
}

#[test]
fn empty_file_lists_required_keys() {
    let err = parse_config("").unwrap_err();
    let ConfigError::Missing(keys) = &err else {
        panic!("expected missing keys, got {err}");
    };
    for k in ["run.scenario", "run.formulation", "contact.mu", "discretization.sdp", "discretization.vdp"] {
        assert!(keys.iter().any(|m| m == k), "{k} not listed in {keys:?}");
    }
    assert!(err.to_string().contains("kn_star"));
}

#[test]
fn unknown_key_reports_its_line() {
    let text = MINIMAL.replace("mu = 0.0", "mu = 0.0\nkn_sstar = 3 GPa/mm");
    let err = parse_config(&text).unwrap_err();
    assert_eq!(
        err,
        ConfigError::UnknownKey {
            line: 8,
            section: "contact".into(),
            key: "kn_sstar".into()
        }
    );
    let err = parse_config("[physics]\n").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownSection { line: 1, .. }));
}

#[test]
fn unit_mismatch_is_rejected() {
    let text = MINIMAL.replace("kn_star = 2 GPa/mm", "kn_star = 2 GN/mm");
    let err = parse_config(&text).unwrap_err();
    assert!(matches!(err, ConfigError::Unit { line: 6, .. }), "{err}");
    let text = MINIMAL.replace("sdp = 1.6 mm", "sdp = 1.6");
    assert!(matches!(parse_config(&text).unwrap_err(), ConfigError::Unit { line: 10, .. }));
    let text = MINIMAL.replace("mu = 0.0", "mu = 0.2 mm");
    assert!(matches!(parse_config(&text).unwrap_err(), ConfigError::Unit { line: 7, .. }));
}

#[test]
fn out_of_range_values_are_rejected() {
    for (from, to, line) in [
        ("sdp = 1.6 mm", "sdp = -1 mm", 10),
        ("vdp = 0.4 mm", "vdp = 0 mm", 11),
        ("mu = 0.0", "mu = -0.1", 7),
        ("formulation = adapted", "formulation = hybrid", 3),
    ] {
        let err = parse_config(&MINIMAL.replace(from, to)).unwrap_err();
        assert!(matches!(err, ConfigError::Value { line: l, .. } if l == line), "{to}: {err}");
    }
    let err = parse_config(&format!("{MINIMAL}[slab]\nblocks_per_side = 2\n")).unwrap_err();
    assert!(matches!(err, ConfigError::Value { line: 13, .. }), "{err}");
}

#[test]
fn duplicates_and_syntax_errors_carry_lines() {
    let err = parse_config(&MINIMAL.replace("mu = 0.0", "mu = 0.0\nmu = 0.1")).unwrap_err();
    assert_eq!(
        err,
        ConfigError::Duplicate {
            line: 8,
            key: "contact.mu".into(),
            first: 7
        }
    );
    let err = parse_config("[run\n").unwrap_err();
    assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    let err = parse_config("scenario = slab\n").unwrap_err();
    assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
}

#[test]
fn stiffness_of_the_other_formulation_is_rejected() {
    let text = MINIMAL.replace("mu = 0.0", "mu = 0.0\nkn = 2 GN/mm");
    assert!(matches!(parse_config(&text).unwrap_err(), ConfigError::Value { line: 8, .. }));
}

#[test]
fn comments_and_lists() {
    let text = format!(
        "{MINIMAL}\n; sweep\n[sweep]\nsdp_ladder = 3.2, 1.6, 0.8 mm  # coarse to fine\nvdp_ladder = 1600, 800 um\ndelta_star = 1 mm\n"
    );
    let c = parse_config(&text).unwrap();
    let s = c.sweep.unwrap();
    assert_eq!(s.sdp_ladder, vec![3.2, 1.6, 0.8]);
    assert_eq!(s.vdp_ladder, vec![1.6, 0.8]);
    assert_eq!(s.tolerance, 0.05);
    let bad = text.replace("3.2, 1.6, 0.8", "0.8, 1.6");
    assert!(matches!(parse_config(&bad).unwrap_err(), ConfigError::Value { key, .. } if key == "sdp_ladder"));
}

#[test]
fn scenario_defaults() {
    let c = parse_config(&MINIMAL.replace("two_sphere", "slab")).unwrap();
    assert_eq!(c.slab.blocks_per_side, 6);
    assert_eq!(c.delta_max, 5.0);
    assert_eq!(c.outputs.snapshots, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    let p = c.slab_params();
    assert_eq!(p.sdp, 1.6);
    assert_eq!(p.relax_damping, 50.0);
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!(c.two_sphere_params().speed, 5.0);
    assert!(c.sweep_params().is_none());
}

#[test]
fn echoed_config_parses_back_identically() {
    let text = format!(
        "{}\n[time]\ndt = 2.5 us\n[loading]\nke_threshold = 1 nJ\n[slab]\nincline = 0.05 rad\n[sweep]\nsdp_ladder = 0.3, 0.1 mm\nvdp_ladder = 0.2 mm\ndelta_star = 0.7 mm\n",
        MINIMAL.replace("two_sphere", "slab")
    );
    let c = parse_config(&text).unwrap();
    let echoed = c.to_ini();
    assert_eq!(parse_config(&echoed).unwrap(), c, "{echoed}");
    let original = parse_config(&MINIMAL.replace("adapted", "original").replace("kn_star = 2 GPa/mm", "kn = 2 GN/mm")).unwrap();
    assert_eq!(parse_config(&original.to_ini()).unwrap(), original);
}

#[test]
fn pdelta_csv_has_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pdelta.csv");
    write_pdelta_csv(&record(3), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 4);
    assert_eq!(body[0], PDELTA_HEADER);
    let (meta, samples) = read_pdelta_csv(&path).unwrap();
    let get = |k: &str| meta.iter().find(|(m, _)| m == k).map(|(_, v)| v.as_str());
    assert_eq!(get("formulation"), Some("adapted"));
    assert_eq!(get("SDP"), Some("1.57 mm"));
    assert_eq!(get("VDP"), Some("0.4 mm"));
    assert_eq!(get("Nnodes"), Some("2562"));
    assert_eq!(samples.len(), 3);
}

#[test]
fn pdelta_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pdelta.csv");
    let r = record(50);
    write_pdelta_csv(&r, &path).unwrap();
    let (_, back) = read_pdelta_csv(&path).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    for (a, b) in r.samples.iter().zip(&back) {
        assert!(close(a.time, b.time) && close(a.delta, b.delta));
        assert!(close(a.load, b.load) && close(a.kinetic_energy, b.kinetic_energy));
        assert_eq!(a.contacts, b.contacts);
    }
}

#[test]
fn empty_record_is_not_written() {
    let dir = tempfile::tempdir().unwrap();
    assert!(write_pdelta_csv(&record(0), &dir.path().join("x.csv")).is_err());
}

#[test]
fn unwritable_path_is_an_io_error() {
    let err = write_pdelta_csv(&record(2), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
    assert!(matches!(err, crate::error::IoError::Io { .. }));
}

#[test]
fn obj_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.obj");
    let mesh = icosphere_mesh(2.0f64, 2).unwrap();
    write_obj(&mesh, &path).unwrap();
    let back = read_obj::<f64>(&path).unwrap();
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.vertices, mesh.vertices);
    back.validate_closed().unwrap();
}

#[test]
fn obj_reader_fans_polygons_and_skips_other_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.obj");
    std::fs::write(
        &path,
        "# quad\no q\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 -1//1\n",
    )
    .unwrap();
    let m = read_obj::<f64>(&path).unwrap();
    assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    std::fs::write(&path, "v 0 0 0\nf 1 2 3\n").unwrap();
    assert!(read_obj::<f64>(&path).is_err());
}

#[test]
fn posed_obj_moves_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.obj");
    let mesh = icosphere_mesh(1.0f64, 0).unwrap();
    let q = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3);
    let pose = Pose::new(Vector3::new(5.0, 0.0, -1.0), q);
    write_posed_obj(&mesh, &pose, &path).unwrap();
    let back = read_obj::<f64>(&path).unwrap();
    for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
        assert!((pose.to_world(a) - b).norm() < 1e-12);
    }
}

#[test]
fn grid_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.lsg");
    let grid = LevelSetGrid::from_fn(Vector3::new(-1.0, -0.5, 0.25), 0.1, [4, 3, 5], |p: &Vector3<f64>| {
        p.norm() - 0.7
    });
    write_grid(&grid, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"LSG1");
    assert_eq!(bytes.len(), 4 + 24 + 24 + 8 + 8 * 60);
    assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 4);
    // x-fastest: second value is node (1, 0, 0)
    let v1 = f64::from_le_bytes(bytes[68..76].try_into().unwrap());
    assert_eq!(v1, grid.value_at(1, 0, 0));
    let back = read_grid::<f64>(&path).unwrap();
    assert_eq!(back, grid);
}

#[test]
fn malformed_grids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lsg");
    std::fs::write(&path, b"LSG2....").unwrap();
    assert!(read_grid::<f64>(&path).is_err());
    let grid = LevelSetGrid::from_fn(Vector3::zeros(), 1.0, [2, 2, 2], |p: &Vector3<f64>| p.x);
    write_grid(&grid, &path).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    std::fs::write(&path, &bytes).unwrap();
    assert!(read_grid::<f64>(&path).is_err());
}

#[test]
fn nodes_csv_lists_areas() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.csv");
    let mesh = icosphere_mesh(1.0f64, 1).unwrap();
    let nodes = crate::surface::SurfaceNodeSet::uniform(&mesh);
    write_nodes_csv(&nodes, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,x,y,z,A_a");
    assert_eq!(lines.len(), 1 + nodes.len());
    let area: f64 = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((area - nodes.total_area).abs() < 1e-8 * nodes.total_area);
}

#[test]
fn sweep_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let row = |level: &str, err: Option<&str>| SweepRow {
        level: level.into(),
        sdp_target: 1.0,
        sdp: 0.9,
        vdp: 0.4,
        nodes: 642,
        max_load: 12.5,
        load_at_delta_star: 12.0,
        runtime_s: 0.25,
        error: err.map(String::from),
        record: None,
    };
    let table = SweepTable {
        rows: vec![row("sdp0", None), row("vdp0", Some("boom"))],
        converged_sdp: Some(0.9),
        converged_vdp: Some(0.4),
    };
    write_sweep_csv(&table, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# vdp0 failed: boom"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "level,SDP,VDP,Nnodes,maxP,P_at_delta_star,runtime_s");
    assert!(rows[1].starts_with("sdp0,9.000000000e-1,4.000000000e-1,642,1.250000000e1,"));
    assert_eq!(rows[2].split(',').count(), 7);
}

#[test]
fn snapshot_layout() {
    use crate::dynamics::{GrainTemplate, RigidBodyState, SphereField, World};
    let dir = tempfile::tempdir().unwrap();
    let mut world = World::new(ContactFormulation::adapted(1.0, 1.0, 0.0));
    let t = world.add_template(GrainTemplate::sphere("s", 1.0, 0.4, SphereField::Analytic, 1e-9).unwrap());
    world.add_body(RigidBodyState::dynamic(t, Pose::translation(Vector3::new(0.0, 0.0, 1.0))));
    world.add_body(RigidBodyState::dynamic(t, Pose::translation(Vector3::new(3.0, 0.0, 1.0))));
    let poses: Vec<_> = world.bodies.iter().map(|b| b.pose()).collect();
    let out = write_snapshot(dir.path(), 2.0, &world, &poses).unwrap();
    assert_eq!(out, dir.path().join("δ=2mm"));
    assert!(out.join("body_0.obj").exists() && out.join("body_1.obj").exists());
    let csv = std::fs::read_to_string(out.join("poses.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().starts_with("1,3.000000000e0,"));
    assert_eq!(snapshot_dir_name(0.5), "δ=0.5mm");
}

#[test]
fn contact_rows_pick_the_formulation_stiffness() {
    let s = crate::contact::ContactSummary {
        master: 0,
        slave: 1,
        count: 3,
        mean_depth: 0.1,
        total_area: 2.0,
        resultant_stiffness: 7.0,
        summed_stiffness: 9.0,
        normal_force: 0.5,
        tangential_force: 0.0,
        penalty_energy: 0.0,
    };
    let mut out = Vec::new();
    write_contact_header(&mut out).unwrap();
    write_contact_rows(&mut out, 4, &[s], FormulationMode::Original).unwrap();
    write_contact_rows(&mut out, 4, &[s], FormulationMode::Adapted).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0].split(',').count(), 9);
    assert!(lines[1].starts_with("4,0,1,3,") && lines[1].contains(",7.000000000e0,"));
    assert!(lines[2].contains(",9.000000000e0,"));
}

proptest! {
    #[test]
    fn pdelta_values_survive_the_text_format(
        vals in proptest::collection::vec((1e-300f64..1e300, -1e6f64..1e6, any::<u16>()), 1..20)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let mut r = record(0);
        for (i, (a, b, n)) in vals.iter().enumerate() {
            r.samples.push(PDeltaSample { time: i as f64, delta: *b, load: *a, kinetic_energy: -*a, contacts: *n as usize });
        }
        write_pdelta_csv(&r, &path).unwrap();
        let (_, back) = read_pdelta_csv(&path).unwrap();
        prop_assert_eq!(back.len(), r.samples.len());
        for (x, y) in r.samples.iter().zip(&back) {
            prop_assert!((x.load - y.load).abs() <= 1e-9 * x.load.abs());
            prop_assert!((x.delta - y.delta).abs() <= 1e-9 * x.delta.abs());
            prop_assert!((x.kinetic_energy - y.kinetic_energy).abs() <= 1e-9 * x.kinetic_energy.abs());
            prop_assert_eq!(x.contacts, y.contacts);
        }
    }
}
