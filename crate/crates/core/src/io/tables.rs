use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::contact::{ContactSummary, FormulationMode};
use crate::dynamics::World;
use crate::error::IoError;
use crate::geometry::Pose;
use crate::real::Real;
use crate::scenarios::{PDeltaRecord, PDeltaSample, SweepTable};
use crate::surface::SurfaceNodeSet;

use super::obj::write_posed_obj;

pub const PDELTA_HEADER: &str = "time_s,delta_mm,P_N,KE_mJ,n_contacts";

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| IoError::io(path, e))
}

fn finish(path: &Path, r: std::io::Result<()>) -> Result<(), IoError> {
    r.map_err(|e| IoError::io(path, e))
}

/// Ten significant digits, enough for a 1e-9 relative round trip.
fn sci<T: Real>(v: T) -> String {
    format!("{:.9e}", v.as_f64())
}

/// `index,x,y,z,A_a`.
pub fn write_nodes_csv<T: Real>(nodes: &SurfaceNodeSet<T>, path: &Path) -> Result<(), IoError> {
    let mut w = create(path)?;
    let r = (|| {
        writeln!(w, "index,x,y,z,A_a")?;
        for (i, (p, a)) in nodes.nodes.iter().zip(&nodes.tributary_area).enumerate() {
            writeln!(w, "{i},{},{},{},{}", sci(p.x), sci(p.y), sci(p.z), sci(*a))?;
        }
        w.flush()
    })();
    finish(path, r)
}

/// Metadata as `# key = value` lines, then the header and one row per
/// sample.
pub fn write_pdelta_csv<T: Real>(record: &PDeltaRecord<T>, path: &Path) -> Result<(), IoError> {
    if record.samples.is_empty() {
        return Err(IoError::format(path, "load curve has no samples"));
    }
    let m = &record.metadata;
    let f = &m.formulation;
    let mut w = create(path)?;
    let r = (|| {
        writeln!(w, "# lsdem {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# scenario = {}", m.scenario)?;
        writeln!(w, "# formulation = {}", f.mode.name())?;
        match f.mode {
            FormulationMode::Original => {
                writeln!(w, "# kn = {:?} N/mm", f.k_n.as_f64())?;
                writeln!(w, "# ks = {:?} N/mm", f.k_s.as_f64())?;
            }
            FormulationMode::Adapted => {
                writeln!(w, "# kn_star = {:?} N/mm3", f.k_n_star.as_f64())?;
                writeln!(w, "# ks_star = {:?} N/mm3", f.k_s_star.as_f64())?;
            }
        }
        writeln!(w, "# mu = {:?}", f.mu.as_f64())?;
        writeln!(w, "# SDP = {:?} mm", m.sdp.as_f64())?;
        writeln!(w, "# VDP = {:?} mm", m.vdp.as_f64())?;
        writeln!(w, "# Nnodes = {}", m.nodes_per_grain)?;
        writeln!(w, "# Nnodes_total = {}", m.total_nodes)?;
        writeln!(w, "{PDELTA_HEADER}")?;
        for s in &record.samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                sci(s.time),
                sci(s.delta),
                sci(s.load),
                sci(s.kinetic_energy),
                s.contacts
            )?;
        }
        w.flush()
    })();
    finish(path, r)
}

/// Reads a load curve written by [`write_pdelta_csv`]: the `# key = value`
/// metadata pairs and the samples.
pub fn read_pdelta_csv(path: &Path) -> Result<(Vec<(String, String)>, Vec<PDeltaSample<f64>>), IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IoError::format(path, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != PDELTA_HEADER {
        return Err(IoError::format(path, format!("unexpected header `{header}`")));
    }
    let mut samples = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IoError::format(path, e.to_string()))?;
        let num = |k: usize| -> Result<f64, IoError> {
            row[k]
                .trim()
                .parse()
                .map_err(|_| IoError::format(path, format!("bad number `{}`", &row[k])))
        };
        samples.push(PDeltaSample {
            time: num(0)?,
            delta: num(1)?,
            load: num(2)?,
            kinetic_energy: num(3)?,
            contacts: row[4]
                .trim()
                .parse()
                .map_err(|_| IoError::format(path, format!("bad contact count `{}`", &row[4])))?,
        });
    }
    Ok((metadata, samples))
}

/// `level,SDP,VDP,Nnodes,maxP,P_at_delta_star,runtime_s`; failed levels
/// get empty result fields and a `#` line with the error.
pub fn write_sweep_csv<T: Real>(table: &SweepTable<T>, path: &Path) -> Result<(), IoError> {
    let mut w = create(path)?;
    let r = (|| {
        for row in table.rows.iter().filter(|r| r.error.is_some()) {
            writeln!(w, "# {} failed: {}", row.level, row.error.as_deref().unwrap_or(""))?;
        }
        if let Some(s) = table.converged_sdp {
            writeln!(w, "# converged SDP = {:?} mm", s.as_f64())?;
        }
        if let Some(v) = table.converged_vdp {
            writeln!(w, "# converged VDP = {:?} mm", v.as_f64())?;
        }
        if let Some(q) = table.ratio() {
            writeln!(w, "# VDP/SDP = {:?}", q.as_f64())?;
        }
        writeln!(w, "level,SDP,VDP,Nnodes,maxP,P_at_delta_star,runtime_s")?;
        for row in &table.rows {
            if row.error.is_some() {
                writeln!(w, "{},{},{},,,,{:.3}", row.level, sci(row.sdp), sci(row.vdp), row.runtime_s)?;
            } else {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{:.3}",
                    row.level,
                    sci(row.sdp),
                    sci(row.vdp),
                    row.nodes,
                    sci(row.max_load),
                    sci(row.load_at_delta_star),
                    row.runtime_s
                )?;
            }
        }
        w.flush()
    })();
    finish(path, r)
}

/// `body,x,y,z,qw,qx,qy,qz`.
pub fn write_poses_csv<T: Real>(poses: &[Pose<T>], path: &Path) -> Result<(), IoError> {
    let mut w = create(path)?;
    let r = (|| {
        writeln!(w, "body,x,y,z,qw,qx,qy,qz")?;
        for (i, p) in poses.iter().enumerate() {
            let q = p.orientation.quaternion();
            writeln!(
                w,
                "{i},{},{},{},{},{},{},{}",
                sci(p.position.x),
                sci(p.position.y),
                sci(p.position.z),
                sci(q.w),
                sci(q.i),
                sci(q.j),
                sci(q.k)
            )?;
        }
        w.flush()
    })();
    finish(path, r)
}

/// `δ=<v>mm`.
pub fn snapshot_dir_name(delta: f64) -> String {
    format!("δ={delta}mm")
}

/// Writes `root/δ=<v>mm/body_<id>.obj` for every body of `world` at
/// `poses`, plus `poses.csv`. Returns the snapshot directory.
pub fn write_snapshot<T: Real>(
    root: &Path,
    delta: f64,
    world: &World<T>,
    poses: &[Pose<T>],
) -> Result<PathBuf, IoError> {
    let dir = root.join(snapshot_dir_name(delta));
    fs::create_dir_all(&dir).map_err(|e| IoError::io(&dir, e))?;
    for (id, (body, pose)) in world.bodies.iter().zip(poses).enumerate() {
        let mesh = &world.templates[body.template].mesh;
        write_posed_obj(mesh, pose, &dir.join(format!("body_{id}.obj")))?;
    }
    write_poses_csv(poses, &dir.join("poses.csv"))?;
    Ok(dir)
}

pub fn write_contact_header(w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "step,master,slave,n_contacts,mean_depth_mm,area_mm2,k_N_per_mm,Fn_N,Fs_N")
}

/// One row per contacting pair. The stiffness column is `|ΣF_n| / mean d`
/// for the force-based formulation and `Σ|F_a|/d_a` for the traction-based
/// one.
pub fn write_contact_rows<T: Real>(
    w: &mut impl Write,
    step: u64,
    pairs: &[ContactSummary<T>],
    mode: FormulationMode,
) -> std::io::Result<()> {
    for p in pairs {
        let k = match mode {
            FormulationMode::Original => p.resultant_stiffness,
            FormulationMode::Adapted => p.summed_stiffness,
        };
        writeln!(
            w,
            "{step},{},{},{},{},{},{},{},{}",
            p.master,
            p.slave,
            p.count,
            sci(p.mean_depth),
            sci(p.total_area),
            sci(k),
            sci(p.normal_force),
            sci(p.tangential_force)
        )?;
    }
    Ok(())
}
