use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lsdem_core::error::{GeometryError, IoError, SimulationError};
use lsdem_core::io::{
    parse_config, read_obj, write_contact_header, write_contact_rows, write_grid, write_nodes_csv,
    write_obj, write_pdelta_csv, write_snapshot, write_sweep_csv, Scenario, SimulationConfig,
};
use lsdem_core::levelset::{build_grid_from_mesh, GridBuildOptions};
use lsdem_core::scenarios::{run_convergence_sweep, run_slab_with, run_two_sphere_compression_with};
use lsdem_core::surface::{
    icosphere_mesh, interlocking_block_mesh, seed_nodes_and_areas, Refinement, SurfaceNodeSet,
    DEFAULT_NODE_CAP,
};
use lsdem_core::dynamics::StepReport;
use lsdem_core::Mesh64;

/// Converged slab discretization of the full-size study (mm).
const FULL_SDP: f64 = 0.06;
const FULL_VDP: f64 = 0.025;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical abort: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Format { .. } => Failure::Config(e.to_string()),
            IoError::Io { .. } => Failure::Io(e.to_string()),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimulationError> for Failure {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::NonFinite { .. }
            | SimulationError::RelaxationStalled { .. }
            | SimulationError::InitialPenetration { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn write_mesh_outputs(
    mesh: &Mesh64,
    nodes: &SurfaceNodeSet<f64>,
    out: &Path,
    nodes_out: Option<&Path>,
) -> Result<(), Failure> {
    write_obj(mesh, out)?;
    if let Some(p) = nodes_out {
        write_nodes_csv(nodes, p)?;
    }
    log::info!(
        "{}: {} vertices, {} triangles, area {:.6} mm², median edge {:.6} mm",
        out.display(),
        mesh.vertices.len(),
        mesh.triangles.len(),
        nodes.total_area,
        nodes.spacing
    );
    Ok(())
}

fn refine(mesh: Mesh64, sdp: Option<f64>, refinement: Refinement<f64>) -> Result<(Mesh64, SurfaceNodeSet<f64>), Failure> {
    match sdp {
        Some(s) => Ok(seed_nodes_and_areas(&mesh, s, refinement, DEFAULT_NODE_CAP)?),
        None => {
            let nodes = SurfaceNodeSet::uniform(&mesh);
            Ok((mesh, nodes))
        }
    }
}

pub fn mesh_sphere(
    radius: f64,
    subdivisions: u32,
    sdp: Option<f64>,
    out: &Path,
    nodes_out: Option<&Path>,
) -> Result<(), Failure> {
    let mesh = icosphere_mesh(radius, subdivisions)?;
    let (mesh, nodes) = refine(mesh, sdp, Refinement::Sphere { radius })?;
    write_mesh_outputs(&mesh, &nodes, out, nodes_out)
}

pub fn mesh_block(
    side: f64,
    incline: f64,
    thickness: f64,
    sdp: Option<f64>,
    out: &Path,
    nodes_out: Option<&Path>,
) -> Result<(), Failure> {
    let mesh = interlocking_block_mesh(side, incline, thickness)?;
    let (mesh, nodes) = refine(mesh, sdp, Refinement::Planar)?;
    write_mesh_outputs(&mesh, &nodes, out, nodes_out)
}

pub fn sdf_gen(mesh_path: &Path, step: f64, margin: f64, out: &Path) -> Result<(), Failure> {
    let mesh = read_obj::<f64>(mesh_path)?;
    let grid = build_grid_from_mesh(&mesh, step, margin, &GridBuildOptions::default())?;
    write_grid(&grid, out)?;
    log::info!(
        "{}: {}×{}×{} nodes, step {step} mm",
        out.display(),
        grid.dims[0],
        grid.dims[1],
        grid.dims[2]
    );
    Ok(())
}

fn load_config(path: &Path, full_resolution: bool) -> Result<SimulationConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if full_resolution {
        if cfg.scenario != Scenario::Slab {
            return Err(Failure::Config("--full-resolution applies to the slab scenario only".into()));
        }
        cfg.sdp = FULL_SDP;
        cfg.vdp = FULL_VDP;
    }
    Ok(cfg)
}

/// `--out`, then `LSDEM_OUT`, then the configuration's `output`.
fn output_root(cfg: &SimulationConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("LSDEM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.clone())
}

fn prepare_root(cfg: &mut SimulationConfig, flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let root = output_root(cfg, flag);
    fs::create_dir_all(&root).map_err(|e| io_failure(&root, e))?;
    cfg.output = root.clone();
    let echo = root.join("config.ini");
    fs::write(&echo, cfg.to_ini()).map_err(|e| io_failure(&echo, e))?;
    Ok(root)
}

/// Per-step contact rows, keeping the first write error.
struct ContactLog {
    path: PathBuf,
    writer: BufWriter<File>,
    error: Option<std::io::Error>,
    mode: lsdem_core::contact::FormulationMode,
}

impl ContactLog {
    fn create(path: PathBuf, mode: lsdem_core::contact::FormulationMode) -> Result<Self, Failure> {
        let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
        let mut writer = BufWriter::new(file);
        write_contact_header(&mut writer).map_err(|e| io_failure(&path, e))?;
        Ok(Self {
            path,
            writer,
            error: None,
            mode,
        })
    }

    fn record(&mut self, step: u64, report: &StepReport<f64>) {
        if self.error.is_none() {
            if let Err(e) = write_contact_rows(&mut self.writer, step, &report.pairs, self.mode) {
                self.error = Some(e);
            }
        }
    }

    fn finish(mut self) -> Result<(), Failure> {
        if let Some(e) = self.error.take() {
            return Err(io_failure(&self.path, e));
        }
        self.writer.flush().map_err(|e| io_failure(&self.path, e))
    }
}

pub fn run(config: &Path, out: Option<PathBuf>, full_resolution: bool) -> Result<(), Failure> {
    let mut cfg = load_config(config, full_resolution)?;
    let root = prepare_root(&mut cfg, out)?;
    let mut log_file = match cfg.outputs.contacts {
        true => Some(ContactLog::create(root.join("contacts.csv"), cfg.formulation.mode)?),
        false => None,
    };
    let mut on_step = |step: u64, report: &StepReport<f64>| {
        if let Some(l) = log_file.as_mut() {
            l.record(step, report);
        }
    };
    match cfg.scenario {
        Scenario::TwoSphere => {
            let params = cfg.two_sphere_params();
            let record = run_two_sphere_compression_with(&params, &mut on_step)?;
            write_pdelta_csv(&record, &root.join("pdelta.csv"))?;
            let last = record.samples.last().map_or(0.0, |s| s.load);
            log::info!(
                "two spheres: {} nodes per grain, SDP {:.4} mm, P({} mm) = {last:.6e} N",
                record.metadata.nodes_per_grain,
                record.metadata.sdp,
                params.delta_max
            );
        }
        Scenario::Slab => {
            let params = cfg.slab_params();
            let mut slab = params.build()?;
            log::info!(
                "slab: {} blocks, {} nodes per block (SDP {:.4} mm, VDP {} mm)",
                slab.blocks.len(),
                slab.world.templates[slab.world.bodies[slab.central].template].nodes.len(),
                slab.sdp,
                slab.vdp
            );
            let outcome = match run_slab_with(&mut slab, &params, &mut on_step) {
                Ok(o) => o,
                Err(failure) => {
                    let snap = &failure.last_snapshot;
                    let dir = write_snapshot(&root.join("abort"), snap.delta, &slab.world, &snap.poses)?;
                    log::error!("last valid state written to {}", dir.display());
                    return Err(failure.error.into());
                }
            };
            let ind = &outcome.indentation;
            write_pdelta_csv(&ind.record, &root.join("pdelta.csv"))?;
            let snapshots = root.join("snapshots");
            for (target, snap) in params.snapshot_deltas.iter().zip(&ind.snapshots) {
                write_snapshot(&snapshots, *target, &slab.world, &snap.poses)?;
            }
            let relax = root.join("relax.csv");
            let mut text = String::from("sample,KE_mJ\n");
            for (i, e) in outcome.relax.trace.iter().enumerate() {
                text.push_str(&format!("{i},{e:.9e}\n"));
            }
            fs::write(&relax, text).map_err(|e| io_failure(&relax, e))?;

            let m = &ind.mechanism;
            let ratio = ind.record.max_kinetic_ratio();
            let summary = format!(
                "dt_s = {:e}\nrelax_steps = {}\nload_steps = {}\nmax_P_N = {:.6e}\n\
                 central_drop_mm = {:.6}\nrunner_up_body = {}\nrunner_up_drop_mm = {:.6}\n\
                 push_through = {}\nmax_KE_over_work = {:.4e}\nquasi_static = {}\n",
                outcome.dt,
                outcome.relax.steps,
                ind.steps,
                ind.record.max_load(),
                m.central_drop,
                m.runner_up,
                m.runner_up_drop,
                m.push_through,
                ratio,
                ratio < 0.05
            );
            let path = root.join("summary.txt");
            fs::write(&path, &summary).map_err(|e| io_failure(&path, e))?;
            if ratio >= 0.05 {
                log::warn!("kinetic energy reached {:.1}% of the external work", ratio * 100.0);
            }
            log::info!(
                "max P {:.4e} N; central block drop {:.3} mm vs {:.3} mm (push-through: {})",
                ind.record.max_load(),
                m.central_drop,
                m.runner_up_drop,
                m.push_through
            );
        }
    }
    if let Some(l) = log_file {
        l.finish()?;
    }
    log::info!("outputs in {}", root.display());
    Ok(())
}

pub fn sweep(config: &Path, out: Option<PathBuf>, full_resolution: bool) -> Result<(), Failure> {
    let mut cfg = load_config(config, full_resolution)?;
    let Some(params) = cfg.sweep_params() else {
        return Err(Failure::Config(format!("{}: no [sweep] section", config.display())));
    };
    let root = prepare_root(&mut cfg, out)?;
    let table = run_convergence_sweep(&params)?;
    for row in &table.rows {
        match (&row.record, &row.error) {
            (Some(record), _) => {
                let dir = root.join(&row.level);
                fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
                write_pdelta_csv(record, &dir.join("pdelta.csv"))?;
            }
            (None, Some(e)) => log::warn!("{} failed: {e}", row.level),
            (None, None) => {}
        }
    }
    write_sweep_csv(&table, &root.join("sweep.csv"))?;
    match (table.converged_sdp, table.converged_vdp, table.ratio()) {
        (Some(s), Some(v), Some(r)) => {
            log::info!("converged at SDP {s:.4} mm, VDP {v:.4} mm; VDP/SDP = {r:.3}")
        }
        _ => log::warn!("no converged level within {:.1}%", params.tolerance * 100.0),
    }
    log::info!("outputs in {}", root.display());
    Ok(())
}
