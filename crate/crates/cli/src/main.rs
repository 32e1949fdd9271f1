//! `lsdem`: mesh and level-set generation, simulation runs and
//! discretization sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "lsdem", version, about = "Level-set DEM driver")]
struct Cli {
    /// Worker threads for contact evaluation and sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a triangle mesh (OBJ) and optionally its surface nodes (CSV).
    #[command(subcommand)]
    MeshGen(MeshKind),
    /// Sample the signed distance of a closed OBJ mesh on a grid.
    SdfGen(SdfGen),
    /// Run the scenario described by a configuration file.
    Run(RunArgs),
    /// Run the SDP and VDP ladders of a configuration's [sweep] section.
    Sweep(RunArgs),
}

#[derive(Subcommand, Debug)]
enum MeshKind {
    /// Subdivided icosahedron projected onto a sphere.
    Sphere {
        /// mm
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 3)]
        subdivisions: u32,
        #[command(flatten)]
        common: MeshOutput,
    },
    /// Interlocking block with tilted lateral faces.
    Block {
        /// Base side (mm).
        #[arg(long, default_value_t = 8.33)]
        side: f64,
        /// Face incline (degrees).
        #[arg(long, default_value_t = 2.5)]
        incline: f64,
        /// mm
        #[arg(long, default_value_t = 3.18)]
        thickness: f64,
        #[command(flatten)]
        common: MeshOutput,
    },
}

#[derive(Args, Debug)]
struct MeshOutput {
    /// Refine to this node spacing (mm) before writing.
    #[arg(long)]
    sdp: Option<f64>,
    /// OBJ output path.
    #[arg(long)]
    out: PathBuf,
    /// Node CSV output path (index, x, y, z, A_a).
    #[arg(long)]
    nodes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SdfGen {
    #[arg(long)]
    mesh: PathBuf,
    /// Grid step (mm).
    #[arg(long)]
    step: f64,
    /// Padding around the mesh box (mm), at least two steps.
    #[arg(long)]
    margin: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Configuration file.
    config: PathBuf,
    /// Output directory; overrides `LSDEM_OUT` and the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Slab only: use the converged discretization of the full-size study
    /// (SDP 0.06 mm, VDP 0.025 mm). Hours of runtime and several GB.
    #[arg(long)]
    full_resolution: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        log::warn!("thread pool: {e}");
    }
    let outcome = match cli.command {
        Command::MeshGen(MeshKind::Sphere {
            radius,
            subdivisions,
            common,
        }) => commands::mesh_sphere(radius, subdivisions, common.sdp, &common.out, common.nodes.as_deref()),
        Command::MeshGen(MeshKind::Block {
            side,
            incline,
            thickness,
            common,
        }) => commands::mesh_block(side, incline, thickness, common.sdp, &common.out, common.nodes.as_deref()),
        Command::SdfGen(a) => commands::sdf_gen(&a.mesh, a.step, a.margin, &a.out),
        Command::Run(a) => commands::run(&a.config, a.out, a.full_resolution),
        Command::Sweep(a) => commands::sweep(&a.config, a.out, a.full_resolution),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lsdem: {f}");
            ExitCode::from(f.code())
        }
    }
}
