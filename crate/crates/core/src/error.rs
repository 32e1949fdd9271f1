use std::path::PathBuf;

use thiserror::Error;

/// Geometry problems found while building meshes, node sets and grids.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh is not closed: edge ({0}, {1}) is shared by {2} triangle(s)")]
    OpenMesh(usize, usize, usize),
    #[error("mesh has inconsistent winding at edge ({0}, {1})")]
    InconsistentWinding(usize, usize),
    #[error("{degenerate} of {total} triangles are degenerate (tolerance {tolerance})")]
    DegenerateMesh {
        degenerate: usize,
        total: usize,
        tolerance: f64,
    },
    #[error("triangle {0} references missing vertex {1}")]
    BadIndex(usize, usize),
    #[error("grid of {nodes} nodes exceeds the budget of {budget} nodes")]
    GridTooLarge { nodes: u64, budget: u64 },
    #[error("refinement would need {nodes} nodes, above the cap of {cap}")]
    TooManyNodes { nodes: usize, cap: usize },
    #[error("level-set grid has no interior cells")]
    EmptyInterior,
}

/// Errors raised while advancing or setting up a simulation.
#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("non-finite state on body {body} at step {step} (t = {time:e} s)")]
    NonFinite { body: usize, step: u64, time: f64 },
    #[error("world has no dynamic body")]
    NoDynamicBody,
    #[error("initial penetration of {depth:e} mm between bodies {master} and {slave}")]
    InitialPenetration {
        master: usize,
        slave: usize,
        depth: f64,
    },
    #[error("relaxation did not converge within {steps} steps (last kinetic energy {last_energy:e} mJ)")]
    RelaxationStalled {
        steps: u64,
        last_energy: f64,
        trace: Vec<f64>,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// File emission and parsing failures.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        IoError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Configuration problems, located by line where possible.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: `{key}` given twice (first on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("missing required key(s): {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("line {line}: `{key}` expects {expected}, got `{got}`")]
    Unit {
        line: usize,
        key: String,
        expected: String,
        got: String,
    },
    #[error("line {line}: `{key}` {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
}
