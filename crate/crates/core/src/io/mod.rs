//! Configuration parsing and file emission: meshes, grids, node sets,
//! load curves, sweep tables and pose snapshots.

mod config;
mod grid_file;
mod obj;
mod tables;

pub use config::{
    parse_config, OutputSection, Scenario, SimulationConfig, SweepSection, TwoSphereSection,
};
pub use grid_file::{read_grid, write_grid, GRID_MAGIC};
pub use obj::{read_obj, write_obj, write_posed_obj};
pub use tables::{
    read_pdelta_csv, snapshot_dir_name, write_contact_header, write_contact_rows, write_nodes_csv,
    write_pdelta_csv, write_poses_csv, write_snapshot, write_sweep_csv, PDELTA_HEADER,
};

#[cfg(test)]
mod tests;
