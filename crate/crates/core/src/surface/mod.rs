//! Grain surfaces: triangle meshes for spheres and interlocking blocks, and
//! the surface nodes (with tributary areas) seeded on them.

mod generate;
mod mesh;
mod seed;

pub use generate::{icosphere_mesh, interlocking_block_mesh, MAX_ICOSPHERE_SUBDIVISIONS};
pub use mesh::TriangleMesh;
pub use seed::{seed_nodes_and_areas, Refinement, SurfaceNodeSet, DEFAULT_NODE_CAP};
