//! Level-set discrete element method for rigid grains with node-to-surface
//! penalty contact.
//!
//! Grains carry surface nodes (with tributary areas) and a signed-distance
//! grid. A contact is a node of one grain found inside the level set of
//! another. Nodal forces follow either the force-based formulation, with
//! stiffnesses per node, or the traction-based one, with stiffnesses per
//! unit area scaled by each node's tributary area.
//!
//! Units are mm, tonne, s and N throughout, so stresses come out in MPa and
//! energies in mJ.

pub mod contact;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod levelset;
pub mod real;
pub mod scenarios;
pub mod surface;

pub use real::Real;

pub type Mesh64 = surface::TriangleMesh<f64>;
pub type Mesh32 = surface::TriangleMesh<f32>;
pub type Grid64 = levelset::LevelSetGrid<f64>;
pub type Grid32 = levelset::LevelSetGrid<f32>;
pub type Formulation64 = contact::ContactFormulation<f64>;
pub type Formulation32 = contact::ContactFormulation<f32>;
pub type Template64 = dynamics::GrainTemplate<f64>;
pub type Template32 = dynamics::GrainTemplate<f32>;
pub type World64 = dynamics::World<f64>;
pub type World32 = dynamics::World<f32>;
pub type Record64 = scenarios::PDeltaRecord<f64>;
pub type Record32 = scenarios::PDeltaRecord<f32>;
