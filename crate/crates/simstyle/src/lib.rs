//! Stress-aware stylization of 3D-printable surface meshes.
//!
//! The library iteratively displaces mesh vertices along their normals toward a
//! procedural style target while a tetrahedral drop-test simulation feeds
//! von Mises stress back into the loop as a per-vertex mask. High-stress regions
//! are stylized less (or frozen), keeping the result structurally viable.
//!
//! Main entry point is [`pipeline::run_pipeline`]; the stages (meshing,
//! simulation, failure analysis, thickness, scheduling) are usable on their own.
//!
//! With the default `parallel` feature the hot loops (element force assembly,
//! per-vertex field maps, batch cells) run on rayon; without it everything runs
//! sequentially. Results are bitwise identical either way.

pub mod control;
pub mod failure;
pub mod material;
pub mod mesh;
pub(crate) mod par;
pub mod pipeline;
pub mod schedule;
pub mod shapes;
pub mod simulate;
pub mod stylize;
pub mod tet;
pub mod thickness;

mod kdtree;

pub use control::{apply_mask, ControlStrategy, MaskField};
pub use failure::{critical_stress, normalized_stress, viability_verdict, NormalizedStress, Verdict};
pub use material::{lame_from_elastic, Material, MaterialDb};
pub use mesh::{DisplacementField, MeshFormat, SurfaceMesh};
pub use pipeline::{batch_evaluate, run_pipeline, PipelineConfig, RunReport};
pub use schedule::{temporal_schedule, ScheduleConfig, ScheduleStrategy};
pub use simulate::{drop_test, impact_velocity, SimConfig, StressField};
pub use stylize::{StyleConfig, StyleTarget};
pub use tet::{build_correspondence, voxel_tetrahedralize, Correspondence, TetMesh};
pub use thickness::{local_thickness, ThicknessField};
