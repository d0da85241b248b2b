//! Experiment inputs and outputs: the synthetic surface, PGM images, sliding-window patches
//! and heatmaps.

mod patches;
mod pgm;
mod surface;
mod texture;

pub use patches::{eigvec_to_map, extract_patches, scores_to_heatmap, PatchGrid};
pub use pgm::{load_pgm, write_pgm, write_pgm_ascii, GrayImage};
pub use surface::{generate_surface, peaks, SurfaceInstance, SurfaceSpec};
pub use texture::{plant_patch, synthetic_texture};
