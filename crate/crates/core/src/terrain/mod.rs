//! Metric terrain: parameter sets, height-field rasters synthesised from tile
//! maps, and the minimal-criterion curriculum that filters terrain parameters.

mod curriculum;
mod heightfield;
mod params;
mod synth;

pub use curriculum::{
    curriculum_fitness, evolve_params, traversal_score, Curriculum, CurriculumRecord, GaConfig, McThresholds,
};
pub use heightfield::{HeightField, RasterMeta};
pub use params::{sample_terrain_params, FloorParams, ParamSpace, StairParams, TerrainParams, PARAM_NAMES};
pub use synth::{stair_rise, steps_per_tile, synthesize_height_field, wall_height, WALL_CLEARANCE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("resolution {resolution} does not divide tile size {tile_size}")]
    ResolutionMismatch { resolution: f64, tile_size: f64 },
    #[error("empty parameter space: {0}")]
    EmptySpace(String),
    #[error("invalid terrain parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("score list is empty")]
    EmptyScores,
    #[error("thresholds must satisfy 0 <= t_l < t_h <= 1, got ({0}, {1})")]
    BadThresholds(f64, f64),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("no record in the population has positive fitness")]
    AllZeroFitness,
    #[error("unknown tile kind id {0}")]
    UnknownKind(u16),
    #[error("raster format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
