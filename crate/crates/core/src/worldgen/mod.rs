//! Tile-map world generation.
//!
//! An example tile map is cut into adjacency rules (and optionally N×N overlapping
//! patterns); [`wfc_generate`] then fills a new grid with a wave-function-collapse
//! solver so that every neighbouring pair of tiles was observed in the example.

mod catalog;
pub mod presets;
mod wfc;

pub use catalog::{build_tile_catalog, AdjacencyRule, ExampleMap, Pattern, TileCatalog};
pub use wfc::{validate_adjacency, wfc_generate, wfc_generate_with, GenerationModel, Violation, WfcOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tile edge length in metres.
pub const DEFAULT_TILE_SIZE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldgenError {
    #[error("example map is empty")]
    EmptyExample,
    #[error("pattern size {n} exceeds example dimensions {width}x{height}")]
    PatternTooLarge { n: usize, width: usize, height: usize },
    #[error("constraint propagation failed {0} times")]
    ContradictionAfterRetries(usize),
    #[error("unknown tile kind id {0}")]
    UnknownKindId(u16),
    #[error("invalid map dimensions {0}x{1}")]
    InvalidDimensions(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TileCategory {
    StairX,
    StairY,
    Floor0,
    Floor1,
    /// Static wall / blocked tile. Not one of the three base tile types; lets
    /// examples express corridors and narrow passages.
    Obstacle,
}

impl TileCategory {
    pub fn is_floor(self) -> bool {
        matches!(self, TileCategory::Floor0 | TileCategory::Floor1)
    }

    pub fn is_stair(self) -> bool {
        matches!(self, TileCategory::StairX | TileCategory::StairY)
    }

    /// Floor level index (0 or 1) for floor tiles.
    pub fn level(self) -> Option<u8> {
        match self {
            TileCategory::Floor0 => Some(0),
            TileCategory::Floor1 => Some(1),
            _ => None,
        }
    }

    /// Single-character symbol used by the symbolic example format.
    pub fn symbol(self) -> char {
        match self {
            TileCategory::Floor0 => '.',
            TileCategory::Floor1 => ':',
            TileCategory::StairX => '>',
            TileCategory::StairY => '^',
            TileCategory::Obstacle => '#',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileKind {
    pub id: u16,
    pub category: TileCategory,
    /// Index of the parameter set (in the terrain parameters) used to render this kind.
    pub params_slot: usize,
}

impl TileKind {
    pub const fn new(id: u16, category: TileCategory) -> Self {
        TileKind { id, category, params_slot: 0 }
    }

    /// The default kind table: 0 Floor0, 1 Floor1, 2 StairX, 3 StairY, 4 Obstacle.
    pub fn standard() -> Vec<TileKind> {
        vec![
            TileKind::new(0, TileCategory::Floor0),
            TileKind::new(1, TileCategory::Floor1),
            TileKind::new(2, TileCategory::StairX),
            TileKind::new(3, TileCategory::StairY),
            TileKind::new(4, TileCategory::Obstacle),
        ]
    }
}

/// A fully resolved grid of tile kind ids, row-major with `y` as the row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileMap {
    pub width: usize,
    pub height: usize,
    pub tile_size: f64,
    pub seed: u64,
    pub cells: Vec<u16>,
}

impl TileMap {
    pub fn new(width: usize, height: usize, cells: Vec<u16>, seed: u64) -> Result<Self, WorldgenError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(WorldgenError::InvalidDimensions(width, height));
        }
        Ok(TileMap { width, height, tile_size: DEFAULT_TILE_SIZE, seed, cells })
    }

    pub fn filled(width: usize, height: usize, id: u16) -> Self {
        TileMap { width, height, tile_size: DEFAULT_TILE_SIZE, seed: 0, cells: vec![id; width * height] }
    }

    pub fn with_tile_size(mut self, tile_size: f64) -> Self {
        self.tile_size = tile_size;
        self
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, id: u16) {
        self.cells[y * self.width + x] = id;
    }

    /// World coordinates of the centre of tile `(x, y)`.
    pub fn tile_center(&self, x: usize, y: usize) -> crate::geom::Vec2 {
        crate::geom::Vec2::new((x as f64 + 0.5) * self.tile_size, (y as f64 + 0.5) * self.tile_size)
    }

    pub fn world_size(&self) -> (f64, f64) {
        (self.width as f64 * self.tile_size, self.height as f64 * self.tile_size)
    }

    /// Render with category symbols, one row per line.
    pub fn to_symbols(&self, catalog: &TileCatalog) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let c = catalog.kind(self.get(x, y)).map(|k| k.category.symbol()).unwrap_or('?');
                out.push(c);
            }
            out.push('\n');
        }
        out
    }
}
