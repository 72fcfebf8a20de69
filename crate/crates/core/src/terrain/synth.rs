use super::{HeightField, TerrainError, TerrainParams};
use crate::geom::Vec2;
use crate::seed::{derive, splitmix64, tags};
use crate::worldgen::{TileCatalog, TileCategory, TileMap};

/// Wall elevation above the upper floor for obstacle tiles (m).
pub const WALL_CLEARANCE: f64 = 1.5;

/// Number of treads on a single stair tile of edge length `tile_size`.
pub fn steps_per_tile(params: &TerrainParams, tile_size: f64) -> usize {
    ((tile_size / params.stair.step_depth + 1e-9).floor() as usize).max(1)
}

/// Elevation difference between Floor0 and Floor1: one full staircase of risers.
pub fn stair_rise(params: &TerrainParams, tile_size: f64) -> f64 {
    steps_per_tile(params, tile_size) as f64 * params.stair.step_height
}

pub fn wall_height(params: &TerrainParams, tile_size: f64) -> f64 {
    stair_rise(params, tile_size) + WALL_CLEARANCE
}

/// Smooth value noise in [-1, 1] on a lattice of spacing `cell`.
struct ValueNoise {
    seed: u64,
    cell: f64,
}

impl ValueNoise {
    fn lattice(&self, i: i64, j: i64) -> f64 {
        let h = splitmix64(self.seed ^ splitmix64(i as u64) ^ splitmix64((j as u64).rotate_left(32)));
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn sample(&self, p: Vec2) -> f64 {
        let gx = p.x / self.cell;
        let gy = p.y / self.cell;
        let (i, j) = (gx.floor(), gy.floor());
        let s = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (s(gx - i), s(gy - j));
        let (i, j) = (i as i64, j as i64);
        let a = self.lattice(i, j) * (1.0 - tx) + self.lattice(i + 1, j) * tx;
        let b = self.lattice(i, j + 1) * (1.0 - tx) + self.lattice(i + 1, j + 1) * tx;
        a * (1.0 - ty) + b * ty
    }
}

/// A maximal run of same-axis stair tiles and the floor levels at both ends.
#[derive(Debug, Clone, Copy)]
struct StairRun {
    /// Start coordinate along the axis (tile index) and run length in tiles.
    start: usize,
    len: usize,
    low_level: f64,
    high_level: f64,
    /// True when elevation increases along +axis.
    ascending: bool,
}

fn resolve_levels(before: Option<u8>, after: Option<u8>) -> (f64, f64, bool) {
    match (before, after) {
        (Some(a), Some(b)) if a != b => (a.min(b) as f64, a.max(b) as f64, b > a),
        (Some(a), Some(_)) => (a as f64, a as f64, true),
        (Some(a), None) => (a.min(1 - a) as f64, a.max(1 - a) as f64, a == 0),
        (None, Some(b)) => (b.min(1 - b) as f64, b.max(1 - b) as f64, b == 1),
        (None, None) => (0.0, 1.0, true),
    }
}

/// Build a height field for `map`. Floors sit at level 0 or one stair rise
/// above; stair tiles climb in equal risers between the floor levels found at
/// the two ends of their run; obstacle tiles are walls.
pub fn synthesize_height_field(
    map: &TileMap,
    catalog: &TileCatalog,
    params: &TerrainParams,
    resolution: f64,
) -> Result<HeightField, TerrainError> {
    params.validate()?;
    let ratio = map.tile_size / resolution;
    if !(resolution > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
        return Err(TerrainError::ResolutionMismatch { resolution, tile_size: map.tile_size });
    }
    let per_tile = ratio.round() as usize;

    let mut cats = Vec::with_capacity(map.cells.len());
    for &id in &map.cells {
        cats.push(catalog.category(id).ok_or(TerrainError::UnknownKind(id))?);
    }
    let cat = |x: usize, y: usize| cats[y * map.width + x];

    // Stair runs, indexed per tile.
    let mut runs: Vec<Option<StairRun>> = vec![None; cats.len()];
    for y in 0..map.height {
        for x in 0..map.width {
            let c = cat(x, y);
            if !c.is_stair() || runs[y * map.width + x].is_some() {
                continue;
            }
            let along_x = c == TileCategory::StairX;
            let (pos, limit) = if along_x { (x, map.width) } else { (y, map.height) };
            let at = |k: usize| if along_x { cat(k, y) } else { cat(x, k) };
            let mut end = pos;
            while end + 1 < limit && at(end + 1) == c {
                end += 1;
            }
            let before = if pos > 0 { at(pos - 1).level() } else { None };
            let after = if end + 1 < limit { at(end + 1).level() } else { None };
            let (low_level, high_level, ascending) = resolve_levels(before, after);
            let run = StairRun { start: pos, len: end - pos + 1, low_level, high_level, ascending };
            for k in pos..=end {
                let idx = if along_x { y * map.width + k } else { k * map.width + x };
                runs[idx] = Some(run);
            }
        }
    }

    let rise = stair_rise(params, map.tile_size);
    let wall = wall_height(params, map.tile_size);
    let steps = steps_per_tile(params, map.tile_size);
    let noise = ValueNoise {
        seed: derive(map.seed, tags::TERRAIN_NOISE, 0),
        cell: params.floor.correlation_length.max(1e-6),
    };
    let tilt = params.slope.tan();

    let cols = map.width * per_tile;
    let rows = map.height * per_tile;
    let mut hf = HeightField::flat(cols, rows, resolution, 0.0);
    hf.seed = map.seed;
    hf.slope = params.slope;
    for j in 0..rows {
        for i in 0..cols {
            let (tx, ty) = (i / per_tile, j / per_tile);
            let p = hf.cell_center(i, j);
            let base = match cat(tx, ty) {
                TileCategory::Floor0 => params.floor.roughness * noise.sample(p),
                TileCategory::Floor1 => rise + params.floor.roughness * noise.sample(p),
                TileCategory::Obstacle => wall,
                c @ (TileCategory::StairX | TileCategory::StairY) => {
                    let run = runs[ty * map.width + tx].expect("stair run assigned");
                    let coord = if c == TileCategory::StairX { p.x } else { p.y };
                    let run_len = run.len as f64 * map.tile_size;
                    let u = coord - run.start as f64 * map.tile_size;
                    let u_low = if run.ascending { u } else { run_len - u };
                    let n = steps * run.len;
                    let tread = run_len / n as f64;
                    let k = ((u_low / tread).floor().max(0.0) as usize).min(n - 1);
                    let frac = (k + 1) as f64 / n as f64;
                    rise * (run.low_level + (run.high_level - run.low_level) * frac)
                }
            };
            hf.set(i, j, base + p.x * tilt);
            hf.set_friction(i, j, params.floor.friction);
        }
    }
    Ok(hf)
}
