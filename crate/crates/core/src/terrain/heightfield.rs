use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TerrainError;
use crate::geom::Vec2;

/// Regular 2.5D elevation raster. Cell `(i, j)` covers
/// `[origin.x + i*res, origin.x + (i+1)*res) x [origin.y + j*res, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub resolution: f64,
    pub origin: Vec2,
    pub cols: usize,
    pub rows: usize,
    pub seed: u64,
    /// Global tilt along +x (rad) baked into the elevations.
    pub slope: f64,
    data: Vec<f32>,
    friction: Vec<f32>,
}

/// JSON sidecar stored next to the raw little-endian `f32` rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterMeta {
    pub resolution: f64,
    pub origin: [f64; 2],
    pub dims: [usize; 2],
    pub seed: u64,
    pub slope: f64,
}

impl HeightField {
    pub fn flat(cols: usize, rows: usize, resolution: f64, elevation: f64) -> Self {
        HeightField {
            resolution,
            origin: Vec2::ZERO,
            cols,
            rows,
            seed: 0,
            slope: 0.0,
            data: vec![elevation as f32; cols * rows],
            friction: vec![0.8; cols * rows],
        }
    }

    pub fn from_fn(cols: usize, rows: usize, resolution: f64, mut f: impl FnMut(Vec2) -> f64) -> Self {
        let mut hf = HeightField::flat(cols, rows, resolution, 0.0);
        for j in 0..rows {
            for i in 0..cols {
                let c = hf.cell_center(i, j);
                hf.data[j * cols + i] = f(c) as f32;
            }
        }
        hf
    }

    pub(crate) fn from_parts(
        meta: RasterMeta,
        data: Vec<f32>,
        friction: Vec<f32>,
    ) -> Result<Self, TerrainError> {
        let [cols, rows] = meta.dims;
        if !(meta.resolution > 0.0) || !meta.resolution.is_finite() {
            return Err(TerrainError::Format(format!("resolution {} must be positive", meta.resolution)));
        }
        if data.len() != cols * rows || friction.len() != cols * rows {
            return Err(TerrainError::Format(format!(
                "raster length {} / {} does not match dims {cols}x{rows}",
                data.len(),
                friction.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TerrainError::Format("non-finite elevation".into()));
        }
        Ok(HeightField {
            resolution: meta.resolution,
            origin: Vec2::new(meta.origin[0], meta.origin[1]),
            cols,
            rows,
            seed: meta.seed,
            slope: meta.slope,
            data,
            friction,
        })
    }

    pub fn meta(&self) -> RasterMeta {
        RasterMeta {
            resolution: self.resolution,
            origin: [self.origin.x, self.origin.y],
            dims: [self.cols, self.rows],
            seed: self.seed,
            slope: self.slope,
        }
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn friction_data(&self) -> &[f32] {
        &self.friction
    }

    pub fn set(&mut self, i: usize, j: usize, h: f64) {
        self.data[j * self.cols + i] = h as f32;
    }

    pub fn set_friction(&mut self, i: usize, j: usize, mu: f64) {
        self.friction[j * self.cols + i] = mu as f32;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.cols + i] as f64
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.cols as f64 * self.resolution, self.rows as f64 * self.resolution)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution)
    }

    fn cell_coords(&self, p: Vec2) -> (f64, f64) {
        (((p.x - self.origin.x) / self.resolution).floor(), ((p.y - self.origin.y) / self.resolution).floor())
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let (fi, fj) = self.cell_coords(p);
        if fi >= 0.0 && fj >= 0.0 && (fi as usize) < self.cols && (fj as usize) < self.rows {
            Some((fi as usize, fj as usize))
        } else {
            None
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.cell_of(p).is_some()
    }

    /// Elevation of the cell containing `p`.
    pub fn height_at(&self, p: Vec2) -> Option<f64> {
        self.cell_of(p).map(|(i, j)| self.get(i, j))
    }

    /// Elevation at `p` with the cell index clamped to the raster; the flag is
    /// true when `p` lies outside.
    pub fn height_at_clamped(&self, p: Vec2) -> (f64, bool) {
        if let Some((i, j)) = self.cell_of(p) {
            return (self.get(i, j), false);
        }
        let (fi, fj) = self.cell_coords(p);
        let i = fi.clamp(0.0, (self.cols - 1) as f64) as usize;
        let j = fj.clamp(0.0, (self.rows - 1) as f64) as usize;
        (self.get(i, j), true)
    }

    pub fn friction_at(&self, p: Vec2) -> Option<f64> {
        self.cell_of(p).map(|(i, j)| self.friction[j * self.cols + i] as f64)
    }

    /// Copy with every elevation raised by `dz`.
    pub fn offset(&self, dz: f64) -> HeightField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|h| *h = (*h as f64 + dz) as f32);
        out
    }

    /// Copy of the sub-raster starting at cell `(i0, j0)`.
    pub fn window(&self, i0: usize, j0: usize, cols: usize, rows: usize) -> HeightField {
        let cols = cols.min(self.cols.saturating_sub(i0));
        let rows = rows.min(self.rows.saturating_sub(j0));
        let mut data = Vec::with_capacity(cols * rows);
        let mut friction = Vec::with_capacity(cols * rows);
        for j in j0..j0 + rows {
            data.extend_from_slice(&self.data[j * self.cols + i0..j * self.cols + i0 + cols]);
            friction.extend_from_slice(&self.friction[j * self.cols + i0..j * self.cols + i0 + cols]);
        }
        HeightField {
            resolution: self.resolution,
            origin: self.origin + Vec2::new(i0 as f64 * self.resolution, j0 as f64 * self.resolution),
            cols,
            rows,
            seed: self.seed,
            slope: self.slope,
            data,
            friction,
        }
    }

    pub fn elevation_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn friction_bytes(&self) -> Vec<u8> {
        self.friction.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta()).expect("meta serialises")
    }

    fn paths(base: &Path) -> (PathBuf, PathBuf, PathBuf) {
        let with = |ext: &str| {
            let mut s = base.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        (with(".f32"), with(".friction.f32"), with(".json"))
    }

    /// Write `<base>.f32` (elevation), `<base>.friction.f32` and `<base>.json`.
    pub fn write(&self, base: &Path) -> Result<(), TerrainError> {
        let (elev, fric, meta) = Self::paths(base);
        fs::write(elev, self.elevation_bytes())?;
        fs::write(fric, self.friction_bytes())?;
        fs::write(meta, self.meta_json())?;
        Ok(())
    }

    pub fn read(base: &Path) -> Result<Self, TerrainError> {
        let (elev, fric, meta) = Self::paths(base);
        let meta: RasterMeta =
            serde_json::from_str(&fs::read_to_string(meta)?).map_err(|e| TerrainError::Format(e.to_string()))?;
        let decode = |bytes: Vec<u8>| -> Result<Vec<f32>, TerrainError> {
            if bytes.len() % 4 != 0 {
                return Err(TerrainError::Format("raster length is not a multiple of 4".into()));
            }
            Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
        };
        HeightField::from_parts(meta, decode(fs::read(elev)?)?, decode(fs::read(fric)?)?)
    }
}
