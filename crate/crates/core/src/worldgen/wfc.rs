use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Axis, TileCatalog, TileMap, WorldgenError};
use crate::seed::{self, tags, SimRng};

/// Which catalog representation drives generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationModel {
    /// Cells take single kinds; neighbours must form an observed pair.
    #[default]
    Adjacency,
    /// Cells take N×N example patterns that must agree on their overlap.
    Overlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WfcOptions {
    pub model: GenerationModel,
    /// Restarts (with freshly derived seeds) after the first failed attempt.
    pub max_restarts: usize,
}

impl Default for WfcOptions {
    fn default() -> Self {
        WfcOptions { model: GenerationModel::Adjacency, max_restarts: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub cell_a: (usize, usize),
    pub cell_b: (usize, usize),
    pub axis: Axis,
}

/// List every neighbouring pair in `map` not permitted by the catalog.
pub fn validate_adjacency(map: &TileMap, catalog: &TileCatalog) -> Result<Vec<Violation>, WorldgenError> {
    if let Some(&bad) = map.cells.iter().find(|&&id| catalog.kind(id).is_none()) {
        return Err(WorldgenError::UnknownKindId(bad));
    }
    let mut out = Vec::new();
    for y in 0..map.height {
        for x in 0..map.width {
            let a = map.get(x, y);
            if x + 1 < map.width && !catalog.allows(a, map.get(x + 1, y), Axis::X) {
                out.push(Violation { cell_a: (x, y), cell_b: (x + 1, y), axis: Axis::X });
            }
            if y + 1 < map.height && !catalog.allows(a, map.get(x, y + 1), Axis::Y) {
                out.push(Violation { cell_a: (x, y), cell_b: (x, y + 1), axis: Axis::Y });
            }
        }
    }
    Ok(out)
}

pub fn wfc_generate(catalog: &TileCatalog, width: usize, height: usize, seed: u64) -> Result<TileMap, WorldgenError> {
    wfc_generate_with(catalog, width, height, seed, &WfcOptions::default())
}

/// Generate a `width`×`height` map. A pure function of its arguments: attempt `k > 0`
/// reruns the solver with a seed derived from `(seed, k)`.
pub fn wfc_generate_with(
    catalog: &TileCatalog,
    width: usize,
    height: usize,
    seed: u64,
    opts: &WfcOptions,
) -> Result<TileMap, WorldgenError> {
    if width == 0 || height == 0 {
        return Err(WorldgenError::InvalidDimensions(width, height));
    }
    let tiles = TileSet::from_catalog(catalog, opts.model);
    let mut failures = 0;
    for attempt in 0..=opts.max_restarts {
        let s = if attempt == 0 { seed } else { seed::derive(seed, tags::WFC_RESTART, attempt as u64) };
        let mut rng = seed::rng(s);
        let mut solver = Solver::new(&tiles, width, height);
        match solver.run(&mut rng) {
            Some(choice) => {
                let cells = choice.into_iter().map(|t| tiles.output[t]).collect();
                let mut map = TileMap::new(width, height, cells, seed)?;
                map.tile_size = super::DEFAULT_TILE_SIZE;
                return Ok(map);
            }
            None => failures += 1,
        }
    }
    Err(WorldgenError::ContradictionAfterRetries(failures))
}

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

struct TileSet {
    weights: Vec<f64>,
    output: Vec<u16>,
    words: usize,
    /// `compat[d][t]`: bitset of tiles allowed at offset `DIRS[d]` from a cell holding `t`.
    compat: [Vec<Vec<u64>>; 4],
}

impl TileSet {
    fn from_catalog(catalog: &TileCatalog, model: GenerationModel) -> TileSet {
        match model {
            GenerationModel::Adjacency => {
                let n = catalog.kinds.len();
                let words = n.div_ceil(64).max(1);
                let compat = std::array::from_fn(|d| {
                    let axis = if d < 2 { Axis::X } else { Axis::Y };
                    (0..n)
                        .map(|i| {
                            let mut bits = vec![0u64; words];
                            for j in 0..n {
                                if catalog.allows(catalog.kinds[i].id, catalog.kinds[j].id, axis) {
                                    bits[j / 64] |= 1 << (j % 64);
                                }
                            }
                            bits
                        })
                        .collect()
                });
                TileSet {
                    weights: catalog.kind_counts.iter().map(|&c| c as f64).collect(),
                    output: catalog.kinds.iter().map(|k| k.id).collect(),
                    words,
                    compat,
                }
            }
            GenerationModel::Overlapping => {
                let n = catalog.pattern_size as isize;
                let pats = &catalog.patterns;
                let words = pats.len().div_ceil(64).max(1);
                let agrees = |p: &[u16], q: &[u16], dx: isize, dy: isize| {
                    for y in 0..n {
                        for x in 0..n {
                            let (qx, qy) = (x - dx, y - dy);
                            if (0..n).contains(&qx)
                                && (0..n).contains(&qy)
                                && p[(y * n + x) as usize] != q[(qy * n + qx) as usize]
                            {
                                return false;
                            }
                        }
                    }
                    true
                };
                let compat = std::array::from_fn(|d| {
                    let (dx, dy) = DIRS[d];
                    pats.iter()
                        .map(|p| {
                            let mut bits = vec![0u64; words];
                            for (j, q) in pats.iter().enumerate() {
                                if agrees(&p.cells, &q.cells, dx, dy) {
                                    bits[j / 64] |= 1 << (j % 64);
                                }
                            }
                            bits
                        })
                        .collect()
                });
                TileSet {
                    weights: pats.iter().map(|p| p.count as f64).collect(),
                    output: pats.iter().map(|p| p.cells[0]).collect(),
                    words,
                    compat,
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.weights.len()
    }
}

#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Solver<'a> {
    tiles: &'a TileSet,
    width: usize,
    height: usize,
    domains: Vec<u64>,
    counts: Vec<usize>,
    entropy: Vec<f64>,
    noise: Vec<f64>,
    heap: BinaryHeap<Reverse<(Key, usize)>>,
}

impl<'a> Solver<'a> {
    fn new(tiles: &'a TileSet, width: usize, height: usize) -> Self {
        let cells = width * height;
        let mut full = vec![0u64; tiles.words];
        for t in 0..tiles.len() {
            full[t / 64] |= 1 << (t % 64);
        }
        let mut domains = Vec::with_capacity(cells * tiles.words);
        for _ in 0..cells {
            domains.extend_from_slice(&full);
        }
        Solver {
            tiles,
            width,
            height,
            domains,
            counts: vec![tiles.len(); cells],
            entropy: vec![0.0; cells],
            noise: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn dom(&self, c: usize) -> &[u64] {
        &self.domains[c * self.tiles.words..(c + 1) * self.tiles.words]
    }

    fn members(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.dom(c).iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let t = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }

    fn refresh(&mut self, c: usize) {
        let (mut sw, mut swl, mut n) = (0.0, 0.0, 0);
        for t in self.members(c) {
            let w = self.tiles.weights[t];
            sw += w;
            swl += w * w.ln();
            n += 1;
        }
        self.counts[c] = n;
        self.entropy[c] = if n > 0 { sw.ln() - swl / sw } else { 0.0 };
        if n > 1 {
            self.heap.push(Reverse((Key(self.entropy[c] + self.noise[c]), c)));
        }
    }

    fn neighbor(&self, c: usize, d: usize) -> Option<usize> {
        let (x, y) = ((c % self.width) as isize, (c / self.width) as isize);
        let (nx, ny) = (x + DIRS[d].0, y + DIRS[d].1);
        if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
            None
        } else {
            Some(ny as usize * self.width + nx as usize)
        }
    }

    /// Returns false on contradiction.
    fn propagate(&mut self, mut stack: Vec<usize>) -> bool {
        let words = self.tiles.words;
        let mut allowed = vec![0u64; words];
        while let Some(c) = stack.pop() {
            for d in 0..4 {
                let Some(n) = self.neighbor(c, d) else { continue };
                allowed.iter_mut().for_each(|w| *w = 0);
                for t in self.members(c).collect::<Vec<_>>() {
                    for (a, b) in allowed.iter_mut().zip(&self.tiles.compat[d][t]) {
                        *a |= b;
                    }
                }
                let mut changed = false;
                let mut any = false;
                for (w, a) in self.domains[n * words..(n + 1) * words].iter_mut().zip(&allowed) {
                    let new = *w & a;
                    changed |= new != *w;
                    any |= new != 0;
                    *w = new;
                }
                if changed {
                    if !any {
                        return false;
                    }
                    self.refresh(n);
                    stack.push(n);
                }
            }
        }
        true
    }

    fn run(&mut self, rng: &mut SimRng) -> Option<Vec<usize>> {
        let cells = self.width * self.height;
        self.noise = (0..cells).map(|_| rng.random::<f64>() * 1e-6).collect();
        for c in 0..cells {
            self.refresh(c);
        }
        if !self.propagate((0..cells).collect()) {
            return None;
        }
        while let Some(Reverse((Key(k), c))) = self.heap.pop() {
            if self.counts[c] <= 1 || k != self.entropy[c] + self.noise[c] {
                continue;
            }
            let members: Vec<usize> = self.members(c).collect();
            let total: f64 = members.iter().map(|&t| self.tiles.weights[t]).sum();
            let mut r = rng.random::<f64>() * total;
            let mut pick = *members.last().expect("non-empty domain");
            for &t in &members {
                r -= self.tiles.weights[t];
                if r < 0.0 {
                    pick = t;
                    break;
                }
            }
            let words = self.tiles.words;
            for (i, w) in self.domains[c * words..(c + 1) * words].iter_mut().enumerate() {
                *w = if pick / 64 == i { 1 << (pick % 64) } else { 0 };
            }
            self.refresh(c);
            if !self.propagate(vec![c]) {
                return None;
            }
        }
        (0..cells)
            .map(|c| {
                debug_assert_eq!(self.counts[c], 1);
                self.members(c).next()
            })
            .collect()
    }
}
