use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Axis, TileCategory, TileKind, WorldgenError};

/// An example tile grid together with the kind table its ids refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleMap {
    pub kinds: Vec<TileKind>,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<u16>,
}

impl ExampleMap {
    pub fn new(kinds: Vec<TileKind>, rows: &[Vec<u16>]) -> Result<Self, WorldgenError> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if height == 0 || width == 0 {
            return Err(WorldgenError::EmptyExample);
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(WorldgenError::Parse("ragged example rows".into()));
        }
        let cells: Vec<u16> = rows.iter().flatten().copied().collect();
        for &id in &cells {
            if !kinds.iter().any(|k| k.id == id) {
                return Err(WorldgenError::UnknownKindId(id));
            }
        }
        Ok(ExampleMap { kinds, width, height, cells })
    }

    /// Parse a plain-text grid of whitespace-separated kind ids. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_ids(text: &str, kinds: Vec<TileKind>) -> Result<Self, WorldgenError> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u16>().map_err(|e| WorldgenError::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        ExampleMap::new(kinds, &rows)
    }

    /// Parse a grid written with category symbols (see [`TileCategory::symbol`])
    /// against the standard kind table.
    pub fn parse_symbols(text: &str) -> Result<Self, WorldgenError> {
        let kinds = TileKind::standard();
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| {
                    kinds
                        .iter()
                        .find(|k| k.category.symbol() == c)
                        .map(|k| k.id)
                        .ok_or_else(|| WorldgenError::Parse(format!("unknown symbol {c:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        ExampleMap::new(kinds, &rows)
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.cells[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdjacencyRule {
    pub a: u16,
    pub b: u16,
    pub axis: Axis,
}

/// An N×N window of kind ids (row-major) with its count in the example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub cells: Vec<u16>,
    pub count: u32,
}

/// Tile kinds, their symmetric adjacency relation and frequency weights learned from an example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileCatalog {
    pub kinds: Vec<TileKind>,
    /// Occurrence count of each kind in the example, aligned with `kinds`.
    pub kind_counts: Vec<u32>,
    pub pattern_size: usize,
    pub patterns: Vec<Pattern>,
    adjacency: BTreeSet<AdjacencyRule>,
}

/// Cut an example map into a catalog. The adjacency relation contains exactly the
/// neighbour pairs observed in the example (both orders, per axis).
pub fn build_tile_catalog(example: &ExampleMap, pattern_size: usize) -> Result<TileCatalog, WorldgenError> {
    let (w, h) = (example.width, example.height);
    if w == 0 || h == 0 || example.cells.is_empty() {
        return Err(WorldgenError::EmptyExample);
    }
    if pattern_size == 0 || pattern_size > w.min(h) {
        return Err(WorldgenError::PatternTooLarge { n: pattern_size, width: w, height: h });
    }

    let mut counts: BTreeMap<u16, u32> = BTreeMap::new();
    for &id in &example.cells {
        *counts.entry(id).or_default() += 1;
    }
    let kinds: Vec<TileKind> = counts
        .keys()
        .map(|id| {
            example
                .kinds
                .iter()
                .find(|k| k.id == *id)
                .copied()
                .ok_or(WorldgenError::UnknownKindId(*id))
        })
        .collect::<Result<_, _>>()?;
    let kind_counts = counts.values().copied().collect();

    let mut adjacency = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let a = example.get(x, y);
            if x + 1 < w {
                let b = example.get(x + 1, y);
                adjacency.insert(AdjacencyRule { a, b, axis: Axis::X });
                adjacency.insert(AdjacencyRule { a: b, b: a, axis: Axis::X });
            }
            if y + 1 < h {
                let b = example.get(x, y + 1);
                adjacency.insert(AdjacencyRule { a, b, axis: Axis::Y });
                adjacency.insert(AdjacencyRule { a: b, b: a, axis: Axis::Y });
            }
        }
    }

    let n = pattern_size;
    let mut pattern_counts: BTreeMap<Vec<u16>, u32> = BTreeMap::new();
    for y in 0..=(h - n) {
        for x in 0..=(w - n) {
            let mut cells = Vec::with_capacity(n * n);
            for dy in 0..n {
                for dx in 0..n {
                    cells.push(example.get(x + dx, y + dy));
                }
            }
            *pattern_counts.entry(cells).or_default() += 1;
        }
    }
    let patterns = pattern_counts.into_iter().map(|(cells, count)| Pattern { cells, count }).collect();

    Ok(TileCatalog { kinds, kind_counts, pattern_size, patterns, adjacency })
}

impl TileCatalog {
    pub fn kind(&self, id: u16) -> Option<&TileKind> {
        self.kinds.iter().find(|k| k.id == id)
    }

    pub fn kind_index(&self, id: u16) -> Option<usize> {
        self.kinds.iter().position(|k| k.id == id)
    }

    pub fn category(&self, id: u16) -> Option<TileCategory> {
        self.kind(id).map(|k| k.category)
    }

    /// Whether `a` and `b` may be neighbours along `axis` (in either order).
    pub fn allows(&self, a: u16, b: u16, axis: Axis) -> bool {
        self.adjacency.contains(&AdjacencyRule { a, b, axis })
    }

    pub fn rules(&self) -> impl Iterator<Item = &AdjacencyRule> {
        self.adjacency.iter()
    }

    pub fn rule_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Add an explicit adjacency rule (and its mirror) not present in the example.
    pub fn inject_rule(&mut self, a: u16, b: u16, axis: Axis) -> Result<(), WorldgenError> {
        for id in [a, b] {
            if self.kind(id).is_none() {
                return Err(WorldgenError::UnknownKindId(id));
            }
        }
        self.adjacency.insert(AdjacencyRule { a, b, axis });
        self.adjacency.insert(AdjacencyRule { a: b, b: a, axis });
        Ok(())
    }

    /// Kinds lacking any allowed neighbour on some axis. Such kinds can only
    /// appear in maps that are one tile wide along that axis.
    pub fn dead_kinds(&self) -> Vec<u16> {
        self.kinds
            .iter()
            .filter(|k| {
                [Axis::X, Axis::Y]
                    .iter()
                    .any(|&axis| !self.adjacency.iter().any(|r| r.a == k.id && r.axis == axis))
            })
            .map(|k| k.id)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, WorldgenError> {
        let cat: TileCatalog = serde_json::from_str(text).map_err(|e| WorldgenError::Parse(e.to_string()))?;
        if cat.kinds.len() != cat.kind_counts.len() {
            return Err(WorldgenError::Parse("kind_counts length mismatch".into()));
        }
        for r in &cat.adjacency {
            if !cat.allows(r.b, r.a, r.axis) {
                return Err(WorldgenError::Parse("adjacency relation is not symmetric".into()));
            }
        }
        Ok(cat)
    }
}
