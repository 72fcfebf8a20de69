use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub pos: Vec2,
    pub visit_steps: u32,
}

/// The most recent positions recorded at fixed spacing, with the number of
/// steps spent near each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionBuffer {
    pub capacity: usize,
    pub spacing: f64,
    entries: VecDeque<BufferEntry>,
}

impl PositionBuffer {
    pub fn new(capacity: usize, spacing: f64, start: Vec2) -> Self {
        let mut entries = VecDeque::with_capacity(capacity);
        entries.push_back(BufferEntry { pos: start, visit_steps: 1 });
        PositionBuffer { capacity, spacing, entries }
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &BufferEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&BufferEntry> {
        self.entries.back()
    }

    pub fn pairs(&self) -> Vec<(Vec2, u32)> {
        self.entries.iter().map(|e| (e.pos, e.visit_steps)).collect()
    }

    /// Record a new entry once the robot is `spacing` away from the last one,
    /// otherwise count a visit on the nearest entry within `spacing`.
    pub fn update(&mut self, pos: Vec2) {
        let far = self.entries.back().is_none_or(|e| e.pos.dist(pos) >= self.spacing);
        if far {
            if self.entries.len() == self.capacity {
                self.entries.pop_front();
            }
            self.entries.push_back(BufferEntry { pos, visit_steps: 1 });
            return;
        }
        let mut best: Option<(f64, usize)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let d = e.pos.dist(pos);
            if d < self.spacing && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        if let Some((_, i)) = best {
            self.entries[i].visit_steps += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_walk_records_every_half_metre() {
        let mut b = PositionBuffer::new(20, 0.5, Vec2::ZERO);
        for k in 1..=120 {
            b.update(Vec2::new(k as f64 * 0.01, 0.0));
        }
        let xs: Vec<f64> = b.entries().map(|e| e.pos.x).collect();
        assert_eq!(xs.len(), 3);
        for (x, mark) in xs.iter().zip([0.0, 0.5, 1.0]) {
            assert!((x - mark).abs() < 0.011);
        }
    }

    #[test]
    fn oldest_entry_is_evicted() {
        let mut b = PositionBuffer::new(20, 0.5, Vec2::ZERO);
        for k in 1..=20 {
            b.update(Vec2::new(k as f64, 0.0));
        }
        assert_eq!(b.len(), 20);
        assert_eq!(b.entries().next().unwrap().pos, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn standing_still_counts_visits() {
        let mut b = PositionBuffer::new(20, 0.5, Vec2::ZERO);
        for _ in 0..10 {
            b.update(Vec2::new(0.01, 0.0));
        }
        assert_eq!(b.len(), 1);
        assert_eq!(b.last().unwrap().visit_steps, 11);
    }
}
