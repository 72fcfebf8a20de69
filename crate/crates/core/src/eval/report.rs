use serde::{Deserialize, Serialize};

use super::{histogram_bin, spl, success_rate, EpisodeResult, TrackingStats, HIST_BIN, HIST_MAX};
use crate::episode::TerminationReason;
use crate::geom::Vec2;

/// Path-length buckets (m) of the summary table; lower bound inclusive.
pub const LENGTH_BUCKETS: [(f64, f64); 2] = [(5.0, 10.0), (10.0, 20.0)];

/// Running sum/count (and optional histogram) that merges deterministically.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PartialStats {
    pub sum: f64,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<u64>,
}

impl PartialStats {
    pub fn with_histogram() -> Self {
        PartialStats { bins: vec![0; (HIST_MAX / HIST_BIN).round() as usize], ..Default::default() }
    }

    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
        if !self.bins.is_empty() {
            self.bins[histogram_bin(x)] += 1;
        }
    }

    pub fn merge(&mut self, other: &PartialStats) {
        self.sum += other.sum;
        self.count += other.count;
        if self.bins.is_empty() {
            self.bins = other.bins.clone();
        } else {
            for (a, b) in self.bins.iter_mut().zip(&other.bins) {
                *a += b;
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    pub fn tracking(&self) -> Option<TrackingStats> {
        self.mean().map(|mean| TrackingStats { mean, bin_width: HIST_BIN, bins: self.bins.clone() })
    }
}

/// Per-episode line of `episodes.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub index: usize,
    pub seed: u64,
    pub start: Vec2,
    pub goal: Vec2,
    pub shortest_len: f64,
    pub traveled_len: f64,
    pub duration: f64,
    pub success: bool,
    pub reason: Option<TerminationReason>,
    pub cot: PartialStats,
    pub tracking: PartialStats,
}

impl EpisodeSummary {
    pub fn result(&self) -> EpisodeResult {
        EpisodeResult {
            success: self.success,
            shortest_len: self.shortest_len,
            traveled_len: self.traveled_len,
            duration: self.duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub mean: f64,
    pub bins: Vec<u64>,
}

/// Aggregate metrics; fields are null when there is nothing to aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub episodes: usize,
    pub spl: Option<f64>,
    pub success_rate: Option<f64>,
    pub cot_mean: Option<f64>,
    pub tracking: Option<TrackingReport>,
}

impl MetricsReport {
    pub fn from_summaries(summaries: &[EpisodeSummary]) -> Self {
        let results: Vec<EpisodeResult> = summaries.iter().map(|s| s.result()).collect();
        let mut cot = PartialStats::default();
        let mut tracking = PartialStats::with_histogram();
        for s in summaries {
            cot.merge(&s.cot);
            tracking.merge(&s.tracking);
        }
        MetricsReport {
            episodes: summaries.len(),
            spl: spl(&results).ok(),
            success_rate: success_rate(&results).ok(),
            cot_mean: cot.mean(),
            tracking: tracking.tracking().map(|t| TrackingReport { mean: t.mean, bins: t.bins }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// CSV table with one row per path-length bucket; the metric column reads
/// `SPL (success rate)` with three decimals.
pub fn bucket_table(summaries: &[EpisodeSummary]) -> String {
    let mut out = String::from("path_length_m,episodes,spl_success\n");
    for (k, (lo, hi)) in LENGTH_BUCKETS.into_iter().enumerate() {
        let last = k + 1 == LENGTH_BUCKETS.len();
        let bucket: Vec<EpisodeResult> = summaries
            .iter()
            .filter(|s| s.shortest_len >= lo && (s.shortest_len < hi || (last && s.shortest_len == hi)))
            .map(|s| s.result())
            .collect();
        let cell = match (spl(&bucket), success_rate(&bucket)) {
            (Ok(a), Ok(b)) => format!("{a:.3} ({b:.3})"),
            _ => "-".to_string(),
        };
        out.push_str(&format!("{lo}-{hi},{},{cell}\n", bucket.len()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(len: f64, success: bool, traveled: f64) -> EpisodeSummary {
        EpisodeSummary {
            index: 0,
            seed: 0,
            start: Vec2::ZERO,
            goal: Vec2::ZERO,
            shortest_len: len,
            traveled_len: traveled,
            duration: 1.0,
            success,
            reason: None,
            cot: PartialStats::default(),
            tracking: PartialStats::with_histogram(),
        }
    }

    #[test]
    fn bucket_rows() {
        let s = vec![summary(6.0, true, 6.0), summary(8.0, false, 8.0), summary(12.0, true, 24.0), summary(20.0, true, 20.0)];
        let csv = bucket_table(&s);
        assert_eq!(csv, "path_length_m,episodes,spl_success\n5-10,2,0.500 (0.500)\n10-20,2,0.750 (1.000)\n");
    }

    #[test]
    fn empty_report_is_null() {
        let r = MetricsReport::from_summaries(&[]);
        assert_eq!(r.spl, None);
        assert!(r.to_json().contains("\"spl\": null"));
        assert_eq!(bucket_table(&[]), "path_length_m,episodes,spl_success\n5-10,0,-\n10-20,0,-\n");
    }

    #[test]
    fn partial_merge_matches_direct() {
        let mut a = PartialStats::with_histogram();
        let mut b = PartialStats::with_histogram();
        let mut all = PartialStats::with_histogram();
        for (i, x) in [0.1, 0.4, 2.5, 0.04].iter().enumerate() {
            if i % 2 == 0 { a.push(*x) } else { b.push(*x) }
            all.push(*x);
        }
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert_eq!(a.bins, all.bins);
        assert_eq!(a.bins.iter().sum::<u64>(), 4);
    }
}
