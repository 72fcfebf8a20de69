//! Roll out the scripted policy in a corridor world and a generated world and
//! print the metrics report and the path-length bucket table.
//!
//!     cargo run --release --example episode_rollout

use std::sync::Arc;

use navworld::agent::ScriptedPolicy;
use navworld::episode::{rollout_batch, EpisodeConfig, World};
use navworld::eval::{bucket_table, EvalThresholds, MetricsReport};
use navworld::terrain::TerrainParams;
use navworld::worldgen::{presets, wfc_generate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let policy = ScriptedPolicy::default();
    let thresholds = EvalThresholds::default();

    let mut quiet = EpisodeConfig::eval();
    quiet.obstacles.count = [0, 0];
    let (map, catalog) = presets::straight_corridor(12, 0);
    let corridor = Arc::new(World::build(&map, &catalog, &TerrainParams::default(), 0.1)?);
    let runs = rollout_batch(corridor, &quiet, &policy, &thresholds, 20, 1)?;
    let summaries: Vec<_> = runs.into_iter().map(|r| r.summary).collect();
    let report = MetricsReport::from_summaries(&summaries);
    println!("corridor, no obstacles: spl {:?}, success rate {:?}", report.spl, report.success_rate);
    println!("tracking report: {:?}\n", report.tracking.map(|t| t.mean));

    let catalog = presets::catalog("mixed", 2)?;
    let map = wfc_generate(&catalog, 24, 24, 7)?;
    let world = Arc::new(World::build(&map, &catalog, &TerrainParams::default(), 0.1)?);
    let runs = rollout_batch(world, &EpisodeConfig::eval(), &policy, &thresholds, 50, 2)?;
    let steps: usize = runs.iter().map(|r| r.records.len()).sum();
    let summaries: Vec<_> = runs.into_iter().map(|r| r.summary).collect();
    let report = MetricsReport::from_summaries(&summaries);
    println!("mixed world with dynamic obstacles: {} episodes, {steps} high-level steps", report.episodes);
    println!("spl {:?}, success rate {:?}, cot {:?}", report.spl, report.success_rate, report.cot_mean);
    print!("\n{}", bucket_table(&summaries));
    Ok(())
}
