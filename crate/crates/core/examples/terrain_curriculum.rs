//! Synthesize a height field from a tile map, write it as a raster, and run a
//! few generations of the minimal-criterion terrain filter with proxy trials.
//!
//!     cargo run --release --example terrain_curriculum

use navworld::agent::ProxyConfig;
use navworld::episode::proxy_traversal_scores;
use navworld::terrain::{synthesize_height_field, Curriculum, HeightField, TerrainParams, PARAM_NAMES};
use navworld::worldgen::{presets, wfc_generate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = presets::catalog("mixed", 2)?;
    let map = wfc_generate(&catalog, 16, 16, 3)?;
    let field = synthesize_height_field(&map, &catalog, &TerrainParams::default(), 0.1)?;
    let (lo, hi) = field.data().iter().fold((f32::MAX, f32::MIN), |(a, b), &h| (a.min(h), b.max(h)));
    println!("{}x{} cells, heights {lo:.2}..{hi:.2} m", field.cols, field.rows);

    let dir = std::env::temp_dir().join("navworld_terrain_example");
    std::fs::create_dir_all(&dir)?;
    field.write(&dir.join("field"))?;
    assert_eq!(HeightField::read(&dir.join("field"))?, field);
    println!("raster round trip ok in {}", dir.display());

    let curriculum = Curriculum { population: 24, ..Curriculum::default() };
    let proxy = ProxyConfig::default();
    let evaluate = |p: &TerrainParams, s: u64| proxy_traversal_scores(p, 8, s, &proxy, 0.02).unwrap_or_default();
    let records = curriculum.run(6, 1, evaluate, |gen| {
        let positive = gen.iter().filter(|r| r.fitness > 0.0).count();
        let mean_h = gen.iter().map(|r| r.params.stair.step_height).sum::<f64>() / gen.len() as f64;
        println!("generation {}: {positive}/{} inside the band, mean step height {mean_h:.3} m", gen[0].generation, gen.len());
    })?;

    let best = records.iter().max_by(|a, b| a.fitness.total_cmp(&b.fitness)).expect("non-empty population");
    println!("\nfittest parameter set (fitness {:.3}):", best.fitness);
    for (name, v) in PARAM_NAMES.iter().zip(best.params.to_array()) {
        println!("  {name:>18} = {v:.3}");
    }
    Ok(())
}
