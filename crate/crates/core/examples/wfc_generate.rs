//! Generate tile maps from each built-in example with wave function collapse and
//! print one of them plus restart statistics.
//!
//!     cargo run --release --example wfc_generate

use std::time::Instant;

use navworld::worldgen::{presets, validate_adjacency, wfc_generate_with, WfcOptions, WorldgenError};

fn main() -> Result<(), WorldgenError> {
    for (name, _) in presets::ALL {
        let catalog = presets::catalog(name, 2)?;
        let mut failures = 0;
        let mut first_try = 0;
        let start = Instant::now();
        for seed in 0..200u64 {
            match wfc_generate_with(&catalog, 64, 64, seed, &WfcOptions { max_restarts: 0, ..Default::default() }) {
                Ok(map) => {
                    first_try += 1;
                    assert!(validate_adjacency(&map, &catalog)?.is_empty());
                }
                Err(_) => failures += 1,
            }
        }
        let per_map = start.elapsed().as_secs_f64() / 200.0;
        println!("{name:>10}: {first_try}/200 first-attempt successes, {failures} contradictions, {:.1} ms per 64x64 attempt", per_map * 1e3);
    }

    let catalog = presets::catalog("mixed", 2)?;
    let map = navworld::worldgen::wfc_generate(&catalog, 32, 16, 7)?;
    println!("\nseed 7, 'mixed' example, 32x16:\n{}", map.to_symbols(&catalog));
    Ok(())
}
