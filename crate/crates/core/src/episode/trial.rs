use rand::Rng;

use super::{World, WorldBuildError};
use crate::agent::{proxy_step, ProxyConfig, ProxyState, VelocityCommand};
use crate::geom::Vec2;
use crate::seed::{self, derive, tags};
use crate::terrain::{traversal_score, TerrainParams};
use crate::worldgen::{build_tile_catalog, ExampleMap, TileCatalog, TileMap};

/// Floor0, one StairX tile, then Floor1, walled above and below.
pub const STAIR_TRIAL: &str = "\
#######
...>:::
#######";

/// Distance (m) a trial covers at the commanded speed, starting 1 m short of
/// the stair tile, and the initial span (s) excluded from scoring while the
/// proxy spins up to the command.
pub const TRIAL_DIST: f64 = 4.0;
pub const SETTLE_S: f64 = 0.6;

fn trial_layout(seed: u64) -> (TileMap, TileCatalog) {
    let ex = ExampleMap::parse_symbols(STAIR_TRIAL).expect("trial layout parses");
    let catalog = build_tile_catalog(&ex, 2).expect("trial catalog");
    let map = TileMap::new(ex.width, ex.height, ex.cells.clone(), seed).expect("non-empty");
    (map, catalog)
}

/// Per-trial traversal scores ν for `params`: each trial synthesizes the stair
/// layout, drops the proxy on one side facing the stair, commands a constant
/// forward speed in [0.5, 1.5] m/s and scores the resulting world velocities.
pub fn proxy_traversal_scores(
    params: &TerrainParams,
    trials: usize,
    seed: u64,
    cfg: &ProxyConfig,
    ll_dt: f64,
) -> Result<Vec<f64>, WorldBuildError> {
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let s = derive(seed, tags::ROLLOUT, t as u64);
        let mut rng = seed::rng(s);
        let (map, catalog) = trial_layout(s);
        let world = World::build(&map, &catalog, params, 0.1)?;
        let ascend = rng.random_bool(0.5);
        let lateral = rng.random_range(-0.3..0.3);
        let speed = rng.random_range(0.5..1.5);
        let (x, yaw) = if ascend { (5.0, 0.0) } else { (9.0, std::f64::consts::PI) };
        let mut st = ProxyState::at_rest(&world.field, Vec2::new(x, 3.0 + lateral), yaw);
        let cmd = VelocityCommand { vx: speed, vy: 0.0, wz: 0.0 };
        let steps = ((SETTLE_S + TRIAL_DIST / speed) / ll_dt).round() as usize;
        let settle = (SETTLE_S / ll_dt).round() as usize;
        let mut vel = Vec::with_capacity(steps);
        for k in 0..steps {
            st = proxy_step(&st, &cmd, &world.field, cfg, ll_dt);
            if k >= settle {
                vel.push(st.world_velocity());
            }
        }
        let command = Vec2::new(speed, 0.0).rotated(yaw);
        out.push(traversal_score(&vel, command).expect("non-empty trajectory"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(step_height: f64) -> f64 {
        let mut p = TerrainParams::default();
        p.stair.step_height = step_height;
        p.floor.roughness = 0.0;
        let s = proxy_traversal_scores(&p, 16, 3, &ProxyConfig::default(), 0.02).unwrap();
        s.iter().sum::<f64>() / s.len() as f64
    }

    #[test]
    fn flat_is_easy_and_tall_steps_are_not() {
        assert_eq!(rate(0.0), 1.0);
        assert_eq!(rate(0.5), 0.0);
    }

    #[test]
    fn rate_falls_with_step_height() {
        let r: Vec<f64> = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4].iter().map(|&h| rate(h)).collect();
        assert!(r.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn scores_are_deterministic() {
        let p = TerrainParams::default();
        let cfg = ProxyConfig::default();
        assert_eq!(proxy_traversal_scores(&p, 5, 9, &cfg, 0.02).unwrap(), proxy_traversal_scores(&p, 5, 9, &cfg, 0.02).unwrap());
    }
}
