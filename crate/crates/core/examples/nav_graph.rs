//! Build the navigation graph of a generated map, query a shortest path and
//! follow it with anchor pursuit.
//!
//!     cargo run --release --example nav_graph

use navworld::geom::Vec2;
use navworld::navgraph::{build_nav_graph, sample_episode_path, shortest_distances, AnchorPursuit};
use navworld::seed;
use navworld::worldgen::{presets, wfc_generate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = presets::catalog("open", 2)?;
    let map = wfc_generate(&catalog, 20, 12, 11)?;
    println!("{}\n", map.to_symbols(&catalog));

    let graph = build_nav_graph(&map, &catalog)?;
    let dist = shortest_distances(&graph, 0)?;
    let reachable = dist.iter().filter(|d| d.is_finite()).count();
    println!("{} nodes, {} edges; {reachable} nodes reachable from node 0", graph.nodes().len(), graph.edges().len());

    let mut rng = seed::rng(5);
    let path = sample_episode_path(&graph, &mut rng, 10.0, 30.0)?;
    println!("sampled path: {} nodes, {:.1} m", path.nodes.len(), path.length);

    // Move a point robot 0.5 m per tick toward the anchor-pursuit target.
    let mut pursuit = AnchorPursuit::default();
    let mut pos = path.start().expect("non-empty path") + Vec2::new(0.3, -0.4);
    let goal = path.end().expect("non-empty path");
    let mut ticks = 0;
    while pos.dist(goal) > 0.25 && ticks < 500 {
        let target = pursuit.target(&path, pos);
        let step = target - pos;
        pos = pos + step.normalized() * step.norm().min(0.5);
        ticks += 1;
    }
    println!("anchor pursuit reached the goal in {ticks} ticks (anchor index {})", pursuit.next_anchor());
    Ok(())
}
