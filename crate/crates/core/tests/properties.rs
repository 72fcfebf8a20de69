use proptest::prelude::*;

use navworld::episode::PositionBuffer;
use navworld::eval::{spl, success_rate, EpisodeResult};
use navworld::geom::Vec2;
use navworld::navgraph::{project_onto_path_range, shortest_distances, NavGraph, Node, Path};
use navworld::rewards::{hl_reward_terms, ll_reward_terms, BodyState, GOAL_RADIUS, V_THRES};
use navworld::terrain::HeightField;

fn vec2(r: f64) -> impl Strategy<Value = Vec2> {
    (-r..r, -r..r).prop_map(|(x, y)| Vec2::new(x, y))
}

fn graph() -> impl Strategy<Value = NavGraph> {
    (2usize..20)
        .prop_flat_map(|n| (prop::collection::vec(vec2(20.0), n), prop::collection::vec((0..n, 0..n), 0..3 * n)))
        .prop_map(|(pts, pairs)| {
            let nodes = pts.iter().enumerate().map(|(id, p)| Node { id, x: p.x, y: p.y, z: 0.0 }).collect();
            let pairs: std::collections::BTreeSet<_> =
                pairs.into_iter().filter(|&(a, b)| pts[a] != pts[b]).map(|(a, b)| (a.min(b), a.max(b))).collect();
            let pairs = pairs.into_iter().collect();
            NavGraph::new(nodes, pairs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn height_field_round_trips(cols in 1usize..30, rows in 1usize..30, amp in 0.0..3.0f64, seed in any::<u64>()) {
        let mut f = HeightField::from_fn(cols, rows, 0.1, |p| amp * (p.x * 3.0).sin() * (p.y * 2.0).cos());
        f.seed = seed;
        for j in 0..rows {
            for i in 0..cols {
                f.set_friction(i, j, 0.3 + 0.01 * ((i + j) % 50) as f64);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("hf");
        f.write(&base).unwrap();
        let g = HeightField::read(&base).unwrap();
        prop_assert_eq!(g.meta(), f.meta());
        prop_assert_eq!(g.data(), f.data());
        prop_assert_eq!(g.friction_data(), f.friction_data());
    }

    #[test]
    fn distances_obey_triangle_inequality(g in graph()) {
        let n = g.nodes().len();
        let d: Vec<Vec<f64>> = (0..n).map(|s| shortest_distances(&g, s).unwrap()).collect();
        for a in 0..n {
            prop_assert_eq!(d[a][a], 0.0);
            for b in 0..n {
                prop_assert!((d[a][b] - d[b][a]).abs() <= 1e-9 || d[a][b] == d[b][a]);
                for c in 0..n {
                    if d[a][b].is_finite() && d[b][c].is_finite() {
                        prop_assert!(d[a][c] <= d[a][b] + d[b][c] + 1e-9);
                    }
                }
            }
        }
        for e in g.edges() {
            let direct = g.nodes()[e.a].pos().dist(g.nodes()[e.b].pos());
            prop_assert!(d[e.a][e.b] <= direct + 1e-12);
        }
    }

    #[test]
    fn spl_never_exceeds_success_rate(
        set in prop::collection::vec((any::<bool>(), 0.01..50.0f64, 0.0..100.0f64), 1..50)
    ) {
        let results: Vec<EpisodeResult> = set
            .iter()
            .map(|&(success, l, p)| EpisodeResult { success, shortest_len: l, traveled_len: p, duration: 1.0 })
            .collect();
        let s = spl(&results).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(s <= success_rate(&results).unwrap());
    }

    #[test]
    fn windowed_projection_is_closest_in_window(
        pts in prop::collection::vec(vec2(10.0), 2..8),
        pos in vec2(12.0),
        lo in 0.0..1.0f64,
        width in 0.0..1.0f64,
    ) {
        let path = Path::from_points(pts);
        prop_assume!(path.length > 1e-6);
        let s_lo = lo * path.length;
        let s_hi = (s_lo + width * path.length).min(path.length);
        let (s, p) = project_onto_path_range(&path, pos, s_lo, s_hi);
        prop_assert!(s >= s_lo - 1e-9 && s <= s_hi + 1e-9);
        prop_assert!(p.dist(path.point_at(s)) < 1e-6);
        // Oracle: dense sampling of the window never beats the projection.
        let d = pos.dist(p);
        for k in 0..=400 {
            let t = s_lo + (s_hi - s_lo) * k as f64 / 400.0;
            prop_assert!(d <= pos.dist(path.point_at(t)) + 1e-9);
        }
        // Widening the window can only bring the projection closer.
        let (_, wide) = project_onto_path_range(&path, pos, 0.0, path.length);
        prop_assert!(pos.dist(wide) <= d + 1e-9);
    }

    #[test]
    fn buffer_entries_keep_spacing(walk in prop::collection::vec(vec2(0.6), 1..300), spacing in 0.1..1.0f64, cap in 1usize..25) {
        let mut pos = Vec2::ZERO;
        let mut buf = PositionBuffer::new(cap, spacing, pos);
        let mut visits = 1u64;
        for step in walk {
            pos = pos + step;
            let before: u64 = buf.entries().map(|e| e.visit_steps as u64).sum();
            buf.update(pos);
            let after: u64 = buf.entries().map(|e| e.visit_steps as u64).sum();
            prop_assert!(buf.len() <= cap);
            let e: Vec<_> = buf.entries().collect();
            for w in e.windows(2) {
                prop_assert!(w[0].pos.dist(w[1].pos) >= spacing);
            }
            prop_assert!(after <= before + 1);
            visits += 1;
        }
        prop_assert!(buf.entries().map(|e| e.visit_steps as u64).sum::<u64>() <= visits);
    }

    #[test]
    fn reward_terms_stay_in_range(p in vec2(20.0), v in vec2(2.0), wp in vec2(20.0), counts in prop::collection::vec((vec2(20.0), 1u32..30), 0..20)) {
        let t = hl_reward_terms(p, v, wp, &counts);
        prop_assert!(t.goal == 0.0 || t.goal == 1.0);
        prop_assert_eq!(t.goal == 1.0, p.dist(wp) < GOAL_RADIUS);
        // Progress speed saturates at V_THRES; inside the goal radius the term is 1.
        let cap = if p.dist(wp) < GOAL_RADIUS { 1.0 } else { (v.norm() / V_THRES).min(1.0) };
        prop_assert!(t.dense >= 0.0 && t.dense <= cap + 1e-12);
        prop_assert!(t.stability >= 0.0 && t.stability <= 1.0);
        prop_assert!(t.stability == 0.0 || p.dist(wp) < GOAL_RADIUS);
        prop_assert!(t.exploration <= 0.0);

        let mut body = BodyState::level(0.55);
        body.vel_body = [v.x, v.y, 0.0];
        let cmd = wp * 0.1;
        let ll = ll_reward_terms(&body, [cmd.x, cmd.y, 0.0]);
        if cmd.norm() < 0.05 {
            prop_assert!(ll.lin_vel > 0.0 && ll.lin_vel <= 2.0);
        } else {
            let along = cmd.dot(v);
            prop_assert!(ll.lin_vel >= along && ll.lin_vel <= along + 1.0);
        }
        prop_assert!(ll.ang_vel > 0.0 && ll.ang_vel <= 1.0);
        prop_assert!(ll.base_height >= 0.0);
        prop_assert!(ll.body_motion <= 0.0);
    }
}
