//! Evaluate the high-level, low-level and regularization reward terms for a
//! few hand-made situations.
//!
//!     cargo run --release --example rewards

use navworld::geom::Vec2;
use navworld::rewards::{
    hl_reward_terms, ll_reward_terms, regularization_terms, BodyState, JointState, RewardBreakdown, RewardWeights,
};

fn main() {
    let wp1 = Vec2::new(5.0, 0.0);
    let cases = [
        ("far, driving at the waypoint", Vec2::ZERO, Vec2::new(1.0, 0.0), vec![]),
        ("far, driving away", Vec2::ZERO, Vec2::new(-1.0, 0.0), vec![]),
        ("at the waypoint, still", Vec2::new(4.8, 0.0), Vec2::ZERO, vec![]),
        ("revisiting a buffered spot", Vec2::ZERO, Vec2::new(0.2, 0.0), vec![(Vec2::new(0.3, 0.0), 3)]),
    ];
    for (name, p, v, buffer) in cases {
        let t = hl_reward_terms(p, v, wp1, &buffer);
        println!("{name:>28}: goal {} dense {:.3} exploration {} stability {:.3}", t.goal, t.dense, t.exploration, t.stability);
    }

    let weights = RewardWeights::default();
    let body = BodyState::level(0.55);
    let joints = JointState::default();
    for cmd in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]] {
        let hl = hl_reward_terms(Vec2::ZERO, Vec2::ZERO, wp1, &[]);
        let ll = ll_reward_terms(&body, cmd);
        let reg = regularization_terms(&joints, weights.c_k, true);
        let b = RewardBreakdown::new(hl, ll, reg, &weights);
        println!("standing still under command {cmd:?}: r_low {:.4}, r_high {:.4}", b.r_low, b.r_high);
    }
}
