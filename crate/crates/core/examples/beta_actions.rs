//! Bounded actions from the mean/concentration Beta parameterization:
//! log-probabilities, sampling and the mapping onto velocity bounds.
//!
//!     cargo run --release --example beta_actions

use navworld::agent::{beta_from_policy_outputs, beta_sample, log_prob_action, map_to_bounds, ActionBounds};
use navworld::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = seed::rng(42);
    for (a1, a2) in [(0.5, 2.0), (0.8, 10.0), (0.2, 50.0)] {
        let p = beta_from_policy_outputs(a1, a2)?;
        let n = 20_000;
        let mean = (0..n).map(|_| beta_sample(&p, &mut rng)).sum::<f64>() / n as f64;
        println!(
            "a1 {a1}, a2 {a2:>4}: alpha {:.2} beta {:.2}, mean {:.4} (sampled {mean:.4}), log p(0.5) {:.4}",
            p.alpha,
            p.beta,
            p.mean(),
            log_prob_action(0.5, &p)
        );
    }

    let bounds = ActionBounds::default();
    let heads = [beta_from_policy_outputs(0.7, 20.0)?, beta_from_policy_outputs(0.5, 20.0)?, beta_from_policy_outputs(0.6, 5.0)?];
    let u = heads.map(|p| beta_sample(&p, &mut rng));
    let logp: f64 = heads.iter().zip(u).map(|(p, x)| log_prob_action(x, p)).sum();
    let cmd = map_to_bounds(u, &bounds);
    println!("\nunit action {u:.3?} -> command vx {:.3} vy {:.3} wz {:.3}, joint log-prob {logp:.3}", cmd.vx, cmd.vy, cmd.wz);
    Ok(())
}
