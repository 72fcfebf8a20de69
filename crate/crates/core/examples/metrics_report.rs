//! SPL, success rate, mechanical cost of transport and tracking statistics on
//! synthetic data.
//!
//!     cargo run --release --example metrics_report

use navworld::eval::{mechanical_cot, spl, success_rate, tracking_error_stats, EnergyLog, EpisodeResult};
use navworld::geom::Vec2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let results = [
        EpisodeResult { success: true, shortest_len: 10.0, traveled_len: 10.0, duration: 8.0 },
        EpisodeResult { success: true, shortest_len: 10.0, traveled_len: 14.0, duration: 12.0 },
        EpisodeResult { success: false, shortest_len: 18.0, traveled_len: 6.0, duration: 60.0 },
        EpisodeResult { success: true, shortest_len: 7.0, traveled_len: 6.6, duration: 5.0 },
    ];
    println!("SPL {:.4}, success rate {:.4}", spl(&results)?, success_rate(&results)?);

    // Four wheels at 10 rad/s with 2 N·m each while the base moves at 1 m/s.
    let n = 500;
    let log = EnergyLog {
        torques: vec![vec![2.0; 4]; n],
        joint_speeds: vec![vec![10.0; 4]; n],
        base_speed: vec![1.0; n],
        weight: 50.0 * 9.81,
        sample_rate: 50.0,
    };
    println!("mechanical COT {:.4} (expected {:.4})", mechanical_cot(&log, 0.2)?, 80.0 / (50.0 * 9.81));

    let rate = 50.0;
    let cmd: Vec<Vec2> = (0..n).map(|_| Vec2::new(1.0, 0.0)).collect();
    let real: Vec<Vec2> = (0..n).map(|k| Vec2::new(1.0 - (-(k as f64) / rate / 0.3).exp(), 0.0)).collect();
    let t = tracking_error_stats(&cmd, &real, rate, 0.5)?;
    let occupied = t.bins.iter().filter(|&&c| c > 0).count();
    println!("tracking error mean {:.4} m/s over {} samples, {occupied} histogram bins occupied", t.mean, t.bins.iter().sum::<u64>());
    Ok(())
}
