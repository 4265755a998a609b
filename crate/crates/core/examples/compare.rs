//! Runs both protocols over a handful of seeds and prints lifetime milestones.

use std::time::Instant;

use fttc::{lifetime_summary, run_simulation, NetworkConfig, Protocol};

fn main() {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    for protocol in [Protocol::Fttc, Protocol::Baseline] {
        let start = Instant::now();
        let (mut last, mut packets, mut first) = (0u64, 0u64, 0u64);
        for seed in 1..=seeds {
            let config = NetworkConfig {
                rng_seed: seed,
                ..NetworkConfig::default()
            };
            let metrics = run_simulation(&config, protocol).expect("valid config");
            let s = lifetime_summary(&metrics, config.n_nodes);
            println!(
                "{protocol:8} seed {seed:3}: first {} half {} last {} packets {}",
                s.first_death, s.half_death, s.last_death, s.packets_total
            );
            first += s.first_death.round().unwrap_or(config.max_rounds);
            last += s.last_death.round().unwrap_or(config.max_rounds);
            packets += s.packets_total;
        }
        println!(
            "{protocol:8} mean first {:.1} last {:.1} packets {:.1} ({:.2?})",
            first as f64 / seeds as f64,
            last as f64 / seeds as f64,
            packets as f64 / seeds as f64,
            start.elapsed()
        );
    }
}
