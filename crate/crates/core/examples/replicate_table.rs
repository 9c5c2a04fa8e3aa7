//! Replicated simulation study for one scenario and setting with both
//! samplers, printed as a summary table.
//!
//! `cargo run --release --example replicate_table -- <replicates> <iterations>`

use dagreg::config::{Method, RunConfig};
use dagreg::pipeline::replicate;

fn main() -> dagreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicates: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let iterations: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1500);
    let cfg = RunConfig {
        scenario: Some(1),
        setting: Some(1),
        seed: Some(2024),
        iterations: Some(iterations),
        burn_in: Some(iterations / 3),
        ..Default::default()
    };
    println!("{:<8}{:<8}{:<14}{:>8}", "method", "target", "metric", "mean");
    for method in [Method::Tes, Method::Ess] {
        let report = replicate(&cfg, method, replicates)?;
        for row in &report.table {
            let mean = row.mean.map_or("NA".into(), |v| format!("{v:.3}"));
            println!("{:<8}{:<8}{:<14}{:>8}", row.method, row.target, row.metric, mean);
        }
    }
    Ok(())
}
