//! Writes a synthetic bundle for every scenario and reports its shape.

use dagreg::pipeline::write_bundle;
use dagreg::simgen::{generate, SimSpec};

fn main() -> dagreg::Result<()> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "sim_out".into());
    for scenario in 1..=5 {
        let spec = SimSpec::new(scenario, 1, 2024);
        let (data, truth) = generate(&spec)?;
        let dir = std::path::Path::new(&root).join(spec.bundle_name());
        write_bundle(&dir, &spec, &data, &truth)?;
        println!(
            "scenario {scenario}: n={} p={} q={}, {} coefficients, {} edges -> {}",
            data.n(),
            data.p(),
            data.q(),
            truth.b0.support_size(),
            truth.dag0.edge_count(),
            dir.display()
        );
    }
    Ok(())
}
