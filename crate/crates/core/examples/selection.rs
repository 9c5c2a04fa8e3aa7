//! Median probability selection from a stored chain, plus per-coordinate
//! effective sample sizes.

use dagreg::ess::{ess_run, EssConfig};
use dagreg::metrics::effective_sample_size;
use dagreg::select::{mpm_select_dag, mpm_select_gamma};
use dagreg::simgen::{generate, SimSpec};

fn main() -> dagreg::Result<()> {
    let (data, truth) = generate(&SimSpec::new(1, 2, 3).with_dims(80, 20, 6))?;
    let mut cfg = EssConfig::default_for(data.p(), data.q());
    cfg.iterations = 1500;
    cfg.burn_in = 500;
    let chain = ess_run(&data, &cfg)?.chain;

    let (counts, draws) = chain.inclusion_counts();
    let gamma = mpm_select_gamma(&chain)?;
    println!("inclusion frequencies of the true coefficients ({draws} draws):");
    for (k, j) in (0..data.p()).flat_map(|k| (0..data.q()).map(move |j| (k, j))) {
        if truth.b0.gamma[(k, j)] {
            let series = chain.coef_series(k, j);
            let ess = effective_sample_size(&series)?;
            println!(
                "  b[{},{}]: {:.3}, selected {}, ESS {ess:.0}",
                k + 1,
                j + 1,
                counts[(k, j)] as f64 / draws as f64,
                gamma[(k, j)]
            );
        }
    }
    let dag = mpm_select_dag(&chain)?;
    println!(
        "selected {} edges, truth has {}",
        dag.edge_count(),
        truth.dag0.edge_count()
    );
    Ok(())
}
