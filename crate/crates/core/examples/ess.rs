//! Joint sampler for coefficients, supports and the error DAG on a small
//! simulated problem.

use dagreg::ess::{ess_estimates, ess_run, EssConfig};
use dagreg::metrics::{dag_selection_metrics, selection_metrics};
use dagreg::simgen::{generate, SimSpec};

fn main() -> dagreg::Result<()> {
    let spec = SimSpec::new(1, 1, 42).with_dims(100, 30, 10);
    let (data, truth) = generate(&spec)?;

    let mut cfg = EssConfig::default_for(data.p(), data.q());
    cfg.iterations = 2000;
    cfg.burn_in = 500;
    cfg.seed = 7;
    let out = ess_run(&data, &cfg)?;
    let est = ess_estimates(&data, &out.chain, &cfg.dag)?;

    println!(
        "{} draws, {:.2e} s/iteration",
        out.chain.len(),
        out.timing.per_iteration()
    );
    let b = selection_metrics(&est.gamma_hat, &truth.b0.gamma)?;
    let l = dag_selection_metrics(&est.dag_hat, &truth.dag0)?;
    for (target, s) in [("B", b), ("L", l)] {
        for (name, v) in s.named() {
            println!(
                "{target} {name}: {}",
                v.map_or("undefined".into(), |v| format!("{v:.3}"))
            );
        }
    }
    Ok(())
}
