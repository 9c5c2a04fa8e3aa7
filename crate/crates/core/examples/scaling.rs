//! Wall time of coefficient sweeps as p grows, and per-iteration time of the
//! two samplers on the same data.

use dagreg::ess::{time_coefficient_sweeps, EssConfig};
use dagreg::simgen::{generate, SimSpec};
use dagreg::tes::{tes_run, TesConfig};

fn main() -> dagreg::Result<()> {
    let q = 20;
    let mut points = Vec::new();
    for p in [50, 100, 200, 400] {
        let (data, _) = generate(&SimSpec::new(1, 1, 9).with_dims(100, p, q))?;
        let cfg = EssConfig::default_for(p, q);
        let secs = time_coefficient_sweeps(&data, &cfg, 20)?.as_secs_f64() / 20.0;
        println!("p = {p:>3}: {secs:.3e} s per coefficient sweep");
        points.push(((p as f64).ln(), secs.ln()));
    }
    let n = points.len() as f64;
    let (mx, my) = (
        points.iter().map(|p| p.0).sum::<f64>() / n,
        points.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    println!("log-log slope {slope:.2}");

    let (data, _) = generate(&SimSpec::new(1, 1, 9).with_dims(100, 100, 50))?;
    let mut tes = TesConfig::default_for(100, 50);
    tes.iterations = 600;
    tes.burn_in = 200;
    let out = tes_run(&data, &tes)?;
    println!("two-step sampler: {:.3e} s/iteration", out.timing.per_iteration());
    Ok(())
}
