//! Selection scores, relative precision errors and the autocorrelation-based
//! effective sample size.

use dagreg::linalg::Matrix;
use dagreg::metrics::{effective_sample_size, relative_errors, ConfusionCounts};
use rand::Rng;

fn main() -> dagreg::Result<()> {
    let truth = [true, true, false, false, true, false];
    let est = [true, false, false, true, true, false];
    let counts = ConfusionCounts::from_pairs(est.iter().copied().zip(truth.iter().copied()));
    println!("{counts:?}");
    for (name, v) in counts.scores().named() {
        println!("  {name}: {v:?}");
    }
    // nothing selected and nothing true: precision and mcc are undefined
    let empty = ConfusionCounts::from_pairs([(false, false); 4]);
    println!("empty: {:?}", empty.scores());

    let omega0 = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let omega_hat = Matrix::from_row_slice(2, 2, &[1.8, 0.4, 0.4, 1.1]);
    for (name, v) in relative_errors(&omega_hat, &omega0)?.named() {
        println!("{name} = {v:.4}");
    }

    let mut rng = dagreg::rng::stream(1, 0, 0);
    for rho in [0.0, 0.5, 0.9] {
        let mut x = 0.0;
        let series: Vec<f64> = (0..5000)
            .map(|_| {
                x = rho * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        // AR(1) asymptotic value is N (1 - rho) / (1 + rho)
        let expected = 5000.0 * (1.0 - rho) / (1.0 + rho);
        println!(
            "AR(1) rho={rho}: ESS {:.0} (expected about {expected:.0})",
            effective_sample_size(&series)?
        );
    }
    Ok(())
}
