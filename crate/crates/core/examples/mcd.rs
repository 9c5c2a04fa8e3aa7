//! Modified Cholesky factors of a precision matrix and the DAG they encode.

use dagreg::linalg::Matrix;
use dagreg::model::{mcd_compose, mcd_decompose};

fn main() -> dagreg::Result<()> {
    #[rustfmt::skip]
    let omega = Matrix::from_row_slice(4, 4, &[
        2.0, 0.0, 0.6, 0.0,
        0.0, 1.5, 0.4, 0.3,
        0.6, 0.4, 1.8, 0.0,
        0.0, 0.3, 0.0, 1.2,
    ]);
    let chol = mcd_decompose(&omega)?;
    println!("L = {}", chol.l);
    println!("D = {:?}", chol.d);

    let dag = chol.support(1e-10);
    for j in 0..dag.q() {
        // files and printouts use 1-based vertex labels
        let pa: Vec<usize> = dag.parents(j).iter().map(|i| i + 1).collect();
        println!("pa({}) = {:?}", j + 1, pa);
    }

    let err = (mcd_compose(&chol) - &omega).amax();
    println!("max |L D^-1 L' - Omega| = {err:.2e}");
    Ok(())
}
