//! Log normalizer and parent-set posterior under the DAG-Wishart prior.

use dagreg::dag_wishart::{log_parent_posterior, log_zeta_j, DagWishartParams};
use dagreg::linalg::Matrix;
use dagreg::model::OrderedDag;

fn main() -> dagreg::Result<()> {
    let q = 4;
    let params = DagWishartParams::default_for(q);
    let dag = OrderedDag::from_parents(vec![vec![2], vec![3], vec![], vec![]])?;
    for j in 0..q {
        let z = log_zeta_j(&params.u, params.phi(dag.nu(j)), &dag, j)?;
        println!("vertex {}: nu = {}, log zeta = {z:.6}", j + 1, dag.nu(j));
    }

    // scatter with a strong 3 -> 1 link
    let n = 50;
    let mut s = Matrix::identity(q, q) * n as f64;
    s[(0, 2)] = 0.6 * n as f64;
    s[(2, 0)] = 0.6 * n as f64;
    let a_post = s + &params.u;

    let mut scored = Vec::new();
    for mask in 0u32..1 << (q - 1) {
        let pa: Vec<usize> = (1..q).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let lp = log_parent_posterior(&a_post, &params, &pa, 0, n)?;
        scored.push((pa, lp));
    }
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = scored.iter().map(|s| (s.1 - max).exp()).sum();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("parent sets of vertex 1, posterior probability:");
    for (pa, lp) in &scored {
        let labels: Vec<usize> = pa.iter().map(|i| i + 1).collect();
        println!("  {:?}: {:.4}", labels, (lp - max).exp() / total);
    }
    Ok(())
}
