//! DAG-Wishart prior over `(L, D)` on the Cholesky space of an ordered DAG,
//! the edge-inclusion prior over DAGs, and the conjugate column updates.
//!
//! With shapes `φ_j(D) = ν_j(D) + c`, the prior factorizes over vertices:
//!
//! ```text
//! d_j | pa_j            ~ Inverse-Gamma(c/2 − 1, U_{j|pa_j} / 2)
//! L_{D.j}^> | d_j, pa_j ~ N(−(U_D^{>j})⁻¹ U_{D.j}^>, d_j (U_D^{>j})⁻¹)
//! ```
//!
//! Given `n` error vectors with scatter `nS`, the posterior has the same form
//! with `U` replaced by `nS̃ = nS + U` and `φ` by `φ + n`. All normalizing
//! constants are handled in log space.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::model::{dag_submatrices, parent_blocks, OrderedDag, ParentBlocks};
use crate::proposal::{SubsetChain, SubsetSpace};

/// Default shape offset `c = φ_j − ν_j`.
pub const DEFAULT_SHAPE_OFFSET: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DagWishartParams {
    /// Scale matrix `U` (q×q, SPD).
    pub u: Matrix,
    /// Shape offset `c`, so that `φ_j(D) = ν_j(D) + c`.
    pub shape_offset: f64,
    /// Edge inclusion probability `η₂`.
    pub eta2: f64,
    /// Optional per-vertex caps `ξ_j` on `ν_j(D)`.
    pub max_parents: Option<Vec<usize>>,
}

impl DagWishartParams {
    /// `U = I_q`, `c = 10`, `η₂ = 1/q`.
    pub fn default_for(q: usize) -> Self {
        DagWishartParams {
            u: Matrix::identity(q, q),
            shape_offset: DEFAULT_SHAPE_OFFSET,
            eta2: if q > 1 { 1.0 / q as f64 } else { 0.5 },
            max_parents: None,
        }
    }

    pub fn q(&self) -> usize {
        self.u.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.nrows() != self.u.ncols() {
            return Err(Error::Config("U must be square".into()));
        }
        if crate::linalg::Cholesky::new(&self.u).is_err() {
            return Err(Error::Config("U must be positive definite".into()));
        }
        if !(self.shape_offset > 2.0) {
            return Err(Error::Config(format!(
                "shape offset must exceed 2, got {}",
                self.shape_offset
            )));
        }
        if !(self.eta2 > 0.0 && self.eta2 < 1.0) {
            return Err(Error::Config(format!("eta2 must lie in (0,1), got {}", self.eta2)));
        }
        if let Some(caps) = &self.max_parents {
            if caps.len() != self.q() {
                return Err(Error::Config("max_parents needs one cap per vertex".into()));
            }
        }
        Ok(())
    }

    pub fn phi(&self, nu: usize) -> f64 {
        nu as f64 + self.shape_offset
    }

    /// Largest admissible parent count of vertex `j`.
    pub fn cap(&self, j: usize) -> usize {
        let structural = self.q() - 1 - j;
        match &self.max_parents {
            Some(caps) => caps[j].min(structural),
            None => structural,
        }
    }
}

/// `log ζ_D^j(A, φ)` evaluated from precomputed parent blocks.
pub fn log_zeta_from_blocks(blocks: &ParentBlocks, phi_j: f64) -> Result<f64> {
    let nu = blocks.nu() as f64;
    let a = phi_j / 2.0 - nu / 2.0 - 1.0;
    if !(a > 0.0) {
        return Err(Error::InvalidShape(phi_j - nu));
    }
    if !(blocks.schur > 0.0) {
        return Err(Error::InvalidShape(blocks.schur));
    }
    Ok(
        ln_gamma(a) + (phi_j / 2.0 - 1.0) * std::f64::consts::LN_2 + nu / 2.0 * std::f64::consts::PI.ln()
            - a * blocks.schur.ln()
            - 0.5 * blocks.log_det_block(),
    )
}

/// Log of the per-vertex factor `ζ_D^j(A, φ)` of the DAG-Wishart normalizer.
pub fn log_zeta_j(a: &Matrix, phi_j: f64, dag: &OrderedDag, j: usize) -> Result<f64> {
    let nu = dag.nu(j) as f64;
    if !(phi_j - nu > 2.0) {
        return Err(Error::InvalidShape(phi_j - nu));
    }
    let blocks = dag_submatrices(a, dag, j)?;
    log_zeta_from_blocks(&blocks, phi_j)
}

/// Log of the edge-inclusion contribution of one vertex with `nu` parents out
/// of `candidates` possible ones.
pub fn log_parent_prior(nu: usize, candidates: usize, eta2: f64) -> f64 {
    nu as f64 * eta2.ln() + (candidates - nu) as f64 * (1.0 - eta2).ln()
}

/// `log π(D) = Σ_j [ν_j log η₂ + (q−1−j−ν_j) log(1−η₂)]` (0-based `j`).
pub fn log_prior_dag(dag: &OrderedDag, params: &DagWishartParams) -> Result<f64> {
    let q = dag.q();
    let mut total = 0.0;
    for j in 0..q {
        let nu = dag.nu(j);
        let cap = params.cap(j);
        if nu > cap {
            return Err(Error::CapExceeded {
                vertex: j,
                count: nu,
                cap,
            });
        }
        total += log_parent_prior(nu, q - 1 - j, params.eta2);
    }
    Ok(total)
}

/// Unnormalized log posterior of the parent set `parents` of vertex `j`
/// given `n` error vectors with `a_post = nS̃ = nS + U`:
/// `log ζ(nS̃, φ+n) − log ζ(U, φ) + log π(pa_j)`.
pub fn log_parent_posterior(
    a_post: &Matrix,
    params: &DagWishartParams,
    parents: &[usize],
    j: usize,
    n: usize,
) -> Result<f64> {
    let nu = parents.len();
    let phi = params.phi(nu);
    let post = parent_blocks(a_post, parents, j)?;
    let prior = parent_blocks(&params.u, parents, j)?;
    Ok(
        log_zeta_from_blocks(&post, phi + n as f64)? - log_zeta_from_blocks(&prior, phi)?
            + log_parent_prior(nu, params.q() - 1 - j, params.eta2),
    )
}

/// Add/delete move space of `pa_j`: candidates `{j+1, …, q−1}`, capped by `ξ_j`.
pub fn parent_space(params: &DagWishartParams, j: usize) -> SubsetSpace {
    SubsetSpace::new((j + 1)..params.q(), params.cap(j))
}

/// One Metropolis–Hastings move of a parent-set chain whose cached
/// `log_target` was computed against `a_post`. Singular parent blocks get
/// zero posterior mass.
pub fn mh_parent_set_step<R: Rng + ?Sized>(
    rng: &mut R,
    chain: &mut SubsetChain,
    space: &SubsetSpace,
    a_post: &Matrix,
    params: &DagWishartParams,
    j: usize,
    n: usize,
) -> bool {
    chain.step(rng, space, |pa| {
        log_parent_posterior(a_post, params, pa, j, n).unwrap_or(f64::NEG_INFINITY)
    })
}

/// Shape and rate of the inverse-gamma conditional of `d_j`:
/// `((c + n)/2 − 1, n·S̃_{j|pa_j}/2)`. The shape does not depend on `ν_j`.
pub fn d_shape_rate(n_schur: f64, n: usize, c: f64) -> (f64, f64) {
    ((c + n as f64) / 2.0 - 1.0, n_schur / 2.0)
}

pub fn sample_inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::InvalidShape(shape));
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidShape(rate));
    }
    let g = Gamma::new(shape, 1.0 / rate).map_err(|_| Error::InvalidShape(shape))?;
    Ok(1.0 / g.sample(rng))
}

/// Draws `N(blocks.regression_mean(), var_scale · Ablock⁻¹)`.
pub fn sample_column_from_blocks<R: Rng + ?Sized>(rng: &mut R, blocks: &ParentBlocks, var_scale: f64) -> Vector {
    let nu = blocks.nu();
    if nu == 0 {
        return Vector::zeros(0);
    }
    let z: Vec<f64> = (0..nu).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    // Ablock = R Rᵀ, so R⁻ᵀ z has covariance Ablock⁻¹.
    let noise = blocks.block_cholesky().solve_upper(&z);
    blocks.regression_mean() + noise * var_scale.sqrt()
}

/// Draws `L_{D.j}^> ~ N(−(S̃^{>j})⁻¹ S̃_{.j}, n⁻¹ d_j (S̃^{>j})⁻¹)`.
pub fn sample_l_column<R: Rng + ?Sized>(
    rng: &mut R,
    s_tilde: &Matrix,
    d_j: f64,
    dag: &OrderedDag,
    j: usize,
    n: usize,
) -> Result<Vector> {
    let blocks = dag_submatrices(s_tilde, dag, j)?;
    Ok(sample_column_from_blocks(rng, &blocks, d_j / n as f64))
}

/// Draws `d_j | pa_j ~ Inverse-Gamma((c+n)/2 − 1, n S̃_{j|pa_j}/2)`.
pub fn sample_d_j<R: Rng + ?Sized>(
    rng: &mut R,
    s_tilde: &Matrix,
    dag: &OrderedDag,
    j: usize,
    n: usize,
    c: f64,
) -> Result<f64> {
    let blocks = dag_submatrices(s_tilde, dag, j)?;
    let (shape, rate) = d_shape_rate(n as f64 * blocks.schur, n, c);
    sample_inverse_gamma(rng, shape, rate)
}

/// Posterior mean `−(S̃^{>j})⁻¹ S̃_{.j}` of the parent column of `L`.
pub fn posterior_mean_l_column(s_tilde: &Matrix, dag: &OrderedDag, j: usize) -> Result<Vector> {
    Ok(dag_submatrices(s_tilde, dag, j)?.regression_mean())
}

/// Posterior mode `rate / (shape + 1)` of `d_j`.
pub fn posterior_mode_d_j(s_tilde: &Matrix, dag: &OrderedDag, j: usize, n: usize, c: f64) -> Result<f64> {
    let blocks = dag_submatrices(s_tilde, dag, j)?;
    let (shape, rate) = d_shape_rate(n as f64 * blocks.schur, n, c);
    inverse_gamma_mode(shape, rate)
}

pub fn inverse_gamma_mode(shape: f64, rate: f64) -> Result<f64> {
    if !(shape > -1.0) {
        return Err(Error::InvalidShape(shape));
    }
    Ok(rate / (shape + 1.0))
}

/// One draw of `(L_{D.j}^>, d_j)` from the prior conditionals.
pub fn sample_prior_column<R: Rng + ?Sized>(
    rng: &mut R,
    params: &DagWishartParams,
    dag: &OrderedDag,
    j: usize,
) -> Result<(Vector, f64)> {
    let blocks = dag_submatrices(&params.u, dag, j)?;
    let shape = params.shape_offset / 2.0 - 1.0;
    let d = sample_inverse_gamma(rng, shape, blocks.schur / 2.0)?;
    Ok((sample_column_from_blocks(rng, &blocks, d), d))
}
