//! Two-step sampler.
//!
//! Step 1 treats each response as an independent univariate regression and
//! samples its support `γ_j` from the α-fractional posterior under the
//! empirical sparse prior,
//!
//! ```text
//! π_α(γ_j | y_j) ∝ π(γ_j) (1 + α/κ)^{−|γ_j|/2} (σ̂²_{j,γ_j})^{−(αn + ν₀)/2},
//! π(γ_j)         ∝ C(p, |γ_j|)⁻¹ p^{−c₁|γ_j|} 1(|γ_j| ≤ R_j),
//! ```
//!
//! using the add/delete Metropolis–Hastings kernel. The median probability
//! supports give least-squares `B̂`, residuals `Ê` and `Ŝ = n⁻¹ÊᵀÊ`.
//!
//! Step 2 runs the parent-set Metropolis–Hastings chain of the exact sampler
//! with `S` replaced by `Ŝ`, selects the DAG by median probability, and
//! computes `(L̂, D̂)` in closed form.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::dag_wishart::{
    d_shape_rate, inverse_gamma_mode, log_parent_posterior, mh_parent_set_step, parent_space, sample_inverse_gamma,
    DagWishartParams,
};
use crate::error::{Error, Result};
use crate::linalg::{principal_submatrix, Cholesky, Matrix, Vector};
use crate::model::{parent_blocks, CholeskyPair, ErrorEstimate, OrderedDag, RegressionData, SparseCoefState};
use crate::proposal::{SubsetChain, SubsetSpace};
use crate::rng;
use crate::select::{mpm_select_dag, mpm_select_gamma, ChainKind, ChainRecord, CoefDraw, DagDraw, Draw};

/// How the per-response model-size cap `R_j` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeCap {
    /// `R_j = min(value, p, n − 1)`.
    Fixed(usize),
    /// `R_j = ⌊c₃ n / log p⌋`, clipped to `min(p, n − 1)`.
    Theory { c3: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TesConfig {
    /// Fractional power `α ∈ (0, 1)`.
    pub alpha: f64,
    /// g-prior precision scale `κ`.
    pub kappa: f64,
    /// Variance prior exponent `ν₀`.
    pub nu0: f64,
    /// Model-size penalty exponent `c₁`.
    pub c1: f64,
    pub cap: SizeCap,
    pub dag: DagWishartParams,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Draw `(σ_j², b_{j,γ_j})` for every stored support.
    pub sample_coefficients: bool,
}

impl TesConfig {
    /// `α = 0.999`, `κ = 0.1`, `ν₀ = 0`, `c₁ = 2`, `R_j = p`.
    pub fn default_for(p: usize, q: usize) -> Self {
        TesConfig {
            alpha: 0.999,
            kappa: 0.1,
            nu0: 0.0,
            c1: 2.0,
            cap: SizeCap::Fixed(p),
            dag: DagWishartParams::default_for(q),
            iterations: 3000,
            burn_in: 1000,
            thin: 1,
            seed: 0,
            sample_coefficients: false,
        }
    }

    pub fn validate(&self, data: &RegressionData) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.nu0 >= 0.0) {
            return Err(Error::Config(format!("nu0 must be nonnegative, got {}", self.nu0)));
        }
        if !(self.c1 >= 0.0) {
            return Err(Error::Config(format!("c1 must be nonnegative, got {}", self.c1)));
        }
        if let SizeCap::Theory { c3 } = self.cap {
            if !(c3 > 0.0) {
                return Err(Error::Config("c3 must be positive".into()));
            }
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in > self.iterations {
            return Err(Error::Config("burn-in exceeds the number of iterations".into()));
        }
        if self.dag.q() != data.q() {
            return Err(Error::Dimension(format!(
                "U is {}×{} but the data has q = {}",
                self.dag.q(),
                self.dag.q(),
                data.q()
            )));
        }
        self.dag.validate()
    }

    /// Effective `R_j` for data with `n` rows and `p` predictors.
    pub fn resolve_cap(&self, n: usize, p: usize) -> usize {
        let hard = p.min(n.saturating_sub(1));
        match self.cap {
            SizeCap::Fixed(r) => r.min(hard),
            SizeCap::Theory { c3 } => {
                let r = (c3 * n as f64 / (p as f64).ln()).floor();
                (r.max(0.0) as usize).min(hard)
            }
        }
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "method": "tes",
            "alpha": self.alpha,
            "kappa": self.kappa,
            "nu0": self.nu0,
            "c1": self.c1,
            "cap": self.cap,
            "eta2": self.dag.eta2,
            "shape_offset": self.dag.shape_offset,
            "max_parents": self.dag.max_parents,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "seed": self.seed,
            "sample_coefficients": self.sample_coefficients,
        })
    }

    fn keep(&self, it: usize) -> bool {
        it >= self.burn_in && (it - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// Cross products `XᵀX`, `XᵀY` and `diag(YᵀY)` used by every step-1 evaluation.
#[derive(Debug, Clone)]
pub struct GramCache {
    pub n: usize,
    pub gram: Matrix,
    pub xty: Matrix,
    pub yty: Vec<f64>,
}

impl GramCache {
    pub fn new(data: &RegressionData) -> Self {
        let yty = (0..data.q()).map(|j| data.y.column(j).norm_squared()).collect();
        GramCache {
            n: data.n(),
            gram: data.x.tr_mul(&data.x),
            xty: data.x.tr_mul(&data.y),
            yty,
        }
    }

    pub fn p(&self) -> usize {
        self.gram.nrows()
    }

    fn active_xty(&self, j: usize, gamma: &[usize]) -> Vec<f64> {
        gamma.iter().map(|&k| self.xty[(k, j)]).collect()
    }

    fn active_cholesky(&self, j: usize, gamma: &[usize]) -> Result<Cholesky> {
        Cholesky::new(&principal_submatrix(&self.gram, gamma)).map_err(|_| Error::RankDeficient { response: j })
    }

    /// `σ̂²_{j,γ} = n⁻¹ (yᵀy − yᵀX_γ (X_γᵀX_γ)⁻¹ X_γᵀy)` without the floor.
    pub fn residual_variance(&self, j: usize, gamma: &[usize]) -> Result<f64> {
        let chol = self.active_cholesky(j, gamma)?;
        let w = chol.solve_lower(&self.active_xty(j, gamma));
        Ok((self.yty[j] - w.norm_squared()) / self.n as f64)
    }

    /// Floor applied to `σ̂²`: `1e-12 · yᵀy / n`.
    pub fn variance_floor(&self, j: usize) -> f64 {
        (1e-12 * self.yty[j] / self.n as f64).max(f64::MIN_POSITIVE)
    }

    /// Least-squares coefficients on the active set.
    pub fn least_squares(&self, j: usize, gamma: &[usize]) -> Result<Vector> {
        let chol = self.active_cholesky(j, gamma)?;
        Ok(chol.solve(&self.active_xty(j, gamma)))
    }
}

/// `log π(γ)` up to a constant: `−log C(p, |γ|) − c₁ |γ| log p`.
pub fn log_prior_gamma(size: usize, p: usize, c1: f64) -> f64 {
    -ln_binomial(p as u64, size as u64) - c1 * size as f64 * (p as f64).ln()
}

/// Unnormalized `log π_α(γ_j | y_j)`.
pub fn log_post_gamma(cache: &GramCache, j: usize, gamma: &[usize], cfg: &TesConfig, cap: usize) -> Result<f64> {
    let size = gamma.len();
    if size > cap {
        return Err(Error::CapExceeded {
            vertex: j,
            count: size,
            cap,
        });
    }
    let sigma_sq = cache.residual_variance(j, gamma)?.max(cache.variance_floor(j));
    let n = cache.n as f64;
    Ok(log_prior_gamma(size, cache.p(), cfg.c1)
        - 0.5 * size as f64 * (1.0 + cfg.alpha / cfg.kappa).ln()
        - 0.5 * (cfg.alpha * n + cfg.nu0) * sigma_sq.ln())
}

/// Draws `σ² ~ IG((αn+ν₀)/2, αn σ̂²/2)` and `b_γ | σ² ~ N(b̂_γ, σ²/(α+κ) (X_γᵀX_γ)⁻¹)`.
pub fn sample_sigma_b<R: Rng + ?Sized>(
    rng: &mut R,
    cache: &GramCache,
    j: usize,
    gamma: &[usize],
    cfg: &TesConfig,
) -> Result<(f64, Vector)> {
    let chol = cache.active_cholesky(j, gamma)?;
    let xty = cache.active_xty(j, gamma);
    let w = chol.solve_lower(&xty);
    let n = cache.n as f64;
    let sigma_hat_sq = (cache.yty[j] - w.norm_squared()) / n;
    if !(sigma_hat_sq > cache.variance_floor(j)) {
        return Err(Error::DegenerateVariance { response: j });
    }
    let shape = (cfg.alpha * n + cfg.nu0) / 2.0;
    let rate = cfg.alpha * n * sigma_hat_sq / 2.0;
    let sigma_sq = sample_inverse_gamma(rng, shape, rate)?;
    let b_hat = chol.solve_upper(w.as_slice());
    let z: Vec<f64> = (0..gamma.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let noise = chol.solve_upper(&z) * (sigma_sq / (cfg.alpha + cfg.kappa)).sqrt();
    Ok((sigma_sq, b_hat + noise))
}

/// Stored supports of one response chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaChain {
    pub response: usize,
    pub draws: Vec<Vec<usize>>,
    pub values: Option<Vec<Vector>>,
    pub proposed: u64,
    pub accepted: u64,
}

/// Step-1 chain for response `j` started from `init`.
pub fn run_gamma_chain(cache: &GramCache, j: usize, cfg: &TesConfig, init: Vec<usize>) -> Result<GammaChain> {
    let p = cache.p();
    let cap = cfg.resolve_cap(cache.n, p);
    let space = SubsetSpace::new(0..p, cap);
    let mut rng = rng::stream(cfg.seed, rng::chain::TES_COEF, j as u64);
    let init_log = log_post_gamma(cache, j, &init, cfg, cap).unwrap_or(f64::NEG_INFINITY);
    let mut chain = SubsetChain::new(init, init_log);
    let mut out = GammaChain {
        response: j,
        draws: Vec::new(),
        values: cfg.sample_coefficients.then(Vec::new),
        proposed: 0,
        accepted: 0,
    };
    for it in 0..cfg.iterations {
        mh_gamma_step(&mut rng, &mut chain, &space, cache, j, cfg, cap);
        if cfg.keep(it) {
            if let Some(values) = out.values.as_mut() {
                let (_, b) = sample_sigma_b(&mut rng, cache, j, &chain.current, cfg)?;
                values.push(b);
            }
            out.draws.push(chain.current.clone());
        }
    }
    out.proposed = chain.proposed;
    out.accepted = chain.accepted;
    Ok(out)
}

/// One add/delete move on `γ_j`. Rank-deficient or over-cap supports get zero mass.
pub fn mh_gamma_step<R: Rng + ?Sized>(
    rng: &mut R,
    chain: &mut SubsetChain,
    space: &SubsetSpace,
    cache: &GramCache,
    j: usize,
    cfg: &TesConfig,
    cap: usize,
) -> bool {
    chain.step(rng, space, |g| {
        log_post_gamma(cache, j, g, cfg, cap).unwrap_or(f64::NEG_INFINITY)
    })
}

/// Least-squares `B̂` on the selected supports.
pub fn compute_b_hat(cache: &GramCache, gamma_hat: &nalgebra::DMatrix<bool>) -> Result<SparseCoefState> {
    let (p, q) = gamma_hat.shape();
    let mut state = SparseCoefState::zeros(p, q);
    for j in 0..q {
        let active: Vec<usize> = (0..p).filter(|&k| gamma_hat[(k, j)]).collect();
        if active.is_empty() {
            continue;
        }
        let b = cache.least_squares(j, &active)?;
        for (&k, &v) in active.iter().zip(b.iter()) {
            state.gamma[(k, j)] = true;
            state.b[(k, j)] = v;
        }
    }
    Ok(state)
}

/// `Ê = Y − X B̂`, `Ŝ = n⁻¹ ÊᵀÊ`.
pub fn compute_error_estimate(data: &RegressionData, b_hat: &SparseCoefState) -> ErrorEstimate {
    ErrorEstimate::from_residuals(&data.y - &data.x * &b_hat.b)
}

/// `nS̃ = nŜ + U`.
pub fn posterior_scatter(err: &ErrorEstimate, params: &DagWishartParams) -> Matrix {
    &err.s_hat * err.n() as f64 + &params.u
}

/// Step-2 parent-set chains (one per vertex) targeting `π(pa_j | Ê)`.
pub fn tes_dag_run(err: &ErrorEstimate, cfg: &TesConfig) -> Result<(ChainRecord, Vec<(u64, u64)>)> {
    let q = err.s_hat.nrows();
    let n = err.n();
    let params = &cfg.dag;
    let a_post = posterior_scatter(err, params);
    let per_vertex: Vec<(Vec<Vec<usize>>, u64, u64)> = (0..q)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::stream(cfg.seed, rng::chain::TES_DAG, j as u64);
            let space = parent_space(params, j);
            let init = log_parent_posterior(&a_post, params, &[], j, n)?;
            let mut chain = SubsetChain::new(Vec::new(), init);
            let mut draws = Vec::new();
            for it in 0..cfg.iterations {
                mh_parent_set_step(&mut rng, &mut chain, &space, &a_post, params, j, n);
                if cfg.keep(it) {
                    draws.push(chain.current.clone());
                }
            }
            Ok((draws, chain.proposed, chain.accepted))
        })
        .collect::<Result<_>>()?;

    let kept = per_vertex.first().map_or(0, |v| v.0.len());
    let mut record = ChainRecord::new(ChainKind::TesStep2, 0, q, cfg.seed, cfg.snapshot());
    for i in 0..kept {
        let parents = per_vertex
            .iter()
            .map(|(draws, _, _)| draws[i].iter().map(|&v| v as u32).collect())
            .collect();
        record.draws.push(Draw {
            coef: None,
            dag: Some(DagDraw {
                parents,
                l_values: None,
                d: None,
            }),
        });
    }
    let acceptance = per_vertex.iter().map(|(_, p, a)| (*p, *a)).collect();
    Ok((record, acceptance))
}

/// Closed-form `(L̂, D̂)` on `dag_hat`: posterior-mean columns of `L` and
/// posterior-mode `d_j`.
pub fn tes_estimate_ld(err: &ErrorEstimate, dag_hat: &OrderedDag, params: &DagWishartParams) -> Result<CholeskyPair> {
    let a_post = posterior_scatter(err, params);
    estimate_ld_from_scatter(&a_post, err.n(), dag_hat, params)
}

/// `(L̂, D̂)` from `nS̃` on `dag_hat`.
pub fn estimate_ld_from_scatter(
    a_post: &Matrix,
    n: usize,
    dag_hat: &OrderedDag,
    params: &DagWishartParams,
) -> Result<CholeskyPair> {
    let q = dag_hat.q();
    let mut l = Matrix::identity(q, q);
    let mut d = vec![0.0; q];
    for j in 0..q {
        let blocks = parent_blocks(a_post, dag_hat.parents(j), j)?;
        for (&i, &v) in dag_hat.parents(j).iter().zip(blocks.regression_mean().iter()) {
            l[(i, j)] = v;
        }
        let (shape, rate) = d_shape_rate(blocks.schur, n, params.shape_offset);
        d[j] = inverse_gamma_mode(shape, rate)?;
    }
    CholeskyPair::new(l, d)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TesTiming {
    pub iterations: usize,
    pub step1_secs: f64,
    pub estimate_secs: f64,
    pub step2_secs: f64,
    pub total_secs: f64,
}

impl TesTiming {
    /// Sampling wall time per iteration (both chains).
    pub fn per_iteration(&self) -> f64 {
        (self.step1_secs + self.step2_secs) / self.iterations.max(1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct TesOutput {
    pub coef_chain: ChainRecord,
    pub dag_chain: ChainRecord,
    pub gamma_chains: Vec<GammaChain>,
    /// `(proposed, accepted)` parent-set moves per vertex.
    pub dag_acceptance: Vec<(u64, u64)>,
    pub b_hat: SparseCoefState,
    pub error: ErrorEstimate,
    pub dag_hat: OrderedDag,
    pub chol_hat: CholeskyPair,
    pub timing: TesTiming,
}

/// Runs step 1 for all responses, given initial supports (empty when `None`).
pub fn run_step1(
    data: &RegressionData,
    cfg: &TesConfig,
    init: Option<&SparseCoefState>,
) -> Result<(GramCache, Vec<GammaChain>, ChainRecord)> {
    cfg.validate(data)?;
    let cache = GramCache::new(data);
    let q = data.q();
    let chains: Vec<GammaChain> = (0..q)
        .into_par_iter()
        .map(|j| {
            let start = init.map(|s| s.active(j)).unwrap_or_default();
            run_gamma_chain(&cache, j, cfg, start)
        })
        .collect::<Result<_>>()?;

    let kept = chains.first().map_or(0, |c| c.draws.len());
    let mut record = ChainRecord::new(ChainKind::TesStep1, data.p(), q, cfg.seed, cfg.snapshot());
    for i in 0..kept {
        let mut active = Vec::new();
        let mut values = cfg.sample_coefficients.then(Vec::new);
        for chain in &chains {
            for (pos, &k) in chain.draws[i].iter().enumerate() {
                active.push((k as u32, chain.response as u32));
                if let (Some(v), Some(cv)) = (values.as_mut(), chain.values.as_ref()) {
                    v.push(cv[i][pos]);
                }
            }
        }
        record.draws.push(Draw {
            coef: Some(CoefDraw { active, values }),
            dag: None,
        });
    }
    Ok((cache, chains, record))
}

/// Full two-step run.
pub fn tes_run(data: &RegressionData, cfg: &TesConfig) -> Result<TesOutput> {
    tes_run_from(data, cfg, None)
}

pub fn tes_run_from(data: &RegressionData, cfg: &TesConfig, init: Option<&SparseCoefState>) -> Result<TesOutput> {
    let t0 = Instant::now();
    let (cache, gamma_chains, coef_chain) = run_step1(data, cfg, init)?;
    let t1 = Instant::now();
    let gamma_hat = if coef_chain.is_empty() {
        nalgebra::DMatrix::from_element(data.p(), data.q(), false)
    } else {
        mpm_select_gamma(&coef_chain)?
    };
    let b_hat = compute_b_hat(&cache, &gamma_hat)?;
    let error = compute_error_estimate(data, &b_hat);
    let t2 = Instant::now();
    let (dag_chain, dag_acceptance) = tes_dag_run(&error, cfg)?;
    let dag_hat = if dag_chain.is_empty() {
        OrderedDag::empty(data.q())
    } else {
        mpm_select_dag(&dag_chain)?
    };
    let chol_hat = tes_estimate_ld(&error, &dag_hat, &cfg.dag)?;
    let t3 = Instant::now();
    let timing = TesTiming {
        iterations: cfg.iterations,
        step1_secs: (t1 - t0).as_secs_f64(),
        estimate_secs: (t2 - t1).as_secs_f64(),
        step2_secs: (t3 - t2).as_secs_f64(),
        total_secs: (t3 - t0).as_secs_f64(),
    };
    Ok(TesOutput {
        coef_chain,
        dag_chain,
        gamma_chains,
        dag_acceptance,
        b_hat,
        error,
        dag_hat,
        chol_hat,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::Distribution;

    fn random_data(seed: u64, n: usize, p: usize, q: usize, signal: &[(usize, usize, f64)]) -> RegressionData {
        let mut rng = rng::stream(seed, 98, 0);
        let x = Matrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let mut b = Matrix::zeros(p, q);
        for &(k, j, v) in signal {
            b[(k, j)] = v;
        }
        let e = Matrix::from_fn(n, q, |_, _| StandardNormal.sample(&mut rng));
        RegressionData::new(x.clone(), &x * b + e).unwrap()
    }

    /// Projector-based oracle: σ̂² = n⁻¹ yᵀ(I − X_γ (X_γᵀX_γ)⁻¹ X_γᵀ) y, explicit inverse.
    fn projector_log_post(data: &RegressionData, j: usize, gamma: &[usize], cfg: &TesConfig) -> f64 {
        let n = data.n();
        let y = data.y.column(j).into_owned();
        let resid = if gamma.is_empty() {
            y.clone()
        } else {
            let xg = Matrix::from_fn(n, gamma.len(), |i, c| data.x[(i, gamma[c])]);
            let inv = (xg.transpose() * &xg).try_inverse().unwrap();
            let proj = &xg * inv * xg.transpose();
            (Matrix::identity(n, n) - proj) * &y
        };
        let s2 = y.dot(&resid) / n as f64;
        let p = data.p() as f64;
        let size = gamma.len() as f64;
        let log_binom = statrs::function::gamma::ln_gamma(p + 1.0)
            - statrs::function::gamma::ln_gamma(size + 1.0)
            - statrs::function::gamma::ln_gamma(p - size + 1.0);
        -log_binom
            - cfg.c1 * size * p.ln()
            - 0.5 * size * (1.0 + cfg.alpha / cfg.kappa).ln()
            - 0.5 * (cfg.alpha * n as f64 + cfg.nu0) * s2.ln()
    }

    fn subsets(p: usize) -> Vec<Vec<usize>> {
        (0..1u32 << p)
            .map(|mask| (0..p).filter(|&k| mask & (1 << k) != 0).collect())
            .collect()
    }

    fn normalize(logs: &[f64]) -> Vec<f64> {
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    }

    #[test]
    fn empty_model() {
        let data = random_data(1, 12, 3, 1, &[(0, 0, 1.0)]);
        let cfg = TesConfig::default_for(3, 1);
        let cache = GramCache::new(&data);
        let yty = data.y.column(0).norm_squared();
        assert_abs_diff_eq!(cache.residual_variance(0, &[]).unwrap(), yty / 12.0, epsilon = 1e-12);
        assert_eq!(log_prior_gamma(0, 3, 2.0), 0.0);
        let lp = log_post_gamma(&cache, 0, &[], &cfg, 3).unwrap();
        assert_abs_diff_eq!(lp, -0.5 * (0.999 * 12.0) * (yty / 12.0).ln(), epsilon = 1e-10);
    }

    #[test]
    fn noiseless_fit_is_floored() {
        let x = Matrix::from_row_slice(4, 2, &[1.0, 0.5, 2.0, -1.0, -1.0, 0.3, 0.5, 2.0]);
        let y = Matrix::from_fn(4, 1, |i, _| x[(i, 0)]);
        let data = RegressionData::new(x, y).unwrap();
        let cfg = TesConfig::default_for(2, 1);
        let cache = GramCache::new(&data);
        assert!(cache.residual_variance(0, &[0]).unwrap().abs() < 1e-12);
        let lp = log_post_gamma(&cache, 0, &[0], &cfg, 2).unwrap();
        assert!(lp.is_finite());
        assert!(lp > log_post_gamma(&cache, 0, &[1], &cfg, 2).unwrap());
        let mut rng = rng::stream(1, 0, 0);
        assert!(matches!(
            sample_sigma_b(&mut rng, &cache, 0, &[0], &cfg),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn matches_projector_oracle_on_all_subsets() {
        for (seed, p) in [(2u64, 3usize), (3, 10)] {
            let data = random_data(seed, 30, p, 1, &[(0, 0, 1.5), (2, 0, -1.0)]);
            let cfg = TesConfig::default_for(p, 1);
            let cache = GramCache::new(&data);
            let all = subsets(p);
            let fast: Vec<f64> = all
                .iter()
                .map(|g| log_post_gamma(&cache, 0, g, &cfg, p).unwrap())
                .collect();
            let slow: Vec<f64> = all.iter().map(|g| projector_log_post(&data, 0, g, &cfg)).collect();
            for (a, b) in fast.iter().zip(&slow) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8 * b.abs().max(1.0));
            }
            let (na, nb) = (normalize(&fast), normalize(&slow));
            let max_diff = na.iter().zip(&nb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(max_diff <= 1e-10, "max diff {max_diff}");
        }
    }

    #[test]
    fn cap_and_rank_deficiency() {
        let data = random_data(4, 5, 8, 1, &[]);
        let cfg = TesConfig::default_for(8, 1);
        let cache = GramCache::new(&data);
        assert!(matches!(
            log_post_gamma(&cache, 0, &[0, 1, 2], &cfg, 2),
            Err(Error::CapExceeded { .. })
        ));
        let all: Vec<usize> = (0..6).collect();
        assert!(matches!(
            log_post_gamma(&cache, 0, &all, &cfg, 8),
            Err(Error::RankDeficient { response: 0 })
        ));
        assert_eq!(cfg.resolve_cap(5, 8), 4);
        let theory = TesConfig {
            cap: SizeCap::Theory { c3: 1.0 },
            ..cfg
        };
        assert_eq!(theory.resolve_cap(100, 50), (100.0 / 50f64.ln()).floor() as usize);
    }

    #[test]
    fn mh_matches_enumeration() {
        let p = 5;
        let data = random_data(5, 40, p, 1, &[(1, 0, 0.45), (3, 0, 0.3)]);
        let mut cfg = TesConfig::default_for(p, 1);
        cfg.iterations = 200_000;
        cfg.burn_in = 1000;
        cfg.c1 = 0.2;
        let cache = GramCache::new(&data);
        let chain = run_gamma_chain(&cache, 0, &cfg, vec![]).unwrap();
        let all = subsets(p);
        let exact = normalize(
            &all.iter()
                .map(|g| log_post_gamma(&cache, 0, g, &cfg, p).unwrap())
                .collect::<Vec<_>>(),
        );
        let mut freq = vec![0.0; all.len()];
        for d in &chain.draws {
            let idx = all.iter().position(|g| g == d).unwrap();
            freq[idx] += 1.0 / chain.draws.len() as f64;
        }
        let tv: f64 = 0.5 * exact.iter().zip(&freq).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv < 0.05, "tv {tv}");
        // the target must not be degenerate for this check to mean anything
        assert!(exact.iter().cloned().fold(0.0, f64::max) < 0.9);
    }

    #[test]
    fn sample_sigma_b_empty_and_moments() {
        let data = random_data(6, 40, 3, 1, &[(0, 0, 1.0), (1, 0, -0.5)]);
        let cfg = TesConfig::default_for(3, 1);
        let cache = GramCache::new(&data);
        let mut rng = rng::stream(6, 0, 0);
        let (s2, b) = sample_sigma_b(&mut rng, &cache, 0, &[], &cfg).unwrap();
        assert!(s2 > 0.0 && b.is_empty());

        let gamma = [0usize, 1];
        let b_hat = cache.least_squares(0, &gamma).unwrap();
        let draws = 100_000;
        let mut mean = Vector::zeros(2);
        let mut samples = Vec::with_capacity(draws);
        let mut sigma_sum = 0.0;
        for _ in 0..draws {
            let (s2, b) = sample_sigma_b(&mut rng, &cache, 0, &gamma, &cfg).unwrap();
            sigma_sum += s2;
            mean += &b;
            samples.push(b);
        }
        mean /= draws as f64;
        let mut cov = Matrix::zeros(2, 2);
        for b in &samples {
            let d = b - &mean;
            cov += &d * d.transpose();
        }
        cov /= draws as f64;
        // oracle: E[σ²]/(α+κ) · (X_γᵀX_γ)⁻¹
        let g_inv = principal_submatrix(&cache.gram, &gamma).try_inverse().unwrap();
        let expected_cov = &g_inv * (sigma_sum / draws as f64 / (cfg.alpha + cfg.kappa));
        for i in 0..2 {
            let se = (expected_cov[(i, i)] / draws as f64).sqrt();
            assert!((mean[i] - b_hat[i]).abs() < 4.0 * se);
            assert!((cov[(i, i)] / expected_cov[(i, i)] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn b_hat_examples() {
        let p = 4;
        let x = Matrix::from_fn(20, p, |i, k| ((i * 7 + k * 3) % 11) as f64 - 5.0 + 0.1 * k as f64);
        let mut b0 = Matrix::zeros(p, 2);
        b0[(0, 0)] = 1.5;
        b0[(2, 0)] = -2.0;
        b0[(3, 1)] = 0.7;
        let data = RegressionData::new(x.clone(), &x * &b0).unwrap();
        let cache = GramCache::new(&data);
        let empty = compute_b_hat(&cache, &nalgebra::DMatrix::from_element(p, 2, false)).unwrap();
        assert_eq!(empty.b, Matrix::zeros(p, 2));
        let gamma = b0.map(|v| v != 0.0);
        let b_hat = compute_b_hat(&cache, &gamma).unwrap();
        assert!((&b_hat.b - &b0).amax() < 1e-10);
        let err = compute_error_estimate(&data, &b_hat);
        assert!(err.s_hat.amax() < 1e-18);
        let err0 = compute_error_estimate(&data, &empty);
        assert_eq!(err0.e_hat, data.y);
    }

    #[test]
    fn least_squares_matches_normal_equations() {
        let data = random_data(7, 20, 6, 1, &[(1, 0, 1.0)]);
        let cache = GramCache::new(&data);
        let gamma = [0usize, 2, 5];
        let xg = Matrix::from_fn(20, 3, |i, c| data.x[(i, gamma[c])]);
        let oracle = (xg.transpose() * &xg).try_inverse().unwrap() * xg.transpose() * data.y.column(0);
        let got = cache.least_squares(0, &gamma).unwrap();
        assert!((got - oracle).amax() < 1e-10);
    }

    #[test]
    fn estimate_ld_examples() {
        let e = Matrix::from_row_slice(3, 2, &[1.0, 0.5, -1.0, 0.2, 2.0, 1.0]);
        let err = ErrorEstimate::from_residuals(e.clone());
        let params = DagWishartParams::default_for(2);
        let chol = tes_estimate_ld(&err, &OrderedDag::empty(2), &params).unwrap();
        assert_eq!(chol.l, Matrix::identity(2, 2));
        let dag = OrderedDag::from_parents(vec![vec![1], vec![]]).unwrap();
        let chol = tes_estimate_ld(&err, &dag, &params).unwrap();
        // oracle: A = EᵀE + I, L̂₂₁ = −A₂₁/A₂₂
        let a = e.transpose() * &e + Matrix::identity(2, 2);
        assert_abs_diff_eq!(chol.l[(1, 0)], -a[(1, 0)] / a[(1, 1)], epsilon = 1e-14);
        // d̂₁ = (A₁₁ − A₂₁²/A₂₂)/2 / ((c+n)/2)
        let schur = a[(0, 0)] - a[(1, 0)].powi(2) / a[(1, 1)];
        assert_abs_diff_eq!(chol.d[0], schur / 2.0 / ((10.0 + 3.0) / 2.0), epsilon = 1e-14);

        let diag = ErrorEstimate::from_residuals(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let chol = tes_estimate_ld(&diag, &dag, &params).unwrap();
        assert_eq!(chol.l[(1, 0)], 0.0);
    }

    #[test]
    fn tes_run_is_deterministic() {
        let data = random_data(8, 40, 6, 3, &[(0, 0, 2.0), (4, 2, -2.0)]);
        let mut cfg = TesConfig::default_for(6, 3);
        cfg.iterations = 300;
        cfg.burn_in = 100;
        cfg.seed = 5;
        let a = tes_run(&data, &cfg).unwrap();
        let b = tes_run(&data, &cfg).unwrap();
        assert_eq!(a.coef_chain, b.coef_chain);
        assert_eq!(a.dag_chain, b.dag_chain);
        assert_eq!(a.b_hat, b.b_hat);
        assert!(a.b_hat.gamma[(0, 0)] && a.b_hat.gamma[(4, 2)]);
        assert_eq!(a.coef_chain.len(), 200);
        assert!(a.chol_hat.supported_by(&a.dag_hat));
        let support = a.chol_hat.support(0.0);
        assert_eq!(support, a.dag_hat);
    }
}
