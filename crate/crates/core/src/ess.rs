//! Exact-likelihood blocked Gibbs sampler over `(B, Γ, L, D, DAG)`.
//!
//! One iteration:
//! 1. systematic scan over `(k, j)` (k outer, j inner) drawing `γ_kj` and
//!    `b_kj` from their joint conditional;
//! 2. `d_q` from its inverse-gamma conditional;
//! 3. for every vertex `j < q`: an add/delete Metropolis–Hastings move on
//!    `pa_j`, then `d_j` and the parent column of `L`;
//! 4. `Ω = L D⁻¹ Lᵀ` is recomposed.
//!
//! The coefficient sweep keeps `M = BᵀXᵀX` (q×p) up to date so each entry
//! costs `O(q)` plus an `O(p)` row update when `b_kj` changes.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dag_wishart::{
    d_shape_rate, inverse_gamma_mode, mh_parent_set_step, parent_space, sample_column_from_blocks,
    sample_inverse_gamma, DagWishartParams,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{mcd_compose, parent_blocks, CholeskyPair, OrderedDag, RegressionData, SparseCoefState};
use crate::proposal::SubsetChain;
use crate::rng::{self, StreamRng};
use crate::select::{
    estimate_b_from_chain, estimate_l_from_chain, mpm_select_dag, mpm_select_gamma, ChainKind, ChainRecord, CoefDraw,
    DagDraw, Draw,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EssConfig {
    /// Prior inclusion probability `η₁`.
    pub eta1: f64,
    /// Slab variance `τ₁²`.
    pub tau1_sq: f64,
    pub dag: DagWishartParams,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl EssConfig {
    /// `η₁ = 1/p`, `τ₁² = 1`, DAG-Wishart defaults, 1000 burn-in + 2000 kept draws.
    pub fn default_for(p: usize, q: usize) -> Self {
        EssConfig {
            eta1: if p > 1 { 1.0 / p as f64 } else { 0.5 },
            tau1_sq: 1.0,
            dag: DagWishartParams::default_for(q),
            iterations: 3000,
            burn_in: 1000,
            thin: 1,
            seed: 0,
        }
    }

    pub fn validate(&self, data: &RegressionData) -> Result<()> {
        if !(self.eta1 > 0.0 && self.eta1 < 1.0) {
            return Err(Error::Config(format!("eta1 must lie in (0,1), got {}", self.eta1)));
        }
        if !(self.tau1_sq > 0.0) {
            return Err(Error::Config(format!("tau1_sq must be positive, got {}", self.tau1_sq)));
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

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "method": "ess",
            "eta1": self.eta1,
            "tau1_sq": self.tau1_sq,
            "eta2": self.dag.eta2,
            "shape_offset": self.dag.shape_offset,
            "max_parents": self.dag.max_parents,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "seed": self.seed,
        })
    }
}

/// Current values of all sampled quantities plus the cached `Ω` and `M`.
#[derive(Debug, Clone)]
pub struct EssState {
    pub coef: SparseCoefState,
    pub chol: CholeskyPair,
    pub dag: OrderedDag,
    pub omega: Matrix,
    /// `M = BᵀXᵀX`, q×p.
    pub m: Matrix,
}

impl EssState {
    pub fn initial(pre: &Precomputed, warm_start: Option<SparseCoefState>) -> Self {
        let (p, q) = (pre.gram.nrows(), pre.xty.ncols());
        let coef = warm_start.unwrap_or_else(|| SparseCoefState::zeros(p, q));
        let m = coef.b.tr_mul(&pre.gram);
        EssState {
            coef,
            chol: CholeskyPair::identity(q),
            dag: OrderedDag::empty(q),
            omega: Matrix::identity(q, q),
            m,
        }
    }
}

/// Gram products computed once per data set.
#[derive(Debug, Clone)]
pub struct Precomputed {
    /// `XᵀX`, p×p.
    pub gram: Matrix,
    /// `XᵀY`, p×q.
    pub xty: Matrix,
}

impl Precomputed {
    pub fn new(data: &RegressionData) -> Self {
        Precomputed {
            gram: data.x.tr_mul(&data.x),
            xty: data.x.tr_mul(&data.y),
        }
    }
}

/// `log ν_kj`, the log odds of `γ_kj = 1` given everything else.
pub fn inclusion_log_odds(c1: f64, c2: f64, eta1: f64, tau1: f64) -> f64 {
    eta1.ln() - (1.0 - eta1).ln() - tau1.ln() - 0.5 * c1.ln() + c2 * c2 / (2.0 * c1)
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Average wall time per iteration of each block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EssTiming {
    pub iterations: usize,
    pub coefficients_secs: f64,
    pub scatter_secs: f64,
    pub dag_secs: f64,
    pub total_secs: f64,
}

impl EssTiming {
    pub fn per_iteration(&self) -> f64 {
        self.total_secs / self.iterations.max(1) as f64
    }

    pub fn coefficients_per_iteration(&self) -> f64 {
        self.coefficients_secs / self.iterations.max(1) as f64
    }
}

pub struct EssSampler<'a> {
    data: &'a RegressionData,
    pre: Precomputed,
    cfg: EssConfig,
    state: EssState,
    coef_rng: StreamRng,
    vertex_rngs: Vec<StreamRng>,
    /// `XᵀYΩ`, refreshed at the start of every coefficient sweep.
    xty_omega: Matrix,
    timing: EssTiming,
}

impl<'a> EssSampler<'a> {
    pub fn new(data: &'a RegressionData, cfg: EssConfig, warm_start: Option<SparseCoefState>) -> Result<Self> {
        cfg.validate(data)?;
        if let Some(ws) = &warm_start {
            if ws.b.shape() != (data.p(), data.q()) || !ws.is_coherent() {
                return Err(Error::Dimension("warm start does not match the data".into()));
            }
        }
        let pre = Precomputed::new(data);
        let state = EssState::initial(&pre, warm_start);
        let q = data.q();
        Ok(EssSampler {
            data,
            coef_rng: rng::stream(cfg.seed, rng::chain::ESS, 0),
            vertex_rngs: (0..q)
                .map(|j| rng::stream(cfg.seed, rng::chain::ESS, 1 + j as u64))
                .collect(),
            xty_omega: Matrix::zeros(data.p(), q),
            pre,
            cfg,
            state,
            timing: EssTiming::default(),
        })
    }

    pub fn state(&self) -> &EssState {
        &self.state
    }

    pub fn config(&self) -> &EssConfig {
        &self.cfg
    }

    pub fn timing(&self) -> &EssTiming {
        &self.timing
    }

    pub fn precomputed(&self) -> &Precomputed {
        &self.pre
    }

    /// Replaces `(L, D, DAG)` and refreshes `Ω`. Intended for tests and
    /// warm starts.
    pub fn set_cholesky(&mut self, chol: CholeskyPair, dag: OrderedDag) -> Result<()> {
        if chol.q() != self.data.q() || dag.q() != self.data.q() || !chol.supported_by(&dag) {
            return Err(Error::Dimension("Cholesky pair does not match the DAG".into()));
        }
        self.state.omega = mcd_compose(&chol);
        self.state.chol = chol;
        self.state.dag = dag;
        Ok(())
    }

    fn refresh_xty_omega(&mut self) {
        self.xty_omega = &self.pre.xty * &self.state.omega;
    }

    /// `(C₁, C₂)` of the conditional of `b_kj` at the current state.
    pub fn conditional_moments(&self, k: usize, j: usize) -> (f64, f64) {
        let s = &self.state;
        let q = self.data.q();
        let omega_jj = s.omega[(j, j)];
        let g_kk = self.pre.gram[(k, k)];
        let c1 = omega_jj * g_kk + 1.0 / self.cfg.tau1_sq;
        let m_col = &s.m.as_slice()[k * q..(k + 1) * q];
        let o_col = &s.omega.as_slice()[j * q..(j + 1) * q];
        let cross: f64 = m_col.iter().zip(o_col).map(|(a, b)| a * b).sum();
        let c2 = self.xty_omega[(k, j)] - cross + omega_jj * g_kk * s.coef.b[(k, j)];
        (c1, c2)
    }

    /// Draws `(γ_kj, b_kj)` from their joint conditional and updates row `j` of `M`.
    pub fn update_gamma_b_entry(&mut self, k: usize, j: usize) {
        let (c1, c2) = self.conditional_moments(k, j);
        let log_odds = inclusion_log_odds(c1, c2, self.cfg.eta1, self.cfg.tau1_sq.sqrt());
        let rng = &mut self.coef_rng;
        let include = rng.random::<f64>() < logistic(log_odds);
        let new_b = if include {
            c2 / c1 + rng.sample::<f64, _>(StandardNormal) / c1.sqrt()
        } else {
            0.0
        };
        let old_b = self.state.coef.b[(k, j)];
        self.state.coef.set(k, j, include, new_b);
        let delta = new_b - old_b;
        if delta != 0.0 {
            let gram_col = &self.pre.gram.as_slice()[k * self.data.p()..(k + 1) * self.data.p()];
            let m = &mut self.state.m;
            for (s, g) in gram_col.iter().enumerate() {
                m[(j, s)] += delta * g;
            }
        }
    }

    /// Full systematic scan over all `(k, j)`.
    pub fn sweep_coefficients(&mut self) {
        self.refresh_xty_omega();
        for k in 0..self.data.p() {
            for j in 0..self.data.q() {
                self.update_gamma_b_entry(k, j);
            }
        }
    }

    /// `nS̃ = Σᵢ (Yᵢ − BᵀXᵢ)(Yᵢ − BᵀXᵢ)ᵀ + U`, recomputed from the current `B`.
    pub fn posterior_scatter(&self) -> Matrix {
        let mut resid = self.data.y.clone();
        let n = self.data.n();
        let x = &self.data.x;
        for j in 0..self.data.q() {
            for k in 0..self.data.p() {
                let b = self.state.coef.b[(k, j)];
                if b != 0.0 {
                    let xk = &x.as_slice()[k * n..(k + 1) * n];
                    let rj = &mut resid.as_mut_slice()[j * n..(j + 1) * n];
                    for (r, xv) in rj.iter_mut().zip(xk) {
                        *r -= b * xv;
                    }
                }
            }
        }
        let mut a = resid.tr_mul(&resid) + &self.cfg.dag.u;
        crate::model::symmetrize(&mut a);
        a
    }

    /// Draws `d_q ~ Inverse-Gamma((c + n)/2 − 1, n s̃_qq / 2)`.
    pub fn update_d_q(&mut self, a_post: &Matrix) -> Result<()> {
        let q = self.data.q();
        let (shape, rate) = d_shape_rate(a_post[(q - 1, q - 1)], self.data.n(), self.cfg.dag.shape_offset);
        self.state.chol.d[q - 1] = sample_inverse_gamma(&mut self.vertex_rngs[q - 1], shape, rate)?;
        Ok(())
    }

    /// One Metropolis–Hastings move on `pa_j` targeting `π(pa_j | E)`.
    pub fn mh_parent_set_step(&mut self, a_post: &Matrix, j: usize) -> Result<bool> {
        let n = self.data.n();
        let params = &self.cfg.dag;
        let current = self.state.dag.parents(j).to_vec();
        let log_target = crate::dag_wishart::log_parent_posterior(a_post, params, &current, j, n)?;
        let mut chain = SubsetChain::new(current, log_target);
        let space = parent_space(params, j);
        let accepted = mh_parent_set_step(&mut self.vertex_rngs[j], &mut chain, &space, a_post, params, j, n);
        if accepted {
            self.state.dag.set_parents(j, chain.current);
        }
        Ok(accepted)
    }

    /// Draws `d_j` and the parent column of `L` given `pa_j`.
    pub fn update_vertex_cholesky(&mut self, a_post: &Matrix, j: usize) -> Result<()> {
        let q = self.data.q();
        let parents = self.state.dag.parents(j).to_vec();
        let blocks = parent_blocks(a_post, &parents, j)?;
        let (shape, rate) = d_shape_rate(blocks.schur, self.data.n(), self.cfg.dag.shape_offset);
        let rng = &mut self.vertex_rngs[j];
        let d = sample_inverse_gamma(rng, shape, rate)?;
        let col = sample_column_from_blocks(rng, &blocks, d);
        let l = &mut self.state.chol.l;
        for i in (j + 1)..q {
            l[(i, j)] = 0.0;
        }
        for (&i, &v) in parents.iter().zip(col.iter()) {
            l[(i, j)] = v;
        }
        self.state.chol.d[j] = d;
        Ok(())
    }

    /// One full iteration.
    pub fn step(&mut self) -> Result<()> {
        let t0 = Instant::now();
        self.sweep_coefficients();
        let t1 = Instant::now();
        let a_post = self.posterior_scatter();
        let t2 = Instant::now();
        self.update_d_q(&a_post)?;
        for j in 0..self.data.q().saturating_sub(1) {
            self.mh_parent_set_step(&a_post, j)?;
            self.update_vertex_cholesky(&a_post, j)?;
        }
        self.state.omega = mcd_compose(&self.state.chol);
        let t3 = Instant::now();
        self.timing.iterations += 1;
        self.timing.coefficients_secs += (t1 - t0).as_secs_f64();
        self.timing.scatter_secs += (t2 - t1).as_secs_f64();
        self.timing.dag_secs += (t3 - t2).as_secs_f64();
        self.timing.total_secs += (t3 - t0).as_secs_f64();
        Ok(())
    }

    fn record(&self) -> Draw {
        let s = &self.state;
        let (p, q) = (self.data.p(), self.data.q());
        let mut active = Vec::new();
        let mut values = Vec::new();
        for j in 0..q {
            for k in 0..p {
                if s.coef.gamma[(k, j)] {
                    active.push((k as u32, j as u32));
                    values.push(s.coef.b[(k, j)]);
                }
            }
        }
        let parents: Vec<Vec<u32>> = s
            .dag
            .all_parents()
            .iter()
            .map(|pa| pa.iter().map(|&i| i as u32).collect())
            .collect();
        let l_values = s.dag.edges().map(|(i, j)| s.chol.l[(i, j)]).collect();
        Draw {
            coef: Some(CoefDraw {
                active,
                values: Some(values),
            }),
            dag: Some(DagDraw {
                parents,
                l_values: Some(l_values),
                d: Some(s.chol.d.clone()),
            }),
        }
    }

    /// Runs all iterations and records post burn-in, thinned draws.
    pub fn run(mut self) -> Result<EssOutput> {
        let mut chain = ChainRecord::new(
            ChainKind::Ess,
            self.data.p(),
            self.data.q(),
            self.cfg.seed,
            self.cfg.snapshot(),
        );
        for it in 0..self.cfg.iterations {
            self.step()?;
            if it >= self.cfg.burn_in && (it - self.cfg.burn_in + 1).is_multiple_of(self.cfg.thin) {
                chain.draws.push(self.record());
            }
        }
        Ok(EssOutput {
            chain,
            state: self.state,
            timing: self.timing,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EssOutput {
    pub chain: ChainRecord,
    pub state: EssState,
    pub timing: EssTiming,
}

/// Runs the exact sampler from a zero coefficient start.
pub fn ess_run(data: &RegressionData, cfg: &EssConfig) -> Result<EssOutput> {
    EssSampler::new(data, cfg.clone(), None)?.run()
}

/// Point estimates from an exact-sampler chain.
#[derive(Debug, Clone)]
pub struct EssEstimates {
    pub gamma_hat: nalgebra::DMatrix<bool>,
    pub b_hat: SparseCoefState,
    pub dag_hat: OrderedDag,
    pub chol_hat: CholeskyPair,
}

/// Median probability `Γ̂` and DAG, chain-average `B̂` and `L̂` over draws
/// where the entry is active, and `d̂_j` at the posterior mode given
/// `Ê = Y − X B̂` on the selected DAG.
pub fn ess_estimates(data: &RegressionData, chain: &ChainRecord, params: &DagWishartParams) -> Result<EssEstimates> {
    let gamma_hat = mpm_select_gamma(chain)?;
    let b_hat = estimate_b_from_chain(chain, &gamma_hat)?;
    let dag_hat = mpm_select_dag(chain)?;
    let l = estimate_l_from_chain(chain, &dag_hat)?;
    let resid = &data.y - &data.x * &b_hat.b;
    let a_post = resid.tr_mul(&resid) + &params.u;
    let n = data.n();
    let mut d = Vec::with_capacity(data.q());
    for j in 0..data.q() {
        let blocks = parent_blocks(&a_post, dag_hat.parents(j), j)?;
        let (shape, rate) = d_shape_rate(blocks.schur, n, params.shape_offset);
        d.push(inverse_gamma_mode(shape, rate)?);
    }
    Ok(EssEstimates {
        gamma_hat,
        b_hat,
        dag_hat,
        chol_hat: CholeskyPair::new(l, d)?,
    })
}

/// Times `iterations` coefficient sweeps alone.
pub fn time_coefficient_sweeps(data: &RegressionData, cfg: &EssConfig, iterations: usize) -> Result<Duration> {
    let mut sampler = EssSampler::new(data, cfg.clone(), None)?;
    let start = Instant::now();
    for _ in 0..iterations {
        sampler.sweep_coefficients();
    }
    Ok(start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::Distribution;

    fn small_data(seed: u64, n: usize, p: usize, q: usize) -> RegressionData {
        let mut rng = rng::stream(seed, 99, 0);
        let normal = StandardNormal;
        let x = Matrix::from_fn(n, p, |_, _| normal.sample(&mut rng));
        let mut b = Matrix::zeros(p, q);
        b[(0, 0)] = 2.0;
        if p > 1 && q > 1 {
            b[(1, 1)] = -1.5;
        }
        let e = Matrix::from_fn(n, q, |_, _| normal.sample(&mut rng));
        let y = &x * &b + e;
        RegressionData::new(x, y).unwrap()
    }

    #[test]
    fn inclusion_probability_at_zero_c2() {
        let c1: f64 = 3.7;
        let prob = logistic(inclusion_log_odds(c1, 0.0, 0.5, 1.0));
        assert_abs_diff_eq!(prob, 1.0 / (1.0 + c1.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn logistic_handles_overflow() {
        assert_eq!(logistic(1e6), 1.0);
        assert_eq!(logistic(-1e6), 0.0);
        assert!(inclusion_log_odds(1.0, 1e200, 0.5, 1.0).is_infinite());
    }

    #[test]
    fn moments_match_direct_formula() {
        let data = small_data(1, 20, 4, 3);
        let mut cfg = EssConfig::default_for(4, 3);
        cfg.iterations = 3;
        cfg.burn_in = 0;
        let mut sampler = EssSampler::new(&data, cfg, None).unwrap();
        for _ in 0..3 {
            sampler.step().unwrap();
        }
        sampler.refresh_xty_omega();
        let s = sampler.state().clone();
        let (x, y, b, omega) = (&data.x, &data.y, &s.coef.b, &s.omega);
        for k in 0..4 {
            for j in 0..3 {
                // direct evaluation of C₂ = Σᵢ x_ik (Σ_r y_ir ω_jr − Σ_{l≠j} b_lᵀXᵢ ω_jl − ω_jj Σ_{s≠k} b_sj x_is)
                let mut c2 = 0.0;
                for i in 0..data.n() {
                    let mut inner: f64 = (0..3).map(|r| y[(i, r)] * omega[(j, r)]).sum();
                    for l in (0..3).filter(|&l| l != j) {
                        let fit: f64 = (0..4).map(|s| b[(s, l)] * x[(i, s)]).sum();
                        inner -= fit * omega[(j, l)];
                    }
                    let own: f64 = (0..4).filter(|&s| s != k).map(|s| b[(s, j)] * x[(i, s)]).sum();
                    inner -= omega[(j, j)] * own;
                    c2 += x[(i, k)] * inner;
                }
                let c1 = omega[(j, j)] * (0..data.n()).map(|i| x[(i, k)].powi(2)).sum::<f64>() + 1.0;
                let (g1, g2) = sampler.conditional_moments(k, j);
                assert_abs_diff_eq!(g1, c1, epsilon = 1e-9 * c1.abs().max(1.0));
                assert_abs_diff_eq!(g2, c2, epsilon = 1e-9 * c2.abs().max(1.0));
            }
        }
    }

    #[test]
    fn caches_stay_coherent() {
        let data = small_data(2, 30, 5, 4);
        let mut cfg = EssConfig::default_for(5, 4);
        cfg.dag.eta2 = 0.4;
        let mut sampler = EssSampler::new(&data, cfg, None).unwrap();
        for _ in 0..25 {
            sampler.step().unwrap();
            let s = sampler.state();
            let omega = mcd_compose(&s.chol);
            assert!((&omega - &s.omega).norm() <= 1e-8);
            let m = s.coef.b.tr_mul(&sampler.pre.gram);
            assert!((&m - &s.m).norm() <= 1e-8 * m.norm().max(1.0));
            assert!(s.coef.is_coherent());
            assert!(s.coef.gamma.iter().zip(s.coef.b.iter()).all(|(&g, &b)| g == (b != 0.0)));
            assert!(s.chol.supported_by(&s.dag));
        }
    }

    #[test]
    fn zero_draw_sets_exact_zero() {
        let data = small_data(3, 15, 3, 2);
        let mut cfg = EssConfig::default_for(3, 2);
        cfg.eta1 = 1e-12;
        let mut sampler = EssSampler::new(&data, cfg, None).unwrap();
        sampler.refresh_xty_omega();
        sampler.state.coef.set(2, 1, true, 0.7);
        sampler.state.m = sampler.state.coef.b.tr_mul(&sampler.pre.gram);
        sampler.update_gamma_b_entry(2, 1);
        assert!(!sampler.state().coef.gamma[(2, 1)]);
        assert_eq!(sampler.state().coef.b[(2, 1)], 0.0);
    }

    #[test]
    fn scatter_hand_case() {
        // n = q = 2, B = 0, U = I: nS̃ = YᵀY + I
        let x = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let y = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, -1.0]);
        let data = RegressionData::new(x, y).unwrap();
        let sampler = EssSampler::new(&data, EssConfig::default_for(1, 2), None).unwrap();
        let a = sampler.posterior_scatter();
        assert_eq!(a, Matrix::from_row_slice(2, 2, &[11.0, -1.0, -1.0, 6.0]));
    }

    #[test]
    fn empty_chain_when_all_burn_in() {
        let data = small_data(4, 10, 2, 2);
        let mut cfg = EssConfig::default_for(2, 2);
        cfg.iterations = 5;
        cfg.burn_in = 5;
        let out = ess_run(&data, &cfg).unwrap();
        assert!(out.chain.is_empty());
    }

    #[test]
    fn thinning_count() {
        let data = small_data(5, 10, 2, 2);
        let mut cfg = EssConfig::default_for(2, 2);
        cfg.iterations = 17;
        cfg.burn_in = 4;
        cfg.thin = 3;
        assert_eq!(ess_run(&data, &cfg).unwrap().chain.len(), 4);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let data = small_data(6, 25, 4, 3);
        let mut cfg = EssConfig::default_for(4, 3);
        cfg.iterations = 40;
        cfg.burn_in = 10;
        cfg.seed = 77;
        let a = ess_run(&data, &cfg).unwrap().chain;
        let b = ess_run(&data, &cfg).unwrap().chain;
        assert_eq!(a, b);
        cfg.seed = 78;
        assert_ne!(a, ess_run(&data, &cfg).unwrap().chain);
    }

    #[test]
    fn rejects_bad_config() {
        let data = small_data(7, 10, 2, 2);
        let mut cfg = EssConfig::default_for(2, 2);
        cfg.burn_in = cfg.iterations + 1;
        assert!(matches!(ess_run(&data, &cfg), Err(Error::Config(_))));
        let cfg = EssConfig::default_for(2, 3);
        assert!(matches!(ess_run(&data, &cfg), Err(Error::Dimension(_))));
    }
}
