//! Synthetic benchmark generator for `Y = X B₀ + E`.
//!
//! Rows of `X` are `N_p(0, C₀)` with `C₀ = (0.6^{|r−s|})`, rows of `E` are
//! `N_q(0, Σ₀)`. Settings 1–4 choose the law of the nonzero entries of `B₀`;
//! scenarios fix `(n, p, q)` and the sparsity of `B₀` and of the DAG.

use nalgebra::SymmetricEigen;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{mcd_compose, mcd_decompose, CholeskyPair, OrderedDag, RegressionData, SparseCoefState};
use crate::rng::{self, StreamRng};

const AR_COEF: f64 = 0.6;

mod streams {
    pub const COEF: u64 = 0;
    pub const CHOL: u64 = 1;
    pub const X: u64 = 2;
    pub const E: u64 = 3;
    pub const SHUFFLE: u64 = 4;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub scenario: u8,
    /// Ignored for scenario 5.
    pub setting: u8,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
}

impl SimSpec {
    pub fn new(scenario: u8, setting: u8, seed: u64) -> Self {
        SimSpec {
            scenario,
            setting,
            seed,
            n: None,
            p: None,
            q: None,
        }
    }

    pub fn with_dims(mut self, n: usize, p: usize, q: usize) -> Self {
        self.n = Some(n);
        self.p = Some(p);
        self.q = Some(q);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.scenario) {
            return Err(Error::Config(format!("scenario must be 1–5, got {}", self.scenario)));
        }
        if !(1..=4).contains(&self.setting) {
            return Err(Error::Config(format!("setting must be 1–4, got {}", self.setting)));
        }
        let (n, p, q) = self.dims();
        if n < 2 || p == 0 || q == 0 {
            return Err(Error::Config(format!("invalid dimensions (n, p, q) = ({n}, {p}, {q})")));
        }
        let (coef, edges) = self.counts();
        if coef > p * q {
            return Err(Error::CountTooLarge {
                count: coef,
                cells: p * q,
            });
        }
        if edges > q * (q - 1) / 2 {
            return Err(Error::CountTooLarge {
                count: edges,
                cells: q * (q - 1) / 2,
            });
        }
        Ok(())
    }

    /// `(n, p, q)` after overrides.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (n, p, q) = match self.scenario {
            2 => (100, 200, 200),
            3 => (150, 300, 200),
            4 => (100, 150, 100),
            _ => (100, 100, 50),
        };
        (self.n.unwrap_or(n), self.p.unwrap_or(p), self.q.unwrap_or(q))
    }

    /// `(‖Γ₀‖₀, Σ_j ν_j(𝒟₀))`, rounded down. Scenario 4 has no DAG truth and
    /// reports zero edges here.
    pub fn counts(&self) -> (usize, usize) {
        let (_, p, q) = self.dims();
        match self.scenario {
            3 => (p / 30, q / 20),
            4 => (p / 10, 0),
            5 => (20, q / 5),
            _ => (p / 5, q / 5),
        }
    }

    /// Bundle directory name `{scenario}_{setting}_{seed}`.
    pub fn bundle_name(&self) -> String {
        format!("{}_{}_{}", self.scenario, self.setting, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub b0: SparseCoefState,
    pub chol0: CholeskyPair,
    pub dag0: OrderedDag,
    pub sigma0: Matrix,
    pub omega0: Matrix,
    pub c0: Matrix,
}

/// Uniformly random distinct cells `(k, j)` of a `p × q` grid, sorted
/// column-major.
pub fn place_support<R: Rng + ?Sized>(rng: &mut R, p: usize, q: usize, count: usize) -> Result<Vec<(usize, usize)>> {
    let cells = p * q;
    if count > cells {
        return Err(Error::CountTooLarge { count, cells });
    }
    let mut idx = index::sample(rng, cells, count).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| (i % p, i / p)).collect())
}

/// `count` distinct edges placed uniformly among the `q(q−1)/2` ordered pairs.
pub fn place_edges<R: Rng + ?Sized>(rng: &mut R, q: usize, count: usize) -> Result<OrderedDag> {
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|j| (j + 1..q).map(move |i| (i, j))).collect();
    if count > pairs.len() {
        return Err(Error::CountTooLarge {
            count,
            cells: pairs.len(),
        });
    }
    let mut parents = vec![Vec::new(); q];
    for i in index::sample(rng, pairs.len(), count) {
        let (parent, child) = pairs[i];
        parents[child].push(parent);
    }
    OrderedDag::from_parents(parents)
}

/// Uniform draw on a union of disjoint intervals, weighted by length.
fn uniform_union<R: Rng + ?Sized>(rng: &mut R, intervals: &[(f64, f64)]) -> f64 {
    let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    let mut u = rng.random::<f64>() * total;
    for &(a, b) in intervals {
        if u < b - a {
            return a + u;
        }
        u -= b - a;
    }
    let (_, b) = intervals[intervals.len() - 1];
    b
}

fn setting_intervals(setting: u8) -> &'static [(f64, f64)] {
    match setting {
        1 => &[(1.5, 3.0)],
        2 => &[(-3.0, -1.5), (1.5, 3.0)],
        3 => &[(-1.5, -0.5), (0.5, 1.5)],
        _ => &[(-1.5, -0.5), (1.5, 3.0)],
    }
}

fn sample_b0(rng: &mut StreamRng, spec: &SimSpec, p: usize, q: usize) -> Result<SparseCoefState> {
    let (count, _) = spec.counts();
    let cells = place_support(rng, p, q, count)?;
    let mut b0 = SparseCoefState::zeros(p, q);
    if spec.scenario == 5 {
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.shuffle(rng);
        for (rank, &c) in order.iter().enumerate() {
            let v = match rank {
                0..=4 => 1.5,
                5..=9 => 1.0,
                _ => rng.random_range(0.0..0.3),
            };
            let (k, j) = cells[c];
            b0.set(k, j, true, v);
        }
    } else {
        let intervals = setting_intervals(spec.setting);
        for (k, j) in cells {
            b0.set(k, j, true, uniform_union(rng, intervals));
        }
    }
    Ok(b0)
}

fn sample_dag_truth(rng: &mut StreamRng, q: usize, edges: usize) -> Result<(OrderedDag, CholeskyPair)> {
    let dag = place_edges(rng, q, edges)?;
    let mut l = Matrix::identity(q, q);
    for (parent, child) in dag.edges() {
        l[(parent, child)] = uniform_union(rng, &[(-0.7, -0.3), (0.3, 0.7)]);
    }
    let d = (0..q).map(|_| rng.random_range(2.0..5.0)).collect();
    Ok((dag, CholeskyPair::new(l, d)?))
}

/// `Σ̃ᵢⱼ = 2(1 − |i−j|/10)·1(|i−j| ≤ 5)` shifted so that `λ_min = 0.01`.
pub fn banded_covariance(q: usize) -> Matrix {
    let tilde = Matrix::from_fn(q, q, |i, j| {
        let dist = i.abs_diff(j);
        if dist <= 5 {
            2.0 * (1.0 - dist as f64 / 10.0)
        } else {
            0.0
        }
    });
    let lambda_min = SymmetricEigen::new(tilde.clone()).eigenvalues.min();
    tilde + Matrix::identity(q, q) * (0.01 - lambda_min)
}

/// `C₀ = (0.6^{|r−s|})`.
pub fn ar1_covariance(p: usize) -> Matrix {
    Matrix::from_fn(p, p, |r, s| AR_COEF.powi(r.abs_diff(s) as i32))
}

/// Rows `x_k = 0.6 x_{k−1} + 0.8 z_k`, which have covariance `C₀`.
fn sample_x(rng: &mut StreamRng, n: usize, p: usize) -> Matrix {
    let innov = (1.0 - AR_COEF * AR_COEF).sqrt();
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for k in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if k == 0 { z } else { AR_COEF * prev + innov * z };
            x[(i, k)] = v;
            prev = v;
        }
    }
    x
}

/// Rows `e` solving `Lᵀe = D^{1/2} z`, so `Cov(e) = L⁻ᵀ D L⁻¹ = Ω⁻¹`.
fn sample_e_mcd(rng: &mut StreamRng, n: usize, chol: &CholeskyPair) -> Matrix {
    let q = chol.q();
    let mut e = Matrix::zeros(n, q);
    let mut row = vec![0.0; q];
    for i in 0..n {
        for (j, r) in row.iter_mut().enumerate() {
            *r = chol.d[j].sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        for j in (0..q).rev() {
            row[j] = (j + 1..q).fold(row[j], |v, m| v - chol.l[(m, j)] * row[m]);
        }
        for j in 0..q {
            e[(i, j)] = row[j];
        }
    }
    e
}

fn sample_e_cov(rng: &mut StreamRng, n: usize, sigma: &Matrix) -> Result<Matrix> {
    let q = sigma.nrows();
    let factor = nalgebra::Cholesky::new(sigma.clone())
        .ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?
        .unpack();
    let z = Matrix::from_fn(n, q, |_, _| rng.sample(StandardNormal));
    Ok(z * factor.transpose())
}

fn invert_spd(a: &Matrix) -> Result<Matrix> {
    let mut inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
    crate::model::symmetrize(&mut inv);
    Ok(inv)
}

pub fn generate(spec: &SimSpec) -> Result<(RegressionData, GroundTruth)> {
    spec.validate()?;
    let (n, p, q) = spec.dims();
    let seed = spec.seed;
    let mut coef_rng = rng::stream(seed, rng::chain::SIMULATE, streams::COEF);
    let mut x_rng = rng::stream(seed, rng::chain::SIMULATE, streams::X);
    let mut e_rng = rng::stream(seed, rng::chain::SIMULATE, streams::E);

    let b0 = sample_b0(&mut coef_rng, spec, p, q)?;
    let x = sample_x(&mut x_rng, n, p);

    let (e, chol0, dag0, sigma0, omega0) = if spec.scenario == 4 {
        let base = banded_covariance(q);
        let e0 = sample_e_cov(&mut e_rng, n, &base)?;
        let mut perm: Vec<usize> = (0..q).collect();
        perm.shuffle(&mut rng::stream(seed, rng::chain::SIMULATE, streams::SHUFFLE));
        let e = Matrix::from_fn(n, q, |i, j| e0[(i, perm[j])]);
        let sigma0 = Matrix::from_fn(q, q, |i, j| base[(perm[i], perm[j])]);
        let omega0 = invert_spd(&sigma0)?;
        let chol0 = mcd_decompose(&omega0)?;
        let dag0 = chol0.support(1e-10);
        (e, chol0, dag0, sigma0, omega0)
    } else {
        let (_, edges) = spec.counts();
        let mut chol_rng = rng::stream(seed, rng::chain::SIMULATE, streams::CHOL);
        let (dag0, chol0) = sample_dag_truth(&mut chol_rng, q, edges)?;
        let e = sample_e_mcd(&mut e_rng, n, &chol0);
        let omega0 = mcd_compose(&chol0);
        let sigma0 = invert_spd(&omega0)?;
        (e, chol0, dag0, sigma0, omega0)
    };

    let y = &x * &b0.b + e;
    let data = RegressionData::new(x, y)?;
    let truth = GroundTruth {
        b0,
        chol0,
        dag0,
        sigma0,
        omega0,
        c0: ar1_covariance(p),
    };
    Ok((data, truth))
}
