//! Chain records and their post-processing: median probability model
//! selection and point estimates of `B` and `L`.

use serde::{Deserialize, Serialize};

use crate::dag_wishart::posterior_mean_l_column;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{OrderedDag, SparseCoefState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    Ess,
    TesStep1,
    TesStep2,
}

/// Active coefficient cells `(k, j)` of one draw, optionally with values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefDraw {
    pub active: Vec<(u32, u32)>,
    pub values: Option<Vec<f64>>,
}

/// Parent sets of one draw; `l_values` follows the flattened parent lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagDraw {
    pub parents: Vec<Vec<u32>>,
    pub l_values: Option<Vec<f64>>,
    pub d: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Draw {
    pub coef: Option<CoefDraw>,
    pub dag: Option<DagDraw>,
}

/// Post burn-in, thinned draws of one sampler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub kind: ChainKind,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub config: serde_json::Value,
    pub draws: Vec<Draw>,
}

impl ChainRecord {
    pub fn new(kind: ChainKind, p: usize, q: usize, seed: u64, config: serde_json::Value) -> Self {
        ChainRecord {
            kind,
            p,
            q,
            seed,
            config,
            draws: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    fn coef_draws(&self) -> impl Iterator<Item = &CoefDraw> {
        self.draws.iter().filter_map(|d| d.coef.as_ref())
    }

    fn dag_draws(&self) -> impl Iterator<Item = &DagDraw> {
        self.draws.iter().filter_map(|d| d.dag.as_ref())
    }

    /// Per-cell count of draws with `γ_kj = 1`, and the number of draws.
    pub fn inclusion_counts(&self) -> (nalgebra::DMatrix<usize>, usize) {
        let mut counts = nalgebra::DMatrix::zeros(self.p, self.q);
        let mut m = 0;
        for draw in self.coef_draws() {
            m += 1;
            for &(k, j) in &draw.active {
                counts[(k as usize, j as usize)] += 1;
            }
        }
        (counts, m)
    }

    /// Per-edge count of draws containing `parent → child`, as a q×q matrix
    /// indexed `(parent, child)`, and the number of draws.
    pub fn edge_counts(&self) -> (nalgebra::DMatrix<usize>, usize) {
        let mut counts = nalgebra::DMatrix::zeros(self.q, self.q);
        let mut m = 0;
        for draw in self.dag_draws() {
            m += 1;
            for (j, pa) in draw.parents.iter().enumerate() {
                for &i in pa {
                    counts[(i as usize, j)] += 1;
                }
            }
        }
        (counts, m)
    }

    /// Value series of coefficient `(k, j)` across draws (0 when inactive).
    pub fn coef_series(&self, k: usize, j: usize) -> Vec<f64> {
        self.coef_draws()
            .map(|d| {
                let pos = d.active.iter().position(|&c| c == (k as u32, j as u32));
                match (pos, &d.values) {
                    (Some(i), Some(v)) => v[i],
                    (Some(_), None) => 1.0,
                    (None, _) => 0.0,
                }
            })
            .collect()
    }

    /// Value series of `L_{parent, child}` across draws (0 when absent).
    pub fn l_series(&self, parent: usize, child: usize) -> Vec<f64> {
        self.dag_draws()
            .map(|d| {
                let offset: usize = d.parents[..child].iter().map(Vec::len).sum();
                match d.parents[child].iter().position(|&i| i as usize == parent) {
                    Some(pos) => match &d.l_values {
                        Some(v) => v[offset + pos],
                        None => 1.0,
                    },
                    None => 0.0,
                }
            })
            .collect()
    }

    pub fn d_series(&self, j: usize) -> Vec<f64> {
        self.dag_draws().filter_map(|d| d.d.as_ref().map(|v| v[j])).collect()
    }
}

fn at_least_half(count: usize, m: usize) -> bool {
    2 * count >= m
}

/// Median probability model for `Γ`: `γ̂_kj = 1` iff the inclusion frequency is at least 1/2.
pub fn mpm_select_gamma(chain: &ChainRecord) -> Result<nalgebra::DMatrix<bool>> {
    let (counts, m) = chain.inclusion_counts();
    if m == 0 {
        return Err(Error::EmptyChain);
    }
    Ok(counts.map(|c| at_least_half(c, m)))
}

/// Median probability DAG: every edge with frequency at least 1/2.
pub fn mpm_select_dag(chain: &ChainRecord) -> Result<OrderedDag> {
    let (counts, m) = chain.edge_counts();
    if m == 0 {
        return Err(Error::EmptyChain);
    }
    let q = chain.q;
    let parents = (0..q)
        .map(|j| ((j + 1)..q).filter(|&i| at_least_half(counts[(i, j)], m)).collect())
        .collect();
    OrderedDag::from_parents(parents)
}

/// `b̂_kj` = average of `b_kj` over draws with `γ_kj = 1`, for selected cells.
pub fn estimate_b_from_chain(chain: &ChainRecord, gamma_hat: &nalgebra::DMatrix<bool>) -> Result<SparseCoefState> {
    let (p, q) = (chain.p, chain.q);
    if gamma_hat.shape() != (p, q) {
        return Err(Error::Dimension("Γ̂ does not match the chain".into()));
    }
    let mut sums = Matrix::zeros(p, q);
    let mut counts = nalgebra::DMatrix::<usize>::zeros(p, q);
    let mut m = 0;
    for draw in chain.coef_draws() {
        m += 1;
        let values = draw
            .values
            .as_ref()
            .ok_or_else(|| Error::Config("chain does not store coefficient values".into()))?;
        for (&(k, j), &v) in draw.active.iter().zip(values) {
            sums[(k as usize, j as usize)] += v;
            counts[(k as usize, j as usize)] += 1;
        }
    }
    if m == 0 {
        return Err(Error::EmptyChain);
    }
    let mut state = SparseCoefState::zeros(p, q);
    for j in 0..q {
        for k in 0..p {
            if gamma_hat[(k, j)] {
                let c = counts[(k, j)];
                if c == 0 {
                    return Err(Error::NeverActive(k, j));
                }
                state.set(k, j, true, sums[(k, j)] / c as f64);
            }
        }
    }
    Ok(state)
}

/// `L̂_{ij}` = average of `L_ij` over draws containing edge `i → j`, for edges of `dag_hat`.
pub fn estimate_l_from_chain(chain: &ChainRecord, dag_hat: &OrderedDag) -> Result<Matrix> {
    let q = chain.q;
    if dag_hat.q() != q {
        return Err(Error::Dimension("DAG does not match the chain".into()));
    }
    let mut sums = Matrix::zeros(q, q);
    let mut counts = nalgebra::DMatrix::<usize>::zeros(q, q);
    let mut m = 0;
    for draw in chain.dag_draws() {
        m += 1;
        let values = draw
            .l_values
            .as_ref()
            .ok_or_else(|| Error::Config("chain does not store Cholesky values".into()))?;
        let mut it = values.iter();
        for (j, pa) in draw.parents.iter().enumerate() {
            for &i in pa {
                let v = *it.next().ok_or_else(|| Error::Dimension("short L draw".into()))?;
                sums[(i as usize, j)] += v;
                counts[(i as usize, j)] += 1;
            }
        }
    }
    if m == 0 {
        return Err(Error::EmptyChain);
    }
    let mut l = Matrix::identity(q, q);
    for (i, j) in dag_hat.edges() {
        let c = counts[(i, j)];
        if c == 0 {
            return Err(Error::NeverActive(i, j));
        }
        l[(i, j)] = sums[(i, j)] / c as f64;
    }
    Ok(l)
}

/// Closed-form alternative: columns of `L̂` set to the conditional posterior
/// means `−(S̃^{>j})⁻¹ S̃_{.j}` on `dag_hat`.
pub fn estimate_l_posterior_mean(s_tilde: &Matrix, dag_hat: &OrderedDag) -> Result<Matrix> {
    let q = dag_hat.q();
    let mut l = Matrix::identity(q, q);
    for j in 0..q {
        let mean = posterior_mean_l_column(s_tilde, dag_hat, j)?;
        for (&i, &v) in dag_hat.parents(j).iter().zip(mean.iter()) {
            l[(i, j)] = v;
        }
    }
    Ok(l)
}
