//! Shared model types: regression data, sparse coefficients, ordered DAGs and
//! the modified Cholesky decomposition `Ω = L D⁻¹ Lᵀ`.
//!
//! Vertices and predictors are 0-based throughout the library. File formats
//! written by [`crate::io`] use 1-based labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{principal_submatrix, Cholesky, Matrix, Vector, PIVOT_EPS};

/// Design matrix `X` (n×p) and responses `Y` (n×q).
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub x: Matrix,
    pub y: Matrix,
}

impl RegressionData {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension(format!(
                "X has {} rows but Y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::Dimension("empty design or response matrix".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("non-finite entry in X or Y".into()));
        }
        Ok(RegressionData { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }
}

/// Coefficient matrix `B` (p×q) together with its inclusion indicators `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefState {
    pub b: Matrix,
    pub gamma: nalgebra::DMatrix<bool>,
}

impl SparseCoefState {
    pub fn zeros(p: usize, q: usize) -> Self {
        SparseCoefState {
            b: Matrix::zeros(p, q),
            gamma: nalgebra::DMatrix::from_element(p, q, false),
        }
    }

    /// Builds a state whose support is the nonzero pattern of `b`.
    pub fn from_dense(b: Matrix) -> Self {
        let gamma = b.map(|v| v != 0.0);
        SparseCoefState { b, gamma }
    }

    pub fn from_parts(b: Matrix, gamma: nalgebra::DMatrix<bool>) -> Result<Self> {
        if b.shape() != gamma.shape() {
            return Err(Error::Dimension("B and Γ shapes differ".into()));
        }
        let state = SparseCoefState { b, gamma };
        if !state.is_coherent() {
            return Err(Error::Dimension("B has a nonzero entry where Γ is 0".into()));
        }
        Ok(state)
    }

    pub fn p(&self) -> usize {
        self.b.nrows()
    }

    pub fn q(&self) -> usize {
        self.b.ncols()
    }

    /// `Γ[k][j] = 0 ⟹ B[k][j] = 0`.
    pub fn is_coherent(&self) -> bool {
        self.b.iter().zip(self.gamma.iter()).all(|(&b, &g)| g || b == 0.0)
    }

    pub fn set(&mut self, k: usize, j: usize, active: bool, value: f64) {
        self.gamma[(k, j)] = active;
        self.b[(k, j)] = if active { value } else { 0.0 };
    }

    /// Active predictors of response `j`, ascending.
    pub fn active(&self, j: usize) -> Vec<usize> {
        (0..self.p()).filter(|&k| self.gamma[(k, j)]).collect()
    }

    pub fn support_size(&self) -> usize {
        self.gamma.iter().filter(|&&g| g).count()
    }
}

/// DAG on `q` vertices under the fixed parent ordering: every parent of `j`
/// is a larger vertex. Parent lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedDag {
    parents: Vec<Vec<usize>>,
}

impl OrderedDag {
    pub fn empty(q: usize) -> Self {
        OrderedDag {
            parents: vec![Vec::new(); q],
        }
    }

    pub fn from_parents(mut parents: Vec<Vec<usize>>) -> Result<Self> {
        let q = parents.len();
        for (j, pa) in parents.iter_mut().enumerate() {
            pa.sort_unstable();
            pa.dedup();
            if let Some(&bad) = pa.iter().find(|&&i| i <= j || i >= q) {
                return Err(Error::Dimension(format!(
                    "vertex {} cannot be a parent of {} in an ordered DAG on {} vertices",
                    bad + 1,
                    j + 1,
                    q
                )));
            }
        }
        Ok(OrderedDag { parents })
    }

    /// Complete DAG: every larger vertex is a parent.
    pub fn full(q: usize) -> Self {
        OrderedDag {
            parents: (0..q).map(|j| ((j + 1)..q).collect()).collect(),
        }
    }

    pub fn q(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, j: usize) -> &[usize] {
        &self.parents[j]
    }

    pub fn all_parents(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn nu(&self, j: usize) -> usize {
        self.parents[j].len()
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].binary_search(&parent).is_ok()
    }

    pub fn set_parents(&mut self, j: usize, mut pa: Vec<usize>) {
        pa.sort_unstable();
        debug_assert!(pa.iter().all(|&i| i > j && i < self.q()));
        self.parents[j] = pa;
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Edges as `(parent, child)` pairs, ordered by child then parent.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(j, pa)| pa.iter().map(move |&i| (i, j)))
    }

    /// Lower-triangle adjacency indicator over the `q(q−1)/2` ordered pairs,
    /// listed column by column.
    pub fn indicator(&self) -> Vec<bool> {
        let q = self.q();
        let mut out = Vec::with_capacity(q * q.saturating_sub(1) / 2);
        for j in 0..q {
            for i in (j + 1)..q {
                out.push(self.has_edge(i, j));
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct DagJson {
    q: usize,
    parents: BTreeMap<String, Vec<usize>>,
}

impl Serialize for OrderedDag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parents = self
            .parents
            .iter()
            .enumerate()
            .map(|(j, pa)| ((j + 1).to_string(), pa.iter().map(|i| i + 1).collect()))
            .collect();
        DagJson { q: self.q(), parents }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrderedDag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DagJson::deserialize(d)?;
        let mut parents = vec![Vec::new(); raw.q];
        for (key, pa) in raw.parents {
            let j: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("bad vertex label {key:?}")))?;
            if j == 0 || j > raw.q {
                return Err(D::Error::custom(format!("vertex {j} out of range")));
            }
            if pa.contains(&0) {
                return Err(D::Error::custom("vertex labels are 1-based"));
            }
            parents[j - 1] = pa.into_iter().map(|i| i - 1).collect();
        }
        OrderedDag::from_parents(parents).map_err(D::Error::custom)
    }
}

/// Unit lower-triangular `L` and positive diagonal `D` with `Ω = L D⁻¹ Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyPair {
    pub l: Matrix,
    pub d: Vec<f64>,
}

impl CholeskyPair {
    pub fn identity(q: usize) -> Self {
        CholeskyPair {
            l: Matrix::identity(q, q),
            d: vec![1.0; q],
        }
    }

    pub fn new(l: Matrix, d: Vec<f64>) -> Result<Self> {
        let q = d.len();
        if l.shape() != (q, q) {
            return Err(Error::Dimension(format!("L is {:?}, D has {}", l.shape(), q)));
        }
        for j in 0..q {
            if l[(j, j)] != 1.0 || (0..j).any(|c| l[(c, j)] != 0.0) {
                return Err(Error::Dimension("L must be unit lower triangular".into()));
            }
        }
        if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Dimension("D must be positive".into()));
        }
        Ok(CholeskyPair { l, d })
    }

    pub fn q(&self) -> usize {
        self.d.len()
    }

    /// `true` when every off-diagonal nonzero of `L` is an edge of `dag`.
    pub fn supported_by(&self, dag: &OrderedDag) -> bool {
        let q = self.q();
        (0..q).all(|j| ((j + 1)..q).all(|i| self.l[(i, j)] == 0.0 || dag.has_edge(i, j)))
    }

    /// DAG given by the nonzero pattern of `L` (entries with `|L_ij| > tol`).
    pub fn support(&self, tol: f64) -> OrderedDag {
        let q = self.q();
        let parents = (0..q)
            .map(|j| ((j + 1)..q).filter(|&i| self.l[(i, j)].abs() > tol).collect())
            .collect();
        OrderedDag { parents }
    }
}

/// `Ω = L diag(1/d) Lᵀ`, accumulated column by column over the nonzeros of `L`.
pub fn mcd_compose(chol: &CholeskyPair) -> Matrix {
    let q = chol.q();
    let mut omega = Matrix::zeros(q, q);
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(q);
    for j in 0..q {
        nz.clear();
        nz.extend((j..q).map(|i| (i, chol.l[(i, j)])).filter(|&(_, v)| v != 0.0));
        let w = 1.0 / chol.d[j];
        for &(a, la) in &nz {
            for &(b, lb) in &nz {
                omega[(a, b)] += w * la * lb;
            }
        }
    }
    omega
}

/// Modified Cholesky decomposition of an SPD matrix.
pub fn mcd_decompose(omega: &Matrix) -> Result<CholeskyPair> {
    mcd_decompose_with_tolerance(omega, PIVOT_EPS)
}

pub fn mcd_decompose_with_tolerance(omega: &Matrix, rel_eps: f64) -> Result<CholeskyPair> {
    let q = omega.nrows();
    if omega.ncols() != q {
        return Err(Error::Dimension("Ω must be square".into()));
    }
    let max_diag = (0..q).map(|i| omega[(i, i)].abs()).fold(0.0_f64, f64::max);
    let tol = rel_eps * max_diag;
    let mut l = Matrix::identity(q, q);
    let mut delta = vec![0.0; q];
    for j in 0..q {
        let mut pivot = omega[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)] * delta[k];
        }
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        delta[j] = pivot;
        for i in (j + 1)..q {
            let mut s = omega[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)] * delta[k];
            }
            l[(i, j)] = s / pivot;
        }
    }
    Ok(CholeskyPair {
        l,
        d: delta.into_iter().map(|v| 1.0 / v).collect(),
    })
}

/// Blocks of a symmetric matrix `A` indexed by vertex `j` and its parents:
/// `A_jj`, the parent column `A_{D.j}^>`, the parent block `A_D^{>j}` and the
/// Schur complement `A_{j|pa_j} = A_jj − Acolᵀ Ablock⁻¹ Acol`.
#[derive(Debug, Clone)]
pub struct ParentBlocks {
    pub ajj: f64,
    pub acol: Vector,
    pub ablock: Matrix,
    pub schur: f64,
    chol: Cholesky,
}

impl ParentBlocks {
    /// `−Ablock⁻¹ Acol`, the regression of vertex `j` on its parents.
    pub fn regression_mean(&self) -> Vector {
        -self.chol.solve(self.acol.as_slice())
    }

    pub fn log_det_block(&self) -> f64 {
        self.chol.log_det()
    }

    pub fn block_cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn nu(&self) -> usize {
        self.acol.len()
    }
}

/// Extracts the parent blocks of vertex `j`. The Schur complement is computed
/// through a triangular solve against the Cholesky factor of the parent block.
pub fn dag_submatrices(a: &Matrix, dag: &OrderedDag, j: usize) -> Result<ParentBlocks> {
    parent_blocks(a, dag.parents(j), j)
}

pub fn parent_blocks(a: &Matrix, parents: &[usize], j: usize) -> Result<ParentBlocks> {
    let ajj = a[(j, j)];
    let acol = Vector::from_iterator(parents.len(), parents.iter().map(|&i| a[(i, j)]));
    let ablock = principal_submatrix(a, parents);
    let chol = Cholesky::new(&ablock).map_err(|_| Error::SingularBlock { vertex: j })?;
    let w = chol.solve_lower(acol.as_slice());
    let schur = ajj - w.norm_squared();
    Ok(ParentBlocks {
        ajj,
        acol,
        ablock,
        schur,
        chol,
    })
}

/// Residuals `Ê = Y − X B̂` and `Ŝ = n⁻¹ ÊᵀÊ`.
#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    pub e_hat: Matrix,
    pub s_hat: Matrix,
}

impl ErrorEstimate {
    pub fn from_residuals(e_hat: Matrix) -> Self {
        let n = e_hat.nrows() as f64;
        let mut s_hat = e_hat.tr_mul(&e_hat) / n;
        symmetrize(&mut s_hat);
        ErrorEstimate { e_hat, s_hat }
    }

    pub fn n(&self) -> usize {
        self.e_hat.nrows()
    }
}

pub(crate) fn symmetrize(a: &mut Matrix) {
    let q = a.nrows();
    for j in 0..q {
        for i in (j + 1)..q {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}
