//! Selection scores, relative precision-matrix errors and the effective
//! sample size diagnostic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::OrderedDag;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn from_pairs<I: IntoIterator<Item = (bool, bool)>>(pairs: I) -> Self {
        let mut c = ConfusionCounts::default();
        for (est, truth) in pairs {
            match (est, truth) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    /// Entry-wise comparison of two indicator matrices.
    pub fn from_matrices(est: &DMatrix<bool>, truth: &DMatrix<bool>) -> Result<Self> {
        if est.shape() != truth.shape() {
            return Err(Error::Dimension(format!(
                "estimate is {:?} but truth is {:?}",
                est.shape(),
                truth.shape()
            )));
        }
        Ok(Self::from_pairs(est.iter().copied().zip(truth.iter().copied())))
    }

    /// Comparison over the `q(q−1)/2` ordered vertex pairs.
    pub fn from_dags(est: &OrderedDag, truth: &OrderedDag) -> Result<Self> {
        if est.q() != truth.q() {
            return Err(Error::Dimension(format!(
                "DAGs have {} and {} vertices",
                est.q(),
                truth.q()
            )));
        }
        Ok(Self::from_pairs(est.indicator().into_iter().zip(truth.indicator())))
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn scores(&self) -> SelectionScores {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        let mcc = (den > 0.0).then(|| ((tp * tn - fp * fn_) / den.sqrt()).clamp(-1.0, 1.0));
        SelectionScores {
            precision: ratio(self.tp, self.tp + self.fp),
            sensitivity: ratio(self.tp, self.tp + self.fn_),
            specificity: ratio(self.tn, self.tn + self.fp),
            mcc,
        }
    }
}

/// Selection scores; `None` marks an undefined ratio (zero denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScores {
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub mcc: Option<f64>,
}

impl SelectionScores {
    pub fn named(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("sensitivity", self.sensitivity),
            ("specificity", self.specificity),
            ("precision", self.precision),
            ("mcc", self.mcc),
        ]
    }
}

pub fn selection_metrics(est: &DMatrix<bool>, truth: &DMatrix<bool>) -> Result<SelectionScores> {
    Ok(ConfusionCounts::from_matrices(est, truth)?.scores())
}

pub fn dag_selection_metrics(est: &OrderedDag, truth: &OrderedDag) -> Result<SelectionScores> {
    Ok(ConfusionCounts::from_dags(est, truth)?.scores())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrors {
    /// Maximum absolute column sum.
    pub e1: f64,
    /// Spectral norm.
    pub e2: f64,
    /// Frobenius norm.
    pub e3: f64,
    /// Entry-wise maximum.
    pub e4: f64,
}

impl RelativeErrors {
    pub fn named(&self) -> [(&'static str, f64); 4] {
        [("E1", self.e1), ("E2", self.e2), ("E3", self.e3), ("E4", self.e4)]
    }
}

pub fn l1_norm(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn relative_errors(omega_hat: &Matrix, omega0: &Matrix) -> Result<RelativeErrors> {
    if omega_hat.shape() != omega0.shape() {
        return Err(Error::Dimension(format!(
            "estimate is {:?} but truth is {:?}",
            omega_hat.shape(),
            omega0.shape()
        )));
    }
    if omega0.amax() == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = omega_hat - omega0;
    Ok(RelativeErrors {
        e1: l1_norm(&diff) / l1_norm(omega0),
        e2: spectral_norm(&diff) / spectral_norm(omega0),
        e3: diff.norm() / omega0.norm(),
        e4: diff.amax() / omega0.amax(),
    })
}

/// Single-chain effective sample size with Geyer's initial monotone sequence
/// truncation of the autocorrelation sum. Constant series return their length.
pub fn effective_sample_size(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 8 {
        return Err(Error::TooShort(n));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let scale = mean.abs().max(centered.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if var0 <= (1e-14 * scale).powi(2) {
        return Ok(n as f64);
    }
    let rho = |lag: usize| {
        let s: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        s / n as f64 / var0
    };

    // Pair sums Γ_m = ρ_{2m} + ρ_{2m+1}; stop at the first non-positive pair,
    // enforcing monotone non-increase.
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let mut pair = rho(2 * m) + rho(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        if pair > prev {
            pair = prev;
        }
        sum += pair;
        prev = pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    Ok((n as f64 / tau).min(n as f64))
}
