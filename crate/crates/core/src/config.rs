//! Flat key-value run configuration.
//!
//! A run is described by one TOML file of scalar keys; command-line flags
//! override file values key by key. Every key is optional and falls back to a
//! data-dependent default when the sampler configuration is built.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dag_wishart::DagWishartParams;
use crate::error::{Error, Result};
use crate::ess::EssConfig;
use crate::simgen::SimSpec;
use crate::tes::{SizeCap, TesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ess,
    Tes,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ess => "ess",
            Method::Tes => "tes",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ess" => Ok(Method::Ess),
            "tes" => Ok(Method::Tes),
            _ => Err(Error::Config(format!("unknown method {s:?} (expected ess or tes)"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<Method>,
    pub scenario: Option<u8>,
    pub setting: Option<u8>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,

    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,

    pub eta1: Option<f64>,
    pub tau1_sq: Option<f64>,

    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    pub nu0: Option<f64>,
    pub c1: Option<f64>,
    pub cap_rj: Option<usize>,
    pub c3: Option<f64>,
    pub sample_coefficients: Option<bool>,

    pub eta2: Option<f64>,
    pub shape_offset: Option<f64>,
    pub max_parents: Option<usize>,

    pub workers: Option<usize>,
    pub replicates: Option<usize>,
    pub replicate: Option<usize>,
    pub export_csv: Option<bool>,

    /// Simulated bundle directory holding `X.csv` and `Y.csv` (and the truth).
    pub data: Option<PathBuf>,
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub estimates: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        let base = &mut self;
        overlay_fields!(base, top;
            method, scenario, setting, seed, n, p, q, iterations, burn_in, thin,
            eta1, tau1_sq, alpha, kappa, nu0, c1, cap_rj, c3, sample_coefficients,
            eta2, shape_offset, max_parents, workers, replicates, replicate, export_csv,
            data, x, y, truth, estimates, out);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn method(&self) -> Result<Method> {
        self.method
            .ok_or_else(|| Error::Config("no method given (use --method ess|tes)".into()))
    }

    pub fn sim_spec(&self) -> SimSpec {
        SimSpec {
            scenario: self.scenario.unwrap_or(1),
            setting: self.setting.unwrap_or(1),
            seed: self.seed(),
            n: self.n,
            p: self.p,
            q: self.q,
        }
    }

    pub fn dag_params(&self, q: usize) -> DagWishartParams {
        let mut params = DagWishartParams::default_for(q);
        if let Some(v) = self.eta2 {
            params.eta2 = v;
        }
        if let Some(v) = self.shape_offset {
            params.shape_offset = v;
        }
        if let Some(cap) = self.max_parents {
            params.max_parents = Some(vec![cap; q]);
        }
        params
    }

    pub fn ess_config(&self, p: usize, q: usize) -> EssConfig {
        let mut cfg = EssConfig::default_for(p, q);
        cfg.dag = self.dag_params(q);
        if let Some(v) = self.eta1 {
            cfg.eta1 = v;
        }
        if let Some(v) = self.tau1_sq {
            cfg.tau1_sq = v;
        }
        self.apply_chain_lengths(&mut cfg.iterations, &mut cfg.burn_in, &mut cfg.thin);
        cfg.seed = self.seed();
        cfg
    }

    pub fn tes_config(&self, p: usize, q: usize) -> TesConfig {
        let mut cfg = TesConfig::default_for(p, q);
        cfg.dag = self.dag_params(q);
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.nu0 {
            cfg.nu0 = v;
        }
        if let Some(v) = self.c1 {
            cfg.c1 = v;
        }
        if let Some(c3) = self.c3 {
            cfg.cap = SizeCap::Theory { c3 };
        }
        if let Some(r) = self.cap_rj {
            cfg.cap = SizeCap::Fixed(r);
        }
        if let Some(v) = self.sample_coefficients {
            cfg.sample_coefficients = v;
        }
        self.apply_chain_lengths(&mut cfg.iterations, &mut cfg.burn_in, &mut cfg.thin);
        cfg.seed = self.seed();
        cfg
    }

    fn apply_chain_lengths(&self, iterations: &mut usize, burn_in: &mut usize, thin: &mut usize) {
        if let Some(v) = self.iterations {
            *iterations = v;
        }
        if let Some(v) = self.burn_in {
            *burn_in = v;
        }
        if let Some(v) = self.thin {
            *thin = v;
        }
    }

    /// `(X, Y)` paths from explicit keys or the bundle directory.
    pub fn data_paths(&self) -> Result<(PathBuf, PathBuf)> {
        let from_bundle = |name: &str| self.data.as_ref().map(|d| d.join(name));
        let x = self.x.clone().or_else(|| from_bundle("X.csv"));
        let y = self.y.clone().or_else(|| from_bundle("Y.csv"));
        match (x, y) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::Config("fit needs --data DIR or both --x and --y".into())),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml_and_overlays() {
        let file: RunConfig =
            toml::from_str("method = \"tes\"\nseed = 3\nalpha = 0.5\niterations = 100\nburn_in = 10\ncap_rj = 4\n")
                .unwrap();
        let cli = RunConfig {
            alpha: Some(0.9),
            ..Default::default()
        };
        let cfg = file.overlay(&cli);
        assert_eq!(cfg.method, Some(Method::Tes));
        assert_eq!(cfg.alpha, Some(0.9));
        let tes = cfg.tes_config(10, 3);
        assert_eq!(tes.alpha, 0.9);
        assert_eq!(tes.iterations, 100);
        assert_eq!(tes.burn_in, 10);
        assert_eq!(tes.seed, 3);
        assert_eq!(tes.cap, SizeCap::Fixed(4));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("alpah = 0.5\n").is_err());
        assert!("gibbs".parse::<Method>().is_err());
    }

    #[test]
    fn defaults_follow_dimensions() {
        let cfg = RunConfig::default();
        let ess = cfg.ess_config(50, 10);
        assert_eq!(ess.eta1, 1.0 / 50.0);
        assert_eq!(ess.dag.eta2, 0.1);
        assert!(cfg.data_paths().is_err());
        let with_bundle = RunConfig {
            data: Some("b".into()),
            ..Default::default()
        };
        assert_eq!(with_bundle.data_paths().unwrap().1, PathBuf::from("b/Y.csv"));
    }
}
