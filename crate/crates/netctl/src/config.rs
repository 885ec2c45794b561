//! Experiment configuration: one JSON document drives every command.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A power-law exponent that may be infinite (the Erdos-Renyi limit).
/// Serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gamma(pub f64);

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Gamma(x)),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "er" => Ok(Gamma(f64::INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Target selection: an explicit node list or a count to sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Nodes(Vec<usize>),
    Count { count: usize },
}

/// Final-output specification: explicit values or a random unit vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YfSpec {
    Values(Vec<f64>),
    Mode(String), // "random-unit"
}

/// Paths to full cost matrices in CSV form (rows of comma- or
/// whitespace-separated numbers).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostPaths {
    pub q: Option<PathBuf>,
    pub m: Option<PathBuf>,
    pub r: Option<PathBuf>,
}

fn default_tf() -> f64 {
    1.0
}
fn default_digits() -> u32 {
    100
}
fn default_n_d() -> f64 {
    0.5
}
fn default_fractions() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}
fn default_samples() -> usize {
    50
}
fn default_zeta() -> Vec<f64> {
    vec![0.0, 1.0, 10.0]
}
fn default_replicas() -> usize {
    20
}
fn default_seed() -> u64 {
    1
}
fn default_report_points() -> usize {
    1001
}
fn default_quadrature_nodes() -> usize {
    crate::quad::DEFAULT_NODES
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    // network source: generation parameters ...
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub gamma_in: Option<Gamma>,
    #[serde(default)]
    pub gamma_out: Option<Gamma>,
    #[serde(default)]
    pub k_av: Option<f64>,
    // ... or an edge-list file ...
    #[serde(default)]
    pub edge_list: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub directed: bool,
    // ... or a previously generated network JSON
    #[serde(default)]
    pub network_file: Option<PathBuf>,

    // drivers: explicit list, absolute count, or fraction of n
    #[serde(default)]
    pub drivers: Option<Vec<usize>>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_n_d")]
    pub n_d: f64,

    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_tf")]
    pub tf: f64,
    #[serde(default = "default_digits")]
    pub digits: u32,

    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,

    #[serde(default = "default_zeta")]
    pub zeta: Vec<f64>,
    #[serde(default)]
    pub cost: Option<CostPaths>,

    // single-problem boundary data
    #[serde(default)]
    pub targets: Option<TargetSpec>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub yf: Option<YfSpec>,
    #[serde(default)]
    pub free_response: bool,

    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub iterations: Option<u64>,

    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_report_points")]
    pub report_points: usize,
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let sources = [
            self.n.is_some() || self.k_av.is_some(),
            self.edge_list.is_some(),
            self.network_file.is_some(),
        ]
        .iter()
        .filter(|&&s| s)
        .count();
        if sources != 1 {
            return Err(Error::Config(
                "exactly one network source is required: generation parameters (n, k_av), \
                 edge_list, or network_file"
                    .into(),
            ));
        }
        if self.n.is_some() != self.k_av.is_some() {
            return Err(Error::Config(
                "generation needs both n and k_av".into(),
            ));
        }
        if !(self.n_d > 0.0 && self.n_d <= 1.0) {
            return Err(Error::Config(format!(
                "driver fraction n_d must lie in (0, 1], got {}",
                self.n_d
            )));
        }
        if self.digits < 16 {
            return Err(Error::Config(format!(
                "digits must be at least 16, got {}",
                self.digits
            )));
        }
        if !(self.tf > self.t0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got [{}, {}]",
                self.t0, self.tf
            )));
        }
        if let Some(YfSpec::Mode(mode)) = &self.yf {
            if mode != "random-unit" {
                return Err(Error::Config(format!(
                    "unknown yf mode {mode:?}; expected an array or \"random-unit\""
                )));
            }
        }
        Ok(())
    }
}

/// Read a dense matrix from rows of comma- or whitespace-separated numbers.
pub fn load_matrix_csv(path: &Path) -> Result<ndarray::Array2<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read matrix {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|tok| !tok.is_empty())
            .map(str::parse::<f64>)
            .collect();
        let row = row.map_err(|e| Error::Config(format!(
            "bad number in {} line {}: {e}",
            path.display(),
            i + 1
        )))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Config(format!(
                    "ragged matrix in {} at line {}",
                    path.display(),
                    i + 1
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("empty matrix file {}", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(ndarray::Array2::from_shape_fn((r, c), |(i, j)| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_paper_parameters() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"n": 100, "k_av": 2.5}"#).unwrap();
        assert_eq!(cfg.t0, 0.0);
        assert_eq!(cfg.tf, 1.0);
        assert_eq!(cfg.digits, 100);
        assert_eq!(cfg.samples, 50);
        assert_eq!(cfg.n_d, 0.5);
        assert_eq!(cfg.fractions.len(), 10);
        assert_eq!(cfg.zeta, vec![0.0, 1.0, 10.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn gamma_accepts_inf_string() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"n": 10, "k_av": 2.0, "gamma_in": "inf", "gamma_out": 2.5}"#)
                .unwrap();
        assert!(cfg.gamma_in.unwrap().0.is_infinite());
        assert_eq!(cfg.gamma_out.unwrap().0, 2.5);
    }

    #[test]
    fn exactly_one_source_enforced() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"n": 10, "k_av": 2.0, "edge_list": "x.txt"}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: std::result::Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"n": 10, "k_av": 2.0, "typo_key": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn digits_floor() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"n": 10, "k_av": 2.0, "digits": 8}"#).unwrap();
        assert!(cfg.validate().is_err());
    }
}
