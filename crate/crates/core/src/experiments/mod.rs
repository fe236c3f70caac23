//! Seeded Monte Carlo suites that compare empirical graph statistics with
//! the closed-form laws in [`crate::theory`].
//!
//! Every suite is described by an [`ExperimentSpec`]. Replication `r` at the
//! `k`-th entry of `n_list` uses the seed
//! `derive_replication_seed(base_seed, k·replications + r)`, so a table is a
//! pure function of its spec: worker count and completion order never show
//! up in the output.

mod emit;
mod run;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_rate, EdgeDistanceFamily, FamilyRule, TheoryBounds};
use crate::theory::{edge_distance, SeriesClass};

pub use emit::{
    emit, manifest_path, parse_json_rows, read_spec_or_manifest, render_csv, render_json,
    write_manifest, Format, Manifest, CSV_HEADER,
};
pub use run::{
    run, run_containment, run_degree_law, run_edge_slln, run_threshold_dichotomy, run_uniform_slln,
    RunOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DegreeLaw,
    EdgeSlln,
    UniformSlln,
    Containment,
    Threshold,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::DegreeLaw => "degree-law",
            ExperimentKind::EdgeSlln => "edge-slln",
            ExperimentKind::UniformSlln => "uniform-slln",
            ExperimentKind::Containment => "containment",
            ExperimentKind::Threshold => "threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "degree-law" => ExperimentKind::DegreeLaw,
            "edge-slln" => ExperimentKind::EdgeSlln,
            "uniform-slln" => ExperimentKind::UniformSlln,
            "containment" => ExperimentKind::Containment,
            "threshold" => ExperimentKind::Threshold,
            _ => return None,
        })
    }
}

/// y ∈ {0.05, 0.10, …, 1.00}.
pub fn default_y_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_list: Vec<usize>,
    pub d: usize,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<EdgeDistanceFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_grid: Option<Vec<f64>>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl ExperimentSpec {
    /// Checks the spec against the requirements of its kind.
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("n_list", "must not be empty"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_list", "must be strictly increasing"));
        }
        if self.n_list[0] < 2 {
            return Err(Error::invalid("n_list", "every n must be at least 2"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        check_rate(self.lambda)?;

        match self.kind {
            ExperimentKind::DegreeLaw | ExperimentKind::EdgeSlln => {
                let fam = self.require_family()?;
                match fam.rule {
                    FamilyRule::LogRegime { c } if c.is_finite() => {}
                    FamilyRule::LogRegime { .. } => {
                        return Err(Error::invalid(
                            "c",
                            "experiments need a finite regime constant",
                        ))
                    }
                    FamilyRule::PowerFamily { .. } => {
                        return Err(Error::invalid(
                            "family",
                            format!("{} runs in the log regime only", self.kind.as_str()),
                        ))
                    }
                }
                self.check_edge_distances(&fam)?;
            }
            ExperimentKind::Threshold => {
                let fam = self.require_family()?;
                if let FamilyRule::LogRegime { c } = fam.rule {
                    if c.is_infinite() {
                        return Err(Error::invalid(
                            "c",
                            "experiments need a finite regime constant",
                        ));
                    }
                }
                self.check_edge_distances(&fam)?;
            }
            ExperimentKind::UniformSlln => {
                let grid = self
                    .y_grid
                    .as_ref()
                    .ok_or_else(|| Error::invalid("y_grid", "uniform-slln needs a y grid"))?;
                if grid.is_empty() {
                    return Err(Error::invalid("y_grid", "must not be empty"));
                }
                if grid.iter().any(|y| !(0.0..=1.0).contains(y)) {
                    return Err(Error::invalid("y_grid", "values must lie in [0, 1]"));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("y_grid", "must be strictly increasing"));
                }
                if *grid.last().expect("nonempty") <= 0.0 {
                    return Err(Error::invalid("y_grid", "needs a positive value"));
                }
            }
            ExperimentKind::Containment => match self.epsilon {
                Some(e) if e >= 0.0 && e.is_finite() => {}
                _ => {
                    return Err(Error::invalid(
                        "epsilon",
                        "containment needs a finite epsilon >= 0",
                    ))
                }
            },
        }
        Ok(())
    }

    fn require_family(&self) -> Result<EdgeDistanceFamily> {
        let fam = self.family.ok_or_else(|| {
            Error::invalid(
                "family",
                format!("{} needs an edge-distance family", self.kind.as_str()),
            )
        })?;
        if fam.d != self.d || fam.lambda != self.lambda {
            return Err(Error::invalid(
                "family",
                "family dimension and rate must match the experiment",
            ));
        }
        Ok(fam)
    }

    fn check_edge_distances(&self, fam: &EdgeDistanceFamily) -> Result<()> {
        for &n in &self.n_list {
            let y = edge_distance(fam, n as u64)?;
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::invalid(
                    "family",
                    format!("edge distance at n = {n} is {y}; it must be positive and finite"),
                ));
            }
        }
        Ok(())
    }
}

/// One line of a result table. Fields that do not apply to the experiment
/// kind are `None` and render as blanks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub family: Option<String>,
    pub param1: Option<f64>,
    pub param2: Option<f64>,
    pub replication: usize,
    pub seed: u64,
    pub y_n: Option<f64>,
    pub epsilon_n: Option<u64>,
    pub min_degree: Option<u64>,
    pub max_degree: Option<u64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub p_y: Option<f64>,
    pub gap: Option<f64>,
    pub contained: Option<bool>,
    pub has_edge: Option<bool>,
}

impl ResultRow {
    pub(crate) fn blank(spec: &ExperimentSpec, n: usize, replication: usize, seed: u64) -> Self {
        let (family, param1, param2) = match (spec.kind, spec.family) {
            (ExperimentKind::UniformSlln, _) => (Some("grid".to_string()), None, None),
            (ExperimentKind::Containment, _) => (Some("radius".to_string()), spec.epsilon, None),
            (_, Some(f)) => {
                let (p1, p2) = f.params();
                (Some(f.label().to_string()), Some(p1), p2)
            }
            (_, None) => (None, None, None),
        };
        ResultRow {
            experiment: spec.kind,
            n,
            d: spec.d,
            lambda: spec.lambda,
            family,
            param1,
            param2,
            replication,
            seed,
            y_n: None,
            epsilon_n: None,
            min_degree: None,
            max_degree: None,
            min_ratio: None,
            max_ratio: None,
            p_y: None,
            gap: None,
            contained: None,
            has_edge: None,
        }
    }
}

/// Mean, sample standard deviation and range of a set of replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// max − min across replications.
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Per-n aggregate over replications. Only the fields relevant to the
/// experiment kind are populated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    pub replications: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<Stat>,
    /// λ^d, the min-degree limsup constant as stated in the theorem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_limsup_statement: Option<f64>,
    /// (2λ)^d, the constant the theorem's proof actually reaches.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_limsup_proof_envelope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_relative_gap: Option<f64>,
    /// sup over the y grid of the gap, one value per replication.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_gap: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// n·d·e^{−λR_n}, the union bound on some coordinate exceeding R_n.
    /// Exceeds 1 (vacuous) whenever (1+ε)/d < 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_union_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub containment_frequency: Option<f64>,
    /// n·e^{−λdR_n} = n^{−ε}, the union bound on some point having every
    /// coordinate above R_n.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner_escape_bound: Option<f64>,
    /// Frequency of replications in which no point has every coordinate above R_n.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner_free_frequency: Option<f64>,
    /// C(n,2)·p(y_n), the first-moment prediction of the edge count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_edges: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_frequency: Option<f64>,
}

/// Output of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<NSummary>,
    /// Degree-theorem constants shared by every degree-law row.
    pub bounds: Option<TheoryBounds>,
    pub series: Option<SeriesClass>,
}

impl ResultTable {
    pub fn summary(&self, n: usize) -> Option<&NSummary> {
        self.summaries.iter().find(|s| s.n == n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_spec(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            n_list: vec![100, 200],
            d: 2,
            lambda: 1.0,
            family: Some(EdgeDistanceFamily::log_regime(2.0, 1.0, 2).unwrap()),
            y_grid: None,
            replications: 2,
            base_seed: 1,
            epsilon: None,
        }
    }

    #[test]
    fn validation_rules() {
        assert!(log_spec(ExperimentKind::DegreeLaw).validate().is_ok());

        let mut s = log_spec(ExperimentKind::DegreeLaw);
        s.n_list = vec![200, 100];
        assert!(s.validate().is_err());
        s.n_list = vec![100, 100];
        assert!(s.validate().is_err());
        s.n_list = vec![1, 100];
        assert!(s.validate().is_err());

        let mut s = log_spec(ExperimentKind::EdgeSlln);
        s.replications = 0;
        assert!(s.validate().is_err());

        let mut s = log_spec(ExperimentKind::DegreeLaw);
        s.family = Some(EdgeDistanceFamily::power(1.0, 3.0, 1.0, 2).unwrap());
        assert!(s.validate().is_err());
        s.kind = ExperimentKind::Threshold;
        assert!(s.validate().is_ok());

        let mut s = log_spec(ExperimentKind::DegreeLaw);
        s.family = Some(EdgeDistanceFamily::log_regime(2.0, 1.0, 3).unwrap());
        assert!(s.validate().is_err());

        let mut s = log_spec(ExperimentKind::Containment);
        assert!(s.validate().is_err());
        s.epsilon = Some(0.5);
        assert!(s.validate().is_ok());

        let mut s = log_spec(ExperimentKind::UniformSlln);
        assert!(s.validate().is_err());
        s.y_grid = Some(default_y_grid());
        assert!(s.validate().is_ok());
        s.y_grid = Some(vec![0.5, 1.5]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn vanishing_edge_distance_is_rejected() {
        let mut s = log_spec(ExperimentKind::Threshold);
        s.d = 1;
        // α·n^{−β} underflows to 0
        s.family = Some(EdgeDistanceFamily::power(1e-300, 200.0, 1.0, 1).unwrap());
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let mut s = log_spec(ExperimentKind::UniformSlln);
        s.y_grid = Some(default_y_grid());
        let back: ExperimentSpec =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn stat_basics() {
        let s = Stat::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sd, 1.0);
        assert_eq!(s.spread(), 2.0);
        assert_eq!(Stat::of(&[4.0]).unwrap().sd, 0.0);
        assert!(Stat::of(&[]).is_none());
    }

    #[test]
    fn kind_names() {
        for k in [
            ExperimentKind::DegreeLaw,
            ExperimentKind::EdgeSlln,
            ExperimentKind::UniformSlln,
            ExperimentKind::Containment,
            ExperimentKind::Threshold,
        ] {
            assert_eq!(ExperimentKind::parse(k.as_str()), Some(k));
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
    }
}
