//! Machine-readable run records and metric reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::CoverStats;

/// Mean and sample standard deviation of a series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Aggregate {
    /// Sample (n - 1) standard deviation; zero for fewer than two values.
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Aggregate::default();
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        };
        Aggregate { mean, std, count }
    }
}

/// Metrics of a single cover; absent fields were not computed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub nmi: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_score: Option<f64>,
    pub qov: Option<f64>,
    pub num_communities: usize,
    pub overlapping_nodes: usize,
    pub avg_memberships: f64,
}

impl MetricReport {
    pub fn with_stats(stats: CoverStats) -> Self {
        MetricReport {
            num_communities: stats.num_communities,
            overlapping_nodes: stats.num_overlapping_nodes,
            avg_memberships: stats.avg_memberships_of_overlapping,
            ..Default::default()
        }
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
        vec![
            ("nmi", opt(self.nmi)),
            ("precision", opt(self.precision)),
            ("recall", opt(self.recall)),
            ("f_score", opt(self.f_score)),
            ("qov", opt(self.qov)),
            ("communities", self.num_communities.to_string()),
            ("overlapping_nodes", self.overlapping_nodes.to_string()),
            ("avg_memberships", format!("{:.6}", self.avg_memberships)),
        ]
    }

    /// Single line of `key=value` pairs, omitting metrics not computed.
    pub fn to_kv(&self) -> String {
        self.fields()
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn csv_header() -> &'static str {
        "nmi,precision,recall,f_score,qov,communities,overlapping_nodes,avg_memberships"
    }

    pub fn to_csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One repetition of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub index: usize,
    pub seed: u64,
    pub metrics: MetricReport,
    pub seconds: f64,
}

/// Everything needed to reproduce and summarize a command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub iterations: usize,
    pub threshold: f64,
    pub seed: u64,
    pub repetitions: usize,
    /// `(path, sha256 hex)` of every input file.
    pub inputs: Vec<(String, String)>,
    pub runs: Vec<Repetition>,
    pub aggregates: Vec<(String, Aggregate)>,
    pub seconds: f64,
}

impl RunRecord {
    /// Recomputes aggregates from the per-repetition values.
    pub fn summarize(&mut self) {
        self.runs.sort_by_key(|r| r.index);
        let series = |f: &dyn Fn(&MetricReport) -> Option<f64>| -> Option<Aggregate> {
            let values: Option<Vec<f64>> = self.runs.iter().map(|r| f(&r.metrics)).collect();
            values.filter(|v| !v.is_empty()).map(|v| Aggregate::of(&v))
        };
        let mut aggregates = Vec::new();
        type Extract = dyn Fn(&MetricReport) -> Option<f64>;
        let named: [(&str, &Extract); 8] = [
            ("nmi", &|m| m.nmi),
            ("f_score", &|m| m.f_score),
            ("qov", &|m| m.qov),
            ("communities", &|m| Some(m.num_communities as f64)),
            ("overlapping_nodes", &|m| Some(m.overlapping_nodes as f64)),
            ("avg_memberships", &|m| {
                (m.overlapping_nodes > 0).then_some(m.avg_memberships)
            }),
            ("precision", &|m| m.precision),
            ("recall", &|m| m.recall),
        ];
        for (name, f) in named {
            if name == "avg_memberships" {
                // averaged over repetitions that found any overlap
                let values: Vec<f64> = self.runs.iter().filter_map(|r| f(&r.metrics)).collect();
                aggregates.push((name.to_string(), Aggregate::of(&values)));
                continue;
            }
            if let Some(agg) = series(f) {
                aggregates.push((name.to_string(), agg));
            }
        }
        let seconds: Vec<f64> = self.runs.iter().map(|r| r.seconds).collect();
        aggregates.push(("seconds".to_string(), Aggregate::of(&seconds)));
        self.aggregates = aggregates;
    }

    pub fn aggregate(&self, name: &str) -> Option<Aggregate> {
        self.aggregates
            .iter()
            .find(|(k, _)| k == name)
            .map(|&(_, a)| a)
    }

    /// `key=value` summary line with means and standard deviations.
    pub fn summary_line(&self) -> String {
        let mut out = format!(
            "command={} T={} r={} seed={} reps={}",
            self.command, self.iterations, self.threshold, self.seed, self.repetitions
        );
        for (name, agg) in &self.aggregates {
            let _ = write!(
                out,
                " {name}_mean={:.6} {name}_std={:.6}",
                agg.mean, agg.std
            );
        }
        out
    }
}
