//! Per-model summaries and paired comparisons grouped by research question.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{Metric, MetricsReport};
use super::stats::{holm_sidak, paired_t_test, significance_marker};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub test_user: String,
    pub report: MetricsReport,
}

/// Per-round metrics for every evaluated model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundTable {
    pub models: BTreeMap<EstimatorKind, Vec<RoundMetrics>>,
}

impl RoundTable {
    /// Mean of a metric over the rounds where it is defined.
    pub fn mean(&self, kind: EstimatorKind, metric: Metric) -> Option<f64> {
        let vals: Vec<f64> = self.models.get(&kind)?.iter().filter_map(|r| metric.value(&r.report)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn summary(&self) -> Vec<ModelSummary> {
        self.models
            .iter()
            .map(|(&kind, rounds)| ModelSummary {
                kind,
                n_rounds: rounds.len(),
                means: Metric::ALL.iter().map(|&m| (m, self.mean(kind, m))).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub kind: EstimatorKind,
    pub n_rounds: usize,
    pub means: BTreeMap<Metric, Option<f64>>,
}

/// Model pairs compared for each question; each (question, metric) is one
/// family for the multiple-comparison adjustment.
pub fn question_groups() -> Vec<(&'static str, Vec<(EstimatorKind, EstimatorKind)>)> {
    use EstimatorKind::*;
    vec![
        ("Q1", vec![(Baseline1, Logistic), (Baseline2, Logistic), (Baseline3, Logistic), (Baseline1, Nn)]),
        ("Q2", vec![(Logistic, Nn)]),
        ("Q3", vec![(Nn, PatternNn), (BaselineNn, PatternBaselineNn)]),
        ("Q4", vec![(PatternNn, PatternBaselineNn)]),
        ("Q5", vec![(PatternSessionalNn, PatternNn), (PatternCategoryNn, PatternNn)]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub question: String,
    pub model1: EstimatorKind,
    pub model2: EstimatorKind,
    pub metric: Metric,
    pub mean1: Option<f64>,
    pub mean2: Option<f64>,
    /// Rounds where both models have the metric defined.
    pub n_pairs: usize,
    pub t: Option<f64>,
    pub raw_p: Option<f64>,
    pub adjusted_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn get(&self, model1: EstimatorKind, model2: EstimatorKind, metric: Metric) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.model1 == model1 && e.model2 == model2 && e.metric == metric)
    }
}

fn paired_values(
    table: &RoundTable,
    a: EstimatorKind,
    b: EstimatorKind,
    metric: Metric,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ra = &table.models[&a];
    let rb = &table.models[&b];
    let rounds_a: Vec<usize> = ra.iter().map(|r| r.round).collect();
    let rounds_b: Vec<usize> = rb.iter().map(|r| r.round).collect();
    if rounds_a != rounds_b {
        return Err(Error::Pairing(format!("{a} and {b} were evaluated on different rounds")));
    }
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    for (x, y) in ra.iter().zip(rb) {
        if let (Some(u), Some(v)) = (metric.value(&x.report), metric.value(&y.report)) {
            xa.push(u);
            xb.push(v);
        }
    }
    Ok((xa, xb))
}

/// Paired t-tests over rounds for every question pair present in `table`,
/// Holm–Šidák-adjusted within each (question, metric) family.
pub fn paired_comparisons(table: &RoundTable) -> Result<ComparisonReport> {
    let mut entries = Vec::new();
    for (question, pairs) in question_groups() {
        let pairs: Vec<_> =
            pairs.into_iter().filter(|(a, b)| table.models.contains_key(a) && table.models.contains_key(b)).collect();
        for metric in Metric::ALL {
            let mut family = Vec::new();
            for &(a, b) in &pairs {
                let (xa, xb) = paired_values(table, a, b, metric)?;
                let test = if xa.len() >= 2 { Some(paired_t_test(&xa, &xb)?) } else { None };
                family.push(ComparisonEntry {
                    question: question.to_string(),
                    model1: a,
                    model2: b,
                    metric,
                    mean1: table.mean(a, metric),
                    mean2: table.mean(b, metric),
                    n_pairs: xa.len(),
                    t: test.map(|t| t.t),
                    raw_p: test.map(|t| t.p),
                    adjusted_p: None,
                });
            }
            let tested: Vec<usize> = (0..family.len()).filter(|&i| family[i].raw_p.is_some()).collect();
            let adjusted = holm_sidak(&tested.iter().map(|&i| family[i].raw_p.unwrap()).collect::<Vec<_>>());
            for (&i, adj) in tested.iter().zip(adjusted) {
                family[i].adjusted_p = Some(adj);
            }
            entries.extend(family);
        }
    }
    Ok(ComparisonReport { entries })
}

fn render_table(rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..n_cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        if i == 0 {
            writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")).unwrap();
        }
    }
    out
}

fn metric_headers() -> Vec<String> {
    Metric::ALL.iter().map(|m| format!("{} ({})", m.name(), m.unit())).collect()
}

/// Aligned text table of mean metrics per model; undefined cells show as `\`.
pub fn performance_text(table: &RoundTable) -> String {
    let mut rows = vec![[vec!["model".to_string(), "rounds".to_string()], metric_headers()].concat()];
    for s in table.summary() {
        let mut row = vec![s.kind.display_name().to_string(), s.n_rounds.to_string()];
        for m in Metric::ALL {
            row.push(s.means[&m].map_or_else(|| "\\".to_string(), |v| m.display(v)));
        }
        rows.push(row);
    }
    render_table(&rows)
}

/// Aligned text table of comparisons: `before->after (adjusted p)` with
/// significance markers.
pub fn comparison_text(report: &ComparisonReport) -> String {
    let mut rows =
        vec![[vec!["question".to_string(), "model1".to_string(), "model2".to_string()], metric_headers()].concat()];
    let mut seen: Vec<(String, EstimatorKind, EstimatorKind)> = Vec::new();
    for e in &report.entries {
        let key = (e.question.clone(), e.model1, e.model2);
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    for (q, a, b) in seen {
        let mut row = vec![q.clone(), a.display_name().to_string(), b.display_name().to_string()];
        for m in Metric::ALL {
            let cell = match report
                .entries
                .iter()
                .find(|e| e.question == q && e.model1 == a && e.model2 == b && e.metric == m)
            {
                Some(ComparisonEntry { mean1: Some(x), mean2: Some(y), adjusted_p, .. }) => match adjusted_p {
                    Some(p) => format!("{}->{} ({:.2}{})", m.display(*x), m.display(*y), p, significance_marker(*p)),
                    None => format!("{}->{}", m.display(*x), m.display(*y)),
                },
                _ => "\\".to_string(),
            };
            row.push(cell);
        }
        rows.push(row);
    }
    render_table(&rows)
}
