//! System-level meta-evaluation: Pearson correlation of metric scores with
//! human judgments, per language pair and averaged across pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combine::SystemReport;
use crate::corpus::HumanScoreTable;
use crate::error::{Error, Result};

/// Sample variance at or below this makes r undefined.
pub const MIN_VARIANCE: f64 = 1e-15;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson r, clamped to `[-1, 1]`.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let dof = (n - 1) as f64;
    let too_flat = |ss: f64| ss.is_nan() || ss / dof <= MIN_VARIANCE;
    if too_flat(sxx) {
        return Err(Error::ZeroVariance { which: "x" });
    }
    if too_flat(syy) {
        return Err(Error::ZeroVariance { which: "y" });
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Which system-level column of a [`SystemReport`] to correlate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "BERTScore")]
    Bert,
    #[serde(rename = "KG")]
    Kg,
    #[serde(rename = "KG-BERTScore")]
    KgBert,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Bert => "BERTScore",
            Metric::Kg => "KG",
            Metric::KgBert => "KG-BERTScore",
        }
    }

    pub fn value(self, r: &SystemReport) -> f64 {
        match self {
            Metric::Bert => r.mean_f_bert,
            Metric::Kg => r.mean_f_kg,
            Metric::KgBert => r.mean_f_kg_bert,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub lang_pair: String,
    pub metric: Metric,
    pub pearson_r: f64,
    pub n_systems: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCorrelation {
    pub metric: Metric,
    pub mean_r: f64,
    /// Language pairs actually scored for this metric.
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Ordered by lang_pair, then metric in the requested order.
    pub rows: Vec<CorrelationRow>,
    pub means: Vec<MeanCorrelation>,
    /// Systems or language pairs excluded from the join.
    pub warnings: Vec<String>,
}

impl CorrelationReport {
    pub fn lang_pairs(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.rows.iter().map(|r| r.lang_pair.as_str()).collect();
        v.dedup();
        v
    }

    pub fn get(&self, lang_pair: &str, metric: Metric) -> Option<&CorrelationRow> {
        self.rows
            .iter()
            .find(|r| r.lang_pair == lang_pair && r.metric == metric)
    }
}

/// Joins system reports with human scores on (lang_pair, system_id) and
/// correlates each requested metric per language pair.
///
/// A language pair absent from the human table is skipped with a warning, as
/// are individual systems present on only one side. A language pair that does
/// have human scores but shares fewer than two systems is an error.
pub fn correlate(reports: &[SystemReport], humans: &HumanScoreTable, metrics: &[Metric]) -> Result<CorrelationReport> {
    let mut by_pair: BTreeMap<&str, Vec<&SystemReport>> = BTreeMap::new();
    for r in reports {
        by_pair.entry(&r.lang_pair).or_default().push(r);
    }

    let mut out = CorrelationReport::default();
    for (lang_pair, mut systems) in by_pair {
        if !humans.has_lang_pair(lang_pair) {
            out.warnings
                .push(format!("lang_pair {lang_pair}: no human scores, omitted"));
            continue;
        }
        systems.sort_by(|a, b| a.system_id.cmp(&b.system_id));

        let mut joined = Vec::with_capacity(systems.len());
        let mut human = Vec::with_capacity(systems.len());
        for s in &systems {
            match humans.get(lang_pair, &s.system_id) {
                Some(h) => {
                    joined.push(*s);
                    human.push(h);
                }
                None => out.warnings.push(format!(
                    "lang_pair {lang_pair}: system {} has no human score, excluded",
                    s.system_id
                )),
            }
        }
        let scored: BTreeSet<&str> = systems.iter().map(|s| s.system_id.as_str()).collect();
        for row in humans.rows().iter().filter(|r| r.lang_pair == lang_pair) {
            if !scored.contains(row.system_id.as_str()) {
                out.warnings.push(format!(
                    "lang_pair {lang_pair}: human-scored system {} has no metric score, excluded",
                    row.system_id
                ));
            }
        }
        if joined.len() < 2 {
            return Err(Error::InsufficientOverlap {
                lang_pair: lang_pair.to_owned(),
                joined: joined.len(),
            });
        }

        for &metric in metrics {
            let xs: Vec<f64> = joined.iter().map(|r| metric.value(r)).collect();
            let pearson_r = pearson(&xs, &human).map_err(|e| Error::Correlation {
                lang_pair: lang_pair.to_owned(),
                metric: metric.name().to_owned(),
                source: Box::new(e),
            })?;
            out.rows.push(CorrelationRow {
                lang_pair: lang_pair.to_owned(),
                metric,
                pearson_r,
                n_systems: joined.len(),
            });
        }
    }
    if out.rows.is_empty() {
        return Err(Error::NothingCorrelated);
    }

    for &metric in metrics {
        let rs: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| r.pearson_r)
            .collect();
        out.means.push(MeanCorrelation {
            metric,
            mean_r: mean(&rs),
            n_pairs: rs.len(),
        });
    }
    Ok(out)
}
