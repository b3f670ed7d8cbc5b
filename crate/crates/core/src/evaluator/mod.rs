//! Precision/recall/F1 scoring, experiment runs over hypernym levels, and
//! synthetic data for desk-scale end-to-end checks.

mod experiment;
pub mod fixture;

pub use experiment::{evaluate_level, run_experiment, ExperimentEnv, ExperimentResult, ExperimentSpec, LevelResult};
pub use fixture::{make_synthetic_fixture, random_embeddings, random_taxonomy, FixtureSpec, SyntheticFixture};

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::inventory::SenseId;

/// A system answer for one instance, already mapped to the evaluation level.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPrediction {
    pub instance_id: String,
    pub label: SenseId,
    pub inside_anchor_ball: bool,
}

/// Counts behind the usual WSD scores. Instances without an answer count
/// against recall only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalReport {
    pub attempted: usize,
    pub correct: usize,
    pub total_gold: usize,
    pub skipped: usize,
    /// Attempted instances whose output vector fell inside the chosen anchor ball.
    pub inside: usize,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        frac(self.correct, self.attempted)
    }

    pub fn recall(&self) -> f64 {
        frac(self.correct, self.total_gold)
    }

    /// `2PR/(P+R)`, computed as `2c/(a+g)` so it is exact up to one rounding.
    pub fn f1(&self) -> f64 {
        if self.correct == 0 {
            0.0
        } else {
            frac(2 * self.correct, self.attempted + self.total_gold)
        }
    }

    pub fn inside_ball_rate(&self) -> f64 {
        frac(self.inside, self.attempted)
    }
}

fn frac(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Scores `predictions` against `gold`, both keyed by instance id.
pub fn score(predictions: &[LabeledPrediction], gold: &BTreeMap<String, SenseId>) -> Result<EvalReport> {
    let mut seen = HashSet::with_capacity(predictions.len());
    let mut report = EvalReport {
        total_gold: gold.len(),
        ..EvalReport::default()
    };
    for p in predictions {
        let g = gold
            .get(&p.instance_id)
            .ok_or_else(|| Error::UnknownInstance(p.instance_id.clone()))?;
        if !seen.insert(p.instance_id.as_str()) {
            return Err(Error::DuplicateInstance(p.instance_id.clone()));
        }
        report.attempted += 1;
        report.correct += usize::from(&p.label == g);
        report.inside += usize::from(p.inside_anchor_ball);
    }
    report.skipped = report.total_gold - report.attempted;
    Ok(report)
}

/// One row per dataset and level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<(String, usize, EvalReport)>,
}

impl ReportTable {
    pub fn push(&mut self, dataset: impl Into<String>, level: usize, report: EvalReport) {
        self.rows.push((dataset.into(), level, report));
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("dataset\tlevel\tprecision\trecall\tf1\tattempted\tcorrect\tskipped\ttotal\tinside_ball_rate\n");
        for (name, level, r) in &self.rows {
            let _ = writeln!(
                s,
                "{name}\t{level}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{:.6}",
                r.precision(),
                r.recall(),
                r.f1(),
                r.attempted,
                r.correct,
                r.skipped,
                r.total_gold,
                r.inside_ball_rate()
            );
        }
        s
    }
}

impl fmt::Display for ReportTable {
    /// Datasets down the side, levels across, F1 in percent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut levels: Vec<usize> = self.rows.iter().map(|r| r.1).collect();
        levels.sort_unstable();
        levels.dedup();
        let mut names: Vec<&str> = Vec::new();
        for (n, _, _) in &self.rows {
            if !names.contains(&n.as_str()) {
                names.push(n);
            }
        }
        let w = names.iter().map(|n| n.len()).max().unwrap_or(0).max(7);
        write!(f, "{:<w$}", "dataset")?;
        for l in &levels {
            write!(f, "  {:>7}", format!("L{l} F1"))?;
        }
        writeln!(f)?;
        for name in names {
            write!(f, "{name:<w$}")?;
            for l in &levels {
                match self.rows.iter().find(|(n, lv, _)| n == name && lv == l) {
                    Some((_, _, r)) => write!(f, "  {:>6.1}%", 100.0 * r.f1())?,
                    None => write!(f, "  {:>7}", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
