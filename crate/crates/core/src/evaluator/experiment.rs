use std::collections::BTreeMap;

use super::{score, EvalReport, LabeledPrediction};
use crate::corpus::{lift_to_level, TrainingRecord};
use crate::embedding::EmbeddingTable;
use crate::encoder::{forward, record_inputs, train, EncoderParams, TrainConfig};
use crate::error::{Error, Result};
use crate::geometry::{BallConfiguration, GeometryConfig};
use crate::inventory::{Inventory, SenseId};
use crate::selector::{candidate_set, select_sense, Prediction};

/// Train on one dataset at one level, then evaluate on another at several.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub train_dataset: String,
    pub test_dataset: String,
    pub train_level: usize,
    pub eval_levels: Vec<usize>,
    pub train: TrainConfig,
}

impl ExperimentSpec {
    fn validate(&self, env: &ExperimentEnv) -> Result<()> {
        if self.train_level > 1 {
            return Err(Error::Config(format!("train level must be 0 or 1, got {}", self.train_level)));
        }
        if let Some(l) = self.eval_levels.iter().find(|&&l| l > 4) {
            return Err(Error::Config(format!("evaluation level must be in 0..=4, got {l}")));
        }
        for name in [&self.train_dataset, &self.test_dataset] {
            if !env.datasets.contains_key(name) {
                return Err(Error::MissingDataset(name.clone()));
            }
        }
        Ok(())
    }
}

/// Everything an experiment reads. Datasets hold unlifted records.
#[derive(Debug, Clone)]
pub struct ExperimentEnv {
    pub inventory: Inventory,
    pub balls: BallConfiguration,
    pub embeddings: EmbeddingTable,
    pub geometry: GeometryConfig,
    pub datasets: BTreeMap<String, Vec<TrainingRecord>>,
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub report: EvalReport,
    /// Answers in test-set order, keyed by instance id.
    pub predictions: Vec<(String, Prediction)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub params: EncoderParams,
    pub curve: Vec<f64>,
    pub levels: Vec<LevelResult>,
    /// Same-word sense pairs whose direct hypernyms coincide.
    pub collisions: Vec<(SenseId, SenseId)>,
}

impl ExperimentResult {
    pub fn level(&self, level: usize) -> Option<&EvalReport> {
        self.levels.iter().find(|l| l.level == level).map(|l| &l.report)
    }
}

/// Scores `params` on `test` lifted to `level`. Instance ids are
/// `{dataset}.{position in test}`, so they are stable across levels.
pub fn evaluate_level(
    params: &EncoderParams,
    dataset: &str,
    test: &[TrainingRecord],
    level: usize,
    env: &ExperimentEnv,
    window: usize,
) -> Result<LevelResult> {
    let mut gold = BTreeMap::new();
    let mut labelled = Vec::new();
    let mut predictions = Vec::new();
    for (i, r) in test.iter().enumerate() {
        let Ok(Some(anchor)) = env.inventory.hypernym_at(&r.original, level) else {
            continue;
        };
        if !env.balls.has(&anchor) {
            continue;
        }
        let id = format!("{dataset}.{i}");
        gold.insert(id.clone(), anchor);
        let candidates = candidate_set(&r.original.lemma, r.original.pos, level, &env.inventory, &env.balls);
        if candidates.is_empty() {
            continue;
        }
        let (t, c) = record_inputs(r, &env.embeddings, window)?;
        let v = forward(params, &t, &c)?;
        let p = select_sense(&v, &candidates, &env.geometry)?;
        labelled.push(LabeledPrediction {
            instance_id: id.clone(),
            label: p.anchor.clone(),
            inside_anchor_ball: p.inside_anchor_ball,
        });
        predictions.push((id, p));
    }
    Ok(LevelResult {
        level,
        report: score(&labelled, &gold)?,
        predictions,
    })
}

/// Trains once on the lifted training set, then evaluates every requested level.
pub fn run_experiment(spec: &ExperimentSpec, env: &ExperimentEnv) -> Result<ExperimentResult> {
    spec.validate(env)?;
    let (train_set, stats) = lift_to_level(&env.datasets[&spec.train_dataset], spec.train_level, &env.inventory, &env.balls);
    log::info!(
        "training on {} L{}: {} of {} records",
        spec.train_dataset,
        spec.train_level,
        stats.n_ball_records,
        stats.n_records
    );
    let outcome = train(&train_set, &env.balls, &env.embeddings, &spec.train)?;
    let test = &env.datasets[&spec.test_dataset];
    let mut levels = Vec::with_capacity(spec.eval_levels.len());
    for &level in &spec.eval_levels {
        let r = evaluate_level(&outcome.params, &spec.test_dataset, test, level, env, spec.train.window)?;
        log::info!("{} L{level}: F1 {:.4}", spec.test_dataset, r.report.f1());
        levels.push(r);
    }
    Ok(ExperimentResult {
        params: outcome.params,
        curve: outcome.curve,
        levels,
        collisions: env.inventory.all_hypernym_collisions(),
    })
}
