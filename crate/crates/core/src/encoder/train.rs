use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{Architecture, EncoderParams};
use super::{loss_and_gradient, record_inputs, TrainConfig};
use crate::corpus::TrainingRecord;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::geometry::BallConfiguration;

/// Trained weights and the mean loss over all records before training
/// (`curve[0]`) and after each epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    pub curve: Vec<f64>,
}

struct Example {
    target: Vec<f64>,
    context: Vec<f64>,
    center: Vec<f64>,
}

fn mean_loss(params: &EncoderParams, examples: &[Example]) -> Result<f64> {
    let mut total = 0.0;
    for ex in examples {
        let (out, _) = params.forward_cached(&ex.target, &ex.context)?;
        total += loss_and_gradient(&out, &ex.center)?.0;
    }
    Ok(total / examples.len() as f64)
}

/// Mini-batch gradient descent on `1 - cos(V, center of target ball)`.
///
/// Fully determined by `cfg.seed`: the same seed initializes the weights and,
/// on a separate stream, shuffles the records each epoch.
pub fn train(
    records: &[TrainingRecord],
    targets: &BallConfiguration,
    table: &EmbeddingTable,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    if table.dim() != targets.embedding_prefix_dim() {
        return Err(Error::DimensionMismatch {
            expected: targets.embedding_prefix_dim(),
            found: table.dim(),
        });
    }
    let arch = Architecture::new(table.dim(), targets.dim(), cfg)?;
    let mut params = EncoderParams::init(arch, cfg)?;

    let mut examples = Vec::with_capacity(records.len());
    for r in records {
        let (target, context) = record_inputs(r, table, cfg.window)?;
        examples.push(Example {
            target: target.into_inner(),
            context: context.into_inner(),
            center: targets.ball(&r.target)?.center.as_slice().to_vec(),
        });
    }

    let mut curve = Vec::with_capacity(cfg.epochs + 1);
    curve.push(mean_loss(&params, &examples)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut grad = params.zeros_like();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            for t in grad.tensors_mut() {
                t.iter_mut().for_each(|x| *x = 0.0);
            }
            for &i in batch {
                let ex = &examples[i];
                let (out, cache) = params.forward_cached(&ex.target, &ex.context)?;
                let (_, d_out) = loss_and_gradient(&out, &ex.center)?;
                params.backward(&cache, &d_out, &mut grad);
            }
            params.add_scaled(&grad, -cfg.learning_rate / batch.len() as f64);
        }
        let l = mean_loss(&params, &examples)?;
        log::debug!("epoch {}: mean loss {l:.6}", epoch + 1);
        curve.push(l);
    }
    Ok(TrainOutcome { params, curve })
}
