//! The encoder that maps a word in context to a point in ball space.
//!
//! Each token is replaced by its static embedding; the context vector is the
//! mean of up to `k` embeddings on either side of the target. The pair
//! `(target, context)` goes through [`network`] to produce `V`, and training
//! minimizes `1 - cos(V, center)` against the target sense's ball center.

mod checkpoint;
pub mod network;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use network::{Architecture, EncoderParams};
pub use train::{train, TrainOutcome};

use crate::corpus::TrainingRecord;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, Vector};

/// Norm floor applied to `V` before dividing in the loss.
pub const MIN_OUTPUT_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Context window half-width `k`.
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub layers: usize,
    pub heads: usize,
    /// Feed-forward and head hidden widths as multiples of the model width.
    pub ff_multiplier: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 3,
            learning_rate: 1e-2,
            epochs: 50,
            batch_size: 32,
            seed: 42,
            layers: 2,
            heads: 2,
            ff_multiplier: 4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.ff_multiplier == 0 {
            return Err(Error::Config("ff multiplier must be positive".into()));
        }
        Ok(())
    }
}

/// One vector per token; out-of-vocabulary tokens get their hash vector.
pub fn embed_tokens<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Vec<Vector> {
    tokens.iter().map(|t| table.lookup(t.as_ref())).collect()
}

/// Mean of the embeddings within `k` positions of `i`, excluding `i`.
pub fn context_vector(vectors: &[Vector], i: usize, k: usize) -> Result<Vector> {
    if i >= vectors.len() {
        return Err(Error::Config(format!("target index {i} out of range for {} tokens", vectors.len())));
    }
    span_context(vectors, &[i], k)
}

/// Context of a possibly multi-token target: positions from `k` before the
/// first index to `k` after the last, minus the target positions themselves.
pub fn span_context(vectors: &[Vector], indices: &[usize], k: usize) -> Result<Vector> {
    let dim = vectors.first().map(|v| v.dim()).ok_or(Error::Config("empty sentence".into()))?;
    let (Some(&first), Some(&last)) = (indices.iter().min(), indices.iter().max()) else {
        return Err(Error::Config("no target index".into()));
    };
    if last >= vectors.len() {
        return Err(Error::Config(format!("target index {last} out of range")));
    }
    let lo = first.saturating_sub(k);
    let hi = (last + k).min(vectors.len() - 1);
    let mut sum = vec![0.0; dim];
    let mut count = 0usize;
    for (pos, v) in vectors.iter().enumerate().take(hi + 1).skip(lo) {
        if indices.contains(&pos) {
            continue;
        }
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x;
        }
        count += 1;
    }
    if count == 0 {
        log::warn!("empty context window; using the zero vector");
        return Ok(Vector::zeros(dim));
    }
    Vector::new(sum.into_iter().map(|s| s / count as f64).collect())
}

/// Mean of the target-token embeddings.
pub fn target_vector(vectors: &[Vector], indices: &[usize]) -> Result<Vector> {
    let dim = vectors.first().map(|v| v.dim()).ok_or(Error::Config("empty sentence".into()))?;
    let mut sum = vec![0.0; dim];
    for &i in indices {
        let v = vectors
            .get(i)
            .ok_or_else(|| Error::Config(format!("target index {i} out of range")))?;
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x;
        }
    }
    Vector::new(sum.into_iter().map(|s| s / indices.len() as f64).collect())
}

/// The `(target, context)` input pair for a record.
pub fn record_inputs(record: &TrainingRecord, table: &EmbeddingTable, window: usize) -> Result<(Vector, Vector)> {
    let vectors = embed_tokens(&record.tokens, table);
    Ok((
        target_vector(&vectors, &record.indices)?,
        span_context(&vectors, &record.indices, window)?,
    ))
}

/// Network output `V` for one input pair.
pub fn forward(params: &EncoderParams, target: &[f64], context: &[f64]) -> Result<Vector> {
    let (out, _) = params.forward_cached(target, context)?;
    Vector::new(out)
}

/// Loss of one example and its gradient with respect to every weight.
pub fn example_gradient(
    params: &EncoderParams,
    target: &[f64],
    context: &[f64],
    center: &[f64],
) -> Result<(f64, EncoderParams)> {
    let (out, cache) = params.forward_cached(target, context)?;
    let (l, d_out) = loss_and_gradient(&out, center)?;
    let mut grad = params.zeros_like();
    params.backward(&cache, &d_out, &mut grad);
    Ok((l, grad))
}

/// `1 - cos(V, target)`, with `|V|` floored at [`MIN_OUTPUT_NORM`].
pub fn loss(v: &[f64], target_center: &[f64]) -> Result<f64> {
    Ok(loss_and_gradient(v, target_center)?.0)
}

/// Loss and its gradient with respect to `V`.
pub fn loss_and_gradient(v: &[f64], target_center: &[f64]) -> Result<(f64, Vec<f64>)> {
    if v.len() != target_center.len() {
        return Err(Error::DimensionMismatch {
            expected: target_center.len(),
            found: v.len(),
        });
    }
    let nt = norm(target_center);
    if nt == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let raw = norm(v);
    let nv = raw.max(MIN_OUTPUT_NORM);
    let vt = dot(v, target_center);
    let cos = vt / (nv * nt);
    let loss = (1.0 - cos).clamp(0.0, 2.0);
    let grad = if raw > MIN_OUTPUT_NORM {
        v.iter()
            .zip(target_center)
            .map(|(vi, ti)| -(ti / (nv * nt) - cos * vi / (nv * nv)))
            .collect()
    } else {
        target_center.iter().map(|ti| -ti / (nv * nt)).collect()
    };
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(rows: &[&[f64]]) -> Vec<Vector> {
        rows.iter().map(|r| Vector::new(r.to_vec()).unwrap()).collect()
    }

    #[test]
    fn context_examples() {
        let v = vecs(&[&[1.0, 0.0], &[5.0, 5.0], &[3.0, 2.0]]);
        assert_eq!(context_vector(&v, 1, 1).unwrap().as_slice(), &[2.0, 1.0]);
        assert_eq!(context_vector(&v, 0, 2).unwrap().as_slice(), &[4.0, 3.5]);
        let row: &[f64] = &[0.5, -1.0];
        let same = vecs(&[row; 5]);
        assert_eq!(context_vector(&same, 2, 2).unwrap().as_slice(), &[0.5, -1.0]);
        assert!(context_vector(&v, 3, 1).is_err());
    }

    #[test]
    fn single_token_context_is_zero() {
        let v = vecs(&[&[1.0, 2.0]]);
        assert_eq!(context_vector(&v, 0, 3).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn window_is_clipped_and_local() {
        let v = vecs(&[&[100.0], &[1.0], &[2.0], &[3.0], &[4.0], &[100.0]]);
        assert_eq!(context_vector(&v, 2, 1).unwrap().as_slice(), &[2.0]);
        assert_eq!(context_vector(&v, 2, 2).unwrap().as_slice(), &[(100.0 + 1.0 + 3.0 + 4.0) / 4.0]);
    }

    #[test]
    fn multiword_target_is_mean() {
        let v = vecs(&[&[1.0], &[2.0], &[4.0], &[8.0]]);
        assert_eq!(target_vector(&v, &[1, 2]).unwrap().as_slice(), &[3.0]);
        assert_eq!(target_vector(&v, &[3]).unwrap().as_slice(), &[8.0]);
        assert_eq!(span_context(&v, &[1, 2], 1).unwrap().as_slice(), &[4.5]);
    }

    #[test]
    fn embed_tokens_examples() {
        let mut t = EmbeddingTable::new(2);
        t.insert("apple", Vector::new(vec![1.0, 2.0]).unwrap()).unwrap();
        let out = embed_tokens(&["Apple", "apple", "qwxz", "qwxz"], &t);
        assert_eq!(out[0], out[1]);
        assert_eq!(out[0].as_slice(), &[1.0, 2.0]);
        assert_eq!(out[2], out[3]);
        assert!((out[2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_examples() {
        assert!(loss(&[2.0, 0.0], &[1.0, 0.0]).unwrap().abs() < 1e-15);
        assert!((loss(&[-2.0, 0.0], &[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((loss(&[3.0, 4.0], &[4.0, 3.0]).unwrap() - 0.04).abs() < 1e-15);
        assert!(loss(&[1.0], &[0.0]).is_err());
        assert!(loss(&[1.0], &[1.0, 0.0]).is_err());
        let (l, g) = loss_and_gradient(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(l, 1.0);
        assert!(g.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn loss_gradient_matches_differences() {
        let v = [0.3, -1.2, 0.7];
        let t = [1.0, 0.5, -0.25];
        let (_, g) = loss_and_gradient(&v, &t).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut p = v;
            p[i] += h;
            let mut m = v;
            m[i] -= h;
            let fd = (loss(&p, &t).unwrap() - loss(&m, &t).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{i}: {fd} vs {}", g[i]);
        }
    }
}
