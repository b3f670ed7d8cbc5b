//! Two-token transformer encoder with a two-layer perceptron head, with
//! hand-written backpropagation.
//!
//! Input tokens are the target vector and the context vector, each shifted by
//! a learned role embedding. Every encoder layer is pre-norm:
//! `h = x + Attn(LN(x))`, `y = h + FFN(LN(h))`. The two output tokens are
//! concatenated and fed through `Linear -> ReLU -> Linear`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::TrainConfig;
use crate::error::{Error, Result};

pub(crate) const SEQ: usize = 2;
const LN_EPS: f64 = 1e-5;

/// Layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub model_dim: usize,
    pub heads: usize,
    pub layers: usize,
    pub ff_dim: usize,
    pub head_hidden: usize,
    pub output_dim: usize,
}

impl Architecture {
    pub fn new(model_dim: usize, output_dim: usize, cfg: &TrainConfig) -> Result<Self> {
        let arch = Architecture {
            model_dim,
            heads: cfg.heads,
            layers: cfg.layers,
            ff_dim: cfg.ff_multiplier * model_dim,
            head_hidden: cfg.ff_multiplier * model_dim,
            output_dim,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_dim == 0 || self.output_dim == 0 || self.ff_dim == 0 || self.head_hidden == 0 {
            return Err(Error::Config("encoder widths must be positive".into()));
        }
        if self.heads == 0 || self.model_dim % self.heads != 0 {
            return Err(Error::Config(format!(
                "model width {} is not divisible by {} heads",
                self.model_dim, self.heads
            )));
        }
        Ok(())
    }

    fn head_dim(&self) -> usize {
        self.model_dim / self.heads
    }
}

/// Affine map `y = W x + b`, `W` stored row-major as `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    fn glorot(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut l = Linear::zeros(in_dim, out_dim);
        for w in &mut l.weight {
            *w = rng.random_range(-a..a);
        }
        l
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.bias.clone();
        for (o, yo) in y.iter_mut().enumerate() {
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            *yo += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        y
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear) -> Vec<f64> {
        let mut dx = vec![0.0; self.in_dim];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.bias[o] += g;
            let row = o * self.in_dim..(o + 1) * self.in_dim;
            for ((gw, w), (xi, dxi)) in grad.weight[row.clone()]
                .iter_mut()
                .zip(&self.weight[row])
                .zip(x.iter().zip(dx.iter_mut()))
            {
                *gw += g * xi;
                *dxi += g * w;
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

struct LnCache {
    xhat: Vec<f64>,
    inv_std: f64,
}

impl LayerNorm {
    fn new(dim: usize) -> Self {
        LayerNorm {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
        }
    }

    fn zeros(dim: usize) -> Self {
        LayerNorm {
            gamma: vec![0.0; dim],
            beta: vec![0.0; dim],
        }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, LnCache) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv_std = 1.0 / (var + LN_EPS).sqrt();
        let xhat: Vec<f64> = x.iter().map(|v| (v - mean) * inv_std).collect();
        let y = xhat
            .iter()
            .zip(self.gamma.iter().zip(&self.beta))
            .map(|(h, (g, b))| g * h + b)
            .collect();
        (y, LnCache { xhat, inv_std })
    }

    fn backward(&self, cache: &LnCache, dy: &[f64], grad: &mut LayerNorm) -> Vec<f64> {
        let n = dy.len() as f64;
        let mut dxhat = Vec::with_capacity(dy.len());
        for i in 0..dy.len() {
            grad.gamma[i] += dy[i] * cache.xhat[i];
            grad.beta[i] += dy[i];
            dxhat.push(dy[i] * self.gamma[i]);
        }
        let mean_d = dxhat.iter().sum::<f64>() / n;
        let mean_dx = dxhat.iter().zip(&cache.xhat).map(|(d, x)| d * x).sum::<f64>() / n;
        dxhat
            .iter()
            .zip(&cache.xhat)
            .map(|(d, x)| cache.inv_std * (d - mean_d - x * mean_dx))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub ln_attn: LayerNorm,
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub attn_out: Linear,
    pub ln_ff: LayerNorm,
    pub ff_in: Linear,
    pub ff_out: Linear,
}

impl EncoderLayer {
    fn init(arch: &Architecture, rng: &mut ChaCha8Rng) -> Self {
        let d = arch.model_dim;
        EncoderLayer {
            ln_attn: LayerNorm::new(d),
            query: Linear::glorot(d, d, rng),
            key: Linear::glorot(d, d, rng),
            value: Linear::glorot(d, d, rng),
            attn_out: Linear::glorot(d, d, rng),
            ln_ff: LayerNorm::new(d),
            ff_in: Linear::glorot(d, arch.ff_dim, rng),
            ff_out: Linear::glorot(arch.ff_dim, d, rng),
        }
    }

    fn zeros(arch: &Architecture) -> Self {
        let d = arch.model_dim;
        EncoderLayer {
            ln_attn: LayerNorm::zeros(d),
            query: Linear::zeros(d, d),
            key: Linear::zeros(d, d),
            value: Linear::zeros(d, d),
            attn_out: Linear::zeros(d, d),
            ln_ff: LayerNorm::zeros(d),
            ff_in: Linear::zeros(d, arch.ff_dim),
            ff_out: Linear::zeros(arch.ff_dim, d),
        }
    }
}

/// All trainable weights plus the configuration they were created with.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub arch: Architecture,
    pub config: TrainConfig,
    /// Role embeddings, `SEQ × model_dim`: row 0 target, row 1 context.
    pub role: Vec<f64>,
    pub layers: Vec<EncoderLayer>,
    pub head_in: Linear,
    pub head_out: Linear,
}

impl EncoderParams {
    /// Seeded initialization: Glorot-uniform weights, zero biases, unit
    /// layer-norm gains.
    pub fn init(arch: Architecture, config: &TrainConfig) -> Result<Self> {
        use rand::SeedableRng;
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = arch.model_dim;
        let role = (0..SEQ * d).map(|_| rng.random_range(-0.1..0.1)).collect();
        let layers = (0..arch.layers).map(|_| EncoderLayer::init(&arch, &mut rng)).collect();
        let head_in = Linear::glorot(SEQ * d, arch.head_hidden, &mut rng);
        let head_out = Linear::glorot(arch.head_hidden, arch.output_dim, &mut rng);
        Ok(EncoderParams {
            arch,
            config: config.clone(),
            role,
            layers,
            head_in,
            head_out,
        })
    }

    /// Same shapes, every weight zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        EncoderParams {
            arch: self.arch,
            config: self.config.clone(),
            role: vec![0.0; self.role.len()],
            layers: self.layers.iter().map(|_| EncoderLayer::zeros(&self.arch)).collect(),
            head_in: Linear::zeros(self.head_in.in_dim, self.head_in.out_dim),
            head_out: Linear::zeros(self.head_out.in_dim, self.head_out.out_dim),
        }
    }

    /// Named parameter tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = vec![("role".into(), &self.role)];
        for (i, l) in self.layers.iter().enumerate() {
            let lin = [
                ("query", &l.query),
                ("key", &l.key),
                ("value", &l.value),
                ("attn_out", &l.attn_out),
                ("ff_in", &l.ff_in),
                ("ff_out", &l.ff_out),
            ];
            out.push((format!("layer{i}.ln_attn.gamma"), &l.ln_attn.gamma));
            out.push((format!("layer{i}.ln_attn.beta"), &l.ln_attn.beta));
            out.push((format!("layer{i}.ln_ff.gamma"), &l.ln_ff.gamma));
            out.push((format!("layer{i}.ln_ff.beta"), &l.ln_ff.beta));
            for (name, lin) in lin {
                out.push((format!("layer{i}.{name}.weight"), &lin.weight));
                out.push((format!("layer{i}.{name}.bias"), &lin.bias));
            }
        }
        out.push(("head_in.weight".into(), &self.head_in.weight));
        out.push(("head_in.bias".into(), &self.head_in.bias));
        out.push(("head_out.weight".into(), &self.head_out.weight));
        out.push(("head_out.bias".into(), &self.head_out.bias));
        out
    }

    /// Mutable tensors in the same order as [`EncoderParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = vec![&mut self.role];
        for l in &mut self.layers {
            out.push(&mut l.ln_attn.gamma);
            out.push(&mut l.ln_attn.beta);
            out.push(&mut l.ln_ff.gamma);
            out.push(&mut l.ln_ff.beta);
            for lin in [
                &mut l.query,
                &mut l.key,
                &mut l.value,
                &mut l.attn_out,
                &mut l.ff_in,
                &mut l.ff_out,
            ] {
                out.push(&mut lin.weight);
                out.push(&mut lin.bias);
            }
        }
        out.push(&mut self.head_in.weight);
        out.push(&mut self.head_in.bias);
        out.push(&mut self.head_out.weight);
        out.push(&mut self.head_out.bias);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }

    /// `self += alpha * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &EncoderParams, alpha: f64) {
        let src: Vec<&[f64]> = other.tensors().into_iter().map(|(_, t)| t).collect();
        for (dst, src) in self.tensors_mut().into_iter().zip(src) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }
}

struct LayerCache {
    ln_attn: [LnCache; SEQ],
    normed_attn: [Vec<f64>; SEQ],
    q: [Vec<f64>; SEQ],
    k: [Vec<f64>; SEQ],
    v: [Vec<f64>; SEQ],
    /// `probs[head][t][u]`
    probs: Vec<[[f64; SEQ]; SEQ]>,
    mixed: [Vec<f64>; SEQ],
    ln_ff: [LnCache; SEQ],
    normed_ff: [Vec<f64>; SEQ],
    ff_pre: [Vec<f64>; SEQ],
    ff_act: [Vec<f64>; SEQ],
}

/// Intermediate values kept for the backward pass.
pub(crate) struct ForwardCache {
    layers: Vec<LayerCache>,
    pooled: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
}

fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

fn relu_backward(pre: &[f64], dy: &[f64]) -> Vec<f64> {
    pre.iter().zip(dy).map(|(p, d)| if *p > 0.0 { *d } else { 0.0 }).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn check_finite(v: &[f64], what: impl FnOnce() -> String) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

impl EncoderParams {
    pub(crate) fn forward_cached(&self, target: &[f64], context: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let d = self.arch.model_dim;
        for v in [target, context] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        let mut x: [Vec<f64>; SEQ] = [
            add(target, &self.role[..d]),
            add(context, &self.role[d..2 * d]),
        ];
        let mut caches = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let (y, cache) = self.layer_forward(layer, x);
            for t in &y {
                check_finite(t, || format!("encoder layer {li}"))?;
            }
            caches.push(cache);
            x = y;
        }
        let pooled: Vec<f64> = x.concat();
        let hidden_pre = self.head_in.forward(&pooled);
        let hidden = relu(&hidden_pre);
        check_finite(&hidden, || "head layer 0".into())?;
        let out = self.head_out.forward(&hidden);
        check_finite(&out, || "head layer 1".into())?;
        Ok((
            out,
            ForwardCache {
                layers: caches,
                pooled,
                hidden_pre,
                hidden,
            },
        ))
    }

    fn layer_forward(&self, layer: &EncoderLayer, input: [Vec<f64>; SEQ]) -> ([Vec<f64>; SEQ], LayerCache) {
        let dh = self.arch.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let (n0, c0) = layer.ln_attn.forward(&input[0]);
        let (n1, c1) = layer.ln_attn.forward(&input[1]);
        let normed_attn = [n0, n1];
        let q = [layer.query.forward(&normed_attn[0]), layer.query.forward(&normed_attn[1])];
        let k = [layer.key.forward(&normed_attn[0]), layer.key.forward(&normed_attn[1])];
        let v = [layer.value.forward(&normed_attn[0]), layer.value.forward(&normed_attn[1])];

        let d = self.arch.model_dim;
        let mut mixed = [vec![0.0; d], vec![0.0; d]];
        let mut probs = Vec::with_capacity(self.arch.heads);
        for h in 0..self.arch.heads {
            let cols = h * dh..(h + 1) * dh;
            let mut p = [[0.0; SEQ]; SEQ];
            for t in 0..SEQ {
                let mut s = [0.0; SEQ];
                for u in 0..SEQ {
                    s[u] = scale * crate::geometry::dot(&q[t][cols.clone()], &k[u][cols.clone()]);
                }
                let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = s.iter().map(|x| (x - m).exp()).collect();
                let z: f64 = e.iter().sum();
                for u in 0..SEQ {
                    p[t][u] = e[u] / z;
                    for c in cols.clone() {
                        mixed[t][c] += p[t][u] * v[u][c];
                    }
                }
            }
            probs.push(p);
        }
        let h1 = [
            add(&input[0], &layer.attn_out.forward(&mixed[0])),
            add(&input[1], &layer.attn_out.forward(&mixed[1])),
        ];
        let (m0, f0) = layer.ln_ff.forward(&h1[0]);
        let (m1, f1) = layer.ln_ff.forward(&h1[1]);
        let normed_ff = [m0, m1];
        let ff_pre = [layer.ff_in.forward(&normed_ff[0]), layer.ff_in.forward(&normed_ff[1])];
        let ff_act = [relu(&ff_pre[0]), relu(&ff_pre[1])];
        let out = [
            add(&h1[0], &layer.ff_out.forward(&ff_act[0])),
            add(&h1[1], &layer.ff_out.forward(&ff_act[1])),
        ];
        (
            out,
            LayerCache {
                ln_attn: [c0, c1],
                normed_attn,
                q,
                k,
                v,
                probs,
                mixed,
                ln_ff: [f0, f1],
                normed_ff,
                ff_pre,
                ff_act,
            },
        )
    }

    /// Accumulates `dL/dθ` into `grad` given `dL/dV`.
    pub(crate) fn backward(&self, cache: &ForwardCache, d_out: &[f64], grad: &mut EncoderParams) {
        let d_hidden = self.head_out.backward(&cache.hidden, d_out, &mut grad.head_out);
        let d_hidden_pre = relu_backward(&cache.hidden_pre, &d_hidden);
        let d_pooled = self.head_in.backward(&cache.pooled, &d_hidden_pre, &mut grad.head_in);
        let d = self.arch.model_dim;
        let mut dx: [Vec<f64>; SEQ] = [d_pooled[..d].to_vec(), d_pooled[d..].to_vec()];
        for (li, layer) in self.layers.iter().enumerate().rev() {
            dx = self.layer_backward(layer, &cache.layers[li], dx, &mut grad.layers[li]);
        }
        for t in 0..SEQ {
            for (g, dv) in grad.role[t * d..(t + 1) * d].iter_mut().zip(&dx[t]) {
                *g += dv;
            }
        }
    }

    fn layer_backward(
        &self,
        layer: &EncoderLayer,
        c: &LayerCache,
        d_out: [Vec<f64>; SEQ],
        g: &mut EncoderLayer,
    ) -> [Vec<f64>; SEQ] {
        let d = self.arch.model_dim;
        let dh = self.arch.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();

        // feed-forward residual branch
        let mut d_h1: [Vec<f64>; SEQ] = [d_out[0].clone(), d_out[1].clone()];
        for t in 0..SEQ {
            let d_act = layer.ff_out.backward(&c.ff_act[t], &d_out[t], &mut g.ff_out);
            let d_pre = relu_backward(&c.ff_pre[t], &d_act);
            let d_normed = layer.ff_in.backward(&c.normed_ff[t], &d_pre, &mut g.ff_in);
            let d_ln = layer.ln_ff.backward(&c.ln_ff[t], &d_normed, &mut g.ln_ff);
            for (a, b) in d_h1[t].iter_mut().zip(&d_ln) {
                *a += b;
            }
        }

        // attention residual branch
        let mut d_in: [Vec<f64>; SEQ] = [d_h1[0].clone(), d_h1[1].clone()];
        let d_mixed = [
            layer.attn_out.backward(&c.mixed[0], &d_h1[0], &mut g.attn_out),
            layer.attn_out.backward(&c.mixed[1], &d_h1[1], &mut g.attn_out),
        ];
        let mut dq = [vec![0.0; d], vec![0.0; d]];
        let mut dk = [vec![0.0; d], vec![0.0; d]];
        let mut dv = [vec![0.0; d], vec![0.0; d]];
        for (h, p) in c.probs.iter().enumerate() {
            let cols = h * dh..(h + 1) * dh;
            for t in 0..SEQ {
                let mut dp = [0.0; SEQ];
                for u in 0..SEQ {
                    dp[u] = crate::geometry::dot(&d_mixed[t][cols.clone()], &c.v[u][cols.clone()]);
                    for col in cols.clone() {
                        dv[u][col] += p[t][u] * d_mixed[t][col];
                    }
                }
                let weighted: f64 = (0..SEQ).map(|u| p[t][u] * dp[u]).sum();
                for u in 0..SEQ {
                    let ds = p[t][u] * (dp[u] - weighted) * scale;
                    for col in cols.clone() {
                        dq[t][col] += ds * c.k[u][col];
                        dk[u][col] += ds * c.q[t][col];
                    }
                }
            }
        }
        for t in 0..SEQ {
            let mut d_normed = layer.query.backward(&c.normed_attn[t], &dq[t], &mut g.query);
            for (a, b) in d_normed
                .iter_mut()
                .zip(layer.key.backward(&c.normed_attn[t], &dk[t], &mut g.key))
            {
                *a += b;
            }
            for (a, b) in d_normed
                .iter_mut()
                .zip(layer.value.backward(&c.normed_attn[t], &dv[t], &mut g.value))
            {
                *a += b;
            }
            let d_ln = layer.ln_attn.backward(&c.ln_attn[t], &d_normed, &mut g.ln_attn);
            for (a, b) in d_in[t].iter_mut().zip(&d_ln) {
                *a += b;
            }
        }
        d_in
    }
}
