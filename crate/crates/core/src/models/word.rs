//! Word-level ConvNet: three parallel convolution branches over word
//! embeddings, max-over-time features, then two fully-connected layers.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{glorot, ConfigError, ModelError, TraceEntry};
use crate::encoding::{EmbeddingTable, PAD};
use crate::nn::layers::{self, LayerSpec};
use crate::nn::{Network, NnError, Parameter, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCnnConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub seq_len: usize,
    /// Filters per branch.
    pub frames: usize,
    pub kernels: [usize; 3],
    pub pool: usize,
    pub hidden: usize,
    pub classes: usize,
    pub dropout: f64,
}

impl Default for WordCnnConfig {
    fn default() -> Self {
        WordCnnConfig {
            vocab_size: 5000,
            embed_dim: 128,
            seq_len: 64,
            frames: 256,
            kernels: [3, 4, 5],
            pool: 2,
            hidden: 150,
            classes: 4,
            dropout: 0.5,
        }
    }
}

impl WordCnnConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.classes != 4 {
            return invalid("the classifier head must have exactly 4 classes");
        }
        let [a, b, c] = self.kernels;
        if a == b || b == c || a == c {
            return invalid("branch kernels must be distinct");
        }
        if [self.vocab_size, self.embed_dim, self.seq_len, self.frames, self.pool, self.hidden]
            .contains(&0)
            || self.kernels.contains(&0)
        {
            return invalid("sizes must be positive");
        }
        if self.vocab_size < 2 {
            return invalid("vocabulary must include PAD and UNK");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return invalid("dropout rate must lie in [0, 1)");
        }
        self.planned_trace().map(|_| ())
    }

    /// Layer-by-layer output shapes derived from the length laws.
    pub fn planned_trace(&self) -> Result<Vec<TraceEntry>, ConfigError> {
        let mut trace = vec![TraceEntry::new("embedding", vec![self.embed_dim, self.seq_len])];
        let mut width = 0;
        for k in self.kernels {
            let mut shape = vec![self.embed_dim, self.seq_len];
            for (name, spec) in [
                (format!("conv{k}"), LayerSpec::Conv1d { frames: self.frames, kernel: k }),
                (format!("relu{k}"), LayerSpec::Relu),
                (format!("pool{k}"), LayerSpec::MaxPool1d { width: self.pool }),
                (format!("maxtime{k}"), LayerSpec::GlobalMaxPool),
            ] {
                shape = spec.output_shape(&shape).ok_or_else(|| ConfigError::SequenceTooShort {
                    layer: name.clone(),
                    input_len: shape.get(1).copied().unwrap_or(0),
                })?;
                trace.push(TraceEntry::new(name, shape.clone()));
            }
            width += shape[0];
        }
        trace.push(TraceEntry::new("concat", vec![width]));
        trace.push(TraceEntry::new("dropout1", vec![width]));
        trace.push(TraceEntry::new("fc1", vec![self.hidden]));
        trace.push(TraceEntry::new("relu_fc1", vec![self.hidden]));
        trace.push(TraceEntry::new("dropout2", vec![self.hidden]));
        trace.push(TraceEntry::new("fc2", vec![self.classes]));
        Ok(trace)
    }

    pub fn concat_width(&self) -> usize {
        3 * self.frames
    }
}

const EMB: usize = 0;
const FC1_W: usize = 7;
const FC1_B: usize = 8;
const FC2_W: usize = 9;
const FC2_B: usize = 10;

fn conv_w(branch: usize) -> usize {
    1 + 2 * branch
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordCnn {
    config: WordCnnConfig,
    params: Vec<Parameter>,
    corrupt_conv_backward: bool,
}

struct BranchTape {
    relu_out: Tensor,
    pool_arg: Vec<usize>,
    pooled_shape: Vec<usize>,
    time_arg: Vec<usize>,
}

struct Tape {
    x: Tensor,
    branches: Vec<BranchTape>,
    mask1: Option<Vec<f64>>,
    h1: Tensor,
    a1: Tensor,
    mask2: Option<Vec<f64>>,
    a1d: Tensor,
}

impl WordCnn {
    /// Builds the model with Glorot-initialized layers and either the given
    /// embedding table or a seeded uniform(±0.25) one.
    pub fn new(config: WordCnnConfig, seed: u64, embeddings: Option<EmbeddingTable>) -> Result<Self, ModelError> {
        config.validate()?;
        let table = match embeddings {
            Some(t) => {
                if t.weights.shape() != [config.vocab_size, config.embed_dim] {
                    return Err(ConfigError::Invalid(format!(
                        "embedding table {:?} does not match vocab {} × dim {}",
                        t.weights.shape(),
                        config.vocab_size,
                        config.embed_dim
                    ))
                    .into());
                }
                t
            }
            None => EmbeddingTable::random(config.vocab_size, config.embed_dim, seed),
        };
        let mut params = vec![Parameter::new("embedding", table.weights)];
        let d = config.embed_dim;
        let f = config.frames;
        for (i, k) in config.kernels.into_iter().enumerate() {
            let idx = params.len() as u64;
            params.push(Parameter::new(format!("conv{k}.weight"), glorot(&[f, d, k], d * k, f * k, seed, idx)));
            params.push(Parameter::new(format!("conv{k}.bias"), Tensor::zeros(&[f])));
            debug_assert_eq!(conv_w(i), params.len() - 2);
        }
        let width = config.concat_width();
        params.push(Parameter::new("fc1.weight", glorot(&[config.hidden, width], width, config.hidden, seed, 7)));
        params.push(Parameter::new("fc1.bias", Tensor::zeros(&[config.hidden])));
        params.push(Parameter::new("fc2.weight", glorot(&[config.classes, config.hidden], config.hidden, config.classes, seed, 9)));
        params.push(Parameter::new("fc2.bias", Tensor::zeros(&[config.classes])));
        Ok(WordCnn {
            config,
            params,
            corrupt_conv_backward: false,
        })
    }

    pub fn config(&self) -> &WordCnnConfig {
        &self.config
    }

    #[doc(hidden)]
    pub fn set_corrupt_conv_backward(&mut self, on: bool) {
        self.corrupt_conv_backward = on;
    }

    fn forward(
        &self,
        input: &[usize],
        mut dropout: Option<&mut ChaCha8Rng>,
        mut trace: Option<&mut Vec<TraceEntry>>,
    ) -> Result<(Tensor, Tape), NnError> {
        if input.len() != self.config.seq_len {
            return Err(crate::nn::shape_err(
                "word_cnn",
                format!("input length {} != configured {}", input.len(), self.config.seq_len),
            ));
        }
        let mut record = |name: &str, t: &Tensor| {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEntry::new(name, t.shape().to_vec()));
            }
        };
        let p = &self.params;
        let x = layers::embedding(&p[EMB].value, input)?;
        record("embedding", &x);
        let mut branches = Vec::with_capacity(3);
        let mut features = Vec::with_capacity(3);
        for (i, k) in self.config.kernels.into_iter().enumerate() {
            let c = layers::conv1d(&x, &p[conv_w(i)].value, &p[conv_w(i) + 1].value)?;
            record(&format!("conv{k}"), &c);
            let r = layers::relu(&c);
            record(&format!("relu{k}"), &r);
            let (pooled, pool_arg) = layers::maxpool1d(&r, self.config.pool)?;
            record(&format!("pool{k}"), &pooled);
            let (feat, time_arg) = layers::maxpool1d(&pooled, pooled.shape()[1])?;
            let feat = layers::flatten(&feat);
            record(&format!("maxtime{k}"), &feat);
            branches.push(BranchTape {
                relu_out: r,
                pooled_shape: pooled.shape().to_vec(),
                pool_arg,
                time_arg,
            });
            features.push(feat);
        }
        let h = layers::concat(&features.iter().collect::<Vec<_>>())?;
        record("concat", &h);
        let (h1, mask1) = layers::dropout(&h, self.config.dropout, dropout.as_deref_mut())?;
        record("dropout1", &h1);
        let z1 = layers::dense(&h1, &p[FC1_W].value, &p[FC1_B].value)?;
        record("fc1", &z1);
        let a1 = layers::relu(&z1);
        record("relu_fc1", &a1);
        let (a1d, mask2) = layers::dropout(&a1, self.config.dropout, dropout)?;
        record("dropout2", &a1d);
        let logits = layers::dense(&a1d, &p[FC2_W].value, &p[FC2_B].value)?;
        record("fc2", &logits);
        Ok((
            logits,
            Tape {
                x,
                branches,
                mask1,
                h1,
                a1,
                mask2,
                a1d,
            },
        ))
    }

    fn backward(&self, input: &[usize], tape: Tape, g_logits: Tensor, grads: &mut [Tensor]) -> Result<(), NnError> {
        let p = &self.params;
        let (head, tail) = grads.split_at_mut(FC2_W);
        let (g_fc2w, g_fc2b) = tail.split_at_mut(1);
        let g_a1d = layers::dense_backward(&tape.a1d, &p[FC2_W].value, &g_logits, &mut g_fc2w[0], &mut g_fc2b[0])?;
        let g_a1 = layers::dropout_backward(&g_a1d, tape.mask2.as_deref());
        let g_z1 = layers::relu_backward(&tape.a1, &g_a1);
        let (head, fc1) = head.split_at_mut(FC1_W);
        let (g_fc1w, g_fc1b) = fc1.split_at_mut(1);
        let g_h1 = layers::dense_backward(&tape.h1, &p[FC1_W].value, &g_z1, &mut g_fc1w[0], &mut g_fc1b[0])?;
        let g_h = layers::dropout_backward(&g_h1, tape.mask1.as_deref());
        let f = self.config.frames;
        let pieces = layers::concat_backward(&g_h, &[&[f], &[f], &[f]])?;

        let mut g_x = Tensor::zeros(tape.x.shape());
        for (i, (bt, g_feat)) in tape.branches.iter().zip(pieces).enumerate() {
            let g_feat = g_feat.reshape(vec![f, 1])?;
            let g_pooled = layers::maxpool1d_backward(&g_feat, &bt.time_arg, &bt.pooled_shape)?;
            let g_relu = layers::maxpool1d_backward(&g_pooled, &bt.pool_arg, bt.relu_out.shape())?;
            let g_conv = layers::relu_backward(&bt.relu_out, &g_relu);
            let w = conv_w(i);
            let (gw, gb) = head[w..w + 2].split_at_mut(1);
            let gx = if self.corrupt_conv_backward {
                let mut tmp = Tensor::zeros(gw[0].shape());
                let gx = layers::conv1d_backward(&tape.x, &p[w].value, &g_conv, &mut tmp, &mut gb[0])?;
                tmp.scale(1.5);
                gw[0].add_assign(&tmp)?;
                gx
            } else {
                layers::conv1d_backward(&tape.x, &p[w].value, &g_conv, &mut gw[0], &mut gb[0])?
            };
            g_x.add_assign(&gx)?;
        }
        if !p[EMB].frozen {
            layers::embedding_backward(input, &g_x, &mut head[EMB], PAD)?;
        }
        Ok(())
    }

    /// Shapes observed during an evaluation-mode forward pass.
    pub fn trace(&self, input: &[usize]) -> Result<Vec<TraceEntry>, NnError> {
        let mut tr = Vec::new();
        self.forward(input, None, Some(&mut tr))?;
        Ok(tr)
    }
}

impl Network for WordCnn {
    fn params(&self) -> &[Parameter] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [Parameter] {
        &mut self.params
    }

    fn logits(&self, input: &[usize]) -> Result<Tensor, NnError> {
        Ok(self.forward(input, None, None)?.0)
    }

    fn accumulate_gradients(
        &self,
        input: &[usize],
        label: usize,
        mut dropout: Option<ChaCha8Rng>,
        grads: &mut [Tensor],
    ) -> Result<f64, NnError> {
        let (logits, tape) = self.forward(input, dropout.as_mut(), None)?;
        let (loss, probs) = layers::softmax_cross_entropy(&logits, label)?;
        self.backward(input, tape, layers::softmax_cross_entropy_grad(&probs, label), grads)?;
        Ok(loss)
    }

    fn loss(&self, input: &[usize], label: usize, mut dropout: Option<ChaCha8Rng>) -> Result<f64, NnError> {
        let (logits, _) = self.forward(input, dropout.as_mut(), None)?;
        Ok(layers::softmax_cross_entropy(&logits, label)?.0)
    }
}
