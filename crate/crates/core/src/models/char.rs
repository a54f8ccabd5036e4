//! Character-level ConvNet: a stack of four convolutions over character
//! embeddings followed by three fully-connected layers.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{glorot, ConfigError, ModelError, TraceEntry};
use crate::encoding::{EmbeddingTable, PAD};
use crate::nn::layers::{self, LayerSpec};
use crate::nn::{Network, NnError, Parameter, Tensor};

/// One row of the convolution stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub kernel: usize,
    pub pool: Option<usize>,
}

/// The fixed convolution stack: kernel 7 with pool 3, two kernel-3 layers
/// without pooling, then kernel 3 with pool 3.
pub const CHAR_CONV_STACK: [ConvSpec; 4] = [
    ConvSpec { kernel: 7, pool: Some(3) },
    ConvSpec { kernel: 3, pool: None },
    ConvSpec { kernel: 3, pool: None },
    ConvSpec { kernel: 3, pool: Some(3) },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharCnnConfig {
    pub alphabet_size: usize,
    pub embed_dim: usize,
    pub seq_len: usize,
    /// Filters in every convolution.
    pub frames: usize,
    pub conv: Vec<ConvSpec>,
    pub fc: [usize; 2],
    pub classes: usize,
    pub dropout: f64,
    /// Fixed identity embedding (`embed_dim == alphabet_size`, frozen).
    pub one_hot: bool,
}

impl Default for CharCnnConfig {
    fn default() -> Self {
        CharCnnConfig {
            alphabet_size: 256,
            embed_dim: 32,
            seq_len: 512,
            frames: 256,
            conv: CHAR_CONV_STACK.to_vec(),
            fc: [1024, 1024],
            classes: 4,
            dropout: 0.5,
            one_hot: false,
        }
    }
}

impl CharCnnConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.classes != 4 {
            return invalid("the classifier head must have exactly 4 classes");
        }
        if self.conv != CHAR_CONV_STACK {
            return invalid("convolution stack must be (7, pool 3), (3), (3), (3, pool 3)");
        }
        if [self.alphabet_size, self.embed_dim, self.seq_len, self.frames, self.fc[0], self.fc[1]].contains(&0) {
            return invalid("sizes must be positive");
        }
        if self.alphabet_size < 2 {
            return invalid("alphabet must include PAD and UNK");
        }
        if self.one_hot && self.embed_dim != self.alphabet_size {
            return invalid("one-hot input needs embed_dim == alphabet_size");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return invalid("dropout rate must lie in [0, 1)");
        }
        self.planned_trace().map(|_| ())
    }

    /// Layer-by-layer output shapes derived from the length laws. Fails
    /// naming the first layer whose output would be empty.
    pub fn planned_trace(&self) -> Result<Vec<TraceEntry>, ConfigError> {
        let mut shape = vec![self.embed_dim, self.seq_len];
        let mut trace = vec![TraceEntry::new("embedding", shape.clone())];
        let mut push = |name: String, spec: LayerSpec, shape: &mut Vec<usize>| {
            *shape = spec.output_shape(shape).ok_or_else(|| ConfigError::SequenceTooShort {
                layer: name.clone(),
                input_len: shape.get(1).copied().unwrap_or(0),
            })?;
            trace.push(TraceEntry::new(name, shape.clone()));
            Ok::<(), ConfigError>(())
        };
        for (i, spec) in self.conv.iter().enumerate() {
            let n = i + 1;
            push(format!("conv{n}"), LayerSpec::Conv1d { frames: self.frames, kernel: spec.kernel }, &mut shape)?;
            push(format!("relu{n}"), LayerSpec::Relu, &mut shape)?;
            if let Some(width) = spec.pool {
                push(format!("pool{n}"), LayerSpec::MaxPool1d { width }, &mut shape)?;
            }
        }
        push("flatten".into(), LayerSpec::Flatten, &mut shape)?;
        push("dropout1".into(), LayerSpec::Dropout { rate: self.dropout }, &mut shape)?;
        push("fc1".into(), LayerSpec::Dense { units: self.fc[0] }, &mut shape)?;
        push("relu_fc1".into(), LayerSpec::Relu, &mut shape)?;
        push("dropout2".into(), LayerSpec::Dropout { rate: self.dropout }, &mut shape)?;
        push("fc2".into(), LayerSpec::Dense { units: self.fc[1] }, &mut shape)?;
        push("relu_fc2".into(), LayerSpec::Relu, &mut shape)?;
        push("fc3".into(), LayerSpec::Dense { units: self.classes }, &mut shape)?;
        Ok(trace)
    }

    /// Width of the flattened convolution output.
    pub fn flatten_width(&self) -> Result<usize, ConfigError> {
        let trace = self.planned_trace()?;
        let flat = trace.iter().find(|t| t.layer == "flatten").expect("flatten in trace");
        Ok(flat.shape[0])
    }
}

const EMB: usize = 0;
const FC1_W: usize = 9;
const FC2_W: usize = 11;
const FC3_W: usize = 13;

fn conv_w(layer: usize) -> usize {
    1 + 2 * layer
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharCnn {
    config: CharCnnConfig,
    params: Vec<Parameter>,
    corrupt_conv_backward: bool,
}

struct ConvTape {
    input: Tensor,
    relu_out: Tensor,
    pool_arg: Option<Vec<usize>>,
}

struct Tape {
    convs: Vec<ConvTape>,
    conv_out_shape: Vec<usize>,
    mask1: Option<Vec<f64>>,
    f1: Tensor,
    a1: Tensor,
    mask2: Option<Vec<f64>>,
    a1d: Tensor,
    a2: Tensor,
}

impl CharCnn {
    pub fn new(config: CharCnnConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let table = if config.one_hot {
            EmbeddingTable::one_hot(config.alphabet_size)
        } else {
            EmbeddingTable::random(config.alphabet_size, config.embed_dim, seed)
        };
        let mut params = vec![Parameter::new("char_embedding", table.weights).frozen(!table.trainable)];
        let mut c_in = config.embed_dim;
        let f = config.frames;
        for (i, spec) in config.conv.iter().enumerate() {
            let k = spec.kernel;
            let idx = params.len() as u64;
            params.push(Parameter::new(format!("conv{}.weight", i + 1), glorot(&[f, c_in, k], c_in * k, f * k, seed, idx)));
            params.push(Parameter::new(format!("conv{}.bias", i + 1), Tensor::zeros(&[f])));
            c_in = f;
        }
        let flat = config.flatten_width()?;
        let [h1, h2] = config.fc;
        for (name, out, inp, idx) in [("fc1", h1, flat, FC1_W), ("fc2", h2, h1, FC2_W), ("fc3", config.classes, h2, FC3_W)] {
            params.push(Parameter::new(format!("{name}.weight"), glorot(&[out, inp], inp, out, seed, idx as u64)));
            params.push(Parameter::new(format!("{name}.bias"), Tensor::zeros(&[out])));
        }
        Ok(CharCnn {
            config,
            params,
            corrupt_conv_backward: false,
        })
    }

    pub fn config(&self) -> &CharCnnConfig {
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
                "char_cnn",
                format!("input length {} != configured {}", input.len(), self.config.seq_len),
            ));
        }
        let mut record = |name: &str, t: &Tensor| {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEntry::new(name, t.shape().to_vec()));
            }
        };
        let p = &self.params;
        let mut x = layers::embedding(&p[EMB].value, input)?;
        record("embedding", &x);
        let mut convs = Vec::with_capacity(self.config.conv.len());
        for (i, spec) in self.config.conv.iter().enumerate() {
            let n = i + 1;
            let c = layers::conv1d(&x, &p[conv_w(i)].value, &p[conv_w(i) + 1].value)?;
            record(&format!("conv{n}"), &c);
            let r = layers::relu(&c);
            record(&format!("relu{n}"), &r);
            let (next, pool_arg) = match spec.pool {
                Some(width) => {
                    let (pooled, arg) = layers::maxpool1d(&r, width)?;
                    record(&format!("pool{n}"), &pooled);
                    (pooled, Some(arg))
                }
                None => (r.clone(), None),
            };
            convs.push(ConvTape {
                input: x,
                relu_out: r,
                pool_arg,
            });
            x = next;
        }
        let conv_out_shape = x.shape().to_vec();
        let flat = layers::flatten(&x);
        record("flatten", &flat);
        let (f1, mask1) = layers::dropout(&flat, self.config.dropout, dropout.as_deref_mut())?;
        record("dropout1", &f1);
        let z1 = layers::dense(&f1, &p[FC1_W].value, &p[FC1_W + 1].value)?;
        record("fc1", &z1);
        let a1 = layers::relu(&z1);
        record("relu_fc1", &a1);
        let (a1d, mask2) = layers::dropout(&a1, self.config.dropout, dropout)?;
        record("dropout2", &a1d);
        let z2 = layers::dense(&a1d, &p[FC2_W].value, &p[FC2_W + 1].value)?;
        record("fc2", &z2);
        let a2 = layers::relu(&z2);
        record("relu_fc2", &a2);
        let logits = layers::dense(&a2, &p[FC3_W].value, &p[FC3_W + 1].value)?;
        record("fc3", &logits);
        Ok((
            logits,
            Tape {
                convs,
                conv_out_shape,
                mask1,
                f1,
                a1,
                mask2,
                a1d,
                a2,
            },
        ))
    }

    fn backward(&self, input: &[usize], tape: Tape, g_logits: Tensor, grads: &mut [Tensor]) -> Result<(), NnError> {
        let p = &self.params;
        fn pair(grads: &mut [Tensor], w: usize) -> (&mut Tensor, &mut Tensor) {
            let (a, b) = grads[w..w + 2].split_at_mut(1);
            (&mut a[0], &mut b[0])
        }
        let (gw, gb) = pair(grads, FC3_W);
        let g_a2 = layers::dense_backward(&tape.a2, &p[FC3_W].value, &g_logits, gw, gb)?;
        let g_z2 = layers::relu_backward(&tape.a2, &g_a2);
        let (gw, gb) = pair(grads, FC2_W);
        let g_a1d = layers::dense_backward(&tape.a1d, &p[FC2_W].value, &g_z2, gw, gb)?;
        let g_a1 = layers::dropout_backward(&g_a1d, tape.mask2.as_deref());
        let g_z1 = layers::relu_backward(&tape.a1, &g_a1);
        let (gw, gb) = pair(grads, FC1_W);
        let g_f1 = layers::dense_backward(&tape.f1, &p[FC1_W].value, &g_z1, gw, gb)?;
        let g_flat = layers::dropout_backward(&g_f1, tape.mask1.as_deref());
        let mut g = g_flat.reshape(tape.conv_out_shape.clone())?;

        for (i, ct) in tape.convs.iter().enumerate().rev() {
            let g_relu = match &ct.pool_arg {
                Some(arg) => layers::maxpool1d_backward(&g, arg, ct.relu_out.shape())?,
                None => g,
            };
            let g_conv = layers::relu_backward(&ct.relu_out, &g_relu);
            let w = conv_w(i);
            let (gw, gb) = pair(grads, w);
            g = if self.corrupt_conv_backward {
                let mut tmp = Tensor::zeros(gw.shape());
                let gx = layers::conv1d_backward(&ct.input, &p[w].value, &g_conv, &mut tmp, gb)?;
                tmp.scale(1.5);
                gw.add_assign(&tmp)?;
                gx
            } else {
                layers::conv1d_backward(&ct.input, &p[w].value, &g_conv, gw, gb)?
            };
        }
        if !p[EMB].frozen {
            layers::embedding_backward(input, &g, &mut grads[EMB], PAD)?;
        }
        Ok(())
    }

    pub fn trace(&self, input: &[usize]) -> Result<Vec<TraceEntry>, NnError> {
        let mut tr = Vec::new();
        self.forward(input, None, Some(&mut tr))?;
        Ok(tr)
    }
}

impl Network for CharCnn {
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
