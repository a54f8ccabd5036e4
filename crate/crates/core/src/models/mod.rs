//! The two classifiers, prediction, and checkpoints.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::EmbeddingTable;
use crate::nn::{layers, Network, NnError, Parameter, Tensor};
use crate::rng::{self, Domain};

pub mod char;
pub mod check;
pub mod checkpoint;
pub mod word;

pub use self::char::{CharCnn, CharCnnConfig, ConvSpec, CHAR_CONV_STACK};
pub use checkpoint::{load_checkpoint, load_checkpoint_as, save_checkpoint, Checkpoint, TrainingMetadata, FORMAT_VERSION, MAGIC};
pub use word::{WordCnn, WordCnnConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("sequence too short: layer {layer} would produce an empty output from length {input_len}")]
    SequenceTooShort { layer: String, input_len: usize },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    ConfigInvalid(#[from] ConfigError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("not a model checkpoint (bad magic bytes)")]
    NotACheckpoint,
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("checkpoint digest mismatch: file is corrupt")]
    DigestMismatch,
    #[error("checkpoint probe {0} does not reproduce its stored logits")]
    ProbeMismatch(usize),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        ModelError::Io {
            context: context.into(),
            source,
        }
    }
}

/// One row of a layer-by-layer shape trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub layer: String,
    pub shape: Vec<usize>,
}

impl TraceEntry {
    pub fn new(layer: impl Into<String>, shape: Vec<usize>) -> Self {
        TraceEntry {
            layer: layer.into(),
            shape,
        }
    }
}

/// Glorot-uniform tensor: `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`,
/// drawn from the init stream for parameter slot `idx`.
pub(crate) fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, seed: u64, idx: u64) -> Tensor {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut stream = rng::stream(seed, Domain::Init, idx, 0);
    let n = shape.iter().product();
    let data = (0..n).map(|_| stream.gen_range(-a..a)).collect();
    Tensor::new(shape.to_vec(), data).expect("consistent shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Word,
    Char,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Word => "word",
            ModelKind::Char => "char",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(ModelKind::Word),
            "char" => Ok(ModelKind::Char),
            other => Err(ConfigError::Invalid(format!("unknown model kind {other:?} (expected word or char)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Word(WordCnnConfig),
    Char(CharCnnConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Word(_) => ModelKind::Word,
            ModelConfig::Char(_) => ModelKind::Char,
        }
    }

    pub fn seq_len(&self) -> usize {
        match self {
            ModelConfig::Word(c) => c.seq_len,
            ModelConfig::Char(c) => c.seq_len,
        }
    }

    pub fn symbols(&self) -> usize {
        match self {
            ModelConfig::Word(c) => c.vocab_size,
            ModelConfig::Char(c) => c.alphabet_size,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            ModelConfig::Word(c) => c.validate(),
            ModelConfig::Char(c) => c.validate(),
        }
    }

    pub fn planned_trace(&self) -> Result<Vec<TraceEntry>, ConfigError> {
        match self {
            ModelConfig::Word(c) => c.planned_trace(),
            ModelConfig::Char(c) => c.planned_trace(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Word(WordCnn),
    Char(CharCnn),
}

impl Model {
    pub fn build(config: ModelConfig, seed: u64) -> Result<Model, ModelError> {
        match config {
            ModelConfig::Word(c) => build_word_cnn(c, seed, None),
            ModelConfig::Char(c) => build_char_cnn(c, seed),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Word(_) => ModelKind::Word,
            Model::Char(_) => ModelKind::Char,
        }
    }

    pub fn config(&self) -> ModelConfig {
        match self {
            Model::Word(m) => ModelConfig::Word(m.config().clone()),
            Model::Char(m) => ModelConfig::Char(m.config().clone()),
        }
    }

    pub fn seq_len(&self) -> usize {
        self.config().seq_len()
    }

    /// Shapes observed during one evaluation-mode forward pass.
    pub fn trace(&self, input: &[usize]) -> Result<Vec<TraceEntry>, NnError> {
        match self {
            Model::Word(m) => m.trace(input),
            Model::Char(m) => m.trace(input),
        }
    }

    /// Scales every convolution weight gradient by 1.5. Only for testing the
    /// gradient checker.
    #[doc(hidden)]
    pub fn set_corrupt_conv_backward(&mut self, on: bool) {
        match self {
            Model::Word(m) => m.set_corrupt_conv_backward(on),
            Model::Char(m) => m.set_corrupt_conv_backward(on),
        }
    }
}

impl Network for Model {
    fn params(&self) -> &[Parameter] {
        match self {
            Model::Word(m) => m.params(),
            Model::Char(m) => m.params(),
        }
    }

    fn params_mut(&mut self) -> &mut [Parameter] {
        match self {
            Model::Word(m) => m.params_mut(),
            Model::Char(m) => m.params_mut(),
        }
    }

    fn logits(&self, input: &[usize]) -> Result<Tensor, NnError> {
        match self {
            Model::Word(m) => m.logits(input),
            Model::Char(m) => m.logits(input),
        }
    }

    fn accumulate_gradients(
        &self,
        input: &[usize],
        label: usize,
        dropout: Option<rand_chacha::ChaCha8Rng>,
        grads: &mut [Tensor],
    ) -> Result<f64, NnError> {
        match self {
            Model::Word(m) => m.accumulate_gradients(input, label, dropout, grads),
            Model::Char(m) => m.accumulate_gradients(input, label, dropout, grads),
        }
    }

    fn loss(&self, input: &[usize], label: usize, dropout: Option<rand_chacha::ChaCha8Rng>) -> Result<f64, NnError> {
        match self {
            Model::Word(m) => m.loss(input, label, dropout),
            Model::Char(m) => m.loss(input, label, dropout),
        }
    }
}

pub fn build_word_cnn(config: WordCnnConfig, seed: u64, embeddings: Option<EmbeddingTable>) -> Result<Model, ModelError> {
    Ok(Model::Word(WordCnn::new(config, seed, embeddings)?))
}

pub fn build_char_cnn(config: CharCnnConfig, seed: u64) -> Result<Model, ModelError> {
    Ok(Model::Char(CharCnn::new(config, seed)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    pub probs: [f64; 4],
}

/// Evaluation-mode class probabilities; ties go to the lowest index.
pub fn predict<N: Network + ?Sized>(model: &N, input: &[usize]) -> Result<Prediction, NnError> {
    let logits = model.logits(input)?;
    let probs = layers::softmax(&logits);
    let probs: [f64; 4] = probs
        .data()
        .try_into()
        .map_err(|_| crate::nn::shape_err("predict", format!("expected 4 logits, got {}", logits.len())))?;
    let class = Tensor::vector(probs.to_vec()).argmax();
    Ok(Prediction { class, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::PAD;

    fn tiny_word() -> WordCnnConfig {
        WordCnnConfig {
            vocab_size: 20,
            embed_dim: 6,
            seq_len: 12,
            frames: 5,
            hidden: 7,
            ..WordCnnConfig::default()
        }
    }

    fn tiny_char() -> CharCnnConfig {
        CharCnnConfig {
            alphabet_size: 8,
            embed_dim: 4,
            seq_len: 33,
            frames: 3,
            fc: [6, 5],
            ..CharCnnConfig::default()
        }
    }

    fn input(len: usize, symbols: usize) -> Vec<usize> {
        (0..len).map(|i| 1 + (i * 7) % (symbols - 1)).collect()
    }

    #[test]
    fn char_trace_at_512() {
        let trace = CharCnnConfig::default().planned_trace().unwrap();
        let lens: Vec<usize> = trace
            .iter()
            .filter(|t| t.layer.starts_with("conv") || t.layer.starts_with("pool"))
            .map(|t| t.shape[1])
            .collect();
        assert_eq!(lens, [506, 168, 166, 164, 162, 54]);
        assert_eq!(CharCnnConfig::default().flatten_width().unwrap(), 13_824);
    }

    #[test]
    fn char_too_short_names_layer() {
        let cfg = CharCnnConfig {
            seq_len: 11,
            ..CharCnnConfig::default()
        };
        match cfg.validate() {
            Err(ConfigError::SequenceTooShort { layer, input_len }) => {
                assert_eq!(layer, "conv2");
                assert_eq!(input_len, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn word_concat_width() {
        let trace = WordCnnConfig::default().planned_trace().unwrap();
        let concat = trace.iter().find(|t| t.layer == "concat").unwrap();
        assert_eq!(concat.shape, [768]);
    }

    #[test]
    fn word_config_rejections() {
        let bad = [
            WordCnnConfig { classes: 3, ..tiny_word() },
            WordCnnConfig { kernels: [3, 3, 5], ..tiny_word() },
            WordCnnConfig { seq_len: 4, ..tiny_word() },
            WordCnnConfig { dropout: 1.0, ..tiny_word() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn observed_traces_match_planned() {
        let w = build_word_cnn(tiny_word(), 1, None).unwrap();
        assert_eq!(w.trace(&input(12, 20)).unwrap(), tiny_word().planned_trace().unwrap());
        let c = build_char_cnn(tiny_char(), 1).unwrap();
        assert_eq!(c.trace(&input(33, 8)).unwrap(), tiny_char().planned_trace().unwrap());
    }

    #[test]
    fn zero_head_gives_uniform_class_zero() {
        let mut m = build_word_cnn(tiny_word(), 3, None).unwrap();
        for p in m.params_mut().iter_mut().filter(|p| p.name.starts_with("fc2")) {
            p.value.fill(0.0);
        }
        let pred = predict(&m, &input(12, 20)).unwrap();
        assert_eq!(pred.class, 0);
        assert_eq!(pred.probs, [0.25; 4]);
    }

    #[test]
    fn predict_is_pure() {
        let m = build_char_cnn(tiny_char(), 5).unwrap();
        let before = m.clone();
        let x = input(33, 8);
        let a = predict(&m, &x).unwrap();
        let b = predict(&m, &x).unwrap();
        assert_eq!(a, b);
        assert_eq!(m, before);
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_input_length_is_shape_error() {
        let m = build_word_cnn(tiny_word(), 1, None).unwrap();
        assert!(matches!(predict(&m, &input(11, 20)), Err(NnError::ShapeMismatch { .. })));
    }

    #[test]
    fn one_hot_char_embedding_is_frozen() {
        let cfg = CharCnnConfig {
            embed_dim: 8,
            one_hot: true,
            ..tiny_char()
        };
        let m = build_char_cnn(cfg, 0).unwrap();
        assert!(m.params()[0].frozen);
        assert_eq!(m.params()[0].value.data()[PAD], 0.0);
    }

    #[test]
    fn same_seed_same_weights() {
        assert_eq!(build_char_cnn(tiny_char(), 9).unwrap(), build_char_cnn(tiny_char(), 9).unwrap());
        assert_ne!(build_char_cnn(tiny_char(), 9).unwrap(), build_char_cnn(tiny_char(), 10).unwrap());
    }

    #[test]
    fn model_kind_parses() {
        assert_eq!("word".parse::<ModelKind>().unwrap(), ModelKind::Word);
        assert!("lstm".parse::<ModelKind>().is_err());
    }
}
