//! Gradient verification on tiny instances of both architectures.

use rand::Rng;

use super::{build_char_cnn, build_word_cnn, CharCnnConfig, Model, ModelError, ModelKind, WordCnnConfig};
use crate::nn::{finite_difference_check, GradCheckReport, Network};
use crate::rng::{self, Domain};

/// Step used for central differences.
pub const GRADCHECK_EPS: f64 = 1e-5;
/// Coordinates checked per parameter tensor.
pub const GRADCHECK_PER_PARAM: usize = 24;

pub fn tiny_word_config() -> WordCnnConfig {
    WordCnnConfig {
        vocab_size: 50,
        embed_dim: 5,
        seq_len: 16,
        frames: 4,
        hidden: 8,
        ..WordCnnConfig::default()
    }
}

/// The shortest input the character stack accepts is 33 codepoints.
pub fn tiny_char_config() -> CharCnnConfig {
    CharCnnConfig {
        alphabet_size: 8,
        embed_dim: 4,
        seq_len: 33,
        frames: 8,
        fc: [8, 8],
        ..CharCnnConfig::default()
    }
}

/// Builds the tiny model for `kind`, moves every bias off zero so no ReLU
/// sits on its kink, and compares analytic and numeric gradients of one
/// PAD-free example with a fixed dropout mask.
pub fn check_gradients(kind: ModelKind, seed: u64, corrupt_backward: bool) -> Result<GradCheckReport, ModelError> {
    let mut model: Model = match kind {
        ModelKind::Word => build_word_cnn(tiny_word_config(), seed, None)?,
        ModelKind::Char => build_char_cnn(tiny_char_config(), seed)?,
    };
    let mut s = rng::stream(seed, Domain::GradCheck, 1, 0);
    for p in model.params_mut().iter_mut().filter(|p| p.name.ends_with(".bias")) {
        p.value.data_mut().iter_mut().for_each(|b| *b = s.gen_range(-0.1..0.1));
    }
    model.set_corrupt_conv_backward(corrupt_backward);
    let cfg = model.config();
    let input: Vec<usize> = (0..cfg.seq_len()).map(|_| s.gen_range(1..cfg.symbols())).collect();
    let label = s.gen_range(0..4);
    Ok(finite_difference_check(
        &mut model,
        &input,
        label,
        Some(seed),
        GRADCHECK_EPS,
        GRADCHECK_PER_PARAM,
        seed,
    )?)
}
