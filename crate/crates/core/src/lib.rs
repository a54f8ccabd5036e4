//! Political event classification toolkit.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`ontology`]: CAMEO event codes and their reduction to four QuadClasses.
//! * [`softlabel`]: phrase-dictionary coder producing noisy training labels.
//! * [`corpus`]: sentence JSONL files, cross-lingual label transfer, splits.
//! * [`encoding`]: vocabularies, character alphabets and fixed-length encoding.
//! * [`nn`]: a small f64 tensor engine with analytic gradients and optimizers.
//! * [`models`]: the word-level and character-level 1-D ConvNets and checkpoints.
//! * [`train`]: training loop, metrics and experiment reports.
//!
//! Data-parallel work (per-example gradients, evaluation, corpus coding) runs
//! on rayon when the `parallel` feature is enabled and sequentially otherwise.
//! Results are bit-identical either way.

pub mod corpus;
pub mod digest;
pub mod encoding;
pub mod models;
pub mod nn;
pub mod ontology;
pub mod par;
pub mod rng;
pub mod softlabel;
pub mod train;

pub use ontology::{CameoCode, QuadClass, QuadClassMap};
