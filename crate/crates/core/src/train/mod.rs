//! Mini-batch training, evaluation metrics and experiment reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::EncodedExample;
use crate::models::{predict, ModelError};
use crate::nn::{Network, NnError, Optimizer, OptimizerConfig, Tensor};
use crate::ontology::QuadClass;
use crate::par;
use crate::rng::{self, Domain};

pub mod experiment;
pub mod settings;

pub use experiment::{build_encoder, fit, fixture_suite, model_config, run_experiment, ExperimentReport, ExperimentSpec, Fitted, ReportRow};
pub use settings::{Settings, SettingsError};

/// Examples per gradient work unit. Fixed so that the summation order, and
/// hence every bit of the result, is independent of the thread count.
pub const GRAD_CHUNK: usize = 4;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("{0} set is empty")]
    EmptyDataset(&'static str),
    #[error("loss became non-finite at step {0}")]
    NonFiniteLoss(u64),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("example {index} has label {label}, expected 0..4")]
    LabelOutOfRange { index: usize, label: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    /// Epochs without dev improvement tolerated before stopping.
    pub patience: usize,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 30,
            optimizer: OptimizerConfig::default(),
            seed: 0,
            patience: 5,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be at least 1".into()));
        }
        let lr = match self.optimizer {
            OptimizerConfig::Sgd { lr, .. } | OptimizerConfig::Adam { lr, .. } => lr,
        };
        if !(lr.is_finite() && lr > 0.0) {
            return Err(TrainError::InvalidConfig(format!("learning rate {lr} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches (dropout on).
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    /// Parameters from the epoch with the best dev accuracy.
    pub model: M,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
    pub steps: u64,
}

fn check_labels(data: &[EncodedExample]) -> Result<(), TrainError> {
    match data.iter().position(|e| e.label >= 4) {
        Some(index) => Err(TrainError::LabelOutOfRange {
            index,
            label: data[index].label,
        }),
        None => Ok(()),
    }
}

/// One optimizer step on `batch`: mean loss and mean gradient over the
/// batch with dropout on. Example `j` of the batch draws its dropout mask
/// from the stream keyed by `(seed, step, j)`.
pub fn train_step<M: Network>(
    model: &mut M,
    optimizer: &mut dyn Optimizer,
    batch: &[&EncodedExample],
    seed: u64,
    step: u64,
) -> Result<f64, TrainError> {
    let m: &M = model;
    let partials = par::map_chunks(batch, GRAD_CHUNK, |start, chunk| {
        let mut grads = m.zero_grads();
        let mut loss = 0.0;
        for (j, ex) in chunk.iter().enumerate() {
            let mask = rng::stream(seed, Domain::Dropout, step, (start + j) as u64);
            loss += m.accumulate_gradients(&ex.indices, ex.label, Some(mask), &mut grads)?;
        }
        Ok::<_, NnError>((loss, grads))
    });
    let n = batch.len() as f64;
    let mut total_loss = 0.0;
    let mut total: Option<Vec<Tensor>> = None;
    for partial in partials {
        let (loss, grads) = partial?;
        total_loss += loss;
        match &mut total {
            None => total = Some(grads),
            Some(acc) => {
                for (a, g) in acc.iter_mut().zip(&grads) {
                    a.add_assign(g)?;
                }
            }
        }
    }
    let mean_loss = total_loss / n;
    if !mean_loss.is_finite() {
        return Err(TrainError::NonFiniteLoss(step));
    }
    if let Some(grads) = total {
        for (p, mut g) in model.params_mut().iter_mut().zip(grads) {
            g.scale(1.0 / n);
            p.grad = g;
        }
    }
    optimizer.step(model.params_mut())?;
    Ok(mean_loss)
}

/// Trains with seeded per-epoch shuffling and keeps the parameters of the
/// best dev epoch (earliest on ties). Stops once `patience` consecutive
/// epochs fail to improve on the best dev accuracy.
pub fn train<M: Network + Clone>(
    mut model: M,
    train_set: &[EncodedExample],
    dev_set: &[EncodedExample],
    config: &TrainConfig,
) -> Result<TrainOutcome<M>, TrainError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset("training"));
    }
    if dev_set.is_empty() {
        return Err(TrainError::EmptyDataset("dev"));
    }
    check_labels(train_set)?;
    check_labels(dev_set)?;

    let mut optimizer = config.optimizer.build();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(usize, f64, M)> = None;
    let mut since_best = 0;
    let mut step = 0u64;
    for epoch in 1..=config.epochs {
        if config.shuffle {
            rng::shuffle(&mut order, &mut rng::stream(config.seed, Domain::Shuffle, epoch as u64, 0));
        }
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<&EncodedExample> = idx.iter().map(|&i| &train_set[i]).collect();
            loss_sum += train_step(&mut model, optimizer.as_mut(), &batch, config.seed, step)?;
            step += 1;
            batches += 1;
        }
        let dev_accuracy = evaluate(&model, dev_set)?.accuracy;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            dev_accuracy,
        });
        match &best {
            Some((_, acc, _)) if dev_accuracy <= *acc => since_best += 1,
            _ => {
                best = Some((epoch, dev_accuracy, model.clone()));
                since_best = 0;
            }
        }
        if since_best > config.patience {
            break;
        }
    }
    let (best_epoch, best_dev_accuracy, model) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        best_dev_accuracy,
        steps: step,
    })
}

/// Accuracy, per-class precision/recall and the confusion matrix
/// (`confusion[true][predicted]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub confusion: [[usize; 4]; 4],
    /// Zero for a class that is never predicted.
    pub precision: [f64; 4],
    /// Zero for a class absent from the data.
    pub recall: [f64; 4],
}

impl Metrics {
    /// From `(true, predicted)` class index pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, TrainError> {
        let mut confusion = [[0usize; 4]; 4];
        let mut total = 0;
        for (index, (t, p)) in pairs.into_iter().enumerate() {
            if t >= 4 || p >= 4 {
                return Err(TrainError::LabelOutOfRange { index, label: t.max(p) });
            }
            confusion[t][p] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(TrainError::EmptyDataset("evaluation"));
        }
        let correct: usize = (0..4).map(|c| confusion[c][c]).sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut precision = [0.0; 4];
        let mut recall = [0.0; 4];
        for c in 0..4 {
            let predicted: usize = (0..4).map(|t| confusion[t][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            precision[c] = ratio(confusion[c][c], predicted);
            recall[c] = ratio(confusion[c][c], actual);
        }
        Ok(Metrics {
            total,
            correct,
            accuracy: ratio(correct, total),
            confusion,
            precision,
            recall,
        })
    }

    /// Aligned text block: accuracy, then the confusion matrix with
    /// per-class precision and recall.
    pub fn to_text(&self) -> String {
        let mut out = format!("accuracy  {:.4}  ({}/{})\n\n", self.accuracy, self.correct, self.total);
        out.push_str(&format!("{:<22}", "true \\ predicted"));
        for c in QuadClass::ALL {
            out.push_str(&format!("{:>8}", short(c)));
        }
        out.push_str(&format!("{:>11}{:>9}\n", "precision", "recall"));
        for c in QuadClass::ALL {
            let i = c.index();
            out.push_str(&format!("{:<22}", c.name()));
            for n in self.confusion[i] {
                out.push_str(&format!("{n:>8}"));
            }
            out.push_str(&format!("{:>11.4}{:>9.4}\n", self.precision[i], self.recall[i]));
        }
        out
    }
}

fn short(c: QuadClass) -> &'static str {
    match c {
        QuadClass::VerbalCooperation => "VC",
        QuadClass::MaterialCooperation => "MC",
        QuadClass::VerbalConflict => "VK",
        QuadClass::MaterialConflict => "MK",
    }
}

/// Evaluation-mode metrics over a labelled set.
pub fn evaluate<M: Network>(model: &M, data: &[EncodedExample]) -> Result<Metrics, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset("evaluation"));
    }
    let preds = par::map(data, |ex| predict(model, &ex.indices).map(|p| p.class));
    let mut pairs = Vec::with_capacity(data.len());
    for (ex, p) in data.iter().zip(preds) {
        pairs.push((ex.label, p?));
    }
    Metrics::from_pairs(pairs)
}

/// One JSON object per epoch.
pub fn history_to_jsonl(history: &[EpochRecord]) -> String {
    history
        .iter()
        .map(|r| serde_json::to_string(r).expect("plain struct") + "\n")
        .collect()
}
