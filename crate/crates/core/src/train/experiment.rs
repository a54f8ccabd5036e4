//! End-to-end fitting from records and the accuracy report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{evaluate, train, EpochRecord, Settings, TrainError};
use crate::corpus::fixtures::{separable_splits, FixtureLang};
use crate::corpus::SentenceRecord;
use crate::encoding::{CharAlphabet, Encoder, Vocabulary};
use crate::models::{Checkpoint, CharCnnConfig, Model, ModelConfig, ModelKind, TrainingMetadata, WordCnnConfig};

/// Builds the encoder for `kind` from the training texts.
pub fn build_encoder(kind: ModelKind, settings: &Settings, train: &[SentenceRecord]) -> Encoder {
    let texts = train.iter().map(|r| r.text.as_str());
    match kind {
        ModelKind::Word => Encoder::Words {
            vocab: Vocabulary::build(texts, settings.max_vocab, settings.min_count),
            seq_len: settings.word.seq_len,
        },
        ModelKind::Char => Encoder::Chars {
            alphabet: CharAlphabet::build(texts, settings.max_alphabet),
            seq_len: settings.char.seq_len,
        },
    }
}

/// Model configuration sized to `encoder`.
pub fn model_config(kind: ModelKind, settings: &Settings, encoder: &Encoder) -> ModelConfig {
    match kind {
        ModelKind::Word => ModelConfig::Word(WordCnnConfig {
            vocab_size: encoder.symbols(),
            ..settings.word.clone()
        }),
        ModelKind::Char => {
            let mut c = CharCnnConfig {
                alphabet_size: encoder.symbols(),
                ..settings.char.clone()
            };
            if c.one_hot {
                c.embed_dim = c.alphabet_size;
            }
            ModelConfig::Char(c)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
}

/// Builds the encoder and model, trains, and packages the best-dev model
/// as a checkpoint. Unlabelled records are ignored.
pub fn fit(
    kind: ModelKind,
    settings: &Settings,
    train_records: &[SentenceRecord],
    dev_records: &[SentenceRecord],
    quad_map_digest: Option<String>,
) -> Result<Fitted, TrainError> {
    let encoder = build_encoder(kind, settings, train_records);
    let config = model_config(kind, settings, &encoder);
    let train_set = encoder.encode_records(train_records);
    let dev_set = encoder.encode_records(dev_records);
    let model = Model::build(config, settings.train.seed)?;
    let outcome = train(model, &train_set, &dev_set, &settings.train)?;

    let mut metrics = BTreeMap::new();
    metrics.insert("best_dev_accuracy".to_string(), outcome.best_dev_accuracy);
    if let Some(last) = outcome.history.last() {
        metrics.insert("final_train_loss".to_string(), last.train_loss);
    }
    let resolved: BTreeMap<&str, String> = settings.entries().into_iter().collect();
    let metadata = TrainingMetadata {
        seed: settings.train.seed,
        steps: outcome.steps,
        epochs_run: outcome.history.len(),
        best_epoch: outcome.best_epoch,
        metrics,
        train_config: Some(serde_json::to_value(resolved).expect("string map")),
    };
    Ok(Fitted {
        checkpoint: Checkpoint {
            model: outcome.model,
            encoder: Some(encoder),
            quad_map_digest,
            metadata,
        },
        history: outcome.history,
    })
}

/// One (model, input condition) experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub condition: String,
    pub train: Vec<SentenceRecord>,
    pub dev: Vec<SentenceRecord>,
    pub test: Vec<SentenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: ModelKind,
    pub condition: String,
    pub accuracy: f64,
    pub test_size: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub note: String,
    pub settings: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
}

const NOTE: &str = "Accuracies on the corpora supplied to this run. Synthetic fixture \
results are sanity checks and are not comparable to accuracies on full-scale news corpora.";

impl ExperimentReport {
    /// Aligned text with a section per model family.
    pub fn to_text(&self) -> String {
        let mut out = String::from("Category classifier accuracy\n");
        out.push_str(NOTE);
        out.push_str("\n\nSettings:");
        for (k, v) in &self.settings {
            out.push_str(&format!(" {k}={v}"));
        }
        out.push('\n');
        let width = self.rows.iter().map(|r| r.condition.chars().count()).max().unwrap_or(0).max(9);
        for (kind, title) in [(ModelKind::Word, "Word-based models"), (ModelKind::Char, "Character-based models")] {
            out.push_str(&format!("\n{title}\n"));
            out.push_str(&format!("  {:<width$}  {:>8}  {:>6}  {:>6}\n", "Condition", "Accuracy", "Test", "Epochs"));
            for r in self.rows.iter().filter(|r| r.model == kind) {
                let pad = width - r.condition.chars().count();
                out.push_str(&format!(
                    "  {}{}  {:>8.4}  {:>6}  {:>6}\n",
                    r.condition,
                    " ".repeat(pad),
                    r.accuracy,
                    r.test_size,
                    r.epochs_run
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

/// Trains and evaluates every spec in order.
pub fn run_experiment(specs: &[ExperimentSpec], settings: &Settings) -> Result<ExperimentReport, TrainError> {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let fitted = fit(spec.model, settings, &spec.train, &spec.dev, None)?;
        let encoder = fitted.checkpoint.encoder.as_ref().expect("fit sets the encoder");
        let test = encoder.encode_records(&spec.test);
        let metrics = evaluate(&fitted.checkpoint.model, &test)?;
        rows.push(ReportRow {
            model: spec.model,
            condition: spec.condition.clone(),
            accuracy: metrics.accuracy,
            test_size: metrics.total,
            epochs_run: fitted.history.len(),
            best_epoch: fitted.checkpoint.metadata.best_epoch,
        });
    }
    Ok(ExperimentReport {
        note: NOTE.to_string(),
        settings: settings.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        rows,
    })
}

/// Word and character models on English-like and Arabic-like fixtures.
pub fn fixture_suite(train_per_class: usize, dev_per_class: usize, test_per_class: usize, seed: u64) -> Vec<ExperimentSpec> {
    let mut specs = Vec::new();
    for model in [ModelKind::Word, ModelKind::Char] {
        for (lang, condition) in [(FixtureLang::English, "English input"), (FixtureLang::Arabic, "Arabic input")] {
            let [train, dev, test] = separable_splits(lang, train_per_class, dev_per_class, test_per_class, seed);
            specs.push(ExperimentSpec {
                model,
                condition: condition.to_string(),
                train,
                dev,
                test,
            });
        }
    }
    specs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_gives_empty_report() {
        let r = run_experiment(&[], &Settings::default()).unwrap();
        assert!(r.rows.is_empty());
        let text = r.to_text();
        assert!(text.contains("Word-based models") && text.contains("Character-based models"));
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn small_suite_runs() {
        let mut s = Settings::fixture();
        s.train.epochs = 3;
        let specs = fixture_suite(12, 4, 4, 1);
        assert_eq!(specs.len(), 4);
        let r = run_experiment(&specs[..1], &s).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].test_size, 16);
        assert!((0.0..=1.0).contains(&r.rows[0].accuracy));
        assert!(r.to_text().contains("English input"));
    }
}
