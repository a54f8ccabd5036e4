//! Flat `key = value` run settings.
//!
//! ```text
//! # comment
//! epochs = 20
//! char.seq_len = 96
//! optimizer = adam
//! ```
//!
//! Values are resolved defaults, then the file, then explicit overrides;
//! [`Settings::to_text`] writes every key so a run can be replayed.

use std::path::Path;

use thiserror::Error;

use super::TrainConfig;
use crate::models::{CharCnnConfig, WordCnnConfig};
use crate::nn::OptimizerConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SettingsError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown setting {0:?}")]
    UnknownKey(String),
    #[error("setting {key}: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Everything needed to build, train and encode for either model kind.
/// `vocab_size` and `alphabet_size` in the model configs are filled from
/// the encoder at fit time.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub word: WordCnnConfig,
    pub char: CharCnnConfig,
    pub max_vocab: usize,
    pub min_count: usize,
    pub max_alphabet: usize,
    pub train: TrainConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            word: WordCnnConfig::default(),
            char: CharCnnConfig::default(),
            max_vocab: 5000,
            min_count: 1,
            max_alphabet: 256,
            train: TrainConfig::default(),
        }
    }
}

impl Settings {
    /// Reduced sizes that train to convergence on the synthetic fixtures
    /// in seconds on one core.
    pub fn fixture() -> Self {
        let mut s = Settings::default();
        s.word.embed_dim = 32;
        s.word.seq_len = 16;
        s.word.frames = 32;
        s.word.hidden = 64;
        s.char.embed_dim = 16;
        s.char.seq_len = 96;
        s.char.frames = 32;
        s.char.fc = [128, 128];
        s.train.epochs = 20;
        s
    }

    pub fn parse(text: &str) -> Result<Self, SettingsError> {
        let mut s = Settings::default();
        s.apply_text(text)?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|e| SettingsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Settings::parse(&text)
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), SettingsError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| SettingsError::Parse {
                line: i + 1,
                reason: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                SettingsError::UnknownKey(_) | SettingsError::BadValue { .. } => SettingsError::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SettingsError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, SettingsError> {
            value.parse().map_err(|_| SettingsError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        let bad = || SettingsError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "word.embed_dim" => self.word.embed_dim = num(key, value)?,
            "word.seq_len" => self.word.seq_len = num(key, value)?,
            "word.frames" => self.word.frames = num(key, value)?,
            "word.hidden" => self.word.hidden = num(key, value)?,
            "word.pool" => self.word.pool = num(key, value)?,
            "word.dropout" => self.word.dropout = num(key, value)?,
            "word.max_vocab" => self.max_vocab = num(key, value)?,
            "word.min_count" => self.min_count = num(key, value)?,
            "char.embed_dim" => self.char.embed_dim = num(key, value)?,
            "char.seq_len" => self.char.seq_len = num(key, value)?,
            "char.frames" => self.char.frames = num(key, value)?,
            "char.fc1" => self.char.fc[0] = num(key, value)?,
            "char.fc2" => self.char.fc[1] = num(key, value)?,
            "char.dropout" => self.char.dropout = num(key, value)?,
            "char.one_hot" => self.char.one_hot = num(key, value)?,
            "char.max_alphabet" => self.max_alphabet = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "epochs" => self.train.epochs = num(key, value)?,
            "patience" => self.train.patience = num(key, value)?,
            "seed" => self.train.seed = num(key, value)?,
            "shuffle" => self.train.shuffle = num(key, value)?,
            "optimizer" => {
                let lr = self.lr();
                self.train.optimizer = match value {
                    "adam" => match OptimizerConfig::default() {
                        OptimizerConfig::Adam { beta1, beta2, eps, .. } => OptimizerConfig::Adam { lr, beta1, beta2, eps },
                        other => other,
                    },
                    "sgd" => OptimizerConfig::Sgd { lr, momentum: 0.0 },
                    _ => return Err(bad()),
                }
            }
            "lr" => {
                let v: f64 = num(key, value)?;
                match &mut self.train.optimizer {
                    OptimizerConfig::Sgd { lr, .. } | OptimizerConfig::Adam { lr, .. } => *lr = v,
                }
            }
            "momentum" | "beta1" | "beta2" | "eps" => {
                let v: f64 = num(key, value)?;
                match (&mut self.train.optimizer, key) {
                    (OptimizerConfig::Sgd { momentum, .. }, "momentum") => *momentum = v,
                    (OptimizerConfig::Adam { beta1, .. }, "beta1") => *beta1 = v,
                    (OptimizerConfig::Adam { beta2, .. }, "beta2") => *beta2 = v,
                    (OptimizerConfig::Adam { eps, .. }, "eps") => *eps = v,
                    _ => {
                        return Err(SettingsError::BadValue {
                            key: key.to_string(),
                            value: format!("{value} (not a parameter of the selected optimizer)"),
                        })
                    }
                }
            }
            _ => return Err(SettingsError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn lr(&self) -> f64 {
        match self.train.optimizer {
            OptimizerConfig::Sgd { lr, .. } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }

    /// Every key with its resolved value, in a stable order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("word.embed_dim", self.word.embed_dim.to_string()),
            ("word.seq_len", self.word.seq_len.to_string()),
            ("word.frames", self.word.frames.to_string()),
            ("word.hidden", self.word.hidden.to_string()),
            ("word.pool", self.word.pool.to_string()),
            ("word.dropout", self.word.dropout.to_string()),
            ("word.max_vocab", self.max_vocab.to_string()),
            ("word.min_count", self.min_count.to_string()),
            ("char.embed_dim", self.char.embed_dim.to_string()),
            ("char.seq_len", self.char.seq_len.to_string()),
            ("char.frames", self.char.frames.to_string()),
            ("char.fc1", self.char.fc[0].to_string()),
            ("char.fc2", self.char.fc[1].to_string()),
            ("char.dropout", self.char.dropout.to_string()),
            ("char.one_hot", self.char.one_hot.to_string()),
            ("char.max_alphabet", self.max_alphabet.to_string()),
            ("batch_size", self.train.batch_size.to_string()),
            ("epochs", self.train.epochs.to_string()),
            ("patience", self.train.patience.to_string()),
            ("seed", self.train.seed.to_string()),
            ("shuffle", self.train.shuffle.to_string()),
        ];
        match self.train.optimizer {
            OptimizerConfig::Sgd { lr, momentum } => {
                e.push(("optimizer", "sgd".into()));
                e.push(("lr", lr.to_string()));
                e.push(("momentum", momentum.to_string()));
            }
            OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                e.push(("optimizer", "adam".into()));
                e.push(("lr", lr.to_string()));
                e.push(("beta1", beta1.to_string()));
                e.push(("beta2", beta2.to_string()));
                e.push(("eps", eps.to_string()));
            }
        }
        e
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
