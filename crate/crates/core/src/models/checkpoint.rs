//! Binary checkpoint files.
//!
//! Layout (integers little-endian):
//!
//! ```text
//! "QCNN"  u32 version  u64 header_len  header (canonical JSON)
//! u32 n_params  { u64 n_values  f64 × n_values }*
//! u32 n_probes  { u32 len  u32 × len  f64 × 4 }*
//! sha256 of every preceding byte (32 bytes)
//! ```
//!
//! Loading rebuilds the model from the header, copies the parameters in
//! declaration order, verifies the digest, and then requires every probe
//! to reproduce its stored logits bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConfigError, Model, ModelConfig, ModelError, ModelKind};
use crate::digest;
use crate::encoding::Encoder;
use crate::nn::{Network, Tensor};
use crate::rng::{self, Domain};

pub const MAGIC: &[u8; 4] = b"QCNN";
pub const FORMAT_VERSION: u32 = 1;
const PROBES: usize = 4;

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub steps: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Final metrics by name, such as `best_dev_accuracy`.
    pub metrics: BTreeMap<String, f64>,
    /// Resolved training settings, as free-form JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub encoder: Option<Encoder>,
    pub quad_map_digest: Option<String>,
    pub metadata: TrainingMetadata,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: ModelConfig,
    encoder: Option<Encoder>,
    quad_map_digest: Option<String>,
    metadata: TrainingMetadata,
}

struct Probe {
    indices: Vec<usize>,
    logits: [f64; 4],
}

fn probe_inputs(model: &Model, seed: u64) -> Vec<Vec<usize>> {
    let cfg = model.config();
    let (len, symbols) = (cfg.seq_len(), cfg.symbols());
    (0..PROBES)
        .map(|i| {
            let mut s = rng::stream(seed, Domain::Probe, i as u64, 0);
            // Later probes carry a PAD tail like real short inputs.
            let used = len - (i * len) / (2 * PROBES);
            (0..len).map(|t| if t < used { s.gen_range(1..symbols) } else { 0 }).collect()
        })
        .collect()
}

fn logits4(model: &Model, input: &[usize]) -> Result<[f64; 4], ModelError> {
    let t = model.logits(input)?;
    Ok(t.data().try_into().expect("four logits"))
}

impl Checkpoint {
    pub fn new(model: Model) -> Self {
        Checkpoint {
            model,
            encoder: None,
            quad_map_digest: None,
            metadata: TrainingMetadata::default(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ModelError> {
        let header = Header {
            model: self.model.config(),
            encoder: self.encoder.clone(),
            quad_map_digest: self.quad_map_digest.clone(),
            metadata: self.metadata.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        let params = self.model.params();
        out.extend_from_slice(&(params.len() as u32).to_le_bytes());
        for p in params {
            out.extend_from_slice(&(p.value.len() as u64).to_le_bytes());
            for v in p.value.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let probes = probe_inputs(&self.model, self.metadata.seed);
        out.extend_from_slice(&(probes.len() as u32).to_le_bytes());
        for input in &probes {
            out.extend_from_slice(&(input.len() as u32).to_le_bytes());
            for &i in input {
                out.extend_from_slice(&(i as u32).to_le_bytes());
            }
            for v in logits4(&self.model, input)? {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let d = digest::sha256(&out);
        out.extend_from_slice(&d);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(ModelError::NotACheckpoint);
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(ModelError::FormatVersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let header_len = r.u64()?;
        let json = r.take(r.len_checked(header_len, 1)?)?;
        let n_params = r.u32()? as usize;
        let mut blobs = Vec::with_capacity(n_params.min(64));
        for _ in 0..n_params {
            let n = r.u64()?;
            let n = r.len_checked(n, 8)?;
            blobs.push((0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?);
        }
        let n_probes = r.u32()? as usize;
        let mut probes = Vec::with_capacity(n_probes.min(64));
        for _ in 0..n_probes {
            let len = r.u32()? as u64;
            let len = r.len_checked(len, 4)?;
            let indices = (0..len).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
            let mut logits = [0.0; 4];
            for l in &mut logits {
                *l = r.f64()?;
            }
            probes.push(Probe { indices, logits });
        }
        let body_end = r.pos;
        let stored = r.take(32)?;
        if r.pos != bytes.len() {
            return Err(ModelError::io(
                "checkpoint",
                std::io::Error::new(std::io::ErrorKind::InvalidData, "trailing bytes after digest"),
            ));
        }
        if digest::sha256(&bytes[..body_end]) != stored {
            return Err(ModelError::DigestMismatch);
        }

        let header: Header =
            serde_json::from_slice(json).map_err(|e| ConfigError::Invalid(format!("checkpoint header: {e}")))?;
        let mut model = Model::build(header.model, header.metadata.seed)?;
        if model.params().len() != blobs.len() {
            return Err(ConfigError::Invalid(format!(
                "checkpoint holds {} parameter blobs, architecture declares {}",
                blobs.len(),
                model.params().len()
            ))
            .into());
        }
        for (p, blob) in model.params_mut().iter_mut().zip(blobs) {
            if p.value.len() != blob.len() {
                return Err(ConfigError::Invalid(format!(
                    "parameter {} has {} values, checkpoint stores {}",
                    p.name,
                    p.value.len(),
                    blob.len()
                ))
                .into());
            }
            p.value = Tensor::new(p.value.shape().to_vec(), blob)?;
        }
        for (i, probe) in probes.iter().enumerate() {
            let got = logits4(&model, &probe.indices).map_err(|_| ModelError::ProbeMismatch(i))?;
            if got.map(f64::to_bits) != probe.logits.map(f64::to_bits) {
                return Err(ModelError::ProbeMismatch(i));
            }
        }
        Ok(Checkpoint {
            model,
            encoder: header.encoder,
            quad_map_digest: header.quad_map_digest,
            metadata: header.metadata,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn truncated() -> ModelError {
    ModelError::io(
        "checkpoint",
        std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "file is truncated"),
    )
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    /// A declared element count, rejected up front if it cannot fit in the
    /// remaining bytes.
    fn len_checked(&self, n: u64, width: u64) -> Result<usize, ModelError> {
        let remaining = (self.bytes.len() - self.pos) as u64;
        match n.checked_mul(width) {
            Some(b) if b <= remaining => Ok(n as usize),
            _ => Err(truncated()),
        }
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), ModelError> {
    let bytes = checkpoint.to_bytes()?;
    std::fs::write(path, bytes).map_err(|e| ModelError::io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::io(path.display().to_string(), e))?;
    Checkpoint::from_bytes(&bytes)
}

/// Loads a checkpoint and insists on the given architecture.
pub fn load_checkpoint_as(path: &Path, kind: ModelKind) -> Result<Checkpoint, ModelError> {
    let ck = load_checkpoint(path)?;
    if ck.model.kind() != kind {
        return Err(ConfigError::Invalid(format!("checkpoint holds a {} model, expected {kind}", ck.model.kind())).into());
    }
    Ok(ck)
}
