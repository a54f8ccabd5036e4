//! Fixed-length numeric encodings of sentences.
//!
//! Word inputs are token indices into a [`Vocabulary`]; character inputs are
//! codepoint indices into a [`CharAlphabet`]. Both reserve index 0 for
//! padding and index 1 for unknown symbols, and both are built from the
//! training split only.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::Tensor;
use crate::rng::{self, Domain, Rng};
use crate::softlabel::tokenize;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Error, Clone)]
pub enum EncodingError {
    #[error("embedding line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: Arc<std::io::Error>,
    },
}

fn io_err(path: &Path, e: std::io::Error) -> EncodingError {
    EncodingError::Io {
        path: path.display().to_string(),
        source: Arc::new(e),
    }
}

/// Ranks symbols by count descending, then by symbol ascending, and keeps
/// those with at least `min_count` occurrences up to `max_size` total
/// entries (including the two reserved ones).
fn rank<K: Ord + Clone>(counts: BTreeMap<K, usize>, max_size: usize, min_count: usize) -> Vec<(K, usize)> {
    let mut ranked: Vec<(K, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size.saturating_sub(2));
    ranked
}

/// Serialized entry of a vocabulary or alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub token: String,
    pub index: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    counts: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.tokens, r.counts)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            counts: v.counts,
        }
    }
}

impl Vocabulary {
    fn from_parts(tokens: Vec<String>, counts: Vec<usize>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, counts, index }
    }

    /// Builds from raw texts using the soft-labeling tokenizer.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, max_size: usize, min_count: usize) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for text in texts {
            for tok in tokenize(text) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        let mut freq = vec![0, 0];
        for (tok, c) in rank(counts, max_size, min_count) {
            tokens.push(tok);
            freq.push(c);
        }
        Self::from_parts(tokens, freq)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn entries(&self) -> Vec<VocabEntry> {
        self.tokens
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(index, (token, &count))| VocabEntry {
                token: token.clone(),
                index,
                count,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        entries_to_jsonl(&self.entries())
    }

    pub fn from_jsonl(text: &str) -> Result<Self, EncodingError> {
        let entries = entries_from_jsonl(text)?;
        Ok(Self::from_parts(
            entries.iter().map(|e| e.token.clone()).collect(),
            entries.iter().map(|e| e.count).collect(),
        ))
    }

    /// Out-of-vocabulary tokens map to UNK; the result is truncated or
    /// right-padded with PAD to exactly `len`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = tokens
            .iter()
            .take(len)
            .map(|t| self.get(t.as_ref()).unwrap_or(UNK))
            .collect();
        out.resize(len, PAD);
        out
    }
}

/// Codepoint alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "AlphabetRepr", into = "AlphabetRepr")]
pub struct CharAlphabet {
    chars: Vec<Option<char>>,
    counts: Vec<usize>,
    index: HashMap<char, usize>,
}

#[derive(Serialize, Deserialize)]
struct AlphabetRepr {
    chars: String,
    counts: Vec<usize>,
}

impl From<AlphabetRepr> for CharAlphabet {
    fn from(r: AlphabetRepr) -> Self {
        let mut chars = vec![None, None];
        chars.extend(r.chars.chars().map(Some));
        CharAlphabet::from_parts(chars, r.counts)
    }
}

impl From<CharAlphabet> for AlphabetRepr {
    fn from(a: CharAlphabet) -> Self {
        AlphabetRepr {
            chars: a.chars.iter().flatten().collect(),
            counts: a.counts,
        }
    }
}

impl CharAlphabet {
    fn from_parts(chars: Vec<Option<char>>, counts: Vec<usize>) -> Self {
        let index = chars
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (c, i)))
            .collect();
        CharAlphabet { chars, counts, index }
    }

    /// Most frequent codepoints of the lowercased texts, ties broken by
    /// codepoint order.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, max_size: usize) -> Self {
        let mut counts: BTreeMap<char, usize> = BTreeMap::new();
        for text in texts {
            for c in text.to_lowercase().chars() {
                *counts.entry(c).or_default() += 1;
            }
        }
        let mut chars = vec![None, None];
        let mut freq = vec![0, 0];
        for (c, n) in rank(counts, max_size, 1) {
            chars.push(Some(c));
            freq.push(n);
        }
        Self::from_parts(chars, freq)
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn entries(&self) -> Vec<VocabEntry> {
        self.chars
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(index, (c, &count))| VocabEntry {
                token: match (index, c) {
                    (PAD, _) => PAD_TOKEN.to_string(),
                    (UNK, _) => UNK_TOKEN.to_string(),
                    (_, c) => c.map(String::from).unwrap_or_default(),
                },
                index,
                count,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        entries_to_jsonl(&self.entries())
    }

    pub fn from_jsonl(text: &str) -> Result<Self, EncodingError> {
        let entries = entries_from_jsonl(text)?;
        let mut chars = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if i < 2 {
                chars.push(None);
                continue;
            }
            let mut it = e.token.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(Some(c)),
                _ => {
                    return Err(EncodingError::ParseError {
                        line: i + 1,
                        reason: format!("{:?} is not a single codepoint", e.token),
                    })
                }
            }
        }
        Ok(Self::from_parts(chars, entries.iter().map(|e| e.count).collect()))
    }

    /// Codepoints of the lowercased text, whitespace included; unknown
    /// codepoints map to UNK; truncated or right-padded to `len`.
    pub fn encode(&self, text: &str, len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = text
            .to_lowercase()
            .chars()
            .take(len)
            .map(|c| self.get(c).unwrap_or(UNK))
            .collect();
        out.resize(len, PAD);
        out
    }
}

fn entries_to_jsonl(entries: &[VocabEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        s.push_str(&serde_json::to_string(e).expect("entry serializes"));
        s.push('\n');
    }
    s
}

fn entries_from_jsonl(text: &str) -> Result<Vec<VocabEntry>, EncodingError> {
    let mut out: Vec<VocabEntry> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let e: VocabEntry = serde_json::from_str(line).map_err(|err| EncodingError::ParseError {
            line: i + 1,
            reason: err.to_string(),
        })?;
        if e.index != out.len() {
            return Err(EncodingError::ParseError {
                line: i + 1,
                reason: format!("index {} out of sequence", e.index),
            });
        }
        out.push(e);
    }
    if out.len() < 2 {
        return Err(EncodingError::ParseError {
            line: out.len() + 1,
            reason: "missing reserved PAD/UNK entries".into(),
        });
    }
    Ok(out)
}

pub fn build_vocab<'a>(texts: impl IntoIterator<Item = &'a str>, max_size: usize, min_count: usize) -> Vocabulary {
    Vocabulary::build(texts, max_size, min_count)
}

pub fn encode_words<S: AsRef<str>>(vocab: &Vocabulary, tokens: &[S], len: usize) -> Vec<usize> {
    vocab.encode(tokens, len)
}

pub fn encode_chars(alphabet: &CharAlphabet, text: &str, len: usize) -> Vec<usize> {
    alphabet.encode(text, len)
}

/// A lookup table of shape `rows × dim` with row 0 (PAD) all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub weights: Tensor,
    pub trainable: bool,
}

impl EmbeddingTable {
    /// Every row except PAD uniform in (-0.25, 0.25), drawn from a seeded
    /// stream.
    pub fn random(rows: usize, dim: usize, seed: u64) -> Self {
        let mut stream = rng::stream(seed, Domain::Embedding, rows as u64, dim as u64);
        let mut data: Vec<f64> = (0..rows * dim).map(|_| stream.gen_range(-0.25..0.25)).collect();
        data[..dim].iter_mut().for_each(|x| *x = 0.0);
        EmbeddingTable {
            weights: Tensor::new(vec![rows, dim], data).expect("consistent shape"),
            trainable: true,
        }
    }

    /// Fixed one-hot rows: row `i >= 1` is the unit vector `e_i`, PAD is zero.
    pub fn one_hot(rows: usize) -> Self {
        let mut t = Tensor::zeros(&[rows, rows]);
        for i in 1..rows {
            t.data_mut()[i * rows + i] = 1.0;
        }
        EmbeddingTable {
            weights: t,
            trainable: false,
        }
    }

    pub fn rows(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.weights.shape()[1]
    }
}

/// Reads a `token v1 ... vd` text file. Rows of in-vocabulary tokens are
/// copied; other rows keep the seeded random initialization; PAD is zero.
pub fn load_embeddings(path: &Path, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<EmbeddingTable, EncodingError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut table = EmbeddingTable::random(vocab.len(), dim, seed);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(EncodingError::DimensionMismatch {
                line: i + 1,
                expected: dim,
                found: values.len(),
            });
        }
        let Some(row) = vocab.get(token) else { continue };
        if row == PAD {
            continue;
        }
        let dst = &mut table.weights.data_mut()[row * dim..(row + 1) * dim];
        for (d, v) in dst.iter_mut().zip(values) {
            *d = v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| EncodingError::ParseError {
                    line: i + 1,
                    reason: format!("bad number {v:?}"),
                })?;
        }
    }
    Ok(table)
}

/// One fixed-length encoded input and its class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedExample {
    pub indices: Vec<usize>,
    pub label: usize,
}

/// Text-to-indices encoder stored alongside a trained model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    Words { vocab: Vocabulary, seq_len: usize },
    Chars { alphabet: CharAlphabet, seq_len: usize },
}

impl Encoder {
    pub fn encode(&self, text: &str) -> Vec<usize> {
        match self {
            Encoder::Words { vocab, seq_len } => vocab.encode(&tokenize(text), *seq_len),
            Encoder::Chars { alphabet, seq_len } => alphabet.encode(text, *seq_len),
        }
    }

    pub fn symbols(&self) -> usize {
        match self {
            Encoder::Words { vocab, .. } => vocab.len(),
            Encoder::Chars { alphabet, .. } => alphabet.len(),
        }
    }

    pub fn seq_len(&self) -> usize {
        match self {
            Encoder::Words { seq_len, .. } | Encoder::Chars { seq_len, .. } => *seq_len,
        }
    }

    /// Encodes labelled records; unlabelled records are skipped.
    pub fn encode_records(&self, records: &[crate::corpus::SentenceRecord]) -> Vec<EncodedExample> {
        let encoded = crate::par::map(records, |r| {
            r.label.map(|l| EncodedExample {
                indices: self.encode(&r.text),
                label: l.index(),
            })
        });
        encoded.into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vocab_ranking() {
        let v = build_vocab(["a b", "a"], 100, 1);
        assert_eq!(v.get(PAD_TOKEN), Some(0));
        assert_eq!(v.get(UNK_TOKEN), Some(1));
        assert_eq!(v.get("a"), Some(2));
        assert_eq!(v.get("b"), Some(3));
        assert_eq!(v.len(), 4);

        let v2 = build_vocab(["a b", "a"], 100, 2);
        assert_eq!(v2.len(), 3);
        assert_eq!(v2.get("b"), None);

        let tie = build_vocab(["zeta alpha", "mid"], 100, 1);
        assert_eq!(tie.get("alpha"), Some(2));
        assert_eq!(tie.get("mid"), Some(3));
        assert_eq!(tie.get("zeta"), Some(4));

        let capped = build_vocab(["a a a b b c"], 4, 1);
        assert_eq!(capped.len(), 4);
        assert_eq!(capped.get("c"), None);
    }

    #[test]
    fn word_encoding() {
        let v = build_vocab(["a b", "a"], 100, 1);
        assert_eq!(encode_words(&v, &["a"], 3), vec![2, 0, 0]);
        assert_eq!(encode_words(&v, &["zzz"], 3), vec![1, 0, 0]);
        assert_eq!(encode_words(&v, &["a", "b", "a", "b", "a"], 3), vec![2, 3, 2]);
        assert_eq!(encode_words::<&str>(&v, &[], 2), vec![0, 0]);
    }

    #[test]
    fn char_encoding() {
        let a = CharAlphabet::build(["ab", "a"], 256);
        assert_eq!(a.get('a'), Some(2));
        assert_eq!(a.get('b'), Some(3));
        assert_eq!(encode_chars(&a, "ab", 4), vec![2, 3, 0, 0]);
        assert_eq!(encode_chars(&a, "abba", 2), vec![2, 3]);
        assert_eq!(encode_chars(&a, "AZ", 2), vec![2, 1]);
        assert_eq!(encode_chars(&a, "", 3), vec![0, 0, 0]);
    }

    #[test]
    fn arabic_by_codepoint() {
        let text = "قصف الجيش";
        let a = CharAlphabet::build([text], 256);
        let enc = a.encode(text, 16);
        assert_eq!(enc.iter().filter(|&&i| i != PAD).count(), text.chars().count());
        let decoded: String = enc.iter().filter(|&&i| i != PAD).map(|&i| a.chars[i].unwrap()).collect();
        assert_eq!(decoded, text);
    }

    #[test]
    fn serialization_round_trip() {
        let v = build_vocab(["the cat sat", "the dog"], 100, 1);
        assert_eq!(Vocabulary::from_jsonl(&v.to_jsonl()).unwrap(), v);
        let a = CharAlphabet::build(["héllo wörld", "مرحبا"], 256);
        let back = CharAlphabet::from_jsonl(&a.to_jsonl()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_jsonl(), a.to_jsonl());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<CharAlphabet>(&json).unwrap(), a);
    }

    #[test]
    fn embeddings_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let v = build_vocab(["a b"], 100, 1);
        let full = dir.path().join("full.txt");
        std::fs::write(&full, "a 1 2\nb 3 4\nother 9 9\n").unwrap();
        let t = load_embeddings(&full, &v, 2, 0).unwrap();
        assert_eq!(&t.weights.data()[4..8], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(&t.weights.data()[0..2], &[0.0, 0.0]);

        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, "").unwrap();
        let t = load_embeddings(&empty, &v, 2, 0).unwrap();
        assert_eq!(t, EmbeddingTable::random(4, 2, 0));
        assert!(t.weights.data()[2..].iter().all(|x| x.abs() < 0.25 && *x != 0.0));

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "a 1 2\nb 3\n").unwrap();
        assert!(matches!(
            load_embeddings(&bad, &v, 2, 0),
            Err(EncodingError::DimensionMismatch { line: 2, expected: 2, found: 1 })
        ));
        std::fs::write(&bad, "a 1 x\n").unwrap();
        assert!(matches!(load_embeddings(&bad, &v, 2, 0), Err(EncodingError::ParseError { line: 1, .. })));
    }

    #[test]
    fn one_hot_table() {
        let t = EmbeddingTable::one_hot(3);
        assert_eq!(t.weights.data(), &[0., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert!(!t.trainable);
    }

    proptest! {
        #[test]
        fn encodings_have_exact_length(text in "\\PC{0,80}", len in 1usize..40) {
            let a = CharAlphabet::build([text.as_str()], 64);
            let v = build_vocab([text.as_str()], 64, 1);
            prop_assert_eq!(a.encode(&text, len).len(), len);
            prop_assert_eq!(v.encode(&tokenize(&text), len).len(), len);
            prop_assert!(a.encode(&text, len).iter().all(|&i| i < a.len()));
        }

        #[test]
        fn unicode_round_trips_by_codepoint(text in "\\PC{1,30}") {
            let lower = text.to_lowercase();
            let a = CharAlphabet::build([lower.as_str()], 10_000);
            let n = lower.chars().count();
            let decoded: String = a.encode(&lower, n).iter().map(|&i| a.chars[i].unwrap()).collect();
            prop_assert_eq!(decoded, lower);
        }
    }
}
