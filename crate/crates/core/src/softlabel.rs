//! Dictionary-based soft labeling.
//!
//! This is a surface phrase coder: sentences are tokenized, verb phrases
//! from a [`PatternDictionary`] are matched leftmost-longest, and the first
//! match decides the sentence's CAMEO code and QuadClass. There is no
//! parsing and no source/target attribution; the output is only meant as a
//! noisy training-label source.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::corpus::{self, ClassHistogram, CorpusError, SentenceRecord};
use crate::ontology::{CameoCode, OntologyError, QuadClass, QuadClassMap};

#[derive(Debug, Error, Clone)]
pub enum SoftLabelError {
    #[error("duplicate pattern {0:?}")]
    DuplicatePattern(String),
    #[error("empty pattern")]
    EmptyPattern,
    #[error("dictionary line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: Arc<std::io::Error>,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c,
            '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
            | '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}'
            | '\u{3001}'..='\u{3003}' | '\u{3008}'..='\u{3011}'
            | '\u{060C}' | '\u{060D}' | '\u{061B}' | '\u{061E}' | '\u{061F}'
            | '\u{066A}'..='\u{066D}' | '\u{06D4}'
            | '\u{FF01}'..='\u{FF0F}')
}

/// Lowercases, splits on Unicode whitespace and strips leading and
/// trailing punctuation from each token. Tokens left empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(is_punctuation).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// A verb phrase and the CAMEO code it signals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbPattern {
    tokens: Vec<String>,
    code: CameoCode,
}

impl VerbPattern {
    pub fn new<S: AsRef<str>>(tokens: &[S], code: CameoCode) -> Result<Self, SoftLabelError> {
        let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
        if tokens.is_empty() || tokens.iter().any(|t| t.is_empty() || t.contains(char::is_whitespace)) {
            return Err(SoftLabelError::EmptyPattern);
        }
        Ok(VerbPattern { tokens, code })
    }

    /// Tokenizes `phrase` with [`tokenize`] and pairs it with `code`.
    pub fn from_phrase(phrase: &str, code: CameoCode) -> Result<Self, SoftLabelError> {
        Self::new(&tokenize(phrase), code)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn code(&self) -> &CameoCode {
        &self.code
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MatchSpan {
    pub start: usize,
    pub length: usize,
    code_id: u32,
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<Box<str>, u32>,
    terminal: Option<u32>,
}

/// Token trie over verb patterns.
#[derive(Debug, Clone)]
pub struct PatternDictionary {
    nodes: Vec<Node>,
    codes: Vec<CameoCode>,
}

impl PatternDictionary {
    /// Compiles patterns into a trie. Two patterns with the same token
    /// sequence are rejected regardless of their codes.
    pub fn compile(patterns: impl IntoIterator<Item = VerbPattern>) -> Result<Self, SoftLabelError> {
        let mut dict = PatternDictionary {
            nodes: vec![Node::default()],
            codes: Vec::new(),
        };
        for p in patterns {
            let mut at = 0usize;
            for tok in &p.tokens {
                at = match dict.nodes[at].children.get(tok.as_str()) {
                    Some(&next) => next as usize,
                    None => {
                        let next = dict.nodes.len();
                        dict.nodes.push(Node::default());
                        dict.nodes[at].children.insert(tok.as_str().into(), next as u32);
                        next
                    }
                };
            }
            if dict.nodes[at].terminal.is_some() {
                return Err(SoftLabelError::DuplicatePattern(p.tokens.join(" ")));
            }
            dict.nodes[at].terminal = Some(dict.codes.len() as u32);
            dict.codes.push(p.code);
        }
        Ok(dict)
    }

    /// Parses the `phrase tokens... -> CODE` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SoftLabelError> {
        let mut patterns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| SoftLabelError::ParseError { line: i + 1, reason };
            let (phrase, code) = line
                .rsplit_once("->")
                .ok_or_else(|| err("expected `phrase -> CODE`".into()))?;
            let code = CameoCode::parse(code).map_err(|e: OntologyError| err(e.to_string()))?;
            let pattern = VerbPattern::from_phrase(phrase, code).map_err(|e| err(e.to_string()))?;
            patterns.push(pattern);
        }
        Self::compile(patterns)
    }

    pub fn load(path: &Path) -> Result<Self, SoftLabelError> {
        let text = std::fs::read_to_string(path).map_err(|e| SoftLabelError::Io {
            path: path.display().to_string(),
            source: Arc::new(e),
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, span: &MatchSpan) -> &CameoCode {
        &self.codes[span.code_id as usize]
    }

    /// Longest pattern starting at `start`, as `(length, code_id)`.
    fn longest_at<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(usize, u32)> {
        let mut at = 0usize;
        let mut best = None;
        for (offset, tok) in tokens[start..].iter().enumerate() {
            match self.nodes[at].children.get(tok.as_ref()) {
                Some(&next) => at = next as usize,
                None => break,
            }
            if let Some(code) = self.nodes[at].terminal {
                best = Some((offset + 1, code));
            }
        }
        best
    }

    /// Non-overlapping leftmost-longest matches, sorted by start.
    pub fn match_patterns<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<MatchSpan> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            match self.longest_at(tokens, i) {
                Some((length, code_id)) => {
                    out.push(MatchSpan { start: i, length, code_id });
                    i += length;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Free-function form of [`PatternDictionary::compile`].
pub fn compile_dictionary(patterns: Vec<VerbPattern>) -> Result<PatternDictionary, SoftLabelError> {
    PatternDictionary::compile(patterns)
}

/// Matches as `(start, length, code)` triples.
pub fn match_patterns<S: AsRef<str>>(dict: &PatternDictionary, tokens: &[S]) -> Vec<(usize, usize, CameoCode)> {
    dict.match_patterns(tokens)
        .into_iter()
        .map(|s| (s.start, s.length, dict.code(&s).clone()))
        .collect()
}

/// A dictionary, a quad map and an optional actor gate.
#[derive(Debug, Clone)]
pub struct Coder {
    pub dict: PatternDictionary,
    pub map: QuadClassMap,
    /// When set, a sentence is labelled only if at least one of its tokens
    /// is in this set.
    pub actor_gate: Option<HashSet<String>>,
}

impl Coder {
    pub fn new(dict: PatternDictionary, map: QuadClassMap) -> Self {
        Coder { dict, map, actor_gate: None }
    }

    pub fn with_actor_gate(mut self, actors: impl IntoIterator<Item = String>) -> Self {
        self.actor_gate = Some(actors.into_iter().map(|a| a.to_lowercase()).collect());
        self
    }

    pub fn label(&self, text: &str) -> Option<(QuadClass, CameoCode)> {
        let tokens = tokenize(text);
        if let Some(actors) = &self.actor_gate {
            if !tokens.iter().any(|t| actors.contains(t)) {
                return None;
            }
        }
        let first = *self.dict.match_patterns(&tokens).first()?;
        let code = self.dict.code(&first).clone();
        Some((self.map.quad_of(&code), code))
    }

    /// Labels every record of a sentence JSONL file and writes the labelled
    /// ones, in input order, to `output`. Returns the class histogram with
    /// unlabelled sentences counted as `unlabelled`.
    pub fn code_corpus(&self, input: &Path, output: &Path) -> Result<ClassHistogram, SoftLabelError> {
        let records = corpus::read_jsonl(input)?;
        let (labelled, hist) = self.code_records(&records);
        corpus::write_jsonl(&labelled, output)?;
        Ok(hist)
    }

    pub fn code_records(&self, records: &[SentenceRecord]) -> (Vec<SentenceRecord>, ClassHistogram) {
        let labels = crate::par::map(records, |r| self.label(&r.text));
        let mut hist = ClassHistogram::default();
        let mut out = Vec::new();
        for (r, label) in records.iter().zip(labels) {
            hist.add(label.as_ref().map(|(q, _)| *q));
            if let Some((q, code)) = label {
                let mut r = r.clone();
                r.label = Some(q);
                r.cameo = Some(code);
                out.push(r);
            }
        }
        (out, hist)
    }
}

/// Labels one sentence with the first leftmost-longest match, if any.
pub fn label_sentence(
    dict: &PatternDictionary,
    map: &QuadClassMap,
    text: &str,
) -> Option<(QuadClass, CameoCode)> {
    let first = *dict.match_patterns(&tokenize(text)).first()?;
    let code = dict.code(&first).clone();
    Some((map.quad_of(&code), code))
}

pub fn code_corpus(
    dict: &PatternDictionary,
    map: &QuadClassMap,
    input: &Path,
    output: &Path,
) -> Result<ClassHistogram, SoftLabelError> {
    Coder::new(dict.clone(), map.clone()).code_corpus(input, output)
}
