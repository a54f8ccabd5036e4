//! Sentence corpora: JSONL records, cross-lingual label transfer and
//! stratified splitting.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{CameoCode, QuadClass, QuadClassMap};

pub mod fixtures;
mod split;
mod transfer;

pub use split::{stratified_split, DatasetSplit};
pub use transfer::{transfer_labels, TransferReport};

#[derive(Debug, Error, Clone)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: Arc<std::io::Error>,
    },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
    #[error("alignment references unknown sentence id {0:?}")]
    UnknownId(String),
    #[error("aligned source sentence {0:?} carries no label")]
    UnlabelledSource(String),
    #[error("record {0:?} has no label")]
    UnlabelledRecord(String),
    #[error("record {id:?}: label {label} disagrees with CAMEO code {cameo}")]
    LabelCameoMismatch {
        id: String,
        label: QuadClass,
        cameo: CameoCode,
    },
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source: Arc::new(e),
        }
    }
}

/// One sentence of a corpus, optionally labelled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub lang: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<QuadClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cameo: Option<CameoCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl SentenceRecord {
    pub fn new(id: impl Into<String>, lang: impl Into<String>, text: impl Into<String>) -> Self {
        SentenceRecord {
            id: id.into(),
            lang: lang.into(),
            text: text.into(),
            label: None,
            cameo: None,
            source: None,
        }
    }

    pub fn with_label(mut self, label: QuadClass) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_cameo(mut self, cameo: CameoCode) -> Self {
        self.cameo = Some(cameo);
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    fn check_fields(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim().is_empty() {
            return Err("empty text".into());
        }
        let lang_ok = self.lang.len() == 2 && self.lang.bytes().all(|b| b.is_ascii_lowercase());
        if !lang_ok {
            return Err(format!("lang {:?} is not a two-letter ISO 639-1 code", self.lang));
        }
        Ok(())
    }
}

/// Sentence-level link between a source-language and a target-language file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentPair {
    pub src_id: String,
    pub tgt_id: String,
}

impl AlignmentPair {
    pub fn new(src_id: impl Into<String>, tgt_id: impl Into<String>) -> Self {
        AlignmentPair {
            src_id: src_id.into(),
            tgt_id: tgt_id.into(),
        }
    }
}

/// Parses sentence JSONL text. Blank lines are skipped but still counted
/// for error line numbers.
pub fn parse_jsonl(text: &str) -> Result<Vec<SentenceRecord>, CorpusError> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())), Path::new("<memory>"))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SentenceRecord>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_lines(BufReader::new(file).lines(), path)
}

/// Reads a corpus and additionally checks every record carrying both a
/// label and a CAMEO code against `map`.
pub fn read_jsonl_checked(
    path: &Path,
    map: &QuadClassMap,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let records = read_jsonl(path)?;
    validate_labels(&records, map)?;
    Ok(records)
}

pub fn validate_labels(records: &[SentenceRecord], map: &QuadClassMap) -> Result<(), CorpusError> {
    for r in records {
        if let (Some(label), Some(cameo)) = (r.label, &r.cameo) {
            if map.quad_of(cameo) != label {
                return Err(CorpusError::LabelCameoMismatch {
                    id: r.id.clone(),
                    label,
                    cameo: cameo.clone(),
                });
            }
        }
    }
    Ok(())
}

fn parse_lines(
    lines: impl Iterator<Item = std::io::Result<String>>,
    path: &Path,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| CorpusError::MalformedRecord { line: i + 1, reason };
        let rec: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        rec.check_fields().map_err(malformed)?;
        if !ids.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId(rec.id));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Serializes records one per line, keys in declaration order.
pub fn to_jsonl(records: &[SentenceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

pub fn write_jsonl(records: &[SentenceRecord], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| CorpusError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}

pub fn read_alignments(path: &Path) -> Result<Vec<AlignmentPair>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(pair);
    }
    Ok(out)
}

pub fn write_alignments(pairs: &[AlignmentPair], path: &Path) -> Result<(), CorpusError> {
    let mut s = String::new();
    for p in pairs {
        s.push_str(&serde_json::to_string(p).expect("pair serializes"));
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| CorpusError::io(path, e))
}

/// Per-class counts plus the number of records without a label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHistogram {
    pub counts: [usize; 4],
    pub unlabelled: usize,
}

impl ClassHistogram {
    pub fn add(&mut self, label: Option<QuadClass>) {
        match label {
            Some(q) => self.counts[q.index()] += 1,
            None => self.unlabelled += 1,
        }
    }

    pub fn get(&self, class: QuadClass) -> usize {
        self.counts[class.index()]
    }

    pub fn labelled(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.labelled() + self.unlabelled
    }
}

impl std::fmt::Display for ClassHistogram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for q in QuadClass::ALL {
            writeln!(f, "{:<22}{:>8}", q.name(), self.get(q))?;
        }
        write!(f, "{:<22}{:>8}", "no_label", self.unlabelled)
    }
}

pub fn class_histogram(records: &[SentenceRecord]) -> ClassHistogram {
    let mut h = ClassHistogram::default();
    for r in records {
        h.add(r.label);
    }
    h
}

/// Corpus sizes of the original full-scale datasets, kept as metadata.
/// The toolkit does not ship or reproduce these corpora.
pub const REFERENCE_CORPUS_SIZES: [(&str, usize); 3] = [
    ("soft-labelled English", 49_296),
    ("soft-labelled Arabic", 11_466),
    ("machine-translated Arabic", 3_931),
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicate_id_rejected() {
        let text = r#"{"id":"a","lang":"en","text":"x"}
{"id":"a","lang":"en","text":"y"}
"#;
        assert!(matches!(parse_jsonl(text), Err(CorpusError::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn missing_text_reports_line() {
        let text = "{\"id\":\"a\",\"lang\":\"en\",\"text\":\"x\"}\n\n{\"id\":\"b\",\"lang\":\"en\"}\n";
        match parse_jsonl(text) {
            Err(CorpusError::MalformedRecord { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("text"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_and_bad_fields_rejected() {
        let empty = r#"{"id":"a","lang":"en","text":"  "}"#;
        assert!(matches!(parse_jsonl(empty), Err(CorpusError::MalformedRecord { line: 1, .. })));
        let bad_label = r#"{"id":"a","lang":"en","text":"x","label":"neutral"}"#;
        assert!(matches!(parse_jsonl(bad_label), Err(CorpusError::MalformedRecord { line: 1, .. })));
        let bad_cameo = r#"{"id":"a","lang":"en","text":"x","cameo":"99"}"#;
        assert!(matches!(parse_jsonl(bad_cameo), Err(CorpusError::MalformedRecord { line: 1, .. })));
        let bad_lang = r#"{"id":"a","lang":"english","text":"x"}"#;
        assert!(matches!(parse_jsonl(bad_lang), Err(CorpusError::MalformedRecord { line: 1, .. })));
    }

    #[test]
    fn label_cameo_consistency() {
        let map = QuadClassMap::default();
        let ok = vec![SentenceRecord::new("a", "en", "x")
            .with_label(QuadClass::MaterialConflict)
            .with_cameo("190".parse().unwrap())];
        assert!(validate_labels(&ok, &map).is_ok());
        let bad = vec![SentenceRecord::new("a", "en", "x")
            .with_label(QuadClass::VerbalCooperation)
            .with_cameo("190".parse().unwrap())];
        assert!(matches!(
            validate_labels(&bad, &map),
            Err(CorpusError::LabelCameoMismatch { .. })
        ));
    }

    #[test]
    fn histogram_counts() {
        assert_eq!(class_histogram(&[]), ClassHistogram::default());
        let recs = vec![
            SentenceRecord::new("a", "en", "x").with_label(QuadClass::VerbalConflict),
            SentenceRecord::new("b", "en", "x").with_label(QuadClass::VerbalConflict),
            SentenceRecord::new("c", "en", "x"),
        ];
        let h = class_histogram(&recs);
        assert_eq!(h.get(QuadClass::VerbalConflict), 2);
        assert_eq!(h.unlabelled, 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let recs = vec![
            SentenceRecord::new("1", "ar", "هاجم المتمردون القرية")
                .with_label(QuadClass::MaterialConflict)
                .with_cameo("190".parse().unwrap())
                .with_source("aligned_ar"),
            SentenceRecord::new("2", "en", "quote \" and \\ backslash"),
        ];
        write_jsonl(&recs, &path).unwrap();
        let bytes = std::fs::read_to_string(&path).unwrap();
        assert_eq!(bytes, to_jsonl(&recs));
        assert_eq!(read_jsonl(&path).unwrap(), recs);
        assert!(matches!(
            read_jsonl(&dir.path().join("missing.jsonl")),
            Err(CorpusError::Io { .. })
        ));
    }

    fn arb_record() -> impl Strategy<Value = SentenceRecord> {
        (
            "[a-z]{2}",
            "\\PC{1,40}",
            proptest::option::of(0usize..4),
            proptest::option::of("[a-z_]{1,8}"),
        )
            .prop_filter("non-blank text", |(_, t, _, _)| !t.trim().is_empty())
            .prop_map(|(lang, text, label, source)| {
                let mut r = SentenceRecord::new("", lang, text);
                r.label = label.map(|i| QuadClass::ALL[i]);
                r.source = source;
                r
            })
    }

    proptest! {
        #[test]
        fn jsonl_round_trip(mut recs in proptest::collection::vec(arb_record(), 0..100)) {
            for (i, r) in recs.iter_mut().enumerate() {
                r.id = format!("s{i}");
            }
            let text = to_jsonl(&recs);
            let back = parse_jsonl(&text).unwrap();
            prop_assert_eq!(&back, &recs);
            prop_assert_eq!(to_jsonl(&back), text);
        }
    }
}
