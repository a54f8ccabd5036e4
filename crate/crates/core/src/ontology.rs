//! CAMEO event codes and the QuadClass reduction.
//!
//! A [`CameoCode`] is a 2–4 digit string whose first two digits name one of
//! the twenty top-level categories. A [`QuadClassMap`] assigns each top-level
//! category to one of the four quadrants spanned by valence
//! (cooperation/conflict) and realm (verbal/material).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of CAMEO top-level categories.
pub const TOP_LEVEL_COUNT: u8 = 20;

/// Text of the default quad map shipped with the toolkit.
pub const DEFAULT_QUAD_MAP: &str = include_str!("../data/quadmap.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OntologyError {
    #[error("CAMEO code {0:?} contains a non-digit character")]
    NonNumeric(String),
    #[error("CAMEO code {0:?} must have 2 to 4 digits")]
    BadLength(String),
    #[error("CAMEO code {0:?} has a top-level category outside 01-20")]
    TopLevelOutOfRange(String),
    #[error("quad map has no entry for top-level code {0}")]
    MissingTopLevel(u8),
    #[error("quad map has more than one entry for top-level code {0}")]
    DuplicateTopLevel(u8),
    #[error("quad map line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("cannot read quad map {path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown QuadClass name {0:?}")]
    UnknownClass(String),
}

/// A validated CAMEO event code such as `"14"`, `"142"` or `"1411"`.
///
/// Stored as a string so that leading zeros (`"02"`) survive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CameoCode(String);

impl CameoCode {
    pub fn parse(text: &str) -> Result<Self, OntologyError> {
        let digits = text.trim();
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(OntologyError::NonNumeric(text.to_string()));
        }
        if !(2..=4).contains(&digits.len()) {
            return Err(OntologyError::BadLength(text.to_string()));
        }
        let top: u8 = digits[..2].parse().expect("two ascii digits");
        if !(1..=TOP_LEVEL_COUNT).contains(&top) {
            return Err(OntologyError::TopLevelOutOfRange(text.to_string()));
        }
        Ok(CameoCode(digits.to_string()))
    }

    /// Integer value of the first two digits, in `1..=20`.
    pub fn top_level(&self) -> u8 {
        let b = self.0.as_bytes();
        (b[0] - b'0') * 10 + (b[1] - b'0')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Free-function form of [`CameoCode::parse`].
pub fn parse_cameo_code(text: &str) -> Result<CameoCode, OntologyError> {
    CameoCode::parse(text)
}

/// Free-function form of [`CameoCode::top_level`].
pub fn top_level(code: &CameoCode) -> u8 {
    code.top_level()
}

impl FromStr for CameoCode {
    type Err = OntologyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CameoCode::parse(s)
    }
}

impl TryFrom<String> for CameoCode {
    type Error = OntologyError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        CameoCode::parse(&s)
    }
}

impl From<CameoCode> for String {
    fn from(c: CameoCode) -> String {
        c.0
    }
}

impl fmt::Display for CameoCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valence {
    Cooperation,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Realm {
    Verbal,
    Material,
}

/// The four event quadrants. The discriminant is the class index used by
/// the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadClass {
    VerbalCooperation = 0,
    MaterialCooperation = 1,
    VerbalConflict = 2,
    MaterialConflict = 3,
}

impl QuadClass {
    pub const ALL: [QuadClass; 4] = [
        QuadClass::VerbalCooperation,
        QuadClass::MaterialCooperation,
        QuadClass::VerbalConflict,
        QuadClass::MaterialConflict,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<QuadClass> {
        Self::ALL.get(i).copied()
    }

    pub fn valence(self) -> Valence {
        match self {
            QuadClass::VerbalCooperation | QuadClass::MaterialCooperation => Valence::Cooperation,
            QuadClass::VerbalConflict | QuadClass::MaterialConflict => Valence::Conflict,
        }
    }

    pub fn realm(self) -> Realm {
        match self {
            QuadClass::VerbalCooperation | QuadClass::VerbalConflict => Realm::Verbal,
            QuadClass::MaterialCooperation | QuadClass::MaterialConflict => Realm::Material,
        }
    }

    /// The snake_case name used in files.
    pub fn name(self) -> &'static str {
        match self {
            QuadClass::VerbalCooperation => "verbal_cooperation",
            QuadClass::MaterialCooperation => "material_cooperation",
            QuadClass::VerbalConflict => "verbal_conflict",
            QuadClass::MaterialConflict => "material_conflict",
        }
    }
}

impl fmt::Display for QuadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadClass {
    type Err = OntologyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuadClass::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| OntologyError::UnknownClass(s.to_string()))
    }
}

/// Total mapping from the twenty top-level codes to QuadClasses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadClassMap {
    table: [QuadClass; TOP_LEVEL_COUNT as usize],
}

impl Default for QuadClassMap {
    fn default() -> Self {
        QuadClassMap::parse(DEFAULT_QUAD_MAP).expect("shipped quad map is valid")
    }
}

impl QuadClassMap {
    /// Builds a map from a full table indexed by `top_level - 1`.
    pub fn from_table(table: [QuadClass; TOP_LEVEL_COUNT as usize]) -> Self {
        QuadClassMap { table }
    }

    pub fn get(&self, top_level: u8) -> Option<QuadClass> {
        if (1..=TOP_LEVEL_COUNT).contains(&top_level) {
            Some(self.table[top_level as usize - 1])
        } else {
            None
        }
    }

    pub fn quad_of(&self, code: &CameoCode) -> QuadClass {
        self.table[code.top_level() as usize - 1]
    }

    pub fn load(path: &Path) -> Result<Self, OntologyError> {
        let text = std::fs::read_to_string(path).map_err(|e| OntologyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses the `<range|code> <class>` line format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, OntologyError> {
        let mut slots: [Option<QuadClass>; TOP_LEVEL_COUNT as usize] = [None; 20];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| OntologyError::ParseError {
                line: line_no,
                reason: reason.to_string(),
            };
            let mut fields = line.split_whitespace();
            let (Some(key), Some(class), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(bad("expected `<range|code> <class>`"));
            };
            let class: QuadClass = class.parse().map_err(|_| bad("unknown class name"))?;
            let (lo, hi) = match key.split_once('-') {
                Some((a, b)) => (parse_top(a), parse_top(b)),
                None => (parse_top(key), parse_top(key)),
            };
            let (Some(lo), Some(hi)) = (lo, hi) else {
                return Err(bad("top-level code must be an integer in 1-20"));
            };
            if lo > hi {
                return Err(bad("range start exceeds range end"));
            }
            for top in lo..=hi {
                let slot = &mut slots[top as usize - 1];
                if slot.is_some() {
                    return Err(OntologyError::DuplicateTopLevel(top));
                }
                *slot = Some(class);
            }
        }
        let mut table = [QuadClass::VerbalCooperation; 20];
        for (i, slot) in slots.iter().enumerate() {
            table[i] = slot.ok_or(OntologyError::MissingTopLevel(i as u8 + 1))?;
        }
        Ok(QuadClassMap { table })
    }

    /// Canonical text form: a fixed header line, then maximal runs of
    /// consecutive codes sharing a class, written as `NN-NN` or `NN`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# CAMEO top-level code (or inclusive range) -> QuadClass\n");
        let mut start = 0usize;
        while start < self.table.len() {
            let class = self.table[start];
            let mut end = start;
            while end + 1 < self.table.len() && self.table[end + 1] == class {
                end += 1;
            }
            if start == end {
                out.push_str(&format!("{:02} {}\n", start + 1, class));
            } else {
                out.push_str(&format!("{:02}-{:02} {}\n", start + 1, end + 1, class));
            }
            start = end + 1;
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        crate::digest::sha256_hex(self.to_text().as_bytes())
    }
}

fn parse_top(s: &str) -> Option<u8> {
    if s.is_empty() || s.len() > 2 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v: u8 = s.parse().ok()?;
    (1..=TOP_LEVEL_COUNT).contains(&v).then_some(v)
}

/// Free-function form of [`QuadClassMap::quad_of`].
pub fn quad_of(code: &CameoCode, map: &QuadClassMap) -> QuadClass {
    map.quad_of(code)
}

/// Free-function form of [`QuadClassMap::load`].
pub fn load_quad_map(path: &Path) -> Result<QuadClassMap, OntologyError> {
    QuadClassMap::load(path)
}
