//! Synthetic corpora with a known decision rule.
//!
//! Every sentence is a handful of neutral filler words with exactly one
//! class keyword inserted at a random position. The keyword alone decides
//! the class, so the corpus is separable at the word and character n-gram
//! level. No filler word contains any keyword as a substring.

use super::{AlignmentPair, SentenceRecord};
use crate::ontology::{CameoCode, QuadClass};
use crate::rng::{self, Domain, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureLang {
    English,
    Arabic,
}

impl FixtureLang {
    pub fn code(self) -> &'static str {
        match self {
            FixtureLang::English => "en",
            FixtureLang::Arabic => "ar",
        }
    }

    /// Class keywords, indexed by class then synonym. Synonym `j` of a
    /// class in one language translates synonym `j` in the other.
    pub fn keywords(self) -> [[&'static str; 3]; 4] {
        match self {
            FixtureLang::English => [
                ["praised", "welcomed", "endorsed"],
                ["donated", "delivered", "rebuilt"],
                ["denounced", "condemned", "threatened"],
                ["bombed", "shelled", "raided"],
            ],
            FixtureLang::Arabic => [
                ["أشاد", "رحب", "أيد"],
                ["تبرع", "سلم", "شيد"],
                ["ندد", "أدان", "توعد"],
                ["قصف", "هاجم", "داهم"],
            ],
        }
    }

    pub fn fillers(self) -> &'static [&'static str] {
        match self {
            FixtureLang::English => &[
                "the", "officials", "city", "on", "monday", "minister", "government", "in",
                "region", "local", "said", "report", "council", "northern", "group", "members",
                "yesterday", "near", "border", "capital", "president", "leaders", "army",
                "police", "spokesman", "statement", "after", "week", "talks", "people",
                "village", "province", "state", "media", "according", "forces", "district",
                "office", "public", "agency",
            ],
            FixtureLang::Arabic => &[
                "الحكومة", "المدينة", "يوم", "الاثنين", "الوزير", "في", "المنطقة", "قال",
                "تقرير", "المجلس", "الشمال", "مجموعة", "أعضاء", "أمس", "قرب", "الحدود",
                "العاصمة", "الرئيس", "القادة", "الجيش", "الشرطة", "المتحدث", "بيان", "بعد",
                "الأسبوع", "محادثات", "الناس", "القرية", "المحافظة", "الدولة", "وسائل",
                "الإعلام", "وفق", "القوات", "المكتب", "الوكالة",
            ],
        }
    }
}

/// Representative CAMEO code used for each class in fixtures.
pub fn fixture_cameo(class: QuadClass) -> CameoCode {
    let code = match class {
        QuadClass::VerbalCooperation => "051",
        QuadClass::MaterialCooperation => "073",
        QuadClass::VerbalConflict => "111",
        QuadClass::MaterialConflict => "190",
    };
    code.parse().expect("valid fixture code")
}

fn sentence(lang: FixtureLang, class: QuadClass, synonym: usize, rng: &mut impl Rng) -> String {
    let fillers = lang.fillers();
    let n = rng.gen_range(3..=6);
    let mut words: Vec<&str> = (0..n).map(|_| fillers[rng.gen_range(0..fillers.len())]).collect();
    let at = rng.gen_range(0..=words.len());
    words.insert(at, lang.keywords()[class.index()][synonym]);
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// Balanced corpus: `per_class` sentences per class, classes interleaved.
/// Ids are `<prefix>-<n>`.
pub fn separable_corpus(
    lang: FixtureLang,
    per_class: usize,
    seed: u64,
    prefix: &str,
) -> Vec<SentenceRecord> {
    let mut stream = rng::stream(seed, Domain::Fixture, lang as u64, 0);
    let mut out = Vec::with_capacity(per_class * 4);
    for _ in 0..per_class {
        for class in QuadClass::ALL {
            let syn = stream.gen_range(0..3);
            let text = sentence(lang, class, syn, &mut stream);
            out.push(
                SentenceRecord::new(format!("{prefix}-{}", out.len()), lang.code(), text)
                    .with_label(class)
                    .with_cameo(fixture_cameo(class))
                    .with_source(format!("fixture_{}", lang.code())),
            );
        }
    }
    out
}

/// Train/dev/test corpora drawn from independent streams.
pub fn separable_splits(
    lang: FixtureLang,
    train_per_class: usize,
    dev_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> [Vec<SentenceRecord>; 3] {
    [
        separable_corpus(lang, train_per_class, seed.wrapping_mul(3), "train"),
        separable_corpus(lang, dev_per_class, seed.wrapping_mul(3).wrapping_add(1), "dev"),
        separable_corpus(lang, test_per_class, seed.wrapping_mul(3).wrapping_add(2), "test"),
    ]
}

/// A labelled English corpus, an unlabelled Arabic corpus and the
/// alignments between them.
///
/// Every third English sentence is aligned to two Arabic sentences; every
/// fifth Arabic sentence is left unaligned. Arabic sentences use the
/// translated keyword, so transferred labels agree with their content.
pub fn aligned_fixture(
    n_src: usize,
    seed: u64,
) -> (Vec<SentenceRecord>, Vec<SentenceRecord>, Vec<AlignmentPair>) {
    let mut stream = rng::stream(seed, Domain::Fixture, 100, 0);
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n_src {
        let class = QuadClass::ALL[stream.gen_range(0..4)];
        let syn = stream.gen_range(0..3);
        let id = format!("en-{i}");
        src.push(
            SentenceRecord::new(&id, "en", sentence(FixtureLang::English, class, syn, &mut stream))
                .with_label(class)
                .with_cameo(fixture_cameo(class))
                .with_source("soft_en"),
        );
        let copies = if i % 3 == 0 { 2 } else { 1 };
        for _ in 0..copies {
            let tid = format!("ar-{}", tgt.len());
            tgt.push(
                SentenceRecord::new(&tid, "ar", sentence(FixtureLang::Arabic, class, syn, &mut stream))
                    .with_source("aligned_ar"),
            );
            pairs.push(AlignmentPair::new(&id, &tid));
            if tgt.len() % 5 == 0 {
                let uid = format!("ar-{}", tgt.len());
                tgt.push(
                    SentenceRecord::new(uid, "ar", sentence(FixtureLang::Arabic, class, syn, &mut stream))
                        .with_source("aligned_ar"),
                );
            }
        }
    }
    (src, tgt, pairs)
}
