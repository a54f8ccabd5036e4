use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AlignmentPair, CorpusError, SentenceRecord};
use crate::ontology::{CameoCode, QuadClass};

/// Counters describing one label-transfer run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferReport {
    /// Alignment pairs read.
    pub pairs: usize,
    /// Target sentences that received a label (= output size).
    pub labelled_targets: usize,
    /// Source sentences aligned to more than one target.
    pub fanout_sources: usize,
    /// Later pairs whose source label disagreed with the label already
    /// assigned to their target.
    pub conflicts: usize,
    /// Later pairs for an already-labelled target that agreed with it.
    pub redundant: usize,
    /// Target sentences with no alignment, dropped from the output.
    pub unaligned_targets: usize,
}

/// Copies labels from `src` onto aligned sentences of `tgt`.
///
/// A source aligned to several targets labels all of them. A target aligned
/// to several sources keeps the label of the first pair in `pairs` order.
/// Output follows `tgt` order and contains only aligned targets.
pub fn transfer_labels(
    src: &[SentenceRecord],
    tgt: &[SentenceRecord],
    pairs: &[AlignmentPair],
) -> Result<(Vec<SentenceRecord>, TransferReport), CorpusError> {
    let src_index: HashMap<&str, &SentenceRecord> = src.iter().map(|r| (r.id.as_str(), r)).collect();
    let tgt_ids: HashMap<&str, usize> = tgt.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();

    let mut assigned: Vec<Option<(QuadClass, Option<CameoCode>)>> = vec![None; tgt.len()];
    let mut fanout: HashMap<&str, HashSet<usize>> = HashMap::new();
    let mut report = TransferReport {
        pairs: pairs.len(),
        ..Default::default()
    };

    for p in pairs {
        let s = src_index
            .get(p.src_id.as_str())
            .ok_or_else(|| CorpusError::UnknownId(p.src_id.clone()))?;
        let t = *tgt_ids
            .get(p.tgt_id.as_str())
            .ok_or_else(|| CorpusError::UnknownId(p.tgt_id.clone()))?;
        let label = s.label.ok_or_else(|| CorpusError::UnlabelledSource(s.id.clone()))?;
        fanout.entry(s.id.as_str()).or_default().insert(t);
        match &assigned[t] {
            None => assigned[t] = Some((label, s.cameo.clone())),
            Some((prev, _)) if *prev == label => report.redundant += 1,
            Some(_) => report.conflicts += 1,
        }
    }
    report.fanout_sources = fanout.values().filter(|targets| targets.len() > 1).count();

    let mut out = Vec::new();
    for (rec, slot) in tgt.iter().zip(assigned) {
        match slot {
            Some((label, cameo)) => {
                let mut r = rec.clone();
                r.label = Some(label);
                r.cameo = cameo;
                out.push(r);
            }
            None => report.unaligned_targets += 1,
        }
    }
    report.labelled_targets = out.len();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(id: &str, q: QuadClass) -> SentenceRecord {
        SentenceRecord::new(id, "en", "text").with_label(q)
    }
    fn tgt(id: &str) -> SentenceRecord {
        SentenceRecord::new(id, "ar", "نص")
    }

    #[test]
    fn fan_out_labels_every_target() {
        let s = vec![src("e1", QuadClass::MaterialConflict)];
        let t = vec![tgt("a1"), tgt("a2"), tgt("a3")];
        let pairs = vec![AlignmentPair::new("e1", "a1"), AlignmentPair::new("e1", "a2")];
        let (out, rep) = transfer_labels(&s, &t, &pairs).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| r.label == Some(QuadClass::MaterialConflict)));
        assert_eq!(rep.fanout_sources, 1);
        assert_eq!(rep.unaligned_targets, 1);
        assert_eq!(rep.conflicts, 0);
    }

    #[test]
    fn empty_pairs() {
        let (out, rep) = transfer_labels(&[], &[], &[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(rep, TransferReport::default());
    }

    #[test]
    fn many_to_one_first_pair_wins() {
        let s = vec![
            src("e1", QuadClass::VerbalConflict),
            src("e2", QuadClass::MaterialCooperation),
        ];
        let t = vec![tgt("a1")];
        let pairs = vec![AlignmentPair::new("e1", "a1"), AlignmentPair::new("e2", "a1")];
        let (out, rep) = transfer_labels(&s, &t, &pairs).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, Some(QuadClass::VerbalConflict));
        assert_eq!(rep.conflicts, 1);
        let reversed: Vec<_> = pairs.iter().rev().cloned().collect();
        let (out, _) = transfer_labels(&s, &t, &reversed).unwrap();
        assert_eq!(out[0].label, Some(QuadClass::MaterialCooperation));
    }

    #[test]
    fn cameo_travels_with_label() {
        let s = vec![src("e1", QuadClass::MaterialConflict).with_cameo("190".parse().unwrap())];
        let (out, _) = transfer_labels(&s, &[tgt("a1")], &[AlignmentPair::new("e1", "a1")]).unwrap();
        assert_eq!(out[0].cameo.as_ref().unwrap().as_str(), "190");
        assert_eq!(out[0].lang, "ar");
    }

    #[test]
    fn errors() {
        let s = vec![src("e1", QuadClass::MaterialConflict), SentenceRecord::new("e2", "en", "x")];
        let t = vec![tgt("a1")];
        assert!(matches!(
            transfer_labels(&s, &t, &[AlignmentPair::new("zz", "a1")]),
            Err(CorpusError::UnknownId(id)) if id == "zz"
        ));
        assert!(matches!(
            transfer_labels(&s, &t, &[AlignmentPair::new("e1", "zz")]),
            Err(CorpusError::UnknownId(id)) if id == "zz"
        ));
        assert!(matches!(
            transfer_labels(&s, &t, &[AlignmentPair::new("e2", "a1")]),
            Err(CorpusError::UnlabelledSource(id)) if id == "e2"
        ));
    }
}
