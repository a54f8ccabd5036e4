use std::collections::HashSet;

use super::{CorpusError, SentenceRecord};
use crate::ontology::QuadClass;
use crate::rng::{self, Domain};

/// Disjoint train/dev/test partition of a labelled corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<SentenceRecord>,
    pub dev: Vec<SentenceRecord>,
    pub test: Vec<SentenceRecord>,
    pub seed: u64,
}

/// Stratified split by class label.
///
/// Each class is shuffled with a seeded stream, then cut by the
/// largest-remainder rule, so every split holds within one record of its
/// exact per-class share. Each split keeps the input order of its records.
pub fn stratified_split(
    records: &[SentenceRecord],
    fractions: [f64; 3],
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadFractions(fractions));
    }

    let mut by_class: [Vec<usize>; 4] = Default::default();
    for (i, r) in records.iter().enumerate() {
        let label = r.label.ok_or_else(|| CorpusError::UnlabelledRecord(r.id.clone()))?;
        by_class[label.index()].push(i);
    }

    let mut membership = vec![0u8; records.len()];
    for class in QuadClass::ALL {
        let members = &mut by_class[class.index()];
        let mut stream = rng::stream(seed, Domain::Split, class.index() as u64, 0);
        rng::shuffle(members, &mut stream);
        let sizes = apportion(members.len(), fractions);
        let mut offset = 0;
        for (split, size) in sizes.into_iter().enumerate() {
            for &i in &members[offset..offset + size] {
                membership[i] = split as u8;
            }
            offset += size;
        }
    }

    let mut out = DatasetSplit {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (r, m) in records.iter().zip(membership) {
        match m {
            0 => out.train.push(r.clone()),
            1 => out.dev.push(r.clone()),
            _ => out.test.push(r.clone()),
        }
    }
    Ok(out)
}

/// Largest-remainder apportionment of `n` items; ties go to the earlier split.
fn apportion(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact = fractions.map(|f| f * n as f64);
    let mut sizes = exact.map(|x| (x + 1e-9).floor() as usize);
    let mut left = n - sizes.iter().sum::<usize>().min(n);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - sizes[a] as f64;
        let rb = exact[b] - sizes[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if fractions[i] > 0.0 {
            sizes[i] += 1;
            left -= 1;
        }
    }
    sizes
}

impl DatasetSplit {
    pub fn is_partition_of(&self, records: &[SentenceRecord]) -> bool {
        let mut seen = HashSet::new();
        for r in self.train.iter().chain(&self.dev).chain(&self.test) {
            if !seen.insert(r.id.as_str()) {
                return false;
            }
        }
        seen.len() == records.len() && records.iter().all(|r| seen.contains(r.id.as_str()))
    }
}
