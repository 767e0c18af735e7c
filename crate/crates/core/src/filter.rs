//! Candidate pruning: agreement across clustering runs, noun-only words, and
//! the frequency torso of the source slice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tracker::{ChangeRecord, ChangeType};

/// Candidates of one (source, target) comparison, keyed by (word, change type).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateList {
    pub source_slice: String,
    pub target_slice: String,
    entries: BTreeMap<(String, ChangeType), Vec<ChangeRecord>>,
}

impl CandidateList {
    pub fn new(source_slice: impl Into<String>, target_slice: impl Into<String>) -> Self {
        Self {
            source_slice: source_slice.into(),
            target_slice: target_slice.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn from_records<I>(source_slice: &str, target_slice: &str, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = ChangeRecord>,
    {
        let mut list = Self::new(source_slice, target_slice);
        for r in records {
            list.insert(r)?;
        }
        Ok(list)
    }

    pub fn insert(&mut self, record: ChangeRecord) -> Result<()> {
        if record.source_slice != self.source_slice || record.target_slice != self.target_slice {
            return Err(Error::InvalidInput(format!(
                "record for {}->{} added to candidate list {}->{}",
                record.source_slice, record.target_slice, self.source_slice, self.target_slice
            )));
        }
        self.entries
            .entry((record.word.clone(), record.change_type))
            .or_default()
            .push(record);
        Ok(())
    }

    /// Inserts a bare (word, type) entry with no attached record.
    pub fn insert_key(&mut self, word: impl Into<String>, change_type: ChangeType) {
        self.entries.entry((word.into(), change_type)).or_default();
    }

    pub fn contains(&self, word: &str, change_type: ChangeType) -> bool {
        self.entries.contains_key(&(word.to_string(), change_type))
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, ChangeType)> {
        self.entries.keys().map(|(w, t)| (w.as_str(), *t))
    }

    pub fn records(&self) -> impl Iterator<Item = &ChangeRecord> {
        self.entries.values().flatten()
    }

    pub fn records_for(&self, word: &str, change_type: ChangeType) -> &[ChangeRecord] {
        self.entries
            .get(&(word.to_string(), change_type))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Distinct words, sorted.
    pub fn words(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|(w, _)| w.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of a single change type.
    pub fn of_type(&self, change_type: ChangeType) -> CandidateList {
        self.retain_keys(|_, t| t == change_type)
    }

    /// Union of disjoint lists for the same comparison.
    pub fn extend(&mut self, other: CandidateList) {
        for (k, v) in other.entries {
            self.entries.entry(k).or_default().extend(v);
        }
    }

    fn retain_keys(&self, mut keep: impl FnMut(&str, ChangeType) -> bool) -> CandidateList {
        CandidateList {
            source_slice: self.source_slice.clone(),
            target_slice: self.target_slice.clone(),
            entries: self
                .entries
                .iter()
                .filter(|((w, t), _)| keep(w, *t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

/// Keeps the (word, type) entries present in every run, with the records of all runs.
pub fn stage1_intersect(runs: &[CandidateList]) -> Result<CandidateList> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidArgument("stage 1 needs at least one run".into()))?;
    for r in &runs[1..] {
        if r.source_slice != first.source_slice || r.target_slice != first.target_slice {
            return Err(Error::InvalidInput(format!(
                "runs compare different slices: {}->{} vs {}->{}",
                first.source_slice, first.target_slice, r.source_slice, r.target_slice
            )));
        }
    }
    let mut out = CandidateList::new(first.source_slice.clone(), first.target_slice.clone());
    for key in first.entries.keys() {
        if runs.iter().all(|r| r.entries.contains_key(key)) {
            let mut records: Vec<ChangeRecord> =
                runs.iter().flat_map(|r| r.entries[key].iter().cloned()).collect();
            records.sort_by(|a, b| a.runs.cmp(&b.runs));
            out.entries.insert(key.clone(), records);
        }
    }
    Ok(out)
}

/// Word → Penn Treebank tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PosLexicon {
    tags: HashMap<String, String>,
}

impl PosLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, tag: impl Into<String>) {
        self.tags.insert(word.into(), tag.into());
    }

    /// Reads `word \t tag` lines; `#` comments and blank lines are skipped.
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut lex = Self::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: idx + 1,
                reason: "expected `word \\t tag`".into(),
            })?;
            lex.insert(word.trim(), tag.trim());
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.tags.get(word).map(String::as_str)
    }

    /// Entries sorted by word.
    pub fn entries(&self) -> Vec<(&str, &str)> {
        let mut e: Vec<(&str, &str)> = self.tags.iter().map(|(w, t)| (w.as_str(), t.as_str())).collect();
        e.sort_unstable();
        e
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Tag from a `word|TAG` suffix, else from the lexicon.
pub fn pos_of<'a>(word: &'a str, lexicon: &'a PosLexicon) -> Option<&'a str> {
    match word.rsplit_once('|') {
        Some((_, tag)) if !tag.is_empty() => Some(tag),
        _ => lexicon.get(word),
    }
}

/// Keeps words tagged NN or NNS. Untagged words are dropped.
pub fn stage2_pos_filter(list: &CandidateList, lexicon: &PosLexicon) -> CandidateList {
    list.retain_keys(|w, _| matches!(pos_of(w, lexicon), Some("NN" | "NNS")))
}

/// Number of words cut for a fraction of `n`. The small slack keeps products
/// like `0.3 * 10` from flooring to 2.
fn trim_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Sorts the candidate words by source-slice frequency (descending, ties by
/// word) and drops the `floor(head * n)` most and `floor(tail * n)` least
/// frequent. Words missing from `source_freq` count as zero.
pub fn stage3_torso(
    list: &CandidateList,
    source_freq: &HashMap<String, u64>,
    head: f64,
    tail: f64,
) -> Result<CandidateList> {
    if !(head >= 0.0 && tail >= 0.0 && head + tail < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "torso cuts head={head}, tail={tail} must be non-negative with head + tail < 1"
        )));
    }
    let mut ranked: Vec<(&str, u64)> = list
        .words()
        .into_iter()
        .map(|w| (w, source_freq.get(w).copied().unwrap_or(0)))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = ranked.len();
    let (drop_head, drop_tail) = (trim_count(head, n), trim_count(tail, n));
    let kept: BTreeSet<&str> = ranked[drop_head..n - drop_tail].iter().map(|&(w, _)| w).collect();
    Ok(list.retain_keys(|w, _| kept.contains(w)))
}
