//! Time-sliced (word, feature) count tables.
//!
//! Input is a UTF-8 TSV file with four columns, `word \t feature \t year \t count`.
//! Lines starting with `#` are comments. Each line is routed to the slice whose
//! year range contains it; counts for the same (slice, word, feature) key add up.
//! Word and feature marginals are always derived from the pair counts.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named, inclusive range of years.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub id: String,
    pub start_year: i32,
    pub end_year: i32,
}

impl Slice {
    pub fn new(id: impl Into<String>, start_year: i32, end_year: i32) -> Self {
        Self {
            id: id.into(),
            start_year,
            end_year,
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start_year <= year && year <= self.end_year
    }
}

/// Ordered list of time slices. Construction does not validate; call
/// [`validate_slices`] before relying on the ordering invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceConfig {
    slices: Vec<Slice>,
}

/// The eight periods of the Google Books distributional thesauri, T1..T8.
const DEFAULT_PERIODS: [(&str, i32, i32); 8] = [
    ("T1", 1520, 1908),
    ("T2", 1909, 1953),
    ("T3", 1954, 1972),
    ("T4", 1973, 1986),
    ("T5", 1987, 1995),
    ("T6", 1996, 2001),
    ("T7", 2002, 2005),
    ("T8", 2006, 2008),
];

impl Default for SliceConfig {
    fn default() -> Self {
        Self::new(
            DEFAULT_PERIODS
                .iter()
                .map(|&(id, s, e)| Slice::new(id, s, e))
                .collect(),
        )
    }
}

impl SliceConfig {
    pub fn new(slices: Vec<Slice>) -> Self {
        Self { slices }
    }

    /// Parses `slice_id start_year end_year` triples, one per line.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut slices = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let malformed = |reason: &str| Error::Malformed {
                line: idx + 1,
                reason: reason.to_string(),
            };
            if parts.len() != 3 {
                return Err(malformed("expected `slice_id start_year end_year`"));
            }
            let start = parts[1]
                .parse()
                .map_err(|_| malformed("start year is not an integer"))?;
            let end = parts[2]
                .parse()
                .map_err(|_| malformed("end year is not an integer"))?;
            slices.push(Slice::new(parts[0], start, end));
        }
        Ok(Self::new(slices))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Renders the config in the same text form [`SliceConfig::parse`] reads.
    pub fn to_text(&self) -> String {
        self.slices
            .iter()
            .map(|s| format!("{} {} {}\n", s.id, s.start_year, s.end_year))
            .collect()
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.slices.iter().map(|s| s.id.as_str())
    }

    /// Chronological position of a slice.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.slices.iter().position(|s| s.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&Slice> {
        self.slices.iter().find(|s| s.id == id)
    }

    pub fn slice_for_year(&self, year: i32) -> Option<&Slice> {
        self.slices.iter().find(|s| s.contains(year))
    }

    /// Every ordered (earlier, later) pair of slices.
    pub fn all_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::new();
        for (i, a) in self.slices.iter().enumerate() {
            for b in &self.slices[i + 1..] {
                pairs.push((a.id.clone(), b.id.clone()));
            }
        }
        pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SliceViolation {
    StartAfterEnd { slice: String },
    DuplicateId { id: String },
    Unsorted { first: String, second: String },
    Overlap { first: String, second: String },
}

impl fmt::Display for SliceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StartAfterEnd { slice } => write!(f, "slice {slice}: start_year > end_year"),
            Self::DuplicateId { id } => write!(f, "duplicate slice id {id}"),
            Self::Unsorted { first, second } => {
                write!(f, "slices {first},{second} are not sorted by start_year")
            }
            Self::Overlap { first, second } => write!(f, "slices {first},{second} overlap"),
        }
    }
}

/// Returns every violated invariant of the slice list; empty iff the config is valid.
pub fn validate_slices(config: &SliceConfig) -> Vec<SliceViolation> {
    let slices = config.slices();
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for s in slices {
        if s.start_year > s.end_year {
            violations.push(SliceViolation::StartAfterEnd {
                slice: s.id.clone(),
            });
        }
        if !seen.insert(s.id.as_str()) {
            violations.push(SliceViolation::DuplicateId { id: s.id.clone() });
        }
    }
    for w in slices.windows(2) {
        if w[1].start_year < w[0].start_year {
            violations.push(SliceViolation::Unsorted {
                first: w[0].id.clone(),
                second: w[1].id.clone(),
            });
        }
    }
    // Overlap only makes sense between well-formed ranges.
    for (i, a) in slices.iter().enumerate() {
        if a.start_year > a.end_year {
            continue;
        }
        for b in &slices[i + 1..] {
            if b.start_year > b.end_year {
                continue;
            }
            if a.start_year <= b.end_year && b.start_year <= a.end_year {
                violations.push(SliceViolation::Overlap {
                    first: a.id.clone(),
                    second: b.id.clone(),
                });
            }
        }
    }
    violations
}

/// One parsed line of the count file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub word: String,
    pub feature: String,
    pub year: i32,
    pub count: u64,
}

impl CountRecord {
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(format!("expected 4 tab-separated columns, found {}", cols.len()));
        }
        let word = cols[0].trim();
        let feature = cols[1].trim();
        if word.is_empty() || feature.is_empty() {
            return Err("empty word or feature".to_string());
        }
        let year = cols[2]
            .trim()
            .parse::<i32>()
            .map_err(|_| format!("bad year `{}`", cols[2]))?;
        let count = cols[3]
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("bad count `{}`", cols[3]))?;
        if count == 0 {
            return Err("zero count".to_string());
        }
        Ok(Self {
            word: word.to_string(),
            feature: feature.to_string(),
            year,
            count,
        })
    }
}

/// Frequency tables of a single slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SliceCounts {
    word_counts: HashMap<String, u64>,
    feature_counts: HashMap<String, u64>,
    pair_counts: HashMap<String, HashMap<String, u64>>,
    total: u64,
}

impl SliceCounts {
    pub fn add(&mut self, word: &str, feature: &str, count: u64) {
        *self.word_counts.entry(word.to_string()).or_default() += count;
        *self.feature_counts.entry(feature.to_string()).or_default() += count;
        *self
            .pair_counts
            .entry(word.to_string())
            .or_default()
            .entry(feature.to_string())
            .or_default() += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &SliceCounts) {
        for (word, feats) in &other.pair_counts {
            for (feature, &count) in feats {
                self.add(word, feature, count);
            }
        }
    }

    pub fn word_count(&self, word: &str) -> u64 {
        self.word_counts.get(word).copied().unwrap_or(0)
    }

    pub fn feature_count(&self, feature: &str) -> u64 {
        self.feature_counts.get(feature).copied().unwrap_or(0)
    }

    pub fn pair_count(&self, word: &str, feature: &str) -> u64 {
        self.pair_counts
            .get(word)
            .and_then(|m| m.get(feature))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn word_counts(&self) -> &HashMap<String, u64> {
        &self.word_counts
    }

    pub fn feature_counts(&self) -> &HashMap<String, u64> {
        &self.feature_counts
    }

    /// Feature counts of one word.
    pub fn features_of(&self, word: &str) -> Option<&HashMap<String, u64>> {
        self.pair_counts.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.pair_counts.keys().map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.pair_counts.iter().flat_map(|(w, feats)| {
            feats
                .iter()
                .map(move |(f, &c)| (w.as_str(), f.as_str(), c))
        })
    }
}

/// Per-slice count tables keyed by slice id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimeSlicedCounts {
    slices: HashMap<String, SliceCounts>,
}

impl TimeSlicedCounts {
    /// Empty tables for every slice in `config`.
    pub fn for_config(config: &SliceConfig) -> Self {
        Self {
            slices: config
                .ids()
                .map(|id| (id.to_string(), SliceCounts::default()))
                .collect(),
        }
    }

    pub fn slice(&self, id: &str) -> Result<&SliceCounts> {
        self.slices
            .get(id)
            .ok_or_else(|| Error::UnknownSlice(id.to_string()))
    }

    pub fn add(&mut self, slice_id: &str, word: &str, feature: &str, count: u64) {
        self.slices
            .entry(slice_id.to_string())
            .or_default()
            .add(word, feature, count);
    }

    /// Additive merge, used to combine independently ingested shards.
    pub fn merge(&mut self, other: &TimeSlicedCounts) {
        for (id, counts) in &other.slices {
            self.slices.entry(id.clone()).or_default().merge(counts);
        }
    }

    pub fn slice_ids(&self) -> impl Iterator<Item = &str> {
        self.slices.keys().map(String::as_str)
    }
}

/// Line accounting for one ingestion. `accepted + out_of_range + malformed == lines`,
/// where `lines` counts data lines (comments and blank lines are tallied separately).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: usize,
    pub accepted: usize,
    pub out_of_range: usize,
    pub malformed: usize,
    pub comments: usize,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.lines += other.lines;
        self.accepted += other.accepted;
        self.out_of_range += other.out_of_range;
        self.malformed += other.malformed;
        self.comments += other.comments;
    }
}

/// Reads the count TSV into per-slice tables.
///
/// In strict mode the first malformed line aborts with its 1-based line number;
/// otherwise malformed lines are counted and skipped.
pub fn parse_counts<R: BufRead>(
    input: R,
    config: &SliceConfig,
    strict: bool,
) -> Result<(TimeSlicedCounts, IngestStats)> {
    let mut counts = TimeSlicedCounts::for_config(config);
    let mut stats = IngestStats::default();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            stats.comments += 1;
            continue;
        }
        stats.lines += 1;
        let record = match CountRecord::parse(trimmed) {
            Ok(r) => r,
            Err(reason) if strict => {
                return Err(Error::Malformed {
                    line: idx + 1,
                    reason,
                })
            }
            Err(_) => {
                stats.malformed += 1;
                continue;
            }
        };
        match config.slice_for_year(record.year) {
            Some(slice) => {
                counts.add(&slice.id, &record.word, &record.feature, record.count);
                stats.accepted += 1;
            }
            None => stats.out_of_range += 1,
        }
    }
    Ok((counts, stats))
}

pub fn read_counts_file(
    path: impl AsRef<Path>,
    config: &SliceConfig,
    strict: bool,
) -> Result<(TimeSlicedCounts, IngestStats)> {
    let file = File::open(path)?;
    parse_counts(BufReader::new(file), config, strict)
}
