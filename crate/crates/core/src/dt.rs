//! Salient-feature ranking by lexicographer's mutual information and the
//! distributional thesaurus graph built from shared salient features.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::TimeSlicedCounts;
use crate::error::{Error, Result};

/// Default number of salient features kept per word.
pub const DEFAULT_SALIENT_FEATURES: usize = 1000;

/// `c_wf * log2(c_wf * total / (c_w * c_f))`, zero when `c_wf == 0`.
///
/// The sign is decided with exact integer arithmetic, and the logarithm is
/// taken through `ln_1p` of the exact difference so near-independent pairs
/// keep full relative precision.
pub fn compute_lmi(c_wf: u64, c_w: u64, c_f: u64, total: u64) -> Result<f64> {
    if total == 0 || c_w > total || c_f > total || c_wf > c_w || c_wf > c_f {
        return Err(Error::InvalidArgument(format!(
            "lmi requires total >= c_w >= c_wf and total >= c_f >= c_wf, total > 0 \
             (c_wf={c_wf}, c_w={c_w}, c_f={c_f}, total={total})"
        )));
    }
    if c_wf == 0 {
        return Ok(0.0);
    }
    let joint = c_wf as u128 * total as u128;
    let expected = c_w as u128 * c_f as u128;
    let log2_ratio = match joint.cmp(&expected) {
        std::cmp::Ordering::Equal => return Ok(0.0),
        std::cmp::Ordering::Greater => {
            ((joint - expected) as f64 / expected as f64).ln_1p() / std::f64::consts::LN_2
        }
        std::cmp::Ordering::Less => {
            -((expected - joint) as f64 / joint as f64).ln_1p() / std::f64::consts::LN_2
        }
    };
    Ok(c_wf as f64 * log2_ratio)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredFeature {
    pub feature: String,
    pub lmi: f64,
}

/// Per-word feature lists ranked by descending LMI, at most `p` long,
/// positive scores only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SalientFeatures {
    p: usize,
    per_word: BTreeMap<String, Vec<ScoredFeature>>,
}

impl SalientFeatures {
    /// Builds from already-ranked lists; used by tests and fixtures.
    pub fn from_lists<I, W, F>(p: usize, lists: I) -> Self
    where
        I: IntoIterator<Item = (W, Vec<F>)>,
        W: Into<String>,
        F: Into<String>,
    {
        let per_word = lists
            .into_iter()
            .map(|(w, feats)| {
                let n = feats.len();
                let ranked = feats
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| ScoredFeature {
                        feature: f.into(),
                        lmi: (n - i) as f64,
                    })
                    .collect();
                (w.into(), ranked)
            })
            .collect();
        Self { p, per_word }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, word: &str) -> Option<&[ScoredFeature]> {
        self.per_word.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.per_word.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[ScoredFeature])> {
        self.per_word.iter().map(|(w, f)| (w.as_str(), f.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.per_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_word.is_empty()
    }
}

/// Ranks every word's features in one slice by LMI and keeps the top `p`
/// with positive score. Ties go to the lexicographically smaller feature.
pub fn rank_features(counts: &TimeSlicedCounts, slice_id: &str, p: usize) -> Result<SalientFeatures> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let slice = counts.slice(slice_id)?;
    let total = slice.total();
    let mut words: Vec<&str> = slice.words().collect();
    words.sort_unstable();

    let ranked: Vec<(String, Vec<ScoredFeature>)> = words
        .par_iter()
        .map(|&word| -> Result<(String, Vec<ScoredFeature>)> {
            let c_w = slice.word_count(word);
            let mut scored = Vec::new();
            for (feature, &c_wf) in slice.features_of(word).into_iter().flatten() {
                let lmi = compute_lmi(c_wf, c_w, slice.feature_count(feature), total)?;
                if lmi > 0.0 {
                    scored.push(ScoredFeature {
                        feature: feature.clone(),
                        lmi,
                    });
                }
            }
            scored.sort_by(|a, b| b.lmi.total_cmp(&a.lmi).then_with(|| a.feature.cmp(&b.feature)));
            scored.truncate(p);
            Ok((word.to_string(), scored))
        })
        .collect::<Result<_>>()?;

    Ok(SalientFeatures {
        p,
        per_word: ranked.into_iter().collect(),
    })
}

/// Undirected weighted word graph. Nodes are kept sorted; adjacency rows are
/// sorted by neighbor id and always symmetric.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DtGraph {
    words: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, u32)>>,
}

impl DtGraph {
    /// Builds a graph from a node list and undirected weighted edges.
    /// Endpoints missing from `nodes` are added.
    pub fn from_edges<N, S>(nodes: N, edges: &[(String, String, u32)]) -> Result<Self>
    where
        N: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = nodes.into_iter().map(Into::into).collect();
        for (a, b, _) in edges {
            words.push(a.clone());
            words.push(b.clone());
        }
        words.sort_unstable();
        words.dedup();
        let index: HashMap<String, usize> =
            words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut rows: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); words.len()];
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop on `{a}`")));
            }
            if *w == 0 {
                return Err(Error::InvalidInput(format!("zero-weight edge {a}-{b}")));
            }
            let (ia, ib) = (index[a], index[b]);
            for (x, y) in [(ia, ib), (ib, ia)] {
                if let Some(prev) = rows[x].insert(y, *w) {
                    if prev != *w {
                        return Err(Error::InvalidInput(format!(
                            "conflicting weights for edge {a}-{b}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            words,
            index,
            adjacency: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.words.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn nodes(&self) -> &[String] {
        &self.words
    }

    pub fn neighbors(&self, word: &str) -> impl Iterator<Item = (&str, u32)> {
        self.index
            .get(word)
            .map(|&i| self.adjacency[i].as_slice())
            .unwrap_or_default()
            .iter()
            .map(|&(j, w)| (self.words[j].as_str(), w))
    }

    pub fn degree(&self, word: &str) -> usize {
        self.index.get(word).map_or(0, |&i| self.adjacency[i].len())
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u32> {
        let (&ia, &ib) = (self.index.get(a)?, self.index.get(b)?);
        let row = &self.adjacency[ia];
        row.binary_search_by_key(&ib, |&(j, _)| j).ok().map(|k| row[k].1)
    }

    /// Edges with `word1 < word2`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.adjacency.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (self.words[i].as_str(), self.words[j].as_str(), w))
        })
    }

    /// Writes `word1 \t word2 \t weight` lines and a one-word-per-line node list.
    pub fn write_tsv<E: Write, N: Write>(&self, mut edges: E, mut nodes: N) -> Result<()> {
        for w in &self.words {
            writeln!(nodes, "{w}")?;
        }
        for (a, b, w) in self.edges() {
            writeln!(edges, "{a}\t{b}\t{w}")?;
        }
        edges.flush()?;
        nodes.flush()?;
        Ok(())
    }

    pub fn read_tsv<E: BufRead, N: BufRead>(edges: E, nodes: N) -> Result<Self> {
        let mut node_list = Vec::new();
        for line in nodes.lines() {
            let line = line?;
            if !line.is_empty() {
                node_list.push(line);
            }
        }
        let mut edge_list = Vec::new();
        for (idx, line) in edges.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let malformed = |reason: &str| Error::Malformed {
                line: idx + 1,
                reason: reason.into(),
            };
            if cols.len() != 3 {
                return Err(malformed("expected `word1 \\t word2 \\t weight`"));
            }
            let w = cols[2].parse().map_err(|_| malformed("bad weight"))?;
            edge_list.push((cols[0].to_string(), cols[1].to_string(), w));
        }
        Self::from_edges(node_list, &edge_list)
    }

    pub(crate) fn from_parts(words: Vec<String>, adjacency: Vec<Vec<(usize, u32)>>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self {
            words,
            index,
            adjacency,
        }
    }
}

/// Connects every pair of words sharing at least one salient feature, weighted
/// by the number of shared features. Pairs are found through a feature → words
/// inverted index.
pub fn build_dt(salient: &SalientFeatures) -> DtGraph {
    let words: Vec<String> = salient.words().map(str::to_string).collect();
    let mut postings: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, (_, feats)) in salient.iter().enumerate() {
        for f in feats {
            postings.entry(f.feature.as_str()).or_default().push(i);
        }
    }
    let adjacency: Vec<Vec<(usize, u32)>> = salient
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .enumerate()
        .map(|(u, (_, feats))| {
            let mut shared: HashMap<usize, u32> = HashMap::new();
            for f in feats.iter() {
                for &v in &postings[f.feature.as_str()] {
                    if v != u {
                        *shared.entry(v).or_default() += 1;
                    }
                }
            }
            let mut row: Vec<(usize, u32)> = shared.into_iter().collect();
            row.sort_unstable();
            row
        })
        .collect();
    DtGraph::from_parts(words, adjacency)
}
