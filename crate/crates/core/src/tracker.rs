//! Cluster-level comparison of two sense clusterings of the same word.
//!
//! The intersection matrix has one row per source cluster plus a "novel" row,
//! and one column per target cluster plus a "vanished" column. It stores raw
//! word counts; the detectors normalize by target size (birth, join) or by
//! source size (split, death).

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ego::SenseClustering;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    raw: Vec<Vec<usize>>,
    source_sizes: Vec<usize>,
    target_sizes: Vec<usize>,
}

impl IntersectionMatrix {
    /// Number of source clusters.
    pub fn m(&self) -> usize {
        self.source_sizes.len()
    }

    /// Number of target clusters.
    pub fn n(&self) -> usize {
        self.target_sizes.len()
    }

    /// `(m+1) x (n+1)` counts; the bottom-right cell is always zero.
    pub fn raw(&self) -> &[Vec<usize>] {
        &self.raw
    }

    pub fn get(&self, k: usize, l: usize) -> usize {
        self.raw[k][l]
    }

    pub fn source_sizes(&self) -> &[usize] {
        &self.source_sizes
    }

    pub fn target_sizes(&self) -> &[usize] {
        &self.target_sizes
    }

    /// Words of target cluster `l` absent from every source cluster.
    pub fn novel(&self, l: usize) -> usize {
        self.raw[self.m()][l]
    }

    /// Words of source cluster `k` absent from every target cluster.
    pub fn vanished(&self, k: usize) -> usize {
        self.raw[k][self.n()]
    }

    /// Swaps the roles of source and target.
    pub fn transpose(&self) -> Self {
        let rows = self.raw.len();
        let cols = self.raw[0].len();
        let raw = (0..cols)
            .map(|c| (0..rows).map(|r| self.raw[r][c]).collect())
            .collect();
        Self {
            raw,
            source_sizes: self.target_sizes.clone(),
            target_sizes: self.source_sizes.clone(),
        }
    }
}

fn membership<S: AsRef<str>>(clusters: &[Vec<S>], side: &str) -> Result<HashMap<String, usize>> {
    let mut owner = HashMap::new();
    for (idx, cluster) in clusters.iter().enumerate() {
        if cluster.is_empty() {
            return Err(Error::InvalidInput(format!("{side} cluster {idx} is empty")));
        }
        for w in cluster {
            if let Some(prev) = owner.insert(w.as_ref().to_string(), idx) {
                return Err(Error::InvalidInput(format!(
                    "{side} word `{}` appears in clusters {prev} and {idx}",
                    w.as_ref()
                )));
            }
        }
    }
    Ok(owner)
}

/// Builds the intersection matrix of two partitions. Both inputs must have
/// disjoint, non-empty clusters.
pub fn intersection_matrix<S: AsRef<str>, T: AsRef<str>>(
    source: &[Vec<S>],
    target: &[Vec<T>],
) -> Result<IntersectionMatrix> {
    let src_owner = membership(source, "source")?;
    let tgt_owner = membership(target, "target")?;
    let (m, n) = (source.len(), target.len());
    let mut raw = vec![vec![0usize; n + 1]; m + 1];
    for (l, cluster) in target.iter().enumerate() {
        for w in cluster {
            let k = src_owner.get(w.as_ref()).copied().unwrap_or(m);
            raw[k][l] += 1;
        }
    }
    for (k, cluster) in source.iter().enumerate() {
        for w in cluster {
            if !tgt_owner.contains_key(w.as_ref()) {
                raw[k][n] += 1;
            }
        }
    }
    Ok(IntersectionMatrix {
        raw,
        source_sizes: source.iter().map(Vec::len).collect(),
        target_sizes: target.iter().map(Vec::len).collect(),
    })
}

fn fraction(part: usize, whole: usize) -> f64 {
    part as f64 / whole as f64
}

/// Target clusters whose novel share is at least `threshold`.
pub fn detect_birth(matrix: &IntersectionMatrix, threshold: f64) -> Vec<usize> {
    (0..matrix.n())
        .filter(|&l| fraction(matrix.novel(l), matrix.target_sizes[l]) >= threshold)
        .collect()
}

/// Source clusters whose vanished share is at least `threshold`.
pub fn detect_death(matrix: &IntersectionMatrix, threshold: f64) -> Vec<usize> {
    detect_birth(&matrix.transpose(), threshold)
}

/// One cluster divided among several clusters on the other side.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    pub whole: usize,
    pub parts: Vec<usize>,
    /// Share of the whole covered by each part, aligned with `parts`.
    pub coverage: Vec<f64>,
    pub union: f64,
}

/// A source cluster is split when at least two target clusters each hold
/// `>= per_cluster_min` of it and together hold `> union_min` of it.
pub fn detect_split(matrix: &IntersectionMatrix, per_cluster_min: f64, union_min: f64) -> Vec<Division> {
    let mut out = Vec::new();
    for k in 0..matrix.m() {
        let size = matrix.source_sizes[k];
        let parts: Vec<usize> = (0..matrix.n())
            .filter(|&l| fraction(matrix.raw[k][l], size) >= per_cluster_min)
            .collect();
        if parts.len() < 2 {
            continue;
        }
        let covered: usize = parts.iter().map(|&l| matrix.raw[k][l]).sum();
        let union = fraction(covered, size);
        if union > union_min {
            out.push(Division {
                whole: k,
                coverage: parts.iter().map(|&l| fraction(matrix.raw[k][l], size)).collect(),
                parts,
                union,
            });
        }
    }
    out
}

/// Split detection with source and target exchanged: `whole` is a target
/// cluster and `parts` are source clusters.
pub fn detect_join(matrix: &IntersectionMatrix, per_cluster_min: f64, union_min: f64) -> Vec<Division> {
    detect_split(&matrix.transpose(), per_cluster_min, union_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeType {
    Birth,
    Split,
    Join,
    Death,
}

impl ChangeType {
    pub const ALL: [ChangeType; 4] = [ChangeType::Birth, ChangeType::Split, ChangeType::Join, ChangeType::Death];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeType::Birth => "birth",
            ChangeType::Split => "split",
            ChangeType::Join => "join",
            ChangeType::Death => "death",
        }
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChangeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChangeType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown change type `{s}`")))
    }
}

/// Detector thresholds, all fractions in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub birth: f64,
    pub split_min: f64,
    pub split_union: f64,
    pub death: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            birth: 0.8,
            split_min: 0.3,
            split_union: 0.8,
            death: 0.8,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("birth", self.birth),
            ("split_min", self.split_min),
            ("split_union", self.split_union),
            ("death", self.death),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} threshold {v} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub novel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanished: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub union: Option<f64>,
}

/// One detected change between a source and a target slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub word: String,
    #[serde(rename = "type")]
    pub change_type: ChangeType,
    pub source_slice: String,
    pub target_slice: String,
    pub source_clusters: Vec<usize>,
    pub target_clusters: Vec<usize>,
    pub scores: Scores,
    pub runs: Vec<usize>,
}

/// Runs all four detectors on one matrix.
pub fn detect_changes(
    matrix: &IntersectionMatrix,
    thresholds: &Thresholds,
) -> Vec<(ChangeType, Vec<usize>, Vec<usize>, Scores)> {
    let mut out = Vec::new();
    for l in detect_birth(matrix, thresholds.birth) {
        let novel = fraction(matrix.novel(l), matrix.target_sizes[l]);
        out.push((
            ChangeType::Birth,
            vec![],
            vec![l],
            Scores {
                novel: Some(novel),
                ..Scores::default()
            },
        ));
    }
    for d in detect_split(matrix, thresholds.split_min, thresholds.split_union) {
        out.push((
            ChangeType::Split,
            vec![d.whole],
            d.parts,
            Scores {
                coverage: Some(d.coverage),
                union: Some(d.union),
                ..Scores::default()
            },
        ));
    }
    for d in detect_join(matrix, thresholds.split_min, thresholds.split_union) {
        out.push((
            ChangeType::Join,
            d.parts,
            vec![d.whole],
            Scores {
                coverage: Some(d.coverage),
                union: Some(d.union),
                ..Scores::default()
            },
        ));
    }
    for k in detect_death(matrix, thresholds.death) {
        let vanished = fraction(matrix.vanished(k), matrix.source_sizes[k]);
        out.push((
            ChangeType::Death,
            vec![k],
            vec![],
            Scores {
                vanished: Some(vanished),
                ..Scores::default()
            },
        ));
    }
    out
}

/// Compares two clusterings of `word` and materializes the detected changes.
pub fn compare_word(
    word: &str,
    source: &SenseClustering,
    target: &SenseClustering,
    thresholds: &Thresholds,
) -> Result<Vec<ChangeRecord>> {
    if source.word != word || target.word != word {
        return Err(Error::InvalidInput(format!(
            "clusterings of `{}` and `{}` compared as `{word}`",
            source.word, target.word
        )));
    }
    let matrix = intersection_matrix(&source.clusters, &target.clusters)?;
    let mut runs = vec![source.run_index, target.run_index];
    runs.dedup();
    Ok(detect_changes(&matrix, thresholds)
        .into_iter()
        .map(|(change_type, src, tgt, scores)| ChangeRecord {
            word: word.to_string(),
            change_type,
            source_slice: source.slice_id.clone(),
            target_slice: target.slice_id.clone(),
            source_clusters: src,
            target_clusters: tgt,
            scores,
            runs: runs.clone(),
        })
        .collect())
}

pub fn write_changes<'a, W, I>(mut out: W, records: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ChangeRecord>,
{
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_changes<R: BufRead>(input: R) -> Result<Vec<ChangeRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(groups: &[&[&str]]) -> Vec<Vec<String>> {
        groups
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn clustering(word: &str, slice: &str, groups: &[&[&str]]) -> SenseClustering {
        SenseClustering {
            word: word.into(),
            slice_id: slice.into(),
            run_index: 0,
            seed: 0,
            clusters: c(groups),
        }
    }

    fn words(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// A matrix with one source cluster of `source_size` words, `parts[i]`
    /// of them landing in target cluster i.
    fn split_matrix(source_size: usize, parts: &[usize]) -> IntersectionMatrix {
        let src = words("s", source_size);
        let mut tgt = Vec::new();
        let mut at = 0;
        for &p in parts {
            tgt.push(src[at..at + p].to_vec());
            at += p;
        }
        intersection_matrix(&[src], &tgt).unwrap()
    }

    #[test]
    fn matrix_example() {
        let m = intersection_matrix(&c(&[&["a", "b", "c", "d"]]), &c(&[&["a", "b", "e"], &["f", "g"]])).unwrap();
        assert_eq!(m.raw(), &[vec![2, 0, 2], vec![1, 2, 0]]);
    }

    #[test]
    fn identical_partitions_are_diagonal() {
        let p = c(&[&["a", "b"], &["c"]]);
        let m = intersection_matrix(&p, &p).unwrap();
        assert_eq!(m.raw(), &[vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]);
    }

    #[test]
    fn disjoint_vocabularies() {
        let m = intersection_matrix(&c(&[&["a"]]), &c(&[&["b"]])).unwrap();
        assert_eq!(m.get(0, 0), 0);
        assert_eq!(m.novel(0), 1);
        assert_eq!(m.vanished(0), 1);
    }

    #[test]
    fn overlapping_clusters_rejected() {
        let bad = c(&[&["a", "b"], &["b"]]);
        let ok = c(&[&["a"]]);
        assert!(matches!(intersection_matrix(&bad, &ok), Err(Error::InvalidInput(_))));
        assert!(matches!(intersection_matrix(&ok, &bad), Err(Error::InvalidInput(_))));
        assert!(intersection_matrix(&c(&[&[]]), &ok).is_err());
    }

    fn birth_matrix(size: usize, novel: usize) -> IntersectionMatrix {
        let old = words("o", size - novel);
        let mut target = old.clone();
        target.extend(words("n", novel));
        intersection_matrix(std::slice::from_ref(&old), &[target]).unwrap()
    }

    #[test]
    fn birth_boundaries() {
        assert_eq!(detect_birth(&birth_matrix(10, 9), 0.8), vec![0]);
        assert!(detect_birth(&birth_matrix(10, 7), 0.8).is_empty());
        assert_eq!(detect_birth(&birth_matrix(10, 8), 0.8), vec![0]);
    }

    #[test]
    fn split_boundaries() {
        let flagged = detect_split(&split_matrix(10, &[4, 5]), 0.3, 0.8);
        assert_eq!(flagged.len(), 1);
        assert_eq!(flagged[0].parts, vec![0, 1]);
        assert!((flagged[0].union - 0.9).abs() < 1e-12);
        assert!(detect_split(&split_matrix(10, &[2, 7]), 0.3, 0.8).is_empty());
        assert!(detect_split(&split_matrix(10, &[4, 4]), 0.3, 0.8).is_empty());
        // 0.3 per-cluster share is inclusive.
        assert_eq!(detect_split(&split_matrix(10, &[3, 3, 3]), 0.3, 0.8).len(), 1);
    }

    #[test]
    fn join_mirrors_split() {
        let target = words("s", 10);
        let sources = vec![target[..4].to_vec(), target[4..9].to_vec()];
        let m = intersection_matrix(&sources, std::slice::from_ref(&target)).unwrap();
        let j = detect_join(&m, 0.3, 0.8);
        assert_eq!(j.len(), 1);
        assert_eq!((j[0].whole, j[0].parts.clone()), (0, vec![0, 1]));

        let single = intersection_matrix(std::slice::from_ref(&target), std::slice::from_ref(&target)).unwrap();
        assert!(detect_join(&single, 0.3, 0.8).is_empty());
    }

    #[test]
    fn death_cases() {
        let m = intersection_matrix(&[words("a", 5)], &[words("b", 3)]).unwrap();
        assert_eq!(detect_death(&m, 0.8), vec![0]);
        let src = words("a", 5);
        let m = intersection_matrix(std::slice::from_ref(&src), &[src[..2].to_vec()]).unwrap();
        assert!(detect_death(&m, 0.8).is_empty());
        assert_eq!(detect_death(&m, 0.8), detect_birth(&m.transpose(), 0.8));
    }

    #[test]
    fn compare_identical_is_quiet() {
        let a = clustering("w", "T1", &[&["a", "b"], &["c"]]);
        let b = clustering("w", "T2", &[&["a", "b"], &["c"]]);
        assert!(compare_word("w", &a, &b, &Thresholds::default()).unwrap().is_empty());
    }

    #[test]
    fn compare_finds_split() {
        let a = clustering("w", "T1", &[&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]]);
        let b = clustering("w", "T2", &[&["e", "f", "g", "h", "i"], &["a", "b", "c", "d"]]);
        let recs = compare_word("w", &a, &b, &Thresholds::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].change_type, ChangeType::Split);
        assert_eq!(recs[0].source_clusters, vec![0]);
        assert_eq!(recs[0].target_clusters, vec![0, 1]);
    }

    #[test]
    fn compare_finds_birth() {
        let a = clustering("w", "T1", &[&["a", "b"]]);
        let b = clustering(
            "w",
            "T2",
            &[&["p", "q", "r", "s", "u", "v", "w", "x", "y", "z"], &["a", "b"]],
        );
        let recs = compare_word("w", &a, &b, &Thresholds::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].change_type, ChangeType::Birth);
        assert_eq!(recs[0].target_clusters, vec![0]);
        assert_eq!(recs[0].scores.novel, Some(1.0));
    }

    #[test]
    fn compare_rejects_other_word() {
        let a = clustering("w", "T1", &[&["a"]]);
        let b = clustering("v", "T2", &[&["a"]]);
        assert!(compare_word("w", &a, &b, &Thresholds::default()).is_err());
    }

    #[test]
    fn record_json_uses_fixed_names() {
        let a = clustering("w", "T1", &[&["a", "b"]]);
        let b = clustering("w", "T2", &[&["x", "y", "z", "q", "r"]]);
        let recs = compare_word("w", &a, &b, &Thresholds::default()).unwrap();
        let mut buf = Vec::new();
        write_changes(&mut buf, &recs).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        for key in ["word", "type", "source_slice", "target_slice", "source_clusters", "target_clusters", "scores", "runs"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(read_changes(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn thresholds_validate() {
        assert!(Thresholds::default().validate().is_ok());
        assert!(Thresholds { birth: 0.0, ..Default::default() }.validate().is_err());
        assert!(Thresholds { death: 1.5, ..Default::default() }.validate().is_err());
    }
}
