//! WordNet noun database, cluster-to-synset alignment, the birth/join/split
//! success rules, and slang-list overlap.
//!
//! The loader reads the Princeton `data.noun` text layout, optionally with
//! `index.noun` for sense ranks:
//!
//! ```text
//! 09213565 17 n 01 bank 0 002 @ 09366017 n 0000 ~ 09170788 n 0000 | sloping land
//! ```
//!
//! Lines starting with a space are the license preamble and are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALIGN_DEPTH: usize = 2;

/// Synset offset in `data.noun`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SynsetId(pub u64);

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<SynsetId>,
    pub hyponyms: Vec<SynsetId>,
    pub gloss: String,
}

impl Synset {
    fn relations(&self) -> impl Iterator<Item = SynsetId> + '_ {
        self.hypernyms.iter().chain(&self.hyponyms).copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordNetGraph {
    synsets: BTreeMap<SynsetId, Synset>,
    lemma_index: HashMap<String, Vec<SynsetId>>,
}

/// Lowercase, spaces as underscores, `|TAG` suffix and `(a)`-style markers removed.
pub fn normalize_lemma(word: &str) -> String {
    let base = word.rsplit_once('|').map_or(word, |(w, _)| w);
    let base = match base.find('(') {
        Some(i) if base.ends_with(')') => &base[..i],
        _ => base,
    };
    base.trim().to_lowercase().replace(' ', "_")
}

struct RawSynset {
    synset: Synset,
    line_offset: u64,
    hypernym_ptrs: Vec<SynsetId>,
    hyponym_ptrs: Vec<SynsetId>,
}

fn parse_data_line(line: &str) -> std::result::Result<RawSynset, String> {
    let (head, gloss) = match line.split_once(" | ") {
        Some((h, g)) => (h, g.trim().to_string()),
        None => (line.trim_end_matches('|'), String::new()),
    };
    let mut tok = head.split_whitespace();
    let mut next = |what: &str| tok.next().ok_or_else(|| format!("missing {what}"));
    let offset: u64 = next("synset offset")?
        .parse()
        .map_err(|_| "synset offset is not a number".to_string())?;
    next("lex_filenum")?;
    let ss_type = next("ss_type")?;
    if ss_type != "n" {
        return Err(format!("synset {offset:08} has type `{ss_type}`, expected `n`"));
    }
    let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| "bad w_cnt".to_string())?;
    if w_cnt == 0 {
        return Err(format!("synset {offset:08} has no lemmas"));
    }
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        lemmas.push(normalize_lemma(next("word")?));
        next("lex_id")?;
    }
    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| "bad p_cnt".to_string())?;
    let (mut hypernym_ptrs, mut hyponym_ptrs) = (Vec::new(), Vec::new());
    for _ in 0..p_cnt {
        let symbol = next("pointer symbol")?;
        let target: u64 = next("pointer offset")?
            .parse()
            .map_err(|_| "bad pointer offset".to_string())?;
        let pos = next("pointer pos")?;
        next("pointer source/target")?;
        if pos != "n" {
            continue;
        }
        match symbol {
            "@" | "@i" => hypernym_ptrs.push(SynsetId(target)),
            "~" | "~i" => hyponym_ptrs.push(SynsetId(target)),
            _ => {}
        }
    }
    Ok(RawSynset {
        synset: Synset {
            id: SynsetId(offset),
            lemmas,
            hypernyms: Vec::new(),
            hyponyms: Vec::new(),
            gloss,
        },
        line_offset: 0,
        hypernym_ptrs,
        hyponym_ptrs,
    })
}

impl WordNetGraph {
    /// Parses a `data.noun` stream and, when given, an `index.noun` stream
    /// whose synset order defines sense rank. Without an index, a lemma's
    /// senses are ranked by their order in the data file.
    pub fn load<D: BufRead, I: BufRead>(data: D, index: Option<I>) -> Result<Self> {
        let mut raw = Vec::new();
        let mut offset = 0u64;
        for line in data.lines() {
            let line = line?;
            let line_offset = offset;
            offset += line.len() as u64 + 1;
            if line.trim().is_empty() || line.starts_with(' ') {
                continue;
            }
            let mut r = parse_data_line(&line).map_err(|reason| Error::WordNet {
                file: "data.noun".into(),
                offset: line_offset,
                reason,
            })?;
            r.line_offset = line_offset;
            raw.push(r);
        }

        let mut synsets: BTreeMap<SynsetId, Synset> = BTreeMap::new();
        let mut lemma_index: HashMap<String, Vec<SynsetId>> = HashMap::new();
        for r in &raw {
            if synsets.insert(r.synset.id, r.synset.clone()).is_some() {
                return Err(Error::WordNet {
                    file: "data.noun".into(),
                    offset: r.line_offset,
                    reason: format!("duplicate synset {}", r.synset.id),
                });
            }
            for lemma in &r.synset.lemmas {
                let senses = lemma_index.entry(lemma.clone()).or_default();
                if !senses.contains(&r.synset.id) {
                    senses.push(r.synset.id);
                }
            }
        }
        for r in &raw {
            for &target in r.hypernym_ptrs.iter().chain(&r.hyponym_ptrs) {
                if !synsets.contains_key(&target) {
                    return Err(Error::WordNet {
                        file: "data.noun".into(),
                        offset: r.line_offset,
                        reason: format!("synset {} points to missing synset {target}", r.synset.id),
                    });
                }
            }
            for &up in &r.hypernym_ptrs {
                synsets.get_mut(&r.synset.id).unwrap().hypernyms.push(up);
                synsets.get_mut(&up).unwrap().hyponyms.push(r.synset.id);
            }
            for &down in &r.hyponym_ptrs {
                synsets.get_mut(&r.synset.id).unwrap().hyponyms.push(down);
                synsets.get_mut(&down).unwrap().hypernyms.push(r.synset.id);
            }
        }
        for s in synsets.values_mut() {
            s.hypernyms.sort_unstable();
            s.hypernyms.dedup();
            s.hyponyms.sort_unstable();
            s.hyponyms.dedup();
        }

        let mut graph = Self {
            synsets,
            lemma_index,
        };
        if let Some(index) = index {
            graph.apply_index(index)?;
        }
        Ok(graph)
    }

    fn apply_index<I: BufRead>(&mut self, index: I) -> Result<()> {
        let mut offset = 0u64;
        for line in index.lines() {
            let line = line?;
            let line_offset = offset;
            offset += line.len() as u64 + 1;
            if line.trim().is_empty() || line.starts_with(' ') {
                continue;
            }
            let err = |reason: String| Error::WordNet {
                file: "index.noun".into(),
                offset: line_offset,
                reason,
            };
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 4 {
                return Err(err("truncated index line".into()));
            }
            let lemma = normalize_lemma(tok[0]);
            let synset_cnt: usize = tok[2].parse().map_err(|_| err("bad synset_cnt".into()))?;
            let p_cnt: usize = tok[3].parse().map_err(|_| err("bad p_cnt".into()))?;
            let start = 4 + p_cnt + 2;
            if tok.len() < start + synset_cnt {
                return Err(err(format!("index entry `{lemma}` lists fewer than {synset_cnt} synsets")));
            }
            let mut senses = Vec::with_capacity(synset_cnt);
            for t in &tok[start..start + synset_cnt] {
                let id = SynsetId(t.parse().map_err(|_| err(format!("bad synset offset `{t}`")))?);
                if !self.synsets.contains_key(&id) {
                    return Err(err(format!("index entry `{lemma}` points to missing synset {id}")));
                }
                senses.push(id);
            }
            // Senses present in the data file but missing from the index keep their data order.
            if let Some(existing) = self.lemma_index.get(&lemma) {
                for id in existing {
                    if !senses.contains(id) {
                        senses.push(*id);
                    }
                }
            }
            self.lemma_index.insert(lemma, senses);
        }
        Ok(())
    }

    /// Loads `data.noun`, plus `index.noun` when it exists, from a WordNet dict directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let data = BufReader::new(File::open(dir.join("data.noun"))?);
        let index_path = dir.join("index.noun");
        if index_path.exists() {
            Self::load(data, Some(BufReader::new(File::open(index_path)?)))
        } else {
            Self::load(data, None::<BufReader<File>>)
        }
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    /// Senses of a lemma in rank order.
    pub fn senses(&self, lemma: &str) -> &[SynsetId] {
        self.lemma_index
            .get(&normalize_lemma(lemma))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Synsets reachable from `start` within `depth` relation hops, with hop counts.
    pub fn neighborhood(&self, start: SynsetId, depth: usize) -> BTreeMap<SynsetId, usize> {
        let mut hops = BTreeMap::new();
        if !self.synsets.contains_key(&start) {
            return hops;
        }
        hops.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            let h = hops[&s];
            if h == depth {
                continue;
            }
            for next in self.synsets[&s].relations() {
                if let std::collections::btree_map::Entry::Vacant(slot) = hops.entry(next) {
                    slot.insert(h + 1);
                    queue.push_back(next);
                }
            }
        }
        hops
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub cluster: Vec<String>,
    pub target: String,
    pub synset: SynsetId,
    pub score: f64,
}

/// Scores one candidate synset: each cluster word contributes `1 / (1 + hops)`
/// for the closest synset containing it within `depth` hops.
pub fn alignment_score(cluster: &BTreeSet<String>, candidate: SynsetId, wn: &WordNetGraph, depth: usize) -> f64 {
    let mut best: HashMap<&str, f64> = HashMap::new();
    for (id, hops) in wn.neighborhood(candidate, depth) {
        let credit = 1.0 / (1.0 + hops as f64);
        for lemma in &wn.synsets[&id].lemmas {
            let slot = best.entry(lemma.as_str()).or_insert(0.0);
            if credit > *slot {
                *slot = credit;
            }
        }
    }
    cluster
        .iter()
        .map(|w| best.get(w.as_str()).copied().unwrap_or(0.0))
        .sum()
}

/// Picks the sense of `target` whose neighborhood best covers the cluster.
/// Ties go to the better-ranked sense.
pub fn align_cluster<S: AsRef<str>>(
    cluster: &[S],
    target: &str,
    wn: &WordNetGraph,
    depth: usize,
) -> Result<Alignment> {
    let senses = wn.senses(target);
    if senses.is_empty() {
        return Err(Error::NotFound(format!("`{target}` has no noun synsets")));
    }
    let words: BTreeSet<String> = cluster.iter().map(|w| normalize_lemma(w.as_ref())).collect();
    let mut chosen = senses[0];
    let mut best = alignment_score(&words, chosen, wn, depth);
    for &s in &senses[1..] {
        let score = alignment_score(&words, s, wn, depth);
        if score > best {
            best = score;
            chosen = s;
        }
    }
    Ok(Alignment {
        cluster: words.into_iter().collect(),
        target: target.to_string(),
        synset: chosen,
        score: best,
    })
}

/// Birth succeeds when the new cluster's synset is not among the source clusters' synsets.
pub fn judge_birth(initial: &BTreeSet<SynsetId>, new: SynsetId) -> bool {
    !initial.contains(&new)
}

/// Join succeeds when the two source synsets differ and the joined cluster maps to one of them.
pub fn judge_join(s1: SynsetId, s2: SynsetId, new: SynsetId) -> bool {
    s1 != s2 && (new == s1 || new == s2)
}

/// Split succeeds when the two target synsets differ and one of them keeps the old synset.
pub fn judge_split(old: SynsetId, s1: SynsetId, s2: SynsetId) -> bool {
    s1 != s2 && (s1 == old || s2 == old)
}

fn all_equal(ids: &[SynsetId]) -> bool {
    ids.windows(2).all(|w| w[0] == w[1])
}

/// Join over any number of source clusters.
pub fn judge_join_many(sources: &[SynsetId], new: SynsetId) -> bool {
    sources.len() >= 2 && !all_equal(sources) && sources.contains(&new)
}

/// Split over any number of target clusters.
pub fn judge_split_many(old: SynsetId, targets: &[SynsetId]) -> bool {
    targets.len() >= 2 && !all_equal(targets) && targets.contains(&old)
}

/// Case-folded intersection of birth candidates and a slang list.
pub fn slang_overlap<'a, C, S>(candidates: C, slang: S) -> BTreeSet<String>
where
    C: IntoIterator<Item = &'a str>,
    S: IntoIterator<Item = &'a str>,
{
    let slang: BTreeSet<String> = slang.into_iter().map(str::to_lowercase).collect();
    candidates
        .into_iter()
        .map(|c| normalize_lemma(c).replace('_', " "))
        .filter(|c| slang.contains(c))
        .collect()
}

/// One entry per non-empty line.
pub fn read_word_list<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            out.push(w.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "  1 license text\n\
00000010 03 n 01 animal 0 001 ~ 00000020 n 0000 | a living organism\n\
00000020 05 n 02 dog 0 domestic_dog 0 000 | a canine\n";

    fn no_index() -> Option<&'static [u8]> {
        None
    }

    #[test]
    fn two_synsets_one_pointer() {
        let wn = WordNetGraph::load(TWO.as_bytes(), no_index()).unwrap();
        assert_eq!(wn.len(), 2);
        let animal = wn.synset(SynsetId(10)).unwrap();
        let dog = wn.synset(SynsetId(20)).unwrap();
        assert_eq!(animal.hyponyms, vec![SynsetId(20)]);
        assert_eq!(dog.hypernyms, vec![SynsetId(10)]);
        assert_eq!(dog.lemmas, vec!["dog", "domestic_dog"]);
        assert_eq!(wn.senses("Domestic dog"), &[SynsetId(20)]);
        assert_eq!(animal.gloss, "a living organism");
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let wn = WordNetGraph::load("".as_bytes(), no_index()).unwrap();
        assert!(wn.is_empty());
    }

    #[test]
    fn dangling_pointer_names_the_id() {
        let text = "00000010 03 n 01 animal 0 001 @ 00000999 n 0000 | x\n";
        let err = WordNetGraph::load(text.as_bytes(), no_index()).unwrap_err();
        assert!(err.to_string().contains("00000999"), "{err}");
        match err {
            Error::WordNet { offset, .. } => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_offset() {
        let text = format!("{}00000030 03 n 01\n", TWO);
        match WordNetGraph::load(text.as_bytes(), no_index()).unwrap_err() {
            Error::WordNet { offset, .. } => assert_eq!(offset, TWO.len() as u64),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn index_sets_sense_rank() {
        let data = "00000010 03 n 01 bank 0 000 | river\n00000020 03 n 01 bank 0 000 | money\n";
        let wn = WordNetGraph::load(data.as_bytes(), no_index()).unwrap();
        assert_eq!(wn.senses("bank"), &[SynsetId(10), SynsetId(20)]);
        let index = "bank n 2 0 2 0 00000020 00000010\n";
        let wn = WordNetGraph::load(data.as_bytes(), Some(index.as_bytes())).unwrap();
        assert_eq!(wn.senses("bank"), &[SynsetId(20), SynsetId(10)]);
        let bad = "bank n 1 0 1 0 00000077\n";
        assert!(WordNetGraph::load(data.as_bytes(), Some(bad.as_bytes())).is_err());
    }

    #[test]
    fn judges_on_examples() {
        let s = |v: &[u64]| v.iter().map(|&x| SynsetId(x)).collect::<BTreeSet<_>>();
        assert!(judge_birth(&s(&[101, 102]), SynsetId(103)));
        assert!(!judge_birth(&s(&[101]), SynsetId(101)));
        assert!(judge_birth(&s(&[]), SynsetId(7)));
        let id = SynsetId;
        assert!(judge_join(id(101), id(102), id(101)));
        assert!(!judge_join(id(101), id(101), id(101)));
        assert!(!judge_join(id(101), id(102), id(103)));
        assert!(judge_split(id(101), id(101), id(105)));
        assert!(!judge_split(id(101), id(104), id(105)));
        assert!(!judge_split(id(101), id(101), id(101)));
    }

    #[test]
    fn many_way_judges_extend_pairwise_rules() {
        let id = SynsetId;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(judge_join_many(&[id(a), id(b)], id(c)), judge_join(id(a), id(b), id(c)));
                    assert_eq!(judge_split_many(id(a), &[id(b), id(c)]), judge_split(id(a), id(b), id(c)));
                }
            }
        }
        assert!(judge_split_many(id(1), &[id(1), id(1), id(2)]));
        assert!(!judge_split_many(id(1), &[id(1), id(1), id(1)]));
        assert!(judge_join_many(&[id(1), id(2), id(3)], id(3)));
        assert!(!judge_join_many(&[id(1)], id(1)));
    }

    #[test]
    fn slang_is_case_folded() {
        let got = slang_overlap(["Dude", "compiler"], ["dude", "thug"]);
        assert_eq!(got.into_iter().collect::<Vec<_>>(), vec!["dude"]);
        assert!(slang_overlap(["a"], ["b"]).is_empty());
    }

    #[test]
    fn word_list_skips_blanks() {
        assert_eq!(read_word_list("dude\n\n thug \n".as_bytes()).unwrap(), vec!["dude", "thug"]);
    }

    #[test]
    fn lemma_normalization() {
        assert_eq!(normalize_lemma("Bank|NN"), "bank");
        assert_eq!(normalize_lemma("great(a)"), "great");
        assert_eq!(normalize_lemma("hot dog"), "hot_dog");
    }

    const BANK: &str = include_str!("../tests/data/wordnet/data.noun");
    const BANK_INDEX: &str = include_str!("../tests/data/wordnet/index.noun");

    fn bank() -> WordNetGraph {
        WordNetGraph::load(BANK.as_bytes(), Some(BANK_INDEX.as_bytes())).unwrap()
    }

    #[test]
    fn financial_cluster_picks_financial_bank() {
        let wn = bank();
        let a = align_cluster(&["money", "finance", "loan"], "bank", &wn, DEFAULT_ALIGN_DEPTH).unwrap();
        assert_eq!(a.synset, SynsetId(100));
        // money and loan each one hop away; finance is not in the graph.
        assert!((a.score - 1.0).abs() < 1e-12);
        let river = align_cluster(&["river", "shore", "slope"], "bank", &wn, DEFAULT_ALIGN_DEPTH).unwrap();
        assert_eq!(river.synset, SynsetId(200));
    }

    #[test]
    fn unrelated_cluster_falls_back_to_first_sense() {
        let wn = bank();
        let a = align_cluster(&["violin", "cello"], "bank", &wn, DEFAULT_ALIGN_DEPTH).unwrap();
        assert_eq!(a.synset, SynsetId(200));
        assert_eq!(a.score, 0.0);
        assert!(matches!(align_cluster(&["x"], "harbor", &wn, 2), Err(Error::NotFound(_))));
    }

    #[test]
    fn own_lemmas_win() {
        let wn = bank();
        let a = align_cluster(&["bank", "depository_financial_institution"], "bank", &wn, 2).unwrap();
        assert_eq!(a.synset, SynsetId(100));
    }

    proptest::proptest! {
        #[test]
        fn alignment_ignores_order_and_unrelated_words(
            picks in proptest::collection::vec(0usize..9, 1..7),
            noise in "[a-z]{12}",
        ) {
            const WORDS: [&str; 9] =
                ["money", "loan", "funds", "river", "shore", "slope", "advance", "incline", "financial_institution"];
            let wn = bank();
            let cluster: Vec<&str> = picks.iter().map(|&i| WORDS[i]).collect();
            let base = align_cluster(&cluster, "bank", &wn, 2).unwrap();
            let mut reversed = cluster.clone();
            reversed.reverse();
            proptest::prop_assert_eq!(&align_cluster(&reversed, "bank", &wn, 2).unwrap(), &base);
            let mut noisy = cluster.clone();
            noisy.push(&noise);
            proptest::prop_assert_eq!(align_cluster(&noisy, "bank", &wn, 2).unwrap().synset, base.synset);
        }
    }
}
