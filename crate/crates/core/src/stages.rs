//! The pipeline as separate steps over a work directory.
//!
//! Each step reads what the previous one wrote into `config.output_dir` and
//! leaves its own files next to them:
//!
//! | step       | reads                          | writes                                   |
//! |------------|--------------------------------|------------------------------------------|
//! | ingest     | `config.counts`                | `ingested.tsv`                           |
//! | build-dt   | `ingested.tsv`                 | `dt_<slice>.edges.tsv`, `.nodes.txt`     |
//! | induce     | thesaurus files                | `clusters_<slice>.jsonl`                 |
//! | compare    | cluster files                  | `raw_<src>_<tgt>.jsonl`                  |
//! | filter     | raw changes, `ingested.tsv`    | `filtered_<src>_<tgt>.jsonl`, `candidates_<src>_<tgt>.tsv`, `stages.tsv` |
//! | stability  | filtered changes               | `stability.tsv`, `timeline.tsv`          |
//! | eval       | filtered changes, cluster files| `eval_wordnet.tsv`, `slang_overlap.txt`  |
//! | report     | filtered changes               | `changes.jsonl`, `summary.tsv`           |
//!
//! Running all steps produces the same report files as [`crate::run_pipeline`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::corpus::{read_counts_file, IngestStats, SliceConfig, TimeSlicedCounts};
use crate::dt::{build_dt, rank_features, DtGraph};
use crate::ego::{read_clusterings, write_clusterings};
use crate::error::{Error, Result};
use crate::filter::{CandidateList, PosLexicon};
use crate::pipeline::{
    assess_stability, birth_timeline, cluster_words, compare_slices, emit_summary, evaluate_wordnet,
    filter_candidates, slang_births, write_candidates, write_lines, write_stage_counts, write_verdicts,
    write_wordnet_eval, Comparison, SliceClusters, Summary, VerdictRow, WordNetEvalRow,
};
use crate::stability::write_timeline;
use crate::tracker::{read_changes, write_changes, ChangeRecord};
use crate::wordnet::{read_word_list, WordNetGraph};

pub const INGESTED: &str = "ingested.tsv";

fn dt_paths(dir: &Path, slice: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("dt_{slice}.edges.tsv")), dir.join(format!("dt_{slice}.nodes.txt")))
}

fn clusters_path(dir: &Path, slice: &str) -> PathBuf {
    dir.join(format!("clusters_{slice}.jsonl"))
}

fn raw_path(dir: &Path, source: &str, target: &str) -> PathBuf {
    dir.join(format!("raw_{source}_{target}.jsonl"))
}

fn filtered_path(dir: &Path, source: &str, target: &str) -> PathBuf {
    dir.join(format!("filtered_{source}_{target}.jsonl"))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(path.display().to_string())),
        Err(e) => Err(e.into()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Aggregates the count file per slice and writes it back in the same
/// format, one line per (slice, word, feature) dated at the slice start.
pub fn ingest(config: &PipelineConfig) -> Result<IngestStats> {
    let slices = config.slice_config()?;
    let (counts, stats) = read_counts_file(&config.counts, &slices, config.strict)?;
    let mut out = create(&config.output_dir.join(INGESTED))?;
    for slice in slices.slices() {
        let mut pairs: Vec<(&str, &str, u64)> = counts.slice(&slice.id)?.pairs().collect();
        pairs.sort_unstable();
        for (w, f, c) in pairs {
            writeln!(out, "{w}\t{f}\t{}\t{c}", slice.start_year)?;
        }
    }
    out.flush()?;
    Ok(stats)
}

pub fn load_ingested(config: &PipelineConfig) -> Result<TimeSlicedCounts> {
    let slices = config.slice_config()?;
    let path = config.output_dir.join(INGESTED);
    if !path.exists() {
        return Err(Error::NotFound(path.display().to_string()));
    }
    Ok(read_counts_file(path, &slices, true)?.0)
}

/// Builds and stores the thesaurus of each listed slice.
pub fn build_dts(config: &PipelineConfig, slice_ids: &[String]) -> Result<Vec<(String, usize, usize)>> {
    let counts = load_ingested(config)?;
    let mut sizes = Vec::new();
    for id in slice_ids {
        let dt = build_dt(&rank_features(&counts, id, config.salient_features)?);
        let (edges, nodes) = dt_paths(&config.output_dir, id);
        fs::create_dir_all(&config.output_dir)?;
        dt.write_tsv(BufWriter::new(File::create(edges)?), BufWriter::new(File::create(nodes)?))?;
        sizes.push((id.clone(), dt.node_count(), dt.edge_count()));
    }
    Ok(sizes)
}

pub fn load_dt(config: &PipelineConfig, slice: &str) -> Result<DtGraph> {
    let (edges, nodes) = dt_paths(&config.output_dir, slice);
    DtGraph::read_tsv(open(&edges)?, open(&nodes)?)
}

/// Clusters `words` (every thesaurus node when `None`) in one slice and
/// stores all runs. Returns the number of words clustered.
pub fn induce(config: &PipelineConfig, slice: &str, words: Option<&[String]>) -> Result<usize> {
    let dt = load_dt(config, slice)?;
    let words: Vec<String> = match words {
        Some(w) => {
            let mut w = w.to_vec();
            w.sort_unstable();
            w.dedup();
            w
        }
        None => dt.nodes().to_vec(),
    };
    let clusters = cluster_words(
        &dt,
        slice,
        &words,
        &config.cluster_params(),
        config.master_seed,
        config.runs,
    )?;
    let out = create(&clusters_path(&config.output_dir, slice))?;
    write_clusterings(out, words.iter().flat_map(|w| &clusters[w]))?;
    Ok(words.len())
}

pub fn load_clusters(config: &PipelineConfig, slice: &str) -> Result<SliceClusters> {
    let mut out = SliceClusters::new();
    for c in read_clusterings(open(&clusters_path(&config.output_dir, slice))?)? {
        if c.slice_id != slice {
            return Err(Error::InvalidInput(format!("clusters of slice {} in the file of {slice}", c.slice_id)));
        }
        out.entry(c.word.clone()).or_default().push(c);
    }
    for runs in out.values_mut() {
        runs.sort_by_key(|c| c.run_index);
    }
    Ok(out)
}

/// Compares the stored clusters of each pair and keeps every run's records.
pub fn compare(config: &PipelineConfig, pairs: &[(String, String)]) -> Result<usize> {
    let mut cache: BTreeMap<String, SliceClusters> = BTreeMap::new();
    let mut total = 0;
    for (s, t) in pairs {
        for id in [s, t] {
            if !cache.contains_key(id) {
                cache.insert(id.clone(), load_clusters(config, id)?);
            }
        }
        let per_run = compare_slices(s, t, &cache[s], &cache[t], config.runs, &config.thresholds())?;
        let records: Vec<&ChangeRecord> = per_run.iter().flat_map(CandidateList::records).collect();
        total += records.len();
        write_changes(create(&raw_path(&config.output_dir, s, t))?, records)?;
    }
    Ok(total)
}

/// Rebuilds per-run candidate lists from a raw record file.
fn load_raw(config: &PipelineConfig, source: &str, target: &str) -> Result<Vec<CandidateList>> {
    let records = read_changes(open(&raw_path(&config.output_dir, source, target))?)?;
    let mut per_run: Vec<CandidateList> = (0..config.runs).map(|_| CandidateList::new(source, target)).collect();
    for r in records {
        let run = r.runs.first().copied().unwrap_or(0);
        let list = per_run
            .get_mut(run)
            .ok_or_else(|| Error::InvalidInput(format!("record of run {run} but runs = {}", config.runs)))?;
        list.insert(r)?;
    }
    Ok(per_run)
}

/// Applies the three filters to each pair's raw records.
pub fn filter(config: &PipelineConfig, pairs: &[(String, String)]) -> Result<Vec<Comparison>> {
    let counts = load_ingested(config)?;
    let lexicon = match &config.pos_lexicon {
        Some(p) => Some(PosLexicon::load(p)?),
        None => None,
    };
    let dir = &config.output_dir;
    let mut comparisons = Vec::new();
    for (s, t) in pairs {
        let c = filter_candidates(
            load_raw(config, s, t)?,
            lexicon.as_ref(),
            counts.slice(s)?.word_counts(),
            config.torso_head,
            config.torso_tail,
        )?;
        write_changes(create(&filtered_path(dir, s, t))?, c.filtered.records())?;
        write_candidates(create(&dir.join(format!("candidates_{s}_{t}.tsv")))?, &c.filtered)?;
        comparisons.push(c);
    }
    write_stage_counts(create(&dir.join("stages.tsv"))?, &comparisons)?;
    Ok(comparisons)
}

/// Every filtered list present in the work directory, in slice-pair order.
pub fn load_filtered(config: &PipelineConfig) -> Result<Vec<CandidateList>> {
    let slices = config.slice_config()?;
    let mut lists = Vec::new();
    for (s, t) in slices.all_pairs() {
        let path = filtered_path(&config.output_dir, &s, &t);
        if path.exists() {
            lists.push(CandidateList::from_records(&s, &t, read_changes(open(&path)?)?)?);
        }
    }
    Ok(lists)
}

pub fn stability(config: &PipelineConfig) -> Result<Vec<VerdictRow>> {
    let slices = config.slice_config()?;
    let lists = load_filtered(config)?;
    let verdicts = assess_stability(&lists, &slices, config.stable_min)?;
    let dir = &config.output_dir;
    write_verdicts(create(&dir.join("stability.tsv"))?, &verdicts)?;
    write_timeline(create(&dir.join("timeline.tsv"))?, &birth_timeline(&verdicts, &slices))?;
    Ok(verdicts)
}

/// WordNet rows and slang overlap; `None` for a resource that is not configured.
pub type Evaluation = (Option<Vec<WordNetEvalRow>>, Option<BTreeSet<String>>);

pub fn evaluate(config: &PipelineConfig) -> Result<Evaluation> {
    let lists = load_filtered(config)?;
    let dir = &config.output_dir;
    let wordnet = match &config.wordnet {
        Some(wn_dir) => {
            let wn = WordNetGraph::load_dir(wn_dir)?;
            let used: BTreeSet<&str> = lists
                .iter()
                .flat_map(|l| [l.source_slice.as_str(), l.target_slice.as_str()])
                .collect();
            let mut clusters = BTreeMap::new();
            for id in used {
                clusters.insert(id.to_string(), load_clusters(config, id)?);
            }
            let rows = evaluate_wordnet(&lists, &clusters, &wn, config.align_depth);
            write_wordnet_eval(create(&dir.join("eval_wordnet.tsv"))?, &rows)?;
            Some(rows)
        }
        None => None,
    };
    let slang = match &config.slang_list {
        Some(path) => {
            let words = slang_births(&lists, &read_word_list(open(path)?)?);
            write_lines(create(&dir.join("slang_overlap.txt"))?, &words)?;
            Some(words)
        }
        None => None,
    };
    Ok((wordnet, slang))
}

pub fn report(config: &PipelineConfig) -> Result<Summary> {
    let slices: SliceConfig = config.slice_config()?;
    let lists = load_filtered(config)?;
    let dir = &config.output_dir;
    write_changes(create(&dir.join("changes.jsonl"))?, lists.iter().flat_map(CandidateList::records))?;
    let summary = emit_summary(lists.iter().flat_map(CandidateList::records), &slices);
    write_lines(create(&dir.join("summary.tsv"))?, summary.to_tsv().lines())?;
    Ok(summary)
}
