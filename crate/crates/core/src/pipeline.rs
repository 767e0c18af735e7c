//! End-to-end run: thesauri per slice, sense clusters per word and run,
//! comparisons per slice pair, filtering, stability and optional WordNet and
//! slang evaluation.
//!
//! Work is spread over a bounded rayon pool. Every collection that reaches an
//! output file is ordered first, so the files do not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::corpus::{read_counts_file, IngestStats, SliceConfig, TimeSlicedCounts};
use crate::dt::{build_dt, rank_features, DtGraph};
use crate::ego::{induce_senses, ClusterParams, SenseClustering};
use crate::error::{Error, Result};
use crate::filter::{stage1_intersect, stage2_pos_filter, stage3_torso, CandidateList, PosLexicon};
use crate::stability::{assess, timeline, write_timeline, DetectionSeries, StabilityVerdict, TimelineRow};
use crate::tracker::{compare_word, write_changes, ChangeRecord, ChangeType, Thresholds};
use crate::wordnet::{
    align_cluster, judge_birth, judge_join_many, judge_split_many, read_word_list, slang_overlap, SynsetId,
    WordNetGraph,
};

/// Which (source, target) comparisons to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    AllPairs,
    From { source: String, targets: Vec<String> },
    Pairs(Vec<(String, String)>),
}

impl PairSelection {
    pub fn resolve(&self, slices: &SliceConfig) -> Result<Vec<(String, String)>> {
        let pairs = match self {
            PairSelection::AllPairs => slices.all_pairs(),
            PairSelection::From { source, targets } => {
                targets.iter().map(|t| (source.clone(), t.clone())).collect()
            }
            PairSelection::Pairs(p) => p.clone(),
        };
        for (s, t) in &pairs {
            let ps = slices.position(s).ok_or_else(|| Error::UnknownSlice(s.clone()))?;
            let pt = slices.position(t).ok_or_else(|| Error::UnknownSlice(t.clone()))?;
            if ps >= pt {
                return Err(Error::InvalidArgument(format!("source {s} must precede target {t}")));
            }
        }
        let mut pairs = pairs;
        pairs.sort_by_key(|(s, t)| (slices.position(s), slices.position(t)));
        pairs.dedup();
        Ok(pairs)
    }
}

/// Candidate lists of one comparison at every filtering stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub source_slice: String,
    pub target_slice: String,
    pub per_run: Vec<CandidateList>,
    pub stage1: CandidateList,
    pub stage2: CandidateList,
    /// Final list after torso trimming.
    pub filtered: CandidateList,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRow {
    pub word: String,
    pub change_type: ChangeType,
    pub source_slice: String,
    pub verdict: StabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordNetEvalRow {
    pub word: String,
    pub change_type: ChangeType,
    pub source_slice: String,
    pub target_slice: String,
    pub source_synsets: Vec<SynsetId>,
    pub target_synsets: Vec<SynsetId>,
    pub success: bool,
}

/// Distinct birth words per (source, target) pair, upper-triangular over the slices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    slices: Vec<String>,
    cells: BTreeMap<(usize, usize), usize>,
}

impl Summary {
    pub fn get(&self, source: &str, target: &str) -> usize {
        let pos = |id: &str| self.slices.iter().position(|s| s == id);
        match (pos(source), pos(target)) {
            (Some(i), Some(j)) => self.cells.get(&(i, j)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Rows are sources `T1..T(k-1)`, columns targets `T2..Tk`; cells on or
    /// below the diagonal are blank.
    pub fn to_tsv(&self) -> String {
        let k = self.slices.len();
        let mut out = String::from("source");
        for t in self.slices.iter().skip(1) {
            out.push('\t');
            out.push_str(t);
        }
        out.push('\n');
        for i in 0..k.saturating_sub(1) {
            out.push_str(&self.slices[i]);
            for j in 1..k {
                out.push('\t');
                if j > i {
                    out.push_str(&self.cells.get(&(i, j)).copied().unwrap_or(0).to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn emit_summary<'a, I>(records: I, slices: &SliceConfig) -> Summary
where
    I: IntoIterator<Item = &'a ChangeRecord>,
{
    let mut words: BTreeMap<(usize, usize), BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        if r.change_type != ChangeType::Birth {
            continue;
        }
        if let (Some(i), Some(j)) = (slices.position(&r.source_slice), slices.position(&r.target_slice)) {
            if i < j {
                words.entry((i, j)).or_default().insert(r.word.as_str());
            }
        }
    }
    Summary {
        slices: slices.ids().map(str::to_string).collect(),
        cells: words.into_iter().map(|(k, v)| (k, v.len())).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub slices: SliceConfig,
    pub ingest: IngestStats,
    pub comparisons: Vec<Comparison>,
    /// Pairs that failed, with the reason.
    pub diagnostics: Vec<String>,
    pub verdicts: Vec<VerdictRow>,
    pub timeline: Vec<TimelineRow>,
    pub summary: Summary,
    pub wordnet_eval: Option<Vec<WordNetEvalRow>>,
    pub slang: Option<BTreeSet<String>>,
}

impl ReportBundle {
    pub fn comparison(&self, source: &str, target: &str) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.source_slice == source && c.target_slice == target)
    }

    pub fn filtered_records(&self) -> impl Iterator<Item = &ChangeRecord> {
        self.comparisons.iter().flat_map(|c| c.filtered.records())
    }
}

/// Reads the count file named in `config` and runs the selected comparisons.
pub fn run_pipeline(config: &PipelineConfig, selection: &PairSelection) -> Result<ReportBundle> {
    config.validate()?;
    let slices = config.slice_config()?;
    let (counts, stats) = read_counts_file(&config.counts, &slices, config.strict)?;
    run_on_counts(config, &counts, stats, selection)
}

/// Same as [`run_pipeline`] for counts already in memory.
pub fn run_on_counts(
    config: &PipelineConfig,
    counts: &TimeSlicedCounts,
    ingest: IngestStats,
    selection: &PairSelection,
) -> Result<ReportBundle> {
    config.validate()?;
    let slices = config.slice_config()?;
    let pairs = selection.resolve(&slices)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| Runner::new(config, counts, &slices).run(&pairs, ingest))
}

/// Clusterings of every word in one slice, one entry per run.
pub type SliceClusters = HashMap<String, Vec<SenseClustering>>;

/// Compares the words clustered in both slices, run by run. Returns one
/// candidate list per run.
pub fn compare_slices(
    source: &str,
    target: &str,
    src: &SliceClusters,
    tgt: &SliceClusters,
    runs: usize,
    thresholds: &Thresholds,
) -> Result<Vec<CandidateList>> {
    let mut common: Vec<&String> = src.keys().filter(|w| tgt.contains_key(*w)).collect();
    common.sort_unstable();
    let mut per_run = Vec::with_capacity(runs);
    for run in 0..runs {
        let mut list = CandidateList::new(source, target);
        for w in &common {
            let (Some(a), Some(b)) = (src[*w].get(run), tgt[*w].get(run)) else {
                return Err(Error::InvalidInput(format!("`{w}` has fewer than {runs} clustering runs")));
            };
            for rec in compare_word(w, a, b, thresholds)? {
                list.insert(rec)?;
            }
        }
        per_run.push(list);
    }
    Ok(per_run)
}

/// Runs the three filtering stages over the per-run lists of one comparison.
/// Without a lexicon the part-of-speech stage passes everything through.
/// The torso is taken separately for each change type.
pub fn filter_candidates(
    per_run: Vec<CandidateList>,
    lexicon: Option<&PosLexicon>,
    source_freq: &HashMap<String, u64>,
    head: f64,
    tail: f64,
) -> Result<Comparison> {
    let stage1 = stage1_intersect(&per_run)?;
    let stage2 = match lexicon {
        Some(lex) => stage2_pos_filter(&stage1, lex),
        None => stage1.clone(),
    };
    let mut filtered = CandidateList::new(stage1.source_slice.clone(), stage1.target_slice.clone());
    for t in ChangeType::ALL {
        filtered.extend(stage3_torso(&stage2.of_type(t), source_freq, head, tail)?);
    }
    Ok(Comparison {
        source_slice: stage1.source_slice.clone(),
        target_slice: stage1.target_slice.clone(),
        per_run,
        stage1,
        stage2,
        filtered,
    })
}

/// Groups the filtered detections by (source, word, type) and ages them over
/// their target slices.
pub fn assess_stability<'a, I>(filtered: I, slices: &SliceConfig, stable_min: usize) -> Result<Vec<VerdictRow>>
where
    I: IntoIterator<Item = &'a CandidateList>,
{
    let mut detections: BTreeMap<(usize, String, ChangeType), Vec<String>> = BTreeMap::new();
    for list in filtered {
        let src = slices
            .position(&list.source_slice)
            .ok_or_else(|| Error::UnknownSlice(list.source_slice.clone()))?;
        for (w, t) in list.keys() {
            detections
                .entry((src, w.to_string(), t))
                .or_default()
                .push(list.target_slice.clone());
        }
    }
    let mut rows = Vec::new();
    for ((src, word, t), targets) in detections {
        let source = slices.slices()[src].id.clone();
        let series = DetectionSeries::new(word.clone(), t, source.clone(), targets, slices)?;
        rows.push(VerdictRow {
            word,
            change_type: t,
            source_slice: source,
            verdict: assess(&series, stable_min)?,
        });
    }
    Ok(rows)
}

/// Timeline of the stable births.
pub fn birth_timeline(verdicts: &[VerdictRow], slices: &SliceConfig) -> Vec<TimelineRow> {
    let stable: Vec<(String, StabilityVerdict)> = verdicts
        .iter()
        .filter(|v| v.change_type == ChangeType::Birth && v.verdict.stable)
        .map(|v| (v.word.clone(), v.verdict.clone()))
        .collect();
    timeline(&stable, slices)
}

/// Aligns the clusters behind every filtered birth, split and join to
/// synsets and applies the matching judge. Uses the clusters of the first
/// run that produced the record; entries whose word or clusters cannot be
/// aligned are left out.
pub fn evaluate_wordnet<'a, I>(
    filtered: I,
    clusters: &BTreeMap<String, SliceClusters>,
    wn: &WordNetGraph,
    depth: usize,
) -> Vec<WordNetEvalRow>
where
    I: IntoIterator<Item = &'a CandidateList>,
{
    let mut rows = Vec::new();
    for list in filtered {
        for (word, t) in list.keys() {
            if t == ChangeType::Death || wn.senses(word).is_empty() {
                continue;
            }
            let Some(rec) = list.records_for(word, t).first() else {
                continue;
            };
            let Some(&run) = rec.runs.first() else {
                continue;
            };
            let lookup = |slice: &str| clusters.get(slice).and_then(|c| c.get(word)).and_then(|r| r.get(run));
            let (Some(src), Some(tgt)) = (lookup(&list.source_slice), lookup(&list.target_slice)) else {
                continue;
            };
            let align = |cl: &Vec<String>| align_cluster(cl, word, wn, depth).map(|a| a.synset);
            let aligned = |idx: &[usize], side: &SenseClustering| -> Option<Vec<SynsetId>> {
                idx.iter()
                    .map(|&i| side.clusters.get(i).and_then(|c| align(c).ok()))
                    .collect()
            };
            let (source_synsets, target_synsets, success) = match t {
                ChangeType::Birth => {
                    let all: Vec<usize> = (0..src.clusters.len()).collect();
                    let (Some(init), Some(new)) = (aligned(&all, src), aligned(&rec.target_clusters, tgt)) else {
                        continue;
                    };
                    let ok = judge_birth(&init.iter().copied().collect(), new[0]);
                    (init, new, ok)
                }
                ChangeType::Split => {
                    let (Some(old), Some(parts)) =
                        (aligned(&rec.source_clusters, src), aligned(&rec.target_clusters, tgt))
                    else {
                        continue;
                    };
                    let ok = judge_split_many(old[0], &parts);
                    (old, parts, ok)
                }
                ChangeType::Join => {
                    let (Some(parts), Some(new)) =
                        (aligned(&rec.source_clusters, src), aligned(&rec.target_clusters, tgt))
                    else {
                        continue;
                    };
                    let ok = judge_join_many(&parts, new[0]);
                    (parts, new, ok)
                }
                ChangeType::Death => unreachable!(),
            };
            rows.push(WordNetEvalRow {
                word: word.to_string(),
                change_type: t,
                source_slice: list.source_slice.clone(),
                target_slice: list.target_slice.clone(),
                source_synsets,
                target_synsets,
                success,
            });
        }
    }
    rows
}

/// Filtered birth words that also appear in `slang`.
pub fn slang_births<'a, I>(filtered: I, slang: &[String]) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a CandidateList>,
{
    let births: BTreeSet<&str> = filtered
        .into_iter()
        .flat_map(|c| c.keys())
        .filter(|&(_, t)| t == ChangeType::Birth)
        .map(|(w, _)| w)
        .collect();
    slang_overlap(births, slang.iter().map(String::as_str))
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    counts: &'a TimeSlicedCounts,
    slices: &'a SliceConfig,
}

impl<'a> Runner<'a> {
    fn new(config: &'a PipelineConfig, counts: &'a TimeSlicedCounts, slices: &'a SliceConfig) -> Self {
        Self {
            config,
            counts,
            slices,
        }
    }

    fn thesaurus(&self, slice_id: &str) -> Result<DtGraph> {
        let build = || -> Result<DtGraph> {
            let salient = rank_features(self.counts, slice_id, self.config.salient_features)?;
            Ok(build_dt(&salient))
        };
        let Some(dir) = &self.config.cache_dir else {
            return build();
        };
        let key = format!("dt_{slice_id}_p{}", self.config.salient_features);
        let edges = dir.join(format!("{key}.edges.tsv"));
        let nodes = dir.join(format!("{key}.nodes.txt"));
        if edges.exists() && nodes.exists() {
            return DtGraph::read_tsv(
                BufReader::new(File::open(&edges)?),
                BufReader::new(File::open(&nodes)?),
            );
        }
        let dt = build()?;
        fs::create_dir_all(dir)?;
        dt.write_tsv(
            BufWriter::new(File::create(&edges)?),
            BufWriter::new(File::create(&nodes)?),
        )?;
        Ok(dt)
    }

    fn run(&self, pairs: &[(String, String)], ingest: IngestStats) -> Result<ReportBundle> {
        let mut diagnostics = Vec::new();

        let mut needed: Vec<&str> = pairs.iter().flat_map(|(s, t)| [s.as_str(), t.as_str()]).collect();
        needed.sort_by_key(|id| self.slices.position(id));
        needed.dedup();

        let mut dts: BTreeMap<&str, DtGraph> = BTreeMap::new();
        for id in &needed {
            match self.thesaurus(id) {
                Ok(dt) => {
                    dts.insert(id, dt);
                }
                Err(e) => diagnostics.push(format!("slice {id}: thesaurus failed: {e}")),
            }
        }

        // Words to cluster per slice: those shared with some comparison partner.
        let mut wanted: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for (s, t) in pairs {
            let (Some(ds), Some(dtg)) = (dts.get(s.as_str()), dts.get(t.as_str())) else {
                continue;
            };
            let common: Vec<&String> = ds.nodes().iter().filter(|w| dtg.contains(w)).collect();
            for side in [s.as_str(), t.as_str()] {
                wanted
                    .entry(side)
                    .or_default()
                    .extend(common.iter().map(|w| (*w).clone()));
            }
        }
        let params = self.config.cluster_params();
        let mut clusters: BTreeMap<String, SliceClusters> = BTreeMap::new();
        for (id, words) in &wanted {
            let words: Vec<&String> = words.iter().collect();
            match cluster_words(&dts[id], id, &words, &params, self.config.master_seed, self.config.runs) {
                Ok(c) => {
                    clusters.insert(id.to_string(), c);
                }
                Err(e) => diagnostics.push(format!("slice {id}: sense induction failed: {e}")),
            }
        }

        let lexicon = match &self.config.pos_lexicon {
            Some(p) => Some(PosLexicon::load(p)?),
            None => None,
        };

        let outcomes: Vec<std::result::Result<Comparison, String>> = pairs
            .par_iter()
            .map(|(s, t)| {
                let (Some(cs), Some(ct)) = (clusters.get(s), clusters.get(t)) else {
                    return Err(format!("pair {s}->{t}: skipped, a slice failed earlier"));
                };
                self.compare_pair(s, t, cs, ct, lexicon.as_ref())
                    .map_err(|e| format!("pair {s}->{t}: {e}"))
            })
            .collect();
        let mut comparisons = Vec::new();
        for o in outcomes {
            match o {
                Ok(c) => comparisons.push(c),
                Err(d) => diagnostics.push(d),
            }
        }

        let filtered: Vec<&CandidateList> = comparisons.iter().map(|c| &c.filtered).collect();
        let verdicts = assess_stability(filtered.iter().copied(), self.slices, self.config.stable_min)?;
        let timeline_rows = birth_timeline(&verdicts, self.slices);
        let summary = emit_summary(filtered.iter().flat_map(|c| c.records()), self.slices);

        let wordnet_eval = match &self.config.wordnet {
            Some(dir) => {
                let wn = WordNetGraph::load_dir(dir)?;
                Some(evaluate_wordnet(filtered.iter().copied(), &clusters, &wn, self.config.align_depth))
            }
            None => None,
        };
        let slang = match &self.config.slang_list {
            Some(path) => {
                let list = read_word_list(BufReader::new(File::open(path)?))?;
                Some(slang_births(filtered.iter().copied(), &list))
            }
            None => None,
        };

        Ok(ReportBundle {
            slices: self.slices.clone(),
            ingest,
            comparisons,
            diagnostics,
            verdicts,
            timeline: timeline_rows,
            summary,
            wordnet_eval,
            slang,
        })
    }

    fn compare_pair(
        &self,
        source: &str,
        target: &str,
        src: &SliceClusters,
        tgt: &SliceClusters,
        lexicon: Option<&PosLexicon>,
    ) -> Result<Comparison> {
        let per_run = compare_slices(source, target, src, tgt, self.config.runs, &self.config.thresholds())?;
        filter_candidates(
            per_run,
            lexicon,
            self.counts.slice(source)?.word_counts(),
            self.config.torso_head,
            self.config.torso_tail,
        )
    }
}

/// Clusters `words` in one slice, `runs` times each, in parallel.
pub fn cluster_words<S: AsRef<str> + Sync>(
    dt: &DtGraph,
    slice_id: &str,
    words: &[S],
    params: &ClusterParams,
    master_seed: u64,
    runs: usize,
) -> Result<SliceClusters> {
    let per_word: Vec<(String, Vec<SenseClustering>)> = words
        .par_iter()
        .map(|w| -> Result<(String, Vec<SenseClustering>)> {
            let w = w.as_ref();
            let runs = (0..runs)
                .map(|r| induce_senses(dt, slice_id, w, params, master_seed, r))
                .collect::<Result<_>>()?;
            Ok((w.to_string(), runs))
        })
        .collect::<Result<_>>()?;
    Ok(per_word.into_iter().collect())
}

fn join_ids(ids: &[SynsetId]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// `word \t type` lines of a candidate list.
pub fn write_candidates<W: Write>(mut out: W, list: &CandidateList) -> Result<()> {
    for (w, t) in list.keys() {
        writeln!(out, "{w}\t{t}")?;
    }
    out.flush()?;
    Ok(())
}

/// Candidate counts after each filtering stage, per pair and change type.
pub fn write_stage_counts<'a, W, I>(mut out: W, comparisons: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Comparison>,
{
    writeln!(out, "source\ttarget\ttype\trun0\tstage1\tstage2\tstage3")?;
    for c in comparisons {
        for t in ChangeType::ALL {
            let run0 = c.per_run.first().map_or(0, |l| l.of_type(t).len());
            writeln!(
                out,
                "{}\t{}\t{t}\t{run0}\t{}\t{}\t{}",
                c.source_slice,
                c.target_slice,
                c.stage1.of_type(t).len(),
                c.stage2.of_type(t).len(),
                c.filtered.of_type(t).len()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `word \t type \t source \t location \t age \t stable` lines.
pub fn write_verdicts<W: Write>(mut out: W, verdicts: &[VerdictRow]) -> Result<()> {
    for v in verdicts {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            v.word, v.change_type, v.source_slice, v.verdict.location, v.verdict.age, v.verdict.stable
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_wordnet_eval<W: Write>(mut out: W, rows: &[WordNetEvalRow]) -> Result<()> {
    writeln!(out, "word\ttype\tsource_slice\ttarget_slice\tsource_synsets\ttarget_synsets\tsuccess")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.word,
            r.change_type,
            r.source_slice,
            r.target_slice,
            join_ids(&r.source_synsets),
            join_ids(&r.target_synsets),
            r.success
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One item per line.
pub fn write_lines<W, I, S>(mut out: W, items: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = S>,
    S: std::fmt::Display,
{
    for item in items {
        writeln!(out, "{item}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes every report file into `dir`.
pub fn write_report(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let create = |name: &str| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(name))?)) };

    write_changes(create("changes.jsonl")?, bundle.filtered_records())?;
    for c in &bundle.comparisons {
        write_candidates(
            create(&format!("candidates_{}_{}.tsv", c.source_slice, c.target_slice))?,
            &c.filtered,
        )?;
    }
    write_stage_counts(create("stages.tsv")?, &bundle.comparisons)?;
    write_timeline(create("timeline.tsv")?, &bundle.timeline)?;
    write_verdicts(create("stability.tsv")?, &bundle.verdicts)?;
    write_lines(create("summary.tsv")?, bundle.summary.to_tsv().lines())?;
    if let Some(rows) = &bundle.wordnet_eval {
        write_wordnet_eval(create("eval_wordnet.tsv")?, rows)?;
    }
    if let Some(words) = &bundle.slang {
        write_lines(create("slang_overlap.txt")?, words)?;
    }
    if !bundle.diagnostics.is_empty() {
        write_lines(create("diagnostics.txt")?, &bundle.diagnostics)?;
    }
    Ok(())
}
