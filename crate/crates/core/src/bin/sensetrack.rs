use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sensetrack::stages;
use sensetrack::{run_pipeline, write_report, PairSelection, PipelineConfig, Slice, Weighting};

#[derive(Parser)]
#[command(name = "sensetrack", version, about = "Track noun sense changes across time slices")]
struct Cli {
    /// TOML configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// One flag per configuration field, named like the field.
#[derive(Args, Default)]
struct Overrides {
    /// Inline slices, `ID:START-END` separated by commas.
    #[arg(long, global = true, value_parser = parse_slices)]
    slices: Option<Vec<Slice>>,
    #[arg(long = "slices_file", global = true, alias = "slices-file")]
    slices_file: Option<PathBuf>,
    #[arg(long = "p", global = true)]
    salient_features: Option<usize>,
    #[arg(long = "N", global = true)]
    neighborhood: Option<usize>,
    #[arg(long = "n", global = true)]
    edge_density: Option<usize>,
    #[arg(long, global = true)]
    weighting: Option<Weighting>,
    #[arg(long = "max_iterations", global = true, alias = "max-iterations")]
    max_iterations: Option<usize>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long = "birth_threshold", global = true, alias = "birth-threshold")]
    birth_threshold: Option<f64>,
    #[arg(long = "split_min", global = true, alias = "split-min")]
    split_min: Option<f64>,
    #[arg(long = "split_union", global = true, alias = "split-union")]
    split_union: Option<f64>,
    #[arg(long = "death_threshold", global = true, alias = "death-threshold")]
    death_threshold: Option<f64>,
    #[arg(long = "torso_head", global = true, alias = "torso-head")]
    torso_head: Option<f64>,
    #[arg(long = "torso_tail", global = true, alias = "torso-tail")]
    torso_tail: Option<f64>,
    #[arg(long = "stable_min", global = true, alias = "stable-min")]
    stable_min: Option<usize>,
    #[arg(long = "master_seed", global = true, alias = "master-seed")]
    master_seed: Option<u64>,
    #[arg(long = "align_depth", global = true, alias = "align-depth")]
    align_depth: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    strict: Option<bool>,
    #[arg(long, global = true)]
    counts: Option<PathBuf>,
    #[arg(long = "pos_lexicon", global = true, alias = "pos-lexicon")]
    pos_lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    wordnet: Option<PathBuf>,
    #[arg(long = "slang_list", global = true, alias = "slang-list")]
    slang_list: Option<PathBuf>,
    #[arg(long = "output_dir", global = true, alias = "output-dir")]
    output_dir: Option<PathBuf>,
    #[arg(long = "cache_dir", global = true, alias = "cache-dir")]
    cache_dir: Option<PathBuf>,
}

fn parse_slices(text: &str) -> Result<Vec<Slice>, String> {
    text.split(',')
        .map(|item| {
            let (id, range) = item.split_once(':').ok_or("expected ID:START-END")?;
            let (a, b) = range.split_once('-').ok_or("expected ID:START-END")?;
            let year = |y: &str| y.trim().parse::<i32>().map_err(|e| format!("{y}: {e}"));
            Ok(Slice::new(id.trim(), year(a)?, year(b)?))
        })
        .collect()
}

impl Overrides {
    fn apply(self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field; } )* };
        }
        set!(
            salient_features, neighborhood, edge_density, weighting, max_iterations, runs, birth_threshold,
            split_min, split_union, death_threshold, torso_head, torso_tail, stable_min, master_seed,
            align_depth, workers, strict, counts, output_dir
        );
        set_opt!(slices, slices_file, pos_lexicon, wordnet, slang_list, cache_dir);
    }
}

#[derive(Args)]
struct PairArgs {
    /// Source slice; with `--targets`, compares it against each target.
    #[arg(long)]
    source: Option<String>,
    /// Comma-separated target slices.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
}

impl PairArgs {
    fn selection(&self) -> PairSelection {
        match &self.source {
            Some(source) if !self.targets.is_empty() => PairSelection::From {
                source: source.clone(),
                targets: self.targets.clone(),
            },
            // A bare source: every later slice.
            Some(source) => PairSelection::From {
                source: source.clone(),
                targets: Vec::new(),
            },
            None => PairSelection::AllPairs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate the count file per slice.
    Ingest,
    /// Build thesauri for the given slices (all when omitted).
    BuildDt {
        #[arg(long, value_delimiter = ',')]
        slice: Vec<String>,
    },
    /// Cluster the ego networks of a slice's words.
    Induce {
        #[arg(long, value_delimiter = ',')]
        slice: Vec<String>,
        /// Only these words (comma-separated); every thesaurus word otherwise.
        #[arg(long, value_delimiter = ',')]
        words: Vec<String>,
    },
    /// Detect changes between slice pairs, for every run.
    Compare(PairArgs),
    /// Keep the candidates that pass all filters.
    Filter(PairArgs),
    /// Locate and age the filtered changes.
    Stability,
    /// Score the filtered changes against WordNet and a slang list.
    Eval,
    /// Write `changes.jsonl` and the pair summary table.
    Report,
    /// The whole pipeline in one process.
    Run(PairArgs),
}

fn all_or(ids: Vec<String>, config: &PipelineConfig) -> sensetrack::Result<Vec<String>> {
    if ids.is_empty() {
        Ok(config.slice_config()?.ids().map(str::to_string).collect())
    } else {
        Ok(ids)
    }
}

fn pairs(args: &PairArgs, config: &PipelineConfig) -> sensetrack::Result<Vec<(String, String)>> {
    let slices = config.slice_config()?;
    let selection = match args.selection() {
        PairSelection::From { source, targets } if targets.is_empty() => {
            let pos = slices
                .position(&source)
                .ok_or_else(|| sensetrack::Error::UnknownSlice(source.clone()))?;
            let targets = slices.ids().skip(pos + 1).map(str::to_string).collect();
            PairSelection::From { source, targets }
        }
        other => other,
    };
    selection.resolve(&slices)
}

fn execute(cli: Cli) -> sensetrack::Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut config);
    config.validate()?;

    match cli.command {
        Command::Ingest => {
            let s = stages::ingest(&config)?;
            println!(
                "lines {}  accepted {}  out_of_range {}  malformed {}  comments {}",
                s.lines, s.accepted, s.out_of_range, s.malformed, s.comments
            );
        }
        Command::BuildDt { slice } => {
            for (id, nodes, edges) in stages::build_dts(&config, &all_or(slice, &config)?)? {
                println!("{id}\t{nodes} words\t{edges} edges");
            }
        }
        Command::Induce { slice, words } => {
            let words = (!words.is_empty()).then_some(words);
            for id in all_or(slice, &config)? {
                let n = stages::induce(&config, &id, words.as_deref())?;
                println!("{id}\t{n} words clustered");
            }
        }
        Command::Compare(args) => {
            let n = stages::compare(&config, &pairs(&args, &config)?)?;
            println!("{n} raw change records");
        }
        Command::Filter(args) => {
            for c in stages::filter(&config, &pairs(&args, &config)?)? {
                println!("{}->{}\t{} candidates", c.source_slice, c.target_slice, c.filtered.len());
            }
        }
        Command::Stability => {
            let verdicts = stages::stability(&config)?;
            let stable = verdicts.iter().filter(|v| v.verdict.stable).count();
            println!("{} detections, {stable} stable", verdicts.len());
        }
        Command::Eval => {
            let (wordnet, slang) = stages::evaluate(&config)?;
            match wordnet {
                Some(rows) => {
                    let ok = rows.iter().filter(|r| r.success).count();
                    println!("wordnet: {ok}/{} aligned candidates judged correct", rows.len());
                }
                None => println!("wordnet: not configured"),
            }
            match slang {
                Some(words) => println!("slang overlap: {} words", words.len()),
                None => println!("slang: not configured"),
            }
        }
        Command::Report => {
            print!("{}", stages::report(&config)?.to_tsv());
        }
        Command::Run(args) => {
            let selection = PairSelection::Pairs(pairs(&args, &config)?);
            let bundle = run_pipeline(&config, &selection)?;
            write_report(&bundle, &config.output_dir)?;
            for d in &bundle.diagnostics {
                eprintln!("warning: {d}");
            }
            print!("{}", bundle.summary.to_tsv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
