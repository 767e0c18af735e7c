//! Full run on a generated two-slice corpus with planted births, splits and
//! joins, then a look at what was recovered.
//!
//!     cargo run --release --example end_to_end [out_dir]

use std::collections::BTreeSet;
use std::time::Instant;

use sensetrack::synthetic::{PlantedCorpus, PlantedSpec};
use sensetrack::{run_on_counts, write_report, ChangeType, IngestStats, PairSelection, PipelineConfig};

fn main() -> sensetrack::Result<()> {
    let spec = PlantedSpec { birth_words: 20, split_words: 5, join_words: 5, control_words: 20, ..Default::default() };
    let corpus = PlantedCorpus::generate(&spec);
    let counts = corpus.counts();

    let dir = std::env::temp_dir().join("sensetrack_end_to_end");
    std::fs::create_dir_all(&dir)?;
    let lexicon = dir.join("lexicon.tsv");
    corpus.write_lexicon(std::fs::File::create(&lexicon)?)?;

    let config = PipelineConfig {
        slices: Some(corpus.slices.slices().to_vec()),
        pos_lexicon: Some(lexicon),
        master_seed: 11,
        ..Default::default()
    };
    let started = Instant::now();
    let bundle = run_on_counts(&config, &counts, IngestStats::default(), &PairSelection::AllPairs)?;
    println!("pipeline finished in {:.2?}", started.elapsed());

    let cmp = bundle.comparison("S1", "S2").expect("one comparison");
    for t in ChangeType::ALL {
        println!(
            "{:>6}: run0 {:>3}  stage1 {:>3}  stage2 {:>3}  torso {:>3}",
            t.as_str(),
            cmp.per_run[0].of_type(t).len(),
            cmp.stage1.of_type(t).len(),
            cmp.stage2.of_type(t).len(),
            cmp.filtered.of_type(t).len()
        );
    }

    let found = |t: ChangeType| -> BTreeSet<String> {
        cmp.stage2.of_type(t).words().into_iter().map(str::to_string).collect()
    };
    let report = |label: &str, planted: &[String], t: ChangeType| {
        let hits = planted.iter().filter(|w| found(t).contains(*w)).count();
        println!("{label}: {hits}/{} planted words flagged", planted.len());
    };
    report("birth", &corpus.birth_words, ChangeType::Birth);
    report("split", &corpus.split_words, ChangeType::Split);
    report("join", &corpus.join_words, ChangeType::Join);
    let controls: Vec<&String> = corpus
        .control_words
        .iter()
        .filter(|w| ChangeType::ALL.iter().any(|&t| found(t).contains(*w)))
        .collect();
    println!("controls flagged: {controls:?}");

    let out = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| dir.join("report"));
    write_report(&bundle, &out)?;
    println!("report written to {}", out.display());
    Ok(())
}
