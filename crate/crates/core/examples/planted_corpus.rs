//! Writes a synthetic corpus with planted changes, plus a config that
//! points at it, for trying the command line tool.
//!
//!     cargo run --example planted_corpus -- /tmp/planted
//!     cargo run --bin sensetrack -- --config /tmp/planted/config.toml run

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use sensetrack::synthetic::{PlantedCorpus, PlantedSpec};

fn main() -> sensetrack::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "planted".into()).into();
    std::fs::create_dir_all(&dir)?;

    let spec = PlantedSpec { split_words: 3, join_words: 3, ..Default::default() };
    let corpus = PlantedCorpus::generate(&spec);
    corpus.write_counts(BufWriter::new(File::create(dir.join("counts.tsv"))?))?;
    corpus.write_lexicon(BufWriter::new(File::create(dir.join("lexicon.tsv"))?))?;
    corpus.write_slices(BufWriter::new(File::create(dir.join("slices.txt"))?))?;
    std::fs::write(
        dir.join("config.toml"),
        "counts = \"counts.tsv\"\n\
         slices_file = \"slices.txt\"\n\
         pos_lexicon = \"lexicon.tsv\"\n\
         output_dir = \"out\"\n\
         master_seed = 7\n",
    )?;

    println!("{} count lines written to {}", corpus.lines.len(), dir.display());
    println!("planted births: {}", corpus.birth_words.join(" "));
    println!("planted splits: {}", corpus.split_words.join(" "));
    println!("planted joins:  {}", corpus.join_words.join(" "));
    Ok(())
}
