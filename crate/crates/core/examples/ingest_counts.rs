//! Reads `word \t feature \t year \t count` lines into per-period tables and
//! reports what was kept.
//!
//!     cargo run --example ingest_counts [counts.tsv]

use sensetrack::corpus::read_counts_file;
use sensetrack::{parse_counts, SliceConfig};

const SAMPLE: &str = "\
# word\tfeature\tyear\tcount
mouse\tnsubj(•,squeak)\t1890\t12
mouse\tdobj(click,•)\t1995\t40
mouse\tdobj(click,•)\t2003\t25
cursor\tdobj(click,•)\t2001\t30
mouse\tnsubj(•,squeak)\t1400\t3
broken line without enough fields
";

fn main() -> sensetrack::Result<()> {
    let slices = SliceConfig::default();
    println!("periods:");
    for s in slices.slices() {
        println!("  {} {}..={}", s.id, s.start_year, s.end_year);
    }

    let (counts, stats) = match std::env::args().nth(1) {
        Some(path) => read_counts_file(path, &slices, false)?,
        None => parse_counts(SAMPLE.as_bytes(), &slices, false)?,
    };
    println!(
        "\n{} data lines: {} accepted, {} outside every period, {} malformed ({} comments)",
        stats.lines, stats.accepted, stats.out_of_range, stats.malformed, stats.comments
    );

    for id in slices.ids() {
        let slice = counts.slice(id)?;
        if slice.total() == 0 {
            continue;
        }
        println!("\n{id}: total {}", slice.total());
        let mut pairs: Vec<_> = slice.pairs().collect();
        pairs.sort_unstable();
        for (w, f, c) in pairs {
            println!("  {w:<8} {f:<18} {c:>4}   (word {}, feature {})", slice.word_count(w), slice.feature_count(f));
        }
    }

    // Strict mode stops at the first bad line instead.
    match parse_counts(SAMPLE.as_bytes(), &slices, true) {
        Ok(_) => println!("\nstrict parse succeeded"),
        Err(e) => println!("\nstrict parse: {e}"),
    }
    Ok(())
}
