//! Ranks context features by LMI and connects words that share salient
//! features.
//!
//!     cargo run --example build_thesaurus

use sensetrack::synthetic::{PlantedCorpus, PlantedSpec};
use sensetrack::{build_dt, compute_lmi, rank_features};

fn main() -> sensetrack::Result<()> {
    // LMI of one (word, feature) pair: positive when they co-occur more than chance.
    for (c_wf, c_w, c_f, total) in [(30, 100, 60, 10_000), (1, 100, 60, 10_000), (6, 1000, 60, 10_000)] {
        println!(
            "c_wf={c_wf:<3} c_w={c_w:<5} c_f={c_f:<3} total={total}: lmi {:+.3}",
            compute_lmi(c_wf, c_w, c_f, total)?
        );
    }

    let corpus = PlantedCorpus::generate(&PlantedSpec { birth_words: 2, control_words: 2, ..Default::default() });
    let counts = corpus.counts();
    let salient = rank_features(&counts, "S2", 20)?;
    let top: Vec<String> = salient
        .get("birth00")
        .unwrap_or_default()
        .iter()
        .take(5)
        .map(|f| format!("{} ({:.1})", f.feature, f.lmi))
        .collect();
    println!("\nbirth00 in S2, top features: {}", top.join(", "));

    let dt = build_dt(&salient);
    println!("thesaurus: {} words, {} edges", dt.node_count(), dt.edge_count());
    let mut neighbors: Vec<(&str, u32)> = dt.neighbors("birth00").collect();
    neighbors.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    println!("birth00 has {} neighbors; strongest:", neighbors.len());
    for (w, shared) in neighbors.iter().take(8) {
        println!("  {w:<10} {shared} shared features");
    }

    let mut edges = Vec::new();
    let mut nodes = Vec::new();
    dt.write_tsv(&mut edges, &mut nodes)?;
    println!("\nedge file starts with:\n{}", String::from_utf8_lossy(&edges).lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
