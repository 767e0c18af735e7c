//! Prunes candidates: keep those found in every run, then nouns, then the
//! frequency torso.
//!
//!     cargo run --example filter_candidates

use std::collections::HashMap;

use sensetrack::{stage1_intersect, stage2_pos_filter, stage3_torso, CandidateList, ChangeType, PosLexicon};

fn list(words: &[&str]) -> CandidateList {
    let mut l = CandidateList::new("T1", "T5");
    for w in words {
        l.insert_key(*w, ChangeType::Birth);
    }
    l
}

fn show(label: &str, l: &CandidateList) {
    println!("{label:<8} {:?}", l.words());
}

fn main() -> sensetrack::Result<()> {
    let runs = [
        list(&["compiler", "web", "virus", "run", "gay", "cool", "the", "mouse|NN", "sit"]),
        list(&["compiler", "web", "virus", "run", "gay", "cool", "the", "mouse|NN", "sit", "dude"]),
        list(&["compiler", "web", "virus", "run", "gay", "cool", "the", "mouse|NN", "sit", "blog"]),
    ];
    let s1 = stage1_intersect(&runs)?;
    show("stage 1", &s1);

    let lexicon = PosLexicon::parse(
        "compiler\tNN\nweb\tNN\nvirus\tNN\nrun\tVB\ngay\tJJ\ncool\tJJ\nthe\tDT\nsit\tVB\n".as_bytes(),
    )?;
    let s2 = stage2_pos_filter(&s1, &lexicon);
    show("stage 2", &s2);

    let freq: HashMap<String, u64> = [("compiler", 40), ("web", 9_000), ("virus", 700), ("mouse|NN", 300)]
        .into_iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    // Four candidates: floor(0.2 * 4) = 0 trimmed at each end.
    show("stage 3", &stage3_torso(&s2, &freq, 0.2, 0.2)?);
    // A wider cut removes the most and least frequent.
    show("wide", &stage3_torso(&s2, &freq, 0.25, 0.25)?);
    Ok(())
}
