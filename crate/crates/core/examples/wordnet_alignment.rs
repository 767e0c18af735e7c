//! Maps sense clusters to WordNet synsets and judges a detected change.
//!
//!     cargo run --example wordnet_alignment [wordnet_dict_dir]

use std::collections::BTreeSet;
use std::path::PathBuf;

use sensetrack::wordnet::judge_split_many;
use sensetrack::{align_cluster, judge_birth, judge_join, slang_overlap, WordNetGraph};

fn main() -> sensetrack::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/wordnet"));
    let wn = WordNetGraph::load_dir(&dir)?;
    println!("{} synsets loaded from {}", wn.len(), dir.display());
    for id in wn.senses("bank") {
        let s = wn.synset(*id).expect("indexed synset");
        println!("  bank -> {id} {:?}: {}", s.lemmas, s.gloss);
    }

    let old = align_cluster(&["river", "shore", "slope"], "bank", &wn, 2)?;
    let new = align_cluster(&["money", "finance", "loan"], "bank", &wn, 2)?;
    println!("\nold cluster -> {} (score {:.2})", old.synset, old.score);
    println!("new cluster -> {} (score {:.2})", new.synset, new.score);

    let initial: BTreeSet<_> = [old.synset].into();
    println!("\nbirth judged correct: {}", judge_birth(&initial, new.synset));
    println!("join of {} and {} into {}: {}", old.synset, new.synset, new.synset, judge_join(old.synset, new.synset, new.synset));
    println!("split keeping the old id: {}", judge_split_many(old.synset, &[old.synset, new.synset]));

    let slang = slang_overlap(["Dude", "bank", "compiler"], ["dude", "bling"]);
    println!("\nbirth candidates on the slang list: {slang:?}");
    Ok(())
}
