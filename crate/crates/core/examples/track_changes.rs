//! Compares a word's sense clusters from two periods and names the change.
//!
//!     cargo run --example track_changes

use sensetrack::{compare_word, intersection_matrix, SenseClustering, Thresholds};

fn clustering(slice: &str, clusters: &[&[&str]]) -> SenseClustering {
    SenseClustering {
        word: "mouse".into(),
        slice_id: slice.into(),
        run_index: 0,
        seed: 0,
        clusters: clusters.iter().map(|c| c.iter().map(|w| w.to_string()).collect()).collect(),
    }
}

fn main() -> sensetrack::Result<()> {
    let thresholds = Thresholds::default();
    let old = clustering("T4", &[&["rat", "hamster", "gerbil", "vole", "shrew"]]);
    let cases = [
        (
            "a device sense appears",
            clustering(
                "T6",
                &[
                    &["rat", "hamster", "gerbil", "vole", "shrew"],
                    &["keyboard", "trackball", "joystick", "touchpad", "stylus"],
                ],
            ),
        ),
        (
            "the rodent sense divides",
            clustering("T6", &[&["rat", "hamster", "gerbil"], &["vole", "shrew"]]),
        ),
        ("nothing happens", clustering("T6", &[&["rat", "hamster", "gerbil", "vole", "shrew"]])),
    ];
    for (label, new) in cases {
        let m = intersection_matrix(&old.clusters, &new.clusters)?;
        println!("{label}: matrix {:?}", m.raw());
        let records = compare_word("mouse", &old, &new, &thresholds)?;
        if records.is_empty() {
            println!("  no change");
        }
        for r in records {
            println!("  {}", serde_json::to_string(&r)?);
        }
    }
    Ok(())
}
