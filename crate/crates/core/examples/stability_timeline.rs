//! Ages changes detected from one period against several later ones and
//! lays the stable ones out on a timeline.
//!
//!     cargo run --example stability_timeline

use sensetrack::stability::write_timeline;
use sensetrack::{assess, timeline, ChangeType, DetectionSeries, SliceConfig};

fn main() -> sensetrack::Result<()> {
    let slices = SliceConfig::default();
    let detections = [
        ("compiler", "T3", vec!["T5", "T4", "T6", "T7", "T8"]),
        ("web", "T3", vec!["T6", "T7", "T8"]),
        ("blog", "T3", vec!["T8"]),
        ("mouse", "T4", vec!["T5", "T6"]),
    ];
    let mut verdicts = Vec::new();
    for (word, source, targets) in detections {
        let series = DetectionSeries::new(word, ChangeType::Birth, source, targets, &slices)?;
        let v = assess(&series, 2)?;
        println!(
            "{word:<9} from {source}: detected in {:?} -> location {}, age {}, {}",
            series.detected_targets(),
            v.location,
            v.age,
            if v.stable { "stable" } else { "not stable" }
        );
        if v.stable {
            verdicts.push((word.to_string(), v));
        }
    }
    println!("\ntimeline (word, location, age):");
    write_timeline(std::io::stdout(), &timeline(&verdicts, &slices))?;
    Ok(())
}
