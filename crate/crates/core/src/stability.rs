//! Stability, location and age of a detected change.
//!
//! For a fixed source slice, a (word, change type) may be detected against
//! several later target slices. The change is located at the earliest of
//! them, its age is how many comparisons detected it, and it is stable when
//! that age reaches `stable_min`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::SliceConfig;
use crate::error::{Error, Result};
use crate::tracker::ChangeType;

pub const DEFAULT_STABLE_MIN: usize = 2;

/// Target slices, in chronological order, where a change from `source_slice` was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionSeries {
    pub word: String,
    pub change_type: ChangeType,
    pub source_slice: String,
    detected_targets: Vec<String>,
}

impl DetectionSeries {
    /// Orders `targets` chronologically and drops duplicates. Every target must
    /// be a known slice later than the source.
    pub fn new<I, S>(
        word: impl Into<String>,
        change_type: ChangeType,
        source_slice: impl Into<String>,
        targets: I,
        slices: &SliceConfig,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let source_slice = source_slice.into();
        let src_pos = slices
            .position(&source_slice)
            .ok_or_else(|| Error::UnknownSlice(source_slice.clone()))?;
        let mut positioned = Vec::new();
        for t in targets {
            let t = t.into();
            let pos = slices.position(&t).ok_or_else(|| Error::UnknownSlice(t.clone()))?;
            if pos <= src_pos {
                return Err(Error::InvalidInput(format!(
                    "target slice {t} is not later than source {source_slice}"
                )));
            }
            positioned.push((pos, t));
        }
        positioned.sort();
        positioned.dedup();
        Ok(Self {
            word: word.into(),
            change_type,
            source_slice,
            detected_targets: positioned.into_iter().map(|(_, t)| t).collect(),
        })
    }

    pub fn detected_targets(&self) -> &[String] {
        &self.detected_targets
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub location: String,
    pub age: usize,
}

pub fn assess(series: &DetectionSeries, stable_min: usize) -> Result<StabilityVerdict> {
    let location = series.detected_targets.first().ok_or_else(|| {
        Error::InvalidInput(format!(
            "no detections for ({}, {}) from {}",
            series.word, series.change_type, series.source_slice
        ))
    })?;
    let age = series.detected_targets.len();
    Ok(StabilityVerdict {
        stable: age >= stable_min,
        location: location.clone(),
        age,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineRow {
    pub word: String,
    pub location: String,
    pub age: usize,
}

/// One row per verdict, ordered by location chronology then word. Locations
/// unknown to `slices` sort after the known ones, by id.
pub fn timeline(verdicts: &[(String, StabilityVerdict)], slices: &SliceConfig) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = verdicts
        .iter()
        .map(|(w, v)| TimelineRow {
            word: w.clone(),
            location: v.location.clone(),
            age: v.age,
        })
        .collect();
    let rank = |id: &str| slices.position(id).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| {
        rank(&a.location)
            .cmp(&rank(&b.location))
            .then_with(|| a.location.cmp(&b.location))
            .then_with(|| a.word.cmp(&b.word))
    });
    rows
}

/// `word \t location_slice \t age` lines.
pub fn write_timeline<W: Write>(mut out: W, rows: &[TimelineRow]) -> Result<()> {
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.word, r.location, r.age)?;
    }
    out.flush()?;
    Ok(())
}
