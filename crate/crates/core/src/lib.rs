//! Noun sense change detection over time-sliced corpora.
//!
//! The pipeline runs in five steps, one module each:
//!
//! 1. [`corpus`]: ingest `word \t feature \t year \t count` lines into per-slice tables.
//! 2. [`dt`]: rank each word's features by LMI, keep the top `p`, and connect
//!    words by the number of salient features they share.
//! 3. [`ego`] and [`cw`]: cluster each word's ego network with Chinese Whispers;
//!    each cluster stands for one sense.
//! 4. [`tracker`]: compare a word's clusters between two slices and flag
//!    birth, split, join and death.
//! 5. [`filter`] and [`stability`]: keep candidates that survive every run,
//!    are nouns, and sit in the frequency torso; then locate and age them.
//!
//! [`wordnet`] aligns clusters to synsets for automatic evaluation, and
//! [`pipeline`] wires everything together from a [`config::PipelineConfig`].
//! Runnable walkthroughs of each step live in the crate's `examples/` directory.

pub mod config;
pub mod corpus;
pub mod cw;
pub mod dt;
pub mod ego;
pub mod error;
pub mod filter;
pub mod pipeline;
pub mod stability;
pub mod stages;
pub mod synthetic;
pub mod tracker;
pub mod wordnet;

pub use config::PipelineConfig;
pub use corpus::{parse_counts, validate_slices, IngestStats, Slice, SliceConfig, TimeSlicedCounts};
pub use cw::{chinese_whispers, Weighting, WeightedGraph};
pub use dt::{build_dt, compute_lmi, rank_features, DtGraph, SalientFeatures};
pub use ego::{extract_ego_network, induce_senses, ClusterParams, EgoNetwork, SenseClustering};
pub use error::{Error, Result};
pub use filter::{stage1_intersect, stage2_pos_filter, stage3_torso, CandidateList, PosLexicon};
pub use pipeline::{emit_summary, run_on_counts, run_pipeline, write_report, PairSelection, ReportBundle};
pub use stability::{assess, timeline, DetectionSeries, StabilityVerdict};
pub use tracker::{
    compare_word, detect_birth, detect_death, detect_join, detect_split, intersection_matrix, ChangeRecord,
    ChangeType, IntersectionMatrix, Thresholds,
};
pub use wordnet::{align_cluster, judge_birth, judge_join, judge_split, slang_overlap, SynsetId, WordNetGraph};
