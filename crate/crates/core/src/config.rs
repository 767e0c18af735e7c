//! Pipeline configuration, read from TOML.
//!
//! ```toml
//! counts = "counts.tsv"
//! output_dir = "out"
//! slices_file = "slices.txt"   # optional; the eight default periods otherwise
//! p = 1000
//! N = 200
//! n = 200
//! weighting = "lin"
//! master_seed = 7
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{validate_slices, Slice, SliceConfig};
use crate::cw::{Weighting, DEFAULT_MAX_ITERATIONS};
use crate::dt::DEFAULT_SALIENT_FEATURES;
use crate::ego::{ClusterParams, DEFAULT_EDGE_DENSITY, DEFAULT_NEIGHBORHOOD};
use crate::error::{Error, Result};
use crate::stability::DEFAULT_STABLE_MIN;
use crate::tracker::Thresholds;
use crate::wordnet::DEFAULT_ALIGN_DEPTH;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Inline slices; take precedence over `slices_file`.
    pub slices: Option<Vec<Slice>>,
    pub slices_file: Option<PathBuf>,
    #[serde(rename = "p")]
    pub salient_features: usize,
    #[serde(rename = "N")]
    pub neighborhood: usize,
    #[serde(rename = "n")]
    pub edge_density: usize,
    pub weighting: Weighting,
    pub max_iterations: usize,
    pub runs: usize,
    pub birth_threshold: f64,
    pub split_min: f64,
    pub split_union: f64,
    pub death_threshold: f64,
    pub torso_head: f64,
    pub torso_tail: f64,
    pub stable_min: usize,
    pub master_seed: u64,
    pub align_depth: usize,
    /// Worker threads; 0 lets the runtime pick.
    pub workers: usize,
    pub strict: bool,
    pub counts: PathBuf,
    pub pos_lexicon: Option<PathBuf>,
    pub wordnet: Option<PathBuf>,
    pub slang_list: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Directory for per-slice thesaurus files reused across runs.
    pub cache_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            slices: None,
            slices_file: None,
            salient_features: DEFAULT_SALIENT_FEATURES,
            neighborhood: DEFAULT_NEIGHBORHOOD,
            edge_density: DEFAULT_EDGE_DENSITY,
            weighting: Weighting::Lin,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            runs: 3,
            birth_threshold: t.birth,
            split_min: t.split_min,
            split_union: t.split_union,
            death_threshold: t.death,
            torso_head: 0.2,
            torso_tail: 0.2,
            stable_min: DEFAULT_STABLE_MIN,
            master_seed: 0,
            align_depth: DEFAULT_ALIGN_DEPTH,
            workers: 0,
            strict: false,
            counts: PathBuf::from("counts.tsv"),
            pos_lexicon: None,
            wordnet: None,
            slang_list: None,
            output_dir: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.counts);
        fix(&mut self.output_dir);
        for p in [
            &mut self.slices_file,
            &mut self.pos_lexicon,
            &mut self.wordnet,
            &mut self.slang_list,
            &mut self.cache_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn slice_config(&self) -> Result<SliceConfig> {
        let cfg = match (&self.slices, &self.slices_file) {
            (Some(inline), _) => SliceConfig::new(inline.clone()),
            (None, Some(file)) => SliceConfig::load(file)?,
            (None, None) => SliceConfig::default(),
        };
        let violations = validate_slices(&cfg);
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Config(format!("invalid slices: {}", msg.join("; "))));
        }
        Ok(cfg)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            birth: self.birth_threshold,
            split_min: self.split_min,
            split_union: self.split_union,
            death: self.death_threshold,
        }
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            neighborhood: self.neighborhood,
            edge_density: self.edge_density,
            weighting: self.weighting,
            max_iterations: self.max_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("birth_threshold", self.birth_threshold),
            ("split_min", self.split_min),
            ("split_union", self.split_union),
            ("death_threshold", self.death_threshold),
            ("torso_head", self.torso_head),
            ("torso_tail", self.torso_tail),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} = {v} is not in (0, 1]")));
            }
        }
        if self.torso_head + self.torso_tail >= 1.0 {
            return Err(Error::Config("torso_head + torso_tail must be below 1".into()));
        }
        for (name, v) in [
            ("p", self.salient_features),
            ("N", self.neighborhood),
            ("n", self.edge_density),
            ("max_iterations", self.max_iterations),
            ("runs", self.runs),
            ("stable_min", self.stable_min),
        ] {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
