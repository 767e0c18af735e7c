//! Ego networks and sense induction.
//!
//! A word's ego network is its open neighborhood in the thesaurus: the `N`
//! strongest neighbors, without the word itself, and the edges among them.
//! Clustering that network with Chinese Whispers gives one cluster per sense.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cw::{chinese_whispers, Weighting, WeightedGraph, DEFAULT_MAX_ITERATIONS};
use crate::dt::DtGraph;
use crate::error::{Error, Result};

/// Default neighborhood size and per-node edge budget.
pub const DEFAULT_NEIGHBORHOOD: usize = 200;
pub const DEFAULT_EDGE_DENSITY: usize = 200;

/// Open neighborhood of a target word. `nodes` are sorted; edges index into
/// `nodes` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoNetwork {
    pub target: String,
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize, u32)>,
}

impl EgoNetwork {
    pub fn to_weighted_graph(&self) -> WeightedGraph {
        let mut g = WeightedGraph::with_nodes(self.nodes.len());
        for &(a, b, w) in &self.edges {
            g.add_edge(a, b, w as f64);
        }
        g
    }
}

/// Keeps the `neighborhood` strongest neighbors of `target` (ties by word) and,
/// among them, every edge that at least one endpoint ranks within its
/// `edge_density` strongest ego-internal edges.
pub fn extract_ego_network(
    dt: &DtGraph,
    target: &str,
    neighborhood: usize,
    edge_density: usize,
) -> Result<EgoNetwork> {
    if !dt.contains(target) {
        return Err(Error::NotFound(format!("`{target}` is not in the thesaurus")));
    }
    let mut ranked: Vec<(&str, u32)> = dt.neighbors(target).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(neighborhood);

    let mut nodes: Vec<String> = ranked.iter().map(|(w, _)| w.to_string()).collect();
    nodes.sort_unstable();
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();

    let mut kept: HashSet<(usize, usize)> = HashSet::new();
    for (u, word) in nodes.iter().enumerate() {
        let mut incident: Vec<(&str, u32, usize)> = dt
            .neighbors(word)
            .filter_map(|(v, w)| index.get(v).map(|&j| (v, w, j)))
            .collect();
        incident.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for &(_, _, v) in incident.iter().take(edge_density) {
            kept.insert((u.min(v), u.max(v)));
        }
    }
    let mut edges: Vec<(usize, usize, u32)> = kept
        .into_iter()
        .map(|(a, b)| {
            let w = dt.weight(&nodes[a], &nodes[b]).expect("edge taken from adjacency");
            (a, b, w)
        })
        .collect();
    edges.sort_unstable();

    Ok(EgoNetwork {
        target: target.to_string(),
        nodes,
        edges,
    })
}

/// Parameters for one sense-induction call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub neighborhood: usize,
    pub edge_density: usize,
    pub weighting: Weighting,
    pub max_iterations: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            neighborhood: DEFAULT_NEIGHBORHOOD,
            edge_density: DEFAULT_EDGE_DENSITY,
            weighting: Weighting::Lin,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Sense clusters of one word in one slice for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseClustering {
    pub word: String,
    pub slice_id: String,
    pub run_index: usize,
    pub seed: u64,
    pub clusters: Vec<Vec<String>>,
}

impl SenseClustering {
    /// Sorts members within each cluster and clusters by (size desc, first member).
    pub fn normalize(&mut self) {
        for c in &mut self.clusters {
            c.sort_unstable();
        }
        self.clusters
            .sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.first().cmp(&b.first())));
    }

    pub fn node_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

/// Seed for one (slice, word, run), stable across platforms and releases.
pub fn stable_hash(master_seed: u64, slice_id: &str, word: &str, run_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    for part in [slice_id, word] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((run_index as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

pub fn induce_senses(
    dt: &DtGraph,
    slice_id: &str,
    word: &str,
    params: &ClusterParams,
    master_seed: u64,
    run_index: usize,
) -> Result<SenseClustering> {
    let ego = extract_ego_network(dt, word, params.neighborhood, params.edge_density)?;
    let seed = stable_hash(master_seed, slice_id, word, run_index);
    let labeling = chinese_whispers(
        &ego.to_weighted_graph(),
        params.weighting,
        seed,
        params.max_iterations,
    )?;
    let clusters = labeling
        .clusters()
        .into_iter()
        .map(|c| c.into_iter().map(|i| ego.nodes[i].clone()).collect())
        .collect();
    let mut out = SenseClustering {
        word: word.to_string(),
        slice_id: slice_id.to_string(),
        run_index,
        seed,
        clusters,
    };
    out.normalize();
    Ok(out)
}

/// One JSON object per line.
pub fn write_clusterings<'a, W, I>(mut out: W, clusterings: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SenseClustering>,
{
    for c in clusterings {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_clusterings<R: BufRead>(input: R) -> Result<Vec<SenseClustering>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
