//! Chinese Whispers graph clustering.
//!
//! Every node starts in its own class. Each iteration visits the nodes in a
//! seeded random order and moves every node to the class with the largest
//! summed influence among its neighbors. Labels update in place, so later
//! nodes in the same sweep already see the new labels. The run stops at a
//! sweep with no change, or after `max_iterations` sweeps.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on label-propagation sweeps.
pub const DEFAULT_MAX_ITERATIONS: usize = 20;

/// Relative tolerance used when comparing class scores.
const TIE_EPSILON: f64 = 1e-12;

/// How a neighbor's vote is scaled by its degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Raw edge weight.
    Top,
    /// Edge weight divided by the neighbor's degree.
    #[default]
    Lin,
    /// Edge weight divided by `log2(1 + degree)` of the neighbor.
    Log,
}

impl Weighting {
    fn influence(self, weight: f64, neighbor_degree: usize) -> f64 {
        match self {
            Weighting::Top => weight,
            Weighting::Lin => weight / neighbor_degree as f64,
            Weighting::Log => weight / (1.0 + neighbor_degree as f64).log2(),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Top => "top",
            Weighting::Lin => "lin",
            Weighting::Log => "log",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(Weighting::Top),
            "lin" => Ok(Weighting::Lin),
            "log" => Ok(Weighting::Log),
            other => Err(Error::InvalidArgument(format!(
                "unknown weighting `{other}` (expected top, lin or log)"
            ))),
        }
    }
}

/// Undirected graph over node indices `0..n` with positive edge weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn with_nodes(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = Self::with_nodes(n);
        for &(a, b, w) in edges {
            g.add_edge(a, b, w);
        }
        g
    }

    /// Adds an undirected edge. Self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) {
        if a == b {
            return;
        }
        self.adjacency[a].push((b, weight));
        self.adjacency[b].push((a, weight));
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Component id per node, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Result of one Chinese Whispers run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub labels: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

impl Labeling {
    /// Node groups sharing a label, each sorted, ordered by their smallest node.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (node, &label) in self.labels.iter().enumerate() {
            by_label.entry(label).or_default().push(node);
        }
        let mut clusters: Vec<Vec<usize>> = by_label.into_values().collect();
        clusters.sort_by_key(|c| c[0]);
        clusters
    }
}

/// Summed neighbor influence per label, in first-seen order.
pub fn label_scores(
    graph: &WeightedGraph,
    labels: &[usize],
    node: usize,
    weighting: Weighting,
) -> Vec<(usize, f64)> {
    let mut scores: Vec<(usize, f64)> = Vec::new();
    for &(v, w) in graph.neighbors(node) {
        let inf = weighting.influence(w, graph.degree(v));
        match scores.iter_mut().find(|(l, _)| *l == labels[v]) {
            Some((_, s)) => *s += inf,
            None => scores.push((labels[v], inf)),
        }
    }
    scores
}

/// Labels whose score is within tolerance of the maximum, sorted.
pub fn argmax_labels(scores: &[(usize, f64)]) -> Vec<usize> {
    let best = scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<usize> = scores
        .iter()
        .filter(|&&(_, s)| best - s <= TIE_EPSILON * best.abs())
        .map(|&(l, _)| l)
        .collect();
    tied.sort_unstable();
    tied
}

/// Runs Chinese Whispers. A node keeps its label when that label is among
/// the best-scoring ones; otherwise ties are broken by the seeded generator.
pub fn chinese_whispers(
    graph: &WeightedGraph,
    weighting: Weighting,
    seed: u64,
    max_iterations: usize,
) -> Result<Labeling> {
    if max_iterations == 0 {
        return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
    }
    let n = graph.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &u in &order {
            if graph.degree(u) == 0 {
                continue;
            }
            let tied = argmax_labels(&label_scores(graph, &labels, u, weighting));
            if tied.contains(&labels[u]) {
                continue;
            }
            let pick = if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.gen_range(0..tied.len())]
            };
            labels[u] = pick;
            changed = true;
        }
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(Labeling {
        labels,
        iterations,
        converged,
    })
}
