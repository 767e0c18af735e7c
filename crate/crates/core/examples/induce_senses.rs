//! Clusters a word's ego network with Chinese Whispers; each cluster is one
//! sense.
//!
//!     cargo run --example induce_senses

use sensetrack::cw::{chinese_whispers, WeightedGraph};
use sensetrack::synthetic::{PlantedCorpus, PlantedSpec};
use sensetrack::{build_dt, extract_ego_network, induce_senses, rank_features, ClusterParams, Weighting};

fn main() -> sensetrack::Result<()> {
    // Two cliques joined by a weak bridge.
    let mut g = WeightedGraph::with_nodes(8);
    for base in [0, 4] {
        for a in base..base + 4 {
            for b in a + 1..base + 4 {
                g.add_edge(a, b, 5.0);
            }
        }
    }
    g.add_edge(3, 4, 1.0);
    for w in [Weighting::Top, Weighting::Lin, Weighting::Log] {
        let lab = chinese_whispers(&g, w, 42, 20)?;
        println!("{:>3}: {:?} after {} sweeps", w.to_string(), lab.clusters(), lab.iterations);
    }

    let corpus = PlantedCorpus::generate(&PlantedSpec { birth_words: 1, control_words: 1, ..Default::default() });
    let counts = corpus.counts();
    let params = ClusterParams::default();
    for slice in ["S1", "S2"] {
        let dt = build_dt(&rank_features(&counts, slice, 1000)?);
        let ego = extract_ego_network(&dt, "birth00", params.neighborhood, params.edge_density)?;
        println!("\n{slice}: ego network of birth00 has {} nodes, {} edges", ego.nodes.len(), ego.edges.len());
        for run in 0..2 {
            let senses = induce_senses(&dt, slice, "birth00", &params, 7, run)?;
            println!("  run {run} (seed {:016x}): {} senses", senses.seed, senses.clusters.len());
            for c in &senses.clusters {
                println!("    {}", c.join(" "));
            }
        }
    }
    Ok(())
}
