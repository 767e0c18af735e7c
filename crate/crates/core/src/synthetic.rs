//! Two-slice corpora with planted sense changes.
//!
//! Every sense is a "topic": a group of member words that share a private
//! pool of context features. A target word takes part in a topic by using
//! all of its features, which puts the topic's members into its ego network
//! as one cohesive clique. Planting a change means changing which topics a
//! word uses, or merging two topics' feature pools, between the slices:
//!
//! * birth: the word picks up a third topic in the later slice;
//! * split: two topics share one pool in the earlier slice only;
//! * join: two topics share one pool in the later slice only;
//! * control: nothing changes beyond count noise.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{parse_counts, Slice, SliceConfig, TimeSlicedCounts};
use crate::error::Result;
use crate::filter::PosLexicon;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub birth_words: usize,
    pub split_words: usize,
    pub join_words: usize,
    pub control_words: usize,
    pub topic_size: usize,
    pub features_per_topic: usize,
    /// Probability that a member word uses a given feature of its pool.
    pub member_coverage: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            birth_words: 20,
            split_words: 0,
            join_words: 0,
            control_words: 20,
            topic_size: 10,
            features_per_topic: 15,
            member_coverage: 0.85,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Source,
    Target,
}

struct Topic {
    members: Vec<String>,
    features: Vec<String>,
    /// Partner topic whose pool is shared in the given phase.
    merged: Option<(usize, Phase)>,
}

struct Target {
    word: String,
    source_topics: Vec<usize>,
    target_topics: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub slices: SliceConfig,
    pub source_slice: String,
    pub target_slice: String,
    /// Count-file lines, `word \t feature \t year \t count`.
    pub lines: Vec<String>,
    pub birth_words: Vec<String>,
    pub split_words: Vec<String>,
    pub join_words: Vec<String>,
    pub control_words: Vec<String>,
    pub lexicon: PosLexicon,
}

impl PlantedCorpus {
    pub fn generate(spec: &PlantedSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut topics: Vec<Topic> = Vec::new();
        let new_topic = |topics: &mut Vec<Topic>| {
            let t = topics.len();
            topics.push(Topic {
                members: (0..spec.topic_size).map(|j| format!("t{t:03}m{j:02}")).collect(),
                features: (0..spec.features_per_topic)
                    .map(|i| format!("obj(•,t{t:03}f{i:02})"))
                    .collect(),
                merged: None,
            });
            t
        };

        let mut targets = Vec::new();
        let named = |kind: &str, n: usize| -> Vec<String> { (0..n).map(|i| format!("{kind}{i:02}")).collect() };
        let birth_words = named("birth", spec.birth_words);
        let split_words = named("split", spec.split_words);
        let join_words = named("join", spec.join_words);
        let control_words = named("control", spec.control_words);

        for w in &birth_words {
            let (a, b, c) = (new_topic(&mut topics), new_topic(&mut topics), new_topic(&mut topics));
            targets.push(Target {
                word: w.clone(),
                source_topics: vec![a, b],
                target_topics: vec![a, b, c],
            });
        }
        for (words, phase) in [(&split_words, Phase::Source), (&join_words, Phase::Target)] {
            for w in words {
                let (a, b) = (new_topic(&mut topics), new_topic(&mut topics));
                topics[a].merged = Some((b, phase));
                topics[b].merged = Some((a, phase));
                targets.push(Target {
                    word: w.clone(),
                    source_topics: vec![a, b],
                    target_topics: vec![a, b],
                });
            }
        }
        for w in &control_words {
            let (a, b) = (new_topic(&mut topics), new_topic(&mut topics));
            targets.push(Target {
                word: w.clone(),
                source_topics: vec![a, b],
                target_topics: vec![a, b],
            });
        }

        let slices = SliceConfig::new(vec![Slice::new("S1", 1990, 1994), Slice::new("S2", 1995, 1999)]);
        let mut lines = Vec::new();
        for (phase, slice) in [(Phase::Source, &slices.slices()[0]), (Phase::Target, &slices.slices()[1])] {
            let mut emit = |rng: &mut ChaCha8Rng, word: &str, feature: &str, lo: u64, hi: u64| {
                let year = rng.gen_range(slice.start_year..=slice.end_year);
                let count = rng.gen_range(lo..=hi);
                lines.push(format!("{word}\t{feature}\t{year}\t{count}"));
            };
            for topic in &topics {
                let mut pool: Vec<&String> = topic.features.iter().collect();
                if let Some((partner, when)) = topic.merged {
                    if when == phase {
                        pool.extend(&topics[partner].features);
                    }
                }
                for m in &topic.members {
                    for f in &pool {
                        if rng.gen_bool(spec.member_coverage) {
                            emit(&mut rng, m, f, 2, 20);
                        }
                    }
                }
            }
            for t in &targets {
                let used = match phase {
                    Phase::Source => &t.source_topics,
                    Phase::Target => &t.target_topics,
                };
                for &topic in used {
                    for f in &topics[topic].features {
                        emit(&mut rng, &t.word, f, 5, 30);
                    }
                }
            }
        }

        let mut lexicon = PosLexicon::new();
        for t in &targets {
            lexicon.insert(t.word.clone(), "NN");
        }
        for topic in &topics {
            for m in &topic.members {
                lexicon.insert(m.clone(), "NNS");
            }
        }

        Self {
            source_slice: "S1".into(),
            target_slice: "S2".into(),
            slices,
            lines,
            birth_words,
            split_words,
            join_words,
            control_words,
            lexicon,
        }
    }

    pub fn write_counts<W: Write>(&self, mut out: W) -> Result<()> {
        for l in &self.lines {
            writeln!(out, "{l}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_lexicon<W: Write>(&self, mut out: W) -> Result<()> {
        for (w, tag) in self.lexicon.entries() {
            writeln!(out, "{w}\t{tag}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_slices<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.slices.to_text().as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn counts(&self) -> TimeSlicedCounts {
        let text = self.lines.join("\n");
        parse_counts(text.as_bytes(), &self.slices, true)
            .expect("generated lines are well-formed")
            .0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let spec = PlantedSpec { birth_words: 2, control_words: 2, split_words: 1, join_words: 1, ..Default::default() };
        let a = PlantedCorpus::generate(&spec);
        let b = PlantedCorpus::generate(&spec);
        assert_eq!(a.lines, b.lines);
        let c = PlantedCorpus::generate(&PlantedSpec { seed: 9, ..spec });
        assert_ne!(a.lines, c.lines);
        assert_eq!(a.birth_words, vec!["birth00", "birth01"]);
    }

    #[test]
    fn counts_cover_both_slices() {
        let corpus = PlantedCorpus::generate(&PlantedSpec { birth_words: 1, control_words: 1, ..Default::default() });
        let counts = corpus.counts();
        for id in ["S1", "S2"] {
            let s = counts.slice(id).unwrap();
            assert!(s.word_count("birth00") > 0);
            assert!(s.word_count("t002m00") > 0);
        }
        // The third topic reaches the birth word only in the later slice.
        assert_eq!(counts.slice("S1").unwrap().pair_count("birth00", "obj(•,t002f00)"), 0);
        assert!(counts.slice("S2").unwrap().pair_count("birth00", "obj(•,t002f00)") > 0);
    }
}
