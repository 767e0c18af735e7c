use std::path::Path;
use std::process::{Command, Output};

use sensetrack::synthetic::{PlantedCorpus, PlantedSpec};

fn sensetrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensetrack")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sensetrack(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn setup(dir: &Path) -> String {
    let corpus = PlantedCorpus::generate(&PlantedSpec {
        birth_words: 5,
        split_words: 1,
        join_words: 1,
        control_words: 5,
        ..Default::default()
    });
    corpus.write_counts(std::fs::File::create(dir.join("counts.tsv")).unwrap()).unwrap();
    corpus.write_lexicon(std::fs::File::create(dir.join("lexicon.tsv")).unwrap()).unwrap();
    corpus.write_slices(std::fs::File::create(dir.join("slices.txt")).unwrap()).unwrap();
    let config = dir.join("config.toml");
    std::fs::write(
        &config,
        "counts = \"counts.tsv\"\nslices_file = \"slices.txt\"\npos_lexicon = \"lexicon.tsv\"\n\
         output_dir = \"out\"\nruns = 2\nmaster_seed = 3\n",
    )
    .unwrap();
    config.to_str().unwrap().to_string()
}

#[test]
fn stepwise_commands_match_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let staged = dir.path().join("staged");
    let staged = staged.to_str().unwrap();

    let summary = ok(&["--config", &config, "run"]);
    assert!(summary.starts_with("source\tS2\nS1\t"), "{summary}");

    let ingest = ok(&["--config", &config, "--output_dir", staged, "ingest"]);
    assert!(ingest.contains("malformed 0"), "{ingest}");
    for step in ["build-dt", "induce", "compare", "filter", "stability", "eval", "report"] {
        ok(&["--config", &config, "--output_dir", staged, step]);
    }
    for f in ["changes.jsonl", "candidates_S1_S2.tsv", "timeline.tsv", "summary.tsv", "stability.tsv", "stages.tsv"] {
        let a = std::fs::read(dir.path().join("out").join(f)).unwrap();
        let b = std::fs::read(Path::new(staged).join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = dir.path().join("strict");
    // A torso that keeps nothing but the middle fifth.
    ok(&[
        "--config", &config, "--output_dir", out.to_str().unwrap(),
        "--torso_head", "0.4", "--torso-tail", "0.4", "--N", "50", "--weighting", "log", "run",
    ]);
    let stages = std::fs::read_to_string(out.join("stages.tsv")).unwrap();
    let birth: Vec<&str> = stages.lines().find(|l| l.contains("\tbirth\t")).unwrap().split('\t').collect();
    assert_eq!(birth[5..], ["5", "1"]);
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = sensetrack(&["--config", &config, "--birth_threshold", "1.5", "run"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("birth_threshold"));

    let out = sensetrack(&["--config", &config, "--output_dir", "/nonexistent/x", "build-dt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));

    let out = sensetrack(&["--config", &config, "run", "--source", "S2", "--targets", "S1"]);
    assert!(!out.status.success());
}
