//! End-to-end runs of the binary on small synthetic corpora.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tennis-frontier");

const SMALL: &str = r#"
data_dir = "data"
out_dir = "out"
seed = 11
[ingest]
min_matches = 3
[stats]
null_replicates = 300
bootstrap_iterations = 100
[profiles.reduced.frontier]
population = 40
max_generations = 20
n_seeds = 2
"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("tennis-frontier.toml"), config).unwrap();
        Workspace { dir }
    }

    fn synthesized(config: &str, per_tour: usize) -> Self {
        let ws = Workspace::new(config);
        let out = ws.run(&["synthesize", "--players-per-tour", &per_tour.to_string(), "--tournaments", "6"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        ws
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(BIN).args(args).current_dir(self.dir.path()).output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        stderr(&out)
    }
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn manifest_outputs(dir: &Path) -> BTreeMap<String, String> {
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    serde_json::from_value(v["outputs"].clone()).unwrap()
}

fn csv_header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# tennis-frontier stage="), "{first}");
    lines.next().unwrap().split(',').map(String::from).collect()
}

fn tree_hashes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn two_player_frontier_writes_two_files_and_a_manifest() {
    let ws = Workspace::synthesized(SMALL, 4);
    ws.ok(&["ingest"]);
    ws.ok(&["fit"]);
    ws.ok(&["frontier", "--profile", "reduced", "--players", "2"]);
    let outputs = manifest_outputs(&ws.path("out/frontiers"));
    let json: Vec<_> = outputs.keys().filter(|k| k.ends_with(".json") && !k.ends_with("index.json")).collect();
    assert_eq!(json.len(), 2, "{json:?}");
    for rel in outputs.keys() {
        assert!(ws.path("out").join(rel).is_file(), "{rel}");
    }
    let v: serde_json::Value = serde_json::from_slice(&fs::read(ws.path("out").join(json[0])).unwrap()).unwrap();
    assert_eq!(v["meta"]["profile"], "reduced");
    assert_eq!(v["meta"]["state_order"], "tennis-game-18/v1");
}

#[test]
fn rerun_is_up_to_date_and_forced_rerun_is_byte_identical() {
    let ws = Workspace::synthesized(SMALL, 5);
    ws.ok(&["all", "--profile", "reduced"]);
    let first = tree_hashes(&ws.path("out"));
    let again = ws.ok(&["all", "--profile", "reduced"]);
    for stage in ["ingest", "fit", "frontier", "metrics", "stats", "report"] {
        assert!(again.contains(&format!("{stage}: up to date")), "{again}");
    }
    assert_eq!(first, tree_hashes(&ws.path("out")));

    let forced = ws.ok(&["all", "--profile", "reduced", "--force", "--jobs", "2"]);
    assert!(forced.contains("report: done"), "{forced}");
    assert_eq!(first, tree_hashes(&ws.path("out")), "forced rerun changed bytes");
}

#[test]
fn report_tables_have_expected_columns() {
    let ws = Workspace::synthesized(SMALL, 5);
    ws.ok(&["all", "--profile", "reduced"]);
    let r = ws.path("out/report");
    let pm = csv_header(&r.join("player_metrics.csv"));
    for col in ["category", "player", "tier", "efficiency", "strategy_fit", "optimal_contrast", "epsilon"] {
        assert!(pm.iter().any(|c| c == col), "player_metrics lacks {col}: {pm:?}");
    }
    let mc = csv_header(&r.join("model_comparison.csv"));
    assert_eq!(mc[..3], ["target", "metric", "category"]);
    let tc = csv_header(&r.join("tier_comparisons.csv"));
    assert_eq!(tc[..4], ["category", "metric", "family", "pair"]);
    for f in ["contrast_scatter.csv", "contrast_band.csv", "frontier_curves.csv", "allocation_patterns.csv"] {
        assert!(!csv_header(&r.join(f)).is_empty(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(r.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["meta"]["stage"], "report");
}

#[test]
fn single_tier_categories_are_marked_insufficient() {
    let config = format!("{SMALL}\n[tiers]\nlow_below = 0.01\nhigh_above = 0.99\n");
    let ws = Workspace::synthesized(&config, 4);
    ws.ok(&["all", "--profile", "reduced"]);
    let text = fs::read_to_string(ws.path("out/report/tier_comparisons.csv")).unwrap();
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert!(!body.is_empty());
    assert!(body.iter().all(|l| l.contains("insufficient groups")), "{text}");
}

#[test]
fn downstream_stage_without_upstream_exits_4() {
    let ws = Workspace::synthesized(SMALL, 4);
    let out = ws.run(&["metrics"]);
    assert_eq!(out.status.code(), Some(4));
    let msg = stderr(&out);
    assert!(msg.contains("`fit`") && msg.contains("`frontier`"), "{msg}");
    assert!(msg.contains("tennis-frontier"), "{msg}");
}

#[test]
fn changed_upstream_config_is_a_dependency_error() {
    let ws = Workspace::synthesized(SMALL, 4);
    ws.ok(&["ingest"]);
    ws.ok(&["fit"]);
    ws.ok(&["frontier", "--profile", "reduced", "--players", "1"]);
    let out = ws.run(&["metrics", "--profile", "reduced", "--players", "1", "--epsilon", "0.01"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn bad_config_exits_2() {
    let ws = Workspace::new("[frontier]\nepsilons = [-1.0]\n");
    assert_eq!(ws.run(&["ingest"]).status.code(), Some(2));
    let ws = Workspace::new("no_such_key = 1\n");
    assert_eq!(ws.run(&["ingest"]).status.code(), Some(2));
    let ws = Workspace::new(SMALL);
    assert_eq!(ws.run(&["--config", "missing.toml", "ingest"]).status.code(), Some(2));
}

#[test]
fn missing_or_empty_data_exits_3() {
    let ws = Workspace::new(SMALL);
    assert_eq!(ws.run(&["ingest"]).status.code(), Some(3));
    fs::create_dir(ws.path("data")).unwrap();
    assert_eq!(ws.run(&["ingest"]).status.code(), Some(3));
    let strict = Workspace::synthesized(&SMALL.replace("min_matches = 3", "min_matches = 1000"), 4);
    assert_eq!(strict.run(&["ingest"]).status.code(), Some(3));
}

#[test]
fn simulate_reports_agreement() {
    let config = format!("{SMALL}\n[simulate]\nstrategies = 4\ngames = 20000\n");
    let ws = Workspace::new(&config);
    ws.ok(&["simulate"]);
    let text = fs::read_to_string(ws.path("out/simulate/checks.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 4);
    assert!(text.lines().skip(2).all(|l| l.ends_with("true")), "{text}");
}
