// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rhbm::calibration::sample_angles;
use rhbm::embedding::EmbeddingSD;
use rhbm::generate::{sample_s1_graph, S1Params};
use rhbm::mixing::make_partition;
use rhbm::CounterRng;

fn rhbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhbm")).args(args).output().unwrap()
}

fn text(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

fn small(out: &Path) -> Vec<String> {
    [
        "generate", "--nodes", "240", "--communities", "3", "--avg-degree", "6", "--seed", "4",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

fn run_small(out: &Path) -> Output {
    let args = small(out);
    rhbm(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn generate_writes_artifacts_and_stats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let res = run_small(&out);
    assert!(res.status.code() == Some(0) || res.status.code() == Some(2), "{res:?}");
    for f in [
        "mixing.csv",
        "partition.csv",
        "latent.csv",
        "forces.csv",
        "calibration.txt",
        "calibration_trace.csv",
        "edges.txt",
        "edges.meta",
        "stats.csv",
        "stats_mixing.csv",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let converged = text(&out.join("calibration.txt")).contains("converged=true");
    assert_eq!(res.status.code() == Some(0), converged);
    assert!(text(&out.join("edges.meta")).contains("seed=4"));
    assert!(text(&out.join("latent.csv")).starts_with("# beta="));

    let check = dir.path().join("check");
    let stats = rhbm(&[
        "stats",
        "--edges",
        out.join("edges.txt").to_str().unwrap(),
        "--partition",
        out.join("partition.csv").to_str().unwrap(),
        "--out",
        check.to_str().unwrap(),
    ]);
    assert!(stats.status.success(), "{stats:?}");
    assert_eq!(text(&check.join("stats.csv")), text(&out.join("stats.csv")));
    assert_eq!(text(&check.join("stats_mixing.csv")), text(&out.join("stats_mixing.csv")));
    assert_eq!(String::from_utf8(stats.stdout).unwrap(), text(&out.join("stats.csv")));
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_small(&a);
    run_small(&b);
    assert_eq!(fs::read(a.join("edges.txt")).unwrap(), fs::read(b.join("edges.txt")).unwrap());
    assert_eq!(fs::read(a.join("latent.csv")).unwrap(), fs::read(b.join("latent.csv")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "nodes=150\ncommunities=1\nrho=1\navg-degree=4\nseed=9\n").unwrap();
    let out = dir.path().join("o");
    let res = rhbm(&["generate", "--config", cfg.to_str().unwrap(), "--nodes", "120", "--out", out.to_str().unwrap()]);
    assert!(res.status.code().is_some_and(|c| c == 0 || c == 2), "{res:?}");
    let partition = text(&out.join("partition.csv"));
    assert_eq!(partition.lines().count(), 121);
    // A single block gives a 1×1 mixing target of N·k̄.
    let mixing = text(&out.join("mixing.csv"));
    let rows: Vec<&str> = mixing.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["480.0"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();

    let stalled = rhbm(&["generate", "--nodes", "200", "--communities", "2", "--max-iter", "0", "--out", out]);
    assert_eq!(stalled.status.code(), Some(2));
    assert!(text(&Path::new(out).join("calibration.txt")).contains("converged=false"));

    let infeasible = rhbm(&["generate", "--nodes", "20", "--communities", "2", "--avg-degree", "40", "--out", out]);
    assert_eq!(infeasible.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&infeasible.stderr).contains("infeasible"));

    assert_eq!(rhbm(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(rhbm(&["generate", "--gamma", "1.5", "--out", out]).status.code(), Some(1));
    assert_eq!(rhbm(&["stats", "--edges", "/nonexistent", "--partition", "/nonexistent"]).status.code(), Some(1));
    for sub in ["generate", "sweep", "stats", "eval-embedding"] {
        let help = rhbm(&[sub, "--help"]);
        assert!(help.status.success());
        assert!(!help.stdout.is_empty());
    }
}

#[test]
fn stats_names_unknown_node() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, part) = (dir.path().join("e.txt"), dir.path().join("p.csv"));
    fs::write(&edges, "0 1\n1 7\n").unwrap();
    make_partition(4, 2, None).unwrap().write_csv(&part).unwrap();
    let res = rhbm(&["stats", "--edges", edges.to_str().unwrap(), "--partition", part.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains('7'));

    fs::write(&edges, "").unwrap();
    let res = rhbm(&["stats", "--edges", edges.to_str().unwrap(), "--partition", part.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("\n4,0,0,4,0,0\n"));
}

#[test]
fn sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let empty = rhbm(&["sweep", "--param", "beta", "--values", "", "--out", out]);
    assert!(empty.status.success(), "{empty:?}");
    assert_eq!(text(&dir.path().join("sweep_beta.csv")).lines().count(), 1);

    let res = rhbm(&[
        "sweep", "--param", "rho", "--values", "-0.5,0.5", "--seeds", "2", "--nodes", "200",
        "--communities", "2", "--avg-degree", "5", "--out", out,
    ]);
    assert!(res.status.code().is_some_and(|c| c == 0 || c == 2), "{res:?}");
    let table = text(&dir.path().join("sweep_rho.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[1].starts_with("rho,-0.5,1,200,"));
    assert!(lines[4].starts_with("rho,0.5,2,200,"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn eval_embedding_on_generating_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let n = 400;
    let rng = CounterRng::new(6);
    let theta = sample_angles(n, &rng);
    let params = S1Params::with_default_density(vec![8.0; n], 2.5).unwrap();
    let g = sample_s1_graph(&params, &theta, &rng).unwrap();
    let (edges, part, emb) = (dir.path().join("e.txt"), dir.path().join("p.csv"), dir.path().join("emb.csv"));
    g.write_edge_list(&edges).unwrap();
    make_partition(n, 4, None).unwrap().write_csv(&part).unwrap();
    let e = EmbeddingSD::from_s1(&params, &theta).unwrap();
    e.write_csv(&emb).unwrap();

    let out = dir.path().join("eval");
    let res = rhbm(&[
        "eval-embedding", "--edges", edges.to_str().unwrap(), "--partition", part.to_str().unwrap(),
        "--embedding", emb.to_str().unwrap(), "--samples", "10", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{res:?}");
    let report = text(&out.join("embedding_eval.csv"));
    let row: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    let mixing_error: f64 = row[1].parse().unwrap();
    assert!(mixing_error <= 0.1, "{report}");
    assert_eq!(row.last(), Some(&"10"));
    assert_eq!(text(&out.join("embedding_degrees.csv")).lines().count(), n + 1);

    // Drop the last node from the embedding.
    let truncated: String = text(&emb).lines().take(2 + n - 1).map(|l| format!("{l}\n")).collect();
    fs::write(&emb, truncated).unwrap();
    let res = rhbm(&[
        "eval-embedding", "--edges", edges.to_str().unwrap(), "--partition", part.to_str().unwrap(),
        "--embedding", emb.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("node sets differ"));
}
