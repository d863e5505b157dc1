// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clusterscan::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clusterscan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn clusterscan")
}

fn genome_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/synthetic_genome.csv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Two chromosomes of 300 loci each with a +3 block at loci 101..=160 of
/// chromosome 1, identical across `samples` columns up to a small ripple.
fn write_panel_csv(dir: &Path, samples: usize) -> PathBuf {
    let mut text = String::from("chromosome,position");
    for s in 0..samples {
        let _ = write!(text, ",S{s}");
    }
    text.push('\n');
    for (ci, chrom) in ["1", "2"].iter().enumerate() {
        for i in 1..=300usize {
            let _ = write!(text, "{chrom},{}", i * 1000);
            for s in 0..samples {
                let base = if ci == 0 && (101..=160).contains(&i) { 3.0 } else { 0.0 };
                let ripple = (((i * 7 + s * 13 + ci * 5) % 11) as f64 - 5.0) / 10.0;
                let _ = write!(text, ",{}", base + ripple);
            }
            text.push('\n');
        }
    }
    let path = dir.join(format!("panel{samples}.csv"));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn detect_without_input_prints_usage() {
    let o = run(&["detect"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("--input"), "{err}");
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn unknown_flag_is_rejected() {
    let o = run(&["calibrate", "--p", "600", "--bogus", "1"]);
    assert!(!o.status.success());
}

#[test]
fn calibrate_is_deterministic() {
    let args = ["calibrate", "--p", "600", "--k", "24", "--alpha", "0.05", "--B", "10000", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let record: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(record["p"], 600);
    assert_eq!(record["k"], 24);
    assert_eq!(record["mc_reps"], 10000);
    assert_eq!(record["process_kind"], "GCirc");
    let g = record["g_quantile"].as_f64().unwrap();
    assert!(g > 0.5 && g < 1.0, "{g}");
}

#[test]
fn detect_recovers_genome_clusters_and_writes_files() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "detect",
        "--input",
        genome_csv().to_str().unwrap(),
        "--k",
        "81",
        "--seed",
        "7",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clusters = io::read_clusters(&out.path().join(io::CLUSTERS_FILE)).unwrap();
    let chroms: Vec<&str> = clusters.iter().map(|c| c.chromosome.as_str()).collect();
    assert_eq!(chroms, ["8", "17", "20"]);
    assert!(clusters.iter().all(|c| c.direction == io::ClusterDirection::Amplification));
    let bps = io::read_breakpoints(&out.path().join(io::BREAKPOINTS_FILE)).unwrap();
    assert_eq!(bps.len(), 6);
    assert!(out.path().join("trace_window_mean.tsv").exists());
    let summary = std::fs::read_to_string(out.path().join(io::SUMMARY_FILE)).unwrap();
    assert!(summary.contains("omnibus          : true"), "{summary}");
}

#[test]
fn detect_output_is_byte_stable() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = run(&[
            "detect",
            "--input",
            genome_csv().to_str().unwrap(),
            "--k",
            "81",
            "--mc-reps",
            "500",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in [io::CLUSTERS_FILE, io::BREAKPOINTS_FILE, "trace_window_mean.tsv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn multi_mode_needs_several_columns() {
    let o = run(&["detect", "--input", genome_csv().to_str().unwrap(), "--mode", "multi-one"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least two sample columns"), "{}", stderr(&o));
}

#[test]
fn single_mode_rejects_several_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_panel_csv(dir.path(), 3);
    let o = run(&["detect", "--input", csv.to_str().unwrap(), "--k", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--samples"), "{}", stderr(&o));
    let o = run(&[
        "detect",
        "--input",
        csv.to_str().unwrap(),
        "--k",
        "20",
        "--samples",
        "S1",
        "--mc-reps",
        "500",
        "--out",
        dir.path().join("one").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn multi_one_sided_on_panel() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_panel_csv(dir.path(), 3);
    let out = dir.path().join("multi");
    let o = run(&[
        "detect",
        "--input",
        csv.to_str().unwrap(),
        "--mode",
        "multi-one",
        "--k",
        "20",
        "--mc-reps",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clusters = io::read_clusters(&out.join(io::CLUSTERS_FILE)).unwrap();
    assert_eq!(clusters.len(), 1, "{clusters:?}");
    assert_eq!(clusters[0].chromosome, "1");
    assert!(clusters[0].begin_index.abs_diff(101) <= 20);
    assert!(clusters[0].end_index.abs_diff(161) <= 20);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# shared settings\nk = 81\nseed = 3\nmc_reps = 500\nalways-localize = false\n").unwrap();
    let o = run(&[
        "detect",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        genome_csv().to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("seed             : 11"), "{text}");
    assert!(text.contains("k                : 81"), "{text}");
    assert!(text.contains("mc_reps          : 500"), "{text}");
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "window = 3\n").unwrap();
    let o = run(&["calibrate", "--config", cfg.to_str().unwrap(), "--p", "600"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"), "{}", stderr(&o));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "chromosome,position,A\n1,10,0.5\n1,oops,0.2\n").unwrap();
    let o = run(&["detect", "--input", csv.to_str().unwrap(), "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn yao_baseline_finds_planted_block() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_panel_csv(dir.path(), 1);
    let out = dir.path().join("yao");
    let o = run(&["baseline", "--method", "yao", "--input", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clusters = io::read_clusters(&out.join(io::CLUSTERS_FILE)).unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!((clusters[0].begin_index, clusters[0].end_index), (101, 161));
    assert_eq!((clusters[0].begin_position, clusters[0].end_position), (101_000, 160_000));
}

#[test]
fn bh_baseline_marks_planted_block() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_panel_csv(dir.path(), 1);
    let out = dir.path().join("bh");
    let o = run(&[
        "baseline",
        "--method",
        "bh",
        "--sigma",
        "0.3",
        "--input",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clusters = io::read_clusters(&out.join(io::CLUSTERS_FILE)).unwrap();
    assert_eq!(clusters.len(), 1, "{clusters:?}");
    assert_eq!((clusters[0].begin_index, clusters[0].end_index), (101, 161));
}

#[test]
fn simulate_null_table_as_json() {
    let o = run(&[
        "simulate", "--table", "null", "--p", "400", "--k", "20", "--reps", "20", "--mc-reps", "500", "--format", "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &rows[0];
    assert_eq!(row["method"], "one_sided");
    assert_eq!(row["reps"], 20);
    assert!(row["per_rep"].as_array().unwrap().is_empty());
    let rate = row["rejection_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
}

#[test]
fn simulate_table_two_lists_both_methods() {
    let o = run(&["simulate", "--table", "2", "--p", "400", "--reps", "10", "--mc-reps", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.contains("CER_Y") && header.contains("Power"), "{text}");
    assert!(text.contains("method           : one_sided"), "{text}");
}
