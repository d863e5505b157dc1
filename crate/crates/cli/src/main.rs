// SPDX-License-Identifier: MIT OR Apache-2.0

//! `clusterscan`: detect, simulate, calibrate and run baselines from the shell.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use clusterscan::baselines::{bh_procedure, one_sided_pvalues, two_sided_pvalues, yao_l1, DEFAULT_DELTA0};
use clusterscan::calibration::{gumbel_reference_quantile, index_runs};
use clusterscan::io::{self, fmt_sig, ClusterDirection, GenomeData};
use clusterscan::sim::{self, Method, NoiseFamily, SignalKind, SimConfig, SimReport};
use clusterscan::variance::{column_means, sigma2_order_stat};
use clusterscan::window::{uniform_max_stat, UniformScan};
use clusterscan::{Cluster, CutoffCache, CutoffSpec, DetectionResult, Detector, Panel, WindowConfig};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] clusterscan::Error),
    #[error("{0}")]
    Usage(String),
    #[error("config file {}: {reason}", path.display())]
    Config { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "clusterscan", version, about = "Detect and localize clustered signals in long noisy sequences")]
#[command(args_override_self = true, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a detector on a chromosome,position,<sample>... CSV file.
    Detect(DetectArgs),
    /// Replicate a simulation study and print its summary table.
    Simulate(SimulateArgs),
    /// Calibrate the classification cutoff for unit-variance noise.
    Calibrate(CalibrateArgs),
    /// Run a comparison method on a CSV file.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    One,
    Two,
    MultiOne,
    MultiTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Sign {
    Amplification,
    Deletion,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Input CSV with header chromosome,position,<sample>...
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Comma-separated sample columns to use (default: all).
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    samples: Option<Vec<String>>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "clusterscan_out")]
    out: PathBuf,
    /// Key = value file mirroring these flags; explicit flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "one")]
    mode: Mode,
    /// Sign of the clusters sought by the one-sided modes.
    #[arg(long, value_enum, default_value = "amplification")]
    direction: Sign,
    /// Window size; chosen by the uniform window scan when omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Variance-estimation window (default: k).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Calibration seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo replications for threshold calibration.
    #[arg(long, default_value_t = clusterscan::model::DEFAULT_MC_REPS)]
    mc_reps: usize,
    /// Fixed classification threshold instead of the calibrated one.
    #[arg(long)]
    gamma: Option<f64>,
    /// Fixed localization threshold instead of the calibrated one.
    #[arg(long)]
    delta: Option<f64>,
    /// Half-width of the label majority vote (default: k).
    #[arg(long)]
    vote_width: Option<usize>,
    /// Localize break-points even when the omnibus test does not reject.
    #[arg(long)]
    always_localize: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Table {
    /// One-sided study with the epidemic baseline alongside.
    #[value(name = "2")]
    OneSided,
    /// Two-sided study, estimated and true noise parameters.
    #[value(name = "5")]
    TwoSided,
    /// Benjamini–Hochberg on the one-sided configuration.
    Bh,
    /// Global null, one-sided detector.
    Null,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Tsv,
    Json,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    table: Table,
    #[arg(long, default_value_t = 600)]
    p: usize,
    /// Window size (default: floor of sqrt(p)).
    #[arg(long)]
    k: Option<usize>,
    /// gauss, t6, laplace, gauss_kappa1, t10_kappa1 or laplace_kappa1
    /// (default: gauss_kappa1 for table 5, gauss otherwise).
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Data seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 7)]
    calibration_seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = clusterscan::model::DEFAULT_MC_REPS)]
    mc_reps: usize,
    /// Skip the epidemic baseline column of table 2.
    #[arg(long)]
    no_baseline: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long)]
    p: usize,
    /// Window size (default: floor of sqrt(p)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Monte Carlo replications.
    #[arg(long = "B", visible_alias = "mc-reps", default_value_t = clusterscan::model::DEFAULT_MC_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BaselineMethod {
    Yao,
    Bh,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: BaselineMethod,
    /// Epidemic scan drift.
    #[arg(long, default_value_t = DEFAULT_DELTA0)]
    delta0: f64,
    /// Benjamini–Hochberg level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Two-sided p-values for Benjamini–Hochberg.
    #[arg(long)]
    two_sided: bool,
    /// Noise scale for the p-values; estimated when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Window of the noise-scale estimate (default: floor of sqrt(p)).
    #[arg(long)]
    m: Option<usize>,
}

fn sqrt_k(p: usize) -> usize {
    WindowConfig::sqrt_rule(p).k
}

fn read_input(args: &InputArgs) -> CliResult<GenomeData> {
    Ok(io::read_csv(&args.input, args.samples.as_deref())?)
}

fn single_series(genome: &GenomeData, what: &str) -> CliResult<clusterscan::Series> {
    if genome.samples.len() != 1 {
        return Err(CliError::Usage(format!(
            "{what} needs exactly one sample column; the input has {} ({}); pick one with --samples",
            genome.samples.len(),
            genome.samples.join(",")
        )));
    }
    Ok(genome.to_series()?)
}

/// Window choice from the uniform scan, on the data (one-sided) or on the
/// centered squares (two-sided).
fn scan_window(x: &[f64], two_sided: bool) -> CliResult<UniformScan> {
    let p = x.len();
    let m = sqrt_k(p).max(1);
    let sigma2 = sigma2_order_stat(x, m, None)?;
    let scan = if two_sided {
        let sq: Vec<f64> = x.iter().map(|v| v * v - sigma2).collect();
        uniform_max_stat(&sq, (2.0f64.sqrt() * sigma2).max(f64::MIN_POSITIVE), None)?
    } else {
        uniform_max_stat(x, sigma2.sqrt().max(f64::MIN_POSITIVE), None)?
    };
    Ok(scan)
}

fn negate_panel(panel: &Panel) -> CliResult<Panel> {
    Ok(panel.scaled(-1.0)?.with_labels(panel.labels().to_vec())?)
}

fn pairs(items: &[(&str, String)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn run_detect(args: &DetectArgs) -> CliResult<()> {
    let genome = read_input(&args.input)?;
    let multi = matches!(args.mode, Mode::MultiOne | Mode::MultiTwo);
    let two_sided = matches!(args.mode, Mode::Two | Mode::MultiTwo);
    if two_sided && args.direction == Sign::Deletion {
        return Err(CliError::Usage("--direction deletion applies only to one-sided modes".into()));
    }
    if multi && genome.samples.len() < 2 {
        return Err(CliError::Usage(format!(
            "--mode {} needs at least two sample columns; the input provides {}",
            mode_name(args.mode),
            genome.samples.len()
        )));
    }

    let deletion = args.direction == Sign::Deletion;
    let series = if multi { None } else { Some(single_series(&genome, "this mode")?) };
    let panel = if multi { Some(genome.to_panel()?) } else { None };
    let scan_input: Vec<f64> = match (&series, &panel) {
        (Some(s), _) => s.values().to_vec(),
        (_, Some(pn)) => column_means(pn),
        _ => unreachable!(),
    };
    let scan_input: Vec<f64> = if deletion { scan_input.iter().map(|v| -v).collect() } else { scan_input };

    let (k, k_source) = match args.k {
        Some(k) => (k, "flag".to_string()),
        None => {
            let scan = scan_window(&scan_input, two_sided)?;
            (scan.recommended_k, format!("window scan, m_hat={}", scan.m_hat))
        }
    };
    let mut config = WindowConfig::new(k)
        .with_alpha(args.alpha)
        .with_seed(args.seed)
        .with_mc_reps(args.mc_reps);
    config.m = args.m;
    config.gamma = args.gamma;
    config.delta = args.delta;
    config.vote_half_width = args.vote_width;
    config.always_localize = args.always_localize;
    let detector = Detector::new(config);

    let result: DetectionResult = match args.mode {
        Mode::One => {
            let s = series.expect("series");
            detector.one_sided(&if deletion { s.negated() } else { s })?
        }
        Mode::Two => detector.two_sided(&series.expect("series"))?,
        Mode::MultiOne => {
            let pn = panel.expect("panel");
            detector.multi_one_sided(&if deletion { negate_panel(&pn)? } else { pn })?
        }
        Mode::MultiTwo => detector.multi_two_sided(&panel.expect("panel"))?,
    };
    let direction = match (two_sided, deletion) {
        (true, _) => ClusterDirection::TwoSided,
        (false, true) => ClusterDirection::Deletion,
        (false, false) => ClusterDirection::Amplification,
    };
    let reports = io::cluster_reports(&result, Some(&genome), None, direction);
    let extra = pairs(&[
        ("input", args.input.input.display().to_string()),
        ("mode", mode_name(args.mode).to_string()),
        ("direction", direction.as_str().to_string()),
        ("samples", genome.samples.join(",")),
        ("dropped_rows", genome.dropped_rows.to_string()),
        ("k_source", k_source),
        ("alpha", fmt_sig(args.alpha)),
        ("seed", args.seed.to_string()),
        ("mc_reps", args.mc_reps.to_string()),
    ]);
    io::emit_result(&args.input.out, &result, &reports, Some(&genome), &extra)?;
    print!("{}", io::summary_text(&result, &extra));
    print!("{}", io::clusters_csv(&reports));
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::One => "one",
        Mode::Two => "two",
        Mode::MultiOne => "multi-one",
        Mode::MultiTwo => "multi-two",
    }
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let default_noise = if args.table == Table::TwoSided { "gauss_kappa1" } else { "gauss" };
    let noise = NoiseFamily::parse(args.noise.as_deref().unwrap_or(default_noise))?;
    let k = args.k.unwrap_or_else(|| sqrt_k(args.p));
    let window = WindowConfig::new(k)
        .with_alpha(args.alpha)
        .with_seed(args.calibration_seed)
        .with_mc_reps(args.mc_reps);
    let detector = Detector::new(window.clone()).with_cache(Arc::new(CutoffCache::new()));
    let run = |signal: SignalKind, method: Method| -> CliResult<SimReport> {
        let config = SimConfig::new(args.p, signal, noise.clone(), method, window.clone())
            .with_reps(args.reps)
            .with_seed(args.seed);
        Ok(sim::run_with(&config, &detector)?)
    };
    let rows: Vec<(SimReport, Option<SimReport>)> = match args.table {
        Table::OneSided => {
            let ours = run(SignalKind::RampPair, Method::OneSided)?;
            let yao = if args.no_baseline {
                None
            } else {
                Some(run(SignalKind::RampPair, Method::Yao { delta0: DEFAULT_DELTA0 })?)
            };
            vec![(ours, yao)]
        }
        Table::TwoSided => vec![
            (run(SignalKind::MixedClusters, Method::TwoSided)?, None),
            (run(SignalKind::MixedClusters, Method::TwoSidedKnown)?, None),
        ],
        Table::Bh => vec![(run(SignalKind::RampPair, Method::Bh { two_sided: false })?, None)],
        Table::Null => vec![(run(SignalKind::GlobalNull, Method::OneSided)?, None)],
    };
    print!("{}", render_sim(&rows, args.format)?);
    Ok(())
}

#[derive(Serialize)]
struct SimRow<'a> {
    #[serde(flatten)]
    report: &'a SimReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<&'a SimReport>,
}

fn render_sim(rows: &[(SimReport, Option<SimReport>)], format: Format) -> CliResult<String> {
    // Per-replication metrics stay out of every rendering.
    let rows: Vec<(SimReport, Option<SimReport>)> = rows
        .iter()
        .map(|(r, y)| {
            let strip = |mut r: SimReport| {
                r.per_rep.clear();
                r
            };
            (strip(r.clone()), y.clone().map(strip))
        })
        .collect();
    Ok(match format {
        Format::Tsv => sim::format_table_tsv(&rows),
        Format::Json => {
            let out: Vec<SimRow> = rows
                .iter()
                .map(|(r, y)| SimRow {
                    report: r,
                    baseline: y.as_ref(),
                })
                .collect();
            serde_json::to_string_pretty(&out)? + "\n"
        }
        Format::Table => {
            let mut out = sim::format_table(&rows);
            for (r, _) in &rows {
                let _ = writeln!(
                    out,
                    "\n{}",
                    io::aligned(&pairs(&[
                        ("method", r.method.clone()),
                        ("noise", r.noise.clone()),
                        ("p", r.p.to_string()),
                        ("reps", r.reps.to_string()),
                        ("rejection_rate", format!("{:.4}", r.rejection_rate)),
                        ("any_cluster_rate", format!("{:.4}", r.any_cluster_rate)),
                        ("l_hat_mode_share", format!("{:.4}", r.l_hat_mode_share)),
                    ]))
                    .trim_end()
                );
            }
            out
        }
    })
}

#[derive(Serialize)]
struct CalibrationRecord {
    #[serde(flatten)]
    cutoff: CutoffSpec,
    /// Closed-form extreme-value value on the `√k` scale; never used as a cutoff.
    gumbel_reference: Option<f64>,
}

fn sig6(v: f64) -> f64 {
    fmt_sig(v).parse().unwrap_or(v)
}

fn run_calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let k = args.k.unwrap_or_else(|| sqrt_k(args.p));
    WindowConfig::new(k).with_alpha(args.alpha).with_mc_reps(args.reps).validate(args.p)?;
    let mut cutoff = CutoffSpec::window_mean(args.p, k, args.alpha, args.reps, args.seed)?;
    cutoff.g_quantile = sig6(cutoff.g_quantile);
    let gumbel_reference = gumbel_reference_quantile(args.p, k, args.alpha).ok().map(|g| sig6(g.value));
    let record = CalibrationRecord {
        cutoff,
        gumbel_reference,
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn run_baseline(args: &BaselineArgs) -> CliResult<()> {
    let genome = read_input(&args.input)?;
    let series = single_series(&genome, "baseline")?;
    let x = series.values();
    let p = x.len();
    let (clusters, direction, mut extra) = match args.method {
        BaselineMethod::Yao => {
            let fit = yao_l1(x, args.delta0)?;
            let extra = pairs(&[
                ("method", "yao".into()),
                ("delta0", fmt_sig(args.delta0)),
                ("l1", fmt_sig(fit.l1)),
                ("i_hat", fit.i_hat.to_string()),
                ("j_hat", fit.j_hat.to_string()),
            ]);
            (vec![fit.cluster()], ClusterDirection::Amplification, extra)
        }
        BaselineMethod::Bh => {
            let m = args.m.unwrap_or_else(|| sqrt_k(p));
            let sigma = match args.sigma {
                Some(s) => s,
                None => sigma2_order_stat(x, m, None)?.sqrt(),
            };
            let pvals = if args.two_sided {
                two_sided_pvalues(x, sigma)?
            } else {
                one_sided_pvalues(x, sigma)?
            };
            let rejected = bh_procedure(&pvals, args.alpha)?;
            let clusters: Vec<Cluster> = index_runs(&rejected)
                .into_iter()
                .map(|(a, b)| Cluster { start: a, end: b + 1 })
                .collect();
            let direction = if args.two_sided {
                ClusterDirection::TwoSided
            } else {
                ClusterDirection::Amplification
            };
            let extra = pairs(&[
                ("method", "bh".into()),
                ("alpha", fmt_sig(args.alpha)),
                ("sigma_hat", fmt_sig(sigma)),
                ("rejected", rejected.len().to_string()),
            ]);
            (clusters, direction, extra)
        }
    };
    let reports = io::reports_for_clusters(&clusters, Some(&genome), None, direction);
    extra.splice(
        0..0,
        pairs(&[
            ("input", args.input.input.display().to_string()),
            ("samples", genome.samples.join(",")),
            ("dropped_rows", genome.dropped_rows.to_string()),
            ("p", p.to_string()),
        ]),
    );
    extra.push(("clusters".into(), reports.len().to_string()));
    write_baseline(&args.input.out, &reports, &extra)?;
    print!("{}", io::aligned(&extra));
    print!("{}", io::clusters_csv(&reports));
    Ok(())
}

fn write_baseline(dir: &Path, reports: &[io::ClusterReport], summary: &[(String, String)]) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(io::CLUSTERS_FILE), io::clusters_csv(reports))?;
    std::fs::write(dir.join(io::SUMMARY_FILE), io::aligned(summary))?;
    Ok(())
}

fn usage_of(sub: &str) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    match cmd.find_subcommand_mut(sub) {
        Some(s) => s.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::expand(argv, &Cli::command()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    let (name, outcome) = match &cli.command {
        Command::Detect(a) => ("detect", run_detect(a)),
        Command::Simulate(a) => ("simulate", run_simulate(a)),
        Command::Calibrate(a) => ("calibrate", run_calibrate(a)),
        Command::Baseline(a) => ("baseline", run_baseline(a)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", usage_of(name));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
