// SPDX-License-Identifier: MIT OR Apache-2.0

//! Genome-style CSV input, result files and flat key-value configuration.
//!
//! Input rows are `chromosome,position,<sample>…`. Chromosomes are ordered
//! 1..22, X, Y (then anything else by name), rows are sorted by position
//! within a chromosome and concatenated into one genome-level sequence.
//! Genome coordinates are `offset[chromosome] + position`, where each
//! chromosome's offset is one past the previous chromosome's largest
//! genome coordinate.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Breakpoint, Cluster, DetectionResult, Direction, Panel, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomicRecord {
    pub chromosome: String,
    pub position: i64,
    pub log2ratio: f64,
}

/// Where a chromosome sits in the concatenated sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChromosomeSpan {
    pub chromosome: String,
    /// 1-based index of the chromosome's first locus.
    pub first_index: usize,
    pub len: usize,
    /// Added to within-chromosome positions to get genome coordinates.
    pub offset: i64,
}

/// Genome-level data after ordering and concatenation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeData {
    pub samples: Vec<String>,
    /// `columns[s][i]`: sample `s` at locus `i` (0-based).
    pub columns: Vec<Vec<f64>>,
    pub chromosomes: Vec<String>,
    pub positions: Vec<i64>,
    pub spans: Vec<ChromosomeSpan>,
    /// Rows skipped because a selected sample was missing.
    pub dropped_rows: usize,
}

/// Sort key for natural chromosome order.
pub fn chromosome_key(name: &str) -> (u8, u32, String) {
    let bare = name
        .strip_prefix("chr")
        .or_else(|| name.strip_prefix("Chr"))
        .unwrap_or(name);
    match bare {
        "X" | "x" => (0, 23, String::new()),
        "Y" | "y" => (0, 24, String::new()),
        _ => match bare.parse::<u32>() {
            Ok(n) => (0, n, String::new()),
            Err(_) => (1, 0, bare.to_string()),
        },
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field.trim(), "" | "NA" | "NaN" | "nan" | "na" | "." | "null")
}

struct Row {
    line: usize,
    chromosome: String,
    position: i64,
    values: Vec<f64>,
}

/// Parses CSV text. `samples` selects sample columns by name (all when
/// `None`), in the order given.
pub fn parse_csv<R: Read>(reader: R, samples: Option<&[String]>) -> Result<GenomeData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if header.len() < 3
        || !header[0].eq_ignore_ascii_case("chromosome")
        || !header[1].eq_ignore_ascii_case("position")
    {
        return Err(Error::Parse {
            line: 1,
            reason: "header must be chromosome,position,<sample>…".into(),
        });
    }
    let available: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let selected: Vec<usize> = match samples {
        None => (0..available.len()).collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                available.iter().position(|a| a == n).ok_or_else(|| Error::Parse {
                    line: 1,
                    reason: format!("no sample column {n:?}"),
                })
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::invalid("samples", "no sample selected"));
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let chromosome = rec[0].to_string();
        if chromosome.is_empty() {
            return Err(Error::Parse {
                line,
                reason: "empty chromosome".into(),
            });
        }
        let position: i64 = rec[1].parse().map_err(|_| Error::Parse {
            line,
            reason: format!("bad position {:?}", &rec[1]),
        })?;
        if position < 0 {
            return Err(Error::Parse {
                line,
                reason: format!("negative position {position}"),
            });
        }
        let mut values = Vec::with_capacity(selected.len());
        let mut missing = false;
        for &s in &selected {
            let field = &rec[s + 2];
            if is_missing(field) {
                missing = true;
                break;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                reason: format!("bad value {field:?} in column {}", available[s]),
            })?;
            if !v.is_finite() {
                missing = true;
                break;
            }
            values.push(v);
        }
        if missing {
            dropped += 1;
            continue;
        }
        rows.push(Row {
            line,
            chromosome,
            position,
            values,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }

    rows.sort_by(|a, b| {
        chromosome_key(&a.chromosome)
            .cmp(&chromosome_key(&b.chromosome))
            .then_with(|| a.chromosome.cmp(&b.chromosome))
            .then(a.position.cmp(&b.position))
            .then(a.line.cmp(&b.line))
    });
    for w in rows.windows(2) {
        if w[0].chromosome == w[1].chromosome && w[0].position == w[1].position {
            let (a, b) = (w[0].line.min(w[1].line), w[0].line.max(w[1].line));
            return Err(Error::Parse {
                line: b,
                reason: format!(
                    "duplicate position {} on chromosome {} (lines {a} and {b})",
                    w[0].position, w[0].chromosome
                ),
            });
        }
    }

    let mut spans: Vec<ChromosomeSpan> = Vec::new();
    let mut next_offset = 0i64;
    let mut last_coord = -1i64;
    let mut columns = vec![Vec::with_capacity(rows.len()); selected.len()];
    let mut chromosomes = Vec::with_capacity(rows.len());
    let mut positions = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if spans.last().is_none_or(|s| s.chromosome != row.chromosome) {
            next_offset = last_coord + 1;
            spans.push(ChromosomeSpan {
                chromosome: row.chromosome.clone(),
                first_index: i + 1,
                len: 0,
                offset: next_offset,
            });
        }
        spans.last_mut().expect("span").len += 1;
        last_coord = next_offset + row.position;
        for (c, v) in columns.iter_mut().zip(&row.values) {
            c.push(*v);
        }
        chromosomes.push(row.chromosome.clone());
        positions.push(row.position);
    }
    Ok(GenomeData {
        samples: selected.iter().map(|&s| available[s].clone()).collect(),
        columns,
        chromosomes,
        positions,
        spans,
        dropped_rows: dropped,
    })
}

pub fn read_csv(path: &Path, samples: Option<&[String]>) -> Result<GenomeData> {
    parse_csv(fs::File::open(path)?, samples)
}

impl GenomeData {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Cumulative genome coordinate of each locus.
    pub fn genome_positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len());
        for s in &self.spans {
            for i in s.first_index - 1..s.first_index - 1 + s.len {
                out.push(s.offset + self.positions[i]);
            }
        }
        out
    }

    /// The single selected sample as a genome-level series.
    pub fn to_series(&self) -> Result<Series> {
        if self.columns.len() != 1 {
            return Err(Error::invalid(
                "samples",
                format!("{} sample columns selected; a series needs exactly one", self.columns.len()),
            ));
        }
        Ok(Series::with_positions(self.columns[0].clone(), self.genome_positions())?.labeled(self.samples[0].clone()))
    }

    /// Selected samples as rows of a panel.
    pub fn to_panel(&self) -> Result<Panel> {
        Panel::from_rows(&self.columns)?.with_labels(self.samples.clone())
    }

    /// `(chromosome, within-chromosome position)` of 1-based locus `index`.
    pub fn locate(&self, index: usize) -> Option<(&str, i64)> {
        let i = index.checked_sub(1)?;
        Some((self.chromosomes.get(i)?.as_str(), self.positions[i]))
    }

    /// Inverts [`Self::genome_positions`].
    pub fn from_genome_coordinate(&self, coord: i64) -> Option<(&str, i64)> {
        let span = self.spans.iter().rev().find(|s| s.offset <= coord)?;
        Some((span.chromosome.as_str(), coord - span.offset))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterDirection {
    Amplification,
    Deletion,
    TwoSided,
}

impl ClusterDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterDirection::Amplification => "amplification",
            ClusterDirection::Deletion => "deletion",
            ClusterDirection::TwoSided => "two_sided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "amplification" => Some(ClusterDirection::Amplification),
            "deletion" => Some(ClusterDirection::Deletion),
            "two_sided" => Some(ClusterDirection::TwoSided),
            _ => None,
        }
    }
}

/// One detected cluster; indices are 1-based with `end_index` exclusive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// `"a-b"` when the cluster crosses from chromosome `a` into `b`.
    pub chromosome: String,
    pub begin_position: i64,
    pub end_position: i64,
    pub begin_index: usize,
    pub end_index: usize,
    pub direction: ClusterDirection,
}

/// Reports for every cluster of `result`. Without a genome layout the
/// positions are the series positions (or indices) and the chromosome is `.`.
pub fn cluster_reports(
    result: &DetectionResult,
    genome: Option<&GenomeData>,
    positions: Option<&[i64]>,
    direction: ClusterDirection,
) -> Vec<ClusterReport> {
    reports_for_clusters(&result.clusters, genome, positions, direction)
}

/// As [`cluster_reports`], for clusters from any source.
pub fn reports_for_clusters(
    clusters: &[Cluster],
    genome: Option<&GenomeData>,
    positions: Option<&[i64]>,
    direction: ClusterDirection,
) -> Vec<ClusterReport> {
    clusters
        .iter()
        .map(|c| {
            let last = c.end - 1;
            let (chromosome, begin_position, end_position) = match genome {
                Some(g) => {
                    let (ca, pa) = g.locate(c.start).unwrap_or((".", 0));
                    let (cb, pb) = g.locate(last).unwrap_or((".", 0));
                    let name = if ca == cb { ca.to_string() } else { format!("{ca}-{cb}") };
                    (name, pa, pb)
                }
                None => {
                    let pos = |i: usize| positions.map_or(i as i64, |p| p[i - 1]);
                    (".".to_string(), pos(c.start), pos(last))
                }
            };
            ClusterReport {
                chromosome,
                begin_position,
                end_position,
                begin_index: c.start,
                end_index: c.end,
                direction,
            }
        })
        .collect()
}

/// `%.6g`-style formatting: six significant digits, trailing zeros trimmed.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const BREAKPOINTS_FILE: &str = "breakpoints.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CLUSTERS_HEADER: &str = "chromosome,begin_position,end_position,begin_index,end_index,direction";
pub const BREAKPOINTS_HEADER: &str = "index,direction,fallback,chromosome,position";

fn direction_str(d: Direction) -> &'static str {
    match d {
        Direction::Up => "up",
        Direction::Down => "down",
    }
}

pub fn clusters_csv(reports: &[ClusterReport]) -> String {
    let mut out = format!("{CLUSTERS_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.chromosome,
            r.begin_position,
            r.end_position,
            r.begin_index,
            r.end_index,
            r.direction.as_str()
        );
    }
    out
}

pub fn breakpoints_csv(breakpoints: &[Breakpoint], genome: Option<&GenomeData>) -> String {
    let mut out = format!("{BREAKPOINTS_HEADER}\n");
    for b in breakpoints {
        // A break-point at p + 1 has no locus; report the last one.
        let (chrom, pos) = genome
            .and_then(|g| g.locate(b.index.min(g.len())))
            .map_or((".".to_string(), b.index as i64), |(c, p)| (c.to_string(), p));
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            b.index,
            direction_str(b.direction),
            b.fallback,
            chrom,
            pos
        );
    }
    out
}

/// `index<TAB>value` lines for a statistic trace.
pub fn trace_tsv(stat: &crate::window::StatSeries) -> String {
    let mut out = String::from("index\tvalue\n");
    for (i, v) in stat.values.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", stat.offset + i, fmt_sig(*v));
    }
    out
}

fn opt_sig(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), fmt_sig)
}

/// Aligned `key : value` summary.
pub fn summary_text(result: &DetectionResult, extra: &[(String, String)]) -> String {
    let mut pairs: Vec<(String, String)> = extra.to_vec();
    pairs.extend([
        ("p".into(), result.p.to_string()),
        ("k".into(), result.k.to_string()),
        ("omnibus".into(), result.rejected_null.to_string()),
        ("max_statistic".into(), fmt_sig(result.max_statistic)),
        ("gamma".into(), fmt_sig(result.thresholds.gamma)),
        ("delta".into(), fmt_sig(result.thresholds.delta)),
        ("delta_fallback".into(), result.thresholds.delta_fallback.to_string()),
        ("sigma2_hat".into(), opt_sig(result.noise.sigma2_hat)),
        ("kappa2_hat".into(), opt_sig(result.noise.kappa2_hat)),
        ("kappa_clamped".into(), result.noise.kappa_clamped.to_string()),
        ("breakpoints".into(), result.breakpoints.len().to_string()),
        ("clusters".into(), result.clusters.len().to_string()),
        ("spurious_regions".into(), result.spurious.len().to_string()),
    ]);
    aligned(&pairs)
}

/// Aligns `key : value` lines on the longest key.
pub fn aligned(pairs: &[(String, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k:<width$} : {v}");
    }
    out
}

/// Writes clusters, break-points, one trace per statistic and the summary
/// into `dir`. Returns the written paths in a fixed order.
pub fn emit_result(
    dir: &Path,
    result: &DetectionResult,
    reports: &[ClusterReport],
    genome: Option<&GenomeData>,
    extra_summary: &[(String, String)],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put(CLUSTERS_FILE.into(), clusters_csv(reports))?;
    put(BREAKPOINTS_FILE.into(), breakpoints_csv(&result.breakpoints, genome))?;
    for stat in &result.statistics {
        put(format!("trace_{}.tsv", stat.name()), trace_tsv(stat))?;
    }
    put(SUMMARY_FILE.into(), summary_text(result, extra_summary))?;
    Ok(written)
}

fn parse_line_fields(text: &str, header: &str, fields: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header {header:?}"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if parts.len() != fields {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected {fields} fields"),
            });
        }
        out.push((i + 1, parts));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("bad field {v:?}"),
    })
}

pub fn parse_clusters(text: &str) -> Result<Vec<ClusterReport>> {
    parse_line_fields(text, CLUSTERS_HEADER, 6)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ClusterReport {
                chromosome: f[0].clone(),
                begin_position: field(&f[1], line)?,
                end_position: field(&f[2], line)?,
                begin_index: field(&f[3], line)?,
                end_index: field(&f[4], line)?,
                direction: ClusterDirection::parse(&f[5]).ok_or_else(|| Error::Parse {
                    line,
                    reason: format!("bad direction {:?}", f[5]),
                })?,
            })
        })
        .collect()
}

pub fn parse_breakpoints(text: &str) -> Result<Vec<Breakpoint>> {
    parse_line_fields(text, BREAKPOINTS_HEADER, 5)?
        .into_iter()
        .map(|(line, f)| {
            let direction = match f[1].as_str() {
                "up" => Direction::Up,
                "down" => Direction::Down,
                other => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("bad direction {other:?}"),
                    })
                }
            };
            Ok(Breakpoint {
                index: field(&f[0], line)?,
                direction,
                fallback: field(&f[2], line)?,
            })
        })
        .collect()
}

pub fn read_clusters(path: &Path) -> Result<Vec<ClusterReport>> {
    parse_clusters(&fs::read_to_string(path)?)
}

pub fn read_breakpoints(path: &Path) -> Result<Vec<Breakpoint>> {
    parse_breakpoints(&fs::read_to_string(path)?)
}

/// Flat `key = value` configuration; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            reason: "expected key = value".into(),
        })?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Positions grouped by chromosome; used to check that a genome layout
/// reproduces the input coordinates.
pub fn positions_by_chromosome(genome: &GenomeData) -> HashMap<&str, Vec<i64>> {
    let mut map: HashMap<&str, Vec<i64>> = HashMap::new();
    for (c, p) in genome.chromosomes.iter().zip(&genome.positions) {
        map.entry(c.as_str()).or_default().push(*p);
    }
    map
}
