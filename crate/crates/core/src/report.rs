//! Rendering of model tables and experiment reports as markdown, CSV or JSON.
//!
//! Probabilities are always printed with six decimals and average path
//! lengths with two, so generated tables diff cleanly against reference
//! tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addrgen::collision_probability;
use crate::experiment::{run_experiment, ConfigError, ExperimentConfig, ExperimentReport, SizeReport, TestOutcome};
use crate::model::{self, ModelDistribution, ModelError, ModelParams, SMALL_N_CAVEAT, SMALL_N_CAVEAT_THRESHOLD};
use crate::reference;
use crate::stats::{self, ComparisonRow, PathLengthHistogram, StatsError, DISPLAY_THRESHOLD};

/// Header of every CSV distribution table.
pub const DISTRIBUTION_CSV_HEADER: &str = "path_length,theoretical_prob,experimental_prob,difference";

/// Rows per model-vs-simulation table.
pub const TABLE_ROWS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown output format {0:?} (expected md, csv or json)")]
pub struct UnknownFormat(pub String);

impl FromStr for OutputFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which parts of an experiment report to show in text formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportView {
    /// Observed distributions and averages only.
    Summary,
    /// Model comparison and goodness-of-fit as well.
    Validation,
}

fn prob(p: f64) -> String {
    format!("{p:.6}")
}

/// `1000000` -> `1,000,000`.
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn render_comparison_table(rows: &[ComparisonRow], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Markdown => {
            out.push_str("| Path Length | Theoretical Prob. | Experimental Prob. | Difference |\n");
            out.push_str("|---:|---:|---:|---:|\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    r.path_length,
                    prob(r.theoretical_prob),
                    prob(r.experimental_prob),
                    prob(r.difference)
                );
            }
        }
        OutputFormat::Csv => {
            out.push_str(DISTRIBUTION_CSV_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.path_length,
                    prob(r.theoretical_prob),
                    prob(r.experimental_prob),
                    prob(r.difference)
                );
            }
        }
        OutputFormat::Json => out = json(&rows),
    }
    out
}

/// Six consecutive rows starting at the shortest path length the model gives
/// visible mass to, the layout used by the reference tables.
pub fn table_window(model: &ModelDistribution, observed: &PathLengthHistogram) -> Vec<ComparisonRow> {
    let start = model.iter().find(|&(_, p)| p >= DISPLAY_THRESHOLD).map_or(1, |(k, _)| k);
    (start..start + TABLE_ROWS as u32)
        .map(|k| ComparisonRow::new(k, model.probability(k), observed.probability(k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub path_length: u32,
    pub probability: f64,
}

/// Everything `model_query` reports for one trie size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub n: u64,
    pub k_max: u32,
    pub pmf: Vec<PmfEntry>,
    pub expected_path_length: f64,
    pub mode: u32,
    pub asymptotic_ratio: Option<f64>,
    pub collision_probability: f64,
    pub caveat: Option<String>,
}

pub fn model_summary(n: u64, k_max: u32) -> Result<ModelSummary, ModelError> {
    let dist = model::distribution(&ModelParams::with_k_max(n, k_max)?)?;
    Ok(ModelSummary {
        n,
        k_max,
        pmf: dist.iter().map(|(k, p)| PmfEntry { path_length: k, probability: p }).collect(),
        expected_path_length: model::expected_path_length(n)?,
        mode: dist.mode(),
        asymptotic_ratio: model::asymptotic_ratio(n).ok(),
        collision_probability: collision_probability(n as f64),
        caveat: (n < SMALL_N_CAVEAT_THRESHOLD).then(|| SMALL_N_CAVEAT.to_string()),
    })
}

/// Model PMF, expected path length, mode, asymptotic ratio and collision
/// bound for `n` keys.
///
/// Text formats list the PMF rows that are visible at six decimals; JSON
/// carries the full vector.
pub fn model_query(n: u64, k_max: u32, format: OutputFormat) -> Result<String, ModelError> {
    let summary = model_summary(n, k_max)?;
    let visible = summary.pmf.iter().filter(|e| e.probability >= DISPLAY_THRESHOLD);
    let ratio = summary.asymptotic_ratio.map_or_else(|| "n/a".to_string(), |r| format!("{r:.6}"));
    let mut out = String::new();
    match format {
        OutputFormat::Markdown => {
            let _ = writeln!(out, "# Path-length model for n = {}\n", group_thousands(n));
            out.push_str("| Path Length | Theoretical Prob. |\n|---:|---:|\n");
            for e in visible {
                let _ = writeln!(out, "| {} | {} |", e.path_length, prob(e.probability));
            }
            let _ = writeln!(out, "\n- Expected path length: {:.6}", summary.expected_path_length);
            let _ = writeln!(out, "- Mode: {}", summary.mode);
            let _ = writeln!(out, "- E[PL] / log16(n): {ratio}");
            let _ = writeln!(out, "- Collision probability: {:.6e}", summary.collision_probability);
            if let Some(c) = &summary.caveat {
                let _ = writeln!(out, "\nNote: {c}");
            }
        }
        OutputFormat::Csv => {
            let _ = writeln!(out, "# n={n}");
            let _ = writeln!(out, "# expected_path_length={:.6}", summary.expected_path_length);
            let _ = writeln!(out, "# mode={}", summary.mode);
            let _ = writeln!(out, "# asymptotic_ratio={ratio}");
            let _ = writeln!(out, "# collision_probability={:.6e}", summary.collision_probability);
            if let Some(c) = &summary.caveat {
                let _ = writeln!(out, "# note={c}");
            }
            out.push_str("path_length,theoretical_prob\n");
            for e in visible {
                let _ = writeln!(out, "{},{}", e.path_length, prob(e.probability));
            }
        }
        OutputFormat::Json => out = json(&summary),
    }
    Ok(out)
}

fn chi_line(label: &str, outcome: &TestOutcome) -> String {
    match outcome {
        TestOutcome::Ok(r) => {
            let mut s = format!("- {label}: statistic {:.6}, dof {}, p-value {:.6}", r.statistic, r.dof, r.p_value);
            if !r.merged_bins.is_empty() {
                let ranges: Vec<String> = r.merged_bins.iter().map(|b| format!("{}-{}", b.first, b.last)).collect();
                let _ = write!(s, " (merged bins {})", ranges.join(", "));
            }
            s
        }
        TestOutcome::Error { message } => format!("- {label}: N/A ({message})"),
    }
}

fn render_size_markdown(out: &mut String, s: &SizeReport, view: ReportView) {
    let _ = writeln!(out, "## {} addresses, {} trials\n", group_thousands(s.size), s.trials);
    match view {
        ReportView::Summary => {
            out.push_str("| Path Length | Count | Experimental Prob. |\n|---:|---:|---:|\n");
            for (&k, &c) in s.histogram.counts() {
                let _ = writeln!(out, "| {k} | {c} | {} |", prob(s.histogram.probability(k)));
            }
        }
        ReportView::Validation => out.push_str(&render_comparison_table(&s.comparison_rows, OutputFormat::Markdown)),
    }
    out.push('\n');
    let _ = writeln!(out, "- Average divergence depth: {:.2}", s.avg_divergence_depth);
    if view == ReportView::Validation {
        let _ = writeln!(out, "- Model expected path length: {:.2}", s.model_expected_path_length);
        let _ = writeln!(out, "- Max probability difference: {}", prob(s.max_abs_difference));
    }
    let _ = writeln!(out, "- Average node count: {:.2}", s.avg_node_count);
    let per_trial: Vec<String> = s.trial_avg_divergence_depth.iter().map(|a| format!("{a:.4}")).collect();
    let _ = writeln!(out, "- Per-trial averages: {}", per_trial.join(", "));
    if s.duplicate_keys > 0 {
        let _ = writeln!(out, "- Duplicate keys: {}", s.duplicate_keys);
    }
    if view == ReportView::Validation {
        out.push_str(&chi_line("Chi-square (probability basis)", &s.chi_square_paper));
        out.push('\n');
        out.push_str(&chi_line("Chi-square (counts)", &s.chi_square_counts));
        out.push('\n');
    }
    out.push('\n');
}

pub fn render_report(report: &ExperimentReport, format: OutputFormat, view: ReportView) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Json => out = json(report),
        OutputFormat::Markdown => {
            let c = &report.config;
            out.push_str("# Path-length experiment\n\n");
            let _ = writeln!(out, "- Version: {}", report.artifact_version);
            let _ = writeln!(out, "- Master seed: {}", c.master_seed);
            let _ = writeln!(out, "- Trials per size: {}", c.trials);
            let _ = writeln!(out, "- Generator: {}", c.mode);
            let _ = writeln!(out, "- k_max: {}, min expected count: {}\n", c.k_max, c.min_expected);
            for s in &report.sizes {
                render_size_markdown(&mut out, s, view);
            }
        }
        OutputFormat::Csv => match view {
            ReportView::Validation => {
                out.push_str("size,");
                out.push_str(DISTRIBUTION_CSV_HEADER);
                out.push('\n');
                for s in &report.sizes {
                    for r in &s.comparison_rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            s.size,
                            r.path_length,
                            prob(r.theoretical_prob),
                            prob(r.experimental_prob),
                            prob(r.difference)
                        );
                    }
                }
            }
            ReportView::Summary => {
                out.push_str("size,path_length,count,experimental_prob\n");
                for s in &report.sizes {
                    for (&k, &c) in s.histogram.counts() {
                        let _ = writeln!(out, "{},{k},{c},{}", s.size, prob(s.histogram.probability(k)));
                    }
                }
            }
        },
    }
    out
}

/// One generated table file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFile {
    pub name: String,
    pub contents: String,
}

pub const TABLE_FILE_NAMES: [&str; 6] = [
    "table1_100.md",
    "table2_1000.md",
    "table3_10000.md",
    "table4_100000.md",
    "table5_averages.md",
    "table6_chi_square.md",
];

fn distribution_table(s: &SizeReport) -> String {
    let rows = table_window(&s.model(), &s.histogram);
    let mut out = format!("# Path length distribution for {} addresses\n\n", group_thousands(s.size));
    out.push_str(&render_comparison_table(&rows, OutputFormat::Markdown));
    out
}

fn averages_table(report: &ExperimentReport) -> String {
    let mut out = String::from("# Theoretical and experimental average path lengths\n\n");
    out.push_str("| Number of Addresses | Theoretical Avg. | Experimental Avg. | Difference |\n");
    out.push_str("|---:|---:|---:|---:|\n");
    for s in &report.sizes {
        let _ = writeln!(
            out,
            "| {} | {:.2} | {:.2} | {:.2} |",
            group_thousands(s.size),
            s.model_expected_path_length,
            s.avg_divergence_depth,
            (s.model_expected_path_length - s.avg_divergence_depth).abs()
        );
    }
    out
}

/// Probability-basis statistic over the reference table's own columns,
/// using the model's probabilities for the theoretical side.
pub fn reference_chi_square(table: &reference::ReferenceTable) -> Result<f64, ReportError> {
    let dist = model::distribution(&ModelParams::new(table.size))?;
    let theoretical: Vec<f64> = table.rows.iter().map(|r| dist.probability(r.0)).collect();
    Ok(stats::chi_square_paper(&table.observed(), &theoretical)?)
}

fn chi_square_table(report: &ExperimentReport) -> Result<String, ReportError> {
    let mut out = String::from("# Chi-square goodness-of-fit results\n\n");
    out.push_str(
        "| Number of Addresses | Chi-square Statistic | p-value | Count-based Statistic | dof | Count-based p-value | Merged Bins |\n",
    );
    out.push_str("|---:|---:|---:|---:|---:|---:|---|\n");
    for s in &report.sizes {
        let rows = table_window(&s.model(), &s.histogram);
        let (obs, th): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.experimental_prob, r.theoretical_prob)).unzip();
        let (basis_stat, basis_p) = match stats::chi_square_paper_result(&obs, &th) {
            Ok(r) => (prob(r.statistic), prob(r.p_value)),
            Err(_) => ("N/A".to_string(), "N/A".to_string()),
        };
        let (count_stat, dof, count_p, merged) = match s.chi_square_counts.result() {
            Some(r) => (
                format!("{:.3}", r.statistic),
                r.dof.to_string(),
                prob(r.p_value),
                r.merged_bins.iter().map(|b| format!("{}-{}", b.first, b.last)).collect::<Vec<_>>().join(", "),
            ),
            None => ("N/A".into(), "N/A".into(), "N/A".into(), String::new()),
        };
        let _ = writeln!(
            out,
            "| {} | {basis_stat} | {basis_p} | {count_stat} | {dof} | {count_p} | {merged} |",
            group_thousands(s.size)
        );
    }
    out.push_str("\n## Probability-basis statistic on the reference columns\n\n");
    out.push_str("| Number of Addresses | Chi-square Statistic | p-value |\n|---:|---:|---:|\n");
    for table in reference::TABLES.iter().filter(|t| t.chi_square.is_some()) {
        let stat = reference_chi_square(table)?;
        let p = stats::p_value(stat, table.rows.len() - 1)?;
        let _ = writeln!(out, "| {} | {} | {} |", group_thousands(table.size), prob(stat), prob(p));
    }
    Ok(out)
}

/// Builds the six reference-style tables from a fresh experiment run.
pub fn reproduce_tables(cfg: &ExperimentConfig) -> Result<Vec<TableFile>, ReportError> {
    let report = run_experiment(cfg)?;
    tables_from_report(&report)
}

/// Expects the report to cover exactly the four reference sizes, in order.
pub fn tables_from_report(report: &ExperimentReport) -> Result<Vec<TableFile>, ReportError> {
    let mut files: Vec<TableFile> = report
        .sizes
        .iter()
        .zip(TABLE_FILE_NAMES)
        .map(|(s, name)| TableFile { name: name.to_string(), contents: distribution_table(s) })
        .collect();
    files.push(TableFile { name: TABLE_FILE_NAMES[4].into(), contents: averages_table(report) });
    files.push(TableFile { name: TABLE_FILE_NAMES[5].into(), contents: chi_square_table(report)? });
    Ok(files)
}

pub fn write_tables(dir: &Path, files: &[TableFile]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io { path: dir.to_path_buf(), source })?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            fs::write(&path, &f.contents).map_err(|source| ReportError::Io { path: path.clone(), source })?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ExperimentConfig;

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<OutputFormat>().unwrap(), OutputFormat::Markdown);
        assert_eq!("JSON".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("xml".parse::<OutputFormat>(), Err(UnknownFormat("xml".into())));
    }

    #[test]
    fn thousands() {
        assert_eq!(group_thousands(100), "100");
        assert_eq!(group_thousands(1000), "1,000");
        assert_eq!(group_thousands(300_000_000), "300,000,000");
    }

    #[test]
    fn empty_table_is_header_only() {
        let md = render_comparison_table(&[], OutputFormat::Markdown);
        assert_eq!(md.lines().count(), 2);
        let csv = render_comparison_table(&[], OutputFormat::Csv);
        assert_eq!(csv, format!("{DISTRIBUTION_CSV_HEADER}\n"));
        assert_eq!(render_comparison_table(&[], OutputFormat::Json).trim(), "[]");
    }

    #[test]
    fn model_table_for_100_matches_reference_list() {
        let md = model_query(100, 41, OutputFormat::Markdown).unwrap();
        let (_, expected) = reference::MODEL_VALUES[0];
        for (k, p) in expected {
            assert!(md.contains(&format!("| {k} | {p:.6} |")), "missing k={k}\n{md}");
        }
        assert!(md.contains("Expected path length: 2.328879"));
        assert!(md.contains("Mode: 2"));
    }

    #[test]
    fn model_query_small_n_has_caveat() {
        let md = model_query(1, 41, OutputFormat::Markdown).unwrap();
        assert!(md.contains("Note:"));
        assert!(md.contains("E[PL] / log16(n): n/a"));
        let s: ModelSummary = serde_json::from_str(&model_query(1, 41, OutputFormat::Json).unwrap()).unwrap();
        assert!(s.caveat.is_some());
        assert_eq!(s.asymptotic_ratio, None);
        assert!(model_query(0, 41, OutputFormat::Json).is_err());
    }

    #[test]
    fn model_query_csv() {
        let csv = model_query(1_000_000, 41, OutputFormat::Csv).unwrap();
        assert!(csv.contains("# mode=6"));
        assert!(csv.contains("# expected_path_length=5.649078"));
        assert!(csv.contains("6,0.536665\n"));
    }

    #[test]
    fn window_rows() {
        let model = model::distribution(&ModelParams::new(1000)).unwrap();
        let rows = table_window(&model, &PathLengthHistogram::new());
        let ks: Vec<u32> = rows.iter().map(|r| r.path_length).collect();
        assert_eq!(ks, vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn report_json_parses_back() {
        let cfg = ExperimentConfig { sizes: vec![30], trials: 2, ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        let text = render_report(&report, OutputFormat::Json, ReportView::Validation);
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let csv = render_report(&report, OutputFormat::Csv, ReportView::Validation);
        assert!(csv.starts_with("size,path_length,theoretical_prob"));
        let md = render_report(&report, OutputFormat::Markdown, ReportView::Summary);
        assert!(md.contains("## 30 addresses, 2 trials"));
    }
}
