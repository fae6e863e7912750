//! Aggregation of finished runs: reads every `manifest.json` below a
//! directory with its `summary.csv`, never recomputes numerics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{num, write_csv, MANIFEST_SCHEMA};

pub const REPORT_SCHEMA: &str = "brox.report.v1";
const COLUMNS: [&str; 12] = [
    "command", "metric", "n", "m", "t", "count", "mean", "sd", "ci95", "median", "min", "max",
];

#[derive(Deserialize)]
struct ManifestHead {
    schema: String,
    command: String,
    passed: bool,
}

#[derive(Deserialize)]
struct SummaryRow {
    #[allow(dead_code)]
    seed: u64,
    n: u64,
    m: u64,
    t: String,
    metric: String,
    value: f64,
}

#[derive(Debug, Serialize)]
pub struct Group {
    pub command: String,
    pub metric: String,
    pub n: u64,
    pub m: u64,
    pub t: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    /// Half-width of the normal 95% interval of the mean.
    pub ci95: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub runs: Vec<RunEntry>,
    pub groups: Vec<Group>,
}

#[derive(Debug, Serialize)]
pub struct RunEntry {
    pub dir: String,
    pub command: String,
    pub passed: bool,
}

fn find_manifests(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Report(format!("{}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_manifests(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == "manifest.json") {
            out.push(p);
        }
    }
    Ok(())
}

pub fn aggregate(root: &Path) -> Result<Report, CliError> {
    let mut manifests = Vec::new();
    find_manifests(root, &mut manifests)?;
    if manifests.is_empty() {
        return Err(CliError::Report(format!(
            "no manifest.json found under {}; expected run directories written by brox subcommands",
            root.display()
        )));
    }
    let mut runs = Vec::new();
    let mut values: BTreeMap<(String, String, u64, u64, String), Vec<f64>> = BTreeMap::new();
    for path in manifests {
        let dir = path.parent().expect("file has a parent");
        let head: ManifestHead = serde_json::from_str(&std::fs::read_to_string(&path)?)
            .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
        if head.schema != MANIFEST_SCHEMA {
            return Err(CliError::Report(format!(
                "{}: unsupported schema {}",
                path.display(),
                head.schema
            )));
        }
        let summary = dir.join("summary.csv");
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(&summary)
            .map_err(|e| CliError::Report(format!("{}: {e}", summary.display())))?;
        for row in reader.deserialize() {
            let r: SummaryRow = row?;
            values
                .entry((head.command.clone(), r.metric, r.n, r.m, r.t))
                .or_default()
                .push(r.value);
        }
        let rel = dir.strip_prefix(root).unwrap_or(dir);
        runs.push(RunEntry {
            dir: rel.display().to_string(),
            command: head.command,
            passed: head.passed,
        });
    }
    let groups = values
        .into_iter()
        .map(|((command, metric, n, m, t), mut v)| {
            let count = v.len();
            let mean = v.iter().sum::<f64>() / count as f64;
            let sd = if count > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
            } else {
                0.0
            };
            v.sort_by(f64::total_cmp);
            let median = if count % 2 == 1 {
                v[count / 2]
            } else {
                0.5 * (v[count / 2 - 1] + v[count / 2])
            };
            Group {
                command,
                metric,
                n,
                m,
                t,
                count,
                mean,
                sd,
                ci95: 1.96 * sd / (count as f64).sqrt(),
                median,
                min: v[0],
                max: v[count - 1],
            }
        })
        .collect();
    Ok(Report {
        schema: REPORT_SCHEMA,
        runs,
        groups,
    })
}

pub fn write(report: &Report, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    let rows: Vec<Vec<String>> = report
        .groups
        .iter()
        .map(|g| {
            vec![
                g.command.clone(),
                g.metric.clone(),
                g.n.to_string(),
                g.m.to_string(),
                g.t.clone(),
                g.count.to_string(),
                num(g.mean),
                num(g.sd),
                num(g.ci95),
                num(g.median),
                num(g.min),
                num(g.max),
            ]
        })
        .collect();
    write_csv(&out.join("report.csv"), REPORT_SCHEMA, &COLUMNS, &rows)
}
