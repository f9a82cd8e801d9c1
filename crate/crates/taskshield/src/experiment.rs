//! Grid runs over instances and plan-count variants, written as CSV.
//!
//! A suite file lists instance sources and variants:
//!
//! ```json
//! {
//!   "variants": [10, 100, "all"],
//!   "time_limit_s": 60,
//!   "refine": false,
//!   "benchgen": [
//!     {"domain": "synthetic8", "plans": 8, "min_len": 2, "max_len": 4, "share": 0.4, "instances": 10}
//!   ],
//!   "tasks": [
//!     {"domain": "workflow", "pddl": ["workflow/domain.pddl", "workflow/problem.pddl"]},
//!     {"domain": "toy", "json": "toy.json"}
//!   ]
//! }
//! ```
//!
//! Paths are relative to the suite file. Rows are computed in parallel but
//! always written in suite order.

use std::fmt;
use std::fs;
use std::io;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use taskshield_core::benchgen::{generate, BenchConfig};
use taskshield_core::ilp::CoreGuidedSolver;
use taskshield_core::shield::shield_with;
use taskshield_core::{EnumerationConfig, PlanningTask, ShieldConfig};

use crate::clock::Deadline;
use crate::json::parse_task_json;
use crate::pddl;

pub const DEFAULT_TIME_LIMIT_S: f64 = 1800.0;

pub const CSV_HEADER: [&str; 10] = [
    "domain",
    "instance",
    "variant",
    "solved",
    "time_total_s",
    "time_enum_s",
    "time_ilp_s",
    "time_verify_s",
    "num_mods",
    "success",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    TopK(NonZeroUsize),
    All,
}

impl Variant {
    pub fn enumeration(self) -> EnumerationConfig {
        match self {
            Variant::TopK(k) => EnumerationConfig::top_k(k),
            Variant::All => EnumerationConfig::all(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::TopK(k) => write!(f, "{k}"),
            Variant::All => f.write_str("all"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Variant::All);
        }
        s.parse::<NonZeroUsize>()
            .map(Variant::TopK)
            .map_err(|_| format!("expected \"all\" or a positive integer, got {s:?}"))
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Str(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(n) => n.to_string(),
            Raw::Str(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub domain: String,
    pub plans: usize,
    pub min_len: usize,
    pub max_len: usize,
    #[serde(default = "default_share")]
    pub share: f64,
    /// Explicit seeds; otherwise `instances` seeds from `first_seed` on.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default)]
    pub first_seed: u64,
}

fn default_share() -> f64 {
    0.4
}

fn default_instances() -> u64 {
    10
}

impl BenchSpec {
    fn seeds(&self) -> Vec<u64> {
        self.seeds
            .clone()
            .unwrap_or_else(|| (self.first_seed..self.first_seed + self.instances).collect())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub domain: String,
    #[serde(default)]
    pub instance: Option<String>,
    #[serde(default)]
    pub pddl: Option<(PathBuf, PathBuf)>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Shield with refinement; see `ShieldConfig::refine`.
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub benchgen: Vec<BenchSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("suite: {0}")]
    Suite(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl Suite {
    pub fn from_file(path: &Path) -> Result<(Suite, PathBuf), ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((serde_json::from_str(&text)?, base))
    }

    pub fn time_limit_s(&self) -> f64 {
        self.time_limit_s.unwrap_or(DEFAULT_TIME_LIMIT_S)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub domain: String,
    pub instance: String,
    pub variant: String,
    pub solved: bool,
    pub time_total_s: f64,
    pub time_enum_s: Option<f64>,
    pub time_ilp_s: Option<f64>,
    pub time_verify_s: Option<f64>,
    pub num_mods: Option<usize>,
    pub success: Option<u8>,
}

/// A loaded instance, or the reason it could not be loaded.
pub struct Instance {
    pub domain: String,
    pub instance: String,
    pub task: Result<PlanningTask, String>,
}

pub fn load_instances(suite: &Suite, base: &Path) -> Vec<Instance> {
    let mut out = Vec::new();
    for spec in &suite.benchgen {
        for seed in spec.seeds() {
            let mut config = BenchConfig::new(spec.plans, spec.min_len, spec.max_len, seed);
            config.share_fraction = spec.share;
            out.push(Instance {
                domain: spec.domain.clone(),
                instance: seed.to_string(),
                task: generate(&config).map(|g| g.task).map_err(|e| e.to_string()),
            });
        }
    }
    for spec in &suite.tasks {
        let read = |p: &Path| {
            fs::read_to_string(base.join(p)).map_err(|e| format!("{}: {e}", p.display()))
        };
        let (default_name, task) = match (&spec.pddl, &spec.json) {
            (Some((d, p)), None) => (
                p.file_stem(),
                read(d).and_then(|d| {
                    let p = read(p)?;
                    pddl::load(&d, &p, pddl::DEFAULT_GROUND_ACTION_CAP)
                        .map(|g| g.task)
                        .map_err(|e| e.to_string())
                }),
            ),
            (None, Some(j)) => (
                j.file_stem(),
                read(j).and_then(|t| parse_task_json(&t).map_err(|e| e.to_string())),
            ),
            _ => (
                None,
                Err("exactly one of \"pddl\" and \"json\" is required".to_string()),
            ),
        };
        let instance = spec.instance.clone().unwrap_or_else(|| {
            default_name
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        out.push(Instance {
            domain: spec.domain.clone(),
            instance,
            task,
        });
    }
    out
}

/// Shields one instance under one variant within `time_limit_s`.
pub fn run_row(
    domain: &str,
    instance: &str,
    task: &PlanningTask,
    variant: Variant,
    time_limit_s: f64,
    refine: bool,
) -> ExperimentRow {
    let clock = Deadline::from_secs(Some(time_limit_s));
    let config = ShieldConfig {
        refine,
        ..ShieldConfig::with_enumeration(variant.enumeration())
    };
    let solver = CoreGuidedSolver::default();
    let result = shield_with(task, &config, &solver, &clock);
    let mut row = ExperimentRow {
        domain: domain.to_string(),
        instance: instance.to_string(),
        variant: variant.to_string(),
        solved: false,
        time_total_s: clock.elapsed().as_secs_f64(),
        time_enum_s: None,
        time_ilp_s: None,
        time_verify_s: None,
        num_mods: None,
        success: None,
    };
    if let Ok(report) = result {
        row.solved = true;
        row.time_total_s = report.timings.total_s();
        row.time_enum_s = Some(report.timings.enumerate_s);
        row.time_ilp_s = Some(report.timings.ilp_s);
        row.time_verify_s = Some(report.timings.verify_s);
        row.num_mods = Some(report.num_mods());
        row.success = Some(u8::from(report.success));
    }
    row
}

fn failed_row(inst: &Instance, variant: Variant) -> ExperimentRow {
    ExperimentRow {
        domain: inst.domain.clone(),
        instance: inst.instance.clone(),
        variant: variant.to_string(),
        solved: false,
        time_total_s: 0.0,
        time_enum_s: None,
        time_ilp_s: None,
        time_verify_s: None,
        num_mods: None,
        success: None,
    }
}

/// Every instance under every variant, in suite order.
pub fn run_suite(suite: &Suite, base: &Path) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let instances = load_instances(suite, base);
    let jobs: Vec<(&Instance, Variant)> = instances
        .iter()
        .flat_map(|inst| suite.variants.iter().map(move |&v| (inst, v)))
        .collect();
    let limit = suite.time_limit_s();
    let run = || {
        jobs.par_iter()
            .map(|&(inst, v)| match &inst.task {
                Ok(task) => run_row(&inst.domain, &inst.instance, task, v, limit, suite.refine),
                Err(_) => failed_row(inst, v),
            })
            .collect()
    };
    match suite.threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(run)),
        None => Ok(run()),
    }
}

pub fn write_csv<W: io::Write>(rows: &[ExperimentRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, sd))
}

/// Aggregates of one (domain, variant) cell over its solved rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub domain: String,
    pub variant: String,
    pub instances: usize,
    pub solved: usize,
    pub time_mean_s: Option<f64>,
    pub time_sd_s: Option<f64>,
    pub mods_mean: Option<f64>,
    pub mods_sd: Option<f64>,
    pub success: usize,
}

/// One row per (domain, variant) in order of first appearance.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut cells: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let key = (r.domain.as_str(), r.variant.as_str());
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    cells
        .into_iter()
        .map(|(domain, variant)| {
            let cell: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.domain == domain && r.variant == variant)
                .collect();
            let solved: Vec<&&ExperimentRow> = cell.iter().filter(|r| r.solved).collect();
            let times: Vec<f64> = solved.iter().map(|r| r.time_total_s).collect();
            let mods: Vec<f64> = solved
                .iter()
                .filter_map(|r| r.num_mods)
                .map(|m| m as f64)
                .collect();
            let time = mean_sd(&times);
            let m = mean_sd(&mods);
            SummaryRow {
                domain: domain.to_string(),
                variant: variant.to_string(),
                instances: cell.len(),
                solved: solved.len(),
                time_mean_s: time.map(|t| t.0),
                time_sd_s: time.map(|t| t.1),
                mods_mean: m.map(|t| t.0),
                mods_sd: m.map(|t| t.1),
                success: solved.iter().filter(|r| r.success == Some(1)).count(),
            }
        })
        .collect()
}

pub fn write_summary<W: io::Write>(summary: &[SummaryRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in summary {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_parse_from_numbers_and_strings() {
        let v: Vec<Variant> = serde_json::from_str(r#"[10, "100", "all"]"#).unwrap();
        assert_eq!(v[0].to_string(), "10");
        assert_eq!(v[1].to_string(), "100");
        assert_eq!(v[2], Variant::All);
        assert!(serde_json::from_str::<Vec<Variant>>("[0]").is_err());
    }

    #[test]
    fn mean_and_sd() {
        assert_eq!(mean_sd(&[]), None);
        assert_eq!(mean_sd(&[3.0]), Some((3.0, 0.0)));
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(m, 5.0);
        assert!((s - 2.138_089_935).abs() < 1e-9);
    }

    #[test]
    fn csv_header_and_absent_fields() {
        let row = ExperimentRow {
            domain: "d".into(),
            instance: "0".into(),
            variant: "all".into(),
            solved: false,
            time_total_s: 1.5,
            time_enum_s: None,
            time_ilp_s: None,
            time_verify_s: None,
            num_mods: None,
            success: None,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "d,0,all,false,1.5,,,,,");
    }

    #[test]
    fn small_grid() {
        let suite: Suite = serde_json::from_str(
            r#"{"variants": [1, "all"], "time_limit_s": 30,
                "benchgen": [{"domain": "s4", "plans": 4, "min_len": 2, "max_len": 3, "instances": 3}]}"#,
        )
        .unwrap();
        let rows = run_suite(&suite, Path::new(".")).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows
            .iter()
            .filter(|r| r.variant == "all")
            .all(|r| r.solved && r.success == Some(1)));
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 2);
        assert_eq!(summary[1].success, 3);
    }
}
