//! Benchmark harness: run every pointless-detection configuration on a
//! suite of task directories and emit one flat record per run.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::engine::coverage;
use crate::logic::{Hypothesis, Literal};
use crate::par::{self, Execution};
use crate::search::{learn, LearnConfig, LearnResult, PointlessMode, Termination};
use crate::task::{render_hypothesis, Task, BIAS_FILE};

/// Version of the record layouts below. Bump on any field change.
pub const SCHEMA_VERSION: u32 = 1;

/// Mean of the true-positive and true-negative rates. A rate whose
/// denominator is zero (no positives, or no negatives) counts as 1.
pub fn balanced_accuracy(tp: usize, fn_: usize, tn: usize, fp: usize) -> f64 {
    let rate = |hit: usize, miss: usize| if hit + miss == 0 { 1.0 } else { hit as f64 / (hit + miss) as f64 };
    0.5 * (rate(tp, fn_) + rate(tn, fp))
}

/// Balanced accuracy of `h` on the task's held-out examples, or on the
/// training examples when there are none.
pub fn held_out_accuracy(task: &Task, h: &Hypothesis) -> f64 {
    let (pos, neg): (&[Literal], &[Literal]) = if task.test_pos.is_empty() && task.test_neg.is_empty() {
        (&task.pos, &task.neg)
    } else {
        (&task.test_pos, &task.test_neg)
    };
    let cov = coverage(&task.bk, h, pos, neg).expect("learned hypotheses are safe");
    balanced_accuracy(cov.tp(), cov.fn_(), cov.tn(), cov.fp())
}

/// One learning run. Every numeric field is present in every record; a
/// failed run has `status` set to the error and zeros elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub schema_version: u32,
    pub task: String,
    pub config: String,
    pub repeat: u32,
    pub status: String,
    pub termination: String,
    pub errors: u64,
    pub literals: u64,
    pub balanced_accuracy: f64,
    pub time_total_s: f64,
    pub time_detection_s: f64,
    pub time_testing_s: f64,
    pub detection_overhead: f64,
    pub candidates_generated: u64,
    pub candidates_tested: u64,
    pub assembly_nodes: u64,
    pub constraints_specialisation: u64,
    pub constraints_generalisation: u64,
    pub constraints_pointless: u64,
    pub constraints_banish: u64,
    pub evidence_reducible: u64,
    pub evidence_indiscriminate: u64,
}

impl BenchRecord {
    pub fn from_result(task: &Task, mode: PointlessMode, repeat: u32, r: &LearnResult) -> BenchRecord {
        let s = &r.stats;
        let accuracy = r.best.as_ref().map(|h| held_out_accuracy(task, h)).unwrap_or(0.0);
        BenchRecord {
            schema_version: SCHEMA_VERSION,
            task: task.name.clone(),
            config: mode.name().to_string(),
            repeat,
            status: "ok".into(),
            termination: termination_name(r.termination).into(),
            errors: r.score.errors as u64,
            literals: r.score.literals as u64,
            balanced_accuracy: accuracy,
            time_total_s: s.time_total_s,
            time_detection_s: s.time_detection_s,
            time_testing_s: s.time_testing_s,
            detection_overhead: s.detection_overhead(),
            candidates_generated: s.candidates_generated,
            candidates_tested: s.candidates_tested,
            assembly_nodes: s.assembly_nodes,
            constraints_specialisation: s.constraints.specialisation,
            constraints_generalisation: s.constraints.generalisation,
            constraints_pointless: s.constraints.pointless,
            constraints_banish: s.constraints.banish,
            evidence_reducible: s.evidence.reducible,
            evidence_indiscriminate: s.evidence.indiscriminate,
        }
    }

    fn failed(task: &str, mode: PointlessMode, repeat: u32, error: String) -> BenchRecord {
        BenchRecord {
            schema_version: SCHEMA_VERSION,
            task: task.to_string(),
            config: mode.name().to_string(),
            repeat,
            status: error,
            termination: String::new(),
            ..BenchRecord::default()
        }
    }
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Exhausted => "exhausted",
        Termination::Timeout => "timeout",
        Termination::PerfectAtSize => "perfect-at-size",
    }
}

/// Machine-readable summary of a single `learn` run.
#[derive(Clone, Debug, Serialize)]
pub struct LearnReport {
    pub schema_version: u32,
    pub task: String,
    pub config: String,
    pub hypothesis: Option<String>,
    pub errors: usize,
    pub literals: usize,
    pub termination: String,
    pub detection_overhead: f64,
    pub stats: crate::search::Stats,
}

impl LearnReport {
    pub fn new(task: &Task, mode: PointlessMode, r: &LearnResult) -> LearnReport {
        LearnReport {
            schema_version: SCHEMA_VERSION,
            task: task.name.clone(),
            config: mode.name().to_string(),
            hypothesis: r.best.as_ref().map(render_hypothesis),
            errors: r.score.errors,
            literals: r.score.literals,
            termination: termination_name(r.termination).into(),
            detection_overhead: r.stats.detection_overhead(),
            stats: r.stats,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub repeats: u32,
    pub timeout: Option<Duration>,
    pub max_size: Option<usize>,
    pub modes: Vec<PointlessMode>,
    /// Scheduling of tasks across the suite; runs on one task stay sequential.
    pub exec: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repeats: 1,
            timeout: None,
            max_size: None,
            modes: PointlessMode::ALL.to_vec(),
            exec: Execution::Sequential,
        }
    }
}

/// Task directories under `suite`, sorted by name. A directory that is
/// itself a task counts as a one-task suite.
pub fn task_dirs(suite: &Path) -> std::io::Result<Vec<PathBuf>> {
    if suite.join(BIAS_FILE).exists() {
        return Ok(vec![suite.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(suite)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(BIAS_FILE).exists())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Runs every configuration `repeats` times on one task.
pub fn bench_task(task: &Task, config: &BenchConfig) -> Vec<BenchRecord> {
    let mut out = Vec::new();
    for &mode in &config.modes {
        for repeat in 0..config.repeats {
            let lc = LearnConfig {
                max_size: config.max_size,
                timeout: config.timeout,
                pointless: mode,
                exec: Execution::Sequential,
                ..LearnConfig::default()
            };
            out.push(BenchRecord::from_result(task, mode, repeat, &learn(task, &lc)));
        }
    }
    out
}

/// Runs the suite. Tasks that fail to load produce error records and do not
/// stop the run. Records are ordered by task, configuration and repeat.
pub fn run_suite(suite: &Path, config: &BenchConfig) -> std::io::Result<Vec<BenchRecord>> {
    let dirs = task_dirs(suite)?;
    let per_task = par::map(config.exec, &dirs, |dir| match Task::load(dir) {
        Ok(task) => bench_task(&task, config),
        Err(e) => {
            let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            config
                .modes
                .iter()
                .flat_map(|&m| (0..config.repeats).map(move |r| (m, r)))
                .map(|(m, r)| BenchRecord::failed(&name, m, r, e.to_string()))
                .collect()
        }
    });
    Ok(per_task.into_iter().flatten().collect())
}

pub fn write_csv(records: &[BenchRecord], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(records: &[BenchRecord], out: impl std::io::Write) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, records)
}
