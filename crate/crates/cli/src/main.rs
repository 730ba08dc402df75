use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use ilp_core::bench::{self, BenchConfig, BenchRecord, LearnReport};
use ilp_core::oracle::{oracle_optimal, OracleConfig, DEFAULT_CEILING};
use ilp_core::par::Execution;
use ilp_core::parse::parse_rules;
use ilp_core::pointless::lint;
use ilp_core::search::{learn, LearnConfig, LearnResult, PointlessMode, Termination};
use ilp_core::task::{render_evidence, render_hypothesis, Task};
use ilp_core::Hypothesis;

const EXIT_USAGE: u8 = 2;
const EXIT_FINDINGS: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;
const EXIT_INVARIANT: u8 = 5;

#[derive(Parser)]
#[command(name = "ilp", version, about = "Learn logic programs from examples, pruning pointless rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pointless {
    On,
    Off,
    ReducibleOnly,
    IndiscriminateOnly,
}

impl Pointless {
    fn mode(self) -> PointlessMode {
        match self {
            Pointless::On => PointlessMode::Both,
            Pointless::Off => PointlessMode::Off,
            Pointless::ReducibleOnly => PointlessMode::ReducibleOnly,
            Pointless::IndiscriminateOnly => PointlessMode::IndiscriminateOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a hypothesis for a task directory.
    Learn {
        task: PathBuf,
        #[arg(long)]
        max_size: Option<usize>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, value_enum, default_value = "on")]
        pointless: Pointless,
        /// Add a constraint for every pointless literal found, not just the first.
        #[arg(long)]
        exhaustive: bool,
        /// Keep only constraints that stay sound when no perfect hypothesis exists.
        #[arg(long)]
        noisy: bool,
        /// Test every hypothesis a pointless constraint prunes and verify the pruning.
        #[arg(long)]
        audit: bool,
        /// Write a JSON report of the run.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write the run as a one-row CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Recorded in the report; the search itself is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report pointless literals in a rule file.
    Check { task: PathBuf, rules: PathBuf },
    /// Run all pointless configurations over a suite of task directories.
    Bench {
        suite: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, default_value_t = 1)]
        repeats: u32,
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        max_size: Option<usize>,
        /// Run tasks concurrently (timings then share the machine).
        #[arg(long)]
        parallel_tasks: bool,
    },
    /// Exhaustively compute the optimal score and all optimal hypotheses.
    Oracle {
        task: PathBuf,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CEILING)]
        ceiling: u64,
        /// Test candidates on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

/// A failure with its exit status.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut out = String::new();
    let result = match cli.command {
        Command::Learn { task, max_size, timeout, pointless, exhaustive, noisy, audit, stats, csv, seed } => {
            let config = LearnConfig {
                max_size,
                timeout: timeout.map(Duration::from_secs_f64),
                pointless: pointless.mode(),
                exhaustive_evidence: exhaustive,
                audit,
                noisy,
                exec: Execution::default(),
            };
            cmd_learn(&mut out, &task, &config, stats.as_deref(), csv.as_deref(), seed)
        }
        Command::Check { task, rules } => cmd_check(&mut out, &task, &rules),
        Command::Bench { suite, out, format, repeats, timeout, max_size, parallel_tasks } => {
            let config = BenchConfig {
                repeats,
                timeout: timeout.map(Duration::from_secs_f64),
                max_size,
                exec: if parallel_tasks { Execution::Parallel } else { Execution::Sequential },
                ..BenchConfig::default()
            };
            cmd_bench(&suite, &config, out.as_deref(), format)
        }
        Command::Oracle { task, max_size, ceiling, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            cmd_oracle(&mut out, &task, max_size, &OracleConfig { ceiling, exec })
        }
    };
    // A closed pipe downstream (`| head`) is not an error.
    let _ = io::stdout().lock().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_learn(
    out: &mut String,
    dir: &Path,
    config: &LearnConfig,
    stats: Option<&Path>,
    csv: Option<&Path>,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    let task = Task::load(dir)?;
    let result = learn(&task, config);
    if let Some(path) = stats {
        let mut report = serde_json::to_value(LearnReport::new(&task, config.pointless, &result))?;
        report["seed"] = serde_json::json!(seed);
        serde_json::to_writer_pretty(output(Some(path))?, &report)?;
    }
    if let Some(path) = csv {
        bench::write_csv(&[BenchRecord::from_result(&task, config.pointless, 0, &result)], output(Some(path))?)?;
    }
    report_learn(out, &result, config.audit)
}

/// Prints a learning result and picks the exit status.
fn report_learn(out: &mut String, result: &LearnResult, audit: bool) -> Result<u8, Failure> {
    let Some(best) = &result.best else {
        return Err(Failure(EXIT_TIMEOUT, "timed out before any hypothesis was tested".into()));
    };
    out.push_str(&render_hypothesis(best));
    writeln!(out, "% score: errors={} literals={}", result.score.errors, result.score.literals)?;
    writeln!(out, "% termination: {}", bench::termination_name(result.termination))?;
    writeln!(
        out,
        "% candidates: generated={} tested={}",
        result.stats.candidates_generated, result.stats.candidates_tested
    )?;
    if !result.audit_violations.is_empty() {
        for v in &result.audit_violations {
            eprintln!(
                "audit violation: {:?} {} vs reduced {:?} {}: {}",
                v.hypothesis, v.score, v.reduced, v.reduced_score, v.reason
            );
        }
        return Err(Failure(EXIT_INVARIANT, format!("{} audit violations", result.audit_violations.len())));
    }
    if audit {
        writeln!(out, "% audit: {} pruned hypotheses checked, no violations", result.stats.audit_checked)?;
    }
    if result.termination == Termination::Timeout {
        eprintln!("warning: timeout reached; the hypothesis is the best seen so far");
    }
    Ok(0)
}

fn cmd_check(out: &mut String, dir: &Path, rules_path: &Path) -> Result<u8, Failure> {
    let task = Task::load(dir)?;
    let src = std::fs::read_to_string(rules_path).map_err(|e| format!("{}: {e}", rules_path.display()))?;
    let rules = parse_rules(&rules_path.display().to_string(), &src)?;
    if let Some(r) = rules.iter().find(|r| !r.is_safe()) {
        return Err(Failure(EXIT_USAGE, format!("{}: unsafe rule `{r}`", rules_path.display())));
    }
    let findings = lint(&Hypothesis::new(rules), &task.bk, &task.neg, task.bias.head, Execution::default());
    for ev in &findings {
        writeln!(out, "{}", render_evidence(ev))?;
    }
    if findings.is_empty() {
        writeln!(out, "no pointless rules found")?;
        Ok(0)
    } else {
        Ok(EXIT_FINDINGS)
    }
}

fn cmd_bench(suite: &Path, config: &BenchConfig, out: Option<&Path>, format: Format) -> Result<u8, Failure> {
    let records = bench::run_suite(suite, config).map_err(|e| format!("{}: {e}", suite.display()))?;
    if records.is_empty() {
        return Err(Failure(EXIT_USAGE, format!("{}: no task directories found", suite.display())));
    }
    let w = output(out)?;
    match format {
        Format::Csv => bench::write_csv(&records, w)?,
        Format::Json => bench::write_json(&records, w)?,
    }
    for r in records.iter().filter(|r| r.status != "ok") {
        eprintln!("{} [{}]: {}", r.task, r.config, r.status);
    }
    Ok(0)
}

fn cmd_oracle(out: &mut String, dir: &Path, max_size: Option<usize>, config: &OracleConfig) -> Result<u8, Failure> {
    let task = Task::load(dir)?;
    let max_size = max_size.unwrap_or(task.bias.max_size());
    let result = oracle_optimal(&task, max_size, config)?;
    writeln!(out, "% optimum: errors={} literals={}", result.score.errors, result.score.literals)?;
    writeln!(out, "% hypotheses tested: {}", result.tested)?;
    writeln!(out, "% witnesses: {}", result.witnesses.len())?;
    for (i, h) in result.witnesses.iter().enumerate() {
        writeln!(out, "% witness {}", i + 1)?;
        out.push_str(&render_hypothesis(h));
    }
    Ok(0)
}
