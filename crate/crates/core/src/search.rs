//! The generate, test and constrain loop.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{coverage, rule_coverage, Coverage};
use crate::generator::{Constraint, ConstraintKind, Generator};
use crate::logic::{canonicalize, Hypothesis, Rule};
use crate::par::Execution;
use crate::pointless::{find_all_pointless, find_pointless, Checks, PointlessKind};
use crate::task::Task;

/// Lexicographic cost: misclassified examples first, then literal count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CostScore {
    pub errors: usize,
    pub literals: usize,
}

impl std::fmt::Display for CostScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.errors, self.literals)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointlessMode {
    Off,
    ReducibleOnly,
    IndiscriminateOnly,
    #[default]
    Both,
}

impl PointlessMode {
    pub const ALL: [PointlessMode; 4] =
        [PointlessMode::Off, PointlessMode::ReducibleOnly, PointlessMode::IndiscriminateOnly, PointlessMode::Both];

    pub fn checks(self) -> Checks {
        match self {
            PointlessMode::Off => Checks::NONE,
            PointlessMode::ReducibleOnly => Checks { reducible: true, indiscriminate: false },
            PointlessMode::IndiscriminateOnly => Checks { reducible: false, indiscriminate: true },
            PointlessMode::Both => Checks::BOTH,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointlessMode::Off => "off",
            PointlessMode::ReducibleOnly => "reducible-only",
            PointlessMode::IndiscriminateOnly => "indiscriminate-only",
            PointlessMode::Both => "both",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LearnConfig {
    /// Largest hypothesis size to consider; defaults to the bias maximum.
    pub max_size: Option<usize>,
    pub timeout: Option<Duration>,
    pub pointless: PointlessMode,
    /// Turn every pointless literal of a tested hypothesis into a
    /// constraint instead of only the first.
    pub exhaustive_evidence: bool,
    /// Test the hypotheses pointless constraints would prune and check
    /// that a reduced variant beats each of them.
    pub audit: bool,
    /// Drop the specialisation and generalisation constraints, which are
    /// only sound when some hypothesis classifies every example correctly.
    pub noisy: bool,
    pub exec: Execution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Exhausted,
    Timeout,
    PerfectAtSize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCounts {
    pub specialisation: u64,
    pub generalisation: u64,
    pub pointless: u64,
    pub banish: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceCounts {
    pub reducible: u64,
    pub indiscriminate: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub candidates_generated: u64,
    pub candidates_tested: u64,
    pub assembly_nodes: u64,
    pub assembly_pruned: u64,
    pub rules_assembled: u64,
    pub constraints: ConstraintCounts,
    pub evidence: EvidenceCounts,
    pub time_total_s: f64,
    pub time_detection_s: f64,
    pub time_testing_s: f64,
    pub audit_checked: u64,
    pub audit_violations: u64,
}

impl Stats {
    /// Share of the total wall time spent looking for pointless rules.
    pub fn detection_overhead(&self) -> f64 {
        if self.time_total_s > 0.0 {
            self.time_detection_s / self.time_total_s
        } else {
            0.0
        }
    }
}

/// A pointless-pruned hypothesis that failed an audit check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub hypothesis: Hypothesis,
    pub score: CostScore,
    pub reduced: Hypothesis,
    pub reduced_score: CostScore,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    /// `None` only when the timeout hit before any hypothesis was tested.
    pub best: Option<Hypothesis>,
    pub score: CostScore,
    pub termination: Termination,
    pub stats: Stats,
    pub audit_violations: Vec<AuditViolation>,
}

/// Coverage of hypotheses against a task's training examples. Rules of
/// non-recursive hypotheses are tested one at a time and cached.
pub struct Tester<'a> {
    task: &'a Task,
    separable: bool,
    cache: HashMap<Rule, Coverage>,
}

impl<'a> Tester<'a> {
    pub fn new(task: &'a Task) -> Tester<'a> {
        let head = task.bias.head;
        let bk_uses_head = task.bk.model().relation(head).is_some_and(|r| !r.is_empty())
            || task.bk.program().rules().iter().any(|r| r.body().iter().any(|l| l.pred_key() == head));
        Tester { task, separable: !bk_uses_head, cache: HashMap::new() }
    }

    pub fn coverage(&mut self, h: &Hypothesis) -> Coverage {
        let task = self.task;
        if !self.separable || h.is_recursive() {
            return coverage(&task.bk, h, &task.pos, &task.neg).expect("generated rules are safe");
        }
        let mut total = Coverage::none(task.pos.len(), task.neg.len());
        for rule in h.rules() {
            let cov = self.cache.entry(rule.clone()).or_insert_with(|| rule_coverage(&task.bk, rule, &task.pos, &task.neg));
            total.union_with(cov);
        }
        total
    }

    pub fn score(&mut self, h: &Hypothesis) -> CostScore {
        cost(&self.coverage(h), h)
    }
}

fn cost(cov: &Coverage, h: &Hypothesis) -> CostScore {
    CostScore { errors: cov.fn_() + cov.fp(), literals: h.size() }
}

/// Cost of `h` on the task's training examples.
pub fn score(h: &Hypothesis, task: &Task) -> CostScore {
    let cov = coverage(&task.bk, h, &task.pos, &task.neg).expect("safe hypothesis");
    cost(&cov, h)
}

/// Constraints learned from testing `h`: always a ban on `h` itself, plus
/// failure constraints unless `noisy`.
pub fn build_cons(h: &Hypothesis, cov: &Coverage, noisy: bool) -> Vec<Constraint> {
    let mut out = vec![Constraint::Banish(h.clone())];
    if !noisy {
        if cov.fn_() > 0 {
            out.push(Constraint::Specialisation(h.clone()));
        }
        if cov.fp() > 0 {
            out.push(Constraint::Generalisation(h.clone()));
        }
    }
    out
}

fn count(counts: &mut ConstraintCounts, kind: ConstraintKind) {
    match kind {
        ConstraintKind::Specialisation => counts.specialisation += 1,
        ConstraintKind::Generalisation => counts.generalisation += 1,
        ConstraintKind::PointlessSuperRule => counts.pointless += 1,
        ConstraintKind::Banish => counts.banish += 1,
    }
}

/// Searches hypotheses by increasing size and returns the cheapest one
/// found. Stops early at the first hypothesis without errors.
pub fn learn(task: &Task, config: &LearnConfig) -> LearnResult {
    let start = Instant::now();
    let max_size = config.max_size.unwrap_or(usize::MAX).min(task.bias.max_size());
    let checks = config.pointless.checks();
    let mut generator = Generator::with_audit(task.bias.clone(), config.audit);
    let mut tester = Tester::new(task);
    let mut stats = Stats::default();
    let mut detection = Duration::ZERO;
    let mut testing = Duration::ZERO;
    let mut best = Hypothesis::empty();
    let mut best_score = CostScore { errors: task.pos.len(), literals: 0 };
    let mut termination = Termination::Exhausted;
    let mut audited: Vec<(Hypothesis, CostScore, Hypothesis, CostScore)> = Vec::new();
    let mut violations = Vec::new();

    'sizes: for size in 2..=max_size {
        loop {
            if config.timeout.is_some_and(|t| start.elapsed() >= t) {
                termination = Termination::Timeout;
                break 'sizes;
            }
            let Some(candidate) = generator.next_candidate(size) else {
                log::debug!("size {size} exhausted after {} candidates", stats.candidates_generated);
                break;
            };
            let h = candidate.hypothesis;
            if let Some(hit) = candidate.pointless {
                let reduced = h.replacing(&hit.rule, canonicalize(&hit.reduced));
                let (s1, s3) = (tester.score(&h), tester.score(&reduced));
                stats.audit_checked += 1;
                if s3 >= s1 {
                    violations.push(AuditViolation {
                        hypothesis: h.clone(),
                        score: s1,
                        reduced: reduced.clone(),
                        reduced_score: s3,
                        reason: "reduced variant is not cheaper".into(),
                    });
                }
                audited.push((h, s1, reduced, s3));
                continue;
            }
            stats.candidates_generated += 1;

            let t0 = Instant::now();
            let cov = tester.coverage(&h);
            testing += t0.elapsed();
            stats.candidates_tested += 1;
            let s = cost(&cov, &h);
            if s < best_score {
                log::debug!("new best {s} at candidate {}", stats.candidates_tested);
                best = h.clone();
                best_score = s;
            }
            if s.errors == 0 {
                termination = Termination::PerfectAtSize;
                break 'sizes;
            }
            for c in build_cons(&h, &cov, config.noisy) {
                let kind = c.kind();
                if generator.add_constraint(c) {
                    count(&mut stats.constraints, kind);
                }
            }
            if checks.any() {
                let t0 = Instant::now();
                let found = if config.exhaustive_evidence {
                    find_all_pointless(&h, &task.bk, &task.neg, checks, config.exec)
                } else {
                    find_pointless(&h, &task.bk, &task.neg, checks).into_iter().collect()
                };
                detection += t0.elapsed();
                for ev in found {
                    match ev.kind {
                        PointlessKind::Reducible => stats.evidence.reducible += 1,
                        PointlessKind::Indiscriminate => stats.evidence.indiscriminate += 1,
                    }
                    if generator.add_constraint(Constraint::PointlessSuperRule { rule: ev.rule, literal: ev.literal }) {
                        stats.constraints.pointless += 1;
                    }
                }
            }
        }
    }

    for (h, s1, reduced, s3) in audited {
        if s1 < best_score {
            violations.push(AuditViolation {
                hypothesis: h,
                score: s1,
                reduced,
                reduced_score: s3,
                reason: format!("pruned hypothesis beats the returned optimum {best_score}"),
            });
        }
    }
    stats.audit_violations = violations.len() as u64;
    let g = generator.stats();
    stats.assembly_nodes = g.assembly_nodes;
    stats.assembly_pruned = g.assembly_pruned;
    stats.rules_assembled = g.rules;
    stats.time_detection_s = detection.as_secs_f64();
    stats.time_testing_s = testing.as_secs_f64();
    stats.time_total_s = start.elapsed().as_secs_f64();
    let best = if termination == Termination::Timeout && stats.candidates_tested == 0 { None } else { Some(best) };
    LearnResult { best, score: best_score, termination, stats, audit_violations: violations }
}
