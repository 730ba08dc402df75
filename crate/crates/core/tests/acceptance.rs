//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero on any unexpected result.
//!
//! Run with `cargo test -p ilp-core --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ilp_core::bench::{held_out_accuracy, BenchRecord};
use ilp_core::engine::least_model;
use ilp_core::logic::{captured, canonicalize};
use ilp_core::micro::{micro_task, MicroTask};
use ilp_core::oracle::{enumerate_all, enumerate_rules, oracle_optimal, OracleConfig};
use ilp_core::par::Execution;
use ilp_core::parse::{parse_hypothesis, parse_rules};
use ilp_core::pointless::{covers_same_negatives, find_all_pointless, find_pointless, is_indiscriminate, lint, Checks};
use ilp_core::search::{CostScore, LearnResult};
use ilp_core::task::render_hypothesis;
use ilp_core::{learn, Generator, Hypothesis, LearnConfig, PointlessKind, PointlessMode, Rule, Task};

/// Seeds of the random micro-task suite.
const MICRO_SEEDS: std::ops::Range<u64> = 0..50;

/// Minimum ratio of candidates generated without and with pointless
/// pruning on transitive-gt. Pinned from the first run (496 / 248).
const TRANSITIVE_GT_REDUCTION_FLOOR: f64 = 2.0;

/// Criteria that are known to fail. The harness still runs and reports
/// them, and flags them if they start passing.
const KNOWN_FAILURES: &[u32] = &[5];

type Outcome = Result<String, String>;
type Findings = BTreeSet<(PointlessKind, String)>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn micro_suite() -> Vec<MicroTask> {
    MICRO_SEEDS.map(micro_task).collect()
}

fn run(task: &Task, mode: PointlessMode) -> LearnResult {
    learn(task, &LearnConfig { pointless: mode, ..LearnConfig::default() })
}

fn c1_intro_optimality() -> Outcome {
    let start = Instant::now();
    let task = fixture("intro");
    let r = run(&task, PointlessMode::Both);
    let expected = CostScore { errors: 0, literals: 4 };
    if r.score != expected || r.best.as_ref().map(Hypothesis::size) != Some(4) {
        return Err(format!("learn returned {} ({:?})", r.score, r.best));
    }
    let oracle = oracle_optimal(&task, 4, &OracleConfig::default()).map_err(|e| e.to_string())?;
    if oracle.score != expected {
        return Err(format!("oracle optimum is {}", oracle.score));
    }
    let witness = parse_hypothesis("f(A) :- odd(A), gt(A,3), lt(A,8).").unwrap().canonical();
    if !oracle.witnesses.contains(&witness) {
        return Err(format!("witness missing from {} optima", oracle.witnesses.len()));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("(0, 4) learned and certified, {} optima, {elapsed:.2?}", oracle.witnesses.len()))
}

fn c2_oracle_equivalence(suite: &[MicroTask]) -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for mt in suite {
        let learned = learn(&mt.task, &LearnConfig { max_size: Some(mt.max_size), ..LearnConfig::default() });
        let oracle = oracle_optimal(&mt.task, mt.max_size, &OracleConfig::default())
            .map_err(|e| format!("seed {}: {e}", mt.seed))?;
        if learned.score != oracle.score {
            mismatches.push(format!("seed {}: learn {} oracle {}", mt.seed, learned.score, oracle.score));
        }
    }
    let elapsed = start.elapsed();
    if !mismatches.is_empty() {
        return Err(mismatches.join("; "));
    }
    if elapsed > Duration::from_secs(600) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{} tasks agree, {elapsed:.2?}", suite.len()))
}

fn c3_pruning_soundness(suite: &[MicroTask]) -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    let fixtures = FIXTURES.map(|name| (fixture(name), None));
    let micro = suite.iter().map(|mt| (mt.task.clone(), Some(mt.max_size)));
    for (task, max_size) in fixtures.into_iter().chain(micro) {
        let r = learn(&task, &LearnConfig { max_size, audit: true, ..LearnConfig::default() });
        checked += r.stats.audit_checked;
        violations.extend(r.audit_violations.iter().map(|v| format!("{}: {}", task.name, v.reason)));
    }
    if !violations.is_empty() {
        return Err(format!("{} violations, first: {}", violations.len(), violations[0]));
    }
    if checked == 0 {
        return Err("no pruned hypothesis was audited".into());
    }
    Ok(format!("{checked} pruned hypotheses force-tested, no violations"))
}

/// Every (rule, captured literal) pair over the bias of a micro task.
fn rule_literal_pairs(mt: &MicroTask) -> Vec<(Rule, ilp_core::Literal)> {
    let mut out = Vec::new();
    for size in 2..=mt.task.bias.max_rule_size() {
        for rule in enumerate_rules(&mt.task.bias, size, &OracleConfig::default()).unwrap() {
            for l in rule.body() {
                if captured(&rule, l) {
                    out.push((rule.clone(), l.clone()));
                }
            }
        }
    }
    out
}

fn c4_closure(suite: &[MicroTask]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut evidence, mut extensions) = (0usize, 0usize);
    let mut counterexamples = Vec::new();
    for mt in suite {
        let task = &mt.task;
        let universe = universe(&task.bias);
        let mut seen = BTreeSet::new();
        for size in 2..=task.bias.max_rule_size() {
            for rule in enumerate_rules(&task.bias, size, &OracleConfig::default()).unwrap() {
                let h = Hypothesis::new([rule]);
                for ev in find_all_pointless(&h, &task.bk, &task.neg, Checks::BOTH, Execution::Sequential) {
                    if !seen.insert((ev.rule.clone(), ev.literal.clone())) {
                        continue;
                    }
                    evidence += 1;
                    for _ in 0..20 {
                        let Some(bigger) = random_super_rule(&mut rng, &ev.rule, &task.bias, &universe) else {
                            break;
                        };
                        extensions += 1;
                        let found = find_pointless(&Hypothesis::new([bigger.clone()]), &task.bk, &task.neg, Checks::BOTH);
                        if found.is_none() {
                            counterexamples.push(format!("seed {}: {} ({} {})", mt.seed, bigger, ev.kind, ev.literal));
                        }
                    }
                }
            }
        }
    }
    if !counterexamples.is_empty() {
        return Err(format!("{} counterexamples, first: {}", counterexamples.len(), counterexamples[0]));
    }
    if extensions == 0 {
        return Err("no super-rule was sampled".into());
    }
    Ok(format!("{evidence} pointless rules, {extensions} super-rules all re-detected"))
}

fn c5_indiscriminate_formulations(suite: &[MicroTask]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairs, mut coverage_disagree, mut direct_disagree) = (0usize, 0usize, 0usize);
    let mut example = None;
    for mt in suite {
        let task = &mt.task;
        let all = rule_literal_pairs(mt);
        let sample: Vec<_> = if all.len() > 400 {
            (0..400).map(|_| all[rng.gen_range(0..all.len())].clone()).collect()
        } else {
            all
        };
        for (rule, l) in sample {
            pairs += 1;
            let direct = direct_indiscriminate(&task.bk, &task.neg, &rule, &l);
            if is_indiscriminate(&task.bk, &task.neg, &rule, &l) != direct {
                direct_disagree += 1;
            }
            if covers_same_negatives(&task.bk, &task.neg, &rule, &l) != direct {
                coverage_disagree += 1;
                example.get_or_insert_with(|| format!("seed {}: {} with {}", mt.seed, rule, l));
            }
        }
    }
    let summary = format!(
        "{pairs} pairs; coverage equality disagrees on {coverage_disagree}, per-negative implication on {direct_disagree}"
    );
    if coverage_disagree > 0 || direct_disagree > 0 {
        return Err(format!("{summary}; e.g. {}", example.unwrap_or_default()));
    }
    Ok(summary)
}

fn findings(task: &Task, file: &str) -> Findings {
    let path = fixture_dir().join("rules").join(file);
    let src = std::fs::read_to_string(&path).unwrap();
    let rules = parse_rules(file, &src).unwrap();
    lint(&Hypothesis::new(rules), &task.bk, &task.neg, task.bias.head, Execution::Sequential)
        .into_iter()
        .map(|ev| (ev.kind, ev.literal.to_string()))
        .collect()
}

fn c6_quoted_detections() -> Outcome {
    use PointlessKind::{Indiscriminate as I, Reducible as R};
    let intro = fixture("intro");
    let puzzle = fixture("eight-puzzle-mini");
    let transitive = fixture("transitive-gt");
    let expect = |kind, lit: &str| (kind, lit.to_string());
    let cases: Vec<(&Task, &str, Findings)> = vec![
        (&intro, "odd-int.pl", [expect(R, "int(A)")].into()),
        (&intro, "gt-chain.pl", [expect(R, "gt(A,C)")].into()),
        (&transitive, "gt-chain.pl", [expect(R, "gt(A,C)")].into()),
        (&intro, "lt-ten.pl", [expect(I, "lt(A,10)")].into()),
        (&puzzle, "role-index.pl", [expect(I, "role(B)"), expect(I, "index(C)")].into()),
        (&intro, "intro-target.pl", BTreeSet::new()),
        (&intro, "member.pl", BTreeSet::new()),
    ];
    let mut wrong = Vec::new();
    for (task, file, expected) in &cases {
        let got = findings(task, file);
        if &got != expected {
            wrong.push(format!("{} on {}: got {got:?}", file, task.name));
        }
    }
    let pos = findings(&puzzle, "pos-succ.pl");
    if !pos.contains(&expect(R, "pos2(D)")) {
        wrong.push(format!("pos-succ.pl: got {pos:?}"));
    }
    if wrong.is_empty() {
        Ok(format!("{} rule files flagged as expected", cases.len() + 1))
    } else {
        Err(wrong.join("; "))
    }
}

struct FixtureRuns {
    name: String,
    task: Task,
    runs: Vec<(PointlessMode, LearnResult)>,
}

impl FixtureRuns {
    fn get(&self, mode: PointlessMode) -> &LearnResult {
        &self.runs.iter().find(|(m, _)| *m == mode).unwrap().1
    }
}

fn fixture_runs() -> Vec<FixtureRuns> {
    FIXTURES
        .iter()
        .map(|name| {
            let task = fixture(name);
            let runs = PointlessMode::ALL.iter().map(|&m| (m, run(&task, m))).collect();
            FixtureRuns { name: name.to_string(), task, runs }
        })
        .collect()
}

fn c7_pruning_direction(all: &[FixtureRuns]) -> Outcome {
    let mut notes = Vec::new();
    let mut wrong = Vec::new();
    for f in all {
        let n = |m| f.get(m).stats.candidates_generated;
        let (both, red, ind, off) = (
            n(PointlessMode::Both),
            n(PointlessMode::ReducibleOnly),
            n(PointlessMode::IndiscriminateOnly),
            n(PointlessMode::Off),
        );
        if !(both <= red && red <= off && both <= ind && ind <= off) {
            wrong.push(format!("{}: both {both} reducible {red} indiscriminate {ind} off {off}", f.name));
        }
        let scores: BTreeSet<CostScore> = f.runs.iter().map(|(_, r)| r.score).collect();
        let accuracy: BTreeSet<u64> =
            f.runs.iter().map(|(_, r)| held_out_accuracy(&f.task, r.best.as_ref().unwrap()).to_bits()).collect();
        if scores.len() != 1 || accuracy.len() != 1 {
            wrong.push(format!("{}: scores {scores:?}, {} distinct accuracies", f.name, accuracy.len()));
        }
        notes.push(format!("{} {off}->{both}", f.name));
        if f.name == "transitive-gt" {
            let ratio = off as f64 / both as f64;
            if ratio < TRANSITIVE_GT_REDUCTION_FLOOR {
                wrong.push(format!("transitive-gt reduction {ratio:.2}x below {TRANSITIVE_GT_REDUCTION_FLOOR}x"));
            }
        }
    }
    if wrong.is_empty() {
        Ok(format!("candidates off->both: {}", notes.join(", ")))
    } else {
        Err(wrong.join("; "))
    }
}

fn c8_overhead(all: &[FixtureRuns]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut wrong = Vec::new();
    for f in all {
        for (mode, r) in &f.runs {
            let s = &r.stats;
            let expected = if s.time_total_s > 0.0 { s.time_detection_s / s.time_total_s } else { 0.0 };
            let record = BenchRecord::from_result(&f.task, *mode, 0, r);
            if s.detection_overhead() != expected || record.detection_overhead != expected {
                wrong.push(format!("{} {}: overhead is not detection/total", f.name, mode.name()));
            }
            if *mode == PointlessMode::Off && s.time_detection_s != 0.0 {
                wrong.push(format!("{}: detection time without detection", f.name));
            }
            if expected >= 0.5 {
                wrong.push(format!("{} {}: overhead {expected:.3}", f.name, mode.name()));
            }
            worst = worst.max(expected);
        }
    }
    if wrong.is_empty() {
        Ok(format!("largest overhead {worst:.3} over {} runs", all.len() * 4))
    } else {
        Err(wrong.join("; "))
    }
}

fn c9_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut wrong = Vec::new();
    for i in 0..100 {
        let program = random_program(&mut rng);
        let fast = least_model(&program).map_err(|e| e.to_string())?.to_set();
        if fast != naive_model(&program) {
            wrong.push(format!("program {i}: least models differ"));
        }
    }
    for i in 0..20 {
        let bias = random_bias(&mut rng);
        let mut generator = Generator::new(bias.clone());
        for size in 2..=bias.max_size().min(5) {
            let mut emitted = BTreeSet::new();
            while let Some(h) = generator.next_hypothesis(size) {
                emitted.insert(h);
            }
            let expected = enumerate_all(&bias, size, &OracleConfig::default()).map_err(|e| e.to_string())?;
            if emitted != expected {
                wrong.push(format!("bias {i} size {size}: {} generated, {} enumerated", emitted.len(), expected.len()));
            }
        }
    }
    for i in 0..100 {
        let h = random_hypothesis(&mut rng);
        let text = render_hypothesis(&h);
        match parse_hypothesis(&text) {
            Ok(back) if back.canonical() == h.canonical() => {}
            Ok(back) => wrong.push(format!("hypothesis {i}: {text:?} parsed as {back:?}")),
            Err(e) => wrong.push(format!("hypothesis {i}: {text:?}: {e}")),
        }
        for rule in h.rules() {
            if canonicalize(&canonicalize(rule)) != canonicalize(rule) {
                wrong.push(format!("hypothesis {i}: canonical form is not stable"));
            }
        }
    }
    if wrong.is_empty() {
        Ok("100 models, 20 biases and 100 round-trips agree".into())
    } else {
        Err(format!("{} discrepancies, first: {}", wrong.len(), wrong[0]))
    }
}

fn main() -> ExitCode {
    let suite = micro_suite();
    let runs = fixture_runs();
    let criteria: Vec<Criterion> = vec![
        (1, "intro task optimality", Box::new(c1_intro_optimality)),
        (2, "learner matches the exhaustive oracle", Box::new(|| c2_oracle_equivalence(&suite))),
        (3, "pruning soundness under audit", Box::new(|| c3_pruning_soundness(&suite))),
        (4, "pointless rules stay pointless when specialised", Box::new(|| c4_closure(&suite))),
        (5, "indiscriminate formulations agree", Box::new(|| c5_indiscriminate_formulations(&suite))),
        (6, "quoted detections", Box::new(c6_quoted_detections)),
        (7, "pruning direction and floor", Box::new(|| c7_pruning_direction(&runs))),
        (8, "detection overhead", Box::new(|| c8_overhead(&runs))),
        (9, "engine, generator and parser", Box::new(c9_engine)),
    ];
    let mut unexpected = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let known = KNOWN_FAILURES.contains(&id);
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let note = match (outcome.is_ok(), known) {
            (false, true) => " [known failure]",
            (true, true) => " [known failure now passes; update KNOWN_FAILURES]",
            _ => "",
        };
        println!("{tag} C{id} {title}: {detail}{note} ({:.1?})", start.elapsed());
        if outcome.is_ok() == known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected result(s)");
        ExitCode::FAILURE
    }
}
