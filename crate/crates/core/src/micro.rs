//! Seeded random tasks small enough for the exhaustive oracle. Each task
//! is labelled by a planted target hypothesis that lies inside its bias, so
//! a hypothesis without errors always exists.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{coverage, Program};
use crate::generator::Bias;
use crate::logic::{Hypothesis, Literal, Pred, Rule, Term};
use crate::oracle::{enumerate_rules, OracleConfig};
use crate::symbol::Symbol;
use crate::task::Task;

#[derive(Clone, Debug)]
pub struct MicroTask {
    pub task: Task,
    pub target: Hypothesis,
    pub max_size: usize,
    pub seed: u64,
}

const PRED_NAMES: [&str; 4] = ["p", "q", "r", "s"];

/// The task for `seed`. Same seed, same task.
pub fn micro_task(seed: u64) -> MicroTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(t) = attempt(&mut rng, seed) {
            return t;
        }
    }
}

fn attempt(rng: &mut ChaCha8Rng, seed: u64) -> Option<MicroTask> {
    let n_consts = rng.gen_range(4..=8);
    let consts: Vec<Symbol> = (1..=n_consts).map(|i| Symbol::intern(&i.to_string())).collect();
    let n_preds = rng.gen_range(1..=4);
    let preds: Vec<Pred> = PRED_NAMES[..n_preds].iter().map(|n| Pred::new(n, rng.gen_range(1..=2))).collect();

    let mut facts = Vec::new();
    for pred in &preds {
        let density: f64 = rng.gen_range(0.2..0.6);
        let tuples: Vec<Vec<Symbol>> = match pred.arity {
            1 => consts.iter().map(|c| vec![*c]).collect(),
            _ => consts.iter().flat_map(|a| consts.iter().map(move |b| vec![*a, *b])).collect(),
        };
        for t in tuples {
            if rng.gen_bool(density) {
                facts.push(Rule::fact(Literal::new(pred.name, t.into_iter().map(Term::Const).collect())));
            }
        }
    }

    let head_arity = if rng.gen_bool(0.3) { 2 } else { 1 };
    let mut bias = Bias::new(Pred::new("f", head_arity), preds.iter().copied());
    bias.max_vars = rng.gen_range(head_arity.max(2)..=3);
    bias.max_body = rng.gen_range(1..=3);
    bias.max_rules = rng.gen_range(1..=2);
    if let Some(binary) = preds.iter().find(|p| p.arity == 2) {
        if rng.gen_bool(0.3) {
            let mut allowed: Vec<Symbol> = consts.choose_multiple(rng, 2).copied().collect();
            allowed.sort();
            bias.constants.insert((*binary, 1), allowed);
        }
    }
    let max_size = bias.max_size().min(5);

    let config = OracleConfig::default();
    let mut rules = Vec::new();
    for size in 2..=max_size.min(bias.max_rule_size()) {
        rules.extend(enumerate_rules(&bias, size, &config).ok()?);
    }
    let first = rules.choose(rng)?.clone();
    let mut target = vec![first.clone()];
    if bias.max_rules > 1 && rng.gen_bool(0.5) {
        let room = max_size - first.size();
        let others: Vec<&Rule> = rules.iter().filter(|r| r.size() <= room && **r != first).collect();
        if let Some(second) = others.choose(rng) {
            target.push((*second).clone());
        }
    }
    let target = Hypothesis::new(target);

    let program = Program::new(facts);
    let atoms: Vec<Literal> = match head_arity {
        1 => consts.iter().map(|c| Literal::new(Symbol::intern("f"), vec![Term::Const(*c)])).collect(),
        _ => consts
            .iter()
            .flat_map(|a| consts.iter().map(move |b| Literal::new(Symbol::intern("f"), vec![Term::Const(*a), Term::Const(*b)])))
            .collect(),
    };
    let probe = Task::new("probe", program.clone(), atoms.clone(), Vec::new(), bias.clone()).ok()?;
    let cov = coverage(&probe.bk, &target, &atoms, &[]).ok()?;
    let (pos, neg): (Vec<_>, Vec<_>) = atoms.into_iter().enumerate().partition(|(i, _)| cov.pos.contains(*i));
    let pos: Vec<Literal> = pos.into_iter().map(|(_, a)| a).collect();
    let neg: Vec<Literal> = neg.into_iter().map(|(_, a)| a).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let task = Task::new(&format!("micro-{seed}"), program, pos, neg, bias).ok()?;
    Some(MicroTask { task, target, max_size, seed })
}
