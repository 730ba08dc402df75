//! Independent reference implementations and random generators shared by
//! the integration tests. Nothing here calls into the engine's query code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use ilp_core::FactStore;
use ilp_core::logic::{connected, var_name};
use ilp_core::symbol::Symbol;
use ilp_core::{Background, Bias, Hypothesis, Literal, Pred, Program, Rule, Task, Term};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

pub const FIXTURES: [&str; 4] = ["eight-puzzle-mini", "intro", "trains-mini", "transitive-gt"];

pub fn fixture(name: &str) -> Task {
    Task::load(&fixture_dir().join(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn sym(s: &str) -> Symbol {
    Symbol::intern(s)
}

fn rule_consts(rule: &Rule) -> impl Iterator<Item = Symbol> + '_ {
    std::iter::once(rule.head()).chain(rule.body()).flat_map(|l| l.args.iter().filter_map(|t| t.as_const()))
}

fn ground(l: &Literal, env: &BTreeMap<Symbol, Symbol>) -> Literal {
    let args = l
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => Term::Const(env[v]),
            c => *c,
        })
        .collect();
    Literal::new(l.pred, args)
}

/// Every assignment of `vars` to `domain`, extending `base`.
fn assignments(vars: &[Symbol], domain: &[Symbol], base: &BTreeMap<Symbol, Symbol>) -> Vec<BTreeMap<Symbol, Symbol>> {
    let free: Vec<Symbol> = vars.iter().copied().filter(|v| !base.contains_key(v)).collect();
    if free.is_empty() {
        return vec![base.clone()];
    }
    (0..free.len())
        .map(|_| domain.iter().copied())
        .multi_cartesian_product()
        .map(|values| {
            let mut env = base.clone();
            env.extend(free.iter().copied().zip(values));
            env
        })
        .collect()
}

/// Least model by naive iteration: ground every rule over every constant of
/// the program until nothing new is derived.
pub fn naive_model(program: &Program) -> BTreeSet<Literal> {
    let domain: Vec<Symbol> =
        program.rules().iter().flat_map(rule_consts).collect::<BTreeSet<_>>().into_iter().collect();
    let mut model: BTreeSet<Literal> = BTreeSet::new();
    loop {
        let mut next = model.clone();
        for rule in program.rules() {
            let vars: Vec<Symbol> = rule.vars().into_iter().collect();
            let empty = BTreeMap::new();
            for env in assignments(&vars, &domain, &empty) {
                if rule.body().iter().all(|l| model.contains(&ground(l, &env))) {
                    next.insert(ground(rule.head(), &env));
                }
            }
        }
        if next == model {
            return model;
        }
        model = next;
    }
}

/// Binds the head of `rule` to a ground example, or `None` when they clash.
fn head_env(rule: &Rule, example: &Literal) -> Option<BTreeMap<Symbol, Symbol>> {
    if rule.head().pred_key() != example.pred_key() {
        return None;
    }
    let mut env = BTreeMap::new();
    for (t, g) in rule.head().args.iter().zip(&example.args) {
        let g = g.as_const()?;
        match t {
            Term::Const(c) if *c != g => return None,
            Term::Const(_) => {}
            Term::Var(v) => {
                if *env.entry(*v).or_insert(g) != g {
                    return None;
                }
            }
        }
    }
    Some(env)
}

/// The indiscriminate test by brute force: for each negative, every
/// grounding over the domain that agrees with the negative on the head and
/// satisfies the rest of the body also satisfies `l`.
pub fn direct_indiscriminate(bk: &Background, neg: &[Literal], r: &Rule, l: &Literal) -> bool {
    let model = bk.model();
    let rest: Vec<&Literal> = r.body().iter().filter(|b| *b != l).collect();
    let vars: Vec<Symbol> = r.vars().into_iter().collect();
    neg.iter().all(|e| {
        let Some(base) = head_env(r, e) else { return true };
        assignments(&vars, bk.domain(), &base).iter().all(|env| {
            !rest.iter().all(|b| model.contains(&ground(b, env))) || model.contains(&ground(l, env))
        })
    })
}

/// Coverage of one example by one rule, by brute force.
pub fn direct_covers(bk: &Background, r: &Rule, e: &Literal) -> bool {
    let Some(base) = head_env(r, e) else { return false };
    let vars: Vec<Symbol> = r.vars().into_iter().collect();
    assignments(&vars, bk.domain(), &base).iter().any(|env| r.body().iter().all(|b| bk.model().contains(&ground(b, env))))
}

pub fn model_set(store: &FactStore) -> BTreeSet<Literal> {
    store.to_set()
}

fn consts(n: usize) -> Vec<Symbol> {
    (1..=n).map(|i| sym(&i.to_string())).collect()
}

fn random_literal(rng: &mut impl Rng, pred: Pred, terms: &[Term]) -> Literal {
    Literal::new(pred.name, (0..pred.arity).map(|_| *terms.choose(rng).unwrap()).collect())
}

/// A random safe program over a few constants: extensional `e/2` and `p/1`
/// facts plus up to three rules for `q/1`, `r/2` and `t/1`, recursion
/// allowed.
pub fn random_program(rng: &mut impl Rng) -> Program {
    let domain = consts(rng.gen_range(2..=4));
    let e = Pred::new("e", 2);
    let p = Pred::new("p", 1);
    let idb = [Pred::new("q", 1), Pred::new("r", 2), Pred::new("t", 1)];
    let mut rules = Vec::new();
    for a in &domain {
        if rng.gen_bool(0.5) {
            rules.push(Rule::fact(Literal::new(p.name, vec![Term::Const(*a)])));
        }
        for b in &domain {
            if rng.gen_bool(0.35) {
                rules.push(Rule::fact(Literal::new(e.name, vec![Term::Const(*a), Term::Const(*b)])));
            }
        }
    }
    let vars: Vec<Term> = (0..3).map(|i| Term::Var(var_name(i))).collect();
    let mut terms = vars.clone();
    terms.push(Term::Const(domain[0]));
    let body_preds = [e, p, idb[0], idb[1], idb[2]];
    let n_rules = rng.gen_range(1..=3);
    while rules.iter().filter(|r| !r.is_fact()).count() < n_rules {
        let head_pred = *idb.choose(rng).unwrap();
        let body: Vec<Literal> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let pred = *body_preds.choose(rng).unwrap();
                random_literal(rng, pred, &terms)
            })
            .collect();
        let body_vars: Vec<Term> = body.iter().flat_map(|l| l.vars()).map(Term::Var).collect();
        if body_vars.is_empty() {
            continue;
        }
        let head = random_literal(rng, head_pred, &body_vars);
        rules.push(Rule::new(head, body));
    }
    Program::new(rules)
}

/// A random bias small enough for exhaustive enumeration.
pub fn random_bias(rng: &mut impl Rng) -> Bias {
    let all = [Pred::new("p", 1), Pred::new("q", 2), Pred::new("r", 1), Pred::new("s", 2)];
    let n = rng.gen_range(1..=3);
    let body: Vec<Pred> = all.choose_multiple(rng, n).copied().collect();
    let head_arity = rng.gen_range(1..=2);
    let mut bias = Bias::new(Pred::new("f", head_arity), body.iter().copied());
    bias.max_vars = rng.gen_range(head_arity.max(2)..=3);
    bias.max_body = rng.gen_range(1..=3);
    bias.max_rules = rng.gen_range(1..=2);
    if rng.gen_bool(0.3) {
        let pred = *body.choose(rng).unwrap();
        bias.constants.insert((pred, rng.gen_range(0..pred.arity)), consts(2));
    }
    bias
}

/// Every body literal the bias admits, built without the generator.
pub fn universe(bias: &Bias) -> Vec<Literal> {
    let vars: Vec<Term> = (0..bias.max_vars).map(|i| Term::Var(var_name(i))).collect();
    let mut out = Vec::new();
    for pred in &bias.body {
        let columns: Vec<Vec<Term>> = (0..pred.arity)
            .map(|pos| {
                let mut c = vars.clone();
                c.extend(bias.constants.get(&(*pred, pos)).into_iter().flatten().map(|s| Term::Const(*s)));
                c
            })
            .collect();
        for args in columns.into_iter().multi_cartesian_product() {
            if args.iter().any(|t| t.is_var()) {
                out.push(Literal::new(pred.name, args));
            }
        }
    }
    out
}

/// A random connected super-rule of `rule` that stays inside the bias, or
/// `None` when the rule is already at the body limit or no extension was
/// found.
pub fn random_super_rule(rng: &mut impl Rng, rule: &Rule, bias: &Bias, universe: &[Literal]) -> Option<Rule> {
    let room = bias.max_body.checked_sub(rule.body().len()).filter(|r| *r > 0)?;
    for _ in 0..50 {
        let k = rng.gen_range(1..=room);
        let extra: Vec<Literal> =
            universe.choose_multiple(rng, k).filter(|l| !rule.contains(l)).cloned().collect();
        if extra.is_empty() {
            continue;
        }
        let bigger = rule.with(extra);
        if bigger.vars().len() <= bias.max_vars && connected(&bigger) {
            return Some(bigger);
        }
    }
    None
}

/// A random safe hypothesis over assorted predicates and constants.
pub fn random_hypothesis(rng: &mut impl Rng) -> Hypothesis {
    let preds = [Pred::new("p", 1), Pred::new("q", 2), Pred::new("edge", 2), Pred::new("w", 3), Pred::new("z", 0)];
    let terms: Vec<Term> = ["A", "B", "C", "D"]
        .iter()
        .map(|v| Term::var(v))
        .chain(["1", "42", "a", "bob"].iter().map(|c| Term::constant(c)))
        .collect();
    let head_pred = Pred::new("f", rng.gen_range(0..=2));
    let rules: Vec<Rule> = (0..rng.gen_range(1..=3))
        .map(|_| loop {
            let body: Vec<Literal> =
                (0..rng.gen_range(1..=4))
                    .map(|_| {
                        let pred = *preds.choose(rng).unwrap();
                        random_literal(rng, pred, &terms)
                    })
                    .collect();
            let mut usable: Vec<Term> = body.iter().flat_map(|l| l.vars()).map(Term::Var).collect();
            usable.push(Term::constant("a"));
            let head = random_literal(rng, head_pred, &usable);
            let rule = Rule::new(head, body);
            if rule.is_safe() {
                break rule;
            }
        })
        .collect();
    Hypothesis::new(rules)
}

/// `p` maps into `r` under some injective renaming of its variables, found
/// by trying every one.
pub fn embeds(p: &Rule, r: &Rule) -> bool {
    let pv: Vec<Symbol> = p.vars().into_iter().collect();
    let rv: Vec<Symbol> = r.vars().into_iter().collect();
    if pv.len() > rv.len() {
        return false;
    }
    rv.iter().copied().permutations(pv.len()).any(|image| {
        let env: BTreeMap<Symbol, Symbol> = pv.iter().copied().zip(image).collect();
        let rename = |l: &Literal| {
            let args = l.args.iter().map(|t| t.as_var().map_or(*t, |v| Term::Var(env[&v]))).collect();
            Literal::new(l.pred, args)
        };
        rename(p.head()) == *r.head() && p.body().iter().all(|l| r.contains(&rename(l)))
    })
}
