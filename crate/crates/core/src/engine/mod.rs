//! Bottom-up evaluation of definite, function-free programs.
//!
//! [`least_model`] materializes the least Herbrand model with semi-naive
//! iteration. [`Background`] keeps the model of the background knowledge
//! around so that coverage, implication and satisfiability queries can be
//! answered against it without recomputation.

mod query;
mod store;

use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use query::{implies, implies_from, satisfiable, satisfying_substitutions};
pub(crate) use query::Query;
pub use store::{FactStore, Relation};

use crate::logic::{Hypothesis, Literal, Pred, Rule, Substitution, Term};
use crate::symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unsafe rule `{rule}`: head variable {var} does not occur in the body")]
    UnsafeRule { rule: String, var: String },
    #[error("example {example} does not match the head of `{rule}`")]
    HeadMismatch { rule: String, example: String },
}

/// A definite program: facts are rules with an empty body and a ground head.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Program {
        Program { rules: rules.into_iter().collect() }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn facts(&self) -> impl Iterator<Item = &Literal> {
        self.rules.iter().filter(|r| r.body().is_empty()).map(Rule::head)
    }

    pub fn push(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    pub fn check_safety(&self) -> Result<(), EngineError> {
        self.rules.iter().try_for_each(check_safe)
    }

    /// Constants mentioned anywhere in the program.
    pub fn constants(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.rules
            .iter()
            .flat_map(|r| std::iter::once(r.head()).chain(r.body()))
            .flat_map(|l| l.args.iter().filter_map(|t| t.as_const()))
    }
}

fn check_safe(rule: &Rule) -> Result<(), EngineError> {
    match rule.unsafe_var() {
        Some(var) => Err(EngineError::UnsafeRule { rule: rule.to_string(), var: var.to_string() }),
        None => Ok(()),
    }
}

/// Derives every head instance of `rule`, matching literal `i` of the body
/// against `source(i)`; new atoms (absent from `model`) go into `out`.
fn fire<'s>(rule: &Rule, query: &Query, source: &dyn Fn(usize) -> &'s FactStore, model: &FactStore, out: &mut FactStore) {
    let head = rule.head();
    let pred = head.pred_key();
    let slots: Vec<Result<usize, Symbol>> = head
        .args
        .iter()
        .map(|t| match *t {
            Term::Const(c) => Err(c),
            Term::Var(v) => Ok(query.slot(v).expect("safe rule")),
        })
        .collect();
    let mut binding = query.empty_binding();
    let _ = query.for_each(source, &mut binding, &mut |b| {
        let tuple: Box<[Symbol]> = slots
            .iter()
            .map(|s| match s {
                Ok(slot) => b[*slot].expect("complete binding"),
                Err(c) => *c,
            })
            .collect();
        if !model.contains_tuple(pred, &tuple) {
            out.insert_tuple(pred, tuple);
        }
        ControlFlow::Continue(())
    });
}

/// Semi-naive saturation of `model` under `rules`, given the atoms added
/// since `model` was last closed under them.
fn saturate(model: &mut FactStore, rules: &[(&Rule, Query)], mut delta: FactStore) {
    while !delta.is_empty() {
        let mut next = FactStore::new();
        for (rule, query) in rules {
            for (i, lit) in rule.body().iter().enumerate() {
                if delta.relation(lit.pred_key()).is_none_or(|r| r.is_empty()) {
                    continue;
                }
                let source = |j: usize| if j == i { &delta } else { &*model };
                fire(rule, query, &source, model, &mut next);
            }
        }
        model.extend(&next);
        delta = next;
    }
}

fn compile(rules: &[Rule]) -> Vec<(&Rule, Query)> {
    rules.iter().filter(|r| !r.body().is_empty()).map(|r| (r, Query::new(r.body()))).collect()
}

/// Least Herbrand model of a safe, function-free definite program.
pub fn least_model(program: &Program) -> Result<FactStore, EngineError> {
    program.check_safety()?;
    let mut model: FactStore = program.facts().cloned().collect();
    let rules = compile(program.rules());
    let mut delta = FactStore::new();
    for (rule, query) in &rules {
        fire(rule, query, &|_| &model, &model, &mut delta);
    }
    model.extend(&delta);
    saturate(&mut model, &rules, delta);
    Ok(model)
}

/// Least model of `base_rules ∪ extra`, given `base`, the least model of
/// `base_rules` alone.
pub fn extend_model(base: &FactStore, base_rules: &[Rule], extra: &[Rule]) -> Result<FactStore, EngineError> {
    extra.iter().try_for_each(check_safe)?;
    let mut model = base.clone();
    let mut delta = FactStore::new();
    for rule in extra {
        if rule.body().is_empty() {
            if !model.contains(rule.head()) {
                delta.insert(rule.head());
            }
        } else {
            fire(rule, &Query::new(rule.body()), &|_| &model, &model, &mut delta);
        }
    }
    model.extend(&delta);
    let mut all: Vec<Rule> = base_rules.to_vec();
    all.extend(extra.iter().cloned());
    let rules = compile(&all);
    saturate(&mut model, &rules, delta);
    Ok(model)
}

/// Background knowledge together with its materialized model and the
/// constant domain used for unbound variables.
#[derive(Clone, Debug)]
pub struct Background {
    program: Program,
    model: FactStore,
    domain: Vec<Symbol>,
}

impl Background {
    pub fn new(program: Program, domain: impl IntoIterator<Item = Symbol>) -> Result<Background, EngineError> {
        let model = least_model(&program)?;
        let mut domain: Vec<Symbol> = domain.into_iter().chain(program.constants()).collect();
        domain.sort();
        domain.dedup();
        Ok(Background { program, model, domain })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn model(&self) -> &FactStore {
        &self.model
    }

    pub fn domain(&self) -> &[Symbol] {
        &self.domain
    }

    /// Least model of the background knowledge together with `h`.
    pub fn model_with(&self, h: &Hypothesis) -> Result<FactStore, EngineError> {
        let rules: Vec<Rule> = self.program.rules().iter().filter(|r| !r.body().is_empty()).cloned().collect();
        extend_model(&self.model, &rules, h.rules())
    }

    pub fn implies(&self, body: &[Literal], literal: &Literal) -> bool {
        implies(&self.model, body, literal, &self.domain)
    }
}

/// Binding of `rule`'s head variables that makes its head equal to `example`.
/// `Ok(None)` when predicate and arity agree but the head cannot match.
pub fn head_binding(rule: &Rule, example: &Literal) -> Result<Option<Substitution>, EngineError> {
    if rule.head().pred_key() != example.pred_key() {
        return Err(EngineError::HeadMismatch { rule: rule.to_string(), example: example.to_string() });
    }
    Ok(Substitution::new().match_literal(rule.head(), example))
}

/// `example` follows from the background knowledge and the single rule,
/// evaluated against the background model. Head variables missing from the
/// body are bound by the example itself.
pub fn covers_rule(bk: &Background, rule: &Rule, example: &Literal) -> Result<bool, EngineError> {
    Ok(match head_binding(rule, example)? {
        Some(theta) => satisfiable(bk.model(), rule.body(), &theta),
        None => false,
    })
}

/// Which examples a hypothesis entails, as bitsets over example indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub pos: FixedBitSet,
    pub neg: FixedBitSet,
}

impl Coverage {
    pub fn none(num_pos: usize, num_neg: usize) -> Coverage {
        Coverage { pos: FixedBitSet::with_capacity(num_pos), neg: FixedBitSet::with_capacity(num_neg) }
    }

    pub fn tp(&self) -> usize {
        self.pos.count_ones(..)
    }

    pub fn fn_(&self) -> usize {
        self.pos.len() - self.tp()
    }

    pub fn fp(&self) -> usize {
        self.neg.count_ones(..)
    }

    pub fn tn(&self) -> usize {
        self.neg.len() - self.fp()
    }

    pub fn union_with(&mut self, other: &Coverage) {
        self.pos.union_with(&other.pos);
        self.neg.union_with(&other.neg);
    }

    pub fn covered<'a>(set: &'a FixedBitSet, examples: &'a [Literal]) -> impl Iterator<Item = &'a Literal> + 'a {
        set.ones().map(move |i| &examples[i])
    }
}

/// Classifies every example against the least model of `bk ∪ h`.
pub fn coverage(bk: &Background, h: &Hypothesis, pos: &[Literal], neg: &[Literal]) -> Result<Coverage, EngineError> {
    let model = bk.model_with(h)?;
    let mut cov = Coverage::none(pos.len(), neg.len());
    for (i, e) in pos.iter().enumerate() {
        cov.pos.set(i, model.contains(e));
    }
    for (i, e) in neg.iter().enumerate() {
        cov.neg.set(i, model.contains(e));
    }
    Ok(cov)
}

/// Coverage of a single non-recursive rule, one seeded query per example.
pub fn rule_coverage(bk: &Background, rule: &Rule, pos: &[Literal], neg: &[Literal]) -> Coverage {
    let query = Query::new(rule.body());
    let head = rule.head();
    let mut cov = Coverage::none(pos.len(), neg.len());
    let check = |e: &Literal| -> bool {
        if e.pred_key() != head.pred_key() {
            return false;
        }
        let Some(theta) = Substitution::new().match_literal(head, e) else {
            return false;
        };
        match query.seed(&theta) {
            Some(mut binding) => query.exists_in(bk.model(), &mut binding),
            None => false,
        }
    };
    for (i, e) in pos.iter().enumerate() {
        cov.pos.set(i, check(e));
    }
    for (i, e) in neg.iter().enumerate() {
        cov.neg.set(i, check(e));
    }
    cov
}

/// Predicates defined by rules (not only facts) in the program.
pub fn defined_preds(program: &Program) -> impl Iterator<Item = Pred> + '_ {
    program.rules().iter().filter(|r| !r.body().is_empty()).map(|r| r.head().pred_key())
}
