//! Conjunctive query evaluation over a [`FactStore`] by backtracking join.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use super::store::FactStore;
use crate::logic::{Literal, Pred, Substitution, Term};
use crate::symbol::Symbol;

/// An argument position and the value it is looked up by.
type IndexKey = (usize, Symbol);

#[derive(Clone, Copy, Debug)]
enum Slot {
    Var(usize),
    Const(Symbol),
}

#[derive(Clone, Debug)]
struct QueryLiteral {
    pred: Pred,
    args: Vec<Slot>,
}

/// A conjunction of literals compiled to variable slots.
#[derive(Clone, Debug)]
pub(crate) struct Query {
    vars: Vec<Symbol>,
    literals: Vec<QueryLiteral>,
}

impl Query {
    pub fn new<'a>(body: impl IntoIterator<Item = &'a Literal>) -> Query {
        let mut vars: Vec<Symbol> = Vec::new();
        let mut literals = Vec::new();
        for lit in body {
            let args = lit
                .args
                .iter()
                .map(|t| match *t {
                    Term::Const(c) => Slot::Const(c),
                    Term::Var(v) => {
                        let slot = vars.iter().position(|x| *x == v).unwrap_or_else(|| {
                            vars.push(v);
                            vars.len() - 1
                        });
                        Slot::Var(slot)
                    }
                })
                .collect();
            literals.push(QueryLiteral { pred: lit.pred_key(), args });
        }
        Query { vars, literals }
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn slot(&self, var: Symbol) -> Option<usize> {
        self.vars.iter().position(|v| *v == var)
    }

    pub fn empty_binding(&self) -> Vec<Option<Symbol>> {
        vec![None; self.vars.len()]
    }

    /// Binding vector seeded from a substitution. Returns `None` when the
    /// seed maps a query variable to a non-ground term.
    pub fn seed(&self, seed: &Substitution) -> Option<Vec<Option<Symbol>>> {
        let mut binding = self.empty_binding();
        for (slot, var) in self.vars.iter().enumerate() {
            match seed.get(*var) {
                Some(Term::Const(c)) => binding[slot] = Some(c),
                Some(Term::Var(_)) => return None,
                None => {}
            }
        }
        Some(binding)
    }

    /// Visits every extension of `binding` that satisfies all literals.
    /// `source(i)` gives the store literal `i` is matched against.
    pub fn for_each<'s>(
        &self,
        source: &dyn Fn(usize) -> &'s FactStore,
        binding: &mut [Option<Symbol>],
        visit: &mut dyn FnMut(&[Option<Symbol>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut done = vec![false; self.literals.len()];
        self.search(source, binding, &mut done, self.literals.len(), visit)
    }

    pub fn for_each_in(
        &self,
        store: &FactStore,
        binding: &mut [Option<Symbol>],
        visit: &mut dyn FnMut(&[Option<Symbol>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        self.for_each(&|_| store, binding, visit)
    }

    pub fn exists_in(&self, store: &FactStore, binding: &mut [Option<Symbol>]) -> bool {
        self.for_each_in(store, binding, &mut |_| ControlFlow::Break(())).is_break()
    }

    fn search<'s>(
        &self,
        source: &dyn Fn(usize) -> &'s FactStore,
        binding: &mut [Option<Symbol>],
        done: &mut [bool],
        remaining: usize,
        visit: &mut dyn FnMut(&[Option<Symbol>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if remaining == 0 {
            return visit(binding);
        }
        // Pick the pending literal with the fewest candidate rows.
        let mut best: Option<(usize, usize, Option<IndexKey>)> = None;
        for (i, lit) in self.literals.iter().enumerate() {
            if done[i] {
                continue;
            }
            let Some(rel) = source(i).relation(lit.pred) else {
                return ControlFlow::Continue(());
            };
            let mut estimate = (rel.len(), None);
            for (pos, slot) in lit.args.iter().enumerate() {
                let value = match *slot {
                    Slot::Const(c) => Some(c),
                    Slot::Var(v) => binding[v],
                };
                if let Some(value) = value {
                    let n = rel.lookup(pos, value).len();
                    if n < estimate.0 || estimate.1.is_none() {
                        estimate = (n, Some((pos, value)));
                    }
                }
            }
            if estimate.0 == 0 {
                return ControlFlow::Continue(());
            }
            if best.is_none_or(|(_, n, _)| estimate.0 < n) {
                best = Some((i, estimate.0, estimate.1));
            }
        }
        let (chosen, _, key) = best.expect("a pending literal");
        let lit = &self.literals[chosen];
        let rel = source(chosen).relation(lit.pred).expect("checked above");
        done[chosen] = true;
        let mut bound_here: Vec<usize> = Vec::with_capacity(lit.args.len());
        let mut try_row = |row: &[Symbol], binding: &mut [Option<Symbol>], done: &mut [bool]| -> ControlFlow<()> {
            bound_here.clear();
            let mut ok = true;
            for (slot, value) in lit.args.iter().zip(row) {
                match *slot {
                    Slot::Const(c) => {
                        if c != *value {
                            ok = false;
                            break;
                        }
                    }
                    Slot::Var(v) => match binding[v] {
                        Some(b) if b != *value => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            binding[v] = Some(*value);
                            bound_here.push(v);
                        }
                    },
                }
            }
            let flow = if ok { self.search(source, binding, done, remaining - 1, visit) } else { ControlFlow::Continue(()) };
            for v in bound_here.drain(..) {
                binding[v] = None;
            }
            flow
        };
        let flow = match key {
            Some((pos, value)) => {
                let mut flow = ControlFlow::Continue(());
                for &id in rel.lookup(pos, value) {
                    flow = try_row(rel.row(id), binding, done);
                    if flow.is_break() {
                        break;
                    }
                }
                flow
            }
            None => {
                let mut flow = ControlFlow::Continue(());
                for row in rel.rows() {
                    flow = try_row(row, binding, done);
                    if flow.is_break() {
                        break;
                    }
                }
                flow
            }
        };
        done[chosen] = false;
        flow
    }
}

/// All substitutions extending `seed` that ground `body` inside `store`.
/// An empty body yields `{seed}`.
pub fn satisfying_substitutions(store: &FactStore, body: &[Literal], seed: &Substitution) -> BTreeSet<Substitution> {
    let query = Query::new(body);
    let mut out = BTreeSet::new();
    let Some(mut binding) = query.seed(seed) else {
        return out;
    };
    let _ = query.for_each_in(store, &mut binding, &mut |b| {
        let mut theta = seed.clone();
        for (slot, value) in b.iter().enumerate() {
            theta.bind(query.vars()[slot], Term::Const(value.expect("complete binding")));
        }
        out.insert(theta);
        ControlFlow::Continue(())
    });
    out
}

/// True when `body` has at least one solution extending `seed`.
pub fn satisfiable(store: &FactStore, body: &[Literal], seed: &Substitution) -> bool {
    let query = Query::new(body);
    match query.seed(seed) {
        Some(mut binding) => query.exists_in(store, &mut binding),
        None => false,
    }
}

/// No grounding satisfies `body` inside `store` while falsifying `literal`.
/// Variables of `literal` that the body leaves unbound range over `domain`.
/// Vacuously true when the body is unsatisfiable.
pub fn implies(store: &FactStore, body: &[Literal], literal: &Literal, domain: &[Symbol]) -> bool {
    implies_from(store, body, literal, &Substitution::new(), domain)
}

/// [`implies`] restricted to groundings that extend `seed`.
pub fn implies_from(store: &FactStore, body: &[Literal], literal: &Literal, seed: &Substitution, domain: &[Symbol]) -> bool {
    let query = Query::new(body);
    let literal = literal.apply(seed);
    let Some(mut binding) = query.seed(seed) else {
        return true;
    };
    let mut residual: Vec<Symbol> = Vec::new();
    for v in literal.vars() {
        if query.slot(v).is_none() && !residual.contains(&v) {
            residual.push(v);
        }
    }
    let pred = literal.pred_key();
    let mut tuple: Vec<Symbol> = Vec::with_capacity(literal.arity());
    let mut falsified = |binding: &[Option<Symbol>], extra: &[Symbol]| -> bool {
        tuple.clear();
        for t in &literal.args {
            let value = match *t {
                Term::Const(c) => c,
                Term::Var(v) => match query.slot(v) {
                    Some(slot) => binding[slot].expect("complete binding"),
                    None => extra[residual.iter().position(|r| *r == v).expect("residual variable")],
                },
            };
            tuple.push(value);
        }
        !store.contains_tuple(pred, &tuple)
    };
    let flow = query.for_each_in(store, &mut binding, &mut |b| {
        if residual.is_empty() {
            return if falsified(b, &[]) { ControlFlow::Break(()) } else { ControlFlow::Continue(()) };
        }
        if domain.is_empty() {
            return ControlFlow::Continue(());
        }
        let mut counters = vec![0usize; residual.len()];
        let mut extra: Vec<Symbol> = vec![domain[0]; residual.len()];
        loop {
            for (k, c) in counters.iter().enumerate() {
                extra[k] = domain[*c];
            }
            if falsified(b, &extra) {
                return ControlFlow::Break(());
            }
            let mut k = 0;
            loop {
                if k == counters.len() {
                    return ControlFlow::Continue(());
                }
                counters[k] += 1;
                if counters[k] < domain.len() {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
        }
    });
    flow.is_continue()
}
