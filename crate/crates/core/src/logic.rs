//! Function-free terms, literals, rules and hypotheses, and the structural
//! relations between them (subrule, sub-hypothesis, basic, captured,
//! connected, canonical form, renamed subrule).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;

use itertools::Itertools;

use crate::symbol::Symbol;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::intern(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Symbol::intern(name))
    }

    pub fn is_var(self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(self) -> Option<Symbol> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(self) -> Option<Symbol> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }

    pub fn symbol(self) -> Symbol {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => {
                let text = c.as_str();
                let plain = c.as_number().is_some()
                    || (text.starts_with(|ch: char| ch.is_lowercase())
                        && text.chars().all(|ch| ch.is_alphanumeric() || ch == '_'));
                if plain {
                    f.write_str(text)
                } else {
                    write!(f, "'{text}'")
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Predicate identity: name plus arity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Pred {
    pub name: Symbol,
    pub arity: usize,
}

impl Pred {
    pub fn new(name: &str, arity: usize) -> Pred {
        Pred { name: Symbol::intern(name), arity }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: Symbol, args: Vec<Term>) -> Literal {
        Literal { pred, args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn pred_key(&self) -> Pred {
        Pred { name: self.pred, arity: self.args.len() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.args.iter().filter_map(|t| t.as_var())
    }

    pub fn apply(&self, subst: &Substitution) -> Literal {
        Literal {
            pred: self.pred,
            args: self.args.iter().map(|t| subst.apply_term(*t)).collect(),
        }
    }

    fn rename(&self, f: impl Fn(Symbol) -> Symbol) -> Literal {
        Literal {
            pred: self.pred,
            args: self
                .args
                .iter()
                .map(|t| match *t {
                    Term::Var(v) => Term::Var(f(v)),
                    c => c,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.iter().join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A definite clause. The body is kept sorted and duplicate-free, so two
/// rules with the same head and the same body set compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    head: Literal,
    body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Literal, body: impl IntoIterator<Item = Literal>) -> Rule {
        let mut body: Vec<Literal> = body.into_iter().collect();
        body.sort();
        body.dedup();
        Rule { head, body }
    }

    pub fn fact(head: Literal) -> Rule {
        Rule { head, body: Vec::new() }
    }

    pub fn head(&self) -> &Literal {
        &self.head
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    /// Number of literals, head included.
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty() && self.head.is_ground()
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        self.head.vars().chain(self.body.iter().flat_map(|l| l.vars())).collect()
    }

    pub fn head_vars(&self) -> BTreeSet<Symbol> {
        self.head.vars().collect()
    }

    pub fn body_vars(&self) -> BTreeSet<Symbol> {
        self.body.iter().flat_map(|l| l.vars()).collect()
    }

    /// First head variable that does not occur in the body, if any.
    pub fn unsafe_var(&self) -> Option<Symbol> {
        let body = self.body_vars();
        self.head.vars().find(|v| !body.contains(v))
    }

    pub fn is_safe(&self) -> bool {
        self.unsafe_var().is_none()
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.body.binary_search(literal).is_ok()
    }

    /// The rule with `literal` removed from its body.
    pub fn without(&self, literal: &Literal) -> Rule {
        Rule {
            head: self.head.clone(),
            body: self.body.iter().filter(|l| *l != literal).cloned().collect(),
        }
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Literal>) -> Rule {
        Rule::new(self.head.clone(), self.body.iter().cloned().chain(extra))
    }

    pub fn is_recursive(&self) -> bool {
        let key = self.head.pred_key();
        self.body.iter().any(|l| l.pred_key() == key)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            write!(f, "{}", self.head)
        } else {
            write!(f, "{} ← {}", self.head, self.body.iter().join(", "))
        }
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A set of rules, kept sorted and duplicate-free.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    rules: Vec<Rule>,
}

impl Hypothesis {
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Hypothesis {
        let mut rules: Vec<Rule> = rules.into_iter().collect();
        rules.sort();
        rules.dedup();
        Hypothesis { rules }
    }

    pub fn empty() -> Hypothesis {
        Hypothesis::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Total number of literals.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Rule::size).sum()
    }

    /// Replace one rule by another.
    pub fn replacing(&self, old: &Rule, new: Rule) -> Hypothesis {
        Hypothesis::new(self.rules.iter().filter(|r| *r != old).cloned().chain(std::iter::once(new)))
    }

    pub fn canonical(&self) -> Hypothesis {
        Hypothesis::new(self.rules.iter().map(canonicalize))
    }

    pub fn head_preds(&self) -> BTreeSet<Pred> {
        self.rules.iter().map(|r| r.head.pred_key()).collect()
    }

    /// True if some body literal uses a predicate defined by the hypothesis.
    pub fn is_recursive(&self) -> bool {
        let heads = self.head_preds();
        self.rules.iter().any(|r| r.body.iter().any(|l| heads.contains(&l.pred_key())))
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.rules.iter().join(". "))
    }
}

/// Finite map from variables to terms, applied simultaneously.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Substitution(BTreeMap<Symbol, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn bind(&mut self, var: Symbol, term: Term) {
        self.0.insert(var, term);
    }

    pub fn with(mut self, var: &str, term: Term) -> Substitution {
        self.bind(Symbol::intern(var), term);
        self
    }

    pub fn get(&self, var: Symbol) -> Option<Term> {
        self.0.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, Term)> + '_ {
        self.0.iter().map(|(v, t)| (*v, *t))
    }

    pub fn apply_term(&self, term: Term) -> Term {
        match term {
            Term::Var(v) => self.0.get(&v).copied().unwrap_or(term),
            c => c,
        }
    }

    /// Binds the variables of `pattern` so that it becomes `ground`, if the
    /// two are compatible with the bindings already present.
    pub fn match_literal(&self, pattern: &Literal, ground: &Literal) -> Option<Substitution> {
        if pattern.pred_key() != ground.pred_key() {
            return None;
        }
        let mut out = self.clone();
        for (p, g) in pattern.args.iter().zip(&ground.args) {
            match *p {
                Term::Const(c) => {
                    if Term::Const(c) != *g {
                        return None;
                    }
                }
                Term::Var(v) => match out.0.get(&v) {
                    Some(bound) if bound != g => return None,
                    Some(_) => {}
                    None => {
                        out.0.insert(v, *g);
                    }
                },
            }
        }
        Some(out)
    }
}

/// `r1` is a subrule of `r2`: identical heads and a body subset. No renaming.
pub fn subrule(r1: &Rule, r2: &Rule) -> bool {
    r1.head == r2.head && r1.body.iter().all(|l| r2.contains(l))
}

pub fn sub_hypothesis(h1: &Hypothesis, h2: &Hypothesis) -> bool {
    h1.rules.iter().all(|r1| h2.rules.iter().any(|r2| subrule(r1, r2)))
}

/// No rule of `h` (including `r`) uses `r`'s head predicate in its body.
pub fn is_basic(r: &Rule, h: &Hypothesis) -> bool {
    let key = r.head.pred_key();
    h.rules.iter().all(|r2| r2.body.iter().all(|l| l.pred_key() != key))
}

/// Every variable of `literal` occurs in the head or elsewhere in the body.
pub fn captured(r: &Rule, literal: &Literal) -> bool {
    literal.vars().all(|v| {
        r.head.vars().any(|h| h == v) || r.body.iter().any(|other| other != literal && other.vars().any(|o| o == v))
    })
}

/// The literals of `r` (head and body) cannot be split into two nonempty
/// groups with disjoint variables.
pub fn connected(r: &Rule) -> bool {
    let literals: Vec<&Literal> = std::iter::once(&r.head).chain(&r.body).collect();
    if literals.len() == 1 {
        return true;
    }
    let mut reached = vec![false; literals.len()];
    let mut seen_vars: BTreeSet<Symbol> = BTreeSet::new();
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(i) = stack.pop() {
        seen_vars.extend(literals[i].vars());
        for (j, lit) in literals.iter().enumerate() {
            if !reached[j] && lit.vars().any(|v| seen_vars.contains(&v)) {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    reached.into_iter().all(|x| x)
}

/// Name of the `i`-th canonical variable: A, B, ..., Z, V26, V27, ...
pub fn var_name(i: usize) -> Symbol {
    if i < 26 {
        let c = (b'A' + i as u8) as char;
        Symbol::intern(c.encode_utf8(&mut [0; 4]))
    } else {
        Symbol::intern(&format!("V{i}"))
    }
}

/// Renames variables to A, B, C, ... such that rules equal up to a
/// bijective renaming map to the same rule. Head variables are numbered by
/// first occurrence in the head; the remaining variables get the numbering
/// that yields the lexicographically smallest sorted body.
pub fn canonicalize(r: &Rule) -> Rule {
    let mut order: Vec<Symbol> = Vec::new();
    for v in r.head.vars() {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let head_count = order.len();
    let mut rest: Vec<Symbol> = Vec::new();
    for v in r.body.iter().flat_map(|l| l.vars()) {
        if !order.contains(&v) && !rest.contains(&v) {
            rest.push(v);
        }
    }
    let rename_with = |assignment: &[Symbol]| -> Rule {
        let lookup = |v: Symbol| -> Symbol {
            let pos = order.iter().chain(assignment.iter()).position(|x| *x == v).expect("variable in rule");
            var_name(pos)
        };
        let head = r.head.rename(lookup);
        let mut body: Vec<Literal> = r.body.iter().map(|l| l.rename(lookup)).collect();
        body.sort();
        body.dedup();
        Rule { head, body }
    };
    debug_assert!(head_count + rest.len() == r.vars().len());
    if rest.len() <= 1 {
        return rename_with(&rest);
    }
    rest.iter()
        .copied()
        .permutations(rest.len())
        .map(|perm| rename_with(&perm))
        .min_by(|a, b| a.body.cmp(&b.body))
        .expect("at least one permutation")
}

/// Injective variable-to-variable renaming.
#[derive(Clone, Debug, Default)]
pub struct Renaming {
    pairs: Vec<(Symbol, Symbol)>,
}

impl Renaming {
    pub fn get(&self, v: Symbol) -> Option<Symbol> {
        self.pairs.iter().find(|(from, _)| *from == v).map(|(_, to)| *to)
    }

    pub fn apply(&self, literal: &Literal) -> Literal {
        literal.rename(|v| self.get(v).unwrap_or(v))
    }

    fn unify(&mut self, pattern: &Literal, target: &Literal) -> bool {
        if pattern.pred != target.pred || pattern.args.len() != target.args.len() {
            return false;
        }
        for (p, t) in pattern.args.iter().zip(&target.args) {
            match (*p, *t) {
                (Term::Const(a), Term::Const(b)) if a == b => {}
                (Term::Var(a), Term::Var(b)) => match self.get(a) {
                    Some(bound) if bound == b => {}
                    Some(_) => return false,
                    None => {
                        if self.pairs.iter().any(|(_, to)| *to == b) {
                            return false;
                        }
                        self.pairs.push((a, b));
                    }
                },
                _ => return false,
            }
        }
        true
    }
}

/// Calls `visit` for every injective renaming θ of `p`'s variables with
/// head(p)θ = head(r) and body(p)θ ⊆ body(r).
pub fn for_each_embedding(p: &Rule, r: &Rule, visit: &mut dyn FnMut(&Renaming) -> ControlFlow<()>) -> ControlFlow<()> {
    if p.body.len() > r.body.len() {
        return ControlFlow::Continue(());
    }
    let mut theta = Renaming::default();
    if !theta.unify(&p.head, &r.head) {
        return ControlFlow::Continue(());
    }
    embed_body(&p.body, &r.body, theta, visit)
}

fn embed_body(
    pattern: &[Literal],
    target: &[Literal],
    theta: Renaming,
    visit: &mut dyn FnMut(&Renaming) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let Some((first, rest)) = pattern.split_first() else {
        return visit(&theta);
    };
    for candidate in target {
        let mut extended = theta.clone();
        if extended.unify(first, candidate) {
            embed_body(rest, target, extended, visit)?;
        }
    }
    ControlFlow::Continue(())
}

/// `p` embeds into `r` under some injective variable renaming.
pub fn renamed_subrule(p: &Rule, r: &Rule) -> bool {
    for_each_embedding(p, r, &mut |_| ControlFlow::Break(())).is_break()
}
