use std::collections::BTreeMap;

use crate::logic::{var_name, Literal, Pred, Term};
use crate::symbol::Symbol;

/// Bounds and vocabulary of the hypothesis space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bias {
    pub head: Pred,
    pub body: Vec<Pred>,
    pub max_vars: usize,
    pub max_body: usize,
    pub max_rules: usize,
    /// Constants allowed at a (predicate, zero-based argument position).
    pub constants: BTreeMap<(Pred, usize), Vec<Symbol>>,
    pub recursion: bool,
}

impl Bias {
    /// A bias with default bounds (3 variables, 3 body literals, 1 rule).
    pub fn new(head: Pred, body: impl IntoIterator<Item = Pred>) -> Bias {
        Bias {
            head,
            body: body.into_iter().collect(),
            max_vars: 3,
            max_body: 3,
            max_rules: 1,
            constants: BTreeMap::new(),
            recursion: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_vars == 0 || self.max_body == 0 || self.max_rules == 0 {
            return Err("max_vars, max_body and max_rules must be at least 1".into());
        }
        if self.max_vars < self.head.arity {
            return Err(format!("max_vars {} is smaller than the head arity {}", self.max_vars, self.head.arity));
        }
        if !self.recursion && self.body.contains(&self.head) {
            return Err(format!("head predicate {} is a body predicate but recursion is not enabled", self.head));
        }
        for (pred, pos) in self.constants.keys() {
            if *pos >= pred.arity {
                return Err(format!("constant position {} out of range for {}", pos + 1, pred));
            }
        }
        Ok(())
    }

    /// Largest rule, head included.
    pub fn max_rule_size(&self) -> usize {
        self.max_body + 1
    }

    /// Largest hypothesis the bias admits.
    pub fn max_size(&self) -> usize {
        self.max_rules * self.max_rule_size()
    }

    /// The head every generated rule uses: distinct canonical variables.
    pub fn head_literal(&self) -> Literal {
        Literal::new(self.head.name, (0..self.head.arity).map(|i| Term::Var(var_name(i))).collect())
    }

    pub fn vars(&self) -> Vec<Symbol> {
        (0..self.max_vars).map(var_name).collect()
    }

    /// Predicates allowed in bodies; includes the head predicate when
    /// recursion is enabled.
    pub fn body_preds(&self) -> Vec<Pred> {
        let mut preds = self.body.clone();
        if self.recursion && !preds.contains(&self.head) {
            preds.push(self.head);
        }
        preds.sort();
        preds.dedup();
        preds
    }

    /// Every body literal the bias admits: each argument is one of the
    /// `max_vars` variables or an allowed constant for that position.
    /// Literals without variables and the head literal itself are left out,
    /// since no rule containing them is connected and non-trivial.
    pub fn literal_universe(&self) -> Vec<Literal> {
        let vars: Vec<Term> = self.vars().into_iter().map(Term::Var).collect();
        let head = self.head_literal();
        let mut out = Vec::new();
        for pred in self.body_preds() {
            let choices: Vec<Vec<Term>> = (0..pred.arity)
                .map(|pos| {
                    let mut c = vars.clone();
                    if let Some(consts) = self.constants.get(&(pred, pos)) {
                        c.extend(consts.iter().map(|s| Term::Const(*s)));
                    }
                    c
                })
                .collect();
            let mut args = Vec::with_capacity(pred.arity);
            cartesian(&choices, &mut args, &mut |args| {
                if args.iter().any(|t| t.is_var()) {
                    let lit = Literal::new(pred.name, args.to_vec());
                    if lit != head {
                        out.push(lit);
                    }
                }
            });
        }
        out.sort();
        out
    }
}

fn cartesian(choices: &[Vec<Term>], prefix: &mut Vec<Term>, visit: &mut dyn FnMut(&[Term])) {
    if prefix.len() == choices.len() {
        visit(prefix);
        return;
    }
    for t in &choices[prefix.len()] {
        prefix.push(*t);
        cartesian(choices, prefix, visit);
        prefix.pop();
    }
}
