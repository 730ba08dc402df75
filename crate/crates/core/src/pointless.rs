//! Detection of pointless rules: rules with a captured body literal that is
//! either implied by the rest of the body (reducible) or rules out no
//! negative example (indiscriminate).

use std::fmt;

use serde::Serialize;

use crate::engine::{covers_rule, implies_from, Background};
use crate::logic::{captured, is_basic, Hypothesis, Literal, Pred, Rule, Substitution};
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointlessKind {
    Reducible,
    Indiscriminate,
}

impl fmt::Display for PointlessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointlessKind::Reducible => "reducible",
            PointlessKind::Indiscriminate => "indiscriminate",
        })
    }
}

/// A pointless rule together with the literal that makes it so.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointlessEvidence {
    /// Canonical form of the offending rule.
    pub rule: Rule,
    /// The captured literal; a member of `rule`'s body.
    pub literal: Literal,
    pub kind: PointlessKind,
    /// `rule` without `literal`.
    pub reduced_rule: Rule,
}

/// Which of the two tests to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    pub reducible: bool,
    pub indiscriminate: bool,
}

impl Checks {
    pub const BOTH: Checks = Checks { reducible: true, indiscriminate: true };
    pub const NONE: Checks = Checks { reducible: false, indiscriminate: false };

    pub fn any(self) -> bool {
        self.reducible || self.indiscriminate
    }
}

/// `body(r) \ {l}` implies `l` under the background knowledge.
pub fn is_reducible(bk: &Background, r: &Rule, l: &Literal) -> bool {
    let rest = r.without(l);
    implies_from(bk.model(), rest.body(), l, &Substitution::new(), bk.domain())
}

/// For every negative example `e` and every grounding of `body(r) \ {l}`
/// that agrees with `e` on the head, `l` holds as well. Negatives that do
/// not unify with the head impose nothing, so an empty `neg` is vacuous.
pub fn is_indiscriminate(bk: &Background, neg: &[Literal], r: &Rule, l: &Literal) -> bool {
    let rest = r.without(l);
    neg.iter().all(|e| {
        if e.pred_key() != r.head().pred_key() {
            return true;
        }
        match Substitution::new().match_literal(r.head(), e) {
            Some(theta) => implies_from(bk.model(), rest.body(), l, &theta, bk.domain()),
            None => true,
        }
    })
}

/// `r` and `r \ {l}` cover exactly the same negative examples.
///
/// This agrees with [`is_indiscriminate`] whenever every variable of `l`
/// occurs in the head. When `l` mentions body-only variables it is weaker:
/// one grounding can satisfy `l` for a negative while another does not, and
/// the property is then not inherited by super-rules.
pub fn covers_same_negatives(bk: &Background, neg: &[Literal], r: &Rule, l: &Literal) -> bool {
    let rest = r.without(l);
    neg.iter().filter(|e| e.pred_key() == r.head().pred_key()).all(|e| {
        covers_rule(bk, r, e).expect("same head predicate") == covers_rule(bk, &rest, e).expect("same head predicate")
    })
}

fn check_literal(bk: &Background, neg: &[Literal], rule: &Rule, literal: &Literal, checks: Checks) -> Option<PointlessKind> {
    if !captured(rule, literal) {
        return None;
    }
    if checks.reducible && is_reducible(bk, rule, literal) {
        return Some(PointlessKind::Reducible);
    }
    if checks.indiscriminate && is_indiscriminate(bk, neg, rule, literal) {
        return Some(PointlessKind::Indiscriminate);
    }
    None
}

/// Every (basic rule, captured literal) pair of `h`, in canonical order.
fn candidates(h: &Hypothesis) -> Vec<(Rule, Literal)> {
    let canonical = h.canonical();
    let mut out = Vec::new();
    for rule in canonical.rules() {
        if !is_basic(rule, &canonical) {
            continue;
        }
        for literal in rule.body() {
            out.push((rule.clone(), literal.clone()));
        }
    }
    out
}

fn evidence(rule: Rule, literal: Literal, kind: PointlessKind) -> PointlessEvidence {
    let reduced_rule = rule.without(&literal);
    PointlessEvidence { rule, literal, kind, reduced_rule }
}

/// First pointless (rule, literal) of `h` in canonical order. Reducibility
/// is tested before indiscriminateness for each literal.
pub fn find_pointless(h: &Hypothesis, bk: &Background, neg: &[Literal], checks: Checks) -> Option<PointlessEvidence> {
    if !checks.any() {
        return None;
    }
    candidates(h).into_iter().find_map(|(rule, literal)| {
        let kind = check_literal(bk, neg, &rule, &literal, checks)?;
        Some(evidence(rule, literal, kind))
    })
}

/// Every pointless (rule, literal) pair of `h`, in canonical order.
pub fn find_all_pointless(
    h: &Hypothesis,
    bk: &Background,
    neg: &[Literal],
    checks: Checks,
    exec: Execution,
) -> Vec<PointlessEvidence> {
    if !checks.any() {
        return Vec::new();
    }
    let pairs = candidates(h);
    let kinds = par::map(exec, &pairs, |(rule, literal)| check_literal(bk, neg, rule, literal, checks));
    pairs
        .into_iter()
        .zip(kinds)
        .filter_map(|((rule, literal), kind)| Some(evidence(rule, literal, kind?)))
        .collect()
}

/// Every pointless literal in a user-supplied rule set. Indiscriminateness
/// is only meaningful against negatives of the rule's own head predicate,
/// so rules for other predicates are checked for reducibility alone.
pub fn lint(rules: &Hypothesis, bk: &Background, neg: &[Literal], target: Pred, exec: Execution) -> Vec<PointlessEvidence> {
    let canonical = rules.canonical();
    let mut out = Vec::new();
    for rule in canonical.rules() {
        if !is_basic(rule, &canonical) {
            continue;
        }
        let checks = Checks { reducible: true, indiscriminate: rule.head().pred_key() == target };
        out.extend(find_all_pointless(&Hypothesis::new([rule.clone()]), bk, neg, checks, exec));
    }
    out
}
