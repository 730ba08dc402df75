use std::fmt;
use std::ops::ControlFlow;

use itertools::Itertools;

use crate::logic::{connected, for_each_embedding, is_basic, renamed_subrule, Hypothesis, Literal, Rule, Term};

/// A pruning obligation on the hypothesis space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// Rules out hypotheses all of whose rules specialise a rule of `h`.
    Specialisation(Hypothesis),
    /// Rules out hypotheses that contain a specialised-away copy of every rule of `h`.
    Generalisation(Hypothesis),
    /// Rules out hypotheses with a basic rule that contains `rule` under
    /// renaming, whenever dropping the image of `literal` leaves a safe and
    /// connected rule.
    PointlessSuperRule { rule: Rule, literal: Literal },
    /// Rules out exactly `h`.
    Banish(Hypothesis),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    Specialisation,
    Generalisation,
    PointlessSuperRule,
    Banish,
}

impl Constraint {
    pub fn kind(&self) -> ConstraintKind {
        match self {
            Constraint::Specialisation(_) => ConstraintKind::Specialisation,
            Constraint::Generalisation(_) => ConstraintKind::Generalisation,
            Constraint::PointlessSuperRule { .. } => ConstraintKind::PointlessSuperRule,
            Constraint::Banish(_) => ConstraintKind::Banish,
        }
    }

    /// Same constraint with stored rules in canonical form.
    pub fn canonical(self) -> Constraint {
        match self {
            Constraint::Specialisation(h) => Constraint::Specialisation(h.canonical()),
            Constraint::Generalisation(h) => Constraint::Generalisation(h.canonical()),
            Constraint::Banish(h) => Constraint::Banish(h.canonical()),
            Constraint::PointlessSuperRule { rule, literal } => canonical_pointless(&rule, &literal),
        }
    }
}

/// Canonicalizes `rule` and carries `literal` along with the renaming.
fn canonical_pointless(rule: &Rule, literal: &Literal) -> Constraint {
    let canonical = crate::logic::canonicalize(rule);
    let mut image = None;
    let _ = for_each_embedding(rule, &canonical, &mut |theta| {
        image = Some(theta.apply(literal));
        ControlFlow::Break(())
    });
    let literal = image.expect("a rule embeds into its canonical form");
    Constraint::PointlessSuperRule { rule: canonical, literal }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules = |h: &Hypothesis| h.rules().iter().join(". ");
        match self {
            Constraint::Specialisation(h) => write!(f, "specialisation {{{}}}", rules(h)),
            Constraint::Generalisation(h) => write!(f, "generalisation {{{}}}", rules(h)),
            Constraint::PointlessSuperRule { rule, literal } => write!(f, "pointless {rule} [{literal}]"),
            Constraint::Banish(h) => write!(f, "banish {{{}}}", rules(h)),
        }
    }
}

/// `r` without the image of `literal` under some embedding of `p`, picking
/// the first embedding whose reduced rule is safe and connected.
pub fn guarded_reduction(p: &Rule, literal: &Literal, r: &Rule) -> Option<Rule> {
    let mut out = None;
    let _ = for_each_embedding(p, r, &mut |theta| {
        let reduced = r.without(&theta.apply(literal));
        if reduced.is_safe() && connected(&reduced) {
            out = Some(reduced);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

/// Whether `p \ {literal}` is itself safe and connected. For such patterns
/// every safe, connected super-rule passes the guard of
/// [`guarded_reduction`], so the check can run on partial rules.
pub fn guard_is_static(p: &Rule, literal: &Literal) -> bool {
    let reduced = p.without(literal);
    reduced.is_safe() && connected(&reduced)
}

pub fn violates(h: &Hypothesis, c: &Constraint) -> bool {
    match c {
        Constraint::Specialisation(h0) => {
            !h.is_empty() && h.rules().iter().all(|r| h0.rules().iter().any(|r0| renamed_subrule(r0, r)))
        }
        Constraint::Generalisation(h0) => h0.rules().iter().all(|r0| h.rules().iter().any(|r| renamed_subrule(r, r0))),
        Constraint::PointlessSuperRule { rule, literal } => h
            .rules()
            .iter()
            .any(|r| is_basic(r, h) && guarded_reduction(rule, literal, r).is_some()),
        Constraint::Banish(h0) => h.canonical() == h0.canonical(),
    }
}

/// Coarse signature of a literal that every embedding preserves: predicate,
/// constants, and whether each variable is a head variable.
pub(crate) fn shape_bit(literal: &Literal, head: &Literal) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    literal.pred.as_str().hash(&mut hasher);
    literal.args.len().hash(&mut hasher);
    for t in &literal.args {
        match t {
            Term::Const(c) => (0u8, c.as_str()).hash(&mut hasher),
            Term::Var(v) => (1u8, head.vars().any(|h| h == *v)).hash(&mut hasher),
        }
    }
    1u64 << (hasher.finish() % 64)
}

pub(crate) fn shape_mask(r: &Rule) -> u64 {
    r.body().iter().fold(0, |m, l| m | shape_bit(l, r.head()))
}
