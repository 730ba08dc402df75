//! Exhaustive reference search: enumerate every hypothesis the bias admits,
//! test each one, and report the exact optimum. No constraints, no caching,
//! no early exit. Refuses work above a candidate ceiling rather than
//! silently enumerating less.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::generator::Bias;
use crate::logic::{canonicalize, connected, var_name, Hypothesis, Literal, Rule, Term};
use crate::par::{self, Execution};
use crate::search::{score, CostScore};
use crate::task::Task;

pub const DEFAULT_CEILING: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("refusing to enumerate: about {estimate} candidates exceed the ceiling of {ceiling}")]
    CeilingExceeded { estimate: u128, ceiling: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub ceiling: u64,
    pub exec: Execution,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { ceiling: DEFAULT_CEILING, exec: Execution::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub score: CostScore,
    /// Every hypothesis with the optimal score, sorted.
    pub witnesses: Vec<Hypothesis>,
    pub tested: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Body literals over the bias vocabulary, built independently of the
/// generator.
fn universe(bias: &Bias) -> Vec<Literal> {
    let mut preds = bias.body.clone();
    if bias.recursion {
        preds.push(bias.head);
    }
    let vars: Vec<Term> = (0..bias.max_vars).map(|i| Term::Var(var_name(i))).collect();
    let mut out = BTreeSet::new();
    for pred in preds {
        let columns = (0..pred.arity).map(|pos| {
            let consts = bias.constants.get(&(pred, pos)).into_iter().flatten().map(|c| Term::Const(*c));
            vars.iter().copied().chain(consts).collect::<Vec<_>>()
        });
        for args in columns.multi_cartesian_product() {
            out.insert(Literal::new(pred.name, args));
        }
        if pred.arity == 0 {
            out.insert(Literal::new(pred.name, Vec::new()));
        }
    }
    out.into_iter().collect()
}

fn check(estimate: u128, config: &OracleConfig) -> Result<(), OracleError> {
    if estimate > config.ceiling as u128 {
        Err(OracleError::CeilingExceeded { estimate, ceiling: config.ceiling })
    } else {
        Ok(())
    }
}

/// Every canonical safe connected rule with exactly `size` literals.
pub fn enumerate_rules(bias: &Bias, size: usize, config: &OracleConfig) -> Result<Vec<Rule>, OracleError> {
    if size < 2 || size > bias.max_rule_size() {
        return Ok(Vec::new());
    }
    let universe = universe(bias);
    check(binomial(universe.len(), size - 1), config)?;
    let head = bias.head_literal();
    let mut rules = BTreeSet::new();
    for body in universe.iter().cloned().combinations(size - 1) {
        let rule = Rule::new(head.clone(), body);
        if rule.body().contains(&head) {
            continue;
        }
        if rule.is_safe() && connected(&rule) {
            rules.insert(canonicalize(&rule));
        }
    }
    Ok(rules.into_iter().collect())
}

/// Every canonical hypothesis of total size `size`.
pub fn enumerate_all(bias: &Bias, size: usize, config: &OracleConfig) -> Result<BTreeSet<Hypothesis>, OracleError> {
    let by_size: Vec<Vec<Rule>> = (0..=size)
        .map(|t| if t <= bias.max_rule_size() { enumerate_rules(bias, t, config) } else { Ok(Vec::new()) })
        .collect::<Result<_, _>>()?;
    // Multisets of rule sizes adding up to `size`, as ascending sequences.
    let mut compositions = Vec::new();
    for k in 1..=bias.max_rules {
        let sizes: Vec<usize> = (2..=size.min(bias.max_rule_size())).collect();
        for comp in sizes.iter().copied().combinations_with_replacement(k) {
            if comp.iter().sum::<usize>() == size {
                compositions.push(comp);
            }
        }
    }
    let estimate: u128 = compositions
        .iter()
        .map(|comp| comp.iter().dedup_with_count().map(|(n, t)| binomial(by_size[*t].len(), n)).product::<u128>())
        .sum();
    check(estimate, config)?;
    let mut out = BTreeSet::new();
    for comp in compositions {
        let groups: Vec<Vec<Vec<Rule>>> = comp
            .iter()
            .dedup_with_count()
            .map(|(n, t)| by_size[*t].iter().cloned().combinations(n).collect())
            .collect();
        for choice in groups.into_iter().multi_cartesian_product() {
            out.insert(Hypothesis::new(choice.into_iter().flatten()));
        }
    }
    Ok(out)
}

/// Exact optimum over all hypotheses up to `max_size` literals, including
/// the empty hypothesis.
pub fn oracle_optimal(task: &Task, max_size: usize, config: &OracleConfig) -> Result<OracleResult, OracleError> {
    let max_size = max_size.min(task.bias.max_size());
    let mut strata = Vec::new();
    let mut total: u128 = 0;
    for size in 2..=max_size {
        let stratum = enumerate_all(&task.bias, size, config)?;
        total += stratum.len() as u128;
        check(total, config)?;
        strata.push(stratum);
    }
    let mut best = CostScore { errors: task.pos.len(), literals: 0 };
    let mut witnesses = vec![Hypothesis::empty()];
    let mut tested = 0;
    for stratum in strata {
        let hs: Vec<Hypothesis> = stratum.into_iter().collect();
        let scores = par::map(config.exec, &hs, |h| score(h, task));
        tested += hs.len() as u64;
        for (h, s) in hs.into_iter().zip(scores) {
            if s < best {
                best = s;
                witnesses.clear();
            }
            if s == best {
                witnesses.push(h);
            }
        }
    }
    witnesses.sort();
    Ok(OracleResult { score: best, witnesses, tested })
}
