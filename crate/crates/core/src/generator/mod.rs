//! Enumeration of candidate hypotheses by total size, under a bias and a
//! growing store of pruning constraints.
//!
//! Rules of each size are assembled once, by a depth-first walk over sets of
//! literals from the bias universe, and kept in canonical form. Hypotheses
//! of size `s` are then the sets of distinct rules whose sizes add up to
//! `s`, produced in a fixed order: fewer rules first, then by rule index.
//! Constraint checks are cached per rule and refreshed lazily as the store
//! grows.

mod bias;
mod constraint;

use std::collections::{BTreeMap, HashSet};

pub use bias::Bias;
pub use constraint::{guard_is_static, guarded_reduction, violates, Constraint, ConstraintKind};
use constraint::{shape_bit, shape_mask};

use crate::logic::{canonicalize, connected, for_each_embedding, Hypothesis, Literal, Rule};

/// Counters describing the work done by a [`Generator`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct GeneratorStats {
    /// Partial rule bodies visited while assembling rule pools.
    pub assembly_nodes: u64,
    /// Partial bodies cut because they already contain a pointless pattern.
    pub assembly_pruned: u64,
    /// Distinct canonical rules assembled.
    pub rules: u64,
    /// Hypotheses handed out.
    pub emitted: u64,
    /// Rule combinations rejected by some constraint.
    pub rejected: u64,
}

/// A hypothesis from the stream. In audit mode candidates that only a
/// pointless constraint rules out are still handed out, marked with the
/// rule that triggered it and its guarded reduction.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub hypothesis: Hypothesis,
    pub pointless: Option<PointlessHit>,
}

#[derive(Clone, Debug)]
pub struct PointlessHit {
    pub constraint: Constraint,
    pub rule: Rule,
    pub reduced: Rule,
}

struct RuleEntry {
    rule: Rule,
    mask: u64,
    recursive: bool,
    /// Constraints already folded into the fields below.
    seen: usize,
    /// Ruled out by a single-rule generalisation constraint.
    dead: bool,
    pointless: Option<usize>,
    /// Specialisation constraints this rule specialises, ascending.
    spec: Vec<u32>,
    /// Generalisation constraints with the positions of their rules that
    /// this rule generalises.
    gen: Vec<(u32, u64)>,
}

/// Position of the enumeration within one size stratum.
#[derive(Clone, Debug, Default)]
struct Cursor {
    k: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

pub struct Generator {
    bias: Bias,
    head: Literal,
    universe: Vec<Literal>,
    universe_masks: Vec<u64>,
    universe_vars: Vec<u32>,
    head_vars: u32,
    audit: bool,
    constraints: Vec<Constraint>,
    known: HashSet<Constraint>,
    banished: HashSet<Hypothesis>,
    gen_width: Vec<u32>,
    /// Pointless patterns usable on partial rules.
    static_patterns: Vec<(Rule, u64)>,
    entries: Vec<RuleEntry>,
    /// `class[t]` is the id range of rules of size `t`.
    class: BTreeMap<usize, std::ops::Range<usize>>,
    cursors: BTreeMap<usize, Cursor>,
    stats: GeneratorStats,
}

impl Generator {
    pub fn new(bias: Bias) -> Generator {
        Generator::with_audit(bias, false)
    }

    /// In audit mode pointless constraints do not prune: candidates they
    /// rule out are emitted with a [`PointlessHit`].
    pub fn with_audit(bias: Bias, audit: bool) -> Generator {
        let head = bias.head_literal();
        let universe = bias.literal_universe();
        let var_index = |l: &Literal| -> u32 {
            l.vars().fold(0, |m, v| {
                let i = (0..bias.max_vars).position(|i| crate::logic::var_name(i) == v).expect("bias variable");
                m | (1 << i)
            })
        };
        let universe_masks = universe.iter().map(|l| shape_bit(l, &head)).collect();
        let universe_vars = universe.iter().map(var_index).collect();
        let head_vars = (1u32 << bias.head.arity) - 1;
        Generator {
            head,
            universe,
            universe_masks,
            universe_vars,
            head_vars,
            audit,
            constraints: Vec::new(),
            known: HashSet::new(),
            banished: HashSet::new(),
            gen_width: Vec::new(),
            static_patterns: Vec::new(),
            entries: Vec::new(),
            class: BTreeMap::new(),
            cursors: BTreeMap::new(),
            stats: GeneratorStats::default(),
            bias,
        }
    }

    pub fn bias(&self) -> &Bias {
        &self.bias
    }

    pub fn stats(&self) -> GeneratorStats {
        self.stats
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds a constraint; returns false if an equal one is already stored.
    pub fn add_constraint(&mut self, c: Constraint) -> bool {
        let c = c.canonical();
        if !self.known.insert(c.clone()) {
            return false;
        }
        match &c {
            Constraint::Banish(h) => {
                self.banished.insert(h.clone());
            }
            Constraint::Generalisation(h) => {
                assert!(h.len() <= 64, "generalisation constraints hold at most 64 rules");
                self.gen_width.resize(self.constraints.len() + 1, 0);
                self.gen_width[self.constraints.len()] = h.len() as u32;
            }
            Constraint::PointlessSuperRule { rule, literal } => {
                if !self.audit && !self.bias.recursion && guard_is_static(rule, literal) {
                    self.static_patterns.push((rule.clone(), shape_mask(rule)));
                }
            }
            Constraint::Specialisation(_) => {}
        }
        self.constraints.push(c);
        true
    }

    /// Canonical rules of exactly `size` literals, assembling them if needed.
    pub fn rules_of_size(&mut self, size: usize) -> Vec<Rule> {
        self.ensure_pools(size);
        self.class.get(&size).map(|r| self.entries[r.clone()].iter().map(|e| e.rule.clone()).collect()).unwrap_or_default()
    }

    fn ensure_pools(&mut self, size: usize) {
        let top = size.min(self.bias.max_rule_size());
        for t in 2..=top {
            if !self.class.contains_key(&t) {
                let rules = self.assemble(t - 1);
                let start = self.entries.len();
                for rule in rules {
                    let mask = shape_mask(&rule);
                    let recursive = rule.is_recursive();
                    self.entries.push(RuleEntry {
                        rule,
                        mask,
                        recursive,
                        seen: 0,
                        dead: false,
                        pointless: None,
                        spec: Vec::new(),
                        gen: Vec::new(),
                    });
                }
                self.stats.rules += (self.entries.len() - start) as u64;
                self.class.insert(t, start..self.entries.len());
            }
        }
    }

    /// All canonical safe connected rules with `body_len` body literals.
    fn assemble(&mut self, body_len: usize) -> Vec<Rule> {
        let mut found: HashSet<Rule> = HashSet::new();
        let mut chosen: Vec<usize> = Vec::with_capacity(body_len);
        self.walk(body_len, 0, &mut chosen, 0, 0, &mut found);
        let mut rules: Vec<Rule> = found.into_iter().collect();
        rules.sort();
        rules
    }

    fn walk(&mut self, body_len: usize, from: usize, chosen: &mut Vec<usize>, mask: u64, vars: u32, found: &mut HashSet<Rule>) {
        if chosen.len() == body_len {
            // Variables must form a prefix A, B, C, ... that covers the head;
            // other namings of the same rule are reached elsewhere.
            if vars & self.head_vars != self.head_vars || vars & (vars + 1) != 0 {
                return;
            }
            let rule = Rule::new(self.head.clone(), chosen.iter().map(|&i| self.universe[i].clone()));
            if rule.body().len() == body_len && connected(&rule) {
                found.insert(canonicalize(&rule));
            }
            return;
        }
        let remaining = body_len - chosen.len();
        for i in from..(self.universe.len() + 1).saturating_sub(remaining) {
            self.stats.assembly_nodes += 1;
            let next_mask = mask | self.universe_masks[i];
            chosen.push(i);
            if self.partial_is_pointless(chosen, next_mask) {
                self.stats.assembly_pruned += 1;
            } else {
                self.walk(body_len, i + 1, chosen, next_mask, vars | self.universe_vars[i], found);
            }
            chosen.pop();
        }
    }

    fn partial_is_pointless(&self, chosen: &[usize], mask: u64) -> bool {
        if self.static_patterns.is_empty() {
            return false;
        }
        let partial = Rule::new(self.head.clone(), chosen.iter().map(|&i| self.universe[i].clone()));
        self.static_patterns.iter().any(|(p, pm)| {
            pm & !mask == 0 && for_each_embedding(p, &partial, &mut |_| std::ops::ControlFlow::Break(())).is_break()
        })
    }

    fn refresh(&mut self, id: usize) {
        let entry = &self.entries[id];
        if entry.seen == self.constraints.len() {
            return;
        }
        let (rule, mask) = (entry.rule.clone(), entry.mask);
        let mut update = (entry.dead, entry.pointless, Vec::new(), Vec::new());
        for ci in entry.seen..self.constraints.len() {
            match &self.constraints[ci] {
                Constraint::Specialisation(h0) => {
                    if h0.rules().iter().any(|r0| shape_mask(r0) & !mask == 0 && crate::logic::renamed_subrule(r0, &rule)) {
                        update.2.push(ci as u32);
                    }
                }
                Constraint::Generalisation(h0) => {
                    let mut bits = 0u64;
                    for (j, r0) in h0.rules().iter().enumerate() {
                        if mask & !shape_mask(r0) == 0 && crate::logic::renamed_subrule(&rule, r0) {
                            bits |= 1 << j;
                        }
                    }
                    if bits != 0 {
                        if h0.len() == 1 {
                            update.0 = true;
                        } else {
                            update.3.push((ci as u32, bits));
                        }
                    }
                }
                Constraint::PointlessSuperRule { rule: p, literal } => {
                    if update.1.is_none() && shape_mask(p) & !mask == 0 && guarded_reduction(p, literal, &rule).is_some() {
                        update.1 = Some(ci);
                    }
                }
                Constraint::Banish(_) => {}
            }
        }
        let entry = &mut self.entries[id];
        entry.seen = self.constraints.len();
        entry.dead = update.0;
        entry.pointless = update.1;
        entry.spec.extend(update.2);
        entry.gen.extend(update.3);
    }

    /// Verdict on the combination `ids`: `Err(j)` when position `j` alone
    /// already rules out every combination sharing the prefix up to `j`,
    /// `Ok(None)` if the combination is rejected, otherwise the candidate.
    fn judge(&mut self, ids: &[usize]) -> Result<Option<Candidate>, usize> {
        for (j, &id) in ids.iter().enumerate() {
            self.refresh(id);
            let e = &self.entries[id];
            if e.dead || (!self.audit && !self.bias.recursion && e.pointless.is_some()) {
                return Err(j);
            }
        }
        let entries: Vec<&RuleEntry> = ids.iter().map(|&id| &self.entries[id]).collect();
        // Every rule specialises a rule of the same constraint.
        let mut common: Vec<u32> = entries[0].spec.clone();
        for e in &entries[1..] {
            common.retain(|c| e.spec.binary_search(c).is_ok());
            if common.is_empty() {
                break;
            }
        }
        if !common.is_empty() {
            return Ok(None);
        }
        if entries.len() > 1 {
            let mut covered: BTreeMap<u32, u64> = BTreeMap::new();
            for e in &entries {
                for (c, bits) in &e.gen {
                    *covered.entry(*c).or_default() |= bits;
                }
            }
            for (c, bits) in covered {
                let width = self.gen_width[c as usize];
                if bits == (u64::MAX >> (64 - width)) {
                    return Ok(None);
                }
            }
        }
        let hypothesis = Hypothesis::new(entries.iter().map(|e| e.rule.clone()));
        if self.banished.contains(&hypothesis) {
            return Ok(None);
        }
        let basic = !entries.iter().any(|e| e.recursive);
        let mut pointless = None;
        if basic {
            if let Some(e) = entries.iter().find(|e| e.pointless.is_some()) {
                let constraint = self.constraints[e.pointless.unwrap()].clone();
                let Constraint::PointlessSuperRule { rule: p, literal } = &constraint else {
                    unreachable!("pointless slot holds a pointless constraint")
                };
                let reduced = guarded_reduction(p, literal, &e.rule).expect("cached hit");
                if !self.audit {
                    return Ok(None);
                }
                pointless = Some(PointlessHit { constraint, rule: e.rule.clone(), reduced });
            }
        }
        Ok(Some(Candidate { hypothesis, pointless }))
    }

    /// Next hypothesis of total size `size` that no stored constraint rules
    /// out, or `None` once the stratum is exhausted.
    pub fn next_hypothesis(&mut self, size: usize) -> Option<Hypothesis> {
        loop {
            let c = self.next_candidate(size)?;
            if c.pointless.is_none() {
                return Some(c.hypothesis);
            }
        }
    }

    /// Like [`next_hypothesis`](Self::next_hypothesis), but in audit mode
    /// also yields candidates flagged by pointless constraints.
    pub fn next_candidate(&mut self, size: usize) -> Option<Candidate> {
        if size < 2 {
            return None;
        }
        self.ensure_pools(size);
        let mut cursor = self.cursors.remove(&size).unwrap_or_default();
        let out = self.advance(size, &mut cursor);
        self.cursors.insert(size, cursor);
        if out.is_some() {
            self.stats.emitted += 1;
        }
        out
    }

    fn advance(&mut self, size: usize, cur: &mut Cursor) -> Option<Candidate> {
        if cur.done {
            return None;
        }
        // Position from which the current combination must change.
        let mut bump: Option<usize> = if cur.started { Some(cur.k - 1) } else { None };
        loop {
            let ok = match bump {
                None => {
                    cur.k += 1;
                    cur.started = true;
                    if cur.k > self.bias.max_rules || cur.k * 2 > size {
                        cur.done = true;
                        return None;
                    }
                    cur.idx = vec![0; cur.k];
                    self.fill(&mut cur.idx, 0, 0, size)
                }
                Some(j) => self.bump(&mut cur.idx, j, size),
            };
            if !ok {
                bump = None;
                continue;
            }
            match self.judge(&cur.idx) {
                Ok(Some(c)) => return Some(c),
                Ok(None) => {
                    self.stats.rejected += 1;
                    bump = Some(cur.k - 1);
                }
                Err(j) => {
                    self.stats.rejected += 1;
                    bump = Some(j);
                }
            }
        }
    }

    fn size_of(&self, id: usize) -> usize {
        self.entries[id].rule.size()
    }

    /// Smallest completion of `idx[pos..]` with ids from `min_id` on whose
    /// sizes add up to `remaining`.
    fn fill(&self, idx: &mut [usize], pos: usize, min_id: usize, remaining: usize) -> bool {
        let slots = idx.len() - pos;
        if slots == 0 {
            return remaining == 0;
        }
        let mut id = min_id;
        while id < self.entries.len() {
            let t = self.size_of(id);
            if t * slots > remaining {
                return false;
            }
            if slots == 1 {
                if t < remaining {
                    match self.class.get(&remaining) {
                        Some(r) => id = id.max(r.start),
                        None => return false,
                    }
                    continue;
                }
                idx[pos] = id;
                return true;
            }
            idx[pos] = id;
            if self.fill(idx, pos + 1, id + 1, remaining - t) {
                return true;
            }
            // A later id of the same size leaves fewer options, so move on
            // to the next size class.
            id = self.class[&t].end;
        }
        false
    }

    /// Next combination after `idx` that differs at position `j` or earlier.
    fn bump(&self, idx: &mut [usize], j: usize, size: usize) -> bool {
        for pos in (0..=j).rev() {
            let used: usize = idx[..pos].iter().map(|&id| self.size_of(id)).sum();
            if self.fill(idx, pos, idx[pos] + 1, size - used) {
                return true;
            }
        }
        false
    }
}
