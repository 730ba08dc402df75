//! Learning tasks on disk: a directory with `bk.pl` (background knowledge),
//! `exs.pl` (`pos(..)` / `neg(..)` examples), `bias.pl` (bias directives)
//! and optionally `test_exs.pl` (held-out examples in the same format).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{Background, Program};
use crate::generator::Bias;
use crate::logic::{Hypothesis, Literal, Pred};
use crate::parse::{parse_clauses, Ast, Location, ParseError, RawClause};
use crate::pointless::PointlessEvidence;
use crate::symbol::Symbol;

/// A validated learning task.
#[derive(Clone, Debug)]
pub struct Task {
    pub name: String,
    pub bk: Background,
    pub pos: Vec<Literal>,
    pub neg: Vec<Literal>,
    /// Held-out examples; empty when the task ships none.
    pub test_pos: Vec<Literal>,
    pub test_neg: Vec<Literal>,
    pub bias: Bias,
}

pub const BK_FILE: &str = "bk.pl";
pub const EXAMPLES_FILE: &str = "exs.pl";
pub const BIAS_FILE: &str = "bias.pl";
pub const TEST_FILE: &str = "test_exs.pl";

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::Io { path: path.display().to_string(), msg: e.to_string() })
}

impl Task {
    /// Loads and validates the task stored in `dir`.
    pub fn load(dir: &Path) -> Result<Task, ParseError> {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string());
        let file = |f: &str| dir.join(f);
        let test_path = file(TEST_FILE);
        let test = if test_path.exists() { Some(read(&test_path)?) } else { None };
        Task::from_sources_named(
            &name,
            [&file(BK_FILE), &file(EXAMPLES_FILE), &file(BIAS_FILE), &test_path].map(|p| p.display().to_string()),
            &read(&file(BK_FILE))?,
            &read(&file(EXAMPLES_FILE))?,
            &read(&file(BIAS_FILE))?,
            test.as_deref(),
        )
    }

    /// Builds a task from source text, as if read from the standard files.
    pub fn from_sources(name: &str, bk: &str, examples: &str, bias: &str, test: Option<&str>) -> Result<Task, ParseError> {
        let files = [BK_FILE, EXAMPLES_FILE, BIAS_FILE, TEST_FILE].map(String::from);
        Task::from_sources_named(name, files, bk, examples, bias, test)
    }

    fn from_sources_named(
        name: &str,
        files: [String; 4],
        bk: &str,
        examples: &str,
        bias: &str,
        test: Option<&str>,
    ) -> Result<Task, ParseError> {
        let [bk_file, ex_file, bias_file, test_file] = files;
        let (bias, bias_consts) = parse_bias(&bias_file, bias)?;
        let program = parse_bk(&bk_file, bk, &bias)?;
        let (pos, neg) = parse_examples(&ex_file, examples, &bias)?;
        if pos.is_empty() {
            return Err(ParseError::Invalid {
                at: Location { file: ex_file, line: 1, col: 1 },
                msg: "at least one positive example is required".into(),
            });
        }
        let (test_pos, test_neg) = match test {
            Some(src) => parse_examples(&test_file, src, &bias)?,
            None => (Vec::new(), Vec::new()),
        };
        let example_consts = pos.iter().chain(&neg).flat_map(|e| e.args.iter().filter_map(|t| t.as_const()));
        let domain: Vec<Symbol> = bias_consts.into_iter().chain(example_consts).collect();
        let bk = Background::new(program, domain).map_err(|e| ParseError::Invalid { at: Location::default(), msg: e.to_string() })?;
        Ok(Task { name: name.to_string(), bk, pos, neg, test_pos, test_neg, bias })
    }

    /// Builds a task from already-parsed parts, applying the same checks
    /// as the file loader.
    pub fn new(name: &str, program: Program, pos: Vec<Literal>, neg: Vec<Literal>, bias: Bias) -> Result<Task, ParseError> {
        let at = Location::default;
        bias.validate().map_err(|msg| ParseError::Invalid { at: at(), msg })?;
        program.check_safety().map_err(|e| ParseError::Invalid { at: at(), msg: e.to_string() })?;
        if pos.is_empty() {
            return Err(ParseError::Invalid { at: at(), msg: "at least one positive example is required".into() });
        }
        let pos_set: HashSet<&Literal> = pos.iter().collect();
        for e in pos.iter().chain(&neg) {
            check_example(e, &bias, at())?;
        }
        if let Some(e) = neg.iter().find(|e| pos_set.contains(e)) {
            return Err(ParseError::Overlap { at: at(), atom: e.to_string() });
        }
        let allowed = bias.constants.values().flatten().copied();
        let example_consts = pos.iter().chain(&neg).flat_map(|e| e.args.iter().filter_map(|t| t.as_const()));
        let domain: Vec<Symbol> = allowed.chain(example_consts).collect();
        let bk = Background::new(program, domain).map_err(|e| ParseError::Invalid { at: at(), msg: e.to_string() })?;
        Ok(Task { name: name.to_string(), bk, pos, neg, test_pos: Vec::new(), test_neg: Vec::new(), bias })
    }

    /// Every constant of the task: background knowledge, examples and the
    /// bias allow-lists.
    pub fn domain(&self) -> &[Symbol] {
        self.bk.domain()
    }
}

fn check_example(e: &Literal, bias: &Bias, at: Location) -> Result<(), ParseError> {
    if e.pred != bias.head.name {
        return Err(ParseError::UnknownPredicate { at, pred: e.pred.to_string(), expected: bias.head.to_string() });
    }
    if e.arity() != bias.head.arity {
        return Err(ParseError::Arity { at, pred: e.pred.to_string(), declared: bias.head.arity, found: e.arity() });
    }
    if !e.is_ground() {
        return Err(ParseError::Invalid { at, msg: format!("example {e} is not ground") });
    }
    Ok(())
}

fn parse_examples(file: &str, src: &str, bias: &Bias) -> Result<(Vec<Literal>, Vec<Literal>), ParseError> {
    let mut pos: Vec<Literal> = Vec::new();
    let mut neg: Vec<Literal> = Vec::new();
    let mut seen: HashMap<Literal, bool> = HashMap::new();
    for clause in parse_clauses(file, src)? {
        let at = clause.location().clone();
        let (label, args) = clause.head.functor().filter(|_| clause.body.is_empty()).ok_or_else(|| ParseError::Invalid {
            at: at.clone(),
            msg: "expected pos(Atom). or neg(Atom).".into(),
        })?;
        let positive = match (label, args.len()) {
            ("pos", 1) => true,
            ("neg", 1) => false,
            _ => return Err(ParseError::invalid(at, format!("expected pos(Atom). or neg(Atom)., found {label}/{}", args.len()))),
        };
        let atom = args[0].to_literal()?;
        check_example(&atom, bias, args[0].location().clone())?;
        match seen.get(&atom) {
            Some(&p) if p == positive => continue,
            Some(_) => return Err(ParseError::Overlap { at, atom: atom.to_string() }),
            None => {}
        }
        seen.insert(atom.clone(), positive);
        if positive {
            pos.push(atom);
        } else {
            neg.push(atom);
        }
    }
    Ok((pos, neg))
}

fn parse_bk(file: &str, src: &str, bias: &Bias) -> Result<Program, ParseError> {
    let mut declared: BTreeMap<Symbol, usize> = bias.body.iter().map(|p| (p.name, p.arity)).collect();
    declared.insert(bias.head.name, bias.head.arity);
    let mut rules = Vec::new();
    let mut facts = HashSet::new();
    for clause in parse_clauses(file, src)? {
        let rule = clause.to_rule()?;
        for (ast, lit) in std::iter::once(&clause.head).zip(std::iter::once(rule.head())).chain(clause_body(&clause, &rule)) {
            if let Some(&arity) = declared.get(&lit.pred) {
                if arity != lit.arity() {
                    return Err(ParseError::Arity {
                        at: ast.location().clone(),
                        pred: lit.pred.to_string(),
                        declared: arity,
                        found: lit.arity(),
                    });
                }
            }
        }
        if let Some(var) = rule.unsafe_var() {
            return Err(ParseError::UnsafeRule { at: clause.location().clone(), var: var.to_string() });
        }
        if rule.body().is_empty() && !rule.head().is_ground() {
            return Err(ParseError::invalid(clause.location().clone(), format!("fact {} is not ground", rule.head())));
        }
        if !bias.recursion && rule.head().pred_key() == bias.head {
            return Err(ParseError::invalid(
                clause.location().clone(),
                format!("background knowledge defines the target {}; enable_recursion to allow it", bias.head),
            ));
        }
        if rule.body().is_empty() && !facts.insert(rule.head().clone()) {
            continue;
        }
        rules.push(rule);
    }
    Ok(Program::new(rules))
}

/// Pairs each body literal of `rule` with the AST it came from. The rule's
/// body is sorted, so match by value.
fn clause_body<'a>(clause: &'a RawClause, rule: &'a crate::logic::Rule) -> impl Iterator<Item = (&'a Ast, &'a Literal)> + 'a {
    clause.body.iter().filter_map(move |ast| {
        let lit = ast.to_literal().ok()?;
        rule.body().iter().find(|l| **l == lit).map(|l| (ast, l))
    })
}

fn number(ast: &Ast) -> Result<usize, ParseError> {
    match ast.functor() {
        Some((text, [])) => text
            .parse()
            .map_err(|_| ParseError::invalid(ast.location().clone(), format!("expected a non-negative integer, found `{text}`"))),
        _ => Err(ParseError::invalid(ast.location().clone(), "expected a non-negative integer")),
    }
}

fn name(ast: &Ast) -> Result<&str, ParseError> {
    match ast.functor() {
        Some((text, [])) => Ok(text),
        _ => Err(ParseError::invalid(ast.location().clone(), "expected a predicate name")),
    }
}

/// Parses bias directives; also returns every constant of the allow-lists.
fn parse_bias(file: &str, src: &str) -> Result<(Bias, Vec<Symbol>), ParseError> {
    let mut head: Option<Pred> = None;
    let mut body: Vec<Pred> = Vec::new();
    let mut bias = Bias::new(Pred::new("_", 0), []);
    let mut constants: Vec<(Location, Symbol, usize, Vec<Symbol>)> = Vec::new();
    for clause in parse_clauses(file, src)? {
        let at = clause.location().clone();
        if !clause.body.is_empty() {
            return Err(ParseError::invalid(at, "bias directives cannot have a body"));
        }
        let Some((directive, args)) = clause.head.functor() else {
            return Err(ParseError::invalid(at, "expected a bias directive"));
        };
        match (directive, args) {
            ("head_pred", [n, a]) => head = Some(Pred::new(name(n)?, number(a)?)),
            ("body_pred", [n, a]) => {
                let p = Pred::new(name(n)?, number(a)?);
                if !body.contains(&p) {
                    body.push(p);
                }
            }
            ("max_vars", [n]) => bias.max_vars = number(n)?,
            ("max_body", [n]) => bias.max_body = number(n)?,
            ("max_rules", [n]) | ("max_clauses", [n]) => bias.max_rules = number(n)?,
            ("enable_recursion", []) => bias.recursion = true,
            ("constant", [n, p, Ast::List(items, _)]) => {
                let values = items
                    .iter()
                    .map(|i| match i.to_term()? {
                        crate::logic::Term::Const(c) => Ok(c),
                        crate::logic::Term::Var(_) => Err(ParseError::invalid(i.location().clone(), "expected a constant")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                constants.push((at, Symbol::intern(name(n)?), number(p)?, values));
            }
            _ => return Err(ParseError::invalid(at, format!("unknown bias directive {directive}/{}", args.len()))),
        }
    }
    let head = head.ok_or_else(|| ParseError::Invalid {
        at: Location { file: file.to_string(), line: 1, col: 1 },
        msg: "missing head_pred directive".into(),
    })?;
    bias.head = head;
    bias.body = body;
    let mut all = Vec::new();
    for (at, pred, position, values) in constants {
        let Some(p) = bias.body_preds().into_iter().find(|p| p.name == pred) else {
            return Err(ParseError::invalid(at, format!("constant directive for undeclared body predicate `{pred}`")));
        };
        if position == 0 || position > p.arity {
            return Err(ParseError::invalid(at, format!("argument position {position} out of range for {p}")));
        }
        all.extend(values.iter().copied());
        let slot = bias.constants.entry((p, position - 1)).or_default();
        slot.extend(values);
        slot.sort();
        slot.dedup();
    }
    bias.validate().map_err(|msg| ParseError::Invalid { at: Location { file: file.to_string(), line: 1, col: 1 }, msg })?;
    Ok((bias, all))
}

/// One rule per line in canonical form; an empty hypothesis renders as a
/// single comment line, so the output always parses back.
pub fn render_hypothesis(h: &Hypothesis) -> String {
    if h.is_empty() {
        return "% (empty)\n".to_string();
    }
    let mut out = String::new();
    for rule in h.canonical().rules() {
        let _ = writeln!(out, "{rule}.");
    }
    out
}

pub fn render_evidence(ev: &PointlessEvidence) -> String {
    format!("{}: {}. redundant literal: {}", ev.kind, ev.rule, ev.literal)
}
