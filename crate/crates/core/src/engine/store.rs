use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::logic::{Literal, Pred, Term};
use crate::symbol::Symbol;

/// Ground tuples of one predicate, indexed on every argument position.
#[derive(Clone, Debug, Default)]
pub struct Relation {
    rows: Vec<Box<[Symbol]>>,
    set: HashSet<Box<[Symbol]>>,
    index: Vec<HashMap<Symbol, Vec<u32>>>,
}

impl Relation {
    fn new(arity: usize) -> Relation {
        Relation { rows: Vec::new(), set: HashSet::new(), index: vec![HashMap::new(); arity] }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Box<[Symbol]>] {
        &self.rows
    }

    pub fn row(&self, id: u32) -> &[Symbol] {
        &self.rows[id as usize]
    }

    pub fn contains(&self, tuple: &[Symbol]) -> bool {
        self.set.contains(tuple)
    }

    /// Row ids whose argument at `position` equals `value`.
    pub fn lookup(&self, position: usize, value: Symbol) -> &[u32] {
        self.index[position].get(&value).map(Vec::as_slice).unwrap_or(&[])
    }

    fn insert(&mut self, tuple: Box<[Symbol]>) -> bool {
        if self.set.contains(&tuple) {
            return false;
        }
        let id = self.rows.len() as u32;
        for (position, value) in tuple.iter().enumerate() {
            self.index[position].entry(*value).or_default().push(id);
        }
        self.set.insert(tuple.clone());
        self.rows.push(tuple);
        true
    }
}

/// A materialized set of ground atoms.
#[derive(Clone, Debug, Default)]
pub struct FactStore {
    relations: BTreeMap<Pred, Relation>,
    len: usize,
}

impl FactStore {
    pub fn new() -> FactStore {
        FactStore::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn relation(&self, pred: Pred) -> Option<&Relation> {
        self.relations.get(&pred)
    }

    pub fn preds(&self) -> impl Iterator<Item = Pred> + '_ {
        self.relations.iter().filter(|(_, r)| !r.is_empty()).map(|(p, _)| *p)
    }

    pub fn insert_tuple(&mut self, pred: Pred, tuple: Box<[Symbol]>) -> bool {
        debug_assert_eq!(pred.arity, tuple.len());
        let added = self.relations.entry(pred).or_insert_with(|| Relation::new(pred.arity)).insert(tuple);
        if added {
            self.len += 1;
        }
        added
    }

    /// Inserts a ground atom. Panics on a non-ground literal.
    pub fn insert(&mut self, atom: &Literal) -> bool {
        let tuple = atom
            .args
            .iter()
            .map(|t| t.as_const().expect("fact store holds ground atoms"))
            .collect();
        self.insert_tuple(atom.pred_key(), tuple)
    }

    pub fn contains_tuple(&self, pred: Pred, tuple: &[Symbol]) -> bool {
        self.relations.get(&pred).is_some_and(|r| r.contains(tuple))
    }

    pub fn contains(&self, atom: &Literal) -> bool {
        let mut tuple = Vec::with_capacity(atom.args.len());
        for t in &atom.args {
            match t {
                Term::Const(c) => tuple.push(*c),
                Term::Var(_) => return false,
            }
        }
        self.contains_tuple(atom.pred_key(), &tuple)
    }

    pub fn atoms(&self) -> impl Iterator<Item = Literal> + '_ {
        self.relations.iter().flat_map(|(pred, rel)| {
            rel.rows.iter().map(move |row| Literal::new(pred.name, row.iter().map(|s| Term::Const(*s)).collect()))
        })
    }

    pub fn to_set(&self) -> BTreeSet<Literal> {
        self.atoms().collect()
    }

    pub fn extend(&mut self, other: &FactStore) {
        for (pred, rel) in &other.relations {
            for row in &rel.rows {
                self.insert_tuple(*pred, row.clone());
            }
        }
    }
}

impl PartialEq for FactStore {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.atoms().all(|a| other.contains(&a))
    }
}

impl Eq for FactStore {}

impl FromIterator<Literal> for FactStore {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        let mut store = FactStore::new();
        for atom in iter {
            store.insert(&atom);
        }
        store
    }
}
