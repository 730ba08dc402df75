//! Global symbol interner.
//!
//! Predicate names, constants and variable names are interned once and then
//! handled as a thin pointer. Equality and hashing are by identity; ordering
//! is "natural": integers compare numerically and sort before other names,
//! everything else compares by text.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Mutex, OnceLock};

struct SymbolData {
    text: Box<str>,
    number: Option<i64>,
}

#[derive(Clone, Copy)]
pub struct Symbol(&'static SymbolData);

fn table() -> &'static Mutex<HashMap<&'static str, &'static SymbolData>> {
    static TABLE: OnceLock<Mutex<HashMap<&'static str, &'static SymbolData>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

impl Symbol {
    pub fn intern(text: &str) -> Symbol {
        let mut table = table().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(data) = table.get(text) {
            return Symbol(data);
        }
        let data: &'static SymbolData = Box::leak(Box::new(SymbolData {
            text: text.into(),
            number: text.parse().ok(),
        }));
        table.insert(&data.text, data);
        Symbol(data)
    }

    pub fn as_str(self) -> &'static str {
        &self.0.text
    }

    pub fn as_number(self) -> Option<i64> {
        self.0.number
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0 as *const SymbolData as usize).hash(state);
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if std::ptr::eq(self.0, other.0) {
            return Ordering::Equal;
        }
        match (self.0.number, other.0.number) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.text.cmp(&other.0.text)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.text.cmp(&other.0.text),
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl From<&str> for Symbol {
    fn from(text: &str) -> Self {
        Symbol::intern(text)
    }
}
