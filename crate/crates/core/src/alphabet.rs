//! Namespaced variables, alphabets and states.
//!
//! An alphabet is an ordered list of typed variables. Its order fixes a
//! mixed-radix numbering of states: entry 0 is the least significant digit,
//! and entry `i` has stride equal to the product of the cardinalities of
//! entries `0..i`. Entries are kept in canonical order (top namespace, then
//! `sys`, then `vu`; within each namespace unprimed before primed; otherwise
//! declaration order), so an alphabet built from the same variables always
//! numbers its states the same way.

use std::fmt;
use std::sync::Arc;

use crate::domain::{Domain, Value};
use crate::error::{AlgebraError, Result};

/// Default cap on the number of states a materialised predicate may have.
pub const DEFAULT_STATE_LIMIT: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    /// Design-level variables (`ok`), above the viewed system.
    Top,
    Sys,
    Vu,
}

/// A qualified variable name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QName {
    pub ns: Namespace,
    pub name: String,
    pub primed: bool,
}

impl QName {
    pub fn new(ns: Namespace, name: impl Into<String>, primed: bool) -> Self {
        QName {
            ns,
            name: name.into(),
            primed,
        }
    }

    pub fn sys(name: impl Into<String>) -> Self {
        QName::new(Namespace::Sys, name, false)
    }

    pub fn vu(name: impl Into<String>) -> Self {
        QName::new(Namespace::Vu, name, false)
    }

    pub fn top(name: impl Into<String>) -> Self {
        QName::new(Namespace::Top, name, false)
    }

    pub fn ok() -> Self {
        QName::top("ok")
    }

    pub fn primed(&self) -> Self {
        QName {
            primed: true,
            ..self.clone()
        }
    }

    pub fn unprimed(&self) -> Self {
        QName {
            primed: false,
            ..self.clone()
        }
    }

    fn group(&self) -> (Namespace, bool) {
        (self.ns, self.primed)
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ns {
            Namespace::Top => {}
            Namespace::Sys => f.write_str("sys:")?,
            Namespace::Vu => f.write_str("vu:")?,
        }
        f.write_str(&self.name)?;
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entry {
    pub name: QName,
    pub domain: Domain,
}

impl Entry {
    pub fn new(name: QName, domain: Domain) -> Self {
        Entry { name, domain }
    }
}

/// An ordered, duplicate-free set of typed variables.
#[derive(Clone)]
pub struct Alphabet {
    entries: Vec<Entry>,
    radices: Vec<u64>,
    strides: Vec<u128>,
    size: u128,
    limit: u64,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", e.name, e.domain)?;
        }
        f.write_str("}")
    }
}

impl Alphabet {
    /// Builds an alphabet, sorting entries into canonical order.
    pub fn new(entries: impl IntoIterator<Item = Entry>) -> Result<Self> {
        Self::with_limit(entries, DEFAULT_STATE_LIMIT)
    }

    pub fn with_limit(entries: impl IntoIterator<Item = Entry>, limit: u64) -> Result<Self> {
        let mut entries: Vec<Entry> = entries.into_iter().collect();
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|o| o.name == e.name) {
                return Err(AlgebraError::DuplicateVariable(e.name.to_string()));
            }
        }
        entries.sort_by_key(|e| e.name.group());
        let radices: Vec<u64> = entries.iter().map(|e| e.domain.cardinality()).collect();
        let mut strides = Vec::with_capacity(entries.len());
        let mut size: u128 = 1;
        for r in &radices {
            strides.push(size);
            size = size.saturating_mul(*r as u128);
        }
        Ok(Alphabet {
            entries,
            radices,
            strides,
            size,
            limit,
        })
    }

    pub fn empty() -> Self {
        Alphabet::new([]).expect("empty alphabet is valid")
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &QName> {
        self.entries.iter().map(|e| &e.name)
    }

    /// Number of states, saturating.
    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// The same alphabet with a different state-space limit.
    pub fn relimit(&self, limit: u64) -> Self {
        Alphabet {
            limit,
            ..self.clone()
        }
    }

    /// Number of states as a `usize`, or an error if it exceeds the limit.
    pub fn checked_size(&self) -> Result<usize> {
        if self.size > self.limit as u128 {
            return Err(AlgebraError::StateSpaceTooLarge {
                size: self.size,
                limit: self.limit,
            });
        }
        Ok(self.size as usize)
    }

    pub fn position(&self, name: &QName) -> Option<usize> {
        self.entries.iter().position(|e| &e.name == name)
    }

    pub fn contains(&self, name: &QName) -> bool {
        self.position(name).is_some()
    }

    pub fn entry(&self, name: &QName) -> Option<&Entry> {
        self.entries.iter().find(|e| &e.name == name)
    }

    pub fn radix(&self, i: usize) -> usize {
        self.radices[i] as usize
    }

    /// Stride of entry `i`. Only meaningful once [`checked_size`] succeeded.
    ///
    /// [`checked_size`]: Alphabet::checked_size
    pub fn stride(&self, i: usize) -> usize {
        self.strides[i] as usize
    }

    pub fn digit(&self, index: usize, i: usize) -> u32 {
        ((index / self.stride(i)) % self.radix(i)) as u32
    }

    pub fn decode(&self, index: usize) -> Vec<u32> {
        (0..self.len()).map(|i| self.digit(index, i)).collect()
    }

    pub fn encode(&self, digits: &[u32]) -> usize {
        debug_assert_eq!(digits.len(), self.len());
        digits
            .iter()
            .enumerate()
            .map(|(i, d)| *d as usize * self.stride(i))
            .sum()
    }

    /// Union of two alphabets; shared names must agree on their domain.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut entries = self.entries.clone();
        for e in &other.entries {
            match self.entry(&e.name) {
                Some(mine) if mine.domain != e.domain => {
                    return Err(AlgebraError::AlphabetMismatch {
                        left: format!("{}: {}", mine.name, mine.domain),
                        right: format!("{}: {}", e.name, e.domain),
                    })
                }
                Some(_) => {}
                None => entries.push(e.clone()),
            }
        }
        Alphabet::with_limit(entries, self.limit.max(other.limit))
    }

    /// Entries satisfying `keep`, in their existing order.
    pub fn filter(&self, keep: impl Fn(&QName) -> bool) -> Alphabet {
        Alphabet::with_limit(
            self.entries.iter().filter(|e| keep(&e.name)).cloned(),
            self.limit,
        )
        .expect("sub-alphabet of a valid alphabet is valid")
    }

    pub fn namespace(&self, ns: Namespace) -> Alphabet {
        self.filter(|n| n.ns == ns)
    }

    pub fn unprimed(&self) -> Alphabet {
        self.filter(|n| !n.primed)
    }

    /// Every entry renamed to its primed twin.
    pub fn primed(&self) -> Result<Alphabet> {
        if let Some(e) = self.entries.iter().find(|e| e.name.primed) {
            return Err(AlgebraError::Shape(format!(
                "cannot prime already-primed variable `{}`",
                e.name
            )));
        }
        Alphabet::with_limit(
            self.entries
                .iter()
                .map(|e| Entry::new(e.name.primed(), e.domain.clone())),
            self.limit,
        )
    }

    /// An unprimed alphabet together with its primed twin.
    pub fn with_primes(&self) -> Result<Alphabet> {
        self.union(&self.primed()?)
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.entries
            .iter()
            .all(|e| other.entry(&e.name).is_some_and(|o| o.domain == e.domain))
    }

    pub fn state(self: &Arc<Self>, index: usize) -> State {
        State {
            digits: self.decode(index),
            alphabet: Arc::clone(self),
        }
    }

    /// Builds a state from `(name, value)` pairs covering every entry.
    pub fn state_of(self: &Arc<Self>, values: &[(QName, Value)]) -> Result<State> {
        let mut digits = vec![None; self.len()];
        for (name, value) in values {
            let pos = self
                .position(name)
                .ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))?;
            let d = self.entries[pos].domain.digit(value).ok_or_else(|| {
                AlgebraError::Type(format!(
                    "value {value} is not in the domain of `{name}`"
                ))
            })?;
            digits[pos] = Some(d);
        }
        let digits = digits
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    AlgebraError::Shape(format!("no value given for `{}`", self.entries[i].name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(State {
            alphabet: Arc::clone(self),
            digits,
        })
    }
}

/// An assignment of a value to every variable of an alphabet.
#[derive(Clone, PartialEq, Eq)]
pub struct State {
    alphabet: Arc<Alphabet>,
    digits: Vec<u32>,
}

impl State {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn index(&self) -> usize {
        self.alphabet.encode(&self.digits)
    }

    pub fn value_at(&self, i: usize) -> Value {
        self.alphabet.entries[i].domain.value(self.digits[i])
    }

    pub fn value(&self, name: &QName) -> Option<Value> {
        self.alphabet.position(name).map(|i| self.value_at(i))
    }

    /// `(name, value)` pairs in canonical alphabet order.
    pub fn bindings(&self) -> Vec<(QName, Value)> {
        (0..self.digits.len())
            .map(|i| (self.alphabet.entries[i].name.clone(), self.value_at(i)))
            .collect()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.bindings().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        Ok(())
    }
}
