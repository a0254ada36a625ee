//! Finite value domains.

use std::fmt;

use crate::error::AlgebraError;

/// A finite, enumerable set of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Integers `lo..=hi`.
    Range { lo: i64, hi: i64 },
    /// Distinct symbols in declaration order.
    Enum(Vec<String>),
    Bool,
}

/// A concrete value drawn from some [`Domain`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Sym(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl Domain {
    pub fn range(lo: i64, hi: i64) -> Result<Self, AlgebraError> {
        if lo > hi {
            return Err(AlgebraError::InvalidDomain(format!(
                "empty integer range {lo}..{hi}"
            )));
        }
        Ok(Domain::Range { lo, hi })
    }

    pub fn symbols<S: Into<String>>(
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self, AlgebraError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(AlgebraError::InvalidDomain(
                "enumeration needs at least one symbol".into(),
            ));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(AlgebraError::InvalidDomain(format!(
                    "duplicate symbol `{s}` in enumeration"
                )));
            }
        }
        Ok(Domain::Enum(symbols))
    }

    pub fn cardinality(&self) -> u64 {
        match self {
            Domain::Range { lo, hi } => (*hi as i128 - *lo as i128 + 1) as u64,
            Domain::Enum(s) => s.len() as u64,
            Domain::Bool => 2,
        }
    }

    /// The value at position `digit` in canonical order.
    pub fn value(&self, digit: u32) -> Value {
        match self {
            Domain::Range { lo, .. } => Value::Int(lo + digit as i64),
            Domain::Enum(s) => Value::Sym(s[digit as usize].clone()),
            Domain::Bool => Value::Bool(digit == 1),
        }
    }

    /// Position of `value` in canonical order, if it belongs to the domain.
    pub fn digit(&self, value: &Value) -> Option<u32> {
        match (self, value) {
            (Domain::Range { lo, hi }, Value::Int(i)) if lo <= i && i <= hi => {
                Some((i - lo) as u32)
            }
            (Domain::Enum(s), Value::Sym(v)) => s.iter().position(|x| x == v).map(|p| p as u32),
            (Domain::Bool, Value::Bool(b)) => Some(*b as u32),
            _ => None,
        }
    }

    /// All values in canonical order: integers ascending, symbols in
    /// declaration order, `false` before `true`.
    pub fn enumerate(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.cardinality() as u32).map(|d| self.value(d))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Range { lo, hi } => write!(f, "{lo}..{hi}"),
            Domain::Enum(s) => write!(f, "{{{}}}", s.join(", ")),
            Domain::Bool => f.write_str("bool"),
        }
    }
}
