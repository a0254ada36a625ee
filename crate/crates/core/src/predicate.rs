//! Extensional predicates and the operations on them.
//!
//! A predicate is a set of states of one alphabet. All operations work on
//! the extension; the optional source expression is kept for display only.

use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Alphabet, QName, State};
use crate::bits::Bits;
use crate::domain::Value;
use crate::error::{AlgebraError, Result};
use crate::expr::{Compiled, Expr, Ty};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Not,
    Implies,
    Iff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
    /// Exactly one witness.
    Unique,
}

/// Outcome of an extensional comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equality {
    pub equal: bool,
    /// Least state (by index) on which the two sides disagree.
    pub witness: Option<State>,
    /// Whether the witness belongs to the left-hand side.
    pub witness_in_left: bool,
}

#[derive(Clone)]
pub struct Predicate {
    alphabet: Arc<Alphabet>,
    bits: Bits,
    source: Option<Arc<Expr>>,
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.bits == other.bits
    }
}

impl Eq for Predicate {}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({} over {})", self, self.alphabet)
    }
}

fn mismatch(a: &Alphabet, b: &Alphabet) -> AlgebraError {
    AlgebraError::AlphabetMismatch {
        left: a.to_string(),
        right: b.to_string(),
    }
}

impl Predicate {
    pub fn empty(alphabet: &Arc<Alphabet>) -> Result<Self> {
        Ok(Self::from_bits_unchecked(alphabet, Bits::empty(alphabet.checked_size()?)))
    }

    pub fn full(alphabet: &Arc<Alphabet>) -> Result<Self> {
        Ok(Self::from_bits_unchecked(alphabet, Bits::full(alphabet.checked_size()?)))
    }

    /// Predicate whose extension is `{ i | f(i) }`.
    pub fn from_fn<F>(alphabet: &Arc<Alphabet>, f: F) -> Result<Self>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        let n = alphabet.checked_size()?;
        Ok(Self::from_bits_unchecked(alphabet, Bits::from_fn(n, f)))
    }

    pub fn from_bits(alphabet: &Arc<Alphabet>, bits: Bits) -> Result<Self> {
        let n = alphabet.checked_size()?;
        if bits.len() != n {
            return Err(AlgebraError::Shape(format!(
                "extension of length {} does not fit alphabet of {n} states",
                bits.len()
            )));
        }
        Ok(Self::from_bits_unchecked(alphabet, bits))
    }

    pub(crate) fn from_bits_unchecked(alphabet: &Arc<Alphabet>, bits: Bits) -> Self {
        Predicate {
            alphabet: Arc::clone(alphabet),
            bits,
            source: None,
        }
    }

    pub fn from_indices(
        alphabet: &Arc<Alphabet>,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let n = alphabet.checked_size()?;
        let mut bits = Bits::empty(n);
        for i in indices {
            if i >= n {
                return Err(AlgebraError::Shape(format!("state index {i} out of range {n}")));
            }
            bits.insert(i);
        }
        Ok(Self::from_bits_unchecked(alphabet, bits))
    }

    /// The singleton `{ state }`.
    pub fn point(state: &State) -> Result<Self> {
        Self::from_indices(state.alphabet(), [state.index()])
    }

    /// `{ s | expr(s) }`; the expression becomes the display source.
    pub fn extensionalize(expr: &Expr, alphabet: &Arc<Alphabet>) -> Result<Self> {
        alphabet.checked_size()?;
        let c = Compiled::new(expr, alphabet)?;
        if c.ty() != &Ty::Bool {
            return Err(AlgebraError::Type(format!(
                "predicate `{expr}` has type {}, expected boolean",
                c.ty()
            )));
        }
        let mut p = Self::from_fn(alphabet, |i| c.holds_at(i))?;
        p.source = Some(Arc::new(expr.clone()));
        Ok(p)
    }

    pub fn with_source(mut self, expr: Expr) -> Self {
        self.source = Some(Arc::new(expr));
        self
    }

    pub fn without_source(mut self) -> Self {
        self.source = None;
        self
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn source(&self) -> Option<&Expr> {
        self.source.as_deref()
    }

    pub fn space_size(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn contains_state(&self, state: &State) -> Result<bool> {
        if state.alphabet() != &self.alphabet {
            return Err(mismatch(state.alphabet(), &self.alphabet));
        }
        Ok(self.bits.contains(state.index()))
    }

    /// Member states in ascending index order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        self.bits.ones().map(|i| self.alphabet.state(i))
    }

    fn same_alphabet(&self, other: &Predicate) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(mismatch(&self.alphabet, &other.alphabet));
        }
        Ok(())
    }

    /// Applies a connective. `q` is required for every connective but `Not`.
    pub fn combine(op: Connective, p: &Predicate, q: Option<&Predicate>) -> Result<Predicate> {
        if op == Connective::Not {
            return Ok(p.not());
        }
        let q = q.ok_or_else(|| {
            AlgebraError::Shape(format!("{op:?} needs two operands"))
        })?;
        p.same_alphabet(q)?;
        let bits = match op {
            Connective::And => p.bits.and(&q.bits),
            Connective::Or => p.bits.or(&q.bits),
            Connective::Implies => p.bits.implies(&q.bits),
            Connective::Iff => p.bits.iff(&q.bits),
            Connective::Not => unreachable!(),
        };
        Ok(Self::from_bits_unchecked(&p.alphabet, bits))
    }

    pub fn and(&self, q: &Predicate) -> Result<Predicate> {
        Self::combine(Connective::And, self, Some(q))
    }

    pub fn or(&self, q: &Predicate) -> Result<Predicate> {
        Self::combine(Connective::Or, self, Some(q))
    }

    pub fn implies(&self, q: &Predicate) -> Result<Predicate> {
        Self::combine(Connective::Implies, self, Some(q))
    }

    pub fn iff(&self, q: &Predicate) -> Result<Predicate> {
        Self::combine(Connective::Iff, self, Some(q))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(&self) -> Predicate {
        Self::from_bits_unchecked(&self.alphabet, self.bits.not())
    }

    /// Cylindric quantification: the alphabet is kept, and membership of a
    /// state depends only on its non-quantified coordinates.
    pub fn quantify(&self, kind: Quantifier, vars: &[QName]) -> Result<Predicate> {
        let mut positions = Vec::new();
        for v in vars {
            let pos = self
                .alphabet
                .position(v)
                .ok_or_else(|| AlgebraError::UnknownVariable(v.to_string()))?;
            if !positions.contains(&pos) {
                positions.push(pos);
            }
        }
        // Offsets of every assignment to the quantified coordinates.
        let mut offsets = vec![0usize];
        for &pos in &positions {
            let stride = self.alphabet.stride(pos);
            offsets = (0..self.alphabet.radix(pos))
                .flat_map(|d| offsets.iter().map(move |o| o + d * stride))
                .collect();
        }
        let alphabet = &self.alphabet;
        let bits = &self.bits;
        Self::from_fn(alphabet, |i| {
            let base = i - positions
                .iter()
                .map(|&p| alphabet.digit(i, p) as usize * alphabet.stride(p))
                .sum::<usize>();
            match kind {
                Quantifier::Exists => offsets.iter().any(|o| bits.contains(base + o)),
                Quantifier::Forall => offsets.iter().all(|o| bits.contains(base + o)),
                Quantifier::Unique => {
                    let mut seen = 0;
                    for o in &offsets {
                        if bits.contains(base + o) {
                            seen += 1;
                            if seen > 1 {
                                break;
                            }
                        }
                    }
                    seen == 1
                }
            }
        })
    }

    pub fn exists(&self, vars: &[QName]) -> Result<Predicate> {
        self.quantify(Quantifier::Exists, vars)
    }

    pub fn forall(&self, vars: &[QName]) -> Result<Predicate> {
        self.quantify(Quantifier::Forall, vars)
    }

    pub fn unique(&self, vars: &[QName]) -> Result<Predicate> {
        self.quantify(Quantifier::Unique, vars)
    }

    /// For each entry of `self.alphabet`, its position in `target`.
    fn embedding(&self, target: &Alphabet) -> Result<Vec<usize>> {
        self.alphabet
            .entries()
            .iter()
            .map(|e| {
                let not_embeddable = |reason: String| AlgebraError::NotEmbeddable {
                    from: self.alphabet.to_string(),
                    into: target.to_string(),
                    reason,
                };
                let pos = target
                    .position(&e.name)
                    .ok_or_else(|| not_embeddable(format!("`{}` is missing", e.name)))?;
                if target.entries()[pos].domain != e.domain {
                    return Err(not_embeddable(format!(
                        "`{}` has domain {} but target has {}",
                        e.name,
                        e.domain,
                        target.entries()[pos].domain
                    )));
                }
                Ok(pos)
            })
            .collect()
    }

    /// Alphabet extrusion: the cylinder of `self` over a larger alphabet.
    pub fn lift(&self, target: &Arc<Alphabet>) -> Result<Predicate> {
        if &self.alphabet == target {
            return Ok(self.clone());
        }
        let embed = self.embedding(target)?;
        let src = &self.alphabet;
        let bits = &self.bits;
        let mut p = Self::from_fn(target, |t| {
            let s: usize = embed
                .iter()
                .enumerate()
                .map(|(j, &pos)| target.digit(t, pos) as usize * src.stride(j))
                .sum();
            bits.contains(s)
        })?;
        p.source = self.source.clone();
        Ok(p)
    }

    /// Existential projection onto a sub-alphabet.
    pub fn project(&self, sub: &Arc<Alphabet>) -> Result<Predicate> {
        if &self.alphabet == sub {
            return Ok(self.clone());
        }
        let embed = Predicate::empty(sub)?.embedding(&self.alphabet)?;
        let mut bits = Bits::empty(sub.checked_size()?);
        for i in self.bits.ones() {
            let s: usize = embed
                .iter()
                .enumerate()
                .map(|(j, &pos)| self.alphabet.digit(i, pos) as usize * sub.stride(j))
                .sum();
            bits.insert(s);
        }
        Ok(Self::from_bits_unchecked(sub, bits))
    }

    /// Renames variables by a bijection; unmapped variables keep their name.
    pub fn rename(&self, mapping: &[(QName, QName)]) -> Result<Predicate> {
        for (i, (from, _)) in mapping.iter().enumerate() {
            if !self.alphabet.contains(from) {
                return Err(AlgebraError::UnknownVariable(from.to_string()));
            }
            if mapping[..i].iter().any(|(f, _)| f == from) {
                return Err(AlgebraError::InvalidRenaming(format!("`{from}` is mapped twice")));
            }
        }
        let renamed: Vec<_> = self
            .alphabet
            .entries()
            .iter()
            .map(|e| {
                let name = mapping
                    .iter()
                    .find(|(f, _)| f == &e.name)
                    .map(|(_, t)| t.clone())
                    .unwrap_or_else(|| e.name.clone());
                crate::alphabet::Entry::new(name, e.domain.clone())
            })
            .collect();
        let target = Arc::new(
            Alphabet::with_limit(renamed.clone(), self.alphabet.limit()).map_err(|e| match e {
                AlgebraError::DuplicateVariable(v) => {
                    AlgebraError::InvalidRenaming(format!("renaming is not injective at `{v}`"))
                }
                other => other,
            })?,
        );
        // Old entry j becomes renamed[j] at some position in the target.
        let embed: Vec<usize> = renamed
            .iter()
            .map(|e| target.position(&e.name).expect("renamed entry present"))
            .collect();
        let src = &self.alphabet;
        let bits = &self.bits;
        Self::from_fn(&target, |t| {
            let s: usize = embed
                .iter()
                .enumerate()
                .map(|(j, &pos)| target.digit(t, pos) as usize * src.stride(j))
                .sum();
            bits.contains(s)
        })
    }

    /// Renames every variable to its primed twin.
    pub fn prime(&self) -> Result<Predicate> {
        let mapping: Vec<_> = self
            .alphabet
            .names()
            .map(|n| {
                if n.primed {
                    Err(AlgebraError::Shape(format!("`{n}` is already primed")))
                } else {
                    Ok((n.clone(), n.primed()))
                }
            })
            .collect::<Result<_>>()?;
        self.rename(&mapping)
    }

    /// `self ∧ self′` over an unprimed alphabet and its primed twin.
    pub fn delta(&self) -> Result<Predicate> {
        let both = Arc::new(self.alphabet.with_primes()?);
        let before = self.lift(&both)?;
        let after = self.prime()?.lift(&both)?;
        before.and(&after)
    }

    /// Extensional equality with the least disagreeing state as witness.
    pub fn equal(&self, other: &Predicate) -> Result<Equality> {
        self.same_alphabet(other)?;
        Ok(match self.bits.first_difference(&other.bits) {
            None => Equality {
                equal: true,
                witness: None,
                witness_in_left: false,
            },
            Some(i) => Equality {
                equal: false,
                witness: Some(self.alphabet.state(i)),
                witness_in_left: self.bits.contains(i),
            },
        })
    }

    /// `None` if `self ⊆ other`, else the least state of `self \ other`.
    pub fn subset_witness(&self, other: &Predicate) -> Result<Option<State>> {
        self.same_alphabet(other)?;
        Ok(self
            .bits
            .first_outside(&other.bits)
            .map(|i| self.alphabet.state(i)))
    }

    pub fn is_subset(&self, other: &Predicate) -> Result<bool> {
        self.same_alphabet(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// Extension as a disjunction of state conjunctions, ascending by index.
    pub fn to_dnf(&self) -> String {
        if self.is_empty() {
            return "false".into();
        }
        if self.is_full() {
            return "true".into();
        }
        let clauses: Vec<String> = self
            .states()
            .map(|s| {
                let lits: Vec<String> = s
                    .bindings()
                    .into_iter()
                    .map(|(n, v)| match v {
                        Value::Bool(true) => format!("{n}"),
                        Value::Bool(false) => format!("!{n}"),
                        v => format!("{n} == {v}"),
                    })
                    .collect();
                if lits.len() == 1 {
                    lits.into_iter().next().unwrap()
                } else {
                    format!("({})", lits.join(" && "))
                }
            })
            .collect();
        clauses.join(" || ")
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(e) => write!(f, "{e}"),
            None => f.write_str(&self.to_dnf()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Entry;
    use crate::domain::Domain;

    fn alpha(vars: &[(&str, i64, i64)]) -> Arc<Alphabet> {
        Arc::new(
            Alphabet::new(
                vars.iter()
                    .map(|(n, lo, hi)| Entry::new(QName::sys(*n), Domain::range(*lo, *hi).unwrap())),
            )
            .unwrap(),
        )
    }

    #[test]
    fn extensionalize_counts_solutions() {
        let a = alpha(&[("x", -2, 12), ("y", -2, 12)]);
        let e = Expr::all([
            Expr::sys("x").ge(Expr::int(0)),
            Expr::sys("y").ge(Expr::int(0)),
            Expr::sys("x").plus(Expr::sys("y")).equals(Expr::int(10)),
        ]);
        let p = Predicate::extensionalize(&e, &a).unwrap();
        // Brute force over all 15 × 15 states.
        let mut expected = Vec::new();
        for y in -2..=12i64 {
            for x in -2..=12i64 {
                if x >= 0 && y >= 0 && x + y == 10 {
                    expected.push(((x + 2) + 15 * (y + 2)) as usize);
                }
            }
        }
        assert_eq!(expected.len(), 11);
        assert_eq!(p.bits().ones().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn extensionalize_literals() {
        let a = alpha(&[("x", 0, 3)]);
        assert!(Predicate::extensionalize(&Expr::Bool(false), &a).unwrap().is_empty());
        let b = Arc::new(Alphabet::new([Entry::new(QName::sys("b"), Domain::Bool)]).unwrap());
        assert_eq!(Predicate::extensionalize(&Expr::Bool(true), &b).unwrap().count(), 2);
        assert!(matches!(
            Predicate::extensionalize(&Expr::sys("x"), &a),
            Err(AlgebraError::Type(_))
        ));
    }

    #[test]
    fn connective_identities() {
        let a = alpha(&[("x", 0, 9)]);
        let p = Predicate::extensionalize(&Expr::sys("x").lt(Expr::int(4)), &a).unwrap();
        assert!(p.and(&p.not()).unwrap().is_empty());
        assert!(p.or(&p.not()).unwrap().is_full());
        let empty = Predicate::empty(&a).unwrap();
        assert!(empty.implies(&p).unwrap().is_full());
    }

    #[test]
    fn combine_rejects_mismatched_alphabets() {
        let a = alpha(&[("x", 0, 9)]);
        let b = alpha(&[("y", 0, 9)]);
        let err = Predicate::full(&a).unwrap().and(&Predicate::full(&b).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sys:x") && msg.contains("sys:y"), "{msg}");
    }

    #[test]
    fn quantifier_examples() {
        let a = alpha(&[("x", 0, 9)]);
        let p = Predicate::extensionalize(&Expr::sys("x").equals(Expr::int(5)), &a).unwrap();
        assert!(p.exists(&[QName::sys("x")]).unwrap().is_full());

        let b = alpha(&[("x", -2, 12)]);
        let q = Predicate::extensionalize(&Expr::sys("x").ge(Expr::int(0)), &b).unwrap();
        assert!(q.forall(&[QName::sys("x")]).unwrap().is_empty());

        let c = alpha(&[("x", -2, 12), ("y", -2, 12)]);
        let r = Predicate::extensionalize(
            &Expr::sys("x").plus(Expr::sys("y")).equals(Expr::int(10)),
            &c,
        )
        .unwrap();
        // Per-x brute force: exactly one y in -2..12 solves x + y = 10.
        for x in -2..=12i64 {
            let sols = (-2..=12i64).filter(|y| x + y == 10).count();
            assert_eq!(sols, 1, "x = {x}");
        }
        assert!(r.unique(&[QName::sys("y")]).unwrap().is_full());
        assert!(matches!(
            r.exists(&[QName::sys("z")]),
            Err(AlgebraError::UnknownVariable(_))
        ));
    }

    #[test]
    fn lift_examples() {
        let x = alpha(&[("x", 0, 1)]);
        let xy = alpha(&[("x", 0, 1), ("y", 0, 1)]);
        let p = Predicate::extensionalize(&Expr::sys("x").equals(Expr::int(0)), &x).unwrap();
        assert_eq!(p.lift(&xy).unwrap().count(), 2);
        assert!(Predicate::full(&x).unwrap().lift(&xy).unwrap().is_full());
        let other = alpha(&[("x", 0, 2), ("y", 0, 1)]);
        assert!(matches!(p.lift(&other), Err(AlgebraError::NotEmbeddable { .. })));
        let missing = alpha(&[("y", 0, 1)]);
        assert!(matches!(p.lift(&missing), Err(AlgebraError::NotEmbeddable { .. })));
    }

    #[test]
    fn rename_and_prime() {
        let x = alpha(&[("x", 0, 9)]);
        let p = Predicate::extensionalize(&Expr::sys("x").equals(Expr::int(5)), &x).unwrap();
        let pp = p.prime().unwrap();
        assert_eq!(pp.alphabet().names().next().unwrap(), &QName::sys("x").primed());
        assert_eq!(pp.count(), p.count());
        let w = pp.states().next().unwrap();
        assert_eq!(w.value(&QName::sys("x").primed()), Some(Value::Int(5)));

        let xy = alpha(&[("x", 0, 2), ("y", 0, 2)]);
        let q = Predicate::extensionalize(&Expr::sys("x").lt(Expr::sys("y")), &xy).unwrap();
        let swap = [(QName::sys("x"), QName::sys("y")), (QName::sys("y"), QName::sys("x"))];
        let once = q.rename(&swap).unwrap();
        assert_ne!(once, q);
        assert_eq!(once.rename(&swap).unwrap(), q);
        let bad = [(QName::sys("x"), QName::sys("y"))];
        assert!(matches!(q.rename(&bad), Err(AlgebraError::InvalidRenaming(_))));
    }

    #[test]
    fn equality_and_witness() {
        let a = alpha(&[("x", -2, 12)]);
        let p = Predicate::extensionalize(
            &Expr::sys("x").ge(Expr::int(0)).and(Expr::sys("x").le(Expr::int(1))),
            &a,
        )
        .unwrap();
        let q = Predicate::extensionalize(
            &Expr::sys("x").equals(Expr::int(0)).or(Expr::sys("x").equals(Expr::int(1))),
            &a,
        )
        .unwrap();
        assert!(p.equal(&q).unwrap().equal);
        let neq = p.equal(&p.not()).unwrap();
        assert!(!neq.equal);
        assert_eq!(neq.witness.unwrap().index(), 0);
        assert!(!neq.witness_in_left);
    }

    #[test]
    fn display_dnf_and_constants() {
        let a = alpha(&[("x", 0, 2)]);
        assert_eq!(Predicate::empty(&a).unwrap().to_string(), "false");
        assert_eq!(Predicate::full(&a).unwrap().to_string(), "true");
        let p = Predicate::from_indices(&a, [0, 2]).unwrap();
        assert_eq!(p.to_string(), "sys:x == 0 || sys:x == 2");
    }
}
