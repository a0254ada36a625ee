//! Designs over a single shared `ok`/`ok′` pair, their localisation, and
//! the check and counterexample search for the localisation-of-designs
//! lemma `L(V, Pre ⊢ Post) = ¬L(V, ¬Pre) ⊢_V L(V, Post)`.
//!
//! The design alphabet is `{ok, ok′} ∪ base ∪ base′`; by canonical order
//! the state index is `ok + 2·ok′ + 4·b`, where `b` indexes the base
//! relation alphabet.

use std::sync::Arc;

use crate::alphabet::{Alphabet, Entry, Namespace, QName, State};
use crate::bits::Bits;
use crate::domain::Domain;
use crate::error::{AlgebraError, Result};
use crate::exec;
use crate::predicate::Predicate;
use crate::view::{self, localise_bits, View};

/// The `{ok, ok′}` alphabet.
pub fn ok_alphabet() -> Alphabet {
    Alphabet::new([
        Entry::new(QName::ok(), Domain::Bool),
        Entry::new(QName::ok().primed(), Domain::Bool),
    ])
    .expect("ok alphabet")
}

/// `pre ⊢ post = ok ∧ pre ⇒ ok′ ∧ post`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pred: Predicate,
    base: Arc<Alphabet>,
}

impl Design {
    /// Builds `pre ⊢ post` over `base` (unprimed; its primed twin is added).
    /// `pre` and `post` may range over any part of `base ∪ base′`.
    pub fn new(pre: &Predicate, post: &Predicate, base: &Alphabet) -> Result<Design> {
        if let Some(e) = base
            .entries()
            .iter()
            .find(|e| e.name.primed || e.name.ns == Namespace::Top)
        {
            return Err(AlgebraError::Shape(format!(
                "design base alphabet may not contain `{}`",
                e.name
            )));
        }
        let rel = Arc::new(base.with_primes()?);
        let pre = pre.lift(&rel)?;
        let post = post.lift(&rel)?;
        let full = Arc::new(ok_alphabet().union(&rel)?);
        let pred = Predicate::from_fn(&full, |i| {
            let ok = i & 1 == 1;
            let ok2 = i & 2 == 2;
            let b = i >> 2;
            !(ok && pre.contains(b)) || (ok2 && post.contains(b))
        })?;
        Ok(Design {
            pred,
            base: Arc::new(base.clone()),
        })
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    pub fn base(&self) -> &Arc<Alphabet> {
        &self.base
    }

    /// The base relation at fixed `ok`, `ok′`.
    pub fn slice(&self, ok: bool, ok_post: bool) -> Bits {
        let k = ok as usize + 2 * ok_post as usize;
        let n = self.pred.space_size() / 4;
        Bits::from_fn(n, |b| self.pred.contains(k + 4 * b))
    }
}

/// `pre ⊢ post`.
pub fn design(pre: &Predicate, post: &Predicate, base: &Alphabet) -> Result<Design> {
    Design::new(pre, post, base)
}

/// `∃ sys, sys′ · ΔV ∧ D`, keeping `ok` and `ok′`: a predicate over
/// `{ok, ok′} ∪ vu ∪ vu′`.
pub fn localise_design(v: &View, d: &Design) -> Result<Predicate> {
    if d.base() != v.sys() {
        return Err(AlgebraError::AlphabetMismatch {
            left: format!("design base {}", d.base()),
            right: v.sys().to_string(),
        });
    }
    let local = v.local_alphabet()?;
    let target = Arc::new(ok_alphabet().union(&local)?);
    let slices: Vec<Bits> = [(false, false), (true, false), (false, true), (true, true)]
        .iter()
        .map(|&(ok, ok2)| localise_bits(v, &d.slice(ok, ok2)))
        .collect::<Result<_>>()?;
    Predicate::from_fn(&target, |i| slices[i & 3].contains(i >> 2))
}

/// VHD reduces to VH once the view-level `ok` is identified with `ok`.
pub fn vhd(v: &View) -> Result<View> {
    view::vh(v)
}

/// Result of comparing both sides of the lemma.
#[derive(Debug, Clone)]
pub struct LemmaCheck {
    pub equal: bool,
    /// Least state of `{ok, ok′} ∪ vu ∪ vu′` where the sides differ.
    pub witness: Option<State>,
    /// Whether the witness belongs to the left-hand side.
    pub witness_in_lhs: bool,
    pub lhs: Predicate,
    pub rhs: Predicate,
}

/// Compares `L(V, pre ⊢ post)` with `¬L(V, ¬pre) ⊢_V L(V, post)`, both over
/// the one shared `ok`/`ok′` pair.
pub fn lemma335_check(v: &View, pre: &Predicate, post: &Predicate) -> Result<LemmaCheck> {
    if let Some(e) = pre
        .alphabet()
        .entries()
        .iter()
        .find(|e| e.name.primed || e.name.ns != Namespace::Sys)
    {
        return Err(AlgebraError::Shape(format!(
            "precondition may only mention unprimed system variables, found `{}`",
            e.name
        )));
    }
    let lhs = localise_design(v, &design(pre, post, v.sys())?)?;

    let prog = v.program_alphabet()?;
    let not_pre = pre.not().lift(&prog)?;
    let post = post.lift(&prog)?;
    let local = v.local_alphabet()?;
    let loc_not_pre = Predicate::from_bits(&local, localise_bits(v, not_pre.bits())?)?;
    let loc_post = Predicate::from_bits(&local, localise_bits(v, post.bits())?)?;
    let rhs = design(&loc_not_pre.not(), &loc_post, v.vu())?.pred;

    let eq = lhs.equal(&rhs)?;
    Ok(LemmaCheck {
        equal: eq.equal,
        witness: eq.witness,
        witness_in_lhs: eq.witness_in_left,
        lhs,
        rhs,
    })
}

/// `∃ sys, sys′ · ΔV` covers every view pair.
pub fn view_surjectivity(v: &View) -> bool {
    v.is_surjective()
}

/// Which views the search enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViewClass {
    /// VHD-healthy (total) views: the lemma's hypothesis.
    #[default]
    Healthy,
    All,
    Surjective,
}

impl ViewClass {
    fn admits(self, v: &View) -> bool {
        match self {
            ViewClass::Healthy => v.is_total(),
            ViewClass::All => true,
            ViewClass::Surjective => v.is_surjective(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_sys: usize,
    pub max_vu: usize,
    pub first_only: bool,
    pub class: ViewClass,
}

impl SearchBounds {
    pub fn new(max_sys: usize, max_vu: usize) -> Self {
        SearchBounds {
            max_sys,
            max_vu,
            first_only: false,
            class: ViewClass::Healthy,
        }
    }

    pub fn first(mut self) -> Self {
        self.first_only = true;
        self
    }

    pub fn class(mut self, class: ViewClass) -> Self {
        self.class = class;
        self
    }
}

/// A view, precondition and postcondition on which the two sides differ.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub sys_size: usize,
    pub vu_size: usize,
    pub view: View,
    pub pre: Predicate,
    pub post: Predicate,
    pub witness: State,
}

/// Most `(view, pre, post)` triples a search may visit.
pub const MAX_SEARCH_CHECKS: u128 = 1 << 22;

/// Small-model alphabets: `sys:x ∈ 0..n-1` and `vu:a ∈ 0..m-1`.
pub fn small_alphabets(n: usize, m: usize) -> Result<(Alphabet, Alphabet)> {
    let sys = Alphabet::new([Entry::new(QName::sys("x"), Domain::range(0, n as i64 - 1)?)])?;
    let vu = Alphabet::new([Entry::new(QName::vu("a"), Domain::range(0, m as i64 - 1)?)])?;
    Ok((sys, vu))
}

fn search_cost(bounds: &SearchBounds) -> Result<u128> {
    let mut total: u128 = 0;
    for n in 1..=bounds.max_sys {
        for m in 1..=bounds.max_vu {
            let bits = n * m + n + n * n;
            if n * m > 24 || n * n > 24 || bits > 60 {
                return Err(AlgebraError::SearchTooLarge(format!(
                    "|Sys| = {n}, |Vu| = {m} is beyond exhaustive reach; try smaller bounds"
                )));
            }
            total += 1u128 << bits;
        }
    }
    if total > MAX_SEARCH_CHECKS {
        return Err(AlgebraError::SearchTooLarge(format!(
            "{total} candidate triples exceed the limit of {MAX_SEARCH_CHECKS}; try smaller bounds"
        )));
    }
    Ok(total)
}

/// Exhaustive search over all small views, preconditions and
/// postconditions. Views are visited by size, then by extension read as a
/// binary number; pre- and postconditions from the full predicate down.
/// Output order does not depend on parallelism.
pub fn lemma335_search(bounds: &SearchBounds) -> Result<Vec<Counterexample>> {
    if bounds.max_sys == 0 || bounds.max_vu == 0 {
        return Err(AlgebraError::SearchTooLarge(
            "bounds must be at least 1".into(),
        ));
    }
    search_cost(bounds)?;
    let mut found = Vec::new();
    for n in 1..=bounds.max_sys {
        for m in 1..=bounds.max_vu {
            let (sys, vu) = small_alphabets(n, m)?;
            let view_alpha = Arc::new(sys.union(&vu)?);
            let sys = Arc::new(sys);
            let prog = Arc::new(sys.with_primes()?);
            let per_view = exec::map_range(1usize << (n * m), |bits| -> Result<Vec<Counterexample>> {
                let pred = Predicate::from_bits(&view_alpha, Bits::from_u64(n * m, bits as u64))?;
                let v = View::new(pred)?;
                if !bounds.class.admits(&v) {
                    return Ok(Vec::new());
                }
                let mut out = Vec::new();
                for pre_bits in (0..1u64 << n).rev() {
                    let pre = Predicate::from_bits(&sys, Bits::from_u64(n, pre_bits))?;
                    for post_bits in (0..1u64 << (n * n)).rev() {
                        let post = Predicate::from_bits(&prog, Bits::from_u64(n * n, post_bits))?;
                        let check = lemma335_check(&v, &pre, &post)?;
                        if !check.equal {
                            out.push(Counterexample {
                                sys_size: n,
                                vu_size: m,
                                view: v.clone(),
                                pre: pre.clone(),
                                post,
                                witness: check.witness.expect("unequal sides have a witness"),
                            });
                            if bounds.first_only {
                                return Ok(out);
                            }
                        }
                    }
                }
                Ok(out)
            });
            for r in per_view {
                let r = r?;
                if bounds.first_only && !r.is_empty() {
                    found.extend(r.into_iter().take(1));
                    return Ok(found);
                }
                found.extend(r);
            }
        }
    }
    Ok(found)
}
