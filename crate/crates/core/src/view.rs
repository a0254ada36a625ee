//! Views and the operators over them: Δ, localisation, globalisation,
//! inference and the view healthiness conditions.
//!
//! A view relates system states to view states and carries a single,
//! unprimed copy of each variable; Δ builds the before/after pairing.
//! Operator results are cylinders over the full viewed alphabet
//! `sys ∪ sys′ ∪ vu ∪ vu′`. They are stored as [`ViewedRelation`]s, which
//! keep only the predicate over the coordinates the result depends on, so
//! that viewed spaces far beyond the materialisation limit stay tractable.
//!
//! The kernels use the factorisation `ΔV(s, u, s′, u′) = V(s, u) ∧ V(s′, u′)`
//! together with the canonical state layout: in `sys ∪ vu` the index is
//! `s + |S|·u`, in `sys ∪ sys′` it is `s + |S|·s′` and in `vu ∪ vu′` it is
//! `u + |U|·u′`.

use std::sync::{Arc, OnceLock};

use crate::alphabet::{Alphabet, Namespace, QName, State};
use crate::bits::Bits;
use crate::error::{AlgebraError, Result};
use crate::exec;
use crate::expr::Expr;
use crate::predicate::{Equality, Predicate};

fn shape(msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Shape(msg.into())
}

fn mismatch(what: &str, a: &Alphabet, b: &Alphabet) -> AlgebraError {
    AlgebraError::AlphabetMismatch {
        left: format!("{what} {a}"),
        right: b.to_string(),
    }
}

/// Checks that `alphabet` holds exactly an unprimed `ns` alphabet and its
/// primed twin, returning the unprimed half.
fn relation_base(alphabet: &Alphabet, ns: Namespace, what: &str) -> Result<Arc<Alphabet>> {
    if let Some(e) = alphabet.entries().iter().find(|e| e.name.ns != ns) {
        return Err(shape(format!("{what} may not mention `{}`", e.name)));
    }
    let base = alphabet.unprimed();
    let twins = base.with_primes()?;
    if &twins != alphabet {
        return Err(shape(format!(
            "{what} alphabet {alphabet} must pair every variable with its primed twin"
        )));
    }
    Ok(Arc::new(base))
}

/// A relation between system states and view states.
#[derive(Clone)]
pub struct View {
    pred: Predicate,
    sys: Arc<Alphabet>,
    vu: Arc<Alphabet>,
    images: Arc<OnceLock<Vec<Vec<u32>>>>,
}

impl PartialEq for View {
    fn eq(&self, other: &Self) -> bool {
        self.pred == other.pred
    }
}

impl std::fmt::Debug for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "View({:?})", self.pred)
    }
}

impl View {
    /// Wraps a predicate over unprimed `sys` and `vu` variables.
    pub fn new(pred: Predicate) -> Result<Self> {
        let a = pred.alphabet();
        if let Some(e) = a.entries().iter().find(|e| e.name.primed) {
            return Err(shape(format!(
                "view alphabet may only contain unprimed variables, found `{}`",
                e.name
            )));
        }
        if let Some(e) = a.entries().iter().find(|e| e.name.ns == Namespace::Top) {
            return Err(shape(format!("view may not mention `{}`", e.name)));
        }
        let sys = Arc::new(a.namespace(Namespace::Sys));
        let vu = Arc::new(a.namespace(Namespace::Vu));
        Ok(View {
            pred,
            sys,
            vu,
            images: Arc::new(OnceLock::new()),
        })
    }

    pub fn from_expr(expr: &Expr, sys: &Alphabet, vu: &Alphabet) -> Result<Self> {
        let a = Arc::new(sys.union(vu)?);
        View::new(Predicate::extensionalize(expr, &a)?)
    }

    /// Every system state related to every view state.
    pub fn everything(sys: &Alphabet, vu: &Alphabet) -> Result<Self> {
        let a = Arc::new(sys.union(vu)?);
        View::new(Predicate::full(&a)?)
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    pub fn sys(&self) -> &Arc<Alphabet> {
        &self.sys
    }

    pub fn vu(&self) -> &Arc<Alphabet> {
        &self.vu
    }

    pub fn sys_size(&self) -> usize {
        self.sys.size() as usize
    }

    pub fn vu_size(&self) -> usize {
        self.vu.size() as usize
    }

    pub fn relates(&self, s: usize, u: usize) -> bool {
        self.pred.contains(s + self.sys_size() * u)
    }

    /// For each system state, the view states it is related to.
    pub fn images(&self) -> &[Vec<u32>] {
        self.images.get_or_init(|| {
            let (ns, nu) = (self.sys_size(), self.vu_size());
            exec::map_range(ns, |s| {
                (0..nu)
                    .filter(|&u| self.pred.contains(s + ns * u))
                    .map(|u| u as u32)
                    .collect()
            })
        })
    }

    pub fn program_alphabet(&self) -> Result<Arc<Alphabet>> {
        Ok(Arc::new(self.sys.with_primes()?))
    }

    pub fn local_alphabet(&self) -> Result<Arc<Alphabet>> {
        Ok(Arc::new(self.vu.with_primes()?))
    }

    /// `sys ∪ sys′ ∪ vu ∪ vu′`.
    pub fn viewed_alphabet(&self) -> Result<Arc<Alphabet>> {
        Ok(Arc::new(self.program_alphabet()?.union(&*self.local_alphabet()?)?))
    }

    /// Every system state has at least one related view state.
    pub fn is_total(&self) -> bool {
        self.images().iter().all(|img| !img.is_empty())
    }

    /// Every system state has exactly one related view state.
    pub fn is_functional(&self) -> bool {
        self.images().iter().all(|img| img.len() == 1)
    }

    /// Every view state is related to at least one system state.
    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.vu_size()];
        for img in self.images() {
            for &u in img {
                hit[u as usize] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    fn check_sys(&self, other: &Alphabet) -> Result<()> {
        if other != &*self.sys {
            return Err(mismatch("system alphabet", other, &self.sys));
        }
        Ok(())
    }

    fn check_vu(&self, other: &Alphabet) -> Result<()> {
        if other != &*self.vu {
            return Err(mismatch("view alphabet", other, &self.vu));
        }
        Ok(())
    }
}

/// A relation over `sys ∪ sys′`: the behaviour of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pred: Predicate,
    sys: Arc<Alphabet>,
}

impl Program {
    pub fn new(pred: Predicate) -> Result<Self> {
        let sys = relation_base(pred.alphabet(), Namespace::Sys, "program")?;
        Ok(Program { pred, sys })
    }

    pub fn from_expr(expr: &Expr, sys: &Alphabet) -> Result<Self> {
        let a = Arc::new(sys.with_primes()?);
        Program::new(Predicate::extensionalize(expr, &a)?)
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    /// The unprimed system alphabet.
    pub fn sys(&self) -> &Arc<Alphabet> {
        &self.sys
    }

    /// Initial states: the projection onto unprimed system variables.
    pub fn initials(&self) -> Result<Predicate> {
        self.pred.project(&self.sys)
    }
}

/// Condition-to-relation lifting: `c(s) ∧ c(s′)`.
pub fn delta_cond(c: &Predicate) -> Result<Program> {
    if let Some(e) = c
        .alphabet()
        .entries()
        .iter()
        .find(|e| e.name.ns != Namespace::Sys || e.name.primed)
    {
        return Err(shape(format!(
            "condition may only mention unprimed system variables, found `{}`",
            e.name
        )));
    }
    Program::new(c.delta()?)
}

/// A relation over `vu ∪ vu′`: an interaction or an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRelation {
    pred: Predicate,
    vu: Arc<Alphabet>,
}

/// Observations share the shape of local relations.
pub type Observation = LocalRelation;

impl LocalRelation {
    pub fn new(pred: Predicate) -> Result<Self> {
        let vu = relation_base(pred.alphabet(), Namespace::Vu, "local relation")?;
        Ok(LocalRelation { pred, vu })
    }

    pub fn from_expr(expr: &Expr, vu: &Alphabet) -> Result<Self> {
        let a = Arc::new(vu.with_primes()?);
        LocalRelation::new(Predicate::extensionalize(expr, &a)?)
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    pub fn vu(&self) -> &Arc<Alphabet> {
        &self.vu
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(&self) -> LocalRelation {
        LocalRelation {
            pred: self.pred.not(),
            vu: Arc::clone(&self.vu),
        }
    }
}

/// A cylinder over the full viewed alphabet, stored as its support.
#[derive(Debug, Clone)]
pub struct ViewedRelation {
    full: Arc<Alphabet>,
    support: Predicate,
}

impl ViewedRelation {
    pub fn new(full: &Arc<Alphabet>, support: Predicate) -> Result<Self> {
        if !support.alphabet().is_subset_of(full) {
            return Err(AlgebraError::NotEmbeddable {
                from: support.alphabet().to_string(),
                into: full.to_string(),
                reason: "support is not a sub-alphabet".into(),
            });
        }
        Ok(ViewedRelation {
            full: Arc::clone(full),
            support,
        })
    }

    pub fn full_alphabet(&self) -> &Arc<Alphabet> {
        &self.full
    }

    /// The predicate over the coordinates this relation depends on.
    pub fn support(&self) -> &Predicate {
        &self.support
    }

    /// Materialises the cylinder over the full alphabet (subject to the
    /// state-space limit).
    pub fn to_predicate(&self) -> Result<Predicate> {
        self.support.lift(&self.full)
    }

    fn common(&self, other: &ViewedRelation) -> Result<(Predicate, Predicate)> {
        if self.full != other.full {
            return Err(AlgebraError::AlphabetMismatch {
                left: self.full.to_string(),
                right: other.full.to_string(),
            });
        }
        let a = self.support.alphabet();
        let b = other.support.alphabet();
        let joint = if a == b {
            Arc::clone(a)
        } else {
            // Keep the full alphabet's canonical order.
            Arc::new(self.full.filter(|n| a.contains(n) || b.contains(n)))
        };
        Ok((self.support.lift(&joint)?, other.support.lift(&joint)?))
    }

    /// Extensional equality as cylinders. The witness ranges over the
    /// union of both supports; other coordinates are irrelevant.
    pub fn equal(&self, other: &ViewedRelation) -> Result<Equality> {
        let (a, b) = self.common(other)?;
        a.equal(&b)
    }

    /// `None` if `self ⊆ other`, else a least witness of `self \ other`.
    pub fn subset_witness(&self, other: &ViewedRelation) -> Result<Option<State>> {
        let (a, b) = self.common(other)?;
        a.subset_witness(&b)
    }

    pub fn is_subset(&self, other: &ViewedRelation) -> Result<bool> {
        Ok(self.subset_witness(other)?.is_none())
    }

    /// Existential projection onto a sub-alphabet of the full alphabet.
    pub fn project(&self, sub: &Arc<Alphabet>) -> Result<Predicate> {
        let joint = Arc::new(
            self.full
                .filter(|n| sub.contains(n) || self.support.alphabet().contains(n)),
        );
        self.support.lift(&joint)?.project(sub)
    }

    pub fn to_local(&self) -> Result<LocalRelation> {
        let sub = Arc::new(
            self.full
                .filter(|n| n.ns == Namespace::Vu),
        );
        LocalRelation::new(self.project(&sub)?)
    }

    pub fn to_program(&self) -> Result<Program> {
        let sub = Arc::new(self.full.filter(|n| n.ns == Namespace::Sys));
        Program::new(self.project(&sub)?)
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.support.is_full()
    }
}

/// `ΔV = V ∧ V′` over the full viewed alphabet.
pub fn delta(v: &View) -> Result<ViewedRelation> {
    let full = v.viewed_alphabet()?;
    let (ns, nu) = (v.sys_size(), v.vu_size());
    let support = Predicate::from_fn(&full, |i| {
        let s = i % ns;
        let s2 = (i / ns) % ns;
        let rest = i / (ns * ns);
        let u = rest % nu;
        let u2 = rest / nu;
        v.relates(s, u) && v.relates(s2, u2)
    })?;
    ViewedRelation::new(&full, support)
}

/// `L(V, P) = ∃ sys, sys′ · ΔV ∧ P`.
pub fn localise(v: &View, p: &Program) -> Result<ViewedRelation> {
    v.check_sys(p.sys())?;
    let local = v.local_alphabet()?;
    let bits = localise_bits(v, p.predicate().bits())?;
    ViewedRelation::new(&v.viewed_alphabet()?, Predicate::from_bits(&local, bits)?)
}

/// Image of a `sys ∪ sys′` extension through ΔV, as a `vu ∪ vu′` extension.
pub(crate) fn localise_bits(v: &View, prog: &Bits) -> Result<Bits> {
    let local_size = v.local_alphabet()?.checked_size()?;
    let (ns, nu) = (v.sys_size(), v.vu_size());
    let images = v.images();
    Ok(exec::fold_range(
        ns,
        || Bits::empty(local_size),
        |mut acc, s| {
            if images[s].is_empty() {
                return acc;
            }
            for s2 in 0..ns {
                if !prog.contains(s + ns * s2) {
                    continue;
                }
                for &u in &images[s] {
                    for &u2 in &images[s2] {
                        acc.insert(u as usize + nu * u2 as usize);
                    }
                }
            }
            acc
        },
        |mut a, b| {
            a.or_assign(&b);
            a
        },
    ))
}

/// `G(V, U) = ∀ vu, vu′ · ΔV ⇒ U`.
pub fn globalise(v: &View, u: &LocalRelation) -> Result<ViewedRelation> {
    v.check_vu(u.vu())?;
    let prog = v.program_alphabet()?;
    let bits = globalise_bits(v, u.predicate().bits())?;
    ViewedRelation::new(&v.viewed_alphabet()?, Predicate::from_bits(&prog, bits)?)
}

pub(crate) fn globalise_bits(v: &View, local: &Bits) -> Result<Bits> {
    let n = v.program_alphabet()?.checked_size()?;
    let (ns, nu) = (v.sys_size(), v.vu_size());
    let images = v.images();
    Ok(Bits::from_fn(n, |i| {
        let (s, s2) = (i % ns, i / ns);
        images[s].iter().all(|&u| {
            images[s2]
                .iter()
                .all(|&u2| local.contains(u as usize + nu * u2 as usize))
        })
    }))
}

/// `infer(P, V, ψ) = P ∧ ¬G(V, ¬ψ)`.
pub fn infer(p: &Program, v: &View, psi: &Observation) -> Result<ViewedRelation> {
    v.check_sys(p.sys())?;
    let g = globalise(v, &psi.not())?;
    let support = p.predicate().and(&g.support().not())?;
    ViewedRelation::new(&v.viewed_alphabet()?, support)
}

/// View healthiness transformers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Healthiness {
    /// `(∃ vu · V) ⇒ V`.
    Vh1,
    /// Identity: views have no primed variables by construction.
    Vh2,
    /// `(∃₁ vu · V) ⇒ V`.
    Vh3,
    /// `VH1 ∘ VH2`.
    Vh,
}

impl Healthiness {
    pub fn name(self) -> &'static str {
        match self {
            Healthiness::Vh1 => "VH1",
            Healthiness::Vh2 => "VH2",
            Healthiness::Vh3 => "VH3",
            Healthiness::Vh => "VH",
        }
    }

    pub fn apply(self, v: &View) -> Result<View> {
        match self {
            Healthiness::Vh1 => vh1(v),
            Healthiness::Vh2 => Ok(vh2(v)),
            Healthiness::Vh3 => vh3(v),
            Healthiness::Vh => vh(v),
        }
    }
}

fn vu_names(v: &View) -> Vec<QName> {
    v.vu.names().cloned().collect()
}

pub fn vh1(v: &View) -> Result<View> {
    let p = v.pred.exists(&vu_names(v))?.implies(&v.pred)?;
    View::new(p)
}

pub fn vh2(v: &View) -> View {
    v.clone()
}

pub fn vh3(v: &View) -> Result<View> {
    let p = v.pred.unique(&vu_names(v))?.implies(&v.pred)?;
    View::new(p)
}

pub fn vh(v: &View) -> Result<View> {
    vh1(&vh2(v))
}

/// Fixpoint check: `h(v) = v`, with a witness on failure.
pub fn is_healthy(h: Healthiness, v: &View) -> Result<Equality> {
    h.apply(v)?.pred.equal(&v.pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Entry;
    use crate::domain::{Domain, Value};

    fn ints(ns: Namespace, names: &[&str], lo: i64, hi: i64) -> Alphabet {
        Alphabet::new(
            names
                .iter()
                .map(|n| Entry::new(QName::new(ns, *n, false), Domain::range(lo, hi).unwrap())),
        )
        .unwrap()
    }

    fn ex_sys() -> Alphabet {
        ints(Namespace::Sys, &["x", "y"], -2, 12)
    }

    fn ex_cond() -> Expr {
        Expr::all([
            Expr::sys("x").ge(Expr::int(0)),
            Expr::sys("y").ge(Expr::int(0)),
            Expr::sys("x").plus(Expr::sys("y")).equals(Expr::int(10)),
        ])
    }

    fn ex_system() -> Program {
        let c = Predicate::extensionalize(&ex_cond(), &Arc::new(ex_sys())).unwrap();
        delta_cond(&c).unwrap()
    }

    fn v1() -> View {
        let e = Expr::vu("a1")
            .equals(Expr::sys("x"))
            .and(Expr::vu("b1").equals(Expr::sys("y")));
        View::from_expr(&e, &ex_sys(), &ints(Namespace::Vu, &["a1", "b1"], -2, 12)).unwrap()
    }

    #[test]
    fn delta_cond_counts_pairs() {
        let p = ex_system();
        // 11 solutions of the condition, squared.
        assert_eq!(p.predicate().count(), 121);
        let sys = Arc::new(ex_sys());
        let f = Predicate::empty(&sys).unwrap();
        assert!(delta_cond(&f).unwrap().predicate().is_empty());
        let t = Predicate::full(&sys).unwrap();
        assert!(delta_cond(&t).unwrap().predicate().is_full());
    }

    #[test]
    fn delta_of_true_view_is_full() {
        let sys = ints(Namespace::Sys, &["x"], 0, 1);
        let vu = ints(Namespace::Vu, &["a"], 0, 2);
        let v = View::everything(&sys, &vu).unwrap();
        assert!(delta(&v).unwrap().support().is_full());
    }

    #[test]
    fn delta_v1_membership() {
        // Small domains so the full viewed alphabet can be materialised.
        let sys = ints(Namespace::Sys, &["x", "y"], 0, 8);
        let vu = ints(Namespace::Vu, &["a1", "b1"], 0, 8);
        let e = Expr::vu("a1")
            .equals(Expr::sys("x"))
            .and(Expr::vu("b1").equals(Expr::sys("y")));
        let v = View::from_expr(&e, &sys, &vu).unwrap();
        let d = delta(&v).unwrap();
        let full = d.full_alphabet();
        let pick = |x: i64, y: i64, a: i64, b: i64, x2: i64, y2: i64, a2: i64, b2: i64| {
            let vals = [
                (QName::sys("x"), x),
                (QName::sys("y"), y),
                (QName::vu("a1"), a),
                (QName::vu("b1"), b),
                (QName::sys("x").primed(), x2),
                (QName::sys("y").primed(), y2),
                (QName::vu("a1").primed(), a2),
                (QName::vu("b1").primed(), b2),
            ]
            .map(|(n, v)| (n, Value::Int(v)));
            full.state_of(&vals).unwrap()
        };
        let inside = pick(4, 6, 4, 6, 2, 8, 2, 8);
        assert!(d.support().contains_state(&inside).unwrap());
        let outside = pick(4, 6, 5, 6, 2, 8, 2, 8);
        assert!(!d.support().contains_state(&outside).unwrap());
    }

    #[test]
    fn localise_of_empty_program_is_empty() {
        let v = v1();
        let empty = Program::new(Predicate::empty(&v.program_alphabet().unwrap()).unwrap()).unwrap();
        assert!(localise(&v, &empty).unwrap().is_empty());
    }

    #[test]
    fn globalise_of_everything_is_everything() {
        let v = v1();
        let u = LocalRelation::new(Predicate::full(&v.local_alphabet().unwrap()).unwrap()).unwrap();
        assert!(globalise(&v, &u).unwrap().is_full());
    }

    #[test]
    fn localise_rejects_foreign_program() {
        let v = v1();
        let other = ints(Namespace::Sys, &["x", "y"], 0, 3);
        let p = Program::from_expr(&Expr::Bool(true), &other).unwrap();
        assert!(matches!(localise(&v, &p), Err(AlgebraError::AlphabetMismatch { .. })));
    }

    #[test]
    fn views_reject_primes_and_top() {
        let a = Arc::new(
            Alphabet::new([Entry::new(QName::sys("x").primed(), Domain::Bool)]).unwrap(),
        );
        assert!(View::new(Predicate::full(&a).unwrap()).is_err());
        let b = Arc::new(Alphabet::new([Entry::new(QName::ok(), Domain::Bool)]).unwrap());
        assert!(View::new(Predicate::full(&b).unwrap()).is_err());
    }

    #[test]
    fn program_requires_twins() {
        let a = Arc::new(Alphabet::new([Entry::new(QName::sys("x"), Domain::Bool)]).unwrap());
        assert!(Program::new(Predicate::full(&a).unwrap()).is_err());
    }

    #[test]
    fn healthiness_examples() {
        assert!(is_healthy(Healthiness::Vh, &v1()).unwrap().equal);

        let sys = ints(Namespace::Sys, &["x"], 0, 1);
        let vu = ints(Namespace::Vu, &["a1"], 0, 1);
        let partial = View::from_expr(
            &Expr::sys("x").equals(Expr::int(0)).and(Expr::vu("a1").equals(Expr::int(0))),
            &sys,
            &vu,
        )
        .unwrap();
        // VH1 by enumeration: x = 1 has no related view state, so the
        // formula's antecedent is false there and VH1 adds (x=1, a1=*).
        let r = is_healthy(Healthiness::Vh1, &partial).unwrap();
        assert!(!r.equal);
        let w = r.witness.unwrap();
        assert_eq!(w.value(&QName::sys("x")), Some(Value::Int(1)));
        assert!(!partial.is_total());

        let all = View::everything(&sys, &vu).unwrap();
        assert!(is_healthy(Healthiness::Vh1, &all).unwrap().equal);
        assert!(is_healthy(Healthiness::Vh2, &partial).unwrap().equal);
    }

    #[test]
    fn vh3_fixpoint_differs_from_functionality() {
        // Relating a system state to every view state is a VH3 fixpoint
        // but not functional.
        let sys = ints(Namespace::Sys, &["x"], 0, 0);
        let vu = ints(Namespace::Vu, &["a"], 0, 1);
        let all = View::everything(&sys, &vu).unwrap();
        assert!(is_healthy(Healthiness::Vh3, &all).unwrap().equal);
        assert!(!all.is_functional());
    }

    #[test]
    fn surjectivity() {
        let sys = ints(Namespace::Sys, &["x"], 0, 0);
        let vu = ints(Namespace::Vu, &["a"], 0, 1);
        let v = View::from_expr(&Expr::vu("a").equals(Expr::int(0)), &sys, &vu).unwrap();
        assert!(!v.is_surjective());
        assert!(View::everything(&sys, &vu).unwrap().is_surjective());
        assert!(v1().is_surjective());
    }
}
