//! Name resolution, typing and extensionalisation of parsed specs, and
//! execution of their queries.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use viewcheck_core::design::{self, Counterexample, Design, SearchBounds};
use viewcheck_core::leak::{self, LeakEntry, LeakVerdict, Policy, SecretMap};
use viewcheck_core::view::{self, delta_cond, Healthiness};
use viewcheck_core::{
    AlgebraError, Alphabet, Domain, Entry, Expr, LocalRelation, Namespace, Predicate, Program,
    QName, State, View, DEFAULT_STATE_LIMIT,
};

use crate::ast::*;
use crate::diag::{Diagnostic, Pos};
use crate::printer;

/// Largest extension printed in full in query details.
const SUMMARY_STATES: usize = 8;

#[derive(Debug, Clone)]
struct PolicyDecl {
    filter: SExpr,
    baseline: Option<Vec<Ident>>,
}

#[derive(Debug, Clone)]
pub enum Target {
    System(Program),
    Design(Design),
}

/// A query with every name resolved and every expression extensionalised.
#[derive(Debug, Clone)]
pub enum Elaborated {
    Healthy(View),
    Localise {
        view: View,
        target: Target,
        expect: Option<Predicate>,
    },
    Globalise {
        view: View,
        system: Program,
        expect: Option<Predicate>,
    },
    Infer {
        system: Program,
        view: View,
        observation: LocalRelation,
        expect: Option<Predicate>,
    },
    Leak {
        system: Program,
        view: View,
        secret: SecretMap,
        policy: Policy,
    },
    Refines {
        implementation: Program,
        specification: Program,
    },
    Lemma335(SearchBounds),
}

#[derive(Debug, Clone)]
pub struct Check {
    /// Canonical query text, without the leading `check`.
    pub text: String,
    pub pos: Pos,
    pub query: Elaborated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Leaks,
    Clean,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Leaks => "leaks",
            Verdict::Clean => "clean",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::Clean)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub query: String,
    pub verdict: Verdict,
    /// One-line result, e.g. `equal` or a printed predicate.
    pub detail: String,
    pub witness: Option<State>,
    pub entries: Option<Vec<LeakEntry>>,
    pub counterexamples: Option<Vec<Counterexample>>,
    /// Further human-readable lines.
    pub notes: Vec<String>,
}

/// An elaborated spec.
#[derive(Debug, Clone)]
pub struct Model {
    limit: u64,
    domains: HashMap<String, Domain>,
    symbols: HashSet<String>,
    alphabets: HashMap<String, (AlphabetKind, Arc<Alphabet>)>,
    views: HashMap<String, View>,
    systems: HashMap<String, Program>,
    designs: HashMap<String, Design>,
    secrets: HashMap<String, SecretMap>,
    policies: HashMap<String, PolicyDecl>,
    pub checks: Vec<Check>,
}

impl Default for Model {
    fn default() -> Self {
        Model::new(DEFAULT_STATE_LIMIT)
    }
}

pub fn elaborate(spec: &Spec) -> Result<Model, Diagnostic> {
    elaborate_with_limit(spec, DEFAULT_STATE_LIMIT)
}

pub fn elaborate_with_limit(spec: &Spec, limit: u64) -> Result<Model, Diagnostic> {
    let mut m = Model::new(limit);
    m.add(spec)?;
    Ok(m)
}

fn duplicate(kind: &str, id: &Ident) -> Diagnostic {
    Diagnostic::elab(id.pos, format!("{kind} `{}` is already declared", id.name))
}

fn lookup<'a, T>(map: &'a HashMap<String, T>, kind: &str, id: &Ident) -> Result<&'a T, Diagnostic> {
    map.get(&id.name)
        .ok_or_else(|| Diagnostic::elab(id.pos, format!("unknown {kind} `{}`", id.name)))
}

impl Model {
    pub fn new(limit: u64) -> Self {
        Model {
            limit,
            domains: HashMap::new(),
            symbols: HashSet::new(),
            alphabets: HashMap::new(),
            views: HashMap::new(),
            systems: HashMap::new(),
            designs: HashMap::new(),
            secrets: HashMap::new(),
            policies: HashMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn view(&self, name: &str) -> Option<&View> {
        self.views.get(name)
    }

    pub fn system(&self, name: &str) -> Option<&Program> {
        self.systems.get(name)
    }

    pub fn design(&self, name: &str) -> Option<&Design> {
        self.designs.get(name)
    }

    pub fn secret(&self, name: &str) -> Option<&SecretMap> {
        self.secrets.get(name)
    }

    /// Elaborates further declarations in the scope of this model.
    pub fn add(&mut self, spec: &Spec) -> Result<(), Diagnostic> {
        for d in &spec.decls {
            self.decl(d)?;
        }
        Ok(())
    }

    fn alphabet(&self, id: &Ident, kind: AlphabetKind) -> Result<&Arc<Alphabet>, Diagnostic> {
        let (k, a) = lookup(&self.alphabets, "alphabet", id)?;
        if *k != kind {
            let want = match kind {
                AlphabetKind::Sys => "a system",
                AlphabetKind::View => "a view",
            };
            return Err(Diagnostic::elab(id.pos, format!("`{}` is not {want} alphabet", id.name)));
        }
        Ok(a)
    }

    fn target(&self, id: &Ident) -> Result<Target, Diagnostic> {
        if let Some(p) = self.systems.get(&id.name) {
            Ok(Target::System(p.clone()))
        } else if let Some(d) = self.designs.get(&id.name) {
            Ok(Target::Design(d.clone()))
        } else {
            Err(Diagnostic::elab(id.pos, format!("unknown system or design `{}`", id.name)))
        }
    }

    /// Resolves names in `e` against `alphabet` and converts it.
    fn resolve(&self, e: &SExpr, alphabet: &Alphabet, what: &str) -> Result<Expr, Diagnostic> {
        let mut err = None;
        e.walk(&mut |n| {
            if err.is_some() {
                return;
            }
            match &n.kind {
                SExprKind::Var { ns, name, primed } => {
                    let q = QName::new(*ns, name.clone(), *primed);
                    if !alphabet.contains(&q) {
                        let msg = if *primed && alphabet.contains(&q.unprimed()) {
                            format!("primed variable `{q}` is not permitted in {what}")
                        } else {
                            format!("unknown variable `{q}` in {what}")
                        };
                        err = Some(Diagnostic::elab(n.pos, msg));
                    }
                }
                SExprKind::Name(s) if !self.symbols.contains(s) => {
                    err = Some(Diagnostic::elab(
                        n.pos,
                        format!("unknown name `{s}`; variables need a `sys:` or `vu:` prefix"),
                    ));
                }
                _ => {}
            }
        });
        match err {
            Some(d) => Err(d),
            None => Ok(e.to_core()),
        }
    }

    fn predicate(&self, e: &SExpr, alphabet: &Arc<Alphabet>, what: &str) -> Result<Predicate, Diagnostic> {
        let core = self.resolve(e, alphabet, what)?;
        Predicate::extensionalize(&core, alphabet).map_err(|x| Diagnostic::from_algebra(e.pos, x))
    }

    fn expected(&self, exp: &Expected, base: &Arc<Alphabet>, what: &str) -> Result<Predicate, Diagnostic> {
        let alg = |pos: Pos| move |x: AlgebraError| Diagnostic::from_algebra(pos, x);
        match exp {
            Expected::Delta(e) => {
                let c = self.predicate(e, base, &format!("a condition on {what}"))?;
                c.delta().map_err(alg(e.pos))
            }
            Expected::Relation(e) => {
                let rel = Arc::new(base.with_primes().map_err(alg(e.pos))?);
                self.predicate(e, &rel, &format!("a relation on {what}"))
            }
        }
    }

    fn decl(&mut self, d: &Decl) -> Result<(), Diagnostic> {
        let alg = |pos: Pos| move |x: AlgebraError| Diagnostic::from_algebra(pos, x);
        match &d.kind {
            DeclKind::Domain { name, def } => {
                if self.domains.contains_key(&name.name) {
                    return Err(duplicate("domain", name));
                }
                let dom = match def {
                    DomainDef::Range(lo, hi) => Domain::range(*lo, *hi),
                    DomainDef::Enum(syms) => {
                        for s in syms {
                            if ["true", "false", "if", "then", "else", "min", "max"].contains(&s.name.as_str()) {
                                return Err(Diagnostic::elab(s.pos, format!("`{}` is reserved", s.name)));
                            }
                        }
                        Domain::symbols(syms.iter().map(|s| s.name.clone()))
                    }
                    DomainDef::Bool => Ok(Domain::Bool),
                }
                .map_err(alg(name.pos))?;
                if let Domain::Enum(syms) = &dom {
                    self.symbols.extend(syms.iter().cloned());
                }
                self.domains.insert(name.name.clone(), dom);
            }
            DeclKind::Alphabet { kind, name, entries } => {
                if self.alphabets.contains_key(&name.name) {
                    return Err(duplicate("alphabet", name));
                }
                let ns = match kind {
                    AlphabetKind::Sys => Namespace::Sys,
                    AlphabetKind::View => Namespace::Vu,
                };
                let mut es = Vec::new();
                for (var, dom) in entries {
                    let domain = if dom.name == "bool" && !self.domains.contains_key("bool") {
                        Domain::Bool
                    } else {
                        lookup(&self.domains, "domain", dom)?.clone()
                    };
                    if es.iter().any(|e: &Entry| e.name.name == var.name) {
                        return Err(Diagnostic::elab(var.pos, format!("variable `{}` is declared twice", var.name)));
                    }
                    es.push(Entry::new(QName::new(ns, var.name.clone(), false), domain));
                }
                let a = Alphabet::with_limit(es, self.limit).map_err(alg(name.pos))?;
                a.checked_size().map_err(alg(name.pos))?;
                self.alphabets.insert(name.name.clone(), (*kind, Arc::new(a)));
            }
            DeclKind::View { name, sys, vu, body } => {
                if self.views.contains_key(&name.name) {
                    return Err(duplicate("view", name));
                }
                let s = self.alphabet(sys, AlphabetKind::Sys)?;
                let u = self.alphabet(vu, AlphabetKind::View)?;
                let a = Arc::new(s.union(u).map_err(alg(name.pos))?);
                let p = self.predicate(body, &a, "a view")?;
                let v = View::new(p).map_err(alg(body.pos))?;
                self.views.insert(name.name.clone(), v);
            }
            DeclKind::System { name, sys, def } => {
                if self.systems.contains_key(&name.name) {
                    return Err(duplicate("system", name));
                }
                let s = Arc::clone(self.alphabet(sys, AlphabetKind::Sys)?);
                let p = match def {
                    SystemDef::Delta(e) => {
                        let c = self.predicate(e, &s, "a condition")?;
                        delta_cond(&c).map_err(alg(e.pos))?
                    }
                    SystemDef::Relation(e) => {
                        let rel = Arc::new(s.with_primes().map_err(alg(e.pos))?);
                        Program::new(self.predicate(e, &rel, "a system")?).map_err(alg(e.pos))?
                    }
                };
                self.systems.insert(name.name.clone(), p);
            }
            DeclKind::Design { name, sys, pre, post } => {
                if self.designs.contains_key(&name.name) {
                    return Err(duplicate("design", name));
                }
                let s = Arc::clone(self.alphabet(sys, AlphabetKind::Sys)?);
                let rel = Arc::new(s.with_primes().map_err(alg(post.pos))?);
                let pre_p = self.predicate(pre, &s, "a precondition")?;
                let post_p = self.predicate(post, &rel, "a postcondition")?;
                let dz = design::design(&pre_p, &post_p, &s).map_err(alg(name.pos))?;
                self.designs.insert(name.name.clone(), dz);
            }
            DeclKind::Secret { name, sys, body } => {
                if self.secrets.contains_key(&name.name) {
                    return Err(duplicate("secret", name));
                }
                let s = Arc::clone(self.alphabet(sys, AlphabetKind::Sys)?);
                let e = self.resolve(body, &s, "a secret")?;
                let m = SecretMap::from_expr(&e, &s).map_err(alg(body.pos))?;
                self.secrets.insert(name.name.clone(), m);
            }
            DeclKind::Policy { name, filter, baseline } => {
                if self.policies.contains_key(&name.name) {
                    return Err(duplicate("policy", name));
                }
                self.policies.insert(
                    name.name.clone(),
                    PolicyDecl {
                        filter: filter.clone(),
                        baseline: baseline.clone(),
                    },
                );
            }
            DeclKind::Check(q) => {
                let query = self.query(q)?;
                self.checks.push(Check {
                    text: printer::query(q),
                    pos: d.pos,
                    query,
                });
            }
        }
        Ok(())
    }

    fn query(&self, q: &Query) -> Result<Elaborated, Diagnostic> {
        Ok(match q {
            Query::Healthy(v) => Elaborated::Healthy(lookup(&self.views, "view", v)?.clone()),
            Query::Localise { view, target, expect } => {
                let v = lookup(&self.views, "view", view)?.clone();
                let target = self.target(target)?;
                let expect = match (&target, expect) {
                    (_, None) => None,
                    (Target::Design(_), Some(_)) => {
                        return Err(Diagnostic::elab(view.pos, "`expect` is not supported when localising a design"))
                    }
                    (Target::System(_), Some(e)) => Some(self.expected(e, v.vu(), "the view")?),
                };
                Elaborated::Localise { view: v, target, expect }
            }
            Query::Globalise { view, target, expect } => {
                let v = lookup(&self.views, "view", view)?.clone();
                let system = lookup(&self.systems, "system", target)?.clone();
                let expect = match expect {
                    Some(e) => Some(self.expected(e, v.sys(), "the system")?),
                    None => None,
                };
                Elaborated::Globalise { view: v, system, expect }
            }
            Query::Infer {
                system,
                view,
                observation,
                expect,
            } => {
                let p = lookup(&self.systems, "system", system)?.clone();
                let v = lookup(&self.views, "view", view)?.clone();
                let local = v.local_alphabet().map_err(|x| Diagnostic::from_algebra(observation.pos, x))?;
                let obs = LocalRelation::new(self.predicate(observation, &local, "an observation")?)
                    .map_err(|x| Diagnostic::from_algebra(observation.pos, x))?;
                let expect = match expect {
                    Some(e) => Some(self.expected(e, v.sys(), "the system")?),
                    None => None,
                };
                Elaborated::Infer {
                    system: p,
                    view: v,
                    observation: obs,
                    expect,
                }
            }
            Query::Leak {
                system,
                view,
                secret,
                policy,
            } => {
                let p = lookup(&self.systems, "system", system)?.clone();
                let v = lookup(&self.views, "view", view)?.clone();
                let s = lookup(&self.secrets, "secret", secret)?.clone();
                let pd = lookup(&self.policies, "policy", policy)?;
                if s.sys() != v.sys() {
                    return Err(Diagnostic::elab(secret.pos, format!(
                        "secret `{}` is over a different system alphabet than view `{}`",
                        secret.name, view.name
                    )));
                }
                let local = v.local_alphabet().map_err(|x| Diagnostic::from_algebra(pd.filter.pos, x))?;
                let filter = LocalRelation::new(self.predicate(&pd.filter, &local, "a policy filter")?)
                    .map_err(|x| Diagnostic::from_algebra(pd.filter.pos, x))?;
                let mut pol = Policy::new(filter);
                if let Some(b) = &pd.baseline {
                    for t in b {
                        if !s.tokens().contains(&t.name) {
                            return Err(Diagnostic::elab(t.pos, format!(
                                "`{}` is not a value of secret `{}`",
                                t.name, secret.name
                            )));
                        }
                    }
                    pol = pol.with_baseline(b.iter().map(|t| t.name.clone()));
                }
                Elaborated::Leak {
                    system: p,
                    view: v,
                    secret: s,
                    policy: pol,
                }
            }
            Query::Refines {
                implementation,
                specification,
            } => {
                let a = lookup(&self.systems, "system", implementation)?;
                let b = lookup(&self.systems, "system", specification)?;
                if a.sys() != b.sys() {
                    return Err(Diagnostic::elab(specification.pos, format!(
                        "`{}` and `{}` are over different system alphabets",
                        implementation.name, specification.name
                    )));
                }
                Elaborated::Refines {
                    implementation: a.clone(),
                    specification: b.clone(),
                }
            }
            Query::Lemma335 { max_sys, max_vu } => {
                Elaborated::Lemma335(SearchBounds::new(*max_sys as usize, *max_vu as usize))
            }
        })
    }
}

fn compare(query: &str, got: &Predicate, expect: &Option<Predicate>) -> Result<Outcome, AlgebraError> {
    Ok(match expect {
        Some(e) => {
            let eq = got.equal(e)?;
            let mut notes = Vec::new();
            if let Some(w) = &eq.witness {
                let side = if eq.witness_in_left { "only in the result" } else { "only in the expected form" };
                notes.push(format!("first difference ({side}): {w}"));
                notes.push(format!("result: {}", printer::summary(got, SUMMARY_STATES)));
            }
            Outcome {
                query: query.into(),
                verdict: if eq.equal { Verdict::Holds } else { Verdict::Fails },
                detail: if eq.equal { "equal".into() } else { "not equal".into() },
                witness: eq.witness,
                entries: None,
                counterexamples: None,
                notes,
            }
        }
        None => Outcome {
            query: query.into(),
            verdict: Verdict::Holds,
            detail: printer::summary(got, SUMMARY_STATES),
            witness: None,
            entries: None,
            counterexamples: None,
            notes: Vec::new(),
        },
    })
}

/// `{(s, u), ...}` by state index.
pub fn view_pairs(v: &View) -> String {
    let n = v.sys_size();
    let pairs: Vec<String> = v
        .predicate()
        .bits()
        .ones()
        .map(|i| format!("({}, {})", i % n, i / n))
        .collect();
    format!("{{{}}}", pairs.join(", "))
}

pub fn describe_counterexample(c: &Counterexample) -> String {
    format!(
        "|Sys| = {}, |Vu| = {}, V = {}, pre = {}, post = {}, differing at {}",
        c.sys_size,
        c.vu_size,
        view_pairs(&c.view),
        printer::predicate(&c.pre),
        printer::predicate(&c.post),
        c.witness
    )
}

impl Check {
    pub fn run(&self) -> Result<Outcome, AlgebraError> {
        let q = self.text.as_str();
        match &self.query {
            Elaborated::Healthy(v) => {
                let mut parts = Vec::new();
                let mut witness = None;
                let mut ok = true;
                for h in [Healthiness::Vh1, Healthiness::Vh2, Healthiness::Vh3, Healthiness::Vh] {
                    let eq = view::is_healthy(h, v)?;
                    parts.push(format!("{} {}", h.name(), if eq.equal { "yes" } else { "no" }));
                    if h == Healthiness::Vh {
                        ok = eq.equal;
                        witness = eq.witness;
                    }
                }
                let props = format!(
                    "{}, {}, {}",
                    if v.is_total() { "total" } else { "not total" },
                    if v.is_functional() { "functional" } else { "not functional" },
                    if v.is_surjective() { "surjective" } else { "not surjective" },
                );
                let mut notes = vec![props];
                if let Some(w) = &witness {
                    notes.push(format!("VH changes the view at {w}"));
                }
                Ok(Outcome {
                    query: q.into(),
                    verdict: if ok { Verdict::Holds } else { Verdict::Fails },
                    detail: parts.join(", "),
                    witness,
                    entries: None,
                    counterexamples: None,
                    notes,
                })
            }
            Elaborated::Localise { view: v, target, expect } => match target {
                Target::System(p) => {
                    let l = view::localise(v, p)?;
                    compare(q, l.support(), expect)
                }
                Target::Design(d) => {
                    let l = design::localise_design(v, d)?;
                    compare(q, &l, &None)
                }
            },
            Elaborated::Globalise { view: v, system, expect } => {
                let l = view::localise(v, system)?.to_local()?;
                let g = view::globalise(v, &l)?;
                compare(q, g.support(), expect)
            }
            Elaborated::Infer {
                system,
                view: v,
                observation,
                expect,
            } => {
                let i = view::infer(system, v, observation)?;
                let mut out = compare(q, i.support(), expect)?;
                let init = i.project(v.sys())?;
                out.notes.push(format!("initial states: {}", printer::summary(&init, SUMMARY_STATES)));
                Ok(out)
            }
            Elaborated::Leak {
                system,
                view: v,
                secret,
                policy,
            } => {
                let r = leak::leak_check(system, v, secret, policy)?;
                let verdict = match r.verdict {
                    LeakVerdict::Leaks => Verdict::Leaks,
                    LeakVerdict::Clean => Verdict::Clean,
                };
                let notes = r
                    .entries
                    .iter()
                    .map(|e| format!("{} reveals {{{}}}", e.observation, e.inferred.join(", ")))
                    .collect();
                Ok(Outcome {
                    query: q.into(),
                    verdict,
                    detail: format!(
                        "{} of {} consistent observations narrow the baseline {{{}}}",
                        r.entries.len(),
                        r.consistent,
                        r.baseline.join(", ")
                    ),
                    witness: r.entries.first().map(|e| e.observation.clone()),
                    entries: Some(r.entries),
                    counterexamples: None,
                    notes,
                })
            }
            Elaborated::Refines {
                implementation,
                specification,
            } => {
                let r = leak::refines(implementation, specification)?;
                Ok(Outcome {
                    query: q.into(),
                    verdict: if r.holds { Verdict::Holds } else { Verdict::Fails },
                    detail: if r.holds { "refines".into() } else { "does not refine".into() },
                    notes: r
                        .witness
                        .iter()
                        .map(|w| format!("behaviour not allowed by the specification: {w}"))
                        .collect(),
                    witness: r.witness,
                    entries: None,
                    counterexamples: None,
                })
            }
            Elaborated::Lemma335(bounds) => {
                let found = design::lemma335_search(bounds)?;
                let detail = match found.len() {
                    0 => "no counterexample".to_string(),
                    1 => "1 counterexample".to_string(),
                    n => format!("{n} counterexamples"),
                };
                Ok(Outcome {
                    query: q.into(),
                    verdict: if found.is_empty() { Verdict::Holds } else { Verdict::Fails },
                    detail,
                    witness: found.first().map(|c| c.witness.clone()),
                    entries: None,
                    notes: found.first().map(|c| format!("first: {}", describe_counterexample(c))).into_iter().collect(),
                    counterexamples: Some(found),
                })
            }
        }
    }
}
