//! Canonical text for specs and predicates.

use std::fmt::Write;

use viewcheck_core::Predicate;

use crate::ast::*;

pub fn expr(e: &SExpr) -> String {
    e.to_core().to_string()
}

fn expected(e: &Expected) -> String {
    match e {
        Expected::Relation(e) => expr(e),
        Expected::Delta(e) => format!("delta({})", expr(e)),
    }
}

fn names(ids: &[Ident]) -> String {
    ids.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

pub fn query(q: &Query) -> String {
    let with_expect = |head: String, exp: &Option<Expected>| match exp {
        Some(e) => format!("{head} expect {}", expected(e)),
        None => head,
    };
    match q {
        Query::Healthy(v) => format!("healthy {}", v.name),
        Query::Localise { view, target, expect } => {
            with_expect(format!("localise {} {}", view.name, target.name), expect)
        }
        Query::Globalise { view, target, expect } => {
            with_expect(format!("globalise {} {}", view.name, target.name), expect)
        }
        Query::Infer {
            system,
            view,
            observation,
            expect,
        } => with_expect(
            format!("infer {} {} {}", system.name, view.name, expr(observation)),
            expect,
        ),
        Query::Leak {
            system,
            view,
            secret,
            policy,
        } => format!("leak {} {} {} {}", system.name, view.name, secret.name, policy.name),
        Query::Refines {
            implementation,
            specification,
        } => format!("refines {} {}", implementation.name, specification.name),
        Query::Lemma335 { max_sys, max_vu } => format!("lemma335 {max_sys} {max_vu}"),
    }
}

pub fn decl(d: &Decl) -> String {
    match &d.kind {
        DeclKind::Domain { name, def } => {
            let body = match def {
                DomainDef::Range(lo, hi) => format!("{lo}..{hi}"),
                DomainDef::Enum(syms) => format!("{{ {} }}", names(syms)),
                DomainDef::Bool => "bool".into(),
            };
            format!("domain {} = {body}", name.name)
        }
        DeclKind::Alphabet { kind, name, entries } => {
            let kind = match kind {
                AlphabetKind::Sys => "sys",
                AlphabetKind::View => "view",
            };
            let body = entries
                .iter()
                .map(|(v, d)| format!("{}: {}", v.name, d.name))
                .collect::<Vec<_>>()
                .join(", ");
            format!("alphabet {kind} {} {{ {body} }}", name.name)
        }
        DeclKind::View { name, sys, vu, body } => {
            format!("view {} over {}, {} = {}", name.name, sys.name, vu.name, expr(body))
        }
        DeclKind::System { name, sys, def } => {
            let body = match def {
                SystemDef::Delta(e) => format!("delta({})", expr(e)),
                SystemDef::Relation(e) => expr(e),
            };
            format!("system {} over {} = {body}", name.name, sys.name)
        }
        DeclKind::Design { name, sys, pre, post } => {
            format!("design {} over {} = {} |- {}", name.name, sys.name, expr(pre), expr(post))
        }
        DeclKind::Secret { name, sys, body } => {
            format!("secret {} over {} = {}", name.name, sys.name, expr(body))
        }
        DeclKind::Policy { name, filter, baseline } => {
            let mut s = format!("policy {} = filter {}", name.name, expr(filter));
            if let Some(b) = baseline {
                let _ = write!(s, " baseline {{ {} }}", names(b));
            }
            s
        }
        DeclKind::Check(q) => format!("check {}", query(q)),
    }
}

pub fn spec(s: &Spec) -> String {
    let mut out = String::new();
    for d in &s.decls {
        out.push_str(&decl(d));
        out.push('\n');
    }
    out
}

/// `false`, `true`, the source expression, or the extension as a
/// disjunction of states.
pub fn predicate(p: &Predicate) -> String {
    if p.is_empty() {
        "false".into()
    } else if p.is_full() {
        "true".into()
    } else if let Some(src) = p.source() {
        src.to_string()
    } else {
        p.to_dnf()
    }
}

/// Like [`predicate`], but large extensions are summarised by their size.
pub fn summary(p: &Predicate, max_states: usize) -> String {
    if p.source().is_none() && !p.is_empty() && !p.is_full() && p.count() > max_states {
        format!("{} of {} states", p.count(), p.space_size())
    } else {
        predicate(p)
    }
}
