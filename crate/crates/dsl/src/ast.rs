//! Syntax trees. Every node carries a position; positions compare equal, so
//! `==` is structural equality.

use viewcheck_core::{BinOp, Expr, Namespace, QName};

use crate::diag::Pos;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExprKind {
    Int(i64),
    Bool(bool),
    /// A bare name: an enumeration literal.
    Name(String),
    Var { ns: Namespace, name: String, primed: bool },
    Neg(Box<SExpr>),
    Not(Box<SExpr>),
    Bin(BinOp, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub pos: Pos,
}

impl SExpr {
    pub fn to_core(&self) -> Expr {
        match &self.kind {
            SExprKind::Int(i) => Expr::Int(*i),
            SExprKind::Bool(b) => Expr::Bool(*b),
            SExprKind::Name(n) => Expr::Sym(n.clone()),
            SExprKind::Var { ns, name, primed } => Expr::Var(QName::new(*ns, name.clone(), *primed)),
            SExprKind::Neg(a) => Expr::Neg(Box::new(a.to_core())),
            SExprKind::Not(a) => Expr::Not(Box::new(a.to_core())),
            SExprKind::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.to_core()), Box::new(b.to_core())),
            SExprKind::If(c, a, b) => {
                Expr::If(Box::new(c.to_core()), Box::new(a.to_core()), Box::new(b.to_core()))
            }
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a SExpr)) {
        f(self);
        match &self.kind {
            SExprKind::Neg(a) | SExprKind::Not(a) => a.walk(f),
            SExprKind::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            SExprKind::If(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainDef {
    Range(i64, i64),
    Enum(Vec<Ident>),
    Bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphabetKind {
    Sys,
    View,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemDef {
    Delta(SExpr),
    Relation(SExpr),
}

/// Expected result of a query: a relation, or `delta(c)` of a condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Relation(SExpr),
    Delta(SExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Healthy(Ident),
    Localise {
        view: Ident,
        target: Ident,
        expect: Option<Expected>,
    },
    Globalise {
        view: Ident,
        target: Ident,
        expect: Option<Expected>,
    },
    Infer {
        system: Ident,
        view: Ident,
        observation: SExpr,
        expect: Option<Expected>,
    },
    Leak {
        system: Ident,
        view: Ident,
        secret: Ident,
        policy: Ident,
    },
    Refines {
        implementation: Ident,
        specification: Ident,
    },
    Lemma335 {
        max_sys: u64,
        max_vu: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    Domain {
        name: Ident,
        def: DomainDef,
    },
    Alphabet {
        kind: AlphabetKind,
        name: Ident,
        entries: Vec<(Ident, Ident)>,
    },
    View {
        name: Ident,
        sys: Ident,
        vu: Ident,
        body: SExpr,
    },
    System {
        name: Ident,
        sys: Ident,
        def: SystemDef,
    },
    Design {
        name: Ident,
        sys: Ident,
        pre: SExpr,
        post: SExpr,
    },
    Secret {
        name: Ident,
        sys: Ident,
        body: SExpr,
    },
    Policy {
        name: Ident,
        filter: SExpr,
        baseline: Option<Vec<Ident>>,
    },
    Check(Query),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spec {
    pub decls: Vec<Decl>,
}
