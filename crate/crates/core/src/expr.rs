//! Expressions over alphabet variables: typing, compilation and evaluation.

use std::collections::HashMap;
use std::fmt;

use crate::alphabet::{Alphabet, Namespace, QName, State};
use crate::domain::{Domain, Value};
use crate::error::{AlgebraError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Min,
    Max,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assoc {
    Left,
    Right,
    None,
}

/// Binding strength of `if`: lower than every operator.
pub const PREC_IF: u8 = 0;
/// Binding strength of `!` and unary `-`.
pub const PREC_UNARY: u8 = 8;
/// Literals, variables, calls and parenthesised expressions.
pub const PREC_ATOM: u8 = 9;

impl BinOp {
    /// Infix spelling; `None` for the call-syntax operators.
    pub fn symbol(self) -> Option<&'static str> {
        Some(match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
            BinOp::Min | BinOp::Max => return None,
        })
    }

    pub fn call_name(self) -> Option<&'static str> {
        match self {
            BinOp::Min => Some("min"),
            BinOp::Max => Some("max"),
            _ => None,
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul => 7,
            BinOp::Min | BinOp::Max => PREC_ATOM,
        }
    }

    pub fn assoc(self) -> Assoc {
        match self {
            BinOp::Implies => Assoc::Right,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => Assoc::None,
            _ => Assoc::Left,
        }
    }

    /// Minimum precedence required of the (left, right) operands when printing.
    pub fn operand_precedence(self) -> (u8, u8) {
        let p = self.precedence();
        match self.assoc() {
            Assoc::Left => (p, p + 1),
            Assoc::Right => (p + 1, p),
            Assoc::None => (p + 1, p + 1),
        }
    }
}

/// An expression. Bare symbols are enumeration literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Sym(String),
    Var(QName),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

macro_rules! binop_methods {
    ($($name:ident => $op:ident),* $(,)?) => {
        $(
            pub fn $name(self, rhs: Expr) -> Expr {
                Expr::Bin(BinOp::$op, Box::new(self), Box::new(rhs))
            }
        )*
    };
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Int(i)
    }

    pub fn sym(s: impl Into<String>) -> Expr {
        Expr::Sym(s.into())
    }

    pub fn var(q: QName) -> Expr {
        Expr::Var(q)
    }

    pub fn sys(name: &str) -> Expr {
        Expr::Var(QName::sys(name))
    }

    pub fn sys_post(name: &str) -> Expr {
        Expr::Var(QName::sys(name).primed())
    }

    pub fn vu(name: &str) -> Expr {
        Expr::Var(QName::vu(name))
    }

    pub fn vu_post(name: &str) -> Expr {
        Expr::Var(QName::vu(name).primed())
    }

    binop_methods! {
        plus => Add, minus => Sub, times => Mul, min => Min, max => Max,
        lt => Lt, le => Le, gt => Gt, ge => Ge, equals => Eq, not_equals => Ne,
        and => And, or => Or, implies => Implies, iff => Iff,
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn ite(cond: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::If(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    /// Conjunction of all `parts`; `true` when empty.
    pub fn all(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts
            .into_iter()
            .reduce(|a, b| a.and(b))
            .unwrap_or(Expr::Bool(true))
    }

    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) | Expr::Not(_) => PREC_UNARY,
            Expr::If(..) => PREC_IF,
            _ => PREC_ATOM,
        }
    }

    /// Every variable mentioned, in first-occurrence order.
    pub fn variables(&self) -> Vec<QName> {
        fn walk(e: &Expr, out: &mut Vec<QName>) {
            match e {
                Expr::Var(q) => {
                    if !out.contains(q) {
                        out.push(q.clone())
                    }
                }
                Expr::Neg(a) | Expr::Not(a) => walk(a, out),
                Expr::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::If(c, a, b) => {
                    walk(c, out);
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Int(_) | Expr::Bool(_) | Expr::Sym(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Int(i) => write!(f, "{i}")?,
            Expr::Bool(b) => write!(f, "{b}")?,
            Expr::Sym(s) => f.write_str(s)?,
            Expr::Var(q) => write!(f, "{q}")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_prec(f, PREC_UNARY)?;
            }
            Expr::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, PREC_UNARY)?;
            }
            Expr::Bin(op, a, b) => match op.call_name() {
                Some(name) => {
                    write!(f, "{name}(")?;
                    a.fmt_prec(f, PREC_IF)?;
                    f.write_str(", ")?;
                    b.fmt_prec(f, PREC_IF)?;
                    f.write_str(")")?;
                }
                None => {
                    let (l, r) = op.operand_precedence();
                    a.fmt_prec(f, l)?;
                    write!(f, " {} ", op.symbol().unwrap())?;
                    b.fmt_prec(f, r)?;
                }
            },
            Expr::If(c, a, b) => {
                f.write_str("if ")?;
                c.fmt_prec(f, PREC_IF)?;
                f.write_str(" then ")?;
                a.fmt_prec(f, PREC_IF)?;
                f.write_str(" else ")?;
                b.fmt_prec(f, PREC_IF)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, PREC_IF)
    }
}

/// Static type of an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
    /// Symbols; `Some` when the enumeration domain is known.
    Sym(Option<Vec<String>>),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => f.write_str("integer"),
            Ty::Bool => f.write_str("boolean"),
            Ty::Sym(Some(d)) => write!(f, "enumeration {{{}}}", d.join(", ")),
            Ty::Sym(None) => f.write_str("symbol"),
        }
    }
}

fn type_err(msg: String) -> AlgebraError {
    AlgebraError::Type(msg)
}

fn unify(a: &Ty, b: &Ty, ctx: &Expr) -> Result<Ty> {
    match (a, b) {
        (Ty::Int, Ty::Int) => Ok(Ty::Int),
        (Ty::Bool, Ty::Bool) => Ok(Ty::Bool),
        (Ty::Sym(Some(x)), Ty::Sym(Some(y))) if x != y => Err(type_err(format!(
            "cannot mix {a} and {b} in `{ctx}`"
        ))),
        (Ty::Sym(x), Ty::Sym(y)) => Ok(Ty::Sym(x.clone().or_else(|| y.clone()))),
        _ => Err(type_err(format!("cannot mix {a} and {b} in `{ctx}`"))),
    }
}

/// Literal leaves of `e` (through conditionals) must belong to `symbols`.
fn check_literals(e: &Expr, symbols: &[String]) -> Result<()> {
    match e {
        Expr::Sym(s) if !symbols.contains(s) => Err(type_err(format!(
            "`{s}` is not a symbol of {{{}}}",
            symbols.join(", ")
        ))),
        Expr::If(_, a, b) => {
            check_literals(a, symbols)?;
            check_literals(b, symbols)
        }
        _ => Ok(()),
    }
}

fn domain_ty(d: &Domain) -> Ty {
    match d {
        Domain::Range { .. } => Ty::Int,
        Domain::Bool => Ty::Bool,
        Domain::Enum(s) => Ty::Sym(Some(s.clone())),
    }
}

/// Type of `expr` under `alphabet`.
pub fn type_of(expr: &Expr, alphabet: &Alphabet) -> Result<Ty> {
    let expect = |e: &Expr, want: Ty| -> Result<()> {
        let got = type_of(e, alphabet)?;
        if got != want {
            return Err(type_err(format!("expected {want} but `{e}` is {got}")));
        }
        Ok(())
    };
    match expr {
        Expr::Int(_) => Ok(Ty::Int),
        Expr::Bool(_) => Ok(Ty::Bool),
        Expr::Sym(_) => Ok(Ty::Sym(None)),
        Expr::Var(q) => alphabet
            .entry(q)
            .map(|e| domain_ty(&e.domain))
            .ok_or_else(|| AlgebraError::UnknownVariable(q.to_string())),
        Expr::Neg(a) => expect(a, Ty::Int).map(|_| Ty::Int),
        Expr::Not(a) => expect(a, Ty::Bool).map(|_| Ty::Bool),
        Expr::Bin(op, a, b) => match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Min | BinOp::Max => {
                expect(a, Ty::Int)?;
                expect(b, Ty::Int)?;
                Ok(Ty::Int)
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                expect(a, Ty::Int)?;
                expect(b, Ty::Int)?;
                Ok(Ty::Bool)
            }
            BinOp::Eq | BinOp::Ne => {
                let ta = type_of(a, alphabet)?;
                let tb = type_of(b, alphabet)?;
                if let Ty::Sym(Some(d)) = unify(&ta, &tb, expr)? {
                    check_literals(a, &d)?;
                    check_literals(b, &d)?;
                }
                Ok(Ty::Bool)
            }
            BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                expect(a, Ty::Bool)?;
                expect(b, Ty::Bool)?;
                Ok(Ty::Bool)
            }
        },
        Expr::If(c, a, b) => {
            expect(c, Ty::Bool)?;
            let ta = type_of(a, alphabet)?;
            let tb = type_of(b, alphabet)?;
            unify(&ta, &tb, expr)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Int(i64),
    Bool(bool),
    Sym(u32),
}

impl Val {
    fn int(self) -> i64 {
        match self {
            Val::Int(i) => i,
            _ => unreachable!("type-checked integer"),
        }
    }

    fn bool(self) -> bool {
        match self {
            Val::Bool(b) => b,
            _ => unreachable!("type-checked boolean"),
        }
    }
}

#[derive(Debug, Clone)]
enum VarKind {
    Int(i64),
    Bool,
    Sym(Vec<u32>),
}

#[derive(Debug, Clone)]
enum Node {
    Const(Val),
    Var {
        stride: usize,
        radix: usize,
        kind: VarKind,
    },
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    If(Box<Node>, Box<Node>, Box<Node>),
}

/// An expression resolved against one alphabet, evaluated directly on
/// state indices.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
    ty: Ty,
    symbols: Vec<String>,
}

impl Compiled {
    pub fn new(expr: &Expr, alphabet: &Alphabet) -> Result<Self> {
        let ty = type_of(expr, alphabet)?;
        let mut interner: HashMap<String, u32> = HashMap::new();
        let mut symbols = Vec::new();
        let mut intern = |s: &str| -> u32 {
            *interner.entry(s.to_string()).or_insert_with(|| {
                symbols.push(s.to_string());
                (symbols.len() - 1) as u32
            })
        };
        let root = Self::build(expr, alphabet, &mut intern)?;
        Ok(Compiled { root, ty, symbols })
    }

    fn build(expr: &Expr, alphabet: &Alphabet, intern: &mut impl FnMut(&str) -> u32) -> Result<Node> {
        let mut go = |e: &Expr| Self::build(e, alphabet, intern).map(Box::new);
        Ok(match expr {
            Expr::Int(i) => Node::Const(Val::Int(*i)),
            Expr::Bool(b) => Node::Const(Val::Bool(*b)),
            Expr::Sym(s) => Node::Const(Val::Sym(intern(s))),
            Expr::Var(q) => {
                let pos = alphabet
                    .position(q)
                    .ok_or_else(|| AlgebraError::UnknownVariable(q.to_string()))?;
                let kind = match &alphabet.entries()[pos].domain {
                    Domain::Range { lo, .. } => VarKind::Int(*lo),
                    Domain::Bool => VarKind::Bool,
                    Domain::Enum(s) => VarKind::Sym(s.iter().map(|x| intern(x)).collect()),
                };
                Node::Var {
                    stride: alphabet.stride(pos),
                    radix: alphabet.radix(pos),
                    kind,
                }
            }
            Expr::Neg(a) => Node::Neg(go(a)?),
            Expr::Not(a) => Node::Not(go(a)?),
            Expr::Bin(op, a, b) => {
                let a = go(a)?;
                Node::Bin(*op, a, go(b)?)
            }
            Expr::If(c, a, b) => {
                let c = go(c)?;
                let a = go(a)?;
                Node::If(c, a, go(b)?)
            }
        })
    }

    pub fn ty(&self) -> &Ty {
        &self.ty
    }

    fn eval_node(node: &Node, index: usize) -> Val {
        match node {
            Node::Const(v) => *v,
            Node::Var {
                stride,
                radix,
                kind,
            } => {
                let d = (index / stride) % radix;
                match kind {
                    VarKind::Int(lo) => Val::Int(lo + d as i64),
                    VarKind::Bool => Val::Bool(d == 1),
                    VarKind::Sym(table) => Val::Sym(table[d]),
                }
            }
            Node::Neg(a) => Val::Int(Self::eval_node(a, index).int().wrapping_neg()),
            Node::Not(a) => Val::Bool(!Self::eval_node(a, index).bool()),
            Node::Bin(op, a, b) => {
                let x = Self::eval_node(a, index);
                match op {
                    BinOp::And => return Val::Bool(x.bool() && Self::eval_node(b, index).bool()),
                    BinOp::Or => return Val::Bool(x.bool() || Self::eval_node(b, index).bool()),
                    BinOp::Implies => {
                        return Val::Bool(!x.bool() || Self::eval_node(b, index).bool())
                    }
                    _ => {}
                }
                let y = Self::eval_node(b, index);
                match op {
                    BinOp::Add => Val::Int(x.int().wrapping_add(y.int())),
                    BinOp::Sub => Val::Int(x.int().wrapping_sub(y.int())),
                    BinOp::Mul => Val::Int(x.int().wrapping_mul(y.int())),
                    BinOp::Min => Val::Int(x.int().min(y.int())),
                    BinOp::Max => Val::Int(x.int().max(y.int())),
                    BinOp::Lt => Val::Bool(x.int() < y.int()),
                    BinOp::Le => Val::Bool(x.int() <= y.int()),
                    BinOp::Gt => Val::Bool(x.int() > y.int()),
                    BinOp::Ge => Val::Bool(x.int() >= y.int()),
                    BinOp::Eq => Val::Bool(x == y),
                    BinOp::Ne => Val::Bool(x != y),
                    BinOp::Iff => Val::Bool(x.bool() == y.bool()),
                    BinOp::And | BinOp::Or | BinOp::Implies => unreachable!(),
                }
            }
            Node::If(c, a, b) => {
                if Self::eval_node(c, index).bool() {
                    Self::eval_node(a, index)
                } else {
                    Self::eval_node(b, index)
                }
            }
        }
    }

    /// Value at the state with the given index.
    pub fn eval_index(&self, index: usize) -> Value {
        match Self::eval_node(&self.root, index) {
            Val::Int(i) => Value::Int(i),
            Val::Bool(b) => Value::Bool(b),
            Val::Sym(s) => Value::Sym(self.symbols[s as usize].clone()),
        }
    }

    /// Truth value at a state index; the expression must be boolean.
    pub fn holds_at(&self, index: usize) -> bool {
        Self::eval_node(&self.root, index).bool()
    }
}

/// Evaluates `expr` at `state`.
pub fn eval(expr: &Expr, state: &State) -> Result<Value> {
    let c = Compiled::new(expr, state.alphabet())?;
    Ok(c.eval_index(state.index()))
}

/// Namespaces mentioned by an expression.
pub fn namespaces(expr: &Expr) -> Vec<Namespace> {
    let mut out: Vec<Namespace> = expr.variables().iter().map(|q| q.ns).collect();
    out.sort();
    out.dedup();
    out
}
