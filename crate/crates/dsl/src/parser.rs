use viewcheck_core::expr::{Assoc, PREC_IF};
use viewcheck_core::{BinOp, Namespace};

use crate::ast::*;
use crate::diag::{Diagnostic, Pos};
use crate::lexer::{lex, Tok, Token};

/// Deepest expression nesting accepted before giving up with a diagnostic.
pub const MAX_DEPTH: usize = 256;

const RESERVED: &[&str] = &["if", "then", "else", "true", "false", "min", "max"];

const DECL_KEYWORDS: &str = "`domain`, `alphabet`, `view`, `system`, `design`, `secret`, `policy` or `check`";

pub fn parse(src: &str) -> Result<Spec, Diagnostic> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, at: 0, depth: 0 };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(Spec { decls })
}

/// Parses a single expression spanning the whole input.
pub fn parse_expr(src: &str) -> Result<SExpr, Diagnostic> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, at: 0, depth: 0 };
    let e = p.expr(PREC_IF)?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

fn binop(t: &Tok) -> Option<BinOp> {
    Some(match t {
        Tok::Plus => BinOp::Add,
        Tok::Minus => BinOp::Sub,
        Tok::Star => BinOp::Mul,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        Tok::EqEq => BinOp::Eq,
        Tok::NotEq => BinOp::Ne,
        Tok::AndAnd => BinOp::And,
        Tok::OrOr => BinOp::Or,
        Tok::Arrow => BinOp::Implies,
        Tok::Iff => BinOp::Iff,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::syntax(self.pos(), format!("unexpected {}; expected {expected}", self.peek()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, Diagnostic> {
        if self.is_kw(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, Diagnostic> {
        if self.peek() == &t {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{}`", t.spelling())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Ident, Diagnostic> {
        match self.peek().clone() {
            Tok::Name(name) => {
                let pos = self.bump().pos;
                Ok(Ident { name, pos })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> Result<i64, Diagnostic> {
        let neg = if self.peek() == &Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn count(&mut self) -> Result<u64, Diagnostic> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v as u64)
            }
            _ => Err(self.unexpected("a non-negative integer")),
        }
    }

    fn decl(&mut self) -> Result<Decl, Diagnostic> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Name(n) => n.clone(),
            _ => return Err(self.unexpected(DECL_KEYWORDS)),
        };
        let kind = match kw.as_str() {
            "domain" => {
                self.bump();
                let name = self.ident("a domain name")?;
                self.expect(Tok::Assign)?;
                let def = if self.is_kw("bool") {
                    self.bump();
                    DomainDef::Bool
                } else if self.peek() == &Tok::LBrace {
                    self.bump();
                    let mut syms = vec![self.ident("a symbol")?];
                    while self.peek() == &Tok::Comma {
                        self.bump();
                        syms.push(self.ident("a symbol")?);
                    }
                    self.expect(Tok::RBrace)?;
                    DomainDef::Enum(syms)
                } else if matches!(self.peek(), Tok::Int(_) | Tok::Minus) {
                    let lo = self.int()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.int()?;
                    DomainDef::Range(lo, hi)
                } else {
                    return Err(self.unexpected("a range `lo..hi`, `{ symbols }` or `bool`"));
                };
                DeclKind::Domain { name, def }
            }
            "alphabet" => {
                self.bump();
                let kind = if self.is_kw("sys") {
                    AlphabetKind::Sys
                } else if self.is_kw("view") {
                    AlphabetKind::View
                } else {
                    return Err(self.unexpected("`sys` or `view`"));
                };
                self.bump();
                let name = self.ident("an alphabet name")?;
                self.expect(Tok::LBrace)?;
                let mut entries = Vec::new();
                loop {
                    let var = self.ident("a variable name")?;
                    self.expect(Tok::Colon)?;
                    let dom = self.ident("a domain name")?;
                    entries.push((var, dom));
                    if self.peek() == &Tok::Comma {
                        self.bump();
                    }
                    if self.peek() == &Tok::RBrace {
                        self.bump();
                        break;
                    }
                }
                DeclKind::Alphabet { kind, name, entries }
            }
            "view" => {
                self.bump();
                let name = self.ident("a view name")?;
                self.keyword("over")?;
                let sys = self.ident("a system alphabet name")?;
                self.expect(Tok::Comma)?;
                let vu = self.ident("a view alphabet name")?;
                self.expect(Tok::Assign)?;
                let body = self.expr(PREC_IF)?;
                DeclKind::View { name, sys, vu, body }
            }
            "system" => {
                self.bump();
                let name = self.ident("a system name")?;
                self.keyword("over")?;
                let sys = self.ident("a system alphabet name")?;
                self.expect(Tok::Assign)?;
                let def = match self.delta_or_expr()? {
                    Expected::Delta(e) => SystemDef::Delta(e),
                    Expected::Relation(e) => SystemDef::Relation(e),
                };
                DeclKind::System { name, sys, def }
            }
            "design" => {
                self.bump();
                let name = self.ident("a design name")?;
                self.keyword("over")?;
                let sys = self.ident("a system alphabet name")?;
                self.expect(Tok::Assign)?;
                let pre = self.expr(PREC_IF)?;
                self.expect(Tok::Turnstile)?;
                let post = self.expr(PREC_IF)?;
                DeclKind::Design { name, sys, pre, post }
            }
            "secret" => {
                self.bump();
                let name = self.ident("a secret name")?;
                self.keyword("over")?;
                let sys = self.ident("a system alphabet name")?;
                self.expect(Tok::Assign)?;
                let body = self.expr(PREC_IF)?;
                DeclKind::Secret { name, sys, body }
            }
            "policy" => {
                self.bump();
                let name = self.ident("a policy name")?;
                self.expect(Tok::Assign)?;
                self.keyword("filter")?;
                let filter = self.expr(PREC_IF)?;
                let baseline = if self.is_kw("baseline") {
                    self.bump();
                    self.expect(Tok::LBrace)?;
                    let mut toks = vec![self.ident("a secret value")?];
                    while self.peek() == &Tok::Comma {
                        self.bump();
                        toks.push(self.ident("a secret value")?);
                    }
                    self.expect(Tok::RBrace)?;
                    Some(toks)
                } else {
                    None
                };
                DeclKind::Policy { name, filter, baseline }
            }
            "check" => {
                self.bump();
                DeclKind::Check(self.query()?)
            }
            _ => return Err(self.unexpected(DECL_KEYWORDS)),
        };
        Ok(Decl { kind, pos })
    }

    fn delta_or_expr(&mut self) -> Result<Expected, Diagnostic> {
        if self.is_kw("delta") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            self.bump();
            let e = self.expr(PREC_IF)?;
            self.expect(Tok::RParen)?;
            Ok(Expected::Delta(e))
        } else {
            Ok(Expected::Relation(self.expr(PREC_IF)?))
        }
    }

    fn expectation(&mut self) -> Result<Option<Expected>, Diagnostic> {
        if self.is_kw("expect") {
            self.bump();
            Ok(Some(self.delta_or_expr()?))
        } else {
            Ok(None)
        }
    }

    fn query(&mut self) -> Result<Query, Diagnostic> {
        let kw = match self.peek() {
            Tok::Name(n) => n.clone(),
            _ => String::new(),
        };
        let q = match kw.as_str() {
            "healthy" => {
                self.bump();
                Query::Healthy(self.ident("a view name")?)
            }
            "localise" | "globalise" => {
                self.bump();
                let view = self.ident("a view name")?;
                let target = self.ident("a system or design name")?;
                let expect = self.expectation()?;
                if kw == "localise" {
                    Query::Localise { view, target, expect }
                } else {
                    Query::Globalise { view, target, expect }
                }
            }
            "infer" => {
                self.bump();
                let system = self.ident("a system name")?;
                let view = self.ident("a view name")?;
                let observation = self.expr(PREC_IF)?;
                let expect = self.expectation()?;
                Query::Infer {
                    system,
                    view,
                    observation,
                    expect,
                }
            }
            "leak" => {
                self.bump();
                Query::Leak {
                    system: self.ident("a system name")?,
                    view: self.ident("a view name")?,
                    secret: self.ident("a secret name")?,
                    policy: self.ident("a policy name")?,
                }
            }
            "refines" => {
                self.bump();
                Query::Refines {
                    implementation: self.ident("a system name")?,
                    specification: self.ident("a system name")?,
                }
            }
            "lemma335" => {
                self.bump();
                Query::Lemma335 {
                    max_sys: self.count()?,
                    max_vu: self.count()?,
                }
            }
            _ => {
                return Err(self.unexpected(
                    "`healthy`, `localise`, `globalise`, `infer`, `leak`, `refines` or `lemma335`",
                ))
            }
        };
        Ok(q)
    }

    fn enter(&mut self) -> Result<(), Diagnostic> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::syntax(
                self.pos(),
                format!("expression nested more than {MAX_DEPTH} levels deep"),
            ));
        }
        Ok(())
    }

    fn expr(&mut self, min: u8) -> Result<SExpr, Diagnostic> {
        self.enter()?;
        let r = self.expr_inner(min);
        self.depth -= 1;
        r
    }

    fn expr_inner(&mut self, min: u8) -> Result<SExpr, Diagnostic> {
        if self.is_kw("if") {
            let pos = self.bump().pos;
            let c = self.expr(PREC_IF)?;
            self.keyword("then")?;
            let a = self.expr(PREC_IF)?;
            self.keyword("else")?;
            let b = self.expr(PREC_IF)?;
            return Ok(SExpr {
                kind: SExprKind::If(Box::new(c), Box::new(a), Box::new(b)),
                pos,
            });
        }
        let mut lhs = self.unary()?;
        let mut last_nonassoc: Option<u8> = None;
        while let Some(op) = binop(self.peek()) {
            let p = op.precedence();
            if p < min {
                break;
            }
            if last_nonassoc == Some(p) {
                return Err(Diagnostic::syntax(
                    self.pos(),
                    format!("comparison operators do not chain; parenthesise before `{}`", op.symbol().unwrap_or("")),
                ));
            }
            let pos = self.bump().pos;
            let rmin = match op.assoc() {
                Assoc::Right => p,
                Assoc::Left | Assoc::None => p + 1,
            };
            let rhs = self.expr(rmin)?;
            last_nonassoc = (op.assoc() == Assoc::None).then_some(p);
            lhs = SExpr {
                kind: SExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SExpr, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Tok::Bang | Tok::Minus => {
                let neg = self.bump().tok == Tok::Minus;
                self.enter()?;
                let a = self.unary();
                self.depth -= 1;
                let a = Box::new(a?);
                Ok(SExpr {
                    kind: if neg { SExprKind::Neg(a) } else { SExprKind::Not(a) },
                    pos,
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<SExpr, Diagnostic> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                SExprKind::Int(v)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(PREC_IF)?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Name(n) => match n.as_str() {
                "true" | "false" => {
                    self.bump();
                    SExprKind::Bool(n == "true")
                }
                "min" | "max" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let a = self.expr(PREC_IF)?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr(PREC_IF)?;
                    self.expect(Tok::RParen)?;
                    let op = if n == "min" { BinOp::Min } else { BinOp::Max };
                    SExprKind::Bin(op, Box::new(a), Box::new(b))
                }
                "if" => return self.expr(PREC_IF),
                _ if RESERVED.contains(&n.as_str()) => {
                    return Err(self.unexpected("an expression"));
                }
                _ => {
                    self.bump();
                    if self.peek() == &Tok::Colon {
                        let ns = match n.as_str() {
                            "sys" => Namespace::Sys,
                            "vu" => Namespace::Vu,
                            _ => {
                                return Err(Diagnostic::syntax(
                                    pos,
                                    format!("unknown namespace `{n}`; expected `sys` or `vu`"),
                                ))
                            }
                        };
                        self.bump();
                        let name = self.ident("a variable name")?.name;
                        let primed = if self.peek() == &Tok::Tick {
                            self.bump();
                            true
                        } else {
                            false
                        };
                        SExprKind::Var { ns, name, primed }
                    } else if self.peek() == &Tok::Tick {
                        return Err(Diagnostic::syntax(
                            pos,
                            format!("`{n}'` needs a namespace: write `sys:{n}'` or `vu:{n}'`"),
                        ));
                    } else {
                        SExprKind::Name(n)
                    }
                }
            },
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(SExpr { kind, pos })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_spec_has_four_declarations() {
        let s = parse(
            "domain D = 0..3  alphabet sys S { x: D }  alphabet view W { a: D }  view V over S, W = vu:a == sys:x",
        )
        .unwrap();
        assert_eq!(s.decls.len(), 4);
        match &s.decls[3].kind {
            DeclKind::View { body, .. } => assert_eq!(body.to_core().to_string(), "vu:a == sys:x"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_expression() {
        let e = parse("view V = vu:a ==").unwrap_err();
        assert!(e.message.contains("`over`"), "{e}");
        let e = parse("domain D = 0..1 alphabet sys S { x: D } alphabet view W { a: D } view V over S, W = vu:a ==")
            .unwrap_err();
        assert!(e.message.contains("end of input"), "{e}");
    }

    #[test]
    fn precedence() {
        let show = |s: &str| parse_expr(s).unwrap().to_core().to_string();
        assert_eq!(show("(a || b) && c"), "(a || b) && c");
        assert_eq!(show("a || b && c"), "a || b && c");
        assert_eq!(show("!(sys:x == 1)"), "!(sys:x == 1)");
        assert_eq!(show("a -> b -> c"), "a -> b -> c");
        assert_eq!(show("(a -> b) -> c"), "(a -> b) -> c");
        assert_eq!(show("sys:x - (sys:y - 1)"), "sys:x - (sys:y - 1)");
        assert_eq!(show("sys:x - sys:y - 1"), "sys:x - sys:y - 1");
        assert_eq!(show("-2 * sys:x"), "-2 * sys:x");
        assert_eq!(show("max(sys:x, sys:y) >= 5"), "max(sys:x, sys:y) >= 5");
        assert_eq!(show("(if a then b else c) && d"), "(if a then b else c) && d");
        assert_eq!(show("a <-> b -> c"), "a <-> b -> c");
    }

    #[test]
    fn errors() {
        assert!(parse_expr("a < b < c").unwrap_err().message.contains("chain"));
        assert!(parse_expr("x'").unwrap_err().message.contains("namespace"));
        assert!(parse_expr("top:ok").unwrap_err().message.contains("namespace"));
        assert!(parse_expr("if a then b").is_err());
        let deep = "(".repeat(10_000) + "1" + &")".repeat(10_000);
        assert!(parse_expr(&deep).unwrap_err().message.contains("nested"));
        let bangs = "!".repeat(10_000) + "a";
        assert!(parse_expr(&bangs).is_err());
    }

    #[test]
    fn queries() {
        let s = parse(
            "check localise V P expect delta(vu:a >= 0)\ncheck infer P V vu:a == 1 expect sys:x == 1\ncheck lemma335 1 2",
        )
        .unwrap();
        assert_eq!(s.decls.len(), 3);
        assert!(matches!(
            &s.decls[0].kind,
            DeclKind::Check(Query::Localise { expect: Some(Expected::Delta(_)), .. })
        ));
        assert!(matches!(&s.decls[2].kind, DeclKind::Check(Query::Lemma335 { max_sys: 1, max_vu: 2 })));
    }
}
