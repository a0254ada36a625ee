//! Random syntax trees survive printing and reparsing.

use proptest::prelude::*;
use viewcheck_core::{BinOp, Namespace};
use viewcheck_dsl::ast::{SExpr, SExprKind};
use viewcheck_dsl::diag::Pos;
use viewcheck_dsl::{parse, parse_expr, printer};

fn node(kind: SExprKind) -> SExpr {
    SExpr { kind, pos: Pos { line: 1, col: 1 } }
}

const OPS: [BinOp; 14] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Max,
    BinOp::Min,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
    BinOp::Implies,
];

fn leaf() -> impl Strategy<Value = SExpr> {
    prop_oneof![
        (0i64..1000).prop_map(|i| node(SExprKind::Int(i))),
        any::<bool>().prop_map(|b| node(SExprKind::Bool(b))),
        prop::sample::select(vec!["red", "green", "OK"]).prop_map(|s| node(SExprKind::Name(s.into()))),
        (any::<bool>(), prop::sample::select(vec!["x", "y", "a1", "g_A"]), any::<bool>()).prop_map(
            |(sys, n, primed)| node(SExprKind::Var {
                ns: if sys { Namespace::Sys } else { Namespace::Vu },
                name: n.into(),
                primed,
            })
        ),
    ]
}

fn tree() -> impl Strategy<Value = SExpr> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| node(SExprKind::Neg(Box::new(a)))),
            inner.clone().prop_map(|a| node(SExprKind::Not(Box::new(a)))),
            (prop::sample::select(OPS.to_vec().into_iter().chain([BinOp::Iff]).collect::<Vec<_>>()), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| node(SExprKind::Bin(op, Box::new(a), Box::new(b)))),
            (inner.clone(), inner.clone(), inner)
                .prop_map(|(c, a, b)| node(SExprKind::If(Box::new(c), Box::new(a), Box::new(b)))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn expressions_round_trip(e in tree()) {
        let text = printer::expr(&e);
        let back = parse_expr(&text).map_err(|d| TestCaseError::fail(format!("{text}: {d}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
    }

    #[test]
    fn declarations_round_trip(e in tree()) {
        let src = format!("view V over S, W = {}\ncheck infer P V {}\n", printer::expr(&e), printer::expr(&e));
        let ast = parse(&src).map_err(|d| TestCaseError::fail(format!("{src}: {d}")))?;
        let printed = printer::spec(&ast);
        prop_assert_eq!(parse(&printed).unwrap(), ast);
    }
}
