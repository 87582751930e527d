use proptest::prelude::*;
use shasmc::dsl::ast::{Ast, UnaryOp};
use shasmc::dsl::{parse_expr, parse_model, parse_query, query_lines, DslError, Model, PathAst, Query};
use shasmc::expr::{BinOp, Expr};
use shasmc::model::ComposeError;
use shasmc::models;
use shasmc::query::{Bound, BoundQuery, Formula};

#[test]
fn bundled_models_elaborate() {
    let shapes = [
        ("ball", 3, 4),
        ("rooms", 3, 5),
        ("oscillator", 1, 9),
        ("oscillator_stochastic", 16, 9),
    ];
    for ((name, text), (n2, comps, vars)) in models::ALL.iter().zip(shapes) {
        assert_eq!(*name, n2);
        let m = Model::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(m.network.components.len(), comps, "{name}");
        assert_eq!(m.network.decls.vars.len(), vars, "{name}");
    }
}

#[test]
fn pretty_printed_models_parse_back() {
    for (name, text) in models::ALL {
        let doc = parse_model(text).unwrap();
        let again = parse_model(&doc.to_string()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(doc, again, "{name}");
    }
}

#[test]
fn instance_names_and_locations_resolve() {
    let m = Model::parse(models::ROOMS).unwrap();
    let room0 = m.network.component_index("Room(0)").unwrap();
    let init = m.network.components[room0].location_index("Init").unwrap();
    assert_eq!(
        m.expr("Room(0).Init").unwrap(),
        Expr::At {
            component: room0,
            location: init
        }
    );
    assert_eq!(m.expr("T[1]").unwrap(), Expr::Var(m.slot("T[1]").unwrap()));
}

#[test]
fn constants_fold_and_functions_inline() {
    let m = Model::parse(
        "const k = 2 * 3, v[3] = {1, 2, 4};
         clock x;
         fn twice(a) = 2 * a;
         template P { location L initial { x' = twice(k) + v[2]; } }
         system P;",
    )
    .unwrap();
    assert_eq!(m.expr("k + v[1]").unwrap(), Expr::Num(8.0));
    let rates = m.network.rates(&m.network.initial_state()).unwrap();
    assert_eq!(rates[m.slot("x").unwrap()], 16.0);
}

fn syntax_pos(e: DslError) -> (u32, u32) {
    match e {
        DslError::Syntax { pos, .. } => (pos.line, pos.col),
        other => panic!("expected a syntax error, got {other}"),
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let e = parse_model("const a = 1;\ntemplate T { location L initial edge }").unwrap_err();
    assert_eq!(syntax_pos(e), (2, 33));
    assert!(matches!(parse_expr("1 +"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse_query("Pr[<=10](<> x > 1"), Err(DslError::Syntax { .. })));
}

#[test]
fn resolution_errors() {
    let unresolved = parse_model("template T { location L initial { invariant q <= 1; } } system T;");
    assert!(matches!(
        unresolved,
        Err(DslError::UnresolvedIdentifier { ref name, .. }) if name == "q"
    ));
    let dup = parse_model("const a = 1; const a = 2; template T { location L initial; } system T;");
    assert!(matches!(dup, Err(DslError::DuplicateDeclaration { .. })));
    let m = Model::parse(models::BALL).unwrap();
    assert!(matches!(m.query("Pr[<=20](<> z > 1)"), Err(DslError::UnresolvedIdentifier { .. })));
    assert!(matches!(m.query("Pr[<=20](<> Ball.Nowhere)"), Err(DslError::UnresolvedIdentifier { .. })));
}

#[test]
fn type_errors() {
    let random_guard = Model::parse(
        "clock x; template T { location L initial { x' = 1; } edge L -> L { guard x > random(1); } } system T;",
    );
    assert!(matches!(random_guard, Err(DslError::Type { .. })));
    let rate_of_double = Model::parse(
        "double d; template T { location L initial { d' = 1; } } system T;",
    );
    assert!(matches!(rate_of_double, Err(DslError::Type { .. })));
}

#[test]
fn bad_bounds() {
    let m = Model::parse(models::BALL).unwrap();
    assert!(matches!(m.query("Pr[<=-1](<> y > 1)"), Err(DslError::BadBound { .. } | DslError::Syntax { .. })));
    assert!(matches!(m.query("Pr[#<=x](<> y > 1)"), Err(DslError::BadBound { .. })));
    assert!(matches!(m.query("Pr[<=1](y > 1 U[<=-2] y < 0)"), Err(DslError::BadBound { .. } | DslError::Syntax { .. })));
    // A cost bound must name a variable.
    assert!(matches!(m.query("Pr[g<=3](<> y > 1)"), Err(DslError::Type { .. })));
}

#[test]
fn composition_errors() {
    let clash = Model::parse(
        "broadcast chan a;
         template P { location L initial { rate 1; } edge L -> L { sync a!; } }
         template Q { location L initial { rate 1; } edge L -> L { sync a!; } }
         system P, Q;",
    );
    assert!(matches!(clash, Err(DslError::Compose(ComposeError::OutputClash { .. }))), "{clash:?}");
    let shared = Model::parse(
        "clock x;
         template P { location L initial { x' = 1; } }
         template Q { location L initial { x' = 2; } }
         system P, Q;",
    );
    assert!(matches!(shared, Err(DslError::Compose(ComposeError::SharedVariable { .. }))), "{shared:?}");
}

#[test]
fn queries_bind_to_bounds_and_formulas() {
    let m = Model::parse(models::BALL).unwrap();
    match m.query("Pr[<=20](<> time>=12 and y>=4)").unwrap() {
        BoundQuery::Probability { bound, formula } => {
            assert_eq!(bound, Bound::Time(20.0));
            assert!(matches!(formula, Formula::Eventually(_)));
        }
        q => panic!("{q:?}"),
    }
    assert!(matches!(
        m.query("simulate 3 [#<=5] {x, y}").unwrap(),
        BoundQuery::Simulate { runs: 3, bound: Bound::Steps(5), ref observables } if observables.len() == 2
    ));
    assert!(matches!(
        m.query("Pr[x<=3](<> y > 1)").unwrap(),
        BoundQuery::Probability { bound: Bound::Cost { limit, .. }, .. } if limit == 3.0
    ));
    assert!(matches!(m.query("E[<=5; 7](min: y)").unwrap(), BoundQuery::Value { runs: 7, .. }));
    assert!(matches!(
        m.query("distance[<=5; 2](c: y > 5 && true U[<=1] y <= 4)").unwrap(),
        BoundQuery::Distance { runs: 2, .. }
    ));
}

#[test]
fn nested_temporal_operators_are_rejected() {
    let m = Model::parse(models::BALL).unwrap();
    assert!(m.query("Pr[<=20](<> y > 1 && <> y < 1)").is_err());
}

#[test]
fn query_files_skip_comments_and_blanks() {
    let text = "// header\nPr[<=1](<> true)\n\n  E[<=1; 2](max: 1) // trailing\n";
    assert_eq!(
        query_lines(text),
        vec![(2, "Pr[<=1](<> true)"), (4, "E[<=1; 2](max: 1)")]
    );
}

fn ast() -> impl Strategy<Value = Ast> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|n| Ast::Num(f64::from(n) / 8.0)),
        any::<bool>().prop_map(Ast::Bool),
        prop::sample::select(vec!["x", "y", "rate_k", "T"]).prop_map(Ast::name),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        let ops = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Ge,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
            BinOp::Imply,
        ]);
        prop_oneof![
            (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Ast::bin(op, a, b)),
            (prop::sample::select(vec![UnaryOp::Neg, UnaryOp::Not]), inner.clone())
                .prop_map(|(op, a)| Ast::Unary(op, Box::new(a))),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, a, b)| Ast::Cond(Box::new(c), Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Ast::Call("max".into(), vec![a, b])),
        ]
    })
}

fn path() -> impl Strategy<Value = PathAst> {
    let atom = (prop::sample::select(vec!["x", "y"]), 0u32..20).prop_map(|(v, c)| {
        PathAst::Atom(Ast::bin(BinOp::Le, Ast::name(v), Ast::Num(f64::from(c))))
    });
    atom.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| PathAst::Not(Box::new(p))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PathAst::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PathAst::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner, 0u32..10)
                .prop_map(|(a, b, t)| PathAst::Until(Box::new(a), Box::new(b), f64::from(t))),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_print_and_parse_back(e in ast()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn queries_print_and_parse_back(p in path(), top in 0..3u8, t in 1u32..100) {
        let formula = match top {
            0 => PathAst::Eventually(Box::new(p)),
            1 => PathAst::Always(Box::new(p)),
            _ => p,
        }
        .normalize();
        let q = Query::ProbEstimate {
            bound: shasmc::dsl::ast::BoundAst::Time(f64::from(t)),
            formula,
        };
        let text = q.to_string();
        prop_assert_eq!(parse_query(&text).unwrap(), q, "{}", text);
    }
}
