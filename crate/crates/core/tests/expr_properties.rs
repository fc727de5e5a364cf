use std::collections::BTreeMap;

use kslie::expr::{parse, DomainBox, Expr, ExprError, Func, Symbol, ZeroTest};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "v", "a"];

fn point(vals: [f64; 3]) -> BTreeMap<Symbol, f64> {
    VARS.iter().map(|s| Symbol::new(s)).zip(vals).collect()
}

fn dom() -> DomainBox {
    DomainBox::builder()
        .interval("x", -2.0, 2.0)
        .interval("v", -2.0, 2.0)
        .interval("a", -2.0, 2.0)
        .build()
        .unwrap()
}

// Quotients and roots use positive arguments so random points are rarely
// singular; the properties still skip undefined points.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(VARS.to_vec()).prop_map(Expr::var),
        (-5i64..=5).prop_map(Expr::int),
        (-4i64..=4, 1i64..=4).prop_map(|(p, q)| Expr::rational(p, q)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone(), 1i64..=3).prop_map(|(a, b, c)| a / (Expr::int(c) + b.pow(2))),
            (inner.clone(), -2i64..=4).prop_map(|(a, n)| a.pow(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.prop_map(|a| (Expr::one() + a.pow(2)).sqrt()),
        ]
    })
}

fn arb_point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), p in arb_point(), q in 0usize..3) {
        let var = Symbol::new(VARS[q]);
        let d = e.differentiate(&var);
        let h = 1e-5;
        let mut lo = p;
        let mut hi = p;
        lo[q] -= h;
        hi[q] += h;
        let vals = (d.evaluate(&point(p)), e.evaluate(&point(hi)), e.evaluate(&point(lo)));
        if let (Ok(dv), Ok(f1), Ok(f0)) = vals {
            let fd = (f1 - f0) / (2.0 * h);
            // skip points where rounding dominates the difference quotient
            let noise = 1e-16 * (f1.abs() + f0.abs()) / h;
            prop_assume!(noise < 1e-6 && dv.abs() < 1e6);
            prop_assert!((dv - fd).abs() <= 1e-4 * dv.abs().max(1.0), "{e} d/d{var}: {dv} vs {fd}");
        }
    }

    #[test]
    fn simplify_preserves_value(e in arb_expr()) {
        let s = e.simplify();
        let mut zt = ZeroTest::new(7);
        for p in zt.sample_points(&dom(), 50).unwrap() {
            match (e.evaluate_with_scale(&p), s.evaluate(&p)) {
                (Ok((a, scale)), Ok(b)) => {
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + scale), "{e} -> {s}: {a} vs {b}");
                }
                (Err(ExprError::UndefinedAtPoint(_)), _) | (_, Err(ExprError::UndefinedAtPoint(_))) => {}
                (Err(x), _) | (_, Err(x)) => prop_assert!(false, "{x}"),
            }
        }
    }

    #[test]
    fn difference_with_itself_is_zero(e in arb_expr(), seed in any::<u64>()) {
        let mut zt = ZeroTest::new(seed);
        prop_assert!(zt.is_zero(&(&e - &e), &dom()).unwrap());
    }

    #[test]
    fn printing_round_trips(e in arb_expr(), seed in any::<u64>()) {
        let text = e.to_string();
        let back = parse(&text, &VARS).unwrap();
        let mut zt = ZeroTest::new(seed);
        prop_assert!(zt.is_zero(&(&e - &back), &dom()).unwrap(), "{text}");
    }
}

#[test]
fn function_names_round_trip() {
    for f in [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt] {
        assert_eq!(Func::from_name(f.name()), Some(f));
    }
}
