mod common;

use frobjet::jetcalc::{diff_degree, dx, integrate_x, max_order, var_deriv, DiffDegree};
use frobjet::symcore::{parse, print, simplify, Expr, Field, Scalar, Var};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| Scalar::new(n, d))
}

fn jet_var(max_order: u32) -> impl Strategy<Value = Var> {
    (
        prop_oneof![Just(Field::V), Just(Field::U)],
        1u32..=2,
        0..=max_order,
    )
        .prop_map(|(f, i, s)| Var::jet(f, i, s))
}

fn v_jet(max_order: u32) -> impl Strategy<Value = Var> {
    (1u32..=2, 0..=max_order).prop_map(|(i, s)| Var::jet(Field::V, i, s))
}

fn monomial(
    vars: impl Strategy<Value = Var>,
    exps: std::ops::RangeInclusive<i32>,
) -> impl Strategy<Value = Expr> {
    (scalar(), prop::collection::vec((vars, exps), 0..=3)).prop_map(|(c, pows)| {
        pows.into_iter().fold(Expr::constant(c), |acc, (v, e)| {
            acc.mul(&Expr::var(v).pow(e).expect("variable base"))
        })
    })
}

fn poly(max_order: u32) -> impl Strategy<Value = Expr> {
    prop::collection::vec(monomial(jet_var(max_order), 1..=3), 1..=4)
        .prop_map(|ms| ms.iter().fold(Expr::zero(), |a, m| a.add(m)))
}

fn diff_poly(max_order: u32) -> impl Strategy<Value = Expr> {
    prop::collection::vec(monomial(v_jet(max_order), 1..=3), 1..=4)
        .prop_map(|ms| ms.iter().fold(Expr::zero(), |a, m| a.add(m)))
}

/// Rational functions with monomial and binomial denominators plus logs.
fn rational_fn() -> impl Strategy<Value = Expr> {
    (
        poly(2),
        poly(1),
        prop::option::of(monomial(jet_var(2), 1..=1)),
        prop::option::of((scalar(), jet_var(1))),
    )
        .prop_map(|(num, den, lin, log)| {
            let den = match lin {
                Some(l) if !l.is_zero() => den.add(&l).add(&Expr::one()),
                _ => den.add(&Expr::one()),
            };
            let mut e = match num.checked_div(&den) {
                Ok(q) => q,
                Err(_) => num,
            };
            if let Some((c, v)) = log {
                if let Ok(l) = Expr::var(v).log() {
                    e = e.add(&l.scale(&c));
                }
            }
            e
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_is_commutative_and_associative(a in poly(3), b in poly(3), c in poly(3)) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn multiplication_distributes(a in poly(2), b in poly(2), c in poly(2)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&Expr::one()), a.clone());
    }

    #[test]
    fn rational_functions_form_a_field(a in rational_fn(), b in rational_fn()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        if !b.is_zero() {
            let q = a.checked_div(&b).unwrap();
            prop_assert_eq!(q.mul(&b), a);
        }
    }

    #[test]
    fn simplify_is_idempotent(e in rational_fn()) {
        let once = simplify(&e);
        prop_assert_eq!(&once, &e);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn partial_derivative_obeys_leibniz(a in rational_fn(), b in rational_fn(), x in jet_var(2)) {
        let lhs = a.mul(&b).partial(&x);
        let rhs = a.partial(&x).mul(&b).add(&a.mul(&b.partial(&x)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn total_derivative_raises_degree(f in diff_poly(4)) {
        if let DiffDegree::Homogeneous(d) = diff_degree(&f) {
            let g = dx(&f);
            if !g.is_zero() {
                prop_assert_eq!(diff_degree(&g), DiffDegree::Homogeneous(d + 1));
            }
        }
        if let Some(n) = max_order(&f) {
            prop_assert!(max_order(&dx(&f)).unwrap_or(0) <= n + 1);
        }
    }

    #[test]
    fn perfect_power_denominators_are_factored(p in poly(1), k in 2i32..=4) {
        let base = p.add(&Expr::int(7));
        if let Ok(inv) = base.pow(-k) {
            let expanded = parse(&format!("1/({})", base.pow(k).unwrap())).unwrap();
            prop_assert_eq!(expanded, inv);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_parse_round_trip(e in rational_fn()) {
        let text = print(&e);
        let back = parse(&text).unwrap();
        prop_assert_eq!(print(&back), text);
        prop_assert_eq!(back, e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn variational_derivative_kills_total_derivatives(f in diff_poly(4)) {
        let g = dx(&f);
        for i in 1..=2 {
            prop_assert!(var_deriv(&g, Field::V, i).is_zero());
        }
    }

    #[test]
    fn integration_inverts_total_derivative(f in diff_poly(4)) {
        let h = integrate_x(&dx(&f)).unwrap();
        prop_assert!(h.sub(&f).is_constant());
        prop_assert_eq!(dx(&h), dx(&f));
    }
}

#[test]
fn integration_rejects_inexact_input() {
    assert!(integrate_x(&common::pe("v1*v1_2^2")).is_err());
}
