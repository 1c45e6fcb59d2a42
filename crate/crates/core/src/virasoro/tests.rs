use super::*;
use crate::frobman::ManifoldSpec;
use crate::symcore::parse;

fn pe(s: &str) -> Expr {
    parse(s).unwrap()
}

fn kdv() -> FrobeniusManifold {
    FrobeniusManifold::new(ManifoldSpec::kdv()).unwrap()
}

fn kdv_fixture() -> PeriodFixture {
    PeriodFixture {
        b: [(
            (1, 2),
            pe("-u1_2/(u1 - lambda)^2 + 7/4*u1_1^2/(u1 - lambda)^3"),
        )]
        .into_iter()
        .collect(),
    }
}

fn kdv_d() -> (CanonicalChart, DLambdaOp) {
    let chart = kdv().canonical_chart().unwrap();
    let d = build_dlambda(&chart, Some(&kdv_fixture())).unwrap();
    (chart, d)
}

#[test]
fn c_constants() {
    assert_eq!(c_constant(1), Scalar::new(3, 2));
    assert_eq!(c_constant(2), Scalar::new(15, 4));
    assert_eq!(c_constant(3), Scalar::new(105, 8));
}

#[test]
fn dlambda_basic_actions() {
    let (_, d) = kdv_d();
    assert_eq!(d.apply(&pe("u1")).unwrap(), pe("1/(u1 - lambda)"));
    assert_eq!(
        d.apply(&pe("u1_1")).unwrap(),
        pe("-3/2*u1_1/(u1 - lambda)^2")
    );
    assert_eq!(
        d.apply(&pe("log(u1_1)/24")).unwrap(),
        pe("-1/16/(u1 - lambda)^2")
    );
    assert!(matches!(
        d.apply(&pe("u1_3")),
        Err(VirError::JetOrderExceedsFixture { i: 1, r: 3 })
    ));
}

#[test]
fn leading_actions() {
    let (_, d) = kdv_d();
    let one = leading_action(&d, 1, 1).unwrap();
    assert_eq!(one.lead, "-3/2");
    assert_eq!(one.remainder, "0");
    let two = leading_action(&d, 1, 2).unwrap();
    assert_eq!(two.lead, "-2");
    assert!(two.remainder_smaller);
    assert_ne!(two.remainder, "0");
}

#[test]
fn p1_leading_action_has_gamma_term() {
    let m = FrobeniusManifold::new(ManifoldSpec::p1()).unwrap();
    let chart = m.canonical_chart().unwrap();
    let d = build_dlambda(&chart, None).unwrap();
    for i in 1..=2 {
        let a = leading_action(&d, i, 1).unwrap();
        assert_eq!(a.lead, "-3/2");
        assert_eq!(a.gamma.as_deref(), Some("-1"));
        assert_eq!(a.remainder, "0");
    }
}

#[test]
fn pole_profiles() {
    let (_, d) = kdv_d();
    let p = pole_profile(&d, &pe("u1^3")).unwrap();
    assert!(p.ok());
    assert_eq!(p.poles[0].order, 1);
    let p = pole_profile(&d, &pe("log(u1_1)/24")).unwrap();
    assert!(p.ok(), "{p:?}");
    assert_eq!(p.poles[0].top, "-1/16");
    let p = pole_profile(&d, &pe("u1*u1_2 + u1_1^2/u1 + u1_2^2/u1_1")).unwrap();
    assert!(p.ok(), "{p:?}");
}

#[test]
fn expansion_at_infinity() {
    let e = pe("1/(u1 - lambda)");
    let s = expand_at_infinity(&e, 4).unwrap();
    assert_eq!(s[&1], pe("-1"));
    assert_eq!(s[&3], pe("-u1^2"));
    assert!(regular_at_infinity(&e).unwrap());
    assert!(!regular_at_infinity(&pe("lambda/(u1 - lambda)^2 + 1")).unwrap());
}

#[test]
fn kdv_commutation_relations() {
    let v = VirasoroCoeffs::kdv(3, 9);
    for k in -1..=2 {
        for l in -1..=2 {
            if k + l > 2 {
                continue;
            }
            let r = commutation_check(&v, k, l, 2).unwrap();
            assert!(r.ok(), "({k},{l}): {}", r.residual);
        }
    }
    let mut bad = v.clone();
    bad.b.insert((0, (1, 1), (1, 1)), Scalar::from_int(5));
    assert!(!commutation_check(&bad, -1, 1, 2).unwrap().ok());
    assert!(matches!(
        commutation_check(&v, 0, 2, 8),
        Err(VirError::WindowTooSmall(_))
    ));
}

#[test]
fn string_flow() {
    let v = VirasoroCoeffs::kdv(2, 6);
    let q = genus0_hamiltonian(&v, -1, 2).unwrap();
    assert_eq!(q, pe("t1_0^2/2 + t1_1*f1_0 + t1_2*f1_1"));
    let zero = v.scaled(&Scalar::zero());
    assert!(genus0_hamiltonian(&zero, 1, 2).unwrap().is_zero());
}

#[test]
fn tau_cover_dm() {
    let m = kdv();
    let v = VirasoroCoeffs::kdv(3, 6);
    let cover = TauCover::new(&m, &v, 2).unwrap();
    for k in -1..=3 {
        let expect = pe("v1").pow(k + 1).unwrap().neg();
        assert_eq!(cover.dm_on_jet(k, 1, 0).unwrap(), expect);
    }
    assert_eq!(cover.dm_on_jet(0, 1, 1).unwrap(), pe("-3/2*v1_1"));
    let flow = cover.flow_genus0(-1).unwrap();
    assert_eq!(flow.v[0], pe("1 + t1_1*v1_1 + t1_2*v1*v1_1"));
}

#[test]
fn d_operator_matches_tau_cover() {
    let m = kdv();
    let v = VirasoroCoeffs::kdv(3, 6);
    let cover = TauCover::new(&m, &v, 2).unwrap();
    let (chart, d) = kdv_d();
    for f in ["u1", "u1_1", "log(u1_1)/24", "u1_2", "u1_1^2/u1"] {
        for row in d_operator_consistency(&cover, &d, &chart, &pe(f), 3).unwrap() {
            assert!(row.matches, "{f}: {row:?}");
        }
    }
}

#[test]
fn genus_one_residual() {
    let m = kdv();
    let v = VirasoroCoeffs::kdv(3, 6);
    let cover = TauCover::new(&m, &v, 2).unwrap();
    let f1 = pe("log(v1_1)/24");
    for k in -1..=3 {
        assert!(cover.genus1_residual(k, &f1).unwrap().is_zero(), "m = {k}");
    }
    assert_eq!(cover.genus1_residual(1, &Expr::zero()).unwrap(), pe("v1/8"));
    assert_eq!(
        VirasoroCoeffs::constant_from_spectrum(&[Scalar::zero()]),
        Scalar::new(1, 16)
    );
}

#[test]
fn linearization_recovers_generators() {
    let (_, d) = kdv_d();
    let basis: Vec<Expr> = ["u1_2", "u1_1^2", "u1*u1_2", "u1*u1_1^2", "u1_1^2/u1"]
        .iter()
        .map(|s| pe(s))
        .collect();
    let zero: Vec<(i32, Expr)> = (-1..=3).map(|m| (m, Expr::zero())).collect();
    let s = linearization_step(&d, &zero, &basis, true).unwrap();
    assert!(s.generator.is_zero());
    let target = pe("u1_1^2 + 3*u1*u1_2");
    let image = expand_at_infinity(&d.apply(&target).unwrap(), 5).unwrap();
    let rhs: Vec<(i32, Expr)> = (-1..=3)
        .map(|m| (m, image.get(&(m + 2)).cloned().unwrap_or_default()))
        .collect();
    let s = linearization_step(&d, &rhs, &basis, true).unwrap();
    assert_eq!(s.generator, target);
    assert!(s.polynomial);
}

#[test]
fn linearization_genus_one() {
    let (_, d) = kdv_d();
    let rhs = vec![
        (-1, Expr::zero()),
        (0, pe("-1/16")),
        (1, pe("-u1/8")),
        (2, pe("-3/16*u1^2")),
    ];
    let basis: Vec<Expr> = ["log(u1_1)", "log(u1)", "u1", "u1^2"]
        .iter()
        .map(|s| pe(s))
        .collect();
    let s = linearization_step(&d, &rhs, &basis, false).unwrap();
    assert_eq!(s.generator, pe("log(u1_1)/24"));
    assert!(!s.polynomial);
    assert!(matches!(
        linearization_step(&d, &rhs, &basis, true),
        Err(VirError::NoPolynomialSolution(_))
    ));
    assert!(matches!(
        linearization_step(&d, &rhs, &basis[1..], false),
        Err(VirError::NoSolutionInAnsatz)
    ));
}
