//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion; run with `--nocapture` to see them.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    configs_dir, kdv_degree_two_basis, pe, random_combination, random_diff_poly, random_s1, rng,
};
use frobjet::cli::config::ManifoldConfig;
use frobjet::frobman::{FrobeniusManifold, ManifoldSpec};
use frobjet::hierarchy::{commutativity_check, flows, tau_symmetry_check};
use frobjet::jetcalc::{dx, integrate_x, is_polynomial, mono_compare_exprs, var_deriv, MonoOrder};
use frobjet::poisson::{
    central_invariants, compatibility_check, deform_scalar, genus0_pencil, jacobi_check,
    miura_conjugate,
};
use frobjet::symcore::{Expr, Field, Scalar};
use frobjet::virasoro::{
    build_dlambda, c_constant, commutation_check, expand_at_infinity, leading_action,
    linearization_step, pole_profile, DLambdaOp, TauCover, VirasoroCoeffs,
};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2}: {name} ({detail})");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frobjet"))
}

fn config(name: &str) -> std::path::PathBuf {
    configs_dir().join(name)
}

fn manifold(spec: ManifoldSpec) -> FrobeniusManifold {
    FrobeniusManifold::new(spec).expect("valid manifold")
}

fn kdv_dlambda() -> DLambdaOp {
    let cfg = ManifoldConfig::load(&config("kdv.json")).unwrap();
    let periods = cfg.periods().unwrap().expect("kdv config ships B fixture");
    let chart = manifold(ManifoldSpec::kdv()).canonical_chart().unwrap();
    build_dlambda(&chart, Some(&periods)).unwrap()
}

fn validate_exit(cfg: &Path) -> (i32, String) {
    let out = bin()
        .args(["validate", "--format", "machine", "--config"])
        .arg(cfg)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn c01_wdvv_euler_suite() {
    let start = Instant::now();
    let (kdv, _) = validate_exit(&config("kdv.json"));
    let (p1, _) = validate_exit(&config("p1.json"));
    let (bad, text) = validate_exit(&config("corrupted-n3.json"));
    let lib = manifold(ManifoldSpec::corrupted_n3()).check_wdvv();
    let witness_ok = matches!(&lib, Err(w) if w.indices == [2, 2, 3, 3] && w.residual == "-36*v2^2")
        && text.contains("-36*v2^2");
    let elapsed = start.elapsed();
    let ok = kdv == 0 && p1 == 0 && bad == 1 && witness_ok && elapsed < Duration::from_secs(10);
    report(
        1,
        "WDVV/Euler validation",
        ok,
        &format!("exit codes kdv={kdv} p1={p1} corrupted={bad}, witness {lib:?}, {elapsed:.2?}"),
    );
}

#[test]
fn c02_variational_calculus() {
    let start = Instant::now();
    let mut r = rng(2);
    let mut failures = Vec::new();
    for case in 0..200 {
        let f = random_diff_poly(&mut r, 2, 4, 4);
        let g = dx(&f);
        for i in 1..=2 {
            let d = var_deriv(&g, Field::V, i);
            if !d.is_zero() {
                failures.push(format!("#{case} δ{i}∂x({f}) = {d}"));
            }
        }
        match integrate_x(&g) {
            Ok(h) if h.sub(&f).is_constant() => {}
            Ok(h) => failures.push(format!("#{case} ∫∂x({f}) = {h}")),
            Err(e) => failures.push(format!("#{case} ∫∂x({f}): {e}")),
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    report(
        2,
        "δ∘∂x = 0 and ∫∘∂x = id on 200 random polynomials",
        ok,
        &format!(
            "{} failures {:?}, {elapsed:.2?}",
            failures.len(),
            failures.first()
        ),
    );
}

#[test]
fn c03_tau_symmetry_and_commutativity() {
    let mut detail = Vec::new();
    let mut ok = true;
    for (spec, top) in [(ManifoldSpec::kdv(), 3), (ManifoldSpec::p1(), 2)] {
        let name = spec.name.clone();
        let m = manifold(spec);
        let theta = m.theta(top + 1).unwrap();
        let table = flows(&m, &theta).unwrap();
        let comm = commutativity_check(&table, top);
        let tau = tau_symmetry_check(&theta, &table, top);
        ok &= comm.is_ok() && tau.is_ok();
        detail.push(format!(
            "{name} p,q≤{top}: commute {:?}, tau {:?}",
            comm.is_ok(),
            tau.is_ok()
        ));
    }
    report(
        3,
        "tau-symmetry and flow commutativity",
        ok,
        &detail.join("; "),
    );
}

#[test]
fn c04_pencil_suite() {
    let m = manifold(ManifoldSpec::kdv());
    let chart = m.canonical_chart().unwrap();
    let base = genus0_pencil(&m);
    let deformed = deform_scalar(&base, &Scalar::new(1, 8));
    let jac1 = jacobi_check(&deformed.first, None).unwrap().is_ok();
    let jac2 = jacobi_check(&deformed.second, None).unwrap().is_ok();
    let compat = compatibility_check(&deformed, None).unwrap().is_ok();
    let c = central_invariants(&deformed, &chart).unwrap().values;
    let mut ok = jac1 && jac2 && compat && c == vec![pe("1/24")];
    let mut r = rng(4);
    let mut qs: Vec<Scalar> = Vec::new();
    while qs.len() < 5 {
        let q = common::rational(&mut r);
        if !qs.contains(&q) {
            qs.push(q);
        }
    }
    let mut family = Vec::new();
    for q in qs {
        let p = deform_scalar(&base, &q);
        let got = central_invariants(&p, &chart).unwrap().values;
        let want = Expr::constant(&q * &Scalar::new(1, 3));
        ok &= got == vec![want];
        family.push(format!("q={q} c={}", got[0]));
    }
    report(
        4,
        "deformed KdV pencil, central invariant 1/24, c = q/3",
        ok,
        &format!(
            "jacobi {jac1}/{jac2}, compatible {compat}, c={}; {}",
            c[0],
            family.join(", ")
        ),
    );
}

#[test]
fn c05_quasi_triviality() {
    let m = manifold(ManifoldSpec::kdv());
    let second = genus0_pencil(&m).second;
    let map = [pe("v1 + eps^2/24*(v1_3/v1_1 - v1_2^2/v1_1^2)")];
    let out = miura_conjugate(&second, &map, 1).unwrap();
    let target = deform_scalar(&genus0_pencil(&m), &Scalar::new(1, 8)).second;
    let mut residuals = Vec::new();
    for j in 0..=out.order().max(target.order()) {
        let r = out.coeff(1, 1, j).sub(&target.coeff(1, 1, j));
        if !r.is_zero() {
            residuals.push(format!("∂^{j}: {r}"));
        }
    }
    report(
        5,
        "genus-one quasi-Miura map produces (ε²/8)δ‴",
        residuals.is_empty(),
        &format!("ε² slot {}, residuals {residuals:?}", out.coeff(1, 1, 3)),
    );
}

#[test]
fn c06_top_pole_law() {
    let constants = [c_constant(1), c_constant(2), c_constant(3)];
    let mut ok = constants == [Scalar::new(3, 2), Scalar::new(15, 4), Scalar::new(105, 8)];
    let mut r = rng(6);
    let kdv = kdv_dlambda();
    let p1 = build_dlambda(
        &manifold(ManifoldSpec::p1()).canonical_chart().unwrap(),
        None,
    )
    .unwrap();
    let mut failures = Vec::new();
    for (name, d, n) in [("kdv", &kdv, 1), ("p1", &p1, 2)] {
        for case in 0..50 {
            let f = random_s1(&mut r, n, 3);
            match pole_profile(d, &f) {
                Ok(p) if p.ok() => {}
                other => failures.push(format!("{name} #{case} {f}: {other:?}")),
            }
        }
    }
    for f in ["u1_2", "u1*u1_2^2 + u1_1^3", "u1_2^2/u1_1 + u1^2*u1_2"] {
        match pole_profile(&kdv, &pe(f)) {
            Ok(p) if p.ok() && p.jet_order == 2 => {}
            other => failures.push(format!("N=2 {f}: {other:?}")),
        }
    }
    ok &= failures.is_empty();
    report(
        6,
        "C_N constants and top-pole law",
        ok,
        &format!(
            "C = {constants:?}, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    );
}

#[test]
fn c07_leading_action_anchors() {
    let kdv = kdv_dlambda();
    let p1 = build_dlambda(
        &manifold(ManifoldSpec::p1()).canonical_chart().unwrap(),
        None,
    )
    .unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, d, n) in [("kdv", &kdv, 1usize), ("p1", &p1, 2)] {
        for i in 1..=n {
            let a = leading_action(d, i, 1).unwrap();
            ok &= a.lead == "-3/2" && a.remainder == "0";
            detail.push(format!(
                "{name} i={i}: lead {} remainder {}",
                a.lead, a.remainder
            ));
        }
    }
    let genus1 = kdv.apply(&pe("log(u1_1)/24")).unwrap();
    ok &= genus1 == pe("-1/16/(u1 - lambda)^2");
    detail.push(format!("D(λ)(log u_x/24) = {genus1}"));
    report(7, "D(λ) on first jets", ok, &detail.join("; "));
}

#[test]
fn c08_virasoro_suite() {
    let cfg = ManifoldConfig::load(&config("kdv.json")).unwrap();
    let v = cfg
        .virasoro()
        .unwrap()
        .expect("kdv config ships coefficients");
    let generated = VirasoroCoeffs::kdv(v.m_max, v.levels);
    let mut failures = Vec::new();
    if v != generated {
        failures.push("shipped coefficients differ from generator".to_string());
    }
    let window = cfg.truncation.window;
    let mut pairs = 0;
    for k in -1..=3 {
        for l in -1..=3 {
            if k + l > 2 {
                continue;
            }
            pairs += 1;
            match commutation_check(&v, k, l, window) {
                Ok(r) if r.ok() => {}
                other => failures.push(format!("[{k},{l}]: {other:?}")),
            }
        }
    }
    let m = manifold(ManifoldSpec::kdv());
    let cover = TauCover::new(&m, &v, window).unwrap();
    let f1 = pe("log(v1_1)/24");
    for k in [-1, 0, 1] {
        match cover.genus1_residual(k, &f1) {
            Ok(r) if r.is_zero() => {}
            other => failures.push(format!("genus one m={k}: {other:?}")),
        }
    }
    report(
        8,
        "Virasoro commutation and genus-one residual",
        failures.is_empty(),
        &format!("{pairs} pairs on window {window}, failures {failures:?}"),
    );
}

#[test]
fn c09_partition_order() {
    let chain = ["u2_1^3*u1_1", "u1_1^2*u2_2", "u1_3*u2_1", "u2_4"];
    let mut ok = true;
    let mut detail = Vec::new();
    for w in chain.windows(2) {
        let o = mono_compare_exprs(&pe(w[0]), &pe(w[1])).unwrap();
        ok &= o == MonoOrder::Less;
        detail.push(format!("{} vs {}: {o:?}", w[0], w[1]));
    }
    let o = mono_compare_exprs(&pe("u1_3*u2_1"), &pe("u1_1*u2_3")).unwrap();
    ok &= o == MonoOrder::Incomparable;
    detail.push(format!("u1_3*u2_1 vs u1_1*u2_3: {o:?}"));
    report(9, "partition order chain", ok, &detail.join("; "));
}

#[test]
fn c10_linearization_round_trip() {
    let d = kdv_dlambda();
    let basis = kdv_degree_two_basis();
    let mut r = rng(10);
    let mut failures = Vec::new();
    for case in 0..20 {
        let p = random_combination(&mut r, &basis);
        let image = d.apply(&p).unwrap();
        let series = expand_at_infinity(&image, 7).unwrap();
        let rhs: Vec<(i32, Expr)> = (-1..=5)
            .map(|m| (m, series.get(&(m + 2)).cloned().unwrap_or_default()))
            .collect();
        match linearization_step(&d, &rhs, &basis, true) {
            Ok(s) => {
                let back = d.apply(&s.generator).unwrap();
                if back != image || !is_polynomial(&s.generator) {
                    failures.push(format!("#{case} {p} -> {}", s.generator));
                }
            }
            Err(e) => failures.push(format!("#{case} {p}: {e}")),
        }
    }
    report(
        10,
        "linearization step recovers degree-two generators",
        failures.is_empty(),
        &format!("20 cases, failures {failures:?}"),
    );
}

fn cli_runs() -> Vec<Vec<String>> {
    let cfg = |n: &str| config(n).display().to_string();
    let mut runs = Vec::new();
    for fmt in ["human", "machine"] {
        for (cmd, file) in [
            ("validate", "kdv.json"),
            ("validate", "p1.json"),
            ("validate", "corrupted-n3.json"),
            ("hierarchy", "kdv.json"),
            ("hierarchy", "p1.json"),
            ("pencil", "kdv-deformed.json"),
            ("pencil", "p1.json"),
            ("virasoro", "kdv.json"),
            ("poles", "kdv.json"),
            ("integrate", "kdv.json"),
        ] {
            let mut args: Vec<String> = vec![cmd.into(), "--config".into(), cfg(file)];
            args.extend(["--format".into(), fmt.into()]);
            match cmd {
                "poles" => args.extend(["--expr".into(), "log(u1_1)/24 + u1*u1_2".into()]),
                "integrate" => args.extend(["--expr".into(), "v1*v1_1 + v1_1*v1_2".into()]),
                _ => {}
            }
            runs.push(args);
        }
    }
    runs
}

#[test]
fn c11_cli_determinism() {
    let dir = std::env::temp_dir().join(format!("frobjet-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut mismatches = Vec::new();
    let runs = cli_runs();
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = Vec::new();
        for pass in 0..2 {
            let path = dir.join(format!("{i}-{pass}.out"));
            let status = bin().args(args).arg("--out").arg(&path).status().unwrap();
            bytes.push((status.code(), std::fs::read(&path).unwrap_or_default()));
        }
        if bytes[0] != bytes[1] || bytes[0].1.is_empty() {
            mismatches.push(args.join(" "));
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    report(
        11,
        "CLI output is byte-identical across runs",
        mismatches.is_empty(),
        &format!("{} commands, mismatches {mismatches:?}", runs.len()),
    );
}
