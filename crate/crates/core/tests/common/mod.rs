#![allow(dead_code)]

use std::path::PathBuf;

use frobjet::symcore::{parse, Expr, Field, Scalar};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn pe(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn rational(r: &mut impl Rng) -> Scalar {
    let num = r.gen_range(-9..=9);
    let den = r.gen_range(1..=5);
    Scalar::new(if num == 0 { 1 } else { num }, den)
}

fn jet(field: Field, idx: u32, order: u32, e: i32) -> Expr {
    Expr::jet(field, idx, order).pow(e).expect("nonzero base")
}

/// Sum of up to `terms` monomials in the jets of `n` components with
/// orders `≤ max_order` and nonnegative exponents.
pub fn random_diff_poly(r: &mut impl Rng, n: u32, max_order: u32, terms: usize) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..r.gen_range(1..=terms) {
        let mut m = Expr::constant(rational(r));
        for _ in 0..r.gen_range(1..=3) {
            let idx = r.gen_range(1..=n);
            let order = r.gen_range(0..=max_order);
            m = m.mul(&jet(Field::V, idx, order, r.gen_range(1..=2)));
        }
        out = out.add(&m);
    }
    out
}

/// Element of `S^{(1)}` in canonical coordinates: polynomial in `u^i`,
/// Laurent in `u^{i,1}`.
pub fn random_s1(r: &mut impl Rng, n: u32, terms: usize) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..r.gen_range(1..=terms) {
        let mut m = Expr::constant(rational(r));
        for i in 1..=n {
            m = m.mul(&jet(Field::U, i, 0, r.gen_range(0..=2)));
            m = m.mul(&jet(Field::U, i, 1, r.gen_range(-2..=2)));
        }
        out = out.add(&m);
    }
    if out.is_constant() {
        out = out.add(&Expr::jet(Field::U, 1, 1));
    }
    out
}

/// Degree-two differential polynomials in one component of the form
/// `Σ c u^a u_xx + Σ c' u^a u_x²`.
pub fn kdv_degree_two_basis() -> Vec<Expr> {
    [
        "u1_2",
        "u1*u1_2",
        "u1^2*u1_2",
        "u1_1^2",
        "u1*u1_1^2",
        "u1^2*u1_1^2",
    ]
    .iter()
    .map(|s| pe(s))
    .collect()
}

pub fn random_combination(r: &mut impl Rng, basis: &[Expr]) -> Expr {
    let mut out = Expr::zero();
    while out.is_zero() {
        for b in basis {
            if r.gen_bool(0.6) {
                out = out.add(&b.scale(&rational(r)));
            }
        }
    }
    out
}
