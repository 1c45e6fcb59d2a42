//! The derivation `D(λ)` on canonical-coordinate jets, pole analysis and
//! the linear solve for `D(λ)G = O(λ)`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::VirError;
use crate::frobman::CanonicalChart;
use crate::jetcalc::{self, dx_n, MonoOrder};
use crate::linalg::{self, Solution};
use crate::symcore::{Expr, Field, Poly, Scalar, Var};

fn u(i: usize) -> Expr {
    Expr::u(i as u32)
}

fn u_jet(i: usize, r: u32) -> Expr {
    Expr::jet(Field::U, i as u32, r)
}

/// `1/(u^i − λ)`.
fn resolvent(i: usize) -> Expr {
    u(i).sub(&Expr::lambda()).inverse().expect("non-zero")
}

/// User-supplied `B_{i,r}` for `r ≥ 2` (and optionally `r = 1` for
/// cross-checking).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeriodFixture {
    pub b: BTreeMap<(usize, u32), Expr>,
}

/// `D(λ) = Σ_{i,r} (∂_x^r(1/(u^i−λ)) + B_{i,r}) ∂/∂u^{i,r}` with `B_{i,0} = 0`.
#[derive(Debug, Clone)]
pub struct DLambdaOp {
    pub n: usize,
    /// `rot[i][j] = (ψ_j/ψ_i) γ_ij` in canonical coordinates.
    rot: Vec<Vec<Expr>>,
    fixture: BTreeMap<(usize, u32), Expr>,
}

/// Closed form of `B_{i,1}`.
fn b_first(rot: &[Vec<Expr>], i: usize) -> Expr {
    let ux = u_jet(i, 1);
    let ri = resolvent(i);
    let mut out = ux.mul(&ri.mul(&ri)).scale(&Scalar::new(-1, 2));
    for (j, r) in rot[i - 1].iter().enumerate() {
        if j + 1 == i || r.is_zero() {
            continue;
        }
        out = out.sub(&ux.mul(r).mul(&resolvent(j + 1).sub(&ri)));
    }
    out
}

pub fn build_dlambda(
    chart: &CanonicalChart,
    fixture: Option<&PeriodFixture>,
) -> Result<DLambdaOp, VirError> {
    let op = DLambdaOp {
        n: chart.n,
        rot: chart.rot.clone(),
        fixture: BTreeMap::new(),
    };
    let mut table = BTreeMap::new();
    if let Some(fx) = fixture {
        for (&(i, r), e) in &fx.b {
            if i == 0 || i > chart.n || r == 0 {
                return Err(VirError::FixtureMismatch(format!(
                    "B({i},{r}) out of range"
                )));
            }
            if r == 1 {
                let closed = b_first(&op.rot, i);
                if closed != *e {
                    return Err(VirError::FixtureMismatch(format!(
                        "B({i},1) = {e}, closed form gives {closed}"
                    )));
                }
                continue;
            }
            table.insert((i, r), e.clone());
        }
    }
    Ok(DLambdaOp {
        fixture: table,
        ..op
    })
}

impl DLambdaOp {
    pub fn b_coefficient(&self, i: usize, r: u32) -> Result<Expr, VirError> {
        match r {
            0 => Ok(Expr::zero()),
            1 => Ok(b_first(&self.rot, i)),
            _ => self
                .fixture
                .get(&(i, r))
                .cloned()
                .ok_or(VirError::JetOrderExceedsFixture { i, r }),
        }
    }

    /// `D(λ)u^{i,r}`.
    pub fn on_jet(&self, i: usize, r: u32) -> Result<Expr, VirError> {
        Ok(dx_n(&resolvent(i), r).add(&self.b_coefficient(i, r)?))
    }

    pub fn max_order(&self) -> u32 {
        self.fixture.keys().map(|k| k.1).max().unwrap_or(1).max(1)
    }

    pub fn apply(&self, f: &Expr) -> Result<Expr, VirError> {
        let mut out = Expr::zero();
        for v in f.jet_vars() {
            match v {
                Var::Jet {
                    field: Field::U,
                    idx,
                    order,
                } => {
                    let d = f.partial(&v);
                    if !d.is_zero() {
                        out = out.add(&d.mul(&self.on_jet(idx as usize, order)?));
                    }
                }
                Var::Jet { .. } => {
                    return Err(VirError::WrongChart(format!("{v} in {f}")));
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

/// Decomposition of `D(λ)u^{i,k}` into its leading parts and remainder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeadingAction {
    /// Coefficient of `u^{i,k}/(u^i−λ)²`.
    pub lead: String,
    /// Coefficient of `u^{i,k} Σ_j (ψ_j/ψ_i)γ_ij (1/(u^j−λ) − 1/(u^i−λ))`;
    /// `None` when every rotation coefficient vanishes.
    pub gamma: Option<String>,
    pub remainder: String,
    /// Every remainder monomial lies strictly below `u^{i,k}`.
    pub remainder_smaller: bool,
}

fn evaluate_at(e: &Expr, point: &Expr) -> Result<Expr, VirError> {
    Ok(e.subs(&Var::Lambda, point)?)
}

pub fn leading_action(d: &DLambdaOp, i: usize, k: u32) -> Result<LeadingAction, VirError> {
    if k == 0 {
        return Err(VirError::WrongChart("leading action needs k ≥ 1".into()));
    }
    let e = d.on_jet(i, k)?;
    let top = Var::jet(Field::U, i as u32, k);
    let coeff = e.partial(&top);
    let lam_minus = u(i).sub(&Expr::lambda());
    let lead = evaluate_at(&coeff.mul(&lam_minus.mul(&lam_minus)), &u(i))?;
    let rest = coeff.sub(&lead.mul(&resolvent(i).pow(2)?));
    let mut gamma = None;
    for (j, r) in d.rot[i - 1].iter().enumerate() {
        if j + 1 == i || r.is_zero() {
            continue;
        }
        let at = evaluate_at(&rest.mul(&u(j + 1).sub(&Expr::lambda())), &u(j + 1))?;
        gamma = Some(at.checked_div(r)?);
        break;
    }
    let sum: Expr = d.rot[i - 1]
        .iter()
        .enumerate()
        .filter(|(j, _)| j + 1 != i)
        .map(|(j, r)| r.mul(&resolvent(j + 1).sub(&resolvent(i))))
        .sum();
    let g = gamma.clone().unwrap_or_default();
    let top_e = Expr::var(top.clone());
    let remainder = e
        .sub(&top_e.mul(&lead).mul(&resolvent(i).pow(2)?))
        .sub(&top_e.mul(&g).mul(&sum));
    let pivot = crate::frobman::monomial_of(top, 1);
    let remainder_smaller = remainder
        .num()
        .terms()
        .iter()
        .all(|(m, _)| matches!(jetcalc::mono_compare(m, &pivot), Ok(MonoOrder::Less)));
    Ok(LeadingAction {
        lead: lead.to_string(),
        gamma: gamma.map(|g| g.to_string()),
        remainder: remainder.to_string(),
        remainder_smaller,
    })
}

/// `C_N = N! + 2^{−N} Σ_{l=1}^{N} C(N,l) (2l−3)!! (2N−2l+1)!!`.
pub fn c_constant(n: u32) -> Scalar {
    let nn = n as i64;
    let mut sum = Scalar::zero();
    for l in 1..=nn {
        sum = &sum
            + &(&(&Scalar::binomial(n, l as u32) * &Scalar::double_factorial(2 * l - 3))
                * &Scalar::double_factorial(2 * nn - 2 * l + 1));
    }
    &Scalar::factorial(n) + &(&sum * &Scalar::from_int(2).pow(-(n as i32)))
}

/// Coefficients of `λ^{−j}` in the expansion of `e` at `λ = ∞`, for
/// `j ≤ max`, including any non-negative powers of `λ` (as `j ≤ 0`).
pub fn expand_at_infinity(e: &Expr, max: i32) -> Result<BTreeMap<i32, Expr>, VirError> {
    let lam = Var::Lambda;
    let bad = || VirError::NotRationalInLambda(e.to_string());
    let num = Expr::from_poly(e.num().clone());
    let num_terms = num.collect_by(&|v| *v == lam).map_err(|_| bad())?;
    let deg = num_terms
        .keys()
        .map(|m| m.power_of(&lam))
        .max()
        .unwrap_or(0);
    let cap = max + deg;
    let mut series: BTreeMap<i32, Expr> = BTreeMap::from([(0, Expr::one())]);
    let mut free = Vec::new();
    for (f, mult) in e.den() {
        let fe = Expr::from_poly(f.clone());
        if !fe.contains_var(&lam) {
            free.push((f.clone(), *mult));
            continue;
        }
        let parts = fe.collect_by(&|v| *v == lam).map_err(|_| bad())?;
        let mut f0 = Expr::zero();
        let mut f1 = Expr::zero();
        for (m, c) in parts {
            match m.power_of(&lam) {
                0 => f0 = c,
                1 => f1 = c,
                _ => return Err(bad()),
            }
        }
        // 1/(f0 + f1 λ) = (s/f1) Σ_j (−f0/f1)^j s^j with s = 1/λ.
        let inv_f1 = f1.inverse()?;
        let ratio = f0.mul(&inv_f1).neg();
        let mut one: BTreeMap<i32, Expr> = BTreeMap::new();
        let mut pw = inv_f1.clone();
        for j in 1..=cap.max(1) {
            one.insert(j, pw.clone());
            pw = pw.mul(&ratio);
        }
        for _ in 0..*mult {
            series = mul_series(&series, &one, cap);
        }
    }
    let free_factor = Expr::from_factors(free);
    let mut out: BTreeMap<i32, Expr> = BTreeMap::new();
    for (m, c) in num_terms {
        let k = m.power_of(&lam);
        for (j, s) in &series {
            let p = j - k;
            if p > max {
                continue;
            }
            let entry = out.entry(p).or_default();
            *entry = entry.add(&c.mul(s).mul(&free_factor));
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn mul_series(a: &BTreeMap<i32, Expr>, b: &BTreeMap<i32, Expr>, cap: i32) -> BTreeMap<i32, Expr> {
    let mut out: BTreeMap<i32, Expr> = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            if i + j > cap {
                continue;
            }
            let e = out.entry(i + j).or_default();
            *e = e.add(&x.mul(y));
        }
    }
    out
}

/// No non-negative powers of `λ` in the expansion at infinity.
pub fn regular_at_infinity(e: &Expr) -> Result<bool, VirError> {
    Ok(expand_at_infinity(e, 0)?.is_empty())
}

/// Order of the pole of `e` at `λ = point`.
pub fn pole_order(e: &Expr, point: &Expr) -> Result<u32, VirError> {
    let mut order = 0;
    for (f, mult) in e.den() {
        let fe = Expr::from_poly(f.clone());
        if fe.contains_var(&Var::Lambda) && evaluate_at(&fe, point)?.is_zero() {
            order += mult;
        }
    }
    Ok(order)
}

/// Coefficient of `(λ − point)^{−k}` for `k` the full pole order.
pub fn top_pole_coefficient(e: &Expr, point: &Expr, k: u32) -> Result<Expr, VirError> {
    let shift = Expr::lambda().sub(point).pow(k as i32)?;
    evaluate_at(&e.mul(&shift), point)
}

/// Pole data of `D(λ)F` at `λ = u^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoleData {
    pub i: usize,
    pub order: u32,
    /// Coefficient of `(λ − u^i)^{−N−1}`.
    pub top: String,
    /// `−C_N (u^{i,1})^N ∂F/∂u^{i,N}`.
    pub expected: String,
    pub matches: bool,
}

/// Pole profile of `D(λ)F` together with regularity at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoleProfile {
    pub jet_order: u32,
    pub poles: Vec<PoleData>,
    pub regular_at_infinity: bool,
}

impl PoleProfile {
    pub fn ok(&self) -> bool {
        self.regular_at_infinity
            && self
                .poles
                .iter()
                .all(|p| p.matches && p.order <= self.jet_order + 1)
    }
}

pub fn pole_profile(d: &DLambdaOp, f: &Expr) -> Result<PoleProfile, VirError> {
    let big_n = jetcalc::max_order(f).unwrap_or(0);
    let e = d.apply(f)?;
    let cn = c_constant(big_n);
    let mut poles = Vec::with_capacity(d.n);
    for i in 1..=d.n {
        let point = u(i);
        let order = pole_order(&e, &point)?;
        let top = top_pole_coefficient(&e, &point, big_n + 1)?;
        let expected = u_jet(i, 1)
            .pow(big_n as i32)?
            .mul(&f.partial(&Var::jet(Field::U, i as u32, big_n)))
            .scale(&cn)
            .neg();
        poles.push(PoleData {
            i,
            order,
            matches: top == expected,
            top: top.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(PoleProfile {
        jet_order: big_n,
        poles,
        regular_at_infinity: regular_at_infinity(&e)?,
    })
}

/// Solution of one linearization step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSolution {
    pub generator: Expr,
    /// Dimension of the ansatz kernel left undetermined (set to zero).
    pub kernel_dim: usize,
    pub polynomial: bool,
}

/// Solves `D(λ)G = Σ_m O_m λ^{−m−2}` for `G` in the span of `basis`.
///
/// `rhs` lists `(m, O_m)` for every `m` to be matched; coefficients of
/// `λ^{−m−2}` not listed are not constrained. With `require_polynomial`
/// a solution outside the differential polynomial ring is an error.
pub fn linearization_step(
    d: &DLambdaOp,
    rhs: &[(i32, Expr)],
    basis: &[Expr],
    require_polynomial: bool,
) -> Result<LinearSolution, VirError> {
    let max = rhs.iter().map(|(m, _)| m + 2).max().unwrap_or(1);
    let unknowns: Vec<Expr> = (0..basis.len())
        .map(|j| Expr::var(Var::Aux(j as u32)))
        .collect();
    let mut images = Vec::with_capacity(basis.len());
    for b in basis {
        images.push(expand_at_infinity(&d.apply(b)?, max)?);
    }
    let is_aux = |v: &Var| matches!(v, Var::Aux(_));
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut rhs_col: Vec<Scalar> = Vec::new();
    for (m, target) in rhs {
        let mut lhs = Expr::zero();
        for (k, img) in unknowns.iter().zip(&images) {
            if let Some(c) = img.get(&(m + 2)) {
                lhs = lhs.add(&k.mul(c));
            }
        }
        let residual = lhs.sub(target);
        let num = Expr::from_poly(residual.num().clone());
        let groups = num.collect_by(&|v| !is_aux(v))?;
        for (_, coeff) in groups {
            let p: &Poly = coeff.num();
            let mut row = vec![Scalar::zero(); basis.len()];
            let mut constant = Scalar::zero();
            for (mono, c) in p.terms() {
                match mono.powers() {
                    [] => constant = &constant - c,
                    [(Var::Aux(j), 1)] => row[*j as usize] = &row[*j as usize] + c,
                    _ => return Err(VirError::NotRationalInLambda(coeff.to_string())),
                }
            }
            rows.push(row);
            rhs_col.push(constant);
        }
    }
    let (x, free) = match linalg::solve(&rows, &rhs_col, basis.len()) {
        Solution::Solved { x, free } => (x, free),
        Solution::Inconsistent => return Err(VirError::NoSolutionInAnsatz),
    };
    let generator: Expr = basis.iter().zip(&x).map(|(b, c)| b.scale(c)).sum();
    let polynomial = jetcalc::is_polynomial(&generator);
    if require_polynomial && !polynomial {
        return Err(VirError::NoPolynomialSolution(generator.to_string()));
    }
    Ok(LinearSolution {
        generator,
        kernel_dim: free,
        polynomial,
    })
}
