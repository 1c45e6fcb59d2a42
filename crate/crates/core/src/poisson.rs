//! Local Poisson bivectors as matrix differential operators.
//!
//! A bivector `{v^α(x), v^β(y)} = Σ_j A_j^{αβ}(x) δ^{(j)}(x−y)` is stored as
//! the operator `(Pξ)^α = Σ_{β,j} A_j^{αβ} ∂_x^j ξ_β`. Dispersive terms keep
//! `ε` inside the coefficients.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::frobman::{CanonicalChart, FrobeniusManifold};
use crate::jetcalc::{self, dx, dx_n, var_deriv};
use crate::linalg;
use crate::symcore::{Expr, Field, Scalar, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoissonError {
    #[error("leading term of the coordinate change is not an invertible linear map: {0}")]
    NotInvertibleLeadingTerm(String),
    #[error("dispersionless pencil is not semisimple: {0}")]
    NotSemisimple(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("coefficient ({g},{k},{alpha},{beta}) is listed twice")]
    DuplicateRecord {
        g: u32,
        k: u32,
        alpha: usize,
        beta: usize,
    },
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// One coefficient `P_{g,k}^{αβ}` of `ε^{2g} δ^{(2g+1−k)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub g: u32,
    pub k: u32,
    pub alpha: usize,
    pub beta: usize,
    pub coeff: String,
}

/// Matrix differential operator with jet-dependent coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonOp {
    pub n: usize,
    /// `terms[α][β][j]` is the coefficient of `∂^j`.
    terms: Vec<Vec<Vec<Expr>>>,
    /// Results are certified through `ε^{2 g_max}`; `None` means exact.
    pub g_max: Option<u32>,
}

fn eps() -> Var {
    Var::Eps
}

fn trim(v: &mut Vec<Expr>) {
    while v.last().is_some_and(Expr::is_zero) {
        v.pop();
    }
}

impl PoissonOp {
    pub fn zero(n: usize) -> Self {
        PoissonOp {
            n,
            terms: vec![vec![Vec::new(); n]; n],
            g_max: None,
        }
    }

    /// Constant-coefficient `M^{αβ} ∂`.
    pub fn constant_metric(m: &linalg::Matrix) -> Self {
        let n = m.len();
        let mut op = PoissonOp::zero(n);
        for a in 0..n {
            for b in 0..n {
                op.set(a + 1, b + 1, 1, Expr::constant(m[a][b].clone()));
            }
        }
        op
    }

    pub fn coeff(&self, alpha: usize, beta: usize, j: usize) -> Expr {
        self.terms[alpha - 1][beta - 1]
            .get(j)
            .cloned()
            .unwrap_or_default()
    }

    pub fn set(&mut self, alpha: usize, beta: usize, j: usize, e: Expr) {
        let slot = &mut self.terms[alpha - 1][beta - 1];
        if slot.len() <= j {
            slot.resize(j + 1, Expr::zero());
        }
        slot[j] = e;
        trim(slot);
    }

    pub fn add_to(&mut self, alpha: usize, beta: usize, j: usize, e: &Expr) {
        let cur = self.coeff(alpha, beta, j);
        self.set(alpha, beta, j, cur.add(e));
    }

    pub fn order(&self) -> usize {
        self.terms
            .iter()
            .flatten()
            .map(|t| t.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn with_truncation(mut self, g_max: Option<u32>) -> Self {
        self.g_max = g_max;
        self.truncate()
    }

    fn truncate_expr(&self, e: Expr) -> Expr {
        match self.g_max {
            Some(g) => e.truncate_power(&eps(), 2 * g as i32),
            None => e,
        }
    }

    fn truncate(mut self) -> Self {
        if let Some(g) = self.g_max {
            for row in self.terms.iter_mut() {
                for slot in row.iter_mut() {
                    for c in slot.iter_mut() {
                        *c = c.truncate_power(&eps(), 2 * g as i32);
                    }
                    trim(slot);
                }
            }
        }
        self
    }

    fn combined_truncation(&self, other: &PoissonOp) -> Option<u32> {
        match (self.g_max, other.g_max) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Builds the operator from `(g, k, α, β, P)` records.
    pub fn from_records(
        n: usize,
        records: &[(u32, u32, usize, usize, Expr)],
        g_max: Option<u32>,
    ) -> Result<Self, PoissonError> {
        let mut op = PoissonOp::zero(n);
        let mut seen = std::collections::BTreeSet::new();
        for (g, k, a, b, p) in records {
            if *a == 0 || *b == 0 || *a > n || *b > n || *k > 2 * g + 1 {
                return Err(PoissonError::Dimension(format!(
                    "record ({g},{k},{a},{b}) out of range"
                )));
            }
            if !seen.insert((*g, *k, *a, *b)) {
                return Err(PoissonError::DuplicateRecord {
                    g: *g,
                    k: *k,
                    alpha: *a,
                    beta: *b,
                });
            }
            let j = (2 * g + 1 - k) as usize;
            let term = p.mul(&Expr::eps().pow(2 * *g as i32)?);
            op.add_to(*a, *b, j, &term);
        }
        Ok(op.with_truncation(g_max))
    }

    /// The `(g, k, α, β)` coefficient table.
    pub fn records(&self) -> Vec<Record> {
        let mut out = Vec::new();
        for a in 1..=self.n {
            for b in 1..=self.n {
                for (j, c) in self.terms[a - 1][b - 1].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let groups = c
                        .collect_by(&|v| *v == Var::Eps)
                        .unwrap_or_else(|_| BTreeMap::from([(Default::default(), c.clone())]));
                    for (m, coeff) in groups {
                        let p = m.power_of(&Var::Eps);
                        let g = (p / 2) as u32;
                        let k = (2 * g + 1) as i64 - j as i64;
                        out.push(Record {
                            g,
                            k: k.max(0) as u32,
                            alpha: a,
                            beta: b,
                            coeff: coeff.to_string(),
                        });
                    }
                }
            }
        }
        out.sort_by_key(|x| (x.g, x.k, x.alpha, x.beta));
        out
    }

    /// `(Pξ)^α = Σ A_j^{αβ} ∂^j ξ_β`.
    pub fn apply(&self, xi: &[Expr]) -> Result<Vec<Expr>, PoissonError> {
        if xi.len() != self.n {
            return Err(PoissonError::Dimension(format!(
                "covector has {} entries, operator is {}x{}",
                xi.len(),
                self.n,
                self.n
            )));
        }
        let maxj = self.order();
        let jets: Vec<Vec<Expr>> = xi
            .iter()
            .map(|x| {
                let mut v = vec![x.clone()];
                for _ in 0..maxj {
                    let next = dx(v.last().expect("non-empty"));
                    v.push(next);
                }
                v
            })
            .collect();
        Ok((0..self.n)
            .map(|a| {
                let mut acc = Expr::zero();
                for b in 0..self.n {
                    for (j, c) in self.terms[a][b].iter().enumerate() {
                        if !c.is_zero() && !jets[b][j].is_zero() {
                            acc = acc.add(&c.mul(&jets[b][j]));
                        }
                    }
                }
                self.truncate_expr(acc)
            })
            .collect())
    }

    pub fn add(&self, other: &PoissonOp) -> PoissonOp {
        let mut out = self.clone();
        for a in 1..=self.n {
            for b in 1..=self.n {
                for (j, c) in other.terms[a - 1][b - 1].iter().enumerate() {
                    out.add_to(a, b, j, c);
                }
            }
        }
        out.g_max = self.combined_truncation(other);
        out.truncate()
    }

    pub fn scale(&self, s: &Expr) -> PoissonOp {
        let mut out = self.clone();
        for row in out.terms.iter_mut() {
            for slot in row.iter_mut() {
                for c in slot.iter_mut() {
                    *c = c.mul(s);
                }
                trim(slot);
            }
        }
        out.truncate()
    }

    pub fn sub(&self, other: &PoissonOp) -> PoissonOp {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Operator composition `self ∘ other`.
    pub fn compose(&self, other: &PoissonOp) -> PoissonOp {
        let n = self.n;
        let mut out = PoissonOp::zero(n);
        out.g_max = self.combined_truncation(other);
        for a in 0..n {
            for c in 0..n {
                for b in 0..n {
                    for (j, ac) in self.terms[a][b].iter().enumerate() {
                        if ac.is_zero() {
                            continue;
                        }
                        for (k, bc) in other.terms[b][c].iter().enumerate() {
                            if bc.is_zero() {
                                continue;
                            }
                            // A ∂^j ∘ B ∂^k = Σ_i C(j,i) A (∂^i B) ∂^{j-i+k}
                            let mut d = bc.clone();
                            for i in 0..=j {
                                if !d.is_zero() {
                                    let t = ac.mul(&d).scale(&Scalar::binomial(j as u32, i as u32));
                                    let t = out.truncate_expr(t);
                                    out.add_to(a + 1, c + 1, j - i + k, &t);
                                }
                                d = dx(&d);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Formal adjoint: `(A∂^j)† = (−∂)^j ∘ A`, transposed.
    pub fn adjoint(&self) -> PoissonOp {
        let n = self.n;
        let mut out = PoissonOp::zero(n);
        out.g_max = self.g_max;
        for a in 0..n {
            for b in 0..n {
                for (j, c) in self.terms[a][b].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let sign = if j % 2 == 0 {
                        Scalar::one()
                    } else {
                        -Scalar::one()
                    };
                    let mut d = c.clone();
                    for i in 0..=j {
                        // (−1)^j Σ_k C(j,k) (∂^{j−k} A) ∂^k with k = j − i
                        if !d.is_zero() {
                            let s = &sign * &Scalar::binomial(j as u32, i as u32);
                            out.add_to(b + 1, a + 1, j - i, &d.scale(&s));
                        }
                        d = dx(&d);
                    }
                }
            }
        }
        out.truncate()
    }

    /// `P + P†`, which vanishes for a skew-adjoint operator.
    pub fn antisymmetry_residual(&self) -> PoissonOp {
        self.add(&self.adjoint())
    }

    pub fn is_skew(&self) -> bool {
        self.antisymmetry_residual().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .flatten()
            .all(|t| t.iter().all(Expr::is_zero))
    }

    /// Derivative of the coefficients in the direction `q`.
    pub fn frechet(&self, q: &[Expr]) -> PoissonOp {
        let n = self.n;
        let mut out = PoissonOp::zero(n);
        out.g_max = self.g_max;
        let mut prolonged: BTreeMap<Var, Expr> = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                for (j, c) in self.terms[a][b].iter().enumerate() {
                    let mut acc = Expr::zero();
                    for v in c.jet_vars() {
                        let Var::Jet {
                            field: Field::V,
                            idx,
                            order,
                        } = v
                        else {
                            continue;
                        };
                        let dir = prolonged
                            .entry(v.clone())
                            .or_insert_with(|| dx_n(&q[idx as usize - 1], order))
                            .clone();
                        if dir.is_zero() {
                            continue;
                        }
                        acc = acc.add(&c.partial(&v).mul(&dir));
                    }
                    let acc = out.truncate_expr(acc);
                    out.add_to(a + 1, b + 1, j, &acc);
                }
            }
        }
        out
    }
}

fn test_covector(slot: u8, n: usize) -> Vec<Expr> {
    (1..=n)
        .map(|i| Expr::jet(Field::Test(slot), i as u32, 0))
        .collect()
}

fn dot(a: &[Expr], b: &[Expr]) -> Expr {
    a.iter().zip(b).map(|(x, y)| x.mul(y)).sum()
}

/// Outcome of a Schouten-bracket check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BracketCheck {
    Ok,
    Violation { component: usize, witness: String },
}

impl BracketCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, BracketCheck::Ok)
    }
}

/// `Σ_cyc a·X'[Y b] c` over cyclic permutations of the test covectors.
fn cyclic_form(x: &PoissonOp, y: &PoissonOp, n: usize) -> Result<Expr, PoissonError> {
    let t = [
        test_covector(0, n),
        test_covector(1, n),
        test_covector(2, n),
    ];
    let mut total = Expr::zero();
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let yb = y.apply(&t[j])?;
        let xd = x.frechet(&yb);
        let applied = xd.apply(&t[k])?;
        total = total.add(&dot(&t[i], &applied));
    }
    Ok(total)
}

fn vanishes_as_functional(form: &Expr, n: usize, g_max: Option<u32>) -> BracketCheck {
    for a in 1..=n {
        let mut e = var_deriv(form, Field::Test(0), a as u32);
        if let Some(g) = g_max {
            e = e.truncate_power(&Var::Eps, 2 * g as i32);
        }
        if !e.is_zero() {
            return BracketCheck::Violation {
                component: a,
                witness: e.to_string(),
            };
        }
    }
    BracketCheck::Ok
}

/// Checks `[P, P] = 0` through `ε^{2 g_max}` (exactly when `None`).
pub fn jacobi_check(p: &PoissonOp, g_max: Option<u32>) -> Result<BracketCheck, PoissonError> {
    let g = g_max.or(p.g_max);
    let p = p.clone().with_truncation(g);
    let form = cyclic_form(&p, &p, p.n)?;
    Ok(vanishes_as_functional(&form, p.n, g))
}

/// Checks `[P_1, P_2] = 0` through `ε^{2 g_max}`.
pub fn compatibility_check(
    pencil: &PoissonPencil,
    g_max: Option<u32>,
) -> Result<BracketCheck, PoissonError> {
    let g = g_max.or(pencil.first.combined_truncation(&pencil.second));
    let p1 = pencil.first.clone().with_truncation(g);
    let p2 = pencil.second.clone().with_truncation(g);
    let form = cyclic_form(&p1, &p2, p1.n)?.add(&cyclic_form(&p2, &p1, p1.n)?);
    Ok(vanishes_as_functional(&form, p1.n, g))
}

/// Pair of compatible Poisson operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonPencil {
    pub first: PoissonOp,
    pub second: PoissonOp,
}

/// Hydrodynamic pencil `η^{αβ}∂` and `g^{αβ}∂ + Γ^{αβ}_γ v^γ_x`.
pub fn genus0_pencil(m: &FrobeniusManifold) -> PoissonPencil {
    let n = m.n();
    let first = PoissonOp::constant_metric(&m.eta_inv);
    let mut second = PoissonOp::zero(n);
    for a in 1..=n {
        for b in 1..=n {
            let g: Expr = (1..=n).map(|e| m.euler(e).mul(&m.c_upper(a, b, e))).sum();
            second.set(a, b, 1, g);
            let half_minus_mu = &Scalar::new(1, 2) - m.mu(b);
            let gamma: Expr = (1..=n)
                .map(|c| {
                    m.c_upper(a, b, c)
                        .mul(&Expr::jet(Field::V, c as u32, 1))
                        .scale(&half_minus_mu)
                })
                .sum();
            second.set(a, b, 0, gamma);
        }
    }
    PoissonPencil { first, second }
}

/// Adds `ε² q δ'''` to the second member of a one-component pencil.
pub fn deform_scalar(pencil: &PoissonPencil, q: &Scalar) -> PoissonPencil {
    let mut second = pencil.second.clone();
    let term = Expr::eps().pow(2).expect("positive").scale(q);
    second.add_to(1, 1, 3, &term);
    PoissonPencil {
        first: pencil.first.clone(),
        second,
    }
}

/// Taylor-expands `f(v)` at `v = x + Δ` to order `ε^{2 g_max}`, where `x`
/// and `Δ` are given in the target coordinates.
fn shift_substitute(
    f: &Expr,
    x: &[Expr],
    delta: &[Expr],
    g_max: u32,
) -> Result<Expr, PoissonError> {
    let cut = 2 * g_max as i32;
    let mut prolonged: BTreeMap<Var, (Expr, Expr)> = BTreeMap::new();
    let mut prolong = |v: &Var| -> (Expr, Expr) {
        prolonged
            .entry(v.clone())
            .or_insert_with(|| {
                let Var::Jet { idx, order, .. } = v else {
                    unreachable!()
                };
                let i = *idx as usize - 1;
                (dx_n(&x[i], *order), dx_n(&delta[i], *order))
            })
            .clone()
    };
    let is_source = |v: &Var| {
        matches!(
            v,
            Var::Jet {
                field: Field::V,
                ..
            }
        )
    };
    let mut total = Expr::zero();
    let mut term = f.clone();
    let mut fact = Scalar::one();
    for m in 0..=g_max {
        if m > 0 {
            fact = &fact * &Scalar::from_int(m as i64);
            let mut next = Expr::zero();
            for v in term.jet_vars().into_iter().filter(is_source) {
                let (_, d) = prolong(&v);
                if d.is_zero() {
                    continue;
                }
                next = next.add(&term.partial(&v).mul(&d));
            }
            term = next.truncate_power(&Var::Eps, cut);
            if term.is_zero() {
                break;
            }
        }
        total = total.add(&term.scale(&fact.recip()));
    }
    let table: BTreeMap<Var, Expr> = total
        .jet_vars()
        .into_iter()
        .filter(is_source)
        .map(|v| {
            let (xv, _) = prolong(&v);
            (v, xv)
        })
        .collect();
    let out = total.substitute(&|v: &Var| table.get(v).cloned())?;
    Ok(out.truncate_power(&Var::Eps, cut))
}

fn rename_field(e: &Expr, from: Field, to: Field) -> Result<Expr, SymError> {
    e.substitute(&|v: &Var| match v {
        Var::Jet { field, idx, order } if *field == from => Some(Expr::jet(to, *idx, *order)),
        _ => None,
    })
}

/// Transforms `P` under `w = w(v)`: `P̃ = L P L†` with `L` the Fréchet
/// derivative of the map, re-expressed in `w` through `ε^{2 g_max}`.
/// The result uses `v` labels for the new coordinates.
pub fn miura_conjugate(p: &PoissonOp, map: &[Expr], g_max: u32) -> Result<PoissonOp, PoissonError> {
    let n = p.n;
    if map.len() != n {
        return Err(PoissonError::Dimension("map length".into()));
    }
    let cut = 2 * g_max as i32;
    let map: Vec<Expr> = map
        .iter()
        .map(|w| w.truncate_power(&Var::Eps, cut))
        .collect();
    // Leading term w_0 = M v + c.
    let lead: Vec<Expr> = map.iter().map(|w| w.truncate_power(&Var::Eps, 0)).collect();
    let mut mat = vec![vec![Scalar::zero(); n]; n];
    let mut shift = vec![Scalar::zero(); n];
    for (a, w0) in lead.iter().enumerate() {
        let mut rest = w0.clone();
        for b in 0..n {
            let vb = Var::v(b as u32 + 1);
            let d = w0.partial(&vb);
            mat[a][b] = d
                .as_scalar()
                .ok_or_else(|| PoissonError::NotInvertibleLeadingTerm(w0.to_string()))?;
            rest = rest.sub(&Expr::var(vb).scale(&mat[a][b]));
        }
        shift[a] = rest
            .as_scalar()
            .ok_or_else(|| PoissonError::NotInvertibleLeadingTerm(w0.to_string()))?;
    }
    let inv = linalg::invert(&mat)
        .ok_or_else(|| PoissonError::NotInvertibleLeadingTerm("singular linear part".into()))?;
    // x = M^{-1}(w − c) in target jets.
    let x: Vec<Expr> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    Expr::jet(Field::W, b as u32 + 1, 0)
                        .sub(&Expr::constant(shift[b].clone()))
                        .scale(&inv[a][b])
                })
                .sum()
        })
        .collect();
    let higher: Vec<Expr> = map.iter().zip(&lead).map(|(w, l)| w.sub(l)).collect();
    // Δ = −M^{-1} R(x + Δ), iterated to the truncation order.
    let mut delta = vec![Expr::zero(); n];
    for _ in 0..g_max {
        let r: Vec<Expr> = higher
            .iter()
            .map(|h| shift_substitute(h, &x, &delta, g_max))
            .collect::<Result<_, _>>()?;
        delta = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| r[b].scale(&(-&inv[a][b])))
                    .sum::<Expr>()
                    .truncate_power(&Var::Eps, cut)
            })
            .collect();
    }
    // L^{αγ} = Σ_s ∂w^α/∂v^{γ,s} ∂^s
    let mut l = PoissonOp::zero(n);
    l.g_max = Some(g_max);
    for (a, w) in map.iter().enumerate() {
        for v in w.jet_vars() {
            if let Var::Jet {
                field: Field::V,
                idx,
                order,
            } = v
            {
                l.add_to(a + 1, idx as usize, order as usize, &w.partial(&v));
            }
        }
    }
    let p = p.clone().with_truncation(Some(g_max));
    let conj = l.compose(&p).compose(&l.adjoint());
    let mut out = PoissonOp::zero(n);
    out.g_max = Some(g_max);
    for a in 1..=n {
        for b in 1..=n {
            for j in 0..=conj.order() {
                let c = conj.coeff(a, b, j);
                if c.is_zero() {
                    continue;
                }
                let s = shift_substitute(&c, &x, &delta, g_max)?;
                out.set(a, b, j, rename_field(&s, Field::W, Field::V)?);
            }
        }
    }
    Ok(out)
}

/// Central invariants, one per canonical coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralInvariants {
    pub values: Vec<Expr>,
}

/// `c_i = (Q_2^{ii} − u^i Q_1^{ii}) / (3 (f^i)²)`, where `f^i` is the
/// contravariant first metric and `Q_a^{ii}` the `ε² ∂³` coefficients, all
/// in canonical coordinates.
pub fn central_invariants(
    pencil: &PoissonPencil,
    chart: &CanonicalChart,
) -> Result<CentralInvariants, PoissonError> {
    let n = pencil.first.n;
    if chart.n != n {
        return Err(PoissonError::Dimension(
            "chart and pencil differ in size".into(),
        ));
    }
    let eps2 = |op: &PoissonOp, a: usize, b: usize| -> Result<Expr, PoissonError> {
        let c = op.coeff(a, b, 3);
        let groups = c.collect_by(&|v| *v == Var::Eps)?;
        Ok(groups
            .into_iter()
            .find(|(m, _)| m.power_of(&Var::Eps) == 2)
            .map(|(_, e)| e)
            .unwrap_or_default())
    };
    let leading = |op: &PoissonOp, a: usize, b: usize| -> Expr {
        op.coeff(a, b, 1).truncate_power(&Var::Eps, 0)
    };
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let j = &chart.du_dv[i];
        let mut f_up = Expr::zero();
        let mut q1 = Expr::zero();
        let mut q2 = Expr::zero();
        for a in 1..=n {
            for b in 1..=n {
                let jj = j[a - 1].mul(&j[b - 1]);
                if jj.is_zero() {
                    continue;
                }
                f_up = f_up.add(&jj.mul(&leading(&pencil.first, a, b)));
                q1 = q1.add(&jj.mul(&eps2(&pencil.first, a, b)?));
                q2 = q2.add(&jj.mul(&eps2(&pencil.second, a, b)?));
            }
        }
        if f_up.is_zero() {
            return Err(PoissonError::NotSemisimple(format!("f^{} vanishes", i + 1)));
        }
        let num = q2.sub(&chart.u_of_v[i].mul(&q1));
        values.push(num.checked_div(&f_up.mul(&f_up).scale(&Scalar::from_int(3)))?);
    }
    Ok(CentralInvariants { values })
}

/// `P δH/δv` for a density `h`.
pub fn hamiltonian_flow(p: &PoissonOp, density: &Expr) -> Result<Vec<Expr>, PoissonError> {
    let grad: Vec<Expr> = (1..=p.n)
        .map(|a| var_deriv(density, Field::V, a as u32))
        .collect();
    p.apply(&grad)
}

/// Whether every coefficient is a differential polynomial.
pub fn coefficients_polynomial(p: &PoissonOp) -> bool {
    p.terms
        .iter()
        .flatten()
        .flatten()
        .all(jetcalc::is_polynomial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobman::ManifoldSpec;
    use crate::symcore::parse;

    fn pe(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn kdv() -> PoissonPencil {
        genus0_pencil(&FrobeniusManifold::new(ManifoldSpec::kdv()).unwrap())
    }

    #[test]
    fn kdv_pencil_shape() {
        let p = kdv();
        assert_eq!(p.first.coeff(1, 1, 1), Expr::one());
        assert_eq!(p.second.coeff(1, 1, 1), pe("v1"));
        assert_eq!(p.second.coeff(1, 1, 0), pe("v1_1/2"));
        let out = p.second.apply(&[pe("v1")]).unwrap();
        assert_eq!(out[0], pe("3/2*v1*v1_1"));
        assert!(p.first.is_skew() && p.second.is_skew());
    }

    #[test]
    fn kdv_jacobi_and_compatibility() {
        let p = kdv();
        assert!(jacobi_check(&p.first, None).unwrap().is_ok());
        assert!(jacobi_check(&p.second, None).unwrap().is_ok());
        assert!(compatibility_check(&p, None).unwrap().is_ok());
        let mut bad = p.second.clone();
        bad.set(1, 1, 0, pe("v1_1/3"));
        assert!(!jacobi_check(&bad, None).unwrap().is_ok());
        let deformed = deform_scalar(&p, &Scalar::new(1, 8));
        assert!(jacobi_check(&deformed.second, None).unwrap().is_ok());
        assert!(compatibility_check(&deformed, None).unwrap().is_ok());
    }

    #[test]
    fn linear_map_scales_metric() {
        let p = kdv();
        let out = miura_conjugate(&p.first, &[pe("2*v1")], 1).unwrap();
        assert_eq!(out.coeff(1, 1, 1), Expr::int(4));
    }

    #[test]
    fn quasi_trivial_map_produces_one_eighth() {
        let p = kdv();
        let map = [pe("v1 + eps^2/24*(v1_3/v1_1 - v1_2^2/v1_1^2)")];
        let out = miura_conjugate(&p.second, &map, 1).unwrap();
        assert_eq!(out.coeff(1, 1, 3), pe("eps^2/8"));
        assert_eq!(out.coeff(1, 1, 1), pe("v1"));
        assert_eq!(out.coeff(1, 1, 0), pe("v1_1/2"));
        let first = miura_conjugate(&p.first, &map, 1).unwrap();
        assert_eq!(
            first,
            PoissonOp::constant_metric(&vec![vec![Scalar::one()]]).with_truncation(Some(1))
        );
    }

    #[test]
    fn kdv_central_invariant() {
        let m = FrobeniusManifold::new(ManifoldSpec::kdv()).unwrap();
        let chart = m.canonical_chart().unwrap();
        let p = deform_scalar(&genus0_pencil(&m), &Scalar::new(1, 8));
        let c = central_invariants(&p, &chart).unwrap();
        assert_eq!(c.values, vec![pe("1/24")]);
    }

    #[test]
    fn p1_pencil_is_bihamiltonian() {
        let m = FrobeniusManifold::new(ManifoldSpec::p1()).unwrap();
        let p = genus0_pencil(&m);
        assert!(p.first.is_skew() && p.second.is_skew());
        assert!(jacobi_check(&p.second, None).unwrap().is_ok());
        assert!(compatibility_check(&p, None).unwrap().is_ok());
    }

    #[test]
    fn records_round_trip() {
        let p = deform_scalar(&kdv(), &Scalar::new(1, 8)).second;
        let recs: Vec<_> = p
            .records()
            .into_iter()
            .map(|r| (r.g, r.k, r.alpha, r.beta, pe(&r.coeff)))
            .collect();
        assert_eq!(recs.len(), 3);
        assert_eq!(PoissonOp::from_records(1, &recs, None).unwrap(), p);
    }
}
