//! Differential-polynomial calculus on jet variables.
//!
//! Jet variables `u^{i,s}` carry a field tag (see [`Field`]); the total
//! derivative acts on every field at once, so the same routines serve flat
//! coordinates, canonical coordinates and the formal test fields used by the
//! Poisson-bracket checks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::symcore::{Expr, Field, Monomial, Poly, Scalar, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("expression mixes flat and canonical jet variables")]
    MixedCharts,
    #[error("not a total x-derivative: {0}")]
    NotExact(String),
    #[error("differential degree {0} is below 2 for an element outside the polynomial ring")]
    DegreeTooLow(i64),
    #[error("differential degrees differ: {0} vs {1}")]
    DegreeMismatch(i64, i64),
    #[error("monomial has a negative jet exponent")]
    NegativeExponent,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Coordinate system of a [`JetPoly`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chart {
    Flat,
    Canonical,
}

impl Chart {
    pub fn field(self) -> Field {
        match self {
            Chart::Flat => Field::V,
            Chart::Canonical => Field::U,
        }
    }
}

/// Differential degree of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffDegree {
    Zero,
    Homogeneous(i64),
    Mixed,
}

/// An expression over the jets of a single coordinate system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JetPoly {
    expr: Expr,
    chart: Option<Chart>,
    degree: DiffDegree,
    order: Option<u32>,
    polynomial: bool,
}

impl JetPoly {
    pub fn new(expr: Expr) -> Result<Self, JetError> {
        let fields: BTreeSet<Field> = expr.jet_vars().iter().filter_map(Var::jet_field).collect();
        let chart = match (fields.contains(&Field::V), fields.contains(&Field::U)) {
            (true, true) => return Err(JetError::MixedCharts),
            (true, false) => Some(Chart::Flat),
            (false, true) => Some(Chart::Canonical),
            (false, false) => None,
        };
        Ok(JetPoly {
            degree: diff_degree(&expr),
            order: max_order(&expr),
            polynomial: is_polynomial(&expr),
            expr,
            chart,
        })
    }

    pub fn parse(text: &str) -> Result<Self, JetError> {
        JetPoly::new(crate::symcore::parse(text)?)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn into_expr(self) -> Expr {
        self.expr
    }

    pub fn chart(&self) -> Option<Chart> {
        self.chart
    }

    pub fn degree(&self) -> DiffDegree {
        self.degree
    }

    pub fn max_order(&self) -> Option<u32> {
        self.order
    }

    /// Whether the element lies in the ring of differential polynomials.
    pub fn in_polynomial_ring(&self) -> bool {
        self.polynomial
    }

    pub fn dx(&self) -> JetPoly {
        JetPoly::new(dx(&self.expr)).expect("dx preserves the chart")
    }

    pub fn jet_partial(&self, idx: u32, order: u32) -> JetPoly {
        let field = self.chart.unwrap_or(Chart::Flat).field();
        JetPoly::new(jet_partial(&self.expr, field, idx, order)).expect("same chart")
    }

    pub fn var_deriv(&self, idx: u32) -> JetPoly {
        let field = self.chart.unwrap_or(Chart::Flat).field();
        JetPoly::new(var_deriv(&self.expr, field, idx)).expect("same chart")
    }

    pub fn integrate_x(&self) -> Result<JetPoly, JetError> {
        JetPoly::new(integrate_x(&self.expr)?)
    }
}

/// Total x-derivative.
pub fn dx(e: &Expr) -> Expr {
    e.derive(&|v: &Var| match v.next_jet() {
        Some(n) => Expr::var(n),
        None => Expr::zero(),
    })
}

/// `k`-fold total x-derivative.
pub fn dx_n(e: &Expr, k: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..k {
        out = dx(&out);
    }
    out
}

/// Partial derivative in a single jet variable.
pub fn jet_partial(e: &Expr, field: Field, idx: u32, order: u32) -> Expr {
    e.partial(&Var::jet(field, idx, order))
}

/// Highest jet order of `(field, idx)` occurring in `e`.
pub fn component_order(e: &Expr, field: Field, idx: u32) -> Option<u32> {
    e.jet_vars()
        .into_iter()
        .filter_map(|v| match v {
            Var::Jet {
                field: f,
                idx: i,
                order,
            } if f == field && i == idx => Some(order),
            _ => None,
        })
        .max()
}

/// Highest jet order of any jet variable in `e`.
pub fn max_order(e: &Expr) -> Option<u32> {
    e.jet_vars().iter().filter_map(Var::jet_order).max()
}

/// Euler–Lagrange derivative `δ/δu^i = Σ_s (−∂_x)^s ∂/∂u^{i,s}`.
pub fn var_deriv(e: &Expr, field: Field, idx: u32) -> Expr {
    let Some(n) = component_order(e, field, idx) else {
        return Expr::zero();
    };
    // Horner form: p_N, then p_{s} - dx(acc).
    let mut acc = Expr::zero();
    for s in (0..=n).rev() {
        acc = jet_partial(e, field, idx, s).sub(&dx(&acc));
    }
    acc
}

/// Every `(field, idx)` pair whose jets occur in `e`.
pub fn components(e: &Expr) -> BTreeSet<(Field, u32)> {
    e.jet_vars()
        .into_iter()
        .filter_map(|v| match v {
            Var::Jet { field, idx, .. } => Some((field, idx)),
            _ => None,
        })
        .collect()
}

fn monomial_degree(m: &Monomial) -> Option<i64> {
    let mut d = 0i64;
    for (v, e) in m.powers() {
        match v {
            Var::Jet { order, .. } => d += *order as i64 * *e as i64,
            Var::Log(arg)
                if !matches!(
                    diff_degree(arg),
                    DiffDegree::Zero | DiffDegree::Homogeneous(0)
                ) => {
                    return None;
                }
            _ => {}
        }
    }
    if let Some(a) = m.exp_arg() {
        if !matches!(
            diff_degree(&Expr::from_poly(a.clone())),
            DiffDegree::Zero | DiffDegree::Homogeneous(0)
        ) {
            return None;
        }
    }
    Some(d)
}

fn poly_degree(p: &Poly) -> DiffDegree {
    let mut deg: Option<i64> = None;
    for (m, _) in p.terms() {
        let Some(d) = monomial_degree(m) else {
            return DiffDegree::Mixed;
        };
        match deg {
            None => deg = Some(d),
            Some(d0) if d0 != d => return DiffDegree::Mixed,
            _ => {}
        }
    }
    match deg {
        None => DiffDegree::Zero,
        Some(d) => DiffDegree::Homogeneous(d),
    }
}

/// Differential degree: jet order weighted by exponent, negative exponents
/// counting negatively.
pub fn diff_degree(e: &Expr) -> DiffDegree {
    let mut d = match poly_degree(e.num()) {
        DiffDegree::Homogeneous(d) => d,
        other => return other,
    };
    for (f, k) in e.den() {
        match poly_degree(f) {
            DiffDegree::Homogeneous(fd) => d -= fd * *k as i64,
            _ => return DiffDegree::Mixed,
        }
    }
    DiffDegree::Homogeneous(d)
}

/// Whether `e` is a differential polynomial: no log atoms, and jets of
/// positive order occur only with non-negative powers in the numerator.
pub fn is_polynomial(e: &Expr) -> bool {
    if e.has_log() {
        return false;
    }
    let positive = |v: &Var| v.jet_order().is_some_and(|o| o > 0);
    for (m, _) in e.num().terms() {
        if m.powers().iter().any(|(v, k)| positive(v) && *k < 0) {
            return false;
        }
        if let Some(a) = m.exp_arg() {
            if Expr::from_poly(a.clone()).free_vars().iter().any(positive) {
                return false;
            }
        }
    }
    e.den()
        .iter()
        .all(|(f, _)| !Expr::from_poly(f.clone()).free_vars().iter().any(positive))
}

/// Result of comparing two monomials in the partition order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoOrder {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// Jet exponents of positive order, and the partition they determine
/// (sorted in descending order).
fn jet_signature(m: &Monomial) -> Result<(BTreeMap<Var, i32>, Vec<u32>), JetError> {
    let mut map = BTreeMap::new();
    let mut parts = Vec::new();
    for (v, e) in m.powers() {
        if let Some(order) = v.jet_order().filter(|o| *o > 0) {
            if *e < 0 {
                return Err(JetError::NegativeExponent);
            }
            map.insert(v.clone(), *e);
            parts.extend(std::iter::repeat_n(order, *e as usize));
        }
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok((map, parts))
}

/// Compares monomials by the partitions of their differential degree.
/// Distinct monomials with the same partition are incomparable; different
/// partitions are ordered lexicographically.
pub fn mono_compare(a: &Monomial, b: &Monomial) -> Result<MonoOrder, JetError> {
    let (ma, pa) = jet_signature(a)?;
    let (mb, pb) = jet_signature(b)?;
    let (da, db) = (
        pa.iter().map(|&x| x as i64).sum::<i64>(),
        pb.iter().map(|&x| x as i64).sum::<i64>(),
    );
    if da != db {
        return Err(JetError::DegreeMismatch(da, db));
    }
    if ma == mb {
        return Ok(MonoOrder::Equal);
    }
    Ok(match pa.cmp(&pb) {
        Ordering::Less => MonoOrder::Less,
        Ordering::Greater => MonoOrder::Greater,
        Ordering::Equal => MonoOrder::Incomparable,
    })
}

/// Convenience wrapper comparing single-term expressions.
pub fn mono_compare_exprs(a: &Expr, b: &Expr) -> Result<MonoOrder, JetError> {
    let single = |e: &Expr| -> Result<Monomial, JetError> {
        match (e.den().is_empty(), e.num().as_single_term()) {
            (true, Some((m, _))) => Ok(m.clone()),
            _ => Err(JetError::Sym(SymError::NotSeparable(e.to_string()))),
        }
    };
    mono_compare(&single(a)?, &single(b)?)
}

fn drop_constant(e: Expr) -> Expr {
    if !e.den().is_empty() {
        return e;
    }
    let kept = e.num().terms().iter().filter(|(m, _)| !m.is_one()).cloned();
    Expr::from_poly(Poly::from_terms(kept))
}

/// Antiderivative of a closed gradient: finds `h` with `∂h/∂z_i = g_i`.
fn integrate_gradient(grad: &[(Var, Expr)]) -> Result<Expr, JetError> {
    let mut h = Expr::zero();
    for (z, g) in grad {
        let residual = g.sub(&h.partial(z));
        if residual.is_zero() {
            continue;
        }
        h = h.add(&residual.integrate(z)?);
    }
    for (z, g) in grad {
        if !h.partial(z).sub(g).is_zero() {
            return Err(JetError::NotExact(format!("gradient is not closed in {z}")));
        }
    }
    Ok(h)
}

/// Public form of the gradient integrator: `h` with `∂h/∂z = g` for each
/// pair, without an added constant.
pub fn potential(grad: &[(Var, Expr)]) -> Result<Expr, JetError> {
    integrate_gradient(grad)
}

/// Inverts the total x-derivative without checking hypotheses on degree.
pub fn integrate_x_unchecked(f: &Expr) -> Result<Expr, JetError> {
    for (field, idx) in components(f) {
        let d = var_deriv(f, field, idx);
        if !d.is_zero() {
            return Err(JetError::NotExact(format!(
                "variational derivative in {}{idx} is {d}",
                field.prefix()
            )));
        }
    }
    let mut rest = f.clone();
    let mut g = Expr::zero();
    while !rest.is_zero() {
        let n = match max_order(&rest) {
            Some(n) if n > 0 => n,
            _ => return Err(JetError::NotExact(format!("remainder {rest} has no jets"))),
        };
        let top: Vec<Var> = rest
            .jet_vars()
            .into_iter()
            .filter(|v| v.jet_order() == Some(n))
            .collect();
        let mut grad = Vec::with_capacity(top.len());
        for y in &top {
            let fi = rest.partial(y);
            if top.iter().any(|y2| !fi.partial(y2).is_zero()) {
                return Err(JetError::NotExact(format!("not linear in {y}")));
            }
            let Var::Jet { field, idx, .. } = y else {
                unreachable!()
            };
            grad.push((Var::jet(*field, *idx, n - 1), fi));
        }
        let h = integrate_gradient(&grad)?;
        let next = rest.sub(&dx(&h));
        if max_order(&next).is_some_and(|m| m >= n) {
            return Err(JetError::NotExact(format!("top order {n} did not cancel")));
        }
        g = g.add(&h);
        rest = next;
    }
    Ok(drop_constant(g))
}

/// Finds `g` with `∂_x g = f`, normalized to have no constant term.
pub fn integrate_x(f: &Expr) -> Result<Expr, JetError> {
    if !is_polynomial(f) {
        if let DiffDegree::Homogeneous(d) = diff_degree(f) {
            if d < 2 {
                return Err(JetError::DegreeTooLow(d));
            }
        }
    }
    integrate_x_unchecked(f)
}

/// Outcome of integrating `η_{1α} Q^α` twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleIntegral {
    pub t: Expr,
    pub order_in: Option<u32>,
    pub order_out: Option<u32>,
}

impl DoubleIntegral {
    /// Whether the jet order dropped by exactly two.
    pub fn order_drop_ok(&self) -> bool {
        match (self.order_in, self.order_out) {
            (Some(a), Some(b)) => a >= 2 && b + 2 == a,
            (Some(a), None) => a <= 2,
            (None, None) => true,
            (None, Some(_)) => false,
        }
    }
}

/// Solves `∂_x² T = η_{1α} Q^α`.
pub fn double_integrate_t(q: &[Expr], eta_row1: &[Scalar]) -> Result<DoubleIntegral, JetError> {
    let mut s = Expr::zero();
    for (qa, e) in q.iter().zip(eta_row1) {
        s = s.add(&qa.scale(e));
    }
    let once = integrate_x_unchecked(&s)
        .map_err(|e| JetError::NotExact(format!("first integration: {e}")))?;
    let t = integrate_x_unchecked(&once)
        .map_err(|e| JetError::NotExact(format!("second integration: {e}")))?;
    Ok(DoubleIntegral {
        order_in: max_order(&s),
        order_out: max_order(&t),
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn dx_examples() {
        assert_eq!(dx(&p("v1")), p("v1_1"));
        assert_eq!(dx(&p("u1_1*u2_1")), p("u1_2*u2_1 + u1_1*u2_2"));
        assert_eq!(dx(&p("log(u1_1)")), p("u1_2/u1_1"));
    }

    #[test]
    fn partial_examples() {
        assert_eq!(jet_partial(&p("u1_1^2"), Field::U, 1, 1), p("2*u1_1"));
        assert_eq!(jet_partial(&p("u1_1*u2_2"), Field::U, 2, 2), p("u1_1"));
        assert!(jet_partial(&p("v1^3"), Field::U, 1, 1).is_zero());
    }

    #[test]
    fn variational_derivative_examples() {
        assert_eq!(var_deriv(&p("u1_1^2/2"), Field::U, 1), p("-u1_2"));
        assert_eq!(var_deriv(&p("u1*u1_2"), Field::U, 1), p("2*u1_2"));
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(integrate_x(&p("u1_1*u1_2")).unwrap(), p("u1_1^2/2"));
        assert!(matches!(
            integrate_x(&p("u1_1^2")),
            Err(JetError::NotExact(_))
        ));
        let f = dx(&p("log(u1_1)/24 + u1_2/u1_1"));
        assert_eq!(integrate_x(&f).unwrap(), p("log(u1_1)/24 + u1_2/u1_1"));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(diff_degree(&p("u1_1^3*u2_2")), DiffDegree::Homogeneous(5));
        assert_eq!(diff_degree(&p("log(u1_1)")), DiffDegree::Mixed);
        assert_eq!(diff_degree(&p("u1_1^-1*u1_3")), DiffDegree::Homogeneous(2));
    }

    #[test]
    fn partition_order_examples() {
        let c = |a: &str, b: &str| mono_compare_exprs(&p(a), &p(b)).unwrap();
        assert_eq!(c("u2_1^3*u1_1", "u1_1^2*u2_2"), MonoOrder::Less);
        assert_eq!(c("u1_1^2*u2_2", "u1_3*u2_1"), MonoOrder::Less);
        assert_eq!(c("u1_3*u2_1", "u2_4"), MonoOrder::Less);
        assert_eq!(c("u1_3*u2_1", "u1_1*u2_3"), MonoOrder::Incomparable);
        assert!(matches!(
            mono_compare_exprs(&p("u1_1"), &p("u1_2")),
            Err(JetError::DegreeMismatch(1, 2))
        ));
    }

    #[test]
    fn polynomial_detection() {
        assert!(is_polynomial(&p("u1_1^2")));
        assert!(!is_polynomial(&p("u1_2/u1_1")));
        assert!(is_polynomial(&p("(u1_2*u1_1 - u1_1*u1_2)/u1_1")));
    }

    #[test]
    fn mixed_charts_rejected() {
        assert_eq!(
            JetPoly::parse("v1 + u1").unwrap_err(),
            JetError::MixedCharts
        );
    }
}
