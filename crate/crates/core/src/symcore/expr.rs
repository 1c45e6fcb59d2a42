//! Canonical rational expressions.
//!
//! An [`Expr`] is `num / Π f_k^{e_k}` where `num` is a Laurent polynomial
//! (possibly with `exp` factors and `log` atoms) and every `f_k` is a monic,
//! content-free polynomial that does not divide `num`. Monomial denominators
//! are always absorbed into `num` as negative powers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::{Monomial, Poly};
use super::scalar::Scalar;
use super::var::{Field, Var};
use super::SymError;

/// `(coefficient, monomial, factors)` of a split denominator.
type SplitDenominator = (Scalar, Monomial, Vec<(Poly, u32)>);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Expr {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Scalar::from_int(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::constant(Scalar::new(n, d))
    }

    pub fn var(v: Var) -> Self {
        Expr::from_poly(Poly::term(Monomial::var(v, 1), Scalar::one()))
    }

    pub fn jet(field: Field, idx: u32, order: u32) -> Self {
        Expr::var(Var::jet(field, idx, order))
    }

    pub fn v(idx: u32) -> Self {
        Expr::jet(Field::V, idx, 0)
    }

    pub fn u(idx: u32) -> Self {
        Expr::jet(Field::U, idx, 0)
    }

    pub fn lambda() -> Self {
        Expr::var(Var::Lambda)
    }

    pub fn eps() -> Self {
        Expr::var(Var::Eps)
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr {
            num: p,
            den: Vec::new(),
        }
    }

    pub fn from_monomial(m: Monomial, c: Scalar) -> Self {
        Expr::from_poly(Poly::term(m, c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value as a rational constant, if it is one.
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_scalar().is_some()
    }

    pub fn has_denominator(&self) -> bool {
        !self.den.is_empty()
    }

    /// `1 / Π f^e` for factors taken from another expression's denominator.
    pub fn from_factors(factors: Vec<(Poly, u32)>) -> Expr {
        Expr::normalize(Poly::one(), factors)
    }

    /// `1 / f` for an already normalized denominator factor.
    fn factor_inverse(f: &Poly, e: u32) -> Expr {
        Expr {
            num: Poly::one(),
            den: vec![(f.clone(), e)],
        }
    }

    fn normalize(mut num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        let mut merged: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, e) in den {
            if e > 0 {
                *merged.entry(f).or_insert(0) += e;
            }
        }
        let mut out = Vec::with_capacity(merged.len());
        for (f, mut e) in merged {
            while e > 0 {
                match num.div_exact(&f) {
                    Some(q) => {
                        num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e > 0 {
                out.push((f, e));
            }
        }
        Expr { num, den: out }
    }

    /// Splits a non-zero polynomial into `coefficient * monomial * Π f^e`
    /// with each `f` a normalized denominator factor, reusing `known`
    /// factors where they divide.
    fn split_denominator(
        q: &Poly,
        known: &[&Poly],
    ) -> Result<SplitDenominator, SymError> {
        if q.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if let Some((m, c)) = q.as_single_term() {
            return Ok((c.clone(), m.clone(), Vec::new()));
        }
        let content = q.monomial_content();
        let q1 = q.mul_term(&content.inverse(), &Scalar::one());
        if q1.has_exp() {
            return Err(SymError::UnsupportedDenominator(
                Expr::from_poly(q.clone()).to_string(),
            ));
        }
        let lc = q1
            .leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::one);
        let mut rest = q1.scale(&lc.recip());
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for f in known {
            let mut count = 0;
            while rest.as_constant().is_none() {
                match rest.div_exact_plain(f) {
                    Some(r) => {
                        rest = r;
                        count += 1;
                    }
                    None => break,
                }
            }
            if count > 0 {
                factors.push(((*f).clone(), count));
            }
        }
        match rest.as_constant() {
            Some(c) if c.is_one() => {}
            Some(c) => {
                // Only possible with non-monic known factors; fold into unit.
                return Ok((&lc * &c, content, factors));
            }
            None => {
                let top = rest
                    .leading()
                    .map(|(m, _)| m.total_degree().unsigned_abs())
                    .unwrap_or(1);
                let perfect = (2..=top.max(1) as u32)
                    .rev()
                    .find_map(|e| rest.root_exact(e).map(|r| (r, e)));
                factors.push(perfect.unwrap_or((rest, 1)));
            }
        }
        Ok((lc, content, factors))
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.den.is_empty() && other.den.is_empty() {
            return Expr::from_poly(self.num.add(&other.num));
        }
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Expr::normalize(self.num.add(&other.num), self.den.clone());
        }
        let mut lcm: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, e) in self.den.iter().chain(other.den.iter()) {
            let slot = lcm.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(*e);
        }
        let cofactor = |den: &[(Poly, u32)]| -> Poly {
            let mut acc = Poly::one();
            for (f, e) in &lcm {
                let have = den
                    .iter()
                    .find(|(g, _)| g == f)
                    .map(|(_, k)| *k)
                    .unwrap_or(0);
                if *e > have {
                    acc = acc.mul(&f.pow(e - have));
                }
            }
            acc
        };
        let num = self
            .num
            .mul(&cofactor(&self.den))
            .add(&other.num.mul(&cofactor(&other.den)));
        Expr::normalize(num, lcm.into_iter().collect())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let num = self.num.mul(&other.num);
        if self.den.is_empty() && other.den.is_empty() {
            return Expr::from_poly(num);
        }
        let mut den = self.den.clone();
        den.extend(other.den.iter().cloned());
        Expr::normalize(num, den)
    }

    pub fn scale(&self, s: &Scalar) -> Expr {
        if s.is_zero() {
            return Expr::zero();
        }
        Expr {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    pub fn inverse(&self) -> Result<Expr, SymError> {
        let known: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
        let (c, m, factors) = Expr::split_denominator(&self.num, &known)?;
        let mut num = Poly::term(m.inverse(), c.recip());
        for (f, e) in &self.den {
            num = num.mul(&f.pow(*e));
        }
        Ok(Expr::normalize(num, factors))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, SymError> {
        if other.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if let Some(c) = other.as_scalar() {
            return Ok(self.scale(&c.recip()));
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let mut known: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
        known.extend(other.den.iter().map(|(f, _)| f));
        let (c, m, factors) = Expr::split_denominator(&other.num, &known)?;
        let mut num = self.num.mul_term(&m.inverse(), &c.recip());
        for (f, e) in &other.den {
            num = num.mul(&f.pow(*e));
        }
        let mut den = self.den.clone();
        den.extend(factors);
        Ok(Expr::normalize(num, den))
    }

    /// Integer power; negative exponents require a non-zero base.
    pub fn pow(&self, k: i32) -> Result<Expr, SymError> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        if k == 0 {
            return Ok(Expr::one());
        }
        if let Some((m, c)) = self.num.as_single_term() {
            if self.den.is_empty() {
                return Ok(Expr::from_monomial(m.pow(k), c.pow(k)));
            }
        }
        Ok(Expr {
            num: self.num.pow(k as u32),
            den: self
                .den
                .iter()
                .map(|(f, e)| (f.clone(), e * k as u32))
                .collect(),
        })
    }

    /// `exp(self)`. Integer multiples of `log` atoms are folded back into
    /// powers of their arguments.
    pub fn exp(&self) -> Result<Expr, SymError> {
        if !self.den.is_empty() {
            return Err(SymError::NonPolynomialExp(self.to_string()));
        }
        let mut out = Expr::one();
        let mut rest: Vec<(Monomial, Scalar)> = Vec::new();
        for (m, c) in self.num.terms() {
            if let ([(Var::Log(arg), 1)], None, true) = (m.powers(), m.exp_arg(), c.is_integer()) {
                out = out.mul(&arg.pow(c.to_i64().unwrap_or(0) as i32)?);
                continue;
            }
            rest.push((m.clone(), c.clone()));
        }
        let arg = Poly::from_terms(rest);
        Ok(out.mul(&Expr::from_monomial(Monomial::exp_of(arg), Scalar::one())))
    }

    fn log_of_constant(c: &Scalar) -> Expr {
        if c.is_one() {
            Expr::zero()
        } else if c < &Scalar::one() {
            Expr::log_of_constant(&c.recip()).neg()
        } else {
            Expr::var(Var::Log(Box::new(Expr::constant(c.clone()))))
        }
    }

    fn log_of_monomial(m: &Monomial) -> Expr {
        let mut out = match m.exp_arg() {
            Some(a) => Expr::from_poly(a.clone()),
            None => Expr::zero(),
        };
        for (v, e) in m.powers() {
            let atom = Expr::var(Var::Log(Box::new(Expr::var(v.clone()))));
            out = out.add(&atom.scale(&Scalar::from_int(*e as i64)));
        }
        out
    }

    /// `log(self)`, split over products where the split is sign-safe.
    pub fn log(&self) -> Result<Expr, SymError> {
        if self.is_zero() {
            return Err(SymError::LogOfZero);
        }
        let known: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
        let (mut c, m, factors) = Expr::split_denominator(&self.num, &known)?;
        let mut out = Expr::log_of_monomial(&m);
        let mut sign_flip = false;
        if c.is_negative() {
            c = -c;
            sign_flip = true;
        }
        let mut leftover_sign = sign_flip;
        for (f, e) in &factors {
            let arg = if leftover_sign {
                leftover_sign = false;
                Expr::from_poly(f.neg())
            } else {
                Expr::from_poly(f.clone())
            };
            let atom = Expr::var(Var::Log(Box::new(arg)));
            out = out.add(&atom.scale(&Scalar::from_int(*e as i64)));
        }
        if leftover_sign {
            // Negative unit with no polynomial factor to absorb the sign.
            return Ok(Expr::var(Var::Log(Box::new(self.clone()))));
        }
        out = out.add(&Expr::log_of_constant(&c));
        for (f, e) in &self.den {
            let atom = Expr::var(Var::Log(Box::new(Expr::from_poly(f.clone()))));
            out = out.sub(&atom.scale(&Scalar::from_int(*e as i64)));
        }
        Ok(out)
    }

    /// Exact square root of a single term with even powers and a positive
    /// coefficient; `exp(a)` has root `exp(a/2)`.
    pub fn sqrt_exact(&self) -> Option<Expr> {
        if !self.den.is_empty() {
            return None;
        }
        if self.is_zero() {
            return Some(Expr::zero());
        }
        let (m, c) = self.num.as_single_term()?;
        let c = c.sqrt_exact()?;
        let mut powers = Vec::new();
        for (v, e) in m.powers() {
            if e % 2 != 0 {
                return None;
            }
            powers.push((v.clone(), e / 2));
        }
        let exp = m.exp_arg().map(|a| a.scale(&Scalar::new(1, 2)));
        Some(Expr::from_monomial(Monomial::from_powers(powers, exp), c))
    }

    /// Applies the derivation determined by its values on elementary
    /// variables; `log` atoms and `exp` factors follow the chain rule.
    pub fn derive(&self, d: &dyn Fn(&Var) -> Expr) -> Expr {
        let mut dnum = Expr::zero();
        for (m, c) in self.num.terms() {
            for (v, e) in m.powers() {
                let dv = match v {
                    Var::Log(arg) => {
                        let da = arg.derive(d);
                        if da.is_zero() {
                            continue;
                        }
                        da.checked_div(arg).expect("log argument is non-zero")
                    }
                    _ => d(v),
                };
                if dv.is_zero() {
                    continue;
                }
                let rest = m.mul(&Monomial::var(v.clone(), -1));
                let coeff = c * &Scalar::from_int(*e as i64);
                dnum = dnum.add(&Expr::from_monomial(rest, coeff).mul(&dv));
            }
            if let Some(a) = m.exp_arg() {
                let da = Expr::from_poly(a.clone()).derive(d);
                if !da.is_zero() {
                    dnum = dnum.add(&Expr::from_monomial(m.clone(), c.clone()).mul(&da));
                }
            }
        }
        if self.den.is_empty() {
            return dnum;
        }
        let inv_den = Expr {
            num: Poly::one(),
            den: self.den.clone(),
        };
        let mut log_deriv = Expr::zero();
        for (f, e) in &self.den {
            let df = Expr::from_poly(f.clone()).derive(d);
            if df.is_zero() {
                continue;
            }
            log_deriv = log_deriv.add(
                &df.mul(&Expr::factor_inverse(f, 1))
                    .scale(&Scalar::from_int(*e as i64)),
            );
        }
        dnum.mul(&inv_den).sub(&self.mul(&log_deriv))
    }

    /// Partial derivative treating every other variable as independent.
    pub fn partial(&self, x: &Var) -> Expr {
        if !self.contains_var(x) {
            return Expr::zero();
        }
        self.derive(&|v: &Var| if v == x { Expr::one() } else { Expr::zero() })
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        fn in_poly(p: &Poly, x: &Var) -> bool {
            p.terms().iter().any(|(m, _)| {
                m.powers().iter().any(|(v, _)| {
                    v == x
                        || match v {
                            Var::Log(arg) => arg.contains_var(x),
                            _ => false,
                        }
                }) || m.exp_arg().is_some_and(|a| in_poly(a, x))
            })
        }
        in_poly(&self.num, x) || self.den.iter().any(|(f, _)| in_poly(f, x))
    }

    /// Every elementary variable occurring anywhere, including inside atoms.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn collect(p: &Poly, out: &mut BTreeSet<Var>) {
            for (m, _) in p.terms() {
                for (v, _) in m.powers() {
                    match v {
                        Var::Log(arg) => {
                            out.extend(arg.free_vars());
                        }
                        _ => {
                            out.insert(v.clone());
                        }
                    }
                }
                if let Some(a) = m.exp_arg() {
                    collect(a, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        collect(&self.num, &mut out);
        for (f, _) in &self.den {
            collect(f, &mut out);
        }
        out
    }

    pub fn has_log(&self) -> bool {
        fn in_poly(p: &Poly) -> bool {
            p.terms().iter().any(|(m, _)| {
                m.powers().iter().any(|(v, _)| matches!(v, Var::Log(_)))
                    || m.exp_arg().is_some_and(in_poly)
            })
        }
        in_poly(&self.num) || self.den.iter().any(|(f, _)| in_poly(f))
    }

    pub fn has_exp(&self) -> bool {
        self.num.has_exp() || self.den.iter().any(|(f, _)| f.has_exp())
    }

    /// Replaces elementary variables; `log` atoms and `exp` factors are
    /// rebuilt from their substituted arguments.
    pub fn substitute(&self, s: &dyn Fn(&Var) -> Option<Expr>) -> Result<Expr, SymError> {
        let mut out = Expr::zero();
        for (m, c) in self.num.terms() {
            let mut prod = Expr::constant(c.clone());
            for (v, e) in m.powers() {
                let ve = match v {
                    Var::Log(arg) => {
                        let a2 = arg.substitute(s)?;
                        if &a2 == arg.as_ref() {
                            Expr::var(v.clone())
                        } else {
                            a2.log()?
                        }
                    }
                    _ => match s(v) {
                        Some(x) => x,
                        None => Expr::var(v.clone()),
                    },
                };
                prod = prod.mul(&ve.pow(*e)?);
            }
            if let Some(a) = m.exp_arg() {
                let a2 = Expr::from_poly(a.clone()).substitute(s)?;
                prod = prod.mul(&a2.exp()?);
            }
            out = out.add(&prod);
        }
        for (f, e) in &self.den {
            let fs = Expr::from_poly(f.clone()).substitute(s)?;
            out = out.checked_div(&fs.pow(*e as i32)?)?;
        }
        Ok(out)
    }

    /// Substitutes one variable by an expression.
    pub fn subs(&self, x: &Var, value: &Expr) -> Result<Expr, SymError> {
        if !self.contains_var(x) {
            return Ok(self.clone());
        }
        self.substitute(&|v: &Var| if v == x { Some(value.clone()) } else { None })
    }

    /// Groups numerator terms by their part in the variables selected by
    /// `pick`, returning `selected monomial -> remaining coefficient`.
    /// Fails if a selected variable occurs in the denominator, an `exp`
    /// factor or a `log` atom.
    pub fn collect_by(
        &self,
        pick: &dyn Fn(&Var) -> bool,
    ) -> Result<BTreeMap<Monomial, Expr>, SymError> {
        let check = |p: &Poly| -> bool {
            p.terms().iter().any(|(m, _)| {
                m.powers().iter().any(|(v, _)| match v {
                    Var::Log(arg) => arg.free_vars().iter().any(pick),
                    _ => false,
                }) || m
                    .exp_arg()
                    .is_some_and(|a| Expr::from_poly(a.clone()).free_vars().iter().any(pick))
            })
        };
        if check(&self.num) || self.den.iter().any(|(f, _)| f.vars().any(pick) || check(f)) {
            return Err(SymError::NotSeparable(self.to_string()));
        }
        let inv_den = Expr {
            num: Poly::one(),
            den: self.den.clone(),
        };
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, Scalar)>> = BTreeMap::new();
        for (m, c) in self.num.terms() {
            let (sel, rest): (Vec<_>, Vec<_>) =
                m.powers().iter().cloned().partition(|(v, _)| pick(v));
            let key = Monomial::from_powers(sel, None);
            let rest = Monomial::from_powers(rest, m.exp_arg().cloned());
            groups.entry(key).or_default().push((rest, c.clone()));
        }
        Ok(groups
            .into_iter()
            .map(|(k, ts)| {
                let coeff = Expr::from_poly(Poly::from_terms(ts));
                let coeff = if inv_den.is_one() {
                    coeff
                } else {
                    Expr::normalize(coeff.num, inv_den.den.clone())
                };
                (k, coeff)
            })
            .collect())
    }

    /// Drops numerator terms whose power of `x` exceeds `max`.
    pub fn truncate_power(&self, x: &Var, max: i32) -> Expr {
        let kept = Poly::from_terms(
            self.num
                .terms()
                .iter()
                .filter(|(m, _)| m.power_of(x) <= max)
                .cloned(),
        );
        Expr::normalize(kept, self.den.clone())
    }

    /// Every jet variable occurring anywhere.
    pub fn jet_vars(&self) -> BTreeSet<Var> {
        self.free_vars().into_iter().filter(Var::is_jet).collect()
    }

    /// Highest x-order of any jet of `field`, or `None` if no such jet occurs.
    pub fn max_jet_order(&self, field: Field) -> Option<u32> {
        self.jet_vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Jet {
                    field: f, order, ..
                } if f == field => Some(order),
                _ => None,
            })
            .max()
    }

    /// Whether every denominator factor and atom is free of `x`.
    pub fn is_laurent_in(&self, x: &Var) -> bool {
        self.collect_by(&|v| v == x).is_ok()
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (i, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mut factors: Vec<String> = Vec::new();
        for (v, e) in m.powers() {
            if *e == 1 {
                factors.push(v.to_string());
            } else {
                factors.push(format!("{v}^{e}"));
            }
        }
        if let Some(a) = m.exp_arg() {
            factors.push(format!("exp({})", PolyDisplay(a)));
        }
        if factors.is_empty() {
            write!(f, "{abs}")?;
        } else {
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            write!(f, "{}", factors.join("*"))?;
        }
    }
    Ok(())
}

struct PolyDisplay<'a>(&'a Poly);

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self.0)
    }
}

/// Canonical text form; reparses to the same expression. Denominator
/// factors are written as negative powers so that each factor survives
/// reparsing intact.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write_poly(f, &self.num);
        }
        match self.num.as_single_term() {
            Some((m, c)) if m.is_one() && c.is_one() => {}
            Some((m, c)) if m.is_one() && (-c).is_one() => write!(f, "-")?,
            Some(_) => {
                write_poly(f, &self.num)?;
                write!(f, "*")?;
            }
            None => {
                write!(f, "(")?;
                write_poly(f, &self.num)?;
                write!(f, ")*")?;
            }
        }
        for (i, (p, e)) in self.den.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "(")?;
            write_poly(f, p)?;
            write!(f, ")^-{e}")?;
        }
        Ok(())
    }
}

impl From<Scalar> for Expr {
    fn from(c: Scalar) -> Self {
        Expr::constant(c)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: &'a Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &'a Expr) -> Expr {
                Expr::$inner(&self, rhs)
            }
        }
    };
}

expr_binop!(Add, add, add);
expr_binop!(Sub, sub, sub);
expr_binop!(Mul, mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a.add(&b))
    }
}
