//! Laurent polynomials with rational coefficients and `exp` factors.
//!
//! A [`Monomial`] is a product of integer powers of [`Var`]s times an optional
//! `exp(arg)` factor. Exponential factors multiply by adding their arguments,
//! so every monomial carries at most one.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::scalar::Scalar;
use super::var::Var;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    /// Sorted by variable, exponents never zero.
    powers: Vec<(Var, i32)>,
    exp: Option<Box<Poly>>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: Var, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial {
                powers: vec![(v, e)],
                exp: None,
            }
        }
    }

    /// `exp(arg)`; an empty argument yields the unit monomial.
    pub fn exp_of(arg: Poly) -> Self {
        Monomial {
            powers: Vec::new(),
            exp: if arg.is_zero() {
                None
            } else {
                Some(Box::new(arg))
            },
        }
    }

    pub fn from_powers(mut powers: Vec<(Var, i32)>, exp: Option<Poly>) -> Self {
        powers.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Var, i32)> = Vec::with_capacity(powers.len());
        for (v, e) in powers {
            match merged.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => merged.push((v, e)),
            }
        }
        merged.retain(|(_, e)| *e != 0);
        Monomial {
            powers: merged,
            exp: exp.filter(|p| !p.is_zero()).map(Box::new),
        }
    }

    pub fn powers(&self) -> &[(Var, i32)] {
        &self.powers
    }

    pub fn exp_arg(&self) -> Option<&Poly> {
        self.exp.as_deref()
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exp.is_none()
    }

    pub fn power_of(&self, v: &Var) -> i32 {
        self.powers
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.powers[i].1)
            .unwrap_or(0)
    }

    /// Sum of exponents (the `exp` factor carries no degree).
    pub fn total_degree(&self) -> i64 {
        self.powers.iter().map(|(_, e)| *e as i64).sum()
    }

    pub fn has_negative_powers(&self) -> bool {
        self.powers.iter().any(|(_, e)| *e < 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.powers.len() + other.powers.len());
        let (mut i, mut j) = (0, 0);
        while i < self.powers.len() && j < other.powers.len() {
            let (a, ea) = &self.powers[i];
            let (b, eb) = &other.powers[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    if ea + eb != 0 {
                        out.push((a.clone(), ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.powers[i..]);
        out.extend_from_slice(&other.powers[j..]);
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => {
                let s = a.add(b);
                if s.is_zero() {
                    None
                } else {
                    Some(Box::new(s))
                }
            }
        };
        Monomial { powers: out, exp }
    }

    pub fn inverse(&self) -> Monomial {
        Monomial {
            powers: self.powers.iter().map(|(v, e)| (v.clone(), -e)).collect(),
            exp: self.exp.as_ref().map(|p| Box::new(p.neg())),
        }
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial {
            powers: self
                .powers
                .iter()
                .map(|(v, e)| (v.clone(), e * k))
                .collect(),
            exp: self
                .exp
                .as_ref()
                .map(|p| Box::new(p.scale(&Scalar::from_int(k as i64)))),
        }
    }

    /// `self / other` if the quotient has only non-negative powers and no
    /// `exp` factor mismatch.
    pub fn divide(&self, other: &Monomial) -> Option<Monomial> {
        if self.exp != other.exp {
            return None;
        }
        let q = Monomial {
            powers: self.powers.clone(),
            exp: None,
        }
        .mul(
            &Monomial {
                powers: other.powers.clone(),
                exp: None,
            }
            .inverse(),
        );
        if q.has_negative_powers() {
            None
        } else {
            Some(q)
        }
    }

    /// The monomial with the `exp` factor removed.
    pub fn without_exp(&self) -> Monomial {
        Monomial {
            powers: self.powers.clone(),
            exp: None,
        }
    }

    /// Removes one variable entirely, returning its exponent.
    pub fn split_var(&self, v: &Var) -> (i32, Monomial) {
        let e = self.power_of(v);
        let rest = Monomial {
            powers: self
                .powers
                .iter()
                .filter(|(w, _)| w != v)
                .cloned()
                .collect(),
            exp: self.exp.clone(),
        };
        (e, rest)
    }

    /// Component-wise minimum of exponents (absent counts as zero).
    pub fn gcd_exponents(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.powers.len() || j < other.powers.len() {
            let pick = match (self.powers.get(i), other.powers.get(j)) {
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Less => {
                        i += 1;
                        (a.clone(), (*ea).min(0))
                    }
                    Ordering::Greater => {
                        j += 1;
                        (b.clone(), (*eb).min(0))
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (a.clone(), (*ea).min(*eb))
                    }
                },
                (Some((a, ea)), None) => {
                    i += 1;
                    (a.clone(), (*ea).min(0))
                }
                (None, Some((b, eb))) => {
                    j += 1;
                    (b.clone(), (*eb).min(0))
                }
                (None, None) => unreachable!(),
            };
            if pick.1 != 0 {
                out.push(pick);
            }
        }
        Monomial {
            powers: out,
            exp: None,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic: total degree first, then exponents compared at the
/// smallest variable where they differ, then the `exp` argument.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.total_degree().cmp(&other.total_degree());
        if d != Ordering::Equal {
            return d;
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.powers.get(i), other.powers.get(j)) {
                (None, None) => break,
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Less => return ea.cmp(&0),
                    Ordering::Greater => return 0.cmp(eb),
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some((_, ea)), None) => return ea.cmp(&0),
                (None, Some((_, eb))) => return 0.cmp(eb),
            }
        }
        self.exp.cmp(&other.exp)
    }
}

/// Finite sum of monomials with non-zero rational coefficients, sorted
/// ascending by the monomial order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Scalar)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Scalar)>>(it: I) -> Self {
        let mut map: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            match map.get_mut(&m) {
                Some(acc) => *acc += &c,
                None => {
                    map.insert(m, c);
                }
            }
        }
        Poly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.as_slice() {
            [] => Some(Scalar::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn as_single_term(&self) -> Option<(&Monomial, &Scalar)> {
        match self.terms.as_slice() {
            [(m, c)] => Some((m, c)),
            _ => None,
        }
    }

    /// Largest term in the monomial order.
    pub fn leading(&self) -> Option<&(Monomial, Scalar)> {
        self.terms.last()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match ma.cmp(mb) {
                Ordering::Less => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((mb.clone(), cb.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((ma.clone(), s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        // Multiplication by a fixed monomial preserves the order only among
        // exp-free parts, so rebuild through the sorter.
        Poly::from_terms(self.terms.iter().map(|(t, c)| (t.mul(m), c * s)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut map: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match map.get_mut(&m) {
                    Some(acc) => *acc += &c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        Poly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// `q` with `q^e = self` and leading coefficient 1, for a monic,
    /// exp-free polynomial.
    pub fn root_exact(&self, e: u32) -> Option<Poly> {
        let (lm, lc) = self.leading()?;
        if e < 2 || !lc.is_one() || lm.exp_arg().is_some() {
            return None;
        }
        let ei = e as i32;
        if lm.powers().iter().any(|(_, k)| k % ei != 0) {
            return None;
        }
        let head = Monomial::from_powers(
            lm.powers()
                .iter()
                .map(|(v, k)| (v.clone(), k / ei))
                .collect(),
            None,
        );
        let shift = head.pow(ei - 1).inverse();
        let inv_e = Scalar::from_int(e as i64).recip();
        let mut q = Poly::term(head.clone(), Scalar::one());
        let mut last = head;
        for _ in 0..=self.len() * (e as usize) + 1 {
            let r = self.sub(&q.pow(e));
            let Some((rm, rc)) = r.leading() else {
                return Some(q);
            };
            let t = rm.mul(&shift);
            if t >= last || rm >= lm || t.has_negative_powers() {
                return None;
            }
            q = q.add(&Poly::term(t.clone(), rc * &inv_e));
            last = t;
        }
        None
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn has_exp(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.exp_arg().is_some())
    }

    pub fn has_negative_powers(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.has_negative_powers())
    }

    /// Largest total degree of any term (0 for the zero polynomial).
    pub fn max_degree(&self) -> i64 {
        self.terms
            .iter()
            .map(|(m, _)| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Monomial content: component-wise minimum exponents over all terms,
    /// with the common `exp` factor when every term shares the same one.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.without_exp();
        let mut common_exp = first.exp_arg().cloned();
        for (m, _) in it {
            g = g.gcd_exponents(&m.without_exp());
            if common_exp.as_ref() != m.exp_arg() {
                common_exp = None;
            }
        }
        match common_exp {
            Some(e) => g.mul(&Monomial::exp_of(e)),
            None => g,
        }
    }

    /// Exact division of polynomials without negative powers or `exp`
    /// factors. Returns `None` when `divisor` does not divide `self`.
    pub fn div_exact_plain(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?.clone();
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Scalar)> = Vec::new();
        while let Some((rm, rc)) = rem.leading().cloned() {
            let qm = rm.divide(&lm)?;
            let qc = &rc / &lc;
            rem = rem.sub(&divisor.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly::from_terms(quot))
    }

    /// Exact division where `self` may contain negative powers and `exp`
    /// factors while `divisor` is a plain polynomial without monomial content.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        // Group by exp factor; distinct exp factors are independent.
        let mut groups: BTreeMap<Option<Poly>, Vec<(Monomial, Scalar)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups
                .entry(m.exp_arg().cloned())
                .or_default()
                .push((m.without_exp(), c.clone()));
        }
        let mut out = Poly::zero();
        for (exp, terms) in groups {
            let group = Poly::from_terms(terms);
            let shift = group.monomial_content();
            let shifted = group.mul_term(&shift.inverse(), &Scalar::one());
            let q = shifted.div_exact_plain(divisor)?;
            let mut back = shift;
            if let Some(e) = exp {
                back = back.mul(&Monomial::exp_of(e));
            }
            out = out.add(&q.mul_term(&back, &Scalar::one()));
        }
        Some(out)
    }

    /// Iterates every variable occurring at top level (not inside atoms).
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.powers().iter().map(|(v, _)| v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::v(1)
    }
    fn y() -> Var {
        Var::v(2)
    }

    fn p(terms: &[(&[(Var, i32)], i64)]) -> Poly {
        Poly::from_terms(terms.iter().map(|(pw, c)| {
            (
                Monomial::from_powers(pw.to_vec(), None),
                Scalar::from_int(*c),
            )
        }))
    }

    #[test]
    fn exact_division() {
        // (x^2 - y^2) / (x - y) = x + y
        let a = p(&[(&[(x(), 2)], 1), (&[(y(), 2)], -1)]);
        let d = p(&[(&[(x(), 1)], 1), (&[(y(), 1)], -1)]);
        let q = a.div_exact(&d).unwrap();
        assert_eq!(q, p(&[(&[(x(), 1)], 1), (&[(y(), 1)], 1)]));
        let b = p(&[(&[(x(), 2)], 1), (&[(y(), 2)], 1)]);
        assert!(b.div_exact(&d).is_none());
    }

    #[test]
    fn division_with_negative_powers() {
        // (x - y) * x^-3 divided by (x - y)
        let d = p(&[(&[(x(), 1)], 1), (&[(y(), 1)], -1)]);
        let a = d.mul_term(&Monomial::var(x(), -3), &Scalar::one());
        let q = a.div_exact(&d).unwrap();
        assert_eq!(q, Poly::term(Monomial::var(x(), -3), Scalar::one()));
    }

    #[test]
    fn monomial_order_is_graded() {
        let a = Monomial::from_powers(vec![(x(), 1)], None);
        let b = Monomial::from_powers(vec![(y(), 2)], None);
        assert!(a < b);
        let c = Monomial::from_powers(vec![(x(), 2)], None);
        assert!(b < c);
    }

    #[test]
    fn exact_roots() {
        let base = p(&[(&[(x(), 3)], 1), (&[], -3)]);
        let sq = base.pow(2);
        assert_eq!(sq.root_exact(2), Some(base.clone()));
        assert_eq!(sq.root_exact(3), None);
        assert_eq!(sq.root_exact(6), None);
        let mixed = p(&[(&[(x(), 2)], 1), (&[(y(), 1)], 1)]);
        assert_eq!(mixed.pow(3).root_exact(3), Some(mixed));
    }
}
