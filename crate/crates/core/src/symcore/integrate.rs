//! Antiderivatives with respect to a single variable.
//!
//! Supported integrands, with every other variable held constant:
//! Laurent monomials `z^k`, `z^k log(z)^m`, `z^k exp(a z + b)` with `k >= 0`,
//! and quotients `P(z) / L^e` where `L` is the only denominator factor
//! depending on `z` and is linear in `z`.

use super::expr::Expr;
use super::poly::{Monomial, Poly};
use super::scalar::Scalar;
use super::var::Var;
use super::SymError;

fn unsupported(e: &Expr, z: &Var) -> SymError {
    SymError::Unintegrable(format!("{e} d{z}"))
}

fn log_atom(z: &Var) -> Var {
    Var::Log(Box::new(Expr::var(z.clone())))
}

/// Splits `p` as `Σ z^k c_k(other vars)`; fails if `z` hides inside an atom.
fn coefficients_in(p: &Poly, z: &Var) -> Option<Vec<(i32, Poly)>> {
    let mut out: std::collections::BTreeMap<i32, Vec<(Monomial, Scalar)>> = Default::default();
    for (m, c) in p.terms() {
        if m.exp_arg()
            .is_some_and(|a| Expr::from_poly(a.clone()).contains_var(z))
        {
            return None;
        }
        let (k, rest) = m.split_var(z);
        if rest
            .powers()
            .iter()
            .any(|(v, _)| matches!(v, Var::Log(a) if a.contains_var(z)))
        {
            return None;
        }
        out.entry(k).or_default().push((rest, c.clone()));
    }
    Some(
        out.into_iter()
            .map(|(k, ts)| (k, Poly::from_terms(ts)))
            .collect(),
    )
}

/// `∫ z^k log(z)^m dz` for `k` and `m >= 0`.
fn power_log(k: i32, m: i32, z: &Var) -> Expr {
    let zl = Expr::var(z.clone());
    let lg = Expr::var(log_atom(z));
    if k == -1 {
        return lg
            .pow(m + 1)
            .expect("positive power")
            .scale(&Scalar::new(1, (m + 1) as i64));
    }
    let kp1 = Scalar::from_int((k + 1) as i64);
    let lead = zl
        .pow(k + 1)
        .expect("monomial power")
        .mul(&lg.pow(m).expect("positive power"))
        .scale(&kp1.recip());
    if m == 0 {
        return lead;
    }
    let rest = power_log(k, m - 1, z).scale(&(&Scalar::from_int(m as i64) / &kp1));
    lead.sub(&rest)
}

/// `∫ z^k exp(a z) dz` for `k >= 0`, `a` free of `z`, without the `exp` factor
/// itself (the caller multiplies it back in).
fn power_exp(k: i32, a: &Expr, z: &Var) -> Result<Expr, SymError> {
    let zl = Expr::var(z.clone());
    let mut out = Expr::zero();
    let mut fall = Scalar::one();
    for j in 0..=k {
        let sign = if j % 2 == 0 {
            Scalar::one()
        } else {
            -Scalar::one()
        };
        let term = zl
            .pow(k - j)?
            .mul(&a.pow(-(j + 1))?)
            .scale(&(&sign * &fall));
        out = out.add(&term);
        fall = &fall * &Scalar::from_int((k - j) as i64);
    }
    Ok(out)
}

fn integrate_term(m: &Monomial, c: &Scalar, z: &Var) -> Result<Expr, SymError> {
    let term = Expr::from_monomial(m.clone(), c.clone());
    let (k, rest) = m.split_var(z);
    let (logm, rest) = rest.split_var(&log_atom(z));
    if rest
        .powers()
        .iter()
        .any(|(v, _)| matches!(v, Var::Log(a) if a.contains_var(z)))
    {
        return Err(unsupported(&term, z));
    }
    let coeff = Expr::from_monomial(rest.without_exp(), c.clone());
    match rest.exp_arg() {
        Some(arg) if Expr::from_poly(arg.clone()).contains_var(z) => {
            if logm != 0 || k < 0 {
                return Err(unsupported(&term, z));
            }
            let coeffs = coefficients_in(arg, z).ok_or_else(|| unsupported(&term, z))?;
            if coeffs.iter().any(|(j, _)| *j != 0 && *j != 1) {
                return Err(unsupported(&term, z));
            }
            let a = coeffs
                .iter()
                .find(|(j, _)| *j == 1)
                .map(|(_, p)| Expr::from_poly(p.clone()))
                .unwrap_or_default();
            let expf = Expr::from_monomial(Monomial::exp_of(arg.clone()), Scalar::one());
            Ok(power_exp(k, &a, z)?.mul(&expf).mul(&coeff))
        }
        other => {
            if logm < 0 {
                return Err(unsupported(&term, z));
            }
            let expf = match other {
                Some(a) => Expr::from_monomial(Monomial::exp_of(a.clone()), Scalar::one()),
                None => Expr::one(),
            };
            Ok(power_log(k, logm, z).mul(&coeff).mul(&expf))
        }
    }
}

/// `∫ P(z) / L^e dz` with `L = a z + b` linear in `z`.
fn integrate_over_linear(
    num: &Poly,
    factor: &Poly,
    e: u32,
    z: &Var,
    whole: &Expr,
) -> Result<Expr, SymError> {
    let lcoeffs = coefficients_in(factor, z).ok_or_else(|| unsupported(whole, z))?;
    if lcoeffs.iter().any(|(j, _)| *j != 0 && *j != 1) {
        return Err(unsupported(whole, z));
    }
    let pick = |j: i32| {
        lcoeffs
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, p)| Expr::from_poly(p.clone()))
            .unwrap_or_default()
    };
    let (a, b) = (pick(1), pick(0));
    let ncoeffs = coefficients_in(num, z).ok_or_else(|| unsupported(whole, z))?;
    if ncoeffs.iter().any(|(j, _)| *j < 0) {
        return Err(unsupported(whole, z));
    }
    let z0 = b.neg().checked_div(&a)?;
    let l = Expr::from_poly(factor.clone());
    let mut deriv = Expr::from_poly(num.clone());
    let mut out = Expr::zero();
    let mut k: i32 = 0;
    let mut kfact = Scalar::one();
    while !deriv.is_zero() {
        // Coefficient of L^k in the Taylor expansion about z0.
        let ck = deriv
            .subs(z, &z0)?
            .checked_div(&a.pow(k)?)?
            .scale(&kfact.recip());
        let p = k - e as i32;
        let piece = if p == -1 {
            let lg = l.log()?;
            lg.mul(&ck).checked_div(&a)?
        } else {
            l.pow(p + 1)?
                .mul(&ck)
                .checked_div(&a.scale(&Scalar::from_int((p + 1) as i64)))?
        };
        out = out.add(&piece);
        deriv = deriv.partial(z);
        k += 1;
        kfact = &kfact * &Scalar::from_int(k as i64);
    }
    Ok(out)
}

impl Expr {
    /// An antiderivative with respect to `z`, holding every other variable
    /// fixed. No constant of integration is added.
    pub fn integrate(&self, z: &Var) -> Result<Expr, SymError> {
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let dependent: Vec<usize> = self
            .den()
            .iter()
            .enumerate()
            .filter(|(_, (f, _))| Expr::from_poly(f.clone()).contains_var(z))
            .map(|(i, _)| i)
            .collect();
        match dependent.as_slice() {
            [] => {
                let free_den = Expr::from_factors(self.den().to_vec());
                let mut out = Expr::zero();
                for (m, c) in self.num().terms() {
                    out = out.add(&integrate_term(m, c, z)?);
                }
                Ok(out.mul(&free_den))
            }
            [i] => {
                let (f, e) = &self.den()[*i];
                let others: Vec<(Poly, u32)> = self
                    .den()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j != i)
                    .map(|(_, d)| d.clone())
                    .collect();
                let rest = Expr::from_factors(others);
                Ok(integrate_over_linear(self.num(), f, *e, z, self)?.mul(&rest))
            }
            _ => Err(unsupported(self, z)),
        }
    }
}
