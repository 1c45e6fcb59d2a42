//! Frobenius manifolds in flat coordinates: structure data, WDVV and
//! quasi-homogeneity checks, the θ-recursion, and canonical coordinates.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::jetcalc::{self, JetError};
use crate::linalg;
use crate::symcore::{parse, Expr, Field, Monomial, Scalar, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrobError {
    #[error("metric ∂1∂α∂βF is degenerate")]
    DegenerateMetric,
    #[error("metric entry ({0},{1}) is not constant: {2}")]
    NonConstantMetric(usize, usize, String),
    #[error("θ recursion failed: {0}")]
    IntegrabilityFailure(String),
    #[error("multiplication by the Euler field has repeated eigenvalues")]
    NotSemisimple,
    #[error("no closed form: {0}")]
    NoClosedForm(String),
    #[error("invalid manifold data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// User-supplied canonical coordinates and their inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartFixture {
    /// `u^i(v)`; when empty the eigenvalues of `E·` are used.
    pub u_of_v: Vec<Expr>,
    /// `v^α(u)`.
    pub v_of_u: Vec<Expr>,
}

/// Raw manifold data before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldSpec {
    pub name: String,
    pub n: usize,
    pub potential: Expr,
    pub euler: Vec<Expr>,
    pub charge: Scalar,
    pub mu: Vec<Scalar>,
    pub r_shift: Vec<Scalar>,
    /// `r_matrices[k-1][γ][α] = (R_k)^γ_α`.
    pub r_matrices: Vec<Vec<Vec<Scalar>>>,
    pub chart: Option<ChartFixture>,
}

fn exprs(items: &[&str]) -> Vec<Expr> {
    items
        .iter()
        .map(|s| parse(s).expect("built-in expression"))
        .collect()
}

fn scalars(items: &[(i64, i64)]) -> Vec<Scalar> {
    items.iter().map(|&(a, b)| Scalar::new(a, b)).collect()
}

impl ManifoldSpec {
    /// One-dimensional manifold with `F = v³/6`.
    pub fn kdv() -> Self {
        ManifoldSpec {
            name: "kdv".into(),
            n: 1,
            potential: parse("v1^3/6").expect("literal"),
            euler: exprs(&["v1"]),
            charge: Scalar::zero(),
            mu: scalars(&[(0, 1)]),
            r_shift: scalars(&[(0, 1)]),
            r_matrices: Vec::new(),
            chart: None,
        }
    }

    /// Two-dimensional manifold with `F = ½v1²v2 + e^{v2}`.
    pub fn p1() -> Self {
        ManifoldSpec {
            name: "p1".into(),
            n: 2,
            potential: parse("v1^2*v2/2 + exp(v2)").expect("literal"),
            euler: exprs(&["v1", "2"]),
            charge: Scalar::one(),
            mu: scalars(&[(-1, 2), (1, 2)]),
            r_shift: scalars(&[(0, 1), (2, 1)]),
            r_matrices: vec![vec![
                vec![Scalar::zero(), Scalar::zero()],
                vec![Scalar::from_int(2), Scalar::zero()],
            ]],
            chart: Some(ChartFixture {
                u_of_v: Vec::new(),
                v_of_u: exprs(&["(u1 + u2)/2", "2*log((u1 - u2)/4)"]),
            }),
        }
    }

    /// Two-dimensional polynomial manifold with `F = ½v1²v2 + v2⁴/72`.
    pub fn a2() -> Self {
        ManifoldSpec {
            name: "a2".into(),
            n: 2,
            potential: parse("v1^2*v2/2 + v2^4/72").expect("literal"),
            euler: exprs(&["v1", "2/3*v2"]),
            charge: Scalar::new(1, 3),
            mu: scalars(&[(-1, 6), (1, 6)]),
            r_shift: scalars(&[(0, 1), (0, 1)]),
            r_matrices: Vec::new(),
            chart: None,
        }
    }

    /// Three-dimensional potential that violates associativity.
    pub fn corrupted_n3() -> Self {
        ManifoldSpec {
            name: "corrupted-n3".into(),
            n: 3,
            potential: parse("v1^2*v3/2 + v1*v2^2/2 + v2^3*v3").expect("literal"),
            euler: exprs(&["v1", "v2", "v3"]),
            charge: Scalar::zero(),
            mu: scalars(&[(0, 1), (0, 1), (0, 1)]),
            r_shift: scalars(&[(0, 1), (0, 1), (0, 1)]),
            r_matrices: Vec::new(),
            chart: None,
        }
    }
}

/// A validated Frobenius manifold.
#[derive(Debug, Clone)]
pub struct FrobeniusManifold {
    pub spec: ManifoldSpec,
    pub eta: linalg::Matrix,
    pub eta_inv: linalg::Matrix,
    /// `f3[a][b][c] = ∂_a∂_b∂_c F`.
    f3: Vec<Vec<Vec<Expr>>>,
    /// `c[g][a][b] = c^g_{ab}`.
    c: Vec<Vec<Vec<Expr>>>,
}

/// First WDVV violation found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WdvvViolation {
    pub indices: [usize; 4],
    pub residual: String,
}

/// Result of the quasi-homogeneity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub quasi_homogeneous: bool,
    /// Consistency of the Euler components with `d`, `μ` and `r`.
    pub matches_spectrum: bool,
    pub residual: String,
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
    pub c: String,
}

impl EulerReport {
    pub fn ok(&self) -> bool {
        self.quasi_homogeneous && self.matches_spectrum
    }
}

/// `θ_{α,p}` for `α = 1..n`, `p = 0..=p_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaTable {
    /// `theta[α-1][p]`.
    pub theta: Vec<Vec<Expr>>,
    /// `(α, p, β)` where the constant in `∂_βθ_{α,p}` was not fixed by
    /// quasi-homogeneity and was set to zero.
    pub non_unique: Vec<(usize, usize, usize)>,
}

impl ThetaTable {
    pub fn get(&self, alpha: usize, p: usize) -> &Expr {
        &self.theta[alpha - 1][p]
    }

    pub fn p_max(&self) -> usize {
        self.theta.first().map(|t| t.len() - 1).unwrap_or(0)
    }
}

pub fn v_var(alpha: usize) -> Var {
    Var::v(alpha as u32)
}

impl FrobeniusManifold {
    pub fn new(spec: ManifoldSpec) -> Result<Self, FrobError> {
        let n = spec.n;
        if n == 0 {
            return Err(FrobError::InvalidData("dimension must be positive".into()));
        }
        for (what, len) in [
            ("euler", spec.euler.len()),
            ("mu", spec.mu.len()),
            ("r", spec.r_shift.len()),
        ] {
            if len != n {
                return Err(FrobError::InvalidData(format!(
                    "{what} has {len} entries, expected {n}"
                )));
            }
        }
        for (k, r) in spec.r_matrices.iter().enumerate() {
            if r.len() != n || r.iter().any(|row| row.len() != n) {
                return Err(FrobError::InvalidData(format!(
                    "R_{} is not {n}x{n}",
                    k + 1
                )));
            }
        }
        if let Some(v) = spec.potential.free_vars().into_iter().find(
            |v| !matches!(v, Var::Jet { field: Field::V, order: 0, idx } if (*idx as usize) <= n),
        ) {
            return Err(FrobError::InvalidData(format!(
                "potential depends on `{v}`, expected v1..v{n}"
            )));
        }
        let f1: Vec<Expr> = (1..=n).map(|a| spec.potential.partial(&v_var(a))).collect();
        let f2: Vec<Vec<Expr>> = f1
            .iter()
            .map(|fa| (1..=n).map(|b| fa.partial(&v_var(b))).collect())
            .collect();
        let f3: Vec<Vec<Vec<Expr>>> = f2
            .iter()
            .map(|row| {
                row.iter()
                    .map(|fab| (1..=n).map(|c| fab.partial(&v_var(c))).collect())
                    .collect()
            })
            .collect();
        let mut eta = vec![vec![Scalar::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                eta[a][b] = f3[0][a][b].as_scalar().ok_or_else(|| {
                    FrobError::NonConstantMetric(a + 1, b + 1, f3[0][a][b].to_string())
                })?;
            }
        }
        let eta_inv = linalg::invert(&eta).ok_or(FrobError::DegenerateMetric)?;
        let mut c = vec![vec![vec![Expr::zero(); n]; n]; n];
        for (g, cg) in c.iter_mut().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    cg[a][b] = (0..n).map(|l| f3[l][a][b].scale(&eta_inv[g][l])).sum();
                }
            }
        }
        Ok(FrobeniusManifold {
            spec,
            eta,
            eta_inv,
            f3,
            c,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// `c^γ_{αβ}`, 1-based.
    pub fn c(&self, gamma: usize, alpha: usize, beta: usize) -> &Expr {
        &self.c[gamma - 1][alpha - 1][beta - 1]
    }

    /// `c^{αβ}_γ = η^{αλ} c^β_{λγ}`, 1-based.
    pub fn c_upper(&self, alpha: usize, beta: usize, gamma: usize) -> Expr {
        (0..self.n())
            .map(|l| self.c[beta - 1][l][gamma - 1].scale(&self.eta_inv[alpha - 1][l]))
            .sum()
    }

    /// `∂_α∂_β∂_γ F`, 1-based.
    pub fn f3(&self, a: usize, b: usize, c: usize) -> &Expr {
        &self.f3[a - 1][b - 1][c - 1]
    }

    pub fn euler(&self, alpha: usize) -> &Expr {
        &self.spec.euler[alpha - 1]
    }

    pub fn mu(&self, alpha: usize) -> &Scalar {
        &self.spec.mu[alpha - 1]
    }

    /// `(R_k)^γ_α`, zero when `k` exceeds the supplied list.
    pub fn r_entry(&self, k: usize, gamma: usize, alpha: usize) -> Scalar {
        self.spec
            .r_matrices
            .get(k - 1)
            .map(|r| r[gamma - 1][alpha - 1].clone())
            .unwrap_or_else(Scalar::zero)
    }

    /// Applies the Euler vector field to a function of `v`.
    pub fn apply_euler(&self, f: &Expr) -> Expr {
        (1..=self.n())
            .map(|a| self.euler(a).mul(&f.partial(&v_var(a))))
            .sum()
    }

    /// Whether `c(∂_1, X) = X`.
    pub fn unit_ok(&self) -> bool {
        let n = self.n();
        (1..=n).all(|g| {
            (1..=n).all(|b| {
                let want = if g == b { Expr::one() } else { Expr::zero() };
                self.c(g, 1, b).sub(&want).is_zero()
            })
        })
    }

    /// WDVV residual for one index quadruple, 1-based.
    pub fn wdvv_residual(&self, a: usize, b: usize, g: usize, d: usize) -> Expr {
        let n = self.n();
        let mut lhs = Expr::zero();
        let mut rhs = Expr::zero();
        for l in 1..=n {
            for m in 1..=n {
                let e = &self.eta_inv[l - 1][m - 1];
                if e.is_zero() {
                    continue;
                }
                lhs = lhs.add(&self.f3(a, b, l).mul(self.f3(m, g, d)).scale(e));
                rhs = rhs.add(&self.f3(d, b, l).mul(self.f3(m, g, a)).scale(e));
            }
        }
        lhs.sub(&rhs)
    }

    /// Checks associativity for every index combination, returning the
    /// lexicographically first violation.
    pub fn check_wdvv(&self) -> Result<(), WdvvViolation> {
        let n = self.n();
        for a in 1..=n {
            for b in 1..=n {
                for g in 1..=n {
                    for d in 1..=n {
                        let r = self.wdvv_residual(a, b, g, d);
                        if !r.is_zero() {
                            return Err(WdvvViolation {
                                indices: [a, b, g, d],
                                residual: r.to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks `E(F) − (3−d)F` is a quadratic polynomial with constant
    /// coefficients and extracts it.
    pub fn check_euler(&self) -> EulerReport {
        let n = self.n();
        let three_minus_d = &Scalar::from_int(3) - &self.spec.charge;
        let residual = self
            .apply_euler(&self.spec.potential)
            .sub(&self.spec.potential.scale(&three_minus_d));
        let quadratic = residual.den().is_empty()
            && !residual.has_exp()
            && !residual.has_log()
            && residual.num().terms().iter().all(|(m, _)| {
                m.total_degree() <= 2
                    && m.powers().iter().all(|(v, e)| {
                        *e > 0
                            && matches!(
                                v,
                                Var::Jet {
                                    field: Field::V,
                                    order: 0,
                                    ..
                                }
                            )
                    })
            });
        let zero_point = |e: &Expr| -> Expr {
            e.substitute(&|v: &Var| match v {
                Var::Jet {
                    field: Field::V,
                    order: 0,
                    ..
                } => Some(Expr::zero()),
                _ => None,
            })
            .unwrap_or_else(|_| e.clone())
        };
        let (a, b, c) = if quadratic {
            let a = (1..=n)
                .map(|i| {
                    (1..=n)
                        .map(|j| residual.partial(&v_var(i)).partial(&v_var(j)).to_string())
                        .collect()
                })
                .collect();
            let b = (1..=n)
                .map(|i| zero_point(&residual.partial(&v_var(i))).to_string())
                .collect();
            (a, b, zero_point(&residual).to_string())
        } else {
            (Vec::new(), Vec::new(), String::new())
        };
        let half_d = &self.spec.charge * &Scalar::new(1, 2);
        let matches_spectrum = (1..=n).all(|al| {
            let coeff = &(&Scalar::one() - &half_d) - self.mu(al);
            let expected = Expr::v(al as u32)
                .scale(&coeff)
                .add(&Expr::constant(self.spec.r_shift[al - 1].clone()));
            self.euler(al).sub(&expected).is_zero()
        });
        EulerReport {
            quasi_homogeneous: quadratic,
            matches_spectrum,
            residual: residual.to_string(),
            a,
            b,
            c,
        }
    }

    fn integrability(e: JetError) -> FrobError {
        FrobError::IntegrabilityFailure(e.to_string())
    }

    /// Builds `θ_{α,p}` for `p ≤ p_max` from the recursion, fixing the
    /// affine freedom by `∂_1θ_{α,p+1} = θ_{α,p}`, quasi-homogeneity and a
    /// zero constant term.
    pub fn theta(&self, p_max: usize) -> Result<ThetaTable, FrobError> {
        let n = self.n();
        let mut theta: Vec<Vec<Expr>> = (0..n)
            .map(|a| {
                vec![(0..n)
                    .map(|b| Expr::v(b as u32 + 1).scale(&self.eta[a][b]))
                    .sum::<Expr>()]
            })
            .collect();
        let mut non_unique = Vec::new();
        for p in 0..p_max {
            let mut next = Vec::with_capacity(n);
            for al in 1..=n {
                let dtheta: Vec<Expr> = (1..=n)
                    .map(|l| theta[al - 1][p].partial(&v_var(l)))
                    .collect();
                let mut grad = Vec::with_capacity(n);
                for be in 1..=n {
                    let g: Vec<(Var, Expr)> = (1..=n)
                        .map(|ga| {
                            let comp = (1..=n).map(|l| self.c(l, be, ga).mul(&dtheta[l - 1])).sum();
                            (v_var(ga), comp)
                        })
                        .collect();
                    let phi0 = jetcalc::potential(&g).map_err(Self::integrability)?;
                    let shift = if be == 1 {
                        theta[al - 1][p].sub(&phi0)
                    } else {
                        let weight = &(&Scalar::from_int(p as i64 + 1) + self.mu(al)) + self.mu(be);
                        let mut rhs = self.apply_euler(&phi0).sub(&phi0.scale(&weight));
                        for k in 1..=p + 1 {
                            for ga in 1..=n {
                                let r = self.r_entry(k, ga, al);
                                if !r.is_zero() {
                                    let d = theta[ga - 1][p + 1 - k].partial(&v_var(be));
                                    rhs = rhs.sub(&d.scale(&r));
                                }
                            }
                        }
                        if weight.is_zero() {
                            if !rhs.is_zero() {
                                return Err(FrobError::IntegrabilityFailure(format!(
                                    "quasi-homogeneity fails for ∂{be}θ({al},{})",
                                    p + 1
                                )));
                            }
                            non_unique.push((al, p + 1, be));
                            Expr::zero()
                        } else {
                            rhs.scale(&weight.recip())
                        }
                    };
                    if !shift.is_constant() && !shift.is_zero() {
                        return Err(FrobError::IntegrabilityFailure(format!(
                            "constant of ∂{be}θ({al},{}) depends on v: {shift}",
                            p + 1
                        )));
                    }
                    grad.push((v_var(be), phi0.add(&shift)));
                }
                let th = jetcalc::potential(&grad).map_err(Self::integrability)?;
                next.push(th);
            }
            for (al, th) in next.into_iter().enumerate() {
                theta[al].push(th);
            }
        }
        Ok(ThetaTable { theta, non_unique })
    }

    /// Residual of `∂_β∂_γθ_{α,p+1} − c^λ_{βγ}∂_λθ_{α,p}`.
    pub fn theta_recursion_residual(
        &self,
        t: &ThetaTable,
        alpha: usize,
        p: usize,
        beta: usize,
        gamma: usize,
    ) -> Expr {
        let lhs = t
            .get(alpha, p + 1)
            .partial(&v_var(beta))
            .partial(&v_var(gamma));
        let rhs: Expr = (1..=self.n())
            .map(|l| {
                self.c(l, beta, gamma)
                    .mul(&t.get(alpha, p).partial(&v_var(l)))
            })
            .sum();
        lhs.sub(&rhs)
    }

    /// Residual of the quasi-homogeneity identity for `∂_βθ_{α,p}`.
    pub fn theta_homogeneity_residual(
        &self,
        t: &ThetaTable,
        alpha: usize,
        p: usize,
        beta: usize,
    ) -> Expr {
        let d = t.get(alpha, p).partial(&v_var(beta));
        let weight = &(&Scalar::from_int(p as i64) + self.mu(alpha)) + self.mu(beta);
        let mut r = self.apply_euler(&d).sub(&d.scale(&weight));
        for k in 1..=p {
            for g in 1..=self.n() {
                let rk = self.r_entry(k, g, alpha);
                if !rk.is_zero() {
                    r = r.sub(&t.get(g, p - k).partial(&v_var(beta)).scale(&rk));
                }
            }
        }
        r
    }

    /// Matrix of multiplication by the Euler field, `U^α_β = E^ε c^α_{εβ}`.
    pub fn euler_multiplication(&self) -> Vec<Vec<Expr>> {
        let n = self.n();
        (1..=n)
            .map(|a| {
                (1..=n)
                    .map(|b| (1..=n).map(|e| self.euler(e).mul(self.c(a, e, b))).sum())
                    .collect()
            })
            .collect()
    }

    /// Canonical coordinates as functions of `v`: the eigenvalues of `E·`
    /// in closed form, or the fixture.
    pub fn canonical_coordinates(&self) -> Result<Vec<Expr>, FrobError> {
        if let Some(fx) = &self.spec.chart {
            if !fx.u_of_v.is_empty() {
                return Ok(fx.u_of_v.clone());
            }
        }
        let u = self.euler_multiplication();
        match self.n() {
            1 => Ok(vec![u[0][0].clone()]),
            2 => {
                let tr = u[0][0].add(&u[1][1]);
                let det = u[0][0].mul(&u[1][1]).sub(&u[0][1].mul(&u[1][0]));
                let disc = tr.mul(&tr).sub(&det.scale(&Scalar::from_int(4)));
                if disc.is_zero() {
                    return Err(FrobError::NotSemisimple);
                }
                let s = disc.sqrt_exact().ok_or_else(|| {
                    FrobError::NoClosedForm(format!("square root of discriminant {disc}"))
                })?;
                let half = Scalar::new(1, 2);
                Ok(vec![tr.add(&s).scale(&half), tr.sub(&s).scale(&half)])
            }
            n => Err(FrobError::NoClosedForm(format!(
                "eigenvalues of a {n}x{n} operator require a chart fixture"
            ))),
        }
    }

    /// Canonical chart with metric coefficients and rotation data.
    pub fn canonical_chart(&self) -> Result<CanonicalChart, FrobError> {
        let n = self.n();
        let u_of_v = self.canonical_coordinates()?;
        let v_of_u = match &self.spec.chart {
            Some(fx) if !fx.v_of_u.is_empty() => fx.v_of_u.clone(),
            _ if n == 1 => {
                // u = a v + b with constant a, b.
                let a = u_of_v[0].partial(&v_var(1));
                let b = u_of_v[0].subs(&v_var(1), &Expr::zero())?;
                if a.is_zero() || !a.is_constant() {
                    return Err(FrobError::NoClosedForm(format!(
                        "inverse of u1 = {}",
                        u_of_v[0]
                    )));
                }
                vec![Expr::u(1).sub(&b).checked_div(&a)?]
            }
            _ => {
                return Err(FrobError::NoClosedForm(
                    "inverse map v(u) must be supplied as a chart fixture".into(),
                ))
            }
        };
        if v_of_u.len() != n || u_of_v.len() != n {
            return Err(FrobError::InvalidData(
                "chart fixture has wrong length".into(),
            ));
        }
        CanonicalChart::build(self, u_of_v, v_of_u)
    }
}

/// Substitutes base flat coordinates.
pub fn subs_v(e: &Expr, v_of_u: &[Expr]) -> Result<Expr, SymError> {
    e.substitute(&|v: &Var| match v {
        Var::Jet {
            field: Field::V,
            idx,
            order: 0,
        } => v_of_u.get(*idx as usize - 1).cloned(),
        _ => None,
    })
}

/// Substitutes base canonical coordinates.
pub fn subs_u(e: &Expr, u_of_v: &[Expr]) -> Result<Expr, SymError> {
    e.substitute(&|v: &Var| match v {
        Var::Jet {
            field: Field::U,
            idx,
            order: 0,
        } => u_of_v.get(*idx as usize - 1).cloned(),
        _ => None,
    })
}

fn u_var(i: usize) -> Var {
    Var::u(i as u32)
}

/// Determinant by cofactor expansion (small matrices only).
pub fn expr_determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][j].mul(&expr_determinant(&minor));
                acc = if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        }
    }
}

/// Direction of a chart change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartDirection {
    FlatToCanonical,
    CanonicalToFlat,
}

/// Canonical coordinates and the associated metric data, all as
/// functions of `u` unless stated otherwise.
///
/// The Lamé coefficients `ψ_{i1} = √f_i` are never formed; the consumers
/// only need `(ψ_j/ψ_i) γ_ij = ∂_i f_j / (2 f_i)` and `γ_ij²`.
#[derive(Debug, Clone)]
pub struct CanonicalChart {
    pub n: usize,
    pub u_of_v: Vec<Expr>,
    pub v_of_u: Vec<Expr>,
    /// `dv_du[α][i] = ∂v^α/∂u^i`.
    pub dv_du: Vec<Vec<Expr>>,
    /// `du_dv[i][α] = ∂u^i/∂v^α` as functions of `v`.
    pub du_dv: Vec<Vec<Expr>>,
    pub f: Vec<Expr>,
    /// `rot[i][j] = (ψ_j/ψ_i) γ_ij` for `i ≠ j`, zero on the diagonal.
    pub rot: Vec<Vec<Expr>>,
    /// `gamma_sq[i][j] = γ_ij²`.
    pub gamma_sq: Vec<Vec<Expr>>,
    pub jacobian: Expr,
    pub idempotency_ok: bool,
    pub eta_diagonal_ok: bool,
}

impl CanonicalChart {
    fn build(
        m: &FrobeniusManifold,
        u_of_v: Vec<Expr>,
        v_of_u: Vec<Expr>,
    ) -> Result<Self, FrobError> {
        let n = m.n();
        for (i, ui) in u_of_v.iter().enumerate() {
            let back = subs_v(ui, &v_of_u)?;
            if !back.sub(&Expr::u(i as u32 + 1)).is_zero() {
                return Err(FrobError::InvalidData(format!(
                    "chart fixture does not invert u{}: got {back}",
                    i + 1
                )));
            }
        }
        let dv_du: Vec<Vec<Expr>> = v_of_u
            .iter()
            .map(|va| (1..=n).map(|i| va.partial(&u_var(i))).collect())
            .collect();
        let du_dv: Vec<Vec<Expr>> = u_of_v
            .iter()
            .map(|ui| (1..=n).map(|a| ui.partial(&v_var(a))).collect())
            .collect();
        let metric = |i: usize, j: usize| -> Expr {
            let mut acc = Expr::zero();
            for a in 0..n {
                for b in 0..n {
                    if !m.eta[a][b].is_zero() {
                        acc = acc.add(&dv_du[a][i].mul(&dv_du[b][j]).scale(&m.eta[a][b]));
                    }
                }
            }
            acc
        };
        let f: Vec<Expr> = (0..n).map(|i| metric(i, i)).collect();
        if f.iter().any(Expr::is_zero) {
            return Err(FrobError::NotSemisimple);
        }
        let eta_diagonal_ok = (0..n).all(|i| (0..n).all(|j| i == j || metric(i, j).is_zero()));
        let mut c_u = vec![vec![vec![Expr::zero(); n]; n]; n];
        for g in 0..n {
            for a in 0..n {
                for b in 0..n {
                    c_u[g][a][b] = subs_v(&m.c[g][a][b], &v_of_u)?;
                }
            }
        }
        let mut idempotency_ok = true;
        'outer: for i in 0..n {
            for j in 0..n {
                for g in 0..n {
                    let mut prod = Expr::zero();
                    for a in 0..n {
                        for b in 0..n {
                            if c_u[g][a][b].is_zero() {
                                continue;
                            }
                            prod = prod.add(&c_u[g][a][b].mul(&dv_du[a][i]).mul(&dv_du[b][j]));
                        }
                    }
                    if i == j {
                        prod = prod.sub(&dv_du[g][i]);
                    }
                    if !prod.is_zero() {
                        idempotency_ok = false;
                        break 'outer;
                    }
                }
            }
        }
        let mut rot = vec![vec![Expr::zero(); n]; n];
        let mut gamma_sq = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = f[j].partial(&u_var(i + 1));
                rot[i][j] = d.checked_div(&f[i].scale(&Scalar::from_int(2)))?;
                gamma_sq[i][j] = d
                    .mul(&d)
                    .checked_div(&f[i].mul(&f[j]).scale(&Scalar::from_int(4)))?;
            }
        }
        let jacobian = expr_determinant(&dv_du);
        Ok(CanonicalChart {
            n,
            u_of_v,
            v_of_u,
            dv_du,
            du_dv,
            f,
            rot,
            gamma_sq,
            jacobian,
            idempotency_ok,
            eta_diagonal_ok,
        })
    }

    /// `γ_ij = 0` exactly when `∂_i f_j = 0`.
    pub fn gamma_vanishes(&self, i: usize, j: usize) -> bool {
        self.gamma_sq[i - 1][j - 1].is_zero()
    }

    /// `γ_ij = γ_ji` up to the sign convention of the Lamé coefficients.
    pub fn egorov_ok(&self) -> bool {
        (0..self.n)
            .all(|i| (0..self.n).all(|j| self.gamma_sq[i][j].sub(&self.gamma_sq[j][i]).is_zero()))
    }

    /// Whether the graph with edges `{i, j : γ_ij ≠ 0}` is connected.
    pub fn is_irreducible(&self) -> Result<bool, FrobError> {
        if self.n < 2 {
            return Err(FrobError::InvalidData(
                "irreducibility is defined for n >= 2".into(),
            ));
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.n {
                if !seen[j]
                    && !(self.gamma_vanishes(i + 1, j + 1) && self.gamma_vanishes(j + 1, i + 1))
                {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        Ok(seen.into_iter().all(|s| s))
    }

    /// Rewrites a jet expression in the other chart, prolonging the point
    /// transformation to jets.
    pub fn change_chart(&self, e: &Expr, dir: ChartDirection) -> Result<Expr, FrobError> {
        let (from, images) = match dir {
            ChartDirection::FlatToCanonical => (Field::V, &self.v_of_u),
            ChartDirection::CanonicalToFlat => (Field::U, &self.u_of_v),
        };
        let mut table: BTreeMap<Var, Expr> = BTreeMap::new();
        for v in e.jet_vars() {
            if let Var::Jet { field, idx, order } = v {
                if field != from {
                    continue;
                }
                let base = images
                    .get(idx as usize - 1)
                    .ok_or_else(|| FrobError::InvalidData(format!("index {idx} out of range")))?;
                table.insert(v.clone(), jetcalc::dx_n(base, order));
            }
        }
        Ok(e.substitute(&|v: &Var| table.get(v).cloned())?)
    }
}

/// Monomial helper for callers building coefficient keys.
pub fn monomial_of(v: Var, e: i32) -> Monomial {
    Monomial::var(v, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn kdv_structure() {
        let m = FrobeniusManifold::new(ManifoldSpec::kdv()).unwrap();
        assert!(m.check_wdvv().is_ok());
        assert!(m.check_euler().ok());
        assert!(m.unit_ok());
        let t = m.theta(3).unwrap();
        assert_eq!(t.get(1, 1), &p("v1^2/2"));
        assert_eq!(t.get(1, 2), &p("v1^3/6"));
        let chart = m.canonical_chart().unwrap();
        assert_eq!(chart.f[0], Expr::one());
        assert_eq!(chart.jacobian, Expr::one());
    }

    #[test]
    fn p1_structure() {
        let m = FrobeniusManifold::new(ManifoldSpec::p1()).unwrap();
        assert!(m.check_wdvv().is_ok());
        let rep = m.check_euler();
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.a[0][0], "2");
        let t = m.theta(3).unwrap();
        assert_eq!(t.get(2, 1), &p("v1^2/2 + exp(v2)"));
        assert_eq!(t.get(1, 1), &p("v1*v2"));
        for al in 1..=2 {
            for q in 0..3 {
                for be in 1..=2 {
                    assert!(m.theta_homogeneity_residual(&t, al, q, be).is_zero());
                    for ga in 1..=2 {
                        assert!(m.theta_recursion_residual(&t, al, q, be, ga).is_zero());
                    }
                }
            }
        }
        let u = m.canonical_coordinates().unwrap();
        assert_eq!(u[0], p("v1 + 2*exp(v2/2)"));
        let chart = m.canonical_chart().unwrap();
        assert!(chart.idempotency_ok && chart.eta_diagonal_ok);
        assert_eq!(chart.f[0], p("2/(u1 - u2)"));
        assert_eq!(chart.jacobian, p("-2/(u1 - u2)"));
        assert!(chart.egorov_ok());
        assert!(chart.is_irreducible().unwrap());
        let u1x = chart
            .change_chart(&p("u1_1"), ChartDirection::CanonicalToFlat)
            .unwrap();
        assert_eq!(u1x, p("v1_1 + exp(v2/2)*v2_1"));
    }

    #[test]
    fn a2_has_no_closed_chart() {
        let m = FrobeniusManifold::new(ManifoldSpec::a2()).unwrap();
        assert!(m.check_wdvv().is_ok());
        assert!(m.check_euler().ok());
        assert!(matches!(
            m.canonical_coordinates(),
            Err(FrobError::NoClosedForm(_))
        ));
    }

    #[test]
    fn corrupted_potential_violates_wdvv() {
        let m = FrobeniusManifold::new(ManifoldSpec::corrupted_n3()).unwrap();
        assert!(m.check_wdvv().is_err());
        assert!(m.wdvv_residual(2, 2, 2, 3).is_zero());
        assert_eq!(m.wdvv_residual(2, 2, 3, 3), p("-36*v2^2"));
    }
}
