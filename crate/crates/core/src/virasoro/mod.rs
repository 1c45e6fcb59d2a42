//! Virasoro symmetries of the tau-cover and the genus-one loop equation.
//!
//! The coefficient tables `a`, `b`, `c` are data. Genus-zero flows act on
//! `F_0` through the one-point functions `f_{α,p} = ∂F_0/∂t^{α,p}` (printed
//! `f<α>_<p>`) and the times `t^{α,p}` (printed `t<α>_<p>`).

mod dlambda;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use dlambda::{
    build_dlambda, c_constant, expand_at_infinity, leading_action, linearization_step, pole_order,
    pole_profile, regular_at_infinity, top_pole_coefficient, DLambdaOp, LeadingAction,
    LinearSolution, PeriodFixture, PoleData, PoleProfile,
};

use crate::frobman::{
    v_var, CanonicalChart, ChartDirection, FrobError, FrobeniusManifold, ThetaTable,
};
use crate::hierarchy::{self, FlowTable, HierarchyError, Label};
use crate::jetcalc::{dx_n, JetError};
use crate::symcore::{Expr, Field, Scalar, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VirError {
    #[error("B({i},{r}) is required but not supplied")]
    JetOrderExceedsFixture { i: usize, r: u32 },
    #[error("not a rational function of lambda with linear poles: {0}")]
    NotRationalInLambda(String),
    #[error("time window too small: {0}")]
    WindowTooSmall(String),
    #[error("fixture inconsistent: {0}")]
    FixtureMismatch(String),
    #[error("no solution in the ansatz space")]
    NoSolutionInAnsatz,
    #[error("solution is not a differential polynomial: {0}")]
    NoPolynomialSolution(String),
    #[error("wrong chart: {0}")]
    WrongChart(String),
    #[error("action on the tau-cover still depends on times: {0}")]
    TimeDependent(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Frob(#[from] FrobError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// `(m, (α,p), (β,q))`.
pub type CoeffKey = (i32, Label, Label);

/// Coefficient tables of `L_m`, `−1 ≤ m ≤ m_max`, on times up to `levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirasoroCoeffs {
    pub n: usize,
    pub m_max: i32,
    /// Highest time level whose entries are present.
    pub levels: usize,
    /// `a_m^{α,p;β,q}`, stored for both orders of the pair.
    pub a: BTreeMap<CoeffKey, Scalar>,
    /// `b_{m;α,p}^{β,q}`, keyed by the lower label first.
    pub b: BTreeMap<CoeffKey, Scalar>,
    /// `c_{m;α,p;β,q}`, stored for both orders of the pair.
    pub c: BTreeMap<CoeffKey, Scalar>,
    /// Constant term of `L_0`.
    pub constant: Scalar,
}

fn t_var(l: Label) -> Var {
    Var::Time {
        idx: l.0 as u32,
        level: l.1 as u32,
    }
}

fn f_var(l: Label) -> Var {
    Var::OnePoint {
        idx: l.0 as u32,
        level: l.1 as u32,
    }
}

fn t_of(l: Label) -> Expr {
    Expr::var(t_var(l))
}

fn f_of(l: Label) -> Expr {
    Expr::var(f_var(l))
}

impl VirasoroCoeffs {
    /// The one-component tables with dilaton-shifted times.
    pub fn kdv(m_max: i32, levels: usize) -> Self {
        let df = |k: i64| Scalar::double_factorial(k);
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        let mut c = BTreeMap::new();
        for m in -1..=m_max {
            let two_m1 = Scalar::from_int(2).pow(-(m + 1));
            for p in 0..=levels as i64 {
                let q = p + m as i64;
                if q < 0 {
                    continue;
                }
                let v = &(&df(2 * q + 1) / &df(2 * p - 1)) * &two_m1;
                b.insert((m, (1, p as usize), (1, q as usize)), v);
            }
            for p in 0..m as i64 {
                let q = m as i64 - 1 - p;
                let v = &(&df(2 * p + 1) * &df(2 * q + 1)) * &Scalar::from_int(2).pow(-(m + 2));
                a.insert((m, (1, p as usize), (1, q as usize)), v);
            }
        }
        c.insert((-1, (1, 0), (1, 0)), Scalar::new(1, 2));
        VirasoroCoeffs {
            n: 1,
            m_max,
            levels,
            a,
            b,
            c,
            constant: Scalar::new(1, 16),
        }
    }

    /// `(1/4) tr(1/4 − μ²)`.
    pub fn constant_from_spectrum(mu: &[Scalar]) -> Scalar {
        let quarter = Scalar::new(1, 4);
        let tr = mu
            .iter()
            .fold(Scalar::zero(), |acc, m| &acc + &(&quarter - &(m * m)));
        &tr * &quarter
    }

    fn check_window(&self, m: i32, window: usize) -> Result<(), VirError> {
        if m < -1 || m > self.m_max {
            return Err(VirError::WindowTooSmall(format!(
                "m = {m} outside -1..={}",
                self.m_max
            )));
        }
        if window > self.levels {
            return Err(VirError::WindowTooSmall(format!(
                "window {window} exceeds fixture levels {}",
                self.levels
            )));
        }
        Ok(())
    }

    fn entries(
        map: &BTreeMap<CoeffKey, Scalar>,
        m: i32,
    ) -> impl Iterator<Item = (Label, Label, &Scalar)> {
        map.range((m, (0, 0), (0, 0))..=(m, (usize::MAX, usize::MAX), (usize::MAX, usize::MAX)))
            .map(|((_, x, y), v)| (*x, *y, v))
    }

    fn a_entries(&self, m: i32) -> impl Iterator<Item = (Label, Label, &Scalar)> {
        Self::entries(&self.a, m)
    }

    fn b_entries(&self, m: i32, window: usize) -> impl Iterator<Item = (Label, Label, &Scalar)> {
        Self::entries(&self.b, m).filter(move |(x, _, _)| x.1 <= window)
    }

    fn c_entries(&self, m: i32, window: usize) -> impl Iterator<Item = (Label, Label, &Scalar)> {
        Self::entries(&self.c, m).filter(move |(x, y, _)| x.1 <= window && y.1 <= window)
    }

    /// Scales every table (and the constant) by `s`.
    pub fn scaled(&self, s: &Scalar) -> Self {
        let sc = |m: &BTreeMap<CoeffKey, Scalar>| -> BTreeMap<CoeffKey, Scalar> {
            m.iter().map(|(k, v)| (*k, v * s)).collect()
        };
        VirasoroCoeffs {
            a: sc(&self.a),
            b: sc(&self.b),
            c: sc(&self.c),
            constant: &self.constant * s,
            ..self.clone()
        }
    }
}

/// `∂F_0/∂s_m = a f f + b t f + c t t` with times restricted to the window.
pub fn genus0_hamiltonian(v: &VirasoroCoeffs, m: i32, window: usize) -> Result<Expr, VirError> {
    v.check_window(m, window)?;
    let mut out = Expr::zero();
    for (x, y, s) in v.a_entries(m) {
        out = out.add(&f_of(x).mul(&f_of(y)).scale(s));
    }
    for (x, y, s) in v.b_entries(m, window) {
        out = out.add(&t_of(x).mul(&f_of(y)).scale(s));
    }
    for (x, y, s) in v.c_entries(m, window) {
        out = out.add(&t_of(x).mul(&t_of(y)).scale(s));
    }
    Ok(out)
}

fn vars_of(e: &Expr, pick: impl Fn(&Var) -> bool) -> Vec<Var> {
    e.free_vars().into_iter().filter(|v| pick(v)).collect()
}

fn is_f(v: &Var) -> bool {
    matches!(v, Var::OnePoint { .. })
}

fn label_of(v: &Var) -> Label {
    match v {
        Var::OnePoint { idx, level } | Var::Time { idx, level } => (*idx as usize, *level as usize),
        _ => unreachable!("not a time or one-point variable"),
    }
}

/// `Σ_{β,q} ∂Q_l/∂f_{β,q} ∂Q_k/∂t^{β,q}`; the second-derivative terms of
/// the full chain rule are symmetric in `k, l` and omitted.
fn half_commutator(qk: &Expr, ql: &Expr) -> Expr {
    let mut out = Expr::zero();
    for f in vars_of(ql, is_f) {
        let d = qk.partial(&t_var(label_of(&f)));
        if d.is_zero() {
            continue;
        }
        out = out.add(&ql.partial(&f).mul(&d));
    }
    out
}

fn truncate_times(e: &Expr, window: usize) -> Result<Expr, VirError> {
    Ok(e.substitute(&|x: &Var| match x {
        Var::Time { level, .. } if *level as usize > window => Some(Expr::zero()),
        _ => None,
    })?)
}

/// Residual of `[∂_{s_k}, ∂_{s_l}] = (l−k) ∂_{s_{k+l}}` on `F_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutationReport {
    pub k: i32,
    pub l: i32,
    pub residual: String,
}

impl CommutationReport {
    pub fn ok(&self) -> bool {
        self.residual == "0"
    }
}

pub fn commutation_check(
    v: &VirasoroCoeffs,
    k: i32,
    l: i32,
    window: usize,
) -> Result<CommutationReport, VirError> {
    let ext = window + (k.unsigned_abs() + l.unsigned_abs()) as usize + 2;
    if ext > v.levels {
        return Err(VirError::WindowTooSmall(format!(
            "commutator ({k},{l}) on window {window} needs levels up to {ext}, fixture has {}",
            v.levels
        )));
    }
    let qk = genus0_hamiltonian(v, k, ext)?;
    let ql = genus0_hamiltonian(v, l, ext)?;
    let comm = half_commutator(&qk, &ql).sub(&half_commutator(&ql, &qk));
    let comm = truncate_times(&comm, window)?;
    let target = if k == l {
        Expr::zero()
    } else {
        genus0_hamiltonian(v, k + l, window)?.scale(&Scalar::from_int((l - k) as i64))
    };
    Ok(CommutationReport {
        k,
        l,
        residual: comm.sub(&target).to_string(),
    })
}

/// Genus-zero tau-cover data needed to act with `D_m` on jet functions.
#[derive(Debug, Clone)]
pub struct TauCover<'a> {
    pub manifold: &'a FrobeniusManifold,
    pub coeffs: &'a VirasoroCoeffs,
    pub theta: ThetaTable,
    pub flows: FlowTable,
    pub window: usize,
}

/// Action of one Virasoro flow at genus zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genus0Flow {
    /// `∂F_0/∂s_m`.
    pub free_energy: Expr,
    /// `∂f_{β,0}/∂s_m`, `β = 1..n`.
    pub one_point: Vec<Expr>,
    /// `∂v^λ/∂s_m`.
    pub v: Vec<Expr>,
}

impl<'a> TauCover<'a> {
    pub fn new(
        manifold: &'a FrobeniusManifold,
        coeffs: &'a VirasoroCoeffs,
        window: usize,
    ) -> Result<Self, VirError> {
        if coeffs.n != manifold.n() {
            return Err(VirError::FixtureMismatch(format!(
                "coefficients for n = {}, manifold has n = {}",
                coeffs.n,
                manifold.n()
            )));
        }
        coeffs.check_window(-1, window)?;
        let top_f = coeffs
            .b
            .keys()
            .filter(|(_, x, _)| x.1 <= window)
            .map(|(_, _, y)| y.1)
            .chain(coeffs.a.keys().flat_map(|(_, x, y)| [x.1, y.1]))
            .max()
            .unwrap_or(0);
        let theta = manifold.theta(top_f + 2)?;
        let flows = hierarchy::flows(manifold, &theta)?;
        Ok(TauCover {
            manifold,
            coeffs,
            theta,
            flows,
            window,
        })
    }

    fn theta_at(&self, l: Label) -> Result<&Expr, VirError> {
        if l.1 > self.theta.p_max() {
            return Err(VirError::WindowTooSmall(format!(
                "θ({},{}) beyond computed level {}",
                l.0,
                l.1,
                self.theta.p_max()
            )));
        }
        Ok(self.theta.get(l.0, l.1))
    }

    fn flow_at(&self, l: Label) -> Result<&[Expr], VirError> {
        if l.1 > self.flows.p_max() {
            return Err(VirError::WindowTooSmall(format!(
                "flow ({},{}) beyond computed level {}",
                l.0,
                l.1,
                self.flows.p_max()
            )));
        }
        Ok(self.flows.get(l.0, l.1))
    }

    /// Total `x = t^{1,0}` derivative on functions of times, one-point
    /// functions and jets.
    fn total_x(&self, e: &Expr) -> Result<Expr, VirError> {
        let mut out = Expr::zero();
        for x in e.free_vars() {
            let image = match &x {
                Var::Time { idx: 1, level: 0 } => Expr::one(),
                Var::OnePoint { .. } => self.theta_at(label_of(&x))?.clone(),
                Var::Jet { .. } => Expr::var(x.next_jet().expect("jet")),
                _ => continue,
            };
            out = out.add(&e.partial(&x).mul(&image));
        }
        Ok(out)
    }

    /// `∂f_{λ,0}/∂s_m = ∂Q_m/∂t^{λ,0} + Σ ∂Q_m/∂f_{γ,r} Ω_{γ,r;λ,0}`.
    fn one_point_flow(&self, q: &Expr, lambda: usize) -> Result<Expr, VirError> {
        let mut out = q.partial(&t_var((lambda, 0)));
        for f in vars_of(q, is_f) {
            let (g, r) = label_of(&f);
            let omega = self.theta_at((g, r + 1))?.partial(&v_var(lambda));
            out = out.add(&q.partial(&f).mul(&omega));
        }
        Ok(out)
    }

    pub fn flow_genus0(&self, m: i32) -> Result<Genus0Flow, VirError> {
        let n = self.manifold.n();
        let q = genus0_hamiltonian(self.coeffs, m, self.window)?;
        let one_point: Vec<Expr> = (1..=n)
            .map(|l| self.one_point_flow(&q, l))
            .collect::<Result<_, _>>()?;
        let dx_one: Vec<Expr> = one_point
            .iter()
            .map(|s| self.total_x(s))
            .collect::<Result<_, _>>()?;
        let v = (0..n)
            .map(|mu| {
                (0..n)
                    .map(|l| dx_one[l].scale(&self.manifold.eta_inv[mu][l]))
                    .sum()
            })
            .collect();
        Ok(Genus0Flow {
            free_energy: q,
            one_point,
            v,
        })
    }

    /// `D_m v^{μ,s}`, which must be independent of times and one-point
    /// functions.
    pub fn dm_on_jet(&self, m: i32, mu: usize, s: u32) -> Result<Expr, VirError> {
        let n = self.manifold.n();
        let q = genus0_hamiltonian(self.coeffs, m, self.window)?;
        let mut out = Expr::zero();
        for (x, y, c) in self.coeffs.a_entries(m) {
            let fl = dx_n(&self.flow_at(y)?[mu - 1], s);
            out = out.add(&f_of(x).mul(&fl).scale(&(c * &Scalar::from_int(2))));
        }
        for (x, y, c) in self.coeffs.b_entries(m, self.window) {
            let fl = dx_n(&self.flow_at(y)?[mu - 1], s);
            out = out.add(&t_of(x).mul(&fl).scale(c));
        }
        for l in 1..=n {
            let eta = &self.manifold.eta_inv[mu - 1][l - 1];
            if eta.is_zero() {
                continue;
            }
            let mut g = self.one_point_flow(&q, l)?;
            for _ in 0..=s {
                g = self.total_x(&g)?;
            }
            out = out.sub(&g.scale(eta));
        }
        if out
            .free_vars()
            .iter()
            .any(|x| matches!(x, Var::Time { .. } | Var::OnePoint { .. }))
        {
            return Err(VirError::TimeDependent(out.to_string()));
        }
        Ok(out)
    }

    /// `D_m F` for `F` a function of flat-coordinate jets.
    pub fn dm_apply(&self, m: i32, f: &Expr) -> Result<Expr, VirError> {
        let mut out = Expr::zero();
        for x in f.jet_vars() {
            match x {
                Var::Jet {
                    field: Field::V,
                    idx,
                    order,
                } => {
                    let d = f.partial(&x);
                    if !d.is_zero() {
                        out = out.add(&d.mul(&self.dm_on_jet(m, idx as usize, order)?));
                    }
                }
                _ => return Err(VirError::WrongChart(format!("{x} in {f}"))),
            }
        }
        Ok(out)
    }

    /// `D_m F_1 + a_m^{α,p;β,q} Ω_{α,p;β,q} + δ_{m,0} · constant`.
    pub fn genus1_residual(&self, m: i32, f1: &Expr) -> Result<Expr, VirError> {
        let top = self
            .coeffs
            .a_entries(m)
            .flat_map(|(x, y, _)| [x.1, y.1])
            .max()
            .unwrap_or(0);
        let omega = hierarchy::omega(self.manifold, &self.theta, top.min(self.theta.p_max() - 1))?;
        let mut out = self.dm_apply(m, f1)?;
        for (x, y, c) in self.coeffs.a_entries(m) {
            let o = omega
                .get(x, y)
                .ok_or_else(|| VirError::WindowTooSmall(format!("Ω{x:?}{y:?}")))?;
            out = out.add(&o.scale(c));
        }
        if m == 0 {
            out = out.add(&Expr::constant(self.coeffs.constant.clone()));
        }
        Ok(out)
    }
}

/// Comparison of `D(λ)F` expanded at infinity with `Σ_m D_m F λ^{−m−2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DOperatorRow {
    pub m: i32,
    pub from_dlambda: String,
    pub from_tau_cover: String,
    pub matches: bool,
}

pub fn d_operator_consistency(
    cover: &TauCover<'_>,
    d: &DLambdaOp,
    chart: &CanonicalChart,
    f: &Expr,
    m_max: i32,
) -> Result<Vec<DOperatorRow>, VirError> {
    let series = expand_at_infinity(&d.apply(f)?, m_max + 2)?;
    let f_flat = chart.change_chart(f, ChartDirection::CanonicalToFlat)?;
    let mut rows = Vec::new();
    for m in -1..=m_max {
        let lhs = series.get(&(m + 2)).cloned().unwrap_or_default();
        let lhs = chart.change_chart(&lhs, ChartDirection::CanonicalToFlat)?;
        let rhs = cover.dm_apply(m, &f_flat)?;
        rows.push(DOperatorRow {
            m,
            matches: lhs == rhs,
            from_dlambda: lhs.to_string(),
            from_tau_cover: rhs.to_string(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
