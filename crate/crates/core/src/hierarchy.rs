//! Principal hierarchy flows, two-point functions and tau-symmetry.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::frobman::{v_var, FrobError, FrobeniusManifold, ThetaTable};
use crate::jetcalc::{self, dx, dx_n, JetError};
use crate::symcore::{Expr, Field, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("θ table reaches level {have}, level {need} is required")]
    LevelTooLow { have: usize, need: usize },
    #[error("gradient system for Ω({0},{1};{2},{3}) is not integrable: {4}")]
    IntegrabilityFailure(usize, usize, usize, usize, String),
    #[error(transparent)]
    Frob(#[from] FrobError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A time label `t^{α,p}`.
pub type Label = (usize, usize);

/// Evolution equations `∂v^λ/∂t^{α,p}` for `p ≤ p_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTable {
    /// `flows[α-1][p][λ-1]`.
    pub flows: Vec<Vec<Vec<Expr>>>,
}

impl FlowTable {
    pub fn get(&self, alpha: usize, p: usize) -> &[Expr] {
        &self.flows[alpha - 1][p]
    }

    pub fn n(&self) -> usize {
        self.flows.len()
    }

    pub fn p_max(&self) -> usize {
        self.flows.first().map(|f| f.len() - 1).unwrap_or(0)
    }

    pub fn labels(&self, up_to: usize) -> Vec<Label> {
        let top = up_to.min(self.p_max());
        (1..=self.n())
            .flat_map(|a| (0..=top).map(move |p| (a, p)))
            .collect()
    }
}

fn need_level(theta: &ThetaTable, need: usize) -> Result<(), HierarchyError> {
    if theta.p_max() < need {
        return Err(HierarchyError::LevelTooLow {
            have: theta.p_max(),
            need,
        });
    }
    Ok(())
}

/// `∂v^λ/∂t^{α,p} = η^{λγ} ∂_x ∂_γθ_{α,p+1}` for every level the table allows.
pub fn flows(m: &FrobeniusManifold, theta: &ThetaTable) -> Result<FlowTable, HierarchyError> {
    let n = m.n();
    need_level(theta, 1)?;
    let top = theta.p_max() - 1;
    let flows = (1..=n)
        .map(|a| {
            (0..=top)
                .map(|p| {
                    let grad: Vec<Expr> = (1..=n)
                        .map(|g| dx(&theta.get(a, p + 1).partial(&v_var(g))))
                        .collect();
                    (0..n)
                        .map(|l| {
                            (0..n)
                                .map(|g| grad[g].scale(&m.eta_inv[l][g]))
                                .sum::<Expr>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(FlowTable { flows })
}

/// Derivative of `f` along the evolutionary field with components `flow`.
pub fn evolve(f: &Expr, flow: &[Expr]) -> Expr {
    let mut out = Expr::zero();
    for v in f.jet_vars() {
        let Var::Jet {
            field: Field::V,
            idx,
            order,
        } = v
        else {
            continue;
        };
        let comp = &flow[idx as usize - 1];
        if comp.is_zero() {
            continue;
        }
        out = out.add(&f.partial(&v).mul(&dx_n(comp, order)));
    }
    out
}

/// `∂f/∂t^{α,p}`.
pub fn t_derivative(f: &Expr, label: Label, table: &FlowTable) -> Expr {
    evolve(f, table.get(label.0, label.1))
}

/// First pair of flows found not to commute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowViolation {
    pub first: Label,
    pub second: Label,
    pub component: usize,
    pub residual: String,
}

/// Checks `[∂_{t^{α,p}}, ∂_{t^{β,q}}] v^λ = 0` for all levels up to `up_to`.
pub fn commutativity_check(table: &FlowTable, up_to: usize) -> Result<(), FlowViolation> {
    let labels = table.labels(up_to);
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            let fa = table.get(a.0, a.1);
            let fb = table.get(b.0, b.1);
            for l in 0..table.n() {
                let r = evolve(&fb[l], fa).sub(&evolve(&fa[l], fb));
                if !r.is_zero() {
                    return Err(FlowViolation {
                        first: a,
                        second: b,
                        component: l + 1,
                        residual: r.to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Two-point functions `Ω_{α,p;β,q}` for `p, q ≤ p_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaTable {
    pub p_max: usize,
    pub entries: BTreeMap<(Label, Label), Expr>,
    /// Cells whose integration constant was set to zero.
    pub free_constants: Vec<(Label, Label)>,
}

impl OmegaTable {
    pub fn get(&self, a: Label, b: Label) -> Option<&Expr> {
        self.entries.get(&(a, b))
    }

    /// Entries violating `Ω_{α,p;β,q} = Ω_{β,q;α,p}`.
    pub fn asymmetric_cells(&self) -> Vec<(Label, Label)> {
        self.entries
            .iter()
            .filter(|((a, b), e)| self.entries.get(&(*b, *a)).is_some_and(|f| f != *e))
            .map(|(k, _)| *k)
            .collect()
    }
}

/// Builds Ω from `∂_μΩ_{α,p;β,q} = ∂_γθ_{α,p} η^{γλ} ∂_λ∂_μθ_{β,q+1}`, with
/// the `q = 0` and `p = 0` cells given by `∂θ` directly.
pub fn omega(
    m: &FrobeniusManifold,
    theta: &ThetaTable,
    p_max: usize,
) -> Result<OmegaTable, HierarchyError> {
    let n = m.n();
    need_level(theta, p_max + 1)?;
    let mut entries = BTreeMap::new();
    let mut free_constants = Vec::new();
    for a in 1..=n {
        for p in 0..=p_max {
            let da: Vec<Expr> = (1..=n)
                .map(|g| theta.get(a, p).partial(&v_var(g)))
                .collect();
            let raised: Vec<Expr> = (0..n)
                .map(|l| (0..n).map(|g| da[g].scale(&m.eta_inv[g][l])).sum())
                .collect();
            for b in 1..=n {
                for q in 0..=p_max {
                    let e = if q == 0 {
                        theta.get(a, p + 1).partial(&v_var(b))
                    } else if p == 0 {
                        theta.get(b, q + 1).partial(&v_var(a))
                    } else {
                        let grad: Vec<(Var, Expr)> = (1..=n)
                            .map(|mu| {
                                let g: Expr = (1..=n)
                                    .map(|l| {
                                        raised[l - 1].mul(
                                            &theta
                                                .get(b, q + 1)
                                                .partial(&v_var(l))
                                                .partial(&v_var(mu)),
                                        )
                                    })
                                    .sum();
                                (v_var(mu), g)
                            })
                            .collect();
                        free_constants.push(((a, p), (b, q)));
                        jetcalc::potential(&grad).map_err(|e| {
                            HierarchyError::IntegrabilityFailure(a, p, b, q, e.to_string())
                        })?
                    };
                    entries.insert(((a, p), (b, q)), e);
                }
            }
        }
    }
    Ok(OmegaTable {
        p_max,
        entries,
        free_constants,
    })
}

/// Residual of `∂_xΩ_{α,p;β,q} = ∂θ_{α,p}/∂t^{β,q}` for one cell.
pub fn omega_exactness_residual(
    omega: &OmegaTable,
    theta: &ThetaTable,
    table: &FlowTable,
    a: Label,
    b: Label,
) -> Option<Expr> {
    let o = omega.get(a, b)?;
    if b.1 > table.p_max() {
        return None;
    }
    Some(dx(o).sub(&t_derivative(theta.get(a.0, a.1), b, table)))
}

/// First pair breaking `∂θ_{α,p}/∂t^{β,q} = ∂θ_{β,q}/∂t^{α,p}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauViolation {
    pub first: Label,
    pub second: Label,
    pub residual: String,
}

/// Checks tau-symmetry for all levels up to `up_to`.
pub fn tau_symmetry_check(
    theta: &ThetaTable,
    table: &FlowTable,
    up_to: usize,
) -> Result<(), TauViolation> {
    let top = up_to.min(table.p_max()).min(theta.p_max());
    let labels: Vec<Label> = (1..=table.n())
        .flat_map(|a| (0..=top).map(move |p| (a, p)))
        .collect();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            let r = t_derivative(theta.get(a.0, a.1), b, table).sub(&t_derivative(
                theta.get(b.0, b.1),
                a,
                table,
            ));
            if !r.is_zero() {
                return Err(TauViolation {
                    first: a,
                    second: b,
                    residual: r.to_string(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobman::ManifoldSpec;
    use crate::poisson::genus0_pencil;
    use crate::symcore::parse;

    fn pe(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn setup(spec: ManifoldSpec, p: usize) -> (FrobeniusManifold, ThetaTable, FlowTable) {
        let m = FrobeniusManifold::new(spec).unwrap();
        let t = m.theta(p + 1).unwrap();
        let f = flows(&m, &t).unwrap();
        (m, t, f)
    }

    #[test]
    fn kdv_flows() {
        let (_, _, f) = setup(ManifoldSpec::kdv(), 3);
        assert_eq!(f.get(1, 0), &[pe("v1_1")]);
        assert_eq!(f.get(1, 1), &[pe("v1*v1_1")]);
        assert_eq!(f.get(1, 2), &[pe("v1^2*v1_1/2")]);
        assert_eq!(t_derivative(&pe("v1"), (1, 1), &f), pe("v1*v1_1"));
        assert!(commutativity_check(&f, 3).is_ok());
    }

    #[test]
    fn p1_flows_commute_and_are_hamiltonian() {
        let (m, t, f) = setup(ManifoldSpec::p1(), 2);
        for a in 1..=2 {
            assert_eq!(f.get(a, 0).len(), 2);
        }
        assert_eq!(f.get(1, 0), &[pe("v1_1"), pe("v2_1")]);
        assert!(commutativity_check(&f, 2).is_ok());
        assert!(tau_symmetry_check(&t, &f, 2).is_ok());
        let p1 = genus0_pencil(&m).first;
        for (a, p) in f.labels(2) {
            let h = t.get(a, p + 1);
            let grad: Vec<Expr> = (1..=2).map(|g| h.partial(&v_var(g))).collect();
            assert_eq!(p1.apply(&grad).unwrap(), f.get(a, p));
        }
    }

    #[test]
    fn dropping_the_metric_breaks_commutativity() {
        let (m, t, _) = setup(ManifoldSpec::p1(), 2);
        let bad = FlowTable {
            flows: (1..=2)
                .map(|a| {
                    (0..=2)
                        .map(|p| {
                            (1..=2)
                                .map(|g| dx(&t.get(a, p + 1).partial(&v_var(g))))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        };
        assert_eq!(m.n(), 2);
        assert!(commutativity_check(&bad, 2).is_err());
    }

    #[test]
    fn kdv_omega() {
        let (m, t, f) = setup(ManifoldSpec::kdv(), 3);
        let o = omega(&m, &t, 2).unwrap();
        assert_eq!(o.get((1, 1), (1, 1)).unwrap(), &pe("v1^3/3"));
        assert_eq!(o.get((1, 2), (1, 0)).unwrap(), t.get(1, 2));
        assert!(o.asymmetric_cells().is_empty());
        for (a, b) in o.entries.keys() {
            let r = omega_exactness_residual(&o, &t, &f, *a, *b).unwrap();
            assert!(r.is_zero(), "{a:?} {b:?}: {r}");
        }
    }

    #[test]
    fn p1_omega_identities() {
        let (m, t, f) = setup(ManifoldSpec::p1(), 2);
        let o = omega(&m, &t, 2).unwrap();
        assert!(o.asymmetric_cells().is_empty());
        for (&(a, b), e) in &o.entries {
            if b == (1, 0) {
                assert_eq!(e, t.get(a.0, a.1));
            }
            let r = omega_exactness_residual(&o, &t, &f, a, b).unwrap();
            assert!(r.is_zero(), "{a:?} {b:?}: {r}");
        }
    }

    #[test]
    fn broken_theta_breaks_tau_symmetry() {
        let (_, mut t, f) = setup(ManifoldSpec::kdv(), 3);
        t.theta[0][2] = t.theta[0][2].scale(&crate::symcore::Scalar::from_int(2));
        assert!(tau_symmetry_check(&t, &f, 3).is_err());
    }
}
