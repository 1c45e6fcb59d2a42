//! JSON manifold configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::frobman::{ChartFixture, ManifoldSpec};
use crate::poisson::{PoissonOp, PoissonPencil};
use crate::symcore::{parse, Expr, Scalar};
use crate::virasoro::{PeriodFixture, VirasoroCoeffs};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub name: String,
    pub n: usize,
    pub potential: String,
    pub euler: Vec<String>,
    pub charge: String,
    pub mu: Vec<String>,
    #[serde(default)]
    pub r_shift: Vec<String>,
    /// `r_matrices[k-1][γ][α]`.
    #[serde(default)]
    pub r_matrices: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub chart: Option<ChartConfig>,
    #[serde(default)]
    pub pencil: Option<PencilConfig>,
    #[serde(default)]
    pub virasoro: Option<VirasoroConfig>,
    #[serde(default)]
    pub periods: Vec<PeriodEntry>,
    #[serde(default)]
    pub truncation: Truncation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    #[serde(default)]
    pub u_of_v: Vec<String>,
    pub v_of_u: Vec<String>,
}

/// `(g, k, α, β, coefficient)` of `ε^{2g} δ^{(2g+1−k)}`.
pub type RecordEntry = (u32, u32, usize, usize, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilConfig {
    pub first: Vec<RecordEntry>,
    pub second: Vec<RecordEntry>,
}

/// `(m, α, p, β, q, value)`.
pub type CoeffEntry = (i32, usize, usize, usize, usize, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirasoroConfig {
    pub m_max: i32,
    pub levels: usize,
    #[serde(default)]
    pub a: Vec<CoeffEntry>,
    #[serde(default)]
    pub b: Vec<CoeffEntry>,
    #[serde(default)]
    pub c: Vec<CoeffEntry>,
    pub constant: String,
    /// Genus-one free energy in canonical coordinates.
    #[serde(default)]
    pub genus1: Option<String>,
}

/// `(i, r, B_{i,r})`.
pub type PeriodEntry = (usize, u32, String);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default = "default_pmax")]
    pub p_max: usize,
    #[serde(default = "default_mmax")]
    pub m_max: i32,
    #[serde(default = "default_gmax")]
    pub g_max: u32,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_pmax() -> usize {
    3
}
fn default_mmax() -> i32 {
    2
}
fn default_gmax() -> u32 {
    1
}
fn default_window() -> usize {
    2
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            p_max: default_pmax(),
            m_max: default_mmax(),
            g_max: default_gmax(),
            window: default_window(),
        }
    }
}

fn expr(field: &str, s: &str) -> Result<Expr, CliError> {
    parse(s).map_err(|e| CliError::Input(format!("{field}: {e}")))
}

fn scalar(field: &str, s: &str) -> Result<Scalar, CliError> {
    expr(field, s)?
        .as_scalar()
        .ok_or_else(|| CliError::Input(format!("{field}: `{s}` is not a rational number")))
}

fn exprs(field: &str, items: &[String]) -> Result<Vec<Expr>, CliError> {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| expr(&format!("{field}[{i}]"), s))
        .collect()
}

fn scalars(field: &str, items: &[String]) -> Result<Vec<Scalar>, CliError> {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| scalar(&format!("{field}[{i}]"), s))
        .collect()
}

impl ManifoldConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ManifoldConfig =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("schema: {e}")))?;
        cfg.check_shape()?;
        Ok(cfg)
    }

    fn check_shape(&self) -> Result<(), CliError> {
        let n = self.n;
        let bad = |what: &str| Err(CliError::Input(format!("{what} must have {n} entries")));
        if n == 0 {
            return Err(CliError::Input("n must be positive".into()));
        }
        if self.euler.len() != n {
            return bad("euler");
        }
        if self.mu.len() != n {
            return bad("mu");
        }
        if !self.r_shift.is_empty() && self.r_shift.len() != n {
            return bad("r_shift");
        }
        if let Some(c) = &self.chart {
            if c.v_of_u.len() != n || (!c.u_of_v.is_empty() && c.u_of_v.len() != n) {
                return bad("chart");
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ManifoldSpec, CliError> {
        let n = self.n;
        let r_shift = if self.r_shift.is_empty() {
            vec![Scalar::zero(); n]
        } else {
            scalars("r_shift", &self.r_shift)?
        };
        let mut r_matrices = Vec::with_capacity(self.r_matrices.len());
        for (k, m) in self.r_matrices.iter().enumerate() {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(CliError::Input(format!("r_matrices[{k}] must be {n}x{n}")));
            }
            let rows = m
                .iter()
                .enumerate()
                .map(|(g, row)| scalars(&format!("r_matrices[{k}][{g}]"), row))
                .collect::<Result<Vec<_>, _>>()?;
            r_matrices.push(rows);
        }
        let chart = match &self.chart {
            Some(c) => Some(ChartFixture {
                u_of_v: exprs("chart.u_of_v", &c.u_of_v)?,
                v_of_u: exprs("chart.v_of_u", &c.v_of_u)?,
            }),
            None => None,
        };
        Ok(ManifoldSpec {
            name: self.name.clone(),
            n,
            potential: expr("potential", &self.potential)?,
            euler: exprs("euler", &self.euler)?,
            charge: scalar("charge", &self.charge)?,
            mu: scalars("mu", &self.mu)?,
            r_shift,
            r_matrices,
            chart,
        })
    }

    pub fn pencil(&self, g_max: Option<u32>) -> Result<Option<PoissonPencil>, CliError> {
        let Some(p) = &self.pencil else {
            return Ok(None);
        };
        let op = |field: &str, recs: &[RecordEntry]| -> Result<PoissonOp, CliError> {
            let parsed = recs
                .iter()
                .enumerate()
                .map(|(i, (g, k, a, b, s))| {
                    Ok((*g, *k, *a, *b, expr(&format!("pencil.{field}[{i}]"), s)?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            PoissonOp::from_records(self.n, &parsed, g_max)
                .map_err(|e| CliError::Input(format!("pencil.{field}: {e}")))
        };
        Ok(Some(PoissonPencil {
            first: op("first", &p.first)?,
            second: op("second", &p.second)?,
        }))
    }

    pub fn virasoro(&self) -> Result<Option<VirasoroCoeffs>, CliError> {
        let Some(v) = &self.virasoro else {
            return Ok(None);
        };
        let table = |field: &str, entries: &[CoeffEntry]| {
            entries
                .iter()
                .enumerate()
                .map(|(i, (m, a, p, b, q, s))| {
                    if *a == 0 || *b == 0 || *a > self.n || *b > self.n {
                        return Err(CliError::Input(format!(
                            "virasoro.{field}[{i}]: index out of range"
                        )));
                    }
                    Ok((
                        (*m, (*a, *p), (*b, *q)),
                        scalar(&format!("virasoro.{field}[{i}]"), s)?,
                    ))
                })
                .collect::<Result<std::collections::BTreeMap<_, _>, CliError>>()
        };
        Ok(Some(VirasoroCoeffs {
            n: self.n,
            m_max: v.m_max,
            levels: v.levels,
            a: table("a", &v.a)?,
            b: table("b", &v.b)?,
            c: table("c", &v.c)?,
            constant: scalar("virasoro.constant", &v.constant)?,
        }))
    }

    pub fn genus1(&self) -> Result<Option<Expr>, CliError> {
        match self.virasoro.as_ref().and_then(|v| v.genus1.as_ref()) {
            Some(s) => Ok(Some(expr("virasoro.genus1", s)?)),
            None => Ok(None),
        }
    }

    pub fn periods(&self) -> Result<Option<PeriodFixture>, CliError> {
        if self.periods.is_empty() {
            return Ok(None);
        }
        let mut b = std::collections::BTreeMap::new();
        for (k, (i, r, s)) in self.periods.iter().enumerate() {
            b.insert((*i, *r), expr(&format!("periods[{k}]"), s)?);
        }
        Ok(Some(PeriodFixture { b }))
    }
}
