//! Command-line front end: argument model, command runners and report
//! rendering. Exit codes are 0 on success, 1 on a mathematical violation
//! and 2 on unusable input.

pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub use config::ManifoldConfig;

use crate::frobman::{ChartDirection, FrobError, FrobeniusManifold};
use crate::hierarchy;
use crate::jetcalc::{self, dx};
use crate::poisson::{self, PoissonOp};
use crate::symcore::{parse, Expr};
use crate::virasoro::{self, TauCover};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("missing fixture: {0}")]
    MissingFixture(String),
    #[error("{0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            CliError::Input(_) | CliError::MissingFixture(_) => 2,
        }
    }
}

fn math(e: impl std::fmt::Display) -> CliError {
    CliError::Math(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "frobjet",
    version,
    about = "Jet-space calculus for Frobenius manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Manifold configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Highest hierarchy level.
    #[arg(long, global = true)]
    pub pmax: Option<usize>,
    /// Highest genus kept in dispersive expansions.
    #[arg(long, global = true)]
    pub gmax: Option<u32>,
    /// Highest Virasoro index.
    #[arg(long, global = true)]
    pub mmax: Option<i32>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check WDVV, quasi-homogeneity, the canonical chart and irreducibility.
    Validate,
    /// Flows, two-point functions, commutativity and tau-symmetry.
    Hierarchy,
    /// Poisson pencil checks and central invariants.
    Pencil,
    /// Virasoro commutation, D(λ) consistency and the genus-one residual.
    Virasoro,
    /// Invert the x-derivative, or double-integrate a conserved vector.
    Integrate {
        /// Expression, or `;`-separated components with `--double`.
        #[arg(long)]
        expr: String,
        #[arg(long)]
        double: bool,
    },
    /// Pole profile of D(λ)F in canonical coordinates.
    Poles {
        #[arg(long)]
        expr: String,
    },
}

/// Rendered report and exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

struct Report {
    command: &'static str,
    manifold: String,
    ok: bool,
    body: Map<String, Value>,
}

impl Report {
    fn new(command: &'static str, manifold: &str) -> Self {
        Report {
            command,
            manifold: manifold.to_string(),
            ok: true,
            body: Map::new(),
        }
    }

    fn put(&mut self, key: &str, v: Value) {
        self.body.insert(key.to_string(), v);
    }

    fn check(&mut self, key: &str, ok: bool, v: Value) {
        self.ok &= ok;
        self.put(key, v);
    }

    fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "manifold": self.manifold,
            "status": if self.ok { "pass" } else { "fail" },
            "report": Value::Object(self.body.clone()),
        })
    }
}

fn render_human(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_human(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar_text(x))),
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar_text(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_human(x, indent + 1, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar_text(v))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| !x.is_object() && !x.is_array()),
        Value::Object(m) => m.is_empty(),
        _ => true,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(_) => "{}".into(),
        other => other.to_string(),
    }
}

fn render(report: &Report, format: Format) -> String {
    let v = report.to_value();
    match format {
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Human => {
            let mut s = String::new();
            render_human(&v, 0, &mut s);
            s
        }
    }
}

fn error_outcome(e: &CliError, format: Format) -> Outcome {
    let text = match format {
        Format::Machine => {
            let v = json!({
                "status": "error",
                "exit_code": e.exit_code(),
                "error": e.to_string(),
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&v).expect("serializable")
            )
        }
        Format::Human => format!("error: {e}\n"),
    };
    Outcome {
        text,
        code: e.exit_code(),
    }
}

/// Runs a parsed command line and renders its report.
pub fn run(cli: &Cli) -> Outcome {
    finish(cli, dispatch(cli, None))
}

/// Like [`run`], with the manifold supplied directly; `cli.config` is ignored.
pub fn run_with_config(cli: &Cli, cfg: &ManifoldConfig) -> Outcome {
    finish(cli, dispatch(cli, Some(cfg)))
}

/// Like [`run_with_config`], returning command errors instead of rendering them.
pub fn try_run_with_config(cli: &Cli, cfg: &ManifoldConfig) -> Result<Outcome, CliError> {
    dispatch(cli, Some(cfg)).map(|report| Outcome {
        text: render(&report, cli.format),
        code: if report.ok { 0 } else { 1 },
    })
}

fn finish(cli: &Cli, result: Result<Report, CliError>) -> Outcome {
    match result {
        Ok(report) => Outcome {
            text: render(&report, cli.format),
            code: if report.ok { 0 } else { 1 },
        },
        Err(e) => error_outcome(&e, cli.format),
    }
}

fn load(cli: &Cli, preset: Option<&ManifoldConfig>) -> Result<ManifoldConfig, CliError> {
    if let Some(cfg) = preset {
        return Ok(cfg.clone());
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Input("--config is required".into()))?;
    ManifoldConfig::load(path)
}

fn dispatch(cli: &Cli, preset: Option<&ManifoldConfig>) -> Result<Report, CliError> {
    match &cli.command {
        Command::Integrate { expr, double } => {
            let cfg = if *double {
                Some(load(cli, preset)?)
            } else {
                None
            };
            cmd_integrate(cfg.as_ref(), expr, *double)
        }
        cmd => {
            let cfg = load(cli, preset)?;
            let validation = cmd_validate(&cfg)?;
            if matches!(cmd, Command::Validate) || !validation.ok {
                return Ok(validation);
            }
            let m = manifold(&cfg)?;
            match cmd {
                Command::Hierarchy => cmd_hierarchy(&cfg, &m, cli.pmax),
                Command::Pencil => cmd_pencil(&cfg, &m, cli.gmax),
                Command::Virasoro => cmd_virasoro(&cfg, &m, cli.mmax),
                Command::Poles { expr } => cmd_poles(&cfg, &m, expr),
                Command::Validate | Command::Integrate { .. } => unreachable!(),
            }
        }
    }
}

fn manifold(cfg: &ManifoldConfig) -> Result<FrobeniusManifold, CliError> {
    FrobeniusManifold::new(cfg.spec()?).map_err(|e| match e {
        FrobError::InvalidData(s) => CliError::Input(s),
        other => math(other),
    })
}

fn strings(v: &[Expr]) -> Value {
    Value::Array(v.iter().map(|e| Value::String(e.to_string())).collect())
}

/// WDVV, Euler and chart checks. Failures are reported, not raised.
fn cmd_validate(cfg: &ManifoldConfig) -> Result<Report, CliError> {
    let mut r = Report::new("validate", &cfg.name);
    let m = match manifold(cfg) {
        Ok(m) => m,
        Err(CliError::Math(msg)) => {
            r.check("metric", false, json!({ "ok": false, "error": msg }));
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    match m.check_wdvv() {
        Ok(()) => r.check("wdvv", true, json!({ "ok": true })),
        Err(w) => {
            r.check(
                "wdvv",
                false,
                json!({ "ok": false, "witness": w.indices, "residual": w.residual }),
            );
            return Ok(r);
        }
    }
    let e = m.check_euler();
    r.check(
        "euler",
        e.ok(),
        json!({
            "ok": e.ok(),
            "quasi_homogeneous": e.quasi_homogeneous,
            "matches_spectrum": e.matches_spectrum,
            "defect": e.residual,
        }),
    );
    r.check("unity", m.unit_ok(), json!({ "ok": m.unit_ok() }));
    match m.canonical_chart() {
        Ok(chart) => {
            let ok = chart.idempotency_ok && chart.eta_diagonal_ok && chart.egorov_ok();
            r.check(
                "canonical_chart",
                ok,
                json!({
                    "ok": ok,
                    "u_of_v": strings(&chart.u_of_v),
                    "v_of_u": strings(&chart.v_of_u),
                    "f": strings(&chart.f),
                    "jacobian": chart.jacobian.to_string(),
                    "idempotent": chart.idempotency_ok,
                    "eta_diagonal": chart.eta_diagonal_ok,
                    "egorov": chart.egorov_ok(),
                }),
            );
            if m.n() >= 2 {
                let irr = chart.is_irreducible().map_err(math)?;
                r.check("irreducible", irr, json!({ "ok": irr }));
            }
        }
        Err(FrobError::NoClosedForm(msg)) => {
            r.put(
                "canonical_chart",
                json!({ "available": false, "reason": msg }),
            );
        }
        Err(e) => r.check(
            "canonical_chart",
            false,
            json!({ "ok": false, "error": e.to_string() }),
        ),
    }
    Ok(r)
}

fn cmd_hierarchy(
    cfg: &ManifoldConfig,
    m: &FrobeniusManifold,
    pmax: Option<usize>,
) -> Result<Report, CliError> {
    let p_max = pmax.unwrap_or(cfg.truncation.p_max);
    let mut r = Report::new("hierarchy", &cfg.name);
    let theta = m.theta(p_max + 1).map_err(math)?;
    let flows = hierarchy::flows(m, &theta).map_err(math)?;
    let omega = hierarchy::omega(m, &theta, p_max).map_err(math)?;
    r.put("p_max", json!(p_max));
    let theta_rows: Vec<Value> = (1..=m.n())
        .flat_map(|a| (0..=p_max + 1).map(move |p| (a, p)))
        .map(|(a, p)| json!({ "alpha": a, "p": p, "theta": theta.get(a, p).to_string() }))
        .collect();
    r.put("theta", Value::Array(theta_rows));
    let flow_rows: Vec<Value> = flows
        .labels(p_max)
        .into_iter()
        .map(|(a, p)| json!({ "alpha": a, "p": p, "dv_dt": strings(flows.get(a, p)) }))
        .collect();
    r.put("flows", Value::Array(flow_rows));
    let omega_rows: Vec<Value> = omega
        .entries
        .iter()
        .map(|((a, b), e)| json!({ "left": [a.0, a.1], "right": [b.0, b.1], "omega": e.to_string() }))
        .collect();
    r.put("omega", Value::Array(omega_rows));
    let mut exact = true;
    for (a, b) in omega.entries.keys() {
        if let Some(res) = hierarchy::omega_exactness_residual(&omega, &theta, &flows, *a, *b) {
            exact &= res.is_zero();
        }
    }
    let symmetric = omega.asymmetric_cells().is_empty();
    r.check(
        "omega_identities",
        exact && symmetric,
        json!({ "symmetric": symmetric, "x_derivative_matches_flow": exact,
                "constants_set_to_zero": omega.free_constants.len() }),
    );
    match hierarchy::commutativity_check(&flows, p_max) {
        Ok(()) => r.check("commutativity", true, json!({ "ok": true })),
        Err(v) => r.check(
            "commutativity",
            false,
            json!({ "ok": false, "violation": v }),
        ),
    }
    match hierarchy::tau_symmetry_check(&theta, &flows, p_max) {
        Ok(()) => r.check("tau_symmetry", true, json!({ "ok": true })),
        Err(v) => r.check(
            "tau_symmetry",
            false,
            json!({ "ok": false, "violation": v }),
        ),
    }
    Ok(r)
}

fn op_value(op: &PoissonOp) -> Value {
    serde_json::to_value(op.records()).expect("serializable")
}

fn bracket_value(b: &poisson::BracketCheck) -> Value {
    match b {
        poisson::BracketCheck::Ok => json!({ "ok": true }),
        poisson::BracketCheck::Violation { component, witness } => {
            json!({ "ok": false, "component": component, "witness": witness })
        }
    }
}

fn cmd_pencil(
    cfg: &ManifoldConfig,
    m: &FrobeniusManifold,
    gmax: Option<u32>,
) -> Result<Report, CliError> {
    let g_max = gmax.unwrap_or(cfg.truncation.g_max);
    let mut r = Report::new("pencil", &cfg.name);
    let pencil = match cfg.pencil(Some(g_max))? {
        Some(p) => p,
        None => {
            let p = poisson::genus0_pencil(m);
            poisson::PoissonPencil {
                first: p.first.with_truncation(Some(g_max)),
                second: p.second.with_truncation(Some(g_max)),
            }
        }
    };
    r.put("g_max", json!(g_max));
    r.put("first", op_value(&pencil.first));
    r.put("second", op_value(&pencil.second));
    for (key, op) in [("first", &pencil.first), ("second", &pencil.second)] {
        let skew = op.is_skew();
        r.check(&format!("{key}_skew"), skew, json!({ "ok": skew }));
        let j = poisson::jacobi_check(op, Some(g_max)).map_err(math)?;
        r.check(&format!("{key}_jacobi"), j.is_ok(), bracket_value(&j));
    }
    let c = poisson::compatibility_check(&pencil, Some(g_max)).map_err(math)?;
    r.check("compatibility", c.is_ok(), bracket_value(&c));
    match m.canonical_chart() {
        Ok(chart) => match poisson::central_invariants(&pencil, &chart) {
            Ok(ci) => r.put("central_invariants", strings(&ci.values)),
            Err(e) => r.put("central_invariants", json!({ "error": e.to_string() })),
        },
        Err(e) => r.put(
            "central_invariants",
            json!({ "available": false, "reason": e.to_string() }),
        ),
    }
    Ok(r)
}

fn cmd_virasoro(
    cfg: &ManifoldConfig,
    m: &FrobeniusManifold,
    mmax: Option<i32>,
) -> Result<Report, CliError> {
    let coeffs = cfg
        .virasoro()?
        .ok_or_else(|| CliError::MissingFixture("config has no `virasoro` section".into()))?;
    let m_max = mmax.unwrap_or(cfg.truncation.m_max);
    let window = cfg.truncation.window;
    let mut r = Report::new("virasoro", &cfg.name);
    r.put("m_max", json!(m_max));
    r.put("window", json!(window));
    let mut rows = Vec::new();
    let mut all = true;
    for k in -1..=coeffs.m_max {
        for l in k..=coeffs.m_max {
            if k + l > m_max {
                continue;
            }
            let rep = virasoro::commutation_check(&coeffs, k, l, window).map_err(math)?;
            all &= rep.ok();
            rows.push(serde_json::to_value(&rep).expect("serializable"));
        }
    }
    r.check("commutation", all, json!({ "ok": all, "pairs": rows }));
    let chart = m.canonical_chart().map_err(math)?;
    let d = virasoro::build_dlambda(&chart, cfg.periods()?.as_ref()).map_err(math)?;
    let cover = TauCover::new(m, &coeffs, window).map_err(math)?;
    let dm_top = m_max.min(coeffs.m_max);
    let mut probes: Vec<Expr> = (1..=m.n())
        .flat_map(|i| {
            [
                Expr::u(i as u32),
                Expr::jet(crate::symcore::Field::U, i as u32, 1),
            ]
        })
        .collect();
    let f1 = cfg.genus1()?;
    probes.extend(f1.clone());
    let mut consistency = Vec::new();
    let mut cons_ok = true;
    for f in &probes {
        let rows = virasoro::d_operator_consistency(&cover, &d, &chart, f, dm_top).map_err(math)?;
        let ok = rows.iter().all(|x| x.matches);
        cons_ok &= ok;
        consistency.push(json!({ "f": f.to_string(), "ok": ok, "rows": rows }));
    }
    r.check("d_operator_consistency", cons_ok, Value::Array(consistency));
    if let Some(f1) = f1 {
        let flat = chart
            .change_chart(&f1, ChartDirection::CanonicalToFlat)
            .map_err(math)?;
        let mut res = Vec::new();
        let mut ok = true;
        for k in -1..=dm_top {
            let e = cover.genus1_residual(k, &flat).map_err(math)?;
            ok &= e.is_zero();
            res.push(json!({ "m": k, "residual": e.to_string() }));
        }
        r.check(
            "genus1",
            ok,
            json!({ "f1": f1.to_string(), "ok": ok, "residuals": res }),
        );
    }
    Ok(r)
}

fn cmd_poles(cfg: &ManifoldConfig, m: &FrobeniusManifold, text: &str) -> Result<Report, CliError> {
    let f = parse(text).map_err(|e| CliError::Input(format!("--expr: {e}")))?;
    let chart = m.canonical_chart().map_err(math)?;
    let d = virasoro::build_dlambda(&chart, cfg.periods()?.as_ref()).map_err(math)?;
    let mut r = Report::new("poles", &cfg.name);
    let image = d.apply(&f).map_err(math)?;
    let profile = virasoro::pole_profile(&d, &f).map_err(math)?;
    r.put("f", json!(f.to_string()));
    r.put("d_lambda_f", json!(image.to_string()));
    r.check(
        "profile",
        profile.ok(),
        serde_json::to_value(&profile).expect("serializable"),
    );
    Ok(r)
}

fn cmd_integrate(
    cfg: Option<&ManifoldConfig>,
    text: &str,
    double: bool,
) -> Result<Report, CliError> {
    let name = cfg.map(|c| c.name.as_str()).unwrap_or("-");
    let mut r = Report::new("integrate", name);
    let parts: Vec<Expr> = text
        .split(';')
        .map(|s| parse(s.trim()).map_err(|e| CliError::Input(format!("--expr: {e}"))))
        .collect::<Result<_, _>>()?;
    if double {
        let cfg = cfg.expect("loaded for --double");
        let m = manifold(cfg)?;
        if parts.len() != m.n() {
            return Err(CliError::Input(format!(
                "--double needs {} components, got {}",
                m.n(),
                parts.len()
            )));
        }
        let di = jetcalc::double_integrate_t(&parts, &m.eta[0]).map_err(math)?;
        r.put("input", strings(&parts));
        r.put("t", json!(di.t.to_string()));
        r.check(
            "order_drop",
            di.order_drop_ok(),
            json!({ "ok": di.order_drop_ok(), "order_in": di.order_in, "order_out": di.order_out }),
        );
    } else {
        let [f] = parts.as_slice() else {
            return Err(CliError::Input(
                "--expr takes one expression without --double".into(),
            ));
        };
        let g = jetcalc::integrate_x(f).map_err(math)?;
        let ok = dx(&g) == *f;
        r.put("input", json!(f.to_string()));
        r.put("antiderivative", json!(g.to_string()));
        r.check("round_trip", ok, json!({ "ok": ok }));
    }
    Ok(r)
}
