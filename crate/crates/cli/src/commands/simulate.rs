use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use fracdyn::error::FracError;
use fracdyn::fdesolve::Trajectory;
use fracdyn::fracpoly::parse_poly;
use fracdyn::models::fixtures::{homogeneous_investment, nonhomogeneous_investment, steady_state_investment, INITIAL_STATE, STEADY_STATE_GUESS};
use fracdyn::models::{
    investment_relation_residual, investment_simulate, investment_steady_state, samuelson_residual, samuelson_simulate, InvestmentSpec,
    SamuelsonParams, INITIAL_LAYER,
};
use fracdyn::variational::{legendre, verify_hamilton};

use crate::config::RunConfig;
use crate::csvio::open_output;
use crate::error::CliError;
use crate::Common;

/// Tolerance applied to relative trajectory residuals in summaries.
pub const RESIDUAL_TOL: f64 = 1e-2;

const SAMUELSON_KEYS: &[&str] = &["model", "a1", "a2", "a3", "x0", "v0"];
const INVESTMENT_KEYS: &[&str] = &["model", "fixture", "l1", "phi", "r", "k0", "i0", "n0"];

pub struct Outcome {
    pub traj: Trajectory,
    pub summary: Value,
    /// Main residual of the run; NaN when it could not be computed.
    pub headline: f64,
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.text("model") {
        Some("samuelson") => samuelson(cfg),
        Some("investment") => investment(cfg),
        Some(other) => Err(CliError::input(format!("unknown model '{other}' (expected samuelson or investment)"))),
        None => Err(CliError::input("config needs model = samuelson | investment")),
    }
}

fn final_state(tr: &Trajectory) -> Value {
    let k = tr.len() - 1;
    let mut m = Map::new();
    m.insert("t".into(), json!(tr.time(k)));
    for (i, c) in tr.x.iter().enumerate() {
        m.insert(format!("x_{}", i + 1), json!(c[k]));
    }
    for (i, c) in tr.v.iter().enumerate() {
        m.insert(format!("v_{}", i + 1), json!(c[k]));
    }
    if let Some(l) = &tr.lambda {
        m.insert("lambda".into(), json!(l[k]));
    }
    Value::Object(m)
}

fn samuelson(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.reject_unknown(SAMUELSON_KEYS)?;
    let order = cfg.order()?;
    let (a1, a2, a3) = (cfg.real("a1", 0.5)?, cfg.real("a2", 0.2)?, cfg.real("a3", 0.5)?);
    let p = SamuelsonParams::new(a1, a2, a3, cfg.rho(), order)?;
    let (x0, v0) = (cfg.real("x0", 1.0)?, cfg.real("v0", 0.5)?);
    let tr = samuelson_simulate(&p, x0, v0, cfg.horizon, cfg.grid_step)?;
    let t_min = INITIAL_LAYER * cfg.horizon;
    let el = samuelson_residual(&p, &tr, t_min)?;
    let mut residuals = Map::new();
    residuals.insert("euler_lagrange".into(), json!({ "max": el.max, "mean": el.mean, "t_min": t_min }));
    match legendre(&p.lagrangian()).and_then(|h| verify_hamilton(&tr, &h)) {
        Ok(rep) => {
            for (name, s) in rep.residuals {
                residuals.insert(name, json!({ "max": s.max, "mean": s.mean, "pass": s.max <= RESIDUAL_TOL }));
            }
        }
        Err(e) => {
            residuals.insert("hamilton_skipped".into(), json!(e.to_string()));
        }
    }
    let summary = json!({
        "model": "samuelson",
        "alpha": order.value(),
        "rho": cfg.rho(),
        "a1": a1, "a2": a2, "a3": a3,
        "horizon": cfg.horizon,
        "grid_step": cfg.grid_step,
        "nodes": tr.len(),
        "final": final_state(&tr),
        "residuals": residuals,
    });
    Ok(Outcome { traj: tr, summary, headline: el.max })
}

fn investment(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.reject_unknown(INVESTMENT_KEYS)?;
    let order = cfg.order()?;
    let rho = cfg.rho();
    let fixture = cfg.text("fixture");
    let mut spec = match (fixture, cfg.text("l1"), cfg.text("phi")) {
        (Some("homogeneous"), None, None) => homogeneous_investment(order, rho)?,
        (Some("nonhomogeneous"), None, None) => nonhomogeneous_investment(order, rho)?,
        (Some("steady_state"), None, None) => {
            if rho != 0.0 {
                return Err(CliError::input("the steady_state fixture is undiscounted; drop rho"));
            }
            steady_state_investment(order)?
        }
        (Some(other), None, None) => return Err(CliError::input(format!("unknown fixture '{other}'"))),
        (None, Some(l), Some(f)) => {
            let a = Some(order.value());
            let l1 = parse_poly(l, a).map_err(|e| CliError::from(e).context("l1"))?;
            let phi = parse_poly(f, a).map_err(|e| CliError::from(e).context("phi"))?;
            InvestmentSpec::new(l1, phi, rho, order)?
        }
        _ => return Err(CliError::input("give either fixture or both l1 and phi")),
    };
    if cfg.params.contains_key("r") {
        spec = spec.with_degree(cfg.real("r", 0.0)?);
    }
    spec = spec.strict(cfg.strict_paper);
    let given = ["k0", "i0", "n0"].iter().any(|k| cfg.params.contains_key(*k));
    let start = if fixture == Some("steady_state") && !given {
        let z = investment_steady_state(&spec, STEADY_STATE_GUESS)?;
        (z[0], z[1], z[2])
    } else {
        (cfg.real("k0", INITIAL_STATE.0)?, cfg.real("i0", INITIAL_STATE.1)?, cfg.real("n0", INITIAL_STATE.2)?)
    };
    let tr = investment_simulate(&spec, start.0, start.1, start.2, cfg.horizon, cfg.grid_step)?;
    let t_min = INITIAL_LAYER * cfg.horizon;
    let (relation, headline) = match investment_relation_residual(&tr, &spec) {
        Ok(r) => (json!({ "max": r, "t_min": t_min, "pass": r <= RESIDUAL_TOL }), r),
        Err(FracError::Homogeneity(m)) => (json!({ "skipped": m }), f64::NAN),
        Err(e) => return Err(e.into()),
    };
    let summary = json!({
        "model": "investment",
        "alpha": order.value(),
        "rho": rho,
        "strict_paper": cfg.strict_paper,
        "fixture": fixture,
        "initial": { "k0": start.0, "i0": start.1, "n0": start.2 },
        "horizon": cfg.horizon,
        "grid_step": cfg.grid_step,
        "nodes": tr.len(),
        "final": final_state(&tr),
        "residuals": { "homogeneity_relation": relation },
    });
    Ok(Outcome { traj: tr, summary, headline })
}

/// Summary path: the `summary` key, else the output path with a
/// `.summary.json` extension.
fn summary_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.summary.clone().or_else(|| cfg.output.as_deref().map(|p: &Path| p.with_extension("summary.json")))
}

pub fn run(common: &Common, config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load("simulate", config, common)?;
    let out = simulate(&cfg)?;
    let mut w = open_output(cfg.output.as_deref())?;
    out.traj.write_csv(&mut w)?;
    w.flush()?;
    match summary_path(&cfg) {
        Some(p) => super::write_json(Some(&p), &out.summary),
        None => {
            let text = serde_json::to_string_pretty(&out.summary)?;
            eprintln!("{text}");
            Ok(())
        }
    }
}
