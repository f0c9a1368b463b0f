use fracdyn::exec::Exec;
use serde_json::{json, Value};

use fracdyn::fdesolve::solve_fvf;
use fracdyn::fracpoly::parse_poly;
use fracdyn::gridops::{caputo_left, first_derivative, SampledFunction};
use fracdyn::jetgeo::{interior_product_sweep, pairing_report, SampleBox};
use fracdyn::models::{samuelson_simulate, SamuelsonParams};
use fracdyn::specfun::FracOrder;
use fracdyn::variational::{build_fvf, legendre, verify_hamilton, LagrangianSpec};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{Common, Suite};

use super::simulate::RESIDUAL_TOL;
use super::sub_seed;

fn order(a: f64) -> Result<FracOrder, CliError> {
    FracOrder::new_or_classical(a).map_err(|_| CliError::input(format!("alpha must lie in (0, 1) or equal 1, got {a}")))
}

fn check(name: &str, max: f64, mean: f64, pass: Option<bool>) -> Value {
    let mut v = json!({ "check": name, "max_residual": max, "mean_residual": mean });
    if let Some(p) = pass {
        v["pass"] = json!(p);
    }
    v
}

fn stats(errs: &[f64]) -> (f64, f64) {
    let max = errs.iter().fold(0.0f64, |m, v| m.max(*v));
    (max, errs.iter().sum::<f64>() / errs.len().max(1) as f64)
}

/// Pairing tables for n = 1, 2, 3 and the interior-product sweep on the
/// quadratic discounted Lagrangian with coefficients (0.5, 1, 0.5).
fn geometry(a: f64, rho: f64, points: usize, seed: u64) -> Result<Value, CliError> {
    let o = order(a)?;
    let mut checks: Vec<Value> = (1..=3)
        .map(|n| {
            let mut r = pairing_report(o, n).to_json();
            r["check"] = json!(format!("pairing_n{n}"));
            r
        })
        .collect();
    let l1 = parse_poly("-0.5 * y_1^(2*a) - 1 * y_1^a * x_1^a - 0.5 * x_1^(2*a)", Some(a))?;
    let l = LagrangianSpec::discounted(l1, rho, 1, o)?;
    checks.push(interior_product_sweep(&l, points, seed, SampleBox::default(), Exec::default())?.to_json());
    Ok(json!({ "alpha": a, "seed": seed, "checks": checks }))
}

/// Hamilton and bracket residuals along the trajectory of
/// L = -0.5 y^2 - 0.3 x y - 0.5 x^2 from x = 1, D^a x = 0.2.
fn brackets(a: f64, horizon: f64, step: f64) -> Result<Value, CliError> {
    let o = order(a)?;
    let base = parse_poly("-0.5 * y_1^2 - 0.3 * x_1 * y_1 - 0.5 * x_1^2", Some(a))?;
    let l = LagrangianSpec::new(base, 1, o)?;
    let mut tr = solve_fvf(o, &build_fvf(&l)?.rhs(), &[1.0], &[0.2], horizon, step)?;
    let ham = legendre(&l)?;
    ham.attach_momenta(&mut tr)?;
    let rep = verify_hamilton(&tr, &ham)?;
    let checks: Vec<Value> = rep.residuals.iter().map(|(name, s)| check(name, s.max, s.mean, Some(s.max <= RESIDUAL_TOL))).collect();
    Ok(json!({ "alpha": a, "grid_step": step, "checks": checks }))
}

/// Distances to the classical answers: L1 derivative of sin against cos
/// (h = 1/1024, nodes t >= h) and a Samuelson trajectory against its order-1 counterpart.
fn limits(a: f64, rho: f64, step: f64) -> Result<(Value, f64, f64), CliError> {
    let o = order(a)?;
    let h = 1.0 / 1024.0;
    let f = SampledFunction::from_fn(0.0, h, 1025, f64::sin)?;
    let d = if o.is_classical() { first_derivative(f.values(), h) } else { caputo_left(&f, a)?.into_values() };
    // node 0 carries the convention value 0, where cos is 1 for every order
    let errs: Vec<f64> = f.times().iter().zip(&d).skip(1).map(|(t, v)| (v - t.cos()).abs()).collect();
    let (cmax, cmean) = stats(&errs);
    let p = |o| SamuelsonParams::new(0.5, 0.2, 0.5, rho, o);
    let tr = samuelson_simulate(&p(o)?, 1.0, 0.5, 1.0, step)?;
    let reference = samuelson_simulate(&p(FracOrder::classical())?, 1.0, 0.5, 1.0, step)?;
    let scale = reference.x[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dist: Vec<f64> = tr.x[0].iter().zip(&reference.x[0]).map(|(u, v)| (u - v).abs() / scale).collect();
    let (smax, smean) = stats(&dist);
    let checks = vec![check("caputo_sin_vs_cos", cmax, cmean, None), check("samuelson_vs_classical", smax, smean, None)];
    Ok((json!({ "alpha": a, "checks": checks }), cmax, smax))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn run(common: &Common, suite: Suite, alpha_list: &[f64], points: usize) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags("verify", common)?;
    let mut alphas: Vec<f64> = if alpha_list.is_empty() {
        match suite {
            Suite::Geometry => vec![0.5, 0.8],
            Suite::Brackets => vec![1.0],
            Suite::Limits => vec![0.9, 0.99, 0.999],
        }
    } else {
        alpha_list.to_vec()
    };
    if let Some(a) = common.alpha {
        if alpha_list.is_empty() {
            alphas = vec![a];
        }
    }
    let mut report = json!({ "suite": format!("{suite:?}").to_lowercase(), "seed": cfg.seed });
    let pass = match suite {
        Suite::Geometry => {
            let rho = cfg.rho.unwrap_or(0.3);
            let entries = Exec::default().try_map(alphas.len(), |i| geometry(alphas[i], rho, points, sub_seed(cfg.seed, i)))?;
            let pass = entries.iter().all(|e| e["checks"].as_array().is_some_and(|c| c.iter().all(|c| c["pass"] == json!(true))));
            report["entries"] = json!(entries);
            pass
        }
        Suite::Brackets => {
            let step = if common.grid_step.is_some() { cfg.grid_step } else { 1.0 / 512.0 };
            let entries = Exec::default().try_map(alphas.len(), |i| brackets(alphas[i], cfg.horizon, step))?;
            let pass = entries.iter().all(|e| e["checks"].as_array().is_some_and(|c| c.iter().all(|c| c["pass"] == json!(true))));
            report["entries"] = json!(entries);
            pass
        }
        Suite::Limits => {
            let mut sorted = alphas.clone();
            sorted.sort_by(f64::total_cmp);
            let rho = cfg.rho.unwrap_or(0.3);
            let results = Exec::default().try_map(sorted.len(), |i| limits(sorted[i], rho, cfg.grid_step))?;
            let caputo: Vec<f64> = results.iter().map(|r| r.1).collect();
            let samuelson: Vec<f64> = results.iter().map(|r| r.2).collect();
            let mono_c = strictly_decreasing(&caputo);
            let mono_s = strictly_decreasing(&samuelson);
            let last_ok = caputo.last().is_some_and(|&c| c <= 1e-2);
            report["entries"] = json!(results.into_iter().map(|r| r.0).collect::<Vec<_>>());
            report["monotone"] = json!({ "caputo_sin_vs_cos": mono_c, "samuelson_vs_classical": mono_s });
            report["final_caputo_within_1e-2"] = json!(last_ok);
            mono_c && mono_s && last_ok
        }
    };
    report["pass"] = json!(pass);
    super::write_json(cfg.output.as_deref(), &report)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} suite", report["suite"].as_str().unwrap_or("?"))))
    }
}
