use std::io::Write;

use fracdyn::fracpoly::{parse_poly, FracPoly, VarId};
use fracdyn::models::{investment_derive, InvestmentSpec};
use fracdyn::variational::{derive_constrained_el, derive_el, derive_el_discounted, ELSystem, LagrangianSpec};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Common;

/// Number of coordinates used by the polynomials (at least one).
fn dimension(polys: &[&FracPoly]) -> usize {
    polys
        .iter()
        .flat_map(|p| p.vars())
        .filter_map(|v| match v {
            VarId::X(i) | VarId::Y(i) | VarId::Y2(i) | VarId::P(i) => Some(i + 1),
            _ => None,
        })
        .max()
        .unwrap_or(1)
}

fn parse(what: &str, text: &str, alpha: f64) -> Result<FracPoly, CliError> {
    parse_poly(text, Some(alpha)).map_err(|e| CliError::from(e).context(what))
}

pub fn derive(cfg: &RunConfig, lagrangian: &str, constraint: Option<&str>, accumulation: Option<&str>) -> Result<ELSystem, CliError> {
    let order = cfg.order()?;
    let a = order.value();
    let base = parse("lagrangian", lagrangian, a)?;
    let rho = cfg.rho;
    if let Some(acc) = accumulation {
        let phi = parse("accumulation", acc, a)?;
        let spec = InvestmentSpec::new(base, phi, rho.unwrap_or(0.0), order)?.strict(cfg.strict_paper);
        return Ok(investment_derive(&spec)?);
    }
    match constraint {
        Some(c) => {
            let f = parse("constraint", c, a)?;
            let n = dimension(&[&base, &f]);
            let l = match rho {
                Some(r) => LagrangianSpec::discounted(base, r, n, order)?,
                None => LagrangianSpec::new(base, n, order)?,
            };
            Ok(derive_constrained_el(&l, &f)?)
        }
        None => {
            let n = dimension(&[&base]);
            match rho {
                Some(r) => {
                    // scaled by -Gamma(1+a) into the closed-form normalisation
                    let mut el = derive_el_discounted(&LagrangianSpec::discounted(base, r, n, order)?)?;
                    let g = -order.gamma_factor();
                    el.residuals = el.residuals.iter().map(|p| p.scale(g)).collect();
                    Ok(el)
                }
                None => Ok(derive_el(&LagrangianSpec::new(base, n, order)?)?),
            }
        }
    }
}

pub fn run(common: &Common, lagrangian: &str, constraint: Option<&str>, accumulation: Option<&str>) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags("derive", common)?;
    let el = derive(&cfg, lagrangian, constraint, accumulation)?;
    let mut text = String::new();
    for r in &el.residuals {
        let lhs = if r.is_zero() { "0".to_string() } else { r.to_text(Some(el.order.value())) };
        text.push_str(&format!("{lhs} = 0\n"));
    }
    let json = el.to_json();
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    match &cfg.output {
        Some(p) => super::write_json(Some(p), &json)?,
        None => {
            serde_json::to_writer_pretty(&mut stdout, &json)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}
