use std::io::Write;

use fracdyn::fdesolve::{solve_alpha_system, RhsSpec};
use fracdyn::fracpoly::parse_poly;

use crate::config::RunConfig;
use crate::csvio::open_output;
use crate::error::CliError;
use crate::Common;

pub fn run(common: &Common, rhs: &[String], x0: &[f64]) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags("solve", common)?;
    let order = cfg.order()?;
    if rhs.len() != x0.len() {
        return Err(CliError::input(format!("{} right-hand sides but {} initial values", rhs.len(), x0.len())));
    }
    let polys = rhs
        .iter()
        .enumerate()
        .map(|(i, s)| parse_poly(s, Some(order.value())).map_err(|e| CliError::from(e).context(&format!("rhs {}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    let tr = solve_alpha_system(order, &RhsSpec::Poly(polys), x0, cfg.horizon, cfg.grid_step)?;
    let mut out = open_output(cfg.output.as_deref())?;
    tr.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
