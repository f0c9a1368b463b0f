use fracdyn::fdesolve::node_count;
use fracdyn::specfun::{mittag_leffler, ml_discount};

use crate::config::RunConfig;
use crate::csvio::{open_output, write_table};
use crate::error::CliError;
use crate::Common;

pub fn run(common: &Common, z: &[f64]) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags("ml", common)?;
    let order = cfg.order()?;
    let out = open_output(cfg.output.as_deref())?;
    if !z.is_empty() {
        let rows = z.iter().map(|&z| Ok(vec![z, mittag_leffler(order, z)?])).collect::<Result<Vec<_>, CliError>>()?;
        return write_table(out, &["z", "value"], rows);
    }
    let nodes = node_count(cfg.horizon, cfg.grid_step)?;
    let rows = (0..nodes)
        .map(|k| {
            let t = k as f64 * cfg.grid_step;
            Ok(vec![t, ml_discount(order, cfg.rho(), t)?])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_table(out, &["t", "discount"], rows)
}
