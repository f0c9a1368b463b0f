use std::path::Path;

use fracdyn::exec::Exec;

use crate::config::RunConfig;
use crate::csvio::{open_output, write_table};
use crate::error::CliError;
use crate::Common;

use super::simulate::simulate;

/// One row per order: the order, the final state and the main residual.
pub fn run(common: &Common, config: &Path, alphas: &[f64]) -> Result<(), CliError> {
    let base = RunConfig::load("sweep-alpha", config, common)?;
    let runs = Exec::default().map(alphas.len(), |i| {
        let mut cfg = base.clone();
        cfg.alpha = Some(alphas[i]);
        simulate(&cfg).map_err(|e| e.context(&format!("alpha = {}", alphas[i])))
    });
    let mut rows = Vec::with_capacity(runs.len());
    let mut dim = None;
    for (&a, run) in alphas.iter().zip(runs) {
        let o = run?;
        let k = o.traj.len() - 1;
        dim.get_or_insert(o.traj.dim());
        let mut row = vec![a];
        row.extend(o.traj.x.iter().map(|c| c[k]));
        row.push(o.headline);
        rows.push(row);
    }
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=dim.unwrap_or(0)).map(|i| format!("x_{i}_end")));
    header.push("residual".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(open_output(base.output.as_deref())?, &header, rows)
}
