use std::path::Path;

use fracdyn::gridops::{caputo_left, caputo_right, first_derivative, SampledFunction};

use crate::config::RunConfig;
use crate::csvio::{open_output, read_two_column, uniform_step, write_table};
use crate::error::CliError;
use crate::{Common, Side};

pub fn run(common: &Common, input: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags("caputo", common)?;
    let alpha = cfg.alpha()?;
    let (t, f) = read_two_column(input)?;
    let step = uniform_step(&t)?;
    let side = common.order_side.unwrap_or(Side::Left);
    let values = if alpha == 1.0 {
        let d = first_derivative(&f, step);
        match side {
            Side::Left => d,
            Side::Right => d.into_iter().map(|v| -v).collect(),
        }
    } else {
        let s = SampledFunction::new(t[0], step, f)?;
        match side {
            Side::Left => caputo_left(&s, alpha)?,
            Side::Right => caputo_right(&s, alpha)?,
        }
        .into_values()
    };
    let out = open_output(cfg.output.as_deref())?;
    write_table(out, &["t", "value"], t.iter().zip(values).map(|(&t, v)| vec![t, v]))
}
