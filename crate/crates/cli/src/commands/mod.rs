pub mod caputo;
pub mod derive;
pub mod ml;
pub mod simulate;
pub mod solve;
pub mod sweep;
pub mod verify;

use std::io::Write;
use std::path::Path;

use crate::csvio::open_output;
use crate::error::CliError;

/// Writes pretty JSON followed by a newline.
pub fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Sub-seed for item `index` of a sweep.
pub fn sub_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
