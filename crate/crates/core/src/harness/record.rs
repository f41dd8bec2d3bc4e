use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::RunRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "env,variant,n_sims,seed,episode_return,steps_taken,unique_states,wall_ms";

/// Writes the header and one line per record, floats with 6 decimals.
pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{:.6}",
            r.env, r.variant, r.n_sims, r.seed, r.episode_return, r.steps_taken, r.unique_states, r.wall_ms
        )?;
    }
    out.flush()
}

pub fn write_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, file).map_err(|e| Error::io(path, e))
}
