//! Runs a cut-down qubit-count sweep of QDeepLog and prints the results table.
//!
//! The built-in presets are available through `qlogad experiment rq2` and
//! friends. This example switches the grid to `R_y` encoding, which unlike
//! `R_x` after a Hadamard actually sees its input, and trims epochs.

use qlogad::encode::EncodingScheme;
use qlogad::harness::{preset, results_table, run_sweep};
use qlogad::models::ModelKind;

fn main() -> qlogad::Result<()> {
    let mut cells = preset("rq2")?;
    cells.retain(|c| c.model.kind == ModelKind::DeepLog);
    for c in &mut cells {
        c.model.circuit.encoding = EncodingScheme::AngleRy;
        c.epochs = 4;
    }
    let results = run_sweep(&cells)?;
    print!("{}", results_table(&results));
    Ok(())
}
