//! Parameter sweeps over the `mqnmr` model, written as CSV or JSON tables.

pub mod config;
pub mod sweep;
pub mod table;

pub use config::{Format, Grid, GridVar, Mode, Point, SweepArgs, SweepConfig};
pub use sweep::{run, run_chain_sweep, run_entanglement, run_figure1, run_pair_sweep};
pub use table::{Cell, Table};

/// Largest closed-form vs pipeline difference a run may report and still succeed.
pub const DISCREPANCY_LIMIT: f64 = 1e-8;

/// Whether a table's discrepancy column (if any) breaks [`DISCREPANCY_LIMIT`].
/// NaN counts as a failure.
pub fn verification_failed(max_discrepancy: Option<f64>) -> bool {
    max_discrepancy.is_some_and(|d| !(d <= DISCREPANCY_LIMIT))
}

/// Encodes a finished table in the configured format.
pub fn render(cfg: &SweepConfig, table: &Table) -> anyhow::Result<String> {
    Ok(match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(cfg)?,
    })
}
