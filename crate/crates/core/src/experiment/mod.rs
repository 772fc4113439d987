//! Experiment grid: configuration, dataset loading and report emission.

mod config;
mod run;

pub use config::{DatasetSource, ExperimentConfig, Mode};
pub use run::{
    cmd_embed, cmd_fixtures, cmd_gain, cmd_run, cmd_stats, cmd_sweep_walklength, embed_table,
    load_dataset, run_grid, summary_csv, sweep_csv, sweep_walklength, CellKey, CellResult, Dataset,
    RunOutput, SweepRow,
};
