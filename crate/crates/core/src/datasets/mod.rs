//! Synthetic rock-paper-scissors data and CSV import/export.

mod csv_io;
mod rps;

pub use csv_io::{
    read_edges_csv, read_nodes_csv, read_predictions_csv, write_edges_csv, write_nodes_csv,
    write_predictions_csv, PredictionRow,
};
pub use rps::{gen_rps, simulate_game, win_probability, Move, RpsConfig, RpsData};
