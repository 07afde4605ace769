//! Experiment harness: cross-validated training with grid search, epoch
//! timing and fold-wise comparisons for the models in [`wl2gnn::layers`].

pub mod cv;
pub mod stats;
pub mod timing;
pub mod train;

use wl2gnn::layers::ModelSpec;

pub use cv::{run_cv, FoldResult, ResultRecord};
pub use stats::{foldwise_deltas, Deltas};
pub use timing::{epoch_timing, TimingConfig, TimingRow};
pub use train::TrainConfig;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] wl2gnn::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("result mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Radius used for a dataset when neither the grid nor the command line
/// sets one.
pub fn default_radius(dataset: &str) -> Option<usize> {
    let r = match dataset.to_ascii_uppercase().as_str() {
        "TRIANGLE" => 2,
        "NCI1" => 8,
        "PROTEINS" => 5,
        "DD" | "D&D" => 2,
        "REDDIT-BINARY" | "REDDIT-B" => 1,
        "IMDB-BINARY" | "IMDB-B" => 4,
        _ => return None,
    };
    Some(r)
}

/// One spec per line; blank lines and `#` comments are skipped.
pub fn parse_grid(text: &str) -> Result<Vec<ModelSpec>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| Ok(ModelSpec::parse(l)?))
        .collect()
}
