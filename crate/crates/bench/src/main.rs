use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wl2gnn::encoding::Wl2Encoding;
use wl2gnn::graphs::{generate_triangle_dataset, load_tu_dataset, write_tu_dataset, TriangleConfig};
use wl2gnn::layers::{LayerKind, ModelSpec};
use wl2gnn_bench::cv::{mean_test_accuracy, read_results, stratified_subsample, write_results};
use wl2gnn_bench::timing::{epoch_timing, TimingConfig};
use wl2gnn_bench::{default_radius, foldwise_deltas, run_cv, TrainConfig};

#[derive(Parser)]
#[command(name = "wl2gnn", about = "Train and benchmark 2-WL graph neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a TU dataset and write the batch encoding to a file.
    Encode {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated stratified cross-validation with grid search.
    Cv {
        #[arg(long)]
        dataset: PathBuf,
        /// One model spec per line; defaults to the built-in spec.
        #[arg(long)]
        grid_file: Option<PathBuf>,
        /// Radius for every wl2 spec, overriding the grid file.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        epochs: usize,
        #[arg(long, default_value_t = 100)]
        patience: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Run only the first k folds of each repeat.
        #[arg(long)]
        fold_limit: Option<usize>,
        /// Stratified subsample of this many graphs.
        #[arg(long)]
        subsample: Option<usize>,
    },
    /// Mean epoch time and encoding size on random circulant regular graphs.
    Timing {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        r: Vec<usize>,
        #[arg(long, default_value = "layer=wl2 T=3 d=32 act=relu")]
        spec: String,
        #[arg(long, default_value_t = 100)]
        graphs: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fold-wise test accuracy differences between two result files.
    Deltas {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Generate the unicolored-triangle dataset in TU format.
    GenTriangle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 6)]
        min_vertices: usize,
        #[arg(long, default_value_t = 32)]
        max_vertices: usize,
        #[arg(long, default_value_t = 3)]
        samples_per_cell: usize,
    },
}

fn has_radius(line: &str) -> bool {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .any(|t| t.starts_with("r=") || t.starts_with("radius="))
}

/// Grid specs with the radius resolved: the command-line value wins, then
/// the line's own `r`, then the dataset default.
fn load_grid(file: Option<&Path>, radius: Option<usize>, dataset: &str) -> Result<Vec<ModelSpec>> {
    let text = match file {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::from("layer=wl2"),
    };
    let mut grid = Vec::new();
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
        let mut spec = ModelSpec::parse(line)?;
        if spec.layer == LayerKind::Wl2 {
            if let Some(r) = radius.or_else(|| (!has_radius(line)).then(|| default_radius(dataset)).flatten()) {
                spec.radius = r;
            }
        }
        spec.validate()?;
        grid.push(spec);
    }
    if grid.is_empty() {
        bail!("the grid is empty");
    }
    Ok(grid)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Encode { dataset, radius, out } => {
            let ds = load_tu_dataset(&dataset)?;
            let r = radius.or_else(|| default_radius(&ds.name)).unwrap_or(1);
            let enc = Wl2Encoding::encode_batch(&ds.graphs, r)?;
            enc.write(&out)?;
            println!("{}: {} graphs, r={r}, m={}, gamma={}", ds.name, ds.len(), enc.m(), enc.gamma());
        }
        Command::Cv {
            dataset,
            grid_file,
            radius,
            seed,
            out,
            epochs,
            patience,
            batch_size,
            folds,
            repeats,
            fold_limit,
            subsample,
        } => {
            let mut ds = load_tu_dataset(&dataset)?;
            if let Some(count) = subsample {
                let idx = stratified_subsample(&ds.labels, count, &mut ChaCha8Rng::seed_from_u64(seed));
                ds = ds.subset(&idx);
            }
            let config = TrainConfig {
                epochs,
                patience,
                batch_size,
                seed,
                grid: load_grid(grid_file.as_deref(), radius, &ds.name)?,
                folds,
                repeats,
                fold_limit,
                ..TrainConfig::default()
            };
            let results = run_cv(&ds, &config)?;
            write_results(File::create(&out).with_context(|| format!("creating {}", out.display()))?, &results)?;
            println!("{}: mean test accuracy {:.4} over {} folds", ds.name, mean_test_accuracy(&results), results.len());
        }
        Command::Timing { n, d, r, spec, graphs, epochs, seed, out } => {
            let spec = ModelSpec::parse(&spec)?;
            let config = TimingConfig { graphs, epochs, seed, ..TimingConfig::default() };
            let rows = epoch_timing(&n, &d, &r, &spec, &config)?;
            let mut w = csv::Writer::from_path(&out)?;
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
            println!("{} timing rows written to {}", rows.len(), out.display());
        }
        Command::Deltas { a, b } => {
            let open = |p: &Path| -> Result<_> {
                Ok(read_results(File::open(p).with_context(|| format!("opening {}", p.display()))?)?)
            };
            let d = foldwise_deltas(&open(&a)?, &open(&b)?)?;
            println!(
                "folds {}  mean delta {:+.4}  std {:.4}  significant {}",
                d.folds, d.mean, d.std, d.significant
            );
        }
        Command::GenTriangle { seed, out_dir, min_vertices, max_vertices, samples_per_cell } => {
            if min_vertices > max_vertices {
                bail!("min-vertices exceeds max-vertices");
            }
            let config = TriangleConfig {
                vertex_counts: (min_vertices..=max_vertices).collect(),
                samples_per_cell,
                ..TriangleConfig::default()
            };
            let generated = generate_triangle_dataset(&config, seed)?;
            write_tu_dataset(&generated.dataset, &out_dir)?;
            println!(
                "{} graphs written to {} ({} cells skipped)",
                generated.dataset.len(),
                out_dir.display(),
                generated.skipped.len()
            );
        }
    }
    Ok(())
}
