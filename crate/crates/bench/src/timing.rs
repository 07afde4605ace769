//! Epoch timing on random circulant regular graphs.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wl2gnn::graphs::{random_circulant_regular, Graph};
use wl2gnn::layers::{init_params, LayerKind, ModelInput, ModelSpec};
use wl2gnn::tensor::{AdamState, Tensor};

use crate::train::train_epoch;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub graphs: usize,
    /// Timed epochs; one untimed warm-up epoch runs first.
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            graphs: 100,
            epochs: 100,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Mean rows and reference triples per graph.
    pub m: f64,
    pub gamma: f64,
    pub epoch_seconds: f64,
}

fn constant_features(g: Graph) -> Result<Graph> {
    let n = g.num_vertices();
    Ok(g.with_vertex_features(1, vec![1.0; n])?)
}

/// Mean epoch wall time and encoding sizes for every feasible `(n, d, r)`.
/// Combinations without a circulant `d`-regular graph on `n` vertices are
/// skipped with a warning. Runs serially.
pub fn epoch_timing(ns: &[usize], ds: &[usize], rs: &[usize], spec: &ModelSpec, config: &TimingConfig) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::new();
    for &r in rs {
        for &d in ds {
            for &n in ns {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((n as u64) << 24) ^ ((d as u64) << 12) ^ r as u64);
                let mut graphs = Vec::with_capacity(config.graphs);
                let mut feasible = true;
                for _ in 0..config.graphs {
                    match random_circulant_regular(n, d, &mut rng) {
                        Ok(g) => graphs.push(constant_features(g)?),
                        Err(e) => {
                            log::warn!("skipping n={n} d={d}: {e}");
                            feasible = false;
                            break;
                        }
                    }
                }
                if !feasible || graphs.is_empty() {
                    continue;
                }
                let spec = ModelSpec { radius: r, ..spec.clone() };
                let inputs: Vec<ModelInput> = graphs
                    .iter()
                    .map(|g| ModelInput::build(&spec, std::slice::from_ref(g)))
                    .collect::<wl2gnn::Result<_>>()?;
                let (m, gamma) = inputs.iter().fold((0.0, 0.0), |(m, gm), input| match input {
                    ModelInput::Wl2(enc) => (m + enc.m() as f64, gm + enc.gamma() as f64),
                    ModelInput::Sparse(b) => (m + b.rows() as f64, gm + b.src.len() as f64),
                });
                let count = inputs.len() as f64;
                let refs: Vec<&ModelInput> = inputs.iter().collect();
                let labels: Vec<u8> = (0..refs.len()).map(|_| rng.gen_range(0..=1)).collect();
                let mut params: Vec<Tensor> = init_params(&spec, refs[0].feature_dim(), &mut rng)
                    .into_iter()
                    .map(|(_, t)| t)
                    .collect();
                let mut adam = AdamState::new(spec.lr, &params);
                train_epoch(&spec, &mut params, &mut adam, &refs, &labels, config.batch_size, &mut rng)?;
                let start = Instant::now();
                for _ in 0..config.epochs {
                    train_epoch(&spec, &mut params, &mut adam, &refs, &labels, config.batch_size, &mut rng)?;
                }
                let epoch_seconds = start.elapsed().as_secs_f64() / config.epochs.max(1) as f64;
                log::info!("n={n} d={d} r={r}: gamma {:.0}, {epoch_seconds:.4}s per epoch", gamma / count);
                rows.push(TimingRow {
                    n,
                    d,
                    r: if spec.layer == LayerKind::Wl2 { r } else { 0 },
                    m: m / count,
                    gamma: gamma / count,
                    epoch_seconds,
                });
            }
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-log slope over the points with `x` within a factor of ten of the
/// largest `x`.
pub fn top_decade_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x, y): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter(|(x, _)| **x * 10.0 >= top).map(|(x, y)| (*x, *y)).unzip();
    loglog_slope(&x, &y)
}
