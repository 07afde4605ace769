//! Stratified cross-validation with inner-holdout grid search.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wl2gnn::graphs::Dataset;
use wl2gnn::layers::{LayerKind, ModelInput, ModelSpec};
use wl2gnn::tensor::Tensor;

use crate::train::{accuracy, fit, predict, Fit, TrainConfig};
use crate::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub dataset: String,
    pub fold: usize,
    pub repeat: usize,
    pub spec: ModelSpec,
    /// Accuracy on the graphs the final model was fitted on.
    pub train_acc: f64,
    pub test_acc: f64,
    pub epochs: usize,
    pub seconds: f64,
}

/// One CSV row; `params` is the full spec string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: String,
    pub model: String,
    pub params: String,
    pub fold: usize,
    pub repeat: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    pub epochs: usize,
    pub seconds: f64,
}

impl From<&FoldResult> for ResultRecord {
    fn from(r: &FoldResult) -> Self {
        ResultRecord {
            dataset: r.dataset.clone(),
            model: r.spec.layer.name().to_string(),
            params: r.spec.to_string(),
            fold: r.fold,
            repeat: r.repeat,
            train_acc: r.train_acc,
            test_acc: r.test_acc,
            epochs: r.epochs,
            seconds: r.seconds,
        }
    }
}

pub fn write_results<W: Write>(out: W, results: &[FoldResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(ResultRecord::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: std::io::Read>(input: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(BenchError::from))
        .collect()
}

/// Splits indices into `k` folds, dealing each class round-robin after a
/// seeded shuffle so that every fold's class counts are within one graph of
/// the global ratio. Folds are sorted.
pub fn stratified_folds(labels: &[u8], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Stratified split of `indices` into `(train, holdout)`, holding out
/// `round(fraction * count)` graphs of each class, but at least one from
/// every class with two or more members. A zero fraction holds out nothing.
pub fn holdout_split(indices: &[usize], labels: &[u8], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut train, mut hold) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut members: Vec<usize> = indices.iter().copied().filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        let mut take = (fraction * members.len() as f64).round() as usize;
        if fraction > 0.0 && members.len() >= 2 {
            take = take.clamp(1, members.len() - 1);
        } else {
            take = 0;
        }
        hold.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    hold.sort_unstable();
    (train, hold)
}

/// Sorted stratified sample of `count` indices keeping the class ratio,
/// rounded per class.
pub fn stratified_subsample(labels: &[u8], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let count = count.min(labels.len());
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let want_pos = ((count as f64) * positives as f64 / labels.len().max(1) as f64).round() as usize;
    let want = [count - want_pos.min(count), want_pos.min(count)];
    let mut out = Vec::with_capacity(count);
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        out.extend(members.into_iter().take(want[class as usize]));
    }
    out.sort_unstable();
    out
}

/// Specs sharing a key share per-graph inputs.
fn input_key(spec: &ModelSpec) -> (u8, usize) {
    match spec.layer {
        LayerKind::Wl2 => (0, spec.radius),
        LayerKind::Gin | LayerKind::Baseline => (1, 0),
        LayerKind::Gnn2 => (2, 0),
    }
}

/// Per-graph model inputs for every distinct input key of the grid.
pub struct InputCache {
    inputs: HashMap<(u8, usize), Vec<ModelInput>>,
}

impl InputCache {
    pub fn build(dataset: &Dataset, grid: &[ModelSpec]) -> Result<Self> {
        let mut inputs = HashMap::new();
        for spec in grid {
            let key = input_key(spec);
            if inputs.contains_key(&key) {
                continue;
            }
            let per_graph = dataset
                .graphs
                .par_iter()
                .map(|g| ModelInput::build(spec, std::slice::from_ref(g)))
                .collect::<wl2gnn::Result<Vec<_>>>()?;
            inputs.insert(key, per_graph);
        }
        Ok(InputCache { inputs })
    }

    pub fn select(&self, spec: &ModelSpec, indices: &[usize]) -> Vec<&ModelInput> {
        let all = &self.inputs[&input_key(spec)];
        indices.iter().map(|&i| &all[i]).collect()
    }
}

fn task_seed(seed: u64, repeat: usize, fold: usize) -> u64 {
    seed ^ ((repeat as u64) << 40) ^ ((fold as u64) << 20) ^ 0x9e37_79b9_7f4a_7c15
}

fn tensors(fit: &Fit) -> Vec<Tensor> {
    fit.params.iter().map(|(_, t)| t.clone()).collect()
}

/// Runs one outer fold: grid selection on the inner holdout, then
/// evaluation of the selected fit on the test fold. Test indices are only
/// touched after selection.
fn run_fold(
    dataset: &Dataset,
    cache: &InputCache,
    config: &TrainConfig,
    repeat: usize,
    fold: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<FoldResult> {
    let start = Instant::now();
    let labels = &dataset.labels;
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(config.seed, repeat, fold));
    let (inner, hold) = holdout_split(train_idx, labels, config.holdout, &mut rng);
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<u8>>();
    let (inner_y, hold_y) = (pick(&inner), pick(&hold));

    let trials: Vec<(Fit, f64)> = config
        .grid
        .par_iter()
        .enumerate()
        .map(|(cell, spec)| {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(config.seed, repeat, fold) ^ ((cell as u64) << 52));
            let (x, h) = (cache.select(spec, &inner), cache.select(spec, &hold));
            let fitted = fit(spec, (&x, &inner_y), (&h, &hold_y), config, &mut rng)?;
            let score = if hold.is_empty() {
                0.0
            } else {
                accuracy(&predict(spec, &tensors(&fitted), &h, 64)?, &hold_y)
            };
            Ok((fitted, score))
        })
        .collect::<Result<_>>()?;
    // earliest cell wins ties
    let mut chosen = 0;
    for (cell, (_, score)) in trials.iter().enumerate() {
        if *score > trials[chosen].1 {
            chosen = cell;
        }
    }
    let spec = &config.grid[chosen];
    let fitted = &trials[chosen].0;
    let params = tensors(fitted);
    let train_acc = accuracy(&predict(spec, &params, &cache.select(spec, &inner), 64)?, &inner_y);
    let test_acc = accuracy(&predict(spec, &params, &cache.select(spec, test_idx), 64)?, &pick(test_idx));
    Ok(FoldResult {
        dataset: dataset.name.clone(),
        fold,
        repeat,
        spec: spec.clone(),
        train_acc,
        test_acc,
        epochs: fitted.epochs,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Repeated stratified k-fold cross-validation of `config.grid` on
/// `dataset`. Results are ordered by `(repeat, fold)` regardless of the
/// order in which workers finish.
pub fn run_cv(dataset: &Dataset, config: &TrainConfig) -> Result<Vec<FoldResult>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(BenchError::Config("dataset is empty".into()));
    }
    if dataset.labels.iter().all(|&l| l == dataset.labels[0]) {
        return Err(BenchError::Config(format!("{} contains a single class", dataset.name)));
    }
    if dataset.len() < config.folds {
        return Err(BenchError::Config(format!("{} graphs cannot fill {} folds", dataset.len(), config.folds)));
    }
    let cache = InputCache::build(dataset, &config.grid)?;
    let mut tasks = Vec::new();
    for repeat in 0..config.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(config.seed, repeat, usize::MAX >> 44));
        let folds = stratified_folds(&dataset.labels, config.folds, &mut rng);
        let used = config.fold_limit.unwrap_or(config.folds).min(config.folds);
        for (fold, test) in folds.iter().enumerate().take(used) {
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(f, _)| f != fold)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            tasks.push((repeat, fold, train, test.clone()));
        }
    }
    tasks
        .par_iter()
        .map(|(repeat, fold, train, test)| {
            let r = run_fold(dataset, &cache, config, *repeat, *fold, train, test)?;
            log::info!(
                "{} repeat {} fold {}: {} test {:.3} train {:.3} after {} epochs",
                r.dataset,
                r.repeat,
                r.fold,
                r.spec,
                r.test_acc,
                r.train_acc,
                r.epochs
            );
            Ok(r)
        })
        .collect()
}

pub fn mean_test_accuracy(results: &[FoldResult]) -> f64 {
    results.iter().map(|r| r.test_acc).sum::<f64>() / results.len().max(1) as f64
}
