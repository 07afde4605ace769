//! Mini-batch training with Adam, early stopping on holdout loss and
//! best-epoch restore.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use wl2gnn::layers::{forward_model, init_params, ModelInput, ModelSpec};
use wl2gnn::tensor::{AdamState, Tape, Tensor};

use crate::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    /// Training sets smaller than this run full-batch.
    pub full_batch_below: usize,
    pub seed: u64,
    pub grid: Vec<ModelSpec>,
    pub folds: usize,
    /// Fraction of each training fold held out for selection and stopping.
    pub holdout: f64,
    pub repeats: usize,
    /// Run only the first `k` outer folds of each repeat.
    pub fold_limit: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            patience: 100,
            batch_size: 32,
            full_batch_below: 64,
            seed: 0,
            grid: vec![ModelSpec::default()],
            folds: 10,
            holdout: 0.1,
            repeats: 3,
            fold_limit: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.holdout) {
            return fail("holdout fraction must lie in [0, 1)");
        }
        if self.holdout == 0.0 && self.grid.len() > 1 {
            return fail("grid selection needs a positive holdout fraction");
        }
        if self.folds < 2 {
            return fail("at least two folds are needed");
        }
        if self.repeats == 0 || self.batch_size == 0 {
            return fail("repeats and batch size must be positive");
        }
        if self.grid.is_empty() {
            return fail("the grid is empty");
        }
        for spec in &self.grid {
            spec.validate()?;
        }
        Ok(())
    }

    fn batch_for(&self, n: usize) -> usize {
        if n < self.full_batch_below {
            n.max(1)
        } else {
            self.batch_size
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub params: Vec<(String, Tensor)>,
    /// Epochs actually run before stopping.
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_loss: f64,
}

/// Graph logits of `inputs`, evaluated `chunk` graphs at a time.
pub fn predict(spec: &ModelSpec, params: &[Tensor], inputs: &[&ModelInput], chunk: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(inputs.len());
    for part in inputs.chunks(chunk.max(1)) {
        let batch = ModelInput::concat(part)?;
        let mut tape = Tape::new();
        let vars: Vec<_> = params.iter().map(|t| tape.leaf(t.clone())).collect();
        let logits = forward_model(&mut tape, spec, &vars, &batch)?;
        out.extend_from_slice(tape.value(logits).data());
    }
    Ok(out)
}

pub fn accuracy(logits: &[f64], labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = logits.iter().zip(labels).filter(|(&z, &y)| (z > 0.0) == (y == 1)).count();
    hits as f64 / labels.len() as f64
}

/// Mean binary cross-entropy of logits, in the stable form.
pub fn bce(logits: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| z.max(0.0) - z * f64::from(y) + (-z.abs()).exp().ln_1p())
        .sum();
    total / labels.len().max(1) as f64
}

/// One shuffled pass over `inputs` with one Adam step per mini-batch.
/// Returns the mean training loss.
pub fn train_epoch(
    spec: &ModelSpec,
    params: &mut [Tensor],
    adam: &mut AdamState,
    inputs: &[&ModelInput],
    labels: &[u8],
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for chunk in order.chunks(batch_size.max(1)) {
        let parts: Vec<&ModelInput> = chunk.iter().map(|&i| inputs[i]).collect();
        let y: Vec<f64> = chunk.iter().map(|&i| f64::from(labels[i])).collect();
        let batch = ModelInput::concat(&parts)?;
        let mut tape = Tape::new();
        let vars: Vec<_> = params.iter().map(|t| tape.leaf(t.clone())).collect();
        let logits = forward_model(&mut tape, spec, &vars, &batch)?;
        let loss = tape.bce_with_logits(logits, &y)?;
        total += tape.value(loss).get(0, 0) * chunk.len() as f64;
        let grads = tape.backward(loss)?;
        let g: Vec<Tensor> = vars.iter().zip(params.iter()).map(|(&v, p)| grads.wrt(v, p)).collect();
        adam.step(params, &g)?;
    }
    Ok(total / inputs.len().max(1) as f64)
}

/// Trains a fresh model on `train`, stopping once the loss on `holdout`
/// has not improved for `patience` epochs, and returns the best-epoch
/// parameters. With an empty holdout the training loss is monitored.
pub fn fit(
    spec: &ModelSpec,
    train: (&[&ModelInput], &[u8]),
    holdout: (&[&ModelInput], &[u8]),
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Fit> {
    let (inputs, labels) = train;
    let Some(first) = inputs.first() else {
        return Err(BenchError::Config("empty training set".into()));
    };
    let named = init_params(spec, first.feature_dim(), rng);
    let names: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let mut params: Vec<Tensor> = named.into_iter().map(|(_, t)| t).collect();
    let mut adam = AdamState::new(spec.lr, &params);
    let batch = config.batch_for(inputs.len());
    let watch = if holdout.0.is_empty() { train } else { holdout };
    let eval_chunk = config.batch_size.max(64);

    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut epochs = 0;
    for epoch in 0..config.epochs {
        train_epoch(spec, &mut params, &mut adam, inputs, labels, batch, rng)?;
        epochs = epoch + 1;
        let loss = bce(&predict(spec, &params, watch.0, eval_chunk)?, watch.1);
        if !loss.is_finite() {
            log::warn!("{spec}: non-finite holdout loss at epoch {epochs}, stopping");
            break;
        }
        if loss < best.0 {
            best = (loss, epoch, params.clone());
        } else if epoch - best.1 >= config.patience {
            break;
        }
    }
    let (best_loss, best_epoch, params) = best;
    Ok(Fit {
        params: names.into_iter().zip(params).collect(),
        epochs,
        best_epoch,
        best_loss,
    })
}
