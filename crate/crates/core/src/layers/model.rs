use std::fmt;

use rand::Rng;

use super::{dense, gin_layer, gnn2_layer, pool, wl2_conv, DenseVars, SparseBatch, Wl2LayerVars};
use crate::encoding::Wl2Encoding;
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::tensor::{Activation, Tape, Tensor, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Wl2,
    Gin,
    Gnn2,
    /// Per-vertex MLP followed by pooling; blind to structure.
    Baseline,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Wl2 => "wl2",
            LayerKind::Gin => "gin",
            LayerKind::Gnn2 => "gnn2",
            LayerKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pooling {
    Mean,
    WeightedMean,
    Sum,
    Min,
}

impl Pooling {
    pub fn name(self) -> &'static str {
        match self {
            Pooling::Mean => "mean",
            Pooling::WeightedMean => "weighted_mean",
            Pooling::Sum => "sum",
            Pooling::Min => "min",
        }
    }
}

/// Declarative architecture plus its learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub layer: LayerKind,
    /// Number of convolution layers `T`.
    pub depth: usize,
    pub width: usize,
    /// Neighborhood radius of the 2-WL encoding.
    pub radius: usize,
    pub pool: Pooling,
    pub act: Activation,
    pub act_gamma: Activation,
    /// GIN self weight offset.
    pub eps: f64,
    pub lr: f64,
    /// Without the head the pooled vector, of width 1, is the logit.
    pub head: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            layer: LayerKind::Wl2,
            depth: 3,
            width: 32,
            radius: 1,
            pool: Pooling::Mean,
            act: Activation::Logistic,
            act_gamma: Activation::Logistic,
            eps: 0.1,
            lr: 1e-3,
            head: true,
        }
    }
}

impl ModelSpec {
    /// Parses `key=value` pairs separated by whitespace or commas, e.g.
    /// `layer=wl2 T=3 d=32 r=2 pool=mean act=relu lr=1e-3`. Unset keys keep
    /// their defaults; `act` also sets `act_gamma` unless that key is given.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ModelSpec::default();
        let mut gamma_set = false;
        for token in text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("model spec token {token:?} is not key=value")))?;
            let bad = || Error::domain(format!("invalid value {value:?} for model spec key {key:?}"));
            let number = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "layer" => {
                    spec.layer = match value {
                        "wl2" => LayerKind::Wl2,
                        "gin" => LayerKind::Gin,
                        "gnn2" => LayerKind::Gnn2,
                        "baseline" => LayerKind::Baseline,
                        _ => return Err(bad()),
                    }
                }
                "T" | "depth" => spec.depth = number()?,
                "d" | "width" => spec.width = number()?,
                "r" | "radius" => spec.radius = number()?,
                "pool" => {
                    spec.pool = match value {
                        "mean" => Pooling::Mean,
                        "weighted_mean" => Pooling::WeightedMean,
                        "sum" => Pooling::Sum,
                        "min" => Pooling::Min,
                        _ => return Err(bad()),
                    }
                }
                "act" => {
                    spec.act = Activation::parse(value).ok_or_else(bad)?;
                    if !gamma_set {
                        spec.act_gamma = spec.act;
                    }
                }
                "act_gamma" => {
                    spec.act_gamma = Activation::parse(value).ok_or_else(bad)?;
                    gamma_set = true;
                }
                "eps" => spec.eps = value.parse().map_err(|_| bad())?,
                "lr" => spec.lr = value.parse().map_err(|_| bad())?,
                "head" => {
                    spec.head = match value {
                        "mlp" => true,
                        "none" => false,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(Error::domain(format!("unknown model spec key {key:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.width == 0 {
            return Err(Error::domain("model needs T >= 1 and d >= 1"));
        }
        if self.layer == LayerKind::Wl2 && self.radius == 0 {
            return Err(Error::domain("2-WL models need r >= 1"));
        }
        if self.pool == Pooling::WeightedMean && !matches!(self.layer, LayerKind::Wl2 | LayerKind::Gnn2) {
            return Err(Error::domain("weighted mean pooling applies to edge rows (wl2, gnn2)"));
        }
        if !self.head && self.width != 1 {
            return Err(Error::domain("head=none needs d = 1 so the pooled value is the logit"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::domain("learning rate must be positive"));
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "layer={} T={} d={} r={} pool={} act={} act_gamma={} eps={} lr={} head={}",
            self.layer.name(),
            self.depth,
            self.width,
            self.radius,
            self.pool.name(),
            self.act.name(),
            self.act_gamma.name(),
            self.eps,
            self.lr,
            if self.head { "mlp" } else { "none" }
        )
    }
}

/// Input in the layout the spec's layer type consumes.
#[derive(Debug, Clone)]
pub enum ModelInput {
    Wl2(Wl2Encoding),
    Sparse(SparseBatch),
}

impl ModelInput {
    pub fn build(spec: &ModelSpec, gs: &[Graph]) -> Result<Self> {
        Ok(match spec.layer {
            LayerKind::Wl2 => ModelInput::Wl2(Wl2Encoding::encode_batch(gs, spec.radius)?),
            LayerKind::Gin | LayerKind::Baseline => ModelInput::Sparse(SparseBatch::vertices(gs)?),
            LayerKind::Gnn2 => ModelInput::Sparse(SparseBatch::edge_neighborhoods(gs)?),
        })
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            ModelInput::Wl2(e) => e.feature_dim(),
            ModelInput::Sparse(b) => b.features.cols(),
        }
    }

    pub fn num_graphs(&self) -> usize {
        match self {
            ModelInput::Wl2(e) => e.num_graphs(),
            ModelInput::Sparse(b) => b.num_graphs(),
        }
    }

    /// Concatenation of single-graph inputs.
    pub fn concat(parts: &[&ModelInput]) -> Result<Self> {
        if let Some(ModelInput::Wl2(_)) = parts.first() {
            let encs = parts
                .iter()
                .map(|p| match p {
                    ModelInput::Wl2(e) => Ok(e.clone()),
                    ModelInput::Sparse(_) => Err(Error::domain("mixed model inputs")),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(ModelInput::Wl2(Wl2Encoding::concat(&encs)?));
        }
        let batches = parts
            .iter()
            .map(|p| match p {
                ModelInput::Sparse(b) => Ok(b),
                ModelInput::Wl2(_) => Err(Error::domain("mixed model inputs")),
            })
            .collect::<Result<Vec<_>>>()?;
        let cols = batches.first().map_or(0, |b| b.features.cols());
        let mut data = Vec::new();
        let (mut src, mut dst, mut bounds) = (Vec::new(), Vec::new(), vec![0usize]);
        for b in &batches {
            if b.features.cols() != cols {
                return Err(Error::shape("ModelInput::concat", "mixed feature widths"));
            }
            let base = *bounds.last().unwrap();
            data.extend_from_slice(b.features.data());
            src.extend(b.src.iter().map(|x| x + base));
            dst.extend(b.dst.iter().map(|x| x + base));
            bounds.extend(b.bounds[1..].iter().map(|x| x + base));
        }
        let rows = *bounds.last().unwrap();
        Ok(ModelInput::Sparse(SparseBatch {
            features: Tensor::new(rows, cols, data)?,
            src,
            dst,
            bounds,
        }))
    }
}

fn param_shapes(spec: &ModelSpec, input_dim: usize) -> Vec<(String, usize, usize)> {
    let d = spec.width;
    let mut shapes = Vec::new();
    let mut d_in = input_dim;
    for t in 0..spec.depth {
        match spec.layer {
            LayerKind::Wl2 => {
                for m in ["w_l", "w_f", "w_g"] {
                    shapes.push((format!("conv{t}.{m}"), d_in, d));
                }
            }
            LayerKind::Gin => {
                shapes.push((format!("conv{t}.mlp0.w"), d_in, d));
                shapes.push((format!("conv{t}.mlp0.b"), 1, d));
                shapes.push((format!("conv{t}.mlp1.w"), d, d));
                shapes.push((format!("conv{t}.mlp1.b"), 1, d));
            }
            LayerKind::Gnn2 => {
                shapes.push((format!("conv{t}.w"), d_in, d));
                shapes.push((format!("conv{t}.w_g"), d_in, d));
            }
            LayerKind::Baseline => {
                shapes.push((format!("mlp{t}.w"), d_in, d));
                shapes.push((format!("mlp{t}.b"), 1, d));
            }
        }
        d_in = d;
    }
    if spec.pool == Pooling::WeightedMean {
        shapes.push(("pool.score".into(), d, 1));
    }
    if spec.head {
        shapes.push(("head0.w".into(), d, d));
        shapes.push(("head0.b".into(), 1, d));
        shapes.push(("head1.w".into(), d, 1));
        shapes.push(("head1.b".into(), 1, 1));
    }
    shapes
}

/// Named parameters for `spec` on inputs of width `input_dim`: Glorot
/// matrices, zero biases.
pub fn init_params<R: Rng>(spec: &ModelSpec, input_dim: usize, rng: &mut R) -> Vec<(String, Tensor)> {
    param_shapes(spec, input_dim)
        .into_iter()
        .map(|(name, r, c)| {
            let t = if name.ends_with(".b") {
                Tensor::zeros(r, c)
            } else {
                Tensor::glorot(r, c, rng)
            };
            (name, t)
        })
        .collect()
}

/// Graph logits (`graphs x 1`) of the model. `params` are tape handles in
/// [`init_params`] order.
pub fn forward_model<'a>(
    tape: &mut Tape<'a>,
    spec: &ModelSpec,
    params: &[Var],
    input: &'a ModelInput,
) -> Result<Var> {
    let shapes = param_shapes(spec, input.feature_dim());
    if shapes.len() != params.len()
        || shapes.iter().zip(params).any(|((_, r, c), &p)| tape.value(p).shape() != (*r, *c))
    {
        return Err(Error::shape(
            "forward_model",
            format!("parameters do not match spec `{spec}` on inputs of width {}", input.feature_dim()),
        ));
    }
    let mut next = params.iter().copied();
    let mut take = || next.next().expect("shape-checked parameter list");
    let (mut z, bounds) = match (spec.layer, input) {
        (LayerKind::Wl2, ModelInput::Wl2(enc)) => {
            let mut z = tape.leaf(enc.z0().clone());
            for _ in 0..spec.depth {
                let w = Wl2LayerVars {
                    w_l: take(),
                    w_f: take(),
                    w_g: take(),
                };
                z = wl2_conv(tape, enc, z, w, spec.act, spec.act_gamma)?;
            }
            (z, enc.row_bounds())
        }
        (LayerKind::Gin, ModelInput::Sparse(batch)) => {
            let mut z = tape.leaf(batch.features.clone());
            for _ in 0..spec.depth {
                let mlp = [DenseVars { w: take(), b: take() }, DenseVars { w: take(), b: take() }];
                z = gin_layer(tape, batch, z, spec.eps, &mlp, spec.act)?;
            }
            (z, batch.bounds.clone())
        }
        (LayerKind::Gnn2, ModelInput::Sparse(batch)) => {
            let mut z = tape.leaf(batch.features.clone());
            for _ in 0..spec.depth {
                let (w, w_g) = (take(), take());
                z = gnn2_layer(tape, batch, z, w, w_g, spec.act)?;
            }
            (z, batch.bounds.clone())
        }
        (LayerKind::Baseline, ModelInput::Sparse(batch)) => {
            let mut z = tape.leaf(batch.features.clone());
            for _ in 0..spec.depth {
                z = dense(tape, z, DenseVars { w: take(), b: take() }, spec.act)?;
            }
            (z, batch.bounds.clone())
        }
        _ => {
            return Err(Error::domain(format!(
                "input layout does not match layer type {}",
                spec.layer.name()
            )))
        }
    };
    let scores = if spec.pool == Pooling::WeightedMean {
        let w = take();
        Some(tape.matmul(z, w)?)
    } else {
        None
    };
    z = pool(tape, z, &bounds, spec.pool, scores)?;
    if spec.head {
        z = dense(tape, z, DenseVars { w: take(), b: take() }, spec.act)?;
        z = dense(tape, z, DenseVars { w: take(), b: take() }, Activation::Identity)?;
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_display_round_trip() {
        let spec = ModelSpec::parse("layer=wl2, T=3 d=32 r=2 pool=mean act=relu lr=1e-3").unwrap();
        assert_eq!(spec.layer, LayerKind::Wl2);
        assert_eq!((spec.depth, spec.width, spec.radius), (3, 32, 2));
        assert_eq!(spec.act_gamma, Activation::Relu);
        assert_eq!(ModelSpec::parse(&spec.to_string()).unwrap(), spec);
        let mixed = ModelSpec::parse("act_gamma=logistic act=relu").unwrap();
        assert_eq!((mixed.act, mixed.act_gamma), (Activation::Relu, Activation::Logistic));
    }

    #[test]
    fn parse_rejects_bad_specs() {
        for bad in ["layer=gcn", "T=0", "r=0", "pool=max", "depth", "colour=red", "layer=gin pool=weighted_mean", "head=none", "lr=-1"] {
            assert!(ModelSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn forward_checks_parameter_shapes() {
        let spec = ModelSpec::parse("layer=gin T=2 d=4").unwrap();
        let g = crate::graphs::cycle_graph(5).unwrap().with_vertex_features(1, vec![1.0; 5]).unwrap();
        let input = ModelInput::build(&spec, &[g]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = init_params(&spec, 2, &mut rng);
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.into_iter().map(|(_, t)| tape.leaf(t)).collect();
        assert!(forward_model(&mut tape, &spec, &vars, &input).is_err());
        let wrong = ModelInput::build(&ModelSpec::default(), &[crate::graphs::cycle_graph(5).unwrap()]).unwrap();
        let params = init_params(&spec, wrong.feature_dim(), &mut rng);
        let vars: Vec<Var> = params.into_iter().map(|(_, t)| tape.leaf(t)).collect();
        assert!(forward_model(&mut tape, &spec, &vars, &wrong).is_err());
    }
}
