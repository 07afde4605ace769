//! Hand-built 2-WL networks: the stack that reproduces a weighted
//! vertex-sum network (GIN, GCN) exactly, and the one-layer model that
//! separates the six-cycle from two triangles.

use super::{LayerKind, ModelSpec, Pooling, Wl2LayerParams};
use crate::encoding::Wl2Encoding;
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::tensor::{Activation, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseLayer {
    pub fn new(w: Tensor, b: Tensor) -> Result<Self> {
        if b.rows() != 1 || b.cols() != w.cols() {
            return Err(Error::shape("DenseLayer", format!("bias {:?} for weights {:?}", b.shape(), w.shape())));
        }
        Ok(DenseLayer { w, b })
    }
}

/// Weights `w_ii` and `w_ij` of a vertex neighborhood sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumWeights {
    /// `w_ii = 1 + ε`, `w_ij = 1`.
    Gin { eps: f64 },
    /// Symmetric normalisation `(deg_i + 1)^{-1/2} (deg_j + 1)^{-1/2}`.
    Gcn,
}

impl SumWeights {
    /// Self weights per vertex and weights per edge of `g` in canonical
    /// order.
    pub fn of(&self, g: &Graph) -> (Vec<f64>, Vec<f64>) {
        match *self {
            SumWeights::Gin { eps } => (vec![1.0 + eps; g.num_vertices()], vec![1.0; g.num_edges()]),
            SumWeights::Gcn => {
                let inv: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / ((d + 1) as f64).sqrt()).collect();
                (
                    inv.iter().map(|x| x * x).collect(),
                    g.edges().iter().map(|&(i, j)| inv[i] * inv[j]).collect(),
                )
            }
        }
    }
}

/// Vertex network whose layer `t` computes
/// `MLP_t(w_ii z[v_i] + Σ_j w_ij z[v_j])`, each MLP layer followed by `act`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSumNet {
    pub input_dim: usize,
    pub weights: SumWeights,
    pub layers: Vec<Vec<DenseLayer>>,
    pub act: Activation,
}

impl WeightedSumNet {
    fn widths(&self) -> Result<Vec<usize>> {
        let mut widths = vec![self.input_dim];
        for (t, mlp) in self.layers.iter().enumerate() {
            let mut d = *widths.last().expect("nonempty");
            for (k, layer) in mlp.iter().enumerate() {
                if layer.w.rows() != d || layer.b.shape() != (1, layer.w.cols()) {
                    return Err(Error::shape(
                        "WeightedSumNet",
                        format!("layer {t}, MLP layer {k}: weights {:?} on width {d}", layer.w.shape()),
                    ));
                }
                d = layer.w.cols();
            }
            widths.push(d);
        }
        Ok(widths)
    }

    /// Vertex features after every layer, by direct evaluation.
    pub fn evaluate(&self, g: &Graph) -> Result<Vec<Tensor>> {
        self.widths()?;
        if g.vertex_dim() != self.input_dim {
            return Err(Error::shape("WeightedSumNet::evaluate", "vertex feature width differs from the network input"));
        }
        let (own, edge) = self.weights.of(g);
        let n = g.num_vertices();
        let mut z = Tensor::new(n, g.vertex_dim(), g.vertex_features().to_vec())?;
        let mut out = Vec::with_capacity(self.layers.len());
        for mlp in &self.layers {
            let mut agg = Tensor::zeros(n, z.cols());
            for v in 0..n {
                for (o, x) in agg.row_mut(v).iter_mut().zip(z.row(v)) {
                    *o += own[v] * x;
                }
            }
            for (&(i, j), &w) in g.edges().iter().zip(&edge) {
                for c in 0..z.cols() {
                    let (zi, zj) = (z.get(i, c), z.get(j, c));
                    agg.set(i, c, agg.get(i, c) + w * zj);
                    agg.set(j, c, agg.get(j, c) + w * zi);
                }
            }
            z = agg;
            for layer in mlp {
                let mut y = z.matmul(&layer.w)?;
                for r in 0..y.rows() {
                    for (o, b) in y.row_mut(r).iter_mut().zip(layer.b.data()) {
                        *o = self.act.apply(*o + b);
                    }
                }
                z = y;
            }
            out.push(z.clone());
        }
        Ok(out)
    }
}

/// The radius-1 stack simulating `net`: per vertex layer two summation
/// layers with identity activations, then one gate-free layer per MLP layer
/// that carries the indicator and weight channels through unchanged and
/// uses the indicator as the bias input.
///
/// Feature layout between blocks is `(1[i=j], features, w_ij)`. The MLP
/// layers apply `net.act` to all channels, so only activations that fix 0,
/// 1 and non-negative weights (identity, ReLU) are accepted.
pub fn build_simulation_stack(net: &WeightedSumNet) -> Result<Vec<Wl2LayerParams>> {
    if net.act == Activation::Logistic {
        return Err(Error::domain(
            "the simulation needs an activation fixing the indicator and weight channels (identity or relu)",
        ));
    }
    let widths = net.widths()?;
    let id = Activation::Identity;
    let mut stack = Vec::new();
    for (t, mlp) in net.layers.iter().enumerate() {
        let d = widths[t];
        // first step: (1, x, w) -> (1, A, w, B) with A = x Σ_l w_il, B = 2 w_ii x or w_ij (x_i + x_j)
        let (d_in, d_mid) = (d + 2, 2 * d + 2);
        let mut w_l = Tensor::zeros(d_in, d_mid);
        let mut w_f = Tensor::zeros(d_in, d_mid);
        let mut w_g = Tensor::zeros(d_in, d_mid);
        w_l.set(0, 0, 1.0);
        w_l.set(d + 1, d + 1, 1.0);
        for k in 0..d {
            w_f.set(1 + k, 1 + k, 0.5);
            w_f.set(d + 1, d + 2 + k, 1.0);
            w_g.set(1 + k, d + 2 + k, 1.0);
            w_g.set(d + 1, 1 + k, 1.0);
        }
        stack.push(Wl2LayerParams::new(w_l, w_f, w_g, id, id)?);
        // second step: (1, A, w, B) -> (1, w_ii x_i + Σ_j w_ij x_j, w)
        let mut w_l = Tensor::zeros(d_mid, d_in);
        let mut w_f = Tensor::zeros(d_mid, d_in);
        let mut w_g = Tensor::zeros(d_mid, d_in);
        w_l.set(0, 0, 1.0);
        w_l.set(d + 1, d + 1, 1.0);
        for k in 0..d {
            w_l.set(1 + k, 1 + k, -1.0);
            w_f.set(0, 1 + k, 0.5);
            w_g.set(d + 2 + k, 1 + k, 1.0);
        }
        stack.push(Wl2LayerParams::new(w_l, w_f, w_g, id, id)?);
        for layer in mlp {
            let (a, b) = (layer.w.rows(), layer.w.cols());
            let mut w_l = Tensor::zeros(a + 2, b + 2);
            w_l.set(0, 0, 1.0);
            w_l.set(a + 1, b + 1, 1.0);
            for k in 0..b {
                w_l.set(0, 1 + k, layer.b.get(0, k));
                for r in 0..a {
                    w_l.set(1 + r, 1 + k, layer.w.get(r, k));
                }
            }
            let zeros = Tensor::zeros(a + 2, b + 2);
            stack.push(Wl2LayerParams::new(w_l, zeros.clone(), zeros, net.act, id)?);
        }
    }
    Ok(stack)
}

/// Radius-1 encoding of `g` whose rows hold `(1) ⊕ x[v_i] ⊕ (w_ii)` on
/// self-loops and `(0) ⊕ 0 ⊕ (w_ij)` on edges.
pub fn simulation_input(net: &WeightedSumNet, g: &Graph) -> Result<Wl2Encoding> {
    if g.vertex_dim() != net.input_dim {
        return Err(Error::shape("simulation_input", "vertex feature width differs from the network input"));
    }
    let (own, edge) = net.weights.of(g);
    if net.act == Activation::Relu && own.iter().chain(&edge).any(|&w| w < 0.0) {
        return Err(Error::domain("relu simulation needs non-negative sum weights"));
    }
    let enc = Wl2Encoding::encode(g, 1)?;
    let d = net.input_dim;
    let mut z = Tensor::zeros(enc.m(), d + 2);
    for (row, &(i, j)) in enc.pairs().iter().enumerate() {
        let out = z.row_mut(row);
        if i == j {
            out[0] = 1.0;
            out[1..=d].copy_from_slice(g.vertex_feature(i));
            out[d + 1] = own[i];
        } else {
            let e = g.edge_id(i, j).ok_or_else(|| Error::Corrupt(format!("radius-1 row ({i},{j}) is not an edge")))?;
            out[d + 1] = edge[e];
        }
    }
    enc.with_features(z)
}

/// Reads the simulated vertex features back: the middle channels of the
/// rows whose indicator is 1, in vertex order.
pub fn simulation_readout(enc: &Wl2Encoding, z: &Tensor) -> Result<Tensor> {
    if z.rows() != enc.m() || z.cols() < 2 {
        return Err(Error::shape("simulation_readout", format!("{:?} for m = {}", z.shape(), enc.m())));
    }
    let d = z.cols() - 2;
    let rows: Vec<Vec<f64>> = (0..z.rows())
        .filter(|&r| z.get(r, 0) == 1.0)
        .map(|r| z.row(r)[1..=d].to_vec())
        .collect();
    Tensor::from_rows(&rows).map(|t| if rows.is_empty() { Tensor::zeros(0, d) } else { t })
}

/// Loops read `(1, 0)` and edges `(0, 1)`: vertex feature 1, edge feature 1.
pub fn separating_encoding(g: &Graph) -> Result<Wl2Encoding> {
    let (n, e) = (g.num_vertices(), g.num_edges());
    let g = g
        .clone()
        .with_vertex_features(1, vec![1.0; n])?
        .with_edge_features(1, vec![1.0; e])?;
    Wl2Encoding::encode(&g, 1)
}

/// One radius-1 layer with `W_L = 0`, `W_F = W_Γ = (1, 1)ᵀ`, identity
/// activations and min pooling, read out without a head.
pub fn separating_model() -> (ModelSpec, Vec<(String, Tensor)>) {
    let spec = ModelSpec {
        layer: LayerKind::Wl2,
        depth: 1,
        width: 1,
        radius: 1,
        pool: Pooling::Min,
        act: Activation::Identity,
        act_gamma: Activation::Identity,
        head: false,
        ..ModelSpec::default()
    };
    let params = vec![
        ("conv0.w_l".to_string(), Tensor::zeros(2, 1)),
        ("conv0.w_f".to_string(), Tensor::filled(2, 1, 1.0)),
        ("conv0.w_g".to_string(), Tensor::filled(2, 1, 1.0)),
    ];
    (spec, params)
}
