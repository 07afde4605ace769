//! Graph convolution layers over the tape: the 2-WL convolution (plus a
//! literal reference evaluation), GIN, 2-GNN and graph pooling.

mod model;
mod simulation;

pub use model::{
    forward_model, init_params, LayerKind, ModelInput, ModelSpec, Pooling,
};
pub use simulation::{
    build_simulation_stack, separating_encoding, separating_model, simulation_input, simulation_readout,
    DenseLayer, SumWeights, WeightedSumNet,
};

use std::collections::{BTreeSet, HashMap};

use crate::encoding::Wl2Encoding;
use crate::error::{Error, Result};
use crate::graphs::{edge_neighborhood_graph, Graph};
use crate::tensor::{Activation, Tape, Tensor, Var};

/// Weights of one 2-WL convolution: `d_in x d_out` matrices `W_L`, `W_F`,
/// `W_Γ` and the activations `σ`, `σ_Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wl2LayerParams {
    pub w_l: Tensor,
    pub w_f: Tensor,
    pub w_g: Tensor,
    pub act: Activation,
    pub act_gamma: Activation,
}

impl Wl2LayerParams {
    pub fn new(w_l: Tensor, w_f: Tensor, w_g: Tensor, act: Activation, act_gamma: Activation) -> Result<Self> {
        if w_l.shape() != w_f.shape() || w_l.shape() != w_g.shape() {
            return Err(Error::shape(
                "Wl2LayerParams",
                format!("W_L {:?}, W_F {:?}, W_Γ {:?}", w_l.shape(), w_f.shape(), w_g.shape()),
            ));
        }
        Ok(Wl2LayerParams {
            w_l,
            w_f,
            w_g,
            act,
            act_gamma,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.w_l.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w_l.cols()
    }
}

fn row_times(z: &[f64], w: &Tensor) -> Vec<f64> {
    let mut out = vec![0.0; w.cols()];
    for (k, &zk) in z.iter().enumerate() {
        for (o, wv) in out.iter_mut().zip(w.row(k)) {
            *o += zk * wv;
        }
    }
    out
}

/// Literal evaluation of the 2-WL convolution on one graph power `power`
/// (a graph with a self-loop at every vertex). Rows of `z` follow the
/// encoding layout: self-loops in vertex order, then edges `i < j`
/// lexicographically. Common neighbors come from explicit set intersection.
pub fn wl2_conv_naive(power: &Graph, z: &Tensor, p: &Wl2LayerParams) -> Result<Tensor> {
    let n = power.num_vertices();
    let mut rows: HashMap<(usize, usize), usize> = (0..n).map(|v| ((v, v), v)).collect();
    let mut order: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
    for &(i, j) in power.edges() {
        if i != j {
            rows.insert((i, j), order.len());
            order.push((i, j));
        }
    }
    if z.rows() != order.len() || z.cols() != p.input_dim() {
        return Err(Error::shape(
            "wl2_conv_naive",
            format!("features {:?} for {} rows and input width {}", z.shape(), order.len(), p.input_dim()),
        ));
    }
    let lookup = |a: usize, b: usize| {
        rows.get(&(a.min(b), a.max(b))).copied().ok_or_else(|| {
            Error::Corrupt(format!("no feature row for the pair ({a}, {b})"))
        })
    };
    let neighborhood = |v: usize| power.neighbors(v).iter().copied().collect::<BTreeSet<usize>>();
    let mut out = Tensor::zeros(order.len(), p.output_dim());
    for (row, &(i, j)) in order.iter().enumerate() {
        let zij = z.row(row);
        let local = row_times(zij, &p.w_l);
        let gate = row_times(zij, &p.w_f);
        let mut acc = vec![0.0; p.output_dim()];
        for &l in neighborhood(i).intersection(&neighborhood(j)) {
            let (il, lj) = (lookup(i, l)?, lookup(l, j)?);
            let both: Vec<f64> = z.row(il).iter().zip(z.row(lj)).map(|(a, b)| a + b).collect();
            let msg = row_times(&both, &p.w_g);
            for ((a, f), m) in acc.iter_mut().zip(&gate).zip(msg) {
                *a += f * p.act_gamma.apply(m);
            }
        }
        for (k, o) in out.row_mut(row).iter_mut().enumerate() {
            *o = p.act.apply(local[k] + acc[k]);
        }
    }
    Ok(out)
}

/// Tape handles of one 2-WL layer's matrices.
#[derive(Debug, Clone, Copy)]
pub struct Wl2LayerVars {
    pub w_l: Var,
    pub w_f: Var,
    pub w_g: Var,
}

/// Gather/scatter 2-WL convolution over a (batched) encoding, in the order
/// `Z_L, Z_F, Z_Γ`, the two gathers, `σ_Γ` of their sum and the scatter-sum
/// into target rows (fused into one tape op) and finally `σ(Z_L + Z_F ⊙ Z_ΣΓ)`.
pub fn wl2_conv<'a>(
    tape: &mut Tape<'a>,
    enc: &'a Wl2Encoding,
    z: Var,
    w: Wl2LayerVars,
    act: Activation,
    act_gamma: Activation,
) -> Result<Var> {
    if tape.value(z).rows() != enc.m() {
        return Err(Error::shape(
            "wl2_conv",
            format!("{} feature rows for an encoding with m = {}", tape.value(z).rows(), enc.m()),
        ));
    }
    let z_l = tape.matmul(z, w.w_l)?;
    let z_f = tape.matmul(z, w.w_f)?;
    let z_g = tape.matmul(z, w.w_g)?;
    let z_sum = tape.triple_sum(z_g, enc.r_g1(), enc.r_g2(), enc.r_l(), enc.m(), act_gamma)?;
    let gated = tape.hadamard(z_f, z_sum)?;
    let pre = tape.add(z_l, gated)?;
    Ok(tape.activate(pre, act))
}

/// Evaluates one 2-WL layer without keeping the tape.
pub fn wl2_conv_eval(enc: &Wl2Encoding, z: &Tensor, p: &Wl2LayerParams) -> Result<Tensor> {
    let mut tape = Tape::new();
    let zv = tape.leaf(z.clone());
    let w = Wl2LayerVars {
        w_l: tape.leaf(p.w_l.clone()),
        w_f: tape.leaf(p.w_f.clone()),
        w_g: tape.leaf(p.w_g.clone()),
    };
    let out = wl2_conv(&mut tape, enc, zv, w, p.act, p.act_gamma)?;
    Ok(tape.value(out).clone())
}

/// Rows with a symmetric neighbor relation, batched: the vertices of
/// graphs for GIN and the baseline, or the vertices of edge neighborhood
/// graphs for the 2-GNN. `src[k] -> dst[k]` lists each neighbor relation in
/// both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBatch {
    pub features: Tensor,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    /// Row start of each graph, then the total row count.
    pub bounds: Vec<usize>,
}

impl SparseBatch {
    fn from_parts(parts: &[(Tensor, &Graph)]) -> Result<Self> {
        let cols = parts.first().map_or(0, |(t, _)| t.cols());
        if parts.iter().any(|(t, _)| t.cols() != cols) {
            return Err(Error::shape("SparseBatch", "mixed feature widths"));
        }
        let mut data = Vec::new();
        let (mut src, mut dst, mut bounds) = (Vec::new(), Vec::new(), vec![0]);
        for (features, g) in parts {
            let base = *bounds.last().expect("nonempty");
            data.extend_from_slice(features.data());
            for &(i, j) in g.edges() {
                if i != j {
                    src.extend([base + i, base + j]);
                    dst.extend([base + j, base + i]);
                }
            }
            bounds.push(base + g.num_vertices());
        }
        let rows = *bounds.last().expect("nonempty");
        Ok(SparseBatch {
            features: Tensor::new(rows, cols, data)?,
            src,
            dst,
            bounds,
        })
    }

    /// Vertex rows with the graphs' vertex features.
    pub fn vertices(gs: &[Graph]) -> Result<Self> {
        let parts = gs
            .iter()
            .map(|g| Ok((Tensor::new(g.num_vertices(), g.vertex_dim(), g.vertex_features().to_vec())?, g)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(&parts)
    }

    /// Rows for the vertices and edges of each graph, adjacent as in the edge
    /// neighborhood graph. Features follow the radius-1 2-WL layout.
    pub fn edge_neighborhoods(gs: &[Graph]) -> Result<Self> {
        let derived: Vec<(Tensor, Graph)> = gs
            .iter()
            .map(|g| Ok((Wl2Encoding::encode(g, 1)?.z0().clone(), edge_neighborhood_graph(g))))
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(Tensor, &Graph)> = derived.iter().map(|(t, g)| (t.clone(), g)).collect();
        Self::from_parts(&parts)
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    pub fn num_graphs(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Batch of the selected graphs, in the given order.
    pub fn select(&self, graphs: &[usize]) -> SparseBatch {
        let cols = self.features.cols();
        let mut data = Vec::new();
        let (mut src, mut dst, mut bounds) = (Vec::new(), Vec::new(), vec![0]);
        for &g in graphs {
            let (lo, hi) = (self.bounds[g], self.bounds[g + 1]);
            let base = *bounds.last().expect("nonempty");
            data.extend_from_slice(&self.features.data()[lo * cols..hi * cols]);
            for (&s, &d) in self.src.iter().zip(&self.dst) {
                if s >= lo && s < hi {
                    src.push(s - lo + base);
                    dst.push(d - lo + base);
                }
            }
            bounds.push(base + hi - lo);
        }
        let rows = *bounds.last().expect("nonempty");
        SparseBatch {
            features: Tensor::new(rows, cols, data).expect("consistent rows"),
            src,
            dst,
            bounds,
        }
    }
}

/// `Σ_{u ∈ Γ(v)} z[u]` for every row `v`.
pub fn neighbor_sum<'a>(tape: &mut Tape<'a>, batch: &'a SparseBatch, z: Var) -> Result<Var> {
    let rows = tape.value(z).rows();
    if rows != batch.rows() {
        return Err(Error::shape("neighbor_sum", format!("{rows} rows for a batch of {}", batch.rows())));
    }
    let from = tape.gather(z, &batch.src)?;
    tape.scatter_sum(from, &batch.dst, rows)
}

/// Tape handles of a dense layer `act(x W + b)`.
#[derive(Debug, Clone, Copy)]
pub struct DenseVars {
    pub w: Var,
    pub b: Var,
}

pub fn dense<'a>(tape: &mut Tape<'a>, x: Var, layer: DenseVars, act: Activation) -> Result<Var> {
    let y = tape.matmul(x, layer.w)?;
    let y = tape.add_bias(y, layer.b)?;
    Ok(tape.activate(y, act))
}

/// GIN layer: `MLP((1 + ε) z[v] + Σ_{u ∈ Γ(v)} z[u])`, every MLP layer
/// followed by `act`.
pub fn gin_layer<'a>(
    tape: &mut Tape<'a>,
    batch: &'a SparseBatch,
    z: Var,
    eps: f64,
    mlp: &[DenseVars],
    act: Activation,
) -> Result<Var> {
    let own = tape.scale(z, 1.0 + eps);
    let around = neighbor_sum(tape, batch, z)?;
    let mut x = tape.add(own, around)?;
    for &layer in mlp {
        x = dense(tape, x, layer, act)?;
    }
    Ok(x)
}

/// 2-GNN layer on edge neighborhood rows: `σ(Z W + (Σ_{e' ∈ Γ(e)} Z[e']) W_Γ)`.
pub fn gnn2_layer<'a>(
    tape: &mut Tape<'a>,
    batch: &'a SparseBatch,
    z: Var,
    w: Var,
    w_gamma: Var,
    act: Activation,
) -> Result<Var> {
    let own = tape.matmul(z, w)?;
    let around = neighbor_sum(tape, batch, z)?;
    let around = tape.matmul(around, w_gamma)?;
    let pre = tape.add(own, around)?;
    Ok(tape.activate(pre, act))
}

/// Reduces the rows of each segment to one row. `scores` is the attention
/// column required by [`Pooling::WeightedMean`].
pub fn pool<'a>(
    tape: &mut Tape<'a>,
    z: Var,
    bounds: &[usize],
    mode: Pooling,
    scores: Option<Var>,
) -> Result<Var> {
    if bounds.len() < 2 {
        return Err(Error::domain("pooling over an empty set of graphs"));
    }
    let bounds = bounds.to_vec();
    match mode {
        Pooling::Mean => tape.segment_mean(z, bounds),
        Pooling::Sum => tape.segment_sum(z, bounds),
        Pooling::Min => tape.segment_min(z, bounds),
        Pooling::WeightedMean => {
            let s = scores.ok_or_else(|| Error::domain("weighted mean pooling needs a score column"))?;
            tape.segment_softmax_mean(z, s, bounds)
        }
    }
}
