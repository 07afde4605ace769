use super::{check_indices, matmul_into, Tensor};
use crate::error::{Error, Result};

/// Element-wise nonlinearity selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Logistic,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Logistic => logistic(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Logistic => y * (1.0 - y),
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Logistic => "logistic",
            Activation::Relu => "relu",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "identity" | "id" => Some(Activation::Identity),
            "logistic" | "sigmoid" => Some(Activation::Logistic),
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op<'a> {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Hadamard(Var, Var),
    Scale(Var, f64),
    AddBias(Var, Var),
    Gather(Var, &'a [usize]),
    ScatterSum(Var, &'a [usize]),
    TripleSum { z: Var, first: &'a [usize], second: &'a [usize], target: &'a [usize], act: Activation },
    Act(Var, Activation),
    SumAll(Var),
    SegmentSum(Var, Vec<usize>),
    SegmentMean(Var, Vec<usize>),
    SegmentMin(Var, Vec<usize>),
    SegmentSoftmaxMean { z: Var, scores: Var, bounds: Vec<usize>, weights: Vec<f64> },
    BceWithLogits(Var, Vec<f64>),
}

struct Node<'a> {
    value: Tensor,
    op: Op<'a>,
}

/// Records operations for reverse-mode differentiation. Index columns used
/// by gather and scatter are borrowed for the tape's lifetime.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

fn segment_bounds(op: &'static str, bounds: &[usize], rows: usize) -> Result<()> {
    let ok = bounds.first() == Some(&0)
        && bounds.last() == Some(&rows)
        && bounds.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::shape(
            op,
            format!("segment bounds {bounds:?} do not partition {rows} rows into nonempty segments"),
        ))
    }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op<'a>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    fn zip_with(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (x, y) = (self.value(a), self.value(b));
        x.check_same_shape(y, name)?;
        let data = x.data.iter().zip(&y.data).map(|(&p, &q)| f(p, q)).collect();
        Ok(Tensor {
            rows: x.rows,
            cols: x.cols,
            data,
        })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "add", |p, q| p + q)?;
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "sub", |p, q| p - q)?;
        Ok(self.push(out, Op::Sub(a, b)))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_with(a, b, "hadamard", |p, q| p * q)?;
        Ok(self.push(out, Op::Hadamard(a, b)))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let x = self.value(a);
        let out = Tensor {
            rows: x.rows,
            cols: x.cols,
            data: x.data.iter().map(|v| v * s).collect(),
        };
        self.push(out, Op::Scale(a, s))
    }

    /// Adds the `1 x c` row `bias` to every row of `a`.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (x, b) = (self.value(a), self.value(bias));
        if b.rows != 1 || b.cols != x.cols {
            return Err(Error::shape(
                "add_bias",
                format!("bias {:?} for input {:?}", b.shape(), x.shape()),
            ));
        }
        let mut out = x.clone();
        for row in out.data.chunks_exact_mut(x.cols.max(1)) {
            for (o, bv) in row.iter_mut().zip(&b.data) {
                *o += bv;
            }
        }
        Ok(self.push(out, Op::AddBias(a, bias)))
    }

    /// `out[t] = z[idx[t]]`.
    pub fn gather(&mut self, z: Var, idx: &'a [usize]) -> Result<Var> {
        let x = self.value(z);
        check_indices("gather", idx, x.rows)?;
        let c = x.cols;
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            data.extend_from_slice(&x.data[i * c..(i + 1) * c]);
        }
        let out = Tensor {
            rows: idx.len(),
            cols: c,
            data,
        };
        Ok(self.push(out, Op::Gather(z, idx)))
    }

    /// `out[i] = Σ_{t: idx[t] = i} x[t]` over `m` output rows, accumulated in
    /// ascending `t`.
    pub fn scatter_sum(&mut self, x: Var, idx: &'a [usize], m: usize) -> Result<Var> {
        let v = self.value(x);
        if v.rows != idx.len() {
            return Err(Error::shape(
                "scatter_sum",
                format!("{} rows against {} indices", v.rows, idx.len()),
            ));
        }
        check_indices("scatter_sum", idx, m)?;
        let c = v.cols;
        let mut out = Tensor::zeros(m, c);
        for (t, &i) in idx.iter().enumerate() {
            for (o, s) in out.data[i * c..(i + 1) * c].iter_mut().zip(&v.data[t * c..(t + 1) * c]) {
                *o += s;
            }
        }
        Ok(self.push(out, Op::ScatterSum(x, idx)))
    }

    /// `out[target[t]] += act(z[first[t]] + z[second[t]])` over `m` output
    /// rows, accumulated in ascending `t`. Equals gather, add, activate and
    /// scatter_sum in sequence without materialising the per-triple rows;
    /// the backward pass recomputes them.
    pub fn triple_sum(
        &mut self,
        z: Var,
        first: &'a [usize],
        second: &'a [usize],
        target: &'a [usize],
        m: usize,
        act: Activation,
    ) -> Result<Var> {
        let x = self.value(z);
        if first.len() != second.len() || first.len() != target.len() {
            return Err(Error::shape(
                "triple_sum",
                format!("index columns of lengths {}, {}, {}", first.len(), second.len(), target.len()),
            ));
        }
        check_indices("triple_sum", first, x.rows)?;
        check_indices("triple_sum", second, x.rows)?;
        check_indices("triple_sum", target, m)?;
        let c = x.cols;
        let mut out = Tensor::zeros(m, c);
        for t in 0..target.len() {
            let (a, b) = (&x.data[first[t] * c..][..c], &x.data[second[t] * c..][..c]);
            let o = &mut out.data[target[t] * c..][..c];
            for k in 0..c {
                o[k] += act.apply(a[k] + b[k]);
            }
        }
        Ok(self.push(out, Op::TripleSum { z, first, second, target, act }))
    }

    pub fn activate(&mut self, a: Var, act: Activation) -> Var {
        if act == Activation::Identity {
            return a;
        }
        let x = self.value(a);
        let out = Tensor {
            rows: x.rows,
            cols: x.cols,
            data: x.data.iter().map(|&v| act.apply(v)).collect(),
        };
        self.push(out, Op::Act(a, act))
    }

    pub fn logistic(&mut self, a: Var) -> Var {
        self.activate(a, Activation::Logistic)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.activate(a, Activation::Relu)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Tensor::scalar(s), Op::SumAll(a))
    }

    /// Row sums per segment; `bounds` are the segment start rows followed by
    /// the total row count.
    pub fn segment_sum(&mut self, a: Var, bounds: Vec<usize>) -> Result<Var> {
        let x = self.value(a);
        segment_bounds("segment_sum", &bounds, x.rows)?;
        let out = segment_reduce(x, &bounds, |rows| rows.iter().sum());
        Ok(self.push(out, Op::SegmentSum(a, bounds)))
    }

    pub fn segment_mean(&mut self, a: Var, bounds: Vec<usize>) -> Result<Var> {
        let x = self.value(a);
        segment_bounds("segment_mean", &bounds, x.rows)?;
        let out = segment_reduce(x, &bounds, |rows| rows.iter().sum::<f64>() / rows.len() as f64);
        Ok(self.push(out, Op::SegmentMean(a, bounds)))
    }

    pub fn segment_min(&mut self, a: Var, bounds: Vec<usize>) -> Result<Var> {
        let x = self.value(a);
        segment_bounds("segment_min", &bounds, x.rows)?;
        let out = segment_reduce(x, &bounds, |rows| rows.iter().copied().fold(f64::INFINITY, f64::min));
        Ok(self.push(out, Op::SegmentMin(a, bounds)))
    }

    /// Softmax-weighted row average per segment: `Σ e^{s_t} z_t / Σ e^{s_t}`,
    /// computed with the segment maximum subtracted from the scores.
    pub fn segment_softmax_mean(&mut self, z: Var, scores: Var, bounds: Vec<usize>) -> Result<Var> {
        let (x, s) = (self.value(z), self.value(scores));
        segment_bounds("segment_softmax_mean", &bounds, x.rows)?;
        if s.rows != x.rows || s.cols != 1 {
            return Err(Error::shape(
                "segment_softmax_mean",
                format!("scores {:?} for rows {:?}", s.shape(), x.shape()),
            ));
        }
        let c = x.cols;
        let mut weights = vec![0.0; x.rows];
        let mut out = Tensor::zeros(bounds.len() - 1, c);
        for (seg, w) in bounds.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            let max = s.data[lo..hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for t in lo..hi {
                weights[t] = (s.data[t] - max).exp();
                total += weights[t];
            }
            for t in lo..hi {
                weights[t] /= total;
                for (o, v) in out.data[seg * c..(seg + 1) * c].iter_mut().zip(&x.data[t * c..(t + 1) * c]) {
                    *o += weights[t] * v;
                }
            }
        }
        Ok(self.push(
            out,
            Op::SegmentSoftmaxMean {
                z,
                scores,
                bounds,
                weights,
            },
        ))
    }

    /// Mean binary cross-entropy of a column of logits against 0/1 targets,
    /// in the stable form `max(x, 0) - x y + ln(1 + e^{-|x|})`.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64]) -> Result<Var> {
        let x = self.value(logits);
        if x.cols != 1 || x.rows != targets.len() || x.rows == 0 {
            return Err(Error::shape(
                "bce_with_logits",
                format!("logits {:?} against {} targets", x.shape(), targets.len()),
            ));
        }
        if targets.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::domain("binary cross-entropy targets must be 0 or 1"));
        }
        let loss: f64 = x
            .data
            .iter()
            .zip(targets)
            .map(|(&v, &y)| v.max(0.0) - v * y + (-v.abs()).exp().ln_1p())
            .sum::<f64>()
            / targets.len() as f64;
        Ok(self.push(Tensor::scalar(loss), Op::BceWithLogits(logits, targets.to_vec())))
    }

    /// Reverse sweep from the scalar `root`.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        let rv = self.value(root);
        if rv.shape() != (1, 1) {
            return Err(Error::shape(
                "backward",
                format!("root must be a scalar, found {:?}", rv.shape()),
            ));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=root.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let (n, k, m) = (av.rows, av.cols, bv.cols);
                    let ga = accumulator(&mut grads, *a, av);
                    for i in 0..n {
                        let g_row = &g.data[i * m..(i + 1) * m];
                        for p in 0..k {
                            let b_row = &bv.data[p * m..(p + 1) * m];
                            ga.data[i * k + p] += dot(g_row, b_row);
                        }
                    }
                    let gb = accumulator(&mut grads, *b, bv);
                    let at = av.transpose();
                    matmul_into(&at.data, &g.data, &mut gb.data, k, n, m);
                }
                Op::Add(a, b) => {
                    add_into(accumulator(&mut grads, *a, self.value(*a)), &g, 1.0);
                    add_into(accumulator(&mut grads, *b, self.value(*b)), &g, 1.0);
                }
                Op::Sub(a, b) => {
                    add_into(accumulator(&mut grads, *a, self.value(*a)), &g, 1.0);
                    add_into(accumulator(&mut grads, *b, self.value(*b)), &g, -1.0);
                }
                Op::Hadamard(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = accumulator(&mut grads, *a, av);
                    for ((o, gv), y) in ga.data.iter_mut().zip(&g.data).zip(&bv.data) {
                        *o += gv * y;
                    }
                    let gb = accumulator(&mut grads, *b, bv);
                    for ((o, gv), x) in gb.data.iter_mut().zip(&g.data).zip(&av.data) {
                        *o += gv * x;
                    }
                }
                Op::Scale(a, s) => add_into(accumulator(&mut grads, *a, self.value(*a)), &g, *s),
                Op::AddBias(a, bias) => {
                    add_into(accumulator(&mut grads, *a, self.value(*a)), &g, 1.0);
                    let bv = self.value(*bias);
                    let gb = accumulator(&mut grads, *bias, bv);
                    for row in g.data.chunks_exact(bv.cols.max(1)) {
                        for (o, v) in gb.data.iter_mut().zip(row) {
                            *o += v;
                        }
                    }
                }
                Op::Gather(z, idx) => {
                    let zv = self.value(*z);
                    let c = zv.cols;
                    let gz = accumulator(&mut grads, *z, zv);
                    for (t, &i) in idx.iter().enumerate() {
                        for (o, v) in gz.data[i * c..(i + 1) * c].iter_mut().zip(&g.data[t * c..(t + 1) * c]) {
                            *o += v;
                        }
                    }
                }
                Op::ScatterSum(x, idx) => {
                    let xv = self.value(*x);
                    let c = xv.cols;
                    let gx = accumulator(&mut grads, *x, xv);
                    for (t, &i) in idx.iter().enumerate() {
                        for (o, v) in gx.data[t * c..(t + 1) * c].iter_mut().zip(&g.data[i * c..(i + 1) * c]) {
                            *o += v;
                        }
                    }
                }
                Op::TripleSum { z, first, second, target, act } => {
                    let zv = self.value(*z);
                    let c = zv.cols;
                    let gz = accumulator(&mut grads, *z, zv);
                    let mut local = vec![0.0; c];
                    for t in 0..target.len() {
                        let (i, j) = (first[t] * c, second[t] * c);
                        let g_row = &g.data[target[t] * c..][..c];
                        for k in 0..c {
                            let y = act.apply(zv.data[i + k] + zv.data[j + k]);
                            local[k] = g_row[k] * act.derivative_from_output(y);
                        }
                        for (o, v) in gz.data[i..i + c].iter_mut().zip(&local) {
                            *o += v;
                        }
                        for (o, v) in gz.data[j..j + c].iter_mut().zip(&local) {
                            *o += v;
                        }
                    }
                }
                Op::Act(a, act) => {
                    let gx = accumulator(&mut grads, *a, self.value(*a));
                    for ((o, gv), &y) in gx.data.iter_mut().zip(&g.data).zip(&node.value.data) {
                        *o += gv * act.derivative_from_output(y);
                    }
                }
                Op::SumAll(a) => {
                    let gx = accumulator(&mut grads, *a, self.value(*a));
                    let s = g.data[0];
                    gx.data.iter_mut().for_each(|o| *o += s);
                }
                Op::SegmentSum(a, bounds) | Op::SegmentMean(a, bounds) => {
                    let mean = matches!(node.op, Op::SegmentMean(..));
                    let xv = self.value(*a);
                    let c = xv.cols;
                    let gx = accumulator(&mut grads, *a, xv);
                    for (seg, w) in bounds.windows(2).enumerate() {
                        let f = if mean { 1.0 / (w[1] - w[0]) as f64 } else { 1.0 };
                        let g_row = &g.data[seg * c..(seg + 1) * c];
                        for t in w[0]..w[1] {
                            for (o, v) in gx.data[t * c..(t + 1) * c].iter_mut().zip(g_row) {
                                *o += f * v;
                            }
                        }
                    }
                }
                Op::SegmentMin(a, bounds) => {
                    let xv = self.value(*a);
                    let c = xv.cols;
                    let gx = accumulator(&mut grads, *a, xv);
                    for (seg, w) in bounds.windows(2).enumerate() {
                        for col in 0..c {
                            // first row attaining the minimum receives the gradient
                            let best = (w[0]..w[1])
                                .find(|&t| xv.data[t * c + col] == node.value.data[seg * c + col])
                                .unwrap_or(w[0]);
                            gx.data[best * c + col] += g.data[seg * c + col];
                        }
                    }
                }
                Op::SegmentSoftmaxMean {
                    z,
                    scores,
                    bounds,
                    weights,
                } => {
                    let zv = self.value(*z);
                    let c = zv.cols;
                    let mut gs = vec![0.0; zv.rows];
                    {
                        let gz = accumulator(&mut grads, *z, zv);
                        for (seg, w) in bounds.windows(2).enumerate() {
                            let g_row = &g.data[seg * c..(seg + 1) * c];
                            let g_dot_out = dot(g_row, &node.value.data[seg * c..(seg + 1) * c]);
                            for t in w[0]..w[1] {
                                let z_row = &zv.data[t * c..(t + 1) * c];
                                for (o, v) in gz.data[t * c..(t + 1) * c].iter_mut().zip(g_row) {
                                    *o += weights[t] * v;
                                }
                                gs[t] = weights[t] * (dot(g_row, z_row) - g_dot_out);
                            }
                        }
                    }
                    let sv = self.value(*scores);
                    let gsc = accumulator(&mut grads, *scores, sv);
                    for (o, v) in gsc.data.iter_mut().zip(&gs) {
                        *o += v;
                    }
                }
                Op::BceWithLogits(logits, targets) => {
                    let xv = self.value(*logits);
                    let n = targets.len() as f64;
                    let s = g.data[0];
                    let gx = accumulator(&mut grads, *logits, xv);
                    for ((o, &x), &y) in gx.data.iter_mut().zip(&xv.data).zip(targets) {
                        *o += s * (logistic(x) - y) / n;
                    }
                }
            }
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
            }
        }
        Ok(Gradients { grads })
    }
}

fn segment_reduce(x: &Tensor, bounds: &[usize], f: impl Fn(&[f64]) -> f64) -> Tensor {
    let c = x.cols;
    let mut out = Tensor::zeros(bounds.len() - 1, c);
    let mut column = Vec::new();
    for (seg, w) in bounds.windows(2).enumerate() {
        for col in 0..c {
            column.clear();
            column.extend((w[0]..w[1]).map(|t| x.data[t * c + col]));
            out.data[seg * c + col] = f(&column);
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add_into(acc: &mut Tensor, g: &Tensor, s: f64) {
    for (o, v) in acc.data.iter_mut().zip(&g.data) {
        *o += s * v;
    }
}

fn accumulator<'g>(grads: &'g mut [Option<Tensor>], v: Var, like: &Tensor) -> &'g mut Tensor {
    grads[v.0].get_or_insert_with(|| Tensor::zeros(like.rows, like.cols))
}

/// Gradients of a scalar with respect to every leaf it depends on.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, zero when `v` did not influence the root.
    pub fn wrt(&self, v: Var, like: &Tensor) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(like.rows, like.cols))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub checked: usize,
    pub passed: bool,
}

/// Compares tape gradients of `f` with central differences `(f(x+h) -
/// f(x-h)) / 2h` for every parameter entry. The relative error of an entry
/// is `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps near-zero gradients
/// from turning rounding noise into large ratios.
pub fn grad_check<'a, F>(f: F, params: &[Tensor], h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<'a>, &[Var]) -> Result<Var>,
{
    if h <= 0.0 {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let eval = |ps: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ps.iter().map(|p| tape.leaf(p.clone())).collect();
        let out = f(&mut tape, &vars)?;
        let v = tape.value(out);
        if v.shape() != (1, 1) {
            return Err(Error::shape("grad_check", "objective must be scalar"));
        }
        Ok(v.data[0])
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.leaf(p.clone())).collect();
    let out = f(&mut tape, &vars)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars.iter().zip(params).map(|(&v, p)| grads.wrt(v, p)).collect();

    let mut work: Vec<Tensor> = params.to_vec();
    let (mut max_rel, mut max_abs, mut checked) = (0.0f64, 0.0f64, 0);
    for p in 0..params.len() {
        for e in 0..params[p].data.len() {
            let orig = work[p].data[e];
            work[p].data[e] = orig + h;
            let plus = eval(&work)?;
            work[p].data[e] = orig - h;
            let minus = eval(&work)?;
            work[p].data[e] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[p].data[e];
            let abs = (a - numeric).abs();
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(abs / a.abs().max(numeric.abs()).max(1e-6));
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        max_abs_error: max_abs,
        checked,
        passed: max_rel <= tol,
    })
}
