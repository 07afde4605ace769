use rand::seq::SliceRandom;
use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};

pub fn cycle_graph(m: usize) -> Result<Graph> {
    if m < 3 {
        return Err(Error::domain(format!("cycle length {m} is below 3")));
    }
    Graph::new(m, (0..m).map(|i| (i, (i + 1) % m)))
}

pub fn path_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::domain("path needs at least one vertex"));
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

/// `K_{1,leaves}` with the center at vertex 0.
pub fn star_graph(leaves: usize) -> Result<Graph> {
    Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)))
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// Concatenates vertex sets, shifting each graph's ids by the number of
/// vertices before it. Feature widths must agree.
pub fn disjoint_union(gs: &[Graph]) -> Result<Graph> {
    let Some(first) = gs.first() else {
        return Graph::new(0, []);
    };
    let (vd, ed) = (first.vertex_dim(), first.edge_dim());
    if gs.iter().any(|g| g.vertex_dim() != vd || g.edge_dim() != ed) {
        return Err(Error::shape("disjoint_union", "mixed feature widths"));
    }
    let labelled = gs.iter().all(|g| g.vertex_labels().is_some());
    let mut offset = 0;
    let mut edges = Vec::new();
    let mut vertex_features = Vec::new();
    let mut labels = Vec::new();
    for g in gs {
        edges.extend(g.edges().iter().map(|&(i, j)| (i + offset, j + offset)));
        vertex_features.extend_from_slice(g.vertex_features());
        if let Some(l) = g.vertex_labels() {
            labels.extend_from_slice(l);
        }
        offset += g.num_vertices();
    }
    // each graph's edges stay sorted and blocks are increasing, so the edge
    // feature rows line up with the concatenated canonical order
    let edge_features: Vec<f64> = gs.iter().flat_map(|g| g.edge_features().iter().copied()).collect();
    let mut out = Graph::new(offset, edges)?
        .with_vertex_features(vd, vertex_features)?
        .with_edge_features(ed, edge_features)?;
    if labelled {
        out = out.with_vertex_labels(labels)?;
    }
    Ok(out)
}

/// Circulant graph joining `i` and `i ± o (mod n)` for every offset `o`.
pub fn circulant_graph(n: usize, offsets: &[usize]) -> Result<Graph> {
    if offsets.is_empty() {
        return Err(Error::domain("circulant graph needs at least one offset"));
    }
    if let Some(&bad) = offsets.iter().find(|&&o| o == 0 || 2 * o > n) {
        return Err(Error::domain(format!(
            "circulant offset {bad} outside [1, {}]",
            n / 2
        )));
    }
    Graph::new(
        n,
        (0..n).flat_map(|i| offsets.iter().map(move |&o| (i, (i + o) % n))),
    )
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_canonical(n, edges)
}

/// Uniform random simple `d`-regular graph via the pairing model with
/// rejection. Intended for small `n` and `d`.
pub fn random_regular_graph<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(Error::domain(format!("no simple {d}-regular graph on {n} vertices")));
    }
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    'attempt: for _ in 0..10_000 {
        points.shuffle(rng);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Graph::new(n, edges);
    }
    Err(Error::domain(format!(
        "pairing model failed for n={n}, d={d} after 10000 attempts"
    )))
}

/// Random `d`-regular circulant graph on `n` vertices with randomly drawn
/// offsets and a random vertex relabelling. Odd `d` needs even `n` and uses
/// the offset `n/2`.
pub fn random_circulant_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if d == 0 || d >= n || (d % 2 == 1 && n % 2 == 1) {
        return Err(Error::domain(format!(
            "no circulant {d}-regular graph on {n} vertices"
        )));
    }
    let mut pool: Vec<usize> = (1..n.div_ceil(2)).collect();
    let take = d / 2;
    if take > pool.len() {
        return Err(Error::domain(format!("degree {d} too large for n={n}")));
    }
    pool.shuffle(rng);
    let mut offsets: Vec<usize> = pool[..take].to_vec();
    if d % 2 == 1 {
        offsets.push(n / 2);
    }
    let g = circulant_graph(n, &offsets)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    g.relabel(&perm)
}
