use std::collections::VecDeque;

use super::Graph;
use crate::error::{Error, Result};

/// Hop distances from `source`, truncated at `max_depth`.
pub(crate) fn bfs_distances(g: &Graph, source: usize, max_depth: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.num_vertices()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap_or(0);
        if dv == max_depth {
            continue;
        }
        for &u in g.neighbors(v) {
            if dist[u].is_none() {
                dist[u] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// The `r`-th power of `g`: `{i, j}` is an edge iff the shortest-path
/// distance between `i` and `j` is at most `r`, so every vertex gets a
/// self-loop. Vertex features and labels are kept; edge features are not.
pub fn graph_power(g: &Graph, r: usize) -> Result<Graph> {
    if r == 0 {
        return Err(Error::domain("graph power radius must be at least 1"));
    }
    if g.num_vertices() == 0 {
        return Err(Error::domain("graph power of the empty graph"));
    }
    let n = g.num_vertices();
    let mut edges = Vec::new();
    for i in 0..n {
        for (j, d) in bfs_distances(g, i, r).into_iter().enumerate() {
            if j >= i && d.is_some() {
                edges.push((i, j));
            }
        }
    }
    let mut p = Graph::from_canonical(n, edges);
    p.vertex_dim = g.vertex_dim;
    p.vertex_features = g.vertex_features.clone();
    p.vertex_labels = g.vertex_labels.clone();
    Ok(p)
}

/// Graph whose vertices are the 2-multisets `{v, v}` (one per vertex) and
/// `{v, u}` (one per edge) of `g`, adjacent iff they share exactly one
/// element.
///
/// Vertex order: the `n` loop vertices in vertex order, then the edges in
/// canonical order. The result is unlabelled.
pub fn edge_neighborhood_graph(g: &Graph) -> Graph {
    let n = g.num_vertices();
    let simple: Vec<(usize, usize)> = g.edges().iter().copied().filter(|&(i, j)| i != j).collect();
    // multisets containing each vertex
    let mut incident: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for (e, &(i, j)) in simple.iter().enumerate() {
        incident[i].push(n + e);
        incident[j].push(n + e);
    }
    let mut edges = Vec::new();
    for members in &incident {
        for (a, &x) in members.iter().enumerate() {
            for &y in &members[a + 1..] {
                edges.push((x.min(y), x.max(y)));
            }
        }
    }
    Graph::from_canonical(n + simple.len(), edges)
}
