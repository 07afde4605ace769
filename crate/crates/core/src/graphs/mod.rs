//! Undirected attributed graphs and the structures derived from them.
//!
//! A [`Graph`] stores every undirected edge once as `(i, j)` with `i <= j`,
//! sorted lexicographically. Base graphs never contain self-loops; only
//! [`graph_power`] introduces them, one per vertex.

mod derived;
mod generators;
mod triangle;
mod tu;

pub use derived::{edge_neighborhood_graph, graph_power};
pub use generators::{
    circulant_graph, complete_graph, cycle_graph, disjoint_union, gnp_graph, path_graph,
    random_circulant_regular, random_regular_graph, star_graph,
};
pub use triangle::{
    generate_triangle_dataset, unicolored_triangles, SkippedCell, TriangleConfig, TriangleDataset,
};
pub use tu::{load_tu_dataset, write_tu_dataset};

use crate::error::{Error, Result};

/// An undirected graph with per-vertex and per-edge feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    vertex_dim: usize,
    vertex_features: Vec<f64>,
    edge_dim: usize,
    edge_features: Vec<f64>,
    vertex_labels: Option<Vec<usize>>,
}

impl Graph {
    /// Builds a simple graph on `n` vertices. Duplicate edges, in either
    /// orientation, collapse into one.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange {
                    op: "Graph::new",
                    index: a.max(b),
                    len: n,
                });
            }
            if a == b {
                return Err(Error::domain(format!(
                    "self-loop at vertex {a}; base graphs must be simple"
                )));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        Ok(Self::from_canonical(n, canonical))
    }

    /// Edges may include self-loops `(v, v)`.
    pub(crate) fn from_canonical(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            if i != j {
                adjacency[j].push(i);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
            vertex_dim: 0,
            vertex_features: Vec::new(),
            edge_dim: 0,
            edge_features: Vec::new(),
            vertex_labels: None,
        }
    }

    /// Attaches `n` rows of `dim` vertex features, row-major.
    pub fn with_vertex_features(mut self, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != self.n * dim {
            return Err(Error::shape(
                "with_vertex_features",
                format!("{} values for {} vertices of width {dim}", data.len(), self.n),
            ));
        }
        self.vertex_dim = dim;
        self.vertex_features = data;
        Ok(self)
    }

    /// Attaches one row of `dim` features per canonical edge, in the order of
    /// [`Graph::edges`].
    pub fn with_edge_features(mut self, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != self.edges.len() * dim {
            return Err(Error::shape(
                "with_edge_features",
                format!(
                    "{} values for {} edges of width {dim}",
                    data.len(),
                    self.edges.len()
                ),
            ));
        }
        self.edge_dim = dim;
        self.edge_features = data;
        Ok(self)
    }

    pub fn with_vertex_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::shape(
                "with_vertex_labels",
                format!("{} labels for {} vertices", labels.len(), self.n),
            ));
        }
        self.vertex_labels = Some(labels);
        Ok(self)
    }

    /// Uses the vertex labels as one-hot vertex features over `num_classes`.
    pub fn with_one_hot_labels(self, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let mut data = vec![0.0; labels.len() * num_classes];
        for (v, &l) in labels.iter().enumerate() {
            if l >= num_classes {
                return Err(Error::domain(format!(
                    "label {l} out of range for {num_classes} classes"
                )));
            }
            data[v * num_classes + l] = 1.0;
        }
        self.with_vertex_features(num_classes, data)?
            .with_vertex_labels(labels)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list: `i <= j`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbors of `v`; contains `v` itself iff the graph has the
    /// self-loop `(v, v)`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Number of distinct neighbors other than `v`.
    pub fn degree(&self, v: usize) -> usize {
        let list = &self.adjacency[v];
        list.len() - usize::from(list.binary_search(&v).is_ok())
    }

    /// Position of `{i, j}` in [`Graph::edges`], in either orientation.
    pub fn edge_id(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_id(i, j).is_some()
    }

    pub fn has_self_loops(&self) -> bool {
        self.edges.iter().any(|&(i, j)| i == j)
    }

    pub fn vertex_dim(&self) -> usize {
        self.vertex_dim
    }

    pub fn edge_dim(&self) -> usize {
        self.edge_dim
    }

    pub fn vertex_feature(&self, v: usize) -> &[f64] {
        &self.vertex_features[v * self.vertex_dim..(v + 1) * self.vertex_dim]
    }

    /// Feature row of `{i, j}`, identical for both orientations.
    pub fn edge_feature(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.edge_id(i, j)
            .map(|e| &self.edge_features[e * self.edge_dim..(e + 1) * self.edge_dim])
    }

    pub fn vertex_features(&self) -> &[f64] {
        &self.vertex_features
    }

    pub fn edge_features(&self) -> &[f64] {
        &self.edge_features
    }

    pub fn vertex_labels(&self) -> Option<&[usize]> {
        self.vertex_labels.as_deref()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Connected-component diameter, or `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            let dist = derived::bfs_distances(self, s, usize::MAX);
            for d in dist {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Moves vertex `v` to position `perm[v]`, carrying features and labels.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::shape("relabel", "permutation length differs from n"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::domain("relabel expects a permutation"));
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|&(i, j)| (perm[i].min(perm[j]), perm[i].max(perm[j])))
            .collect();
        let mut out = Graph::from_canonical(self.n, edges);
        let mut vf = vec![0.0; self.vertex_features.len()];
        for v in 0..self.n {
            let d = self.vertex_dim;
            vf[perm[v] * d..(perm[v] + 1) * d].copy_from_slice(self.vertex_feature(v));
        }
        out.vertex_dim = self.vertex_dim;
        out.vertex_features = vf;
        out.edge_dim = self.edge_dim;
        out.edge_features = vec![0.0; self.edge_features.len()];
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let target = out.edge_id(perm[i], perm[j]).expect("relabelled edge");
            let d = self.edge_dim;
            out.edge_features[target * d..(target + 1) * d]
                .copy_from_slice(&self.edge_features[e * d..(e + 1) * d]);
        }
        out.vertex_labels = self
            .vertex_labels
            .as_ref()
            .map(|labels| {
                let mut moved = vec![0; self.n];
                for v in 0..self.n {
                    moved[perm[v]] = labels[v];
                }
                moved
            });
        Ok(out)
    }
}

/// Graphs with binary class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, labels: Vec<u8>) -> Result<Self> {
        if graphs.len() != labels.len() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} graphs but {} labels", graphs.len(), labels.len()),
            ));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::domain(format!("label {bad} is not binary")));
        }
        Ok(Dataset {
            name: name.into(),
            graphs,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Graphs at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn stats(&self) -> DatasetStats {
        let count = self.graphs.len().max(1) as f64;
        let vertices: Vec<usize> = self.graphs.iter().map(Graph::num_vertices).collect();
        let edges: Vec<usize> = self.graphs.iter().map(Graph::num_edges).collect();
        let degrees: Vec<f64> = self
            .graphs
            .iter()
            .flat_map(|g| g.degrees().into_iter().map(|d| d as f64))
            .collect();
        let deg_mean = degrees.iter().sum::<f64>() / degrees.len().max(1) as f64;
        let deg_var = degrees.iter().map(|d| (d - deg_mean).powi(2)).sum::<f64>()
            / degrees.len().max(1) as f64;
        DatasetStats {
            graphs: self.graphs.len(),
            vertex_min: vertices.iter().copied().min().unwrap_or(0),
            vertex_mean: vertices.iter().sum::<usize>() as f64 / count,
            vertex_max: vertices.iter().copied().max().unwrap_or(0),
            edge_min: edges.iter().copied().min().unwrap_or(0),
            edge_mean: edges.iter().sum::<usize>() as f64 / count,
            edge_max: edges.iter().copied().max().unwrap_or(0),
            degree_mean: deg_mean,
            degree_std: deg_var.sqrt(),
        }
    }
}

/// Summary statistics in the layout of the usual TU dataset tables.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub graphs: usize,
    pub vertex_min: usize,
    pub vertex_mean: f64,
    pub vertex_max: usize,
    pub edge_min: usize,
    pub edge_mean: f64,
    pub edge_max: usize,
    pub degree_mean: f64,
    pub degree_std: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_canonical_and_deduplicated() {
        let g = Graph::new(3, [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edge_id(2, 1), Some(1));
    }

    #[test]
    fn rejects_self_loops_and_dangling_endpoints() {
        assert!(matches!(Graph::new(2, [(1, 1)]), Err(Error::Domain(_))));
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn edge_feature_lookup_is_symmetric() {
        let g = Graph::new(3, [(0, 1), (1, 2)])
            .unwrap()
            .with_edge_features(2, vec![1.0, 2.0, 3.0, 4.0])
            .unwrap();
        assert_eq!(g.edge_feature(1, 0), g.edge_feature(0, 1));
        assert_eq!(g.edge_feature(2, 1), Some(&[3.0, 4.0][..]));
        assert_eq!(g.edge_feature(0, 2), None);
    }

    #[test]
    fn feature_widths_are_checked() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert!(g.clone().with_vertex_features(2, vec![0.0; 3]).is_err());
        assert!(g.with_edge_features(1, vec![0.0; 2]).is_err());
    }

    #[test]
    fn relabel_moves_features_with_vertices() {
        let g = Graph::new(3, [(0, 1)])
            .unwrap()
            .with_vertex_features(1, vec![10.0, 20.0, 30.0])
            .unwrap();
        let h = g.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(h.edges(), &[(0, 2)]);
        assert_eq!(h.vertex_features(), &[20.0, 30.0, 10.0]);
        assert!(g.relabel(&[0, 0, 1]).is_err());
    }

    #[test]
    fn dataset_requires_binary_labels() {
        let g = Graph::new(1, []).unwrap();
        assert!(Dataset::new("x", vec![g.clone()], vec![2]).is_err());
        assert!(Dataset::new("x", vec![g], vec![]).is_err());
    }
}
