//! Sparse 2-WL representation of a graph or a batch of graphs.
//!
//! Rows of the feature matrix `z0` are the undirected edges `e_ij`, `i ≤ j`,
//! of the graph power `G^r`: the `n` self-loops in vertex order, then the
//! remaining edges in lexicographic order. Each reference row
//! `(r_l, r_g1, r_g2)` names a target edge `e_ij` and the pair `e_il`,
//! `e_lj` for one common neighbor `l` of `i` and `j` in `G^r`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graphs::{graph_power, Graph};
use crate::tensor::Tensor;

/// Location of one graph inside a batched encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSlice {
    pub vertices: usize,
    pub row_start: usize,
    pub row_count: usize,
    pub ref_start: usize,
    pub ref_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wl2Encoding {
    radius: usize,
    vertex_dim: usize,
    edge_dim: usize,
    synthetic_edge_channel: bool,
    z0: Tensor,
    /// Per row, the graph-local vertex pair `(i, j)` with `i ≤ j`.
    pairs: Vec<(usize, usize)>,
    r_l: Vec<usize>,
    r_g1: Vec<usize>,
    r_g2: Vec<usize>,
    graphs: Vec<GraphSlice>,
}

/// Row lookup for one graph power: row of `(i, j)`, `i < j`, is
/// `n + offset[i] + rank of j among the neighbors of i above i`.
struct RowIndex {
    n: usize,
    upper: Vec<Vec<usize>>,
    offset: Vec<usize>,
}

impl RowIndex {
    fn new(p: &Graph) -> Self {
        let n = p.num_vertices();
        let upper: Vec<Vec<usize>> = (0..n)
            .map(|i| p.neighbors(i).iter().copied().filter(|&j| j > i).collect())
            .collect();
        let mut offset = Vec::with_capacity(n);
        let mut acc = 0;
        for list in &upper {
            offset.push(acc);
            acc += list.len();
        }
        RowIndex { n, upper, offset }
    }

    fn rows(&self) -> usize {
        self.n + self.offset.last().map_or(0, |&o| o) + self.upper.last().map_or(0, Vec::len)
    }

    fn row(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = (a.min(b), a.max(b));
        if i == j {
            return (i < self.n).then_some(i);
        }
        let pos = self.upper.get(i)?.binary_search(&j).ok()?;
        Some(self.n + self.offset[i] + pos)
    }
}

/// Common neighbors of `i` and `j` in the order `i`, `j`, then the rest
/// ascending.
fn common_neighbors(p: &Graph, i: usize, j: usize, out: &mut Vec<usize>) {
    out.clear();
    out.push(i);
    if j != i {
        out.push(j);
    }
    let (a, b) = (p.neighbors(i), p.neighbors(j));
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                if a[x] != i && a[x] != j {
                    out.push(a[x]);
                }
                x += 1;
                y += 1;
            }
        }
    }
}

impl Wl2Encoding {
    /// Encodes `g` with neighborhood radius `r`. Without edge features a
    /// single edge channel carries 1.0 on self-loops and edges of `g`, so
    /// that the extra edges of `G^r` stay recognisable.
    pub fn encode(g: &Graph, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::domain("encoding radius must be at least 1"));
        }
        let p = graph_power(g, r)?;
        let n = g.num_vertices();
        let index = RowIndex::new(&p);
        let m = index.rows();

        let mut pairs: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
        for (i, list) in index.upper.iter().enumerate() {
            pairs.extend(list.iter().map(|&j| (i, j)));
        }
        debug_assert_eq!(pairs.len(), m);

        let synthetic = g.edge_dim() == 0;
        let (dv, de) = (g.vertex_dim(), if synthetic { 1 } else { g.edge_dim() });
        let mut z0 = Tensor::zeros(m, dv + de);
        for (row, &(i, j)) in pairs.iter().enumerate() {
            let out = z0.row_mut(row);
            if i == j {
                out[..dv].copy_from_slice(g.vertex_feature(i));
            }
            if synthetic {
                if i == j || g.has_edge(i, j) {
                    out[dv] = 1.0;
                }
            } else if let Some(x) = g.edge_feature(i, j) {
                out[dv..].copy_from_slice(x);
            }
        }

        let mut r_l = Vec::new();
        let mut r_g1 = Vec::new();
        let mut r_g2 = Vec::new();
        let mut common = Vec::new();
        for (row, &(i, j)) in pairs.iter().enumerate() {
            common_neighbors(&p, i, j, &mut common);
            for &l in &common {
                let (Some(il), Some(lj)) = (index.row(i, l), index.row(l, j)) else {
                    return Err(Error::Corrupt(format!("graph power lacks edge rows for ({i},{l},{j})")));
                };
                r_l.push(row);
                r_g1.push(il);
                r_g2.push(lj);
            }
        }
        let gamma = r_l.len();
        Ok(Wl2Encoding {
            radius: r,
            vertex_dim: dv,
            edge_dim: de,
            synthetic_edge_channel: synthetic,
            z0,
            pairs,
            r_l,
            r_g1,
            r_g2,
            graphs: vec![GraphSlice {
                vertices: n,
                row_start: 0,
                row_count: m,
                ref_start: 0,
                ref_count: gamma,
            }],
        })
    }

    /// Encodes every graph and concatenates the encodings, shifting all row
    /// pointers by the number of rows before each graph.
    pub fn encode_batch(gs: &[Graph], r: usize) -> Result<Self> {
        let parts = gs.iter().map(|g| Self::encode(g, r)).collect::<Result<Vec<_>>>()?;
        Self::concat(&parts)
    }

    pub fn concat(parts: &[Wl2Encoding]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::domain("cannot batch zero graphs"));
        };
        let key = |e: &Wl2Encoding| (e.radius, e.vertex_dim, e.edge_dim, e.synthetic_edge_channel);
        if parts.iter().any(|e| key(e) != key(first)) {
            return Err(Error::shape(
                "encode_batch",
                "graphs disagree on radius, feature widths or edge channel layout",
            ));
        }
        let width = first.feature_dim();
        let m: usize = parts.iter().map(Wl2Encoding::m).sum();
        let mut z = Vec::with_capacity(m * width);
        let mut out = Wl2Encoding {
            radius: first.radius,
            vertex_dim: first.vertex_dim,
            edge_dim: first.edge_dim,
            synthetic_edge_channel: first.synthetic_edge_channel,
            z0: Tensor::zeros(0, width),
            pairs: Vec::with_capacity(m),
            r_l: Vec::new(),
            r_g1: Vec::new(),
            r_g2: Vec::new(),
            graphs: Vec::new(),
        };
        for part in parts {
            let (row_base, ref_base) = (out.pairs.len(), out.r_l.len());
            z.extend_from_slice(part.z0.data());
            out.pairs.extend_from_slice(&part.pairs);
            out.r_l.extend(part.r_l.iter().map(|x| x + row_base));
            out.r_g1.extend(part.r_g1.iter().map(|x| x + row_base));
            out.r_g2.extend(part.r_g2.iter().map(|x| x + row_base));
            out.graphs.extend(part.graphs.iter().map(|s| GraphSlice {
                row_start: s.row_start + row_base,
                ref_start: s.ref_start + ref_base,
                ..*s
            }));
        }
        out.z0 = Tensor::new(m, width, z)?;
        Ok(out)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn gamma(&self) -> usize {
        self.r_l.len()
    }

    pub fn vertex_dim(&self) -> usize {
        self.vertex_dim
    }

    /// Width of the edge block, 1 when the synthetic channel is used.
    pub fn edge_dim(&self) -> usize {
        self.edge_dim
    }

    pub fn has_synthetic_edge_channel(&self) -> bool {
        self.synthetic_edge_channel
    }

    pub fn feature_dim(&self) -> usize {
        self.vertex_dim + self.edge_dim
    }

    pub fn z0(&self) -> &Tensor {
        &self.z0
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn r_l(&self) -> &[usize] {
        &self.r_l
    }

    pub fn r_g1(&self) -> &[usize] {
        &self.r_g1
    }

    pub fn r_g2(&self) -> &[usize] {
        &self.r_g2
    }

    pub fn graphs(&self) -> &[GraphSlice] {
        &self.graphs
    }

    pub fn num_graphs(&self) -> usize {
        self.graphs.len()
    }

    /// Row boundaries of the graphs: each `row_start`, then `m`.
    pub fn row_bounds(&self) -> Vec<usize> {
        let mut b: Vec<usize> = self.graphs.iter().map(|s| s.row_start).collect();
        b.push(self.m());
        b
    }

    /// Row of the pair `{i, j}` of graph `graph`, if it is an edge of `G^r`.
    pub fn row_of(&self, graph: usize, i: usize, j: usize) -> Option<usize> {
        let s = self.graphs.get(graph)?;
        let (a, b) = (i.min(j), i.max(j));
        if b >= s.vertices {
            return None;
        }
        if a == b {
            return Some(s.row_start + a);
        }
        let edges = &self.pairs[s.row_start + s.vertices..s.row_start + s.row_count];
        edges
            .binary_search(&(a, b))
            .ok()
            .map(|p| s.row_start + s.vertices + p)
    }

    /// Same structure with the feature matrix replaced.
    pub fn with_features(&self, z0: Tensor) -> Result<Self> {
        if z0.rows() != self.m() {
            return Err(Error::shape(
                "with_features",
                format!("{} rows for an encoding with m = {}", z0.rows(), self.m()),
            ));
        }
        Ok(Wl2Encoding {
            z0,
            ..self.clone()
        })
    }

    /// The encoding of graph `graph` alone, with pointers re-based to 0.
    pub fn slice(&self, graph: usize) -> Result<Self> {
        let s = *self.graphs.get(graph).ok_or(Error::IndexOutOfRange {
            op: "Wl2Encoding::slice",
            index: graph,
            len: self.graphs.len(),
        })?;
        let refs = s.ref_start..s.ref_start + s.ref_count;
        let shift = |col: &[usize]| col[refs.clone()].iter().map(|x| x - s.row_start).collect::<Vec<_>>();
        Ok(Wl2Encoding {
            radius: self.radius,
            vertex_dim: self.vertex_dim,
            edge_dim: self.edge_dim,
            synthetic_edge_channel: self.synthetic_edge_channel,
            z0: self.z0.slice_rows(s.row_start, s.row_count),
            pairs: self.pairs[s.row_start..s.row_start + s.row_count].to_vec(),
            r_l: shift(&self.r_l),
            r_g1: shift(&self.r_g1),
            r_g2: shift(&self.r_g2),
            graphs: vec![GraphSlice {
                row_start: 0,
                ref_start: 0,
                ..s
            }],
        })
    }

    /// Checks every structural invariant: pointer ranges, graph slices,
    /// the shared-vertex relation of each triple and the per-target count
    /// `|Γ(i) ∩ Γ(j)|` in the graph power reconstructed from the rows.
    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        let corrupt = |msg: String| Err(Error::Corrupt(msg));
        if self.z0.rows() != m || self.z0.cols() != self.feature_dim() {
            return corrupt(format!("feature matrix {:?} for m = {m}", self.z0.shape()));
        }
        if self.r_g1.len() != self.gamma() || self.r_g2.len() != self.gamma() {
            return corrupt("reference columns differ in length".into());
        }
        let (mut rows, mut refs) = (0, 0);
        for (gi, s) in self.graphs.iter().enumerate() {
            if s.row_start != rows || s.ref_start != refs || s.row_count < s.vertices {
                return corrupt(format!("graph slice {gi} is not contiguous"));
            }
            let local = &self.pairs[s.row_start..s.row_start + s.row_count];
            if local[..s.vertices].iter().enumerate().any(|(v, &p)| p != (v, v)) {
                return corrupt(format!("graph {gi}: self-loop rows out of order"));
            }
            let edges = &local[s.vertices..];
            if edges.iter().any(|&(i, j)| i >= j || j >= s.vertices) || edges.windows(2).any(|w| w[0] >= w[1]) {
                return corrupt(format!("graph {gi}: edge rows not strictly lexicographic"));
            }
            let mut adjacency = vec![vec![false; s.vertices]; s.vertices];
            for &(i, j) in local {
                adjacency[i][j] = true;
                adjacency[j][i] = true;
            }
            let mut counts = vec![0usize; s.row_count];
            let mut seen = std::collections::HashSet::new();
            for t in s.ref_start..s.ref_start + s.ref_count {
                let (target, a, b) = (self.r_l[t], self.r_g1[t], self.r_g2[t]);
                let in_graph = |x: usize| x >= s.row_start && x < s.row_start + s.row_count;
                if !(in_graph(target) && in_graph(a) && in_graph(b)) {
                    return corrupt(format!("reference row {t} leaves graph {gi}"));
                }
                let (i, j) = self.pairs[target];
                // e_il must contain i; its other end is l, and e_lj must be {l, j}
                let l = match self.pairs[a] {
                    (x, y) if x == i => Some(y),
                    (x, y) if y == i => Some(x),
                    _ => None,
                };
                let Some(l) = l.filter(|&l| self.pairs[b] == (l.min(j), l.max(j))) else {
                    return corrupt(format!(
                        "reference row {t}: {:?} and {:?} do not meet at a common neighbor of {:?}",
                        self.pairs[a], self.pairs[b], (i, j)
                    ));
                };
                if !seen.insert((target, l)) {
                    return corrupt(format!("reference row {t} repeats neighbor {l} of {:?}", (i, j)));
                }
                counts[target - s.row_start] += 1;
            }
            for (row, &(i, j)) in local.iter().enumerate() {
                let expected = (0..s.vertices).filter(|&l| adjacency[i][l] && adjacency[j][l]).count();
                if counts[row] != expected {
                    return corrupt(format!(
                        "graph {gi}: edge {:?} has {} reference rows, expected {expected}",
                        (i, j),
                        counts[row]
                    ));
                }
            }
            rows += s.row_count;
            refs += s.ref_count;
        }
        if rows != m || refs != self.gamma() {
            return corrupt("graph slices do not cover the encoding".into());
        }
        if self.r_l.windows(2).any(|w| w[0] > w[1]) {
            return corrupt("reference rows are not grouped by target".into());
        }
        Ok(())
    }
}

const MAGIC: &[u8; 8] = b"WL2ENC01";

impl Wl2Encoding {
    /// Little-endian dump: magic; header `m, γ, d_V, d_E, synthetic, r,
    /// graphs`; the graph slices; the row pairs; `z0` as `f64`; then the
    /// three pointer columns as `i64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(64 + self.m() * (16 + 8 * self.feature_dim()) + 24 * self.gamma());
        buf.extend_from_slice(MAGIC);
        let put = |buf: &mut Vec<u8>, x: usize| buf.extend_from_slice(&(x as u64).to_le_bytes());
        for x in [
            self.m(),
            self.gamma(),
            self.vertex_dim,
            self.edge_dim,
            self.synthetic_edge_channel as usize,
            self.radius,
            self.graphs.len(),
        ] {
            put(&mut buf, x);
        }
        for s in &self.graphs {
            for x in [s.vertices, s.row_start, s.row_count, s.ref_start, s.ref_count] {
                put(&mut buf, x);
            }
        }
        for &(i, j) in &self.pairs {
            put(&mut buf, i);
            put(&mut buf, j);
        }
        for v in self.z0.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for col in [&self.r_l, &self.r_g1, &self.r_g2] {
            for &x in col.iter() {
                buf.extend_from_slice(&(x as i64).to_le_bytes());
            }
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut word = || -> Result<[u8; 8]> {
            let chunk = bytes
                .get(pos..pos + 8)
                .ok_or_else(|| Error::Corrupt(format!("encoding truncated at byte {pos}")))?;
            pos += 8;
            Ok(chunk.try_into().expect("8 bytes"))
        };
        if &word()? != MAGIC {
            return Err(Error::Corrupt("not a 2-WL encoding dump".into()));
        }
        let mut header = [0usize; 7];
        for h in &mut header {
            *h = u64::from_le_bytes(word()?) as usize;
        }
        let [m, gamma, vertex_dim, edge_dim, synthetic, radius, graph_count] = header;
        let expected = 8usize
            .checked_mul(7 + 5 * graph_count + 2 * m + m * (vertex_dim + edge_dim) + 3 * gamma)
            .and_then(|x| x.checked_add(8));
        if expected != Some(bytes.len()) {
            return Err(Error::Corrupt(format!(
                "dump of {} bytes does not match its header",
                bytes.len()
            )));
        }
        let mut next = || -> Result<usize> { Ok(u64::from_le_bytes(word()?) as usize) };
        let mut graphs = Vec::with_capacity(graph_count);
        for _ in 0..graph_count {
            graphs.push(GraphSlice {
                vertices: next()?,
                row_start: next()?,
                row_count: next()?,
                ref_start: next()?,
                ref_count: next()?,
            });
        }
        let mut pairs = Vec::with_capacity(m);
        for _ in 0..m {
            pairs.push((next()?, next()?));
        }
        let z = (0..m * (vertex_dim + edge_dim))
            .map(|_| next().map(|b| f64::from_bits(b as u64)))
            .collect::<Result<Vec<_>>>()?;
        let mut column = || (0..gamma).map(|_| next()).collect::<Result<Vec<_>>>();
        let (r_l, r_g1, r_g2) = (column()?, column()?, column()?);
        let enc = Wl2Encoding {
            radius,
            vertex_dim,
            edge_dim,
            synthetic_edge_channel: synthetic == 1,
            z0: Tensor::new(m, vertex_dim + edge_dim, z)?,
            pairs,
            r_l,
            r_g1,
            r_g2,
            graphs,
        };
        enc.validate()?;
        Ok(enc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete_graph, gnp_graph, path_graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Vertex features `(1)` and edge features `(1)`, so loops read `(1, 0)`
    /// and edges `(0, 1)`.
    fn unit_feature_graph(g: Graph) -> Graph {
        let (n, e) = (g.num_vertices(), g.num_edges());
        g.with_vertex_features(1, vec![1.0; n])
            .unwrap()
            .with_edge_features(1, vec![1.0; e])
            .unwrap()
    }

    fn triples(enc: &Wl2Encoding) -> Vec<(usize, usize, usize)> {
        (0..enc.gamma())
            .map(|t| (enc.r_l[t] + 1, enc.r_g1[t] + 1, enc.r_g2[t] + 1))
            .collect()
    }

    #[test]
    fn batch_of_triangle_and_edge_matches_golden_layout() {
        let enc = Wl2Encoding::encode_batch(
            &[unit_feature_graph(complete_graph(3).unwrap()), unit_feature_graph(path_graph(2).unwrap())],
            1,
        )
        .unwrap();
        assert_eq!((enc.m(), enc.gamma()), (9, 24));
        let rows: Vec<&[f64]> = (0..9).map(|r| enc.z0().row(r)).collect();
        let (lp, ed) = (&[1.0, 0.0][..], &[0.0, 1.0][..]);
        assert_eq!(rows, vec![lp, lp, lp, ed, ed, ed, lp, lp, ed]);
        #[rustfmt::skip]
        let expected = vec![
            (1, 1, 1), (1, 4, 4), (1, 5, 5),
            (2, 2, 2), (2, 4, 4), (2, 6, 6),
            (3, 3, 3), (3, 5, 5), (3, 6, 6),
            (4, 1, 4), (4, 4, 2), (4, 5, 6),
            (5, 1, 5), (5, 5, 3), (5, 4, 6),
            (6, 2, 6), (6, 6, 3), (6, 4, 5),
            (7, 7, 7), (7, 9, 9),
            (8, 8, 8), (8, 9, 9),
            (9, 7, 9), (9, 9, 8),
        ];
        assert_eq!(triples(&enc), expected);
        enc.validate().unwrap();
        assert_eq!(enc.slice(0).unwrap().gamma(), 18);
    }

    #[test]
    fn single_vertex() {
        let enc = Wl2Encoding::encode(&Graph::new(1, []).unwrap(), 1).unwrap();
        assert_eq!((enc.m(), enc.gamma()), (1, 1));
        assert_eq!((enc.r_l[0], enc.r_g1[0], enc.r_g2[0]), (0, 0, 0));
        assert!(Wl2Encoding::encode(&Graph::new(1, []).unwrap(), 0).is_err());
    }

    #[test]
    fn synthetic_channel_marks_edges_of_the_base_graph() {
        let enc = Wl2Encoding::encode(&path_graph(3).unwrap(), 2).unwrap();
        assert!(enc.has_synthetic_edge_channel());
        assert_eq!(enc.m(), 6);
        let row = enc.row_of(0, 0, 2).unwrap();
        assert_eq!(enc.z0().row(row), &[0.0]);
        assert_eq!(enc.z0().row(enc.row_of(0, 1, 0).unwrap()), &[1.0]);
        assert_eq!(enc.z0().row(1), &[1.0]);
    }

    #[test]
    fn gamma_matches_intersection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = gnp_graph(8, 0.4, &mut rng);
        let enc = Wl2Encoding::encode(&g, 2).unwrap();
        let p = graph_power(&g, 2).unwrap();
        let mut gamma = 0;
        for &(i, j) in p.edges() {
            gamma += (0..8).filter(|&l| p.has_edge(i, l) && p.has_edge(l, j)).count();
        }
        assert_eq!(enc.gamma(), gamma);
        assert_eq!(enc.m(), p.num_edges());
        enc.validate().unwrap();
    }

    #[test]
    fn mixed_widths_are_rejected() {
        let a = unit_feature_graph(path_graph(2).unwrap());
        let b = path_graph(2).unwrap();
        assert!(Wl2Encoding::encode_batch(&[a, b], 1).is_err());
        assert!(Wl2Encoding::encode_batch(&[], 1).is_err());
    }

    #[test]
    fn validate_catches_corruption() {
        let mut enc = Wl2Encoding::encode(&complete_graph(4).unwrap(), 1).unwrap();
        enc.r_g2[5] = (enc.r_g2[5] + 1) % enc.m();
        assert!(enc.validate().is_err());
    }

    #[test]
    fn binary_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gs: Vec<Graph> = (0..3).map(|_| gnp_graph(7, 0.3, &mut rng)).collect();
        let enc = Wl2Encoding::encode_batch(&gs, 2).unwrap();
        let bytes = enc.to_bytes();
        assert_eq!(Wl2Encoding::from_bytes(&bytes).unwrap(), enc);
        assert!(Wl2Encoding::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert_eq!(Wl2Encoding::encode_batch(&gs, 2).unwrap().to_bytes(), bytes);
    }
}
