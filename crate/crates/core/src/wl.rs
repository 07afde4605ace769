//! Folklore Weisfeiler-Lehman color refinement for `k ∈ {1, 2}`.
//!
//! Colors are integers handed out by a [`Palette`], an exact dictionary
//! from canonical refinement keys to fresh integers. Graphs that should be
//! comparable must be refined against the same palette.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graphs::Graph;

/// Injective map from canonical keys to colors, assigned in first-encounter
/// order.
#[derive(Debug, Clone, Default)]
pub struct Palette {
    colors: HashMap<Vec<u64>, u32>,
}

impl Palette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn color(&mut self, key: Vec<u64>) -> u32 {
        let next = self.colors.len() as u32;
        *self.colors.entry(key).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

const INITIAL: u64 = 0;
const REFINED: u64 = 1;

/// A `k`-coloring: one color per ordered vertex `k`-tuple. Tuple
/// `(v_1, .., v_k)` is stored at `Σ v_i n^(k-i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    k: usize,
    n: usize,
    colors: Vec<u32>,
}

impl Coloring {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn vertex(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn pair(&self, i: usize, j: usize) -> u32 {
        self.colors[i * self.n + j]
    }

    pub fn num_classes(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn histogram(&self) -> ColorHistogram {
        let mut counts = BTreeMap::new();
        for &c in &self.colors {
            *counts.entry(c).or_insert(0) += 1;
        }
        ColorHistogram { counts }
    }

    /// True iff `self` and `other` induce the same partition of the tuples.
    pub fn equivalent(&self, other: &Coloring) -> bool {
        if self.colors.len() != other.colors.len() {
            return false;
        }
        let mut forward = HashMap::new();
        let mut backward = HashMap::new();
        self.colors.iter().zip(&other.colors).all(|(&a, &b)| {
            *forward.entry(a).or_insert(b) == b && *backward.entry(b).or_insert(a) == a
        })
    }

    /// True iff every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Coloring) -> bool {
        let mut map = HashMap::new();
        self.colors
            .iter()
            .zip(&coarser.colors)
            .all(|(&fine, &coarse)| *map.entry(fine).or_insert(coarse) == coarse)
    }
}

/// The color distribution of a coloring.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorHistogram {
    pub counts: BTreeMap<u32, usize>,
}

impl ColorHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Class sizes, ascending; comparable across unrelated palettes.
    pub fn shape(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.counts.values().copied().collect();
        sizes.sort_unstable();
        sizes
    }

    /// One `color count` line per color, ascending by color.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, n) in &self.counts {
            let _ = writeln!(out, "{c} {n}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let parsed = match (it.next(), it.next(), it.next()) {
                (Some(c), Some(n), None) => c.parse::<u32>().ok().zip(n.parse::<usize>().ok()),
                _ => None,
            };
            let (c, n) = parsed.ok_or_else(|| Error::Parse {
                file: "<histogram>".into(),
                line: no + 1,
                msg: format!("expected `color count`, found {line:?}"),
            })?;
            counts.insert(c, n);
        }
        Ok(ColorHistogram { counts })
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 1 || k == 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("WL dimension {k} unsupported; use 1 or 2")))
    }
}

fn label(g: &Graph, v: usize) -> u64 {
    g.vertex_labels().map_or(0, |l| l[v] as u64)
}

/// Initial coloring: by vertex label for `k = 1` (constant when
/// unlabelled); for `k = 2`, each ordered pair by its isomorphism type
/// (self, edge or non-edge) together with the unordered endpoint labels.
pub fn initial_coloring(g: &Graph, k: usize, palette: &mut Palette) -> Result<Coloring> {
    check_k(k)?;
    let n = g.num_vertices();
    let colors = if k == 1 {
        (0..n).map(|v| palette.color(vec![INITIAL, label(g, v)])).collect()
    } else {
        let mut colors = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (label(g, i), label(g, j));
                let kind = if i == j {
                    0
                } else if g.has_edge(i, j) {
                    1
                } else {
                    2
                };
                colors.push(palette.color(vec![INITIAL, kind, a.min(b), a.max(b)]));
            }
        }
        colors
    };
    Ok(Coloring { k, n, colors })
}

/// One 1-WL step: the key of `v` is its color and the sorted multiset of
/// neighbor colors.
pub fn refine_wl1(g: &Graph, c: &Coloring, palette: &mut Palette) -> Result<Coloring> {
    if c.k != 1 || c.n != g.num_vertices() {
        return Err(Error::shape("refine_wl1", "coloring does not match a 1-WL state of g"));
    }
    let mut colors = Vec::with_capacity(c.n);
    for v in 0..c.n {
        let mut around: Vec<u64> = g
            .neighbors(v)
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| c.colors[u] as u64)
            .collect();
        around.sort_unstable();
        let mut key = Vec::with_capacity(around.len() + 2);
        key.extend([REFINED, c.colors[v] as u64]);
        key.extend(around);
        colors.push(palette.color(key));
    }
    Ok(Coloring { k: 1, n: c.n, colors })
}

/// One Folklore 2-WL step: the key of `(i, j)` is its color and the sorted
/// multiset of `(color(u, j), color(i, u))` over all vertices `u`.
pub fn refine_wl2(g: &Graph, c: &Coloring, palette: &mut Palette) -> Result<Coloring> {
    let n = g.num_vertices();
    if c.k != 2 || c.n != n {
        return Err(Error::shape("refine_wl2", "coloring does not match a 2-WL state of g"));
    }
    let mut colors = Vec::with_capacity(n * n);
    let mut pairs: Vec<u64> = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            pairs.clear();
            pairs.extend((0..n).map(|u| ((c.pair(u, j) as u64) << 32) | c.pair(i, u) as u64));
            pairs.sort_unstable();
            let mut key = Vec::with_capacity(n + 2);
            key.extend([REFINED, c.pair(i, j) as u64]);
            key.extend_from_slice(&pairs);
            colors.push(palette.color(key));
        }
    }
    Ok(Coloring { k: 2, n, colors })
}

fn refine(g: &Graph, c: &Coloring, palette: &mut Palette) -> Result<Coloring> {
    match c.k {
        1 => refine_wl1(g, c, palette),
        _ => refine_wl2(g, c, palette),
    }
}

/// Result of a refinement run.
#[derive(Debug, Clone)]
pub struct WlRun {
    pub coloring: Coloring,
    /// Index `t` of the first stable coloring (`χ^(t) ≡ χ^(t+1)`), counted
    /// as 1 when the initial coloring is already stable: one round is
    /// always needed to observe stability.
    pub iterations: usize,
}

/// Refines until the partition of `V^k` stops changing.
pub fn run_wl(g: &Graph, k: usize, palette: &mut Palette) -> Result<WlRun> {
    check_k(k)?;
    let mut current = initial_coloring(g, k, palette)?;
    let mut t = 0;
    loop {
        let next = refine(g, &current, palette)?;
        // refinement never merges classes, so equal counts mean equal partitions
        if next.num_classes() == current.num_classes() {
            return Ok(WlRun {
                coloring: next,
                iterations: t.max(1),
            });
        }
        current = next;
        t += 1;
    }
}

/// Final `k`-WL histograms of `g` and `h`, refined in lockstep on a shared
/// palette until the joint partition is stable.
pub fn joint_histograms(g: &Graph, h: &Graph, k: usize) -> Result<(ColorHistogram, ColorHistogram)> {
    check_k(k)?;
    let mut palette = Palette::new();
    let mut cg = initial_coloring(g, k, &mut palette)?;
    let mut ch = initial_coloring(h, k, &mut palette)?;
    let joint_classes = |a: &Coloring, b: &Coloring| {
        let mut all: Vec<u32> = a.colors.iter().chain(&b.colors).copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    loop {
        let ng = refine(g, &cg, &mut palette)?;
        let nh = refine(h, &ch, &mut palette)?;
        let stable = joint_classes(&ng, &nh) == joint_classes(&cg, &ch);
        cg = ng;
        ch = nh;
        if stable {
            return Ok((cg.histogram(), ch.histogram()));
        }
    }
}

/// True iff `k`-WL tells `g` and `h` apart.
pub fn distinguishable(g: &Graph, h: &Graph, k: usize) -> Result<bool> {
    let (a, b) = joint_histograms(g, h, k)?;
    Ok(a != b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete_graph, cycle_graph, disjoint_union, path_graph, star_graph};

    #[test]
    fn constant_and_pair_initialisation_on_c6() {
        let c6 = cycle_graph(6).unwrap();
        let mut p = Palette::new();
        assert_eq!(initial_coloring(&c6, 1, &mut p).unwrap().histogram().shape(), vec![6]);
        let two = initial_coloring(&c6, 2, &mut p).unwrap();
        assert_eq!(two.histogram().shape(), vec![6, 12, 18]);
        assert!(initial_coloring(&c6, 3, &mut p).is_err());
    }

    #[test]
    fn labelled_initialisation_follows_labels() {
        let g = path_graph(4).unwrap().with_vertex_labels(vec![0, 1, 1, 1]).unwrap();
        let c = initial_coloring(&g, 1, &mut Palette::new()).unwrap();
        assert_eq!(c.histogram().shape(), vec![1, 3]);
    }

    #[test]
    fn star_splits_center_from_leaves() {
        let g = star_graph(3).unwrap();
        let mut p = Palette::new();
        let c0 = initial_coloring(&g, 1, &mut p).unwrap();
        let c1 = refine_wl1(&g, &c0, &mut p).unwrap();
        assert_eq!(c1.histogram().shape(), vec![1, 3]);
        assert_ne!(c1.vertex(0), c1.vertex(1));
    }

    #[test]
    fn regular_graphs_stay_constant() {
        let g = cycle_graph(7).unwrap();
        let mut p = Palette::new();
        let c0 = initial_coloring(&g, 1, &mut p).unwrap();
        let c1 = refine_wl1(&g, &c0, &mut p).unwrap();
        assert_eq!(c1.num_classes(), 1);
        assert!(c1.equivalent(&c0));
    }

    #[test]
    fn run_wl_examples() {
        let mut p = Palette::new();
        let k5 = run_wl(&complete_graph(5).unwrap(), 1, &mut p).unwrap();
        assert_eq!((k5.iterations, k5.coloring.num_classes()), (1, 1));
        let p4 = run_wl(&path_graph(4).unwrap(), 1, &mut p).unwrap();
        assert_eq!(p4.coloring.histogram().shape(), vec![2, 2]);
        assert_eq!(p4.coloring.vertex(0), p4.coloring.vertex(3));
        assert_eq!(p4.coloring.vertex(1), p4.coloring.vertex(2));
    }

    #[test]
    fn single_vertex_pair_is_stable() {
        let g = Graph::new(1, []).unwrap();
        let mut p = Palette::new();
        let run = run_wl(&g, 2, &mut p).unwrap();
        assert_eq!(run.coloring.colors().len(), 1);
        assert_eq!(run.iterations, 1);
    }

    #[test]
    fn edge_neighborhood_graph_of_regular_graph_is_stable_after_one_round() {
        let g = crate::graphs::circulant_graph(9, &[1, 3]).unwrap();
        let run = run_wl(&crate::graphs::edge_neighborhood_graph(&g), 1, &mut Palette::new()).unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.coloring.histogram().shape(), vec![9, 18]);
        let p4 = run_wl(&path_graph(4).unwrap(), 1, &mut Palette::new()).unwrap();
        assert_eq!(p4.iterations, 1);
        let p5 = run_wl(&path_graph(5).unwrap(), 1, &mut Palette::new()).unwrap();
        assert_eq!(p5.iterations, 2);
    }

    #[test]
    fn c4_keeps_edges_and_diagonals_apart() {
        let g = cycle_graph(4).unwrap();
        let run = run_wl(&g, 2, &mut Palette::new()).unwrap();
        let c = &run.coloring;
        assert_ne!(c.pair(0, 1), c.pair(0, 2));
        assert_eq!(c.pair(0, 1), c.pair(1, 2));
        assert_eq!(c.pair(0, 2), c.pair(1, 3));
    }

    #[test]
    fn six_cycle_against_two_triangles() {
        let c6 = cycle_graph(6).unwrap();
        let c3 = cycle_graph(3).unwrap();
        let h = disjoint_union(&[c3.clone(), c3]).unwrap();
        assert!(!distinguishable(&c6, &h, 1).unwrap());
        assert!(distinguishable(&c6, &h, 2).unwrap());
        assert!(!distinguishable(&c6, &c6, 2).unwrap());

        // histograms after one 1-WL step coincide as well
        let mut p = Palette::new();
        let a = refine_wl1(&c6, &initial_coloring(&c6, 1, &mut p).unwrap(), &mut p).unwrap();
        let b = refine_wl1(&h, &initial_coloring(&h, 1, &mut p).unwrap(), &mut p).unwrap();
        assert_eq!(a.histogram(), b.histogram());
        // and 2-WL separates them after its first step
        let mut p = Palette::new();
        let a = refine_wl2(&c6, &initial_coloring(&c6, 2, &mut p).unwrap(), &mut p).unwrap();
        let b = refine_wl2(&h, &initial_coloring(&h, 2, &mut p).unwrap(), &mut p).unwrap();
        assert_ne!(a.histogram(), b.histogram());
    }

    #[test]
    fn histogram_text_round_trip() {
        let run = run_wl(&path_graph(5).unwrap(), 1, &mut Palette::new()).unwrap();
        let h = run.coloring.histogram();
        let text = h.to_text();
        assert_eq!(ColorHistogram::from_text(&text).unwrap(), h);
        assert!(ColorHistogram::from_text("1 2 3").is_err());
    }
}
