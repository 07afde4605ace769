//! Synthetic unicolored-triangle detection dataset.
//!
//! Every graph has vertices colored A (label 0) or B (label 1) and contains
//! exactly one triangle whose three vertices share a color. The class of
//! the graph is that color.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Graph};
use crate::error::Result;

/// Parameter grid of the generator. Each combination of vertex count,
/// color fraction, density and class is one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleConfig {
    pub vertex_counts: Vec<usize>,
    /// Fraction of vertices colored A.
    pub color_fractions: Vec<f64>,
    /// Ordered vertex pairs in `E` divided by `|V|^2`; each undirected edge
    /// counts twice.
    pub densities: Vec<f64>,
    pub samples_per_cell: usize,
    /// Rejection budget shared by all samples of one cell.
    pub max_attempts: usize,
}

impl Default for TriangleConfig {
    fn default() -> Self {
        TriangleConfig {
            vertex_counts: (6..=32).collect(),
            color_fractions: vec![0.5, 0.75, 0.25],
            densities: vec![0.25, 0.5],
            samples_per_cell: 3,
            max_attempts: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub vertices: usize,
    pub color_fraction: f64,
    pub density: f64,
    pub class: u8,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct TriangleDataset {
    pub dataset: Dataset,
    /// The unicolored triangle of each graph, ascending vertex ids.
    pub planted: Vec<[usize; 3]>,
    pub skipped: Vec<SkippedCell>,
}

/// Generates the dataset for `config`; identical seeds give identical output.
pub fn generate_triangle_dataset(config: &TriangleConfig, seed: u64) -> Result<TriangleDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    let mut planted = Vec::new();
    let mut skipped = Vec::new();
    for &n in &config.vertex_counts {
        for &fraction in &config.color_fractions {
            for &density in &config.densities {
                for class in [0u8, 1u8] {
                    match sample_cell(n, fraction, density, class, config, &mut rng) {
                        Ok(samples) => {
                            for (g, tri) in samples {
                                graphs.push(g);
                                labels.push(class);
                                planted.push(tri);
                            }
                        }
                        Err(reason) => {
                            warn!(
                                "TRIANGLE cell n={n} A-fraction={fraction} density={density} class={class} skipped: {reason}"
                            );
                            skipped.push(SkippedCell {
                                vertices: n,
                                color_fraction: fraction,
                                density,
                                class,
                                reason,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(TriangleDataset {
        dataset: Dataset::new("TRIANGLE", graphs, labels)?,
        planted,
        skipped,
    })
}

fn sample_cell(
    n: usize,
    fraction: f64,
    density: f64,
    class: u8,
    config: &TriangleConfig,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<(Graph, [usize; 3])>, String> {
    let count_a = ((n as f64) * fraction).round() as usize;
    let same = if class == 0 { count_a } else { n - count_a };
    if same < 3 {
        return Err(format!("only {same} vertices of the triangle color"));
    }
    let max_edges = n * (n - 1) / 2;
    let target = ((density * (n * n) as f64) / 2.0).round() as usize;
    if target > max_edges || target < 3 {
        return Err(format!("{target} edges infeasible for {n} vertices"));
    }
    let words = n.div_ceil(64);
    let mut samples = Vec::with_capacity(config.samples_per_cell);
    let mut attempts = 0;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(max_edges);
    while samples.len() < config.samples_per_cell {
        if attempts == config.max_attempts {
            return Err(format!("rejection budget of {} attempts exhausted", config.max_attempts));
        }
        attempts += 1;

        let mut colors = vec![1usize; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for &v in &order[..count_a] {
            colors[v] = 0;
        }
        let tri_color = class as usize;
        let mut candidates: Vec<usize> = (0..n).filter(|&v| colors[v] == tri_color).collect();
        candidates.shuffle(rng);
        let mut tri = [candidates[0], candidates[1], candidates[2]];
        tri.sort_unstable();

        let mut adj = vec![0u64; n * words];
        let set = |adj: &mut [u64], a: usize, b: usize| {
            adj[a * words + b / 64] |= 1 << (b % 64);
            adj[b * words + a / 64] |= 1 << (a % 64);
        };
        let forced = [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])];
        pairs.clear();
        for i in 0..n {
            for j in i + 1..n {
                if !forced.contains(&(i, j)) {
                    pairs.push((i, j));
                }
            }
        }
        let (chosen, _) = pairs.partial_shuffle(rng, target - 3);
        let mut edges: Vec<(usize, usize)> = forced.to_vec();
        edges.extend_from_slice(chosen);
        for &(a, b) in &edges {
            set(&mut adj, a, b);
        }
        if count_unicolored(&adj, words, &colors, 2) != 1 {
            continue;
        }
        let g = Graph::new(n, edges)
            .and_then(|g| g.with_one_hot_labels(colors, 2))
            .map_err(|e| e.to_string())?;
        samples.push((g, tri));
    }
    Ok(samples)
}

/// Counts same-colored triangles through bit-parallel neighborhood
/// intersection, stopping once `limit` is reached.
fn count_unicolored(adj: &[u64], words: usize, colors: &[usize], limit: usize) -> usize {
    let n = colors.len();
    let mut masks = [vec![0u64; words], vec![0u64; words]];
    for (v, &c) in colors.iter().enumerate() {
        masks[c][v / 64] |= 1 << (v % 64);
    }
    let mut count = 0;
    for i in 0..n {
        let mask = &masks[colors[i]];
        for j in i + 1..n {
            if colors[j] != colors[i] || adj[i * words + j / 64] & (1 << (j % 64)) == 0 {
                continue;
            }
            for w in 0..words {
                let mut common = adj[i * words + w] & adj[j * words + w] & mask[w];
                // only k > j
                if w < (j + 1) / 64 {
                    common = 0;
                } else if w == (j + 1) / 64 {
                    common &= u64::MAX.checked_shl(((j + 1) % 64) as u32).unwrap_or(0);
                }
                count += common.count_ones() as usize;
                if count >= limit {
                    return count;
                }
            }
        }
    }
    count
}

/// All triangles whose vertices share a label, by exhaustive enumeration.
pub fn unicolored_triangles(g: &Graph) -> Vec<[usize; 3]> {
    let Some(labels) = g.vertex_labels() else {
        return Vec::new();
    };
    let n = g.num_vertices();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if labels[i] == labels[j]
                    && labels[j] == labels[k]
                    && g.has_edge(i, j)
                    && g.has_edge(i, k)
                    && g.has_edge(j, k)
                {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}
