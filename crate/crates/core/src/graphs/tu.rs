//! Reader and writer for the TU benchmark text format.
//!
//! A dataset `DS` is a directory holding `DS_A.txt` (one `a, b` edge per
//! line, 1-indexed global vertex ids), `DS_graph_indicator.txt` (graph id
//! of each vertex), `DS_graph_labels.txt`, and optionally
//! `DS_node_labels.txt`, `DS_node_attributes.txt`, `DS_edge_labels.txt` and
//! `DS_edge_attributes.txt`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::{Dataset, Graph};
use crate::error::{Error, Result};

struct TuFile {
    path: PathBuf,
    lines: Vec<(usize, String)>,
}

impl TuFile {
    fn open(dir: &Path, name: &str, suffix: &str) -> Result<Option<TuFile>> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.trim().to_string()))
            .collect();
        Ok(Some(TuFile { path, lines }))
    }

    fn require(dir: &Path, name: &str, suffix: &str) -> Result<TuFile> {
        Self::open(dir, name, suffix)?.ok_or_else(|| {
            let path = dir.join(format!("{name}_{suffix}.txt"));
            Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "required TU file missing"),
            )
        })
    }

    fn error(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            file: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn integers(&self) -> Result<Vec<(usize, i64)>> {
        self.lines
            .iter()
            .map(|(no, l)| {
                l.parse::<i64>()
                    .map(|v| (*no, v))
                    .map_err(|_| self.error(*no, format!("expected an integer, found {l:?}")))
            })
            .collect()
    }

    fn float_rows(&self) -> Result<Vec<Vec<f64>>> {
        let mut width = None;
        let mut rows = Vec::with_capacity(self.lines.len());
        for (no, l) in &self.lines {
            let row = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| self.error(*no, format!("malformed attribute row {l:?}")))?;
            if *width.get_or_insert(row.len()) != row.len() {
                return Err(self.error(*no, "attribute row width differs from the first row"));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

fn dataset_name(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|s| s.strip_suffix("_A.txt").map(String::from)))
        .collect();
    names.sort();
    names.into_iter().next().ok_or_else(|| {
        Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no *_A.txt file in directory"),
        )
    })
}

fn one_hot_index(values: &[(usize, i64)]) -> BTreeMap<i64, usize> {
    let distinct: BTreeSet<i64> = values.iter().map(|&(_, v)| v).collect();
    distinct.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
}

/// Loads a TU dataset directory. Vertex features are the one-hot node
/// labels followed by the node attributes; graphs without vertex data get
/// the constant feature `1.0`. Edge features are built the same way from
/// edge labels and attributes. Graph labels are remapped to `{0, 1}` in
/// ascending order.
pub fn load_tu_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let name = dataset_name(dir)?;
    let indicator_file = TuFile::require(dir, &name, "graph_indicator")?;
    let indicator = indicator_file.integers()?;
    let label_file = TuFile::require(dir, &name, "graph_labels")?;
    let raw_labels = label_file.integers()?;
    let adjacency_file = TuFile::require(dir, &name, "A")?;

    let num_graphs = raw_labels.len();
    let total_nodes = indicator.len();
    // global vertex -> (graph, local id)
    let mut location = Vec::with_capacity(total_nodes);
    let mut sizes = vec![0usize; num_graphs];
    for &(no, gid) in &indicator {
        if gid < 1 || gid as usize > num_graphs {
            return Err(indicator_file.error(
                no,
                format!("graph id {gid} outside 1..={num_graphs}"),
            ));
        }
        let g = gid as usize - 1;
        location.push((g, sizes[g]));
        sizes[g] += 1;
    }

    let mut label_map = BTreeMap::new();
    for &(no, l) in &raw_labels {
        let next = label_map.len();
        label_map.entry(l).or_insert(next);
        if label_map.len() > 2 {
            return Err(label_file.error(no, format!("third distinct graph label {l}; labels must be binary")));
        }
    }
    let ordered: BTreeMap<i64, u8> = label_map
        .keys()
        .enumerate()
        .map(|(i, &l)| (l, i as u8))
        .collect();
    let labels: Vec<u8> = raw_labels.iter().map(|(_, l)| ordered[l]).collect();

    // vertex data
    let node_labels = match TuFile::open(dir, &name, "node_labels")? {
        Some(f) => {
            let v = f.integers()?;
            if v.len() != total_nodes {
                return Err(f.error(v.len().max(1), format!("{} node labels for {total_nodes} vertices", v.len())));
            }
            Some(v)
        }
        None => None,
    };
    let node_attrs = match TuFile::open(dir, &name, "node_attributes")? {
        Some(f) => {
            let rows = f.float_rows()?;
            if rows.len() != total_nodes {
                return Err(f.error(rows.len().max(1), format!("{} attribute rows for {total_nodes} vertices", rows.len())));
            }
            Some(rows)
        }
        None => None,
    };
    let node_classes = node_labels.as_deref().map(one_hot_index);
    let label_width = node_classes.as_ref().map_or(0, BTreeMap::len);
    let attr_width = node_attrs.as_ref().and_then(|r| r.first()).map_or(0, Vec::len);
    let vertex_dim = if label_width + attr_width == 0 { 1 } else { label_width + attr_width };

    // edges
    let mut edge_lists: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); num_graphs];
    let mut self_loops = 0usize;
    for (line_idx, (no, l)) in adjacency_file.lines.iter().enumerate() {
        let mut parts = l.split(',').map(|t| t.trim().parse::<usize>());
        let (Some(Ok(a)), Some(Ok(b)), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(adjacency_file.error(*no, format!("malformed edge line {l:?}")));
        };
        for v in [a, b] {
            if v < 1 || v > total_nodes {
                return Err(adjacency_file.error(*no, format!("vertex {v} outside 1..={total_nodes}")));
            }
        }
        let ((ga, la), (gb, lb)) = (location[a - 1], location[b - 1]);
        if ga != gb {
            return Err(adjacency_file.error(*no, format!("edge {a},{b} joins graphs {} and {}", ga + 1, gb + 1)));
        }
        if la == lb {
            self_loops += 1;
            continue;
        }
        edge_lists[ga].push((la, lb, line_idx));
    }
    if self_loops > 0 {
        warn!("{name}: dropped {self_loops} self-loop lines");
    }

    let edge_label_file = TuFile::open(dir, &name, "edge_labels")?;
    let edge_labels = match &edge_label_file {
        Some(f) => Some(f.integers()?),
        None => None,
    };
    let edge_attr_file = TuFile::open(dir, &name, "edge_attributes")?;
    let edge_attrs = match &edge_attr_file {
        Some(f) => Some(f.float_rows()?),
        None => None,
    };
    let expected_rows = adjacency_file.lines.len();
    for (file, rows) in [
        (&edge_label_file, edge_labels.as_ref().map(Vec::len)),
        (&edge_attr_file, edge_attrs.as_ref().map(Vec::len)),
    ] {
        if let (Some(f), Some(len)) = (file, rows) {
            if len != expected_rows {
                return Err(f.error(len.max(1), format!("{len} rows for {expected_rows} edge lines")));
            }
        }
    }
    let edge_classes = edge_labels.as_deref().map(one_hot_index);
    let edge_label_width = edge_classes.as_ref().map_or(0, BTreeMap::len);
    let edge_attr_width = edge_attrs.as_ref().and_then(|r| r.first()).map_or(0, Vec::len);
    let edge_dim = edge_label_width + edge_attr_width;

    let mut global_of: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (global, &(g, _)) in location.iter().enumerate() {
        global_of[g].push(global);
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for g in 0..num_graphs {
        let n = sizes[g];
        let graph = Graph::new(n, edge_lists[g].iter().map(|&(a, b, _)| (a, b)))?;
        let mut vf = vec![0.0; n * vertex_dim];
        for (local, &global) in global_of[g].iter().enumerate() {
            let row = &mut vf[local * vertex_dim..(local + 1) * vertex_dim];
            if label_width + attr_width == 0 {
                row[0] = 1.0;
                continue;
            }
            if let (Some(nl), Some(classes)) = (&node_labels, &node_classes) {
                row[classes[&nl[global].1]] = 1.0;
            }
            if let Some(attrs) = &node_attrs {
                row[label_width..].copy_from_slice(&attrs[global]);
            }
        }
        let mut ef = vec![0.0; graph.num_edges() * edge_dim];
        if edge_dim > 0 {
            let mut filled = vec![false; graph.num_edges()];
            for &(a, b, line) in &edge_lists[g] {
                let e = graph.edge_id(a, b).expect("edge inserted above");
                if std::mem::replace(&mut filled[e], true) {
                    continue;
                }
                let row = &mut ef[e * edge_dim..(e + 1) * edge_dim];
                if let (Some(el), Some(classes)) = (&edge_labels, &edge_classes) {
                    row[classes[&el[line].1]] = 1.0;
                }
                if let Some(attrs) = &edge_attrs {
                    row[edge_label_width..].copy_from_slice(&attrs[line]);
                }
            }
        }
        let mut graph = graph
            .with_vertex_features(vertex_dim, vf)?
            .with_edge_features(edge_dim, ef)?;
        if let (Some(nl), Some(classes)) = (&node_labels, &node_classes) {
            let vl = global_of[g].iter().map(|&gl| classes[&nl[gl].1]).collect();
            graph = graph.with_vertex_labels(vl)?;
        }
        graphs.push(graph);
    }
    Dataset::new(name, graphs, labels)
}

/// Writes `dataset` as TU files named after `dataset.name` into `dir`.
/// Vertex labels, when present, go to `node_labels`; otherwise non-empty
/// vertex features go to `node_attributes`. Edges are listed in both
/// orientations.
pub fn write_tu_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &dataset.name;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut graph_labels = String::new();
    let mut node_labels = String::new();
    let mut node_attrs = String::new();
    let mut edge_attrs = String::new();
    let labelled = dataset.graphs.iter().all(|g| g.vertex_labels().is_some());
    let with_edge_attrs = dataset.graphs.iter().any(|g| g.edge_dim() > 0);
    let join = |row: &[f64]| row.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
    let mut offset = 1;
    for (gi, (g, &label)) in dataset.graphs.iter().zip(&dataset.labels).enumerate() {
        let _ = writeln!(graph_labels, "{label}");
        for v in 0..g.num_vertices() {
            let _ = writeln!(indicator, "{}", gi + 1);
            if labelled {
                let _ = writeln!(node_labels, "{}", g.vertex_labels().unwrap_or_default()[v]);
            } else if g.vertex_dim() > 0 {
                let _ = writeln!(node_attrs, "{}", join(g.vertex_feature(v)));
            }
        }
        for &(i, j) in g.edges() {
            for (x, y) in [(i, j), (j, i)] {
                let _ = writeln!(a, "{}, {}", x + offset, y + offset);
                if with_edge_attrs {
                    let _ = writeln!(edge_attrs, "{}", join(g.edge_feature(i, j).unwrap_or_default()));
                }
            }
        }
        offset += g.num_vertices();
    }
    let mut files: HashMap<&str, &String> = HashMap::from([
        ("A", &a),
        ("graph_indicator", &indicator),
        ("graph_labels", &graph_labels),
    ]);
    if labelled {
        files.insert("node_labels", &node_labels);
    } else if !node_attrs.is_empty() {
        files.insert("node_attributes", &node_attrs);
    }
    if with_edge_attrs {
        files.insert("edge_attributes", &edge_attrs);
    }
    for (suffix, content) in files {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
