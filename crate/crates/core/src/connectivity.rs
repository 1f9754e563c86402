//! Pearson connectivity matrices and their binarization into graphs.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::ingest::RoiTimeSeries;

#[derive(Debug, thiserror::Error)]
pub enum ConnectivityError {
    #[error("region {region:?} has zero variance")]
    ZeroVarianceRegion { region: String },
    #[error("threshold tau must lie in (-1, 1), got {0}")]
    TauOutOfRange(f64),
    #[error("density must lie in (0, 1], got {0}")]
    DensityOutOfRange(f64),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, ConnectivityError>;

/// Sample standard deviation below which a region counts as constant.
pub const MIN_REGION_STD: f64 = 1e-12;

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    region_labels: Vec<String>,
    values: DMatrix<f64>,
}

impl ConnectivityMatrix {
    pub fn new(region_labels: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let r = region_labels.len();
        if values.shape() != (r, r) {
            return Err(ConnectivityError::InvalidMatrix(format!(
                "{}x{} values for {r} labels",
                values.nrows(),
                values.ncols()
            )));
        }
        for i in 0..r {
            if values[(i, i)] != 1.0 {
                return Err(ConnectivityError::InvalidMatrix(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..r {
                let v = values[(i, j)];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(ConnectivityError::InvalidMatrix(format!("entry ({i},{j}) = {v} outside [-1,1]")));
                }
                if (v - values[(j, i)]).abs() > 1e-12 {
                    return Err(ConnectivityError::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { region_labels, values })
    }

    pub fn region_labels(&self) -> &[String] {
        &self.region_labels
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_regions(&self) -> usize {
        self.region_labels.len()
    }

    pub fn to_csv_string(&self) -> String {
        matrix_csv(&self.region_labels, |i, j| self.values[(i, j)].to_string())
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (labels, cells) = parse_matrix_csv(text)?;
        let r = labels.len();
        let mut values = DMatrix::zeros(r, r);
        for (idx, cell) in cells.iter().enumerate() {
            values[(idx / r, idx % r)] = cell
                .parse::<f64>()
                .map_err(|_| ConnectivityError::InvalidMatrix(format!("bad number {cell:?}")))?;
        }
        Self::new(labels, values)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv_string())
    }
}

/// Undirected simple graph over labelled regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGraph {
    region_labels: Vec<String>,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl BinaryGraph {
    /// Graph with no edges.
    pub fn empty(region_labels: Vec<String>) -> Self {
        let n = region_labels.len();
        Self {
            region_labels,
            adjacency: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from undirected index pairs. Self-loops are rejected.
    pub fn from_edges(region_labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(region_labels);
        let n = g.n_nodes();
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(ConnectivityError::InvalidMatrix(format!("invalid edge ({a},{b})")));
            }
            g.adjacency[a * n + b] = true;
            g.adjacency[b * n + a] = true;
        }
        g.rebuild_neighbors();
        Ok(g)
    }

    /// Builds a graph from an `n×n` boolean matrix (row-major). The matrix
    /// must be symmetric with a false diagonal.
    pub fn from_adjacency(region_labels: Vec<String>, adjacency: Vec<bool>) -> Result<Self> {
        let n = region_labels.len();
        if adjacency.len() != n * n {
            return Err(ConnectivityError::InvalidMatrix(format!(
                "{} adjacency cells for {n} nodes",
                adjacency.len()
            )));
        }
        for i in 0..n {
            if adjacency[i * n + i] {
                return Err(ConnectivityError::InvalidMatrix(format!("self-loop at {i}")));
            }
            for j in 0..i {
                if adjacency[i * n + j] != adjacency[j * n + i] {
                    return Err(ConnectivityError::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        let mut g = Self {
            region_labels,
            adjacency,
            neighbors: Vec::new(),
        };
        g.rebuild_neighbors();
        Ok(g)
    }

    fn rebuild_neighbors(&mut self) {
        let n = self.n_nodes();
        self.neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| self.adjacency[i * n + j]).collect())
            .collect();
    }

    pub fn region_labels(&self) -> &[String] {
        &self.region_labels
    }

    pub fn n_nodes(&self) -> usize {
        self.region_labels.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a * self.n_nodes() + b]
    }

    /// Neighbors of `v` in ascending index order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, lexicographically ordered.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n_nodes())
            .flat_map(|i| self.neighbors[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// Fraction of possible edges present; 0 for graphs with fewer than two nodes.
    pub fn density(&self) -> f64 {
        let n = self.n_nodes();
        if n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1) / 2) as f64
    }

    /// Subgraph induced by `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> BinaryGraph {
        let labels = nodes.iter().map(|&v| self.region_labels[v].clone()).collect();
        let k = nodes.len();
        let mut adjacency = vec![false; k * k];
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate() {
                adjacency[a * k + b] = u != v && self.has_edge(u, v);
            }
        }
        let mut g = BinaryGraph {
            region_labels: labels,
            adjacency,
            neighbors: Vec::new(),
        };
        g.rebuild_neighbors();
        g
    }

    pub fn to_csv_string(&self) -> String {
        matrix_csv(&self.region_labels, |i, j| {
            if self.has_edge(i, j) { "1" } else { "0" }.to_string()
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (labels, cells) = parse_matrix_csv(text)?;
        let adjacency = cells
            .iter()
            .map(|c| match c.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(ConnectivityError::InvalidMatrix(format!("expected 0 or 1, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_adjacency(labels, adjacency)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv_string())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| ConnectivityError::Io {
        path: path.to_path_buf(),
        source,
    })
}

const CORNER: &str = "region";

fn matrix_csv(labels: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = std::iter::once(CORNER.to_string()).chain(labels.iter().cloned());
    w.write_record(header).expect("writing to memory");
    for (i, label) in labels.iter().enumerate() {
        let row = std::iter::once(label.clone()).chain((0..labels.len()).map(|j| cell(i, j)));
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
}

/// Returns the labels and the `r*r` cells in row-major order. Row labels
/// must repeat the header labels in the same order.
fn parse_matrix_csv(text: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |m: String| ConnectivityError::InvalidMatrix(m);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = rows.first().ok_or_else(|| bad("empty matrix file".into()))?;
    let labels: Vec<String> = header.iter().skip(1).cloned().collect();
    let r = labels.len();
    if rows.len() != r + 1 {
        return Err(bad(format!("expected {r} data rows, found {}", rows.len() - 1)));
    }
    let mut cells = Vec::with_capacity(r * r);
    for (i, row) in rows.iter().skip(1).enumerate() {
        if row.len() != r + 1 {
            return Err(bad(format!("row {} has {} cells, expected {}", i + 1, row.len(), r + 1)));
        }
        if row[0] != labels[i] {
            return Err(bad(format!("row label {:?} does not match column label {:?}", row[0], labels[i])));
        }
        cells.extend(row.iter().skip(1).cloned());
    }
    Ok((labels, cells))
}

/// Sample Pearson correlation between every pair of regions.
pub fn pearson_matrix(ts: &RoiTimeSeries) -> Result<ConnectivityMatrix> {
    let data = ts.data();
    let t = data.nrows();
    let r = data.ncols();
    let mut centered = data.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        let mean = col.sum() / t as f64;
        col.add_scalar_mut(-mean);
        let std = (col.norm_squared() / (t - 1) as f64).sqrt();
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(std > MIN_REGION_STD) {
            return Err(ConnectivityError::ZeroVarianceRegion {
                region: ts.region_labels()[j].clone(),
            });
        }
        let norm = col.norm();
        col /= norm;
    }
    let gram = centered.transpose() * &centered;
    let mut values = DMatrix::identity(r, r);
    for i in 0..r {
        for j in (i + 1)..r {
            let v = gram[(i, j)].clamp(-1.0, 1.0);
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(ConnectivityMatrix {
        region_labels: ts.region_labels().to_vec(),
        values,
    })
}

/// Edge `(i, j)` exists iff the correlation strictly exceeds `tau`.
pub fn threshold_graph(cm: &ConnectivityMatrix, tau: f64) -> Result<BinaryGraph> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(ConnectivityError::TauOutOfRange(tau));
    }
    let r = cm.n_regions();
    let mut edges = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            if cm.values[(i, j)] > tau {
                edges.push((i, j));
            }
        }
    }
    BinaryGraph::from_edges(cm.region_labels.clone(), &edges)
}

/// Number of edges kept by [`density_threshold`] for `r` regions.
pub fn edges_for_density(r: usize, density: f64) -> usize {
    let pairs = r * r.saturating_sub(1) / 2;
    // guard against e.g. 0.1 * 30 = 3.0000000000000004 rounding up
    let raw = density * pairs as f64;
    let k = (raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize;
    k.min(pairs)
}

/// Keeps the `⌈density · R(R−1)/2⌉` strongest upper-triangle entries.
/// Ties at the cut go to the lexicographically smaller `(i, j)`.
pub fn density_threshold(cm: &ConnectivityMatrix, density: f64) -> Result<BinaryGraph> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(ConnectivityError::DensityOutOfRange(density));
    }
    let r = cm.n_regions();
    let mut pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| ((i + 1)..r).map(move |j| (i, j)))
        .collect();
    // stable sort keeps lexicographic order among equal values
    pairs.sort_by(|&(a, b), &(c, d)| cm.values[(c, d)].total_cmp(&cm.values[(a, b)]));
    pairs.truncate(edges_for_density(r, density));
    BinaryGraph::from_edges(cm.region_labels.clone(), &pairs)
}

/// One-line edge summary, handy for logs.
pub fn describe(g: &BinaryGraph) -> String {
    format!("{} nodes, {} edges, density {:.4}", g.n_nodes(), g.edge_count(), g.density())
}
