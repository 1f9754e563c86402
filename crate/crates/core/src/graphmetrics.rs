//! Node- and graph-level metrics on unweighted undirected graphs.
//!
//! Distances are hop counts from breadth-first search. Unreachable pairs
//! have infinite distance and contribute `1/∞ = 0` wherever an inverse
//! distance is summed. Normalizations follow the common conventions:
//!
//! * closeness uses the component-size scaled form
//!   `(m / Σ d) · (m / (n − 1))` with `m` reachable nodes,
//! * betweenness is divided by `(n − 1)(n − 2) / 2`,
//! * nodes with fewer than two neighbors count as 0 in local efficiency
//!   but still take part in the mean.

use std::collections::VecDeque;

use serde::Serialize;

use crate::connectivity::BinaryGraph;

/// The five per-region metrics, each of length R.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMetricTable {
    pub region_labels: Vec<String>,
    pub clustering: Vec<f64>,
    pub degree_centrality: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub avg_neighbor_degree: Vec<f64>,
}

impl NodeMetricTable {
    pub fn n_regions(&self) -> usize {
        self.region_labels.len()
    }

    /// Metric columns in feature order, paired with their names.
    pub fn columns(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("clustering", &self.clustering),
            ("degree_centrality", &self.degree_centrality),
            ("closeness", &self.closeness),
            ("betweenness", &self.betweenness),
            ("avg_neighbor_degree", &self.avg_neighbor_degree),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphMetricPair {
    pub local_efficiency: f64,
    pub global_efficiency: f64,
}

/// Hop distances from `source`; `None` marks unreachable nodes.
pub fn bfs_distances(g: &BinaryGraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n_nodes()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].expect("queued nodes have a distance");
        for &w in g.neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn clustering_coefficient(g: &BinaryGraph) -> Vec<f64> {
    (0..g.n_nodes())
        .map(|v| {
            let nbrs = g.neighbors(v);
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (a, &u) in nbrs.iter().enumerate() {
                for &w in &nbrs[a + 1..] {
                    if g.has_edge(u, w) {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

pub fn degree_centrality(g: &BinaryGraph) -> Vec<f64> {
    let n = g.n_nodes();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|v| g.degree(v) as f64 / (n - 1) as f64).collect()
}

pub fn closeness_centrality(g: &BinaryGraph) -> Vec<f64> {
    let n = g.n_nodes();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|v| {
            let (reach, total) = bfs_distances(g, v)
                .iter()
                .flatten()
                .filter(|&&d| d > 0)
                .fold((0usize, 0usize), |(m, s), &d| (m + 1, s + d));
            if reach == 0 {
                return 0.0;
            }
            let m = reach as f64;
            (m / total as f64) * (m / (n - 1) as f64)
        })
        .collect()
}

/// Brandes' accumulation over all sources, normalized by
/// `2 / ((n − 1)(n − 2))`. Graphs with fewer than three nodes give zeros.
pub fn betweenness_centrality(g: &BinaryGraph) -> Vec<f64> {
    let n = g.n_nodes();
    let mut raw = vec![0.0f64; n];
    if n < 3 {
        return raw;
    }
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        // predecessors of w are neighbors one hop closer to s
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                raw[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both endpoints
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    raw.iter().map(|b| b * scale).collect()
}

pub fn average_neighbor_degree(g: &BinaryGraph) -> Vec<f64> {
    (0..g.n_nodes())
        .map(|v| {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                return 0.0;
            }
            nbrs.iter().map(|&u| g.degree(u) as f64).sum::<f64>() / nbrs.len() as f64
        })
        .collect()
}

/// Mean inverse shortest-path length over ordered pairs of distinct nodes.
pub fn global_efficiency(g: &BinaryGraph) -> f64 {
    let n = g.n_nodes();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|s| {
            bfs_distances(g, s)
                .iter()
                .flatten()
                .filter(|&&d| d > 0)
                .map(|&d| 1.0 / d as f64)
                .sum::<f64>()
        })
        .sum();
    total / (n * (n - 1)) as f64
}

/// Mean over all nodes of the global efficiency of the subgraph induced by
/// each node's neighbors.
pub fn local_efficiency(g: &BinaryGraph) -> f64 {
    let n = g.n_nodes();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|v| {
            let nbrs = g.neighbors(v);
            if nbrs.len() < 2 {
                0.0
            } else {
                global_efficiency(&g.induced_subgraph(nbrs))
            }
        })
        .sum();
    total / n as f64
}

pub fn node_metrics(g: &BinaryGraph) -> NodeMetricTable {
    NodeMetricTable {
        region_labels: g.region_labels().to_vec(),
        clustering: clustering_coefficient(g),
        degree_centrality: degree_centrality(g),
        closeness: closeness_centrality(g),
        betweenness: betweenness_centrality(g),
        avg_neighbor_degree: average_neighbor_degree(g),
    }
}

pub fn graph_metrics(g: &BinaryGraph) -> GraphMetricPair {
    GraphMetricPair {
        local_efficiency: local_efficiency(g),
        global_efficiency: global_efficiency(g),
    }
}
