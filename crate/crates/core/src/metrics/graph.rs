use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use super::MetricError;

/// Shortest-path metric of an undirected graph with positive edge weights.
///
/// Single-source distances are computed on first use and cached per source
/// vertex. The cache is filled idempotently, so concurrent readers always see
/// the same values an eager computation would have produced.
#[derive(Debug)]
pub struct GraphMetric {
    labels: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
    points: Vec<usize>,
    centers: Vec<usize>,
    cache: Vec<OnceLock<Vec<f64>>>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    vertex: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State {
        dist: 0.0,
        vertex: source,
    });
    while let Some(State { dist: d, vertex }) = heap.pop() {
        if d > dist[vertex] {
            continue;
        }
        for &(next, w) in &adjacency[vertex] {
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(State {
                    dist: nd,
                    vertex: next,
                });
            }
        }
    }
    dist
}

impl GraphMetric {
    pub fn new(
        edges: Vec<(String, String, f64)>,
        points: Vec<String>,
        centers: Vec<String>,
    ) -> Result<Self, MetricError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut intern = |s: &str, labels: &mut Vec<String>| -> usize {
            *index.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let mut raw = Vec::with_capacity(edges.len());
        for (u, v, w) in &edges {
            if !(w.is_finite() && *w > 0.0) {
                return Err(MetricError::InvalidEdgeWeight {
                    u: u.clone(),
                    v: v.clone(),
                    weight: *w,
                });
            }
            raw.push((intern(u, &mut labels), intern(v, &mut labels), *w));
        }
        let points: Vec<usize> = points.iter().map(|s| intern(s, &mut labels)).collect();
        let centers: Vec<usize> = centers.iter().map(|s| intern(s, &mut labels)).collect();
        if points.is_empty() {
            return Err(MetricError::EmptyPoints);
        }
        if centers.is_empty() {
            return Err(MetricError::EmptyCenters);
        }

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); labels.len()];
        for (u, v, w) in raw {
            if u == v {
                continue;
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        let cache = (0..labels.len()).map(|_| OnceLock::new()).collect();
        let graph = Self {
            labels,
            adjacency,
            points,
            centers,
            cache,
        };

        let root = graph.points[0];
        let from_root = graph.distances_from(root);
        for &v in graph.points.iter().chain(&graph.centers) {
            if from_root[v].is_infinite() {
                return Err(MetricError::Disconnected(
                    graph.labels[root].clone(),
                    graph.labels[v].clone(),
                ));
            }
        }
        Ok(graph)
    }

    fn distances_from(&self, source: usize) -> &[f64] {
        self.cache[source].get_or_init(|| dijkstra(&self.adjacency, source))
    }

    pub(crate) fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.distances_from(a)[b]
    }

    pub(crate) fn point_vertex(&self, p: usize) -> usize {
        self.points[p]
    }

    pub(crate) fn center_vertex(&self, c: usize) -> usize {
        self.centers[c]
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn point_label(&self, p: usize) -> &str {
        &self.labels[self.points[p]]
    }

    pub fn center_label(&self, c: usize) -> &str {
        &self.labels[self.centers[c]]
    }
}
