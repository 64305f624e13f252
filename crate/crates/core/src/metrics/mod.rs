//! Metric clustering spaces `M = (P, F, δ)`.
//!
//! Points are addressed by their index in `P`. Centers are either indices
//! into a finite `F` or, for continuous Euclidean space, coordinate vectors.

mod graph;
mod io;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norms::{NormError, NormObjective};

pub use graph::GraphMetric;
pub use io::{load_explicit_json, load_graph, load_points_csv, ExplicitMetricFile};

/// Closed-ball membership guard: `δ(u, v) ≤ r·(1 + BALL_GUARD)`.
pub const BALL_GUARD: f64 = 1e-12;

/// Above this many sites the explicit triangle check samples triples.
pub const FULL_TRIANGLE_LIMIT: usize = 200;

const SAMPLED_TRIANGLES: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("unknown id {0:?}")]
    UnknownId(String),

    #[error("point index {0} out of range")]
    PointOutOfRange(usize),

    #[error("center reference {0} is not valid for this space")]
    InvalidCenter(String),

    #[error("{0:?} and {1:?} are not connected")]
    Disconnected(String, String),

    #[error("the center set is empty")]
    EmptyCenters,

    #[error("the point set is empty")]
    EmptyPoints,

    #[error("operation needs an enumerable center set, but F = R^d")]
    ContinuousCenters,

    #[error("distance matrix is not a metric: {0}")]
    NotAMetric(String),

    #[error("triangle inequality violated: d({a},{c}) > d({a},{b}) + d({b},{c})")]
    TriangleViolation { a: String, b: String, c: String },

    #[error("coordinate dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid edge weight {weight} on {u} - {v}: weights must be positive")]
    InvalidEdgeWeight { u: String, v: String, weight: f64 },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Norm(#[from] NormError),
}

/// A center: an index into a finite `F`, or a point of `ℝ^d` when `F = ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Index(usize),
    Coord(Vec<f64>),
}

/// Any site of `P ∪ F`.
#[derive(Debug, Clone, Copy)]
pub enum Site<'a> {
    Point(usize),
    Center(&'a Center),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Universe {
    Points,
    Centers,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BallMembers {
    pub points: Vec<usize>,
    pub centers: Vec<usize>,
}

/// How the explicit-matrix triangle inequality is checked at load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriangleCheck {
    /// All triples up to [`FULL_TRIANGLE_LIMIT`] sites, a random sample above.
    #[default]
    Auto,
    Full,
    Skip,
}

#[derive(Debug)]
pub(crate) struct ExplicitMetric {
    ids: Vec<String>,
    matrix: Vec<f64>,
    points: Vec<usize>,
    centers: Vec<usize>,
}

impl ExplicitMetric {
    fn d(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.ids.len() + b]
    }
}

#[derive(Debug)]
pub(crate) struct EuclideanSpace {
    dim: usize,
    points: Vec<Vec<f64>>,
    // `None` means F = ℝ^d.
    centers: Option<Vec<Vec<f64>>>,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone)]
enum SpaceKind {
    Explicit(Arc<ExplicitMetric>),
    Graph(Arc<GraphMetric>),
    Euclidean(Arc<EuclideanSpace>),
}

/// A metric clustering space. Cheap to clone; clones share the underlying
/// data (and, for graphs, the shortest-path cache).
#[derive(Debug, Clone)]
pub struct MetricSpace {
    kind: SpaceKind,
    scale: f64,
}

impl MetricSpace {
    /// Explicit symmetric matrix over `ids`; `points` and `centers` name ids.
    pub fn explicit(
        ids: Vec<String>,
        matrix: Vec<Vec<f64>>,
        points: Vec<String>,
        centers: Vec<String>,
        check: TriangleCheck,
    ) -> Result<Self, MetricError> {
        let n = ids.len();
        if matrix.len() != n {
            return Err(MetricError::NotAMetric(format!(
                "matrix has {} rows for {} ids",
                matrix.len(),
                n
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotAMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let mut index = std::collections::HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(MetricError::NotAMetric(format!("duplicate id {id:?}")));
            }
        }
        let resolve = |names: &[String]| -> Result<Vec<usize>, MetricError> {
            names
                .iter()
                .map(|s| {
                    index
                        .get(s)
                        .copied()
                        .ok_or_else(|| MetricError::UnknownId(s.clone()))
                })
                .collect()
        };
        let points = resolve(&points)?;
        let centers = resolve(&centers)?;
        if points.is_empty() {
            return Err(MetricError::EmptyPoints);
        }
        if centers.is_empty() {
            return Err(MetricError::EmptyCenters);
        }
        let metric = ExplicitMetric {
            ids,
            matrix: flat,
            points,
            centers,
        };
        validate_explicit(&metric, check)?;
        Ok(Self {
            kind: SpaceKind::Explicit(Arc::new(metric)),
            scale: 1.0,
        })
    }

    /// Explicit matrix with ids `"0".."N-1"` and `P = F` = all ids.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let ids: Vec<String> = (0..matrix.len()).map(|i| i.to_string()).collect();
        Self::explicit(
            ids.clone(),
            matrix,
            ids.clone(),
            ids,
            TriangleCheck::Auto,
        )
    }

    /// Shortest-path metric of an undirected weighted graph.
    pub fn graph(
        edges: Vec<(String, String, f64)>,
        points: Vec<String>,
        centers: Vec<String>,
    ) -> Result<Self, MetricError> {
        Ok(Self {
            kind: SpaceKind::Graph(Arc::new(GraphMetric::new(edges, points, centers)?)),
            scale: 1.0,
        })
    }

    /// Discrete Euclidean space; `centers = None` means `F = P`.
    pub fn euclidean(
        points: Vec<Vec<f64>>,
        centers: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, MetricError> {
        let centers = centers.unwrap_or_else(|| points.clone());
        if centers.is_empty() {
            return Err(MetricError::EmptyCenters);
        }
        Self::euclidean_inner(points, Some(centers))
    }

    /// Continuous Euclidean space with `F = ℝ^d`.
    pub fn euclidean_continuous(points: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        Self::euclidean_inner(points, None)
    }

    fn euclidean_inner(
        points: Vec<Vec<f64>>,
        centers: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, MetricError> {
        let Some(first) = points.first() else {
            return Err(MetricError::EmptyPoints);
        };
        let dim = first.len();
        if dim == 0 {
            return Err(MetricError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for row in points.iter().chain(centers.iter().flatten()) {
            if row.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MetricError::NotAMetric(
                    "coordinates must be finite".into(),
                ));
            }
        }
        Ok(Self {
            kind: SpaceKind::Euclidean(Arc::new(EuclideanSpace {
                dim,
                points,
                centers,
            })),
            scale: 1.0,
        })
    }

    /// The same space with every distance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0 && factor.is_finite(), "scale factor must be positive");
        Self {
            kind: self.kind.clone(),
            scale: self.scale * factor,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn n_points(&self) -> usize {
        match &self.kind {
            SpaceKind::Explicit(m) => m.points.len(),
            SpaceKind::Graph(g) => g.num_points(),
            SpaceKind::Euclidean(e) => e.points.len(),
        }
    }

    /// `|F|`, or `None` when `F = ℝ^d`.
    pub fn n_centers(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::Explicit(m) => Some(m.centers.len()),
            SpaceKind::Graph(g) => Some(g.num_centers()),
            SpaceKind::Euclidean(e) => e.centers.as_ref().map(Vec::len),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.n_centers().is_none()
    }

    /// Coordinate dimension for Euclidean spaces.
    pub fn euclidean_dim(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::Euclidean(e) => Some(e.dim),
            _ => None,
        }
    }

    /// Coordinates of point `p` in a Euclidean space (unscaled).
    pub fn point_coords(&self, p: usize) -> Option<&[f64]> {
        match &self.kind {
            SpaceKind::Euclidean(e) => e.points.get(p).map(Vec::as_slice),
            _ => None,
        }
    }

    /// All centers of a finite `F`, in index order.
    pub fn center_list(&self) -> Result<Vec<Center>, MetricError> {
        let m = self.n_centers().ok_or(MetricError::ContinuousCenters)?;
        Ok((0..m).map(Center::Index).collect())
    }

    pub fn point_label(&self, p: usize) -> String {
        match &self.kind {
            SpaceKind::Explicit(m) => m.ids[m.points[p]].clone(),
            SpaceKind::Graph(g) => g.point_label(p).to_string(),
            SpaceKind::Euclidean(_) => p.to_string(),
        }
    }

    pub fn center_label(&self, c: usize) -> String {
        match &self.kind {
            SpaceKind::Explicit(m) => m.ids[m.centers[c]].clone(),
            SpaceKind::Graph(g) => g.center_label(c).to_string(),
            SpaceKind::Euclidean(_) => c.to_string(),
        }
    }

    /// Find a point by its label (id for explicit/graph, row index otherwise).
    pub fn point_by_label(&self, label: &str) -> Option<usize> {
        (0..self.n_points()).find(|&p| self.point_label(p) == label)
    }

    fn check_point(&self, p: usize) -> Result<(), MetricError> {
        if p < self.n_points() {
            Ok(())
        } else {
            Err(MetricError::PointOutOfRange(p))
        }
    }

    /// Whether `c` is a valid center reference for this space.
    pub fn check_center(&self, c: &Center) -> Result<(), MetricError> {
        match (c, &self.kind) {
            (Center::Index(j), _) if self.n_centers().is_some_and(|m| *j < m) => Ok(()),
            (Center::Coord(x), SpaceKind::Euclidean(e)) if e.centers.is_none() => {
                if x.len() != e.dim {
                    Err(MetricError::DimensionMismatch {
                        expected: e.dim,
                        got: x.len(),
                    })
                } else {
                    Ok(())
                }
            }
            _ => Err(MetricError::InvalidCenter(format!("{c:?}"))),
        }
    }

    /// Checked `δ(a, b)` between arbitrary sites.
    pub fn distance(&self, a: Site<'_>, b: Site<'_>) -> Result<f64, MetricError> {
        for s in [a, b] {
            match s {
                Site::Point(p) => self.check_point(p)?,
                Site::Center(c) => self.check_center(c)?,
            }
        }
        Ok(match (a, b) {
            (Site::Point(p), Site::Point(q)) => self.point_to_point(p, q),
            (Site::Point(p), Site::Center(c)) | (Site::Center(c), Site::Point(p)) => {
                self.point_to_center(p, c)
            }
            (Site::Center(c), Site::Center(e)) => self.center_to_center(c, e),
        })
    }

    /// `δ(p, q)` for points. Panics on out-of-range indices.
    pub fn point_to_point(&self, p: usize, q: usize) -> f64 {
        self.scale
            * match &self.kind {
                SpaceKind::Explicit(m) => m.d(m.points[p], m.points[q]),
                SpaceKind::Graph(g) => g.vertex_distance(g.point_vertex(p), g.point_vertex(q)),
                SpaceKind::Euclidean(e) => euclid(&e.points[p], &e.points[q]),
            }
    }

    /// `δ(p, c)` for a point and a center. Panics on invalid references.
    pub fn point_to_center(&self, p: usize, c: &Center) -> f64 {
        self.scale
            * match (&self.kind, c) {
                (SpaceKind::Explicit(m), Center::Index(j)) => m.d(m.points[p], m.centers[*j]),
                (SpaceKind::Graph(g), Center::Index(j)) => {
                    g.vertex_distance(g.point_vertex(p), g.center_vertex(*j))
                }
                (SpaceKind::Euclidean(e), Center::Index(j)) => euclid(
                    &e.points[p],
                    &e.centers.as_ref().expect("finite center set")[*j],
                ),
                (SpaceKind::Euclidean(e), Center::Coord(x)) => euclid(&e.points[p], x),
                (_, Center::Coord(_)) => panic!("coordinate center in a non-Euclidean space"),
            }
    }

    /// `δ(c, e)` between two centers. Panics on invalid references.
    pub fn center_to_center(&self, c: &Center, e: &Center) -> f64 {
        let coords = |sp: &EuclideanSpace, c: &Center| -> Vec<f64> {
            match c {
                Center::Index(j) => sp.centers.as_ref().expect("finite center set")[*j].clone(),
                Center::Coord(x) => x.clone(),
            }
        };
        self.scale
            * match (&self.kind, c, e) {
                (SpaceKind::Explicit(m), Center::Index(a), Center::Index(b)) => {
                    m.d(m.centers[*a], m.centers[*b])
                }
                (SpaceKind::Graph(g), Center::Index(a), Center::Index(b)) => {
                    g.vertex_distance(g.center_vertex(*a), g.center_vertex(*b))
                }
                (SpaceKind::Euclidean(sp), _, _) => euclid(&coords(sp, c), &coords(sp, e)),
                _ => panic!("coordinate center in a non-Euclidean space"),
            }
    }

    /// `δ(P, X)`: distance from every point to its nearest center in `X`.
    pub fn distance_vector(&self, centers: &[Center]) -> Result<Vec<f64>, MetricError> {
        if centers.is_empty() {
            return Err(MetricError::EmptyCenters);
        }
        for c in centers {
            self.check_center(c)?;
        }
        Ok((0..self.n_points())
            .map(|p| self.nearest_center(p, centers).1)
            .collect())
    }

    /// Nearest center of `X` to point `p` (lowest index among ties).
    pub fn nearest_center(&self, p: usize, centers: &[Center]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in centers.iter().enumerate() {
            let d = self.point_to_center(p, c);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Closed ball `{v : δ(u, v) ≤ r}` restricted to the requested universe.
    pub fn ball(&self, u: Site<'_>, r: f64, universe: Universe) -> Result<BallMembers, MetricError> {
        if !(r >= 0.0) {
            return Err(MetricError::NotAMetric(format!("ball radius {r} is negative")));
        }
        let limit = r * (1.0 + BALL_GUARD);
        let mut out = BallMembers::default();
        if matches!(universe, Universe::Points | Universe::Both) {
            for p in 0..self.n_points() {
                if self.distance(u, Site::Point(p))? <= limit {
                    out.points.push(p);
                }
            }
        }
        if matches!(universe, Universe::Centers | Universe::Both) {
            let m = self.n_centers().ok_or(MetricError::ContinuousCenters)?;
            for j in 0..m {
                if self.distance(u, Site::Center(&Center::Index(j)))? <= limit {
                    out.centers.push(j);
                }
            }
        }
        Ok(out)
    }

    /// A center located exactly at point `p`, if one exists (lowest index).
    pub fn colocated_center(&self, p: usize) -> Option<Center> {
        match self.n_centers() {
            None => Some(Center::Coord(
                self.point_coords(p).expect("continuous spaces are Euclidean").to_vec(),
            )),
            Some(m) => (0..m)
                .map(Center::Index)
                .find(|c| self.point_to_center(p, c) == 0.0),
        }
    }

    /// Largest pairwise distance among the given points.
    pub fn max_distance_among(&self, points: &[usize]) -> f64 {
        let mut best = 0.0_f64;
        for (i, &a) in points.iter().enumerate() {
            for &b in &points[i + 1..] {
                best = best.max(self.point_to_point(a, b));
            }
        }
        best
    }

    /// Full check of the metric axioms, regardless of the load-time policy.
    pub fn validate(&self) -> Result<(), MetricError> {
        match &self.kind {
            SpaceKind::Explicit(m) => validate_explicit(m, TriangleCheck::Full),
            // Graph distances and Euclidean distances are metrics by construction;
            // connectivity and weights are checked at load.
            SpaceKind::Graph(_) | SpaceKind::Euclidean(_) => Ok(()),
        }
    }
}

fn validate_explicit(m: &ExplicitMetric, check: TriangleCheck) -> Result<(), MetricError> {
    let n = m.ids.len();
    let mut max = 0.0_f64;
    for a in 0..n {
        if m.d(a, a) != 0.0 {
            return Err(MetricError::NotAMetric(format!(
                "d({0},{0}) = {1} is not zero",
                m.ids[a],
                m.d(a, a)
            )));
        }
        for b in 0..n {
            let d = m.d(a, b);
            if !(d.is_finite() && d >= 0.0) {
                return Err(MetricError::NotAMetric(format!(
                    "d({},{}) = {d} must be finite and nonnegative",
                    m.ids[a], m.ids[b]
                )));
            }
            if d != m.d(b, a) {
                return Err(MetricError::NotAMetric(format!(
                    "matrix is not symmetric at ({},{})",
                    m.ids[a], m.ids[b]
                )));
            }
            max = max.max(d);
        }
    }
    let tol = 1e-9 * max;
    let triple = |a: usize, b: usize, c: usize| -> Result<(), MetricError> {
        if m.d(a, c) > m.d(a, b) + m.d(b, c) + tol {
            Err(MetricError::TriangleViolation {
                a: m.ids[a].clone(),
                b: m.ids[b].clone(),
                c: m.ids[c].clone(),
            })
        } else {
            Ok(())
        }
    };
    let full = match check {
        TriangleCheck::Skip => return Ok(()),
        TriangleCheck::Full => true,
        TriangleCheck::Auto => n <= FULL_TRIANGLE_LIMIT,
    };
    if full {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    triple(a, b, c)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_TRIANGLES {
            triple(
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            )?;
        }
    }
    Ok(())
}

/// A set of `k` centers together with the induced distance vector and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub centers: Vec<Center>,
    pub dist_vector: Vec<f64>,
    pub cost: f64,
}

impl Solution {
    pub fn evaluate(
        space: &MetricSpace,
        norm: &NormObjective,
        centers: Vec<Center>,
    ) -> Result<Self, MetricError> {
        let dist_vector = space.distance_vector(&centers)?;
        let cost = norm.evaluate(&dist_vector)?;
        Ok(Self {
            centers,
            dist_vector,
            cost,
        })
    }

    /// Index (into `centers`) of each point's nearest center, lowest index on ties.
    pub fn assignment(&self, space: &MetricSpace) -> Vec<usize> {
        (0..space.n_points())
            .map(|p| space.nearest_center(p, &self.centers).0)
            .collect()
    }
}
