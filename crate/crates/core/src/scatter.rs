//! The ε-scattering game: a center player proposes a center covering every
//! earlier point, and a point player refutes it with a point farther than
//! `(1+ε)` times the radius. Record lengths are empirical lower bounds on the
//! scatter dimension of the space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ballint::{self, BallIntConfig, BallIntError, Request};
use crate::metrics::{Center, MetricError, MetricSpace};

/// Relative tolerance of [`verify_scattering`].
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("max_len must be at least 1")]
    ZeroLength,

    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),

    #[error("exact center search needs a finite center set")]
    ContinuousCenters,

    #[error("the weighted 1-center strategy needs a continuous Euclidean space")]
    NotContinuous,

    #[error("a packing needs a plain record of length at least 2, got length {0}")]
    RecordTooShort(usize),

    #[error("a packing needs a plain record")]
    NotPlain,

    #[error(transparent)]
    Metric(#[from] MetricError),

    #[error(transparent)]
    BallInt(#[from] BallIntError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterStrategy {
    ExactFinite,
    KyContinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PointStrategy {
    #[default]
    FarthestViolator,
    RandomViolator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterMode {
    /// Unit radii, exact covering.
    Plain,
    /// Covering up to the solver slack.
    Algorithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterTriple {
    pub center: Center,
    pub point: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRecord {
    pub triples: Vec<ScatterTriple>,
    pub eps: f64,
    pub mode: ScatterMode,
    /// Allowed relative excess in the covering inequalities.
    pub slack: f64,
    /// Factor applied to the input distances before the game.
    pub scale: f64,
}

impl ScatterRecord {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// The record truncated to its first `len` triples.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            triples: self.triples[..len.min(self.len())].to_vec(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub eps: f64,
    pub center_strategy: CenterStrategy,
    pub point_strategy: PointStrategy,
    pub max_len: usize,
    /// Seed 0 opens with the first center; other seeds open at random and
    /// drive the random point player.
    pub seed: u64,
    /// Rescale so every site lies within distance 1 of the first point.
    pub normalize: bool,
    pub ballint: BallIntConfig,
}

impl GameConfig {
    pub fn new(eps: f64, center_strategy: CenterStrategy) -> Self {
        Self {
            eps,
            center_strategy,
            point_strategy: PointStrategy::default(),
            max_len: 100,
            seed: 0,
            normalize: true,
            ballint: BallIntConfig::default(),
        }
    }
}

/// Largest distance from the first point to any point or center.
fn circumradius(space: &MetricSpace) -> f64 {
    let mut r = (0..space.n_points())
        .map(|q| space.point_to_point(0, q))
        .fold(0.0, f64::max);
    if let Some(m) = space.n_centers() {
        for j in 0..m {
            r = r.max(space.point_to_center(0, &Center::Index(j)));
        }
    }
    r
}

pub fn play_scatter_game(space: &MetricSpace, config: &GameConfig) -> Result<ScatterRecord, ScatterError> {
    let eps = config.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ScatterError::InvalidEps(eps));
    }
    if config.max_len == 0 {
        return Err(ScatterError::ZeroLength);
    }
    let (mode, slack) = match config.center_strategy {
        CenterStrategy::ExactFinite if space.is_continuous() => {
            return Err(ScatterError::ContinuousCenters)
        }
        CenterStrategy::KyContinuous if !space.is_continuous() => {
            return Err(ScatterError::NotContinuous)
        }
        CenterStrategy::ExactFinite => (ScatterMode::Plain, 0.0),
        CenterStrategy::KyContinuous => (ScatterMode::Algorithmic, eps / 2.0),
    };
    let r = circumradius(space);
    let scale = if config.normalize && r > 0.0 { 1.0 / r } else { 1.0 };
    let game = space.scaled(scale);
    let n = game.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut center = if config.seed == 0 {
        match game.n_centers() {
            Some(_) => Center::Index(0),
            None => game.colocated_center(0).expect("continuous space has coordinates"),
        }
    } else {
        match game.n_centers() {
            Some(m) => Center::Index(rng.random_range(0..m)),
            None => game
                .colocated_center(rng.random_range(0..n))
                .expect("continuous space has coordinates"),
        }
    };

    let mut triples: Vec<ScatterTriple> = Vec::new();
    let mut requests: Vec<Request> = Vec::new();
    while triples.len() < config.max_len {
        if !requests.is_empty() {
            let outcome = match config.center_strategy {
                CenterStrategy::ExactFinite => ballint::solve_exact_finite(&game, &requests)?,
                CenterStrategy::KyContinuous => {
                    ballint::solve(&game, &requests, eps / 2.0, &config.ballint)?
                }
            };
            match outcome.result {
                Some(c) => center = c,
                None => break,
            }
        }
        let dist: Vec<f64> = (0..n).map(|p| game.point_to_center(p, &center)).collect();
        let violators: Vec<usize> = (0..n).filter(|&p| dist[p] > 1.0 + eps).collect();
        if violators.is_empty() {
            break;
        }
        let point = match config.point_strategy {
            PointStrategy::FarthestViolator => {
                let mut best = violators[0];
                for &p in &violators[1..] {
                    if dist[p] > dist[best] {
                        best = p;
                    }
                }
                best
            }
            PointStrategy::RandomViolator => violators[rng.random_range(0..violators.len())],
        };
        triples.push(ScatterTriple {
            center: center.clone(),
            point,
            radius: 1.0,
        });
        requests.push(Request { point, radius: 1.0 });
    }
    Ok(ScatterRecord {
        triples,
        eps,
        mode,
        slack,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Covering,
    Refutation,
    InvalidReference,
}

/// The first failed inequality: center `i` against point `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterViolation {
    pub i: usize,
    pub j: usize,
    pub kind: ViolationKind,
    pub distance: f64,
    pub bound: f64,
}

/// Check covering `δ(x_i, p_j) ≤ (1+slack)·r_j` for `j < i` and refutation
/// `δ(x_i, p_i) > (1+ε)·r_i`, in triple order.
pub fn verify_scattering(
    space: &MetricSpace,
    record: &ScatterRecord,
    eps: f64,
) -> Result<(), ScatterViolation> {
    let game = space.scaled(record.scale);
    for (i, t) in record.triples.iter().enumerate() {
        let bad_ref = game.check_center(&t.center).is_err() || t.point >= game.n_points();
        if bad_ref || !(t.radius > 0.0) {
            return Err(ScatterViolation {
                i,
                j: i,
                kind: ViolationKind::InvalidReference,
                distance: f64::NAN,
                bound: t.radius,
            });
        }
        for (j, earlier) in record.triples[..i].iter().enumerate() {
            let d = game.point_to_center(earlier.point, &t.center);
            let bound = (1.0 + record.slack) * earlier.radius;
            if d > bound * (1.0 + VERIFY_TOL) {
                return Err(ScatterViolation {
                    i,
                    j,
                    kind: ViolationKind::Covering,
                    distance: d,
                    bound,
                });
            }
        }
        let d = game.point_to_center(t.point, &t.center);
        let bound = (1.0 + eps) * t.radius;
        if d * (1.0 + VERIFY_TOL) <= bound {
            return Err(ScatterViolation {
                i,
                j: i,
                kind: ViolationKind::Refutation,
                distance: d,
                bound,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    /// `x_2, …, x_ℓ`.
    pub centers: Vec<Center>,
    pub min_pairwise: f64,
    pub max_pairwise: f64,
    /// `max_i δ(p_1, x_i)`.
    pub max_to_first_point: f64,
    pub separated: bool,
    pub diameter_ok: bool,
    pub in_unit_ball: bool,
}

impl PackingReport {
    pub fn is_valid(&self) -> bool {
        self.separated && self.diameter_ok && self.in_unit_ball
    }
}

/// The centers after the first of a plain record form an `ε`-packing inside
/// the unit ball around the first point.
pub fn packing_from_scattering(
    space: &MetricSpace,
    record: &ScatterRecord,
) -> Result<PackingReport, ScatterError> {
    if record.mode != ScatterMode::Plain {
        return Err(ScatterError::NotPlain);
    }
    if record.len() < 2 {
        return Err(ScatterError::RecordTooShort(record.len()));
    }
    let game = space.scaled(record.scale);
    let centers: Vec<Center> = record.triples[1..].iter().map(|t| t.center.clone()).collect();
    for c in &centers {
        game.check_center(c)?;
    }
    let p1 = record.triples[0].point;
    let mut min_pairwise = f64::INFINITY;
    let mut max_pairwise = 0.0_f64;
    for (a, ca) in centers.iter().enumerate() {
        for cb in &centers[a + 1..] {
            let d = game.center_to_center(ca, cb);
            min_pairwise = min_pairwise.min(d);
            max_pairwise = max_pairwise.max(d);
        }
    }
    let max_to_first_point = centers
        .iter()
        .map(|c| game.point_to_center(p1, c))
        .fold(0.0, f64::max);
    let eps = record.eps;
    Ok(PackingReport {
        separated: min_pairwise * (1.0 + VERIFY_TOL) > eps,
        diameter_ok: max_pairwise <= 2.0 * (1.0 + VERIFY_TOL),
        in_unit_ball: max_to_first_point <= 1.0 + VERIFY_TOL,
        centers,
        min_pairwise,
        max_pairwise,
        max_to_first_point,
    })
}
