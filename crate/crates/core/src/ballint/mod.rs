//! Ball Intersection: find a center within `(1+η)·r` of every request `(p, r)`.
//!
//! [`solve`] is the composed solver used by the clustering engine: radii are
//! rounded up to powers of `1 + η/50`, continuous instances additionally drop
//! requests implied by much smaller ones and go through the weighted 1-center
//! optimizer, and every original request is re-checked at the end.

mod ky;

use thiserror::Error;

use crate::metrics::{Center, MetricError, MetricSpace, BALL_GUARD};

pub use ky::{weighted_one_center, StopRule, WeightedCenter};

/// Default constant `C` in the weighted 1-center budget `⌈C·τ/η²⌉`.
pub const DEFAULT_KY_BUDGET_CONSTANT: f64 = 64.0;

/// Relative size of the radius substituted for zero-radius requests.
pub const ZERO_RADIUS_FRACTION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallIntError {
    #[error("exact ball intersection needs a finite center set")]
    ContinuousCenters,

    #[error("the weighted 1-center solver needs a Euclidean space with F = R^d")]
    NotContinuousEuclidean,

    #[error("no requests given")]
    EmptyRequests,

    #[error("points have dimension zero")]
    ZeroDimension,

    #[error("invalid radius {0}")]
    InvalidRadius(f64),

    #[error("eta must lie in (0, 1), got {0}")]
    InvalidEta(f64),

    #[error("{points} points but {radii} radii")]
    LengthMismatch { points: usize, radii: usize },

    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A distance constraint `(p, r)` on the center of one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub point: usize,
    pub radius: f64,
}

impl Request {
    /// Radii must be finite and nonnegative; zero radii are handled by [`solve`].
    pub fn new(point: usize, radius: f64) -> Result<Self, BallIntError> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(BallIntError::InvalidRadius(radius));
        }
        Ok(Self { point, radius })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallIntersectionOutcome {
    /// The center found, or `None` for FAIL.
    pub result: Option<Center>,
    pub eta: f64,
    /// `max δ(x, p) / r` over the requests checked (infinite when no center
    /// was produced).
    pub satisfied_margin: f64,
    /// Inner solver iterations (weighted 1-center only).
    pub iterations: usize,
}

impl BallIntersectionOutcome {
    pub fn is_success(&self) -> bool {
        self.result.is_some()
    }

    fn fail(eta: f64, margin: f64, iterations: usize) -> Self {
        Self {
            result: None,
            eta,
            satisfied_margin: margin,
            iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallIntConfig {
    /// `C` in the weighted 1-center iteration budget `⌈C·τ/η²⌉`.
    pub ky_budget_constant: f64,
}

impl Default for BallIntConfig {
    fn default() -> Self {
        Self {
            ky_budget_constant: DEFAULT_KY_BUDGET_CONSTANT,
        }
    }
}

fn check_eta(eta: f64) -> Result<(), BallIntError> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(BallIntError::InvalidEta(eta))
    }
}

/// `max δ(x, p) / r` over the requests.
pub fn margin(space: &MetricSpace, center: &Center, requests: &[Request]) -> f64 {
    requests
        .iter()
        .map(|q| {
            let d = space.point_to_center(q.point, center);
            if q.radius > 0.0 {
                d / q.radius
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Lowest-index center of a finite `F` satisfying every request exactly.
pub fn solve_exact_finite(
    space: &MetricSpace,
    requests: &[Request],
) -> Result<BallIntersectionOutcome, BallIntError> {
    let m = space.n_centers().ok_or(BallIntError::ContinuousCenters)?;
    for q in requests {
        if q.point >= space.n_points() {
            return Err(MetricError::PointOutOfRange(q.point).into());
        }
    }
    for j in 0..m {
        let c = Center::Index(j);
        let feasible = requests
            .iter()
            .all(|q| space.point_to_center(q.point, &c) <= q.radius * (1.0 + BALL_GUARD));
        if feasible {
            let margin = margin(space, &c, requests);
            return Ok(BallIntersectionOutcome {
                result: Some(c),
                eta: 0.0,
                satisfied_margin: margin,
                iterations: 0,
            });
        }
    }
    Ok(BallIntersectionOutcome::fail(0.0, f64::INFINITY, 0))
}

/// `⌈C·τ/η²⌉` with `τ = (r_max / r_min)²`.
pub fn ky_iteration_budget(radii: &[f64], eta: f64, constant: f64) -> usize {
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let tau = (r_max / r_min).powi(2);
    let budget = (constant * tau / (eta * eta)).ceil();
    if budget >= usize::MAX as f64 {
        usize::MAX
    } else {
        budget as usize
    }
}

/// Approximate weighted 1-center over `ℝ^d`. Succeeds iff the achieved ratio
/// `max ‖x − p_i‖ / r_i` is at most `1 + η`; the optimizer runs to a certified
/// `(1+η)` factor of the optimum, so any instance with an exactly feasible
/// center succeeds.
pub fn solve_ky_euclidean(
    points: &[&[f64]],
    radii: &[f64],
    eta: f64,
    config: &BallIntConfig,
) -> Result<BallIntersectionOutcome, BallIntError> {
    check_eta(eta)?;
    if points.len() != radii.len() {
        return Err(BallIntError::LengthMismatch {
            points: points.len(),
            radii: radii.len(),
        });
    }
    let Some(first) = points.first() else {
        return Err(BallIntError::EmptyRequests);
    };
    if first.is_empty() {
        return Err(BallIntError::ZeroDimension);
    }
    for p in points {
        if p.len() != first.len() {
            return Err(MetricError::DimensionMismatch {
                expected: first.len(),
                got: p.len(),
            }
            .into());
        }
    }
    if let Some(&r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(BallIntError::InvalidRadius(r));
    }
    let budget = ky_iteration_budget(radii, eta, config.ky_budget_constant);
    let stop = StopRule {
        rel_gap: eta,
        give_up_above: 1.0 + eta,
    };
    let out = weighted_one_center(points, radii, stop, budget);
    if out.max_ratio <= 1.0 + eta {
        Ok(BallIntersectionOutcome {
            result: Some(Center::Coord(out.center)),
            eta,
            satisfied_margin: out.max_ratio,
            iterations: out.iterations,
        })
    } else {
        Ok(BallIntersectionOutcome::fail(eta, out.max_ratio, out.iterations))
    }
}

/// Keep only requests with `η/3·r ≤ ρ`, where `ρ` is the smallest power of two
/// that is at least the smallest radius.
pub fn aspect_filter(requests: &[Request], eta: f64) -> Vec<Request> {
    let r_min = requests
        .iter()
        .map(|q| q.radius)
        .fold(f64::INFINITY, f64::min);
    if !(r_min.is_finite() && r_min > 0.0) {
        return requests.to_vec();
    }
    let mut rho = 2f64.powi(r_min.log2().ceil() as i32);
    while rho < r_min {
        rho *= 2.0;
    }
    while rho / 2.0 >= r_min {
        rho /= 2.0;
    }
    requests
        .iter()
        .copied()
        .filter(|q| eta / 3.0 * q.radius <= rho)
        .collect()
}

/// Smallest power of `1 + η/50` (integer exponent) that is `≥ r`.
pub fn round_radius(r: f64, eta: f64) -> f64 {
    if r <= 0.0 {
        return r;
    }
    let base = 1.0 + eta / 50.0;
    let mut k = (r.ln() / base.ln()).ceil() as i32;
    while base.powi(k) < r {
        k += 1;
    }
    while base.powi(k - 1) >= r {
        k -= 1;
    }
    base.powi(k)
}

pub fn round_radii(requests: &[Request], eta: f64) -> Vec<Request> {
    requests
        .iter()
        .map(|q| Request {
            point: q.point,
            radius: round_radius(q.radius, eta),
        })
        .collect()
}

/// Replace zero radii by a tiny fraction of the spread of the request points.
fn substitute_zero_radii(space: &MetricSpace, requests: &[Request]) -> Vec<Request> {
    if requests.iter().all(|q| q.radius > 0.0) {
        return requests.to_vec();
    }
    let pts: Vec<usize> = requests.iter().map(|q| q.point).collect();
    let diameter = space.max_distance_among(&pts);
    let tiny = if diameter > 0.0 {
        ZERO_RADIUS_FRACTION * diameter
    } else {
        ZERO_RADIUS_FRACTION
    };
    requests
        .iter()
        .map(|q| Request {
            point: q.point,
            radius: if q.radius > 0.0 { q.radius } else { tiny },
        })
        .collect()
}

/// The composed Ball Intersection solver used by the clustering engine.
///
/// On success the returned center `η`-satisfies every input request; if some
/// center of `F` satisfies all requests exactly, the solver does not fail.
pub fn solve(
    space: &MetricSpace,
    requests: &[Request],
    eta: f64,
    config: &BallIntConfig,
) -> Result<BallIntersectionOutcome, BallIntError> {
    check_eta(eta)?;
    for q in requests {
        if q.point >= space.n_points() {
            return Err(MetricError::PointOutOfRange(q.point).into());
        }
        if !(q.radius.is_finite() && q.radius >= 0.0) {
            return Err(BallIntError::InvalidRadius(q.radius));
        }
    }
    if requests.is_empty() {
        let center = match space.n_centers() {
            Some(_) => Center::Index(0),
            None => space.colocated_center(0).expect("continuous space has coordinates"),
        };
        return Ok(BallIntersectionOutcome {
            result: Some(center),
            eta,
            satisfied_margin: 0.0,
            iterations: 0,
        });
    }

    let original = substitute_zero_radii(space, requests);
    let rounded = round_radii(&original, eta);
    let (candidate, iterations) = if space.is_continuous() {
        let kept = aspect_filter(&rounded, eta);
        let coords: Vec<&[f64]> = kept
            .iter()
            .map(|q| space.point_coords(q.point).expect("continuous spaces are Euclidean"))
            .collect();
        // The weighted 1-center works in unscaled coordinates.
        let radii: Vec<f64> = kept.iter().map(|q| q.radius / space.scale()).collect();
        let out = solve_ky_euclidean(&coords, &radii, eta / 2.0, config)?;
        (out.result, out.iterations)
    } else {
        (solve_exact_finite(space, &rounded)?.result, 0)
    };

    let Some(center) = candidate else {
        return Ok(BallIntersectionOutcome::fail(eta, f64::INFINITY, iterations));
    };
    let achieved = margin(space, &center, &original);
    if achieved <= 1.0 + eta {
        Ok(BallIntersectionOutcome {
            result: Some(center),
            eta,
            satisfied_margin: achieved,
            iterations,
        })
    } else {
        Ok(BallIntersectionOutcome::fail(eta, achieved, iterations))
    }
}
