//! The randomized witness-sampling engine for norm k-clustering.
//!
//! For a guess `opt` of the optimum, every point gets an initial upper bound
//! `u(p) = min{α > 0 : f(1_{ball(p, α/3)}) ≥ 3·opt/α}` on its distance to an
//! optimal solution. A greedy pass marks pairwise far points (at most `k`
//! when the guess is large enough) and opens one constrained cluster per
//! marked point. The main loop then repeatedly samples a point `p` with
//! probability proportional to `g(p)·δ(p, X)` over the admissible points
//! (`g` a subgradient at the current distance vector), assigns it to a
//! uniformly random cluster with radius `δ(p, X)/(1 + ε/3)`, and re-solves
//! that cluster's Ball Intersection instance. A run either reaches cost
//! `≤ (1+ε)·opt` or fails; independent restarts boost the success
//! probability and [`search_opt`] walks a geometric grid of guesses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use thiserror::Error;

use crate::ballint::{self, BallIntConfig, BallIntError, Request};
use crate::metrics::{Center, MetricError, MetricSpace, Solution};
use crate::norms::{NormError, NormObjective};

/// Default stand-in for the scatter-dimension bound in the iteration cap.
pub const DEFAULT_LAMBDA: f64 = 100.0;
/// Default constant `C` of the iteration cap `⌈C·(k/ε)·ln(k/ε)·Λ⌉`.
pub const DEFAULT_CAP_CONSTANT: f64 = 8.0;

const POINT_STREAM: u64 = 0;
const CLUSTER_STREAM: u64 = 1;
const MAX_GRID_STEPS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpasError {
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),

    #[error("k must be at least 1")]
    InvalidK,

    #[error("k = {k} exceeds the number of centers {centers}")]
    KExceedsCenters { k: usize, centers: usize },

    #[error("norm dimension {norm} does not match the {points} points")]
    DimensionMismatch { norm: usize, points: usize },

    #[error("optimum guess must be positive, got {0}")]
    InvalidOptGuess(f64),

    #[error("restart budget must be at least 1")]
    ZeroRestarts,

    #[error("iteration cap must be at least 1")]
    ZeroIterationCap,

    #[error("grid factor must be > 1, got {0}")]
    InvalidGridFactor(f64),

    #[error("the norm vanishes on every indicator vector")]
    DegenerateNorm,

    #[error("could not start worker pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Metric(#[from] MetricError),

    #[error(transparent)]
    Norm(#[from] NormError),

    #[error(transparent)]
    BallInt(#[from] BallIntError),
}

/// A norm k-clustering instance `(M, f, k)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: MetricSpace,
    pub norm: NormObjective,
    pub k: usize,
}

impl Instance {
    pub fn new(space: MetricSpace, norm: NormObjective, k: usize) -> Result<Self, EpasError> {
        if k == 0 {
            return Err(EpasError::InvalidK);
        }
        if let Some(m) = space.n_centers() {
            if k > m {
                return Err(EpasError::KExceedsCenters { k, centers: m });
            }
        }
        if norm.dim() != space.n_points() {
            return Err(EpasError::DimensionMismatch {
                norm: norm.dim(),
                points: space.n_points(),
            });
        }
        Ok(Self { space, norm, k })
    }

    pub fn n_points(&self) -> usize {
        self.space.n_points()
    }

    pub fn cost(&self, centers: Vec<Center>) -> Result<Solution, EpasError> {
        Ok(Solution::evaluate(&self.space, &self.norm, centers)?)
    }
}

/// Run configuration. The iteration cap and the restart budget are the two
/// knobs standing in for the exponential factor of the running time bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EpasConfig {
    pub eps: f64,
    /// `Λ`, a stand-in for the (unknown) scatter dimension at `ε/10`.
    pub lambda: f64,
    /// `C` in the default iteration cap `⌈C·(k/ε)·ln(k/ε)·Λ⌉`.
    pub cap_constant: f64,
    /// Explicit iteration cap; overrides the formula.
    pub iteration_cap: Option<usize>,
    /// Ratio between consecutive optimum guesses; defaults to `1 + ε/3`.
    pub opt_grid_factor: Option<f64>,
    pub ballint: BallIntConfig,
    /// Worker threads for restarts. Results do not depend on this value.
    pub jobs: usize,
    /// Record per-iteration invariant checks.
    pub trace: bool,
}

impl EpasConfig {
    pub fn new(eps: f64) -> Result<Self, EpasError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(EpasError::InvalidEps(eps));
        }
        Ok(Self {
            eps,
            lambda: DEFAULT_LAMBDA,
            cap_constant: DEFAULT_CAP_CONSTANT,
            iteration_cap: None,
            opt_grid_factor: None,
            ballint: BallIntConfig::default(),
            jobs: 1,
            trace: false,
        })
    }

    fn validate(&self) -> Result<(), EpasError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(EpasError::InvalidEps(self.eps));
        }
        if self.iteration_cap == Some(0) {
            return Err(EpasError::ZeroIterationCap);
        }
        let f = self.grid_factor();
        if !(f > 1.0 && f.is_finite()) {
            return Err(EpasError::InvalidGridFactor(f));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, k: usize) -> usize {
        self.iteration_cap.unwrap_or_else(|| {
            let ratio = k as f64 / self.eps;
            (self.cap_constant * ratio * ratio.ln() * self.lambda)
                .ceil()
                .max(1.0) as usize
        })
    }

    pub fn grid_factor(&self) -> f64 {
        self.opt_grid_factor.unwrap_or(1.0 + self.eps / 3.0)
    }

    /// Error parameter handed to the Ball Intersection solver.
    pub fn solver_eta(&self) -> f64 {
        self.eps / 10.0
    }
}

/// Initial per-point distance upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBounds {
    pub u: Vec<f64>,
}

/// Exact `u(p)` for every point by a scan over the distance breakpoints.
///
/// On `α ∈ [3d_j, 3d_{j+1})` the ball `ball(p, α/3) ∩ P` is fixed with mass
/// `c_j`, so the condition holds iff `α ≥ 3·opt/c_j`; the feasible set is
/// upward closed, and `u(p)` is the first segment's feasible left end.
pub fn upper_bounds(instance: &Instance, opt_guess: f64) -> Result<UpperBounds, EpasError> {
    if !(opt_guess > 0.0 && opt_guess.is_finite()) {
        return Err(EpasError::InvalidOptGuess(opt_guess));
    }
    let n = instance.n_points();
    let space = &instance.space;
    let mut u = Vec::with_capacity(n);
    for p in 0..n {
        let mut by_dist: Vec<(f64, usize)> =
            (0..n).map(|q| (space.point_to_point(p, q), q)).collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut members = Vec::with_capacity(n);
        let mut found = None;
        for j in 0..n {
            members.push(by_dist[j].1);
            let d_j = by_dist[j].0;
            let next = by_dist.get(j + 1).map(|e| e.0);
            if next == Some(d_j) {
                continue;
            }
            let mass = instance.norm.ball_mass(&members)?;
            if mass <= 0.0 {
                continue;
            }
            let candidate = (3.0 * d_j).max(3.0 * opt_guess / mass);
            if next.is_none_or(|d| candidate < 3.0 * d) {
                found = Some(candidate);
                break;
            }
        }
        u.push(found.ok_or(EpasError::DegenerateNorm)?);
    }
    Ok(UpperBounds { u })
}

/// Result of the greedy marking pass.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedOutcome {
    Seeded(Seeding),
    /// More than `k` pairwise far points: the guess is below the optimum.
    Infeasible { marked: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    pub marked: Vec<usize>,
    pub requests: Vec<Vec<Request>>,
    pub centers: Vec<Center>,
}

/// Greedy marking in non-decreasing order of `u`, then one initial request
/// `(p, u(p))` per marked point. Marked points satisfy
/// `δ(p_i, p_j) > u(p_i) + u(p_j)` pairwise.
pub fn greedy_seed(
    instance: &Instance,
    bounds: &UpperBounds,
    eps: f64,
) -> Result<SeedOutcome, EpasError> {
    let space = &instance.space;
    let u = &bounds.u;
    let n = instance.n_points();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));

    let mut marked: Vec<usize> = Vec::new();
    for &p in &order {
        if marked
            .iter()
            .all(|&q| space.point_to_point(p, q) > u[p] + u[q])
        {
            marked.push(p);
        }
    }
    let k = instance.k;
    if marked.len() > k {
        return Ok(SeedOutcome::Infeasible { marked });
    }

    let mut requests = vec![Vec::new(); k];
    let mut centers = Vec::with_capacity(k);
    for (kappa, &p) in marked.iter().enumerate() {
        requests[kappa].push(Request {
            point: p,
            radius: u[p],
        });
        let center = match space.n_centers() {
            Some(_) => {
                let all = space.center_list()?;
                let (idx, d) = space.nearest_center(p, &all);
                if d > (1.0 + eps / 10.0) * u[p] {
                    return Ok(SeedOutcome::Infeasible { marked });
                }
                all[idx].clone()
            }
            None => space.colocated_center(p).expect("continuous space has coordinates"),
        };
        centers.push(center);
    }
    for extra in 0..k - marked.len() {
        let center = match space.n_centers() {
            Some(m) => Center::Index(extra % m),
            None => space
                .colocated_center(extra % n)
                .expect("continuous space has coordinates"),
        };
        centers.push(center);
    }
    Ok(SeedOutcome::Seeded(Seeding {
        marked,
        requests,
        centers,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    SolverFail,
    IterationCap,
    EmptyAdmissible,
    SeedInfeasible,
}

/// One main-loop iteration, as recorded in trace mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cost: f64,
    pub point: usize,
    pub cluster: usize,
    pub radius: f64,
    pub solver_margin: f64,
    /// `δ(p, X) ≥ ε·u(p)/(1000k)` for the sampled point.
    pub admissible_ok: bool,
    /// `δ(q, X) ≤ 4(1+ε/10)·u(q)` for every point at the loop head.
    pub head_bound_ok: bool,
    /// The new radius satisfies `r ≤ 4(1+ε/10)·u(p)`.
    pub request_bound_ok: bool,
}

/// Invariant bookkeeping for one run (trace mode only).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub head_checks: usize,
    pub head_violations: usize,
    pub admissible_violations: usize,
    pub request_bound_violations: usize,
    /// Per cluster `max r / min r` over requests added by the main loop.
    pub aspect_ratios: Vec<f64>,
    /// Set on successful runs whose aspect ratio exceeds `10⁴k/ε²`.
    pub aspect_violation: bool,
}

impl RunTrace {
    pub fn violations(&self) -> usize {
        self.head_violations
            + self.admissible_violations
            + self.request_bound_violations
            + usize::from(self.aspect_violation)
    }
}

/// A successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpasSolution {
    pub solution: Solution,
    pub opt_guess: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Runs consumed (including this one) for the guess that produced it.
    pub restarts_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub reason: FailReason,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub result: Result<EpasSolution, RunFailure>,
    pub trace: Option<RunTrace>,
    /// Final per-cluster request lists.
    pub requests: Vec<Vec<Request>>,
}

/// Per-guess state shared by all restarts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub opt_guess: f64,
    pub bounds: UpperBounds,
    pub seed: SeedOutcome,
}

pub fn prepare(instance: &Instance, config: &EpasConfig, opt_guess: f64) -> Result<Prepared, EpasError> {
    config.validate()?;
    let bounds = upper_bounds(instance, opt_guess)?;
    let seed = greedy_seed(instance, &bounds, config.eps)?;
    Ok(Prepared {
        opt_guess,
        bounds,
        seed,
    })
}

/// Independent streams for the point draw and the cluster draw.
fn streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut points = ChaCha8Rng::seed_from_u64(seed);
    points.set_stream(POINT_STREAM);
    let mut clusters = ChaCha8Rng::seed_from_u64(seed);
    clusters.set_stream(CLUSTER_STREAM);
    (points, clusters)
}

/// Draw an index with probability proportional to `weights` (nonnegative,
/// positive total).
pub fn sample_weighted<R: Rng>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}

/// One run of the main loop from a prepared seeding.
pub fn run_prepared(
    instance: &Instance,
    config: &EpasConfig,
    prepared: &Prepared,
    seed: u64,
) -> Result<RunReport, EpasError> {
    let eps = config.eps;
    let k = instance.k;
    let space = &instance.space;
    let norm = &instance.norm;
    let opt = prepared.opt_guess;
    let u = &prepared.bounds.u;
    let cap = config.iteration_cap(k);
    let eta = config.solver_eta();
    let head_slack = 4.0 * (1.0 + eps / 10.0);
    let admissible_floor = eps / (1000.0 * k as f64);
    let mut trace = config.trace.then(RunTrace::default);

    let seeding = match &prepared.seed {
        SeedOutcome::Seeded(s) => s,
        SeedOutcome::Infeasible { .. } => {
            return Ok(RunReport {
                result: Err(RunFailure {
                    reason: FailReason::SeedInfeasible,
                    iterations: 0,
                }),
                trace,
                requests: Vec::new(),
            })
        }
    };
    let mut requests = seeding.requests.clone();
    let initial_len: Vec<usize> = requests.iter().map(Vec::len).collect();
    let mut centers = seeding.centers.clone();
    let (mut point_rng, mut cluster_rng) = streams(seed);

    let mut iteration = 0;
    let fail = |reason, iterations, trace, requests| {
        Ok(RunReport {
            result: Err(RunFailure { reason, iterations }),
            trace,
            requests,
        })
    };
    loop {
        let x = space.distance_vector(&centers)?;
        let cost = norm.evaluate(&x)?;
        let mut head_ok = true;
        if let Some(t) = trace.as_mut() {
            head_ok = x.iter().zip(u).all(|(d, up)| *d <= head_slack * up);
            t.head_checks += 1;
            t.head_violations += usize::from(!head_ok);
        }
        if cost <= (1.0 + eps) * opt {
            if let Some(t) = trace.as_mut() {
                finish_aspect(t, &requests, &initial_len, k, eps);
            }
            return Ok(RunReport {
                result: Ok(EpasSolution {
                    solution: Solution {
                        centers,
                        dist_vector: x,
                        cost,
                    },
                    opt_guess: opt,
                    iterations: iteration,
                    seed,
                    restarts_used: 1,
                }),
                trace,
                requests,
            });
        }
        if iteration >= cap {
            return fail(FailReason::IterationCap, iteration, trace, requests);
        }

        let g = norm.subgradient(&x, eps / 10.0)?;
        let weights: Vec<f64> = (0..x.len())
            .map(|p| {
                if x[p] >= admissible_floor * u[p] {
                    g.g[p] * x[p]
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return fail(FailReason::EmptyAdmissible, iteration, trace, requests);
        }
        let p = sample_weighted(&mut point_rng, &weights, total);
        let kappa = cluster_rng.random_range(0..k);
        let radius = x[p] / (1.0 + eps / 3.0);
        requests[kappa].push(Request { point: p, radius });

        let outcome = ballint::solve(space, &requests[kappa], eta, &config.ballint)?;
        if let Some(t) = trace.as_mut() {
            let admissible_ok = x[p] >= admissible_floor * u[p];
            let request_bound_ok = radius <= head_slack * u[p];
            t.admissible_violations += usize::from(!admissible_ok);
            t.request_bound_violations += usize::from(!request_bound_ok);
            t.records.push(TraceRecord {
                iteration,
                cost,
                point: p,
                cluster: kappa,
                radius,
                solver_margin: outcome.satisfied_margin,
                admissible_ok,
                head_bound_ok: head_ok,
                request_bound_ok,
            });
        }
        iteration += 1;
        match outcome.result {
            Some(c) => centers[kappa] = c,
            None => return fail(FailReason::SolverFail, iteration, trace, requests),
        }
    }
}

fn finish_aspect(t: &mut RunTrace, requests: &[Vec<Request>], initial: &[usize], k: usize, eps: f64) {
    let limit = 1e4 * k as f64 / (eps * eps);
    t.aspect_ratios = requests
        .iter()
        .zip(initial)
        .map(|(qs, &skip)| {
            let added = &qs[skip..];
            let max = added.iter().map(|q| q.radius).fold(0.0, f64::max);
            let min = added.iter().map(|q| q.radius).fold(f64::INFINITY, f64::min);
            if added.is_empty() {
                1.0
            } else {
                max / min
            }
        })
        .collect();
    t.aspect_violation = t.aspect_ratios.iter().any(|&r| r > limit);
}

/// One complete run: upper bounds, seeding and the main loop.
pub fn run_once(
    instance: &Instance,
    config: &EpasConfig,
    opt_guess: f64,
    seed: u64,
) -> Result<RunReport, EpasError> {
    let prepared = prepare(instance, config, opt_guess)?;
    run_prepared(instance, config, &prepared, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub solution: Option<EpasSolution>,
    pub attempts: usize,
    /// Trace of the successful run (trace mode).
    pub trace: Option<RunTrace>,
}

fn build_pool(jobs: usize) -> Result<Option<ThreadPool>, EpasError> {
    if jobs <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map(Some)
        .map_err(|e| EpasError::ThreadPool(e.to_string()))
}

fn restarts_with_pool(
    instance: &Instance,
    config: &EpasConfig,
    prepared: &Prepared,
    restart_budget: usize,
    base_seed: u64,
    pool: Option<&ThreadPool>,
) -> Result<RestartOutcome, EpasError> {
    if restart_budget == 0 {
        return Err(EpasError::ZeroRestarts);
    }
    if matches!(prepared.seed, SeedOutcome::Infeasible { .. }) {
        // Every restart would fail identically.
        return Ok(RestartOutcome {
            solution: None,
            attempts: restart_budget,
            trace: None,
        });
    }
    let chunk = pool.map_or(1, |p| p.current_num_threads().max(1));
    let mut start = 0;
    while start < restart_budget {
        let end = (start + chunk).min(restart_budget);
        let run = |i: usize| {
            run_prepared(instance, config, prepared, base_seed.wrapping_add(i as u64))
        };
        let reports: Vec<Result<RunReport, EpasError>> = match pool {
            Some(p) => p.install(|| (start..end).into_par_iter().map(run).collect()),
            None => (start..end).map(run).collect(),
        };
        // Lowest succeeding seed wins regardless of completion order.
        for (offset, report) in reports.into_iter().enumerate() {
            let report = report?;
            if let Ok(mut sol) = report.result {
                sol.restarts_used = start + offset + 1;
                return Ok(RestartOutcome {
                    solution: Some(sol),
                    attempts: start + offset + 1,
                    trace: report.trace,
                });
            }
        }
        start = end;
    }
    Ok(RestartOutcome {
        solution: None,
        attempts: restart_budget,
        trace: None,
    })
}

/// Run with seeds `base_seed, base_seed + 1, …` until one succeeds.
pub fn solve_with_restarts(
    instance: &Instance,
    config: &EpasConfig,
    opt_guess: f64,
    restart_budget: usize,
    base_seed: u64,
) -> Result<RestartOutcome, EpasError> {
    if restart_budget == 0 {
        return Err(EpasError::ZeroRestarts);
    }
    let prepared = prepare(instance, config, opt_guess)?;
    let pool = build_pool(config.jobs)?;
    restarts_with_pool(instance, config, &prepared, restart_budget, base_seed, pool.as_ref())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: EpasSolution,
    pub guesses_tried: usize,
    pub trace: Option<RunTrace>,
}

/// `k` centers of cost zero, if the points occupy at most `k` locations that
/// all carry a center.
pub fn zero_cost_centers(instance: &Instance) -> Option<Vec<Center>> {
    let space = &instance.space;
    let mut chosen: Vec<Center> = Vec::new();
    for p in 0..instance.n_points() {
        let c = space.colocated_center(p)?;
        if !chosen.contains(&c) {
            chosen.push(c);
            if chosen.len() > instance.k {
                return None;
            }
        }
    }
    let mut fill = 0;
    while chosen.len() < instance.k {
        let extra = match space.n_centers() {
            Some(_) => Center::Index(fill),
            None => chosen[0].clone(),
        };
        if !chosen.contains(&extra) || space.is_continuous() {
            chosen.push(extra);
        }
        fill += 1;
    }
    Some(chosen)
}

fn bracket_center(space: &MetricSpace) -> Center {
    match space.n_centers() {
        Some(_) => Center::Index(0),
        None => space.colocated_center(0).expect("continuous space has coordinates"),
    }
}

/// Lower bound on any positive cost.
fn cost_floor(instance: &Instance) -> Result<f64, EpasError> {
    let space = &instance.space;
    let n = instance.n_points();
    let mut d_min = f64::INFINITY;
    match space.n_centers() {
        Some(m) => {
            for p in 0..n {
                for j in 0..m {
                    let d = space.point_to_center(p, &Center::Index(j));
                    if d > 0.0 {
                        d_min = d_min.min(d);
                    }
                }
            }
        }
        None => {
            for p in 0..n {
                for q in p + 1..n {
                    let d = space.point_to_point(p, q);
                    if d > 0.0 {
                        d_min = d_min.min(d / 2.0);
                    }
                }
            }
        }
    }
    let mut f_min = f64::INFINITY;
    for p in 0..n {
        let m = instance.norm.ball_mass(&[p])?;
        if m > 0.0 {
            f_min = f_min.min(m);
        }
    }
    let lo = d_min * f_min;
    Ok(if lo.is_finite() { lo } else { 0.0 })
}

/// Search over a descending geometric grid of optimum guesses, starting at
/// the cost of the single deterministic first center. Stops after two
/// consecutive failed guesses or below the positive-cost floor and returns
/// the cheapest solution seen.
pub fn search_opt(
    instance: &Instance,
    config: &EpasConfig,
    restart_budget: usize,
    base_seed: u64,
) -> Result<SearchOutcome, EpasError> {
    config.validate()?;
    if restart_budget == 0 {
        return Err(EpasError::ZeroRestarts);
    }
    let k = instance.k;
    if let Some(centers) = zero_cost_centers(instance) {
        let solution = instance.cost(centers)?;
        return Ok(SearchOutcome {
            best: EpasSolution {
                solution,
                opt_guess: 0.0,
                iterations: 0,
                seed: base_seed,
                restarts_used: 0,
            },
            guesses_tried: 0,
            trace: None,
        });
    }

    let x0 = bracket_center(&instance.space);
    let bracket = instance.cost(vec![x0; k])?;
    let hi = bracket.cost;
    let mut best = EpasSolution {
        solution: bracket,
        opt_guess: hi,
        iterations: 0,
        seed: base_seed,
        restarts_used: 0,
    };
    let mut best_trace = None;
    if hi == 0.0 {
        return Ok(SearchOutcome {
            best,
            guesses_tried: 0,
            trace: None,
        });
    }
    let lo = cost_floor(instance)?;
    let factor = config.grid_factor();
    let pool = build_pool(config.jobs)?;

    let mut guess = hi;
    let mut consecutive_failures = 0;
    let mut tried = 0;
    while guess >= lo && tried < MAX_GRID_STEPS {
        tried += 1;
        let prepared = prepare(instance, config, guess)?;
        let outcome = restarts_with_pool(
            instance,
            config,
            &prepared,
            restart_budget,
            base_seed,
            pool.as_ref(),
        )?;
        match outcome.solution {
            Some(sol) => {
                consecutive_failures = 0;
                if sol.solution.cost < best.solution.cost || best.restarts_used == 0 {
                    best = sol;
                    best_trace = outcome.trace;
                }
            }
            None => {
                consecutive_failures += 1;
                if consecutive_failures >= 2 {
                    break;
                }
            }
        }
        guess /= factor;
    }
    Ok(SearchOutcome {
        best,
        guesses_tried: tried,
        trace: best_trace,
    })
}
