use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use normclust::ballint;
use normclust::norms::NormSpec;
use normclust::epas::{search_opt, solve_with_restarts, EpasConfig, EpasSolution, Instance};
use normclust::oracle::{brute_force_opt, gonzalez_kcenter};
use normclust::scatter::{
    packing_from_scattering, play_scatter_game, verify_scattering, CenterStrategy, GameConfig,
    PointStrategy, ScatterMode, ScatterRecord,
};
use normclust::{BallIntConfig, Center, MetricSpace, Solution};
use serde::Serialize;

use crate::input::{load_norm, load_requests, read_norm_spec};
use crate::output::{emit, emit_lines};
use crate::{
    BallintArgs, OracleArgs, OracleMethod, ScatterArgs, SolveArgs, StrategyArg, ValidateArgs,
};

pub enum Status {
    Success,
    Fail,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::Fail => ExitCode::from(2),
        }
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    opt_guess: f64,
    cost: f64,
    centers: &'a [Center],
    assignment: Vec<usize>,
    iterations: usize,
    restarts_used: usize,
    seed: u64,
    eps: f64,
}

pub fn solve(a: SolveArgs) -> Result<Status> {
    let mut config = EpasConfig::new(a.eps)?;
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        bail!("--lambda must be positive, got {}", a.lambda);
    }
    if a.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    config.lambda = a.lambda;
    config.iteration_cap = a.iteration_cap;
    config.opt_grid_factor = a.opt_grid_factor;
    config.jobs = a.jobs;
    config.trace = a.trace.is_some();

    let space = a.space.load()?;
    let norm = load_norm(&a.norm, space.n_points())?;
    let instance = Instance::new(space, norm, a.k)?;

    let (best, trace): (Option<EpasSolution>, _) = match a.opt {
        Some(opt) => {
            let out = solve_with_restarts(&instance, &config, opt, a.restarts, a.seed)?;
            (out.solution, out.trace)
        }
        None => {
            let out = search_opt(&instance, &config, a.restarts, a.seed)?;
            (Some(out.best), out.trace)
        }
    };
    if let Some(path) = &a.trace {
        let records = trace.map(|t| t.records).unwrap_or_default();
        emit_lines(&records, path)?;
    }
    let Some(best) = best else {
        eprintln!(
            "FAIL: no run reached cost <= (1+eps)*opt within {} restarts",
            a.restarts
        );
        return Ok(Status::Fail);
    };
    let output = SolveOutput {
        opt_guess: best.opt_guess,
        cost: best.solution.cost,
        centers: &best.solution.centers,
        assignment: best.solution.assignment(&instance.space),
        iterations: best.iterations,
        restarts_used: best.restarts_used,
        seed: a.seed,
        eps: a.eps,
    };
    emit(&output, a.out.as_deref())?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    method: &'static str,
    cost: f64,
    centers: &'a [Center],
    assignment: Vec<usize>,
}

pub fn oracle(a: OracleArgs) -> Result<Status> {
    let space = a.space.load()?;
    let norm = load_norm(&a.norm, space.n_points())?;
    let instance = Instance::new(space, norm, a.k)?;
    let (method, solution): (_, Solution) = match a.method {
        OracleMethod::Brute => ("brute", brute_force_opt(&instance)?),
        OracleMethod::Gonzalez => ("gonzalez", gonzalez_kcenter(&instance)?),
    };
    let output = OracleOutput {
        method,
        cost: solution.cost,
        centers: &solution.centers,
        assignment: solution.assignment(&instance.space),
    };
    emit(&output, a.out.as_deref())?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ScatterOutput {
    eps: f64,
    lengths: Vec<usize>,
    max_length: usize,
    best_seed: u64,
    all_verified: bool,
    packings_valid: bool,
    best_record: ScatterRecord,
}

pub fn scatter(a: ScatterArgs) -> Result<Status> {
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let space = a.space.load()?;
    let center_strategy = if space.is_continuous() {
        CenterStrategy::KyContinuous
    } else {
        CenterStrategy::ExactFinite
    };
    let mut config = GameConfig::new(a.eps, center_strategy);
    config.max_len = a.max_len;
    config.normalize = !a.no_normalize;
    config.point_strategy = match a.strategy {
        StrategyArg::Farthest => PointStrategy::FarthestViolator,
        StrategyArg::Random => PointStrategy::RandomViolator,
    };

    let mut lengths = Vec::new();
    let mut best: Option<(u64, ScatterRecord)> = None;
    let mut all_verified = true;
    let mut packings_valid = true;
    for seed in 0..a.seeds {
        config.seed = seed;
        let record = play_scatter_game(&space, &config)?;
        all_verified &= verify_scattering(&space, &record, a.eps).is_ok();
        if record.mode == ScatterMode::Plain && record.len() >= 2 {
            packings_valid &= packing_from_scattering(&space, &record)?.is_valid();
        }
        lengths.push(record.len());
        if best.as_ref().is_none_or(|(_, b)| record.len() > b.len()) {
            best = Some((seed, record));
        }
    }
    let (best_seed, best_record) = best.expect("at least one seed");
    let output = ScatterOutput {
        eps: a.eps,
        max_length: best_record.len(),
        lengths,
        best_seed,
        all_verified,
        packings_valid,
        best_record,
    };
    emit(&output, a.out.as_deref())?;
    Ok(if all_verified { Status::Success } else { Status::Fail })
}

#[derive(Serialize)]
struct BallintOutput {
    success: bool,
    center: Option<Center>,
    margin: f64,
    eta: f64,
    iterations: usize,
}

pub fn ballint(a: BallintArgs) -> Result<Status> {
    let space = a.space.load()?;
    let requests = load_requests(&a.requests, &space)?;
    let outcome = ballint::solve(&space, &requests, a.eta, &BallIntConfig::default())?;
    let success = outcome.is_success();
    let output = BallintOutput {
        success,
        center: outcome.result,
        margin: outcome.satisfied_margin,
        eta: outcome.eta,
        iterations: outcome.iterations,
    };
    emit(&output, a.out.as_deref())?;
    Ok(if success { Status::Success } else { Status::Fail })
}

fn describe(space: &MetricSpace) -> String {
    match space.n_centers() {
        Some(m) => format!("{} points, {m} centers", space.n_points()),
        None => format!(
            "{} points, continuous centers in dimension {}",
            space.n_points(),
            space.euclidean_dim().unwrap_or(0)
        ),
    }
}

pub fn validate(a: ValidateArgs) -> Result<Status> {
    if !a.space.given() && a.norm.is_none() {
        bail!("nothing to validate: pass a metric source and/or --norm");
    }
    let mut n = None;
    if a.space.given() {
        let space = a.space.load()?;
        space.validate()?;
        println!("metric ok: {}", describe(&space));
        n = Some(space.n_points());
    }
    if let Some(path) = &a.norm {
        match n {
            Some(n) => {
                let norm = load_norm(path, n)?;
                println!("norm ok: dimension {}", norm.dim());
            }
            None => {
                let spec = read_norm_spec(path)?;
                let dim = match &spec {
                    NormSpec::Ordered { v } => v.len().max(1),
                    NormSpec::TopL { l } => (*l).max(1),
                    other => other.natural_dim().unwrap_or(1),
                };
                spec.build(dim)
                    .with_context(|| format!("norm spec {}", path.display()))?;
                println!("norm ok: checked at dimension {dim}");
            }
        }
    }
    Ok(Status::Success)
}
