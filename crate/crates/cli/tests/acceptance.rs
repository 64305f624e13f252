//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use normclust::ballint::{self, ky_iteration_budget, weighted_one_center, StopRule};
use normclust::epas::{run_once, search_opt, solve_with_restarts, FailReason};
use normclust::metrics::TriangleCheck;
use normclust::norms::{CascadeDag, NormObjective};
use normclust::oracle::{brute_force_opt, gonzalez_kcenter};
use normclust::scatter::{
    packing_from_scattering, play_scatter_game, verify_scattering, CenterStrategy, GameConfig,
    PointStrategy, ScatterMode,
};
use normclust::{BallIntConfig, Center, EpasConfig, Instance, MetricSpace, Request};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- generators

fn subset<R: Rng>(rng: &mut R, total: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..total).collect();
    all.shuffle(rng);
    let mut pick = all[..size].to_vec();
    pick.sort_unstable();
    pick
}

fn random_explicit<R: Rng>(rng: &mut R, n: usize, m: usize) -> MetricSpace {
    let total = n.max(m) + 2;
    let mut d = vec![vec![0.0; total]; total];
    for a in 0..total {
        for b in a + 1..total {
            let w = rng.random_range(1.0..10.0);
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for via in 0..total {
        for a in 0..total {
            for b in 0..total {
                let alt = d[a][via] + d[via][b];
                if alt < d[a][b] {
                    d[a][b] = alt;
                }
            }
        }
    }
    let ids: Vec<String> = (0..total).map(|i| format!("s{i}")).collect();
    let points = subset(rng, total, n).into_iter().map(|i| ids[i].clone()).collect();
    let centers = subset(rng, total, m).into_iter().map(|i| ids[i].clone()).collect();
    MetricSpace::explicit(ids, d, points, centers, TriangleCheck::Full).unwrap()
}

fn random_plane<R: Rng>(rng: &mut R, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect()
}

fn random_euclid<R: Rng>(rng: &mut R, n: usize, m: usize) -> MetricSpace {
    let p = random_plane(rng, n);
    let f = random_plane(rng, m);
    MetricSpace::euclidean(p, Some(f)).unwrap()
}

fn random_graph<R: Rng>(rng: &mut R, n: usize, m: usize) -> MetricSpace {
    let v = rng.random_range(n.max(m).max(6)..=12);
    let mut edges = Vec::new();
    for b in 1..v {
        let a = rng.random_range(0..b);
        edges.push((format!("v{a}"), format!("v{b}"), rng.random_range(0.5..5.0)));
    }
    for _ in 0..rng.random_range(0..v) {
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        edges.push((format!("v{a}"), format!("v{b}"), rng.random_range(0.5..5.0)));
    }
    let label = |i: usize| format!("v{i}");
    let points = subset(rng, v, n).into_iter().map(label).collect();
    let centers = subset(rng, v, m).into_iter().map(label).collect();
    MetricSpace::graph(edges, points, centers).unwrap()
}

fn random_finite_space<R: Rng>(rng: &mut R, family: usize, n: usize, m: usize) -> MetricSpace {
    match family % 3 {
        0 => random_explicit(rng, n, m),
        1 => random_euclid(rng, n, m),
        _ => random_graph(rng, n, m),
    }
}

fn nonincreasing<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn partition_groups<R: Rng>(rng: &mut R, n: usize, groups: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; groups];
    for p in 0..n {
        out[rng.random_range(0..groups)][p] = 1.0;
    }
    out
}

/// The seven objectives of the oracle-equivalence criterion, by index.
fn clustering_norm<R: Rng>(rng: &mut R, which: usize, n: usize) -> (NormObjective, &'static str) {
    match which % 7 {
        0 => (NormObjective::lz(1.0, n).unwrap(), "l1"),
        1 => (NormObjective::lz(2.0, n).unwrap(), "l2"),
        2 => (NormObjective::lz(f64::INFINITY, n).unwrap(), "linf"),
        3 => (NormObjective::top_l(2, n).unwrap(), "top2"),
        4 => {
            let w = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            (NormObjective::weighted_max(w).unwrap(), "weighted_max")
        }
        5 => {
            let g = partition_groups(rng, n, 2);
            (NormObjective::fair_group(f64::INFINITY, 1.0, g).unwrap(), "fair_group")
        }
        _ => {
            let mut v = nonincreasing(rng, n);
            v[0] = v[0].max(0.5);
            (NormObjective::ordered(v, n).unwrap(), "ordered")
        }
    }
}

fn random_cascade<R: Rng>(rng: &mut R, n: usize) -> NormObjective {
    let internal = rng.random_range(1..=4);
    let qs = [1.0, 2.0, 3.0, f64::INFINITY];
    let exps: Vec<f64> = (0..internal).map(|_| qs[rng.random_range(0..qs.len())]).collect();
    let sink = n + internal - 1;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut has_out = vec![false; n + internal];
    for j in 0..internal {
        let head = n + j;
        let mut tails: Vec<usize> = (0..head).filter(|_| rng.random_bool(0.4)).collect();
        if tails.is_empty() {
            tails.push(rng.random_range(0..head));
        }
        for t in tails {
            edges.push((t, head, rng.random_range(0.1..2.0)));
            has_out[t] = true;
        }
    }
    for v in 0..sink {
        if !has_out[v] {
            edges.push((v, sink, rng.random_range(0.1..2.0)));
        }
    }
    NormObjective::cascade(CascadeDag::new(n, exps, edges).unwrap()).unwrap()
}

const VARIANTS: [&str; 12] = [
    "lz1", "lz2", "lz3.5", "lzinf", "weighted_max", "top_l", "ordered", "priority_ordered",
    "fair_inf_1", "fair_2_3", "fair_1_inf", "cascade",
];

fn variant_norm<R: Rng>(rng: &mut R, variant: &str, n: usize) -> NormObjective {
    match variant {
        "lz1" => NormObjective::lz(1.0, n).unwrap(),
        "lz2" => NormObjective::lz(2.0, n).unwrap(),
        "lz3.5" => NormObjective::lz(3.5, n).unwrap(),
        "lzinf" => NormObjective::lz(f64::INFINITY, n).unwrap(),
        "weighted_max" => {
            NormObjective::weighted_max((0..n).map(|_| rng.random_range(0.0..3.0)).collect())
                .unwrap()
        }
        "top_l" => NormObjective::top_l(rng.random_range(1..=n), n).unwrap(),
        "ordered" => {
            let len = rng.random_range(1..=n);
            NormObjective::ordered(nonincreasing(rng, len), n).unwrap()
        }
        "priority_ordered" => {
            let len = rng.random_range(1..=n);
            let w = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
            NormObjective::priority_ordered(nonincreasing(rng, len), w).unwrap()
        }
        "fair_inf_1" | "fair_2_3" | "fair_1_inf" => {
            let (q, z) = match variant {
                "fair_inf_1" => (f64::INFINITY, 1.0),
                "fair_2_3" => (2.0, 3.0),
                _ => (1.0, f64::INFINITY),
            };
            let count = rng.random_range(1..=3);
            let groups = (0..count)
                .map(|_| (0..n).map(|_| rng.random_range(0.0..2.0)).collect())
                .collect();
            NormObjective::fair_group(q, z, groups).unwrap()
        }
        "cascade" => random_cascade(rng, n),
        other => panic!("unknown variant {other}"),
    }
}

/// Vectors in `[0, 10]^n`, sometimes with integer ties and zeros.
fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let style = rng.random_range(0..4);
    (0..n)
        .map(|_| match style {
            0 => rng.random_range(0..=3) as f64,
            1 if rng.random_bool(0.3) => 0.0,
            _ => rng.random_range(0.0..10.0),
        })
        .collect()
}

// ---------------------------------------------------------------- criteria

fn criterion_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut within = 0;
    let mut below_opt = 0;
    let mut misses = Vec::new();
    let mut worst = 1.0_f64;
    let mut guesses = 0;
    let mut from_loop = 0;
    for i in 0..100 {
        let n = rng.random_range(3..=10);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(1..=m.min(3));
        let space = random_finite_space(&mut rng, i, n, m);
        let (norm, name) = clustering_norm(&mut rng, i, n);
        let instance = Instance::new(space, norm, k).unwrap();
        let opt = brute_force_opt(&instance).unwrap().cost;
        let mut config = EpasConfig::new(0.2).unwrap();
        config.lambda = 100.0;
        let found = search_opt(&instance, &config, 500, i as u64).unwrap();
        let cost = found.best.solution.cost;
        if opt > 0.0 {
            worst = worst.max(cost / opt);
        }
        guesses += found.guesses_tried;
        from_loop += usize::from(found.best.restarts_used > 0);
        if cost < opt * (1.0 - REL) {
            below_opt += 1;
        }
        if cost <= 1.2 * opt * (1.0 + REL) {
            within += 1;
        } else {
            misses.push(format!("#{i} {name} k={k}: {cost:.4} vs {opt:.4}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = within >= 99 && below_opt == 0 && secs <= 120.0;
    outcome(
        pass,
        format!(
            "{within}/100 within 1.2*OPT (worst ratio {worst:.4}), {below_opt} below OPT, {from_loop} answers from the sampling loop, {guesses} guesses, {secs:.1} s{}",
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    )
}

fn criterion_subgradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut violations = 0;
    let mut checks = 0;
    for variant in VARIANTS {
        for _ in 0..1000 {
            let n = rng.random_range(1..=16);
            let norm = variant_norm(&mut rng, variant, n);
            let x = random_vector(&mut rng, n);
            let y = random_vector(&mut rng, n);
            let g = norm.subgradient(&x, 1e-3).unwrap();
            let fx = norm.evaluate(&x).unwrap();
            let fy = norm.evaluate(&y).unwrap();
            checks += 1;
            let nonneg = g.g.iter().all(|&v| v >= 0.0);
            let tight = g.dot(&x) >= fx / (1.0 + REL);
            let below = g.dot(&y) <= fy * (1.0 + REL);
            if !(nonneg && tight && below) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {checks} anchor/probe pairs, {} variants", VARIANTS.len()),
    )
}

fn criterion_norm_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut violations = 0;
    let mut trials = 0;
    for variant in VARIANTS {
        let mut norm = variant_norm(&mut rng, variant, 8);
        for t in 0..10_000 {
            if t % 50 == 0 {
                let n = rng.random_range(1..=16);
                norm = variant_norm(&mut rng, variant, n);
            }
            let n = norm.dim();
            let x = random_vector(&mut rng, n);
            let y = random_vector(&mut rng, n);
            let lambda = rng.random_range(0.0..5.0);
            let f = |v: &[f64]| norm.evaluate(v).unwrap();
            let fx = f(&x);
            let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let bigger: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b / 3.0).collect();
            let homogeneous = (f(&scaled) - lambda * fx).abs() <= REL * (lambda * fx).max(1e-300);
            let triangle = f(&sum) <= (fx + f(&y)) * (1.0 + REL);
            let monotone = fx <= f(&bigger) * (1.0 + REL);
            let zero = f(&vec![0.0; n]) == 0.0 && fx >= 0.0;
            trials += 1;
            if !(homogeneous && triangle && monotone && zero) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {trials} trials ({} variants x 10^4)", VARIANTS.len()),
    )
}

fn criterion_ball_intersection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let config = BallIntConfig::default();
    let mut finite_fail = 0;
    for i in 0..500 {
        let n = rng.random_range(1..=10);
        let m = rng.random_range(1..=8);
        let space = random_finite_space(&mut rng, i, n, m);
        let planted = Center::Index(rng.random_range(0..m));
        let count = rng.random_range(1..=8);
        let requests: Vec<Request> = (0..count)
            .map(|_| {
                let p = rng.random_range(0..n);
                let d = space.point_to_center(p, &planted);
                let stretch = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(1.0..3.0) };
                Request::new(p, d * stretch).unwrap()
            })
            .collect();
        let eta = [0.01, 0.05, 0.1, 0.3][i % 4];
        let out = ballint::solve(&space, &requests, eta, &config).unwrap();
        if !(out.is_success() && out.satisfied_margin <= 1.0 + eta) {
            finite_fail += 1;
        }
    }

    let eta = 0.05;
    let mut continuous_fail = 0;
    let mut worst_iter_ratio = 0.0_f64;
    for _ in 0..500 {
        let d = rng.random_range(1..=10);
        let n = rng.random_range(1..=12);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let planted: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let space = MetricSpace::euclidean_continuous(pts).unwrap();
        let center = Center::Coord(planted);
        let requests: Vec<Request> = (0..n)
            .map(|p| {
                let dist = space.point_to_center(p, &center);
                let stretch = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(1.0..2.0) };
                Request::new(p, dist * stretch).unwrap()
            })
            .collect();
        let radii: Vec<f64> = requests.iter().map(|q| q.radius).collect();
        let budget = ky_iteration_budget(&radii, eta, 64.0);
        let out = ballint::solve(&space, &requests, eta, &config).unwrap();
        worst_iter_ratio = worst_iter_ratio.max(out.iterations as f64 / budget as f64);
        if !(out.is_success() && out.satisfied_margin <= 1.0 + eta && out.iterations <= budget) {
            continuous_fail += 1;
        }
    }
    outcome(
        finite_fail == 0 && continuous_fail == 0,
        format!(
            "finite: {finite_fail}/500 FAIL; continuous: {continuous_fail}/500 FAIL or over budget (max iterations/budget {worst_iter_ratio:.4})"
        ),
    )
}

fn scalar_ratio(x: f64, points: &[f64], radii: &[f64]) -> f64 {
    points
        .iter()
        .zip(radii)
        .map(|(p, r)| (x - p).abs() / r)
        .fold(0.0, f64::max)
}

fn ternary_optimum(points: &[f64], radii: &[f64]) -> f64 {
    let mut lo = points.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if scalar_ratio(a, points, radii) <= scalar_ratio(b, points, radii) {
            hi = b;
        } else {
            lo = a;
        }
    }
    scalar_ratio((lo + hi) / 2.0, points, radii)
}

fn criterion_ky_scalar() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let eta = 0.05;
    let mut bad = 0;
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let m = rng.random_range(2..=10);
        let points: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        let radii: Vec<f64> = (0..m).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
        let opt = ternary_optimum(&points, &radii);
        let coords: Vec<[f64; 1]> = points.iter().map(|&p| [p]).collect();
        let refs: Vec<&[f64]> = coords.iter().map(|c| c.as_slice()).collect();
        let budget = ky_iteration_budget(&radii, eta, 64.0);
        let stop = StopRule {
            rel_gap: eta,
            give_up_above: f64::INFINITY,
        };
        let out = weighted_one_center(&refs, &radii, stop, budget);
        let achieved = scalar_ratio(out.center[0], &points, &radii);
        worst = worst.max(achieved / opt);
        let sound = out.lower_bound <= opt + 1e-6;
        if achieved > (1.0 + eta) * opt + 1e-6 || !sound {
            bad += 1;
        }
        // the composed solver on radii scaled to an optimum ratio of one
        let scaled: Vec<f64> = radii.iter().map(|r| r * opt).collect();
        let composed = ballint::solve_ky_euclidean(&refs, &scaled, eta, &BallIntConfig::default()).unwrap();
        if !(composed.is_success() && composed.satisfied_margin <= 1.0 + eta + 1e-6) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} failures over 200 instances, worst achieved/optimum {worst:.6}"))
}

fn criterion_loop_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let mut iterations = 0;
    let mut violations = 0;
    let mut runs = 0;
    let mut successes = 0;
    let mut case = 0;
    while iterations < 1500 && case < 400 {
        let n = rng.random_range(4..=10);
        let k = rng.random_range(1..=3);
        let (instance, reference) = if case % 4 == 3 {
            let space = MetricSpace::euclidean_continuous(random_plane(&mut rng, n)).unwrap();
            let (norm, _) = clustering_norm(&mut rng, case, n);
            let inst = Instance::new(space, norm, k).unwrap();
            let cost = gonzalez_kcenter(&inst).unwrap().cost;
            (inst, cost)
        } else {
            let m = rng.random_range(k.max(2)..=8);
            let space = random_finite_space(&mut rng, case, n, m);
            let (norm, _) = clustering_norm(&mut rng, case, n);
            let inst = Instance::new(space, norm, k).unwrap();
            let cost = brute_force_opt(&inst).unwrap().cost;
            (inst, cost)
        };
        case += 1;
        if reference == 0.0 {
            continue;
        }
        let eps = [0.2, 0.5, 0.1][case % 3];
        let mut config = EpasConfig::new(eps).unwrap();
        config.trace = true;
        config.iteration_cap = Some(2000);
        for factor in [0.8, 1.0, 1.5] {
            for seed in 0..5 {
                let report = run_once(&instance, &config, reference * factor, seed).unwrap();
                let trace = report.trace.expect("trace mode");
                runs += 1;
                successes += usize::from(report.result.is_ok());
                iterations += trace.records.len();
                violations += trace.violations();
            }
        }
    }
    outcome(
        violations == 0 && iterations >= 1000,
        format!("{violations} violations over {iterations} traced iterations ({runs} runs, {successes} successful)"),
    )
}

fn star(leaves: usize, center_order: &[usize]) -> MetricSpace {
    let total = leaves + 1;
    let matrix = (0..total)
        .map(|a| {
            (0..total)
                .map(|b| match (a, b) {
                    _ if a == b => 0.0,
                    (0, _) | (_, 0) => 1.0,
                    _ => 2.0,
                })
                .collect()
        })
        .collect();
    let ids: Vec<String> = (0..total).map(|i| i.to_string()).collect();
    let centers = center_order.iter().map(|&i| ids[i].clone()).collect();
    MetricSpace::explicit(ids.clone(), matrix, ids, centers, TriangleCheck::Full).unwrap()
}

fn criterion_scattering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut records = 0;
    let mut unverified = 0;
    let mut packings = 0;
    let mut bad_packings = 0;
    let mut longest_star = 0;

    let mut check = |space: &MetricSpace, cfg: &GameConfig| -> usize {
        let rec = play_scatter_game(space, cfg).unwrap();
        records += 1;
        if verify_scattering(space, &rec, cfg.eps).is_err() {
            unverified += 1;
        }
        for len in 1..=rec.len() {
            if verify_scattering(space, &rec.prefix(len), cfg.eps).is_err() {
                unverified += 1;
            }
        }
        if rec.mode == ScatterMode::Plain && rec.len() >= 2 {
            packings += 1;
            if !packing_from_scattering(space, &rec).unwrap().is_valid() {
                bad_packings += 1;
            }
        }
        rec.len()
    };

    for leaves in 5..=50 {
        let mut order: Vec<usize> = (0..=leaves).collect();
        order.shuffle(&mut rng);
        let space = star(leaves, &order);
        for seed in 0..20 {
            let mut cfg = GameConfig::new(0.5, CenterStrategy::ExactFinite);
            cfg.seed = seed;
            if seed % 2 == 1 {
                cfg.point_strategy = PointStrategy::RandomViolator;
            }
            longest_star = longest_star.max(check(&space, &cfg));
        }
    }

    for i in 0..60 {
        let n = rng.random_range(2..=10);
        let eps = [0.1, 0.3, 0.6][i % 3];
        let (space, strategy) = if i % 4 == 3 {
            (MetricSpace::euclidean_continuous(random_plane(&mut rng, n)).unwrap(), CenterStrategy::KyContinuous)
        } else {
            let m = rng.random_range(1..=8);
            (random_finite_space(&mut rng, i, n, m), CenterStrategy::ExactFinite)
        };
        for seed in 0..5 {
            let mut cfg = GameConfig::new(eps, strategy);
            cfg.seed = seed;
            cfg.point_strategy = if seed % 2 == 0 { PointStrategy::FarthestViolator } else { PointStrategy::RandomViolator };
            check(&space, &cfg);
        }
    }

    let grid: Vec<Vec<f64>> = (0..16)
        .flat_map(|i| (0..16).map(move |j| vec![i as f64, j as f64]))
        .collect();
    let grid = MetricSpace::euclidean(grid, None).unwrap();
    let mut grid_max = Vec::new();
    for eps in [0.5, 0.25, 0.125] {
        let mut best = 0;
        for seed in 0..50 {
            let mut cfg = GameConfig::new(eps, CenterStrategy::ExactFinite);
            cfg.seed = seed;
            cfg.normalize = false;
            best = best.max(check(&grid, &cfg));
        }
        grid_max.push(best);
    }
    let monotone = grid_max.windows(2).all(|w| w[0] <= w[1]);

    outcome(
        unverified == 0 && bad_packings == 0 && longest_star <= 2 && monotone,
        format!(
            "{records} records, {unverified} unverified, {bad_packings}/{packings} bad packings, longest star record {longest_star}, grid max lengths {grid_max:?} for eps 0.5/0.25/0.125"
        ),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_normclust")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

/// stdout plus the bytes of every listed output file.
fn capture(args: &[String], files: &[PathBuf]) -> (Option<i32>, Vec<u8>) {
    for f in files {
        let _ = std::fs::remove_file(f);
    }
    let out = Command::new(bin()).args(args).output().unwrap();
    let mut bytes = out.stdout;
    for f in files {
        bytes.extend(std::fs::read(f).unwrap_or_default());
    }
    (out.status.code(), bytes)
}

fn criterion_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("normclust-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("out.json");
    let trace = dir.join("trace.jsonl");
    let s = |v: &str| v.to_string();
    let p = |v: &PathBuf| v.display().to_string();

    let solve = |jobs: &str| -> Vec<String> {
        vec![
            s("solve"), s("--points"), data("blobs.csv"), s("--norm"), data("top2.json"), s("--k"), s("3"),
            s("--eps"), s("0.2"), s("--seed"), s("5"), s("--restarts"), s("60"), s("--jobs"), s(jobs),
            s("--trace"), p(&trace), s("--out"), p(&out),
        ]
    };
    let commands: Vec<(&str, Vec<String>, Vec<PathBuf>)> = vec![
        ("solve", solve("1"), vec![out.clone(), trace.clone()]),
        ("solve --jobs 4", solve("4"), vec![out.clone(), trace.clone()]),
        (
            "solve graph",
            vec![
                s("solve"), s("--graph"), data("path.txt"), s("--graph-points"), data("path_points.txt"),
                s("--norm"), data("lz2.json"), s("--k"), s("2"), s("--eps"), s("0.3"), s("--seed"), s("9"),
                s("--jobs"), s("4"),
            ],
            vec![],
        ),
        (
            "oracle",
            vec![s("oracle"), s("--points"), data("blobs.csv"), s("--norm"), data("lz1.json"), s("--k"), s("2")],
            vec![],
        ),
        (
            "scatter",
            vec![
                s("scatter"), s("--metric"), data("star6.json"), s("--eps"), s("0.5"), s("--seeds"), s("10"),
                s("--strategy"), s("random"),
            ],
            vec![],
        ),
        (
            "ballint",
            vec![s("ballint"), s("--points"), data("line.csv"), s("--continuous"), s("--requests"), data("requests.csv")],
            vec![],
        ),
        ("validate", vec![s("validate"), s("--metric"), data("star6.json")], vec![]),
    ];
    let mut mismatches = Vec::new();
    let mut reference_solve = None;
    for (name, args, files) in &commands {
        let first = capture(args, files);
        let second = capture(args, files);
        if first != second || first.0 != Some(0) {
            mismatches.push(name.to_string());
        }
        if name.starts_with("solve") && !name.contains("graph") {
            match &reference_solve {
                None => reference_solve = Some(first.1.clone()),
                Some(r) if *r != first.1 => mismatches.push(format!("{name} vs --jobs 1")),
                Some(_) => {}
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);

    // library level, including the trace
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let space = random_euclid(&mut rng, 9, 7);
    let (norm, _) = clustering_norm(&mut rng, 6, 9);
    let inst = Instance::new(space, norm, 3).unwrap();
    let mut config = EpasConfig::new(0.2).unwrap();
    config.trace = true;
    let a = search_opt(&inst, &config, 30, 3).unwrap();
    config.jobs = 4;
    let b = search_opt(&inst, &config, 30, 3).unwrap();
    if a != b {
        mismatches.push("library search with trace".into());
    }

    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} CLI commands and the library search reproduce byte-identically", commands.len())
        } else {
            format!("nondeterministic: {}", mismatches.join(", "))
        },
    )
}

fn criterion_structural_knobs() -> Outcome {
    let mut problems = Vec::new();
    let config = EpasConfig::new(0.2).unwrap();
    let expected = (8.0 * 15.0 * 15f64.ln() * 100.0).ceil() as usize;
    if config.iteration_cap(3) != expected {
        problems.push("default iteration cap formula".to_string());
    }

    // the cap is effective
    let space = MetricSpace::euclidean(vec![vec![0.0], vec![1.0], vec![10.0]], None).unwrap();
    let inst = Instance::new(space, NormObjective::lz(1.0, 3).unwrap(), 2).unwrap();
    let needs_loop = (0..50).find(|&seed| {
        matches!(run_once(&inst, &config, 7.0, seed).unwrap().result, Ok(ref s) if s.iterations >= 2)
    });
    match needs_loop {
        Some(seed) => {
            let mut capped = config.clone();
            capped.iteration_cap = Some(1);
            let r = run_once(&inst, &capped, 7.0, seed).unwrap();
            if !matches!(r.result, Err(ref f) if f.reason == FailReason::IterationCap) {
                problems.push("iteration cap not enforced".into());
            }
        }
        None => problems.push("no run needed the main loop".into()),
    }

    // the restart budget bounds the attempts
    let r = solve_with_restarts(&inst, &config, 0.5, 7, 0).unwrap();
    if r.solution.is_some() || r.attempts != 7 {
        problems.push("restart budget".into());
    }

    let help = Command::new(bin()).args(["solve", "--help"]).output().unwrap();
    let help = String::from_utf8_lossy(&help.stdout);
    for flag in ["--iteration-cap", "--lambda", "--restarts", "--jobs"] {
        if !help.contains(flag) {
            problems.push(format!("{flag} missing from solve --help"));
        }
    }
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let readme = std::fs::read_to_string(readme).unwrap_or_default();
    for flag in ["--iteration-cap", "--lambda", "--restarts"] {
        if !readme.contains(flag) {
            problems.push(format!("{flag} not documented in README"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "iteration cap and restart budget are configurable, enforced and documented".to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", criterion_oracle_equivalence),
        ("subgradient suite", criterion_subgradients),
        ("norm axioms", criterion_norm_axioms),
        ("ball-intersection completeness", criterion_ball_intersection),
        ("weighted 1-center scalar cross-check", criterion_ky_scalar),
        ("loop invariants under instrumentation", criterion_loop_invariants),
        ("scattering verifier", criterion_scattering),
        ("determinism", criterion_determinism),
        ("structural running-time knobs", criterion_structural_knobs),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = run();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
