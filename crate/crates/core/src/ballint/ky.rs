//! Weighted Euclidean 1-center: `min_x max_i ‖x − p_i‖ / r_i`.
//!
//! Frank–Wolfe on the dual over the simplex of request weights `u`:
//!
//! ```text
//! Φ(u) = Σ_i u_i σ_i ‖p_i − x(u)‖²,   x(u) = Σ_i u_i σ_i p_i / Σ_i u_i σ_i,   σ_i = r_i⁻²
//! ```
//!
//! `√Φ(u)` lower-bounds the optimum ratio and `max_i √σ_i ‖p_i − x(u)‖` is the
//! ratio achieved by `x(u)`, so the gap between the two is a certificate.
//! Each step moves weight toward the worst request with an exact line search.

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCenter {
    pub center: Vec<f64>,
    /// `max_i ‖center − p_i‖ / r_i`.
    pub max_ratio: f64,
    /// Certified lower bound on the optimum ratio.
    pub lower_bound: f64,
    pub iterations: usize,
}

/// When the iteration stops besides the iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    /// Stop once `max_ratio ≤ (1 + rel_gap) · lower_bound`.
    pub rel_gap: f64,
    /// Stop once `lower_bound` exceeds this value.
    pub give_up_above: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Run the Frank–Wolfe iteration. Inputs must be nonempty with positive radii
/// and consistent dimensions; callers validate.
pub fn weighted_one_center(
    points: &[&[f64]],
    radii: &[f64],
    stop: StopRule,
    max_iterations: usize,
) -> WeightedCenter {
    let n = points.len();
    let dim = points[0].len();
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    // Normalized weights σ_i = (r_min / r_i)² ∈ (0, 1]; ratios are √(σ_i d_i²) / r_min.
    let sigma: Vec<f64> = radii.iter().map(|r| (r_min / r).powi(2)).collect();

    let start = (0..n)
        .find(|&i| sigma[i] == 1.0)
        .expect("the smallest radius has weight 1");
    let mut u = vec![0.0; n];
    u[start] = 1.0;
    let mut x = points[start].to_vec();
    let mut s_total = sigma[start];

    let mut iterations = 0;
    loop {
        let weighted: Vec<f64> = (0..n).map(|i| sigma[i] * sq_dist(points[i], &x)).collect();
        let phi: f64 = (0..n).map(|i| u[i] * weighted[i]).sum();
        let mut j = 0;
        for i in 1..n {
            if weighted[i] > weighted[j] {
                j = i;
            }
        }
        let delta = weighted[j];
        let max_ratio = delta.sqrt() / r_min;
        let lower_bound = phi.max(0.0).sqrt() / r_min;

        let converged = max_ratio <= (1.0 + stop.rel_gap) * lower_bound || delta == 0.0;
        if converged || lower_bound > stop.give_up_above || iterations >= max_iterations {
            return WeightedCenter {
                center: x,
                max_ratio,
                lower_bound,
                iterations,
            };
        }

        let sj = sigma[j];
        let s = s_total;
        let c = sj - s;
        let gain = delta - phi;
        let value = |lambda: f64| {
            let s_new = (1.0 - lambda) * s + lambda * sj;
            (1.0 - lambda) * phi + lambda * delta - lambda * lambda * sj * delta / s_new
        };
        // Stationary points of the concave line objective.
        let a = gain * c * c - sj * delta * c;
        let b = 2.0 * s * (gain * c - sj * delta);
        let cc = gain * s * s;
        let mut candidates = vec![1.0];
        if a.abs() < 1e-300 {
            if b != 0.0 {
                candidates.push(-cc / b);
            }
        } else {
            let disc = b * b - 4.0 * a * cc;
            if disc >= 0.0 {
                let root = disc.sqrt();
                candidates.push((-b + root) / (2.0 * a));
                candidates.push((-b - root) / (2.0 * a));
            }
        }
        let mut lambda = 1.0;
        let mut best = value(1.0);
        for &cand in &candidates {
            if cand > 0.0 && cand <= 1.0 {
                let v = value(cand);
                if v > best {
                    best = v;
                    lambda = cand;
                }
            }
        }

        let s_new = (1.0 - lambda) * s + lambda * sj;
        for (xi, &pj) in x.iter_mut().zip(points[j]) {
            *xi = ((1.0 - lambda) * s * *xi + lambda * sj * pj) / s_new;
        }
        for ui in u.iter_mut() {
            *ui *= 1.0 - lambda;
        }
        u[j] += lambda;
        s_total = s_new;
        iterations += 1;
        debug_assert_eq!(x.len(), dim);
    }
}
