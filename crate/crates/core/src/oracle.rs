//! Reference solvers used to check the engine on small instances.

use thiserror::Error;

use crate::epas::Instance;
use crate::metrics::{Center, MetricError, Solution};
use crate::norms::NormError;

/// Upper limit on the number of center subsets enumerated by [`brute_force_opt`].
pub const MAX_SUBSETS: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("brute force needs a finite center set")]
    ContinuousCenters,

    #[error("{subsets} center subsets exceed the enumeration limit {limit}")]
    TooLarge { subsets: u128, limit: u128 },

    #[error(transparent)]
    Metric(#[from] MetricError),

    #[error(transparent)]
    Norm(#[from] NormError),
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u128::MAX / (n as u128 + 1) {
            return u128::MAX;
        }
    }
    acc
}

/// Exact optimum by enumerating all `k`-subsets of `F` in lexicographic
/// order; ties keep the lexicographically least subset.
pub fn brute_force_opt(instance: &Instance) -> Result<Solution, OracleError> {
    let space = &instance.space;
    let m = space.n_centers().ok_or(OracleError::ContinuousCenters)?;
    let k = instance.k;
    let subsets = binomial(m, k);
    if subsets > MAX_SUBSETS {
        return Err(OracleError::TooLarge {
            subsets,
            limit: MAX_SUBSETS,
        });
    }
    let n = instance.n_points();
    // point-to-center distances computed once
    let table: Vec<Vec<f64>> = (0..n)
        .map(|p| {
            (0..m)
                .map(|c| space.point_to_center(p, &Center::Index(c)))
                .collect()
        })
        .collect();

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut x = vec![0.0; n];
    loop {
        for (p, row) in table.iter().enumerate() {
            x[p] = combo.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
        }
        let cost = instance.norm.evaluate(&x)?;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, combo.clone()));
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| combo[i] < m - k + i) else {
            break;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    let (_, chosen) = best.expect("at least one subset");
    let centers = chosen.into_iter().map(Center::Index).collect();
    Ok(Solution::evaluate(space, &instance.norm, centers)?)
}

/// Farthest-first traversal from point 0. Each chosen point is mapped to a
/// co-located center when one exists, else to its nearest center.
pub fn gonzalez_kcenter(instance: &Instance) -> Result<Solution, OracleError> {
    let space = &instance.space;
    let n = instance.n_points();
    let mut chosen = vec![0usize];
    let mut nearest: Vec<f64> = (0..n).map(|q| space.point_to_point(0, q)).collect();
    while chosen.len() < instance.k.min(n) {
        let mut far = 0;
        for q in 1..n {
            if nearest[q] > nearest[far] {
                far = q;
            }
        }
        chosen.push(far);
        for (q, d) in nearest.iter_mut().enumerate() {
            *d = d.min(space.point_to_point(far, q));
        }
    }
    let all = space.center_list().ok();
    let mut centers: Vec<Center> = chosen
        .iter()
        .map(|&p| match space.colocated_center(p) {
            Some(c) => c,
            None => {
                let all = all.as_ref().expect("finite centers when none is co-located");
                all[space.nearest_center(p, all).0].clone()
            }
        })
        .collect();
    while centers.len() < instance.k {
        centers.push(centers[0].clone());
    }
    Ok(Solution::evaluate(space, &instance.norm, centers)?)
}
