//! Monotone norm objectives over point-indexed distance vectors.
//!
//! Every variant supports exact evaluation and a closed-form nonnegative
//! subgradient `g` with `gᵀx = f(x)` and `gᵀy ≤ f(y)` for all `y ≥ 0`. Such a
//! `g` is in particular an ε-approximate subgradient for every ε > 0.

mod cascade;
mod spec;

use std::cmp::Ordering;

use thiserror::Error;

pub use cascade::CascadeDag;
pub use spec::{Exponent, NormSpec};

/// Relative tolerance used for floating comparisons in this module.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("dimension mismatch: norm has dimension {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component {index} is negative or not finite ({value})")]
    NegativeComponent { index: usize, value: f64 },

    #[error("point index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid norm parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed cascade DAG: {0}")]
    MalformedDag(String),
}

/// The catalogue of supported objectives.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// `(Σ x_p^z)^{1/z}`, `max_p x_p` for `z = ∞`.
    Lz { z: f64 },
    /// `max_p w_p x_p`.
    WeightedMax { weights: Vec<f64> },
    /// Sum of the `l` largest entries.
    TopL { l: usize },
    /// `vᵀ x↓` with `v` non-increasing.
    Ordered { v: Vec<f64> },
    /// `vᵀ (w∘x)↓`.
    PriorityOrdered { v: Vec<f64>, w: Vec<f64> },
    /// ℓ_q over groups of weighted ℓ_z group costs.
    FairGroup {
        q: f64,
        z: f64,
        groups: Vec<Vec<f64>>,
    },
    /// Arbitrary DAG of weighted ℓ_q aggregations.
    Cascade(CascadeDag),
}

/// A monotone norm `f: ℝ^n_{≥0} → ℝ_{≥0}` over the points of an instance.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormObjective {
    kind: NormKind,
    dim: usize,
    // Fair-group norms are evaluated through the equivalent three-layer DAG.
    compiled: Option<CascadeDag>,
}

/// A nonnegative subgradient together with the approximation level it certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientVector {
    pub g: Vec<f64>,
    pub epsilon_sg: f64,
}

impl SubgradientVector {
    pub fn dot(&self, y: &[f64]) -> f64 {
        self.g.iter().zip(y).map(|(a, b)| a * b).sum()
    }
}

fn check_exponent(name: &str, value: f64) -> Result<(), NormError> {
    if value.is_nan() || value < 1.0 {
        return Err(NormError::InvalidParameter(format!(
            "{name} must be >= 1 or infinite, got {value}"
        )));
    }
    Ok(())
}

fn check_nonneg(name: &str, values: &[f64]) -> Result<(), NormError> {
    for (i, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(NormError::InvalidParameter(format!(
                "{name}[{i}] must be finite and nonnegative, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_non_increasing(v: &[f64]) -> Result<(), NormError> {
    if let Some(i) = v.windows(2).position(|w| w[1] > w[0]) {
        return Err(NormError::InvalidParameter(format!(
            "v must be non-increasing, but v[{}] = {} < v[{}] = {}",
            i,
            v[i],
            i + 1,
            v[i + 1]
        )));
    }
    Ok(())
}

fn padded(v: &[f64], n: usize) -> Result<Vec<f64>, NormError> {
    if v.len() > n {
        return Err(NormError::InvalidParameter(format!(
            "v has {} entries but there are only {n} points",
            v.len()
        )));
    }
    let mut out = v.to_vec();
    out.resize(n, 0.0);
    Ok(out)
}

/// Indices sorted by descending value, lowest index first among ties.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// First index attaining the maximum.
fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b].total_cmp(&v) != Ordering::Less => {}
            _ => best = Some(i),
        }
    }
    best
}

/// `(Σ x_i^z)^{1/z}` with rescaling by the maximum entry.
pub(crate) fn lz_value(x: &[f64], z: f64) -> f64 {
    let m = x.iter().copied().fold(0.0_f64, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if z.is_infinite() {
        return m;
    }
    if z == 1.0 {
        return x.iter().sum();
    }
    let s: f64 = x.iter().map(|&v| (v / m).powf(z)).sum();
    m * s.powf(1.0 / z)
}

impl NormObjective {
    fn new(kind: NormKind, dim: usize) -> Result<Self, NormError> {
        if dim == 0 {
            return Err(NormError::InvalidParameter(
                "norm dimension must be positive".into(),
            ));
        }
        Ok(Self {
            kind,
            dim,
            compiled: None,
        })
    }

    pub fn lz(z: f64, dim: usize) -> Result<Self, NormError> {
        check_exponent("z", z)?;
        Self::new(NormKind::Lz { z }, dim)
    }

    pub fn weighted_max(weights: Vec<f64>) -> Result<Self, NormError> {
        check_nonneg("weights", &weights)?;
        let dim = weights.len();
        Self::new(NormKind::WeightedMax { weights }, dim)
    }

    /// Top-`l` norm. `l` larger than the dimension is clipped.
    pub fn top_l(l: usize, dim: usize) -> Result<Self, NormError> {
        if l == 0 {
            return Err(NormError::InvalidParameter("l must be >= 1".into()));
        }
        Self::new(NormKind::TopL { l: l.min(dim) }, dim)
    }

    /// Ordered weighted norm; `v` shorter than `dim` is padded with zeros.
    pub fn ordered(v: Vec<f64>, dim: usize) -> Result<Self, NormError> {
        check_nonneg("v", &v)?;
        check_non_increasing(&v)?;
        let v = padded(&v, dim)?;
        Self::new(NormKind::Ordered { v }, dim)
    }

    /// Priority ordered norm; the dimension is the length of `w`.
    pub fn priority_ordered(v: Vec<f64>, w: Vec<f64>) -> Result<Self, NormError> {
        check_nonneg("v", &v)?;
        check_non_increasing(&v)?;
        check_nonneg("w", &w)?;
        let dim = w.len();
        let v = padded(&v, dim)?;
        Self::new(NormKind::PriorityOrdered { v, w }, dim)
    }

    /// `(z,q)`-fair objective: `‖(h_1(x), …, h_m(x))‖_q` with
    /// `h_i(x) = (Σ_p w_i(p) x_p^z)^{1/z}`.
    pub fn fair_group(q: f64, z: f64, groups: Vec<Vec<f64>>) -> Result<Self, NormError> {
        check_exponent("q", q)?;
        check_exponent("z", z)?;
        let Some(first) = groups.first() else {
            return Err(NormError::InvalidParameter(
                "fair_group needs at least one group".into(),
            ));
        };
        let dim = first.len();
        for (i, g) in groups.iter().enumerate() {
            if g.len() != dim {
                return Err(NormError::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            check_nonneg(&format!("groups[{i}]"), g)?;
        }
        let compiled = CascadeDag::two_level(dim, z, q, &groups)?;
        let mut norm = Self::new(NormKind::FairGroup { q, z, groups }, dim)?;
        norm.compiled = Some(compiled);
        Ok(norm)
    }

    pub fn cascade(dag: CascadeDag) -> Result<Self, NormError> {
        let dim = dag.num_sources();
        Self::new(NormKind::Cascade(dag), dim)
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether the norm is invariant under permutations of the points.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.kind,
            NormKind::Lz { .. } | NormKind::TopL { .. } | NormKind::Ordered { .. }
        )
    }

    fn dag(&self) -> Option<&CascadeDag> {
        match &self.kind {
            NormKind::Cascade(dag) => Some(dag),
            _ => self.compiled.as_ref(),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NormError> {
        if x.len() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for (index, &value) in x.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(NormError::NegativeComponent { index, value });
            }
        }
        Ok(())
    }

    /// Evaluate `f(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, NormError> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        if let Some(dag) = self.dag() {
            return dag.evaluate(x);
        }
        match &self.kind {
            NormKind::Lz { z } => lz_value(x, *z),
            NormKind::WeightedMax { weights } => weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .fold(0.0, f64::max),
            NormKind::TopL { l } => {
                let mut sorted = x.to_vec();
                sorted.sort_by(|a, b| b.total_cmp(a));
                sorted[..*l].iter().sum()
            }
            NormKind::Ordered { v } => {
                let mut sorted = x.to_vec();
                sorted.sort_by(|a, b| b.total_cmp(a));
                v.iter().zip(&sorted).map(|(a, b)| a * b).sum()
            }
            NormKind::PriorityOrdered { v, w } => {
                let mut weighted: Vec<f64> = w.iter().zip(x).map(|(a, b)| a * b).collect();
                weighted.sort_by(|a, b| b.total_cmp(a));
                v.iter().zip(&weighted).map(|(a, b)| a * b).sum()
            }
            NormKind::FairGroup { .. } | NormKind::Cascade(_) => {
                unreachable!("handled through the DAG")
            }
        }
    }

    /// A nonnegative subgradient of `f` at `x`.
    ///
    /// The returned vector is exact, so it certifies any `epsilon_sg > 0`.
    /// Where `f(x) = 0` the subgradient at the all-ones vector is returned.
    pub fn subgradient(&self, x: &[f64], epsilon_sg: f64) -> Result<SubgradientVector, NormError> {
        self.check_input(x)?;
        if !(epsilon_sg > 0.0) {
            return Err(NormError::InvalidParameter(format!(
                "epsilon_sg must be positive, got {epsilon_sg}"
            )));
        }
        let g = if let Some(dag) = self.dag() {
            dag.subgradient(x)
        } else if self.eval_unchecked(x) == 0.0 {
            self.closed_form_subgradient(&vec![1.0; self.dim])
        } else {
            self.closed_form_subgradient(x)
        };
        Ok(SubgradientVector { g, epsilon_sg })
    }

    fn closed_form_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut g = vec![0.0; n];
        match &self.kind {
            NormKind::Lz { z } if z.is_infinite() => {
                g[argmax(x).expect("dimension is positive")] = 1.0;
            }
            NormKind::Lz { z } if *z == 1.0 => g.fill(1.0),
            NormKind::Lz { z } => {
                let norm = lz_value(x, *z);
                for (gi, &xi) in g.iter_mut().zip(x) {
                    *gi = (xi / norm).powf(z - 1.0);
                }
            }
            NormKind::WeightedMax { weights } => {
                let prod: Vec<f64> = weights.iter().zip(x).map(|(w, v)| w * v).collect();
                let p = argmax(&prod).expect("dimension is positive");
                g[p] = weights[p];
            }
            NormKind::TopL { l } => {
                for &p in descending_order(x).iter().take(*l) {
                    g[p] = 1.0;
                }
            }
            NormKind::Ordered { v } => {
                for (rank, &p) in descending_order(x).iter().enumerate() {
                    g[p] = v[rank];
                }
            }
            NormKind::PriorityOrdered { v, w } => {
                let weighted: Vec<f64> = w.iter().zip(x).map(|(a, b)| a * b).collect();
                for (rank, &p) in descending_order(&weighted).iter().enumerate() {
                    g[p] = v[rank] * w[p];
                }
            }
            NormKind::FairGroup { .. } | NormKind::Cascade(_) => {
                unreachable!("handled through the DAG")
            }
        }
        g
    }

    /// `f(1_B)`: the largest weight any subgradient can put on the set `B`.
    pub fn ball_mass(&self, members: &[usize]) -> Result<f64, NormError> {
        let mut indicator = vec![0.0; self.dim];
        for &p in members {
            if p >= self.dim {
                return Err(NormError::IndexOutOfRange {
                    index: p,
                    dim: self.dim,
                });
            }
            indicator[p] = 1.0;
        }
        Ok(self.eval_unchecked(&indicator))
    }
}
