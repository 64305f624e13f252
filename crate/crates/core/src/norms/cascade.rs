use super::NormError;

/// A cascaded norm: a DAG whose sources are the points and whose internal
/// nodes aggregate their in-neighbours with a weighted ℓ_q norm,
/// `η(v) = (Σ_u w_{u,v} η(u)^q)^{1/q}`. For `q = ∞` a node takes
/// `max_u w_{u,v} η(u)`. The objective value is `η(sink)`.
///
/// Nodes `0..n` are the sources (node `p` carries `x_p`), nodes
/// `n..n+m` are internal.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeDag {
    n_sources: usize,
    q: Vec<f64>,
    // Per internal node: (tail node, weight), sorted by tail.
    in_edges: Vec<Vec<(usize, f64)>>,
    // Internal node indices (0-based among internal nodes) in topological order.
    order: Vec<usize>,
}

impl CascadeDag {
    /// Build a DAG from internal-node exponents and `(from, to, weight)` edges.
    pub fn new(
        n_sources: usize,
        internal_q: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self, NormError> {
        let m = internal_q.len();
        let total = n_sources + m;
        if n_sources == 0 {
            return Err(NormError::MalformedDag("no sources".into()));
        }
        if m == 0 {
            return Err(NormError::MalformedDag("no internal nodes".into()));
        }
        for (i, &q) in internal_q.iter().enumerate() {
            if q.is_nan() || q < 1.0 {
                return Err(NormError::InvalidParameter(format!(
                    "node {} has exponent {q}; must be >= 1 or infinite",
                    n_sources + i
                )));
            }
        }

        let mut in_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut out_degree = vec![0usize; total];
        for &(u, v, w) in &edges {
            if u >= total || v >= total {
                return Err(NormError::MalformedDag(format!(
                    "edge ({u}, {v}) references an unknown node"
                )));
            }
            if v < n_sources {
                return Err(NormError::MalformedDag(format!(
                    "edge ({u}, {v}) points into a source"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(NormError::MalformedDag(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            let list = &mut in_edges[v - n_sources];
            if list.iter().any(|&(t, _)| t == u) {
                return Err(NormError::MalformedDag(format!("duplicate edge ({u}, {v})")));
            }
            list.push((u, w));
            out_degree[u] += 1;
        }
        for (i, list) in in_edges.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(NormError::MalformedDag(format!(
                    "internal node {} has no incoming edges",
                    n_sources + i
                )));
            }
            list.sort_by_key(|&(t, _)| t);
        }

        let sinks: Vec<usize> = (0..total).filter(|&v| out_degree[v] == 0).collect();
        match sinks.as_slice() {
            [s] if *s >= n_sources => {}
            [s] => {
                return Err(NormError::MalformedDag(format!(
                    "the only sink is source node {s}"
                )))
            }
            [] => return Err(NormError::MalformedDag("no sink (cycle)".into())),
            many => {
                return Err(NormError::MalformedDag(format!(
                    "{} sinks: {:?}",
                    many.len(),
                    many
                )))
            }
        }

        // Kahn's algorithm over the internal nodes.
        let mut indegree: Vec<usize> = in_edges
            .iter()
            .map(|l| l.iter().filter(|&&(t, _)| t >= n_sources).count())
            .collect();
        let mut successors: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (v, list) in in_edges.iter().enumerate() {
            for &(t, _) in list {
                if t >= n_sources {
                    successors[t - n_sources].push(v);
                }
            }
        }
        let mut order = Vec::with_capacity(m);
        let mut ready: Vec<usize> = (0..m).filter(|&v| indegree[v] == 0).rev().collect();
        while let Some(v) = ready.pop() {
            order.push(v);
            for &s in &successors[v] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.push(s);
                }
            }
        }
        if order.len() != m {
            return Err(NormError::MalformedDag("cycle among internal nodes".into()));
        }

        Ok(Self {
            n_sources,
            q: internal_q,
            in_edges,
            order,
        })
    }

    /// Three-layer DAG: points → one weighted ℓ_z node per group → ℓ_q sink.
    pub(crate) fn two_level(
        n: usize,
        z: f64,
        q: f64,
        groups: &[Vec<f64>],
    ) -> Result<Self, NormError> {
        let m = groups.len();
        let mut exps = vec![z; m];
        exps.push(q);
        let mut edges = Vec::with_capacity(n * m + m);
        for (i, w) in groups.iter().enumerate() {
            for (p, &wp) in w.iter().enumerate() {
                edges.push((p, n + i, wp));
            }
            edges.push((n + i, n + m, 1.0));
        }
        Self::new(n, exps, edges)
    }

    pub fn num_sources(&self) -> usize {
        self.n_sources
    }

    pub fn num_internal(&self) -> usize {
        self.q.len()
    }

    fn sink(&self) -> usize {
        *self.order.last().expect("at least one internal node")
    }

    fn aggregate(&self, v: usize, values: &[f64]) -> f64 {
        let q = self.q[v];
        let edges = &self.in_edges[v];
        if q.is_infinite() {
            return edges
                .iter()
                .map(|&(t, w)| w * values[t])
                .fold(0.0, f64::max);
        }
        let m = edges.iter().map(|&(t, _)| values[t]).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        if q == 1.0 {
            return edges.iter().map(|&(t, w)| w * values[t]).sum();
        }
        let s: f64 = edges.iter().map(|&(t, w)| w * (values[t] / m).powf(q)).sum();
        m * s.powf(1.0 / q)
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut values = vec![0.0; self.n_sources + self.q.len()];
        values[..self.n_sources].copy_from_slice(x);
        for &v in &self.order {
            values[self.n_sources + v] = self.aggregate(v, &values);
        }
        values
    }

    pub(crate) fn evaluate(&self, x: &[f64]) -> f64 {
        self.forward(x)[self.n_sources + self.sink()]
    }

    /// Chain rule through the DAG. Each node contributes a nonnegative local
    /// subgradient of its ℓ_q aggregation; nodes whose value is zero use the
    /// local subgradient at the all-ones vector.
    pub(crate) fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_sources;
        let values = self.forward(x);
        let mut adjoint = vec![0.0; values.len()];
        adjoint[n + self.sink()] = 1.0;
        for &v in self.order.iter().rev() {
            let a = adjoint[n + v];
            if a == 0.0 {
                continue;
            }
            let q = self.q[v];
            let eta = values[n + v];
            let edges = &self.in_edges[v];
            if q.is_infinite() {
                // Argmax of w·η(u); at a zero node the argmax of w.
                let score = |t: usize, w: f64| if eta > 0.0 { w * values[t] } else { w };
                let mut best = edges[0];
                for &(t, w) in &edges[1..] {
                    if score(t, w) > score(best.0, best.1) {
                        best = (t, w);
                    }
                }
                adjoint[best.0] += a * best.1;
            } else if eta > 0.0 {
                for &(t, w) in edges {
                    let beta = if q == 1.0 {
                        w
                    } else {
                        w * (values[t] / eta).powf(q - 1.0)
                    };
                    adjoint[t] += a * beta;
                }
            } else {
                let wsum: f64 = edges.iter().map(|&(_, w)| w).sum();
                if wsum > 0.0 {
                    let denom = wsum.powf((q - 1.0) / q);
                    for &(t, w) in edges {
                        adjoint[t] += a * w / denom;
                    }
                }
            }
        }
        adjoint.truncate(n);
        adjoint
    }
}
