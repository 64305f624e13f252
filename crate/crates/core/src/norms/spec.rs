use std::collections::HashMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use super::{CascadeDag, NormError, NormObjective};

/// A norm exponent in `[1, ∞]`. Accepts a JSON number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExpVisitor;
        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exponent, E> {
                Ok(Exponent(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "infinity" | "∞" => Ok(Exponent(f64::INFINITY)),
                    other => other
                        .parse::<f64>()
                        .map(Exponent)
                        .map_err(|_| E::custom(format!("invalid exponent {v:?}"))),
                }
            }
        }
        d.deserialize_any(ExpVisitor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CascadeNodeSpec {
    pub id: Value,
    pub q: Exponent,
}

/// The on-disk norm description, tagged by `"type"`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Lz {
        z: Exponent,
    },
    WeightedMax {
        weights: Vec<f64>,
    },
    TopL {
        l: usize,
    },
    Ordered {
        v: Vec<f64>,
    },
    PriorityOrdered {
        v: Vec<f64>,
        w: Vec<f64>,
    },
    FairGroup {
        q: Exponent,
        z: Exponent,
        groups: Vec<Vec<f64>>,
    },
    Cascade {
        nodes: Vec<CascadeNodeSpec>,
        edges: Vec<(Value, Value, f64)>,
        sources: Vec<Value>,
    },
}

fn id_key(v: &Value) -> Result<String, NormError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(NormError::MalformedDag(format!(
            "node ids must be strings or numbers, got {other}"
        ))),
    }
}

impl NormSpec {
    pub fn from_json(text: &str) -> Result<Self, NormError> {
        serde_json::from_str(text)
            .map_err(|e| NormError::InvalidParameter(format!("norm spec: {e}")))
    }

    /// The dimension fixed by the spec itself, if any.
    pub fn natural_dim(&self) -> Option<usize> {
        match self {
            NormSpec::Lz { .. } | NormSpec::TopL { .. } | NormSpec::Ordered { .. } => None,
            NormSpec::WeightedMax { weights } => Some(weights.len()),
            NormSpec::PriorityOrdered { w, .. } => Some(w.len()),
            NormSpec::FairGroup { groups, .. } => groups.first().map(Vec::len),
            NormSpec::Cascade { sources, .. } => Some(sources.len()),
        }
    }

    /// Instantiate the norm for an instance with `n` points.
    pub fn build(&self, n: usize) -> Result<NormObjective, NormError> {
        let check_len = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(NormError::DimensionMismatch {
                    expected: n,
                    got: len,
                })
            }
        };
        match self {
            NormSpec::Lz { z } => NormObjective::lz(z.0, n),
            NormSpec::WeightedMax { weights } => {
                check_len(weights.len())?;
                NormObjective::weighted_max(weights.clone())
            }
            NormSpec::TopL { l } => NormObjective::top_l(*l, n),
            NormSpec::Ordered { v } => NormObjective::ordered(v.clone(), n),
            NormSpec::PriorityOrdered { v, w } => {
                check_len(w.len())?;
                NormObjective::priority_ordered(v.clone(), w.clone())
            }
            NormSpec::FairGroup { q, z, groups } => {
                for g in groups {
                    check_len(g.len())?;
                }
                NormObjective::fair_group(q.0, z.0, groups.clone())
            }
            NormSpec::Cascade {
                nodes,
                edges,
                sources,
            } => {
                check_len(sources.len())?;
                let mut index: HashMap<String, usize> = HashMap::new();
                for (i, s) in sources.iter().enumerate() {
                    if index.insert(id_key(s)?, i).is_some() {
                        return Err(NormError::MalformedDag(format!("duplicate id {s}")));
                    }
                }
                let mut exps = Vec::with_capacity(nodes.len());
                for node in nodes {
                    let key = id_key(&node.id)?;
                    if index.insert(key, n + exps.len()).is_some() {
                        return Err(NormError::MalformedDag(format!(
                            "duplicate id {}",
                            node.id
                        )));
                    }
                    exps.push(node.q.0);
                }
                let lookup = |v: &Value| -> Result<usize, NormError> {
                    let key = id_key(v)?;
                    index
                        .get(&key)
                        .copied()
                        .ok_or_else(|| NormError::MalformedDag(format!("unknown node id {v}")))
                };
                let mut resolved = Vec::with_capacity(edges.len());
                for (u, v, w) in edges {
                    resolved.push((lookup(u)?, lookup(v)?, *w));
                }
                NormObjective::cascade(CascadeDag::new(n, exps, resolved)?)
            }
        }
    }
}
