//! Report envelope and the index conventions of the JSON output.

use serde::Serialize;
use serde_json::{json, Map, Value};
use weakrp::Error;

/// Keys whose values are observation (or candidate) indices. The library is
/// zero-based; reports are one-based.
const INDEX_KEYS: &[&str] = &["pair", "cycle", "observation", "s", "t", "anchor", "attaining", "choices"];

pub fn to_one_based(v: Value) -> Value {
    fn bump(v: Value) -> Value {
        match v {
            Value::Number(n) => n.as_u64().map_or(Value::Number(n), |i| json!(i + 1)),
            Value::Array(a) => Value::Array(a.into_iter().map(bump).collect()),
            other => other,
        }
    }
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| {
                    let v = if INDEX_KEYS.contains(&k.as_str()) { bump(v) } else { to_one_based(v) };
                    (k, v)
                })
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.into_iter().map(to_one_based).collect()),
        other => other,
    }
}

pub fn value<T: Serialize>(x: &T) -> Value {
    to_one_based(serde_json::to_value(x).expect("report types serialize"))
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// Error as a JSON object, indices one-based.
pub fn error_value(e: &Error) -> Value {
    let (kind, extra) = match e {
        Error::InvalidInput(_) => ("invalid_input", Value::Null),
        Error::Csv { line, column, .. } => ("csv", json!({ "line": line, "column": column })),
        Error::GarpViolation { cycle } => ("garp_violation", json!({ "cycle": one_based(cycle) })),
        Error::SarpViolation { cycle } => ("sarp_violation", json!({ "cycle": one_based(cycle) })),
        Error::WgarpViolation { pair } => ("wgarp_violation", json!({ "pair": [pair.0 + 1, pair.1 + 1] })),
        Error::WarpViolation { pair } => ("warp_violation", json!({ "pair": [pair.0 + 1, pair.1 + 1] })),
        Error::LawOfDemandViolation { pair } => {
            ("law_of_demand_violation", json!({ "pair": [pair.0 + 1, pair.1 + 1] }))
        }
        Error::StrongLawViolation { cycle } => ("strong_law_violation", json!({ "cycle": one_based(cycle) })),
        Error::PatternExplosion { patterns, cap } => {
            ("pattern_explosion", json!({ "patterns": patterns.to_string(), "cap": cap.to_string() }))
        }
        Error::SearchCap { nodes, cap } => ("search_cap", json!({ "nodes": nodes.to_string(), "cap": cap.to_string() })),
        Error::Normalization { spent } => ("normalization", json!({ "spent": spent })),
        Error::Solver { gap, .. } => ("solver", json!({ "gap": gap })),
    };
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("message".into(), json!(message(e)));
    if let Value::Object(extra) = extra {
        m.extend(extra);
    }
    Value::Object(m)
}

/// Display text with one-based observation indices.
pub fn message(e: &Error) -> String {
    match e {
        Error::GarpViolation { cycle } => format!("data violate GARP (cycle {:?})", one_based(cycle)),
        Error::SarpViolation { cycle } => format!("data violate SARP (cycle {:?})", one_based(cycle)),
        Error::StrongLawViolation { cycle } => {
            format!("data violate the strong law of demand (cycle {:?})", one_based(cycle))
        }
        Error::WgarpViolation { pair } => format!("data violate WGARP (pair ({}, {}))", pair.0 + 1, pair.1 + 1),
        Error::WarpViolation { pair } => format!("data violate WARP (pair ({}, {}))", pair.0 + 1, pair.1 + 1),
        Error::LawOfDemandViolation { pair } => {
            format!("data violate the law of demand (pair ({}, {}))", pair.0 + 1, pair.1 + 1)
        }
        other => other.to_string(),
    }
}

pub fn is_violation(e: &Error) -> bool {
    matches!(
        e,
        Error::GarpViolation { .. }
            | Error::SarpViolation { .. }
            | Error::WgarpViolation { .. }
            | Error::WarpViolation { .. }
            | Error::LawOfDemandViolation { .. }
            | Error::StrongLawViolation { .. }
    )
}

pub fn is_cap(e: &Error) -> bool {
    matches!(e, Error::PatternExplosion { .. } | Error::SearchCap { .. })
}

/// Settings echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: Option<String>,
    pub indices: &'static str,
    pub tolerances: Tolerances,
    pub caps: Caps,
    pub seed: u64,
    pub interpretation: Interpretation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub milp_eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Caps {
    pub max_patterns: u64,
    pub max_nodes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Interpretation {
    pub afriat_initial_set: &'static str,
    pub big_m: &'static str,
    pub strict_patterns: &'static str,
    pub constant_multipliers: &'static str,
}

impl Default for Interpretation {
    fn default() -> Self {
        Self {
            afriat_initial_set: "the processed set B starts empty; the first class gets U = lambda = 1",
            big_m: "A^t = p^t.x^t + max_s p^t.x^s + 1 on wealth-normalized data",
            strict_patterns: "homogeneous prices with p_l >= 1 and unit margins",
            constant_multipliers: "lambda >= 1, reported scaled to sum to T",
        }
    }
}

pub fn envelope(meta: &Meta, result: Value) -> Value {
    json!({ "meta": meta, "result": result })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_keys_shift_and_others_do_not() {
        let v = json!({
            "witness": { "cycle": [0, 1, 2] },
            "attaining": [2, 0],
            "pairs": [{ "s": 0, "t": 1, "member": true }],
            "anchor": null,
            "value": 3,
            "u": [0.5, 1.0],
        });
        let w = to_one_based(v);
        assert_eq!(w["witness"]["cycle"], json!([1, 2, 3]));
        assert_eq!(w["attaining"], json!([3, 1]));
        assert_eq!(w["pairs"][0], json!({ "s": 1, "t": 2, "member": true }));
        assert_eq!(w["anchor"], Value::Null);
        assert_eq!(w["value"], 3);
        assert_eq!(w["u"], json!([0.5, 1.0]));
    }

    #[test]
    fn violation_messages_are_one_based() {
        let e = Error::GarpViolation { cycle: vec![0, 1, 2] };
        assert_eq!(message(&e), "data violate GARP (cycle [1, 2, 3])");
        assert_eq!(error_value(&Error::WgarpViolation { pair: (0, 3) })["pair"], json!([1, 4]));
    }
}
