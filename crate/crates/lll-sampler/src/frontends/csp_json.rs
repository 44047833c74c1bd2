use super::naming::Naming;
use crate::csp::{AtomicConstraint, AtomicCsp, VariableSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarDoc {
    domain: usize,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    vbl: Vec<usize>,
    #[serde(rename = "false")]
    falsifying: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CspDoc {
    vars: Vec<VarDoc>,
    #[serde(default)]
    constraints: Vec<ConstraintDoc>,
}

pub fn parse_csp(text: &str) -> Result<AtomicCsp> {
    parse_csp_named(text).map(|(csp, _)| csp)
}

/// Parses the JSON interchange format. Variables may carry an optional
/// `name` and a list of `values` used for named output.
pub fn parse_csp_named(text: &str) -> Result<(AtomicCsp, Naming)> {
    let doc: CspDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    let mut vars = Vec::with_capacity(doc.vars.len());
    let mut naming = Naming::identity(&doc.vars.iter().map(|v| v.domain).collect::<Vec<_>>());
    for (i, v) in doc.vars.into_iter().enumerate() {
        if v.domain == 0 {
            return Err(Error::InvalidInstance(format!("variable {i} has an empty domain")));
        }
        let spec = match v.weights {
            None => VariableSpec::uniform(v.domain),
            Some(w) if w.len() != v.domain => {
                return Err(Error::InvalidInstance(format!(
                    "variable {i}: {} weights for domain size {}",
                    w.len(),
                    v.domain
                )))
            }
            Some(w) => VariableSpec::new(w).map_err(|e| match e {
                Error::InvalidInstance(msg) => Error::InvalidInstance(format!("variable {i}: {msg}")),
                other => other,
            })?,
        };
        vars.push(spec);
        if let Some(name) = v.name {
            naming.vars[i] = name;
        }
        if let Some(values) = v.values {
            if values.len() != v.domain {
                return Err(Error::InvalidInstance(format!("variable {i}: {} value names", values.len())));
            }
            naming.values[i] = values;
        }
    }
    let constraints = doc.constraints.into_iter().map(|c| AtomicConstraint::new(c.vbl, c.falsifying)).collect();
    Ok((AtomicCsp::new(vars, constraints)?, naming))
}

/// Emits the interchange format with explicit weights.
pub fn emit_csp(csp: &AtomicCsp) -> String {
    let doc = CspDoc {
        vars: csp
            .vars()
            .iter()
            .map(|v| VarDoc { domain: v.domain_size(), weights: Some(v.weights().to_vec()), name: None, values: None })
            .collect(),
        constraints: csp
            .constraints()
            .iter()
            .map(|c| ConstraintDoc { vbl: c.vbl.clone(), falsifying: c.falsifying.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}
