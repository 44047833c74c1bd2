use serde_json::{Map, Value};

/// User-facing names for variables and their values.
#[derive(Clone, Debug, PartialEq)]
pub struct Naming {
    pub vars: Vec<String>,
    pub values: Vec<Vec<Value>>,
}

impl Naming {
    /// Variables `1..=n` with values `false`/`true`.
    pub fn boolean(n: usize) -> Self {
        Self {
            vars: (1..=n).map(|i| i.to_string()).collect(),
            values: vec![vec![Value::Bool(false), Value::Bool(true)]; n],
        }
    }

    /// Variables `1..=n` with values `1..=q`.
    pub fn indexed(n: usize, q: usize) -> Self {
        Self {
            vars: (1..=n).map(|i| i.to_string()).collect(),
            values: vec![(1..=q).map(Value::from).collect(); n],
        }
    }

    /// Variables `0..n` with their 0-based value indices.
    pub fn identity(domains: &[usize]) -> Self {
        Self {
            vars: (0..domains.len()).map(|i| i.to_string()).collect(),
            values: domains.iter().map(|&d| (0..d).map(Value::from).collect()).collect(),
        }
    }

    /// A JSON object from variable name to value name, in variable order.
    pub fn render(&self, assignment: &[u32]) -> Value {
        let mut obj = Map::new();
        for (v, &x) in assignment.iter().enumerate() {
            obj.insert(self.vars[v].clone(), self.values[v][x as usize].clone());
        }
        Value::Object(obj)
    }
}
