//! Run manifests: every output embeds enough provenance to reproduce it
//! byte for byte.

use serde_json::{json, Map, Value};

use erps::util::fnv64;

pub struct Manifest {
    command: String,
    field: Option<Value>,
    inputs: Vec<(String, u64)>,
    options: Map<String, Value>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            field: None,
            inputs: Vec::new(),
            options: Map::new(),
        }
    }

    pub fn field(&mut self, field: &erps::FiniteField) -> &mut Self {
        self.field = Some(erps::serial::field_to_json(field));
        self
    }

    pub fn input(&mut self, path: &str, bytes: &[u8]) -> &mut Self {
        self.inputs.push((path.to_string(), fnv64(bytes)));
        self
    }

    pub fn option(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.options.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": "erps",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "field": self.field.clone().unwrap_or(Value::Null),
            "inputs": self
                .inputs
                .iter()
                .map(|(path, digest)| json!({ "path": path, "fnv64": format!("{digest:016x}") }))
                .collect::<Vec<_>>(),
            "options": Value::Object(self.options.clone()),
        })
    }
}
