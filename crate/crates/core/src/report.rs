//! Persisted bound evaluations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Optimized parameters; infinite optima are stored as absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Optimized {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h: Option<u64>,
}

impl Optimized {
    pub fn lambda(mut self, v: f64) -> Self {
        self.lambda = v.is_finite().then_some(v);
        self
    }

    pub fn k(mut self, v: u32) -> Self {
        self.k = Some(v);
        self
    }

    pub fn beta(mut self, v: f64) -> Self {
        self.beta = v.is_finite().then_some(v);
        self
    }

    pub fn gamma(mut self, v: f64) -> Self {
        self.gamma = v.is_finite().then_some(v);
        self
    }

    pub fn h(mut self, v: u64) -> Self {
        self.h = Some(v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub optimized: Optimized,
    pub value: f64,
    /// Set when the value is not below one.
    pub vacuous: bool,
    pub anchor: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
}

impl BoundReport {
    pub fn new(bound_id: impl Into<String>, value: f64, anchor: impl Into<String>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let value = if value.is_finite() { value } else { 1.0 };
        Self {
            bound_id: bound_id.into(),
            inputs: BTreeMap::new(),
            optimized: Optimized::default(),
            value,
            vacuous: !(value < 1.0),
            anchor: anchor.into(),
            timestamp,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn with_optimized(mut self, optimized: Optimized) -> Self {
        self.optimized = optimized;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One human-readable line.
    pub fn summary_line(&self) -> String {
        let mut line = format!("{} = {:.6}", self.bound_id, self.value);
        let o = &self.optimized;
        if let Some(l) = o.lambda {
            line.push_str(&format!("  λ*={l:.4}"));
        }
        if let Some(k) = o.k {
            line.push_str(&format!("  k*={k}"));
        }
        if let Some(b) = o.beta {
            line.push_str(&format!("  β*={b:.4}"));
        }
        if let Some(g) = o.gamma {
            line.push_str(&format!("  γ*={g:.4}"));
        }
        if let Some(h) = o.h {
            line.push_str(&format!("  h*={h}"));
        }
        if self.vacuous {
            line.push_str("  (vacuous)");
        }
        line
    }
}
