use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// One value per grid cell, cells ordered row-major (last axis fastest).
/// `None` marks a failed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub series: String,
    pub cell: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotHint {
    None,
    Line { series: Vec<String>, log_x: bool, log_y: bool },
    Heatmap { series: Vec<String>, log_color: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub version: String,
    pub experiment: String,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    /// Effective configuration after defaults and command-line overrides.
    pub config: Value,
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub axes: Vec<Axis>,
    pub series: Vec<Series>,
    #[serde(default)]
    pub failed: Vec<FailedCell>,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
    pub plot: PlotHint,
    pub metadata: Metadata,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, axes: Vec<Axis>, metadata: Metadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            axes,
            series: Vec::new(),
            failed: Vec::new(),
            scalars: BTreeMap::new(),
            plot: PlotHint::None,
            metadata,
        }
    }

    /// Number of grid cells; a report without axes has a single cell.
    pub fn cells(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis indices of cell `k`.
    pub fn unravel(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = k % axis.values.len();
            k /= axis.values.len();
        }
        idx
    }

    /// Adds a series, recording failed cells.
    pub fn push_series(&mut self, name: impl Into<String>, values: Vec<std::result::Result<f64, String>>) {
        let name = name.into();
        let mut out = Vec::with_capacity(values.len());
        for (cell, v) in values.into_iter().enumerate() {
            match v {
                Ok(x) if x.is_finite() => out.push(Some(x)),
                Ok(x) => {
                    self.failed.push(FailedCell { series: name.clone(), cell, error: format!("non-finite value {x}") });
                    out.push(None);
                }
                Err(error) => {
                    self.failed.push(FailedCell { series: name.clone(), cell, error });
                    out.push(None);
                }
            }
        }
        self.series.push(Series { name, values: out });
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Values of a series with failed cells as NaN.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        self.series(name).map(|s| s.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    /// Checks the structural invariants that the JSON schema states.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::ShapeMismatch(format!("schema version {}", self.schema_version)));
        }
        let n = self.cells();
        for a in &self.axes {
            if a.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::ShapeMismatch(format!("axis {} must be finite", a.name)));
            }
        }
        for s in &self.series {
            if s.values.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "series {} has {} values for {n} cells",
                    s.name,
                    s.values.len()
                )));
            }
            for (cell, v) in s.values.iter().enumerate() {
                match v {
                    Some(x) if !x.is_finite() => {
                        return Err(Error::ShapeMismatch(format!("series {} cell {cell} is not finite", s.name)))
                    }
                    None if !self.failed.iter().any(|f| f.series == s.name && f.cell == cell) => {
                        return Err(Error::ShapeMismatch(format!(
                            "series {} cell {cell} missing without failure",
                            s.name
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// JSON Schema (draft 2020-12) for emitted reports.
pub fn report_schema() -> Value {
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "geoquad experiment report",
        "type": "object",
        "required": ["schema_version", "name", "axes", "series", "failed", "scalars", "plot", "metadata"],
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "name": { "type": "string" },
            "axes": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "values"],
                    "properties": {
                        "name": { "type": "string" },
                        "values": { "type": "array", "items": { "type": "number" } }
                    }
                }
            },
            "series": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "values"],
                    "properties": {
                        "name": { "type": "string" },
                        "values": { "type": "array", "items": { "type": ["number", "null"] } }
                    }
                }
            },
            "failed": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["series", "cell", "error"],
                    "properties": {
                        "series": { "type": "string" },
                        "cell": { "type": "integer", "minimum": 0 },
                        "error": { "type": "string" }
                    }
                }
            },
            "scalars": { "type": "object", "additionalProperties": { "type": "number" } },
            "plot": { "type": "object", "required": ["kind"] },
            "metadata": {
                "type": "object",
                "required": ["generator", "version", "experiment", "config_hash", "config"],
                "properties": {
                    "config_hash": { "type": "string", "pattern": "^[0-9a-f]{64}$" }
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Metadata {
        Metadata {
            generator: "geoquad".into(),
            version: "0".into(),
            experiment: "test".into(),
            config_hash: "0".repeat(64),
            config: Value::Null,
            extra: BTreeMap::new(),
        }
    }

    #[test]
    fn unravel_row_major() {
        let r = ExperimentReport::new(
            "x",
            vec![
                Axis { name: "a".into(), values: vec![1.0, 2.0] },
                Axis { name: "b".into(), values: vec![1.0, 2.0, 3.0] },
            ],
            meta(),
        );
        assert_eq!(r.cells(), 6);
        assert_eq!(r.unravel(4), vec![1, 1]);
        assert_eq!(r.unravel(2), vec![0, 2]);
    }

    #[test]
    fn failures_are_recorded() {
        let mut r = ExperimentReport::new("x", vec![Axis { name: "a".into(), values: vec![1.0, 2.0] }], meta());
        r.push_series("v", vec![Ok(1.0), Err("boom".into())]);
        assert_eq!(r.failed.len(), 1);
        r.validate().unwrap();
        r.series[0].values[1] = None;
        r.failed.clear();
        assert!(r.validate().is_err());
    }
}
