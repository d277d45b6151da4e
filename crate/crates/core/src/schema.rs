//! Attribute declarations, labeled instances and learner hyperparameters.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeKind {
    /// Categorical attribute; instances carry an index into `values`.
    Nominal {
        values: Vec<String>,
    },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn nominal<S: Into<String>>(name: S, values: Vec<String>) -> Self {
        Self { name: name.into(), kind: AttributeKind::Nominal { values } }
    }

    /// Nominal attribute whose values are named `v0`, `v1`, ...
    pub fn nominal_indexed<S: Into<String>>(name: S, value_count: usize) -> Self {
        let values = (0..value_count).map(|j| format!("v{j}")).collect();
        Self::nominal(name, values)
    }

    pub fn numeric<S: Into<String>>(name: S) -> Self {
        Self { name: name.into(), kind: AttributeKind::Numeric }
    }

    /// Number of distinct values, or `None` for numeric attributes.
    pub fn value_count(&self) -> Option<usize> {
        match &self.kind {
            AttributeKind::Nominal { values } => Some(values.len()),
            AttributeKind::Numeric => None,
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttributeKind::Nominal { .. })
    }
}

/// Ordered attribute list plus the class labels of a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<AttributeSpec>,
    class_names: Vec<String>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeSpec>, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::InvalidSchema(format!("class count must be at least 2, got {}", class_names.len())));
        }
        for (i, a) in attributes.iter().enumerate() {
            if a.name.is_empty() {
                return Err(Error::InvalidSchema(format!("attribute {i} has an empty name")));
            }
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidSchema(format!("duplicate attribute name `{}`", a.name)));
            }
            if let AttributeKind::Nominal { values } = &a.kind {
                if values.len() < 2 {
                    return Err(Error::InvalidSchema(format!(
                        "nominal attribute `{}` needs at least 2 values",
                        a.name
                    )));
                }
                for (j, v) in values.iter().enumerate() {
                    if values[..j].contains(v) {
                        return Err(Error::InvalidSchema(format!("attribute `{}` repeats value `{v}`", a.name)));
                    }
                }
            }
        }
        Ok(Self { attributes, class_names })
    }

    /// All-nominal schema with `d` attributes `a0..` of `v` values each and
    /// `c` classes `c0..`.
    pub fn uniform_nominal(d: usize, v: usize, c: usize) -> Result<Self> {
        let attributes = (0..d).map(|i| AttributeSpec::nominal_indexed(format!("a{i}"), v)).collect();
        let classes = (0..c).map(|k| format!("c{k}")).collect();
        Self::new(attributes, classes)
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeSpec {
        &self.attributes[index]
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn is_all_nominal(&self) -> bool {
        self.attributes.iter().all(AttributeSpec::is_nominal)
    }

    /// Checks value kinds, nominal ranges, finiteness and the label range.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if instance.values.len() != self.attributes.len() {
            return Err(Error::SchemaViolation(format!(
                "expected {} values, got {}",
                self.attributes.len(),
                instance.values.len()
            )));
        }
        if instance.label >= self.class_count() {
            return Err(Error::SchemaViolation(format!(
                "label {} out of range for {} classes",
                instance.label,
                self.class_count()
            )));
        }
        for (spec, value) in self.attributes.iter().zip(&instance.values) {
            match (&spec.kind, value) {
                (AttributeKind::Nominal { values }, Value::Nominal(j)) => {
                    if *j as usize >= values.len() {
                        return Err(Error::SchemaViolation(format!(
                            "value index {j} out of range for `{}` ({} values)",
                            spec.name,
                            values.len()
                        )));
                    }
                }
                (AttributeKind::Numeric, Value::Numeric(x)) => {
                    if !x.is_finite() {
                        return Err(Error::SchemaViolation(format!("non-finite reading for `{}`", spec.name)));
                    }
                }
                _ => return Err(Error::SchemaViolation(format!("value kind mismatch for `{}`", spec.name))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Nominal(u32),
    Numeric(f64),
}

impl Value {
    pub fn as_nominal(self) -> Option<usize> {
        match self {
            Value::Nominal(j) => Some(j as usize),
            Value::Numeric(_) => None,
        }
    }

    pub fn as_numeric(self) -> Option<f64> {
        match self {
            Value::Numeric(x) => Some(x),
            Value::Nominal(_) => None,
        }
    }
}

/// One labeled observation, aligned to schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub label: usize,
}

impl Instance {
    pub fn new(values: Vec<Value>, label: usize) -> Self {
        Self { values, label }
    }

    pub fn nominal(values: &[u32], label: usize) -> Self {
        Self { values: values.iter().map(|&j| Value::Nominal(j)).collect(), label }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Split-test significance, in (0, 1).
    pub delta: f64,
    /// Tie-break threshold; a split is forced once the bound drops below it.
    pub tau: f64,
    /// Examples between split attempts at a leaf.
    pub leaf_cadence: u64,
    /// Examples between split re-evaluations at an internal node.
    pub internal_cadence: u64,
    /// Candidate thresholds per numeric attribute.
    pub numeric_candidates: usize,
    /// Keep nominal attributes available below a node that already split on them.
    pub reuse_nominal_attributes: bool,
    /// Apply `tau` inside the anytime tree's tests as well. Off by default.
    pub efdt_tie_break: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            delta: 0.05,
            tau: 0.05,
            leaf_cadence: 200,
            internal_cadence: 2000,
            numeric_candidates: 10,
            reuse_nominal_attributes: false,
            efdt_tie_break: false,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParams(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::InvalidParams(format!("tau must be finite and >= 0, got {}", self.tau)));
        }
        if self.leaf_cadence == 0 || self.internal_cadence == 0 {
            return Err(Error::InvalidParams("cadences must be at least 1".into()));
        }
        if self.numeric_candidates == 0 {
            return Err(Error::InvalidParams("numeric_candidates must be at least 1".into()));
        }
        Ok(())
    }
}
