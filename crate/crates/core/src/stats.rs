//! Per-node sufficient statistics: class counts, the nominal `n_ijk` tables
//! and per-class Gaussian summaries for numeric attributes.

use alloc::vec;
use alloc::vec::Vec;

use crate::schema::{AttributeKind, Instance, Schema, Value};
use crate::Result;

/// Running count, mean and squared-deviation sum (Welford) of one
/// numeric attribute restricted to one class, plus the observed range.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEstimator {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for GaussianEstimator {
    fn default() -> Self {
        Self { count: 0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }
}

impl GaussianEstimator {
    pub fn add(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations from the running mean.
    pub fn variance_accumulator(&self) -> f64 {
        self.m2
    }

    /// Sample variance; zero below two readings.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Estimated number of readings `<= threshold`, from the normal
    /// approximation clipped to the observed range.
    pub fn mass_at_or_below(&self, threshold: f64) -> f64 {
        if self.count == 0 || threshold < self.min {
            return 0.0;
        }
        if threshold >= self.max {
            return self.count as f64;
        }
        let sd = libm::sqrt(self.variance());
        let n = self.count as f64;
        if sd <= f64::EPSILON * self.mean.abs().max(1.0) {
            return if self.mean <= threshold { n } else { 0.0 };
        }
        let z = (threshold - self.mean) / (sd * core::f64::consts::SQRT_2);
        n * 0.5 * (1.0 + libm::erf(z))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum AttributeStats {
    /// Row-major `value × class` table.
    Nominal {
        values: usize,
        counts: Vec<u64>,
    },
    Numeric(Vec<GaussianEstimator>),
}

/// Everything a node needs to score candidate splits.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    class_counts: Vec<u64>,
    attributes: Vec<AttributeStats>,
    total: u64,
}

impl SufficientStats {
    pub fn new(schema: &Schema) -> Self {
        let c = schema.class_count();
        let attributes = schema
            .attributes()
            .iter()
            .map(|a| match &a.kind {
                AttributeKind::Nominal { values } => {
                    AttributeStats::Nominal { values: values.len(), counts: vec![0; values.len() * c] }
                }
                AttributeKind::Numeric => AttributeStats::Numeric(vec![GaussianEstimator::default(); c]),
            })
            .collect();
        Self { class_counts: vec![0; c], attributes, total: 0 }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    pub fn class_count(&self) -> usize {
        self.class_counts.len()
    }

    /// `n_ijk`: examples with attribute `attribute` at value `value` and class `class`.
    /// Zero for numeric attributes.
    pub fn nominal_count(&self, attribute: usize, value: usize, class: usize) -> u64 {
        match &self.attributes[attribute] {
            AttributeStats::Nominal { counts, .. } => counts[value * self.class_counts.len() + class],
            AttributeStats::Numeric(_) => 0,
        }
    }

    /// Per-value class-count rows of a nominal attribute.
    pub fn nominal_rows(&self, attribute: usize) -> Option<impl Iterator<Item = &[u64]> + '_> {
        match &self.attributes[attribute] {
            AttributeStats::Nominal { counts, .. } => Some(counts.chunks(self.class_counts.len())),
            AttributeStats::Numeric(_) => None,
        }
    }

    /// Per-class estimators of a numeric attribute.
    pub fn numeric_estimators(&self, attribute: usize) -> Option<&[GaussianEstimator]> {
        match &self.attributes[attribute] {
            AttributeStats::Numeric(est) => Some(est),
            AttributeStats::Nominal { .. } => None,
        }
    }

    /// Observed `[min, max]` of a numeric attribute across classes.
    pub fn numeric_range(&self, attribute: usize) -> Option<(f64, f64)> {
        let est = self.numeric_estimators(attribute)?;
        let (lo, hi) = est
            .iter()
            .filter(|e| e.count() > 0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.min()), hi.max(e.max())));
        (lo <= hi).then_some((lo, hi))
    }

    pub fn is_pure(&self) -> bool {
        self.class_counts.iter().filter(|&&n| n > 0).count() <= 1
    }

    pub fn update(&mut self, instance: &Instance, schema: &Schema) -> Result<()> {
        schema.validate(instance)?;
        let c = self.class_counts.len();
        let k = instance.label;
        for (stats, value) in self.attributes.iter_mut().zip(&instance.values) {
            match (stats, *value) {
                (AttributeStats::Nominal { counts, .. }, Value::Nominal(j)) => counts[j as usize * c + k] += 1,
                (AttributeStats::Numeric(est), Value::Numeric(x)) => est[k].add(x),
                _ => unreachable!("validated against schema"),
            }
        }
        self.class_counts[k] += 1;
        self.total += 1;
        Ok(())
    }

    /// Number of count/summary cells held: `c` class counts, `v_i * c` per
    /// nominal attribute and five scalars per class per numeric attribute.
    pub fn memory_cells(&self) -> usize {
        let c = self.class_counts.len();
        c + self
            .attributes
            .iter()
            .map(|a| match a {
                AttributeStats::Nominal { values, .. } => values * c,
                AttributeStats::Numeric(est) => 5 * est.len(),
            })
            .sum::<usize>()
    }

    /// Checks the count identities; used by tests and debug assertions.
    pub fn is_consistent(&self) -> bool {
        if self.class_counts.iter().sum::<u64>() != self.total {
            return false;
        }
        self.attributes.iter().all(|a| match a {
            AttributeStats::Nominal { counts, .. } => counts.iter().sum::<u64>() == self.total,
            AttributeStats::Numeric(est) => {
                est.iter().map(GaussianEstimator::count).sum::<u64>() == self.total
                    && est.iter().all(|e| e.variance_accumulator() >= 0.0)
            }
        })
    }
}

/// Argmax of the class counts; lowest index wins ties, so empty stats give 0.
pub fn majority_class(stats: &SufficientStats) -> usize {
    argmax_counts(stats.class_counts())
}

pub(crate) fn argmax_counts(counts: &[u64]) -> usize {
    let mut best = 0;
    for (k, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = k;
        }
    }
    best
}

pub fn update_stats(stats: &mut SufficientStats, instance: &Instance, schema: &Schema) -> Result<()> {
    stats.update(instance, schema)
}
