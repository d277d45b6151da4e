//! Split scoring: entropy, information gain, the null-split merit and the
//! Hoeffding bound.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::schema::{AttributeKind, HyperParams, Schema};
use crate::stats::SufficientStats;
use crate::tree::{SplitChoice, SplitTest};
use crate::{Error, Result};

/// Shannon entropy in bits of a count vector. Empty vectors have entropy 0.
pub fn entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log2(p)
        })
        .sum()
}

fn entropy_of_masses(masses: &[f64]) -> (f64, f64) {
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let h = masses
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let p = m / total;
            -p * libm::log2(p)
        })
        .sum();
    (h, total)
}

/// Information gain of `choice` over the node's class distribution, in bits,
/// clamped to `[0, log2 c]`. The null split scores exactly 0.
pub fn info_gain(stats: &SufficientStats, choice: &SplitChoice, schema: &Schema) -> f64 {
    match choice {
        SplitChoice::Null => null_split_merit(stats),
        SplitChoice::Test(test) => InfoGain.merit(stats, test, schema),
    }
}

/// Merit of not splitting. Relative to the node's own class distribution,
/// predicting the majority class removes no entropy, so this is 0.
pub fn null_split_merit(_stats: &SufficientStats) -> f64 {
    0.0
}

/// `sqrt(R^2 ln(1/delta) / 2n)`.
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::UndefinedBound);
    }
    Ok(libm::sqrt(range * range * libm::log(1.0 / delta) / (2.0 * n as f64)))
}

/// Candidate cut points for a numeric attribute: midpoints of `count`
/// equal-width bins over the node's observed range. Empty when the attribute
/// has not been observed or is constant.
pub fn numeric_thresholds(stats: &SufficientStats, attribute: usize, count: usize) -> Vec<f64> {
    match stats.numeric_range(attribute) {
        Some((lo, hi)) if hi > lo => {
            let width = (hi - lo) / count as f64;
            (0..count).map(|i| lo + (i as f64 + 0.5) * width).collect()
        }
        _ => Vec::new(),
    }
}

/// A split evaluation function `G`.
pub trait SplitCriterion {
    fn merit(&self, stats: &SufficientStats, test: &SplitTest, schema: &Schema) -> f64;

    /// Range `R` of the merit, used by the Hoeffding bound.
    fn range(&self, class_count: usize) -> f64;

    fn null_merit(&self, stats: &SufficientStats) -> f64 {
        null_split_merit(stats)
    }

    /// Scores every available attribute (numeric ones at their best cut
    /// point) and optionally the null split, best first.
    fn rank(
        &self,
        stats: &SufficientStats,
        available: &[usize],
        include_null: bool,
        schema: &Schema,
        params: &HyperParams,
    ) -> Result<MeritReport> {
        let mut candidates = Vec::with_capacity(available.len() + 1);
        for &attribute in available {
            match schema.attribute(attribute).kind {
                AttributeKind::Nominal { .. } => {
                    let test = SplitTest::Nominal { attribute };
                    let merit = self.merit(stats, &test, schema);
                    candidates.push(SplitCandidate { choice: SplitChoice::Test(test), merit });
                }
                AttributeKind::Numeric => {
                    let best = numeric_thresholds(stats, attribute, params.numeric_candidates)
                        .into_iter()
                        .map(|threshold| {
                            let test = SplitTest::Numeric { attribute, threshold };
                            SplitCandidate { choice: SplitChoice::Test(test), merit: self.merit(stats, &test, schema) }
                        })
                        // earliest threshold wins ties
                        .reduce(|a, b| if b.merit > a.merit { b } else { a });
                    candidates.extend(best);
                }
            }
        }
        if include_null {
            candidates.push(SplitCandidate { choice: SplitChoice::Null, merit: self.null_merit(stats) });
        }
        if candidates.is_empty() {
            return Err(Error::EmptyReport);
        }
        candidates.sort_by(candidate_order);
        Ok(MeritReport { candidates, range: self.range(schema.class_count()) })
    }
}

/// Information gain in bits.
#[derive(Debug, Clone, Copy, Default)]
pub struct InfoGain;

impl SplitCriterion for InfoGain {
    fn merit(&self, stats: &SufficientStats, test: &SplitTest, _schema: &Schema) -> f64 {
        let n = stats.total();
        if n == 0 {
            return 0.0;
        }
        let parent = entropy(stats.class_counts());
        let children = match *test {
            SplitTest::Nominal { attribute } => {
                let rows = stats.nominal_rows(attribute).expect("nominal test on nominal attribute");
                rows.map(|row| {
                    let weight = row.iter().sum::<u64>() as f64 / n as f64;
                    weight * entropy(row)
                })
                .sum::<f64>()
            }
            SplitTest::Numeric { attribute, threshold } => {
                let est = stats.numeric_estimators(attribute).expect("numeric test on numeric attribute");
                let left: Vec<f64> = est.iter().map(|e| e.mass_at_or_below(threshold)).collect();
                let right: Vec<f64> = est.iter().zip(&left).map(|(e, l)| (e.count() as f64 - l).max(0.0)).collect();
                let (hl, wl) = entropy_of_masses(&left);
                let (hr, wr) = entropy_of_masses(&right);
                let w = wl + wr;
                if w <= 0.0 {
                    parent
                } else {
                    (wl * hl + wr * hr) / w
                }
            }
        };
        (parent - children).clamp(0.0, self.range(stats.class_count()))
    }

    fn range(&self, class_count: usize) -> f64 {
        libm::log2(class_count.max(2) as f64)
    }
}

/// Ranks candidates under information gain.
pub fn rank_candidates(
    stats: &SufficientStats,
    available: &[usize],
    include_null: bool,
    schema: &Schema,
    params: &HyperParams,
) -> Result<MeritReport> {
    InfoGain.rank(stats, available, include_null, schema, params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub choice: SplitChoice,
    pub merit: f64,
}

/// Merits closer than this rank as ties.
const MERIT_RESOLUTION: f64 = 1e-12;

fn merit_key(merit: f64) -> i64 {
    libm::round(merit / MERIT_RESOLUTION) as i64
}

/// Higher merit first; on equal merit (to [`MERIT_RESOLUTION`]) attribute
/// tests beat the null split and lower attribute indices beat higher ones.
fn candidate_order(a: &SplitCandidate, b: &SplitCandidate) -> Ordering {
    merit_key(b.merit).cmp(&merit_key(a.merit)).then_with(|| match (a.choice.attribute(), b.choice.attribute()) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    })
}

/// Scored candidates of one node, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct MeritReport {
    candidates: Vec<SplitCandidate>,
    range: f64,
}

impl MeritReport {
    pub fn candidates(&self) -> &[SplitCandidate] {
        &self.candidates
    }

    pub fn best(&self) -> SplitCandidate {
        self.candidates[0]
    }

    pub fn second_best(&self) -> Option<SplitCandidate> {
        self.candidates.get(1).copied()
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// Candidate for `attribute`, if it was scored.
    pub fn for_attribute(&self, attribute: usize) -> Option<SplitCandidate> {
        self.candidates.iter().find(|c| c.choice.attribute() == Some(attribute)).copied()
    }
}
