//! Checks that EFDT, fed a stationary nominal stream, ends up with the same
//! tree a batch learner fits on the prefix seen so far.

use efdt_core::{
    batch_fit, enumerate_domain, extensional_disagreement, trees_structurally_equal, ConceptNode, EfdtLearner,
    HyperParams, Learner, RandomTreeConcept, Schema, StreamSpec,
};

use crate::{Error, Result};

/// Largest domain enumerated for the extensional comparison.
pub const DOMAIN_LIMIT: usize = 1 << 16;

/// Noise-free concept over three binary attributes and three classes whose
/// information gains differ at every node, so the batch tree is unique:
///
/// ```text
/// a0=v0 -> class=c0
/// a0=v1
///   a1=v0 -> class=c1
///   a1=v1
///     a2=v0 -> class=c2
///     a2=v1 -> class=c0
/// ```
pub fn reference_concept() -> RandomTreeConcept {
    use ConceptNode::{Leaf, Split};
    let schema = Schema::uniform_nominal(3, 2, 3).expect("valid schema");
    let root = Split {
        attribute: 0,
        children: vec![
            Leaf { class: 0 },
            Split {
                attribute: 1,
                children: vec![
                    Leaf { class: 1 },
                    Split { attribute: 2, children: vec![Leaf { class: 2 }, Leaf { class: 0 }] },
                ],
            },
        ],
    };
    RandomTreeConcept::from_tree(schema, root).expect("valid concept")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub timestep: u64,
    pub structurally_equal: bool,
    /// Fraction of the attribute domain on which the two trees disagree
    /// (`None` when the domain is too large to enumerate).
    pub disagreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// First checkpoint with structural equality.
    pub first_equal: Option<u64>,
    /// Checkpoint from which equality held through the end of the stream.
    pub stable_from: Option<u64>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.points.last().is_some_and(|p| p.structurally_equal)
    }
}

pub fn convergence_check(
    stream: &StreamSpec,
    params: &HyperParams,
    checkpoint_every: u64,
) -> Result<ConvergenceReport> {
    let schema = stream.schema();
    if !schema.is_all_nominal() {
        return Err(Error::InvalidConfig("convergence check needs a nominal-only schema".into()));
    }
    if checkpoint_every == 0 {
        return Err(Error::InvalidConfig("checkpoint interval must be at least 1".into()));
    }
    let domain = enumerate_domain(schema, DOMAIN_LIMIT);
    let mut learner = EfdtLearner::new(schema.clone(), params.clone())?;
    let mut prefix = Vec::with_capacity(stream.len() as usize);
    let mut points = Vec::new();
    for t in 0..stream.len() {
        let inst = stream.next_instance(t)?;
        learner.learn_one(&inst)?;
        prefix.push(inst);
        let seen = t + 1;
        if seen % checkpoint_every == 0 || seen == stream.len() {
            let batch = batch_fit(&prefix, schema);
            points.push(ConvergencePoint {
                timestep: seen,
                structurally_equal: trees_structurally_equal(learner.root(), &batch),
                disagreement: domain.as_ref().map(|d| extensional_disagreement(learner.root(), &batch, d)),
            });
        }
    }
    let first_equal = points.iter().find(|p| p.structurally_equal).map(|p| p.timestep);
    let stable_from = points.iter().rev().take_while(|p| p.structurally_equal).last().map(|p| p.timestep);
    Ok(ConvergenceReport { points, first_equal, stable_from })
}
