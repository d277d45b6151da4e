use alloc::vec::Vec;

use crate::schema::{Instance, Schema};
use crate::tree::{Node, TreeShape};
use crate::Result;

/// One evaluation of the root's split test, logged for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTest {
    /// Examples seen by the learner when the test ran.
    pub timestep: u64,
    /// Examples in the root's statistics.
    pub n: u64,
    /// Merit gap compared against the bound.
    pub statistic: f64,
    pub epsilon: f64,
    /// Attribute of the top candidate; `None` when the null split ranks first.
    pub best_attribute: Option<usize>,
    /// Whether the test restructured the root.
    pub changed: bool,
}

/// A streaming classifier that predicts before it learns.
pub trait Learner {
    fn name(&self) -> &'static str;

    fn schema(&self) -> &Schema;

    fn predict(&self, instance: &Instance) -> usize;

    fn learn_one(&mut self, instance: &Instance) -> Result<()>;

    fn root(&self) -> &Node;

    fn examples_seen(&self) -> u64;

    /// Node and leaf counts as maintained incrementally by the learner;
    /// `depth` is computed by traversal.
    fn shape(&self) -> TreeShape;

    fn root_tests(&self) -> &[RootTest];
}

pub(crate) fn children_available(available: &[usize], attribute: usize, remove: bool) -> Vec<usize> {
    available.iter().copied().filter(|&a| !(remove && a == attribute)).collect()
}

/// Source of unique node ids within one tree.
#[derive(Debug, Clone, Default)]
pub struct NodeIds {
    next: u64,
}

impl NodeIds {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

/// Zero-count leaves for every branch of `test`.
pub(crate) fn fresh_children(
    test: &crate::tree::SplitTest,
    parent_available: &[usize],
    schema: &Schema,
    params: &crate::schema::HyperParams,
    ids: &mut NodeIds,
) -> Vec<Node> {
    let remove = schema.attribute(test.attribute()).is_nominal() && !params.reuse_nominal_attributes;
    let available = children_available(parent_available, test.attribute(), remove);
    (0..test.branch_count(schema))
        .map(|_| Node::leaf(ids.next_id(), crate::stats::SufficientStats::new(schema), available.clone()))
        .collect()
}
