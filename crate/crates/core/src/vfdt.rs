//! Hoeffding Tree: leaves split once the gap between their two best
//! attributes is significant, and splits are never revisited.

use alloc::vec::Vec;

use crate::learner::{fresh_children, Learner, NodeIds, RootTest};
use crate::metrics::{hoeffding_bound, InfoGain, SplitCriterion};
use crate::schema::{HyperParams, Instance, Schema};
use crate::stats::SufficientStats;
use crate::tree::{Node, NodeKind, SplitChoice, SplitTest, TreeShape};
use crate::Result;

#[derive(Debug, Clone)]
pub struct VfdtLearner<C = InfoGain> {
    root: Node,
    schema: Schema,
    params: HyperParams,
    criterion: C,
    ids: NodeIds,
    examples_seen: u64,
    nodes: usize,
    leaves: usize,
    root_tests: Vec<RootTest>,
    splits: Vec<(u64, SplitTest)>,
}

impl VfdtLearner<InfoGain> {
    pub fn new(schema: Schema, params: HyperParams) -> Result<Self> {
        Self::with_criterion(schema, params, InfoGain)
    }
}

impl<C: SplitCriterion> VfdtLearner<C> {
    pub fn with_criterion(schema: Schema, params: HyperParams, criterion: C) -> Result<Self> {
        params.validate()?;
        let mut ids = NodeIds::new();
        let available = (0..schema.attribute_count()).collect();
        let root = Node::leaf(ids.next_id(), SufficientStats::new(&schema), available);
        Ok(Self {
            root,
            schema,
            params,
            criterion,
            ids,
            examples_seen: 0,
            nodes: 1,
            leaves: 1,
            root_tests: Vec::new(),
            splits: Vec::new(),
        })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    /// `(node_id, test)` for every split made, in order.
    pub fn split_log(&self) -> &[(u64, SplitTest)] {
        &self.splits
    }

    fn learn_at(&mut self, instance: &Instance) {
        // Walk down by branch index, then split borrows at the leaf.
        let mut node = &mut self.root;
        node.routed += 1;
        let mut at_root = true;
        while let NodeKind::Internal { test, .. } = &node.kind {
            let b = test.branch(instance);
            at_root = false;
            node = match &mut node.kind {
                NodeKind::Internal { children, .. } => &mut children[b],
                NodeKind::Leaf { .. } => unreachable!(),
            };
            node.routed += 1;
        }
        let NodeKind::Leaf { stats } = &mut node.kind else { unreachable!() };
        stats.update(instance, &self.schema).expect("instance validated before routing");
        node.since_eval += 1;
        if node.since_eval < self.params.leaf_cadence {
            return;
        }
        node.since_eval = 0;
        if stats.is_pure() || node.available.is_empty() {
            return;
        }
        let Ok(report) = self.criterion.rank(stats, &node.available, false, &self.schema, &self.params) else {
            return;
        };
        let n = stats.total();
        let best = report.best();
        let runner_up = report.second_best().map_or_else(|| self.criterion.null_merit(stats), |c| c.merit);
        let gap = best.merit - runner_up;
        let epsilon = hoeffding_bound(report.range(), self.params.delta, n).expect("n >= 1 at a split attempt");
        let split = match best.choice {
            SplitChoice::Test(test) if gap > epsilon || (epsilon < self.params.tau && best.merit > 0.0) => Some(test),
            _ => None,
        };
        if at_root {
            self.root_tests.push(RootTest {
                timestep: self.examples_seen,
                n,
                statistic: gap,
                epsilon,
                best_attribute: best.choice.attribute(),
                changed: split.is_some(),
            });
        }
        if let Some(test) = split {
            let children = fresh_children(&test, &node.available, &self.schema, &self.params, &mut self.ids);
            self.nodes += children.len();
            self.leaves += children.len() - 1;
            self.splits.push((node.id, test));
            node.kind = NodeKind::Internal { test, children, stats: None };
        }
    }
}

impl<C: SplitCriterion> Learner for VfdtLearner<C> {
    fn name(&self) -> &'static str {
        "vfdt"
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn predict(&self, instance: &Instance) -> usize {
        self.root.predict(instance)
    }

    fn learn_one(&mut self, instance: &Instance) -> Result<()> {
        self.schema.validate(instance)?;
        self.examples_seen += 1;
        self.learn_at(instance);
        Ok(())
    }

    fn root(&self) -> &Node {
        &self.root
    }

    fn examples_seen(&self) -> u64 {
        self.examples_seen
    }

    fn shape(&self) -> TreeShape {
        TreeShape { nodes: self.nodes, leaves: self.leaves, depth: self.root.shape().depth }
    }

    fn root_tests(&self) -> &[RootTest] {
        &self.root_tests
    }
}
