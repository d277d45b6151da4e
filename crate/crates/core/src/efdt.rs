//! Hoeffding Anytime Tree.
//!
//! Every node on an instance's path keeps statistics. A leaf splits on its
//! best attribute once that attribute beats the null split by more than the
//! Hoeffding bound. An internal node periodically re-ranks its candidates
//! (null split included) and, when the winner beats the current split by
//! more than the bound, either re-splits on the winner with fresh leaves or
//! collapses back into a leaf.

use alloc::vec::Vec;

use crate::learner::{fresh_children, Learner, NodeIds, RootTest};
use crate::metrics::{hoeffding_bound, InfoGain, SplitCandidate, SplitCriterion};
use crate::schema::{HyperParams, Instance, Schema};
use crate::stats::SufficientStats;
use crate::tree::{Node, NodeKind, SplitChoice, SplitTest, TreeShape};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitEventKind {
    Split,
    Replace,
    Kill,
}

impl SplitEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitEventKind::Split => "split",
            SplitEventKind::Replace => "replace",
            SplitEventKind::Kill => "kill",
        }
    }
}

/// A structural change made by the learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent {
    pub timestep: u64,
    pub node_id: u64,
    pub kind: SplitEventKind,
    pub old: Option<SplitTest>,
    pub new: Option<SplitTest>,
}

/// Outcome of one split test at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    pub best: SplitCandidate,
    /// Merit the best candidate is compared against: the null split at a
    /// leaf, the current split at an internal node.
    pub baseline: f64,
    pub epsilon: f64,
    pub n: u64,
    pub change: Option<SplitEventKind>,
}

impl SplitDecision {
    pub fn statistic(&self) -> f64 {
        self.best.merit - self.baseline
    }
}

/// Leaf test. With `efdt_tie_break`, a leaf whose best attribute has
/// positive merit also splits once `epsilon < tau`, as in VFDT.
fn leaf_passes(best: f64, baseline: f64, epsilon: f64, params: &HyperParams) -> bool {
    best - baseline > epsilon || (params.efdt_tie_break && epsilon < params.tau && best > baseline)
}

/// Tries to turn a leaf into an internal node. Returns `None` when no test
/// ran: the node is internal, its examples are all one class, or nothing is
/// left to split on.
pub fn attempt_to_split<C: SplitCriterion>(
    leaf: &mut Node,
    schema: &Schema,
    params: &HyperParams,
    criterion: &C,
    ids: &mut NodeIds,
) -> Option<SplitDecision> {
    let NodeKind::Leaf { stats } = &leaf.kind else { return None };
    if stats.total() == 0 || stats.is_pure() || leaf.available.is_empty() {
        return None;
    }
    let report = criterion.rank(stats, &leaf.available, false, schema, params).ok()?;
    let best = report.best();
    let baseline = criterion.null_merit(stats);
    let n = stats.total();
    let epsilon = hoeffding_bound(report.range(), params.delta, n).ok()?;
    let mut decision = SplitDecision { best, baseline, epsilon, n, change: None };
    if let SplitChoice::Test(test) = best.choice {
        if leaf_passes(best.merit, baseline, epsilon, params) {
            let children = fresh_children(&test, &leaf.available, schema, params, ids);
            let NodeKind::Leaf { stats } =
                core::mem::replace(&mut leaf.kind, NodeKind::Leaf { stats: SufficientStats::new(schema) })
            else {
                unreachable!()
            };
            leaf.kind = NodeKind::Internal { test, children, stats: Some(stats) };
            decision.change = Some(SplitEventKind::Split);
        }
    }
    Some(decision)
}

/// Re-ranks an internal node's candidates, null split included, against
/// its current split. Returns `None` for leaves and nodes without live stats.
pub fn re_evaluate_best_split<C: SplitCriterion>(
    node: &mut Node,
    schema: &Schema,
    params: &HyperParams,
    criterion: &C,
    ids: &mut NodeIds,
) -> Option<SplitDecision> {
    let NodeKind::Internal { test: current, stats: Some(stats), .. } = &node.kind else { return None };
    let current = *current;
    if stats.total() == 0 {
        return None;
    }
    let report = criterion.rank(stats, &node.available, true, schema, params).ok()?;
    let best = report.best();
    let baseline =
        report.for_attribute(current.attribute()).map_or_else(|| criterion.merit(stats, &current, schema), |c| c.merit);
    let n = stats.total();
    let epsilon = hoeffding_bound(report.range(), params.delta, n).ok()?;
    let mut decision = SplitDecision { best, baseline, epsilon, n, change: None };
    if best.merit - baseline <= epsilon {
        return Some(decision);
    }
    match best.choice {
        SplitChoice::Null => {
            let NodeKind::Internal { stats, .. } =
                core::mem::replace(&mut node.kind, NodeKind::Leaf { stats: SufficientStats::new(schema) })
            else {
                unreachable!()
            };
            node.kind = NodeKind::Leaf { stats: stats.expect("checked above") };
            node.since_eval = 0;
            decision.change = Some(SplitEventKind::Kill);
        }
        SplitChoice::Test(test) if test.attribute() != current.attribute() => {
            let fresh = fresh_children(&test, &node.available, schema, params, ids);
            if let NodeKind::Internal { test: t, children, .. } = &mut node.kind {
                *t = test;
                *children = fresh;
            }
            decision.change = Some(SplitEventKind::Replace);
        }
        SplitChoice::Test(_) => {}
    }
    Some(decision)
}

#[derive(Debug, Clone)]
pub struct EfdtLearner<C = InfoGain> {
    root: Node,
    schema: Schema,
    params: HyperParams,
    criterion: C,
    ids: NodeIds,
    examples_seen: u64,
    nodes: usize,
    leaves: usize,
    events: Vec<SplitEvent>,
    root_tests: Vec<RootTest>,
    last_touched: usize,
}

impl EfdtLearner<InfoGain> {
    pub fn new(schema: Schema, params: HyperParams) -> Result<Self> {
        Self::with_criterion(schema, params, InfoGain)
    }
}

impl<C: SplitCriterion> EfdtLearner<C> {
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
            events: Vec::new(),
            root_tests: Vec::new(),
            last_touched: 0,
        })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn split_events(&self) -> &[SplitEvent] {
        &self.events
    }

    /// Nodes whose statistics the last `learn_one` updated.
    pub fn last_touched(&self) -> usize {
        self.last_touched
    }

    fn learn_at(&mut self, instance: &Instance) {
        let Self {
            root,
            schema,
            params,
            criterion,
            ids,
            examples_seen,
            nodes,
            leaves,
            events,
            root_tests,
            last_touched,
        } = self;
        let timestep = *examples_seen;
        let mut node = root;
        let mut at_root = true;
        *last_touched = 0;
        loop {
            node.routed += 1;
            *last_touched += 1;
            let leaf = node.is_leaf();
            match &mut node.kind {
                NodeKind::Leaf { stats } | NodeKind::Internal { stats: Some(stats), .. } => {
                    stats.update(instance, schema).expect("instance validated before routing")
                }
                NodeKind::Internal { stats: None, .. } => unreachable!("anytime tree keeps internal stats"),
            }
            node.since_eval += 1;
            let cadence = if leaf { params.leaf_cadence } else { params.internal_cadence };
            let mut restructured = false;
            if node.since_eval >= cadence {
                node.since_eval = 0;
                let old = node.split();
                let before = node.shape();
                let decision = if leaf {
                    attempt_to_split(node, schema, params, criterion, ids)
                } else {
                    re_evaluate_best_split(node, schema, params, criterion, ids)
                };
                if let Some(d) = decision {
                    if at_root {
                        root_tests.push(RootTest {
                            timestep,
                            n: d.n,
                            statistic: d.statistic(),
                            epsilon: d.epsilon,
                            best_attribute: d.best.choice.attribute(),
                            changed: d.change.is_some(),
                        });
                    }
                    if let Some(kind) = d.change {
                        let after = node.shape();
                        *nodes = *nodes + after.nodes - before.nodes;
                        *leaves = *leaves + after.leaves - before.leaves;
                        events.push(SplitEvent { timestep, node_id: node.id, kind, old, new: node.split() });
                        restructured = true;
                    }
                }
            }
            if restructured {
                return;
            }
            node = match &mut node.kind {
                NodeKind::Leaf { .. } => return,
                NodeKind::Internal { test, children, .. } => &mut children[test.branch(instance)],
            };
            at_root = false;
        }
    }
}

impl<C: SplitCriterion> Learner for EfdtLearner<C> {
    fn name(&self) -> &'static str {
        "efdt"
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
