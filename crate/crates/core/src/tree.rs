//! Tree nodes shared by the incremental learners and the batch oracle.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::schema::{AttributeKind, Instance, Schema, Value};
use crate::stats::{majority_class, SufficientStats};

/// A concrete attribute test held by an internal node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// One branch per nominal value.
    Nominal { attribute: usize },
    /// Branch 0 for `value <= threshold`, branch 1 otherwise.
    Numeric { attribute: usize, threshold: f64 },
}

impl SplitTest {
    pub fn attribute(&self) -> usize {
        match *self {
            SplitTest::Nominal { attribute } | SplitTest::Numeric { attribute, .. } => attribute,
        }
    }

    pub fn branch_count(&self, schema: &Schema) -> usize {
        match *self {
            SplitTest::Nominal { attribute } => {
                schema.attribute(attribute).value_count().expect("nominal split on nominal attribute")
            }
            SplitTest::Numeric { .. } => 2,
        }
    }

    pub fn branch(&self, instance: &Instance) -> usize {
        match (*self, instance.values[self.attribute()]) {
            (SplitTest::Nominal { .. }, Value::Nominal(j)) => j as usize,
            (SplitTest::Numeric { threshold, .. }, Value::Numeric(x)) => usize::from(x > threshold),
            _ => panic!("instance value kind does not match split test"),
        }
    }
}

/// A split candidate: either an attribute test or the null split (keep the leaf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitChoice {
    Null,
    Test(SplitTest),
}

impl SplitChoice {
    pub fn attribute(&self) -> Option<usize> {
        match self {
            SplitChoice::Null => None,
            SplitChoice::Test(t) => Some(t.attribute()),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, SplitChoice::Null)
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Leaf {
        stats: SufficientStats,
    },
    Internal {
        test: SplitTest,
        children: Vec<Node>,
        /// Live only in trees that re-evaluate their splits.
        stats: Option<SufficientStats>,
    },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub(crate) id: u64,
    pub(crate) kind: NodeKind,
    /// Attributes that may still be split on at this node, ascending.
    pub(crate) available: Vec<usize>,
    /// Examples routed through this node since it was created.
    pub(crate) routed: u64,
    /// Examples since the last split attempt or re-evaluation.
    pub(crate) since_eval: u64,
}

/// Size telemetry of a tree. `depth` counts edges on the longest path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TreeShape {
    pub nodes: usize,
    pub leaves: usize,
    pub depth: usize,
}

impl Node {
    pub(crate) fn leaf(id: u64, stats: SufficientStats, available: Vec<usize>) -> Self {
        Self { id, kind: NodeKind::Leaf { stats }, available, routed: 0, since_eval: 0 }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn available(&self) -> &[usize] {
        &self.available
    }

    pub fn routed(&self) -> u64 {
        self.routed
    }

    pub fn stats(&self) -> Option<&SufficientStats> {
        match &self.kind {
            NodeKind::Leaf { stats } => Some(stats),
            NodeKind::Internal { stats, .. } => stats.as_ref(),
        }
    }

    pub fn split(&self) -> Option<SplitTest> {
        match &self.kind {
            NodeKind::Leaf { .. } => None,
            NodeKind::Internal { test, .. } => Some(*test),
        }
    }

    pub fn children(&self) -> &[Node] {
        match &self.kind {
            NodeKind::Leaf { .. } => &[],
            NodeKind::Internal { children, .. } => children,
        }
    }

    /// Majority class of a leaf; `None` for internal nodes.
    pub fn leaf_label(&self) -> Option<usize> {
        match &self.kind {
            NodeKind::Leaf { stats } => Some(majority_class(stats)),
            NodeKind::Internal { .. } => None,
        }
    }

    pub fn sort_to_leaf(&self, instance: &Instance) -> &Node {
        let mut node = self;
        while let NodeKind::Internal { test, children, .. } = &node.kind {
            node = &children[test.branch(instance)];
        }
        node
    }

    pub fn predict(&self, instance: &Instance) -> usize {
        self.sort_to_leaf(instance).leaf_label().expect("sort_to_leaf ends at a leaf")
    }

    /// Pre-order traversal.
    pub fn nodes(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children().iter().rev());
        }
        out
    }

    pub fn shape(&self) -> TreeShape {
        let children = self.children();
        if children.is_empty() {
            return TreeShape { nodes: 1, leaves: 1, depth: 0 };
        }
        children.iter().map(Node::shape).fold(TreeShape { nodes: 1, leaves: 0, depth: 0 }, |acc, s| TreeShape {
            nodes: acc.nodes + s.nodes,
            leaves: acc.leaves + s.leaves,
            depth: acc.depth.max(s.depth + 1),
        })
    }

    /// Sum of [`SufficientStats::memory_cells`] over nodes holding live stats.
    pub fn memory_cells(&self) -> usize {
        self.nodes().iter().filter_map(|n| n.stats()).map(SufficientStats::memory_cells).sum()
    }

    /// Indented text rendering, one branch per line. Each line is
    /// `attr=value`, `attr<=t` or `attr>t`, followed by ` -> class=k` when the
    /// branch ends in a leaf. A tree that is a single leaf renders as `class=k`.
    pub fn render(&self, schema: &Schema) -> String {
        let mut out = String::new();
        match &self.kind {
            NodeKind::Leaf { .. } => {
                let _ = writeln!(out, "class={}", self.leaf_label().unwrap_or_default());
            }
            NodeKind::Internal { .. } => self.render_children(schema, 0, &mut out),
        }
        out
    }

    fn render_children(&self, schema: &Schema, depth: usize, out: &mut String) {
        let NodeKind::Internal { test, children, .. } = &self.kind else { return };
        let attr = schema.attribute(test.attribute());
        for (b, child) in children.iter().enumerate() {
            for _ in 0..depth {
                out.push_str("  ");
            }
            match (*test, &attr.kind) {
                (SplitTest::Nominal { .. }, AttributeKind::Nominal { values }) => {
                    let _ = write!(out, "{}={}", attr.name, values[b]);
                }
                (SplitTest::Numeric { threshold, .. }, _) => {
                    let op = if b == 0 { "<=" } else { ">" };
                    let _ = write!(out, "{}{op}{threshold}", attr.name);
                }
                _ => unreachable!("split kind matches attribute kind"),
            }
            match child.leaf_label() {
                Some(k) => {
                    let _ = writeln!(out, " -> class={k}");
                }
                None => {
                    out.push('\n');
                    child.render_children(schema, depth + 1, out);
                }
            }
        }
    }

    /// Ids of every node in the subtree, in pre-order.
    pub fn subtree_ids(&self) -> Vec<u64> {
        self.nodes().iter().map(|n| n.id).collect()
    }
}
