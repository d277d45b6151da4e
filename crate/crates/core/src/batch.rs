//! ID3-style batch tree used as the convergence reference, plus structural
//! and extensional tree comparison.

use alloc::vec;
use alloc::vec::Vec;

use crate::learner::NodeIds;
use crate::metrics::{InfoGain, SplitCriterion};
use crate::schema::{HyperParams, Instance, Schema, Value};
use crate::stats::SufficientStats;
use crate::tree::{Node, NodeKind, SplitChoice, SplitTest};

/// Gains at or below this are treated as zero.
const GAIN_EPSILON: f64 = 1e-12;

/// Fits an unpruned tree by recursively splitting on the nominal attribute
/// with the highest information gain (lowest index on ties). When every gain
/// is zero but the node is impure, the lowest-index attribute that still
/// separates the node's examples is used, so noise-free concepts such as XOR
/// are fit exactly. A node stays a leaf when it is pure or no remaining
/// attribute separates its examples. Numeric attributes are ignored.
/// Branches that receive no examples become empty leaves, which predict
/// class 0 like any empty leaf.
pub fn batch_fit(instances: &[Instance], schema: &Schema) -> Node {
    let available: Vec<usize> = (0..schema.attribute_count()).filter(|&a| schema.attribute(a).is_nominal()).collect();
    let refs: Vec<&Instance> = instances.iter().collect();
    let mut ids = NodeIds::new();
    fit(&refs, &available, schema, &mut ids)
}

fn fit(instances: &[&Instance], available: &[usize], schema: &Schema, ids: &mut NodeIds) -> Node {
    let id = ids.next_id();
    let mut stats = SufficientStats::new(schema);
    for inst in instances {
        stats.update(inst, schema).expect("batch instances conform to schema");
    }
    if stats.is_pure() || available.is_empty() {
        return Node::leaf(id, stats, available.to_vec());
    }
    let params = HyperParams::default();
    let report = InfoGain.rank(&stats, available, false, schema, &params).expect("available is non-empty");
    let best = report.best();
    let SplitChoice::Test(SplitTest::Nominal { attribute: top }) = best.choice else {
        unreachable!("only nominal attributes are ranked")
    };
    let separates =
        |a: usize| stats.nominal_rows(a).is_some_and(|rows| rows.filter(|r| r.iter().any(|&n| n > 0)).count() > 1);
    let attribute = if best.merit > GAIN_EPSILON {
        top
    } else {
        match available.iter().copied().find(|&a| separates(a)) {
            Some(a) => a,
            None => return Node::leaf(id, stats, available.to_vec()),
        }
    };
    let test = SplitTest::Nominal { attribute };
    let values = schema.attribute(attribute).value_count().expect("nominal");
    let mut parts: Vec<Vec<&Instance>> = vec![Vec::new(); values];
    for inst in instances {
        parts[test.branch(inst)].push(inst);
    }
    let rest: Vec<usize> = available.iter().copied().filter(|&a| a != attribute).collect();
    let children = parts.iter().map(|p| fit(p, &rest, schema, ids)).collect();
    let mut node = Node::leaf(id, SufficientStats::new(schema), available.to_vec());
    node.kind = NodeKind::Internal { test, children, stats: Some(stats) };
    node
}

/// Same split test at every corresponding node, children compared in branch
/// order, and same majority label at every leaf.
pub fn trees_structurally_equal(a: &Node, b: &Node) -> bool {
    match (a.split(), b.split()) {
        (None, None) => a.leaf_label() == b.leaf_label(),
        (Some(ta), Some(tb)) => {
            ta == tb
                && a.children().len() == b.children().len()
                && a.children().iter().zip(b.children()).all(|(x, y)| trees_structurally_equal(x, y))
        }
        _ => false,
    }
}

/// Fraction of `sample` on which the two trees predict different classes.
/// An empty sample gives 0.
pub fn extensional_disagreement(a: &Node, b: &Node, sample: &[Instance]) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let differ = sample.iter().filter(|x| a.predict(x) != b.predict(x)).count();
    differ as f64 / sample.len() as f64
}

/// Every point of an all-nominal domain, labeled 0, in lexicographic order
/// (last attribute fastest). `None` for numeric schemas or domains larger
/// than `limit`.
pub fn enumerate_domain(schema: &Schema, limit: usize) -> Option<Vec<Instance>> {
    let sizes: Vec<usize> = schema.attributes().iter().map(|a| a.value_count()).collect::<Option<_>>()?;
    let total = sizes.iter().try_fold(1usize, |acc, &v| acc.checked_mul(v))?;
    if total > limit {
        return None;
    }
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0u32; sizes.len()];
    for _ in 0..total {
        out.push(Instance::new(digits.iter().map(|&j| Value::Nominal(j)).collect(), 0));
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if (digits[i] as usize) < sizes[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_random_tree_concept, shuffle};

    fn xor_data() -> (Schema, Vec<Instance>) {
        let schema = Schema::uniform_nominal(2, 2, 2).unwrap();
        let data = [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
            .iter()
            .map(|&(a, b, y)| Instance::nominal(&[a, b], y))
            .collect();
        (schema, data)
    }

    #[test]
    fn xor_needs_depth_two() {
        let (schema, data) = xor_data();
        let tree = batch_fit(&data, &schema);
        let shape = tree.shape();
        assert_eq!((shape.depth, shape.leaves), (2, 4));
        assert_eq!(tree.split(), Some(SplitTest::Nominal { attribute: 0 }));
        for x in &data {
            assert_eq!(tree.predict(x), x.label);
        }
        for leaf in tree.nodes().into_iter().filter(|n| n.is_leaf()) {
            assert!(leaf.stats().unwrap().is_pure());
            assert_eq!(leaf.stats().unwrap().total(), 1);
        }
    }

    #[test]
    fn constant_attributes_do_not_split() {
        let schema = Schema::uniform_nominal(2, 2, 2).unwrap();
        let data = [Instance::nominal(&[0, 1], 0), Instance::nominal(&[0, 1], 1)];
        assert!(batch_fit(&data, &schema).is_leaf());
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let schema = Schema::uniform_nominal(3, 2, 2).unwrap();
        let data: Vec<Instance> = (0..8).map(|i| Instance::nominal(&[i & 1, (i >> 1) & 1, (i >> 2) & 1], 1)).collect();
        let tree = batch_fit(&data, &schema);
        assert!(tree.is_leaf());
        assert_eq!(tree.leaf_label(), Some(1));
    }

    #[test]
    fn full_domain_reproduces_concept() {
        for seed in 0..10 {
            let concept = build_random_tree_concept(seed, 4, 3, 3, 4, 0.2).unwrap();
            let schema = concept.schema().clone();
            let mut domain = enumerate_domain(&schema, 10_000).unwrap();
            for x in &mut domain {
                let v: Vec<u32> = x.values.iter().map(|v| v.as_nominal().unwrap() as u32).collect();
                x.label = concept.label(&v);
            }
            let tree = batch_fit(&domain, &schema);
            for x in &domain {
                assert_eq!(tree.predict(x), x.label, "seed {seed}");
            }
        }
    }

    #[test]
    fn order_independent() {
        let concept = build_random_tree_concept(4, 4, 3, 3, 4, 0.2).unwrap();
        let schema = concept.schema().clone();
        let mut data: Vec<Instance> = enumerate_domain(&schema, 10_000).unwrap();
        for x in &mut data {
            let v: Vec<u32> = x.values.iter().map(|v| v.as_nominal().unwrap() as u32).collect();
            x.label = concept.label(&v);
        }
        let a = batch_fit(&data, &schema);
        shuffle(&mut data, 99);
        let b = batch_fit(&data, &schema);
        assert!(trees_structurally_equal(&a, &b));
        assert_eq!(a.render(&schema), b.render(&schema));
    }

    #[test]
    fn structural_equality_cases() {
        let (schema, mut data) = xor_data();
        data.push(Instance::nominal(&[1, 1], 0));
        let a = batch_fit(&data, &schema);
        assert!(trees_structurally_equal(&a, &a.clone()));
        let mut flipped = data.clone();
        flipped.push(Instance::nominal(&[0, 0], 1));
        flipped.push(Instance::nominal(&[0, 0], 1));
        let b = batch_fit(&flipped, &schema);
        assert_eq!(a.split(), b.split());
        assert!(!trees_structurally_equal(&a, &b));
    }

    #[test]
    fn disagreement_extremes() {
        let schema = Schema::uniform_nominal(2, 2, 2).unwrap();
        let zeros: Vec<Instance> = (0..4).map(|i| Instance::nominal(&[i & 1, i >> 1], 0)).collect();
        let ones: Vec<Instance> = zeros.iter().map(|x| Instance { label: 1, ..x.clone() }).collect();
        let a = batch_fit(&zeros, &schema);
        let b = batch_fit(&ones, &schema);
        let domain = enumerate_domain(&schema, 100).unwrap();
        assert_eq!(extensional_disagreement(&a, &a, &domain), 0.0);
        assert_eq!(extensional_disagreement(&a, &b, &domain), 1.0);
    }

    #[test]
    fn enumeration_order_and_limits() {
        let schema = Schema::uniform_nominal(2, 3, 2).unwrap();
        let d = enumerate_domain(&schema, 9).unwrap();
        assert_eq!(d.len(), 9);
        assert_eq!(d[1], Instance::nominal(&[0, 1], 0));
        assert_eq!(d[3], Instance::nominal(&[1, 0], 0));
        assert!(enumerate_domain(&schema, 8).is_none());
    }
}
