//! Synthetic streams: a seeded random-tree concept over nominal attributes,
//! abrupt drift between two concepts, replay of materialized instances, and
//! seeded shuffling.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::{Xorshift64Star, GOLDEN_GAMMA};
use crate::schema::{Instance, Schema, Value};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConceptNode {
    Leaf { class: usize },
    Split { attribute: usize, children: Vec<ConceptNode> },
}

impl ConceptNode {
    fn label(&self, values: &[u32]) -> usize {
        let mut node = self;
        loop {
            match node {
                ConceptNode::Leaf { class } => return *class,
                ConceptNode::Split { attribute, children } => node = &children[values[*attribute] as usize],
            }
        }
    }
}

/// A hidden decision tree over nominal attributes that labels every point
/// of the attribute domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomTreeConcept {
    schema: Schema,
    root: ConceptNode,
    seed: u64,
    max_depth: usize,
    leaf_probability: f64,
}

/// Builds a concept by drawing, depth first, a split attribute (without reuse
/// along the path) for each internal node and a uniform class for each leaf.
/// Below the root a node becomes a leaf with probability `leaf_probability`;
/// nodes at `max_depth` (capped at `attributes`) are always leaves.
pub fn build_random_tree_concept(
    seed: u64,
    attributes: usize,
    values: usize,
    classes: usize,
    max_depth: usize,
    leaf_probability: f64,
) -> Result<RandomTreeConcept> {
    if attributes == 0 || values < 2 || classes < 2 || max_depth == 0 {
        return Err(Error::InvalidGenerator(format!(
            "need attributes >= 1, values >= 2, classes >= 2, max_depth >= 1 (got {attributes}, {values}, {classes}, {max_depth})"
        )));
    }
    if !(0.0..=1.0).contains(&leaf_probability) {
        return Err(Error::InvalidGenerator(format!("leaf probability {leaf_probability} outside [0, 1]")));
    }
    let schema = Schema::uniform_nominal(attributes, values, classes)?;
    let max_depth = max_depth.min(attributes);
    let mut rng = Xorshift64Star::new(seed);
    let available: Vec<usize> = (0..attributes).collect();
    let root = grow(&mut rng, &available, 0, max_depth, leaf_probability, values, classes);
    Ok(RandomTreeConcept { schema, root, seed, max_depth, leaf_probability })
}

fn grow(
    rng: &mut Xorshift64Star,
    available: &[usize],
    depth: usize,
    max_depth: usize,
    leaf_probability: f64,
    values: usize,
    classes: usize,
) -> ConceptNode {
    let leaf = depth >= max_depth || available.is_empty() || (depth > 0 && rng.next_f64() < leaf_probability);
    if leaf {
        return ConceptNode::Leaf { class: rng.below(classes) };
    }
    let attribute = available[rng.below(available.len())];
    let rest: Vec<usize> = available.iter().copied().filter(|&a| a != attribute).collect();
    let children =
        (0..values).map(|_| grow(rng, &rest, depth + 1, max_depth, leaf_probability, values, classes)).collect();
    ConceptNode::Split { attribute, children }
}

impl RandomTreeConcept {
    /// Wraps a hand-built tree. Every attribute must be nominal and every
    /// split must have one child per value.
    pub fn from_tree(schema: Schema, root: ConceptNode) -> Result<Self> {
        fn check(node: &ConceptNode, schema: &Schema, depth: usize) -> Result<usize> {
            match node {
                ConceptNode::Leaf { class } if *class < schema.class_count() => Ok(depth),
                ConceptNode::Leaf { class } => Err(Error::InvalidGenerator(format!("leaf class {class} out of range"))),
                ConceptNode::Split { attribute, children } => {
                    let v = schema
                        .attributes()
                        .get(*attribute)
                        .and_then(|a| a.value_count())
                        .ok_or_else(|| Error::InvalidGenerator(format!("attribute {attribute} is not nominal")))?;
                    if children.len() != v {
                        return Err(Error::InvalidGenerator(format!(
                            "split on {attribute} has {} children, expected {v}",
                            children.len()
                        )));
                    }
                    children.iter().try_fold(depth, |d, c| Ok(d.max(check(c, schema, depth + 1)?)))
                }
            }
        }
        if !schema.is_all_nominal() {
            return Err(Error::InvalidGenerator("concepts need an all-nominal schema".into()));
        }
        let depth = check(&root, &schema, 0)?;
        Ok(Self { schema, root, seed: 0, max_depth: depth, leaf_probability: 0.0 })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn root(&self) -> &ConceptNode {
        &self.root
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn leaf_probability(&self) -> f64 {
        self.leaf_probability
    }

    /// Label of a point given as nominal value indices.
    pub fn label(&self, values: &[u32]) -> usize {
        self.root.label(values)
    }

    pub fn leaf_count(&self) -> usize {
        fn count(n: &ConceptNode) -> usize {
            match n {
                ConceptNode::Leaf { .. } => 1,
                ConceptNode::Split { children, .. } => children.iter().map(count).sum(),
            }
        }
        count(&self.root)
    }

    /// Exact class probabilities under uniform attribute values, from the
    /// mass of each labeled leaf.
    pub fn class_distribution(&self) -> Vec<f64> {
        fn walk(n: &ConceptNode, mass: f64, out: &mut [f64]) {
            match n {
                ConceptNode::Leaf { class } => out[*class] += mass,
                ConceptNode::Split { children, .. } => {
                    let share = mass / children.len() as f64;
                    children.iter().for_each(|c| walk(c, share, out));
                }
            }
        }
        let mut out = vec![0.0; self.schema.class_count()];
        walk(&self.root, 1.0, &mut out);
        out
    }

    fn draw(&self, rng: &mut Xorshift64Star) -> Instance {
        let values: Vec<u32> = self
            .schema
            .attributes()
            .iter()
            .map(|a| rng.below(a.value_count().expect("concept schemas are nominal")) as u32)
            .collect();
        let label = self.label(&values);
        Instance { values: values.into_iter().map(Value::Nominal).collect(), label }
    }
}

#[derive(Debug, Clone)]
pub enum StreamSource {
    Concept(RandomTreeConcept),
    /// Labels come from `before` until `switch_at`, from `after` from then on.
    Drift {
        before: RandomTreeConcept,
        after: RandomTreeConcept,
        switch_at: u64,
    },
    /// Replays a materialized instance list (e.g. a loaded file).
    Instances {
        schema: Schema,
        instances: Arc<Vec<Instance>>,
    },
}

/// A reproducible, random-access stream description.
#[derive(Debug, Clone)]
pub struct StreamSpec {
    source: StreamSource,
    length: u64,
    instance_seed: u64,
}

impl StreamSpec {
    pub fn concept(concept: RandomTreeConcept, length: u64, instance_seed: u64) -> Result<Self> {
        Self::new(StreamSource::Concept(concept), length, instance_seed)
    }

    pub fn drift(
        before: RandomTreeConcept,
        after: RandomTreeConcept,
        switch_at: u64,
        length: u64,
        instance_seed: u64,
    ) -> Result<Self> {
        Self::new(StreamSource::Drift { before, after, switch_at }, length, instance_seed)
    }

    pub fn instances(schema: Schema, instances: Vec<Instance>) -> Result<Self> {
        let length = instances.len() as u64;
        Self::new(StreamSource::Instances { schema, instances: Arc::new(instances) }, length, 0)
    }

    pub fn new(source: StreamSource, length: u64, instance_seed: u64) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidGenerator("stream length must be at least 1".into()));
        }
        match &source {
            StreamSource::Drift { before, after, switch_at } => {
                if before.schema() != after.schema() {
                    return Err(Error::InvalidGenerator("drift concepts must share a schema".into()));
                }
                if *switch_at >= length {
                    return Err(Error::InvalidGenerator(format!(
                        "drift switch point {switch_at} must precede stream length {length}"
                    )));
                }
            }
            StreamSource::Instances { instances, .. } if (instances.len() as u64) < length => {
                return Err(Error::InvalidGenerator("stream longer than its instance list".into()));
            }
            _ => {}
        }
        Ok(Self { source, length, instance_seed })
    }

    pub fn source(&self) -> &StreamSource {
        &self.source
    }

    pub fn len(&self) -> u64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed
    }

    pub fn schema(&self) -> &Schema {
        match &self.source {
            StreamSource::Concept(c) => c.schema(),
            StreamSource::Drift { before, .. } => before.schema(),
            StreamSource::Instances { schema, .. } => schema,
        }
    }

    pub fn switch_at(&self) -> Option<u64> {
        match self.source {
            StreamSource::Drift { switch_at, .. } => Some(switch_at),
            _ => None,
        }
    }

    /// Instance `t`. Generated sources seed a fresh generator per instance
    /// from `instance_seed + t * 0x9E3779B97F4A7C15`, so any position can be
    /// produced independently.
    pub fn next_instance(&self, t: u64) -> Result<Instance> {
        if t >= self.length {
            return Err(Error::EndOfStream(t));
        }
        let rng = || Xorshift64Star::new(self.instance_seed.wrapping_add(t.wrapping_mul(GOLDEN_GAMMA)));
        Ok(match &self.source {
            StreamSource::Concept(c) => c.draw(&mut rng()),
            StreamSource::Drift { before, after, switch_at } => {
                let active = if t < *switch_at { before } else { after };
                active.draw(&mut rng())
            }
            StreamSource::Instances { instances, .. } => instances[t as usize].clone(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Instance> + '_ {
        (0..self.length).map(move |t| self.next_instance(t).expect("t < length"))
    }
}

/// In-place Fisher–Yates shuffle driven by [`Xorshift64Star`]: for `i` from
/// `n - 1` down to 1, swap `i` with `below(i + 1)`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = Xorshift64Star::new(seed);
    for i in (1..items.len()).rev() {
        let j = rng.below(i + 1);
        items.swap(i, j);
    }
}
