//! Incremental decision trees for classification over data streams.
//!
//! Two learners share one node representation and one set of split
//! statistics:
//!
//! * [`VfdtLearner`]: the Hoeffding Tree. A leaf splits once the observed gap
//!   between its two best attributes exceeds the Hoeffding bound, and the
//!   split is never revisited.
//! * [`EfdtLearner`]: the Hoeffding Anytime Tree. A leaf splits as soon as its
//!   best attribute beats the null split with confidence, and internal nodes
//!   keep statistics so their split can later be replaced or removed.
//!
//! The crate also carries a seeded random-tree stream generator, an ID3 batch
//! learner used as a convergence reference, and tree comparison helpers. It is
//! `no_std` and only needs `alloc`; IO and timing live in the `efdt` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod batch;
mod efdt;
mod error;
mod generator;
mod learner;
mod metrics;
mod rng;
mod schema;
mod stats;
mod tree;
mod vfdt;

pub use batch::{batch_fit, enumerate_domain, extensional_disagreement, trees_structurally_equal};
pub use efdt::{attempt_to_split, re_evaluate_best_split, EfdtLearner, SplitDecision, SplitEvent, SplitEventKind};
pub use error::Error;
pub use generator::{build_random_tree_concept, shuffle, ConceptNode, RandomTreeConcept, StreamSource, StreamSpec};
pub use learner::{Learner, NodeIds, RootTest};
pub use metrics::{
    entropy, hoeffding_bound, info_gain, null_split_merit, numeric_thresholds, rank_candidates, InfoGain, MeritReport,
    SplitCandidate, SplitCriterion,
};
pub use rng::{splitmix64, Xorshift64Star};
pub use schema::{AttributeKind, AttributeSpec, HyperParams, Instance, Schema, Value};
pub use stats::{majority_class, update_stats, GaussianEstimator, SufficientStats};
pub use tree::{Node, NodeKind, SplitChoice, SplitTest, TreeShape};
pub use vfdt::VfdtLearner;

pub type Result<T, E = Error> = core::result::Result<T, E>;
