use std::cell::Cell;

use efdt::csv_io::{load_csv, load_csv_with_schema, write_stream_csv};
use efdt::eval::{compare_run, prequential_run, run_learner, EvalConfig, ExperimentStream, LearnerKind};
use efdt_core::{
    AttributeSpec, EfdtLearner, HyperParams, Instance, Learner, Node, Schema, StreamSpec, TreeShape, Value,
    VfdtLearner, Xorshift64Star,
};

fn generated(classes: usize, length: u64, drift_at: Option<u64>) -> ExperimentStream {
    ExperimentStream::Generated {
        attributes: 4,
        values: 3,
        classes,
        max_depth: 4,
        leaf_probability: 0.15,
        length,
        drift_at,
    }
}

fn cfg(checkpoint_every: u64, window: usize) -> EvalConfig {
    EvalConfig { checkpoint_every, window }
}

#[test]
fn constant_class_stream_errs_only_on_the_first_instance() {
    let schema = Schema::uniform_nominal(3, 3, 3).unwrap();
    let mut rng = Xorshift64Star::new(4);
    let data: Vec<_> = (0..5000)
        .map(|_| Instance::nominal(&[rng.below(3) as u32, rng.below(3) as u32, rng.below(3) as u32], 2))
        .collect();
    let spec = StreamSpec::instances(schema.clone(), data).unwrap();
    for kind in [LearnerKind::Vfdt, LearnerKind::Efdt] {
        let s = run_learner(kind, &spec, &HyperParams::default(), cfg(1000, 1000), 0).unwrap();
        assert_eq!(s.errors, 1, "{kind:?}");
        assert!(s.records[1..].iter().all(|r| r.window_error_rate == 0.0));
        assert_eq!(s.shape, TreeShape { nodes: 1, leaves: 1, depth: 0 });
    }
}

#[test]
fn label_noise_error_matches_binomial_bound() {
    // labels independent of attributes and of the past: each prediction is
    // wrong with probability exactly (c-1)/c
    let (c, n) = (4usize, 40_000usize);
    let schema = Schema::uniform_nominal(3, 3, c).unwrap();
    let mut rng = Xorshift64Star::new(77);
    let data: Vec<_> = (0..n)
        .map(|_| {
            let x = [rng.below(3) as u32, rng.below(3) as u32, rng.below(3) as u32];
            Instance::nominal(&x, rng.below(c))
        })
        .collect();
    let spec = StreamSpec::instances(schema, data).unwrap();
    let p = (c - 1) as f64 / c as f64;
    let three_sigma = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
    for kind in [LearnerKind::Vfdt, LearnerKind::Efdt] {
        let s = run_learner(kind, &spec, &HyperParams::default(), EvalConfig::default(), 0).unwrap();
        assert!(
            (s.total_error_rate - p).abs() <= three_sigma,
            "{kind:?}: {} vs {p} ± {three_sigma}",
            s.total_error_rate
        );
    }
}

#[test]
fn runs_are_deterministic_apart_from_timing() {
    let spec = generated(3, 20_000, None).spec(5).unwrap();
    for kind in [LearnerKind::Vfdt, LearnerKind::Efdt] {
        let a = run_learner(kind, &spec, &HyperParams::default(), EvalConfig::default(), 5).unwrap();
        let b = run_learner(kind, &spec, &HyperParams::default(), EvalConfig::default(), 5).unwrap();
        let strip = |s: &efdt::eval::RunSummary| {
            s.records
                .iter()
                .map(|r| (r.timestep, r.cumulative_error_rate, r.window_error_rate, r.nodes, r.leaves, r.depth))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.events, b.events);
    }
}

/// Wraps a learner and checks the prequential contract from inside:
/// instance `t` is predicted while exactly `t` instances have been learned,
/// and every reported shape equals a fresh traversal of the tree.
struct Instrumented<L> {
    inner: L,
    predicted: Cell<u64>,
    learned: u64,
    shape_checks: Cell<u64>,
}

impl<L: Learner> Instrumented<L> {
    fn new(inner: L) -> Self {
        Self { inner, predicted: Cell::new(0), learned: 0, shape_checks: Cell::new(0) }
    }
}

impl<L: Learner> Learner for Instrumented<L> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn schema(&self) -> &Schema {
        self.inner.schema()
    }
    fn predict(&self, instance: &Instance) -> usize {
        assert_eq!(self.predicted.get(), self.learned, "prediction after learning the same instance");
        self.predicted.set(self.predicted.get() + 1);
        self.inner.predict(instance)
    }
    fn learn_one(&mut self, instance: &Instance) -> efdt_core::Result<()> {
        assert_eq!(self.predicted.get(), self.learned + 1, "learning before predicting");
        self.learned += 1;
        self.inner.learn_one(instance)
    }
    fn root(&self) -> &Node {
        self.inner.root()
    }
    fn examples_seen(&self) -> u64 {
        self.inner.examples_seen()
    }
    fn shape(&self) -> TreeShape {
        let shape = self.inner.shape();
        assert_eq!(shape, self.inner.root().shape(), "telemetry differs from traversal");
        self.shape_checks.set(self.shape_checks.get() + 1);
        shape
    }
    fn root_tests(&self) -> &[efdt_core::RootTest] {
        self.inner.root_tests()
    }
}

#[test]
fn test_then_train_order_and_telemetry() {
    let spec = generated(4, 25_500, Some(12_000)).spec(9).unwrap();
    let schema = spec.schema().clone();
    let params = HyperParams { internal_cadence: 500, ..HyperParams::default() };
    let mut v = Instrumented::new(VfdtLearner::new(schema.clone(), params.clone()).unwrap());
    let mut e = Instrumented::new(EfdtLearner::new(schema, params).unwrap());
    for learner in [&mut v as &mut dyn Learner, &mut e as &mut dyn Learner] {
        let s = prequential_run(learner, &spec, cfg(1000, 500)).unwrap();
        assert_eq!(s.records.len(), 26);
        let last = s.records.last().unwrap();
        assert_eq!(last.timestep, 25_500);
        assert_eq!(last.cumulative_error_rate, s.errors as f64 / 25_500.0);
        assert_eq!(s.total_error_rate, s.errors as f64 / 25_500.0);
        for w in s.records.windows(2) {
            assert!(w[1].cpu_seconds >= w[0].cpu_seconds);
        }
        assert!(s.records.iter().all(|r| (0.0..=1.0).contains(&r.window_error_rate)));
    }
    assert_eq!(v.learned, 25_500);
    assert!(v.shape_checks.get() >= 26 && e.shape_checks.get() >= 26);
}

#[test]
fn window_rate_counts_only_recent_instances() {
    // 1000 instances of class 1, then class 0; the attribute carries no
    // information, so the single leaf predicts its majority (ties to 0)
    let schema = Schema::uniform_nominal(1, 2, 2).unwrap();
    let data: Vec<_> = (0..3000).map(|t| Instance::nominal(&[(t % 2) as u32], usize::from(t < 1000))).collect();
    let spec = StreamSpec::instances(schema, data).unwrap();
    let s = run_learner(LearnerKind::Vfdt, &spec, &HyperParams::default(), cfg(500, 250), 0).unwrap();
    let windows: Vec<_> = s.records.iter().map(|r| r.window_error_rate).collect();
    assert_eq!(windows, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    // the first instance, then every instance until the zeros catch up
    assert_eq!(s.errors, 1 + 1000);
    assert_eq!(s.records[0].cumulative_error_rate, 1.0 / 500.0);
}

#[test]
fn compare_single_seed_mean_equals_run_and_pairs_are_independent() {
    let stream = generated(3, 15_000, Some(7_000));
    let params = HyperParams::default();
    let cmp = compare_run(&stream, &params, &[4], EvalConfig::default()).unwrap();
    let (v, e) = &cmp.runs[0];
    for (mean, run) in [(&cmp.vfdt_mean, v), (&cmp.efdt_mean, e)] {
        assert_eq!(mean.len(), run.records.len());
        for (m, r) in mean.iter().zip(&run.records) {
            assert_eq!(m.window_error_rate, r.window_error_rate);
            assert_eq!(m.nodes, r.nodes as f64);
        }
    }
    // evaluating one learner alone (other order, no partner) changes nothing
    let spec = stream.spec(4).unwrap();
    let alone = run_learner(LearnerKind::Efdt, &spec, &params, EvalConfig::default(), 4).unwrap();
    assert_eq!(alone.errors, e.errors);
    assert_eq!(alone.events, e.events);
    let alone = run_learner(LearnerKind::Vfdt, &spec, &params, EvalConfig::default(), 4).unwrap();
    assert_eq!(alone.errors, v.errors);
}

#[test]
fn compare_results_are_in_seed_order() {
    let stream = generated(2, 3000, None);
    let cmp = compare_run(&stream, &HyperParams::default(), &[3, 1, 2], EvalConfig::default()).unwrap();
    let seeds: Vec<_> = cmp.runs.iter().map(|(v, e)| (v.seed, e.seed)).collect();
    assert_eq!(seeds, vec![(3, 3), (1, 1), (2, 2)]);
    assert!(compare_run(&stream, &HyperParams::default(), &[], EvalConfig::default()).is_err());
}

#[test]
fn generated_stream_round_trips_through_csv() {
    let spec = generated(3, 2000, None).spec(11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_stream_csv(std::fs::File::create(&path).unwrap(), spec.schema(), spec.iter()).unwrap();
    let back = load_csv_with_schema(&path, spec.schema()).unwrap();
    assert_eq!(back, spec.iter().collect::<Vec<_>>());
    // inference recovers the shape of the schema
    let (inferred, rows) = load_csv(&path).unwrap();
    assert_eq!(rows.len(), 2000);
    assert_eq!(inferred.attribute_count(), spec.schema().attribute_count());
    assert!(inferred.is_all_nominal());
}

#[test]
fn numeric_values_round_trip_exactly() {
    let schema = Schema::new(
        vec![AttributeSpec::numeric("x"), AttributeSpec::nominal_indexed("k", 3)],
        vec!["no".into(), "yes".into()],
    )
    .unwrap();
    let mut rng = Xorshift64Star::new(1);
    let data: Vec<_> = (0..500)
        .map(|i| {
            let x = (rng.next_f64() - 0.5) * 10f64.powi(i % 13 - 6);
            Instance::new(vec![Value::Numeric(x), Value::Nominal(rng.below(3) as u32)], rng.below(2))
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n.csv");
    write_stream_csv(std::fs::File::create(&path).unwrap(), &schema, data.clone()).unwrap();
    assert_eq!(load_csv_with_schema(&path, &schema).unwrap(), data);
}
