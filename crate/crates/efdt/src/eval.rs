//! Prequential (test-then-train) evaluation and paired VFDT/EFDT comparison.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cpu_time::ThreadTime;
use efdt_core::{
    build_random_tree_concept, shuffle, splitmix64, EfdtLearner, HyperParams, Instance, Learner, Schema, SplitEvent,
    StreamSpec, TreeShape, VfdtLearner,
};
use rayon::prelude::*;

use crate::csv_io::create;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub checkpoint_every: u64,
    pub window: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { checkpoint_every: 1000, window: 1000 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidConfig("checkpoint interval must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("error window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialRecord {
    pub timestep: u64,
    pub cumulative_error_rate: f64,
    /// Error rate over the last `min(timestep, window)` instances.
    pub window_error_rate: f64,
    pub nodes: usize,
    pub leaves: usize,
    pub depth: usize,
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub learner: &'static str,
    pub seed: u64,
    pub length: u64,
    pub errors: u64,
    pub total_error_rate: f64,
    pub total_cpu_seconds: f64,
    pub shape: TreeShape,
    pub records: Vec<PrequentialRecord>,
    /// Structural changes (EFDT only; empty for VFDT).
    pub events: Vec<SplitEvent>,
}

/// Runs `learner` over `stream`: every instance is predicted first, scored,
/// then learned. CPU time is thread time spent in predict + learn only.
pub fn prequential_run<L: Learner + ?Sized>(
    learner: &mut L,
    stream: &StreamSpec,
    cfg: EvalConfig,
) -> Result<RunSummary> {
    cfg.validate()?;
    let length = stream.len();
    let mut records = Vec::with_capacity((length / cfg.checkpoint_every + 1) as usize);
    let mut ring = vec![false; cfg.window];
    let mut window_errors = 0usize;
    let mut errors = 0u64;
    let mut cpu = 0.0f64;
    let mut t = 0u64;
    let mut block = Vec::with_capacity(cfg.checkpoint_every.min(length) as usize);
    while t < length {
        let end = (t + cfg.checkpoint_every).min(length);
        block.clear();
        for i in t..end {
            block.push(stream.next_instance(i)?);
        }
        let start = ThreadTime::now();
        for inst in &block {
            let wrong = learner.predict(inst) != inst.label;
            learner.learn_one(inst)?;
            let slot = (t % cfg.window as u64) as usize;
            window_errors = window_errors + wrong as usize - ring[slot] as usize;
            ring[slot] = wrong;
            errors += wrong as u64;
            t += 1;
        }
        cpu += start.elapsed().as_secs_f64();
        let shape = learner.shape();
        records.push(PrequentialRecord {
            timestep: t,
            cumulative_error_rate: errors as f64 / t as f64,
            window_error_rate: window_errors as f64 / t.min(cfg.window as u64) as f64,
            nodes: shape.nodes,
            leaves: shape.leaves,
            depth: shape.depth,
            cpu_seconds: cpu,
        });
    }
    Ok(RunSummary {
        learner: learner.name(),
        seed: stream.instance_seed(),
        length,
        errors,
        total_error_rate: errors as f64 / length as f64,
        total_cpu_seconds: cpu,
        shape: learner.shape(),
        records,
        events: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    Vfdt,
    Efdt,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Vfdt => "vfdt",
            LearnerKind::Efdt => "efdt",
        }
    }
}

/// Builds a fresh learner of `kind` and evaluates it on `stream`, tagging
/// the summary with `seed`.
pub fn run_learner(
    kind: LearnerKind,
    stream: &StreamSpec,
    params: &HyperParams,
    cfg: EvalConfig,
    seed: u64,
) -> Result<RunSummary> {
    let schema = stream.schema().clone();
    let mut summary = match kind {
        LearnerKind::Vfdt => {
            let mut l = VfdtLearner::new(schema, params.clone())?;
            prequential_run(&mut l, stream, cfg)?
        }
        LearnerKind::Efdt => {
            let mut l = EfdtLearner::new(schema, params.clone())?;
            let mut s = prequential_run(&mut l, stream, cfg)?;
            s.events = l.split_events().to_vec();
            s
        }
    };
    summary.seed = seed;
    Ok(summary)
}

/// Where the instances of an experiment come from. A seed selects one
/// concrete stream.
#[derive(Debug, Clone)]
pub enum ExperimentStream {
    /// Random-tree concept seeded by the run seed; with `drift_at` a second
    /// concept (seeded from the first) takes over at that timestep.
    Generated {
        attributes: usize,
        values: usize,
        classes: usize,
        max_depth: usize,
        leaf_probability: f64,
        length: u64,
        drift_at: Option<u64>,
    },
    /// A loaded file, optionally shuffled. With `shuffle_by_seed`, each run
    /// seed gives a different order; otherwise `shuffle_seed` (if any) fixes one.
    File { schema: Schema, instances: Arc<Vec<Instance>>, shuffle_seed: Option<u64>, shuffle_by_seed: bool },
}

/// Seed of the post-drift concept for run seed `seed`.
pub fn drift_concept_seed(seed: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ 0xD1F7)
}

impl ExperimentStream {
    pub fn drift_at(&self) -> Option<u64> {
        match self {
            ExperimentStream::Generated { drift_at, .. } => *drift_at,
            ExperimentStream::File { .. } => None,
        }
    }

    pub fn spec(&self, seed: u64) -> Result<StreamSpec> {
        match self {
            ExperimentStream::Generated {
                attributes,
                values,
                classes,
                max_depth,
                leaf_probability,
                length,
                drift_at,
            } => {
                let concept =
                    |s| build_random_tree_concept(s, *attributes, *values, *classes, *max_depth, *leaf_probability);
                let instance_seed = splitmix64(seed);
                let spec = match drift_at {
                    None => StreamSpec::concept(concept(seed)?, *length, instance_seed)?,
                    Some(at) => StreamSpec::drift(
                        concept(seed)?,
                        concept(drift_concept_seed(seed))?,
                        *at,
                        *length,
                        instance_seed,
                    )?,
                };
                Ok(spec)
            }
            ExperimentStream::File { schema, instances, shuffle_seed, shuffle_by_seed } => {
                let order = if *shuffle_by_seed { Some(seed) } else { *shuffle_seed };
                let data = match order {
                    Some(s) => {
                        let mut v = instances.as_ref().clone();
                        shuffle(&mut v, s);
                        v
                    }
                    None => instances.as_ref().clone(),
                };
                Ok(StreamSpec::instances(schema.clone(), data)?)
            }
        }
    }
}

/// Pointwise mean over seeds of one learner's checkpoint records.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecord {
    pub timestep: u64,
    pub cumulative_error_rate: f64,
    pub window_error_rate: f64,
    pub nodes: f64,
    pub leaves: f64,
    pub depth: f64,
    pub cpu_seconds: f64,
}

pub fn mean_curve(runs: &[&RunSummary]) -> Vec<MeanRecord> {
    let Some(first) = runs.first() else { return Vec::new() };
    let k = runs.len() as f64;
    (0..first.records.len())
        .map(|i| {
            let mean = |f: &dyn Fn(&PrequentialRecord) -> f64| runs.iter().map(|r| f(&r.records[i])).sum::<f64>() / k;
            MeanRecord {
                timestep: first.records[i].timestep,
                cumulative_error_rate: mean(&|r| r.cumulative_error_rate),
                window_error_rate: mean(&|r| r.window_error_rate),
                nodes: mean(&|r| r.nodes as f64),
                leaves: mean(&|r| r.leaves as f64),
                depth: mean(&|r| r.depth as f64),
                cpu_seconds: mean(&|r| r.cpu_seconds),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    /// `(vfdt, efdt)` per seed, in seed order.
    pub runs: Vec<(RunSummary, RunSummary)>,
    pub vfdt_mean: Vec<MeanRecord>,
    pub efdt_mean: Vec<MeanRecord>,
}

impl Comparison {
    pub fn mean_error(&self, kind: LearnerKind) -> f64 {
        let pick = |p: &(RunSummary, RunSummary)| match kind {
            LearnerKind::Vfdt => p.0.total_error_rate,
            LearnerKind::Efdt => p.1.total_error_rate,
        };
        self.runs.iter().map(pick).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_cpu(&self, kind: LearnerKind) -> f64 {
        let pick = |p: &(RunSummary, RunSummary)| match kind {
            LearnerKind::Vfdt => p.0.total_cpu_seconds,
            LearnerKind::Efdt => p.1.total_cpu_seconds,
        };
        self.runs.iter().map(pick).sum::<f64>() / self.runs.len() as f64
    }
}

/// Runs VFDT and EFDT on the same stream for every seed (seeds in parallel),
/// returning per-seed pairs and pointwise mean curves, ordered by `seeds`.
pub fn compare_run(
    stream: &ExperimentStream,
    params: &HyperParams,
    seeds: &[u64],
    cfg: EvalConfig,
) -> Result<Comparison> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    params.validate()?;
    cfg.validate()?;
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let spec = stream.spec(seed)?;
            let v = run_learner(LearnerKind::Vfdt, &spec, params, cfg, seed)?;
            let e = run_learner(LearnerKind::Efdt, &spec, params, cfg, seed)?;
            Ok((v, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let vfdt: Vec<_> = runs.iter().map(|p| &p.0).collect();
    let efdt: Vec<_> = runs.iter().map(|p| &p.1).collect();
    Ok(Comparison { seeds: seeds.to_vec(), vfdt_mean: mean_curve(&vfdt), efdt_mean: mean_curve(&efdt), runs })
}

/// First checkpoint timestep from which every later value of `curve` stays
/// within `tolerance` (relative) of its final value.
pub fn settle_timestep(curve: &[(u64, f64)], tolerance: f64) -> Option<u64> {
    let &(_, last) = curve.last()?;
    let band = tolerance * last.abs();
    let mut settle = curve.last()?.0;
    for &(t, y) in curve.iter().rev() {
        if (y - last).abs() > band {
            break;
        }
        settle = t;
    }
    Some(settle)
}

pub const RECORD_HEADER: [&str; 7] = ["timestep", "cum_error", "window_error", "nodes", "leaves", "depth", "cpu_s"];

fn record_fields(r: &PrequentialRecord) -> [String; 7] {
    [
        r.timestep.to_string(),
        format!("{:.6}", r.cumulative_error_rate),
        format!("{:.6}", r.window_error_rate),
        r.nodes.to_string(),
        r.leaves.to_string(),
        r.depth.to_string(),
        format!("{:.6}", r.cpu_seconds),
    ]
}

fn mean_fields(r: &MeanRecord) -> [String; 7] {
    [
        r.timestep.to_string(),
        format!("{:.6}", r.cumulative_error_rate),
        format!("{:.6}", r.window_error_rate),
        format!("{:.6}", r.nodes),
        format!("{:.6}", r.leaves),
        format!("{:.6}", r.depth),
        format!("{:.6}", r.cpu_seconds),
    ]
}

/// Writes checkpoint records; with `learner` set, a leading `learner` column
/// is added (comparison output).
pub fn write_records_csv<W: Write>(out: W, records: &[PrequentialRecord], learner: Option<&str>) -> Result<()> {
    write_rows(out, records.iter().map(record_fields), learner)
}

pub fn write_mean_csv<W: Write>(out: W, records: &[MeanRecord], learner: Option<&str>) -> Result<()> {
    write_rows(out, records.iter().map(mean_fields), learner)
}

fn write_rows<W: Write>(out: W, rows: impl Iterator<Item = [String; 7]>, learner: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let prefix: &[&str] = if learner.is_some() { &["learner"] } else { &[] };
    w.write_record(prefix.iter().chain(RECORD_HEADER.iter()))?;
    for row in rows {
        match learner {
            Some(name) => w.write_record(std::iter::once(name).chain(row.iter().map(String::as_str)))?,
            None => w.write_record(&row)?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_file_name(experiment: &str, learner: &str, seed: u64) -> String {
    format!("{experiment}_{learner}_{seed}.csv")
}

/// Writes `<experiment>_<learner>_<seed>.csv` for each run, plus
/// `<experiment>_<learner>_mean.csv` when there is more than one seed.
/// Returns the paths written.
pub fn write_comparison(dir: &Path, experiment: &str, cmp: &Comparison) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (v, e) in &cmp.runs {
        for run in [v, e] {
            let path = dir.join(run_file_name(experiment, run.learner, run.seed));
            write_records_csv(create(&path)?, &run.records, Some(run.learner))?;
            written.push(path);
        }
    }
    if cmp.runs.len() > 1 {
        for (name, curve) in [("vfdt", &cmp.vfdt_mean), ("efdt", &cmp.efdt_mean)] {
            let path = dir.join(format!("{experiment}_{name}_mean.csv"));
            write_mean_csv(create(&path)?, curve, Some(name))?;
            written.push(path);
        }
    }
    Ok(written)
}
