//! The `efdt` command line: `generate`, `run`, `compare` and `convergence`.
//!
//! Exit codes: 0 success, 2 invalid configuration or unwritable output,
//! 3 convergence check not passed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use efdt_core::{HyperParams, Schema};

use crate::convergence::{convergence_check, reference_concept};
use crate::csv_io::{create, load_csv, write_events_csv, write_stream_csv};
use crate::eval::{
    compare_run, run_file_name, run_learner, write_comparison, write_records_csv, EvalConfig, ExperimentStream,
    LearnerKind,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "efdt", version, about = "Hoeffding tree (VFDT) and EFDT stream experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic stream as CSV.
    Generate {
        #[command(flatten)]
        stream: StreamArgs,
        /// Stream seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Prequential evaluation of one learner on one stream.
    Run {
        #[arg(long, value_enum, default_value_t = LearnerArg::Efdt)]
        learner: LearnerArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        stream: StreamArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Paired VFDT/EFDT prequential runs over seeds 1..=N.
    Compare {
        /// Number of seeds; runs use seeds 1..=N.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        stream: StreamArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check that EFDT reaches the batch (ID3) tree on a stationary nominal
    /// stream. Uses a fixed three-attribute concept unless --csv or --random.
    Convergence {
        /// Stream length.
        #[arg(long, default_value_t = 100_000)]
        length: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Compare against the batch tree every N instances.
        #[arg(long, default_value_t = 1000)]
        checkpoint: u64,
        /// Nominal CSV stream instead of a generated concept.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Shuffle the CSV rows with this seed.
        #[arg(long)]
        shuffle_seed: Option<u64>,
        /// Use a random-tree concept built from the flags below.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 3)]
        attrs: usize,
        #[arg(long, default_value_t = 2)]
        values: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        #[arg(long, default_value_t = 0.15)]
        leaf_prob: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Vfdt,
    Efdt,
}

impl From<LearnerArg> for LearnerKind {
    fn from(l: LearnerArg) -> Self {
        match l {
            LearnerArg::Vfdt => LearnerKind::Vfdt,
            LearnerArg::Efdt => LearnerKind::Efdt,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    /// Number of nominal attributes.
    #[arg(long, default_value_t = 5)]
    pub attrs: usize,
    /// Values per attribute.
    #[arg(long, default_value_t = 5)]
    pub values: usize,
    /// Number of classes.
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    /// Instances in the stream.
    #[arg(long, default_value_t = 100_000)]
    pub length: u64,
    /// Maximum depth of the random-tree concept.
    #[arg(long, default_value_t = 5)]
    pub max_depth: usize,
    /// Probability that a non-root concept node is a leaf.
    #[arg(long, default_value_t = 0.15)]
    pub leaf_prob: f64,
    /// Swap to a second concept at this timestep.
    #[arg(long)]
    pub drift_at: Option<u64>,
    /// Read instances from a CSV file instead of generating them.
    #[arg(long, conflicts_with = "drift_at")]
    pub csv: Option<PathBuf>,
    /// Shuffle the CSV rows with this seed.
    #[arg(long, requires = "csv")]
    pub shuffle_seed: Option<u64>,
}

impl StreamArgs {
    fn experiment(&self) -> Result<ExperimentStream> {
        match &self.csv {
            Some(path) => {
                let (schema, instances) = load_csv(path)?;
                Ok(ExperimentStream::File {
                    schema,
                    instances: Arc::new(instances),
                    shuffle_seed: self.shuffle_seed,
                    shuffle_by_seed: false,
                })
            }
            None => Ok(ExperimentStream::Generated {
                attributes: self.attrs,
                values: self.values,
                classes: self.classes,
                max_depth: self.max_depth,
                leaf_probability: self.leaf_prob,
                length: self.length,
                drift_at: self.drift_at,
            }),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Hoeffding confidence parameter. NOTE: 0.05 is this tool's choice; the
    /// reference experiments do not state the value they used.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Tie threshold.
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Examples between split attempts at a leaf.
    #[arg(long, default_value_t = 200)]
    pub leaf_cadence: u64,
    /// Examples between split re-evaluations at an internal node (EFDT).
    #[arg(long, default_value_t = 2000)]
    pub internal_cadence: u64,
    /// Candidate thresholds per numeric attribute.
    #[arg(long, default_value_t = 10)]
    pub numeric_candidates: usize,
    /// Allow a nominal attribute to be split on again below itself.
    #[arg(long)]
    pub reuse_nominal: bool,
    /// Apply the tie threshold to EFDT split decisions too.
    #[arg(long)]
    pub efdt_tie_break: bool,
}

impl ParamArgs {
    fn params(&self) -> Result<HyperParams> {
        let p = HyperParams {
            delta: self.delta,
            tau: self.tau,
            leaf_cadence: self.leaf_cadence,
            internal_cadence: self.internal_cadence,
            numeric_candidates: self.numeric_candidates,
            reuse_nominal_attributes: self.reuse_nominal,
            efdt_tie_break: self.efdt_tie_break,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Record a checkpoint every N instances.
    #[arg(long, default_value_t = 1000)]
    pub checkpoint: u64,
    /// Window (instances) for the windowed error rate.
    #[arg(long, default_value_t = 1000)]
    pub window: usize,
}

impl EvalArgs {
    fn config(&self) -> Result<EvalConfig> {
        let cfg = EvalConfig { checkpoint_every: self.checkpoint, window: self.window };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Experiment name used as the file-name prefix.
    #[arg(long, default_value = "experiment")]
    pub name: String,
    /// Also write EFDT split events to `<name>_efdt_<seed>_events.csv`.
    #[arg(long)]
    pub events: bool,
}

impl OutArgs {
    fn prepare(&self) -> Result<&Path> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidConfig(format!("invalid experiment name `{}`", self.name)));
        }
        fs::create_dir_all(&self.out).map_err(|source| Error::Write { path: self.out.clone(), source })?;
        Ok(&self.out)
    }
}

fn schema_summary(schema: &Schema) -> String {
    let nominal = schema.attributes().iter().filter(|a| a.is_nominal()).count();
    format!(
        "schema: {} attributes ({} nominal, {} numeric), {} classes",
        schema.attribute_count(),
        nominal,
        schema.attribute_count() - nominal,
        schema.class_count()
    )
}

fn write_events(out: &OutArgs, schema: &Schema, seed: u64, events: &[efdt_core::SplitEvent]) -> Result<()> {
    let path = out.out.join(format!("{}_efdt_{seed}_events.csv", out.name));
    write_events_csv(create(&path)?, schema, events)
}

fn generate(stream: &StreamArgs, seed: u64, output: Option<&Path>) -> Result<i32> {
    let spec = stream.experiment()?.spec(seed)?;
    eprintln!("{}", schema_summary(spec.schema()));
    match output {
        Some(path) => write_stream_csv(create(path)?, spec.schema(), spec.iter())?,
        None => write_stream_csv(io::stdout().lock(), spec.schema(), spec.iter())?,
    }
    Ok(EXIT_OK)
}

fn run(
    learner: LearnerArg,
    seed: u64,
    stream: &StreamArgs,
    params: &ParamArgs,
    eval: &EvalArgs,
    out: &OutArgs,
) -> Result<i32> {
    let params = params.params()?;
    let cfg = eval.config()?;
    let spec = stream.experiment()?.spec(seed)?;
    let dir = out.prepare()?;
    let kind = LearnerKind::from(learner);
    let summary = run_learner(kind, &spec, &params, cfg, seed)?;
    write_records_csv(create(&dir.join(run_file_name(&out.name, kind.as_str(), seed)))?, &summary.records, None)?;
    if out.events && kind == LearnerKind::Efdt {
        write_events(out, spec.schema(), seed, &summary.events)?;
    }
    if let Some(at) = spec.switch_at() {
        println!("drift_at={at}");
    }
    println!("{} E={:.6} T={:.3}", kind.as_str(), summary.total_error_rate, summary.total_cpu_seconds);
    Ok(EXIT_OK)
}

fn compare(seeds: u64, stream: &StreamArgs, params: &ParamArgs, eval: &EvalArgs, out: &OutArgs) -> Result<i32> {
    if seeds == 0 {
        return Err(Error::InvalidConfig("--seeds must be at least 1".into()));
    }
    let params = params.params()?;
    let cfg = eval.config()?;
    let experiment = stream.experiment()?;
    let schema = experiment.spec(1)?.schema().clone();
    let dir = out.prepare()?;
    let seeds: Vec<u64> = (1..=seeds).collect();
    let cmp = compare_run(&experiment, &params, &seeds, cfg)?;
    write_comparison(dir, &out.name, &cmp)?;
    if out.events {
        for (_, e) in &cmp.runs {
            write_events(out, &schema, e.seed, &e.events)?;
        }
    }
    if let Some(at) = experiment.drift_at() {
        println!("drift_at={at}");
    }
    for kind in [LearnerKind::Vfdt, LearnerKind::Efdt] {
        println!("{} E={:.6} T={:.3}", kind.as_str(), cmp.mean_error(kind), cmp.mean_cpu(kind));
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn convergence(
    length: u64,
    seed: u64,
    checkpoint: u64,
    csv: Option<&Path>,
    shuffle_seed: Option<u64>,
    random: bool,
    concept: (usize, usize, usize, usize, f64),
    params: &ParamArgs,
) -> Result<i32> {
    let params = params.params()?;
    let spec = match csv {
        Some(path) => {
            if random {
                return Err(Error::InvalidConfig("--random and --csv are mutually exclusive".into()));
            }
            let (schema, instances) = load_csv(path)?;
            ExperimentStream::File { schema, instances: Arc::new(instances), shuffle_seed, shuffle_by_seed: false }
                .spec(seed)?
        }
        None if random => {
            let (attributes, values, classes, max_depth, leaf_probability) = concept;
            ExperimentStream::Generated {
                attributes,
                values,
                classes,
                max_depth,
                leaf_probability,
                length,
                drift_at: None,
            }
            .spec(seed)?
        }
        None => efdt_core::StreamSpec::concept(reference_concept(), length, efdt_core::splitmix64(seed))?,
    };
    let report = convergence_check(&spec, &params, checkpoint)?;
    let fmt = |t: Option<u64>| t.map_or_else(|| "none".to_string(), |t| t.to_string());
    println!("first_equal={}", fmt(report.first_equal));
    println!("stable_from={}", fmt(report.stable_from));
    if let Some(d) = report.points.last().and_then(|p| p.disagreement) {
        println!("final_disagreement={d:.6}");
    }
    let converged = report.converged();
    println!("converged={converged}");
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Generate { stream, seed, output } => generate(stream, *seed, output.as_deref()),
        Command::Run { learner, seed, stream, params, eval, out } => run(*learner, *seed, stream, params, eval, out),
        Command::Compare { seeds, stream, params, eval, out } => compare(*seeds, stream, params, eval, out),
        Command::Convergence {
            length,
            seed,
            checkpoint,
            csv,
            shuffle_seed,
            random,
            attrs,
            values,
            classes,
            max_depth,
            leaf_prob,
            params,
        } => convergence(
            *length,
            *seed,
            *checkpoint,
            csv.as_deref(),
            *shuffle_seed,
            *random,
            (*attrs, *values, *classes, *max_depth, *leaf_prob),
            params,
        ),
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => {
            let _ = io::stdout().flush();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
