use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqlsh::eval::{self, Corpus, Format, PlantedLevel, SynthSpec};
use seqlsh::pipeline::{self, Mode, RunConfig};
use seqlsh::seqtest::Strategy;
use seqlsh::sketches::{self, HashFamily, Scheme, SketchSet};
use seqlsh::{Error, Measure};

#[derive(Parser)]
#[command(
    name = "seqlsh",
    version,
    about = "All-pairs similarity search with sequential tests over LSH sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find all pairs above a threshold.
    Run(RunArgs),
    /// Compare pruning strategies against a brute-force oracle.
    Eval(EvalArgs),
    /// Generate a synthetic corpus with planted pairs.
    Synth(SynthArgs),
    /// Write a binary sketch file for a corpus.
    Sketch(SketchArgs),
}

#[derive(Args)]
struct Input {
    /// Corpus file (`id<TAB>dims` or `id<TAB>dim:weight …`).
    #[arg(long, short)]
    input: PathBuf,
    /// Corpus format; detected from the file when omitted.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` settings applied before any flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    measure: Option<Measure>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, short)]
    threshold: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    batch: Option<u32>,
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long)]
    est_horizon: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Band on hashes after those used by the tests.
    #[arg(long)]
    fresh_hashes: bool,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Plan cache sidecar; built on first use.
    #[arg(long)]
    plan_cache: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_kv(&fs::read_to_string(path)?)?;
        }
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        over!(
            measure, mode, threshold, alpha, epsilon, mu, delta, batch, horizon, phi, seed,
            strategy
        );
        macro_rules! over_opt {
            ($($f:ident),*) => { $(if self.$f.is_some() { c.$f = self.$f; })* };
        }
        over_opt!(tau, gamma, est_horizon, k, l);
        if self.fresh_hashes {
            c.fresh_hashes = true;
        }
        if let Some(p) = &self.plan_cache {
            c.plan_cache = Some(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    config: ConfigArgs,
    /// Results file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-pair decision log.
    #[arg(long)]
    pair_log: Option<PathBuf>,
    /// Candidate pairs as `idA<TAB>idB`.
    #[arg(long)]
    dump_candidates: Option<PathBuf>,
    /// Print a human-readable report to stderr.
    #[arg(long)]
    report: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated subset of sprt, ci, hybrid.
    #[arg(long, value_delimiter = ',', default_values_t = Strategy::ALL.to_vec())]
    strategies: Vec<Strategy>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "jaccard")]
    measure: Measure,
    #[arg(long, default_value_t = 1000)]
    vectors: usize,
    /// Planted levels as `lo:hi:levels:pairs_per_level`.
    #[arg(long, default_value = "0.1:0.95:18:10")]
    planted: String,
    #[arg(long, default_value_t = 20_000)]
    universe: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SketchArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "jaccard")]
    measure: Measure,
    #[arg(long, default_value_t = 256)]
    hashes: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
}

enum Failure {
    Config(String),
    Parse(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse { .. }
            | Error::Format(_)
            | Error::EmptySet
            | Error::ZeroVector
            | Error::InvalidVector { .. } => Failure::Parse(msg),
            Error::InvalidParameter(_)
            | Error::DegeneratePlan(_)
            | Error::SignatureTooShort { .. }
            | Error::Io(_) => Failure::Config(msg),
            Error::SchemeMismatch(..)
            | Error::LengthMismatch(..)
            | Error::RangeOutOfBounds { .. }
            | Error::SignatureExhausted(_) => Failure::Internal(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn out_writer(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(input: &Input) -> Result<Corpus, Failure> {
    eval::ingest(&input.input, input.format).map_err(|e| match e {
        Error::Io(io) => Failure::Config(format!("{}: {io}", input.input.display())),
        other => Failure::from(other),
    })
}

fn print_metrics(
    w: &mut dyn Write,
    metrics: impl IntoIterator<Item = (String, String)>,
) -> io::Result<()> {
    for (k, v) in metrics {
        writeln!(w, "#METRIC\t{k}\t{v}")?;
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = args.config.resolve()?;
    let corpus = load(&args.input)?;
    let prepared = pipeline::prepare(&config, &corpus.vectors)?;
    if let Some(path) = &args.dump_candidates {
        let mut w = BufWriter::new(File::create(path)?);
        for p in &prepared.candidates {
            let (a, b) = (
                corpus.vectors[p.a as usize].id(),
                corpus.vectors[p.b as usize].id(),
            );
            writeln!(w, "{}\t{}", a.min(b), a.max(b))?;
        }
        w.flush()?;
    }
    let out = prepared.execute(config.strategy)?;
    eval::write_results(out_writer(args.output.as_deref())?, &out.results)?;
    if let Some(path) = &args.pair_log {
        eval::write_pair_log(BufWriter::new(File::create(path)?), &out.log)?;
    }
    let mut err = io::stderr().lock();
    if args.report {
        writeln!(err, "{}", out.report)?;
    }
    print_metrics(
        &mut err,
        out.report
            .metrics()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v)),
    )?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Failure> {
    let config = args.config.resolve()?;
    let corpus = load(&args.input)?;
    let report = eval::compare_strategies(&config, &corpus.vectors, &args.strategies)?;
    let mut out = io::stdout().lock();
    print_metrics(&mut out, report.metrics())?;
    Ok(())
}

fn parse_planted(spec: &str) -> Result<Vec<PlantedLevel>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || {
        Failure::Config(format!(
            "--planted expects lo:hi:levels:pairs, got `{spec}`"
        ))
    };
    if parts.len() != 4 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let levels: usize = parts[2].parse().map_err(|_| bad())?;
    let per: usize = parts[3].parse().map_err(|_| bad())?;
    Ok(eval::spread_levels(lo, hi, levels, per))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let mut spec = SynthSpec::new(
        args.measure,
        args.vectors,
        parse_planted(&args.planted)?,
        args.seed,
    );
    spec.universe = args.universe;
    let corpus = eval::synth(&spec).map_err(|e| Failure::Config(e.to_string()))?;
    eval::write_corpus(out_writer(args.output.as_deref())?, &corpus)?;
    Ok(())
}

fn cmd_sketch(args: &SketchArgs) -> Result<(), Failure> {
    let corpus = load(&args.input)?;
    let family = HashFamily::new(Scheme::for_measure(args.measure), args.seed, args.hashes)?;
    let set = SketchSet {
        family,
        ids: corpus.vectors.iter().map(|v| v.id()).collect(),
        signatures: family.sign_all(&corpus.vectors)?,
    };
    sketches::write_sketches(BufWriter::new(File::create(&args.output)?), &set)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Sketch(a) => cmd_sketch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Parse(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
