use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lll_sampler::frontends::{parse_csp_named, parse_dimacs_with_warnings, parse_hypergraph, HypergraphInstance, Naming};
use lll_sampler::marking::{binary_params, UNIFORM};
use lll_sampler::pipeline::{
    pipeline_coloring, prepare, PipelineKind, PipelineOptions, Prepared, DEFAULT_ZETA,
};
use lll_sampler::tensorization::verify_numeric_facts;
use lll_sampler::verify::{
    check_bounding_invariant, coalescence_experiment, enumerate_law, property_suite, CertifyReport, ScanRule,
};
use lll_sampler::{derive_seed, AtomicCsp, Error, SamplerConfig};
use serde_json::{json, Value};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lll-sample", version, about = "Perfect sampler for atomic constraint satisfaction problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw exact samples.
    Sample(SampleArgs),
    /// Report measures, marking constants and regime verdicts without sampling.
    Check(InstanceArgs),
    /// Certify the sampler against the enumerated law of a small instance.
    Verify(VerifyArgs),
    /// Coalescence table of the bounding chain.
    Bench(BenchArgs),
    /// Print the per-variable decision trees and their marks.
    Tensorize(InstanceArgs),
    /// Numeric constants and randomized self-checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dimacs,
    Hypergraph,
    Csp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pipeline {
    Binary,
    General,
    Uniform,
    Coloring,
}

impl From<Pipeline> for PipelineKind {
    fn from(p: Pipeline) -> Self {
        match p {
            Pipeline::Binary => PipelineKind::Binary,
            Pipeline::General => PipelineKind::General,
            Pipeline::Uniform => PipelineKind::Uniform,
            Pipeline::Coloring => PipelineKind::Coloring,
        }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance file; `-` reads standard input.
    #[arg(long, short)]
    input: PathBuf,
    /// Inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Defaults: binary for DIMACS, coloring for hypergraphs, general for CSP files.
    #[arg(long, value_enum)]
    pipeline: Option<Pipeline>,
    /// Number of colors for hypergraph inputs.
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ZETA)]
    zeta: f64,
    #[arg(long, env = "LLL_SAMPLER_SEED", default_value_t = 0)]
    seed: u64,
    /// Skip regime checks and repair the marking if needed.
    #[arg(long)]
    force: bool,
    /// Term budget of one exact component marginal.
    #[arg(long)]
    budget_terms: Option<u64>,
    #[arg(long)]
    max_horizon: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    num: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Print variable and value names instead of indices.
    #[arg(long)]
    named: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    num: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Trials of the bounding-invariant check.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Horizons as multiples of the variable count.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 5, 10, 20, 30, 40])]
    multiples: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, env = "LLL_SAMPLER_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    rounds: u64,
}

/// A parsed input with its naming for `--named`.
enum Loaded {
    Csp(AtomicCsp, Naming),
    Hypergraph(HypergraphInstance),
}

fn infer_format(path: &Path) -> anyhow::Result<Format> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("cnf" | "dimacs") => Ok(Format::Dimacs),
        Some("hg" | "hyp" | "hgr") => Ok(Format::Hypergraph),
        Some("json") => Ok(Format::Csp),
        _ => bail!(UsageError(format!("cannot infer the format of '{}'; pass --format", path.display()))),
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(a: &InstanceArgs) -> anyhow::Result<(Loaded, Format)> {
    let format = match a.format {
        Some(f) => f,
        None => infer_format(&a.input)?,
    };
    let text = read_input(&a.input)?;
    let loaded = match format {
        Format::Dimacs => {
            let d = parse_dimacs_with_warnings(&text)?;
            for w in &d.warnings {
                eprintln!("warning: {w}");
            }
            let naming = d.naming();
            Loaded::Csp(d.csp, naming)
        }
        Format::Csp => {
            let (csp, naming) = parse_csp_named(&text)?;
            Loaded::Csp(csp, naming)
        }
        Format::Hypergraph => Loaded::Hypergraph(parse_hypergraph(&text)?),
    };
    Ok((loaded, format))
}

fn options(a: &InstanceArgs) -> PipelineOptions {
    let mut config = SamplerConfig::default();
    if let Some(b) = a.budget_terms {
        config.term_budget = b;
    }
    if let Some(h) = a.max_horizon {
        config.max_horizon = h;
    }
    PipelineOptions { zeta: a.zeta, force: a.force, seed: a.seed, config }
}

/// Loads the instance and runs the selected pipeline.
fn prepare_from(a: &InstanceArgs) -> anyhow::Result<(Prepared, Naming)> {
    let (loaded, format) = load(a)?;
    let kind = a.pipeline.unwrap_or(match format {
        Format::Dimacs => Pipeline::Binary,
        Format::Hypergraph => Pipeline::Coloring,
        Format::Csp => Pipeline::General,
    });
    let opts = options(a);
    match loaded {
        Loaded::Hypergraph(h) => {
            let q = a.colors.ok_or_else(|| usage("hypergraph inputs need --colors"))?;
            let naming = h.naming(q);
            let prepared = match kind {
                Pipeline::Coloring => pipeline_coloring(&h, q, &opts)?,
                other => {
                    let csp = lll_sampler::frontends::build_coloring(&h, q)?;
                    prepare(other.into(), &csp, &opts)?
                }
            };
            Ok((prepared, naming))
        }
        Loaded::Csp(csp, naming) => {
            if kind == Pipeline::Coloring {
                return Err(usage("the coloring pipeline needs a hypergraph input"));
            }
            Ok((prepare(kind.into(), &csp, &opts)?, naming))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&PathBuf>, v: &Value) -> anyhow::Result<()> {
    emit(out, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn cmd_sample(a: &SampleArgs) -> anyhow::Result<ExitCode> {
    let (prepared, naming) = prepare_from(&a.instance)?;
    let samples = prepared.draw_many(a.num, a.instance.seed, a.jobs as usize)?;
    let mut text = String::new();
    for s in &samples {
        let line = if a.named { naming.render(s) } else { json!(s) };
        text.push_str(&serde_json::to_string(&line)?);
        text.push('\n');
    }
    emit(a.instance.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: &InstanceArgs) -> anyhow::Result<ExitCode> {
    // Regime failures are part of the verdict here, not errors.
    let mut forced = a.clone();
    forced.force = true;
    let (prepared, _) = prepare_from(&forced)?;
    let meas = prepared.original.measures();
    let params = match prepared.kind {
        PipelineKind::Binary => json!(binary_params(meas.kappa, a.zeta)),
        PipelineKind::General => json!(binary_params(meas.kappa.max(2.0), a.zeta)),
        PipelineKind::Uniform => json!(UNIFORM),
        PipelineKind::Coloring => Value::Null,
    };
    let report = json!({
        "pipeline": prepared.kind,
        "measures": meas,
        "target_measures": prepared.target().measures(),
        "parameters": params,
        "regime": prepared.regime,
        "marked": prepared.marking.count(),
        "construction": prepared.construction,
        "conditions": prepared.report,
        "in_regime": prepared.regime.ok,
        "conditions_hold": prepared.report.pass,
    });
    emit_json(a.out.as_ref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<ExitCode> {
    let (prepared, _) = prepare_from(&a.instance)?;
    let law = enumerate_law(&prepared.original)?;
    let sampler = prepared.sampler()?;
    let seed = a.instance.seed;
    let report: CertifyReport = lll_sampler::verify::certify(&law, a.num, a.jobs as usize, |i| {
        prepared.draw(&sampler, derive_seed(seed, i))
    })?;
    let target = prepared.target();
    let target_law = enumerate_law(target)?;
    let horizon = 50 * target.num_vars().max(1) as u64;
    let invariant = check_bounding_invariant(
        target,
        &prepared.marking,
        &target_law,
        horizon,
        a.trials,
        seed,
        ScanRule::Coupled,
        a.jobs as usize,
    )?;
    let pass = report.pass && invariant.pass;
    emit_json(
        a.instance.out.as_ref(),
        &json!({ "certification": report, "bounding_invariant": invariant, "pass": pass }),
    )?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(5) })
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<ExitCode> {
    let (prepared, _) = prepare_from(&a.instance)?;
    let n = prepared.target().num_vars() as u64;
    let horizons: Vec<u64> = a.multiples.iter().map(|k| k * n.max(1)).collect();
    let table = coalescence_experiment(
        prepared.target(),
        &prepared.marking,
        &horizons,
        a.trials,
        a.instance.seed,
        a.jobs as usize,
    )?;
    emit_json(a.instance.out.as_ref(), &json!(table))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tensorize(a: &InstanceArgs) -> anyhow::Result<ExitCode> {
    let (prepared, _) = prepare_from(a)?;
    let Some(t) = &prepared.tensor else {
        return Err(usage(format!("the {} pipeline does not tensorize", prepared.kind)));
    };
    let mut marks: Vec<Vec<bool>> = t.trees.iter().map(|tree| vec![false; tree.nodes().len()]).collect();
    for z in 0..t.csp.num_vars() {
        let (v, node) = t.origin(z);
        marks[v][node] = prepared.marking.is_marked(z);
    }
    let mut text = String::new();
    for (v, tree) in t.trees.iter().enumerate() {
        text.push_str(&format!("variable {v}\n"));
        text.push_str(&tree.dump(Some(&marks[v])));
    }
    emit(a.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(a: &SelftestArgs) -> anyhow::Result<ExitCode> {
    let facts = verify_numeric_facts();
    let suite = property_suite(a.seed, a.rounds)?;
    let pass = facts.pass && suite.pass;
    emit_json(None, &json!({ "numeric": facts, "properties": suite, "pass": pass }))?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(5) })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(e) => e.exit_code() as u8,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Check(a) => cmd_check(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Tensorize(a) => cmd_tensorize(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
