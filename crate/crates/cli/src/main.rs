use std::fs::File;
use std::io::{BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quadctrl::linalg::{Mode, Number, Rational, Scalar, Vector};
use quadctrl::models::{self, paper_example, paper_examples};
use quadctrl::report::{analyze, AnalysisOptions};
use quadctrl::sim::CloudOptions;
use quadctrl::{QuadraticSystem, SystemSpec};

/// Accessibility and small-time local controllability of quadratic control systems.
#[derive(Debug, Parser)]
#[command(name = "quadctrl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a system spec, a bundled example or a model shorthand.
    ///
    /// Exit status: 0 when the STLC question is decided, 2 when it is
    /// inconclusive, 1 on invalid input.
    Analyze(AnalyzeArgs),
    /// List the bundled example systems.
    Examples,
    /// Print the normalized JSON spec of a bundled example or model shorthand.
    EmitSpec(SourceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Sprott,
    Lorenz,
    RigidBody,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Path to a JSON spec, or the name of a bundled example.
    #[arg(conflicts_with = "model")]
    spec: Option<String>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<Number>,
    #[arg(long)]
    sigma: Option<Number>,
    #[arg(long)]
    rho: Option<Number>,
    #[arg(long)]
    beta: Option<Number>,
    /// Principal moments of inertia, comma separated.
    #[arg(long, value_delimiter = ',')]
    xi: Option<Vec<Number>>,
    /// A control field, comma separated; repeat for a second input.
    #[arg(long = "control", value_parser = parse_vector, allow_hyphen_values = true)]
    controls: Vec<Vec<Number>>,
    /// Rigid body: treat `--control` values as torques and scale them by the inverse inertia.
    #[arg(long)]
    raw_torques: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Cross-check S_k against the span of iterated Lie brackets at the origin.
    #[arg(long)]
    oracle: bool,
    /// Longest bracket word for the oracle.
    #[arg(long, default_value_t = 8)]
    oracle_depth: usize,
    /// Include every enumerated bracket in the report.
    #[arg(long, requires = "oracle")]
    forest: bool,
    /// Sample the reachable set from the origin and report cloud statistics.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0.5)]
    horizon: f64,
    #[arg(long, default_value_t = 1.0)]
    bound: f64,
    #[arg(long, default_value_t = 4)]
    segments: usize,
    #[arg(long, default_value_t = 25)]
    steps_per_segment: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the simulated endpoints as CSV.
    #[arg(long, requires = "simulate")]
    dump_endpoints: Option<PathBuf>,
    /// Arithmetic mode; inferred from the spec when omitted.
    #[arg(long)]
    mode: Option<Mode>,
    /// Absolute tolerance for float mode.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, conflicts_with = "text")]
    json: bool,
    #[arg(long)]
    text: bool,
}

fn parse_vector(s: &str) -> Result<Vec<Number>, String> {
    s.split(',').map(|x| x.trim().parse::<Number>().map_err(|e| e.to_string())).collect()
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
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Examples => {
            let listing: String = paper_examples()
                .iter()
                .map(|ex| format!("{:<28} n={} k={}  {}\n", ex.name, ex.system.n(), ex.system.k(), ex.description))
                .collect();
            emit(&listing)?;
            Ok(0)
        }
        Command::EmitSpec(source) => {
            emit(&(serde_json::to_string_pretty(&load_spec(&source)?)? + "\n"))?;
            Ok(0)
        }
        Command::Analyze(args) => cmd_analyze(&args),
    }
}

// A closed pipe (`| head`) is not an error worth reporting.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let spec = load_spec(&args.source)?;
    let opts = AnalysisOptions {
        mode: args.mode,
        tol: args.tol,
        oracle_depth: args.oracle.then_some(args.oracle_depth),
        record_forest: args.forest,
        simulate: args.simulate.then_some(CloudOptions {
            horizon: args.horizon,
            samples: args.samples,
            bound: args.bound,
            segments: args.segments,
            steps_per_segment: args.steps_per_segment,
            seed: args.seed,
        }),
    };
    let report = analyze(&spec, &opts)?;
    if let (Some(path), Some(sim)) = (&args.dump_endpoints, &report.simulation) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        sim.stats.write_csv(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }
    let out = if args.json { serde_json::to_string_pretty(&report.to_json())? + "\n" } else { report.render_text() };
    emit(&out)?;
    Ok(report.exit_code() as u8)
}

fn load_spec(source: &SourceArgs) -> Result<SystemSpec> {
    if let Some(model) = source.model {
        return model_spec(model, source);
    }
    let Some(spec) = &source.spec else {
        bail!("expected a spec path, an example name, or --model");
    };
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(ex) = paper_example(spec) {
            return Ok(ex.system.to_spec());
        }
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn model_spec(model: Model, source: &SourceArgs) -> Result<SystemSpec> {
    let exact = [&source.mu, &source.sigma, &source.rho, &source.beta]
        .into_iter()
        .flatten()
        .chain(source.xi.iter().flatten())
        .chain(source.controls.iter().flatten())
        .all(|x| x.mode() == Mode::Rational);
    if exact {
        Ok(build_model::<Rational>(model, source)?.to_spec())
    } else {
        Ok(build_model::<f64>(model, source)?.to_spec())
    }
}

fn build_model<T: Scalar>(model: Model, source: &SourceArgs) -> Result<QuadraticSystem<T>> {
    let param = |name: &str, v: &Option<Number>| -> Result<T> {
        let v = v.as_ref().with_context(|| format!("--model requires --{name}"))?;
        Ok(v.resolve::<T>()?)
    };
    let vector = |v: &[Number]| -> Result<Vector<T>> { Ok(v.iter().map(Number::resolve::<T>).collect::<Result<_, _>>()?) };
    let controls = source.controls.iter().map(|f| vector(f)).collect::<Result<Vec<_>>>()?;
    let sys = match model {
        Model::Sprott => models::sprott(param("mu", &source.mu)?, controls)?,
        Model::Lorenz => models::lorenz(param("sigma", &source.sigma)?, param("rho", &source.rho)?, param("beta", &source.beta)?, controls)?,
        Model::RigidBody => {
            let xi = vector(source.xi.as_deref().context("--model rigid-body requires --xi")?)?;
            models::rigid_body(&xi, controls, source.raw_torques)?
        }
    };
    Ok(sys)
}
