//! `snowflake` command-line experiment runner.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use snowflake_core::harness::{run_accuracy, run_runtime, run_trace, DecoderKind, ExperimentConfig, RunReport};
use snowflake_core::{build_template, Family, HarnessError};

#[derive(Parser)]
#[command(name = "snowflake", version, about = "Streaming decoder emulator and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Logical error rate per (d, p) point.
    Accuracy(RunArgs),
    /// Decoding timesteps per block of d rounds, with scaling fits.
    Runtime(RunArgs),
    /// Render SVG plots from a summary CSV.
    Plot(PlotArgs),
    /// Single-trial timestep trace of the Snowflake decoder.
    Trace(TraceArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_decoder)]
    decoder: Option<DecoderKind>,
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<usize>>,
    #[arg(long = "noise-levels", value_delimiter = ',')]
    noise_levels: Option<Vec<f64>>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Accuracy,
    Runtime,
}

#[derive(Args)]
struct PlotArgs {
    /// Summary CSV written by `accuracy` or `runtime`.
    input: PathBuf,
    /// Plot type; inferred from the file name when omitted.
    #[arg(long, value_enum)]
    kind: Option<PlotKind>,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, value_parser = parse_family, default_value = "repetition")]
    family: Family,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.02)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    /// Print the layer template instead of a trace.
    #[arg(long)]
    template: bool,
    /// Print the committed corrections as `round edge` lines after the trace.
    #[arg(long)]
    committed: bool,
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: snowflake_core::GraphError| e.to_string())
}

const EXIT_CONFIG: u8 = 2;
const EXIT_TAINTED: u8 = 3;

enum Failure {
    Config(String),
    Other(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Graph(_) | HarnessError::Noise(_) => Failure::Config(e.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.decoder {
        cfg.decoder = v;
    }
    if let Some(v) = args.family {
        cfg.family = v;
    }
    if let Some(v) = &args.distances {
        cfg.distances = v.clone();
    }
    if let Some(v) = &args.noise_levels {
        cfg.noise_levels = v.clone();
    }
    if let Some(v) = args.blocks {
        cfg.blocks = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = &args.out_dir {
        cfg.out_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish_run(report: RunReport) -> Result<ExitCode, Failure> {
    let written = report.write_outputs(&report.config.out_dir)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    for s in &report.summaries {
        let rate = s.rate.map(|e| format!("{:.3e} +- {:.1e}", e.mean, e.stderr)).unwrap_or_else(|| "-".into());
        let ts = s.timesteps.map(|e| format!("{:.2} +- {:.2}", e.mean, e.stderr)).unwrap_or_else(|| "-".into());
        println!("d={} p={} blocks={} f={} timesteps={}", s.d, s.p, s.blocks, rate, ts);
    }
    for row in &report.slopes {
        match &row.fit {
            Some(f) => println!("p={} slope={:.3} +- {:.3}", row.p, f.slope, f.slope_stderr),
            None => println!("p={} slope unavailable: {}", row.p, row.error.as_deref().unwrap_or("")),
        }
    }
    if report.tainted() {
        let n = report.trials.iter().filter(|t| t.tainted.is_some()).count();
        eprintln!("run tainted: {n} trial(s) aborted and excluded");
        return Ok(ExitCode::from(EXIT_TAINTED));
    }
    Ok(ExitCode::SUCCESS)
}

fn trace(args: &TraceArgs) -> Result<ExitCode, Failure> {
    if args.template {
        print!("{}", build_template(args.family, args.d).map_err(HarnessError::from)?.dump());
        return Ok(ExitCode::SUCCESS);
    }
    let report = run_trace(args.family, args.d, args.p, args.seed, args.rounds)?;
    for e in &report.events {
        println!("{e}");
    }
    if args.committed {
        for (round, edge) in &report.committed {
            println!("{round} {}:{}", edge.layer, edge.edge);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn plot_kind(args: &PlotArgs) -> PlotKind {
    args.kind.unwrap_or_else(|| {
        let name = args.input.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.contains("runtime") {
            PlotKind::Runtime
        } else {
            PlotKind::Accuracy
        }
    })
}

fn plot_cmd(args: &PlotArgs) -> Result<ExitCode, Failure> {
    let rows = plot::read_summary(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    std::fs::create_dir_all(&args.out_dir).context("creating output directory")?;
    let stem = args.input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let out = |suffix: &str| -> PathBuf { Path::new(&args.out_dir).join(format!("{stem}{suffix}.svg")) };
    let written = match plot_kind(args) {
        PlotKind::Accuracy => {
            let path = out("_threshold");
            plot::threshold(&rows, &path)?;
            vec![path]
        }
        PlotKind::Runtime => {
            let (lin, log) = (out("_linear"), out("_loglog"));
            plot::runtime(&rows, &lin, false)?;
            plot::runtime(&rows, &log, true)?;
            vec![lin, log]
        }
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Accuracy(args) => load_config(args).and_then(|c| finish_run(run_accuracy(&c)?)),
        Command::Runtime(args) => load_config(args).and_then(|c| finish_run(run_runtime(&c)?)),
        Command::Plot(args) => plot_cmd(args),
        Command::Trace(args) => trace(args),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
