//! `sparc`: check, solve, query and render SPARC programs, or serve the
//! workspace API.
//!
//! Exit status is 0 on success, 1 when the program has diagnostics and 2 on
//! usage errors.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparc_core::pipeline::{Diagnostic, Pipeline};
use sparc_core::preprocess::FsResolver;
use sparc_service::{run, RunMode, RunRequest, RunResponse, RunStatus, ServiceConfig};

#[derive(Parser)]
#[command(name = "sparc", version, about = "Sorted answer-set programming workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, preprocess and type-check a program.
    Check(Common),
    /// Print every answer set, one per line.
    Solve(Common),
    /// Answer a query with yes, no, unknown or variable bindings.
    Query {
        #[command(flatten)]
        common: Common,
        /// The query, e.g. `p(b)?`.
        #[arg(long, short)]
        query: String,
    },
    /// Compile display atoms into an HTML page or JSON render plans.
    Render {
        #[command(flatten)]
        common: Common,
        /// Output file; `.json` writes render plans, anything else HTML.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// TOML file with service settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the listen address.
        #[arg(long)]
        listen: Option<std::net::SocketAddr>,
        /// Overrides the data directory.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Program file, or `-` for standard input.
    input: PathBuf,
    /// Time limit in seconds, at most 50.
    #[arg(long)]
    timeout: Option<f64>,
    /// Stop with an error beyond this many answer sets.
    #[arg(long)]
    max_models: Option<usize>,
    /// Extra directories searched by `#include`.
    #[arg(long = "include-dir")]
    include_dirs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| anyhow!("cannot read standard input: {e}"))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display()))
}

fn print_diagnostics(diagnostics: &[Diagnostic], input: &Path) {
    for d in diagnostics {
        let file = d.file.clone().unwrap_or_else(|| input.display().to_string());
        match (d.line, d.col) {
            (Some(l), Some(c)) => eprintln!("{file}:{l}:{c}: {} error: {}", d.stage, d.message),
            _ => eprintln!("{file}: {} error: {}", d.stage, d.message),
        }
    }
}

fn status(diagnostics: &[Diagnostic]) -> ExitCode {
    if diagnostics.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

/// Evaluates the request the same way the service does.
fn evaluate(common: &Common, mode: RunMode, query: Option<String>) -> Result<RunResponse> {
    let program = read_input(&common.input)?;
    let limits = ServiceConfig::default()
        .limits_for(common.timeout, common.max_models)
        .map_err(|e| anyhow!(e))?;
    let req = RunRequest {
        program,
        mode,
        query,
        timeout_sec: common.timeout,
        max_models: common.max_models,
    };
    let resolver = FsResolver::new(common.include_dirs.clone());
    let file_name = (common.input != Path::new("-")).then(|| common.input.display().to_string());
    Ok(run(&req, &resolver, file_name.as_deref(), limits))
}

fn check(common: &Common) -> Result<ExitCode> {
    let program = read_input(&common.input)?;
    let resolver = FsResolver::new(common.include_dirs.clone());
    let file_name = (common.input != Path::new("-")).then(|| common.input.display().to_string());
    let pipeline = Pipeline {
        file_name: file_name.as_deref(),
        ..Pipeline::new(&resolver)
    };
    let diagnostics = pipeline.check(&program).err().unwrap_or_default();
    if common.format == Format::Json {
        let ok = if diagnostics.is_empty() { RunStatus::Ok } else { RunStatus::Error };
        print!("{}", json(&serde_json::json!({ "status": ok, "diagnostics": diagnostics }))?);
    } else {
        print_diagnostics(&diagnostics, &common.input);
    }
    Ok(status(&diagnostics))
}

fn answer(common: &Common, mode: RunMode, query: Option<String>) -> Result<ExitCode> {
    let resp = evaluate(common, mode, query)?;
    match common.format {
        Format::Json => print!("{}", json(&resp)?),
        Format::Text => {
            print_diagnostics(&resp.diagnostics, &common.input);
            if let Some(text) = resp.text() {
                print!("{text}");
            }
        }
    }
    Ok(status(&resp.diagnostics))
}

fn render(common: &Common, out: Option<&Path>) -> Result<ExitCode> {
    let resp = evaluate(common, RunMode::Execute, None)?;
    if resp.status == RunStatus::Error {
        if common.format == Format::Json {
            print!("{}", json(&resp)?);
        } else {
            print_diagnostics(&resp.diagnostics, &common.input);
        }
        return Ok(ExitCode::from(1));
    }
    let plans = resp.plans.as_deref().unwrap_or_default();
    let html = resp.html.as_deref().unwrap_or_default();
    match out {
        Some(path) => {
            let bytes = if path.extension().is_some_and(|e| e == "json") { json(&plans)? } else { html.to_string() };
            std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        }
        None if common.format == Format::Json => print!("{}", json(&resp)?),
        None => print!("{html}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(config: Option<&Path>, listen: Option<std::net::SocketAddr>, data_dir: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg: ServiceConfig = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => ServiceConfig::default(),
    };
    if let Some(l) = listen {
        cfg.listen = l;
    }
    if let Some(d) = data_dir {
        cfg.data_dir = d;
    }
    if cfg.max_timeout_sec > 50.0 || cfg.default_timeout_sec > cfg.max_timeout_sec {
        bail!("timeouts must satisfy default <= max <= 50");
    }
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(sparc_service::serve(cfg, |addr| eprintln!("listening on http://{addr}")))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(c) => check(c),
        Command::Solve(c) => answer(c, RunMode::AnswerSets, None),
        Command::Query { common, query } => answer(common, RunMode::Query, Some(query.clone())),
        Command::Render { common, out } => render(common, out.as_deref()),
        Command::Serve { config, listen, data_dir } => serve(config.as_deref(), *listen, data_dir.clone()),
    };
    result.unwrap_or_else(|e| {
        eprintln!("sparc: {e:#}");
        ExitCode::from(2)
    })
}
