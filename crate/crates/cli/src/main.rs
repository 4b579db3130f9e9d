//! `ldx`: serve the exploration API, profile a dataset or replay a scripted
//! exploration.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data or script
//! parse error, 3 an exploration step was rejected.

mod profile;
mod script;
mod serve;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use ldx_core::rdf::Graph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Exploration(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Exploration(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ldx", version, about = "Bar-chart exploration of RDF datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP API over N-Triples files and/or a SPARQL endpoint.
    Serve {
        /// Configuration file of `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// N-Triples file to load; repeatable.
        #[arg(long = "data")]
        data: Vec<PathBuf>,
        #[arg(long)]
        endpoint: Option<String>,
        /// Port to listen on; 0 picks a free one.
        #[arg(long)]
        port: Option<u16>,
        /// Root class of sessions that do not name one.
        #[arg(long)]
        root: Option<String>,
    },
    /// Print the class distribution and the best-covered properties.
    Profile {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = ldx_core::rdf::vocab::OWL_THING)]
        root: String,
        /// Levels of subclass charts to descend.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        /// Minimum property coverage reported.
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
        /// Properties reported per class.
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Replay a script of exploration steps and print every chart.
    ///
    /// One step per line: `[from <pane>] select <label> expand <kind>
    /// [filter <property> <op> <value>]...`. Labels may be full URIs or
    /// local names of bars in the parent chart. `#` starts a comment.
    Explore {
        #[arg(long)]
        data: PathBuf,
        /// Script file, `-` for stdin. Without one only the initial chart is printed.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value = ldx_core::rdf::vocab::OWL_THING)]
        root: String,
    },
}

/// Reads an N-Triples file; syntax errors name the offending line.
pub fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let file = File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Graph::from_ntriples(BufReader::new(file)).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Serve {
            config,
            data,
            endpoint,
            port,
            root,
        } => serve::run(serve::Flags {
            config,
            data,
            endpoint,
            port,
            root,
        }),
        Command::Profile {
            data,
            root,
            depth,
            threshold,
            top,
            format,
        } => {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(Failure::Config(format!("threshold {threshold} is outside [0, 1]")));
            }
            let graph = load_graph(&data)?;
            let report = profile::profile(&graph, &root, depth as usize, threshold, top);
            let out = std::io::stdout().lock();
            match format {
                Format::Json => profile::write_json(&report, out),
                Format::Csv => profile::write_csv(&report, out),
            }
            .map_err(|e| Failure::Config(format!("cannot write report: {e}")))
        }
        Command::Explore { data, script, root } => {
            let text = match script.as_deref() {
                None => String::new(),
                Some(p) if p == Path::new("-") => std::io::read_to_string(std::io::stdin())
                    .map_err(|e| Failure::Config(format!("cannot read script: {e}")))?,
                Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
            };
            let steps = script::parse(&text)?;
            let graph = load_graph(&data)?;
            script::replay(graph, &root, &steps, &mut std::io::stdout().lock())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
