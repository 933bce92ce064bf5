//! `swm`: forward kinematics of a four-cable suspended platform.

mod config;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use swm_core::equal_length::{delta_t_min_grid, even_tension, tension_family};
use swm_core::report::{OutcomeReport, OutcomeTag};
use swm_core::single_cable::is_single_cable_suspended;
use swm_core::{solve, CableLengths, FkError};

use config::{ConfigError, RunConfig};

const EXIT_DEFINITE: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_SINGLE_CABLE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "swm", version, about = "Cable tensions and platform pose of a four-cable sinking-winch mechanism")]
struct Cli {
    /// TOML file with mechanism parameters and solver settings.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one set of cable lengths.
    Solve {
        /// Cable lengths l1,l2,l3,l4 in m.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        lengths: Vec<f64>,
    },
    /// Solve every `l1,l2,l3,l4` line of a file.
    Batch {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Test whether the shortest cable can carry the platform alone.
    CheckSingle {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        lengths: Vec<f64>,
    },
    /// Most even tension split at equal lengths, or a grid of its spread.
    EvenTension {
        /// Emit an N x N grid of the minimal tension difference over (k1, k2).
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(2..))]
        grid: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_DEFINITE });
        }
    };
    let cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(ConfigError::Unreadable(msg)) => {
            eprintln!("swm: cannot read config {msg}");
            return ExitCode::from(EXIT_NO_INPUT);
        }
        Err(ConfigError::Invalid(msg)) => {
            eprintln!("swm: invalid config {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let code = match cli.command {
        Command::Solve { lengths } => cmd_solve(&lengths, &cfg, cli.format),
        Command::Batch { input, jobs } => cmd_batch(&input, jobs, &cfg, cli.format),
        Command::CheckSingle { lengths } => cmd_check_single(&lengths, &cfg, cli.format),
        Command::EvenTension { grid } => cmd_even_tension(grid, &cfg, cli.format),
    };
    ExitCode::from(code)
}

fn parse_lengths(values: &[f64]) -> Result<CableLengths, u8> {
    let arr: [f64; 4] = values.try_into().map_err(|_| {
        eprintln!("swm: expected four lengths, got {}", values.len());
        EXIT_USAGE
    })?;
    CableLengths::new(arr).map_err(|e| {
        eprintln!("swm: {e}");
        EXIT_USAGE
    })
}

fn emit(text: &str) -> u8 {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => EXIT_DEFINITE,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_DEFINITE,
        Err(e) => {
            eprintln!("swm: {e}");
            EXIT_FAILURE
        }
    }
}

fn solve_report(lengths: &CableLengths, cfg: &RunConfig) -> Result<OutcomeReport, FkError> {
    let outcome = solve(lengths, &cfg.mechanism, &cfg.options)?;
    Ok(OutcomeReport::new(&outcome, &cfg.mechanism).with_lengths(lengths))
}

fn render(report: &OutcomeReport, format: Format, header: bool) -> String {
    match format {
        Format::Table => output::table(report),
        Format::Json => output::json(report) + "\n",
        Format::Csv if header => format!("{}\n{}\n", output::CSV_HEADER, output::csv_row(report)),
        Format::Csv => output::csv_row(report) + "\n",
    }
}

fn cmd_solve(values: &[f64], cfg: &RunConfig, format: Format) -> u8 {
    let lengths = match parse_lengths(values) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let report = match solve_report(&lengths, cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("swm: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = emit(&render(&report, format, true));
    if written != EXIT_DEFINITE {
        return written;
    }
    match report.outcome {
        OutcomeTag::Definite => EXIT_DEFINITE,
        OutcomeTag::SingleCable => EXIT_SINGLE_CABLE,
        OutcomeTag::Infeasible => EXIT_FAILURE,
    }
}

/// Parses one batch line; `None` for blank lines and `#` comments.
fn parse_batch_line(line: &str) -> Option<Result<CableLengths, String>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return None;
    }
    let fields: Result<Vec<f64>, _> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    Some(match fields {
        Err(e) => Err(e.to_string()),
        Ok(v) => match <[f64; 4]>::try_from(v.as_slice()) {
            Err(_) => Err(format!("expected four lengths, got {}", v.len())),
            Ok(arr) => CableLengths::new(arr).map_err(|e| e.to_string()),
        },
    })
}

fn cmd_batch(path: &std::path::Path, jobs: Option<usize>, cfg: &RunConfig, format: Format) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("swm: cannot read {}: {e}", path.display());
            return EXIT_NO_INPUT;
        }
    };
    let cases: Vec<(usize, CableLengths)> = text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match parse_batch_line(line)? {
            Ok(l) => Some((i + 1, l)),
            Err(msg) => {
                eprintln!("swm: {}:{}: skipped: {msg}", path.display(), i + 1);
                None
            }
        })
        .collect();

    let run = || -> Vec<(usize, Result<OutcomeReport, FkError>)> {
        cases.par_iter().map(|(n, l)| (*n, solve_report(l, cfg))).collect()
    };
    let results = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("swm: {e}");
                return EXIT_FAILURE;
            }
        },
        None => run(),
    };

    let mut text = String::new();
    if format == Format::Csv && !results.is_empty() {
        text.push_str(output::CSV_HEADER);
        text.push('\n');
    }
    let mut failed = false;
    for (n, result) in results {
        match result {
            Ok(report) => text.push_str(&render(&report, format, false)),
            Err(e) => {
                eprintln!("swm: {}:{n}: {e}", path.display());
                failed = true;
            }
        }
    }
    let written = emit(&text);
    if failed { EXIT_FAILURE } else { written }
}

fn cmd_check_single(values: &[f64], cfg: &RunConfig, format: Format) -> u8 {
    let lengths = match parse_lengths(values) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let as_json = format == Format::Json;
    if lengths.all_equal(swm_core::traversal::EQUAL_TOLERANCE) {
        return emit(&(output::check_single(None, &lengths.as_array(), as_json) + if as_json { "\n" } else { "" }));
    }
    match is_single_cable_suspended(&lengths, &cfg.mechanism) {
        Ok(check) => {
            let mut text = output::check_single(Some(&check), &lengths.as_array(), as_json);
            if as_json {
                text.push('\n');
            }
            emit(&text)
        }
        Err(e) => {
            eprintln!("swm: {e}");
            EXIT_FAILURE
        }
    }
}

fn cmd_even_tension(grid: Option<u32>, cfg: &RunConfig, format: Format) -> u8 {
    let mech = &cfg.mechanism;
    if let Some(n) = grid {
        let nodes = delta_t_min_grid(n as usize, mech);
        let mut text = String::with_capacity(nodes.len() * 48);
        text.push_str("k1,k2,delta_t_min\n");
        for node in nodes {
            text.push_str(&format!("{},{},{}\n", node.k1, node.k2, node.delta_t_min));
        }
        return emit(&text);
    }
    let even = even_tension(mech);
    let family = tension_family(mech);
    let mut text = output::even_tension(mech.k1, mech.k2, mech.weight(), &even, &family, format == Format::Json);
    if format == Format::Json {
        text.push('\n');
    }
    emit(&text)
}
