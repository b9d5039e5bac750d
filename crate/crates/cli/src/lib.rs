//! The `csltl` command: `sat`, `valid` and `diagnose` over files.
//!
//! Exit codes follow verification tools rather than SAT solvers: 0 when the
//! property holds (sat, valid, correct), 1 when it does not, 2 for usage and
//! input errors, 3 when the node budget runs out.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use csltl_core::constraint::{ConstraintSystem, FiniteTableSystem, FlatSystem};
use csltl_core::exec::Execution;
use csltl_core::frontend::{Outcome, Session, SessionConfig, SessionError};
use csltl_core::oracle::Bounds;
use csltl_core::tableau::{to_dot, TableauOptions};

pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "csltl",
    version,
    about = "Tableau checker for constraint LTL and tccp diagnosis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Is the set of formulas in FILE (`;`-separated) satisfiable?
    Sat {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Is every formula in FILE valid?
    Valid {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check each process of PROGRAM against SPEC.
    Diagnose {
        program: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Also check whether the spec admits behaviour the program lacks
        /// (heuristic).
        #[arg(long)]
        uncovered_hint: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Args)]
struct Opts {
    /// Constraint table file; without it atoms use the flat `x=v` system.
    #[arg(long, value_name = "FILE")]
    table: Option<PathBuf>,
    /// Rewrite stream atoms to current values and use the stream-aware next.
    #[arg(long)]
    streams: bool,
    /// Maximum number of tableau nodes.
    #[arg(long, value_name = "N", default_value_t = TableauOptions::default().node_budget)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the tableaux as GraphViz to FILE.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Cross-check verdicts with the bounded trace enumerator.
    #[arg(long)]
    oracle_check: bool,
    #[arg(long, value_name = "N", default_value_t = Bounds::default().max_prefix)]
    oracle_prefix: usize,
    #[arg(long, value_name = "N", default_value_t = Bounds::default().max_cycle)]
    oracle_cycle: usize,
    /// Run independent checks on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Opts {
    fn config(&self, uncovered_hint: bool) -> SessionConfig {
        SessionConfig {
            stream_mode: self.streams,
            node_budget: self.budget,
            oracle_check: self.oracle_check,
            oracle_bounds: Bounds {
                max_prefix: self.oracle_prefix,
                max_cycle: self.oracle_cycle,
                ..Bounds::default()
            },
            uncovered_hint,
            exec: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Session(SessionError),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Session(e) => e.exit_code(),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Session(e) => write!(f, "{e}"),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        Failure::Session(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_system(table: Option<&Path>) -> Result<Box<dyn ConstraintSystem>, Failure> {
    match table {
        None => Ok(Box::new(FlatSystem)),
        Some(path) => {
            let text = read(path)?;
            let cs = FiniteTableSystem::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok(Box::new(cs))
        }
    }
}

fn dot_of(outcome: &Outcome) -> String {
    outcome
        .tableaux
        .iter()
        .map(|(name, t)| format!("// {name}\n{}", to_dot(t)))
        .collect()
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let (opts, uncovered) = match &cli.command {
        Command::Sat { opts, .. } | Command::Valid { opts, .. } => (opts, false),
        Command::Diagnose {
            opts, uncovered_hint, ..
        } => (opts, *uncovered_hint),
    };
    if opts.oracle_cycle == 0 {
        return Err(Failure::Usage("--oracle-cycle must be at least 1".into()));
    }
    let cs = load_system(opts.table.as_deref())?;
    let session = Session::new(cs.as_ref(), opts.config(uncovered))?;
    let outcome = match &cli.command {
        Command::Sat { file, .. } => session.sat(&read(file)?)?,
        Command::Valid { file, .. } => session.valid(&read(file)?)?,
        Command::Diagnose { program, spec, .. } => session.diagnose(&read(program)?, &read(spec)?)?,
    };
    if let Some(path) = &opts.dot {
        fs::write(path, dot_of(&outcome)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let text = match opts.format {
        Format::Text => outcome.report.to_text(),
        Format::Json => outcome.report.to_json() + "\n",
        Format::Dot => dot_of(&outcome),
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Usage(format!("writing output: {e}")))?;
    Ok(outcome.status.exit_code())
}

/// Run with `args` (program name first), writing results to `out` and
/// diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
