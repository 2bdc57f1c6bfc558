//! `roughjump` command-line front end.
//!
//! Exit codes: 0 when the computation ran (whatever its verdict), 1 for I/O
//! failures, 2 for unparsable input or flags, 3 for violated preconditions.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{Format, GeneratorOverrides, Method, Settings, SimModel};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Precondition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Parse(_) => 2,
            Self::Precondition(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Parse(m) => write!(f, "parse error: {m}"),
            Self::Precondition(m) => write!(f, "{m}"),
        }
    }
}

impl From<roughjump::Error> for CliError {
    fn from(e: roughjump::Error) -> Self {
        use roughjump::Error as E;
        match e {
            E::Io(_) | E::Csv(_) => Self::Io(e.to_string()),
            E::Json(_) | E::FunctionSpec { .. } | E::Polynomial(_) | E::InvalidPath(_) => Self::Parse(e.to_string()),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "roughjump", version, about = "Rough integration and jump Itô identities on regulated paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON or TOML file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long, env = "ROUGHJUMP_SEED")]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct PathArgs {
    /// Path file (JSON).
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct GenArgs {
    #[arg(long = "n", value_name = "N")]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "horizon", value_name = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    drift: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact p-variation with a maximizing partition.
    Pvar {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
    },
    /// Reduced Chen relation on random triples and per-level bounds.
    LiftCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        /// Random triples for the Chen check.
        #[arg(long)]
        triples: Option<usize>,
    },
    /// Rough integral of DF(X) along the refinement schedule.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        /// poly:<expr>, exp or log:<m>,<M>.
        #[arg(long = "fn")]
        function: Option<String>,
    },
    /// Change-of-variables identity with jump corrections.
    Ito {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        #[arg(long = "fn")]
        function: Option<String>,
        /// Also report the remainder-term split along the schedule.
        #[arg(long)]
        proof_terms: bool,
    },
    /// Log-wealth decomposition of a positive càdlàg path.
    Logwealth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
    },
    /// Draws one sample path.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        generator: GenArgs,
        #[arg(long, value_enum)]
        model: Option<SimModel>,
        /// Constant strategy for the wealth model.
        #[arg(long)]
        pi: Option<f64>,
        /// Initial wealth.
        #[arg(long)]
        w0: Option<f64>,
    },
    /// Residual sweep over seeds, grid sizes and exponents.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        generator: GenArgs,
        #[arg(long, value_enum)]
        model: Option<SimModel>,
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        ps: Option<Vec<f64>>,
    },
}

fn common_settings(c: &Common) -> Settings {
    Settings {
        seed: c.seed,
        out: c.out.clone(),
        format: c.format,
        workers: c.workers,
        tol: c.tol,
        ..Default::default()
    }
}

fn path_settings(base: Settings, p: &PathArgs) -> Settings {
    Settings {
        path: p.path.clone(),
        p: p.p,
        ..base
    }
}

fn generator_overrides(g: &GenArgs) -> GeneratorOverrides {
    GeneratorOverrides {
        horizon: g.horizon,
        n: g.n,
        d: g.d,
        stream: g.stream,
        hurst: g.hurst,
        sigma: g.sigma,
        rate: g.rate,
        drift: g.drift,
        x0: g.x0,
        method: g.method,
        jump_law: None,
    }
}

fn flag_settings(cmd: &Command) -> (&Common, Settings) {
    match cmd {
        Command::Pvar { common, path } => (common, path_settings(common_settings(common), path)),
        Command::LiftCheck { common, path, triples } => (
            common,
            Settings {
                triples: *triples,
                ..path_settings(common_settings(common), path)
            },
        ),
        Command::Integrate { common, path, function } => (
            common,
            Settings {
                function: function.clone(),
                ..path_settings(common_settings(common), path)
            },
        ),
        Command::Ito {
            common,
            path,
            function,
            proof_terms,
        } => (
            common,
            Settings {
                function: function.clone(),
                proof_terms: proof_terms.then_some(true),
                ..path_settings(common_settings(common), path)
            },
        ),
        Command::Logwealth { common, path } => (common, path_settings(common_settings(common), path)),
        Command::Simulate {
            common,
            generator,
            model,
            pi,
            w0,
        } => (
            common,
            Settings {
                generator: generator_overrides(generator),
                model: *model,
                pi: *pi,
                w0: *w0,
                ..common_settings(common)
            },
        ),
        Command::Sweep {
            common,
            generator,
            model,
            function,
            seeds,
            ns,
            ps,
        } => (
            common,
            Settings {
                generator: generator_overrides(generator),
                model: *model,
                function: function.clone(),
                seeds: seeds.clone(),
                ns: ns.clone(),
                ps: ps.clone(),
                ..common_settings(common)
            },
        ),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, flags) = flag_settings(&cli.command);
    let base = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = base.overlay(flags);
    if common.print_config {
        let text = serde_json::to_string_pretty(&settings).map_err(|e| CliError::Parse(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    match cli.command {
        Command::Pvar { .. } => commands::pvar(&settings),
        Command::LiftCheck { .. } => commands::lift_check(&settings),
        Command::Integrate { .. } => commands::integrate(&settings),
        Command::Ito { .. } => commands::ito(&settings),
        Command::Logwealth { .. } => commands::logwealth(&settings),
        Command::Simulate { .. } => commands::simulate(&settings),
        Command::Sweep { .. } => commands::sweep(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roughjump: {e}");
            ExitCode::from(e.code())
        }
    }
}
