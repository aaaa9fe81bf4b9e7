use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use superyang::suites::{render_series, Report, RunConfig, Suite, DEFAULT_SEED};
use superyang::twisted::{Ladder, Mode, Twisted};
use superyang::yangian::{counit_series, lift_series, PolySeries, Yangian};
use superyang::{KernelError, Result};

#[derive(Parser)]
#[command(name = "superyang", version, about = "Exact checks for super Yangians and their twisted versions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Shape {
    #[arg(short = 'M', default_value_t = 1)]
    m: usize,
    #[arg(short = 'N', default_value_t = 2)]
    n: usize,
    /// Series order kept exact.
    #[arg(short = 'D', default_value_t = 2)]
    depth: i64,
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    mode: ModeArg,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Strict,
    Extended,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Extended => Mode::Extended,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum Target {
    Berezinian,
    BerezinianTwFusion,
    BerezinianTwExplicit,
    Z,
    ZTw,
    Minor,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and print a report.
    Verify {
        #[command(flatten)]
        shape: Shape,
        /// Suite to run; repeat for several. All suites by default.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Wall-clock budget per suite; later checks are skipped once spent.
        #[arg(long)]
        budget_seconds: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Report zero runtimes, making reports reproducible byte for byte.
        #[arg(long)]
        no_timings: bool,
    },
    /// Print a series to order D.
    Compute {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        shape: Shape,
        /// Upper indices of a quantum minor, comma separated.
        #[arg(long, value_delimiter = ',')]
        upper: Vec<u8>,
        /// Lower indices of a quantum minor, comma separated.
        #[arg(long, value_delimiter = ',')]
        lower: Vec<u8>,
        /// Apply the counit before printing.
        #[arg(long)]
        counit: bool,
    },
    /// List the available suites.
    ListSuites,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { shape, suites, output, seed, budget_seconds, workers, no_timings } => {
            let cfg = RunConfig { m: shape.m, n: shape.n, depth: shape.depth, mode: shape.mode.into(), suites, seed };
            verify(cfg, output, budget_seconds, workers, no_timings)
        }
        Command::Compute { target, shape, upper, lower, counit } => match compute(target, &shape, &upper, &lower) {
            Ok(s) => {
                let s = if counit { lift_series(&counit_series(&s)) } else { s };
                println!("{}", render_series(&s));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::ListSuites => {
            for s in Suite::ALL {
                println!("{:<20} {}", s.name(), s.describe());
            }
            ExitCode::SUCCESS
        }
    }
}

fn verify(cfg: RunConfig, output: Output, budget: Option<f64>, workers: usize, no_timings: bool) -> ExitCode {
    let suites = match cfg.validate() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let budget = match budget {
        Some(b) if !(b.is_finite() && b >= 0.0) => {
            eprintln!("error: budget must be a nonnegative number of seconds");
            return ExitCode::from(2);
        }
        b => b.map(Duration::from_secs_f64),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let checks = pool.install(|| suites.par_iter().flat_map(|s| s.run(&cfg, budget)).collect::<Vec<_>>());
    let mut report = Report::new(cfg, checks, start.elapsed().as_millis() as u64);
    if no_timings {
        report = report.without_timings();
    }
    match output {
        Output::Text => print!("{}", report.render_text()),
        Output::Json => match serde_json::to_string_pretty(&report) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn compute(target: Target, shape: &Shape, upper: &[u8], lower: &[u8]) -> Result<PolySeries> {
    let twisted = || Twisted::model(shape.m, shape.n, shape.depth, shape.mode.into());
    match target {
        Target::Berezinian => Yangian::new(shape.m, shape.n, shape.depth)?.berezinian_explicit(),
        Target::Z => Yangian::new(shape.m, shape.n, shape.depth)?.z_series(),
        Target::BerezinianTwFusion => twisted()?.berezinian_fusion(),
        Target::BerezinianTwExplicit => twisted()?.berezinian_explicit(),
        Target::ZTw => twisted()?.z_tw(),
        Target::Minor => {
            if upper.is_empty() || upper.len() != lower.len() {
                return Err(KernelError::InvalidArgument(
                    "a minor needs --upper and --lower index lists of equal length".into(),
                ));
            }
            let tw = twisted()?;
            let p = lower.iter().take_while(|&&i| (i as usize) <= shape.m).count();
            let q = lower.len() - p;
            if p > shape.m || q > shape.n {
                return Err(KernelError::InvalidArgument(format!("block split {p}|{q} exceeds {}|{}", shape.m, shape.n)));
            }
            tw.minor(&Ladder::leading(shape.m, shape.n, p, q), upper, lower)
        }
    }
}
