use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaplab::construction::StageSchedule;
use gaplab::gapstats::ReferenceKind;

mod commands;
mod output;
mod verify;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "gaplab", version)]
#[command(about = "Gap statistics and the interval-swap construction")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// RNG seed
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Stage sizes N_1,N_2,...
    #[arg(long, global = true, default_value = "100,10000,1000000")]
    pub schedule: StageSchedule,

    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Iid,
    Rn,
    ConstructX,
    ConstructZ,
    SortedGapArray,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    Exponential,
    Gamma2,
    Uniform,
}

impl From<Reference> for ReferenceKind {
    fn from(r: Reference) -> Self {
        match r {
            Reference::Exponential => ReferenceKind::Exponential,
            Reference::Gamma2 => ReferenceKind::Gamma2,
            Reference::Uniform => ReferenceKind::Uniform,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a point file
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of points (defaults to 2 N_K for rn and construct-*)
        #[arg(long)]
        n: Option<usize>,
        /// Base point file for sorted-gap-array (i.i.d. from --seed otherwise)
        #[arg(long)]
        base: Option<PathBuf>,
        /// Key-condition window for the diagnostics sidecar
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long, default_value_t = 1000.0)]
        b: f64,
    },
    /// Empirical gap CDF against a reference law
    Gapcdf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Reference::Exponential)]
        reference: Reference,
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 500)]
        s_steps: usize,
    },
    /// Star discrepancy
    Discrepancy {
        #[arg(long)]
        input: PathBuf,
    },
    /// Pair correlation against the Poissonian value 2s
    Paircorr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        s_max: f64,
        #[arg(long, default_value_t = 30)]
        s_steps: usize,
    },
    /// Bias and gap-class diagnostics of a fresh construction run
    Diagnostics {
        #[arg(long, default_value_t = 10.0)]
        a: f64,
        #[arg(long, default_value_t = 1000.0)]
        b: f64,
        /// Single stage; all stages when absent
        #[arg(long)]
        stage: Option<usize>,
    },
    /// Moment functional of a point file
    Moments {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "m", value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        k: Vec<u32>,
        /// Also dump the descendant index of the first (M, N) pair
        #[arg(long)]
        descendants: Option<PathBuf>,
    },
    /// Check a construction run file
    Verify {
        /// `.run.csv` files written by `generate --kind construct-*`
        #[arg(long, required = true, num_args = 1..)]
        run: Vec<PathBuf>,
        /// Coarse sizes for the x/z moment comparison
        #[arg(long, value_delimiter = ',', default_value = "10,100")]
        moments_m: Vec<usize>,
        /// Fail when the final-stage left fraction is not above 1/2
        #[arg(long)]
        require_bias: bool,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("GAPLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let g = &cli.global;
    match cli.command {
        Command::Generate { kind, n, base, a, b } => commands::generate(g, kind, n, base, a, b),
        Command::Gapcdf {
            input,
            reference,
            s_max,
            s_steps,
        } => commands::gapcdf(g, &input, reference.into(), s_max, s_steps),
        Command::Discrepancy { input } => commands::discrepancy(g, &input),
        Command::Paircorr {
            input,
            s_max,
            s_steps,
        } => commands::paircorr(g, &input, s_max, s_steps),
        Command::Diagnostics { a, b, stage } => commands::diagnostics(g, a, b, stage),
        Command::Moments {
            input,
            m,
            n,
            k,
            descendants,
        } => commands::moments(g, &input, &m, &n, &k, descendants),
        Command::Verify {
            run,
            moments_m,
            require_bias,
        } => verify::verify(g, &run, &moments_m, require_bias),
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
