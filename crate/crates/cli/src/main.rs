//! `triadne`: tables and verification reports from the command line.
//!
//! Every subcommand prints (or writes to `--out`) either a verification
//! report or a plot-ready table. The exit status is 1 when a report has a
//! failed hard check and 2 when the run itself errors.

mod checkpoint;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "triadne", version, about = "Counts, exponential sums and main terms for lattice equilateral triangles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Ambient dimension.
    #[arg(long, global = true, default_value_t = 7)]
    pub d: usize,
    /// Squared side length: a value, a list `a,b,c`, or an inclusive range `a..b`.
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    /// Secondary sweep (box sides, moduli, N values), same syntax as --lambda.
    #[arg(long, global = true)]
    pub range: Option<String>,
    /// Weyl sum truncation N.
    #[arg(long = "N", global = true)]
    pub n: Option<f64>,
    /// Arc parameter P, or the largest prime in an Euler product.
    #[arg(long = "P", global = true)]
    pub p: Option<u64>,
    /// Largest modulus in truncated series and major-arc sweeps.
    #[arg(long, global = true)]
    pub qmax: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Quadrature or stabilization tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seconds between checkpoint saves in long sweeps.
    #[arg(long, global = true, default_value_t = 60, hide = true)]
    pub checkpoint_secs: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// #V_λ over a range of λ, with the normalized count λ^{3-d}#V_λ.
    Count,
    /// Unordered equilateral triangles in the box [0,n]^d.
    TrianglesBox,
    /// Gauss-sum bound and weight-moment inequality over a range of moduli.
    GaussVerify {
        /// Exponents s for the weight moment.
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        s: Vec<f64>,
        /// Primitive triples per modulus before sampling kicks in.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Minor-arc scan and major-arc approximation sweep for Weyl sums.
    ArcsScan {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Arc system used to define the minor arcs.
        #[arg(long, value_enum, default_value = "m")]
        system: System,
        /// Restrict the minor-arc scan to η = 0.
        #[arg(long)]
        eta_zero: bool,
        /// Seeded centers in the major-arc sweep (0 skips it).
        #[arg(long, default_value_t = 300)]
        points: usize,
    },
    /// Scale-freeness of the singular integral and its sphere-transform identity.
    Lemma9 {
        /// Frequency ξ, comma separated (defaults to 0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
    },
    /// Singular series, local factors, multiplicativity and Hensel bounds.
    Singular,
    /// Exact multiplier T̂_λ(ξ, η) against the main-term multiplier M̂_λ(ξ).
    Multiplier {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Vec<f64>,
        /// Instead of a table, report the relative ℓ² distance between
        /// T_λδ₀ and M_λδ₀ on the torus of this side length.
        #[arg(long)]
        box_side: Option<u64>,
        /// Frequency samples for the distance estimate.
        #[arg(long, default_value_t = 4000)]
        samples: usize,
    },
    /// Averages T_λ f and dyadic maximal functions with ℓ^p norm tables.
    Operator {
        /// Input grid function as JSON (defaults to the point mass at 0).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Use the dyadic maximal function with Λ = λ instead of T_λ.
        #[arg(long)]
        maximal: bool,
        /// Exponents p for the ℓ^p norm table.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,inf")]
        norms: Vec<String>,
        /// Write the output grid function as JSON here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// J_{s,2,2}(N) and T(N) growth tables.
    Moments {
        #[arg(long, default_value_t = 4)]
        s: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum System {
    M,
    N,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
