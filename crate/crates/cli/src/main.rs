//! `pmod`: validate, condense and decompose persistence modules stored as JSON.
//!
//! Exit codes: 0 when the property holds, 1 when it fails (with a JSON
//! diagnostic on stdout), 2 on malformed input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "pmod", version, about = "Exact persistence modules on finite grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check matrix shapes and square commutativity.
    Validate { file: PathBuf },
    /// Detect the isotopy subdivision and its chamber poset.
    Chambers {
        file: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Condense a module to its chamber poset and certify the isomorphism.
    Condense {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use this subdivision instead of detecting one.
        #[arg(long)]
        subdivision: Option<PathBuf>,
    },
    /// Split a thin module into summands and check each is an interval module.
    ThinDecompose {
        file: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhibit a thin connected module as isomorphic to an interval module.
    IntervalIso { file: PathBuf },
    /// Basis of Hom(A, B).
    Hom { a: PathBuf, b: PathBuf },
    /// Dimension of End(M).
    End { file: PathBuf },
    /// Write a generated module.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Parameter of ex-dim3.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid size such as 8x8.
        #[arg(long)]
        shape: Option<String>,
        /// prime:P or rational
        #[arg(long, default_value = "rational")]
        field: String,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 6)]
        chambers: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Random change of basis at every cell (inflate only).
        #[arg(long)]
        twist: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        subdivision_out: Option<PathBuf>,
    },
    /// Draw chambers or thin supports as SVG.
    Render {
        file: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    Interval,
    RandomThin,
    Inflate,
    ExDim3,
    FixtureAxesCross,
    FixturePunctured,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum What {
    Chambers,
    Support,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Chambers { file, svg } => commands::chambers(&file, svg.as_deref()),
        Command::Condense { file, out, subdivision } => commands::condense(&file, &out, subdivision.as_deref()),
        Command::ThinDecompose { file, report, trials, seed } => commands::thin_decompose(&file, report.as_deref(), trials, seed),
        Command::IntervalIso { file } => commands::interval_iso(&file),
        Command::Hom { a, b } => commands::hom(&a, &b),
        Command::End { file } => commands::end(&file),
        Command::Gen { kind, m, seed, shape, field, density, chambers, max_dim, twist, out, subdivision_out } => {
            commands::gen(commands::GenArgs {
                kind,
                m,
                seed,
                shape,
                field,
                density,
                chambers,
                max_dim,
                twist,
                out,
                subdivision_out,
            })
        }
        Command::Render { file, what, svg } => commands::render(&file, what, &svg),
    };
    let (code, body) = outcome.into_parts();
    print!("{}", pmod_core::io::to_canonical_string(&body));
    ExitCode::from(code)
}
