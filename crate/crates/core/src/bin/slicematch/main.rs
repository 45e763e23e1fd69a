//! `slicematch` command-line front end.
//!
//! Every random draw derives from the single `--seed` of an invocation via
//! `stream_rng(seed, domain, index)`; the domains are listed in the README.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use slicematch::Error;

#[derive(Parser)]
#[command(name = "slicematch", version, about = "Slice-matching and sliced optimal transport for point clouds and images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the slice-matching operator U(src, dst, P) once.
    #[command(group(ArgGroup::new("basis").required(true).args(["ortho", "seed", "angle"])))]
    Match {
        src: PathBuf,
        dst: PathBuf,
        /// Orthogonal matrix as a headerless CSV of rows.
        #[arg(long)]
        ortho: Option<PathBuf>,
        /// Draw a Haar matrix (the same one `iterate` uses at step 0).
        #[arg(long)]
        seed: Option<u64>,
        /// 2-D rotation basis with rows (cos a, sin a), (−sin a, cos a).
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the iterative slice-matching scheme.
    Iterate {
        src: PathBuf,
        dst: PathBuf,
        /// `const:γ` or `harmonic:c`.
        #[arg(long, default_value = "const:1.0")]
        schedule: String,
        #[arg(long, value_enum, default_value_t = SamplerArg::Matrix)]
        sampler: SamplerArg,
        /// Number of steps K (at least 1).
        #[arg(short = 'K', long = "iterations")]
        iterations: usize,
        #[arg(long)]
        seed: u64,
        /// Stop once the sliced residual falls below this.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Record the exact W2 to the target at each step when supported.
        #[arg(long)]
        exact_w2: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form registration; prints a JSON report.
    Register {
        src: PathBuf,
        dst: PathBuf,
        /// `translation`, `scale-shift` or `axis:PATH` with PATH an orthogonal matrix CSV.
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value_t = DistanceArg::W2)]
        distance: DistanceArg,
        #[arg(long, default_value_t = 1000)]
        dirs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Exit with status 5 when the result is flagged degenerate.
        #[arg(long)]
        strict: bool,
    },
    /// Exact W2 between two equal-size uniform clouds.
    W2 { a: PathBuf, b: PathBuf },
    /// Monte-Carlo sliced W2.
    Sw2 {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1000)]
        dirs: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Print a Haar-random orthogonal matrix as CSV.
    MakeOrtho {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Aggregate iteration traces into a per-step table and a decay plot.
    Report {
        #[arg(required = true, num_args = 1..)]
        traces: Vec<PathBuf>,
        /// Target measure; adds the squared mean offset ratio per step.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Matrix,
    Direction,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistanceArg {
    W2,
    Sw2,
}

/// Failure with its process exit status.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Failure {
            code: 5,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => 1,
            Error::InvalidArgument(_) => 2,
            Error::Unsupported(_) => 4,
            Error::Degenerate(_) => 5,
            Error::DimensionMismatch { .. }
            | Error::InvalidMeasure(_)
            | Error::InvalidDirection(_)
            | Error::NotOrthogonal(_)
            | Error::QuantileOutOfRange(_)
            | Error::Parse(_)
            | Error::Image(_) => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Match {
            src,
            dst,
            ortho,
            seed,
            angle,
            out,
        } => {
            let basis = match (ortho, seed, angle) {
                (Some(path), _, _) => commands::BasisSource::File(path),
                (_, Some(s), _) => commands::BasisSource::Haar(s),
                (_, _, Some(a)) => commands::BasisSource::Angle(a),
                _ => unreachable!("clap enforces one basis source"),
            };
            commands::cmd_match(&src, &dst, basis, &out)
        }
        Command::Iterate {
            src,
            dst,
            schedule,
            sampler,
            iterations,
            seed,
            tol,
            exact_w2,
            out,
        } => commands::cmd_iterate(
            &commands::IterateArgs {
                src,
                dst,
                schedule,
                sampler: match sampler {
                    SamplerArg::Matrix => slicematch::Sampler::HaarMatrix,
                    SamplerArg::Direction => slicematch::Sampler::UniformDirection,
                },
                iterations,
                seed,
                tol,
                exact_w2,
            },
            &out,
        ),
        Command::Register {
            src,
            dst,
            model,
            distance,
            dirs,
            seed,
            strict,
        } => {
            let kind = match distance {
                DistanceArg::W2 => slicematch::DistanceKind::W2,
                DistanceArg::Sw2 => slicematch::DistanceKind::SW2,
            };
            commands::cmd_register(&src, &dst, &model, kind, dirs, seed, strict)
        }
        Command::W2 { a, b } => commands::cmd_w2(&a, &b),
        Command::Sw2 { a, b, dirs, seed } => commands::cmd_sw2(&a, &b, dirs, seed),
        Command::MakeOrtho { dim, seed } => commands::cmd_make_ortho(dim, seed),
        Command::Report { traces, target, out } => commands::cmd_report(&traces, target.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
