use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toric_sde_cli::verify::parse_grid;
use toric_sde_cli::{CensusBounds, CliError, CliResult, Document, Outcome, Tolerances, VerifyOptions};

/// Classification and numerical verification of toric selfdual Einstein
/// orbifolds. Worker threads follow RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(name = "toric-sde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// JSON document: a file path, `-` for stdin, or the document itself.
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// Validity, topology, admissibility verdict, weights and kernel lattice.
    Classify(Input),
    /// Isotropy data to multipole weights, or weights to isotropy data.
    Convert(Input),
    /// Eigenfunction, det Phi, Poisson and curvature checks on a grid.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = Tolerances::default().eigen)]
        tol_eigen: f64,
        #[arg(long, default_value_t = Tolerances::default().curvature)]
        tol_curv: f64,
        /// RHO0:RHO1:N,ETA0:ETA1:N
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CSV `eta,f0,slope` of the boundary value.
    BoundaryPlot {
        #[command(flatten)]
        input: Input,
        /// Interior samples per affine piece.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Enumerate isotropy data with entries bounded by N and length up to K.
    Census {
        #[arg(short = 'n', long, default_value_t = 2)]
        max_entry: i64,
        #[arg(short = 'k', long, default_value_t = 4)]
        max_k: usize,
    },
}

fn read_input(input: &Input) -> CliResult<Document> {
    let text = if input.input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else if input.input.trim_start().starts_with('{') {
        input.input.clone()
    } else {
        std::fs::read_to_string(&input.input)?
    };
    Document::parse(&text)
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Parse(format!("{name} must be positive, got {x}")))
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Classify(input) => toric_sde_cli::classify(&read_input(&input)?),
        Command::Convert(input) => toric_sde_cli::convert(&read_input(&input)?),
        Command::Verify { input, tol_eigen, tol_curv, grid, seed } => {
            let opts = VerifyOptions {
                tolerances: Tolerances {
                    eigen: positive("--tol-eigen", tol_eigen)?,
                    curvature: positive("--tol-curv", tol_curv)?,
                    ..Tolerances::default()
                },
                grid: grid.as_deref().map(parse_grid).transpose()?,
                seed,
                ..VerifyOptions::default()
            };
            toric_sde_cli::verify(&read_input(&input)?, &opts)
        }
        Command::BoundaryPlot { input, samples } => toric_sde_cli::boundary_plot(&read_input(&input)?, samples),
        Command::Census { max_entry, max_k } => toric_sde_cli::census(CensusBounds { max_entry, max_k }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("note: {note}");
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.body.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code() as u8)
        }
    }
}
