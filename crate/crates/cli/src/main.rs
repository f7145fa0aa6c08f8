//! `micrograin` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 generation failure (WFC ran out
//! of attempts, seed spacing saturated), 3 I/O or file-format error.

mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use micrograin::Error;

use commands::{
    CompareArgs, IngestArgs, MarkovArgs, RecolorArgs, SweepArgs, SynthArgs, VoronoiArgs, WfcArgs,
};

#[derive(Debug, Parser)]
#[command(
    name = "micrograin",
    version,
    about = "Grain statistics and procedural regeneration of orientation maps"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantize an image, segment grains and write their statistics
    Ingest(IngestArgs),
    /// Generate a map with overlapping wave function collapse
    Wfc(WfcArgs),
    /// Run WFC over a grid of tile sizes and pattern widths
    Sweep(SweepArgs),
    /// Run a rewrite-rule program, or grow grains from centroids
    Markov(MarkovArgs),
    /// Nearest-centroid tessellation in 2D or 3D
    Voronoi(VoronoiArgs),
    /// Regenerate a microstructure from ingested statistics and report on it
    Synth(SynthArgs),
    /// Compare two label maps drawn with one palette
    Compare(CompareArgs),
    /// Relabel a map through a label-to-label table
    Recolor(RecolorArgs),
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) => 1,
        Error::WfcFailure { .. } | Error::Saturation { .. } => 2,
        Error::Io { .. } | Error::CorruptFile { .. } | Error::UnsupportedFormat { .. } => 3,
    }
}

fn run(argv: Vec<OsString>) -> Result<(), Error> {
    let argv = config::inject(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::InvalidInput(e.to_string().trim_end().to_string())),
    };
    eprintln!("resolved configuration: {:#?}", cli.command);
    match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Wfc(a) => commands::wfc(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Markov(a) => commands::markov(a),
        Command::Voronoi(a) => commands::voronoi(a),
        Command::Synth(a) => commands::synth(a),
        Command::Compare(a) => commands::compare(a),
        Command::Recolor(a) => commands::recolor(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
