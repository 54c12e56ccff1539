mod construct;
mod demo;
mod play;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status 1: a rule violation, failed assertion or failed check.
/// Exit status 2: the arguments violate a precondition.
#[derive(Debug)]
pub enum Failure {
    Check(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

pub type Outcome = Result<(), Failure>;

pub fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Config(format!("{}: {e}", path.display()))
}

/// Output directory: the flag, else `CANTOR_GAMES_OUT`, else `.`.
pub fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("CANTOR_GAMES_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

#[derive(Parser)]
#[command(name = "cantor-games", version, about = "Weight-allocation games on Cantor space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play refereed matches and write traces and summaries.
    Play(play::PlayArgs),
    /// Build a random family and its parameter certificate.
    Construct(construct::ConstructArgs),
    /// Check a trace or family file offline.
    Verify(construct::VerifyArgs),
    /// Walk through the plain constructions.
    Demo(demo::DemoArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Play(a) => play::run(a),
        Command::Construct(a) => construct::construct(a),
        Command::Verify(a) => construct::verify(a),
        Command::Demo(a) => demo::run(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check(m) => eprintln!("error: {m}"),
                Failure::Config(m) => eprintln!("config error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
