use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nomcrs::{CheckKind, Direction, Outcome, System, DEFAULT_SIGMA_BOUND, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "nomcrs", version, about = "Translate and rewrite nominal rewriting systems and CRSs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Nrs2crs,
    Crs2nrs,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Nrs2crs => Direction::Nrs2Crs,
            Dir::Crs2nrs => Direction::Crs2Nrs,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sys {
    Nrs,
    Crs,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Closed,
    Alpha,
    Fresh,
    CrsRule,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate a rule file.
    Translate {
        #[arg(long, value_enum)]
        dir: Dir,
        /// Append the explicit substitution rules (crs2nrs).
        #[arg(long)]
        with_sigma: bool,
        input: PathBuf,
        output: PathBuf,
    },
    /// Rewrite a term (or a named `term` from the rules file).
    Rewrite {
        #[arg(long, value_enum)]
        sys: Sys,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        steps: Option<usize>,
        /// Single step at this position, e.g. 1.2
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        trace: bool,
    },
    /// Decide a judgement: closed "ctx |- t", alpha "ctx |- s ~ t", fresh "ctx |- a # t",
    /// crs-rule "l => r".
    Check {
        #[arg(value_enum)]
        what: What,
        arg: String,
    },
    /// CRS to NRS and back for every rule of a CRS file.
    Roundtrip { input: PathBuf },
    /// Step in one formalism and look for the corresponding step in the other.
    Simulate {
        #[arg(long, value_enum)]
        dir: Dir,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Bound on closed steps per simulated CRS step (crs2nrs).
        #[arg(long, default_value_t = DEFAULT_SIGMA_BOUND)]
        k: usize,
    },
}

fn read(path: &PathBuf) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: format!("error: {}: {e}\n", path.display()),
    })
}

fn run(cli: Cli) -> Result<Outcome, Outcome> {
    Ok(match cli.cmd {
        Cmd::Translate { dir, with_sigma, input, output } => {
            let o = nomcrs::translate(dir.into(), &read(&input)?, with_sigma);
            if o.code == EXIT_OK || !o.stdout.is_empty() {
                std::fs::write(&output, &o.stdout).map_err(|e| Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: format!("error: {}: {e}\n", output.display()),
                })?;
            }
            Outcome { stdout: String::new(), ..o }
        }
        Cmd::Rewrite { sys, rules, term, steps, at, trace } => {
            let sys = match sys {
                Sys::Nrs => System::Nrs,
                Sys::Crs => System::Crs,
            };
            nomcrs::rewrite(sys, &read(&rules)?, &term, steps, at.as_deref(), trace)
        }
        Cmd::Check { what, arg } => {
            let kind = match what {
                What::Closed => CheckKind::Closed,
                What::Alpha => CheckKind::Alpha,
                What::Fresh => CheckKind::Fresh,
                What::CrsRule => CheckKind::CrsRule,
            };
            nomcrs::check(kind, &arg)
        }
        Cmd::Roundtrip { input } => nomcrs::roundtrip(&read(&input)?),
        Cmd::Simulate { dir, rules, term, steps, k } => nomcrs::simulate(dir.into(), &read(&rules)?, &term, steps, k),
    })
}

fn main() -> ExitCode {
    let o = run(Cli::parse()).unwrap_or_else(|o| o);
    print!("{}", o.stdout);
    eprint!("{}", o.stderr);
    ExitCode::from(o.code as u8)
}
