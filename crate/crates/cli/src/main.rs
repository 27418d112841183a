use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropcount::counting::{candidate_types, count};
use tropcount::hurwitz::{hurwitz_symmetric, hurwitz_tropical, Partition};
use tropcount::problem::Problem;
use tropcount::verify::{random_point, run_suite, Level};
use tropcount_cli::report::{self, CountContext};
use tropcount_cli::{parse_problem, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "tropcount", version, about = "Exact counts of rigid tropical curves with psi conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count the tropical curves matching a problem file.
    Count {
        file: PathBuf,
        /// Divide by the number of end relabelings preserving the degree.
        #[arg(long)]
        unlabeled: bool,
        /// Translate every constraint by a pseudo-random offset first.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the candidate combinatorial types for a problem file.
    Enumerate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Double Hurwitz number, tropically and by counting factorizations.
    Hurwitz {
        g: usize,
        /// Ramification over 0, as comma-separated parts (e.g. 2,1,1).
        alpha: String,
        /// Ramification over infinity.
        beta: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the built-in reference checks.
    Verify {
        /// Also count plane cubics (slow).
        #[arg(long)]
        extended: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn read_problem(path: &PathBuf) -> Result<Problem, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_problem(&text)
}

fn seeded(problem: &Problem, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.n();
    let markings: Vec<_> = problem.markings().iter().map(|_| random_point(&mut rng, n)).collect();
    let boundary: Vec<_> = problem.boundary().iter().map(|_| random_point(&mut rng, n)).collect();
    problem.translated(&markings, &boundary)
}

fn partition(text: &str) -> Result<Partition, CliError> {
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| CliError::Syntax(format!("`{text}` is not a list of positive integers"))))
        .collect::<Result<Vec<_>, _>>()?;
    if parts.contains(&0) {
        return Err(CliError::Syntax(format!("`{text}` has a zero part")));
    }
    Ok(Partition::new(parts)?)
}

fn machine<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

/// Returns the text to print and whether the command succeeded.
fn run(cli: Cli) -> Result<(String, bool), CliError> {
    match cli.command {
        Command::Count { file, unlabeled, seed, format } => {
            let input = read_problem(&file)?;
            let problem = match seed {
                Some(s) => seeded(&input, s),
                None => input.clone(),
            };
            let result = count(&problem)?;
            let ctx = CountContext { input: &input, seed, unlabeled };
            Ok(match format {
                Format::Text => (report::count_text(&ctx, &result), true),
                Format::Machine => (machine(&report::count_json(&ctx, &result)), true),
            })
        }
        Command::Enumerate { file, format } => {
            let problem = read_problem(&file)?;
            let catalog = candidate_types(&problem)?;
            Ok(match format {
                Format::Text => (report::catalog_text(&catalog), true),
                Format::Machine => (machine(&report::catalog_json(&problem, &catalog)), true),
            })
        }
        Command::Hurwitz { g, alpha, beta, format } => {
            let (alpha, beta) = (partition(&alpha)?, partition(&beta)?);
            let tropical = hurwitz_tropical(g, &alpha, &beta)?;
            let symmetric = hurwitz_symmetric(g, &alpha, &beta)?;
            let agree = tropical == symmetric;
            Ok(match format {
                Format::Text => (report::hurwitz_text(&tropical, &symmetric), agree),
                Format::Machine => (machine(&report::hurwitz_json(&tropical, &symmetric)), agree),
            })
        }
        Command::Verify { extended, format } => {
            let suite = run_suite(if extended { Level::Extended } else { Level::Basic });
            let ok = suite.all_passed();
            Ok(match format {
                Format::Text => (report::verify_text(&suite), ok),
                Format::Machine => (machine(&report::verify_json(&suite)), ok),
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((out, ok)) => {
            print!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
