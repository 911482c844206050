use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varcheck_cli::{preset, run, CliError, Command, Flags, Input};

#[derive(Parser)]
#[command(name = "varcheck", version, about = "Second-order calculus of variations: solve, check optimality conditions, certify regularity, probe the Lavrentiev gap")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize the functional on refined Hermite meshes.
    Solve(Common),
    /// Integral duBois-Reymond and Euler-Lagrange profiles along a trajectory.
    CheckConditions {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV to check instead of a fresh solve.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Sampled regularity certificates for the Lagrangian.
    CheckRegularity(Common),
    /// Compare unconstrained and |xdd|-capped infima under refinement.
    ProbeLavrentiev(Common),
    /// Print a preset problem file.
    Preset { name: String },
}

#[derive(Args)]
struct Common {
    /// Problem file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    file: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "varcheck-out")]
    out: PathBuf,
    #[arg(long)]
    mesh: Option<usize>,
    #[arg(long)]
    refinements: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Profile grid size.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long)]
    cap: Option<f64>,
}

fn input(c: &Common) -> Result<Input, CliError> {
    match (&c.preset, &c.file) {
        (Some(name), _) => Ok(Input {
            label: name.clone(),
            text: preset(name)?,
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let label = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            Ok(Input { label, text })
        }
        (None, None) => Err(CliError::Usage("a problem file or --preset is required".into())),
    }
}

fn flags(c: &Common) -> Flags {
    Flags {
        mesh: c.mesh,
        refinements: c.refinements,
        grad_tol: c.grad_tol,
        seed: c.seed,
        grid: c.grid,
        cap: c.cap,
        ..Flags::new(&c.out)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, trajectory) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c, None),
        Cmd::CheckConditions { common, trajectory } => (Command::CheckConditions, common, trajectory),
        Cmd::CheckRegularity(c) => (Command::CheckRegularity, c, None),
        Cmd::ProbeLavrentiev(c) => (Command::ProbeLavrentiev, c, None),
        Cmd::Preset { name } => {
            return match preset(&name) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
    };
    let result = input(&common).and_then(|inp| {
        let f = Flags {
            trajectory,
            ..flags(&common)
        };
        run(cmd, &inp, &f)
    });
    match result {
        Ok(summary) => {
            if let Some(e) = &summary.error {
                eprintln!("error: {e}");
            } else if summary.exit_code == 3 {
                eprintln!("warning: solver did not converge");
            }
            println!("{}", serde_json::to_string_pretty(&summary.results).unwrap_or_default());
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
