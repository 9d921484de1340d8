use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mfelab_cli::commands::{self, Output};
use mfelab_cli::config::RunConfig;
use mfelab_cli::CliError;

#[derive(Parser)]
#[command(name = "mfelab", version, about = "Mean field equation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print records as JSON instead of key: value lines.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the Robin maximizer and decide the kind of the domain.
    Classify(RunConfig),
    /// Follow the minimizer branch towards 8π.
    Branch(RunConfig),
    /// Check the Bol inequality on level sets of one solution.
    Bol {
        #[command(flatten)]
        run: RunConfig,
        /// Evaluate the conical counterexample instead.
        #[arg(long)]
        counterexample: bool,
    },
    /// Rearrange a solution into the bubble frame.
    Symmetrize(RunConfig),
    /// Thermodynamic tables and Legendre checks along the branch.
    Ensemble(RunConfig),
    /// Bol margin of the conical counterexample.
    Counterexample(RunConfig),
    /// Triangulate the domain.
    Mesh(RunConfig),
}

fn print(out: &Output, json: bool) {
    if json {
        println!("{}", serde_json::to_string(&out.record).expect("record serializes"));
        return;
    }
    if let Some(map) = out.record.as_object() {
        for (k, v) in map {
            println!("{k}: {v}");
        }
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

type Handler = fn(&RunConfig) -> Result<Output, CliError>;

fn run(cli: Cli) -> Result<Output, CliError> {
    let (run, pick): (RunConfig, Handler) = match cli.command {
        Command::Classify(c) => (c, commands::cmd_classify),
        Command::Branch(c) => (c, commands::cmd_branch),
        Command::Bol { run, counterexample: true } => (run, commands::cmd_counterexample),
        Command::Bol { run, .. } => (run, commands::cmd_bol),
        Command::Symmetrize(c) => (c, commands::cmd_symmetrize),
        Command::Ensemble(c) => (c, commands::cmd_ensemble),
        Command::Counterexample(c) => (c, commands::cmd_counterexample),
        Command::Mesh(c) => (c, commands::cmd_mesh),
    };
    let cfg = match &cli.config {
        Some(path) => run.overridden_by(path)?,
        None => run,
    };
    cfg.validate()?;
    pick(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            print(&out, json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
