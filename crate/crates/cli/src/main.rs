/*!
`ghartree`: simulate and analyse the generalized Hartree equation.

```text
ghartree check-params --config run.cfg
ghartree simulate --config run.cfg --out results/
ghartree blowup-scan --config scan.cfg --jobs 4
ghartree scatter-demo --config scatter.cfg
ghartree verify-inequalities --seed 7
```

Exit status: 0 completed, 2 blow-up indicated, 3 resolution lost,
4 non-finite values, 1 a checked bound failed, 64 bad configuration,
74 an output could not be written.
*/

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ghartree_cli::{parse_config, run_experiment, Command, RunConfig, EXIT_CONFIG, EXIT_IO};

#[derive(Parser)]
#[command(name = "ghartree", version, about = "Generalized Hartree equation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Classify the parameters and print every admissibility check.
    CheckParams(Common),
    /// Run the preset named in the configuration.
    Simulate(Common),
    /// Evaluate the blow-up criterion over `scan.b`, optionally simulating each chirp.
    BlowupScan(Common),
    /// Integrate the pseudo-conformal flow and measure the scattering residual.
    ScatterDemo(Common),
    /// Run the weighted-inequality fixtures.
    VerifyInequalities(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parameter sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

const DEFAULT_SUITE: &str = "\
preset = inequality-suite
params.dim = 1
params.p = 1.8
params.gamma = 0.05
params.m = 0.55
params.M = 6
params.M0 = 4
";

fn load(command: Command, common: &Common) -> anyhow::Result<RunConfig> {
    let text = match (&common.config, command) {
        (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Command::VerifyInequalities) => DEFAULT_SUITE.to_string(),
        (None, _) => anyhow::bail!("--config is required for {}", command.as_str()),
    };
    let mut config = parse_config(&text)?;
    if let Some(out) = &common.out {
        config.output.dir = out.clone();
        config.entries.push(("override.out".into(), out.display().to_string()));
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
        config.entries.push(("override.seed".into(), seed.to_string()));
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::CheckParams(c) => (Command::CheckParams, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::BlowupScan(c) => (Command::BlowupScan, c),
        Sub::ScatterDemo(c) => (Command::ScatterDemo, c),
        Sub::VerifyInequalities(c) => (Command::VerifyInequalities, c),
    };
    let config = match load(command, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run_experiment(command, &config, common.jobs) {
        Ok(summary) => {
            print!("{}", summary.text);
            println!("outputs in {}", config.output.dir.display());
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == EXIT_IO {
                eprintln!("partial outputs kept in {}", config.output.dir.display());
            }
            ExitCode::from(code as u8)
        }
    }
}
