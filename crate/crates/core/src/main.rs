use std::path::PathBuf;
use std::process::ExitCode;

use carnot_flow::cli::{self, CliError, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "carnot-flow", version, about = "Fractional transport-diffusion lab on H¹ and ℝⁿ")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (default out/<scenario>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the rayon pool.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print what a scenario checks and which files it writes.
    Describe { scenario: String },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.message());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Parse(e.to_string().trim().to_string())),
    };
    match args.cmd {
        Cmd::Describe { scenario } => match cli::describe(&scenario) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Run { config, out, seed, threads } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail(CliError::Runtime(e.to_string()));
                }
            }
            match cli::run_path(&config, &Overrides { out, seed }) {
                Ok(o) => {
                    for v in &o.verdicts {
                        println!("{} {}", if v.pass() { "PASS" } else { "FAIL" }, v.name);
                    }
                    println!("{} -> {}", o.scenario.name(), o.out_dir.display());
                    ExitCode::from(o.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
    }
}
