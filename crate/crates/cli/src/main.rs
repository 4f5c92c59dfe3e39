use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volmorph_cli::run::{properties_out_dir, SUITES};
use volmorph_cli::{load_scenario, run_orbit, run_properties, run_scenario, Exit};

/// Invariant metrics of volume-preserving maps by ergodic means.
///
/// Exit codes: 0 ok, 1 i/o or numerical failure, 2 configuration or usage
/// error, 3 diverging orbit, 4 max iterations, 5 property failure.
#[derive(Parser)]
#[command(name = "volmorph", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for an invariant metric. CONFIG is a scenario file or a bundled
    /// name: identity, rot4-random16, catmap-unbounded.
    Solve { config: String },

    /// Run property suites on S (n = 2, 3) and on a 16x16 field grid.
    Properties {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Trials per check (default: 10000 for npc and equiconvexity, 100 otherwise).
        #[arg(long)]
        trials: Option<usize>,
        /// Output directory (default: $VOLMORPH_OUT_DIR, else volmorph-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Print distances along the orbit of the initial field as CSV.
    Orbit {
        config: String,
        #[arg(long = "n")]
        count: usize,
    },
}

fn exit(code: Exit) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return exit(Exit::Config);
        }
    }
    match cli.command {
        Command::Solve { config } => {
            let scenario = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(Exit::Config);
                }
            };
            match run_scenario(&scenario) {
                Ok(o) => {
                    let r = &o.report;
                    let n = r.n_values.last().copied().unwrap_or(0);
                    let res = r
                        .final_residual()
                        .map_or("-".to_string(), |v| format!("{v:e}"));
                    println!(
                        "{}: {} after {} iterates (residual {res}, orbit screened to {}); artifacts in {}",
                        scenario.name,
                        r.verdict,
                        n,
                        r.orbit_diameter_curve.len(),
                        o.out_dir.display()
                    );
                    exit(o.exit)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(e.exit())
                }
            }
        }
        Command::Properties {
            suite,
            seed,
            trials,
            out,
        } => match run_properties(&suite, seed, trials, &properties_out_dir(out)) {
            Ok(o) => {
                for r in &o.reports {
                    println!(
                        "{} {:<22} {:<16} trials {:>6}  max violation {:>12.3e}  (tol {:e})",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.property.name(),
                        r.space,
                        r.trials,
                        r.max_violation,
                        r.tolerance
                    );
                }
                println!("reports in {}", o.path.display());
                exit(o.exit)
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(e.exit())
            }
        },
        Command::Orbit { config, count } => {
            let scenario = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(Exit::Config);
                }
            };
            match run_orbit(&scenario, count) {
                Ok(csv) => {
                    print!("{csv}");
                    exit(Exit::Ok)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(e.exit())
                }
            }
        }
    }
}
