use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kronspec::experiments::{
    estimate_pair, reproduce_figure, run_experiment, theory_suite, ExperimentConfig, FigureId, FigureOptions,
    TheoryOptions,
};
use kronspec::random::{generate_connected, GeneratorSpec, Model, DEFAULT_WS_BETA};
use kronspec::{Error, Graph, Ordering, OrderingKind};

#[derive(Parser)]
#[command(name = "kronspec", version = kronspec::experiments::VERSION, about = "Kronecker product graph spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a connected random graph and print its edge list.
    Generate {
        /// er, ws, ba or cycle.
        #[arg(long, default_value = "er")]
        model: Model,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long, default_value_t = 0.3)]
        density: f64,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_WS_BETA)]
        ws_beta: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact and estimated product spectra of two edge lists, as CSV.
    Estimate {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value = "correlated")]
        ordering: OrderingKind,
        #[arg(long, default_value_t = 0)]
        ordering_seed: u64,
        /// Adjacent swaps for the randomized orderings.
        #[arg(long)]
        swaps: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a Monte-Carlo experiment from a JSON config.
    Experiment {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Regenerate the data behind one figure (fig2 to fig8).
    Figure {
        id: FigureId,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(short, long, default_value_t = 1)]
        seed: u64,
    },
    /// Check the closed forms and inequalities numerically.
    Theory {
        #[arg(short, long, default_value = "kronspec-theory")]
        output_dir: PathBuf,
        #[arg(short, long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        mc_draws: Option<usize>,
        #[arg(long)]
        bound_graphs: Option<usize>,
    },
}

fn read_graph(path: &Path) -> Result<Graph, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    Graph::from_edge_list(&text)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|source| {
            Error::File {
                path: p.to_path_buf(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate {
            model,
            n,
            density,
            seed,
            ws_beta,
            output,
        } => {
            let spec = GeneratorSpec {
                ws_beta,
                ..GeneratorSpec::new(model, n, density, seed)
            };
            let g = generate_connected(&spec)?;
            let mut out = open_output(output.as_deref())?;
            out.write_all(g.to_edge_list().as_bytes())?;
            out.flush()?;
        }
        Command::Estimate {
            first,
            second,
            ordering,
            ordering_seed,
            swaps,
            output,
        } => {
            let ordering = Ordering::new(ordering, ordering_seed, swaps)?;
            let table = estimate_pair(&read_graph(&first)?, &read_graph(&second)?, &ordering)?;
            table.write_csv(open_output(output.as_deref())?)?;
        }
        Command::Experiment {
            config,
            output_dir,
            runs,
        } => {
            let text = fs::read_to_string(&config).map_err(|source| Error::File { path: config, source })?;
            let mut config: ExperimentConfig = serde_json::from_str(&text)?;
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            if runs.is_some() {
                config.runs = runs;
            }
            let bundle = run_experiment(&config)?;
            eprintln!(
                "{} runs in {:.1?}, config {}",
                bundle.records.len(),
                bundle.total_wall_time(),
                bundle.config_hash
            );
            for profile in &bundle.profiles {
                eprintln!(
                    "{}: mean |median error| {:.3}%, max {:.3}%",
                    profile.meta.series,
                    profile.mean_abs_median(),
                    profile.max_abs_median()
                );
            }
            println!("{}", config.output_dir.display());
        }
        Command::Figure {
            id,
            output_dir,
            runs,
            seed,
        } => {
            let dir = output_dir.unwrap_or_else(|| PathBuf::from(format!("kronspec-{id}")));
            let options = FigureOptions {
                master_seed: seed,
                runs,
            };
            let manifest = reproduce_figure(id, &dir, &options)?;
            for (panel, path) in &manifest.panels {
                println!("{panel}\t{}", dir.join(path).display());
            }
        }
        Command::Theory {
            output_dir,
            seed,
            mc_draws,
            bound_graphs,
        } => {
            let defaults = TheoryOptions::default();
            let options = TheoryOptions {
                seed,
                mc_draws: mc_draws.unwrap_or(defaults.mc_draws),
                bound_graphs: bound_graphs.unwrap_or(defaults.bound_graphs),
                ..defaults
            };
            let report = theory_suite(&output_dir, &options)?;
            for (id, check) in &report.checks {
                println!("{} {id}", if check.pass { "PASS" } else { "FAIL" });
            }
            if !report.all_passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            // Display already includes the wrapped cause.
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
