mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reeb_edit::distance::{brute_force_oracle, edit_distance, DistanceOptions};
use reeb_edit::homotopy::trace;
use reeb_edit::pseudodist::{pseudo_lower, pseudo_upper};
use reeb_edit::sweep::{run, to_csv, RunConfig};
use reeb_edit::{LabelledReebGraph, Tolerances};
use serde_json::json;

use io::{domain, emit_json, emit_text, read_config, read_function, read_graph, CliError};

/// Editing distance between labelled Reeb graphs of circle functions.
#[derive(Parser)]
#[command(name = "reeb-edit", version)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "REEB_EDIT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or realize Reeb graphs.
    #[command(subcommand)]
    Reeb(ReebCommand),
    /// Distances between graphs or functions.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Follow the straight-line homotopy from f to g and emit an edit script.
    Trace {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded stability sweep over random trig pairs, written as CSV.
    Sweep(SweepArgs),
    /// Check a graph or function; exit 1 names the first violated invariant.
    Validate {
        #[arg(long, conflicts_with = "f", required_unless_present = "f")]
        graph: Option<PathBuf>,
        #[arg(long)]
        f: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum ReebCommand {
    /// Labelled Reeb graph of a simple Morse function.
    Extract {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A piecewise-linear function with the given graph.
    Realize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DistCommand {
    /// Certified bounds on the editing distance between two graphs.
    Edit {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        /// Also run the exhaustive grid oracle (≤ 4 vertices, labels on the grid).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        #[arg(long, default_value_t = 5_000_000)]
        max_ops: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds on the natural pseudo-distance between two functions.
    Pseudo {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// JSON RunConfig; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    degree_min: Option<usize>,
    #[arg(long)]
    degree_max: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads(cli.threads).and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("REEB_EDIT_THREADS must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(())
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let tol = Tolerances::default();
    match command {
        Command::Reeb(ReebCommand::Extract { f, format, out }) => {
            let g = LabelledReebGraph::extract(&read_function(&f)?, &tol).map_err(domain)?;
            match format {
                GraphFormat::Json => emit_json(out.as_deref(), &g),
                GraphFormat::Dot => emit_text(out.as_deref(), &g.to_dot()),
            }
        }
        Command::Reeb(ReebCommand::Realize { graph, out }) => {
            emit_json(out.as_deref(), &read_graph(&graph)?.realize())
        }
        Command::Dist(DistCommand::Edit {
            g1,
            g2,
            oracle,
            grid,
            max_ops,
            out,
        }) => dist_edit(&g1, &g2, oracle.then_some((grid, max_ops)), out.as_deref()),
        Command::Dist(DistCommand::Pseudo { f, g, resolution, out }) => {
            let (f, g) = (read_function(&f)?, read_function(&g)?);
            let upper = pseudo_upper(&f, &g, resolution, &tol).map_err(domain)?;
            let alignment: Vec<[f64; 2]> = upper.pairs.iter().map(|&(a, b)| [a, b]).collect();
            emit_json(
                out.as_deref(),
                &json!({
                    "lower": pseudo_lower(&f, &g, &tol),
                    "upper": upper.cost,
                    "reversed": upper.reversed,
                    "alignment": alignment,
                }),
            )
        }
        Command::Trace { f, g, out } => {
            let r = trace(&read_function(&f)?, &read_function(&g)?).map_err(domain)?;
            emit_json(out.as_deref(), &r)
        }
        Command::Sweep(args) => sweep(args),
        Command::Validate { graph, f } => validate(graph.as_deref(), f.as_deref(), &tol),
    }
}

fn dist_edit(g1: &Path, g2: &Path, oracle: Option<(f64, usize)>, out: Option<&Path>) -> Result<(), CliError> {
    let (a, b) = (read_graph(g1)?, read_graph(g2)?);
    let start = Instant::now();
    let est = edit_distance(&a, &b, &DistanceOptions::default()).map_err(domain)?;
    let solver_s = start.elapsed().as_secs_f64();
    let (oracle_value, oracle_s) = match oracle {
        Some((grid, max_ops)) => {
            let start = Instant::now();
            let v = brute_force_oracle(&a, &b, grid, max_ops).map_err(domain)?;
            (Some(v), Some(start.elapsed().as_secs_f64()))
        }
        None => (None, None),
    };
    emit_json(
        out,
        &json!({
            "lower": est.lower,
            "upper": est.upper,
            "upper_source": est.upper_source,
            "witness_script": est.witness,
            "plan": est.plan,
            "oracle": oracle_value,
            "timings": { "solver_s": solver_s, "oracle_s": oracle_s },
        }),
    )
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut cfg: RunConfig = match &args.config {
        Some(p) => read_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(d) = args.degree_min {
        cfg.degree_range.0 = d;
    }
    if let Some(d) = args.degree_max {
        cfg.degree_range.1 = d;
    }
    if let Some(s) = args.scale {
        cfg.coefficient_scale = s;
    }
    cfg.validate().map_err(CliError::Domain)?;
    let rows = run(&cfg)?;
    emit_text(args.out.as_deref(), &to_csv(&cfg, &rows))?;
    let failed: Vec<usize> = rows.iter().filter(|r| !r.passed()).map(|r| r.trial).collect();
    eprintln!("{}/{} trials passed", rows.len() - failed.len(), rows.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(format!("stability bound failed on trials {failed:?}")))
    }
}

fn validate(graph: Option<&Path>, f: Option<&Path>, tol: &Tolerances) -> Result<(), CliError> {
    if let Some(p) = graph {
        let g = read_graph(p)?;
        println!("valid graph: {} vertices", g.len());
        return Ok(());
    }
    let f = read_function(f.expect("clap requires one input"))?;
    let report = f.genericity_report(tol);
    emit_json(None, &report)?;
    match report.violations.first() {
        Some(v) if !report.is_simple => Err(CliError::Domain(v.clone())),
        _ if !report.is_simple => Err(CliError::Domain("function is not simple Morse".into())),
        _ => Ok(()),
    }
}
