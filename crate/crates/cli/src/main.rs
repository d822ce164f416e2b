use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parkrrt::{load_scenario, render_svg, run_trials, write_csv, CostMode, OptMode, Planner, PlannerConfig, SvgLayers};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "parkrrt",
    version,
    about = "RRT* parking path planner with Reeds-Shepp steering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan once and report the path.
    Plan(PlanArgs),
    /// Run seeded trials and report statistics.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NnCost {
    Euclidean,
    Rs,
    RsFlat,
}

impl From<NnCost> for CostMode {
    fn from(v: NnCost) -> Self {
        match v {
            NnCost::Euclidean => CostMode::Euclidean,
            NnCost::Rs => CostMode::ReedsShepp,
            NnCost::RsFlat => CostMode::ReedsSheppFlatHeading,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Opt {
    None,
    Smart,
    Dijkstra,
}

impl From<Opt> for OptMode {
    fn from(v: Opt) -> Self {
        match v {
            Opt::None => OptMode::None,
            Opt::Smart => OptMode::Smart,
            Opt::Dijkstra => OptMode::Dijkstra,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Time budget per run, seconds.
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    #[arg(long, value_enum, default_value = "euclidean")]
    nn_cost: NnCost,
    #[arg(long, value_enum, default_value = "dijkstra")]
    opt: Opt,
}

impl Common {
    fn config(&self) -> PlannerConfig {
        PlannerConfig {
            tmax: self.tmax,
            cost_mode: self.nn_cost.into(),
            opt_mode: self.opt.into(),
            ..PlannerConfig::default()
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG figure of the scenario, tree and paths.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Stop after this many iterations (for reproducible figures).
    #[arg(long)]
    max_iterations: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed0: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Write per-trial rows here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failures caused by the caller's input; they exit with status 2.
struct InputError(anyhow::Error);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn input<T>(r: Result<T>) -> Result<T, InputError> {
    r.map_err(InputError)
}

fn cmd_plan(args: PlanArgs) -> Result<ExitCode, InputError> {
    let spec = input(load_scenario(&args.common.scenario).map_err(Into::into))?;
    let scenario = input(spec.instantiate(args.seed).context("instantiating scenario"))?;
    let config = PlannerConfig {
        rng_seed: args.seed,
        max_iterations: args.max_iterations,
        ..args.common.config()
    };
    let mut planner = input(Planner::new(&scenario, &spec.car, &config).map_err(Into::into))?;
    let elapsed = planner.run();
    let res = planner.finish(elapsed);

    if res.goal_found {
        println!(
            "goal found in {:.4} s after {} iterations ({} nodes)",
            res.elapsed_to_first_path,
            res.iterations,
            planner.tree().len()
        );
        println!(
            "cost {:.4} m before optimization, {:.4} m after",
            res.pre_opt_cost.unwrap_or(f64::NAN),
            res.post_opt_cost.unwrap_or(f64::NAN)
        );
    } else {
        println!(
            "goal not found after {} iterations ({:.4} s)",
            res.iterations, res.elapsed_to_first_path
        );
    }

    if let Some(path) = &args.out {
        let doc = json!({
            "seed": args.seed,
            "goal_found": res.goal_found,
            "time_s": res.elapsed_to_first_path,
            "iterations": res.iterations,
            "nodes": planner.tree().len(),
            "pre_cost": res.pre_opt_cost,
            "post_cost": res.post_opt_cost,
            "nn_mode": config.cost_mode,
            "opt_mode": config.opt_mode,
            "raw_path": res.raw_path,
            "path": res.path,
        });
        let text = serde_json::to_string_pretty(&doc).expect("json value serializes");
        input(std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())))?;
    }
    if let Some(path) = &args.svg {
        let layers = SvgLayers {
            tree: Some(planner.tree()),
            path: res.goal_found.then_some(&res.raw_path[..]),
            opath: res.goal_found.then_some(&res.path[..]),
            steer_step: config.steer_step,
        };
        let svg = render_svg(&scenario, &spec.car, layers);
        input(std::fs::write(path, svg).with_context(|| format!("writing {}", path.display())))?;
    }
    Ok(if res.goal_found {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, InputError> {
    let spec = input(load_scenario(&args.common.scenario).map_err(Into::into))?;
    let parallelism = args
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = args.common.config();
    let (records, summary) =
        input(run_trials(&spec, &config, args.trials, args.seed0, parallelism).map_err(Into::into))?;
    match &args.csv {
        Some(path) => {
            let file = input(File::create(path).with_context(|| format!("creating {}", path.display())))?;
            input(write_csv(&records, BufWriter::new(file)).map_err(Into::into))?;
            println!("{summary}");
        }
        None => {
            input(write_csv(&records, io::stdout().lock()).map_err(Into::into))?;
            let _ = io::stdout().flush();
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
