use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use beamsched::engine::{self, Pipeline, RunOptions};
use beamsched::scenario::{load_scenario_files, Scenario, SchedulerPolicy};

#[derive(Parser)]
#[command(name = "beamsched", version, about = "Multi-beam satellite forward-link precoding and scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep and write all artifacts.
    Run(RunArgs),
    /// Dump every user's normalized polar coordinates and sector.
    Sectorize(DumpArgs),
    /// Dump the cluster partitions.
    Cluster(DumpArgs),
    /// Check configuration, layout and ModCod table.
    Validate(ScenarioArgs),
    /// Re-aggregate the frame traces of an earlier run.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerChoice {
    Random,
    Gsa,
    Both,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Beam layout (JSON), overriding the config's `beam_layout`.
    #[arg(long, value_name = "PATH")]
    beams: Option<String>,
    /// ModCod table (CSV), overriding the config's `modcod`.
    #[arg(long, value_name = "PATH")]
    modcod: Option<String>,
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    #[arg(long, value_name = "INT")]
    cluster_size: Option<usize>,
    /// Users per km².
    #[arg(long, value_name = "FLOAT")]
    density: Option<f64>,
    #[arg(long, value_name = "INT")]
    iterations: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "both")]
    scheduler: SchedulerChoice,
    #[arg(long, value_name = "DIR", env = "BEAMSCHED_OUT", default_value = "beamsched-out")]
    out: PathBuf,
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
    /// Skip the per-frame and per-user traces.
    #[arg(long)]
    no_traces: bool,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Monte Carlo iteration whose deployment is dumped.
    #[arg(long, value_name = "INT", default_value_t = 0)]
    iteration: usize,
    /// Write the table into this directory instead of standard output.
    #[arg(long, value_name = "DIR", env = "BEAMSCHED_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_name = "DIR", env = "BEAMSCHED_OUT", default_value = "beamsched-out")]
    out: PathBuf,
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    let mut scenario = load_scenario_files(&args.config, args.beams.as_deref(), args.modcod.as_deref())
        .with_context(|| format!("loading {}", args.config.display()))?;
    let config = &mut scenario.config;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(n) = args.iterations {
        config.monte_carlo_iterations = n;
    }
    if args.cluster_size.is_some() || args.density.is_some() {
        let sweep = config.sweep.take();
        config.cluster_size = args
            .cluster_size
            .or_else(|| sweep.as_ref().and_then(|s| s.cluster_sizes.first().copied()))
            .unwrap_or(config.cluster_size);
        config.user_density = args
            .density
            .or_else(|| sweep.as_ref().and_then(|s| s.densities.first().copied()))
            .unwrap_or(config.user_density);
    }
    config.validate()?;
    Ok(scenario)
}

fn policies(choice: SchedulerChoice) -> Vec<SchedulerPolicy> {
    match choice {
        SchedulerChoice::Random => vec![SchedulerPolicy::Random],
        SchedulerChoice::Gsa => vec![SchedulerPolicy::Gsa],
        SchedulerChoice::Both => vec![SchedulerPolicy::Random, SchedulerPolicy::Gsa],
    }
}

fn run(args: &RunArgs) -> Result<bool> {
    let scenario = load(&args.scenario)?;
    let options = RunOptions {
        policies: policies(args.scheduler),
        threads: args.threads,
        out_dir: Some(args.out.clone()),
        traces: !args.no_traces,
    };
    let report = engine::run_experiment(&scenario, &options)?;
    let mut out = std::io::stdout().lock();
    for cell in &report.cells {
        match &cell.result {
            Ok(c) => {
                for p in &c.policies {
                    writeln!(
                        out,
                        "K={} rho={} {}: mean spectral efficiency {:.4} bit/s/Hz, loss frames {:.1}%",
                        cell.cluster_size,
                        cell.density,
                        p.policy.name(),
                        p.report.mean_spectral_efficiency,
                        100.0 * p.report.loss_frame_fraction
                    )?;
                }
                if let Some(g) = &c.gsa_gain {
                    writeln!(
                        out,
                        "K={} rho={} gsa gain {:.4} bit/s/Hz (95% CI {:.4} .. {:.4})",
                        cell.cluster_size, cell.density, g.mean, g.ci_low, g.ci_high
                    )?;
                }
            }
            Err(e) => eprintln!("K={} rho={} failed: {e}", cell.cluster_size, cell.density),
        }
    }
    writeln!(out, "artifacts written to {}", args.out.display())?;
    let ok = report.failures().next().is_none();
    Ok(ok)
}

fn dump(args: &DumpArgs, file: &str, sectors: bool) -> Result<bool> {
    let scenario = load(&args.scenario)?;
    let pipeline = Pipeline::new(&scenario)?;
    let (k, rho) = (scenario.config.cluster_size, scenario.config.user_density);
    pipeline.check_cell(k, rho)?;
    let inputs = pipeline.prepare(k, rho, args.iteration)?;
    let table = if sectors {
        engine::sector_table(&pipeline, &inputs)?
    } else {
        engine::cluster_table(&pipeline, &inputs)
    };
    write_table(args.out.as_deref(), file, &table)?;
    Ok(true)
}

fn write_table(dir: Option<&Path>, file: &str, table: &str) -> Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            std::fs::write(&path, table).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().lock().write_all(table.as_bytes())?,
    }
    Ok(())
}

fn validate(args: &ScenarioArgs) -> Result<bool> {
    let scenario = load(args)?;
    let pipeline = Pipeline::new(&scenario)?;
    let sweep = scenario.config.sweep_or_single();
    for (k, rho) in sweep.cells() {
        pipeline.check_cell(k, rho)?;
    }
    println!(
        "ok: {} beams ({}), {} sectors, {} ModCods, {} sweep cells",
        scenario.num_beams(),
        scenario.layout.name,
        pipeline.sectors.num_sectors(),
        scenario.modcod.rows().len(),
        sweep.cells().len()
    );
    Ok(true)
}

fn report(args: &ReportArgs) -> Result<bool> {
    let cells = engine::reaggregate_dir(&args.out)?;
    if cells.is_empty() {
        bail!("no cells under {}", args.out.display());
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "cell,iterations,frames,mean_spectral_efficiency,loss_frame_fraction")?;
    for (name, r) in cells {
        writeln!(out, "{name},{},{},{},{}", r.iterations, r.frames, r.mean_spectral_efficiency, r.loss_frame_fraction)?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sectorize(a) => dump(a, "sectors.csv", true),
        Command::Cluster(a) => dump(a, "clusters.csv", false),
        Command::Validate(a) => validate(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
