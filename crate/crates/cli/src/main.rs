use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use superframe::exact::{compare_with_oracle, DEFAULT_BUDGET};
use superframe::io::{self, RunConfig, RunDocument};
use superframe::sched::SchedulerKind;
use superframe::sim::{self, SweepAxis};
use superframe::{Field, Real, Record};

#[derive(Parser)]
#[command(
    name = "superframe",
    version,
    about = "Super-frame data-collection simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print a summary line.
    Run {
        config: PathBuf,
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for record.json and series.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scheduler at every kappa on the same seed.
    Compare {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ehfs,fcfs,le,hp")]
        schedulers: Vec<SchedulerKind>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,0.9")]
        kappas: Vec<Real>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for compare.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scheduler over a range of values of one parameter.
    Sweep {
        config: PathBuf,
        /// kappa, n, delta_d or delta_theta.
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<Real>,
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a scheduler with the exact optimum on a small instance.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value = "ehfs")]
        scheduler: SchedulerKind,
    },
}

enum Outcome {
    Done,
    Infeasible,
}

fn load(
    config: &Path,
    scheduler: Option<SchedulerKind>,
    seed: Option<u64>,
) -> Result<RunConfig<Real>> {
    let mut cfg: RunConfig<Real> =
        io::load_config(config).with_context(|| format!("{}", config.display()))?;
    if let Some(s) = scheduler {
        cfg.set_scheduler(s);
    }
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn summary(r: &Record) -> String {
    format!(
        "scheduler={} kappa={} total_received={} fair_nodes={} dead_nodes={} frames={}{}",
        r.scheduler,
        r.config.kappa,
        r.metrics.total_received,
        r.metrics.fair_nodes,
        r.metrics.dead_nodes,
        r.frames,
        if r.truncated { " truncated" } else { "" }
    )
}

fn write_csv(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    print!("{contents}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("{}", path.display()))?;
    }
    Ok(())
}

fn cmd_run(
    config: &Path,
    scheduler: Option<SchedulerKind>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let mut cfg = load(config, scheduler, seed)?;
    if let Some(dir) = out {
        cfg.set_output_dir(dir);
    }
    let inputs = io::load_inputs(&cfg.sim)?;
    let record = sim::run(&cfg.sim, &inputs, cfg.scheduler)?;
    println!("{}", summary(&record));
    if let Some(dir) = &cfg.output.dir {
        let doc = RunDocument {
            sources: cfg.sources.clone(),
            record,
        };
        io::emit_results(&doc, dir)?;
    }
    Ok(Outcome::Done)
}

fn cmd_compare(
    config: &Path,
    schedulers: &[SchedulerKind],
    kappas: &[Real],
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let cfg = load(config, None, seed)?;
    for &k in kappas {
        superframe::model::Kappa::new(k).context("--kappas")?;
    }
    let inputs = io::load_inputs(&cfg.sim)?;
    let mut records = Vec::new();
    for &s in schedulers {
        records.extend(sim::sweep(&cfg.sim, &inputs, s, SweepAxis::Kappa, kappas)?);
    }
    write_csv(
        out.as_deref(),
        "compare.csv",
        &io::compare_summary_csv(&records),
    )?;
    Ok(Outcome::Done)
}

fn cmd_sweep(
    config: &Path,
    axis: SweepAxis,
    values: &[Real],
    scheduler: Option<SchedulerKind>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let cfg = load(config, scheduler, seed)?;
    if axis == SweepAxis::Kappa {
        for &k in values {
            superframe::model::Kappa::new(k).context("--values")?;
        }
    }
    let inputs = io::load_inputs(&cfg.sim)?;
    let records = sim::sweep(&cfg.sim, &inputs, cfg.scheduler, axis, values)?;
    write_csv(
        out.as_deref(),
        "sweep.csv",
        &io::sweep_summary_csv(values, &records)?,
    )?;
    Ok(Outcome::Done)
}

fn cmd_oracle(instance: &Path, scheduler: SchedulerKind) -> Result<Outcome> {
    let inst = io::load_instance(instance).with_context(|| format!("{}", instance.display()))?;
    let report = compare_with_oracle(&inst, scheduler, DEFAULT_BUDGET)?;
    let h = &report.heuristic;
    println!("scheduler: {scheduler}");
    println!(
        "heuristic: {} ({})",
        h.objective.to_f64_lossy(),
        h.objective
    );
    println!("heuristic_fair_nodes: {}/{}", h.fair_nodes, inst.n());
    eprintln!("exact_seconds: {:.6}", report.exact_seconds);
    eprintln!("heuristic_seconds: {:.6}", report.heuristic_seconds);
    let Some(sol) = report.exact.optimal() else {
        println!("optimum: INFEASIBLE");
        return Ok(Outcome::Infeasible);
    };
    println!(
        "optimum: {} ({})",
        sol.objective.to_f64_lossy(),
        sol.objective
    );
    println!("optimum_fair_nodes: {}/{}", sol.fair_nodes, inst.n());
    match report.gap {
        Some(g) => println!("gap: {} ({g})", g.to_f64_lossy()),
        None => println!("gap: undefined (zero optimum)"),
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            scheduler,
            seed,
            out,
        } => cmd_run(&config, scheduler, seed, out),
        Command::Compare {
            config,
            schedulers,
            kappas,
            seed,
            out,
        } => cmd_compare(&config, &schedulers, &kappas, seed, out),
        Command::Sweep {
            config,
            axis,
            values,
            scheduler,
            seed,
            out,
        } => cmd_sweep(&config, axis, &values, scheduler, seed, out),
        Command::Oracle {
            instance,
            scheduler,
        } => cmd_oracle(&instance, scheduler),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
