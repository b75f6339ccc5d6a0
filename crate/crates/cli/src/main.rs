use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use zk_core::config::{Params, RunConfig};
use zk_core::fields::gaussian;
use zk_core::harness::{run_experiment, summary_table, EstimateReport, ExperimentSpec, DEFAULT_SEED, EXPERIMENTS};
use zk_core::io::{emit_trace, load_trajectory, save_trajectory};
use zk_core::norms::triple_norm;
use zk_core::propagator::free_evolve_unchecked;
use zk_core::solver::evolve;
use zk_core::{Field2D, Trajectory};

#[derive(Parser)]
#[command(name = "zklab", version, about = "Zakharov-Kuznetsov numerical laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` parameter file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for trajectories, traces and reports
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size, e.g. 256x256
    #[arg(long, global = true, value_name = "NXxNY")]
    grid: Option<String>,
    /// Box half-length
    #[arg(long = "box", global = true, value_name = "L")]
    half_length: Option<f64>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlinear evolution of the configured Gaussian datum
    Simulate,
    /// Free linear evolution of the configured Gaussian datum
    Propagate,
    /// Run one named experiment, or `all`
    Verify { experiment: String },
    /// Solution-metric norms of a stored trajectory
    Norms {
        trajectory: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Merge stored reports into one summary
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

impl Common {
    fn params(&self) -> Result<Params> {
        let mut p = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Params::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Params::default(),
        };
        if let Some(g) = &self.grid {
            p.set("grid", g.clone());
        }
        if let Some(l) = self.half_length {
            p.set("box", l.to_string());
        }
        Ok(p)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

fn initial_datum(run: &RunConfig) -> Result<Field2D> {
    let d = run.initial;
    Ok(gaussian(run.sim.grid()?, d.amplitude, d.sigma, d.centre))
}

fn write_run(common: &Common, stem: &str, run: &RunConfig, traj: &Trajectory) -> Result<()> {
    let dir = common.out_dir()?;
    let data = dir.join(format!("{stem}.zkf"));
    let trace = dir.join(format!("{stem}.csv"));
    save_trajectory(traj, &data)?;
    emit_trace(traj, &run.trace, &trace)?;
    let (l0, l1) = (traj.snapshots()[0].l2_norm(), traj.last().l2_norm());
    if common.json {
        let summary = serde_json::json!({
            "trajectory": data,
            "trace": trace,
            "snapshots": traj.len(),
            "final_time": traj.final_time(),
            "l2_initial": l0,
            "l2_final": l1,
        });
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!("wrote {} ({} snapshots) and {}", data.display(), traj.len(), trace.display());
        println!("L2 norm {l0:.12e} -> {l1:.12e}");
    }
    Ok(())
}

fn simulate(common: &Common, free: bool) -> Result<()> {
    let run = RunConfig::from_params(&common.params()?)?;
    let u0 = initial_datum(&run)?;
    let traj = if free {
        u0.check_decay()?;
        let form = run.sim.form;
        Trajectory::from_fn(Trajectory::uniform_times(run.sim.t_final, run.sim.snapshots), |t| {
            free_evolve_unchecked(&u0, t, form)
        })?
    } else {
        evolve(&u0, &run.sim)?
    };
    write_run(common, if free { "propagate" } else { "simulate" }, &run, &traj)
}

fn verify(common: &Common, name: &str) -> Result<bool> {
    let names: Vec<&str> = if name == "all" { EXPERIMENTS.to_vec() } else { vec![name] };
    let mut reports = Vec::new();
    for n in names {
        let spec = ExperimentSpec::with_params(n, common.params()?, common.seed.unwrap_or(DEFAULT_SEED));
        let rep = run_experiment(&spec).with_context(|| format!("experiment `{n}`"))?;
        if let Some(dir) = &common.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{n}.json")), rep.to_json()?)?;
        }
        if !common.json {
            println!("{n}: {}", if rep.passed { "pass" } else { "FAIL" });
            for line in rep.summary_lines() {
                println!("  {line}");
            }
        }
        reports.push(rep);
    }
    if common.json {
        if let [one] = reports.as_slice() {
            println!("{}", one.to_json()?);
        } else {
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
    } else if reports.len() > 1 {
        print!("{}", summary_table(&reports));
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn norms(common: &Common, path: &Path, s: f64) -> Result<()> {
    let traj = load_trajectory(path)?;
    let report = triple_norm(&traj, s)?;
    if common.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        for (i, v) in report.components.iter().enumerate() {
            println!("n{:<2} {v:.10e}", i + 1);
        }
        println!("sum {:.10e}", report.total);
    }
    Ok(())
}

fn report(common: &Common, paths: &[PathBuf]) -> Result<bool> {
    let mut reports = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        reports.push(EstimateReport::from_json(&text).with_context(|| format!("loading {}", p.display()))?);
    }
    if common.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        print!("{}", summary_table(&reports));
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Simulate => simulate(c, false).map(|_| true),
        Command::Propagate => simulate(c, true).map(|_| true),
        Command::Verify { experiment } => verify(c, experiment),
        Command::Norms { trajectory, s } => {
            if c.config.is_some() || c.grid.is_some() || c.half_length.is_some() {
                bail!("norms reads everything from the trajectory file");
            }
            norms(c, trajectory, *s).map(|_| true)
        }
        Command::Report { reports } => report(c, reports),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
