//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or I/O errors, 3 when
//! every simulated trial failed.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiment::{self, run_experiment, run_trial_on, ExperimentRun};
use crate::metrics::summarize_experiment;
use crate::network::Deployment;
use crate::optics::write_reachability_csv;
use crate::trace::{self, TraceRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wsn-coverage", version, about = "OPTICS-based sensor activation and coverage experiments")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the deployment-size sweep and write the summary, trace and plot data.
    Run {
        /// Replay a fixed field (`id,x,y,battery,state`) instead of generating one.
        #[arg(long)]
        deployment: Option<PathBuf>,
    },
    /// Compare protocol coverage against random activation of the same size.
    RandBaseline,
    /// Turn a round trace into reachability and coverage CSVs.
    PlotData {
        #[arg(long)]
        trace: PathBuf,
        /// Coverage grid cells per side.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Validate the configuration and print it with defaults filled in.
    ValidateConfig,
}

/// Flags that override keys of the configuration file.
#[derive(Debug, Args)]
struct Overrides {
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; trial `t` uses `seed + t`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per deployment size.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Rounds simulated per trial.
    #[arg(long, global = true)]
    rounds: Option<usize>,
    /// Comma-separated deployment sizes, e.g. `100,200,300`.
    #[arg(long, global = true, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    /// Field width in meters.
    #[arg(long, global = true)]
    width: Option<f64>,
    /// Field height in meters.
    #[arg(long, global = true)]
    height: Option<f64>,
    /// Sensing radius in meters.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// OPTICS neighborhood radius.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Neighbors, the point included, that make a core point.
    #[arg(long, global = true)]
    min_pts: Option<usize>,
    /// Reachability cut used to extract clusters (defaults to eps / 2).
    #[arg(long, global = true)]
    eps_prime: Option<f64>,
    /// Skip a candidate whose uncovered perimeter share is below this.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Coverage grid cells per side.
    #[arg(long, global = true)]
    grid_resolution: Option<usize>,
    /// Node count for the random baseline.
    #[arg(long, global = true)]
    baseline_deployed: Option<usize>,
    /// Paired trials for the random baseline.
    #[arg(long, global = true)]
    baseline_trials: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:ident => $($field:ident).+) => {
                if let Some(v) = self.$flag.clone() {
                    c.$($field).+ = v;
                }
            };
        }
        set!(out => output.dir);
        set!(seed => deployment.seed);
        set!(trials => experiment.trials);
        set!(rounds => experiment.rounds);
        set!(d_list => experiment.d_list);
        set!(width => deployment.width);
        set!(height => deployment.height);
        set!(radius => deployment.radius);
        set!(eps => optics.eps);
        set!(min_pts => optics.min_pts);
        set!(theta => protocol.theta);
        set!(grid_resolution => protocol.grid_resolution);
        set!(baseline_deployed => baseline.deployed);
        set!(baseline_trials => baseline.trials);
        if self.eps_prime.is_some() {
            c.optics.eps_prime = self.eps_prime;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let config = cli.overrides.resolve()?;
    match &cli.command {
        Command::Run { deployment } => cmd_run(&config, deployment.as_deref()),
        Command::RandBaseline => cmd_rand_baseline(&config),
        Command::PlotData { trace, resolution } => {
            cmd_plot_data(trace, &config.output.dir, resolution.unwrap_or(config.protocol.grid_resolution))
        }
        Command::ValidateConfig => {
            print!("{}", config.to_toml_string());
            Ok(EXIT_OK)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    finish(w, path)
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-test");
    File::create(&probe).map_err(|e| Error::io(dir, e))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

pub fn cmd_run(config: &RunConfig, deployment: Option<&Path>) -> Result<i32> {
    prepare_out_dir(&config.output.dir)?;
    let run = match deployment {
        Some(path) => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let d = &config.deployment;
            let fixed = Deployment::read_csv(BufReader::new(file), d.width, d.height, d.radius)?;
            let trial = run_trial_on(fixed, config, 0, config.experiment.rounds)?;
            let counts: Vec<_> = trial.first_active_count().into_iter().collect();
            let per_d = if counts.is_empty() { vec![] } else { vec![(trial.deployed(), counts)] };
            ExperimentRun {
                summary: summarize_experiment(&per_d)?,
                trials: vec![trial],
            }
        }
        None => run_experiment(config)?,
    };
    write_run_artifacts(config, &run)?;

    for row in &run.summary.rows {
        println!("D={:<4} trials={:?} N={} R={}%", row.deployed, row.trials, row.n, row.r);
    }
    if !run.summary.rows.is_empty() {
        println!("R_avg = {:.2}% -> {}%", run.summary.r_avg, run.summary.r_avg_display());
    }
    for t in run.trials.iter().filter(|t| t.failure.is_some()) {
        eprintln!(
            "D={} trial={} stopped after {} round(s): {}",
            t.deployed(),
            t.trial,
            t.rounds.len(),
            t.failure.as_ref().expect("failure")
        );
    }
    Ok(if run.all_failed() { EXIT_SIMULATION } else { EXIT_OK })
}

fn write_run_artifacts(config: &RunConfig, run: &ExperimentRun) -> Result<()> {
    let dir = &config.output.dir;
    write_file(&dir.join("summary.csv"), |w| run.summary.write_csv(w))?;
    write_file(&dir.join("trials.csv"), |w| experiment::write_trials_csv(&run.trials, w))?;
    write_file(&dir.join("trace.jsonl"), |w| {
        for t in &run.trials {
            for round in &t.rounds {
                trace::write_record(&mut *w, &TraceRecord::from_round(t.trial, &t.initial, round))?;
            }
        }
        Ok(())
    })?;
    for t in &run.trials {
        let stem = format!("D{}_t{}", t.deployed(), t.trial);
        write_file(&dir.join("deployments").join(format!("{stem}.csv")), |w| t.initial.write_csv(w))?;
        for round in &t.rounds {
            let path = dir.join("reachability").join(format!("{stem}_r{}.csv", round.report.round));
            write_file(&path, |w| write_reachability_csv(&round.ordering, w))?;
        }
    }
    Ok(())
}

pub fn cmd_rand_baseline(config: &RunConfig) -> Result<i32> {
    prepare_out_dir(&config.output.dir)?;
    let run = experiment::rand_baseline(config)?;
    write_file(&config.output.dir.join("rand_baseline.csv"), |w| run.write_csv(w))?;
    println!(
        "D={} trials={} mean grid CR: protocol {:.2}% vs random {:.2}% (difference {:+.2} points)",
        run.deployed,
        run.rows.len(),
        run.mean_protocol(),
        run.mean_rand(),
        run.mean_protocol() - run.mean_rand()
    );
    for (t, msg) in &run.failures {
        eprintln!("trial {t} failed: {msg}");
    }
    Ok(if run.rows.is_empty() { EXIT_SIMULATION } else { EXIT_OK })
}

pub fn cmd_plot_data(trace_path: &Path, out: &Path, resolution: usize) -> Result<i32> {
    let file = File::open(trace_path).map_err(|e| Error::io(trace_path, e))?;
    let records = trace::read_trace(BufReader::new(file))?;
    prepare_out_dir(out)?;
    for rec in &records {
        let stem = rec.stem();
        write_file(&out.join("reachability").join(format!("{stem}.csv")), |w| {
            write_reachability_csv(&rec.ordering, w)
        })?;
        let grid = rec.coverage_grid(resolution)?;
        write_file(&out.join("coverage").join(format!("{stem}.csv")), |w| grid.write_csv(w))?;
    }
    println!("wrote plot data for {} round(s) to {}", records.len(), out.display());
    Ok(EXIT_OK)
}
