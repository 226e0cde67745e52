//! Seeded experiment orchestration: repeated trials per deployment size
//! and the random-activation baseline.

use std::io::Write;
use std::thread;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::Disc;
use crate::metrics::{self, summarize_experiment, ExperimentSummary};
use crate::network::{generate_deployment_with, Deployment};
use crate::protocol::{RoundOutput, Simulation};

/// Salt mixed into the trial seed for the baseline's subset draw.
const RAND_BASELINE_SALT: u64 = 0x5241_4e44;

/// One seeded deployment and the rounds simulated on it.
#[derive(Debug)]
pub struct TrialRun {
    pub trial: usize,
    /// Deployment as generated, before any round.
    pub initial: Deployment,
    pub rounds: Vec<RoundOutput>,
    /// Error that stopped the trial early, if any.
    pub failure: Option<Error>,
}

impl TrialRun {
    pub fn deployed(&self) -> usize {
        self.initial.len()
    }

    pub fn seed(&self) -> u64 {
        self.initial.seed
    }

    pub fn first_active_count(&self) -> Option<usize> {
        self.rounds.first().map(|r| r.report.active_count)
    }
}

pub fn run_trial_on(deployment: Deployment, config: &RunConfig, trial: usize, rounds: usize) -> Result<TrialRun> {
    let mut sim = Simulation::new(deployment.clone(), config.optics_params(), config.protocol_config())?;
    let mut outputs = Vec::with_capacity(rounds);
    let mut failure = None;
    for _ in 0..rounds {
        match sim.step() {
            Ok(out) => outputs.push(out),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(TrialRun {
        trial,
        initial: deployment,
        rounds: outputs,
        failure,
    })
}

pub fn run_trial(config: &RunConfig, deployed: usize, trial: usize) -> Result<TrialRun> {
    let d = &config.deployment;
    let deployment = generate_deployment_with(deployed, d.width, d.height, d.radius, d.trial_seed(trial), d.battery())?;
    run_trial_on(deployment, config, trial, config.experiment.rounds)
}

/// Maps `f` over `items` on scoped worker threads, keeping input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("trial worker panicked"))
            .collect()
    })
}

#[derive(Debug)]
pub struct ExperimentRun {
    /// Trials grouped by deployment size, in `d_list` order.
    pub trials: Vec<TrialRun>,
    /// Built from the first-round active counts of trials that completed it.
    pub summary: ExperimentSummary,
}

impl ExperimentRun {
    pub fn all_failed(&self) -> bool {
        self.trials.iter().all(|t| t.rounds.is_empty())
    }
}

/// Runs `trials` seeded trials for every deployment size in `d_list`.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .experiment
        .d_list
        .iter()
        .flat_map(|&d| (0..config.experiment.trials).map(move |t| (d, t)))
        .collect();
    let trials = parallel_map(&jobs, |&(d, t)| run_trial(config, d, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &trials)?;
    Ok(ExperimentRun { trials, summary })
}

fn summarize(config: &RunConfig, trials: &[TrialRun]) -> Result<ExperimentSummary> {
    let mut per_d = Vec::new();
    for &d in &config.experiment.d_list {
        let counts: Vec<usize> = trials
            .iter()
            .filter(|t| t.deployed() == d)
            .filter_map(TrialRun::first_active_count)
            .collect();
        if !counts.is_empty() {
            per_d.push((d, counts));
        }
    }
    summarize_experiment(&per_d)
}

/// Writes one line per trial: `D,trial,seed,rounds,active,grid_cr,error`.
pub fn write_trials_csv<W: Write>(trials: &[TrialRun], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["D", "trial", "seed", "rounds", "active", "grid_cr", "error"])?;
    for t in trials {
        let first = t.rounds.first().map(|r| r.report);
        w.write_record([
            t.deployed().to_string(),
            t.trial.to_string(),
            t.seed().to_string(),
            t.rounds.len().to_string(),
            first.map(|r| r.active_count.to_string()).unwrap_or_default(),
            first.map(|r| format!("{:.4}", r.grid_cr)).unwrap_or_default(),
            t.failure.as_ref().map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trials csv>", e))?;
    Ok(())
}

/// Grid coverage of `k` nodes drawn uniformly without replacement from the
/// alive nodes of `deployment`.
pub fn random_subset_grid_cr(deployment: &Deployment, k: usize, seed: u64, resolution: usize) -> Result<f64> {
    let alive: Vec<usize> = deployment.nodes.iter().filter(|n| n.is_alive()).map(|n| n.id).collect();
    let k = k.min(alive.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discs: Vec<Disc> = index::sample(&mut rng, alive.len(), k)
        .into_iter()
        .map(|i| Disc {
            center: deployment.nodes[alive[i]].position,
            radius: deployment.radius,
        })
        .collect();
    metrics::grid_cr(&discs, deployment.width, deployment.height, resolution)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRow {
    pub trial: usize,
    pub seed: u64,
    pub active_count: usize,
    pub protocol_grid_cr: f64,
    pub rand_grid_cr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub deployed: usize,
    pub rows: Vec<PairedRow>,
    /// `(trial, error)` for trials whose first round failed.
    pub failures: Vec<(usize, String)>,
}

impl BaselineRun {
    pub fn mean_protocol(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.protocol_grid_cr))
    }

    pub fn mean_rand(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.rand_grid_cr))
    }

    /// Paired rows then a `mean` row:
    /// `trial,seed,active_count,protocol_grid_cr,rand_grid_cr,difference`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["trial", "seed", "active_count", "protocol_grid_cr", "rand_grid_cr", "difference"])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.active_count.to_string(),
                format!("{:.4}", r.protocol_grid_cr),
                format!("{:.4}", r.rand_grid_cr),
                format!("{:.4}", r.protocol_grid_cr - r.rand_grid_cr),
            ])?;
        }
        let (p, q) = (self.mean_protocol(), self.mean_rand());
        let mean_active = mean(self.rows.iter().map(|r| r.active_count as f64));
        w.write_record([
            "mean".to_string(),
            String::new(),
            format!("{mean_active:.2}"),
            format!("{p:.4}"),
            format!("{q:.4}"),
            format!("{:.4}", p - q),
        ])?;
        w.flush().map_err(|e| Error::io("<baseline csv>", e))?;
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Pairs the protocol's first round with a random activation of the same
/// size on the same deployment, for `baseline.trials` seeded trials.
pub fn rand_baseline(config: &RunConfig) -> Result<BaselineRun> {
    config.validate()?;
    let deployed = config.baseline.deployed;
    let resolution = config.protocol.grid_resolution;
    let trials: Vec<usize> = (0..config.baseline.trials).collect();
    let results = parallel_map(&trials, |&t| -> Result<std::result::Result<PairedRow, String>> {
        let d = &config.deployment;
        let deployment = generate_deployment_with(deployed, d.width, d.height, d.radius, d.trial_seed(t), d.battery())?;
        let run = run_trial_on(deployment, config, t, 1)?;
        let Some(first) = run.rounds.first() else {
            let msg = run.failure.map(|e| e.to_string()).unwrap_or_default();
            return Ok(Err(msg));
        };
        let k = first.report.active_count;
        let rand_cr = random_subset_grid_cr(&run.initial, k, run.seed() ^ RAND_BASELINE_SALT, resolution)?;
        Ok(Ok(PairedRow {
            trial: t,
            seed: run.seed(),
            active_count: k,
            protocol_grid_cr: first.report.grid_cr,
            rand_grid_cr: rand_cr,
        }))
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in trials.into_iter().zip(results) {
        match r? {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((t, msg)),
        }
    }
    Ok(BaselineRun {
        deployed,
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.experiment.d_list = vec![60, 80];
        c.experiment.trials = 2;
        c.protocol.grid_resolution = 100;
        c.baseline.deployed = 80;
        c.baseline.trials = 3;
        c
    }

    #[test]
    fn experiment_is_deterministic() {
        let c = small_config();
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.trials.len(), 4);
        assert_eq!(a.summary.rows.len(), 2);
        assert_eq!(a.trials[1].seed(), c.deployment.seed + 1);
    }

    #[test]
    fn random_subset_sizes() {
        let d = generate_deployment_with(50, 50.0, 50.0, 5.0, 3, Default::default()).unwrap();
        assert_eq!(random_subset_grid_cr(&d, 0, 1, 100).unwrap(), 0.0);
        let all = random_subset_grid_cr(&d, 50, 1, 100).unwrap();
        let every: Vec<Disc> = d.nodes.iter().map(|n| Disc { center: n.position, radius: 5.0 }).collect();
        assert_eq!(all, metrics::grid_cr(&every, 50.0, 50.0, 100).unwrap());
    }

    #[test]
    fn baseline_pairs_each_trial() {
        let run = rand_baseline(&small_config()).unwrap();
        assert_eq!(run.rows.len(), 3);
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().last().unwrap().starts_with("mean,"));
    }
}
