use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algorithms::{
    brute_force, check_online, igp_run_with, las_run, search_space, success_threshold, IgpOnline,
    InitMode,
};
use crate::error::{Error, Result};
use crate::io::{ingest, Format};
use crate::ogp::{correlated_instances, estimate_joint_success, ReplicaTree};
use crate::rng::StreamKey;
use crate::stats::{mean, variance, wilson, Z95};
use crate::tensor::{make_source, sum_subtensor, DenseTensor, Selection, Tensor};
use crate::theory::{build_partition, eta_alg, eta_opt, AsymptoticParams, PartitionScheme};

use super::config::{Algorithm, ExperimentConfig, ExperimentKind, InitChoice};

/// One trial of a search experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub trial: usize,
    /// Key of the trial's tensor stream.
    pub seed: StreamKey,
    pub algorithm: String,
    pub ave: f64,
    pub sum: f64,
    /// `ave / η_ALG`.
    pub ratio: f64,
    pub success: bool,
    pub wall_ms: Option<f64>,
    /// Alternations, for LAS rows.
    #[serde(skip)]
    pub iterations: Option<usize>,
    #[serde(skip)]
    pub converged: Option<bool>,
}

/// CSV bytes and JSON summary of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub summary: Value,
}

enum Plan {
    Search { algorithm: Algorithm, params: AsymptoticParams },
    Ingested { tensor: DenseTensor, params: AsymptoticParams },
    Joint { scheme: PartitionScheme, params: AsymptoticParams },
    Online { params: AsymptoticParams },
}

/// A configuration that passed every precondition check.
pub struct Prepared {
    cfg: ExperimentConfig,
    plan: Plan,
}

impl Prepared {
    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn check_params(cfg: &ExperimentConfig, n: usize, p: usize) -> Result<AsymptoticParams> {
    let params = AsymptoticParams::new(n, cfg.params.k, p, cfg.params.epsilon)?;
    if n < 2 {
        return Err(invalid(format!("side n = {n} must be at least 2")));
    }
    Ok(params)
}

fn check_budget(algorithm: Algorithm, params: &AsymptoticParams, budget: u128) -> Result<()> {
    match algorithm {
        Algorithm::Las if params.p != 2 => Err(invalid(format!(
            "LAS is defined for matrices, got p = {}",
            params.p
        ))),
        Algorithm::Brute => {
            let space = search_space(params.n, params.k, params.p);
            if space > budget {
                Err(Error::Capacity(format!(
                    "brute force over C({}, {})^{} = {space} candidates exceeds budget {budget}",
                    params.n, params.k, params.p
                )))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Checks every precondition of the configured experiment without running it.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    if cfg.trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    if cfg.threads == 0 {
        return Err(invalid("threads must be positive"));
    }
    if cfg.experiment_id().is_empty() {
        return Err(invalid("experiment id must not be empty"));
    }
    if cfg.kind != ExperimentKind::IngestRun && cfg.input.is_some() {
        return Err(invalid(format!("{} does not read an input file", cfg.kind.label())));
    }
    let (n, p) = (cfg.params.n, cfg.params.p);
    let plan = match cfg.kind {
        ExperimentKind::McIgp | ExperimentKind::McLas | ExperimentKind::Brute => {
            let algorithm = match cfg.kind {
                ExperimentKind::McIgp => Algorithm::Igp,
                ExperimentKind::McLas => Algorithm::Las,
                _ => Algorithm::Brute,
            };
            let params = check_params(cfg, n, p)?;
            check_budget(algorithm, &params, cfg.budget)?;
            Plan::Search { algorithm, params }
        }
        ExperimentKind::OnlineCheck => Plan::Online {
            params: check_params(cfg, n, p)?,
        },
        ExperimentKind::OgpJoint => {
            let params = check_params(cfg, n, p)?;
            let scheme = match cfg.scheme {
                Some(o) => PartitionScheme::uniform(p, params.epsilon, o.depth, o.branching)?,
                None => build_partition(p, params.epsilon)?,
            };
            if params.k % scheme.depth != 0 {
                return Err(invalid(format!(
                    "k = {} must be divisible by the grid depth N = {}",
                    params.k, scheme.depth
                )));
            }
            let tree = ReplicaTree::new(scheme.clone(), StreamKey::from_seed(cfg.seed))?;
            correlated_instances(tree, n, p, params.k)?.step_boundaries()?;
            Plan::Joint { scheme, params }
        }
        ExperimentKind::IngestRun => {
            let path = cfg
                .input
                .as_deref()
                .ok_or_else(|| invalid("ingest-run needs an input path"))?;
            let format = cfg.format.unwrap_or_else(|| Format::from_path(path));
            let tensor = ingest(path, format)?;
            if n != 0 && n != tensor.side() {
                return Err(invalid(format!("config n = {n}, file has n = {}", tensor.side())));
            }
            let params = check_params(cfg, tensor.side(), tensor.order())?;
            check_budget(cfg.algorithm, &params, cfg.budget)?;
            Plan::Ingested { tensor, params }
        }
    };
    Ok(Prepared {
        cfg: cfg.clone(),
        plan,
    })
}

fn trial_key(cfg: &ExperimentConfig, trial: usize) -> StreamKey {
    StreamKey::from_seed(cfg.seed)
        .derive_label(cfg.experiment_id())
        .derive(&[trial as u64])
}

fn igp_init(choice: InitChoice, key: StreamKey) -> InitMode {
    match choice {
        InitChoice::First => InitMode::First,
        InitChoice::Seeded => InitMode::Seeded(key.derive_label("init")),
    }
}

fn search_row<T: Tensor + ?Sized>(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    params: &AsymptoticParams,
    src: &T,
    trial: usize,
    key: StreamKey,
) -> Result<ResultRow> {
    let start = Instant::now();
    let (selection, iterations, converged): (Selection, _, _) = match algorithm {
        Algorithm::Igp => (igp_run_with(src, params.k, igp_init(cfg.init, key))?.0, None, None),
        Algorithm::Las => {
            let out = las_run(src, params.k, key.derive_label("las-init"))?;
            (out.selection, Some(out.iterations), Some(out.converged))
        }
        Algorithm::Brute => (brute_force(src, params.k, cfg.budget)?.selection, None, None),
    };
    let wall = start.elapsed().as_secs_f64() * 1e3;
    let sum = sum_subtensor(src, &selection)?;
    let ave = sum / (params.k as f64).powi(params.p as i32);
    Ok(ResultRow {
        experiment: cfg.experiment_id().to_string(),
        trial,
        seed: key,
        algorithm: algorithm.label().to_string(),
        ave,
        sum,
        ratio: ave / eta_alg(params)?,
        success: sum >= success_threshold(params)?,
        wall_ms: cfg.timing.then_some(wall),
        iterations,
        converged,
    })
}

fn search_csv(rows: &[ResultRow], timing: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment", "trial", "seed", "algorithm", "ave", "sum", "ratio", "success"];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.experiment.clone(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.algorithm.clone(),
            r.ave.to_string(),
            r.sum.to_string(),
            r.ratio.to_string(),
            r.success.to_string(),
        ];
        if timing {
            rec.push(r.wall_ms.map(|x| format!("{x:.3}")).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn search_summary(cfg: &ExperimentConfig, params: &AsymptoticParams, rows: &[ResultRow]) -> Result<Value> {
    let aves: Vec<f64> = rows.iter().map(|r| r.ave).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let successes = rows.iter().filter(|r| r.success).count();
    let spread = if rows.len() > 1 { variance(&ratios).sqrt() } else { 0.0 };
    let mut summary = json!({
        "experiment": cfg.experiment_id(),
        "kind": cfg.kind.label(),
        "algorithm": rows.first().map(|r| r.algorithm.clone()),
        "params": params,
        "seed": cfg.seed,
        "trials": rows.len(),
        "eta_opt": eta_opt(params)?,
        "eta_alg": eta_alg(params)?,
        "success_threshold": success_threshold(params)?,
        "mean_ave": mean(&aves),
        "mean_ratio": mean(&ratios),
        "sd_ratio": spread,
        "success_count": successes,
        "success_frequency": successes as f64 / rows.len() as f64,
        "success_ci": wilson(successes as u64, rows.len() as u64, Z95),
    });
    let iters: Vec<f64> = rows.iter().filter_map(|r| r.iterations).map(|i| i as f64).collect();
    if !iters.is_empty() {
        summary["mean_iterations"] = json!(mean(&iters));
        summary["converged"] = json!(rows.iter().filter(|r| r.converged == Some(true)).count());
    }
    Ok(summary)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))
}

/// Runs a prepared experiment. Outputs depend only on the configuration
/// and seed, not on the thread count (unless timing is enabled).
pub fn execute(prepared: &Prepared) -> Result<RunOutput> {
    let cfg = &prepared.cfg;
    let pool = pool(cfg.threads)?;
    pool.install(|| match &prepared.plan {
        Plan::Search { algorithm, params } => {
            let rows = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let key = trial_key(cfg, t);
                    let src = make_source(params.n, params.p, key)?;
                    search_row(cfg, *algorithm, params, &src, t, key)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RunOutput {
                csv: search_csv(&rows, cfg.timing)?,
                summary: search_summary(cfg, params, &rows)?,
            })
        }
        Plan::Ingested { tensor, params } => {
            let rows = (0..cfg.trials)
                .into_par_iter()
                .map(|t| search_row(cfg, cfg.algorithm, params, tensor, t, trial_key(cfg, t)))
                .collect::<Result<Vec<_>>>()?;
            let mut summary = search_summary(cfg, params, &rows)?;
            summary["input"] = json!(cfg.input);
            summary["n"] = json!(tensor.side());
            summary["p"] = json!(tensor.order());
            Ok(RunOutput {
                csv: search_csv(&rows, cfg.timing)?,
                summary,
            })
        }
        Plan::Joint { scheme, params } => {
            let master = StreamKey::from_seed(cfg.seed).derive_label(cfg.experiment_id());
            let alg = IgpOnline {
                init: igp_init(cfg.init, master),
            };
            let report = estimate_joint_success(&alg, scheme, params, cfg.trials, master, cfg.coins)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["experiment", "trial", "leaf_successes", "joint", "extraction", "verdict"])?;
            for r in &report.rows {
                w.write_record([
                    cfg.experiment_id(),
                    &r.trial.to_string(),
                    &r.leaf_successes.to_string(),
                    &r.joint.to_string(),
                    r.extraction.as_deref().unwrap_or(""),
                    r.verdict.as_deref().unwrap_or(""),
                ])?;
            }
            let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            let mut summary = serde_json::to_value(&report)?;
            summary.as_object_mut().expect("report is an object").remove("rows");
            summary["experiment"] = json!(cfg.experiment_id());
            summary["kind"] = json!(cfg.kind.label());
            summary["seed"] = json!(cfg.seed);
            Ok(RunOutput { csv, summary })
        }
        Plan::Online { params } => {
            let master = StreamKey::from_seed(cfg.seed).derive_label(cfg.experiment_id());
            let src = make_source(params.n, params.p, master.derive(&[0]))?;
            let alg = IgpOnline {
                init: igp_init(cfg.init, master),
            };
            let report = check_online(&alg, &src, params.k, cfg.trials, master.derive_label("exterior"))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["experiment", "trial", "passed", "first_divergent_step", "detail"])?;
            for t in &report.trials {
                w.write_record([
                    cfg.experiment_id(),
                    &t.trial.to_string(),
                    &t.passed.to_string(),
                    &t.first_divergent_step.map(|s| s.to_string()).unwrap_or_default(),
                    t.detail.as_deref().unwrap_or(""),
                ])?;
            }
            let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            let summary = json!({
                "experiment": cfg.experiment_id(),
                "kind": cfg.kind.label(),
                "algorithm": report.algorithm,
                "params": params,
                "seed": cfg.seed,
                "trials": report.trials.len(),
                "passed": report.passed(),
                "all_passed": report.all_passed(),
            });
            Ok(RunOutput { csv, summary })
        }
    })
}

/// Validates, runs, and writes the configured artifacts.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let prepared = prepare(cfg)?;
    let out = execute(&prepared)?;
    if let Some(path) = &cfg.output.csv {
        std::fs::write(path, &out.csv)?;
    }
    if let Some(path) = &cfg.output.summary {
        let mut text = serde_json::to_string_pretty(&out.summary)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(out)
}

/// Error JSON emitted by the command line front end.
pub fn error_json(err: &Error) -> Value {
    json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    })
}
