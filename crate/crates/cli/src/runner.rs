//! Fans an [`ExperimentSpec`] out into runs and writes the result files.
//!
//! Layout under the output directory:
//!
//! ```text
//! runs/{algorithm}_nu{nu}_rep{r}.csv   one per run
//! traces/{algorithm}_nu{nu}_rep{r}.csv with --retain-trace
//! envs/nu{nu}_rep{r}.txt               with --dump-env
//! aggregate.csv
//! manifest.json
//! ```
//!
//! Replication `r` at grid point `nu` uses the same environment for every
//! algorithm, so algorithms are compared on common environments. Seeds:
//!
//! * env seed = `derive_seed(master, "env", [nu.to_bits(), r])`
//! * run seed = `derive_seed(master, "run/{algorithm}", [nu.to_bits(), r])`

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::Serialize;
use swarmbandit::batch;
use swarmbandit::env::MeanTimeline;
use swarmbandit::metrics::{
    aggregate, csv_float, decimated_times, regret_ratio_on, write_aggregate_header,
    write_aggregate_rows, write_run_csv, RatioSeries, RunMeta,
};
use swarmbandit::policies::PolicyKind;
use swarmbandit::seeding::derive_seed;
use swarmbandit::sim::{run_episode, RunSettings, StepOutcome, TraceRetention};

use crate::args::{ExperimentSpec, FileConfig};
use crate::CliError;

pub fn env_seed(master: u64, nu: f64, replication: usize) -> u64 {
    derive_seed(master, "env", &[nu.to_bits(), replication as u64])
}

pub fn run_seed(master: u64, kind: PolicyKind, nu: f64, replication: usize) -> u64 {
    derive_seed(
        master,
        &format!("run/{}", kind.name()),
        &[nu.to_bits(), replication as u64],
    )
}

/// One (algorithm, ν, replication) coordinate with its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub algorithm: PolicyKind,
    pub nu: f64,
    pub replication: usize,
    pub env_seed: u64,
    pub run_seed: u64,
}

impl RunPlan {
    pub fn stem(&self) -> String {
        format!(
            "{}_nu{}_rep{}",
            self.algorithm.name(),
            csv_float(self.nu),
            self.replication
        )
    }
}

/// Runs in output order: algorithm, then ν, then replication.
pub fn plan(spec: &ExperimentSpec) -> Vec<RunPlan> {
    let mut out = Vec::new();
    for &algorithm in &spec.algorithms {
        for &nu in &spec.nu_grid {
            for replication in 0..spec.replications {
                out.push(RunPlan {
                    algorithm,
                    nu,
                    replication,
                    env_seed: env_seed(spec.master_seed, nu, replication),
                    run_seed: run_seed(spec.master_seed, algorithm, nu, replication),
                });
            }
        }
    }
    out
}

#[derive(Serialize)]
struct ManifestSeed<'a> {
    algorithm: &'static str,
    nu: f64,
    replication: usize,
    env_seed: u64,
    run_seed: u64,
    file: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    spec: FileConfig,
    runs: Vec<ManifestSeed<'a>>,
}

/// Final cumulative regret of one run, for the stdout summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub plan: RunPlan,
    pub final_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub runs: Vec<RunSummary>,
    pub files: Vec<PathBuf>,
}

/// Tracks files as they are created so a failed experiment can clean up.
#[derive(Default)]
struct Written(std::sync::Mutex<Vec<PathBuf>>);

impl Written {
    fn create(
        &self,
        path: PathBuf,
        contents: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        self.0.lock().unwrap().push(path.clone());
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        contents(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))
    }

    fn into_sorted(self) -> Vec<PathBuf> {
        let mut v = self.0.into_inner().unwrap();
        v.sort();
        v
    }

    fn remove_all(&self) {
        for p in self.0.lock().unwrap().iter() {
            let _ = fs::remove_file(p);
        }
    }
}

fn write_trace<W: Write>(w: &mut W, trace: &[StepOutcome]) -> std::io::Result<()> {
    writeln!(w, "t,selections,group_reward,oracle_reward,inst_regret")?;
    for s in trace {
        let sel: Vec<String> = s.selections.iter().map(|a| a.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{}",
            s.t,
            sel.join(";"),
            csv_float(s.group_reward),
            csv_float(s.oracle_reward),
            csv_float(s.inst_regret)
        )?;
    }
    Ok(())
}

/// Runs the experiment, reporting progress on stderr when `progress` is set.
pub fn run_experiment(spec: &ExperimentSpec, progress: bool) -> Result<ExperimentReport, CliError> {
    let written = Written::default();
    match run_inner(spec, progress, &written) {
        Ok(runs) => Ok(ExperimentReport {
            runs,
            files: written.into_sorted(),
        }),
        Err(e) => {
            written.remove_all();
            Err(e)
        }
    }
}

fn run_inner(
    spec: &ExperimentSpec,
    progress: bool,
    written: &Written,
) -> Result<Vec<RunSummary>, CliError> {
    let out = &spec.output_dir;
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| CliError::io(p, e));
    mkdir(&out.join("runs"))?;
    if spec.retain_trace {
        mkdir(&out.join("traces"))?;
    }
    if spec.dump_env {
        mkdir(&out.join("envs"))?;
    }

    // Environments are shared across algorithms; build each once.
    let env_keys: Vec<(f64, usize)> = spec
        .nu_grid
        .iter()
        .flat_map(|&nu| (0..spec.replications).map(move |r| (nu, r)))
        .collect();
    let timelines = batch::map_runs(&env_keys, spec.workers, |&(nu, r)| {
        let cfg = spec.env_config(nu, env_seed(spec.master_seed, nu, r));
        MeanTimeline::generate(&cfg).map(Arc::new)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let timeline_for = |nu: f64, r: usize| {
        let i = spec
            .nu_grid
            .iter()
            .position(|&x| x == nu)
            .expect("nu in grid");
        &timelines[i * spec.replications + r]
    };

    if spec.dump_env {
        for (&(nu, r), tl) in env_keys.iter().zip(&timelines) {
            let cfg = spec.env_config(nu, env_seed(spec.master_seed, nu, r));
            let path = out
                .join("envs")
                .join(format!("nu{}_rep{r}.txt", csv_float(nu)));
            written.create(path, |w| w.write_all(tl.dump(&cfg).as_bytes()))?;
        }
    }

    let plans = plan(spec);
    let times = decimated_times(spec.horizon, spec.decimate);
    let done = AtomicUsize::new(0);
    let total = plans.len();
    let results = batch::map_runs(
        &plans,
        spec.workers,
        |p| -> Result<(RatioSeries, f64), CliError> {
            let env = spec.env_config(p.nu, p.env_seed);
            let mut settings = RunSettings::new(p.algorithm, spec.lambda, p.run_seed);
            settings.tie_break = spec.tie_break;
            if spec.retain_trace {
                settings.retention = TraceRetention::Full;
            }
            let episode = run_episode(&env, timeline_for(p.nu, p.replication), &settings)?;
            let meta = RunMeta {
                algorithm: p.algorithm.name().to_string(),
                nu: p.nu,
                lambda: spec.lambda,
                seed: p.run_seed,
                replication: p.replication,
            };
            let stem = p.stem();
            written.create(out.join("runs").join(format!("{stem}.csv")), |w| {
                write_run_csv(w, &meta, &episode.ledger, &times)
            })?;
            if let Some(trace) = &episode.trace {
                written.create(out.join("traces").join(format!("{stem}.csv")), |w| {
                    write_trace(w, trace)
                })?;
            }
            if progress {
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!(
                    "[{n}/{total}] {stem} R(T)={}",
                    csv_float(episode.ledger.final_regret())
                );
            }
            Ok((
                regret_ratio_on(&episode.ledger, p.nu, &times),
                episode.ledger.final_regret(),
            ))
        },
    );
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    // Ordered reduction: plans are grouped by (algorithm, ν) in input order.
    let mut aggregates = Vec::new();
    for (chunk, plans_chunk) in results
        .chunks(spec.replications)
        .zip(plans.chunks(spec.replications))
    {
        let series: Vec<RatioSeries> = chunk.iter().map(|(s, _)| s.clone()).collect();
        aggregates.push((plans_chunk[0].algorithm, aggregate(&series)?));
    }
    written.create(out.join("aggregate.csv"), |w| {
        write_aggregate_header(w)?;
        for (kind, series) in &aggregates {
            write_aggregate_rows(w, kind.name(), series)?;
        }
        Ok(())
    })?;

    let stems: Vec<String> = plans.iter().map(RunPlan::stem).collect();
    let file_names: Vec<String> = stems.iter().map(|s| format!("runs/{s}.csv")).collect();
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec: spec.to_file_config(),
        runs: plans
            .iter()
            .zip(&file_names)
            .map(|(p, file)| ManifestSeed {
                algorithm: p.algorithm.name(),
                nu: p.nu,
                replication: p.replication,
                env_seed: p.env_seed,
                run_seed: p.run_seed,
                file,
            })
            .collect(),
    };
    written.create(out.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })?;

    Ok(plans
        .into_iter()
        .zip(results)
        .map(|(plan, (_, final_regret))| RunSummary { plan, final_regret })
        .collect())
}

/// Mean final regret per (algorithm, ν), as CSV for stdout.
pub fn summary_csv(spec: &ExperimentSpec, report: &ExperimentReport) -> String {
    let mut s = String::from("algorithm,nu,mean_final_regret\n");
    for chunk in report.runs.chunks(spec.replications) {
        let mean = chunk.iter().map(|r| r.final_regret).sum::<f64>() / chunk.len() as f64;
        let p = &chunk[0].plan;
        s.push_str(&format!(
            "{},{},{}\n",
            p.algorithm.name(),
            csv_float(p.nu),
            csv_float(mean)
        ));
    }
    s
}
