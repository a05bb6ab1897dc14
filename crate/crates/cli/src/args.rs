//! Command-line and config-file parsing into a validated [`ExperimentSpec`].
//!
//! Precedence for every setting: flag, then `--config` file, then (for the
//! master seed only) `SWARMBANDIT_SEED`, then the built-in default. The
//! config file is TOML, or the JSON manifest written by a previous run
//! (its `spec` object is read, so a manifest replays its experiment).

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use swarmbandit::env::{EnvConfig, RewardModel, DEFAULT_MEAN_POOL};
use swarmbandit::metrics::default_decimation;
use swarmbandit::policies::{PolicyKind, TieBreak};

use crate::CliError;

pub const SEED_ENV_VAR: &str = "SWARMBANDIT_SEED";
pub const DEFAULT_SEED: u64 = 2018;
pub const DEFAULT_NU_GRID: [f64; 3] = [0.15, 0.3, 0.45];
pub const DEFAULT_ALGORITHMS: [PolicyKind; 2] = [PolicyKind::RrSwUcbSharp, PolicyKind::SwDlp];

#[derive(Debug, Parser)]
#[command(
    name = "swarmbandit",
    version,
    about = "Multi-player bandit sweeps in abruptly-changing environments"
)]
struct Flags {
    /// Policy to run; repeat for several (ucb|dlp|sw-ucb-sharp|rr-sw-ucb-sharp|sw-dlp|oracle)
    #[arg(long = "algorithm", value_name = "NAME")]
    algorithms: Vec<String>,
    /// Number of arms N
    #[arg(long)]
    arms: Option<usize>,
    /// Number of players M
    #[arg(long)]
    players: Option<usize>,
    /// Horizon T
    #[arg(long)]
    horizon: Option<usize>,
    /// Breakpoint exponent; repeat for a grid
    #[arg(long = "nu", value_name = "NU", allow_negative_numbers = true)]
    nu: Vec<f64>,
    /// Window scale
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Comma-separated pool of arm means
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mean_pool: Option<Vec<f64>>,
    /// bernoulli | gaussian:SIGMA
    #[arg(long)]
    reward_model: Option<String>,
    #[arg(long)]
    replications: Option<usize>,
    /// Master seed (falls back to SWARMBANDIT_SEED)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep every k-th time point in the CSVs (1 = full series)
    #[arg(long)]
    decimate: Option<usize>,
    /// Also write a per-step trace CSV for every run
    #[arg(long)]
    retain_trace: bool,
    /// Write the generated environments
    #[arg(long)]
    dump_env: bool,
    /// Worker threads (0 = available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// lowest | random
    #[arg(long)]
    tie_break: Option<String>,
    /// TOML config file, or a manifest.json from an earlier run
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Settings that may come from a file. Key names match the manifest's `spec`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algorithms: Option<Vec<String>>,
    pub nu: Option<Vec<f64>>,
    pub arms: Option<usize>,
    pub players: Option<usize>,
    pub horizon: Option<usize>,
    pub lambda: Option<f64>,
    pub mean_pool: Option<Vec<f64>>,
    pub reward_model: Option<String>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub decimate: Option<usize>,
    pub retain_trace: Option<bool>,
    pub dump_env: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub tie_break: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Manifest {
                spec: FileConfig,
            }
            serde_json::from_str::<Manifest>(&text)
                .map(|m| m.spec)
                .map_err(|e| bad(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithms: Vec<PolicyKind>,
    pub nu_grid: Vec<f64>,
    pub num_arms: usize,
    pub num_players: usize,
    pub horizon: usize,
    pub lambda: f64,
    pub mean_pool: Vec<f64>,
    pub reward_model: RewardModel,
    pub replications: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub decimate: usize,
    pub retain_trace: bool,
    pub dump_env: bool,
    pub workers: usize,
    pub tie_break: TieBreak,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            algorithms: DEFAULT_ALGORITHMS.to_vec(),
            nu_grid: DEFAULT_NU_GRID.to_vec(),
            num_arms: 6,
            num_players: 3,
            horizon: 100_000,
            lambda: 12.3,
            mean_pool: DEFAULT_MEAN_POOL.to_vec(),
            reward_model: RewardModel::Bernoulli,
            replications: 20,
            master_seed: DEFAULT_SEED,
            output_dir: PathBuf::from("results"),
            decimate: default_decimation(100_000),
            retain_trace: false,
            dump_env: false,
            workers: 0,
            tie_break: TieBreak::LowestIndex,
        }
    }
}

impl ExperimentSpec {
    /// Window exponent of the windowed policies at `nu`.
    pub fn alpha(nu: f64) -> f64 {
        (1.0 - nu) / 2.0
    }

    pub fn env_config(&self, nu: f64, seed: u64) -> EnvConfig {
        EnvConfig {
            num_arms: self.num_arms,
            num_players: self.num_players,
            horizon: self.horizon,
            nu,
            mean_pool: self.mean_pool.clone(),
            reward_model: self.reward_model,
            seed,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.env_config(0.0, 0).violations();
        for &nu in &self.nu_grid {
            if !(0.0..1.0).contains(&nu) {
                v.push(format!("nu must lie in [0,1) (got {nu})"));
            }
        }
        for (i, nu) in self.nu_grid.iter().enumerate() {
            if self.nu_grid[..i].contains(nu) {
                v.push(format!("nu {nu} listed twice"));
            }
        }
        if self.nu_grid.is_empty() {
            v.push("at least one nu is required".to_string());
        }
        if self.algorithms.is_empty() {
            v.push("at least one algorithm is required".to_string());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            v.push(format!("lambda must be > 0 (got {})", self.lambda));
        }
        if self.horizon < self.num_arms {
            v.push(format!(
                "T must be ≥ N (T={}, N={})",
                self.horizon, self.num_arms
            ));
        }
        if self.replications == 0 {
            v.push("replications must be >= 1".to_string());
        }
        if self.decimate == 0 {
            v.push("decimate must be >= 1".to_string());
        }
        v
    }

    /// The settings that determine the outputs, in file-config form.
    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            algorithms: Some(
                self.algorithms
                    .iter()
                    .map(|k| k.name().to_string())
                    .collect(),
            ),
            nu: Some(self.nu_grid.clone()),
            arms: Some(self.num_arms),
            players: Some(self.num_players),
            horizon: Some(self.horizon),
            lambda: Some(self.lambda),
            mean_pool: Some(self.mean_pool.clone()),
            reward_model: Some(format_reward_model(&self.reward_model)),
            replications: Some(self.replications),
            seed: Some(self.master_seed),
            out: None,
            decimate: Some(self.decimate),
            retain_trace: Some(self.retain_trace),
            dump_env: Some(self.dump_env),
            workers: None,
            tie_break: Some(format_tie_break(self.tie_break).to_string()),
        }
    }
}

pub fn parse_reward_model(s: &str) -> Result<RewardModel, String> {
    if s == "bernoulli" {
        return Ok(RewardModel::Bernoulli);
    }
    if let Some(sigma) = s.strip_prefix("gaussian:") {
        return sigma
            .parse::<f64>()
            .map(|sigma| RewardModel::TruncatedGaussian { sigma })
            .map_err(|_| format!("bad gaussian sigma `{sigma}`"));
    }
    Err(format!(
        "unknown reward model `{s}` (expected bernoulli|gaussian:SIGMA)"
    ))
}

pub fn format_reward_model(m: &RewardModel) -> String {
    match m {
        RewardModel::Bernoulli => "bernoulli".to_string(),
        RewardModel::TruncatedGaussian { sigma } => format!("gaussian:{sigma}"),
    }
}

fn parse_tie_break(s: &str) -> Result<TieBreak, String> {
    match s {
        "lowest" => Ok(TieBreak::LowestIndex),
        "random" => Ok(TieBreak::Random),
        _ => Err(format!("unknown tie-break `{s}` (expected lowest|random)")),
    }
}

fn format_tie_break(t: TieBreak) -> &'static str {
    match t {
        TieBreak::LowestIndex => "lowest",
        TieBreak::Random => "random",
    }
}

/// Parses `argv` (program name first) reading the seed fallback from the
/// process environment.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    parse_args_with_env(argv, std::env::var(SEED_ENV_VAR).ok())
}

pub fn parse_args_with_env<I, T>(
    argv: I,
    env_seed: Option<String>,
) -> Result<ExperimentSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv).map_err(CliError::Clap)?;
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    merge(flags, file, env_seed)
}

fn merge(
    flags: Flags,
    file: FileConfig,
    env_seed: Option<String>,
) -> Result<ExperimentSpec, CliError> {
    let d = ExperimentSpec::default();
    let mut errors = Vec::new();

    let algorithm_names = if flags.algorithms.is_empty() {
        file.algorithms
    } else {
        Some(flags.algorithms)
    };
    let algorithms = match algorithm_names {
        None => d.algorithms.clone(),
        Some(names) => names
            .iter()
            .filter_map(|n| n.parse::<PolicyKind>().map_err(|e| errors.push(e)).ok())
            .collect(),
    };
    let nu_grid = if flags.nu.is_empty() {
        file.nu.unwrap_or(d.nu_grid.clone())
    } else {
        flags.nu
    };

    let reward_model = match flags.reward_model.or(file.reward_model) {
        None => d.reward_model,
        Some(s) => parse_reward_model(&s).unwrap_or_else(|e| {
            errors.push(e);
            d.reward_model
        }),
    };
    let tie_break = match flags.tie_break.or(file.tie_break) {
        None => d.tie_break,
        Some(s) => parse_tie_break(&s).unwrap_or_else(|e| {
            errors.push(e);
            d.tie_break
        }),
    };

    let env_seed = match env_seed {
        Some(s) => match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                errors.push(format!(
                    "{SEED_ENV_VAR} must be an unsigned integer (got `{s}`)"
                ));
                None
            }
        },
        None => None,
    };
    let master_seed = flags
        .seed
        .or(file.seed)
        .or(env_seed)
        .unwrap_or(d.master_seed);

    let horizon = flags.horizon.or(file.horizon).unwrap_or(d.horizon);
    let spec = ExperimentSpec {
        algorithms,
        nu_grid,
        num_arms: flags.arms.or(file.arms).unwrap_or(d.num_arms),
        num_players: flags.players.or(file.players).unwrap_or(d.num_players),
        horizon,
        lambda: flags.lambda.or(file.lambda).unwrap_or(d.lambda),
        mean_pool: flags
            .mean_pool
            .or(file.mean_pool)
            .unwrap_or(d.mean_pool.clone()),
        reward_model,
        replications: flags
            .replications
            .or(file.replications)
            .unwrap_or(d.replications),
        master_seed,
        output_dir: flags.out.or(file.out).unwrap_or(d.output_dir.clone()),
        decimate: flags
            .decimate
            .or(file.decimate)
            .unwrap_or_else(|| default_decimation(horizon)),
        retain_trace: flags.retain_trace || file.retain_trace.unwrap_or(false),
        dump_env: flags.dump_env || file.dump_env.unwrap_or(false),
        workers: flags.workers.or(file.workers).unwrap_or(d.workers),
        tie_break,
    };
    errors.extend(spec.violations());
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(CliError::Invalid(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentSpec, CliError> {
        let argv = std::iter::once("swarmbandit").chain(args.iter().copied());
        parse_args_with_env(argv, None)
    }

    #[test]
    fn no_args_gives_reference_defaults() {
        let spec = parse(&[]).unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!((spec.num_arms, spec.num_players, spec.lambda), (6, 3, 12.3));
        assert_eq!(spec.nu_grid, vec![0.15, 0.3, 0.45]);
        assert_eq!(spec.mean_pool, vec![0.05, 0.22, 0.39, 0.56, 0.73, 0.90]);
        assert_eq!(spec.decimate, 100);
    }

    #[test]
    fn explicit_flags() {
        let spec = parse(&[
            "--arms",
            "6",
            "--players",
            "3",
            "--nu",
            "0.3",
            "--lambda",
            "12.3",
            "--horizon",
            "100000",
        ])
        .unwrap();
        assert_eq!(spec.nu_grid, vec![0.3]);
        assert!((ExperimentSpec::alpha(spec.nu_grid[0]) - 0.35).abs() < 1e-15);

        let spec = parse(&[
            "--algorithm",
            "ucb",
            "--algorithm",
            "oracle",
            "--reward-model",
            "gaussian:0.25",
            "--mean-pool",
            "0.1,0.2,0.3,0.4,0.5,0.6,0.7",
            "--tie-break",
            "random",
            "--decimate",
            "1",
        ])
        .unwrap();
        assert_eq!(spec.algorithms, vec![PolicyKind::Ucb, PolicyKind::Oracle]);
        assert_eq!(
            spec.reward_model,
            RewardModel::TruncatedGaussian { sigma: 0.25 }
        );
        assert_eq!(spec.mean_pool.len(), 7);
        assert_eq!(spec.tie_break, TieBreak::Random);
        assert_eq!(spec.decimate, 1);
    }

    #[test]
    fn too_many_players() {
        match parse(&["--players", "7", "--arms", "6"]) {
            Err(CliError::Invalid(v)) => {
                assert!(v.iter().any(|m| m.contains("M must be ≤ N")), "{v:?}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        match parse(&[
            "--nu",
            "1.2",
            "--nu",
            "-0.1",
            "--lambda",
            "0",
            "--arms",
            "8",
            "--horizon",
            "5",
            "--algorithm",
            "greedy",
        ]) {
            Err(CliError::Invalid(v)) => {
                let joined = v.join("\n");
                for needle in [
                    "unknown algorithm",
                    "got 1.2",
                    "got -0.1",
                    "lambda",
                    "mean pool has 6",
                    "T must be ≥ N",
                ] {
                    assert!(joined.contains(needle), "missing {needle}: {joined}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(matches!(parse(&["--bogus"]), Err(CliError::Clap(_))));
    }

    #[test]
    fn seed_precedence() {
        let argv = ["swarmbandit"];
        assert_eq!(
            parse_args_with_env(argv, Some("77".into()))
                .unwrap()
                .master_seed,
            77
        );
        assert_eq!(
            parse_args_with_env(["swarmbandit", "--seed", "5"], Some("77".into()))
                .unwrap()
                .master_seed,
            5
        );
        assert_eq!(
            parse_args_with_env(argv, None).unwrap().master_seed,
            DEFAULT_SEED
        );
        assert!(parse_args_with_env(argv, Some("x".into())).is_err());
    }

    #[test]
    fn file_values_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(
            &path,
            "horizon = 5000\nnu = [0.2]\nalgorithms = [\"ucb\"]\nseed = 9\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let spec = parse(&["--config", p, "--horizon", "7000"]).unwrap();
        assert_eq!(spec.horizon, 7000);
        assert_eq!(spec.nu_grid, vec![0.2]);
        assert_eq!(spec.algorithms, vec![PolicyKind::Ucb]);
        assert_eq!(spec.master_seed, 9);
        assert_eq!(spec.decimate, 7);

        fs::write(&path, "horizn = 5\n").unwrap();
        assert!(matches!(parse(&["--config", p]), Err(CliError::Config(_))));
    }

    #[test]
    fn file_config_round_trips_the_spec() {
        let spec = parse(&[
            "--reward-model",
            "gaussian:0.1",
            "--nu",
            "0.45",
            "--seed",
            "3",
        ])
        .unwrap();
        let file = spec.to_file_config();
        let flags = Flags::try_parse_from(["swarmbandit"]).unwrap();
        let back = merge(flags, file, None).unwrap();
        assert_eq!(back, spec);
    }
}
