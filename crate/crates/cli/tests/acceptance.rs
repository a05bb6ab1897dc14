//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p swarmbandit-cli --test acceptance`; exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use swarmbandit::batch;
use swarmbandit::env::{EnvConfig, MeanTimeline, RewardModel};
use swarmbandit::metrics::{decimated_times, ratio_at};
use swarmbandit::policies::PolicyKind;
use swarmbandit::seeding::stream_rng;
use swarmbandit::sim::{resolve_collisions, run_episode, RunSettings, StepOutcome};
use swarmbandit::window::{fixed_mean, to_fixed, window_width, WindowStats};
use swarmbandit_cli::runner::{self, plan};
use swarmbandit_cli::ExperimentSpec;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn trace_of(
    env: &EnvConfig,
    tl: &Arc<MeanTimeline>,
    kind: PolicyKind,
    seed: u64,
) -> Vec<StepOutcome> {
    let settings = RunSettings::new(kind, 12.3, seed).with_trace();
    run_episode(env, tl, &settings).unwrap().trace.unwrap()
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean cumulative regret on a time grid, per (algorithm, nu), from the
/// default sweep: 2 algorithms x 3 nu x 20 replications at T = 1e5.
struct Sweep {
    grid: Vec<usize>,
    mean_regret: BTreeMap<(PolicyKind, u64), Vec<f64>>,
    spec: ExperimentSpec,
}

impl Sweep {
    fn run() -> Sweep {
        let spec = ExperimentSpec::default();
        let horizon = spec.horizon;
        let mut grid = decimated_times(horizon, 100);
        for i in 0..=200 {
            grid.push((1e4 * 10f64.powf(i as f64 / 200.0)).round() as usize);
        }
        grid.sort_unstable();
        grid.dedup();

        let plans = plan(&spec);
        let regrets = batch::map_runs(&plans, 0, |p| {
            let env = spec.env_config(p.nu, p.env_seed);
            let tl = Arc::new(MeanTimeline::generate(&env).unwrap());
            let ledger = run_episode(
                &env,
                &tl,
                &RunSettings::new(p.algorithm, spec.lambda, p.run_seed),
            )
            .unwrap()
            .ledger;
            grid.iter()
                .map(|&t| ledger.regret_at(t))
                .collect::<Vec<f64>>()
        });

        let mut mean_regret = BTreeMap::new();
        for (chunk, plans) in regrets
            .chunks(spec.replications)
            .zip(plans.chunks(spec.replications))
        {
            let mut mean = vec![0.0; grid.len()];
            for run in chunk {
                for (m, r) in mean.iter_mut().zip(run) {
                    *m += r / chunk.len() as f64;
                }
            }
            mean_regret.insert((plans[0].algorithm, plans[0].nu.to_bits()), mean);
        }
        Sweep {
            grid,
            mean_regret,
            spec,
        }
    }

    fn series(&self, kind: PolicyKind, nu: f64) -> &[f64] {
        &self.mean_regret[&(kind, nu.to_bits())]
    }

    fn cells(&self) -> Vec<(PolicyKind, f64)> {
        let mut v = Vec::new();
        for &k in &self.spec.algorithms {
            for &nu in &self.spec.nu_grid {
                v.push((k, nu));
            }
        }
        v
    }
}

fn ac1_bounded_ratio(sweep: &Sweep) -> Verdict {
    let horizon = sweep.spec.horizon;
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, nu) in sweep.cells() {
        let regret = sweep.series(kind, nu);
        let ratio: Vec<f64> = sweep
            .grid
            .iter()
            .zip(regret)
            .map(|(&t, &r)| ratio_at(r, t, nu))
            .collect();
        let at_t = *ratio.last().unwrap();
        let running_max = sweep
            .grid
            .iter()
            .zip(&ratio)
            .filter(|(&t, _)| t >= 1000)
            .map(|(_, &r)| r)
            .fold(f64::MIN, f64::max);
        let late: Vec<(f64, f64)> = sweep
            .grid
            .iter()
            .zip(&ratio)
            .filter(|(&t, _)| t >= horizon / 2)
            .map(|(&t, &r)| (t as f64, r))
            .collect();
        let (ts, rs): (Vec<f64>, Vec<f64>) = late.into_iter().unzip();
        let slope = ls_slope(&ts, &rs);
        let level = rs.iter().sum::<f64>() / rs.len() as f64;
        let rel = slope * (horizon as f64 / 2.0) / level;
        let cell_ok = at_t <= 1.05 * running_max && rel <= 0.10;
        ok &= cell_ok;
        parts.push(format!(
            "{kind}@{nu}: r(T)={at_t:.3} max={running_max:.3} rel-slope={rel:+.3}{}",
            if cell_ok { "" } else { " (x)" }
        ));
    }
    check(ok, parts.join("; "))
}

fn ac2_ordering(sweep: &Sweep) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for &nu in &sweep.spec.nu_grid {
        let rr = *sweep.series(PolicyKind::RrSwUcbSharp, nu).last().unwrap();
        let dlp = *sweep.series(PolicyKind::SwDlp, nu).last().unwrap();
        let gap = (dlp - rr) / dlp;
        ok &= rr < dlp && gap >= 0.20;
        parts.push(format!(
            "nu={nu}: RR {rr:.0} vs SW-DLP {dlp:.0} (gap {:.1}%)",
            100.0 * gap
        ));
    }
    check(ok, parts.join("; "))
}

fn ac3_growth_exponent(sweep: &Sweep) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, nu) in sweep.cells() {
        let (xs, ys): (Vec<f64>, Vec<f64>) = sweep
            .grid
            .iter()
            .zip(sweep.series(kind, nu))
            .filter(|(&t, _)| (10_000..=100_000).contains(&t))
            .map(|(&t, &r)| ((t as f64).ln(), r.ln()))
            .unzip();
        let slope = ls_slope(&xs, &ys);
        let bound = (1.0 + nu) / 2.0 + 0.15;
        ok &= slope <= bound;
        parts.push(format!("{kind}@{nu}: slope {slope:.3} (bound {bound:.3})"));
    }
    check(ok, parts.join("; "))
}

fn ac4_oracle_zero() -> Verdict {
    let mut worst = 0.0f64;
    let mut runs = 0;
    for nu in [0.15, 0.3, 0.45] {
        for seed in 0..10 {
            let env = EnvConfig {
                nu,
                seed,
                ..EnvConfig::default()
            };
            let tl = Arc::new(MeanTimeline::generate(&env).unwrap());
            let ledger = run_episode(&env, &tl, &RunSettings::new(PolicyKind::Oracle, 12.3, seed))
                .unwrap()
                .ledger;
            worst = worst.max(ledger.final_regret().abs());
            runs += 1;
        }
    }
    check(
        worst == 0.0,
        format!("{runs} environments at T=1e5, max |R(T)| = {worst}"),
    )
}

fn ac5_collisions() -> Verdict {
    let mut cases = 0;
    for code in 0..27usize {
        let sel = [code % 3, (code / 3) % 3, code / 9];
        let mut expected = Vec::new();
        for arm in 0..3 {
            let on_arm: Vec<usize> = (0..3).filter(|&j| sel[j] == arm).collect();
            if on_arm.len() == 1 {
                expected.push((arm, on_arm[0]));
            }
        }
        let got = resolve_collisions(&sel);
        if got != expected {
            return Err(format!(
                "selections {sel:?}: got {got:?}, expected {expected:?}"
            ));
        }
        cases += 1;
    }
    check(cases == 27, format!("{cases}/27 selection vectors match"))
}

fn ac6_window_oracle() -> Verdict {
    let (num_arms, alpha, lambda) = (6, 0.35, 12.3);
    let mut steps = 0;
    for trace in 0..100u64 {
        let mut rng = stream_rng(trace, "acceptance/window", 0);
        let mut stats = WindowStats::new(num_arms, alpha, lambda);
        let mut raw: Vec<(usize, f64)> = Vec::new();
        for t in 1..=1000 {
            let arm = rng.random_range(0..num_arms);
            let reward: f64 = rng.random();
            stats.record(t, arm, reward).unwrap();
            raw.push((arm, reward));
            let width = window_width(t, alpha, lambda);
            for a in 0..num_arms {
                let window = raw[t - width..].iter().filter(|(x, _)| *x == a);
                let count = window.clone().count() as u64;
                let sum: u128 = window.map(|&(_, r)| to_fixed(r)).sum();
                let mean = (count > 0).then(|| fixed_mean(sum, count));
                if stats.count(a) != count
                    || stats.sums()[a] != sum
                    || stats.windowed_mean(a) != mean
                {
                    return Err(format!(
                        "trace {trace}, t={t}, arm {a}: incremental state differs from recount"
                    ));
                }
            }
            steps += 1;
        }
    }
    check(true, format!("{steps} steps x 6 arms identical to recount"))
}

fn ac7_window_forgetting() -> Verdict {
    let (b, horizon, nu) = (500, 5000, 0.3);
    let alpha = (1.0 - nu) / 2.0;
    let before = vec![0.05, 0.22, 0.39, 0.56, 0.73, 0.90];
    let after = vec![0.90, 0.73, 0.56, 0.39, 0.22, 0.05];
    let tl = Arc::new(MeanTimeline::from_segments(horizon, &[1, b], vec![before, after]).unwrap());
    let env = EnvConfig {
        horizon,
        nu,
        ..EnvConfig::default()
    };
    let mut checked = 0;
    for kind in [
        PolicyKind::RrSwUcbSharp,
        PolicyKind::SwDlp,
        PolicyKind::SwUcbSharp,
    ] {
        for seed in 0..3 {
            for step in trace_of(&env, &tl, kind, seed) {
                let t = step.t;
                if t <= b + window_width(t - 1, alpha, 12.3) {
                    continue;
                }
                for (player, start) in step.window_starts.iter().enumerate() {
                    match start {
                        Some(s) if *s >= b => checked += 1,
                        other => return Err(format!("{kind} seed {seed}: player {player} at t={t} has window start {other:?}")),
                    }
                }
            }
        }
    }
    check(
        checked > 0,
        format!("{checked} player-steps after b+tau hold only post-break observations"),
    )
}

fn ac8_deterministic_identification() -> Verdict {
    let (n, m, horizon) = (6usize, 3usize, 10_000usize);
    let limit = n + 5 * m;
    let mut rr_last = Vec::new();
    let mut dlp_frac = Vec::new();
    for seed in 0..10 {
        let env = EnvConfig {
            num_arms: n,
            num_players: m,
            horizon,
            nu: 0.0,
            reward_model: RewardModel::TruncatedGaussian { sigma: 0.0 },
            seed,
            ..EnvConfig::default()
        };
        let tl = Arc::new(MeanTimeline::generate(&env).unwrap());
        assert!(tl.breakpoints().is_empty());
        let rr = trace_of(&env, &tl, PolicyKind::RrSwUcbSharp, seed);
        rr_last.push(
            rr.iter()
                .filter(|s| s.inst_regret > 0.0)
                .map(|s| s.t)
                .max()
                .unwrap_or(0),
        );
        let dlp = trace_of(&env, &tl, PolicyKind::SwDlp, seed);
        let tail = &dlp[3 * horizon / 4..];
        dlp_frac
            .push(tail.iter().filter(|s| s.inst_regret == 0.0).count() as f64 / tail.len() as f64);
    }
    let rr_ok = rr_last.iter().all(|&t| t <= limit);
    let dlp_ok = dlp_frac.iter().all(|&f| f >= 0.95);
    let worst_frac = dlp_frac.iter().copied().fold(1.0, f64::min);
    check(
        rr_ok && dlp_ok,
        format!(
            "RR last regret step per seed {rr_last:?} (limit t<={limit}); SW-DLP min zero-regret share in final quarter {:.1}% (need 95%)",
            100.0 * worst_frac
        ),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn ac9_reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut snaps = Vec::new();
    for workers in [1, 4] {
        let spec = ExperimentSpec {
            horizon: 5000,
            replications: 4,
            decimate: 5,
            retain_trace: true,
            dump_env: true,
            workers,
            output_dir: dir.path().join(format!("w{workers}")),
            ..ExperimentSpec::default()
        };
        runner::run_experiment(&spec, false).map_err(|e| e.to_string())?;
        snaps.push(snapshot(&spec.output_dir));
    }
    let mode = if batch::parallel_enabled() {
        "parallel"
    } else {
        "sequential fallback"
    };
    check(
        snaps[0] == snaps[1],
        format!(
            "{} files byte-identical, workers=1 vs workers=4 ({mode})",
            snaps[0].len()
        ),
    )
}

fn ac10_single_player_equivalence() -> Verdict {
    for seed in 0..10 {
        let env = EnvConfig {
            num_players: 1,
            horizon: 10_000,
            nu: 0.3,
            seed,
            ..EnvConfig::default()
        };
        let tl = Arc::new(MeanTimeline::generate(&env).unwrap());
        let arms = |kind| -> Vec<usize> {
            trace_of(&env, &tl, kind, 100 + seed)
                .iter()
                .map(|s| s.selections[0])
                .collect()
        };
        let (a, b) = (arms(PolicyKind::SwDlp), arms(PolicyKind::SwUcbSharp));
        if let Some(t) = a.iter().zip(&b).position(|(x, y)| x != y) {
            return Err(format!(
                "seed {seed}: sequences differ first at t={}",
                t + 1
            ));
        }
    }
    check(
        true,
        "10 seeds x 1e4 steps, identical arm sequences".to_string(),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let sweep = Sweep::run();
    eprintln!("sweep: 120 runs in {:.1}s", started.elapsed().as_secs_f64());

    let results: Vec<(&str, &str, Verdict)> = vec![
        ("AC1", "bounded regret ratio", ac1_bounded_ratio(&sweep)),
        (
            "AC2",
            "RR-SW-UCB# at least 20% below SW-DLP",
            ac2_ordering(&sweep),
        ),
        (
            "AC3",
            "sublinear growth exponent",
            ac3_growth_exponent(&sweep),
        ),
        ("AC4", "oracle has zero regret", ac4_oracle_zero()),
        ("AC5", "collision semantics", ac5_collisions()),
        (
            "AC6",
            "windowed statistics match recount",
            ac6_window_oracle(),
        ),
        ("AC7", "window forgetting", ac7_window_forgetting()),
        (
            "AC8",
            "deterministic-reward identification",
            ac8_deterministic_identification(),
        ),
        (
            "AC9",
            "sequential/parallel reproducibility",
            ac9_reproducibility(),
        ),
        (
            "AC10",
            "single-player SW-DLP equals SW-UCB#",
            ac10_single_player_equivalence(),
        ),
    ];
    let mut failed = 0;
    for (id, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("[{id}] PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[{id}] FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
