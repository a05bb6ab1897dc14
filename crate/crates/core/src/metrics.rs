//! Post-run diagnostics and CSV output.

use std::io::{self, Write};

use crate::env::MeanTimeline;
use crate::sim::{rank_order, top_arms, RegretLedger, StepOutcome};
use crate::{Error, Result};

pub const RUN_CSV_HEADER: &str =
    "algorithm,nu,lambda,seed,replication,t,regret,ratio,collisions,misid_Nk_max,disagreements";
pub const AGGREGATE_CSV_HEADER: &str = "algorithm,nu,t,ratio_mean,ratio_stderr";

/// `t^((1 + nu) / 2) * ln t`, the growth order the regret is normalized by.
pub fn regret_normalizer(t: usize, nu: f64) -> f64 {
    let t = t as f64;
    t.powf((1.0 + nu) / 2.0) * t.ln()
}

pub fn ratio_at(regret: f64, t: usize, nu: f64) -> f64 {
    regret / regret_normalizer(t, nu)
}

/// `R(t) / (t^((1+nu)/2) ln t)` on a grid of times `t >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries {
    pub nu: f64,
    pub times: Vec<usize>,
    pub ratio: Vec<f64>,
}

pub fn regret_ratio(ledger: &RegretLedger, nu: f64) -> RatioSeries {
    let times: Vec<usize> = (2..=ledger.horizon()).collect();
    regret_ratio_on(ledger, nu, &times)
}

/// Ratio restricted to `times` (each in `2..=T`).
pub fn regret_ratio_on(ledger: &RegretLedger, nu: f64, times: &[usize]) -> RatioSeries {
    RatioSeries {
        nu,
        times: times.to_vec(),
        ratio: times
            .iter()
            .map(|&t| ratio_at(ledger.regret_at(t), t, nu))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MisidentCounters {
    /// `N_k(T)`: steps where player `k`'s top-`M` estimate was not the true
    /// top-`M` set. `None` when the policy keeps no such estimate.
    pub set_misid: Option<Vec<u64>>,
    /// `N̂_k(T)`: steps where player `k` did not pull the rank-`k` arm.
    pub rank_misid: Vec<u64>,
    /// Steps where the players' top-`M` estimates were not all identical.
    pub disagreements: u64,
}

/// Recounts the misidentification counters from a retained trace.
pub fn misident_counts(
    trace: Option<&[StepOutcome]>,
    timeline: &MeanTimeline,
) -> Result<MisidentCounters> {
    let trace = trace.ok_or(Error::TraceNotRetained)?;
    let Some(first) = trace.first() else {
        return Ok(MisidentCounters::default());
    };
    let m = first.selections.len();
    let tracks_sets = first.estimated_sets.is_some();
    let mut out = MisidentCounters {
        set_misid: tracks_sets.then(|| vec![0; m]),
        rank_misid: vec![0; m],
        disagreements: 0,
    };
    for step in trace {
        let means = timeline.means_at(step.t)?;
        let theta = rank_order(means);
        for (k, &arm) in step.selections.iter().enumerate() {
            if arm != theta[k] {
                out.rank_misid[k] += 1;
            }
        }
        if let (Some(counts), Some(sets)) = (out.set_misid.as_mut(), step.estimated_sets.as_ref()) {
            let (truth, _) = top_arms(means, m);
            for (k, set) in sets.iter().enumerate() {
                if *set != truth {
                    counts[k] += 1;
                }
            }
            if sets.iter().any(|s| s != &sets[0]) {
                out.disagreements += 1;
            }
        }
    }
    Ok(out)
}

/// Pointwise mean and standard error across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub nu: f64,
    pub times: Vec<usize>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn aggregate(runs: &[RatioSeries]) -> Result<AggregateSeries> {
    let first = runs.first().ok_or(Error::EmptyAggregate)?;
    if runs
        .iter()
        .any(|r| r.times != first.times || r.ratio.len() != first.times.len())
    {
        return Err(Error::MismatchedGrids);
    }
    let n = runs.len() as f64;
    let len = first.times.len();
    let mut mean = vec![0.0; len];
    let mut stderr = vec![0.0; len];
    for i in 0..len {
        let mu = runs.iter().map(|r| r.ratio[i]).sum::<f64>() / n;
        mean[i] = mu;
        if runs.len() > 1 {
            let var = runs.iter().map(|r| (r.ratio[i] - mu).powi(2)).sum::<f64>() / (n - 1.0);
            stderr[i] = (var / n).sqrt();
        }
    }
    Ok(AggregateSeries {
        nu: first.nu,
        times: first.times.clone(),
        mean,
        stderr,
    })
}

/// Default decimation stride `ceil(T / 1000)`.
pub fn default_decimation(horizon: usize) -> usize {
    horizon.div_ceil(1000).max(1)
}

/// Every `step`-th time plus `T` itself, skipping `t < 2`.
pub fn decimated_times(horizon: usize, step: usize) -> Vec<usize> {
    let step = step.max(1);
    let mut times: Vec<usize> = (1..=horizon / step)
        .map(|i| i * step)
        .filter(|&t| t >= 2)
        .collect();
    if horizon >= 2 && times.last() != Some(&horizon) {
        times.push(horizon);
    }
    times
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Float formatting used by every CSV column.
pub fn csv_float(x: f64) -> String {
    format_sig(x, 9)
}

/// Identifies one run in the CSV rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub algorithm: String,
    pub nu: f64,
    pub lambda: f64,
    pub seed: u64,
    pub replication: usize,
}

pub fn write_run_csv<W: Write>(
    out: &mut W,
    meta: &RunMeta,
    ledger: &RegretLedger,
    times: &[usize],
) -> io::Result<()> {
    writeln!(out, "{RUN_CSV_HEADER}")?;
    for &t in times {
        let regret = ledger.regret_at(t);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            meta.algorithm,
            csv_float(meta.nu),
            csv_float(meta.lambda),
            meta.seed,
            meta.replication,
            t,
            csv_float(regret),
            csv_float(ratio_at(regret, t, meta.nu)),
            ledger.collisions[t - 1],
            ledger.misid_max[t - 1],
            ledger.disagreements[t - 1],
        )?;
    }
    Ok(())
}

pub fn write_aggregate_header<W: Write>(out: &mut W) -> io::Result<()> {
    writeln!(out, "{AGGREGATE_CSV_HEADER}")
}

pub fn write_aggregate_rows<W: Write>(
    out: &mut W,
    algorithm: &str,
    series: &AggregateSeries,
) -> io::Result<()> {
    for i in 0..series.times.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            algorithm,
            csv_float(series.nu),
            series.times[i],
            csv_float(series.mean[i]),
            csv_float(series.stderr[i]),
        )?;
    }
    Ok(())
}
