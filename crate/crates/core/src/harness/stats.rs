use serde::{Deserialize, Serialize};

use super::experiment::{ExperimentResult, HarnessError};
use crate::state_space::CoverageCurve;

pub const DEFAULT_PERCENTILES: [u32; 3] = [5, 50, 95];

/// Per-iteration percentiles of cumulative coverage across trials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bands {
    pub percentiles: Vec<u32>,
    /// `rows[i][j]` is percentile `percentiles[j]` at iteration `i`.
    pub rows: Vec<Vec<u32>>,
}

impl Bands {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, percentile: u32) -> Option<Vec<u32>> {
        let j = self.percentiles.iter().position(|&p| p == percentile)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Nearest-rank percentile of an ascending slice: the value at rank
/// `ceil(p/100 · n)`, clamped to `[1, n]`.
pub fn nearest_rank(sorted: &[u32], p: u32) -> u32 {
    let n = sorted.len();
    let rank = ((p as f64 / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn percentile_bands_of(curves: &[&CoverageCurve], percentiles: &[u32]) -> Bands {
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    let rows = (0..len as u64)
        .map(|i| {
            let mut v: Vec<u32> = curves.iter().map(|c| c.at(i)).collect();
            v.sort_unstable();
            percentiles.iter().map(|&p| nearest_rank(&v, p)).collect()
        })
        .collect();
    Bands {
        percentiles: percentiles.to_vec(),
        rows,
    }
}

pub fn percentile_bands(result: &ExperimentResult, percentiles: &[u32]) -> Bands {
    let curves: Vec<&CoverageCurve> = result.curves().collect();
    percentile_bands_of(&curves, percentiles)
}

pub fn saturation_iteration(curve: &CoverageCurve, total: u32) -> Option<u64> {
    curve.saturation_iteration(total)
}

/// Median that treats unsaturated trials as finishing after the budget.
/// When the median lands on such a trial the value is the budget and
/// `censored` is set: the true median is at least that large.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensoredMedian {
    pub value: f64,
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub label: String,
    pub trials: usize,
    pub saturated: usize,
    pub saturation_rate: f64,
    /// Over saturated trials only.
    pub median_saturation: Option<f64>,
    pub mean_saturation: Option<f64>,
    /// Over all trials, unsaturated ones ranked after the budget.
    pub median_saturation_all: CensoredMedian,
    pub mean_seed_coverage: f64,
    pub mean_final_coverage: f64,
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

pub fn method_stats(r: &ExperimentResult) -> MethodStats {
    let n = r.trials.len();
    let mut sat: Vec<f64> = r.trials.iter().filter_map(|t| t.saturation.map(|s| s as f64)).collect();
    sat.sort_by(f64::total_cmp);
    // Unsaturated trials rank as budget + 1.
    let mut all: Vec<f64> = r
        .trials
        .iter()
        .map(|t| t.saturation.map(|s| s as f64).unwrap_or(r.max_iter as f64 + 1.0))
        .collect();
    all.sort_by(f64::total_cmp);
    let m = median(&all).unwrap_or(f64::NAN);
    let censored = m > r.max_iter as f64;
    let mean = |f: &dyn Fn(&super::TrialResult) -> f64| r.trials.iter().map(f).sum::<f64>() / n.max(1) as f64;
    MethodStats {
        label: r.label.clone(),
        trials: n,
        saturated: sat.len(),
        saturation_rate: sat.len() as f64 / n.max(1) as f64,
        median_saturation: median(&sat),
        mean_saturation: (!sat.is_empty()).then(|| sat.iter().sum::<f64>() / sat.len() as f64),
        median_saturation_all: CensoredMedian {
            value: if censored { r.max_iter as f64 } else { m },
            censored,
        },
        mean_seed_coverage: mean(&|t| t.seed_coverage as f64),
        mean_final_coverage: mean(&|t| t.curve.final_count() as f64),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: MethodStats,
    pub b: MethodStats,
    /// `b − a` on saturated-only medians.
    pub median_delta: Option<f64>,
    /// `(b − a) / b` in percent on saturated-only medians.
    pub reduction_pct: Option<f64>,
    pub mean_delta: Option<f64>,
    pub mean_reduction_pct: Option<f64>,
    /// Same reduction using medians over all trials.
    pub reduction_pct_all: f64,
    /// Set when either all-trials median is censored. If only `b` is,
    /// `reduction_pct_all` is a lower bound on the true reduction.
    pub censored: bool,
}

/// Summarizes how much sooner `a` saturates than `b`.
pub fn compare(a: &ExperimentResult, b: &ExperimentResult) -> Result<Comparison, HarnessError> {
    if a.max_iter != b.max_iter {
        return Err(HarnessError::BudgetMismatch {
            a: a.max_iter,
            b: b.max_iter,
        });
    }
    let (sa, sb) = (method_stats(a), method_stats(b));
    let pair = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => (Some(y - x), (y > 0.0).then(|| (y - x) / y * 100.0)),
        _ => (None, None),
    };
    let (median_delta, reduction_pct) = pair(sa.median_saturation, sb.median_saturation);
    let (mean_delta, mean_reduction_pct) = pair(sa.mean_saturation, sb.mean_saturation);
    let (ma, mb) = (sa.median_saturation_all.value, sb.median_saturation_all.value);
    Ok(Comparison {
        median_delta,
        reduction_pct,
        mean_delta,
        mean_reduction_pct,
        reduction_pct_all: if mb > 0.0 { (mb - ma) / mb * 100.0 } else { 0.0 },
        censored: sa.median_saturation_all.censored || sb.median_saturation_all.censored,
        a: sa,
        b: sb,
    })
}
