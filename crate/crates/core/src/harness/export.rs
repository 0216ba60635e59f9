use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{ExperimentResult, HarnessError};
use super::stats::{compare, method_stats, percentile_bands, Bands, Comparison, MethodStats, DEFAULT_PERCENTILES};
use crate::util::write_atomic;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Band CSV: `iteration,p5,p50,p95`, one row per change point plus the
/// final iteration.
pub fn write_bands_csv<W: Write>(bands: &Bands, mut w: W) -> std::io::Result<()> {
    let header: Vec<String> = bands.percentiles.iter().map(|p| format!("p{p}")).collect();
    writeln!(w, "iteration,{}", header.join(","))?;
    let last = bands.rows.len().saturating_sub(1);
    for (i, row) in bands.rows.iter().enumerate() {
        if i == 0 || i == last || *row != bands.rows[i - 1] {
            let vals: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(w, "{i},{}", vals.join(","))?;
        }
    }
    Ok(())
}

pub fn read_bands_csv<R: BufRead>(r: R) -> Result<Bands, HarnessError> {
    let bad = |line: usize, why: &str| HarnessError::Invalid(format!("bands csv line {line}: {why}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))??;
    let mut cols = header.split(',');
    if cols.next() != Some("iteration") {
        return Err(bad(1, "first column must be `iteration`"));
    }
    let percentiles = cols
        .map(|c| c.strip_prefix('p').and_then(|n| n.parse().ok()).ok_or_else(|| bad(1, "bad percentile column")))
        .collect::<Result<Vec<u32>, _>>()?;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let nums = line
            .split(',')
            .map(|v| v.trim().parse::<u64>().map_err(|_| bad(n + 2, "not an integer")))
            .collect::<Result<Vec<u64>, _>>()?;
        if nums.len() != percentiles.len() + 1 {
            return Err(bad(n + 2, "wrong column count"));
        }
        let it = nums[0] as usize;
        if it < rows.len() {
            return Err(bad(n + 2, "iterations must increase"));
        }
        let row: Vec<u32> = nums[1..].iter().map(|&v| v as u32).collect();
        while rows.len() < it {
            let prev = rows.last().cloned().ok_or_else(|| bad(n + 2, "first row must be iteration 0"))?;
            rows.push(prev);
        }
        rows.push(row);
    }
    Ok(Bands { percentiles, rows })
}

/// Per-trial table, one line per trial.
pub fn trials_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("trial,instance_seed,rrt_seed,ground_truth,seed_coverage,final_count,saturation\n");
    for t in &result.trials {
        let sat = t.saturation.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            t.index,
            t.instance_seed,
            t.rrt_seed,
            t.ground_truth,
            t.seed_coverage,
            t.curve.final_count(),
            sat
        );
    }
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Coverage plot: per method a shaded band between the lowest and highest
/// percentile and a line for the median (or middle percentile).
pub fn svg_plot(series: &[(String, Bands)], title: &str) -> String {
    let (w, h) = (800.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 160.0, 40.0, 50.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let max_x = series.iter().map(|(_, b)| b.len().saturating_sub(1)).max().unwrap_or(0).max(1) as f64;
    let max_y = series
        .iter()
        .flat_map(|(_, b)| b.rows.iter().flatten().copied())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let sx = |x: f64| ml + x / max_x * pw;
    let sy = |y: f64| mt + ph - y / max_y * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, ml + pw / 2.0, xml_escape(title));
    // Axes and ticks.
    let _ = writeln!(
        s,
        r##"<path d="M{ml},{mt} V{} H{}" fill="none" stroke="#333"/>"##,
        mt + ph,
        ml + pw
    );
    for k in 0..=4 {
        let fx = max_x * k as f64 / 4.0;
        let fy = max_y * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(fx), mt + ph + 16.0, fx.round());
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, ml - 6.0, sy(fy) + 4.0, fy.round());
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">iterations</text>"#, ml + pw / 2.0, h - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">novel states</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (k, (label, bands)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let n = bands.percentiles.len();
        if n == 0 || bands.is_empty() {
            continue;
        }
        let lo: Vec<u32> = bands.rows.iter().map(|r| r[0]).collect();
        let hi: Vec<u32> = bands.rows.iter().map(|r| r[n - 1]).collect();
        let mid: Vec<u32> = bands.rows.iter().map(|r| r[n / 2]).collect();
        let mut poly = steps(&hi, &sx, &sy);
        let mut back = steps(&lo, &sx, &sy);
        back.reverse();
        poly.extend(back);
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            join_points(&poly)
        );
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            join_points(&steps(&mid, &sx, &sy))
        );
        let ly = mt + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            ml + pw + 14.0,
            ly - 10.0,
            ml + pw + 32.0,
            ly,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Step-function vertices at the change points of `ys`.
fn steps(ys: &[u32], sx: &dyn Fn(f64) -> f64, sy: &dyn Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for (i, &y) in ys.iter().enumerate() {
        if i == 0 {
            pts.push((sx(0.0), sy(y as f64)));
        } else if y != ys[i - 1] {
            pts.push((sx(i as f64), sy(ys[i - 1] as f64)));
            pts.push((sx(i as f64), sy(y as f64)));
        }
    }
    if let Some(&y) = ys.last() {
        pts.push((sx((ys.len() - 1).max(1) as f64), sy(y as f64)));
    }
    pts
}

fn join_points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect::<Vec<_>>().join(" ")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedComparison {
    pub method: String,
    pub baseline: String,
    #[serde(flatten)]
    pub comparison: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub template: String,
    pub max_iter: u64,
    pub master_seed: u64,
    pub methods: Vec<MethodStats>,
    pub comparisons: Vec<NamedComparison>,
}

/// File-system-safe directory name for a method label.
pub fn label_dir(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn summarize(results: &[ExperimentResult], baseline: Option<&str>) -> Result<Summary, HarnessError> {
    let first = results.first().ok_or(HarnessError::EmptyResult)?;
    let mut comparisons = Vec::new();
    if let Some(base) = baseline {
        let b = results
            .iter()
            .find(|r| r.label == base)
            .ok_or_else(|| HarnessError::Invalid(format!("baseline `{base}` is not one of the methods")))?;
        for a in results.iter().filter(|r| r.label != base) {
            comparisons.push(NamedComparison {
                method: a.label.clone(),
                baseline: base.to_string(),
                comparison: compare(a, b)?,
            });
        }
    }
    Ok(Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        template: first.template.clone(),
        max_iter: first.max_iter,
        master_seed: first.master_seed,
        methods: results.iter().map(method_stats).collect(),
        comparisons,
    })
}

/// Writes the full results directory. Nothing is written when there is no
/// trial to report.
///
/// ```text
/// <dir>/<label>/trial_000.csv   coverage curve per trial
/// <dir>/<label>/bands.csv       5th/50th/95th percentile per iteration
/// <dir>/<label>/trials.csv      seeds, totals and saturation per trial
/// <dir>/summary.json            per-method statistics and comparisons
/// <dir>/coverage.svg            band plot of every method
/// ```
pub fn write_results_dir(dir: &Path, results: &[ExperimentResult], baseline: Option<&str>) -> Result<Summary, HarnessError> {
    if results.is_empty() || results.iter().any(|r| r.trials.is_empty()) {
        return Err(HarnessError::EmptyResult);
    }
    let mut seen = std::collections::HashSet::new();
    for r in results {
        if !seen.insert(label_dir(&r.label)) {
            return Err(HarnessError::Invalid(format!("duplicate method label `{}`", r.label)));
        }
    }
    let summary = summarize(results, baseline)?;
    let mut series = Vec::new();
    for r in results {
        let sub = dir.join(label_dir(&r.label));
        std::fs::create_dir_all(&sub)?;
        for t in &r.trials {
            write_atomic(&sub.join(format!("trial_{:03}.csv", t.index)), t.curve.to_csv().as_bytes())?;
        }
        let bands = percentile_bands(r, &DEFAULT_PERCENTILES);
        let mut buf = Vec::new();
        write_bands_csv(&bands, &mut buf)?;
        write_atomic(&sub.join("bands.csv"), &buf)?;
        write_atomic(&sub.join("trials.csv"), trials_csv(r).as_bytes())?;
        series.push((r.label.clone(), bands));
    }
    let json = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    write_atomic(&dir.join("summary.json"), format!("{json}\n").as_bytes())?;
    let title = format!("{} ({} trials)", summary.template, results[0].trials.len());
    write_atomic(&dir.join("coverage.svg"), svg_plot(&series, &title).as_bytes())?;
    Ok(summary)
}
