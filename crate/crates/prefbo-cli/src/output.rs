//! CSV and metadata files.
//!
//! All floats are written with 9 significant digits in scientific notation,
//! so identical runs produce byte-identical files. trace.csv columns:
//!
//! `eval_index, x_1..x_n, f_1..f_m, asf_value, min_asf_so_far,
//!  asf_distance, min_asf_distance_so_far, wall_clock_s, phase`

use anyhow::{bail, Context, Result};
use prefbo::driver::{Method, RunConfig, RunTrace};
use prefbo::metrics::RefSolution;
use prefbo::problems::ProblemSpec;
use prefbo::scalarize::PreferenceSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// 9 significant digits, scientific.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_trace_csv(path: &Path, trace: &RunTrace, n: usize, m: usize) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut header: Vec<String> = vec!["eval_index".into()];
    header.extend((1..=n).map(|j| format!("x_{j}")));
    header.extend((1..=m).map(|j| format!("f_{j}")));
    header.extend(
        [
            "asf_value",
            "min_asf_so_far",
            "asf_distance",
            "min_asf_distance_so_far",
            "wall_clock_s",
            "phase",
        ]
        .map(String::from),
    );
    writer.write_record(&header)?;
    for r in &trace.records {
        let mut row: Vec<String> = vec![r.eval_index.to_string()];
        row.extend(r.x.iter().map(|&v| fmt9(v)));
        row.extend(r.objectives.iter().map(|&v| fmt9(v)));
        row.push(fmt9(r.asf));
        row.push(fmt9(r.min_asf));
        row.push(fmt9(r.asf_distance));
        row.push(fmt9(r.min_asf_distance));
        row.push(fmt9(r.wall_clock_s));
        row.push(r.phase.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// The columns of a parsed trace row that reporting needs.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub eval_index: usize,
    pub objectives: Vec<f64>,
    pub min_asf_distance: f64,
    pub phase: String,
}

pub fn read_trace_csv(path: &Path, m: usize) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = reader.headers()?.clone();
    let f1 = header
        .iter()
        .position(|h| h == "f_1")
        .context("trace.csv missing f_1 column")?;
    let dist_col = header
        .iter()
        .position(|h| h == "min_asf_distance_so_far")
        .context("trace.csv missing min_asf_distance_so_far column")?;
    let phase_col =
        header.iter().position(|h| h == "phase").context("trace.csv missing phase column")?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let eval_index: usize = record[0].parse()?;
        let objectives = (0..m)
            .map(|j| record[f1 + j].parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(TraceRow {
            eval_index,
            objectives,
            min_asf_distance: record[dist_col].parse()?,
            phase: record[phase_col].to_string(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaProblem {
    pub name: String,
    pub decision_vars: usize,
    pub objectives: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaPreference {
    pub reference_point: Vec<f64>,
    pub ideal: Vec<f64>,
    pub nadir: Vec<f64>,
    pub weights: Vec<f64>,
    pub augmentation: f64,
    /// "analytic" for the built-in benchmark bounds, "config" when the
    /// config file overrode them.
    pub bounds_source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaRefSolution {
    pub objectives: Vec<f64>,
    pub asf: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub label: String,
    pub method: String,
    pub seed: u64,
    pub problem: MetaProblem,
    pub preference: MetaPreference,
    pub ref_solution: Option<MetaRefSolution>,
    pub initial_size: usize,
    pub budget: usize,
    pub gp_restarts: usize,
    pub n_mc: usize,
    pub n_gumbel_fit: usize,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub ga_crossover_prob: f64,
    pub ga_mutation_prob: Option<f64>,
    pub ga_sbx_eta: f64,
    pub ga_pm_eta: f64,
    pub noise_learned: bool,
    pub completed: bool,
    pub failure: Option<String>,
}

impl RunMeta {
    pub fn new(
        label: &str,
        problem: &ProblemSpec,
        pref: &PreferenceSpec,
        cfg: &RunConfig,
        bounds_source: &str,
        ref_solution: Option<&RefSolution>,
        trace: &RunTrace,
    ) -> Self {
        use prefbo::problems::Problem as _;
        Self {
            label: label.to_string(),
            method: cfg.method.to_string(),
            seed: cfg.seed,
            problem: MetaProblem {
                name: problem.benchmark().to_string(),
                decision_vars: problem.decision_dim(),
                objectives: problem.objective_dim(),
            },
            preference: MetaPreference {
                reference_point: pref.reference_point().to_vec(),
                ideal: pref.ideal().to_vec(),
                nadir: pref.nadir().to_vec(),
                weights: pref.weights().to_vec(),
                augmentation: pref.augmentation(),
                bounds_source: bounds_source.to_string(),
            },
            ref_solution: ref_solution.map(|r| MetaRefSolution {
                objectives: r.objectives.clone(),
                asf: r.asf,
            }),
            initial_size: cfg.initial_size,
            budget: cfg.budget,
            gp_restarts: cfg.gp_restarts,
            n_mc: cfg.n_mc,
            n_gumbel_fit: cfg.n_gumbel_fit,
            ga_population: cfg.ga.population_size,
            ga_generations: cfg.ga.generations,
            ga_crossover_prob: cfg.ga.crossover_prob,
            ga_mutation_prob: cfg.ga.mutation_prob,
            ga_sbx_eta: cfg.ga.sbx_eta,
            ga_pm_eta: cfg.ga.pm_eta,
            noise_learned: true,
            completed: trace.completed(),
            failure: trace.failure.clone(),
        }
    }
}

pub fn write_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(path, text + "\n")
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<RunMeta> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Linear-interpolation percentile of already-meaningful values, q in [0,1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn write_summary_csv(
    path: &Path,
    per_method: &[(Method, Vec<Vec<f64>>)],
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "method",
        "eval_index",
        "p16_min_asf_distance",
        "median_min_asf_distance",
        "p84_min_asf_distance",
    ])?;
    for (method, traces) in per_method {
        if traces.is_empty() {
            continue;
        }
        let budget = traces[0].len();
        if traces.iter().any(|t| t.len() != budget) {
            bail!("instance traces have inconsistent lengths for method {method}");
        }
        for idx in 0..budget {
            let mut values: Vec<f64> = traces.iter().map(|t| t[idx]).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            writer.write_record([
                method.to_string(),
                (idx + 1).to_string(),
                fmt9(percentile(&values, 0.16)),
                fmt9(percentile(&values, 0.50)),
                fmt9(percentile(&values, 0.84)),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub struct FinalPoint {
    pub method: Method,
    pub instance: usize,
    pub reference_point: Vec<f64>,
    pub objectives: Vec<f64>,
}

pub fn write_final_points_csv(path: &Path, m: usize, points: &[FinalPoint]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = vec!["method".into(), "instance".into()];
    header.extend((1..=m).map(|j| format!("ref_{j}")));
    header.extend((1..=m).map(|j| format!("f_{j}")));
    writer.write_record(&header)?;
    for p in points {
        let mut row = vec![p.method.to_string(), p.instance.to_string()];
        row.extend(p.reference_point.iter().map(|&v| fmt9(v)));
        row.extend(p.objectives.iter().map(|&v| fmt9(v)));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Number of data rows in a trace file.
pub fn trace_row_count(path: &Path) -> Result<usize> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.records().filter_map(|r| r.ok()).count())
}
