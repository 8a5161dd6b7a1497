//! TOML experiment configuration.
//!
//! Unknown keys are rejected; omitted settings fall back to the experiment
//! defaults (initial design 10n, budget 30n, BFGS with 10 restarts, GA
//! 50x100, 1000 density samples and 1000 Monte-Carlo draws per candidate).

use anyhow::{bail, Context, Result};
use prefbo::driver::{Method, RunConfig};
use prefbo::ga::GaConfig;
use prefbo::problems::{Benchmark, Problem as _, ProblemSpec};
use prefbo::scalarize::PreferenceSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub preference: PreferenceSection,
    pub run: RunSection,
    #[serde(default)]
    pub ga: GaSection,
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    pub decision_vars: usize,
    pub objectives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceSection {
    pub reference_point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nadir: Option<Vec<f64>>,
    #[serde(default)]
    pub augmentation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub method: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gp_restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_gumbel_fit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbx_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_upper: Option<Vec<f64>>,
    /// Multi-surrogate method to pair with mono in sweeps; defaults to the
    /// run method when that is a multi variant, multi-gumbel otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multi_method: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }
}

/// Everything a command needs, with overrides applied and defaults filled.
pub struct Resolved {
    pub problem: ProblemSpec,
    pub pref: PreferenceSpec,
    pub run_config: RunConfig,
    pub out_dir: PathBuf,
    pub label: String,
    pub grid_lower: Vec<f64>,
    pub grid_upper: Vec<f64>,
    pub multi_method: Method,
    pub bounds_overridden: bool,
}

impl Resolved {
    /// Front sample size for reference-solution computation.
    pub fn front_count(&self) -> usize {
        if self.problem.objective_dim() == 2 {
            10_001
        } else {
            10_000
        }
    }
}

pub fn resolve(
    file: ExperimentConfig,
    seed_override: Option<u64>,
    method_override: Option<&str>,
    out_override: Option<PathBuf>,
) -> Result<Resolved> {
    let benchmark = Benchmark::from_str(&file.problem.name)?;
    let n = file.problem.decision_vars;
    let m = file.problem.objectives;
    let problem = ProblemSpec::new(benchmark, n, m)?;

    if file.preference.reference_point.len() != m {
        bail!(
            "reference point has {} entries for {} objectives",
            file.preference.reference_point.len(),
            m
        );
    }
    let bounds_overridden = file.preference.ideal.is_some() || file.preference.nadir.is_some();
    let ideal = file.preference.ideal.clone().unwrap_or_else(|| problem.ideal().to_vec());
    let nadir = file.preference.nadir.clone().unwrap_or_else(|| problem.nadir().to_vec());
    let pref = PreferenceSpec::new(file.preference.reference_point.clone(), ideal, nadir)?
        .with_augmentation(file.preference.augmentation)?;

    let method = match method_override {
        Some(s) => Method::from_str(s)?,
        None => Method::from_str(&file.run.method)?,
    };
    let seed = seed_override.unwrap_or(file.run.seed);

    let ga = GaConfig {
        population_size: file.ga.population.unwrap_or(50),
        generations: file.ga.generations.unwrap_or(100),
        crossover_prob: file.ga.crossover_prob.unwrap_or(0.9),
        mutation_prob: file.ga.mutation_prob,
        sbx_eta: file.ga.sbx_eta.unwrap_or(15.0),
        pm_eta: file.ga.pm_eta.unwrap_or(20.0),
        seed: 0,
    };
    let run_config = RunConfig {
        method,
        initial_size: file.run.initial_size.unwrap_or(10 * n),
        budget: file.run.budget.unwrap_or(30 * n),
        seed,
        gp_restarts: file.run.gp_restarts.unwrap_or(10),
        n_mc: file.run.n_mc.unwrap_or(1000),
        n_gumbel_fit: file.run.n_gumbel_fit.unwrap_or(1000),
        ga,
    };
    run_config.validate()?;

    let grid_lower = file.sweep.grid_lower.clone().unwrap_or_else(|| problem.ideal().to_vec());
    let grid_upper =
        file.sweep.grid_upper.clone().unwrap_or_else(|| problem.front_extremes().to_vec());
    if grid_lower.len() != m || grid_upper.len() != m {
        bail!("sweep grid bounds must have {} entries", m);
    }
    let multi_method = match &file.sweep.multi_method {
        Some(s) => {
            let parsed = Method::from_str(s)?;
            if !parsed.is_multi() {
                bail!("sweep.multi_method must be a multi variant, got {parsed}");
            }
            parsed
        }
        None if method.is_multi() => method,
        None => Method::MultiGumbel,
    };

    let label = file
        .output
        .label
        .clone()
        .unwrap_or_else(|| format!("{benchmark}-m{m}-n{n}"));
    let out_dir = out_override.unwrap_or_else(|| PathBuf::from(&file.output.dir));

    Ok(Resolved {
        problem,
        pref,
        run_config,
        out_dir,
        label,
        grid_lower,
        grid_upper,
        multi_method,
        bounds_overridden,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"
[problem]
name = "dtlz2"
decision_vars = 5
objectives = 2

[preference]
reference_point = [0.5, 0.5]

[run]
method = "multi-gumbel"
seed = 42

[output]
dir = "runs/demo"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg: ExperimentConfig = toml::from_str(EXAMPLE).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let again: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = EXAMPLE.replace("[output]", "[output]\ntypo_key = 3\n");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
        let bad2 = format!("{EXAMPLE}\n[nonsense]\nx = 1\n");
        assert!(toml::from_str::<ExperimentConfig>(&bad2).is_err());
    }

    #[test]
    fn defaults_follow_problem_size() {
        let cfg: ExperimentConfig = toml::from_str(EXAMPLE).unwrap();
        let resolved = resolve(cfg, None, None, None).unwrap();
        assert_eq!(resolved.run_config.initial_size, 50);
        assert_eq!(resolved.run_config.budget, 150);
        assert_eq!(resolved.run_config.gp_restarts, 10);
        assert_eq!(resolved.run_config.ga.population_size, 50);
        assert_eq!(resolved.run_config.ga.generations, 100);
        assert_eq!(resolved.grid_lower, vec![0.0, 0.0]);
        assert_eq!(resolved.grid_upper, vec![1.0, 1.0]);
        assert_eq!(resolved.multi_method, Method::MultiGumbel);
        assert_eq!(resolved.label, "dtlz2-m2-n5");
    }

    #[test]
    fn overrides_win() {
        let cfg: ExperimentConfig = toml::from_str(EXAMPLE).unwrap();
        let resolved =
            resolve(cfg, Some(7), Some("mono"), Some(PathBuf::from("/tmp/x"))).unwrap();
        assert_eq!(resolved.run_config.seed, 7);
        assert_eq!(resolved.run_config.method, Method::Mono);
        assert_eq!(resolved.out_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn budget_below_initial_is_rejected() {
        let bad = EXAMPLE.replace("seed = 42", "seed = 42\nbudget = 50\ninitial_size = 50");
        let cfg: ExperimentConfig = toml::from_str(&bad).unwrap();
        assert!(resolve(cfg, None, None, None).is_err());
    }
}
