//! Batch experiments driven by a JSON config, emitting plot-ready CSV tables.

use std::path::Path;

use projclust::coreset::{default_dim, draw, evaluate, plan_for, uniform_profile, EvalOptions};
use projclust::fit::{Family, FitOptions};
use projclust::linalg::orthonormalize;
use projclust::sensitivity::{
    compute, harmonic_lower_bound, lowerbound_instance, lowerbound_total, sens_empirical, EmpiricalOptions,
    MAX_REPRESENTABLE_N,
};
use projclust::synth::Generator;
use projclust::{DistanceConfig, Error, PointSet, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::pipeline::{fit_and_profile, sampling_profile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub family: String,
    pub j: usize,
    pub k: usize,
    pub z: f64,
    #[serde(default)]
    pub experimental_z: bool,
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub generator: Generator,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "one")]
    pub size_constant: f64,
    pub study: Study,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Candidate shapes for empirical sensitivity estimates.
    pub empirical: usize,
    pub ascent_steps: usize,
    pub ascent_points: usize,
    pub eval_random: usize,
    pub eval_subset: usize,
    pub eval_adversarial: usize,
    pub eval_ascent_steps: usize,
    pub fit_restarts: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let e = EmpiricalOptions::default();
        let v = EvalOptions::default();
        Budgets {
            empirical: e.budget,
            ascent_steps: e.ascent_steps,
            ascent_points: e.ascent_points,
            eval_random: v.n_random,
            eval_subset: v.n_subset,
            eval_adversarial: v.n_adversarial,
            eval_ascent_steps: v.ascent_steps,
            fit_restarts: FitOptions::default().restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Study {
    /// Sensitivity vs uniform sampling at equal size, one trial per seed.
    SensitivityVsUniform,
    /// Total sensitivity of the same instance isometrically embedded in each dimension.
    DimIndependence { dims: Vec<usize> },
    /// Total sensitivity as n grows.
    Growth { ns: Vec<usize> },
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::SensitivityVsUniform => "sensitivity-vs-uniform",
            Study::DimIndependence { .. } => "dim-independence",
            Study::Growth { .. } => "growth",
        }
    }
}

/// Paths are relative to the config file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub table: Option<String>,
    pub report: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Pretty JSON with a trailing newline; parsing it back yields the same bytes.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn family(&self) -> Result<Family> {
        Family::from_name(&self.family, self.j, self.k)
    }

    pub fn distance(&self, experimental_flag: bool) -> Result<DistanceConfig> {
        if self.experimental_z || experimental_flag {
            DistanceConfig::experimental(self.z)
        } else if self.z < 1.0 {
            Err(Error::input(format!("z = {} < 1 needs --experimental-z", self.z)))
        } else {
            DistanceConfig::new(self.z)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family()?.validate(self.d)?;
        if self.seeds.is_empty() {
            return Err(Error::input("experiment needs at least one seed"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::input(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if self.n == 0 {
            return Err(Error::input("n must be positive"));
        }
        match &self.study {
            Study::DimIndependence { dims } if dims.iter().any(|&m| m < self.d) => {
                Err(Error::input(format!("every sweep dimension must be at least d = {}", self.d)))
            }
            Study::Growth { ns } if ns.is_empty() || ns.contains(&0) => Err(Error::input("growth needs positive ns")),
            _ => Ok(()),
        }
    }

    fn fit_opts(&self, seed: u64) -> FitOptions {
        FitOptions { restarts: self.budgets.fit_restarts.max(1), ..FitOptions::with_seed(seed) }
    }

    fn empirical(&self, seed: u64) -> EmpiricalOptions {
        EmpiricalOptions {
            budget: self.budgets.empirical,
            ascent_steps: self.budgets.ascent_steps,
            ascent_points: self.budgets.ascent_points,
            seed,
            extra_candidates: Vec::new(),
        }
    }

    fn eval(&self, seed: u64) -> EvalOptions {
        EvalOptions {
            n_random: self.budgets.eval_random,
            n_subset: self.budgets.eval_subset,
            n_adversarial: self.budgets.eval_adversarial,
            ascent_steps: self.budgets.eval_ascent_steps,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| match v {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub table: Table,
    pub summary: Value,
}

pub fn run(cfg: &ExperimentConfig, experimental_z: bool) -> Result<ExperimentReport> {
    cfg.validate()?;
    let dist = cfg.distance(experimental_z)?;
    let (table, summary) = match &cfg.study {
        Study::SensitivityVsUniform => vs_uniform(cfg, &dist)?,
        Study::DimIndependence { dims } => dim_independence(cfg, &dist, dims)?,
        Study::Growth { ns } => growth(cfg, &dist, ns)?,
    };
    Ok(ExperimentReport { name: cfg.name.clone(), table, summary })
}

fn vs_uniform(cfg: &ExperimentConfig, dist: &DistanceConfig) -> Result<(Table, Value)> {
    let family = cfg.family()?;
    let base = cfg.seeds[0];
    let points = cfg.generator.generate(cfg.n, cfg.d, family, base)?;
    let (_, profile) = fit_and_profile(&points, family, dist, &cfg.fit_opts(base), &cfg.empirical(base))?;
    let (profile, _) = sampling_profile(&points, profile, projclust::coreset::DEFAULT_FLOOR)?;
    let plan = plan_for(cfg.epsilon, &profile, default_dim(family, points.dim()), cfg.size_constant)?;
    let uniform = uniform_profile(&points);
    let uplan = projclust::coreset::CoresetPlan { total: uniform.total, ..plan.clone() };

    let mut table = Table::new(&[
        "seed",
        "m",
        "sensitivity_max_error",
        "uniform_max_error",
        "sensitivity_p90",
        "uniform_p90",
    ]);
    let mut wins = 0;
    for &seed in &cfg.seeds {
        let s = draw(&points, &profile, &plan, seed)?.to_point_set(&points)?;
        let u = draw(&points, &uniform, &uplan, seed)?.to_point_set(&points)?;
        let es = evaluate(&points, &s, family, dist, &cfg.eval(seed))?;
        let eu = evaluate(&points, &u, family, dist, &cfg.eval(seed))?;
        if es.max_error <= eu.max_error {
            wins += 1;
        }
        table.rows.push(vec![
            json!(seed),
            json!(plan.size),
            json!(es.max_error),
            json!(eu.max_error),
            json!(es.p90),
            json!(eu.p90),
        ]);
    }
    let summary = json!({
        "total_sensitivity": profile.total,
        "method": profile.method,
        "m": plan.size,
        "trials": cfg.seeds.len(),
        "sensitivity_not_worse": wins,
    });
    Ok((table, summary))
}

/// Isometric embedding of `points` into R^m through a random orthonormal frame.
fn embed(points: &PointSet, m: usize, seed: u64) -> Result<PointSet> {
    let d = points.dim();
    if m == d {
        return Ok(points.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame: Vec<Vec<f64>> = Vec::new();
    while frame.len() < d {
        let mut all = frame.clone();
        all.push((0..m).map(|_| StandardNormal.sample(&mut rng)).collect());
        frame = orthonormalize(&all, 1e-8);
    }
    points.map_points(|p| {
        let mut out = vec![0.0; m];
        for (x, e) in p.iter().zip(&frame) {
            out.iter_mut().zip(e).for_each(|(o, ei)| *o += x * ei);
        }
        out
    })
}

fn dim_independence(cfg: &ExperimentConfig, dist: &DistanceConfig, dims: &[usize]) -> Result<(Table, Value)> {
    let family = cfg.family()?;
    let mut table = Table::new(&["seed", "dim", "method", "total", "raw_total", "reduction_dim", "fit_cost"]);
    let mut spread: f64 = 0.0;
    for &seed in &cfg.seeds {
        let points = cfg.generator.generate(cfg.n, cfg.d, family, seed)?;
        let mut totals = Vec::new();
        for &m in dims {
            let lifted = embed(&points, m, seed)?;
            let (f, profile) = fit_and_profile(&lifted, family, dist, &cfg.fit_opts(seed), &cfg.empirical(seed))?;
            totals.push(profile.raw_total);
            table.rows.push(vec![
                json!(seed),
                json!(m),
                json!(profile.method),
                json!(profile.total),
                json!(profile.raw_total),
                json!(profile.reduction_dim),
                json!(f.cost),
            ]);
        }
        let lo = totals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max((hi - lo) / hi.max(f64::MIN_POSITIVE));
    }
    Ok((table, json!({ "max_relative_spread_of_raw_total": spread })))
}

fn growth(cfg: &ExperimentConfig, dist: &DistanceConfig, ns: &[usize]) -> Result<(Table, Value)> {
    let family = cfg.family()?;
    let lowerbound = matches!(cfg.generator, Generator::Lowerbound);
    let mut table = Table::new(&[
        "seed",
        "n",
        "empirical_total",
        "bound_total",
        "bound_method",
        "lowerbound_total",
        "harmonic_bound",
    ]);
    for &seed in &cfg.seeds {
        for &n in ns {
            let points = cfg.generator.generate(n, cfg.d, family, seed)?;
            let mut emp = cfg.empirical(seed);
            if lowerbound && n <= MAX_REPRESENTABLE_N {
                emp.extra_candidates = lowerbound_instance(n)?.1;
            }
            let empirical = sens_empirical(&points, family, dist, &emp)?;
            let f = projclust::fit::fit(&points, family, dist, &cfg.fit_opts(seed))?;
            let bound = compute(&points, &f, dist, &cfg.empirical(seed))?;
            let (lb, harmonic) = if lowerbound {
                (json!(lowerbound_total(n)), json!(harmonic_lower_bound(n)))
            } else {
                (Value::Null, Value::Null)
            };
            table.rows.push(vec![
                json!(seed),
                json!(n),
                json!(empirical.total),
                json!(bound.total),
                json!(bound.method),
                lb,
                harmonic,
            ]);
        }
    }
    Ok((table, json!({ "points_per_row": ns })))
}
