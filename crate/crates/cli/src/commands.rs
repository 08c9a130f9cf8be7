use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use projclust::coreset::{default_dim, draw, evaluate, plan_for, Coreset, EvalOptions, DEFAULT_FLOOR};
use projclust::fit::{exact_fit, fit, Family, FitOptions, FitResult};
use projclust::io::{read_points_file, write_points, write_weighted_points};
use projclust::sensitivity::{
    compute, exact_sensitivity_oracle, harmonic_lower_bound, lowerbound_instance, lowerbound_ratios,
    lowerbound_total, sens_empirical, EmpiricalOptions, OracleOptions, MAX_REPRESENTABLE_N,
};
use projclust::synth::Generator;
use projclust::{DistanceConfig, Error, PointSet, Result, SensitivityProfile, Shape};
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifact::{file_hash, load_part, Artifact};
use crate::experiment::{self, ExperimentConfig};
use crate::pipeline::sampling_profile;

#[derive(Debug, Parser)]
#[command(name = "projclust", version, about = "Sensitivity-sampling coresets for projective clustering")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a shape to the input points.
    Fit(FitArgs),
    /// Per-point sensitivity bounds for a fitted shape.
    Sensitivity(SensitivityArgs),
    /// Draw a weighted coreset by sensitivity sampling.
    Coreset(CoresetArgs),
    /// Measure how well a weighted subset approximates the input costs.
    Evaluate(EvaluateArgs),
    /// The geometric lower-bound instance and its ratio table.
    Lowerbound(LowerboundArgs),
    /// Run a batch experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Write a synthetic instance as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Kcenters,
    Klines,
    Jflat,
    Kjflats,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file, one point per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Treat the last CSV column as the point weight.
    #[arg(long)]
    pub weights_column: bool,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = FamilyName::Kcenters)]
    pub family: FamilyName,
    #[arg(short = 'k', default_value_t = 1)]
    pub k: usize,
    #[arg(short = 'j', default_value_t = 1)]
    pub j: usize,
    /// Distance exponent.
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    /// Allow z in (0, 1).
    #[arg(long)]
    pub experimental_z: bool,
}

impl ProblemArgs {
    pub fn family(&self) -> Family {
        match self.family {
            FamilyName::Kcenters => Family::KCenters { k: self.k },
            FamilyName::Klines => Family::KLines { k: self.k },
            FamilyName::Jflat => Family::JFlat { j: self.j },
            FamilyName::Kjflats => Family::KJFlats { j: self.j, k: self.k },
        }
    }

    pub fn distance(&self) -> Result<DistanceConfig> {
        if self.experimental_z {
            DistanceConfig::experimental(self.z)
        } else if self.z < 1.0 {
            Err(Error::input(format!("z = {} < 1 needs --experimental-z", self.z)))
        } else {
            DistanceConfig::new(self.z)
        }
    }

    /// Only the parameters the family uses, so equivalent runs hash equally.
    fn settings(&self) -> Value {
        json!({ "family": self.family(), "z": self.z, "experimental_z": self.experimental_z })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the fitter's approximation factor.
    #[arg(long)]
    pub approx_factor: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Exact optimum by enumeration (tiny inputs only).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SensitivityMode {
    /// Best available bound for the family.
    Auto,
    /// Search-based lower estimate.
    Empirical,
    /// Brute force on tiny instances.
    Oracle,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub approx_factor: Option<f64>,
    /// Candidate shapes for empirical estimates.
    #[arg(long, default_value_t = 256)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = SensitivityMode::Auto)]
    pub method: SensitivityMode,
    /// Reuse a fit (a `fit` artifact or a bare fit JSON) instead of fitting.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoresetArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub approx_factor: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub budget: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Constant C in m = C (T/eps)^2 dim.
    #[arg(long, default_value_t = 1.0)]
    pub size_constant: f64,
    /// Dimension estimate (default (j+1) d k).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Uniform share mixed into lower-estimate profiles before sampling.
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
    /// Reuse a profile (a `sensitivity` artifact or a bare profile JSON).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Also write the weighted coreset points as CSV.
    #[arg(long)]
    pub points_output: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "subset", required = true, multiple = false, args = ["coreset", "coreset_points"])]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// A `coreset` artifact (indices into --input).
    #[arg(long)]
    pub coreset: Option<PathBuf>,
    /// Weighted subset as CSV with a trailing weight column.
    #[arg(long)]
    pub coreset_points: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n_random: usize,
    #[arg(long, default_value_t = 20)]
    pub n_subset: usize,
    #[arg(long, default_value_t = 10)]
    pub n_adversarial: usize,
    #[arg(long, default_value_t = 30)]
    pub ascent_steps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(short = 'n')]
    pub n: usize,
    /// Also write the ratio table as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV table path (overrides the config).
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub experimental_z: bool,
    /// JSON report path (overrides the config; default stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorName {
    Mixture,
    Lines,
    FlatNoise,
    IntegerGrid,
    Lowerbound,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorName,
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(short = 'd', default_value_t = 2)]
    pub d: usize,
    #[arg(short = 'k', default_value_t = 1)]
    pub k: usize,
    #[arg(short = 'j', default_value_t = 1)]
    pub j: usize,
    #[arg(long, default_value_t = 1.0)]
    pub imbalance: f64,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::Coreset(a) => cmd_coreset(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Lowerbound(a) => cmd_lowerbound(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

/// Serde tag of a unit enum value, e.g. a method name.
fn tag<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn load(input: &InputArgs) -> Result<PointSet> {
    read_points_file(&input.input, input.weights_column)
}

fn fit_opts(seed: u64, approx_factor: Option<f64>) -> FitOptions {
    FitOptions { approx_factor, ..FitOptions::with_seed(seed) }
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let points = load(&a.input)?;
    let family = a.problem.family();
    let cfg = a.problem.distance()?;
    let opts = FitOptions { restarts: a.restarts, ..fit_opts(a.seed, a.approx_factor) };
    let result = if a.exact {
        let mut r = exact_fit(&points, family, &cfg)?;
        if let Some(c) = a.approx_factor {
            r.approx_factor = c;
        }
        r
    } else {
        fit(&points, family, &cfg, &opts)?
    };
    let settings = json!({
        "problem": a.problem.settings(),
        "weights_column": a.input.weights_column,
        "approx_factor": a.approx_factor,
        "restarts": a.restarts,
        "exact": a.exact,
    });
    let methods = vec![tag(&result.method)];
    let out = json!({ "n": points.len(), "d": points.dim(), "fit": result });
    Artifact::new("fit", settings, Some(&a.input.input), a.seed, methods, out)?.emit(a.output.as_deref())
}

fn load_fit(path: &Path, family: Family, d: usize) -> Result<FitResult> {
    let f: FitResult = serde_json::from_value(load_part(path, "fit")?)?;
    if Family::of_shape(&f.shape) != family {
        return Err(Error::input(format!("{}: fit is for {:?}, requested {:?}", path.display(), Family::of_shape(&f.shape), family)));
    }
    if f.shape.ambient_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.shape.ambient_dim() });
    }
    Ok(f)
}

fn empirical_opts(budget: usize, seed: u64) -> EmpiricalOptions {
    EmpiricalOptions { budget, seed, ..EmpiricalOptions::default() }
}

fn cmd_sensitivity(a: SensitivityArgs) -> Result<()> {
    let points = load(&a.input)?;
    let family = a.problem.family();
    let cfg = a.problem.distance()?;
    let emp = empirical_opts(a.budget, a.seed);
    let mut methods = Vec::new();
    let profile = match a.method {
        SensitivityMode::Auto => {
            let f = match &a.fit {
                Some(p) => load_fit(p, family, points.dim())?,
                None => fit(&points, family, &cfg, &fit_opts(a.seed, a.approx_factor))?,
            };
            methods.push(tag(&f.method));
            compute(&points, &f, &cfg, &emp)?
        }
        SensitivityMode::Empirical => sens_empirical(&points, family, &cfg, &emp)?,
        SensitivityMode::Oracle => {
            let o = OracleOptions { seed: a.seed, ..OracleOptions::default() };
            exact_sensitivity_oracle(&points, family, &cfg, &o)?
        }
    };
    methods.push(tag(&profile.method));
    let settings = json!({
        "problem": a.problem.settings(),
        "weights_column": a.input.weights_column,
        "approx_factor": a.approx_factor,
        "budget": a.budget,
        "method": a.method,
        "fit_sha256": a.fit.as_deref().map(file_hash).transpose()?,
    });
    let out = json!({ "profile": profile });
    Artifact::new("sensitivity", settings, Some(&a.input.input), a.seed, methods, out)?.emit(a.output.as_deref())
}

fn cmd_coreset(a: CoresetArgs) -> Result<()> {
    let points = load(&a.input)?;
    let family = a.problem.family();
    family.validate(points.dim())?;
    let cfg = a.problem.distance()?;
    let mut methods = Vec::new();
    let profile: SensitivityProfile = match &a.profile {
        Some(p) => {
            let prof: SensitivityProfile = serde_json::from_value(load_part(p, "profile")?)?;
            if prof.len() != points.len() {
                return Err(Error::input(format!("profile has {} points, input has {}", prof.len(), points.len())));
            }
            prof
        }
        None => {
            let f = fit(&points, family, &cfg, &fit_opts(a.seed, a.approx_factor))?;
            methods.push(tag(&f.method));
            compute(&points, &f, &cfg, &empirical_opts(a.budget, a.seed))?
        }
    };
    methods.push(tag(&profile.method));
    let (profile, floor) = sampling_profile(&points, profile, a.floor)?;
    let dim = a.dim.unwrap_or_else(|| default_dim(family, points.dim()));
    let plan = plan_for(a.epsilon, &profile, dim, a.size_constant)?;
    let coreset = draw(&points, &profile, &plan, a.seed)?;
    methods.push("sensitivity-sampling".into());

    if let Some(path) = &a.points_output {
        let subset = points.subset(&coreset.indices);
        write_weighted_points(std::fs::File::create(path)?, &subset, &coreset.weights)?;
    }
    let ids: Vec<usize> = coreset.indices.iter().map(|&i| points.ids()[i]).collect();
    let settings = json!({
        "problem": a.problem.settings(),
        "weights_column": a.input.weights_column,
        "approx_factor": a.approx_factor,
        "budget": a.budget,
        "epsilon": a.epsilon,
        "size_constant": a.size_constant,
        "dim": dim,
        "floor": a.floor,
        "profile_sha256": a.profile.as_deref().map(file_hash).transpose()?,
    });
    let out = json!({
        "coreset": coreset,
        "ids": ids,
        "total_weight": coreset.total_weight(),
        "profile": {
            "method": profile.method,
            "flags": profile.flags,
            "total": profile.total,
            "floor": floor,
        },
    });
    Artifact::new("coreset", settings, Some(&a.input.input), a.seed, methods, out)?.emit(a.output.as_deref())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let points = load(&a.input)?;
    let family = a.problem.family();
    let cfg = a.problem.distance()?;
    let (subset, subset_hash) = match (&a.coreset, &a.coreset_points) {
        (Some(p), _) => {
            let c: Coreset = serde_json::from_value(load_part(p, "coreset")?)?;
            (c.to_point_set(&points)?, file_hash(p)?)
        }
        (None, Some(p)) => (read_points_file(p, true)?, file_hash(p)?),
        (None, None) => return Err(Error::input("pass --coreset or --coreset-points")),
    };
    let opts = EvalOptions {
        n_random: a.n_random,
        n_subset: a.n_subset,
        n_adversarial: a.n_adversarial,
        ascent_steps: a.ascent_steps,
        seed: a.seed,
    };
    let report = evaluate(&points, &subset, family, &cfg, &opts)?;
    let settings = json!({
        "problem": a.problem.settings(),
        "weights_column": a.input.weights_column,
        "subset_sha256": subset_hash,
        "n_random": a.n_random,
        "n_subset": a.n_subset,
        "n_adversarial": a.n_adversarial,
        "ascent_steps": a.ascent_steps,
    });
    let out = json!({ "subset_size": subset.len(), "report": report });
    let methods = vec!["shape-ensemble".to_string()];
    Artifact::new("evaluate", settings, Some(&a.input.input), a.seed, methods, out)?.emit(a.output.as_deref())
}

#[derive(Debug, Serialize)]
struct RatioRow {
    i: usize,
    ratio: f64,
    /// The per-term floor `1/(2+i)`.
    floor: f64,
}

fn cmd_lowerbound(a: LowerboundArgs) -> Result<()> {
    if a.n < 2 {
        return Err(Error::input(format!("the lower-bound instance needs n >= 2, got {}", a.n)));
    }
    let (points, shapes): (Option<Vec<Vec<f64>>>, Option<Vec<Shape>>) = if a.n <= MAX_REPRESENTABLE_N {
        let (p, s) = lowerbound_instance(a.n)?;
        (Some(p.points().map(|x| x.to_vec()).collect()), Some(s))
    } else {
        (None, None)
    };
    let table: Vec<RatioRow> = lowerbound_ratios(a.n)
        .into_iter()
        .enumerate()
        .map(|(i, ratio)| RatioRow { i: i + 1, ratio, floor: 1.0 / (3.0 + i as f64) })
        .collect();
    if let Some(path) = &a.table {
        let mut w = csv::Writer::from_path(path)?;
        for row in &table {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let out = json!({
        "n": a.n,
        "points": points,
        "shapes": shapes,
        "table": table,
        "total": lowerbound_total(a.n),
        "harmonic_bound": harmonic_lower_bound(a.n),
    });
    let settings = json!({ "n": a.n });
    Artifact::new("lowerbound", settings, None, 0, vec!["lowerbound-instance".into()], out)?.emit(a.output.as_deref())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let config = ExperimentConfig::from_json(&text)?;
    let report = experiment::run(&config, a.experimental_z)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let resolve = |flag: &Option<PathBuf>, cfg: &Option<String>| flag.clone().or_else(|| cfg.as_ref().map(|p| base.join(p)));
    if let Some(path) = resolve(&a.table, &config.outputs.table) {
        report.table.write_csv(&path)?;
    }
    let settings = serde_json::to_value(&config)?;
    let methods = vec![config.study.name().to_string()];
    let seed = config.seeds[0];
    let out = json!({ "config": config, "report": report });
    let output = resolve(&a.output, &config.outputs.report);
    Artifact::new("experiment", settings, None, seed, methods, out)?.emit(output.as_deref())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let generator = match a.generator {
        GeneratorName::Mixture => Generator::Mixture { imbalance: a.imbalance, separation: a.separation },
        GeneratorName::Lines => Generator::Lines { noise: a.noise },
        GeneratorName::FlatNoise => Generator::FlatNoise { noise: a.noise },
        GeneratorName::IntegerGrid => Generator::IntegerGrid { exponent: a.exponent },
        GeneratorName::Lowerbound => Generator::Lowerbound,
    };
    let family = Family::KJFlats { j: a.j, k: a.k };
    let points = generator.generate(a.n, a.d, family, a.seed)?;
    match &a.output {
        Some(p) => write_points(std::fs::File::create(p)?, &points, false),
        None => write_points(std::io::stdout().lock(), &points, false),
    }
}
