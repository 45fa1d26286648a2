//! Command implementations behind the `arc-audit` binary.
//!
//! Every command takes a JSON config (unknown keys rejected), runs, and
//! returns a report that embeds the resolved config and seed. Files go to
//! the output directory when one is given.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use arc_core::attack::AttackSpec;
use arc_core::bounds::{bound_report, BoundReport, BoundRequest};
use arc_core::covering::{
    dudley_integral, layer_deltas, unit_entropy_integral, unit_entropy_integral_closed_form, Chain, DeltaChoice,
    DudleyResult,
};
use arc_core::data::{blob_means, equal_entries_dataset, gaussian_blobs_with_means, is_equal_entries, BlobSpec, Dataset};
use arc_core::network::{Activation, ModelFile, Network};
use arc_core::rademacher::{
    default_attack, estimate_arc, estimate_arc_multiclass, estimate_rc, EstimateOptions, FunctionClassSpec,
    RadEstimate, SignScheme, SupBudget,
};
use arc_core::rng::stream_rng;
use arc_core::train::{
    median_trace, run_experiment, save_trace_csv, write_plot_data, ExperimentConfig, ExperimentSummary, TrainConfig,
};
use arc_core::{Error as CoreError, Exponent};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Largest class (in weights) the sup search is run on.
pub const MAX_ESTIMATE_PARAMS: usize = 60;

const DATA_STREAM: u64 = 0xDA7A;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad data or an unsupported request (exit code 2).
    Invalid(String),
    /// Numerical or IO failure during a run (exit code 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numerical(_) | CoreError::Io(_) => CliError::Internal(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invalid(format!("config: {e}"))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Internal(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub out: Option<PathBuf>,
    pub trace: bool,
}

impl Context {
    fn path(&self, name: &str) -> CliResult<Option<PathBuf>> {
        match &self.out {
            None => Ok(None),
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
                Ok(Some(dir.join(name)))
            }
        }
    }
}

/// Parses a config document, rejecting unknown keys.
pub fn parse_config<C: DeserializeOwned>(text: &str) -> CliResult<C> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_config<C: DeserializeOwned>(path: &Path) -> CliResult<C> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Runtime {
    pub elapsed_seconds: f64,
    pub threads: usize,
}

impl Runtime {
    fn since(t: Instant) -> Self {
        Self { elapsed_seconds: t.elapsed().as_secs_f64(), threads: rayon::current_num_threads() }
    }
}

/// A command's output: the resolved config, its seed, the result and
/// runtime metadata (the only part not reproducible).
#[derive(Clone, Debug, Serialize)]
pub struct Report<C, R> {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: C,
    pub result: R,
    pub runtime: Runtime,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))
    }
}

fn report<C: Serialize, R: Serialize>(
    command: &'static str,
    seed: u64,
    config: &C,
    result: R,
    start: Instant,
    ctx: &Context,
) -> CliResult<Report<C, R>>
where
    C: Clone,
{
    let r = Report { command, version: env!("CARGO_PKG_VERSION"), seed, config: config.clone(), result, runtime: Runtime::since(start) };
    if let Some(path) = ctx.path(&format!("{command}_report.json"))? {
        fs::write(&path, r.to_json()?).map_err(|e| io_err(&path, e))?;
    }
    Ok(r)
}

/// Where samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Gaussian blobs; the generator runs from the config seed.
    Blobs { spec: BlobSpec },
    /// Identical samples with equal entries and `‖x‖_p = b`, random labels.
    EqualEntries { n: usize, dim: usize, b: f64, p: Exponent },
    /// A dataset CSV written by `gen-data`.
    Csv { path: PathBuf },
}

impl DataSource {
    pub fn load(&self, seed: u64) -> CliResult<Dataset> {
        let mut rng = stream_rng(seed, DATA_STREAM);
        Ok(match self {
            DataSource::Blobs { spec } => {
                let means = blob_means(spec, &mut rng);
                gaussian_blobs_with_means(spec, &means, &mut rng)?
            }
            DataSource::EqualEntries { n, dim, b, p } => equal_entries_dataset(*n, *dim, *b, *p, &mut rng)?,
            DataSource::Csv { path } => Dataset::load_csv(path)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataConfig {
    pub data: DataSource,
    pub seed: u64,
    /// File name inside the output directory.
    #[serde(default = "default_data_file")]
    pub file_name: String,
}

fn default_data_file() -> String {
    "data.csv".into()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenDataResult {
    pub path: Option<PathBuf>,
    pub n: usize,
    pub dim: usize,
    pub b_l2: f64,
    pub b_linf: f64,
    pub binary: bool,
}

pub fn cmd_gen_data(cfg: &GenDataConfig, ctx: &Context) -> CliResult<Report<GenDataConfig, GenDataResult>> {
    let start = Instant::now();
    if let DataSource::Csv { .. } = cfg.data {
        return Err(CliError::Invalid("gen-data needs a generator, not a CSV source".into()));
    }
    let data = cfg.data.load(cfg.seed)?;
    let path = ctx.path(&cfg.file_name)?;
    if let Some(p) = &path {
        data.save_csv(p)?;
    }
    let result = GenDataResult {
        path,
        n: data.len(),
        dim: data.dim(),
        b_l2: data.group_norm(Exponent::TWO),
        b_linf: data.group_norm(Exponent::INF),
        binary: data.is_binary(),
    };
    report("gen-data", cfg.seed, cfg, result, start, ctx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub class: FunctionClassSpec,
    pub epsilon: f64,
    pub p: Exponent,
    /// `‖X‖_{p,∞}`; taken from `data` when absent.
    #[serde(default)]
    pub b: Option<f64>,
    /// Sample count; taken from `data` when absent.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub data: Option<DataSource>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub multiclass: bool,
    #[serde(default)]
    pub khintchine_c: Option<f64>,
    /// Model JSON whose weights feed the spectral comparison bound.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn resolve_bound_request(cfg: &BoundsConfig) -> CliResult<BoundRequest> {
    let data = cfg.data.as_ref().map(|d| d.load(cfg.seed)).transpose()?;
    if let Some(d) = &data {
        if d.dim() != cfg.class.input_dim() {
            return Err(CliError::Invalid(format!(
                "class takes {} inputs but the data has {} features",
                cfg.class.input_dim(),
                d.dim()
            )));
        }
    }
    let b = match (cfg.b, &data) {
        (Some(b), _) => b,
        (None, Some(d)) => d.group_norm(cfg.p),
        (None, None) => return Err(CliError::Invalid("give b or a data source".into())),
    };
    let n = match (cfg.n, &data) {
        (Some(n), _) => n,
        (None, Some(d)) => d.len(),
        (None, None) => return Err(CliError::Invalid("give n or a data source".into())),
    };
    Ok(BoundRequest {
        class: cfg.class.clone(),
        b,
        epsilon: cfg.epsilon,
        p: cfg.p,
        n,
        gamma: cfg.gamma,
        multiclass: cfg.multiclass,
        khintchine_c: cfg.khintchine_c,
    })
}

fn load_model(path: &Path) -> CliResult<Network<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(ModelFile::from_json(&text)?.into_network()?)
}

pub fn cmd_bounds(cfg: &BoundsConfig, ctx: &Context) -> CliResult<Report<BoundsConfig, BoundReport>> {
    let start = Instant::now();
    let req = resolve_bound_request(cfg)?;
    let model = cfg.model.as_deref().map(load_model).transpose()?;
    if let Some(m) = &model {
        if m.dims() != cfg.class.dims {
            return Err(CliError::Invalid(format!("model dims {:?} differ from class dims {:?}", m.dims(), cfg.class.dims)));
        }
    }
    let result = bound_report(&req, model.as_ref())?;
    report("bounds", cfg.seed, cfg, result, start, ctx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Rc,
    Arc,
    ArcMulticlass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub class: FunctionClassSpec,
    pub data: DataSource,
    pub kind: EstimateKind,
    pub epsilon: f64,
    pub p: Exponent,
    /// Inner-minimization solver; grid (d ≤ 3) or evaluation-strength PGD when absent.
    #[serde(default)]
    pub attack: Option<AttackSpec>,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub signs: SignScheme,
    #[serde(default)]
    pub budget: SupBudget,
    pub seed: u64,
}

impl EstimateConfig {
    /// The attack actually used, with ε and p taken from the config.
    pub fn resolved_attack(&self) -> AttackSpec {
        match self.attack {
            Some(a) => AttackSpec { p: self.p, epsilon: self.epsilon, ..a },
            None => default_attack(self.p, self.epsilon, self.class.input_dim()),
        }
    }
}

fn run_estimate(cfg: &EstimateConfig, data: &Dataset, trace: bool) -> CliResult<RadEstimate> {
    cfg.class.validate()?;
    let params = cfg.class.param_count();
    if params > MAX_ESTIMATE_PARAMS {
        return Err(CliError::Invalid(format!(
            "class has {params} weights; the sup search is limited to {MAX_ESTIMATE_PARAMS}. \
             Use narrower layers or fewer layers, or the bounds command, which has no size limit"
        )));
    }
    let opts = EstimateOptions { signs: cfg.signs, budget: cfg.budget, seed: cfg.seed, trace };
    let attack = cfg.resolved_attack();
    let gamma = || cfg.gamma.ok_or_else(|| CliError::Invalid("arc_multiclass needs gamma".into()));
    Ok(match cfg.kind {
        EstimateKind::Rc => estimate_rc(&cfg.class, data, &opts)?,
        EstimateKind::Arc => estimate_arc(&cfg.class, data, &attack, &opts)?,
        EstimateKind::ArcMulticlass => estimate_arc_multiclass(&cfg.class, data, &attack, gamma()?, &opts)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub estimate: RadEstimate,
    pub attack: AttackSpec,
    pub n: usize,
    pub b: f64,
    pub trace_path: Option<PathBuf>,
}

fn write_estimate_trace(est: &RadEstimate, ctx: &Context, name: &str) -> CliResult<Option<PathBuf>> {
    if !ctx.trace {
        return Ok(None);
    }
    let path = ctx.path(name)?;
    if let Some(p) = &path {
        let f = fs::File::create(p).map_err(|e| io_err(p, e))?;
        est.write_trace_csv(f)?;
    }
    Ok(path)
}

pub fn cmd_estimate(cfg: &EstimateConfig, ctx: &Context) -> CliResult<Report<EstimateConfig, EstimateResult>> {
    let start = Instant::now();
    let data = cfg.data.load(cfg.seed)?;
    let mut estimate = run_estimate(cfg, &data, ctx.trace)?;
    let trace_path = write_estimate_trace(&estimate, ctx, "estimate_trace.csv")?;
    estimate.trace.clear();
    let result = EstimateResult { estimate, attack: cfg.resolved_attack(), n: data.len(), b: data.group_norm(cfg.p), trace_path };
    report("estimate", cfg.seed, cfg, result, start, ctx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Thm1,
    Thm2,
    Thm4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub estimate: EstimateConfig,
    /// Theorems to check; defaults to thm1 (plus thm2 for `(1,∞)` classes,
    /// thm4 alone for multi-class estimates).
    #[serde(default)]
    pub theorems: Option<Vec<Theorem>>,
    /// Negative control: divide the thm1 bound by 1000.
    #[serde(default)]
    pub debug_shrink_thm1: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    /// `mean + 3·stderr`.
    pub estimate_upper: f64,
    /// `mean − 3·stderr`.
    pub estimate_lower: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditResult {
    pub estimate: RadEstimate,
    pub attack: AttackSpec,
    pub bounds: BoundReport,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// PASS iff `mean + 3·stderr ≤ bound` for every upper bound and
/// `mean + 3·stderr ≥ lower` for the lower bound.
pub fn verdicts(est: &RadEstimate, bounds: &BoundReport, theorems: &[Theorem], shrink: bool, lower: bool) -> Vec<Verdict> {
    let (up, down) = (est.upper(3.0), est.upper(-3.0));
    let mut out = Vec::new();
    for t in theorems {
        let (name, bound) = match t {
            Theorem::Thm1 => ("thm1", if shrink { bounds.thm1_frobenius / 1000.0 } else { bounds.thm1_frobenius }),
            Theorem::Thm2 => ("thm2", bounds.thm2_one_inf),
            Theorem::Thm4 => ("thm4", bounds.thm4_multiclass.unwrap_or(f64::NAN)),
        };
        out.push(Verdict { check: format!("{name}_upper"), estimate_upper: up, estimate_lower: down, bound, pass: up <= bound });
    }
    if lower {
        let bound = bounds.thm3_lower;
        out.push(Verdict { check: "thm3_lower".into(), estimate_upper: up, estimate_lower: down, bound, pass: up >= bound });
    }
    out
}

pub fn cmd_audit(cfg: &AuditConfig, ctx: &Context) -> CliResult<Report<AuditConfig, AuditResult>> {
    let start = Instant::now();
    let e = &cfg.estimate;
    let data = e.data.load(e.seed)?;
    let mut estimate = run_estimate(e, &data, ctx.trace)?;
    write_estimate_trace(&estimate, ctx, "audit_trace.csv")?;
    estimate.trace.clear();
    let multiclass = e.kind == EstimateKind::ArcMulticlass;
    let req = BoundRequest {
        class: e.class.clone(),
        b: data.group_norm(e.p),
        epsilon: if e.kind == EstimateKind::Rc { 0.0 } else { e.epsilon },
        p: e.p,
        n: data.len(),
        gamma: e.gamma,
        multiclass,
        khintchine_c: None,
    };
    let bounds = bound_report(&req, None)?;
    let theorems = cfg.theorems.clone().unwrap_or_else(|| {
        if multiclass {
            vec![Theorem::Thm4]
        } else if e.class.norm == arc_core::rademacher::ClassNorm::OneInf {
            vec![Theorem::Thm1, Theorem::Thm2]
        } else {
            vec![Theorem::Thm1]
        }
    });
    let lower = !multiclass && data.is_binary() && is_equal_entries(&data);
    let v = verdicts(&estimate, &bounds, &theorems, cfg.debug_shrink_thm1, lower);
    let pass = v.iter().all(|x| x.pass);
    let result = AuditResult { estimate, attack: e.resolved_attack(), bounds, verdicts: v, pass };
    report("audit", e.seed, cfg, result, start, ctx)
}

/// Train and test data for an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentData {
    /// Train and test blobs around the same means.
    Blobs { spec: BlobSpec, test_n: usize },
    Csv { train: PathBuf, test: PathBuf },
}

impl ExperimentData {
    pub fn load(&self, seed: u64) -> CliResult<(Dataset, Dataset)> {
        match self {
            ExperimentData::Blobs { spec, test_n } => {
                let mut rng = stream_rng(seed, DATA_STREAM);
                let means = blob_means(spec, &mut rng);
                let train = gaussian_blobs_with_means(spec, &means, &mut rng)?;
                let test = gaussian_blobs_with_means(&BlobSpec { n: *test_n, ..spec.clone() }, &means, &mut rng)?;
                Ok((train, test))
            }
            ExperimentData::Csv { train, test } => Ok((Dataset::load_csv(train)?, Dataset::load_csv(test)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRunConfig {
    pub data: ExperimentData,
    pub dims: Vec<usize>,
    pub activation: Activation,
    pub train: TrainConfig,
    pub eval_attack: AttackSpec,
    /// Seeds `seed, seed+1, …, seed+runs−1`.
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default)]
    pub trace: bool,
}

fn default_percentile() -> f64 {
    5.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub gap_ordering_holds: bool,
    pub norm_ordering_holds: bool,
    pub files: Vec<PathBuf>,
}

pub fn cmd_experiment(
    cfg: &ExperimentRunConfig,
    ctx: &Context,
) -> CliResult<Report<ExperimentRunConfig, ExperimentResult>> {
    let start = Instant::now();
    if cfg.runs == 0 {
        return Err(CliError::Invalid("runs must be positive".into()));
    }
    let (train, test) = cfg.data.load(cfg.seed)?;
    let exp = ExperimentConfig {
        dims: cfg.dims.clone(),
        activation: cfg.activation,
        train: cfg.train.clone(),
        eval_attack: cfg.eval_attack,
        seeds: (0..cfg.runs as u64).map(|i| cfg.seed.wrapping_add(i)).collect(),
        percentile: cfg.percentile,
        trace: cfg.trace || ctx.trace,
    };
    let summary = run_experiment(&exp, &train, &test)?;
    let mut files = Vec::new();
    for r in &summary.runs {
        for (tag, net, trace) in [("std", &r.std_net, &r.std_trace), ("adv", &r.adv_net, &r.adv_trace)] {
            if let (Some(net), Some(path)) = (net, ctx.path(&format!("model_{tag}_seed{}.json", r.seed))?) {
                fs::write(&path, ModelFile::from_network(net, Some(r.seed)).to_json()?).map_err(|e| io_err(&path, e))?;
                files.push(path);
            }
            if !trace.is_empty() {
                if let Some(path) = ctx.path(&format!("trace_{tag}_seed{}.csv", r.seed))? {
                    save_trace_csv(trace, &path)?;
                    files.push(path);
                }
            }
        }
    }
    if exp.trace {
        if let Some(path) = ctx.path("plot.dat")? {
            let std: Vec<&[_]> = summary.runs.iter().map(|r| r.std_trace.as_slice()).collect();
            let adv: Vec<&[_]> = summary.runs.iter().map(|r| r.adv_trace.as_slice()).collect();
            let gap = |r: &arc_core::train::TraceRow| r.test_err - r.train_err;
            let rgap = |r: &arc_core::train::TraceRow| r.robust_test_err - r.robust_train_err;
            let series = [
                ("std_gap", median_trace(&std, gap)),
                ("adv_robust_gap", median_trace(&adv, rgap)),
                ("std_margin", median_trace(&std, |r| r.margin_p5)),
                ("adv_margin", median_trace(&adv, |r| r.margin_p5)),
                ("std_fro_product", median_trace(&std, |r| r.fro_product)),
                ("adv_fro_product", median_trace(&adv, |r| r.fro_product)),
                ("std_fro_over_margin", median_trace(&std, |r| r.fro_over_margin)),
                ("adv_fro_over_margin", median_trace(&adv, |r| r.fro_over_margin)),
            ];
            let f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_plot_data(&series, f)?;
            files.push(path);
        }
    }
    let result = ExperimentResult {
        gap_ordering_holds: summary.gap_ordering_holds(),
        norm_ordering_holds: summary.norm_ordering_holds(),
        summary,
        files,
    };
    report("experiment", cfg.seed, cfg, result, start, ctx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringConfig {
    pub class: FunctionClassSpec,
    pub b: f64,
    pub epsilon: f64,
    pub p: Exponent,
    pub n: usize,
    /// Cover radii at which to report log cover sizes and layer radii.
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: DeltaChoice,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> DeltaChoice {
    DeltaChoice::Optimal
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverAtRadius {
    pub radius: f64,
    pub log_cover: f64,
    pub layer_deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringResult {
    pub diameter: f64,
    pub covers: Vec<CoverAtRadius>,
    pub dudley: DudleyResult,
    pub dudley_zero_delta: DudleyResult,
    pub closed_form: f64,
    pub unit_integral: f64,
    pub unit_integral_closed_form: f64,
}

pub fn cmd_covering(cfg: &CoveringConfig, ctx: &Context) -> CliResult<Report<CoveringConfig, CoveringResult>> {
    let start = Instant::now();
    cfg.class.validate()?;
    let chain = Chain::new(&cfg.class, cfg.b, cfg.epsilon, cfg.p, cfg.n)?;
    let covers = cfg
        .radii
        .iter()
        .map(|&r| {
            if r > 0.0 {
                Ok(CoverAtRadius { radius: r, log_cover: chain.log_cover(r), layer_deltas: layer_deltas(&cfg.class, chain.diameter, r) })
            } else {
                Err(CliError::Invalid(format!("cover radius must be positive, got {r}")))
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    let result = CoveringResult {
        diameter: chain.diameter,
        covers,
        dudley: dudley_integral(&chain, cfg.delta)?,
        dudley_zero_delta: dudley_integral(&chain, DeltaChoice::Zero)?,
        closed_form: chain.closed_form_bound(),
        unit_integral: unit_entropy_integral(cfg.class.depth())?,
        unit_integral_closed_form: unit_entropy_integral_closed_form(cfg.class.depth()),
    };
    report("covering", cfg.seed, cfg, result, start, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use arc_core::rademacher::ClassNorm;

    fn class() -> FunctionClassSpec {
        FunctionClassSpec { dims: vec![2, 3, 1], norm: ClassNorm::Frobenius, budgets: vec![1.0, 1.0], activation: Activation::Relu }
    }

    #[test]
    fn unknown_keys_rejected() {
        let ok = r#"{"data": {"kind": "equal_entries", "n": 4, "dim": 2, "b": 1.0, "p": 2}, "seed": 1}"#;
        assert!(parse_config::<GenDataConfig>(ok).is_ok());
        let bad = r#"{"data": {"kind": "equal_entries", "n": 4, "dim": 2, "b": 1.0, "p": 2}, "seed": 1, "colour": 3}"#;
        assert!(matches!(parse_config::<GenDataConfig>(bad), Err(CliError::Invalid(_))));
        let nested = r#"{"data": {"kind": "equal_entries", "n": 4, "dim": 2, "b": 1.0, "p": 2, "q": 1}, "seed": 1}"#;
        assert!(parse_config::<GenDataConfig>(nested).is_err());
    }

    #[test]
    fn bounds_need_b_and_n() {
        let cfg = BoundsConfig {
            class: class(),
            epsilon: 0.1,
            p: Exponent::TWO,
            b: Some(1.0),
            n: None,
            data: None,
            gamma: None,
            multiclass: false,
            khintchine_c: None,
            model: None,
            seed: 0,
        };
        assert!(matches!(cmd_bounds(&cfg, &Context::default()), Err(CliError::Invalid(_))));
        let r = cmd_bounds(&BoundsConfig { n: Some(100), ..cfg }, &Context::default()).unwrap();
        assert!((r.result.thm1_frobenius - 10.601).abs() < 1e-3);
    }

    #[test]
    fn verdict_arithmetic() {
        let est = RadEstimate { mean: 1.0, stderr: 0.1, draws: 10, exhaustive: false, low_confidence: false, trace: vec![] };
        let req = BoundRequest {
            class: class(),
            b: 1.0,
            epsilon: 0.1,
            p: Exponent::TWO,
            n: 100,
            gamma: None,
            multiclass: false,
            khintchine_c: None,
        };
        let b = bound_report(&req, None).unwrap();
        let v = verdicts(&est, &b, &[Theorem::Thm1], false, false);
        assert!(v[0].pass && (v[0].estimate_upper - 1.3).abs() < 1e-15);
        assert!(!verdicts(&est, &b, &[Theorem::Thm1], true, false)[0].pass);
        let low = verdicts(&est, &b, &[], false, true);
        assert_eq!(low[0].check, "thm3_lower");
        assert!(low[0].pass);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(CoreError::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::Numerical("x".into())).exit_code(), 3);
    }
}
