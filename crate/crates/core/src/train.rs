//! Mini-batch SGD for small MLPs, with an optional PGD adversarial branch,
//! plus the margin and generalization-gap measurements taken on trained nets.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{inner_min, pgd_with, AttackSpec, PgdScratch, Solver};
use crate::data::Dataset;
use crate::error::{invalid, mismatch, Error, Result};
use crate::exponent::Exponent;
use crate::linalg::{DenseMatrix, NormKind};
use crate::network::{Activation, HeadObjective, Label, Loss, Network};
use crate::rng::{stream_id, stream_rng};

const TAG_SHUFFLE: u64 = 0x0100_0000;
const TAG_ADV: u64 = 0x0200_0000;
const TAG_EVAL: u64 = 0x0300_0000;
const TAG_MARGIN: u64 = 0x0400_0000;
const TAG_INIT: u64 = 0x0500_0000;

/// Robust train error at or above this marks a gap table as degenerate.
pub const DEGENERATE_ROBUST_ERROR: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// `(epoch_start, lr)` pairs; the first must start at epoch 0.
    pub lr_schedule: Vec<(usize, f64)>,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub adversarial: bool,
    pub attack: AttackSpec,
    pub seed: u64,
    pub loss: Loss,
}

impl TrainConfig {
    /// 200 epochs at lr 0.1, 0.01 from epoch 100 and 0.001 from epoch 150,
    /// batch 32, `ℓ∞` PGD with ε = 0.1.
    pub fn desk_default(loss: Loss) -> Self {
        Self {
            epochs: 200,
            lr_schedule: vec![(0, 0.1), (100, 0.01), (150, 0.001)],
            weight_decay: 0.0,
            batch_size: 32,
            adversarial: false,
            attack: AttackSpec::pgd(Exponent::INF, 0.1),
            seed: 0,
            loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.lr_schedule.first() {
            None => return Err(invalid("lr schedule is empty")),
            Some(&(start, _)) if start != 0 => {
                return Err(invalid(format!("lr schedule must start at epoch 0, got {start}")))
            }
            _ => {}
        }
        if self.lr_schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("lr schedule epochs must be strictly increasing"));
        }
        if let Some(&(_, lr)) = self.lr_schedule.iter().find(|(_, lr)| !(*lr >= 0.0 && lr.is_finite())) {
            return Err(invalid(format!("learning rates must be finite and >= 0, got {lr}")));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(invalid(format!("weight decay must be finite and >= 0, got {}", self.weight_decay)));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch size must be positive"));
        }
        if let Loss::Ramp { gamma } = self.loss {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(invalid(format!("ramp gamma must be positive, got {gamma}")));
            }
        }
        if self.adversarial {
            self.attack.validate()?;
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr_schedule.iter().take_while(|(s, _)| *s <= epoch).last().map_or(0.0, |&(_, lr)| lr)
    }
}

/// What the attacked objective is for a label: `y·f(x)` or the class margin.
pub fn objective_for(label: Label) -> HeadObjective {
    match label {
        Label::Signed(y) => HeadObjective::Signed { y },
        Label::Class(y) => HeadObjective::Margin { y },
    }
}

fn check_compatible(net: &Network<f64>, data: &Dataset) -> Result<()> {
    if net.input_dim() != data.dim() {
        return Err(mismatch(format!("network takes {} inputs, data has {}", net.input_dim(), data.dim())));
    }
    if net.output_dim() != data.labels().head_dim() {
        return Err(mismatch(format!(
            "network head has {} outputs, labels need {}",
            net.output_dim(),
            data.labels().head_dim()
        )));
    }
    Ok(())
}

fn check_loss(loss: Loss, data: &Dataset) -> Result<()> {
    match (loss, data.is_binary()) {
        (Loss::Logistic, false) => Err(invalid("logistic loss needs ±1 labels")),
        (Loss::CrossEntropy, true) => Err(invalid("cross-entropy needs class labels")),
        _ => Ok(()),
    }
}

/// Attack point for one sample with the solver named in `spec`.
fn attack_point(
    net: &Network<f64>,
    x: &[f64],
    obj: HeadObjective,
    spec: &AttackSpec,
    seed: u64,
    stream: u64,
    scratch: &mut PgdScratch<f64>,
) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, stream);
    match spec.solver {
        Solver::Pgd | Solver::Fgsm => Ok(pgd_with(net, x, obj, spec, &mut rng, scratch).x_star),
        _ => Ok(inner_min(net, x, obj, spec, &mut rng)?.x_star),
    }
}

/// One row of the per-epoch trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub train_err: f64,
    pub test_err: f64,
    pub robust_train_err: f64,
    pub robust_test_err: f64,
    pub fro_product: f64,
    pub oneinf_product: f64,
    pub margin_p5: f64,
    pub fro_over_margin: f64,
}

/// What to evaluate at each epoch end. Missing pieces are recorded as NaN.
#[derive(Clone, Copy, Debug, Default)]
pub struct TraceSpec<'a> {
    pub test: Option<&'a Dataset>,
    pub eval_attack: Option<&'a AttackSpec>,
    /// Evaluate margins on attacked inputs rather than clean ones.
    pub adversarial_margin: bool,
}

pub fn train(net0: &Network<f64>, data: &Dataset, cfg: &TrainConfig) -> Result<Network<f64>> {
    run(net0, data, cfg, None).map(|(net, _)| net)
}

pub fn train_traced(
    net0: &Network<f64>,
    data: &Dataset,
    cfg: &TrainConfig,
    trace: &TraceSpec<'_>,
) -> Result<(Network<f64>, Vec<TraceRow>)> {
    run(net0, data, cfg, Some(trace))
}

fn run(
    net0: &Network<f64>,
    data: &Dataset,
    cfg: &TrainConfig,
    trace: Option<&TraceSpec<'_>>,
) -> Result<(Network<f64>, Vec<TraceRow>)> {
    cfg.validate()?;
    check_compatible(net0, data)?;
    check_loss(cfg.loss, data)?;
    if data.is_empty() {
        return Err(invalid("cannot train on an empty dataset"));
    }
    let mut net = net0.clone();
    let mut grads: Vec<DenseMatrix<f64>> =
        net.weights().iter().map(|w| DenseMatrix::zeros(w.rows(), w.cols())).collect();
    let mut ws = net.workspace();
    let mut scratch = PgdScratch::new(&net);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rows = Vec::new();
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        order.sort_unstable();
        order.shuffle(&mut stream_rng(cfg.seed, stream_id(TAG_SHUFFLE + epoch as u64, 0)));
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grads.iter_mut().for_each(|g| g.as_mut_slice().fill(0.0));
            let scale = 1.0 / batch.len() as f64;
            let mut total = 0.0;
            for &i in batch {
                let label = data.label(i);
                let x = if cfg.adversarial {
                    let stream = stream_id(TAG_ADV + epoch as u64, i as u64);
                    attack_point(&net, data.sample(i), objective_for(label), &cfg.attack, cfg.seed, stream, &mut scratch)?
                } else {
                    data.sample(i).to_vec()
                };
                total += net.accumulate_loss_grad(&x, label, cfg.loss, &mut ws, &mut grads, scale)?;
            }
            if !total.is_finite() {
                return Err(Error::Numerical(format!(
                    "training diverged: loss {total} at epoch {epoch}, batch {b} (lr {lr})"
                )));
            }
            for (w, g) in net.weights_mut().iter_mut().zip(&grads) {
                for (wv, &gv) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *wv -= lr * (gv + cfg.weight_decay * *wv);
                }
            }
        }
        if !net.is_finite() {
            return Err(Error::Numerical(format!("non-finite weights after epoch {epoch} (lr {lr})")));
        }
        if let Some(t) = trace {
            rows.push(trace_row(&net, data, cfg.seed, epoch + 1, t)?);
        }
    }
    Ok((net, rows))
}

fn trace_row(net: &Network<f64>, train: &Dataset, seed: u64, epoch: usize, t: &TraceSpec<'_>) -> Result<TraceRow> {
    let nan = f64::NAN;
    let test_err = match t.test {
        Some(d) => clean_error(net, d)?,
        None => nan,
    };
    let (robust_train_err, robust_test_err) = match t.eval_attack {
        Some(a) => (
            robust_error(net, train, a, seed)?,
            match t.test {
                Some(d) => robust_error(net, d, a, seed)?,
                None => nan,
            },
        ),
        None => (nan, nan),
    };
    let margin_attack = if t.adversarial_margin { t.eval_attack.map(|a| (a, seed)) } else { None };
    let gamma = margin_percentile(net, train, 5.0, margin_attack)?.gamma;
    let fro_product = net.norm_product(NormKind::Frobenius)?;
    Ok(TraceRow {
        epoch,
        train_err: clean_error(net, train)?,
        test_err,
        robust_train_err,
        robust_test_err,
        fro_product,
        oneinf_product: net.norm_product(NormKind::GroupOneInf)?,
        margin_p5: gamma,
        fro_over_margin: norm_over_margin(fro_product, gamma),
    })
}

/// `Π / γ`, infinite when the margin is not positive.
pub fn norm_over_margin(product: f64, gamma: f64) -> f64 {
    if gamma > 0.0 {
        product / gamma
    } else {
        f64::INFINITY
    }
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "epoch",
        "train_err",
        "test_err",
        "robust_train_err",
        "robust_test_err",
        "fro_product",
        "oneinf_product",
        "margin_p5",
        "fro_over_margin",
    ])?;
    for r in rows {
        let mut rec = vec![r.epoch.to_string()];
        rec.extend(
            [
                r.train_err,
                r.test_err,
                r.robust_train_err,
                r.robust_test_err,
                r.fro_product,
                r.oneinf_product,
                r.margin_p5,
                r.fro_over_margin,
            ]
            .iter()
            .map(|v| format!("{v:.16e}")),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    write_trace_csv(rows, std::fs::File::create(path)?)
}

fn misclassified(net: &Network<f64>, x: &[f64], label: Label, ws: &mut crate::network::Workspace<f64>) -> bool {
    net.predict(x, ws) != label
}

/// Clean 0-1 error.
pub fn clean_error(net: &Network<f64>, data: &Dataset) -> Result<f64> {
    check_compatible(net, data)?;
    if data.is_empty() {
        return Err(invalid("empty dataset"));
    }
    let mut ws = net.workspace();
    let wrong = (0..data.len()).filter(|&i| misclassified(net, data.sample(i), data.label(i), &mut ws)).count();
    Ok(wrong as f64 / data.len() as f64)
}

/// Robust 0-1 error: a sample counts as wrong when it is misclassified
/// clean or at the attack point.
pub fn robust_error(net: &Network<f64>, data: &Dataset, attack: &AttackSpec, seed: u64) -> Result<f64> {
    check_compatible(net, data)?;
    attack.validate()?;
    if data.is_empty() {
        return Err(invalid("empty dataset"));
    }
    let wrong: Result<Vec<bool>> = (0..data.len())
        .into_par_iter()
        .map_init(
            || (net.workspace(), PgdScratch::new(net)),
            |(ws, scratch), i| {
                let (x, label) = (data.sample(i), data.label(i));
                if misclassified(net, x, label, ws) {
                    return Ok(true);
                }
                let xa = attack_point(net, x, objective_for(label), attack, seed, stream_id(TAG_EVAL, i as u64), scratch)?;
                Ok(misclassified(net, &xa, label, ws))
            },
        )
        .collect();
    Ok(wrong?.iter().filter(|&&w| w).count() as f64 / data.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginSource {
    Clean,
    PgdAdversarial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginStats {
    pub percentile: f64,
    pub gamma: f64,
    pub computed_on: MarginSource,
}

/// Per-sample margins: `y·f(x)` for a scalar head, `[f]_y − max_{k≠y} [f]_k`
/// otherwise. With an attack, the margin at the attack's minimizer.
pub fn margins(net: &Network<f64>, data: &Dataset, attack: Option<(&AttackSpec, u64)>) -> Result<Vec<f64>> {
    check_compatible(net, data)?;
    if let Some((a, _)) = attack {
        a.validate()?;
    }
    (0..data.len())
        .into_par_iter()
        .map_init(
            || (net.workspace(), PgdScratch::new(net)),
            |(ws, scratch), i| {
                let obj = objective_for(data.label(i));
                let x = data.sample(i);
                match attack {
                    None => Ok(obj.value(net.forward_with(x, ws))),
                    Some((a, seed)) => {
                        let mut rng = stream_rng(seed, stream_id(TAG_MARGIN, i as u64));
                        match a.solver {
                            Solver::Pgd | Solver::Fgsm => Ok(pgd_with(net, x, obj, a, &mut rng, scratch).value),
                            _ => Ok(inner_min(net, x, obj, a, &mut rng)?.value),
                        }
                    }
                }
            },
        )
        .collect()
}

/// Nearest-rank percentile: element `⌈q/100 · n⌉` (1-based) of the ascending sort.
pub fn nearest_rank(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("percentile of an empty set"));
    }
    if !(q > 0.0 && q < 100.0) {
        return Err(invalid(format!("percentile must lie in (0, 100), got {q}")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q / 100.0 * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Ok(v[rank - 1])
}

pub fn margin_percentile(
    net: &Network<f64>,
    data: &Dataset,
    percentile: f64,
    attack: Option<(&AttackSpec, u64)>,
) -> Result<MarginStats> {
    if data.is_empty() {
        return Err(invalid("margins of an empty dataset"));
    }
    let m = margins(net, data, attack)?;
    Ok(MarginStats {
        percentile,
        gamma: nearest_rank(&m, percentile)?,
        computed_on: if attack.is_some() { MarginSource::PgdAdversarial } else { MarginSource::Clean },
    })
}

/// Clean and robust errors of the standard and adversarial nets on one split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorQuad {
    pub std_clean: f64,
    pub std_robust: f64,
    pub adv_clean: f64,
    pub adv_robust: f64,
}

/// Generalization gaps (test minus train error): `e_<net>_<metric>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub e_std_std: f64,
    pub e_std_rob: f64,
    pub e_adv_std: f64,
    pub e_adv_rob: f64,
    pub train_errors: ErrorQuad,
    pub test_errors: ErrorQuad,
    /// Robust train error of some net is (nearly) 100%.
    pub degenerate: bool,
}

fn error_quad(std_net: &Network<f64>, adv_net: &Network<f64>, d: &Dataset, attack: &AttackSpec, seed: u64) -> Result<ErrorQuad> {
    Ok(ErrorQuad {
        std_clean: clean_error(std_net, d)?,
        std_robust: robust_error(std_net, d, attack, seed)?,
        adv_clean: clean_error(adv_net, d)?,
        adv_robust: robust_error(adv_net, d, attack, seed)?,
    })
}

pub fn gap_table(
    std_net: &Network<f64>,
    adv_net: &Network<f64>,
    train: &Dataset,
    test: &Dataset,
    attack: &AttackSpec,
    seed: u64,
) -> Result<GapTable> {
    let tr = error_quad(std_net, adv_net, train, attack, seed)?;
    let te = error_quad(std_net, adv_net, test, attack, seed)?;
    Ok(GapTable {
        e_std_std: te.std_clean - tr.std_clean,
        e_std_rob: te.std_robust - tr.std_robust,
        e_adv_std: te.adv_clean - tr.adv_clean,
        e_adv_rob: te.adv_robust - tr.adv_robust,
        train_errors: tr,
        test_errors: te,
        degenerate: tr.std_robust.max(tr.adv_robust) >= DEGENERATE_ROBUST_ERROR,
    })
}

/// Shared settings of a standard-versus-adversarial comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub activation: Activation,
    /// Training settings; `adversarial` and `seed` are set per run.
    pub train: TrainConfig,
    pub eval_attack: AttackSpec,
    pub seeds: Vec<u64>,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default)]
    pub trace: bool,
}

fn default_percentile() -> f64 {
    5.0
}

/// Final weight norms and margin of one trained net.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub fro_product: f64,
    pub oneinf_product: f64,
    pub margin: MarginStats,
    pub fro_over_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub gaps: GapTable,
    pub std_final: FinalStats,
    pub adv_final: FinalStats,
    pub std_trace: Vec<TraceRow>,
    pub adv_trace: Vec<TraceRow>,
    #[serde(skip)]
    pub std_net: Option<Network<f64>>,
    #[serde(skip)]
    pub adv_net: Option<Network<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMedians {
    pub e_std_std: f64,
    pub e_std_rob: f64,
    pub e_adv_std: f64,
    pub e_adv_rob: f64,
    pub std_fro_over_margin: f64,
    pub adv_fro_over_margin: f64,
    pub std_fro_product: f64,
    pub adv_fro_product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub runs: Vec<SeedOutcome>,
    pub medians: ExperimentMedians,
}

impl ExperimentSummary {
    /// `Ẽ(f_adv) > E(f_adv) > E(f_std)` on the medians.
    pub fn gap_ordering_holds(&self) -> bool {
        let m = &self.medians;
        m.e_adv_rob > m.e_adv_std && m.e_adv_std > m.e_std_std
    }

    /// `Π‖W_j‖_F/γ` larger for the adversarial net, on the medians.
    pub fn norm_ordering_holds(&self) -> bool {
        self.medians.adv_fro_over_margin > self.medians.std_fro_over_margin
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Initial weights for a seed: He initialization from a dedicated stream.
pub fn initial_network(dims: &[usize], activation: Activation, seed: u64) -> Result<Network<f64>> {
    Network::init_random(dims, activation, &mut stream_rng(seed, stream_id(TAG_INIT, 0)))
}

fn final_stats(net: &Network<f64>, data: &Dataset, percentile: f64, attack: Option<(&AttackSpec, u64)>) -> Result<FinalStats> {
    let margin = margin_percentile(net, data, percentile, attack)?;
    let fro_product = net.norm_product(NormKind::Frobenius)?;
    Ok(FinalStats {
        fro_product,
        oneinf_product: net.norm_product(NormKind::GroupOneInf)?,
        margin,
        fro_over_margin: norm_over_margin(fro_product, margin.gamma),
    })
}

/// Trains a standard and an adversarial net from the same initialization.
/// The adversarial net's margin is measured on attacked inputs.
pub fn run_seed(cfg: &ExperimentConfig, train_data: &Dataset, test_data: &Dataset, seed: u64) -> Result<SeedOutcome> {
    let net0 = initial_network(&cfg.dims, cfg.activation, seed)?;
    let std_cfg = TrainConfig { adversarial: false, seed, ..cfg.train.clone() };
    let adv_cfg = TrainConfig { adversarial: true, seed, ..cfg.train.clone() };
    let spec = |adv: bool| TraceSpec { test: Some(test_data), eval_attack: Some(&cfg.eval_attack), adversarial_margin: adv };
    let (std_net, std_trace, adv_net, adv_trace) = if cfg.trace {
        let (s, st) = train_traced(&net0, train_data, &std_cfg, &spec(false))?;
        let (a, at) = train_traced(&net0, train_data, &adv_cfg, &spec(true))?;
        (s, st, a, at)
    } else {
        (train(&net0, train_data, &std_cfg)?, Vec::new(), train(&net0, train_data, &adv_cfg)?, Vec::new())
    };
    let gaps = gap_table(&std_net, &adv_net, train_data, test_data, &cfg.eval_attack, seed)?;
    Ok(SeedOutcome {
        seed,
        gaps,
        std_final: final_stats(&std_net, train_data, cfg.percentile, None)?,
        adv_final: final_stats(&adv_net, train_data, cfg.percentile, Some((&cfg.eval_attack, seed)))?,
        std_trace,
        adv_trace,
        std_net: Some(std_net),
        adv_net: Some(adv_net),
    })
}

/// Runs every seed (in parallel) and takes medians across seeds.
pub fn run_experiment(cfg: &ExperimentConfig, train_data: &Dataset, test_data: &Dataset) -> Result<ExperimentSummary> {
    if cfg.seeds.is_empty() {
        return Err(invalid("experiment needs at least one seed"));
    }
    cfg.eval_attack.validate()?;
    let runs: Result<Vec<SeedOutcome>> =
        cfg.seeds.par_iter().map(|&s| run_seed(cfg, train_data, test_data, s)).collect();
    let runs = runs?;
    let col = |f: &dyn Fn(&SeedOutcome) -> f64| median(&runs.iter().map(f).collect::<Vec<_>>());
    let medians = ExperimentMedians {
        e_std_std: col(&|r| r.gaps.e_std_std),
        e_std_rob: col(&|r| r.gaps.e_std_rob),
        e_adv_std: col(&|r| r.gaps.e_adv_std),
        e_adv_rob: col(&|r| r.gaps.e_adv_rob),
        std_fro_over_margin: col(&|r| r.std_final.fro_over_margin),
        adv_fro_over_margin: col(&|r| r.adv_final.fro_over_margin),
        std_fro_product: col(&|r| r.std_final.fro_product),
        adv_fro_product: col(&|r| r.adv_final.fro_product),
    };
    Ok(ExperimentSummary { runs, medians })
}

/// Whitespace-separated columns, one row per epoch, one column per series,
/// with a `#` header naming the series.
pub fn write_plot_data<W: Write>(series: &[(&str, Vec<f64>)], mut w: W) -> Result<()> {
    write!(w, "# epoch")?;
    for (name, _) in series {
        write!(w, " {name}")?;
    }
    writeln!(w)?;
    let len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for e in 0..len {
        write!(w, "{}", e + 1)?;
        for (_, v) in series {
            match v.get(e) {
                Some(x) => write!(w, " {x:.16e}")?,
                None => write!(w, " nan")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Per-epoch medians across seeds of a trace column.
pub fn median_trace(traces: &[&[TraceRow]], column: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
    let len = traces.iter().map(|t| t.len()).min().unwrap_or(0);
    (0..len).map(|e| median(&traces.iter().map(|t| column(&t[e])).collect::<Vec<_>>())).collect()
}
