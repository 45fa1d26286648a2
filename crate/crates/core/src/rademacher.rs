//! Monte-Carlo estimates of standard and adversarial Rademacher complexity.
//!
//! For every sign vector σ the supremum over the class is approached from
//! below: random members of the class are scored, and the best few seed a
//! projected gradient ascent on the weights. Gradients through the inner
//! minimum over the perturbation ball are taken at the minimizer (envelope
//! rule). The reported numbers are therefore lower estimates.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    inner_min_linear_net, pgd_with, AttackSpec, GridOracle, PgdScratch, Solver, DEFAULT_GRID_RESOLUTION,
};
use crate::data::{Dataset, Labels};
use crate::error::{invalid, mismatch, Error, Result};
use crate::exponent::Exponent;
use crate::linalg::{p_norm, project_frobenius_ball, project_one_inf_ball, DenseMatrix, NormKind};
use crate::network::{ramp_unchecked, Activation, HeadObjective, Network, Workspace};
use crate::rng::stream_rng;

/// Largest sample count for which all `2^n` sign patterns may be enumerated.
pub const MAX_EXHAUSTIVE_SAMPLES: usize = 20;

/// Norm constraining each weight matrix of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassNorm {
    #[serde(alias = "fro")]
    Frobenius,
    /// `‖·‖_{1,∞}`, the largest row ℓ1-norm.
    #[serde(alias = "group_one_inf", alias = "1inf")]
    OneInf,
}

impl ClassNorm {
    pub fn kind(self) -> NormKind {
        match self {
            ClassNorm::Frobenius => NormKind::Frobenius,
            ClassNorm::OneInf => NormKind::GroupOneInf,
        }
    }
}

/// Networks of fixed widths with `‖W_j‖ ≤ M_j` for every layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionClassSpec {
    /// Widths `[h_0, …, h_l]`.
    pub dims: Vec<usize>,
    pub norm: ClassNorm,
    /// Budgets `[M_1, …, M_l]`.
    pub budgets: Vec<f64>,
    pub activation: Activation,
}

impl FunctionClassSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.dims.contains(&0) {
            return Err(invalid(format!("dims must list at least two positive widths, got {:?}", self.dims)));
        }
        if self.budgets.len() != self.depth() {
            return Err(mismatch(format!(
                "{} layers but {} norm budgets",
                self.depth(),
                self.budgets.len()
            )));
        }
        if let Some(m) = self.budgets.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(invalid(format!("norm budgets must be finite and >= 0, got {m}")));
        }
        self.activation.validate()?;
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("validated")
    }

    pub fn param_count(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// `Σ_j h_j h_{j−1}`.
    pub fn width_product_sum(&self) -> f64 {
        self.param_count() as f64
    }

    pub fn budget_product(&self) -> f64 {
        self.budgets.iter().product()
    }

    pub fn lipschitz(&self) -> f64 {
        self.activation.lipschitz()
    }

    pub fn is_linear(&self) -> bool {
        self.depth() == 1 || self.activation.is_linear()
    }

    pub fn zero_member(&self) -> Network<f64> {
        Network::zeros(&self.dims, self.activation).expect("validated dims")
    }

    /// True when every layer satisfies its budget up to a relative tolerance.
    pub fn contains(&self, net: &Network<f64>, rel_tol: f64) -> bool {
        net.dims() == self.dims
            && net
                .weights()
                .iter()
                .zip(&self.budgets)
                .all(|(w, &m)| w.norm(self.norm.kind()).is_ok_and(|v| v <= m * (1.0 + rel_tol)))
    }

    /// Projects each layer onto its norm ball (radial rescale for Frobenius,
    /// per-row ℓ1 projection for `(1,∞)`).
    pub fn project(&self, net: &mut Network<f64>) {
        let norm = self.norm;
        for (w, &m) in net.weights_mut().iter_mut().zip(&self.budgets) {
            match norm {
                ClassNorm::Frobenius => project_frobenius_ball(w, m),
                ClassNorm::OneInf => project_one_inf_ball(w, m),
            }
        }
    }

    /// Random member: Gaussian directions scaled onto the boundary of each
    /// ball (`boundary`) or to a radius drawn uniformly by volume.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R, boundary: bool) -> Network<f64> {
        let mut net = self.zero_member();
        for (w, &m) in net.weights_mut().iter_mut().zip(&self.budgets) {
            for v in w.as_mut_slice() {
                *v = StandardNormal.sample(rng);
            }
            match self.norm {
                ClassNorm::Frobenius => {
                    let k = w.len() as f64;
                    let r = if boundary { 1.0 } else { rng.random::<f64>().powf(1.0 / k) };
                    let n = p_norm(w.as_slice(), Exponent::TWO);
                    if n > 0.0 {
                        w.scale(r * m / n);
                    }
                }
                ClassNorm::OneInf => {
                    let k = w.cols() as f64;
                    for i in 0..w.rows() {
                        let r = if boundary { 1.0 } else { rng.random::<f64>().powf(1.0 / k) };
                        let row = w.row_mut(i);
                        let n = p_norm(row, Exponent::ONE);
                        if n > 0.0 {
                            row.iter_mut().for_each(|v| *v *= r * m / n);
                        }
                    }
                }
            }
        }
        net
    }
}

/// Per-σ search effort.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupBudget {
    /// Number of best candidates refined by gradient ascent.
    pub restarts: usize,
    pub ascent_steps: usize,
    /// Step at iteration t is `step_scale · M_j / √(t+1)` along the
    /// normalized layer gradient.
    pub step_scale: f64,
    /// Fresh random members scored per σ.
    pub random_samples: usize,
    /// Random members scored once and shared by all σ (their per-sample
    /// values do not depend on σ).
    pub shared_pool: usize,
}

impl Default for SupBudget {
    fn default() -> Self {
        Self { restarts: 10, ascent_steps: 200, step_scale: 0.5, random_samples: 500, shared_pool: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SignScheme {
    /// Independent uniform sign vectors.
    MonteCarlo { draws: usize },
    /// All `2^n` sign vectors, giving the exact expectation of the per-σ
    /// estimates.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateOptions {
    pub signs: SignScheme,
    #[serde(default)]
    pub budget: SupBudget,
    pub seed: u64,
    #[serde(default)]
    pub trace: bool,
}

impl EstimateOptions {
    pub fn monte_carlo(draws: usize, seed: u64) -> Self {
        Self { signs: SignScheme::MonteCarlo { draws }, budget: SupBudget::default(), seed, trace: false }
    }

    pub fn exhaustive(seed: u64) -> Self {
        Self { signs: SignScheme::Exhaustive, budget: SupBudget::default(), seed, trace: false }
    }

    pub fn with_budget(mut self, budget: SupBudget) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawTrace {
    pub draw_index: u64,
    /// FNV-1a hash of the sign pattern.
    pub sigma_hash: u64,
    pub sup_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
    pub exhaustive: bool,
    /// Set when a single Monte-Carlo draw makes the standard error meaningless.
    pub low_confidence: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<DrawTrace>,
}

impl RadEstimate {
    fn from_values(values: &[f64], exhaustive: bool) -> Self {
        let draws = values.len();
        let mean = values.iter().sum::<f64>() / draws as f64;
        let stderr = if exhaustive || draws < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (draws - 1) as f64;
            (var / draws as f64).sqrt()
        };
        Self { mean, stderr, draws, exhaustive, low_confidence: !exhaustive && draws < 2, trace: Vec::new() }
    }

    /// `mean + k·stderr`.
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }

    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["draw_index", "sigma_pattern_hash", "sup_value"])?;
        for t in &self.trace {
            wr.write_record([t.draw_index.to_string(), format!("{:016x}", t.sigma_hash), format!("{:.16e}", t.sup_value)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn fnv1a(sigma: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &s in sigma {
        h ^= if s > 0.0 { 1 } else { 0xff };
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// What each sample contributes for a fixed network.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Summand {
    /// `inf y·f(x′)`.
    Signed,
    /// `φ_γ(inf y·f(x′))`.
    RampSigned { gamma: f64 },
    /// `max φ_γ(M(f(x′), y)) = φ_γ(min_k inf ([f]_y − [f]_k)(x′))`.
    Multiclass { gamma: f64 },
}

enum Inner {
    AtPoint,
    Exact,
    Grid(GridOracle),
    Pgd,
}

struct Scratch {
    ws: Workspace<f64>,
    pgd: PgdScratch<f64>,
    up: Vec<f64>,
}

struct Problem<'a> {
    class: &'a FunctionClassSpec,
    data: &'a Dataset,
    attack: AttackSpec,
    summand: Summand,
    inner: Inner,
}

/// Value of one sample's term, and the coefficient and point at which its
/// weight gradient is `coef · ∇_W objective(x*)`.
struct Term {
    value: f64,
    coef: f64,
    objective: HeadObjective,
    x_star: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(
        class: &'a FunctionClassSpec,
        data: &'a Dataset,
        attack: AttackSpec,
        summand: Summand,
    ) -> Result<Self> {
        class.validate()?;
        attack.validate()?;
        if data.is_empty() {
            return Err(invalid("dataset is empty"));
        }
        if data.dim() != class.input_dim() {
            return Err(mismatch(format!(
                "data has dimension {} but the class expects {}",
                data.dim(),
                class.input_dim()
            )));
        }
        match (summand, data.labels()) {
            (Summand::Signed | Summand::RampSigned { .. }, Labels::Signed(_)) => {
                if class.output_dim() != 1 {
                    return Err(mismatch("binary labels need a class with a scalar head"));
                }
            }
            (Summand::Multiclass { .. }, Labels::Class { classes, .. }) => {
                if class.output_dim() != *classes {
                    return Err(mismatch(format!(
                        "{classes} classes but the class head has {} outputs",
                        class.output_dim()
                    )));
                }
            }
            (Summand::Multiclass { .. }, Labels::Signed(_)) => {
                return Err(invalid("multi-class estimation needs class-index labels"))
            }
            (_, Labels::Class { .. }) => return Err(invalid("binary estimation needs ±1 labels")),
        }
        if let Summand::RampSigned { gamma } | Summand::Multiclass { gamma } = summand {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(invalid(format!("gamma must be positive, got {gamma}")));
            }
        }
        let inner = if attack.epsilon == 0.0 {
            Inner::AtPoint
        } else {
            match attack.solver {
                Solver::ExactLinear => {
                    if !class.is_linear() {
                        return Err(Error::Unsupported(
                            "the exact inner solver needs a linear class (one layer or identity activation)".into(),
                        ));
                    }
                    Inner::Exact
                }
                Solver::Grid { resolution } => Inner::Grid(GridOracle::new(data.dim(), attack.p, resolution)?),
                Solver::Pgd | Solver::Fgsm => Inner::Pgd,
            }
        };
        Ok(Self { class, data, attack, summand, inner })
    }

    fn scratch(&self) -> Scratch {
        let net = self.class.zero_member();
        Scratch { ws: net.workspace(), pgd: PgdScratch::new(&net), up: vec![0.0; net.output_dim()] }
    }

    fn inner_min(
        &self,
        net: &Network<f64>,
        x: &[f64],
        objective: HeadObjective,
        rng: &mut ChaCha8Rng,
        s: &mut Scratch,
    ) -> (f64, Vec<f64>) {
        match &self.inner {
            Inner::AtPoint => (objective.value(net.forward_with(x, &mut s.ws)), x.to_vec()),
            Inner::Exact => {
                let r = inner_min_linear_net(net, x, objective, self.attack.p, self.attack.epsilon)
                    .expect("validated linear problem");
                (r.value, r.x_star)
            }
            Inner::Grid(g) => {
                let r = g.minimize(net, x, objective, self.attack.epsilon, &mut s.ws);
                (r.value, r.x_star)
            }
            Inner::Pgd => {
                let r = pgd_with(net, x, objective, &self.attack, rng, &mut s.pgd);
                (r.value, r.x_star)
            }
        }
    }

    fn term(&self, net: &Network<f64>, i: usize, rng: &mut ChaCha8Rng, s: &mut Scratch) -> Term {
        let x = self.data.sample(i);
        match (self.summand, self.data.label(i)) {
            (Summand::Signed, crate::network::Label::Signed(y)) => {
                let objective = HeadObjective::Signed { y };
                let (value, x_star) = self.inner_min(net, x, objective, rng, s);
                Term { value, coef: 1.0, objective, x_star }
            }
            (Summand::RampSigned { gamma }, crate::network::Label::Signed(y)) => {
                let objective = HeadObjective::Signed { y };
                let (t, x_star) = self.inner_min(net, x, objective, rng, s);
                Term { value: ramp_unchecked(t, gamma), coef: ramp_slope(t, gamma), objective, x_star }
            }
            (Summand::Multiclass { gamma }, crate::network::Label::Class(y)) => {
                let mut best: Option<(f64, HeadObjective, Vec<f64>)> = None;
                for k in (0..net.output_dim()).filter(|&k| k != y) {
                    let objective = HeadObjective::ClassPair { y, k };
                    let (v, xs) = self.inner_min(net, x, objective, rng, s);
                    if best.as_ref().is_none_or(|b| v < b.0) {
                        best = Some((v, objective, xs));
                    }
                }
                let (t, objective, x_star) = best.expect("at least two classes");
                Term { value: ramp_unchecked(t, gamma), coef: ramp_slope(t, gamma), objective, x_star }
            }
            _ => unreachable!("labels checked against the summand"),
        }
    }

    fn terms(&self, net: &Network<f64>, rng: &mut ChaCha8Rng, s: &mut Scratch) -> Vec<f64> {
        (0..self.data.len()).map(|i| self.term(net, i, rng, s).value).collect()
    }

    /// `(1/n) Σ σ_i term_i` with its weight gradient added into `grads`.
    fn objective_grad(
        &self,
        net: &Network<f64>,
        sigma: &[f64],
        rng: &mut ChaCha8Rng,
        s: &mut Scratch,
        grads: &mut [DenseMatrix<f64>],
    ) -> f64 {
        let n = self.data.len() as f64;
        let mut total = 0.0;
        for (i, &sg) in sigma.iter().enumerate() {
            let t = self.term(net, i, rng, s);
            total += sg * t.value;
            if t.coef != 0.0 {
                net.forward_with(&t.x_star, &mut s.ws);
                let out = s.ws.output().to_vec();
                t.objective.gradient(&out, &mut s.up);
                let up = std::mem::take(&mut s.up);
                net.backward(&mut s.ws, &up, None, Some((grads, sg * t.coef / n)));
                s.up = up;
            }
        }
        total / n
    }
}

#[inline]
fn ramp_slope(t: f64, gamma: f64) -> f64 {
    if t > 0.0 && t < gamma {
        -1.0 / gamma
    } else {
        0.0
    }
}

#[inline]
fn correlate(sigma: &[f64], values: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in sigma.iter().zip(values) {
        s += a * b;
    }
    s / sigma.len() as f64
}

/// Stream reserved for the shared candidate pool.
const POOL_STREAM: u64 = u64::MAX;

struct Pool {
    members: Vec<Network<f64>>,
    values: Vec<Vec<f64>>,
}

fn build_pool(problem: &Problem<'_>, seed: u64, size: usize) -> Pool {
    let mut rng = stream_rng(seed, POOL_STREAM);
    let mut members = vec![problem.class.zero_member()];
    for m in 0..size {
        members.push(problem.class.sample_member(&mut rng, m % 2 == 0));
    }
    let values = members
        .par_iter()
        .enumerate()
        .map(|(m, net)| {
            let mut rng = stream_rng(seed, POOL_STREAM - 1 - m as u64);
            let mut s = problem.scratch();
            problem.terms(net, &mut rng, &mut s)
        })
        .collect();
    Pool { members, values }
}

enum Candidate {
    Pool(usize),
    Fresh(Network<f64>),
}

/// Keeps the `cap` highest-valued candidates; earlier entries win ties.
fn offer(top: &mut Vec<(f64, Candidate)>, cap: usize, value: f64, c: Candidate) {
    if cap == 0 {
        return;
    }
    let pos = top.iter().position(|(v, _)| value > *v).unwrap_or(top.len());
    if pos < cap {
        top.insert(pos, (value, c));
        top.truncate(cap);
    }
}

fn sup_for_sigma(problem: &Problem<'_>, sigma: &[f64], pool: &Pool, budget: &SupBudget, rng: &mut ChaCha8Rng) -> f64 {
    let mut s = problem.scratch();
    let mut top: Vec<(f64, Candidate)> = Vec::with_capacity(budget.restarts + 1);
    let mut best = f64::NEG_INFINITY;
    for (m, v) in pool.values.iter().enumerate() {
        let val = correlate(sigma, v);
        best = best.max(val);
        offer(&mut top, budget.restarts, val, Candidate::Pool(m));
    }
    for k in 0..budget.random_samples {
        let net = problem.class.sample_member(rng, k % 2 == 0);
        let val = correlate(sigma, &problem.terms(&net, rng, &mut s));
        best = best.max(val);
        offer(&mut top, budget.restarts, val, Candidate::Fresh(net));
    }
    if budget.ascent_steps == 0 {
        return best;
    }
    let mut grads: Vec<DenseMatrix<f64>> =
        problem.class.zero_member().into_weights().into_iter().collect();
    for (_, cand) in top {
        let mut net = match cand {
            Candidate::Pool(m) => pool.members[m].clone(),
            Candidate::Fresh(n) => n,
        };
        for t in 0..budget.ascent_steps {
            grads.iter_mut().for_each(|g| g.scale(0.0));
            let val = problem.objective_grad(&net, sigma, rng, &mut s, &mut grads);
            best = best.max(val);
            let eta = budget.step_scale / ((t + 1) as f64).sqrt();
            for ((w, g), &m) in net.weights_mut().iter_mut().zip(&grads).zip(&problem.class.budgets) {
                let gn = p_norm(g.as_slice(), Exponent::TWO);
                if gn > 0.0 {
                    w.axpy(eta * m / gn, g);
                }
            }
            problem.class.project(&mut net);
        }
        best = best.max(correlate(sigma, &problem.terms(&net, rng, &mut s)));
    }
    best
}

fn run(problem: &Problem<'_>, opts: &EstimateOptions) -> Result<RadEstimate> {
    let n = problem.data.len();
    let (count, exhaustive) = match opts.signs {
        SignScheme::MonteCarlo { draws } => {
            if draws == 0 {
                return Err(invalid("draws must be at least 1"));
            }
            (draws as u64, false)
        }
        SignScheme::Exhaustive => {
            if n > MAX_EXHAUSTIVE_SAMPLES {
                return Err(invalid(format!(
                    "exhaustive signs need n <= {MAX_EXHAUSTIVE_SAMPLES}, got {n}"
                )));
            }
            (1u64 << n, true)
        }
    };
    let b = &opts.budget;
    if !(b.step_scale >= 0.0 && b.step_scale.is_finite()) {
        return Err(invalid("step_scale must be finite and >= 0"));
    }
    let pool = build_pool(problem, opts.seed, b.shared_pool);
    let results: Vec<(u64, f64)> = (0..count)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream_rng(opts.seed, d);
            let sigma: Vec<f64> = if exhaustive {
                (0..n).map(|i| if (d >> i) & 1 == 1 { 1.0 } else { -1.0 }).collect()
            } else {
                (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
            };
            let v = sup_for_sigma(problem, &sigma, &pool, b, &mut rng);
            (fnv1a(&sigma), v)
        })
        .collect();
    let values: Vec<f64> = results.iter().map(|r| r.1).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite supremum estimate".into()));
    }
    let mut est = RadEstimate::from_values(&values, exhaustive);
    if opts.trace {
        est.trace = results
            .iter()
            .enumerate()
            .map(|(d, &(sigma_hash, sup_value))| DrawTrace { draw_index: d as u64, sigma_hash, sup_value })
            .collect();
    }
    Ok(est)
}

/// Standard Rademacher complexity of `{(x, y) ↦ y f(x)}` on `data`.
pub fn estimate_rc(class: &FunctionClassSpec, data: &Dataset, opts: &EstimateOptions) -> Result<RadEstimate> {
    let at_point = AttackSpec::pgd(Exponent::TWO, 0.0);
    run(&Problem::new(class, data, at_point, Summand::Signed)?, opts)
}

/// Adversarial Rademacher complexity of `{(x, y) ↦ inf_{x′} y f(x′)}`.
pub fn estimate_arc(
    class: &FunctionClassSpec,
    data: &Dataset,
    attack: &AttackSpec,
    opts: &EstimateOptions,
) -> Result<RadEstimate> {
    run(&Problem::new(class, data, *attack, Summand::Signed)?, opts)
}

/// Adversarial complexity of the ramp-composed binary class
/// `{(x, y) ↦ φ_γ(inf_{x′} y f(x′))}`.
pub fn estimate_arc_ramp(
    class: &FunctionClassSpec,
    data: &Dataset,
    attack: &AttackSpec,
    gamma: f64,
    opts: &EstimateOptions,
) -> Result<RadEstimate> {
    run(&Problem::new(class, data, *attack, Summand::RampSigned { gamma })?, opts)
}

/// Adversarial complexity of the multi-class ramp-margin loss class
/// `{(x, y) ↦ max_{x′} φ_γ(M(f(x′), y))}`.
pub fn estimate_arc_multiclass(
    class: &FunctionClassSpec,
    data: &Dataset,
    attack: &AttackSpec,
    gamma: f64,
    opts: &EstimateOptions,
) -> Result<RadEstimate> {
    run(&Problem::new(class, data, *attack, Summand::Multiclass { gamma })?, opts)
}

/// Grid oracle at the default resolution when `dim ≤ 3`, PGD with the
/// evaluation budget otherwise.
pub fn default_attack(p: Exponent, epsilon: f64, dim: usize) -> AttackSpec {
    if dim <= crate::attack::GRID_MAX_DIM {
        AttackSpec::grid(p, epsilon, DEFAULT_GRID_RESOLUTION)
    } else {
        AttackSpec::pgd_eval(p, epsilon)
    }
}

/// Inputs of the uniform-convergence bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenBoundInput {
    pub empirical_risk: f64,
    pub rc_term: f64,
    /// Range C of the loss.
    pub loss_range: f64,
    pub delta: f64,
    pub n: usize,
}

/// `R_n + 2·rc + 3C·√(ln(2/δ)/(2n))`.
pub fn gen_bound_rhs(input: &GenBoundInput) -> Result<f64> {
    if !(input.delta > 0.0 && input.delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {}", input.delta)));
    }
    if !(input.loss_range > 0.0 && input.loss_range.is_finite()) {
        return Err(invalid(format!("loss range must be positive, got {}", input.loss_range)));
    }
    if input.n == 0 {
        return Err(invalid("n must be positive"));
    }
    let conf = ((2.0 / input.delta).ln() / (2.0 * input.n as f64)).sqrt();
    Ok(input.empirical_risk + 2.0 * input.rc_term + 3.0 * input.loss_range * conf)
}
