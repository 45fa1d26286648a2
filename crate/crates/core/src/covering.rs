//! Diameter, covering numbers, the robustified weight-perturbation inequality
//! and Dudley's entropy integral for norm-constrained networks.
//!
//! Cover sizes are kept as natural logarithms; counts like `6⁹` overflow fast.

use serde::{Deserialize, Serialize};

use crate::attack::GridOracle;
use crate::data::Dataset;
use crate::error::{invalid, mismatch, Error, Result};
use crate::exponent::Exponent;
use crate::linalg::dual_dimension_factor;
use crate::network::{HeadObjective, Label, Network};
use crate::rademacher::{ClassNorm, FunctionClassSpec};

/// Relative change at which adaptive Simpson refinement stops.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Panel count after which quadrature gives up.
pub const MAX_PANELS: usize = 1 << 20;

/// `dim · ln(1 + 2W/ε)`: log of the number of ε-balls covering a radius-W
/// ball in `dim` dimensions.
pub fn ball_cover_log(w: f64, eps: f64, dim: usize) -> Result<f64> {
    check_cover_args(w, eps)?;
    Ok(dim as f64 * (2.0 * w / eps).ln_1p())
}

/// `mk · ln(3W/ε)` for an `m × k` matrix ball when `W/ε ≥ 1`, where it
/// dominates [`ball_cover_log`]; falls back to the exact form otherwise.
pub fn matrix_ball_cover_log(w: f64, eps: f64, rows: usize, cols: usize) -> Result<f64> {
    check_cover_args(w, eps)?;
    let dim = rows * cols;
    if w / eps >= 1.0 {
        Ok(dim as f64 * (3.0 * w / eps).ln())
    } else {
        ball_cover_log(w, eps, dim)
    }
}

fn check_cover_args(w: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(invalid(format!("cover radius must be positive, got {eps}")));
    }
    if !(w >= 0.0 && w.is_finite()) {
        return Err(invalid(format!("ball radius must be finite and >= 0, got {w}")));
    }
    Ok(())
}

/// The input-side factor of the diameter: `max{1, d^{1/2 − 1/p}}` for
/// Frobenius classes, 1 for `(1,∞)` classes.
pub fn input_factor(norm: ClassNorm, d: usize, p: Exponent) -> f64 {
    match norm {
        ClassNorm::Frobenius => dual_dimension_factor(d, Exponent::TWO, p),
        ClassNorm::OneInf => 1.0,
    }
}

/// `D = 2 L^{l−1} · factor · (B + ε) · Π M_j`, twice the largest magnitude
/// of a robustified function on data with `‖X‖_{p,∞} ≤ B`.
pub fn class_diameter(class: &FunctionClassSpec, b: f64, eps: f64, p: Exponent) -> Result<f64> {
    class.validate()?;
    check_radii(b, eps)?;
    let l = class.depth() as i32;
    Ok(2.0
        * class.lipschitz().powi(l - 1)
        * input_factor(class.norm, class.input_dim(), p)
        * (b + eps)
        * class.budget_product())
}

fn check_radii(b: f64, eps: f64) -> Result<()> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(invalid(format!("B must be finite and >= 0, got {b}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(invalid(format!("epsilon must be finite and >= 0, got {eps}")));
    }
    Ok(())
}

/// Per-layer cover radii `δ_j = 2 M_j r / (l D)` that make the weight
/// perturbation bound `Σ_j D δ_j / (2 M_j)` equal `r`.
pub fn layer_deltas(class: &FunctionClassSpec, diameter: f64, cover_eps: f64) -> Vec<f64> {
    let l = class.depth() as f64;
    class.budgets.iter().map(|&m| 2.0 * m * cover_eps / (l * diameter)).collect()
}

/// Log-size of the cover of the robustified class at radius `r`:
/// `(Σ h_j h_{j−1}) · ln(3 l D / (2 r))`, floored at 0 (one function covers).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub diameter: f64,
    pub width_product_sum: f64,
    pub depth: usize,
    pub n: usize,
}

impl Chain {
    pub fn new(class: &FunctionClassSpec, b: f64, eps: f64, p: Exponent, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        Ok(Self {
            diameter: class_diameter(class, b, eps, p)?,
            width_product_sum: class.width_product_sum(),
            depth: class.depth(),
            n,
        })
    }

    pub fn log_cover(&self, r: f64) -> f64 {
        let v = self.width_product_sum * (3.0 * self.depth as f64 * self.diameter / (2.0 * r)).ln();
        v.max(0.0)
    }

    /// `(12/√n) · D · √(Σ h h) · √(ln 3l)`: the chaining bound with the unit
    /// integral replaced by its upper bound `√(ln 3l)`.
    pub fn closed_form_bound(&self) -> f64 {
        12.0 / (self.n as f64).sqrt()
            * self.diameter
            * self.width_product_sum.sqrt()
            * (3.0 * self.depth as f64).ln().sqrt()
    }
}

/// Log cover size of the robustified class at radius `cover_eps`.
pub fn robustified_class_cover_log(
    class: &FunctionClassSpec,
    b: f64,
    eps_attack: f64,
    p: Exponent,
    cover_eps: f64,
) -> Result<f64> {
    if !(cover_eps > 0.0) {
        return Err(invalid(format!("cover radius must be positive, got {cover_eps}")));
    }
    Ok(Chain::new(class, b, eps_attack, p, 1)?.log_cover(cover_eps))
}

/// Lower limit of the entropy integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DeltaChoice {
    /// The δ → 0 limit.
    Zero,
    Fixed(f64),
    /// `δ = D/√n`.
    DOverSqrtN,
    /// The minimizer of `8δ + (12/√n)∫_δ^{D/2}`.
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DudleyResult {
    pub value: f64,
    pub delta: f64,
    pub integral: f64,
    pub panels: usize,
}

/// Composite Simpson on `[a, b]` with the panel count doubled until the
/// relative change drops below `tol`.
pub fn simpson_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, usize)> {
    if b <= a {
        return Ok((0.0, 0));
    }
    let simpson = |panels: usize| {
        let h = (b - a) / panels as f64;
        let mut odd = 0.0;
        let mut even = 0.0;
        for k in 1..panels {
            let v = f(a + k as f64 * h);
            if k % 2 == 1 {
                odd += v;
            } else {
                even += v;
            }
        }
        h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
    };
    let mut panels = 16;
    let mut prev = simpson(panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = simpson(panels);
        let change = (next - prev).abs();
        if change <= tol * next.abs() || change <= f64::MIN_POSITIVE {
            return Ok((next, panels));
        }
        prev = next;
    }
    Err(Error::Numerical(format!("quadrature did not converge within {MAX_PANELS} panels")))
}

/// `∫_lo^hi g(ε) dε` for integrands with an integrable singularity at `lo`
/// (such as `√ln(c/ε)` at 0), via `ε = lo + (hi − lo) t⁴`.
fn integrate_from<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> Result<(f64, usize)> {
    let w = hi - lo;
    simpson_adaptive(
        |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let t3 = t * t * t;
            g(lo + w * t3 * t) * 4.0 * w * t3
        },
        0.0,
        1.0,
        QUADRATURE_TOLERANCE,
    )
}

/// `8δ + (12/√n) ∫_δ^{D/2} √(log N(ε)) dε` for a general log-cover function.
pub fn dudley_bound<F: Fn(f64) -> f64>(
    log_cover: F,
    diameter: f64,
    n: usize,
    choice: DeltaChoice,
) -> Result<DudleyResult> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(diameter >= 0.0 && diameter.is_finite()) {
        return Err(invalid(format!("diameter must be finite and >= 0, got {diameter}")));
    }
    if diameter == 0.0 {
        return Ok(DudleyResult { value: 0.0, delta: 0.0, integral: 0.0, panels: 0 });
    }
    let half = diameter / 2.0;
    let root_n = (n as f64).sqrt();
    let delta = match choice {
        DeltaChoice::Zero => 0.0,
        DeltaChoice::Fixed(d) => d,
        DeltaChoice::DOverSqrtN => diameter / root_n,
        DeltaChoice::Optimal => optimal_delta(&log_cover, half, root_n),
    };
    if !(delta >= 0.0 && delta < half) && !(delta == half && choice == DeltaChoice::Optimal) {
        return Err(invalid(format!("delta must lie in [0, D/2) = [0, {half}), got {delta}")));
    }
    let (integral, panels) = integrate_from(|e| log_cover(e).max(0.0).sqrt(), delta, half)?;
    Ok(DudleyResult { value: 8.0 * delta + 12.0 / root_n * integral, delta, integral, panels })
}

/// Solves `√(log N(δ)) = (2/3)√n`, where the objective's derivative vanishes;
/// returns D/2 when the integrand never falls below that level.
fn optimal_delta<F: Fn(f64) -> f64>(log_cover: &F, half: f64, root_n: f64) -> f64 {
    let level = 2.0 * root_n / 3.0;
    let g = |d: f64| log_cover(d).max(0.0).sqrt() - level;
    if g(half) >= 0.0 {
        return half;
    }
    let (mut lo, mut hi) = (0.0, half);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid == 0.0 || g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Dudley bound of a chain with the cover of [`Chain::log_cover`].
pub fn dudley_integral(chain: &Chain, choice: DeltaChoice) -> Result<DudleyResult> {
    dudley_bound(|r| chain.log_cover(r), chain.diameter, chain.n, choice)
}

/// `∫₀^{1/2} √(ln(3l/(2ε))) dε` by quadrature.
pub fn unit_entropy_integral(l: usize) -> Result<f64> {
    if l == 0 {
        return Err(invalid("depth must be positive"));
    }
    let a = 1.5 * l as f64;
    Ok(integrate_from(|e| (a / e).ln().sqrt(), 0.0, 0.5)?.0)
}

/// Closed form `½((3l/2)√π·erfc(√ln 3l) + √ln 3l)` of the unit integral.
pub fn unit_entropy_integral_closed_form(l: usize) -> f64 {
    let s = (3.0 * l as f64).ln().sqrt();
    0.5 * (1.5 * l as f64 * std::f64::consts::PI.sqrt() * libm::erfc(s) + s)
}

/// Outcome of [`weight_perturbation_gap_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    /// `max_i |inf y_i f(x′) − inf y_i f^c(x′)|`.
    pub lhs_max: f64,
    /// `Σ_j D δ_j / (2 M_j)`.
    pub rhs: f64,
}

/// Robustified values `inf_{x′} y_i f(x′)` of a binary network on every
/// sample, by grid search.
pub fn robust_values(net: &Network<f64>, data: &Dataset, oracle: &GridOracle, eps: f64) -> Result<Vec<f64>> {
    if data.dim() != net.input_dim() || oracle.dim() != data.dim() {
        return Err(mismatch("network, data and grid dimensions differ"));
    }
    let mut ws = net.workspace();
    (0..data.len())
        .map(|i| match data.label(i) {
            Label::Signed(y) => {
                let obj = HeadObjective::Signed { y }.validate(net.output_dim())?;
                Ok(oracle.minimize(net, data.sample(i), obj, eps, &mut ws).value)
            }
            Label::Class(_) => Err(invalid("robustified values need ±1 labels")),
        })
        .collect()
}

/// Compares the change in robustified values between `net` and `net_c` with
/// the bound `Σ_j D δ_j / (2 M_j)`, using a grid of the given resolution.
///
/// Both nets must lie in the class and `‖W_j − W_j^c‖ ≤ δ_j` must hold.
#[allow(clippy::too_many_arguments)]
pub fn weight_perturbation_gap_check(
    class: &FunctionClassSpec,
    net: &Network<f64>,
    net_c: &Network<f64>,
    data: &Dataset,
    p: Exponent,
    eps: f64,
    resolution: usize,
    deltas: &[f64],
) -> Result<PerturbationCheck> {
    let oracle = GridOracle::new(data.dim(), p, resolution)?;
    weight_perturbation_gap_check_with(class, net, net_c, data, &oracle, eps, deltas)
}

/// [`weight_perturbation_gap_check`] with a prebuilt grid.
pub fn weight_perturbation_gap_check_with(
    class: &FunctionClassSpec,
    net: &Network<f64>,
    net_c: &Network<f64>,
    data: &Dataset,
    oracle: &GridOracle,
    eps: f64,
    deltas: &[f64],
) -> Result<PerturbationCheck> {
    class.validate()?;
    if deltas.len() != class.depth() {
        return Err(mismatch(format!("{} layers but {} deltas", class.depth(), deltas.len())));
    }
    if class.budgets.iter().any(|&m| m <= 0.0) {
        return Err(invalid("the perturbation bound needs positive budgets"));
    }
    const TOL: f64 = 1e-12;
    for (which, n) in [("net", net), ("net_c", net_c)] {
        if !class.contains(n, TOL) {
            return Err(Error::BudgetViolation(format!("{which} is outside the class")));
        }
    }
    for (j, ((a, b), &d)) in net.weights().iter().zip(net_c.weights()).zip(deltas).enumerate() {
        let dist = a.sub(b)?.norm(class.norm.kind())?;
        if dist > d * (1.0 + TOL) {
            return Err(Error::BudgetViolation(format!(
                "layer {} moved by {dist}, more than delta {d}",
                j + 1
            )));
        }
    }
    let b = data.group_norm(oracle.p());
    let diameter = class_diameter(class, b, eps, oracle.p())?;
    let rhs = deltas.iter().zip(&class.budgets).map(|(&d, &m)| diameter * d / (2.0 * m)).sum();
    let v = robust_values(net, data, oracle, eps)?;
    let vc = robust_values(net_c, data, oracle, eps)?;
    let lhs_max = v.iter().zip(&vc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(PerturbationCheck { lhs_max, rhs })
}
