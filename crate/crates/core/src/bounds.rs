//! Closed-form complexity bounds for norm-constrained networks.
//!
//! The upper bounds follow the chaining argument of [`crate::covering`]: a
//! Frobenius (Theorem-1 form) and a `(1,∞)` (Theorem-2 form) variant, their
//! multi-class ramp-loss extension, and a matching lower bound. Comparison
//! bounds from related work are order-level: their constants are set to 1.

use serde::{Deserialize, Serialize};

use crate::covering::{class_diameter, input_factor};
use crate::error::{invalid, Result};
use crate::exponent::Exponent;
use crate::linalg::{dual_dimension_factor, NormKind};
use crate::network::Network;
use crate::rademacher::{ClassNorm, FunctionClassSpec};

/// Smallest value `ln l` is clamped to in `C_adv`.
pub const LN_DEPTH_FLOOR: f64 = 1e-12;

fn check(class: &FunctionClassSpec, b: f64, eps: f64, n: usize) -> Result<()> {
    class.validate()?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(b >= 0.0 && b.is_finite() && eps >= 0.0 && eps.is_finite()) {
        return Err(invalid(format!("B and epsilon must be finite and >= 0, got {b}, {eps}")));
    }
    Ok(())
}

/// `(24/√n) · F · (B+ε) · L^{l−1} · √(Σ h_j h_{j−1} · ln 3l) · Π M_j`, with the
/// input factor `F` of the given norm.
fn chaining_bound(class: &FunctionClassSpec, norm: ClassNorm, b: f64, eps: f64, p: Exponent, n: usize) -> Result<f64> {
    check(class, b, eps, n)?;
    let l = class.depth() as f64;
    Ok(24.0 / (n as f64).sqrt()
        * input_factor(norm, class.input_dim(), p)
        * (b + eps)
        * class.lipschitz().powi(class.depth() as i32 - 1)
        * (class.width_product_sum() * (3.0 * l).ln()).sqrt()
        * class.budget_product())
}

/// Upper bound for Frobenius budgets.
pub fn thm1_bound(class: &FunctionClassSpec, b: f64, eps: f64, p: Exponent, n: usize) -> Result<f64> {
    chaining_bound(class, ClassNorm::Frobenius, b, eps, p, n)
}

/// Upper bound for `(1,∞)` budgets: no dimension factor.
pub fn thm2_bound(class: &FunctionClassSpec, b: f64, eps: f64, p: Exponent, n: usize) -> Result<f64> {
    chaining_bound(class, ClassNorm::OneInf, b, eps, p, n)
}

/// Upper bound matching the class's own norm.
pub fn upper_bound(class: &FunctionClassSpec, b: f64, eps: f64, p: Exponent, n: usize) -> Result<f64> {
    chaining_bound(class, class.norm, b, eps, p, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    /// Khintchine constant `c ∈ (0, 1]`.
    pub khintchine_c: f64,
    /// Dual exponent of the weight norm: 2 for Frobenius, 1 for `(1,∞)`.
    pub r: Exponent,
}

impl LowerBoundConfig {
    pub fn for_norm(norm: ClassNorm) -> Self {
        let r = match norm {
            ClassNorm::Frobenius => Exponent::TWO,
            ClassNorm::OneInf => Exponent::ONE,
        };
        Self { khintchine_c: std::f64::consts::FRAC_1_SQRT_2, r }
    }
}

/// `(c/(1+2c)) · max{1, d^{1−1/r−1/p}} · (B+ε) · Π M_j / √n`.
pub fn thm3_lower_bound(
    class: &FunctionClassSpec,
    b: f64,
    eps: f64,
    p: Exponent,
    n: usize,
    cfg: &LowerBoundConfig,
) -> Result<f64> {
    check(class, b, eps, n)?;
    let c = cfg.khintchine_c;
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid(format!("Khintchine constant must lie in (0, 1], got {c}")));
    }
    Ok(c / (1.0 + 2.0 * c) * dual_dimension_factor(class.input_dim(), cfg.r, p) * (b + eps) * class.budget_product()
        / (n as f64).sqrt())
}

/// Multi-class ramp-loss bound: `(2K/γ)` times the Frobenius upper bound.
pub fn thm4_multiclass_bound(
    class: &FunctionClassSpec,
    b: f64,
    eps: f64,
    p: Exponent,
    n: usize,
    gamma: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    let k = class.output_dim();
    if k < 2 {
        return Err(invalid(format!("multi-class bound needs K >= 2 outputs, got {k}")));
    }
    Ok(2.0 * k as f64 / gamma * thm1_bound(class, b, eps, p, n)?)
}

/// Order-level comparison bounds (unit constants).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparisons {
    /// Spectral-norm covering bound; needs actual weights.
    pub bartlett_spectral: Option<f64>,
    /// `B √(l³ h) Π M_j / √n`, `h` the largest width.
    pub golowich: f64,
    /// `B 2^l L^{l−1} Π M_j / √n`.
    pub neyshabur_exp: f64,
    /// Two-layer adversarial bound `(B+ε) √(h_1 d) √(ln n) M_1 M_2 / √n`.
    pub awasthi_two_layer: Option<f64>,
    pub notes: Vec<String>,
}

/// `(B+ε) √(h_1 d) √(ln n) M_1 M_2 / √n`; defined for two layers only.
pub fn awasthi_two_layer(class: &FunctionClassSpec, b: f64, eps: f64, n: usize) -> Result<f64> {
    check(class, b, eps, n)?;
    if class.depth() != 2 {
        return Err(invalid(format!("the two-layer comparison needs l = 2, got l = {}", class.depth())));
    }
    let nf = n as f64;
    Ok((b + eps) * ((class.dims[1] * class.dims[0]) as f64).sqrt() * nf.ln().sqrt() * class.budget_product() / nf.sqrt())
}

/// `(B Π‖W_j‖_σ / √n) · (Σ_j (‖W_j‖_{2,1} / ‖W_j‖_σ)^{2/3})^{3/2}`.
pub fn bartlett_spectral(net: &Network<f64>, b: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let spec = net.layer_norms(NormKind::Spectral)?;
    let two_one = net.layer_norms(NormKind::GroupTwoOne)?;
    let prod: f64 = spec.iter().product();
    if prod == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = two_one.iter().zip(&spec).map(|(a, s)| (a / s).powf(2.0 / 3.0)).sum();
    Ok(b * prod / (n as f64).sqrt() * sum.powf(1.5))
}

pub fn comparison_bounds(
    class: &FunctionClassSpec,
    weights: Option<&Network<f64>>,
    b: f64,
    eps: f64,
    n: usize,
) -> Result<Comparisons> {
    check(class, b, eps, n)?;
    let l = class.depth();
    let h = *class.dims.iter().max().expect("validated") as f64;
    let root_n = (n as f64).sqrt();
    let prod = class.budget_product();
    let mut notes = vec!["comparison bounds are order-level: unit constants".to_string()];
    let bartlett = match weights {
        Some(net) => Some(bartlett_spectral(net, b, n)?),
        None => {
            notes.push("bartlett_spectral omitted: needs trained weights".into());
            None
        }
    };
    let awasthi = if l == 2 {
        Some(awasthi_two_layer(class, b, eps, n)?)
    } else {
        notes.push(format!("awasthi_two_layer omitted: defined for l = 2 only (l = {l})"));
        None
    };
    Ok(Comparisons {
        bartlett_spectral: bartlett,
        golowich: b * ((l * l * l) as f64 * h).sqrt() * prod / root_n,
        neyshabur_exp: b * 2f64.powi(l as i32) * class.lipschitz().powi(l as i32 - 1) * prod / root_n,
        awasthi_two_layer: awasthi,
        notes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    Standard,
    Adversarial,
}

/// Split of a bound into an algorithm-independent constant `C` and a
/// weight-norm-over-margin factor `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub c: f64,
    pub w: f64,
    pub product: f64,
    /// Set when `l = 1` makes `√(l ln l)` vanish and the clamp is active.
    pub degenerate: bool,
}

/// `C_std = B√l`, `C_adv = (B+ε) h √(l ln l)`, `W = Π M_j / γ`.
pub fn factor_decomposition(
    b: f64,
    eps: f64,
    l: usize,
    h: usize,
    gamma: f64,
    weight_norm_product: f64,
    mode: TrainingMode,
) -> Result<Decomposition> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    if l == 0 {
        return Err(invalid("depth must be positive"));
    }
    let lf = l as f64;
    let (c, degenerate) = match mode {
        TrainingMode::Standard => (b * lf.sqrt(), false),
        TrainingMode::Adversarial => {
            let ln_l = lf.ln();
            let clamped = ln_l.max(LN_DEPTH_FLOOR);
            ((b + eps) * h as f64 * (lf * clamped).sqrt(), ln_l < LN_DEPTH_FLOOR)
        }
    };
    let w = weight_norm_product / gamma;
    Ok(Decomposition { c, w, product: c * w, degenerate })
}

/// What to compute in [`bound_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub class: FunctionClassSpec,
    /// `‖X‖_{p,∞}`.
    pub b: f64,
    pub epsilon: f64,
    pub p: Exponent,
    pub n: usize,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub multiclass: bool,
    #[serde(default)]
    pub khintchine_c: Option<f64>,
}

/// Flat report of every applicable bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub b: f64,
    pub epsilon: f64,
    pub p: Exponent,
    pub diameter: f64,
    pub thm1_frobenius: f64,
    pub thm2_one_inf: f64,
    pub thm3_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm4_multiclass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bartlett_spectral: Option<f64>,
    pub golowich: f64,
    pub neyshabur_exp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub awasthi_two_layer: Option<f64>,
    pub c_std: f64,
    pub c_adv: f64,
    pub c_adv_degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_factor: Option<f64>,
    pub notes: Vec<String>,
}

pub fn bound_report(req: &BoundRequest, weights: Option<&Network<f64>>) -> Result<BoundReport> {
    let BoundRequest { class, b, epsilon: eps, p, n, .. } = req;
    let (b, eps, p, n) = (*b, *eps, *p, *n);
    if req.multiclass && req.gamma.is_none() {
        return Err(invalid("multi-class bounds need gamma"));
    }
    let mut lower = LowerBoundConfig::for_norm(class.norm);
    if let Some(c) = req.khintchine_c {
        lower.khintchine_c = c;
    }
    let cmp = comparison_bounds(class, weights, b, eps, n)?;
    let l = class.depth();
    let h = *class.dims.iter().max().expect("validated");
    let gamma = req.gamma.unwrap_or(1.0);
    let std = factor_decomposition(b, eps, l, h, gamma, class.budget_product(), TrainingMode::Standard)?;
    let adv = factor_decomposition(b, eps, l, h, gamma, class.budget_product(), TrainingMode::Adversarial)?;
    let mut notes = cmp.notes;
    if !req.multiclass {
        notes.push("thm4_multiclass omitted: binary request".into());
    }
    if adv.degenerate {
        notes.push("c_adv uses ln l clamped at 1e-12 because l = 1".into());
    }
    Ok(BoundReport {
        n,
        b,
        epsilon: eps,
        p,
        diameter: class_diameter(class, b, eps, p)?,
        thm1_frobenius: thm1_bound(class, b, eps, p, n)?,
        thm2_one_inf: thm2_bound(class, b, eps, p, n)?,
        thm3_lower: thm3_lower_bound(class, b, eps, p, n, &lower)?,
        thm4_multiclass: if req.multiclass { Some(thm4_multiclass_bound(class, b, eps, p, n, gamma)?) } else { None },
        bartlett_spectral: cmp.bartlett_spectral,
        golowich: cmp.golowich,
        neyshabur_exp: cmp.neyshabur_exp,
        awasthi_two_layer: cmp.awasthi_two_layer,
        c_std: std.c,
        c_adv: adv.c,
        c_adv_degenerate: adv.degenerate,
        w_factor: req.gamma.map(|_| std.w),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::Chain;
    use crate::linalg::DenseMatrix;
    use crate::network::Activation;
    use proptest::prelude::*;

    fn class_231() -> FunctionClassSpec {
        FunctionClassSpec { dims: vec![2, 3, 1], norm: ClassNorm::Frobenius, budgets: vec![1.0, 1.0], activation: Activation::Relu }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn thm1_examples() {
        let c = class_231();
        let expected = 2.4 * 1.1 * (9.0 * 6f64.ln()).sqrt();
        let v = thm1_bound(&c, 1.0, 0.1, Exponent::TWO, 100).unwrap();
        assert!(rel(v, expected) < 1e-14);
        assert!((v - 10.601).abs() < 1e-3);
        let vi = thm1_bound(&c, 1.0, 0.1, Exponent::INF, 100).unwrap();
        assert!(rel(vi, expected * 2f64.sqrt()) < 1e-14);
        assert!((vi - 14.993).abs() < 1e-3);
        let z = FunctionClassSpec { budgets: vec![1.0, 0.0], ..c };
        assert_eq!(thm1_bound(&z, 1.0, 0.1, Exponent::TWO, 100).unwrap(), 0.0);
    }

    #[test]
    fn thm2_examples() {
        let c = FunctionClassSpec { norm: ClassNorm::OneInf, ..class_231() };
        for p in [Exponent::TWO, Exponent::INF] {
            assert!((thm2_bound(&c, 1.0, 0.1, p, 100).unwrap() - 10.601).abs() < 1e-3);
        }
    }

    #[test]
    fn thm3_examples() {
        let c = class_231();
        let cfg = LowerBoundConfig::for_norm(ClassNorm::Frobenius);
        let v = thm3_lower_bound(&c, 1.0, 0.1, Exponent::TWO, 100, &cfg).unwrap();
        assert!((v - 0.03222).abs() < 1e-5);
        let z = FunctionClassSpec { budgets: vec![0.0, 1.0], ..c.clone() };
        assert_eq!(thm3_lower_bound(&z, 1.0, 0.1, Exponent::TWO, 100, &cfg).unwrap(), 0.0);
        assert!(v <= thm1_bound(&c, 1.0, 0.1, Exponent::TWO, 100).unwrap());
        let bad = LowerBoundConfig { khintchine_c: 1.5, ..cfg };
        assert!(thm3_lower_bound(&c, 1.0, 0.1, Exponent::TWO, 100, &bad).is_err());
    }

    #[test]
    fn thm4_examples() {
        let c = FunctionClassSpec { dims: vec![2, 3, 2], ..class_231() };
        let t1 = thm1_bound(&c, 1.0, 0.1, Exponent::TWO, 100).unwrap();
        let v = thm4_multiclass_bound(&c, 1.0, 0.1, Exponent::TWO, 100, 1.0).unwrap();
        assert!(rel(v, 4.0 * t1) < 1e-14);
        let half = thm4_multiclass_bound(&c, 1.0, 0.1, Exponent::TWO, 100, 2.0).unwrap();
        assert!(rel(half, v / 2.0) < 1e-14);
        assert!(thm4_multiclass_bound(&class_231(), 1.0, 0.1, Exponent::TWO, 100, 1.0).is_err());
        assert!(thm4_multiclass_bound(&c, 1.0, 0.1, Exponent::TWO, 100, 0.0).is_err());
    }

    #[test]
    fn comparison_examples() {
        let a = awasthi_two_layer(&class_231(), 1.0, 0.1, 100).unwrap();
        assert!((a - 0.5782).abs() < 1e-4);
        let one = FunctionClassSpec { dims: vec![2, 1], budgets: vec![3.0], ..class_231() };
        let c = comparison_bounds(&one, None, 1.5, 0.0, 25).unwrap();
        assert!(rel(c.neyshabur_exp, 1.5 * 2.0 * 3.0 / 5.0) < 1e-15);
        assert!(c.awasthi_two_layer.is_none());
        assert!(awasthi_two_layer(&one, 1.0, 0.1, 100).is_err());
        // Identity layers: spectral norms 1, (2,1)-norms h = 2.
        let id = DenseMatrix::<f64>::identity(2);
        let net = Network::new(vec![id.clone(), id], Activation::Relu).unwrap();
        let v = bartlett_spectral(&net, 1.0, 4).unwrap();
        let expected = 0.5 * (2.0 * 2f64.powf(2.0 / 3.0)).powf(1.5);
        assert!(rel(v, expected) < 1e-9);
    }

    #[test]
    fn decomposition_examples() {
        let s = factor_decomposition(1.0, 0.1, 4, 8, 1.0, 1.0, TrainingMode::Standard).unwrap();
        assert!((s.c - 2.0).abs() < 1e-15);
        let a = factor_decomposition(1.0, 0.1, 4, 8, 1.0, 1.0, TrainingMode::Adversarial).unwrap();
        assert!((a.c - 8.8 * (4.0 * 4f64.ln()).sqrt()).abs() < 1e-12);
        assert!((a.c - 20.72).abs() < 1e-2);
        let d = factor_decomposition(1.0, 0.1, 1, 8, 1.0, 1.0, TrainingMode::Adversarial).unwrap();
        assert!(d.degenerate && d.c < 1e-4);
        let w = factor_decomposition(1.0, 0.1, 2, 8, 2.0, 6.0, TrainingMode::Standard).unwrap();
        assert_eq!(w.w, 3.0);
        assert!(factor_decomposition(1.0, 0.1, 2, 8, 0.0, 6.0, TrainingMode::Standard).is_err());
    }

    #[test]
    fn report_dispatch() {
        let req = BoundRequest {
            class: class_231(),
            b: 1.0,
            epsilon: 0.1,
            p: Exponent::TWO,
            n: 100,
            gamma: None,
            multiclass: false,
            khintchine_c: None,
        };
        let r = bound_report(&req, None).unwrap();
        assert!((r.thm1_frobenius - 10.601).abs() < 1e-3);
        assert!(r.awasthi_two_layer.is_some());
        let three = BoundRequest { class: FunctionClassSpec { dims: vec![2, 3, 3, 1], budgets: vec![1.0; 3], ..class_231() }, ..req.clone() };
        let r3 = bound_report(&three, None).unwrap();
        assert!(r3.awasthi_two_layer.is_none());
        assert!(r3.notes.iter().any(|n| n.contains("awasthi")));
        let multi = BoundRequest { multiclass: true, ..req };
        assert!(bound_report(&multi, None).is_err());
    }

    #[test]
    fn matches_chaining_assembly() {
        let c = class_231();
        for p in [Exponent::TWO, Exponent::INF] {
            let chain = Chain::new(&c, 0.8, 0.2, p, 37).unwrap();
            let t1 = thm1_bound(&c, 0.8, 0.2, p, 37).unwrap();
            assert!(rel(t1, chain.closed_form_bound()) < 1e-12);
        }
    }

    fn arb_class() -> impl Strategy<Value = FunctionClassSpec> {
        (1usize..4).prop_flat_map(|l| {
            (
                proptest::collection::vec(1usize..5, l + 1),
                proptest::collection::vec(0.1f64..3.0, l),
                any::<bool>(),
            )
                .prop_map(|(dims, budgets, fro)| FunctionClassSpec {
                    dims,
                    norm: if fro { ClassNorm::Frobenius } else { ClassNorm::OneInf },
                    budgets,
                    activation: Activation::Relu,
                })
        })
    }

    proptest! {
        #[test]
        fn homogeneous_in_budgets(class in arb_class(), c in 0.1f64..4.0, inf in any::<bool>()) {
            let p = if inf { Exponent::INF } else { Exponent::TWO };
            let mut scaled = class.clone();
            scaled.budgets.iter_mut().for_each(|m| *m *= c);
            let k = c.powi(class.depth() as i32);
            let cfg = LowerBoundConfig::for_norm(class.norm);
            let pairs = [
                (thm1_bound(&class, 1.0, 0.1, p, 30).unwrap(), thm1_bound(&scaled, 1.0, 0.1, p, 30).unwrap()),
                (thm2_bound(&class, 1.0, 0.1, p, 30).unwrap(), thm2_bound(&scaled, 1.0, 0.1, p, 30).unwrap()),
                (thm3_lower_bound(&class, 1.0, 0.1, p, 30, &cfg).unwrap(), thm3_lower_bound(&scaled, 1.0, 0.1, p, 30, &cfg).unwrap()),
            ];
            for (a, b) in pairs {
                prop_assert!((b - k * a).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn monotone_and_ordered(class in arb_class(), b in 0.0f64..2.0, eps in 0.0f64..1.0, n in 1usize..500, inf in any::<bool>()) {
            let p = if inf { Exponent::INF } else { Exponent::TWO };
            let t1 = thm1_bound(&class, b, eps, p, n).unwrap();
            let t2 = thm2_bound(&class, b, eps, p, n).unwrap();
            let t3 = thm3_lower_bound(&class, b, eps, p, n, &LowerBoundConfig::for_norm(class.norm)).unwrap();
            prop_assert!(t3 <= t1 && t2 <= t1);
            prop_assert!(thm1_bound(&class, b + 0.1, eps, p, n).unwrap() >= t1);
            prop_assert!(thm1_bound(&class, b, eps + 0.1, p, n).unwrap() >= t1);
            prop_assert!(thm1_bound(&class, b, eps, p, n + 1).unwrap() <= t1);
            let mut wider = class.clone();
            wider.dims[0] += 1;
            prop_assert!(thm1_bound(&wider, b, eps, p, n).unwrap() >= t1);
            let mut bigger = class.clone();
            bigger.budgets[0] *= 1.5;
            prop_assert!(thm1_bound(&bigger, b, eps, p, n).unwrap() >= t1);
        }
    }
}
