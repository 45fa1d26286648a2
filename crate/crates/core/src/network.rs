//! Bias-free fully connected networks `x ↦ W_l ρ(W_{l−1} ρ(⋯ ρ(W_1 x)))`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::linalg::{DenseMatrix, NormKind};
use crate::scalar::Scalar;

/// Element-wise activation. Every variant maps 0 to 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[serde(alias = "ReLU", alias = "Relu")]
    Relu,
    #[serde(alias = "Identity")]
    Identity,
    #[serde(alias = "LeakyReLU", alias = "LeakyRelu")]
    LeakyRelu(f64),
}

impl Activation {
    pub fn validate(self) -> Result<Self> {
        if let Activation::LeakyRelu(s) = self {
            if !(s.is_finite() && s >= 0.0) {
                return Err(invalid(format!("leaky slope must be finite and >= 0, got {s}")));
            }
        }
        Ok(self)
    }

    /// Lipschitz constant `L_ρ`.
    pub fn lipschitz(self) -> f64 {
        match self {
            Activation::Relu | Activation::Identity => 1.0,
            Activation::LeakyRelu(s) => s.max(1.0),
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Activation::Identity) || self == Activation::LeakyRelu(1.0)
    }

    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Identity => z,
            Activation::LeakyRelu(s) => {
                if z > T::zero() {
                    z
                } else {
                    T::of(s) * z
                }
            }
        }
    }

    /// Derivative, with the subgradient 0 (ReLU) or the slope (leaky) at z = 0.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Identity => T::one(),
            Activation::LeakyRelu(s) => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::of(s)
                }
            }
        }
    }
}

/// Training label: `±1` for a scalar head, a class index for a `K`-way head.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Label {
    Signed(f64),
    Class(usize),
}

/// Training loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Loss {
    /// Softmax cross-entropy on a `K ≥ 2` head.
    CrossEntropy,
    /// `ln(1 + e^{−y f(x)})` on a scalar head.
    Logistic,
    /// Ramp loss of `y f(x)` (scalar head) or of the margin (`K`-way head).
    Ramp { gamma: f64 },
}

/// `φ_γ(t)`: 1 for `t ≤ 0`, `1 − t/γ` on `(0, γ)`, 0 for `t ≥ γ`.
pub fn ramp_loss(t: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(ramp_unchecked(t, gamma))
}

#[inline]
pub(crate) fn ramp_unchecked<T: Scalar>(t: T, gamma: T) -> T {
    if t <= T::zero() {
        T::one()
    } else if t >= gamma {
        T::zero()
    } else {
        T::one() - t / gamma
    }
}

#[inline]
fn ramp_slope<T: Scalar>(t: T, gamma: T) -> T {
    if t > T::zero() && t < gamma {
        -T::one() / gamma
    } else {
        T::zero()
    }
}

/// Scalar read out of the network head that an attack minimizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeadObjective {
    /// `y · f(x)` on a scalar head.
    Signed { y: f64 },
    /// `[f(x)]_y − [f(x)]_k`.
    ClassPair { y: usize, k: usize },
    /// The margin `[f(x)]_y − max_{k≠y} [f(x)]_k`.
    Margin { y: usize },
}

impl HeadObjective {
    pub fn validate(self, out_dim: usize) -> Result<Self> {
        match self {
            HeadObjective::Signed { y } if out_dim != 1 || !(y == 1.0 || y == -1.0) => Err(invalid(
                format!("signed objective needs a scalar head and y = ±1 (head {out_dim}, y {y})"),
            )),
            HeadObjective::ClassPair { y, k } if y >= out_dim || k >= out_dim || y == k => Err(
                invalid(format!("class pair ({y}, {k}) invalid for a {out_dim}-way head")),
            ),
            HeadObjective::Margin { y } if out_dim < 2 || y >= out_dim => {
                Err(invalid(format!("class {y} invalid for a {out_dim}-way head")))
            }
            ok => Ok(ok),
        }
    }

    #[inline]
    pub fn value<T: Scalar>(self, out: &[T]) -> T {
        match self {
            HeadObjective::Signed { y } => T::of(y) * out[0],
            HeadObjective::ClassPair { y, k } => out[y] - out[k],
            HeadObjective::Margin { y } => out[y] - out[runner_up(out, y)],
        }
    }

    /// Writes `∂ value / ∂ out` into `grad`.
    #[inline]
    pub fn gradient<T: Scalar>(self, out: &[T], grad: &mut [T]) {
        grad.iter_mut().for_each(|g| *g = T::zero());
        match self {
            HeadObjective::Signed { y } => grad[0] = T::of(y),
            HeadObjective::ClassPair { y, k } => {
                grad[y] = T::one();
                grad[k] = -T::one();
            }
            HeadObjective::Margin { y } => {
                grad[y] = T::one();
                grad[runner_up(out, y)] = -T::one();
            }
        }
    }
}

/// Index of the largest score other than `y`, lowest index on ties.
#[inline]
pub fn runner_up<T: Scalar>(out: &[T], y: usize) -> usize {
    let mut best = usize::MAX;
    for (k, &v) in out.iter().enumerate() {
        if k != y && (best == usize::MAX || v > out[best]) {
            best = k;
        }
    }
    best
}

/// Scratch buffers for a forward/backward pass; reuse across calls.
#[derive(Clone, Debug)]
pub struct Workspace<T> {
    /// `acts[0]` is the input, `acts[j]` the post-activation of layer `j`,
    /// and `acts[l]` the (linear) output.
    acts: Vec<Vec<T>>,
    /// `zs[j]` is the pre-activation of layer `j + 1`.
    zs: Vec<Vec<T>>,
    delta: Vec<T>,
    back: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    pub fn output(&self) -> &[T] {
        self.acts.last().expect("workspace has layers")
    }

    pub fn input(&self) -> &[T] {
        &self.acts[0]
    }

    /// Smallest |pre-activation| over hidden units in the last forward pass.
    pub fn min_hidden_preactivation(&self) -> Option<T> {
        let hidden = self.zs.len().saturating_sub(1);
        self.zs[..hidden]
            .iter()
            .flatten()
            .map(|z| z.abs())
            .reduce(T::min)
    }
}

/// Fully connected network without biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    weights: Vec<DenseMatrix<T>>,
    activation: Activation,
}

impl<T: Scalar> Network<T> {
    pub fn new(weights: Vec<DenseMatrix<T>>, activation: Activation) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for j in 1..weights.len() {
            if weights[j].cols() != weights[j - 1].rows() {
                return Err(mismatch(format!(
                    "layer {} has {} inputs but layer {} has {} outputs",
                    j + 1,
                    weights[j].cols(),
                    j,
                    weights[j - 1].rows()
                )));
            }
        }
        Ok(Self { weights, activation: activation.validate()? })
    }

    /// Network with all-zero weights of the given widths `[h_0, …, h_l]`.
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(invalid(format!("dims must list at least two positive widths, got {dims:?}")));
        }
        let weights = dims.windows(2).map(|w| DenseMatrix::zeros(w[1], w[0])).collect();
        Self::new(weights, activation)
    }

    /// He-style Gaussian initialization `N(0, 2/fan_in)`.
    pub fn init_random<R: Rng + ?Sized>(
        dims: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        for w in &mut net.weights {
            let std = (2.0 / w.cols() as f64).sqrt();
            for v in w.as_mut_slice() {
                let g: f64 = StandardNormal.sample(rng);
                *v = T::of(std * g);
            }
        }
        Ok(net)
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    /// Widths `[h_0, …, h_l]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.weights.iter().map(DenseMatrix::rows))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("non-empty").rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[DenseMatrix<T>] {
        &self.weights
    }

    /// Mutable access to the weights; shapes must be preserved.
    pub fn weights_mut(&mut self) -> &mut [DenseMatrix<T>] {
        &mut self.weights
    }

    pub fn into_weights(self) -> Vec<DenseMatrix<T>> {
        self.weights
    }

    /// True when the network computes a linear map of its input.
    pub fn is_linear(&self) -> bool {
        self.depth() == 1 || self.activation.is_linear()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(DenseMatrix::is_finite)
    }

    pub fn layer_norms(&self, kind: NormKind) -> Result<Vec<T>> {
        self.weights.iter().map(|w| w.norm(kind)).collect()
    }

    pub fn norm_product(&self, kind: NormKind) -> Result<T> {
        Ok(self.layer_norms(kind)?.into_iter().fold(T::one(), |a, b| a * b))
    }

    pub fn workspace(&self) -> Workspace<T> {
        let dims = self.dims();
        let widest = dims.iter().copied().max().unwrap_or(1);
        Workspace {
            acts: dims.iter().map(|&h| vec![T::zero(); h]).collect(),
            zs: dims[1..].iter().map(|&h| vec![T::zero(); h]).collect(),
            delta: vec![T::zero(); widest],
            back: vec![T::zero(); widest],
        }
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut ws = self.workspace();
        Ok(self.forward_with(x, &mut ws).to_vec())
    }

    /// Forward pass into `ws`; returns the output slice.
    pub fn forward_with<'a>(&self, x: &[T], ws: &'a mut Workspace<T>) -> &'a [T] {
        debug_assert_eq!(x.len(), self.input_dim());
        ws.acts[0].copy_from_slice(x);
        let l = self.depth();
        for (j, w) in self.weights.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(j + 1);
            let z = &mut ws.zs[j];
            w.matvec_into(&before[j], z);
            let a = &mut after[0];
            if j + 1 == l {
                a.copy_from_slice(z);
            } else {
                for (ai, &zi) in a.iter_mut().zip(z.iter()) {
                    *ai = self.activation.apply(zi);
                }
            }
        }
        ws.output()
    }

    /// Reverse pass after [`Network::forward_with`] on the same `ws`.
    ///
    /// `upstream` is `∂L/∂output`. When given, `input_grad` receives
    /// `∂L/∂x`, and `weight_grads` is incremented by `scale · ∂L/∂W_j`.
    pub fn backward(
        &self,
        ws: &mut Workspace<T>,
        upstream: &[T],
        input_grad: Option<&mut [T]>,
        weight_grads: Option<(&mut [DenseMatrix<T>], T)>,
    ) {
        let l = self.depth();
        let mut delta = std::mem::take(&mut ws.delta);
        let mut back = std::mem::take(&mut ws.back);
        delta[..upstream.len()].copy_from_slice(upstream);
        let mut wg = weight_grads;
        for j in (0..l).rev() {
            let w = &self.weights[j];
            let d = &delta[..w.rows()];
            if let Some((grads, scale)) = wg.as_mut() {
                grads[j].add_outer(*scale, d, &ws.acts[j]);
            }
            if j == 0 && input_grad.is_none() {
                break;
            }
            let b = &mut back[..w.cols()];
            w.matvec_transposed_into(d, b);
            if j > 0 {
                for (bi, &z) in b.iter_mut().zip(&ws.zs[j - 1]) {
                    *bi *= self.activation.derivative(z);
                }
            }
            std::mem::swap(&mut delta, &mut back);
        }
        if let Some(g) = input_grad {
            g.copy_from_slice(&delta[..self.input_dim()]);
        }
        ws.delta = delta;
        ws.back = back;
    }

    /// Gradient of output coordinate `output_index` with respect to the input.
    pub fn grad_input(&self, x: &[T], output_index: usize) -> Result<Vec<T>> {
        self.check_input(x)?;
        if output_index >= self.output_dim() {
            return Err(invalid(format!(
                "output index {output_index} out of range for a {}-dim head",
                self.output_dim()
            )));
        }
        let mut ws = self.workspace();
        self.forward_with(x, &mut ws);
        let mut up = vec![T::zero(); self.output_dim()];
        up[output_index] = T::one();
        let mut g = vec![T::zero(); self.input_dim()];
        self.backward(&mut ws, &up, Some(&mut g), None);
        Ok(g)
    }

    /// Loss value and its gradient with respect to every weight matrix.
    pub fn grad_weights(&self, x: &[T], label: Label, loss: Loss) -> Result<(T, Vec<DenseMatrix<T>>)> {
        self.check_input(x)?;
        let mut ws = self.workspace();
        let mut grads: Vec<DenseMatrix<T>> =
            self.weights.iter().map(|w| DenseMatrix::zeros(w.rows(), w.cols())).collect();
        let value = self.accumulate_loss_grad(x, label, loss, &mut ws, &mut grads, T::one())?;
        Ok((value, grads))
    }

    /// Adds `scale · ∂loss/∂W` into `grads` and returns the loss.
    pub fn accumulate_loss_grad(
        &self,
        x: &[T],
        label: Label,
        loss: Loss,
        ws: &mut Workspace<T>,
        grads: &mut [DenseMatrix<T>],
        scale: T,
    ) -> Result<T> {
        let out = self.forward_with(x, ws).to_vec();
        let mut up = vec![T::zero(); out.len()];
        let value = loss_and_output_grad(&out, label, loss, &mut up)?;
        self.backward(ws, &up, None, Some((grads, scale)));
        Ok(value)
    }

    /// `[f(x)]_y − max_{k≠y} [f(x)]_k`.
    pub fn margin(&self, x: &[T], y: usize) -> Result<T> {
        let k = self.output_dim();
        if k < 2 {
            return Err(invalid("margin needs a head with at least two outputs"));
        }
        if y >= k {
            return Err(invalid(format!("class {y} out of range for {k} classes")));
        }
        Ok(margin_of(&self.forward(x)?, y))
    }

    /// Predicted label: sign of the scalar head (0 counts as −1) or the argmax
    /// class (lowest index on ties).
    pub fn predict(&self, x: &[T], ws: &mut Workspace<T>) -> Label {
        let out = self.forward_with(x, ws);
        if out.len() == 1 {
            Label::Signed(if out[0] > T::zero() { 1.0 } else { -1.0 })
        } else {
            let mut best = 0;
            for (k, &v) in out.iter().enumerate() {
                if v > out[best] {
                    best = k;
                }
            }
            Label::Class(best)
        }
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(mismatch(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Converts every weight to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let weights = self
            .weights
            .iter()
            .map(|w| {
                let data = w.as_slice().iter().map(|v| U::of(v.as_f64())).collect();
                DenseMatrix::new(w.rows(), w.cols(), data).expect("shape preserved")
            })
            .collect();
        Network { weights, activation: self.activation }
    }
}

/// Margin of an output vector for class `y`.
#[inline]
pub fn margin_of<T: Scalar>(out: &[T], y: usize) -> T {
    out[y] - out[runner_up(out, y)]
}

fn loss_and_output_grad<T: Scalar>(out: &[T], label: Label, loss: Loss, up: &mut [T]) -> Result<T> {
    match (loss, label) {
        (Loss::Logistic, Label::Signed(y)) if out.len() == 1 => {
            let y = T::of(y);
            let t = y * out[0];
            // ln(1 + e^{−t}) and its derivative −σ(−t), both computed stably.
            let value = if t > T::zero() {
                (-t).exp().ln_1p()
            } else {
                -t + t.exp().ln_1p()
            };
            let s = T::one() / (T::one() + t.exp());
            up[0] = -y * s;
            Ok(value)
        }
        (Loss::CrossEntropy, Label::Class(y)) if out.len() >= 2 && y < out.len() => {
            let m = out.iter().copied().fold(T::neg_infinity(), T::max);
            let mut z = T::zero();
            for (u, &o) in up.iter_mut().zip(out) {
                *u = (o - m).exp();
                z += *u;
            }
            for u in up.iter_mut() {
                *u /= z;
            }
            up[y] -= T::one();
            Ok(z.ln() + m - out[y])
        }
        (Loss::Ramp { gamma }, label) => {
            if !(gamma > 0.0) {
                return Err(invalid(format!("gamma must be positive, got {gamma}")));
            }
            let g = T::of(gamma);
            up.iter_mut().for_each(|u| *u = T::zero());
            let obj = match label {
                Label::Signed(y) => HeadObjective::Signed { y },
                Label::Class(y) => HeadObjective::Margin { y },
            }
            .validate(out.len())?;
            let t = obj.value(out);
            obj.gradient(out, up);
            let slope = ramp_slope(t, g);
            up.iter_mut().for_each(|u| *u *= slope);
            Ok(ramp_unchecked(t, g))
        }
        (loss, label) => Err(invalid(format!(
            "loss {loss:?} does not apply to label {label:?} with a {}-dim head",
            out.len()
        ))),
    }
}

/// On-disk form of a network.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dims: Vec<usize>,
    pub activation: Activation,
    pub weights: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_provenance: Option<u64>,
}

impl ModelFile {
    pub fn from_network<T: Scalar>(net: &Network<T>, seed: Option<u64>) -> Self {
        Self {
            dims: net.dims(),
            activation: net.activation(),
            weights: net
                .weights()
                .iter()
                .map(|w| w.row_iter().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect())
                .collect(),
            seed_provenance: seed,
        }
    }

    pub fn into_network<T: Scalar>(self) -> Result<Network<T>> {
        let weights = self
            .weights
            .iter()
            .map(|rows| DenseMatrix::from_f64_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(weights, self.activation)?;
        if net.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "declared dims {:?} but weights have {:?}",
                self.dims,
                net.dims()
            )));
        }
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(rows: &[&[&[f64]]], act: Activation) -> Network<f64> {
        let ws = rows
            .iter()
            .map(|m| DenseMatrix::from_rows(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap())
            .collect();
        Network::new(ws, act).unwrap()
    }

    fn two_layer() -> Network<f64> {
        net(&[&[&[1.0], &[-1.0]], &[&[1.0, 1.0]]], Activation::Relu)
    }

    #[test]
    fn forward_examples() {
        let lin = net(&[&[&[2.0, 0.0]]], Activation::Relu);
        assert_eq!(lin.forward(&[1.0, 1.0]).unwrap(), vec![2.0]);
        assert_eq!(two_layer().forward(&[1.0]).unwrap(), vec![1.0]);
        assert_eq!(two_layer().forward(&[0.0]).unwrap(), vec![0.0]);
        assert!(lin.forward(&[1.0]).is_err());
    }

    #[test]
    fn grad_input_examples() {
        let lin = net(&[&[&[2.0, -3.0]]], Activation::Relu);
        assert_eq!(lin.grad_input(&[0.3, -7.0], 0).unwrap(), vec![2.0, -3.0]);
        assert_eq!(two_layer().grad_input(&[1.0], 0).unwrap(), vec![1.0]);
        assert!(lin.grad_input(&[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn shape_chain_checked() {
        let a = DenseMatrix::<f64>::zeros(3, 2);
        let b = DenseMatrix::<f64>::zeros(1, 2);
        assert!(Network::new(vec![a, b], Activation::Relu).is_err());
        assert!(Network::<f64>::new(vec![], Activation::Relu).is_err());
    }

    #[test]
    fn margin_examples() {
        let id3 = net(&[&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]], Activation::Identity);
        assert_eq!(id3.margin(&[2.0, 0.5, -1.0], 0).unwrap(), 1.5);
        let id2 = net(&[&[&[1.0, 0.0], &[0.0, 1.0]]], Activation::Identity);
        assert_eq!(id2.margin(&[1.0, 1.0], 0).unwrap(), 0.0);
        assert_eq!(id2.margin(&[0.0, 3.0], 0).unwrap(), -3.0);
        assert!(id2.margin(&[0.0, 3.0], 2).is_err());
        assert_eq!(runner_up(&[5.0, 1.0, 1.0], 0), 1);
    }

    #[test]
    fn ramp_examples() {
        assert_eq!(ramp_loss(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(ramp_loss(-1.0, 1.0).unwrap(), 1.0);
        assert_eq!(ramp_loss(2.0, 1.0).unwrap(), 0.0);
        assert!(ramp_loss(0.0, 0.0).is_err());
        assert!(ramp_loss(0.0, -1.0).is_err());
    }

    #[test]
    fn logistic_gradient_small_at_large_margin() {
        let lin = net(&[&[&[30.0, 0.0]]], Activation::Identity);
        let (v, g) = lin.grad_weights(&[1.0, 0.0], Label::Signed(1.0), Loss::Logistic).unwrap();
        assert!(v < 1e-12);
        assert!(g[0].as_slice().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn dead_network_gradients() {
        let z = Network::<f64>::zeros(&[3, 4, 2], Activation::Relu).unwrap();
        let (_, g) = z.grad_weights(&[0.5, -1.0, 2.0], Label::Class(1), Loss::CrossEntropy).unwrap();
        assert!(g[0].as_slice().iter().all(|&x| x == 0.0));
        assert!(g[1].as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn loss_label_mismatch_rejected() {
        let z = Network::<f64>::zeros(&[2, 1], Activation::Relu).unwrap();
        assert!(z.grad_weights(&[0.0, 0.0], Label::Class(0), Loss::CrossEntropy).is_err());
        assert!(z.grad_weights(&[0.0, 0.0], Label::Class(0), Loss::Logistic).is_err());
        assert!(z.grad_weights(&[0.0, 0.0], Label::Signed(1.0), Loss::Ramp { gamma: 0.0 }).is_err());
    }

    #[test]
    fn model_json_roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = Network::<f64>::init_random(&[3, 5, 2], Activation::LeakyRelu(0.1), &mut rng).unwrap();
        let json = ModelFile::from_network(&n, Some(3)).to_json().unwrap();
        let back: Network<f64> = ModelFile::from_json(&json).unwrap().into_network().unwrap();
        assert_eq!(back, n);
        let tampered = json.replace("\"dims\": [\n    3,", "\"dims\": [\n    4,");
        assert!(ModelFile::from_json(&tampered).unwrap().into_network::<f64>().is_err());
    }

    #[test]
    fn lipschitz_constants() {
        assert_eq!(Activation::Relu.lipschitz(), 1.0);
        assert_eq!(Activation::LeakyRelu(0.2).lipschitz(), 1.0);
        assert_eq!(Activation::LeakyRelu(3.0).lipschitz(), 3.0);
        assert!(Activation::LeakyRelu(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn relu_positive_homogeneity(seed in 0u64..1000, c in 0.1f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = Network::<f64>::init_random(&[3, 4, 4, 2], Activation::Relu, &mut rng).unwrap();
            let mut scaled = n.clone();
            scaled.weights_mut().iter_mut().for_each(|w| w.scale(c));
            let x = [0.3, -1.2, 0.7];
            let a = n.forward(&x).unwrap();
            let b = scaled.forward(&x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((v - c.powi(3) * u).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn ramp_is_lipschitz(a in -3.0f64..3.0, b in -3.0f64..3.0, g in 0.01f64..5.0) {
            let d = (ramp_loss(a, g).unwrap() - ramp_loss(b, g).unwrap()).abs();
            prop_assert!(d <= (a - b).abs() / g * (1.0 + 1e-12) + 1e-15);
        }
    }
}
