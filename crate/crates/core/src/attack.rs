//! Minimizing a head objective over an ℓp ball around an input.
//!
//! Three solvers: a closed form for linear maps, projected gradient descent
//! (and its one-step FGSM special case) for general networks, and a brute
//! force grid used as a verification oracle in one to three dimensions.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::exponent::Exponent;
use crate::linalg::{dot, p_norm};
use crate::network::{HeadObjective, Network, Workspace};
use crate::scalar::Scalar;

/// Largest input dimension the grid oracle accepts.
pub const GRID_MAX_DIM: usize = 3;
pub const DEFAULT_GRID_RESOLUTION: usize = 101;
pub const DEFAULT_PGD_STEPS: usize = 20;
pub const DEFAULT_EVAL_STEPS: usize = 40;
pub const DEFAULT_RESTARTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Solver {
    ExactLinear,
    Pgd,
    Fgsm,
    Grid { resolution: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub p: Exponent,
    pub epsilon: f64,
    pub steps: usize,
    pub step_size: f64,
    pub restarts: usize,
    pub solver: Solver,
}

impl AttackSpec {
    /// PGD with the training defaults: 20 steps of size ε/8, 5 restarts.
    pub fn pgd(p: Exponent, epsilon: f64) -> Self {
        Self {
            p,
            epsilon,
            steps: DEFAULT_PGD_STEPS,
            step_size: epsilon / 8.0,
            restarts: DEFAULT_RESTARTS,
            solver: Solver::Pgd,
        }
    }

    /// PGD with the evaluation budget of 40 steps.
    pub fn pgd_eval(p: Exponent, epsilon: f64) -> Self {
        Self { steps: DEFAULT_EVAL_STEPS, ..Self::pgd(p, epsilon) }
    }

    pub fn fgsm(p: Exponent, epsilon: f64) -> Self {
        Self { steps: 1, step_size: epsilon, restarts: 1, solver: Solver::Fgsm, ..Self::pgd(p, epsilon) }
    }

    pub fn grid(p: Exponent, epsilon: f64, resolution: usize) -> Self {
        Self { solver: Solver::Grid { resolution }, ..Self::pgd(p, epsilon) }
    }

    pub fn exact(p: Exponent, epsilon: f64) -> Self {
        Self { solver: Solver::ExactLinear, ..Self::pgd(p, epsilon) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        match self.solver {
            Solver::Pgd | Solver::Fgsm => {
                check_pgd_norm(self.p)?;
                if self.steps == 0 {
                    return Err(invalid("PGD needs at least one step"));
                }
                if self.restarts == 0 {
                    return Err(invalid("PGD needs at least one restart"));
                }
                if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
                    return Err(invalid(format!("step size must be finite and >= 0, got {}", self.step_size)));
                }
            }
            Solver::Grid { resolution } if resolution < 2 => {
                return Err(invalid(format!("grid resolution must be >= 2, got {resolution}")));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackResult<T> {
    pub x_star: Vec<T>,
    pub value: T,
    pub solver_used: Solver,
}

fn check_pgd_norm(p: Exponent) -> Result<()> {
    match p {
        Exponent::Infinity => Ok(()),
        Exponent::Finite(v) if v == 2.0 => Ok(()),
        other => Err(Error::Unsupported(format!("PGD supports p = 2 or p = inf, got p = {other}"))),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must be finite and >= 0, got {eps}")))
    }
}

/// Exact minimizer of `y·wᵀx′` over `‖x′ − x‖_p ≤ ε`.
///
/// The value is `y·wᵀx − ε‖w‖_{p*}`.
pub fn inner_min_linear<T: Scalar>(
    w: &[T],
    x: &[T],
    y: f64,
    p: Exponent,
    eps: f64,
) -> Result<AttackResult<T>> {
    if w.len() != x.len() {
        return Err(mismatch(format!("w has {} entries, x has {}", w.len(), x.len())));
    }
    if !(y == 1.0 || y == -1.0) {
        return Err(invalid(format!("label must be ±1, got {y}")));
    }
    check_eps(eps)?;
    let yt = T::of(y);
    let e = T::of(eps);
    let dual = p.dual();
    let wn = p_norm(w, dual);
    let value = yt * dot(w, x) - e * wn;
    let mut x_star = x.to_vec();
    if eps > 0.0 && wn > T::zero() {
        match p {
            Exponent::Infinity => {
                for (xi, &wi) in x_star.iter_mut().zip(w) {
                    *xi -= e * yt * sign(wi);
                }
            }
            Exponent::Finite(v) if v == 1.0 => {
                let mut k = 0;
                for (i, wi) in w.iter().enumerate() {
                    if wi.abs() > w[k].abs() {
                        k = i;
                    }
                }
                x_star[k] -= e * yt * sign(w[k]);
            }
            Exponent::Finite(_) => {
                let q1 = T::of(dual.value() - 1.0);
                for (xi, &wi) in x_star.iter_mut().zip(w) {
                    *xi -= e * yt * sign(wi) * (wi.abs() / wn).powf(q1);
                }
            }
        }
    }
    Ok(AttackResult { x_star, value, solver_used: Solver::ExactLinear })
}

#[inline]
fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Exact inner minimum for a network that computes a linear map.
pub fn inner_min_linear_net<T: Scalar>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    p: Exponent,
    eps: f64,
) -> Result<AttackResult<T>> {
    if !net.is_linear() {
        return Err(Error::Unsupported("exact inner minimum needs a linear network".into()));
    }
    let objective = objective.validate(net.output_dim())?;
    if matches!(objective, HeadObjective::Margin { .. }) && net.output_dim() > 2 {
        return Err(Error::Unsupported("the margin of more than two linear scores is not linear".into()));
    }
    let mut ws = net.workspace();
    let mut up = vec![T::zero(); net.output_dim()];
    let mut w = vec![T::zero(); net.input_dim()];
    check_input(net, x)?;
    net.forward_with(x, &mut ws);
    objective.gradient(ws.output(), &mut up);
    net.backward(&mut ws, &up, Some(&mut w), None);
    inner_min_linear(&w, x, 1.0, p, eps)
}

fn check_input<T: Scalar>(net: &Network<T>, x: &[T]) -> Result<()> {
    if x.len() != net.input_dim() {
        return Err(mismatch(format!(
            "input has {} coordinates, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    Ok(())
}

/// Reusable buffers for repeated PGD calls on one network.
#[derive(Clone, Debug)]
pub struct PgdScratch<T> {
    ws: Workspace<T>,
    up: Vec<T>,
    grad: Vec<T>,
    cur: Vec<T>,
}

impl<T: Scalar> PgdScratch<T> {
    pub fn new(net: &Network<T>) -> Self {
        Self {
            ws: net.workspace(),
            up: vec![T::zero(); net.output_dim()],
            grad: vec![T::zero(); net.input_dim()],
            cur: vec![T::zero(); net.input_dim()],
        }
    }
}

/// Objective value and its input gradient at `x`.
fn value_and_grad<T: Scalar>(
    net: &Network<T>,
    objective: HeadObjective,
    x: &[T],
    s: &mut PgdScratch<T>,
) -> T {
    net.forward_with(x, &mut s.ws);
    let v = objective.value(s.ws.output());
    objective.gradient(s.ws.output(), &mut s.up);
    net.backward(&mut s.ws, &s.up, Some(&mut s.grad), None);
    v
}

fn objective_at<T: Scalar>(net: &Network<T>, objective: HeadObjective, x: &[T], ws: &mut Workspace<T>) -> T {
    objective.value(net.forward_with(x, ws))
}

/// Projects `cur` onto the ball `‖cur − center‖_p ≤ ε` (p = 2 or ∞).
fn project<T: Scalar>(cur: &mut [T], center: &[T], p: Exponent, eps: T) {
    match p {
        Exponent::Infinity => {
            for (c, &x0) in cur.iter_mut().zip(center) {
                *c = c.max(x0 - eps).min(x0 + eps);
            }
        }
        _ => {
            let mut sq = T::zero();
            for (&c, &x0) in cur.iter().zip(center) {
                sq += (c - x0) * (c - x0);
            }
            let n = sq.sqrt();
            if n > eps {
                let s = eps / n;
                for (c, &x0) in cur.iter_mut().zip(center) {
                    *c = x0 + (*c - x0) * s;
                }
            }
        }
    }
}

/// Uniform sample from the ℓp ball (p = 2 or ∞) around `center`.
fn sample_in_ball<T: Scalar, R: Rng + ?Sized>(out: &mut [T], center: &[T], p: Exponent, eps: f64, rng: &mut R) {
    let d = center.len();
    match p {
        Exponent::Infinity => {
            for (o, &c) in out.iter_mut().zip(center) {
                let u: f64 = rng.random_range(-1.0..=1.0);
                *o = c + T::of(eps * u);
            }
        }
        _ => {
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let r = eps * rng.random::<f64>().powf(1.0 / d as f64);
            for ((o, &c), gi) in out.iter_mut().zip(center).zip(g) {
                *o = c + T::of(r * gi / gn);
            }
        }
    }
}

/// PGD on the objective over the ball; restart 0 starts at `x`, the others
/// at uniform points in the ball drawn from `rng`.
pub fn inner_min_pgd<T: Scalar, R: Rng + ?Sized>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<AttackResult<T>> {
    spec.validate()?;
    check_input(net, x)?;
    let objective = objective.validate(net.output_dim())?;
    let mut s = PgdScratch::new(net);
    Ok(pgd_with(net, x, objective, spec, rng, &mut s))
}

/// PGD without validation, reusing `scratch`.
pub fn pgd_with<T: Scalar, R: Rng + ?Sized>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    spec: &AttackSpec,
    rng: &mut R,
    s: &mut PgdScratch<T>,
) -> AttackResult<T> {
    let solver_used = spec.solver;
    let mut best_x = x.to_vec();
    let mut best = objective_at(net, objective, x, &mut s.ws);
    if spec.epsilon == 0.0 {
        return AttackResult { x_star: best_x, value: best, solver_used };
    }
    let eps = T::of(spec.epsilon);
    let eta = T::of(spec.step_size);
    let mut cur = std::mem::take(&mut s.cur);
    for restart in 0..spec.restarts.max(1) {
        if restart == 0 {
            cur.copy_from_slice(x);
        } else {
            sample_in_ball(&mut cur, x, spec.p, spec.epsilon, rng);
        }
        for step in 0..=spec.steps {
            let v = if step < spec.steps {
                value_and_grad(net, objective, &cur, s)
            } else {
                objective_at(net, objective, &cur, &mut s.ws)
            };
            if v < best {
                best = v;
                best_x.copy_from_slice(&cur);
            }
            if step == spec.steps {
                break;
            }
            match spec.p {
                Exponent::Infinity => {
                    for (c, &g) in cur.iter_mut().zip(&s.grad) {
                        *c -= eta * sign(g);
                    }
                }
                _ => {
                    let gn = p_norm(&s.grad, Exponent::TWO);
                    if gn == T::zero() {
                        break;
                    }
                    for (c, &g) in cur.iter_mut().zip(&s.grad) {
                        *c -= eta * g / gn;
                    }
                }
            }
            project(&mut cur, x, spec.p, eps);
        }
    }
    s.cur = cur;
    AttackResult { x_star: best_x, value: best, solver_used }
}

/// One step of size ε from `x`, projected: PGD with one step and no restarts.
/// Like PGD, the start point counts as a candidate.
pub fn fgsm_point<T: Scalar>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    p: Exponent,
    eps: f64,
) -> Result<AttackResult<T>> {
    let spec = AttackSpec::fgsm(p, eps);
    spec.validate()?;
    check_input(net, x)?;
    let objective = objective.validate(net.output_dim())?;
    let mut s = PgdScratch::new(net);
    // A single restart never draws from the generator.
    let mut unused = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    Ok(pgd_with(net, x, objective, &spec, &mut unused, &mut s))
}

/// Grid of unit offsets `u ∈ [−1, 1]^d` with `‖u‖_p ≤ 1`, scaled by ε at use.
///
/// Points are `k/(r−1)` fractions of the box, so a grid whose `r − 1`
/// divides another's contains it exactly.
#[derive(Clone, Debug)]
pub struct GridOracle {
    dim: usize,
    p: Exponent,
    resolution: usize,
    offsets: Vec<f64>,
}

impl GridOracle {
    pub fn new(dim: usize, p: Exponent, resolution: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("grid needs at least one dimension"));
        }
        if dim > GRID_MAX_DIM {
            return Err(Error::Unsupported(format!(
                "grid oracle refuses d = {dim} > {GRID_MAX_DIM} (cost grows as resolution^d)"
            )));
        }
        if resolution < 2 {
            return Err(invalid(format!("grid resolution must be >= 2, got {resolution}")));
        }
        let axis: Vec<f64> = (0..resolution)
            .map(|k| 2.0 * (k as f64 / (resolution - 1) as f64) - 1.0)
            .collect();
        let mut offsets = Vec::new();
        let mut idx = vec![0usize; dim];
        let mut u = vec![0.0; dim];
        loop {
            for (ui, &k) in u.iter_mut().zip(&idx) {
                *ui = axis[k];
            }
            if p_norm(&u, p) <= 1.0 + 1e-12 {
                offsets.extend_from_slice(&u);
            }
            let mut carry = 0;
            while carry < dim {
                idx[carry] += 1;
                if idx[carry] < resolution {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == dim {
                break;
            }
        }
        Ok(Self { dim, p, resolution, offsets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn point_count(&self) -> usize {
        self.offsets.len() / self.dim
    }

    /// Minimum of the objective over the grid points in the ε-ball around `x`.
    /// Ties keep the first point in grid order.
    pub fn minimize<T: Scalar>(
        &self,
        net: &Network<T>,
        x: &[T],
        objective: HeadObjective,
        eps: f64,
        ws: &mut Workspace<T>,
    ) -> AttackResult<T> {
        let solver_used = Solver::Grid { resolution: self.resolution };
        let mut best_x = x.to_vec();
        if eps == 0.0 {
            let value = objective_at(net, objective, x, ws);
            return AttackResult { x_star: best_x, value, solver_used };
        }
        let e = T::of(eps);
        let mut cur = x.to_vec();
        let mut best = T::infinity();
        for u in self.offsets.chunks_exact(self.dim) {
            for ((c, &x0), &ui) in cur.iter_mut().zip(x).zip(u) {
                *c = x0 + e * T::of(ui);
            }
            let v = objective_at(net, objective, &cur, ws);
            if v < best {
                best = v;
                best_x.copy_from_slice(&cur);
            }
        }
        AttackResult { x_star: best_x, value: best, solver_used }
    }
}

/// Brute-force grid minimum over the ball (d ≤ 3).
pub fn inner_min_grid<T: Scalar>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    p: Exponent,
    eps: f64,
    resolution: usize,
) -> Result<AttackResult<T>> {
    check_input(net, x)?;
    check_eps(eps)?;
    let objective = objective.validate(net.output_dim())?;
    let oracle = GridOracle::new(x.len(), p, resolution)?;
    let mut ws = net.workspace();
    Ok(oracle.minimize(net, x, objective, eps, &mut ws))
}

/// Runs the solver named in `spec`.
pub fn inner_min<T: Scalar, R: Rng + ?Sized>(
    net: &Network<T>,
    x: &[T],
    objective: HeadObjective,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<AttackResult<T>> {
    spec.validate()?;
    match spec.solver {
        Solver::ExactLinear => inner_min_linear_net(net, x, objective, spec.p, spec.epsilon),
        Solver::Pgd => inner_min_pgd(net, x, objective, spec, rng),
        Solver::Fgsm => fgsm_point(net, x, objective, spec.p, spec.epsilon),
        Solver::Grid { resolution } => inner_min_grid(net, x, objective, spec.p, spec.epsilon, resolution),
    }
}
