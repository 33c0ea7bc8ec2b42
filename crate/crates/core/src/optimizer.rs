//! Damped least-squares training loop.
//!
//! Plain gradient descent crawls on these objectives and an undamped normal
//! equation step can overshoot, so steps solve (H + lambda I) s = grad with a
//! multiplicative damping schedule: accepted steps divide lambda, rejected
//! trials multiply it and are retried without recomputing the gradient or
//! Hessian. Everything is deterministic for a fixed seed.

use crate::error::{Error, Result};
use crate::loss::{CostModel, ProblemSpec, SquareMat};
use crate::model::Network;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pivots smaller than this make the damped system singular.
const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Initial damping. Large on purpose: early steps are nearly gradient
    /// descent until the quadratic model earns trust.
    pub lambda0: f64,
    pub max_iter: usize,
    /// Stop once the cost drops below this.
    pub tol: f64,
    /// Accepted steps divide lambda by this. Must exceed 1.
    pub decrease_factor: f64,
    /// Rejected trials multiply lambda by this. Must exceed 1.
    pub increase_factor: f64,
    /// Rejected trials tolerated within one iteration before giving up.
    pub max_inner_retries: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda0: 1e4,
            max_iter: 200,
            tol: 1e-28,
            decrease_factor: 4.0,
            increase_factor: 2.0,
            max_inner_retries: 60,
            seed: 42,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.lambda0.is_finite() || self.lambda0 <= 0.0 {
            return bad(format!("lambda0 must be finite and positive, got {}", self.lambda0));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return bad(format!("tol must be finite and positive, got {}", self.tol));
        }
        if !self.decrease_factor.is_finite() || self.decrease_factor <= 1.0 {
            return bad(format!(
                "decrease_factor must exceed 1, got {}",
                self.decrease_factor
            ));
        }
        if !self.increase_factor.is_finite() || self.increase_factor <= 1.0 {
            return bad(format!(
                "increase_factor must exceed 1, got {}",
                self.increase_factor
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    ToleranceMet,
    MaxIterations,
    DampingOverflow,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::ToleranceMet => "tolerance_met",
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::DampingOverflow => "damping_overflow",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a training run.
///
/// `cost_history` holds the cost at the initial weights followed by the cost
/// after each accepted step, so its length is `iterations + 1` and it is
/// strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub final_cost: f64,
    pub converged: bool,
    pub cost_history: Vec<f64>,
    pub termination_reason: TerminationReason,
}

/// Mutable state of the outer training loop: the current iterate and the
/// loss pieces evaluated there.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub iteration: usize,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub cost: f64,
    pub grad: Vec<f64>,
    pub hess: SquareMat,
}

/// Initial weights: n draws from the uniform distribution on [-1, 1] with a
/// fixed-seed generator. Exact duplicates are redrawn so the weights are
/// pairwise distinct. Same seed, same weights, on every platform.
pub fn init_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    while weights.len() < n {
        let w: f64 = rng.random_range(-1.0..=1.0);
        if !weights.contains(&w) {
            weights.push(w);
        }
    }
    weights
}

/// Solves (hess + lambda I) step = grad by Gaussian elimination with partial
/// pivoting. Errors if the best available pivot falls below 1e-300.
pub fn solve_damped(hess: &SquareMat, lambda: f64, grad: &[f64]) -> Result<Vec<f64>> {
    let n = hess.n();
    assert_eq!(grad.len(), n, "gradient length {} does not match matrix size {n}", grad.len());
    debug_assert!(lambda >= 0.0 && !lambda.is_nan());

    let mut a = hess.data().to_vec();
    let mut b = grad.to_vec();
    for i in 0..n {
        a[i * n + i] += lambda;
    }

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].abs();
        for row in col + 1..n {
            let mag = a[row * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        // Negated on purpose: a NaN pivot must also count as singular.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(pivot_mag >= PIVOT_FLOOR) {
            return Err(Error::SingularSystem);
        }
        if pivot_row != col {
            for c in col..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[row * n + c] -= factor * a[col * n + c];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col * n + c] * x[c];
        }
        x[col] = acc / a[col * n + col];
    }
    Ok(x)
}

/// Trains a network on the problem.
///
/// Runs the damped loop until the cost drops below `config.tol`, `max_iter`
/// accepted steps have been taken, or one iteration exhausts its retries.
/// The last case reports `DampingOverflow` and still returns the best
/// weights found; non-finite trial costs count as rejections, so they raise
/// damping instead of poisoning the iterate.
pub fn train(problem: &ProblemSpec, config: &TrainConfig) -> Result<(Network, TrainReport)> {
    config.validate()?;
    let model = CostModel::new(problem)?;

    let weights = init_weights(problem.basis_size(), config.seed);
    let first = model.loss_parts(&Network::new(weights.clone()))?;
    let mut state = TrainState {
        iteration: 0,
        weights,
        lambda: config.lambda0,
        cost: first.cost,
        grad: first.grad,
        hess: first.hess,
    };
    let mut history = vec![state.cost];

    let (converged, reason) = loop {
        if state.cost < config.tol {
            break (true, TerminationReason::ToleranceMet);
        }
        if state.iteration >= config.max_iter {
            break (false, TerminationReason::MaxIterations);
        }

        let mut rejections = 0;
        let accepted = loop {
            let step = solve_damped(&state.hess, state.lambda, &state.grad)?;
            let trial: Vec<f64> = state
                .weights
                .iter()
                .zip(&step)
                .map(|(w, s)| w - s)
                .collect();
            let trial_net = Network::new(trial);
            let trial_cost = model.cost(&trial_net)?;
            if trial_cost < state.cost {
                break Some(trial_net);
            }
            rejections += 1;
            if rejections > config.max_inner_retries {
                break None;
            }
            state.lambda *= config.increase_factor;
        };

        match accepted {
            Some(net) => {
                let parts = model.loss_parts(&net)?;
                state.weights = net.into_weights();
                state.cost = parts.cost;
                state.grad = parts.grad;
                state.hess = parts.hess;
                state.lambda /= config.decrease_factor;
                state.iteration += 1;
                history.push(state.cost);
            }
            None => break (false, TerminationReason::DampingOverflow),
        }
    };

    let report = TrainReport {
        iterations: state.iteration,
        final_cost: state.cost,
        converged,
        cost_history: history,
        termination_reason: reason,
    };
    Ok((Network::new(state.weights), report))
}
