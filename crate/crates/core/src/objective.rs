//! Elastic-net penalty, smoothed losses, their conjugates and the
//! primal/dual objectives.
//!
//! Primal:  `P(w) = lambda * psi(w) + (1/n) sum_i loss_i(x_i^T w)`
//! Dual:    `D(a) = -lambda * psi*(X^T a / (lambda n)) - (1/n) sum_i loss_i*(-a_i)`
//!
//! with `psi(w) = ||w||_1 + ||w||_2^2 / 2`. The primal solution is recovered
//! from the dual through `w = grad psi*(X^T a / (lambda n))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pos_part, Float};
use crate::sparse_data::{Dataset, Task};

/// Loss family and regularization strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec<F> {
    pub task: Task,
    /// Smoothing width of the loss.
    pub gamma: F,
    /// Insensitivity half-width, regression only.
    pub eps: F,
    pub lambda: F,
}

impl<F: Float> ProblemSpec<F> {
    pub fn new(task: Task, gamma: F, eps: F, lambda: F) -> Result<Self> {
        if !(gamma > F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if !(lambda > F::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a finite value > 0, got {lambda}"
            )));
        }
        if !(eps >= F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be >= 0, got {eps}"
            )));
        }
        Ok(Self {
            task,
            gamma,
            eps,
            lambda,
        })
    }

    pub fn classification(gamma: F, lambda: F) -> Result<Self> {
        Self::new(Task::Classification, gamma, F::zero(), lambda)
    }

    pub fn regression(gamma: F, eps: F, lambda: F) -> Result<Self> {
        Self::new(Task::Regression, gamma, eps, lambda)
    }

    /// Same loss, different `lambda`.
    pub fn with_lambda(self, lambda: F) -> Result<Self> {
        Self::new(self.task, self.gamma, self.eps, lambda)
    }

    /// Feasible interval of the dual coordinate attached to label `y`.
    #[inline]
    pub fn dual_box(&self, y: F) -> (F, F) {
        match self.task {
            Task::Classification => {
                if y > F::zero() {
                    (F::zero(), F::one())
                } else {
                    (-F::one(), F::zero())
                }
            }
            Task::Regression => (-F::one(), F::one()),
        }
    }
}

/// `psi(w) = ||w||_1 + ||w||_2^2 / 2`.
pub fn penalty_value<F: Float>(w: &[F]) -> F {
    w.iter()
        .fold(F::zero(), |acc, &x| acc + x.abs() + x * x / F::lit(2.0))
}

/// `psi*(v) = 1/2 sum_j ([|v_j| - 1]_+)^2`.
pub fn penalty_conj_value<F: Float>(v: &[F]) -> F {
    v.iter().fold(F::zero(), |acc, &x| {
        let t = pos_part(x.abs() - F::one());
        acc + t * t / F::lit(2.0)
    })
}

/// One coordinate of `grad psi*`: `sign(v) [|v| - 1]_+`.
#[inline]
pub fn soft_threshold<F: Float>(v: F) -> F {
    if v > F::one() {
        v - F::one()
    } else if v < -F::one() {
        v + F::one()
    } else {
        F::zero()
    }
}

pub fn penalty_conj_grad<F: Float>(v: &[F]) -> Vec<F> {
    v.iter().map(|&x| soft_threshold(x)).collect()
}

/// Loss of sample with label `y` at prediction `u = x_i^T w`.
pub fn loss_value<F: Float>(spec: &ProblemSpec<F>, y: F, u: F) -> F {
    let g = spec.gamma;
    let two = F::lit(2.0);
    match spec.task {
        Task::Classification => {
            let m = y * u;
            if m > F::one() {
                F::zero()
            } else if m < F::one() - g {
                F::one() - m - g / two
            } else {
                (F::one() - m) * (F::one() - m) / (two * g)
            }
        }
        Task::Regression => {
            let r = (u - y).abs();
            if r < spec.eps {
                F::zero()
            } else if r > spec.eps + g {
                r - spec.eps - g / two
            } else {
                (r - spec.eps) * (r - spec.eps) / (two * g)
            }
        }
    }
}

/// Derivative of the loss with respect to `u` (both losses are C^1).
pub fn loss_grad<F: Float>(spec: &ProblemSpec<F>, y: F, u: F) -> F {
    let g = spec.gamma;
    match spec.task {
        Task::Classification => {
            let m = y * u;
            if m >= F::one() {
                F::zero()
            } else if m <= F::one() - g {
                -y
            } else {
                -y * (F::one() - m) / g
            }
        }
        Task::Regression => {
            let t = u - y;
            let r = t.abs();
            if r <= spec.eps {
                F::zero()
            } else if r >= spec.eps + g {
                t.signum()
            } else {
                t.signum() * (r - spec.eps) / g
            }
        }
    }
}

/// Convex conjugate `loss*(a)`; `+inf` outside its domain.
pub fn loss_conj_value<F: Float>(spec: &ProblemSpec<F>, y: F, a: F) -> F {
    let half_g = spec.gamma / F::lit(2.0);
    match spec.task {
        Task::Classification => {
            let ya = y * a;
            if ya >= -F::one() && ya <= F::zero() {
                half_g * a * a + y * a
            } else {
                F::infinity()
            }
        }
        Task::Regression => {
            if a >= -F::one() && a <= F::one() {
                half_g * a * a + y * a + spec.eps * a.abs()
            } else {
                F::infinity()
            }
        }
    }
}

/// Fenchel-Young residual `loss(u) + loss*(-a) + a u >= 0` of one sample,
/// evaluated branch by branch so that it never cancels.
///
/// When `w = grad psi*(X^T a / (lambda n))` the penalty residuals vanish and
/// the duality gap is exactly the mean of these values.
pub fn loss_fenchel_gap<F: Float>(spec: &ProblemSpec<F>, y: F, u: F, a: F) -> F {
    let g = spec.gamma;
    let two = F::lit(2.0);
    let one = F::one();
    // (t, b): distance into the loss and the matching dual weight
    let (t, b, eps) = match spec.task {
        Task::Classification => (one - y * u, y * a, F::zero()),
        Task::Regression => {
            let r = u - y;
            let sigma = if r < F::zero() { -one } else { one };
            (r.abs(), -sigma * a, spec.eps)
        }
    };
    if b <= F::zero() {
        // only possible for regression: every part is nonnegative
        let s = t - eps;
        let lossv = if s <= F::zero() {
            F::zero()
        } else if s <= g {
            s * s / (two * g)
        } else {
            s - g / two
        };
        return lossv + g * b * b / two + b.abs() * (eps + t);
    }
    let s = t - eps;
    if s <= F::zero() {
        g * b * b / two + b * (-s)
    } else if s <= g {
        let q = s - g * b;
        q * q / (two * g)
    } else {
        pos_part(one - b) * (s - g * (one + b) / two)
    }
}

/// `P(w)`.
pub fn primal_objective<F: Float>(spec: &ProblemSpec<F>, data: &Dataset<F>, w: &[F]) -> F {
    let n = data.n();
    let loss: F = (0..n)
        .map(|i| loss_value(spec, data.labels[i], data.matrix.row_dot(i, w)))
        .sum();
    spec.lambda * penalty_value(w) + loss / F::from_count(n.max(1))
}

/// `v = X^T a / (lambda n)`.
pub fn dual_direction<F: Float>(spec: &ProblemSpec<F>, data: &Dataset<F>, alpha: &[F]) -> Vec<F> {
    let scale = spec.lambda * F::from_count(data.n().max(1));
    data.matrix
        .tr_mul_vec(alpha)
        .into_iter()
        .map(|x| x / scale)
        .collect()
}

/// Sum of the loss-conjugate part of `D`: `(1/n) sum_i loss_i*(-a_i)`.
fn dual_loss_part<F: Float>(spec: &ProblemSpec<F>, data: &Dataset<F>, alpha: &[F]) -> F {
    let s: F = alpha
        .iter()
        .zip(&data.labels)
        .map(|(&a, &y)| loss_conj_value(spec, y, -a))
        .sum();
    s / F::from_count(data.n().max(1))
}

/// `D(a)`; `-inf` when `a` is not dual feasible.
pub fn dual_objective<F: Float>(spec: &ProblemSpec<F>, data: &Dataset<F>, alpha: &[F]) -> F {
    let conj = dual_loss_part(spec, data, alpha);
    if conj.is_infinite() {
        return F::neg_infinity();
    }
    let v = dual_direction(spec, data, alpha);
    -spec.lambda * penalty_conj_value(&v) - conj
}

/// Largest `lambda` of the path grid: `||Z^T 1||_inf` for classification
/// (`Z` = rows scaled by labels) and `||X^T 1||_inf` for regression.
///
/// An all-zero matrix yields 0, which callers treat as degenerate.
pub fn lambda_max<F: Float>(data: &Dataset<F>) -> Result<F> {
    if data.n() == 0 || data.d() == 0 {
        return Err(Error::EmptyDataset);
    }
    let weights: Vec<F> = match data.task {
        Task::Classification => data.labels.clone(),
        Task::Regression => vec![F::one(); data.n()],
    };
    Ok((0..data.d())
        .map(|j| data.matrix.col_dot(j, &weights).abs())
        .fold(F::zero(), |a, b| a.max(b)))
}

/// A primal/dual pair with cached objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair<F> {
    pub w: Vec<F>,
    pub alpha: Vec<F>,
    /// `X^T alpha / (lambda n)`.
    pub v: Vec<F>,
    pub primal: F,
    pub dual: F,
    /// `primal - dual`, not clamped.
    pub gap: F,
}

impl<F: Float> SolutionPair<F> {
    /// Pair generated by a dual point: `w = grad psi*(v)`.
    pub fn from_dual(spec: &ProblemSpec<F>, data: &Dataset<F>, alpha: Vec<F>) -> Self {
        let v = dual_direction(spec, data, &alpha);
        let w = penalty_conj_grad(&v);
        Self::from_parts(spec, data, w, alpha, v)
    }

    /// Pair from an arbitrary primal point and dual point.
    pub fn from_parts(
        spec: &ProblemSpec<F>,
        data: &Dataset<F>,
        w: Vec<F>,
        alpha: Vec<F>,
        v: Vec<F>,
    ) -> Self {
        let primal = primal_objective(spec, data, &w);
        let conj = dual_loss_part(spec, data, &alpha);
        let dual = if conj.is_infinite() {
            F::neg_infinity()
        } else {
            -spec.lambda * penalty_conj_value(&v) - conj
        };
        Self {
            w,
            alpha,
            v,
            primal,
            dual,
            gap: primal - dual,
        }
    }

    /// `max(gap, 0)`; used for radii so rounding never produces NaN.
    #[inline]
    pub fn gap_clamped(&self) -> F {
        pos_part(self.gap)
    }
}

/// Clips every dual coordinate into its feasibility box.
pub fn clip_dual<F: Float>(spec: &ProblemSpec<F>, labels: &[F], alpha: &mut [F]) {
    for (a, &y) in alpha.iter_mut().zip(labels) {
        let (lo, hi) = spec.dual_box(y);
        *a = a.max(lo).min(hi);
    }
}
