//! Screening bounds for the LP-based SVM: L1 penalty with the plain hinge.
//!
//! Primal `P(w) = lambda ||w||_1 + (1/n) sum_i max(0, 1 - y_i x_i^T w)` and
//! dual `D(alpha) = (1/n) y^T alpha` subject to `y_i alpha_i in [0, 1]` and
//! `||X^T alpha||_inf <= lambda n`. Both optimal points are then confined to
//! polytopes built from any feasible pair, and the bounds below are exact
//! (features) or Lagrangian (samples) extrema over those polytopes.

use crate::error::{Error, Result};
use crate::rules::{FeatureStatus, Pin, SampleStatus, ScreeningLedger};
use crate::scalar::{pos_part, Float};
use crate::sparse_data::Dataset;

/// `P(w)`.
pub fn lp_primal_value<F: Float>(data: &Dataset<F>, lambda: F, w: &[F]) -> F {
    let n = F::from_count(data.n().max(1));
    let hinge: F = (0..data.n())
        .map(|i| pos_part(F::one() - data.labels[i] * data.matrix.row_dot(i, w)))
        .sum();
    lambda * w.iter().map(|x| x.abs()).sum::<F>() + hinge / n
}

/// Whether `alpha` satisfies the dual constraints up to `tol`.
pub fn lp_dual_feasible<F: Float>(data: &Dataset<F>, lambda: F, alpha: &[F], tol: F) -> bool {
    let boxed = alpha
        .iter()
        .zip(&data.labels)
        .all(|(&a, &y)| y * a >= -tol && y * a <= F::one() + tol);
    let cap = lambda * F::from_count(data.n());
    boxed
        && data
            .matrix
            .tr_mul_vec(alpha)
            .iter()
            .all(|v| v.abs() <= cap * (F::one() + tol))
}

/// `D(alpha) = (1/n) y^T alpha`; `-inf` if infeasible.
pub fn lp_dual_value<F: Float>(data: &Dataset<F>, lambda: F, alpha: &[F]) -> F {
    if !lp_dual_feasible(data, lambda, alpha, F::lit(1e-12)) {
        return F::neg_infinity();
    }
    let s: F = alpha.iter().zip(&data.labels).map(|(&a, &y)| a * y).sum();
    s / F::from_count(data.n().max(1))
}

/// Makes any vector dual feasible: clip into the box, then shrink so that
/// `||X^T alpha||_inf <= lambda n`.
pub fn project_dual<F: Float>(data: &Dataset<F>, lambda: F, alpha: &[F]) -> Vec<F> {
    let mut a: Vec<F> = alpha
        .iter()
        .zip(&data.labels)
        .map(|(&a, &y)| y * (y * a).max(F::zero()).min(F::one()))
        .collect();
    let top = data
        .matrix
        .tr_mul_vec(&a)
        .iter()
        .fold(F::zero(), |m, v| m.max(v.abs()));
    let cap = lambda * F::from_count(data.n());
    if top > cap {
        let s = cap / top;
        a.iter_mut().for_each(|x| *x *= s);
    }
    a
}

/// Polytope for the dual optimum: `beta_i = y_i alpha_i in [0, 1]` and
/// `y^T alpha_hat <= sum beta <= n P(w_hat)`.
#[derive(Debug, Clone)]
pub struct LpDualRegionParams<F> {
    pub lower: F,
    pub upper: F,
    /// Per column, the nonzero entries of `Z_{:j} = (y_i X_ij)_i` in
    /// increasing order.
    sorted: Vec<Vec<F>>,
    n: usize,
}

impl<F: Float> LpDualRegionParams<F> {
    pub fn new(data: &Dataset<F>, lambda: F, w_hat: &[F], alpha_hat: &[F]) -> Result<Self> {
        check_pair(data, lambda, w_hat, alpha_hat)?;
        let n = data.n();
        let lower: F = alpha_hat
            .iter()
            .zip(&data.labels)
            .map(|(&a, &y)| a * y)
            .sum();
        let upper = (F::from_count(n) * lp_primal_value(data, lambda, w_hat)).min(F::from_count(n));
        let sorted = (0..data.d())
            .map(|j| {
                let (rows, vals) = data.matrix.col(j);
                let mut z: Vec<F> = rows
                    .iter()
                    .zip(vals)
                    .map(|(&i, &x)| data.labels[i] * x)
                    .filter(|z| *z != F::zero())
                    .collect();
                z.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
                z
            })
            .collect();
        Ok(Self {
            lower: lower.max(F::zero()),
            upper,
            sorted,
            n,
        })
    }

    /// `floor(y^T alpha_hat)`.
    pub fn l_q(&self) -> usize {
        self.lower.floor().as_f64() as usize
    }

    /// `floor(n P(w_hat))`, capped at `n`.
    pub fn u_q(&self) -> usize {
        self.upper.floor().as_f64() as usize
    }

    pub fn negatives(&self, j: usize) -> usize {
        self.sorted[j].iter().filter(|z| **z < F::zero()).count()
    }

    pub fn positives(&self, j: usize) -> usize {
        self.sorted[j].iter().filter(|z| **z > F::zero()).count()
    }

    /// `(LB, UB)` of `X_{:j}^T alpha*`.
    pub fn feature_bounds(&self, j: usize) -> (F, F) {
        let z = &self.sorted[j];
        let neg = self.negatives(j);
        let pos = z.len() - neg;
        let zeros = self.n - z.len();
        // k-th smallest of the full column, implicit zeros in the middle
        let asc = |k: usize| -> F {
            if k < neg {
                z[k]
            } else if k < neg + zeros {
                F::zero()
            } else {
                z[k - zeros]
            }
        };
        let desc = |k: usize| -> F {
            if k < pos {
                z[z.len() - 1 - k]
            } else if k < pos + zeros {
                F::zero()
            } else {
                z[neg - 1 - (k - pos - zeros)]
            }
        };
        let lb = self.greedy(asc, neg);
        let ub = self.greedy(desc, pos);
        (lb, ub)
    }

    /// Sum of the first `s` entries of an ordered column, the last one taken
    /// fractionally, at the mass `s` in `[lower, upper]` closest to the
    /// number of entries with the favorable sign.
    fn greedy(&self, at: impl Fn(usize) -> F, favorable: usize) -> F {
        let s = F::from_count(favorable).max(self.lower).min(self.upper);
        let whole = s.floor();
        let m = (whole.as_f64() as usize).min(self.n);
        let mut acc = F::zero();
        for k in 0..m {
            acc += at(k);
        }
        let frac = s - whole;
        if frac > F::zero() && m < self.n {
            acc += frac * at(m);
        }
        acc
    }
}

/// Polytope for the primal optimum:
/// `lambda ||w||_1 + (1/n) g^T w <= k` with `g` a hinge subgradient at `w_hat`.
#[derive(Debug, Clone)]
pub struct LpPrimalRegionParams<F> {
    pub g_sum: Vec<F>,
    pub k: F,
    lambda: F,
    n: usize,
    /// `g_sum_j / (lambda n)`.
    c: Vec<F>,
    /// Number of `j` with `|c_j| > 1`.
    steep: usize,
}

impl<F: Float> LpPrimalRegionParams<F> {
    pub fn new(data: &Dataset<F>, lambda: F, w_hat: &[F]) -> Result<Self> {
        if w_hat.len() != data.d() {
            return Err(Error::DimensionMismatch {
                expected: data.d(),
                got: w_hat.len(),
            });
        }
        let n = data.n();
        let mut g_sum = vec![F::zero(); data.d()];
        for i in 0..n {
            let y = data.labels[i];
            if y * data.matrix.row_dot(i, w_hat) < F::one() {
                let (cols, vals) = data.matrix.row(i);
                for (&j, &x) in cols.iter().zip(vals) {
                    g_sum[j] -= y * x;
                }
            }
        }
        let nf = F::from_count(n.max(1));
        let l1: F = w_hat.iter().map(|x| x.abs()).sum();
        let k = lambda * l1 + g_sum.iter().zip(w_hat).map(|(&g, &w)| g * w).sum::<F>() / nf;
        let c: Vec<F> = g_sum.iter().map(|&g| g / (lambda * nf)).collect();
        let steep = c.iter().filter(|c| c.abs() > F::one()).count();
        Ok(Self {
            g_sum,
            k,
            lambda,
            n,
            c,
            steep,
        })
    }

    /// Lagrangian lower bound on `min x^T w` over the region, for a sparse
    /// `x`. `-inf` when the bound is vacuous.
    pub fn lower_bound(&self, cols: &[usize], vals: &[F]) -> F {
        let zero = F::zero();
        let mut mu_lo = zero;
        let mut mu_hi = F::infinity();
        let mut steep_in_support = 0;
        // mu (1 - c) >= a  and  mu (1 + c) >= -a
        let add = |coef: F, rhs: F, lo: &mut F, hi: &mut F| -> bool {
            if coef > zero {
                *lo = lo.max(rhs / coef);
            } else if coef < zero {
                *hi = hi.min(rhs / coef);
            } else if rhs > zero {
                return false;
            }
            true
        };
        for (&j, &x) in cols.iter().zip(vals) {
            let a = x / self.lambda;
            let c = self.c[j];
            if c.abs() > F::one() {
                steep_in_support += 1;
            }
            if !add(F::one() - c, a, &mut mu_lo, &mut mu_hi)
                || !add(F::one() + c, -a, &mut mu_lo, &mut mu_hi)
            {
                return F::neg_infinity();
            }
        }
        if self.steep > steep_in_support {
            // a zero coordinate with |c_j| > 1 only admits mu = 0
            mu_hi = mu_hi.min(zero);
        }
        if mu_lo > mu_hi {
            return F::neg_infinity();
        }
        if self.k > zero {
            -mu_lo * self.k
        } else if self.k < zero {
            if mu_hi.is_infinite() {
                F::neg_infinity()
            } else {
                -mu_hi * self.k
            }
        } else {
            zero
        }
    }

    /// `(LB, UB)` of `x^T w*` for a sparse `x`.
    pub fn bounds(&self, cols: &[usize], vals: &[F]) -> (F, F) {
        let lb = self.lower_bound(cols, vals);
        let neg: Vec<F> = vals.iter().map(|&v| -v).collect();
        let ub = -self.lower_bound(cols, &neg);
        (lb, ub)
    }

    pub fn sample_bounds(&self, data: &Dataset<F>, i: usize) -> (F, F) {
        debug_assert_eq!(data.n(), self.n);
        let (cols, vals) = data.matrix.row(i);
        self.bounds(cols, vals)
    }
}

/// `-lambda n < LB` and `UB < lambda n`  =>  `w*_j = 0`.
pub fn lp_screen_feature<F: Float>(lb: F, ub: F, lambda: F, n: usize) -> Option<FeatureStatus> {
    let t = lambda * F::from_count(n);
    (lb > -t && ub < t).then_some(FeatureStatus::ScreenedZero)
}

/// Hinge KKT: a margin certainly above one gives `alpha* = 0`, certainly
/// below one gives `y alpha* = 1`.
pub fn lp_screen_sample<F: Float>(y: F, lb: F, ub: F) -> Option<SampleStatus> {
    let one = F::one();
    if y > F::zero() {
        if lb > one {
            Some(SampleStatus::ScreenedAt(Pin::Zero))
        } else if ub < one {
            Some(SampleStatus::ScreenedAt(Pin::Plus))
        } else {
            None
        }
    } else if ub < -one {
        Some(SampleStatus::ScreenedAt(Pin::Zero))
    } else if lb > -one {
        Some(SampleStatus::ScreenedAt(Pin::Minus))
    } else {
        None
    }
}

/// All bounds for one feasible pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBounds<F> {
    pub features: Vec<(F, F)>,
    pub samples: Vec<(F, F)>,
}

pub fn lp_bounds<F: Float>(
    data: &Dataset<F>,
    lambda: F,
    w_hat: &[F],
    alpha_hat: &[F],
) -> Result<LpBounds<F>> {
    let dual = LpDualRegionParams::new(data, lambda, w_hat, alpha_hat)?;
    let primal = LpPrimalRegionParams::new(data, lambda, w_hat)?;
    Ok(LpBounds {
        features: (0..data.d()).map(|j| dual.feature_bounds(j)).collect(),
        samples: (0..data.n())
            .map(|i| primal.sample_bounds(data, i))
            .collect(),
    })
}

/// Applies the LP rules to an empty ledger.
pub fn lp_screen<F: Float>(data: &Dataset<F>, lambda: F, bounds: &LpBounds<F>) -> ScreeningLedger {
    let mut ledger = ScreeningLedger::new(data.d(), data.n());
    for (j, &(lb, ub)) in bounds.features.iter().enumerate() {
        if let Some(s) = lp_screen_feature(lb, ub, lambda, data.n()) {
            ledger.set_feature(j, s);
        }
    }
    for (i, &(lb, ub)) in bounds.samples.iter().enumerate() {
        if let Some(s) = lp_screen_sample(data.labels[i], lb, ub) {
            ledger.set_sample(i, s);
        }
    }
    ledger
}

fn check_pair<F: Float>(data: &Dataset<F>, lambda: F, w: &[F], alpha: &[F]) -> Result<()> {
    if w.len() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            got: w.len(),
        });
    }
    if alpha.len() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            got: alpha.len(),
        });
    }
    if !lp_dual_feasible(data, lambda, alpha, F::lit(1e-9)) {
        return Err(Error::InvalidParameter("dual point is not feasible".into()));
    }
    Ok(())
}
