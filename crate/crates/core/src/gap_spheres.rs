//! Duality-gap spheres and the bounds derived from them.
//!
//! For any primal/dual feasible pair with gap `G`:
//!
//! * the dual optimum lies within `r_D = sqrt(2 n G / gamma)` of the dual point
//!   (the dual is `gamma/n`-strongly concave),
//! * the primal optimum lies within `r_P = sqrt(2 G / lambda)` of the primal point
//!   (the primal is `lambda`-strongly convex).
//!
//! Once some samples have their optimal dual value certified (set `S`) or
//! some features are certified zero (set `F`), the corresponding coordinates
//! drop out of the sphere and the remaining radius shrinks; those are the
//! "tight" variants below.

use crate::scalar::{pos_part, Float};

/// Radii of the dual and primal gap spheres.
#[inline]
pub fn radii<F: Float>(gap: F, n: usize, gamma: F, lambda: F) -> (F, F) {
    let g = pos_part(gap);
    let two = F::lit(2.0);
    (
        (two * F::from_count(n) * g / gamma).sqrt(),
        (two * g / lambda).sqrt(),
    )
}

/// Sphere radii plus the squared displacement already absorbed by fixed
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereState<F> {
    pub r_dual: F,
    pub r_primal: F,
    /// `sum_{i in S} (alpha_hat_i - alpha*_i)^2`.
    pub fixed_dual_sq: F,
    /// `sum_{j in F} w_hat_j^2`.
    pub fixed_primal_sq: F,
}

impl<F: Float> SphereState<F> {
    pub fn new(gap: F, n: usize, gamma: F, lambda: F) -> Self {
        let (r_dual, r_primal) = radii(gap, n, gamma, lambda);
        Self {
            r_dual,
            r_primal,
            fixed_dual_sq: F::zero(),
            fixed_primal_sq: F::zero(),
        }
    }

    /// `sqrt(max(0, r_D^2 - fixed_dual_sq))`.
    #[inline]
    pub fn dual_residual_radius(&self) -> F {
        pos_part(self.r_dual * self.r_dual - self.fixed_dual_sq).sqrt()
    }

    /// `sqrt(max(0, r_P^2 - fixed_primal_sq))`.
    #[inline]
    pub fn primal_residual_radius(&self) -> F {
        pos_part(self.r_primal * self.r_primal - self.fixed_primal_sq).sqrt()
    }
}

/// Upper bound on `|X_{:j}^T alpha*|` from the plain dual sphere.
#[inline]
pub fn feature_bound_plain<F: Float>(col_dot: F, col_norm: F, r_dual: F) -> F {
    col_dot.abs() + col_norm * r_dual
}

/// Interval containing `x_i^T w*` from the plain primal sphere.
#[inline]
pub fn sample_bounds_plain<F: Float>(row_dot: F, row_norm: F, r_primal: F) -> (F, F) {
    let h = row_norm * r_primal;
    (row_dot - h, row_dot + h)
}

/// Interval containing `X_{:j}^T alpha*` once samples in `S` are fixed.
///
/// `col_dot_tilde` is `X_{:j}^T alpha_tilde` (fixed samples at their optimal
/// value), `masked_col_norm` is the norm of column `j` over unfixed samples.
#[inline]
pub fn feature_interval_tight<F: Float>(
    col_dot_tilde: F,
    masked_col_norm: F,
    sphere: &SphereState<F>,
) -> (F, F) {
    let h = masked_col_norm * sphere.dual_residual_radius();
    (col_dot_tilde - h, col_dot_tilde + h)
}

/// Upper bound on `|X_{:j}^T alpha*|` once samples in `S` are fixed.
#[inline]
pub fn feature_bound_tight<F: Float>(
    col_dot_tilde: F,
    masked_col_norm: F,
    sphere: &SphereState<F>,
) -> F {
    col_dot_tilde.abs() + masked_col_norm * sphere.dual_residual_radius()
}

/// Interval containing `x_i^T w*` once features in `F` are known to be zero.
///
/// `row_dot_tilde` is `x_i^T w_tilde` (screened features zeroed) and
/// `masked_row_norm` the norm of row `i` over unscreened features.
#[inline]
pub fn sample_bounds_tight<F: Float>(
    row_dot_tilde: F,
    masked_row_norm: F,
    sphere: &SphereState<F>,
) -> (F, F) {
    let h = masked_row_norm * sphere.primal_residual_radius();
    (row_dot_tilde - h, row_dot_tilde + h)
}
