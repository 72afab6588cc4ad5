//! Screening and keeping rules, the per-index ledger, and the alternating
//! feature/sample pass.
//!
//! Screening certifies that an index is inactive at the optimum (a zero
//! weight, or a dual coordinate at `-1`, `0` or `+1`); keeping certifies the
//! opposite. Both only ever move an index out of `Unknown`.

use serde::{Deserialize, Serialize};

use crate::gap_spheres::{feature_interval_tight, sample_bounds_tight, SphereState};
use crate::objective::ProblemSpec;
use crate::scalar::Float;
use crate::sparse_data::{Axis, Dataset, MaskedNorms, Task};

/// Extra margin subtracted from every screening/keeping threshold. Zero means
/// the rules fire exactly as derived.
pub const RULE_SLACK: f64 = 0.0;

/// Value a screened dual coordinate is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pin {
    Minus,
    Zero,
    Plus,
}

impl Pin {
    #[inline]
    pub fn value<F: Float>(self) -> F {
        match self {
            Pin::Minus => -F::one(),
            Pin::Zero => F::zero(),
            Pin::Plus => F::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureStatus {
    Unknown,
    ScreenedZero,
    KeptNonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SampleStatus {
    Unknown,
    ScreenedAt(Pin),
    KeptInterior,
}

/// Which index kinds a pass may screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreeningMode {
    Off,
    Feature,
    Sample,
    #[serde(rename = "simul")]
    Simultaneous,
}

impl ScreeningMode {
    #[inline]
    pub fn features(self) -> bool {
        matches!(self, ScreeningMode::Feature | ScreeningMode::Simultaneous)
    }

    #[inline]
    pub fn samples(self) -> bool {
        matches!(self, ScreeningMode::Sample | ScreeningMode::Simultaneous)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScreeningMode::Off => "off",
            ScreeningMode::Feature => "feature",
            ScreeningMode::Sample => "sample",
            ScreeningMode::Simultaneous => "simul",
        }
    }
}

impl std::str::FromStr for ScreeningMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(ScreeningMode::Off),
            "feature" => Ok(ScreeningMode::Feature),
            "sample" => Ok(ScreeningMode::Sample),
            "simul" | "simultaneous" => Ok(ScreeningMode::Simultaneous),
            other => Err(format!("unknown screening mode '{other}'")),
        }
    }
}

/// Status counters of a ledger.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerCounts {
    pub features_screened: usize,
    pub features_kept: usize,
    pub samples_zero: usize,
    pub samples_bound: usize,
    pub samples_kept: usize,
}

impl LedgerCounts {
    pub fn samples_screened(&self) -> usize {
        self.samples_zero + self.samples_bound
    }
}

/// Per-feature and per-sample knowledge about the optimum at one `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningLedger {
    features: Vec<FeatureStatus>,
    samples: Vec<SampleStatus>,
    counts: LedgerCounts,
}

impl ScreeningLedger {
    pub fn new(d: usize, n: usize) -> Self {
        Self {
            features: vec![FeatureStatus::Unknown; d],
            samples: vec![SampleStatus::Unknown; n],
            counts: LedgerCounts::default(),
        }
    }

    #[inline]
    pub fn feature(&self, j: usize) -> FeatureStatus {
        self.features[j]
    }

    #[inline]
    pub fn sample(&self, i: usize) -> SampleStatus {
        self.samples[i]
    }

    pub fn features(&self) -> &[FeatureStatus] {
        &self.features
    }

    pub fn samples(&self) -> &[SampleStatus] {
        &self.samples
    }

    pub fn counts(&self) -> LedgerCounts {
        self.counts
    }

    /// Records a feature decision.
    ///
    /// # Panics
    /// If the feature already has a status; knowledge never reverts.
    pub fn set_feature(&mut self, j: usize, status: FeatureStatus) {
        assert_eq!(
            self.features[j],
            FeatureStatus::Unknown,
            "feature {j} already decided"
        );
        match status {
            FeatureStatus::ScreenedZero => self.counts.features_screened += 1,
            FeatureStatus::KeptNonzero => self.counts.features_kept += 1,
            FeatureStatus::Unknown => return,
        }
        self.features[j] = status;
    }

    /// Records a sample decision.
    ///
    /// # Panics
    /// If the sample already has a status.
    pub fn set_sample(&mut self, i: usize, status: SampleStatus) {
        assert_eq!(
            self.samples[i],
            SampleStatus::Unknown,
            "sample {i} already decided"
        );
        match status {
            SampleStatus::ScreenedAt(Pin::Zero) => self.counts.samples_zero += 1,
            SampleStatus::ScreenedAt(_) => self.counts.samples_bound += 1,
            SampleStatus::KeptInterior => self.counts.samples_kept += 1,
            SampleStatus::Unknown => return,
        }
        self.samples[i] = status;
    }

    /// Fraction of features that are screened or kept.
    pub fn determined_rate_features(&self) -> f64 {
        if self.features.is_empty() {
            return 1.0;
        }
        (self.counts.features_screened + self.counts.features_kept) as f64
            / self.features.len() as f64
    }

    /// Fraction of samples that are screened or kept.
    pub fn determined_rate_samples(&self) -> f64 {
        if self.samples.is_empty() {
            return 1.0;
        }
        (self.counts.samples_screened() + self.counts.samples_kept) as f64
            / self.samples.len() as f64
    }

    /// Optimal dual value of sample `i` if it has been screened.
    pub fn pinned<F: Float>(&self, i: usize) -> Option<F> {
        match self.samples[i] {
            SampleStatus::ScreenedAt(p) => Some(p.value()),
            _ => None,
        }
    }
}

#[inline]
fn slack<F: Float>() -> F {
    F::lit(RULE_SLACK)
}

/// `UB(|X_{:j}^T alpha*|) <= lambda n  =>  w*_j = 0`.
#[inline]
pub fn screen_feature<F: Float>(bound: F, lambda: F, n: usize) -> Option<FeatureStatus> {
    (bound <= lambda * F::from_count(n) - slack()).then_some(FeatureStatus::ScreenedZero)
}

/// Sample screening for the smoothed hinge loss, from bounds on `x_i^T w*`.
pub fn screen_sample_classification<F: Float>(
    y: F,
    lb: F,
    ub: F,
    gamma: F,
) -> Option<SampleStatus> {
    let s = slack::<F>();
    let one = F::one();
    if y > F::zero() {
        if lb >= one + s {
            Some(SampleStatus::ScreenedAt(Pin::Zero))
        } else if ub <= one - gamma - s {
            Some(SampleStatus::ScreenedAt(Pin::Plus))
        } else {
            None
        }
    } else if ub <= -one - s {
        Some(SampleStatus::ScreenedAt(Pin::Zero))
    } else if lb >= gamma - one + s {
        Some(SampleStatus::ScreenedAt(Pin::Minus))
    } else {
        None
    }
}

/// Sample screening for the smoothed epsilon-insensitive loss.
pub fn screen_sample_regression<F: Float>(
    y: F,
    lb: F,
    ub: F,
    gamma: F,
    eps: F,
) -> Option<SampleStatus> {
    let s = slack::<F>();
    if lb >= y - eps + s && ub <= y + eps - s {
        Some(SampleStatus::ScreenedAt(Pin::Zero))
    } else if lb >= gamma + y + eps + s {
        Some(SampleStatus::ScreenedAt(Pin::Minus))
    } else if ub <= -gamma + y - eps - s {
        Some(SampleStatus::ScreenedAt(Pin::Plus))
    } else {
        None
    }
}

pub fn screen_sample<F: Float>(spec: &ProblemSpec<F>, y: F, lb: F, ub: F) -> Option<SampleStatus> {
    match spec.task {
        Task::Classification => screen_sample_classification(y, lb, ub, spec.gamma),
        Task::Regression => screen_sample_regression(y, lb, ub, spec.gamma, spec.eps),
    }
}

/// `|w_hat_j| - r_P > 0  =>  w*_j != 0`.
#[inline]
pub fn keep_feature_gap<F: Float>(w_hat_j: F, r_primal: F) -> Option<FeatureStatus> {
    (w_hat_j.abs() - r_primal > slack()).then_some(FeatureStatus::KeptNonzero)
}

/// `|a_i| - r_D > 0` and `|a_i| + r_D < 1`  =>  `alpha*_i` strictly interior.
#[inline]
pub fn keep_sample_gap<F: Float>(alpha_hat_i: F, r_dual: F) -> Option<SampleStatus> {
    let a = alpha_hat_i.abs();
    (a - r_dual > slack() && a + r_dual < F::one() - slack()).then_some(SampleStatus::KeptInterior)
}

/// A nonzero weight forces `|X_{:j}^T alpha*| = lambda n (1 + |w*_j|) > lambda n`,
/// so an interval for `X_{:j}^T alpha*` lying entirely beyond `+-lambda n`
/// certifies `w*_j != 0`.
#[inline]
pub fn keep_feature_kkt<F: Float>(lb: F, ub: F, lambda: F, n: usize) -> Option<FeatureStatus> {
    let t = lambda * F::from_count(n) + slack();
    (lb > t || ub < -t).then_some(FeatureStatus::KeptNonzero)
}

/// Interval for `x_i^T w*` strictly inside a quadratic branch of the loss
/// certifies an interior dual coordinate.
pub fn keep_sample_kkt<F: Float>(
    spec: &ProblemSpec<F>,
    y: F,
    lb: F,
    ub: F,
) -> Option<SampleStatus> {
    let s = slack::<F>();
    let g = spec.gamma;
    let one = F::one();
    let inside = |lo: F, hi: F| lb > lo + s && ub < hi - s;
    let kept = match spec.task {
        Task::Classification => {
            if y > F::zero() {
                inside(one - g, one)
            } else {
                inside(-one, g - one)
            }
        }
        Task::Regression => {
            let e = spec.eps;
            inside(-g + y - e, y - e) || inside(y + e, g + y + e)
        }
    };
    kept.then_some(SampleStatus::KeptInterior)
}

/// Frozen primal/dual point a pass is evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a, F> {
    pub w: &'a [F],
    pub alpha: &'a [F],
    /// Duality gap of `(w, alpha)`; negative rounding noise is clamped.
    pub gap: F,
    /// `X^T alpha`, if the caller already has it. Only entries of undecided
    /// features are read.
    pub xt_alpha: Option<&'a [F]>,
    /// `X w`, if the caller already has it. Only entries of undecided samples
    /// are read.
    pub x_w: Option<&'a [F]>,
}

impl<'a, F> Snapshot<'a, F> {
    pub fn new(w: &'a [F], alpha: &'a [F], gap: F) -> Self {
        Self {
            w,
            alpha,
            gap,
            xt_alpha: None,
            x_w: None,
        }
    }

    /// Reuses products the caller maintains anyway, so that a pass costs
    /// `O(n + d)` plus the entries of what it screens.
    pub fn with_products(mut self, xt_alpha: &'a [F], x_w: &'a [F]) -> Self {
        self.xt_alpha = Some(xt_alpha);
        self.x_w = Some(x_w);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassOptions {
    pub mode: ScreeningMode,
    pub max_rounds: usize,
    pub keeping: bool,
}

impl Default for PassOptions {
    fn default() -> Self {
        Self {
            mode: ScreeningMode::Simultaneous,
            max_rounds: 10,
            keeping: true,
        }
    }
}

/// Decisions taken in one round of a pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub features_screened: usize,
    pub features_kept: usize,
    pub samples_zero: usize,
    pub samples_bound: usize,
    pub samples_kept: usize,
}

impl RoundCounts {
    pub fn screened(&self) -> usize {
        self.features_screened + self.samples_zero + self.samples_bound
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PassReport {
    pub rounds: Vec<RoundCounts>,
    /// Features screened by this pass, in commit order.
    pub new_features: Vec<usize>,
    /// Samples screened by this pass with their pinned value.
    pub new_samples: Vec<(usize, Pin)>,
    /// Matrix entries read, plus one per bound evaluated.
    pub work: u64,
}

impl PassReport {
    pub fn total(&self) -> RoundCounts {
        self.rounds.iter().fold(RoundCounts::default(), |mut a, r| {
            a.features_screened += r.features_screened;
            a.features_kept += r.features_kept;
            a.samples_zero += r.samples_zero;
            a.samples_bound += r.samples_bound;
            a.samples_kept += r.samples_kept;
            a
        })
    }
}

/// Alternates feature and sample rules on a frozen snapshot.
///
/// Each round evaluates every undecided feature with the dual bound
/// tightened by the samples screened so far, commits, then evaluates every
/// undecided sample with the primal bound tightened by the features screened
/// so far, and commits. Rounds stop once one screens nothing or
/// `max_rounds` is reached. `norms` must mirror the ledger (screened rows and
/// columns deactivated) and is kept in sync.
///
/// `X^T alpha_tilde` and `X w_tilde` are formed once and then updated along
/// the rows and columns that get screened, so later rounds are cheap.
pub fn simultaneous_pass<F: Float>(
    spec: &ProblemSpec<F>,
    data: &Dataset<F>,
    snap: Snapshot<'_, F>,
    ledger: &mut ScreeningLedger,
    norms: &mut MaskedNorms<F>,
    opts: PassOptions,
) -> PassReport {
    let n = data.n();
    let d = data.d();
    let m = &data.matrix;
    let mut report = PassReport::default();
    if opts.mode == ScreeningMode::Off || opts.max_rounds == 0 {
        return report;
    }

    let mut sphere = SphereState::new(snap.gap, n, spec.gamma, spec.lambda);

    // X^T alpha_tilde, alpha_tilde having screened samples at their value
    let mut col_dots = match snap.xt_alpha {
        Some(v) => v.to_vec(),
        None => {
            report.work += m.nnz() as u64;
            m.tr_mul_vec(snap.alpha)
        }
    };
    for i in 0..n {
        if let Some(c) = ledger.pinned::<F>(i) {
            let diff = c - snap.alpha[i];
            sphere.fixed_dual_sq += diff * diff;
            if diff != F::zero() {
                let (cols, vals) = m.row(i);
                for (&j, &x) in cols.iter().zip(vals) {
                    col_dots[j] += diff * x;
                }
                report.work += cols.len() as u64;
            }
        }
    }
    // X w_tilde, w_tilde having screened features at zero
    let mut row_dots = match snap.x_w {
        Some(u) => u.to_vec(),
        None => {
            report.work += m.nnz() as u64;
            m.mul_vec(snap.w)
        }
    };
    for j in 0..d {
        if ledger.feature(j) == FeatureStatus::ScreenedZero && snap.w[j] != F::zero() {
            let wj = snap.w[j];
            sphere.fixed_primal_sq += wj * wj;
            let (rows, vals) = m.col(j);
            for (&i, &x) in rows.iter().zip(vals) {
                row_dots[i] -= wj * x;
            }
            report.work += rows.len() as u64;
        }
    }

    let single_kind = opts.mode != ScreeningMode::Simultaneous;
    let mut feat_buf: Vec<(usize, FeatureStatus)> = Vec::new();
    let mut samp_buf: Vec<(usize, SampleStatus)> = Vec::new();

    for _round in 0..opts.max_rounds {
        let mut rc = RoundCounts::default();

        if opts.mode.features() {
            feat_buf.clear();
            for j in 0..d {
                if ledger.feature(j) != FeatureStatus::Unknown {
                    continue;
                }
                report.work += 1;
                let norm = norms.col_sq_active(j).sqrt();
                let (lo, hi) = feature_interval_tight(col_dots[j], norm, &sphere);
                let bound = lo.abs().max(hi.abs());
                let decision = screen_feature(bound, spec.lambda, n).or_else(|| {
                    if !opts.keeping {
                        return None;
                    }
                    keep_feature_gap(snap.w[j], sphere.r_primal)
                        .or_else(|| keep_feature_kkt(lo, hi, spec.lambda, n))
                });
                if let Some(s) = decision {
                    feat_buf.push((j, s));
                }
            }
            for &(j, s) in &feat_buf {
                ledger.set_feature(j, s);
                if s == FeatureStatus::ScreenedZero {
                    rc.features_screened += 1;
                    norms.deactivate(m, Axis::Column, j);
                    report.work += m.col(j).0.len() as u64;
                    let wj = snap.w[j];
                    if wj != F::zero() {
                        sphere.fixed_primal_sq += wj * wj;
                        let (rows, vals) = m.col(j);
                        for (&i, &x) in rows.iter().zip(vals) {
                            row_dots[i] -= wj * x;
                        }
                        report.work += rows.len() as u64;
                    }
                    report.new_features.push(j);
                } else {
                    rc.features_kept += 1;
                }
            }
        }

        if opts.mode.samples() {
            samp_buf.clear();
            for i in 0..n {
                if ledger.sample(i) != SampleStatus::Unknown {
                    continue;
                }
                report.work += 1;
                let y = data.labels[i];
                let norm = norms.row_sq_active(i).sqrt();
                let (lb, ub) = sample_bounds_tight(row_dots[i], norm, &sphere);
                let decision = screen_sample(spec, y, lb, ub).or_else(|| {
                    if !opts.keeping {
                        return None;
                    }
                    keep_sample_gap(snap.alpha[i], sphere.r_dual)
                        .or_else(|| keep_sample_kkt(spec, y, lb, ub))
                });
                if let Some(s) = decision {
                    samp_buf.push((i, s));
                }
            }
            for &(i, s) in &samp_buf {
                ledger.set_sample(i, s);
                match s {
                    SampleStatus::ScreenedAt(p) => {
                        if p == Pin::Zero {
                            rc.samples_zero += 1;
                        } else {
                            rc.samples_bound += 1;
                        }
                        norms.deactivate(m, Axis::Row, i);
                        report.work += m.row(i).0.len() as u64;
                        let diff = p.value::<F>() - snap.alpha[i];
                        if diff != F::zero() {
                            sphere.fixed_dual_sq += diff * diff;
                            let (cols, vals) = m.row(i);
                            for (&j, &x) in cols.iter().zip(vals) {
                                col_dots[j] += diff * x;
                            }
                            report.work += cols.len() as u64;
                        }
                        report.new_samples.push((i, p));
                    }
                    _ => rc.samples_kept += 1,
                }
            }
        }

        let screened = rc.screened();
        report.rounds.push(rc);
        if screened == 0 || single_kind {
            break;
        }
        // within a round sample screening already used this round's features,
        // so another round only helps if samples were screened
        if rc.samples_zero + rc.samples_bound == 0 {
            break;
        }
    }
    report
}
