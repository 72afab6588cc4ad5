//! Dual coordinate ascent for the smoothed problems.
//!
//! Each step maximizes the dual exactly along one sample coordinate. The
//! restricted dual is concave and piecewise quadratic, so its derivative is
//! monotone and piecewise linear: the kinks are collected, the sign change
//! is located by binary search over them, and the root inside the final
//! linear piece is solved in closed form.
//!
//! Screened samples leave the iteration with their dual value pinned; their
//! contribution to `X^T alpha / (lambda n)` lives in `v_fixed`. Screened
//! features are masked out of every dot product and pinned to zero.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::objective::{
    clip_dual, loss_conj_value, loss_fenchel_gap, loss_value, penalty_value, soft_threshold,
    ProblemSpec, SolutionPair,
};
use crate::rules::{
    simultaneous_pass, FeatureStatus, LedgerCounts, PassOptions, Pin, RoundCounts, SampleStatus,
    ScreeningLedger, ScreeningMode, Snapshot,
};
use crate::scalar::{pos_part, CompensatedSum, Float};
use crate::sparse_data::{Axis, Dataset, MaskedNorms, Task};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<F> {
    /// Absolute gap tolerance; `None` means `1e-6 * max(1, P(w_init))`.
    pub tol: Option<F>,
    pub max_epochs: usize,
    pub seed: u64,
    pub mode: ScreeningMode,
    /// A hook fires once the gap has shrunk by this factor since the last one.
    pub trigger: F,
    /// Hooks stop once the determined rates of the screened kinds reach this.
    pub stop_rate: F,
    pub max_rounds: usize,
    pub keeping: bool,
}

impl<F: Float> Default for SolverOptions<F> {
    fn default() -> Self {
        Self {
            tol: None,
            max_epochs: 100_000,
            seed: 0,
            mode: ScreeningMode::Simultaneous,
            trigger: F::lit(0.1),
            stop_rate: F::lit(0.95),
            max_rounds: 10,
            keeping: true,
        }
    }
}

/// Passed to the progress callback after every epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochInfo<F> {
    pub epoch: usize,
    pub gap: F,
    pub counts: LedgerCounts,
}

/// One firing of the screening hook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HookRecord<F> {
    pub epoch: usize,
    pub gap: F,
    pub rounds: usize,
    pub decided: RoundCounts,
}

#[derive(Debug, Clone)]
pub struct SolveOutput<F> {
    /// Final pair, objectives evaluated on the full problem.
    pub pair: SolutionPair<F>,
    /// Gap of the reduced problem; this is what the tolerance is checked on.
    pub gap: F,
    pub epochs: usize,
    pub converged: bool,
    pub ledger: ScreeningLedger,
    pub hooks: Vec<HookRecord<F>>,
    /// Matrix entries touched by steps, gap evaluations and rule passes.
    pub work: u64,
    pub rule_seconds: f64,
    pub solve_seconds: f64,
}

/// Derivative of `a -> loss*(-a)`, taken from the left or right at a kink.
#[inline]
fn conj_slope<F: Float>(spec: &ProblemSpec<F>, y: F, a: F, right: bool) -> F {
    let base = spec.gamma * a - y;
    match spec.task {
        Task::Classification => base,
        Task::Regression => {
            let s = if a > F::zero() || (a == F::zero() && right) {
                F::one()
            } else {
                -F::one()
            };
            base + spec.eps * s
        }
    }
}

/// Scaled negative derivative of the dual restricted to one coordinate:
/// `phi(a) = sum_j x_j st(vt_j + (a - a0) x_j / s) + d/da loss*(-a)`.
/// The dual increases where `phi < 0`.
#[inline]
fn phi<F: Float>(
    spec: &ProblemSpec<F>,
    y: F,
    terms: &[(F, F)],
    a0: F,
    scale: F,
    a: F,
    right: bool,
) -> F {
    let delta = (a - a0) / scale;
    let mut acc = conj_slope(spec, y, a, right);
    for &(x, vt) in terms {
        acc += x * soft_threshold(vt + delta * x);
    }
    acc
}

/// Exact maximizer of the dual along one coordinate.
///
/// `terms` holds `(x_ij, v_j)` for the active features of the row, `a0` the
/// current value and `scale = lambda n`. `breakpoints` is scratch space.
pub fn coordinate_argmax<F: Float>(
    spec: &ProblemSpec<F>,
    y: F,
    terms: &[(F, F)],
    a0: F,
    scale: F,
    breakpoints: &mut Vec<F>,
) -> F {
    let (lo, hi) = spec.dual_box(y);
    let f = |a: F, right: bool| phi(spec, y, terms, a0, scale, a, right);
    if f(lo, true) >= F::zero() {
        return lo;
    }
    if f(hi, false) <= F::zero() {
        return hi;
    }

    breakpoints.clear();
    breakpoints.push(lo);
    for &(x, vt) in terms {
        for edge in [F::one(), -F::one()] {
            let b = a0 + (edge - vt) * scale / x;
            if b > lo && b < hi {
                breakpoints.push(b);
            }
        }
    }
    if spec.task == Task::Regression && lo < F::zero() && hi > F::zero() {
        breakpoints.push(F::zero());
    }
    breakpoints.push(hi);
    let inner = &mut breakpoints[1..];
    let last = inner.len() - 1;
    inner[..last].sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let pts = &*breakpoints;

    // smallest k >= 1 with phi(pts[k]+) >= 0; phi(hi+) counts as +inf
    let (mut left, mut right) = (1usize, pts.len() - 1);
    while left < right {
        let mid = (left + right) / 2;
        if f(pts[mid], true) >= F::zero() {
            right = mid;
        } else {
            left = mid + 1;
        }
    }
    let k = left;
    let p1 = pts[k];
    let f1 = f(p1, false);
    if f1 <= F::zero() {
        return p1;
    }
    let p0 = pts[k - 1];
    let f0 = f(p0, true);
    if !(f0 < F::zero()) {
        return p0;
    }
    let a = p0 - f0 * (p1 - p0) / (f1 - f0);
    a.max(p0).min(p1)
}

/// Mutable solver state at one `lambda`.
#[derive(Debug, Clone)]
pub struct SolverState<'a, F> {
    spec: ProblemSpec<F>,
    data: &'a Dataset<F>,
    alpha: Vec<F>,
    /// Contribution of free samples to `X^T alpha / (lambda n)`, on
    /// unscreened columns (screened ones read 0).
    v: Vec<F>,
    /// Contribution of fixed samples.
    v_fixed: Vec<F>,
    w: Vec<F>,
    fixed: Vec<bool>,
    order: Vec<usize>,
    norms: MaskedNorms<F>,
    ledger: ScreeningLedger,
    rng: ChaCha8Rng,
    epoch: usize,
    work: u64,
    scale: F,
    terms: Vec<(F, F)>,
    breakpoints: Vec<F>,
    // rows restricted to unscreened columns, rebuilt when features drop out
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<F>,
    // X w as of the last objective evaluation, valid while `u_fresh`
    u: Vec<F>,
    u_fresh: bool,
    xt_alpha: Vec<F>,
}

impl<'a, F: Float> SolverState<'a, F> {
    /// Cold start at `alpha = 0` or warm start from `init` (clipped into the
    /// dual box).
    pub fn new(spec: ProblemSpec<F>, data: &'a Dataset<F>, init: Option<&[F]>, seed: u64) -> Self {
        let n = data.n();
        let d = data.d();
        let mut alpha = match init {
            Some(a) => {
                assert_eq!(a.len(), n, "warm start has wrong length");
                a.to_vec()
            }
            None => vec![F::zero(); n],
        };
        clip_dual(&spec, &data.labels, &mut alpha);
        let mut s = Self {
            spec,
            data,
            alpha,
            v: vec![F::zero(); d],
            v_fixed: vec![F::zero(); d],
            w: vec![F::zero(); d],
            fixed: vec![false; n],
            order: (0..n).collect(),
            norms: MaskedNorms::new(&data.matrix),
            ledger: ScreeningLedger::new(d, n),
            rng: ChaCha8Rng::seed_from_u64(seed),
            epoch: 0,
            work: 0,
            scale: spec.lambda * F::from_count(n.max(1)),
            terms: Vec::new(),
            breakpoints: Vec::new(),
            row_ptr: Vec::with_capacity(n + 1),
            row_cols: Vec::new(),
            row_vals: Vec::new(),
            u: vec![F::zero(); n],
            u_fresh: false,
            xt_alpha: vec![F::zero(); d],
        };
        s.compact_rows();
        s.refresh();
        s
    }

    pub fn spec(&self) -> &ProblemSpec<F> {
        &self.spec
    }

    pub fn alpha(&self) -> &[F] {
        &self.alpha
    }

    pub fn w(&self) -> &[F] {
        &self.w
    }

    pub fn v(&self) -> &[F] {
        &self.v
    }

    pub fn v_fixed(&self) -> &[F] {
        &self.v_fixed
    }

    pub fn ledger(&self) -> &ScreeningLedger {
        &self.ledger
    }

    pub fn norms(&self) -> &MaskedNorms<F> {
        &self.norms
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    fn compact_rows(&mut self) {
        let m = &self.data.matrix;
        let active = self.norms.active_cols();
        self.row_ptr.clear();
        self.row_cols.clear();
        self.row_vals.clear();
        self.row_ptr.push(0);
        for i in 0..self.data.n() {
            let (cols, vals) = m.row(i);
            for (&j, &x) in cols.iter().zip(vals) {
                if active[j] && x != F::zero() {
                    self.row_cols.push(j);
                    self.row_vals.push(x);
                }
            }
            self.row_ptr.push(self.row_cols.len());
        }
        self.work += m.nnz() as u64;
    }

    /// `x_i^T w` over unscreened columns.
    #[inline]
    fn active_row_dot(&self, i: usize) -> F {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.row_cols[a..b]
            .iter()
            .zip(&self.row_vals[a..b])
            .fold(F::zero(), |acc, (&j, &x)| acc + x * self.w[j])
    }

    /// Rebuilds `v`, `v_fixed` and `w` from `alpha`.
    pub fn refresh(&mut self) {
        self.u_fresh = false;
        self.v.iter_mut().for_each(|x| *x = F::zero());
        self.v_fixed.iter_mut().for_each(|x| *x = F::zero());
        for i in 0..self.data.n() {
            let a = self.alpha[i];
            if a == F::zero() {
                continue;
            }
            let target = if self.fixed[i] {
                &mut self.v_fixed
            } else {
                &mut self.v
            };
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for (&j, &x) in self.row_cols[lo..hi].iter().zip(&self.row_vals[lo..hi]) {
                target[j] += a * x;
            }
        }
        for j in 0..self.data.d() {
            self.v[j] /= self.scale;
            self.v_fixed[j] /= self.scale;
            self.w[j] = if self.norms.is_col_active(j) {
                soft_threshold(self.v[j] + self.v_fixed[j])
            } else {
                F::zero()
            };
        }
        self.work += self.row_cols.len() as u64;
    }

    /// Exact maximization of the dual along coordinate `i`.
    ///
    /// # Panics
    /// If sample `i` is fixed.
    pub fn coordinate_step(&mut self, i: usize) {
        assert!(!self.fixed[i], "sample {i} is fixed");
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let cols = &self.row_cols[lo..hi];
        let vals = &self.row_vals[lo..hi];
        self.terms.clear();
        for (&j, &x) in cols.iter().zip(vals) {
            self.terms.push((x, self.v[j] + self.v_fixed[j]));
        }
        self.work += cols.len() as u64;
        let y = self.data.labels[i];
        let a0 = self.alpha[i];
        let a = coordinate_argmax(
            &self.spec,
            y,
            &self.terms,
            a0,
            self.scale,
            &mut self.breakpoints,
        );
        let delta = a - a0;
        if delta == F::zero() {
            return;
        }
        self.alpha[i] = a;
        self.u_fresh = false;
        let step = delta / self.scale;
        for (&j, &x) in cols.iter().zip(vals) {
            self.v[j] += step * x;
            self.w[j] = soft_threshold(self.v[j] + self.v_fixed[j]);
        }
    }

    /// One pass over the free samples. The permutation is drawn over all
    /// samples and fixed ones are skipped, so the random stream does not
    /// depend on what has been screened.
    pub fn run_epoch(&mut self) {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for &i in &order {
            if !self.fixed[i] {
                self.coordinate_step(i);
            }
        }
        self.order = order;
        self.epoch += 1;
    }

    /// Pins sample `i` at `pin`, moving its contribution into `v_fixed`.
    pub fn fix_sample(&mut self, i: usize, pin: Pin) {
        assert!(!self.fixed[i], "sample {i} fixed twice");
        match self.ledger.sample(i) {
            SampleStatus::Unknown => self.ledger.set_sample(i, SampleStatus::ScreenedAt(pin)),
            SampleStatus::ScreenedAt(p) => assert_eq!(p, pin, "sample {i} pinned inconsistently"),
            SampleStatus::KeptInterior => panic!("sample {i} was certified interior"),
        }
        if self.norms.is_row_active(i) {
            self.norms.deactivate(&self.data.matrix, Axis::Row, i);
        }
        let c: F = pin.value();
        let old = self.alpha[i];
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        for (&j, &x) in self.row_cols[lo..hi].iter().zip(&self.row_vals[lo..hi]) {
            self.v[j] -= old * x / self.scale;
            self.v_fixed[j] += c * x / self.scale;
            self.w[j] = soft_threshold(self.v[j] + self.v_fixed[j]);
        }
        self.work += (hi - lo) as u64;
        self.alpha[i] = c;
        self.fixed[i] = true;
        self.u_fresh = false;
    }

    /// Pins feature `j` at zero and drops its column.
    pub fn fix_feature(&mut self, j: usize) {
        self.pin_feature(j);
        self.compact_rows();
    }

    fn pin_feature(&mut self, j: usize) {
        match self.ledger.feature(j) {
            FeatureStatus::Unknown => self.ledger.set_feature(j, FeatureStatus::ScreenedZero),
            FeatureStatus::ScreenedZero => {}
            FeatureStatus::KeptNonzero => panic!("feature {j} was certified nonzero"),
        }
        if self.norms.is_col_active(j) {
            self.norms.deactivate(&self.data.matrix, Axis::Column, j);
        }
        if self.w[j] != F::zero() {
            self.u_fresh = false;
        }
        self.w[j] = F::zero();
        self.v[j] = F::zero();
        self.v_fixed[j] = F::zero();
    }

    /// `(P(w), D(alpha), gap)` of the problem restricted to unscreened
    /// features. Its optimum coincides with the full one, so the gap bounds
    /// both distances to the optimum exactly as the full gap would.
    ///
    /// The gap is the mean per-sample Fenchel-Young residual rather than the
    /// difference of the two objectives, which keeps it accurate far below
    /// the rounding level of `P` itself.
    pub fn objectives(&mut self) -> (F, F, F) {
        let spec = &self.spec;
        let data = self.data;
        let n = F::from_count(data.n().max(1));
        let mut loss = CompensatedSum::default();
        let mut conj_loss = CompensatedSum::default();
        let mut residual = CompensatedSum::default();
        for i in 0..data.n() {
            let y = data.labels[i];
            let a = self.alpha[i];
            let u = self.active_row_dot(i);
            self.u[i] = u;
            loss.add(loss_value(spec, y, u));
            conj_loss.add(loss_conj_value(spec, y, -a));
            residual.add(loss_fenchel_gap(spec, y, u, a));
        }
        let primal = spec.lambda * penalty_value(&self.w) + loss.value() / n;
        let active = self.norms.active_cols();
        let mut conj_pen = CompensatedSum::default();
        for j in 0..data.d() {
            if active[j] {
                let t = pos_part((self.v[j] + self.v_fixed[j]).abs() - F::one());
                conj_pen.add(t * t);
            }
        }
        let dual = -spec.lambda * conj_pen.value() / F::lit(2.0) - conj_loss.value() / n;
        self.work += self.row_cols.len() as u64;
        self.u_fresh = true;
        (primal, dual, residual.value() / n)
    }

    /// Runs one screening pass on the current iterate and applies its
    /// decisions.
    pub fn screening_hook(&mut self, gap: F, opts: PassOptions) -> HookRecord<F> {
        if !self.u_fresh {
            for i in 0..self.data.n() {
                self.u[i] = self.active_row_dot(i);
            }
            self.work += self.row_cols.len() as u64;
            self.u_fresh = true;
        }
        let active = self.norms.active_cols();
        for (j, x) in self.xt_alpha.iter_mut().enumerate() {
            *x = if active[j] {
                (self.v[j] + self.v_fixed[j]) * self.scale
            } else {
                F::zero()
            };
        }
        let report = simultaneous_pass(
            &self.spec,
            self.data,
            Snapshot::new(&self.w, &self.alpha, gap).with_products(&self.xt_alpha, &self.u),
            &mut self.ledger,
            &mut self.norms,
            opts,
        );
        self.work += report.work;
        for &j in &report.new_features {
            self.pin_feature(j);
        }
        if !report.new_features.is_empty() {
            self.compact_rows();
        }
        for &(i, pin) in &report.new_samples {
            self.fix_sample(i, pin);
        }
        HookRecord {
            epoch: self.epoch,
            gap,
            rounds: report.rounds.len(),
            decided: report.total(),
        }
    }

    /// Full-problem pair for the current iterate.
    pub fn pair(&self) -> SolutionPair<F> {
        SolutionPair::from_parts(
            &self.spec,
            self.data,
            self.w.clone(),
            self.alpha.clone(),
            crate::objective::dual_direction(&self.spec, self.data, &self.alpha),
        )
    }

    fn rates_reached(&self, mode: ScreeningMode, stop_rate: F) -> bool {
        let t = stop_rate.as_f64();
        let f = self.ledger.determined_rate_features() >= t;
        let s = self.ledger.determined_rate_samples() >= t;
        match mode {
            ScreeningMode::Off => true,
            ScreeningMode::Feature => f,
            ScreeningMode::Sample => s,
            ScreeningMode::Simultaneous => f && s,
        }
    }
}

/// Solves one `lambda` with gap-triggered dynamic screening.
pub fn solve<F: Float>(
    spec: &ProblemSpec<F>,
    data: &Dataset<F>,
    init: Option<&[F]>,
    opts: &SolverOptions<F>,
    mut progress: Option<&mut dyn FnMut(&EpochInfo<F>)>,
) -> SolveOutput<F> {
    let start = Instant::now();
    let mut rule_seconds = 0.0;
    let mut st = SolverState::new(*spec, data, init, opts.seed);
    let pass = PassOptions {
        mode: opts.mode,
        max_rounds: opts.max_rounds,
        keeping: opts.keeping,
    };

    let (p0, _, mut gap) = st.objectives();
    let tol = opts.tol.unwrap_or_else(|| F::lit(1e-6) * p0.max(F::one()));
    let mut hooks = Vec::new();
    let mut hooks_live = opts.mode != ScreeningMode::Off;
    let mut last_hook_gap = F::infinity();
    let mut converged = false;

    loop {
        if gap <= tol {
            // drop accumulated rounding before trusting the certificate
            st.refresh();
            gap = st.objectives().2;
            if gap <= tol {
                converged = true;
                break;
            }
        }
        if st.epoch >= opts.max_epochs {
            break;
        }
        if hooks_live && gap <= opts.trigger * last_hook_gap {
            let t = Instant::now();
            hooks.push(st.screening_hook(gap, pass));
            rule_seconds += t.elapsed().as_secs_f64();
            last_hook_gap = gap;
            if st.rates_reached(opts.mode, opts.stop_rate) {
                hooks_live = false;
            }
            gap = st.objectives().2;
            if gap <= tol {
                continue;
            }
        }
        st.run_epoch();
        if st.epoch % 32 == 0 {
            st.refresh();
        }
        gap = st.objectives().2;
        if let Some(cb) = progress.as_mut() {
            cb(&EpochInfo {
                epoch: st.epoch,
                gap,
                counts: st.ledger.counts(),
            });
        }
    }

    SolveOutput {
        pair: st.pair(),
        gap,
        epochs: st.epoch,
        converged,
        ledger: st.ledger.clone(),
        hooks,
        work: st.work,
        rule_seconds,
        solve_seconds: start.elapsed().as_secs_f64() - rule_seconds,
    }
}
