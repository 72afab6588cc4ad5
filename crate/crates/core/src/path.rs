//! Regularization paths, screening-rate grids and their reports.

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{lambda_max, primal_objective, ProblemSpec};
use crate::rules::{
    simultaneous_pass, FeatureStatus, LedgerCounts, PassOptions, Pin, SampleStatus,
    ScreeningLedger, ScreeningMode, Snapshot,
};
use crate::scalar::Float;
use crate::solver::{solve, HookRecord, SolverOptions, SolverState};
use crate::sparse_data::{Dataset, MaskedNorms, Task};

/// Serializes a float with 17 significant digits; non-finite values become
/// `null`.
pub fn sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(format_sig17(*x))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

fn sig17_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    struct One(f64);
    impl Serialize for One {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            sig17(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&One(x))?;
    }
    seq.end()
}

/// `d.dddddddddddddddde[+-]x`; `na` for non-finite values.
pub fn format_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "na".to_string()
    }
}

/// `lambda_max * r^(t / (T - 1))` for `t = 0..T`, descending.
pub fn lambda_grid<F: Float>(lambda_max: F, count: usize, min_ratio: F) -> Vec<F> {
    if count <= 1 {
        return vec![lambda_max];
    }
    let last = count - 1;
    (0..count)
        .map(|t| {
            if t == 0 {
                lambda_max
            } else if t == last {
                lambda_max * min_ratio
            } else {
                let e = F::from_count(t) / F::from_count(last);
                lambda_max * min_ratio.powf(e)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathConfig {
    pub lambda_count: usize,
    #[serde(serialize_with = "sig17")]
    pub min_ratio: f64,
    pub mode: ScreeningMode,
    /// Absolute gap tolerance per `lambda`; `None` uses the solver default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(serialize_with = "sig17")]
    pub trigger: f64,
    #[serde(serialize_with = "sig17")]
    pub stop_rate: f64,
    pub seed: u64,
    pub max_epochs: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            lambda_count: 100,
            min_ratio: 1e-4,
            mode: ScreeningMode::Simultaneous,
            tol: None,
            trigger: 0.1,
            stop_rate: 0.95,
            seed: 0,
            max_epochs: 100_000,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.lambda_count < 1 {
            return bad("lambda count must be >= 1".into());
        }
        if !(self.min_ratio > 0.0 && self.min_ratio <= 1.0) {
            return bad(format!(
                "lambda min ratio must be in (0, 1], got {}",
                self.min_ratio
            ));
        }
        if !(self.trigger > 0.0 && self.trigger < 1.0) {
            return bad(format!("trigger must be in (0, 1), got {}", self.trigger));
        }
        if !(self.stop_rate > 0.0 && self.stop_rate <= 1.0) {
            return bad(format!(
                "stop rate must be in (0, 1], got {}",
                self.stop_rate
            ));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad(format!("tolerance must be > 0, got {t}"));
            }
        }
        Ok(())
    }

    pub fn solver_options<F: Float>(&self) -> SolverOptions<F> {
        SolverOptions {
            tol: self.tol.map(F::lit),
            max_epochs: self.max_epochs,
            seed: self.seed,
            mode: self.mode,
            trigger: F::lit(self.trigger),
            stop_rate: F::lit(self.stop_rate),
            ..SolverOptions::default()
        }
    }
}

/// Loss parameters echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossEcho {
    pub task: Task,
    #[serde(serialize_with = "sig17")]
    pub gamma: f64,
    #[serde(serialize_with = "sig17")]
    pub eps: f64,
}

impl LossEcho {
    pub fn of<F: Float>(spec: &ProblemSpec<F>) -> Self {
        Self {
            task: spec.task,
            gamma: spec.gamma.as_f64(),
            eps: spec.eps.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HookEntry {
    pub epoch: usize,
    #[serde(serialize_with = "sig17")]
    pub gap: f64,
    pub rounds: usize,
    pub features_screened: usize,
    pub features_kept: usize,
    pub samples_zero: usize,
    pub samples_bound: usize,
    pub samples_kept: usize,
}

impl HookEntry {
    fn of<F: Float>(h: &HookRecord<F>) -> Self {
        Self {
            epoch: h.epoch,
            gap: h.gap.as_f64(),
            rounds: h.rounds,
            features_screened: h.decided.features_screened,
            features_kept: h.decided.features_kept,
            samples_zero: h.decided.samples_zero,
            samples_bound: h.decided.samples_bound,
            samples_kept: h.decided.samples_kept,
        }
    }
}

/// Wall-clock measurements, kept apart so reports can be compared without
/// them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    #[serde(serialize_with = "sig17")]
    pub rule_seconds: f64,
    #[serde(serialize_with = "sig17")]
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRecord {
    pub index: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    pub epochs: usize,
    pub converged: bool,
    #[serde(serialize_with = "sig17")]
    pub gap: f64,
    #[serde(serialize_with = "sig17")]
    pub primal: f64,
    #[serde(serialize_with = "sig17")]
    pub dual: f64,
    pub nnz_w: usize,
    pub counts: LedgerCounts,
    pub hooks: Vec<HookEntry>,
    pub work: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub loss: LossEcho,
    pub config: PathConfig,
    pub n: usize,
    pub d: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda_max: f64,
    pub total_epochs: usize,
    pub all_converged: bool,
    pub records: Vec<LambdaRecord>,
}

impl PathReport {
    pub fn strip_timing(&mut self) {
        for r in &mut self.records {
            r.timing = None;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per `lambda`; timing columns are last and empty when stripped.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(PATH_CSV_HEADER)?;
        for r in &self.records {
            let c = r.counts;
            let (rule, solve) = match r.timing {
                Some(t) => (format_sig17(t.rule_seconds), format_sig17(t.solve_seconds)),
                None => (String::new(), String::new()),
            };
            w.write_record([
                r.index.to_string(),
                format_sig17(r.lambda),
                r.epochs.to_string(),
                r.converged.to_string(),
                format_sig17(r.gap),
                format_sig17(r.primal),
                format_sig17(r.dual),
                r.nnz_w.to_string(),
                c.features_screened.to_string(),
                c.features_kept.to_string(),
                c.samples_zero.to_string(),
                c.samples_bound.to_string(),
                c.samples_kept.to_string(),
                r.hooks.len().to_string(),
                r.work.to_string(),
                rule,
                solve,
            ])?;
        }
        finish_csv(w)
    }
}

pub const PATH_CSV_HEADER: [&str; 17] = [
    "index",
    "lambda",
    "epochs",
    "converged",
    "gap",
    "primal",
    "dual",
    "nnz_w",
    "features_screened",
    "features_kept",
    "samples_zero",
    "samples_bound",
    "samples_kept",
    "hooks",
    "work",
    "rule_seconds",
    "solve_seconds",
];

pub const BENCH_CSV_HEADER: [&str; 6] = [
    "mode",
    "total_epochs",
    "work",
    "all_converged",
    "rule_seconds",
    "solve_seconds",
];

pub fn bench_to_csv(entries: &[BenchEntry]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_CSV_HEADER)?;
    for e in entries {
        let (rule, solve) = match e.timing {
            Some(t) => (format_sig17(t.rule_seconds), format_sig17(t.solve_seconds)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            e.mode.name().to_string(),
            e.total_epochs.to_string(),
            e.work.to_string(),
            e.all_converged.to_string(),
            rule,
            solve,
        ])?;
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Report plus the solutions along the path.
#[derive(Debug, Clone)]
pub struct PathRun<F> {
    pub report: PathReport,
    pub lambdas: Vec<F>,
    pub weights: Vec<Vec<F>>,
    pub alphas: Vec<Vec<F>>,
}

/// Solves the descending grid with warm starts; every `lambda` starts from
/// a fresh ledger.
pub fn run_path<F: Float>(
    spec: &ProblemSpec<F>,
    data: &Dataset<F>,
    cfg: &PathConfig,
) -> Result<PathRun<F>> {
    cfg.validate()?;
    let lmax = lambda_max(data)?;
    if !(lmax > F::zero()) {
        return Err(Error::DegenerateData(
            "lambda_max is zero; the data carries no signal".into(),
        ));
    }
    let lambdas = lambda_grid(lmax, cfg.lambda_count, F::lit(cfg.min_ratio));
    let opts = cfg.solver_options::<F>();
    let mut records = Vec::with_capacity(lambdas.len());
    let mut weights = Vec::with_capacity(lambdas.len());
    let mut alphas: Vec<Vec<F>> = Vec::with_capacity(lambdas.len());
    for (t, &lambda) in lambdas.iter().enumerate() {
        let s = spec.with_lambda(lambda)?;
        let init = alphas.last().map(|a| a.as_slice());
        let out = solve(&s, data, init, &opts, None);
        records.push(LambdaRecord {
            index: t,
            lambda: lambda.as_f64(),
            epochs: out.epochs,
            converged: out.converged,
            gap: out.gap.as_f64(),
            primal: out.pair.primal.as_f64(),
            dual: out.pair.dual.as_f64(),
            nnz_w: out.pair.w.iter().filter(|w| **w != F::zero()).count(),
            counts: out.ledger.counts(),
            hooks: out.hooks.iter().map(HookEntry::of).collect(),
            work: out.work,
            timing: Some(Timing {
                rule_seconds: out.rule_seconds,
                solve_seconds: out.solve_seconds,
            }),
        });
        weights.push(out.pair.w);
        alphas.push(out.pair.alpha);
    }
    let report = PathReport {
        loss: LossEcho::of(spec),
        config: *cfg,
        n: data.n(),
        d: data.d(),
        lambda_max: lmax.as_f64(),
        total_epochs: records.iter().map(|r| r.epochs).sum(),
        all_converged: records.iter().all(|r| r.converged),
        records,
    };
    Ok(PathRun {
        report,
        lambdas,
        weights,
        alphas,
    })
}

/// Settings of [`rate_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    /// Gap thresholds as multiples of `P(0)`, loosest first. A level of `0`
    /// evaluates the rules on the reference solution itself.
    pub gap_levels: Vec<f64>,
    /// Absolute gap of the reference solves.
    pub reference_tol: f64,
    /// `|w_j| <= truth_tol` counts as zero, `|alpha_i|` within it of 0 or 1
    /// counts as at a bound.
    pub truth_tol: f64,
    pub max_rounds: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            gap_levels: (0..=6).map(|k| 10f64.powi(-k)).collect(),
            reference_tol: 1e-12,
            truth_tol: 1e-9,
            max_rounds: 10,
            max_epochs: 100_000,
            seed: 0,
        }
    }
}

/// Rates of one rule configuration against the reference truth. `NaN`
/// marks an empty denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    #[serde(serialize_with = "sig17")]
    pub feature: f64,
    #[serde(serialize_with = "sig17")]
    pub sample_zero: f64,
    #[serde(serialize_with = "sig17")]
    pub sample_bound: f64,
    #[serde(serialize_with = "sig17")]
    pub feature_keep: f64,
    #[serde(serialize_with = "sig17")]
    pub sample_keep: f64,
}

impl Rates {
    fn minus(&self, o: &Rates) -> Rates {
        Rates {
            feature: self.feature - o.feature,
            sample_zero: self.sample_zero - o.sample_zero,
            sample_bound: self.sample_bound - o.sample_bound,
            feature_keep: self.feature_keep - o.feature_keep,
            sample_keep: self.sample_keep - o.sample_keep,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.feature,
            self.sample_zero,
            self.sample_bound,
            self.feature_keep,
            self.sample_keep,
        ]
    }
}

/// Index classes of a reference solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truth {
    pub features_zero: usize,
    pub features_active: usize,
    pub samples_zero: usize,
    pub samples_bound: usize,
    pub samples_interior: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCell {
    pub lambda_index: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub gap_level: f64,
    /// Gap of the snapshot the rules were evaluated on.
    #[serde(serialize_with = "sig17")]
    pub gap: f64,
    pub epoch: usize,
    pub individual: Rates,
    pub simultaneous: Rates,
    pub synergy_extra: Rates,
    /// Determinations contradicting the reference truth.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateGrid {
    pub loss: LossEcho,
    #[serde(serialize_with = "sig17_vec")]
    pub lambdas: Vec<f64>,
    #[serde(serialize_with = "sig17_vec")]
    pub gap_levels: Vec<f64>,
    pub truths: Vec<Truth>,
    pub cells: Vec<RateCell>,
}

pub const RATE_CSV_HEADER: [&str; 21] = [
    "lambda",
    "gap_level",
    "feat_rate",
    "sample_zero_rate",
    "sample_bound_rate",
    "feat_keep_rate",
    "sample_keep_rate",
    "simul_feat_rate",
    "simul_sample_zero_rate",
    "simul_sample_bound_rate",
    "simul_feat_keep_rate",
    "simul_sample_keep_rate",
    "extra_feat_rate",
    "extra_sample_zero_rate",
    "extra_sample_bound_rate",
    "extra_feat_keep_rate",
    "extra_sample_keep_rate",
    "lambda_index",
    "gap",
    "epoch",
    "errors",
];

impl RateGrid {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RATE_CSV_HEADER)?;
        for c in &self.cells {
            let mut row = vec![format_sig17(c.lambda), format_sig17(c.gap_level)];
            for r in [&c.individual, &c.simultaneous, &c.synergy_extra] {
                row.extend(r.as_array().iter().map(|&x| format_sig17(x)));
            }
            row.push(c.lambda_index.to_string());
            row.push(format_sig17(c.gap));
            row.push(c.epoch.to_string());
            row.push(c.errors.to_string());
            w.write_record(&row)?;
        }
        finish_csv(w)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

struct Reference {
    zero_feature: Vec<bool>,
    sample_class: Vec<Option<Pin>>,
    truth: Truth,
}

fn classify<F: Float>(w: &[F], alpha: &[F], tol: f64) -> Reference {
    let zero_feature: Vec<bool> = w.iter().map(|x| x.abs().as_f64() <= tol).collect();
    let sample_class: Vec<Option<Pin>> = alpha
        .iter()
        .map(|a| {
            let a = a.as_f64();
            if a.abs() <= tol {
                Some(Pin::Zero)
            } else if (a - 1.0).abs() <= tol {
                Some(Pin::Plus)
            } else if (a + 1.0).abs() <= tol {
                Some(Pin::Minus)
            } else {
                None
            }
        })
        .collect();
    let fz = zero_feature.iter().filter(|z| **z).count();
    let sz = sample_class
        .iter()
        .filter(|c| **c == Some(Pin::Zero))
        .count();
    let sb = sample_class
        .iter()
        .filter(|c| matches!(c, Some(Pin::Plus | Pin::Minus)))
        .count();
    Reference {
        truth: Truth {
            features_zero: fz,
            features_active: w.len() - fz,
            samples_zero: sz,
            samples_bound: sb,
            samples_interior: alpha.len() - sz - sb,
        },
        zero_feature,
        sample_class,
    }
}

fn rates_of(
    features: &ScreeningLedger,
    samples: &ScreeningLedger,
    reference: &Reference,
) -> (Rates, usize) {
    let t = &reference.truth;
    let mut errors = 0;
    let (mut fs, mut fk) = (0, 0);
    for (j, s) in features.features().iter().enumerate() {
        match s {
            FeatureStatus::ScreenedZero => {
                fs += 1;
                errors += usize::from(!reference.zero_feature[j]);
            }
            FeatureStatus::KeptNonzero => {
                fk += 1;
                errors += usize::from(reference.zero_feature[j]);
            }
            FeatureStatus::Unknown => {}
        }
    }
    let (mut sz, mut sb, mut sk) = (0, 0, 0);
    for (i, s) in samples.samples().iter().enumerate() {
        match s {
            SampleStatus::ScreenedAt(p) => {
                if *p == Pin::Zero {
                    sz += 1;
                } else {
                    sb += 1;
                }
                errors += usize::from(reference.sample_class[i] != Some(*p));
            }
            SampleStatus::KeptInterior => {
                sk += 1;
                errors += usize::from(reference.sample_class[i].is_some());
            }
            SampleStatus::Unknown => {}
        }
    }
    (
        Rates {
            feature: ratio(fs, t.features_zero),
            sample_zero: ratio(sz, t.samples_zero),
            sample_bound: ratio(sb, t.samples_bound),
            feature_keep: ratio(fk, t.features_active),
            sample_keep: ratio(sk, t.samples_interior),
        },
        errors,
    )
}

/// Screening/keeping rates along one cold-start trajectory per `lambda`.
///
/// At each gap level the individual rules (feature-only and sample-only)
/// and the simultaneous pass are evaluated on the same snapshot. As in
/// dynamic screening, each configuration keeps its ledger from one level to
/// the next, so rates never decrease as the gap tightens.
pub fn rate_report<F: Float>(
    spec: &ProblemSpec<F>,
    data: &Dataset<F>,
    lambdas: &[F],
    cfg: &RateConfig,
) -> Result<RateGrid> {
    if cfg.gap_levels.is_empty() {
        return Err(Error::InvalidParameter("no gap levels".into()));
    }
    let mut levels = cfg.gap_levels.clone();
    if levels.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::InvalidParameter("gap levels must be >= 0".into()));
    }
    levels.sort_by(|a, b| b.partial_cmp(a).expect("finite levels"));

    let mut truths = Vec::new();
    let mut cells = Vec::new();
    let mut warm: Option<Vec<F>> = None;
    for (t, &lambda) in lambdas.iter().enumerate() {
        let s = spec.with_lambda(lambda)?;
        let ref_opts = SolverOptions {
            tol: Some(F::lit(cfg.reference_tol)),
            max_epochs: cfg.max_epochs,
            seed: cfg.seed,
            mode: ScreeningMode::Off,
            ..SolverOptions::default()
        };
        let reference_out = solve(&s, data, warm.as_deref(), &ref_opts, None);
        let reference = classify(
            &reference_out.pair.w,
            &reference_out.pair.alpha,
            cfg.truth_tol,
        );
        truths.push(reference.truth);

        let p0 = primal_objective(&s, data, &vec![F::zero(); data.d()]);
        let mut traj = SolverState::new(s, data, None, cfg.seed);
        let mut gap = traj.objectives().2;

        let mut ind_f = (
            ScreeningLedger::new(data.d(), data.n()),
            MaskedNorms::new(&data.matrix),
        );
        let mut ind_s = (
            ScreeningLedger::new(data.d(), data.n()),
            MaskedNorms::new(&data.matrix),
        );
        let mut sim = (
            ScreeningLedger::new(data.d(), data.n()),
            MaskedNorms::new(&data.matrix),
        );

        for &level in &levels {
            let (w, alpha, snap_gap, epoch) = if level == 0.0 {
                (
                    reference_out.pair.w.clone(),
                    reference_out.pair.alpha.clone(),
                    reference_out.gap,
                    reference_out.epochs,
                )
            } else {
                let target = F::lit(level) * p0;
                while gap > target && traj.epoch() < cfg.max_epochs {
                    traj.run_epoch();
                    gap = traj.objectives().2;
                }
                (traj.w().to_vec(), traj.alpha().to_vec(), gap, traj.epoch())
            };
            let snap = Snapshot::new(&w, &alpha, snap_gap);
            let run = |mode: ScreeningMode, st: &mut (ScreeningLedger, MaskedNorms<F>)| {
                let opts = PassOptions {
                    mode,
                    max_rounds: cfg.max_rounds,
                    keeping: true,
                };
                simultaneous_pass(&s, data, snap, &mut st.0, &mut st.1, opts);
            };
            run(ScreeningMode::Feature, &mut ind_f);
            run(ScreeningMode::Sample, &mut ind_s);
            run(ScreeningMode::Simultaneous, &mut sim);

            let (individual, e1) = rates_of(&ind_f.0, &ind_s.0, &reference);
            let (simultaneous, e2) = rates_of(&sim.0, &sim.0, &reference);
            cells.push(RateCell {
                lambda_index: t,
                lambda: lambda.as_f64(),
                gap_level: level,
                gap: snap_gap.as_f64(),
                epoch,
                synergy_extra: simultaneous.minus(&individual),
                individual,
                simultaneous,
                errors: e1 + e2,
            });
        }
        warm = Some(reference_out.pair.alpha);
    }
    Ok(RateGrid {
        loss: LossEcho::of(spec),
        lambdas: lambdas.iter().map(|l| l.as_f64()).collect(),
        gap_levels: levels,
        truths,
        cells,
    })
}

/// Path timing per screening mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchEntry {
    pub mode: ScreeningMode,
    pub total_epochs: usize,
    pub work: u64,
    pub all_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

pub fn bench<F: Float>(
    spec: &ProblemSpec<F>,
    data: &Dataset<F>,
    cfg: &PathConfig,
    modes: &[ScreeningMode],
) -> Result<Vec<BenchEntry>> {
    modes
        .iter()
        .map(|&mode| {
            let run = run_path(spec, data, &PathConfig { mode, ..*cfg })?;
            let r = &run.report.records;
            Ok(BenchEntry {
                mode,
                total_epochs: run.report.total_epochs,
                work: r.iter().map(|x| x.work).sum(),
                all_converged: run.report.all_converged,
                timing: Some(Timing {
                    rule_seconds: r
                        .iter()
                        .filter_map(|x| x.timing)
                        .map(|t| t.rule_seconds)
                        .sum(),
                    solve_seconds: r
                        .iter()
                        .filter_map(|x| x.timing)
                        .map(|t| t.solve_seconds)
                        .sum(),
                }),
            })
        })
        .collect()
}
