//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simulscreen::gap_spheres::{
    feature_bound_plain, feature_bound_tight, radii, sample_bounds_plain, sample_bounds_tight,
    SphereState,
};
use simulscreen::lp_svm::{
    lp_bounds, lp_dual_feasible, lp_dual_value, lp_primal_value, lp_screen, project_dual,
    LpDualRegionParams, LpPrimalRegionParams,
};
use simulscreen::objective::{
    lambda_max, loss_conj_value, loss_fenchel_gap, loss_grad, loss_value, penalty_conj_value,
    penalty_value, soft_threshold,
};
use simulscreen::path::{lambda_grid, rate_report, run_path, PathConfig, RateConfig};
use simulscreen::rules::{simultaneous_pass, PassOptions, PassReport, Snapshot};
use simulscreen::synth::{generate, SynthConfig};
use simulscreen::{
    Dataset64, FeatureStatus, MaskedNorms, SampleStatus, ScreeningLedger, ScreeningMode, Spec64,
    SparseDesignMatrix, Task,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const LEVELS: [f64; 9] = [1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const SWEEP_INSTANCES: usize = 1000;
const REFERENCE_TOL: f64 = 1e-18;

#[derive(Default)]
struct Sweep {
    instances: usize,
    skipped: usize,
    reference_failures: usize,
    snapshots: usize,
    max_reference_gap: f64,
    // safety
    features_screened: usize,
    samples_screened: usize,
    false_features: usize,
    false_samples: usize,
    // keeping
    features_kept: usize,
    samples_kept: usize,
    false_feature_keeps: usize,
    false_sample_keeps: usize,
    overlaps: usize,
    // synergy
    inequality_checks: usize,
    inequality_violations: usize,
    superset_violations: usize,
    later_round_passes: usize,
    later_round_instances: usize,
    // spheres
    sphere_violations: usize,
    worst_sphere_ratio: f64,
}

fn pass_on(
    spec: &Spec64,
    data: &Dataset64,
    snap: &Snap,
    mode: ScreeningMode,
) -> (ScreeningLedger, PassReport) {
    let mut ledger = ScreeningLedger::new(data.d(), data.n());
    let mut norms = MaskedNorms::new(&data.matrix);
    let s = Snapshot::new(&snap.w, &snap.alpha, snap.gap);
    let opts = PassOptions {
        mode,
        ..PassOptions::default()
    };
    let report = simultaneous_pass(spec, data, s, &mut ledger, &mut norms, opts);
    (ledger, report)
}

/// Checks that tightened bounds never exceed the plain ones for the state a
/// simultaneous pass ended in. Returns (checks, violations).
fn synergy_inequalities(
    spec: &Spec64,
    data: &Dataset64,
    snap: &Snap,
    ledger: &ScreeningLedger,
) -> (usize, usize) {
    let m = &data.matrix;
    let (rd, rp) = radii(snap.gap, data.n(), spec.gamma, spec.lambda);
    let mut sphere = SphereState::new(snap.gap, data.n(), spec.gamma, spec.lambda);
    let mut alpha_t = snap.alpha.clone();
    let mut row_on = vec![true; data.n()];
    for (i, a) in alpha_t.iter_mut().enumerate() {
        if let SampleStatus::ScreenedAt(p) = ledger.sample(i) {
            let c: f64 = p.value();
            sphere.fixed_dual_sq += (snap.alpha[i] - c).powi(2);
            *a = c;
            row_on[i] = false;
        }
    }
    let mut w_t = snap.w.clone();
    let mut col_on = vec![true; data.d()];
    for (j, w) in w_t.iter_mut().enumerate() {
        if ledger.feature(j) == FeatureStatus::ScreenedZero {
            sphere.fixed_primal_sq += snap.w[j] * snap.w[j];
            *w = 0.0;
            col_on[j] = false;
        }
    }
    let close = |tight: f64, plain: f64| tight <= plain + 1e-10 * (1.0 + plain.abs());
    let (mut checks, mut bad) = (0, 0);
    for j in 0..data.d() {
        let (rows, vals) = m.col(j);
        let masked: f64 = rows
            .iter()
            .zip(vals)
            .filter(|(&i, _)| row_on[i])
            .map(|(_, x)| x * x)
            .sum();
        let plain = feature_bound_plain(m.col_dot(j, &snap.alpha), m.col_sq_norm(j).sqrt(), rd);
        let tight = feature_bound_tight(m.col_dot(j, &alpha_t), masked.sqrt(), &sphere);
        checks += 1;
        bad += usize::from(!close(tight, plain));
    }
    for i in 0..data.n() {
        let (cols, vals) = m.row(i);
        let masked: f64 = cols
            .iter()
            .zip(vals)
            .filter(|(&j, _)| col_on[j])
            .map(|(_, x)| x * x)
            .sum();
        let (lb, ub) = sample_bounds_plain(m.row_dot(i, &snap.w), m.row_sq_norm(i).sqrt(), rp);
        let (tlb, tub) = sample_bounds_tight(m.row_dot(i, &w_t), masked.sqrt(), &sphere);
        checks += 2;
        bad += usize::from(!close(-tlb, -lb)) + usize::from(!close(tub, ub));
    }
    (checks, bad)
}

fn screened_features(l: &ScreeningLedger) -> Vec<bool> {
    l.features()
        .iter()
        .map(|s| *s == FeatureStatus::ScreenedZero)
        .collect()
}

fn screened_samples(l: &ScreeningLedger) -> Vec<bool> {
    l.samples()
        .iter()
        .map(|s| matches!(s, SampleStatus::ScreenedAt(_)))
        .collect()
}

fn run_sweep() -> Sweep {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let mut s = Sweep::default();
    while s.instances < SWEEP_INSTANCES {
        let Some(inst) = random_instance(&mut rng) else {
            s.skipped += 1;
            continue;
        };
        s.instances += 1;
        let (spec, data) = (&inst.spec, &inst.data);
        let reference = reference(spec, data, REFERENCE_TOL);
        if !reference.converged {
            s.reference_failures += 1;
            continue;
        }
        s.max_reference_gap = s.max_reference_gap.max(reference.gap);
        let (w_star, a_star) = (&reference.pair.w, &reference.pair.alpha);
        let (r_ref_d, r_ref_p) = radii(reference.gap, data.n(), spec.gamma, spec.lambda);

        // every decision ever taken on this instance, for the overlap check
        let mut f_screen = vec![false; data.d()];
        let mut f_keep = vec![false; data.d()];
        let mut s_screen: Vec<Option<f64>> = vec![None; data.n()];
        let mut s_keep = vec![false; data.n()];
        let mut later_round = false;

        for snap in trajectory(spec, data, &LEVELS, s.instances as u64) {
            s.snapshots += 1;

            let (rd, rp) = radii(snap.gap, data.n(), spec.gamma, spec.lambda);
            let dd = dist(&snap.alpha, a_star);
            let dp = dist(&snap.w, w_star);
            let ok_d = dd <= rd * (1.0 + 1e-9) + r_ref_d + 1e-12;
            let ok_p = dp <= rp * (1.0 + 1e-9) + r_ref_p + 1e-12;
            s.sphere_violations += usize::from(!ok_d) + usize::from(!ok_p);
            if rd > 1e-6 {
                s.worst_sphere_ratio = s.worst_sphere_ratio.max(dd / rd);
            }
            if rp > 1e-6 {
                s.worst_sphere_ratio = s.worst_sphere_ratio.max(dp / rp);
            }

            let mut ledgers = Vec::new();
            for mode in [
                ScreeningMode::Feature,
                ScreeningMode::Sample,
                ScreeningMode::Simultaneous,
            ] {
                let (ledger, report) = pass_on(spec, data, &snap, mode);
                for (j, st) in ledger.features().iter().enumerate() {
                    match st {
                        FeatureStatus::ScreenedZero => {
                            s.features_screened += 1;
                            s.false_features += usize::from(w_star[j].abs() > 1e-8);
                            f_screen[j] = true;
                        }
                        FeatureStatus::KeptNonzero => {
                            s.features_kept += 1;
                            s.false_feature_keeps += usize::from(w_star[j].abs() < 1e-10);
                            f_keep[j] = true;
                        }
                        FeatureStatus::Unknown => {}
                    }
                }
                for (i, st) in ledger.samples().iter().enumerate() {
                    let (lo, hi) = spec.dual_box(data.labels[i]);
                    match st {
                        SampleStatus::ScreenedAt(p) => {
                            let c: f64 = p.value();
                            s.samples_screened += 1;
                            s.false_samples += usize::from((a_star[i] - c).abs() > 1e-6);
                            if s_screen[i].is_some_and(|prev| prev != c) {
                                s.overlaps += 1;
                            }
                            s_screen[i] = Some(c);
                        }
                        SampleStatus::KeptInterior => {
                            s.samples_kept += 1;
                            let a = a_star[i];
                            let at_kink = (a - lo).abs() < 1e-10
                                || (a - hi).abs() < 1e-10
                                || a.abs() < 1e-10;
                            s.false_sample_keeps += usize::from(at_kink);
                            s_keep[i] = true;
                        }
                        SampleStatus::Unknown => {}
                    }
                }
                if mode == ScreeningMode::Simultaneous {
                    let (c, b) = synergy_inequalities(spec, data, &snap, &ledger);
                    s.inequality_checks += c;
                    s.inequality_violations += b;
                    if report.rounds.len() >= 2 {
                        let r = report.rounds[1];
                        if r.features_screened + r.samples_zero + r.samples_bound > 0 {
                            s.later_round_passes += 1;
                            later_round = true;
                        }
                    }
                }
                ledgers.push(ledger);
            }

            // simultaneous screens everything either individual pass screens
            let sim_f = screened_features(&ledgers[2]);
            let sim_s = screened_samples(&ledgers[2]);
            let ind_f = screened_features(&ledgers[0]);
            let ind_s = screened_samples(&ledgers[1]);
            let missing = ind_f.iter().zip(&sim_f).filter(|(a, b)| **a && !**b).count()
                + ind_s.iter().zip(&sim_s).filter(|(a, b)| **a && !**b).count();
            s.superset_violations += missing;
        }
        s.later_round_instances += usize::from(later_round);
        s.overlaps += f_screen.iter().zip(&f_keep).filter(|(a, b)| **a && **b).count();
        s.overlaps += s_screen
            .iter()
            .zip(&s_keep)
            .filter(|(a, b)| a.is_some() && **b)
            .count();
    }
    s
}

fn criterion_1(s: &Sweep) -> Outcome {
    let pass = s.reference_failures == 0
        && s.false_features == 0
        && s.false_samples == 0
        && s.features_screened > 0
        && s.samples_screened > 0;
    outcome(
        pass,
        format!(
            "safety: {} instances, {} snapshots, {} feature + {} sample screenings, \
             {} + {} false, {} reference failures, max reference gap {:.1e}",
            s.instances,
            s.snapshots,
            s.features_screened,
            s.samples_screened,
            s.false_features,
            s.false_samples,
            s.reference_failures,
            s.max_reference_gap
        ),
    )
}

fn criterion_2(s: &Sweep) -> Outcome {
    let pass = s.false_feature_keeps == 0
        && s.false_sample_keeps == 0
        && s.overlaps == 0
        && s.features_kept > 0
        && s.samples_kept > 0;
    outcome(
        pass,
        format!(
            "keeping: {} feature + {} sample keeps, {} + {} false, {} screened/kept overlaps",
            s.features_kept, s.samples_kept, s.false_feature_keeps, s.false_sample_keeps, s.overlaps
        ),
    )
}

fn criterion_3(s: &Sweep) -> Outcome {
    let pass = s.inequality_violations == 0
        && s.superset_violations == 0
        && s.later_round_passes > 0;
    outcome(
        pass,
        format!(
            "synergy: {} tight-vs-plain checks, {} violations, {} superset violations, \
             {} passes on {} instances screen more in round >= 2",
            s.inequality_checks,
            s.inequality_violations,
            s.superset_violations,
            s.later_round_passes,
            s.later_round_instances
        ),
    )
}

fn criterion_4(s: &Sweep) -> Outcome {
    outcome(
        s.sphere_violations == 0,
        format!(
            "spheres: {} snapshots, {} containment violations, largest distance/radius {:.3}",
            s.snapshots, s.sphere_violations, s.worst_sphere_ratio
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points = 10_000;
    let mut worst_conj = 0f64;
    let mut worst_eq = 0f64;
    let mut worst_neg = 0f64;
    let mut worst_residual = 0f64;
    for k in 0..points {
        let task = if k % 2 == 0 {
            Task::Classification
        } else {
            Task::Regression
        };
        let gamma = rng.gen_range(0.01..2.0);
        let eps = rng.gen_range(0.0..1.0);
        let spec = Spec64::new(task, gamma, eps, 1.0).unwrap();
        let y: f64 = match task {
            Task::Classification => [1.0, -1.0][rng.gen_range(0..2)],
            Task::Regression => rng.gen_range(-3.0..3.0),
        };
        let u: f64 = rng.gen_range(-4.0..4.0);
        let (lo, hi) = spec.dual_box(y);
        let alpha = rng.gen_range(lo..=hi);
        let a = -alpha;

        // conjugate against sup_u (a u - loss(u))
        let obj = |t: f64| a * t - loss_value(&spec, y, t);
        let t = golden_max(obj, -60.0, 60.0);
        let numeric = obj(t);
        let closed = loss_conj_value(&spec, y, a);
        worst_conj = worst_conj.max((closed - numeric).abs() / (1.0 + numeric.abs()));

        // Fenchel-Young inequality and the cancellation-free residual
        let direct = loss_value(&spec, y, u) + closed - a * u;
        worst_neg = worst_neg.max(-direct);
        let fy = loss_fenchel_gap(&spec, y, u, alpha);
        worst_residual = worst_residual.max((fy - direct).abs() / (1.0 + direct.abs()));
        worst_neg = worst_neg.max(-fy);

        // equality at a = loss'(u)
        let g = loss_grad(&spec, y, u);
        let eq = loss_value(&spec, y, u) + loss_conj_value(&spec, y, g) - g * u;
        worst_eq = worst_eq.max(eq.abs()).max(loss_fenchel_gap(&spec, y, u, -g).abs());

        // penalty, one coordinate at a time
        let v: f64 = rng.gen_range(-4.0..4.0);
        let w: f64 = rng.gen_range(-4.0..4.0);
        let pobj = |t: f64| v * t - penalty_value(&[t]);
        let pt = golden_max(pobj, -60.0, 60.0);
        let pnum = pobj(pt);
        let pclosed = penalty_conj_value(&[v]);
        worst_conj = worst_conj.max((pclosed - pnum).abs() / (1.0 + pnum.abs()));
        worst_neg = worst_neg.max(-(penalty_value(&[w]) + pclosed - w * v));
        let st = soft_threshold(v);
        worst_eq = worst_eq.max((penalty_value(&[st]) + pclosed - st * v).abs());
    }
    let pass = worst_conj <= 1e-8 && worst_eq <= 1e-8 && worst_neg <= 1e-12 && worst_residual <= 1e-9;
    outcome(
        pass,
        format!(
            "conjugacy: {points} points, closed vs numeric conjugate {worst_conj:.1e}, \
             equality residual {worst_eq:.1e}, worst negative gap {worst_neg:.1e}, \
             residual form mismatch {worst_residual:.1e}"
        ),
    )
}

/// A dual point for an LP-SVM instance from complementary slackness at `w`.
fn slack_dual(rows: &[Vec<f64>], y: &[f64], lambda: f64, w: &[f64]) -> Vec<f64> {
    let n = rows.len();
    let margin: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| yi * r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let mut beta: Vec<f64> = margin
        .iter()
        .map(|&m| if m < 1.0 - 1e-9 { 1.0 } else { 0.0 })
        .collect();
    let tight: Vec<usize> = (0..n).filter(|&i| (margin[i] - 1.0).abs() <= 1e-9).collect();
    let active: Vec<usize> = (0..w.len()).filter(|&j| w[j].abs() > 1e-12).collect();
    if !tight.is_empty() {
        let mut solved = None;
        if tight.len() == active.len() {
            let a: Vec<Vec<f64>> = active
                .iter()
                .map(|&j| tight.iter().map(|&i| y[i] * rows[i][j]).collect())
                .collect();
            let b: Vec<f64> = active
                .iter()
                .map(|&j| {
                    let fixed: f64 = (0..n).map(|i| beta[i] * y[i] * rows[i][j]).sum();
                    lambda * n as f64 * w[j].signum() - fixed
                })
                .collect();
            solved = solve_linear(a, b).filter(|x| x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let vals = solved.unwrap_or_else(|| vec![0.5; tight.len()]);
        for (&i, v) in tight.iter().zip(vals) {
            beta[i] = v;
        }
    }
    beta.iter().zip(y).map(|(b, yi)| b * yi).collect()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let instances = 200;
    let mut unique = 0;
    let mut pairs = 0;
    let mut feature_mismatch = 0;
    let mut worst_feature = 0f64;
    let mut primal_violations = 0;
    let mut primal_not_tight = 0;
    let mut containment = 0;
    let mut weak_duality = 0;
    let mut infeasible = 0;
    let (mut f_screened, mut s_screened, mut false_screens) = (0, 0, 0);
    for _ in 0..instances {
        let n = rng.gen_range(3..=8);
        let d = rng.gen_range(1..=4);
        let planted: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let flip = rng.gen_range(0.0..0.3);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| {
                let u: f64 = r.iter().zip(&planted).map(|(a, b)| a * b).sum();
                let s = if u >= 0.0 { 1.0 } else { -1.0 };
                if rng.gen_bool(flip) {
                    -s
                } else {
                    s
                }
            })
            .collect();
        let m = SparseDesignMatrix::from_dense(&rows).unwrap();
        let data = Dataset64::new(m, y.clone(), Task::Classification).unwrap();
        let lmax = lambda_max(&data).unwrap() / n as f64;
        if lmax <= 0.0 {
            continue;
        }
        let lambda = lmax * 10f64.powf(-1.5 * rng.gen::<f64>());
        let (w_star, is_unique) = lp_svm_exact(&rows, &y, lambda);
        unique += usize::from(is_unique);
        let a_star = slack_dual(&rows, &y, lambda, &w_star);

        let mut cands: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![0.0; d], vec![0.0; n])];
        for scale in [0.0, 1e-3, 1e-1, 1.0] {
            let w: Vec<f64> = w_star
                .iter()
                .map(|x| x + scale * rng.gen_range(-1.0..1.0))
                .collect();
            let a: Vec<f64> = a_star
                .iter()
                .map(|x| x + scale * rng.gen_range(-1.0..1.0))
                .collect();
            cands.push((w, a));
        }
        for (w_hat, raw) in cands {
            let a_hat = project_dual(&data, lambda, &raw);
            if !lp_dual_feasible(&data, lambda, &a_hat, 1e-12) {
                infeasible += 1;
                continue;
            }
            pairs += 1;
            let p = lp_primal_value(&data, lambda, &w_hat);
            let dv = lp_dual_value(&data, lambda, &a_hat);
            weak_duality += usize::from(dv > p + 1e-12);

            // feature bounds: exact extrema over the dual polytope
            let region = LpDualRegionParams::new(&data, lambda, &w_hat, &a_hat).unwrap();
            let lower: f64 = a_hat.iter().zip(&y).map(|(a, b)| a * b).sum();
            let upper = (n as f64 * p).min(n as f64);
            for j in 0..d {
                let z: Vec<f64> = (0..n).map(|i| y[i] * rows[i][j]).collect();
                let (lo, hi) = dual_region_extrema(&z, lower.max(0.0), upper);
                let (lb, ub) = region.feature_bounds(j);
                let err = (lb - lo).abs().max((ub - hi).abs());
                worst_feature = worst_feature.max(err);
                feature_mismatch += usize::from(err > 1e-9);
            }

            // sample bounds: never tighter than the exact extrema
            let primal = LpPrimalRegionParams::new(&data, lambda, &w_hat).unwrap();
            let c: Vec<f64> = primal.g_sum.iter().map(|g| g / n as f64).collect();
            for i in 0..n {
                let (lb, ub) = primal.sample_bounds(&data, i);
                let neg: Vec<f64> = rows[i].iter().map(|x| -x).collect();
                let lo = primal_region_min(&rows[i], &c, lambda, primal.k);
                let hi = -primal_region_min(&neg, &c, lambda, primal.k);
                let tol = 1e-7 * (1.0 + lo.abs().min(1e12));
                let low_ok = if lo.is_finite() { lb <= lo + tol } else { lb == f64::NEG_INFINITY };
                let tol = 1e-7 * (1.0 + hi.abs().min(1e12));
                let high_ok = if hi.is_finite() { ub >= hi - tol } else { ub == f64::INFINITY };
                primal_violations += usize::from(!low_ok) + usize::from(!high_ok);
                let tight = |a: f64, b: f64| {
                    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-6 * (1.0 + b.abs())
                };
                primal_not_tight += usize::from(!tight(lb, lo)) + usize::from(!tight(ub, hi));
                let u: f64 = rows[i].iter().zip(&w_star).map(|(a, b)| a * b).sum();
                containment += usize::from(u < lb - 1e-9 || u > ub + 1e-9);
            }

            // rules against the exact optimum
            if is_unique {
                let bounds = lp_bounds(&data, lambda, &w_hat, &a_hat).unwrap();
                let ledger = lp_screen(&data, lambda, &bounds);
                for j in 0..d {
                    if ledger.feature(j) == FeatureStatus::ScreenedZero {
                        f_screened += 1;
                        false_screens += usize::from(w_star[j].abs() > 1e-9);
                    }
                }
                for i in 0..n {
                    if let SampleStatus::ScreenedAt(pin) = ledger.sample(i) {
                        s_screened += 1;
                        let margin =
                            y[i] * rows[i].iter().zip(&w_star).map(|(a, b)| a * b).sum::<f64>();
                        let wrong = if pin.value::<f64>() == 0.0 {
                            margin < 1.0 - 1e-9
                        } else {
                            margin > 1.0 + 1e-9
                        };
                        false_screens += usize::from(wrong);
                    }
                }
            }
        }
    }
    let pass = feature_mismatch == 0
        && primal_violations == 0
        && containment == 0
        && weak_duality == 0
        && infeasible == 0
        && false_screens == 0
        && f_screened + s_screened > 0;
    outcome(
        pass,
        format!(
            "lp bounds: {instances} instances ({unique} unique optima), {pairs} feasible pairs, \
             feature bound mismatches {feature_mismatch} (worst {worst_feature:.1e}), \
             sample bound violations {primal_violations} ({primal_not_tight} not tight), \
             optimum outside bounds {containment}, {f_screened} feature + {s_screened} sample \
             screenings with {false_screens} false"
        ),
    )
}

fn path_config(mode: ScreeningMode, tol: Option<f64>) -> PathConfig {
    PathConfig {
        mode,
        tol,
        seed: 11,
        ..PathConfig::default()
    }
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for task in [Task::Classification, Task::Regression] {
        let cfg = SynthConfig::new(2000, 2000, task, 7)
            .density(0.01)
            .informative(50)
            .noise(0.1);
        let data: Dataset64 = generate(&cfg).unwrap();
        let spec = Spec64::new(task, 0.5, 0.1, 1.0).unwrap();
        let t0 = Instant::now();
        let off = run_path(&spec, &data, &path_config(ScreeningMode::Off, Some(1e-15))).unwrap();
        let t_off = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let sim = run_path(
            &spec,
            &data,
            &path_config(ScreeningMode::Simultaneous, Some(1e-15)),
        )
        .unwrap();
        let t_sim = t0.elapsed().as_secs_f64();
        let maxdiff = off
            .weights
            .iter()
            .zip(&sim.weights)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0f64, f64::max);
        let recs = off.report.records.iter().zip(&sim.report.records);
        let no_more = recs.clone().filter(|(a, b)| b.epochs <= a.epochs).count();
        let fewer = recs.clone().filter(|(a, b)| b.epochs < a.epochs).count();
        let less_work = recs.filter(|(a, b)| b.work < a.work).count();
        let total = off.report.records.len();
        let work_total = |r: &simulscreen::path::PathReport| r.records.iter().map(|x| x.work).sum::<u64>();
        let ok = off.report.all_converged
            && sim.report.all_converged
            && maxdiff <= 1e-6
            && no_more * 10 >= total * 9;
        pass &= ok;
        lines.push(format!(
            "{:?}: max |w diff| {maxdiff:.1e}, epochs <= on {no_more}/{total} (< on {fewer}), \
             less work on {less_work}/{total}, epochs {}/{}, work {}/{}, {t_off:.2}s/{t_sim:.2}s",
            task,
            off.report.total_epochs,
            sim.report.total_epochs,
            work_total(&off.report),
            work_total(&sim.report)
        ));
    }

    // many irrelevant features: near the top of the path individual feature
    // screening saves more than individual sample screening
    let cfg = SynthConfig::new(400, 4000, Task::Classification, 3)
        .density(0.05)
        .informative(5)
        .noise(0.1);
    let data: Dataset64 = generate(&cfg).unwrap();
    let spec = Spec64::classification(0.5, 1.0).unwrap();
    let runs: Vec<_> = [
        ScreeningMode::Feature,
        ScreeningMode::Sample,
        ScreeningMode::Simultaneous,
    ]
    .into_iter()
    .map(|mode| run_path(&spec, &data, &path_config(mode, None)).unwrap().report)
    .collect();
    // the ten largest lambda values that need any epochs at all
    let top: Vec<usize> = runs[1]
        .records
        .iter()
        .filter(|r| r.epochs > 0 && r.index > 0)
        .map(|r| r.index)
        .take(10)
        .collect();
    let work = |k: usize| -> u64 { top.iter().map(|&t| runs[k].records[t].work).sum() };
    let (w_feat, w_samp, w_sim) = (work(0), work(1), work(2));
    let feature_wins = top
        .iter()
        .filter(|&&t| runs[0].records[t].work < runs[1].records[t].work)
        .count();
    let ordered = top.len() == 10 && w_feat < w_samp && w_sim < w_samp;
    pass &= ordered;
    lines.push(format!(
        "top of path (lambda {}..={}) work feature {w_feat} < sample {w_samp} on {feature_wins}/10, \
         simul {w_sim}",
        top.first().copied().unwrap_or(0),
        top.last().copied().unwrap_or(0)
    ));
    outcome(pass, format!("large path: {}", lines.join("; ")))
}

fn criterion_8() -> Outcome {
    let mut cells = 0;
    let mut monotone_breaks = 0;
    let mut negative_extra = 0;
    let mut errors = 0;
    let mut strict = 0;
    let mut strict_short = 0;
    let levels: Vec<f64> = LEVELS.iter().copied().chain([0.0]).collect();
    for (k, (task, density)) in [
        (Task::Classification, 1.0),
        (Task::Classification, 0.2),
        (Task::Regression, 1.0),
        (Task::Regression, 0.2),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SynthConfig::new(60, 80, task, 100 + k as u64)
            .density(density)
            .informative(6)
            .noise(0.3);
        let data: Dataset64 = generate(&cfg).unwrap();
        let spec = Spec64::new(task, 0.5, 0.1, 1.0).unwrap();
        let lambdas = lambda_grid(lambda_max(&data).unwrap(), 12, 1e-4);
        let rc = RateConfig {
            gap_levels: levels.clone(),
            reference_tol: REFERENCE_TOL,
            ..RateConfig::default()
        };
        let grid = rate_report(&spec, &data, &lambdas, &rc).unwrap();
        cells += grid.cells.len();
        for (t, &lambda) in lambdas.iter().enumerate() {
            let row: Vec<_> = grid.cells.iter().filter(|c| c.lambda_index == t).collect();
            for pair in row.windows(2) {
                for (a, b) in [
                    (&pair[0].individual, &pair[1].individual),
                    (&pair[0].simultaneous, &pair[1].simultaneous),
                ] {
                    for (x, y) in a.as_array().iter().zip(b.as_array()) {
                        monotone_breaks += usize::from(!x.is_nan() && y < *x);
                    }
                }
            }
            for c in &row {
                errors += c.errors;
                negative_extra += c
                    .synergy_extra
                    .as_array()
                    .iter()
                    .filter(|x| **x < 0.0)
                    .count();
            }
            let s = spec.clone().with_lambda(lambda).unwrap();
            let reference = reference(&s, &data, REFERENCE_TOL);
            if strictly_complementary(&s, &data, &reference, 1e-6) {
                strict += 1;
                let last = row.last().expect("one cell per level");
                let full = |r: &simulscreen::path::Rates| {
                    r.as_array().iter().all(|x| x.is_nan() || *x == 1.0)
                };
                strict_short +=
                    usize::from(!(full(&last.individual) && full(&last.simultaneous)));
            }
        }
    }
    let pass =
        monotone_breaks == 0 && negative_extra == 0 && errors == 0 && strict > 0 && strict_short == 0;
    outcome(
        pass,
        format!(
            "rates: {cells} cells, {monotone_breaks} monotonicity breaks, \
             {negative_extra} negative extra rates, {errors} wrong determinations, \
             {strict} strictly complementary lambdas, {strict_short} short of 1.0 at the reference"
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = SynthConfig::new(150, 300, Task::Regression, 9).density(0.1);
    let data: Dataset64 = generate(&cfg).unwrap();
    let spec = Spec64::regression(0.5, 0.1, 1.0).unwrap();
    let pc = PathConfig {
        lambda_count: 30,
        ..path_config(ScreeningMode::Simultaneous, None)
    };
    let render = || {
        let mut r = run_path(&spec, &data, &pc).unwrap().report;
        r.strip_timing();
        (r.to_json().unwrap(), r.to_csv().unwrap())
    };
    let (j1, c1) = render();
    let (j2, c2) = render();
    let lambdas = lambda_grid(lambda_max(&data).unwrap(), 6, 1e-3);
    let rates = || {
        rate_report(&spec, &data, &lambdas, &RateConfig::default())
            .unwrap()
            .to_json()
            .unwrap()
    };
    let (r1, r2) = (rates(), rates());
    let pass = j1 == j2 && c1 == c2 && r1 == r2;
    outcome(
        pass,
        format!(
            "determinism: path json {} bytes identical {}, csv identical {}, rate grid identical {}",
            j1.len(),
            j1 == j2,
            c1 == c2,
            r1 == r2
        ),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let start = Instant::now();
    let sweep = catch_unwind(run_sweep);
    let from_sweep = |f: fn(&Sweep) -> Outcome| match &sweep {
        Ok(s) => f(s),
        Err(_) => outcome(false, "sweep panicked".into()),
    };
    let results = [
        from_sweep(criterion_1),
        from_sweep(criterion_2),
        from_sweep(criterion_3),
        from_sweep(criterion_4),
        guarded(criterion_5),
        guarded(criterion_6),
        guarded(criterion_7),
        guarded(criterion_8),
        guarded(criterion_9),
    ];
    let mut failed = 0;
    for (k, r) in results.iter().enumerate() {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!r.pass);
        println!("criterion {}: {tag} - {}", k + 1, r.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
