#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use simulscreen::objective::{lambda_max, primal_objective};
use simulscreen::synth::{generate, SynthConfig};
use simulscreen::{
    solve, Dataset64, ScreeningMode, SolveOutput64, SolverOptions, SolverState, Spec64, Task,
};

pub struct Instance {
    pub spec: Spec64,
    pub data: Dataset64,
    pub lambda_max: f64,
    pub density: f64,
}

/// Small random problem: n, d in [5, 60], sparse or dense, either task,
/// `lambda` log-uniform in `[1e-4, 1] lambda_max`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Option<Instance> {
    let n = rng.gen_range(5..=60);
    let d = rng.gen_range(5..=60);
    let density = [1.0, 0.5, 0.2, 0.1][rng.gen_range(0..4)];
    let task = if rng.gen_bool(0.5) {
        Task::Classification
    } else {
        Task::Regression
    };
    let cfg = SynthConfig::new(n, d, task, rng.gen())
        .density(density)
        .informative(rng.gen_range(1..=d.min(8)))
        .noise(rng.gen_range(0.0..1.0));
    let data: Dataset64 = generate(&cfg).ok()?;
    let lmax = lambda_max(&data).ok()?;
    if lmax <= 0.0 {
        return None;
    }
    let gamma = [0.05, 0.25, 1.0][rng.gen_range(0..3)];
    let eps = [0.05, 0.3][rng.gen_range(0..2)];
    let lambda = lmax * 10f64.powf(-4.0 * rng.gen::<f64>());
    let spec = Spec64::new(task, gamma, eps, lambda).ok()?;
    Some(Instance {
        spec,
        data,
        lambda_max: lmax,
        density,
    })
}

/// Screening-free solve to an absolute gap of `tol`.
pub fn reference(spec: &Spec64, data: &Dataset64, tol: f64) -> SolveOutput64 {
    let opts = SolverOptions {
        tol: Some(tol),
        max_epochs: 2_000_000,
        mode: ScreeningMode::Off,
        ..SolverOptions::default()
    };
    solve(spec, data, None, &opts, None)
}

pub struct Snap {
    pub level: f64,
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gap: f64,
}

/// Iterates of one cold-start, screening-free run, taken the first time the
/// gap drops below each `level * P(0)`.
pub fn trajectory(spec: &Spec64, data: &Dataset64, levels: &[f64], seed: u64) -> Vec<Snap> {
    let p0 = primal_objective(spec, data, &vec![0.0; data.d()]);
    let mut st = SolverState::new(spec.clone(), data, None, seed);
    let mut gap = st.objectives().2;
    let mut out = Vec::new();
    for &level in levels {
        while gap > level * p0 && st.epoch() < 100_000 {
            st.run_epoch();
            gap = st.objectives().2;
        }
        out.push(Snap {
            level,
            w: st.w().to_vec(),
            alpha: st.alpha().to_vec(),
            gap,
        });
    }
    out
}

pub fn dense_rows(data: &Dataset64) -> Vec<Vec<f64>> {
    (0..data.n())
        .map(|i| {
            let mut row = vec![0.0; data.d()];
            let (cols, vals) = data.matrix.row(i);
            for (&j, &x) in cols.iter().zip(vals) {
                row[j] = x;
            }
            row
        })
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Maximizer of a concave function on `[lo, hi]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    let mut best = (a + b) / 2.0;
    let mut fb = f(best);
    for x in [lo, hi] {
        let fx = f(x);
        if fx > fb {
            best = x;
            fb = fx;
        }
    }
    best
}

/// Gaussian elimination with partial pivoting; `None` when (near) singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        let scale = a[piv].iter().fold(0f64, |s, v| s.max(v.abs()));
        if a[piv][col].abs() <= 1e-11 * scale.max(1e-300) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..m {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Extrema of `z^T beta` over `{beta in [0,1]^n : lower <= sum beta <= upper}`
/// by enumerating the vertices of the polytope.
pub fn dual_region_extrema(z: &[f64], lower: f64, upper: f64) -> (f64, f64) {
    let n = z.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut visit = |beta: &[f64]| {
        let v: f64 = z.iter().zip(beta).map(|(a, b)| a * b).sum();
        lo = lo.min(v);
        hi = hi.max(v);
    };
    let tol = 1e-12;
    for mask in 0u32..(1 << n) {
        let beta: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
        let s: f64 = beta.iter().sum();
        if s >= lower - tol && s <= upper + tol {
            visit(&beta);
        }
        for k in 0..n {
            for target in [lower, upper] {
                let mut b = beta.clone();
                b[k] = 0.0;
                let rest: f64 = b.iter().sum();
                let t = target - rest;
                if t > 0.0 && t < 1.0 {
                    b[k] = t;
                    visit(&b);
                }
            }
        }
    }
    (lo, hi)
}

/// `min x^T w` subject to `lambda ||w||_1 + c^T w <= k`, by enumerating the
/// vertices of each orthant piece with the box `|w_j| <= big`. `-inf` when the
/// minimum keeps moving with the box.
pub fn primal_region_min(x: &[f64], c: &[f64], lambda: f64, k: f64) -> f64 {
    let at = |big: f64| -> f64 {
        let d = x.len();
        let mut best = f64::INFINITY;
        for signs in 0u32..(1 << d) {
            let s: Vec<f64> = (0..d)
                .map(|j| if (signs >> j) & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            // t_j = s_j w_j >= 0, constraint sum a_j t_j <= k
            let a: Vec<f64> = (0..d).map(|j| lambda + s[j] * c[j]).collect();
            let obj: Vec<f64> = (0..d).map(|j| s[j] * x[j]).collect();
            // each coordinate: 0, big, or the free one solving the constraint
            let combos = 3usize.pow(d as u32);
            for code in 0..combos {
                let mut t = vec![0.0; d];
                let mut free = None;
                let mut cc = code;
                let mut ok = true;
                for (j, tj) in t.iter_mut().enumerate() {
                    match cc % 3 {
                        0 => {}
                        1 => *tj = big,
                        _ => {
                            if free.is_some() {
                                ok = false;
                            }
                            free = Some(j);
                        }
                    }
                    cc /= 3;
                }
                if !ok {
                    continue;
                }
                if let Some(f) = free {
                    if a[f] == 0.0 {
                        continue;
                    }
                    let rest: f64 = (0..d).map(|j| a[j] * t[j]).sum();
                    let tf = (k - rest) / a[f];
                    if !(0.0..=big).contains(&tf) {
                        continue;
                    }
                    t[f] = tf;
                }
                let lhs: f64 = (0..d).map(|j| a[j] * t[j]).sum();
                if lhs > k + 1e-9 * (1.0 + k.abs()) {
                    continue;
                }
                let v: f64 = (0..d).map(|j| obj[j] * t[j]).sum();
                best = best.min(v);
            }
        }
        best
    };
    let (m1, m2) = (at(1e6), at(1e7));
    if m2 < m1 - 1e-6 * (1.0 + m1.abs()) {
        f64::NEG_INFINITY
    } else {
        m1
    }
}

pub fn lp_objective(rows: &[Vec<f64>], y: &[f64], lambda: f64, w: &[f64]) -> f64 {
    let n = rows.len() as f64;
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    let hinge: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let u: f64 = r.iter().zip(w).map(|(a, b)| a * b).sum();
            (1.0 - yi * u).max(0.0)
        })
        .sum();
    lambda * l1 + hinge / n
}

/// Exact LP-SVM minimizer by enumerating the vertices of the arrangement
/// `{w_j = 0} u {y_i x_i^T w = 1}`. Returns the minimizer and whether it is
/// the only optimal vertex.
pub fn lp_svm_exact(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, bool) {
    let d = rows[0].len();
    let n = rows.len();
    let planes: Vec<(Vec<f64>, f64)> = (0..d)
        .map(|j| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            (e, 0.0)
        })
        .chain((0..n).map(|i| (rows[i].iter().map(|x| x * y[i]).collect(), 1.0)))
        .collect();
    let mut verts: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut pick = vec![0usize; d];
    fn rec(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        planes: &[(Vec<f64>, f64)],
        out: &mut Vec<Vec<f64>>,
    ) {
        if depth == pick.len() {
            let a = pick.iter().map(|&p| planes[p].0.clone()).collect();
            let b = pick.iter().map(|&p| planes[p].1).collect();
            if let Some(w) = solve_linear(a, b) {
                out.push(w);
            }
            return;
        }
        for p in start..planes.len() {
            pick[depth] = p;
            rec(p + 1, depth + 1, pick, planes, out);
        }
    }
    let mut cands = Vec::new();
    rec(0, 0, &mut pick, &planes, &mut cands);
    for w in cands {
        verts.push((lp_objective(rows, y, lambda, &w), w));
    }
    let best = verts
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("the coordinate planes always give a vertex")
        .clone();
    let unique = verts
        .iter()
        .filter(|(v, _)| *v <= best.0 + 1e-10 * (1.0 + best.0.abs()))
        .all(|(_, w)| dist(w, &best.1) <= 1e-8);
    (best.1, unique)
}

/// Strict-complementarity check of a reference solution: every index sits
/// at least `delta` away from the boundary of its class.
pub fn strictly_complementary(spec: &Spec64, data: &Dataset64, out: &SolveOutput64, delta: f64) -> bool {
    let p = &out.pair;
    let feats = p
        .w
        .iter()
        .zip(&p.v)
        .all(|(&w, &v)| if w == 0.0 { v.abs() <= 1.0 - delta } else { w.abs() >= delta });
    let g = spec.gamma;
    let samples = (0..data.n()).all(|i| {
        let y = data.labels[i];
        let u = data.matrix.row_dot(i, &p.w);
        let t = match spec.task {
            Task::Classification => 1.0 - y * u,
            Task::Regression => (u - y).abs() - spec.eps,
        };
        // t <= 0: zero, t >= gamma: at the bound, in between: interior
        t < -delta || t > g + delta || (t > delta && t < g - delta)
    });
    feats && samples
}
