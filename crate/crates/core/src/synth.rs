//! Seeded synthetic datasets for tests, benchmarks and the `gen` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Float;
use crate::sparse_data::{Dataset, SparseDesignMatrix, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub d: usize,
    /// Probability that an entry is nonzero.
    pub density: f64,
    pub task: Task,
    /// Features carrying signal; the rest are pure noise columns.
    pub informative: usize,
    /// Standard deviation of the label noise (before taking signs).
    pub noise: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(n: usize, d: usize, task: Task, seed: u64) -> Self {
        Self {
            n,
            d,
            density: 1.0,
            task,
            informative: d.min(10).max(1),
            noise: 0.1,
            seed,
        }
    }

    pub fn density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn informative(mut self, k: usize) -> Self {
        self.informative = k;
        self
    }

    pub fn noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

/// Gaussian entries scaled so rows have roughly unit norm; labels from a
/// sparse planted model.
pub fn generate<F: Float>(cfg: &SynthConfig) -> Result<Dataset<F>> {
    if cfg.n == 0 || cfg.d == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must be in (0, 1], got {}",
            cfg.density
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.informative.min(cfg.d);
    let mut w0 = vec![0.0f64; cfg.d];
    for w in w0.iter_mut().take(k) {
        let z: f64 = StandardNormal.sample(&mut rng);
        *w = z.signum() * (1.0 + z.abs());
    }
    let scale = 1.0 / (cfg.density * cfg.d as f64).max(1.0).sqrt();

    let mut rows = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut row = Vec::new();
        let mut u = 0.0;
        for (j, &wj) in w0.iter().enumerate() {
            if cfg.density < 1.0 && rng.gen::<f64>() >= cfg.density {
                continue;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = z * scale;
            u += x * wj;
            row.push((j, F::lit(x)));
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        let t = u + cfg.noise * e;
        labels.push(F::lit(match cfg.task {
            Task::Classification => {
                if t >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Task::Regression => t,
        }));
        rows.push(row);
    }
    let m = SparseDesignMatrix::from_rows(cfg.d, &rows)?;
    Dataset::new(m, labels, cfg.task)
}
