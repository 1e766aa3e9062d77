//! Windowed accuracy and decoupling-success-rate sweeps over training sizes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::labeling::DecouplingClass;
use crate::preprocess::{shuffle, split, FeatureMatrix};
use crate::svm::{train, SvmParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub n_total: usize,
    pub n_train_pool: usize,
    pub size_start: usize,
    pub size_step: usize,
    pub window_l: usize,
    /// A window counts as a success when its accuracy strictly exceeds this.
    pub as_valid_threshold: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_total: 3800,
            n_train_pool: 3000,
            size_start: 50,
            size_step: 50,
            window_l: 50,
            as_valid_threshold: 0.9,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size_start == 0 || self.size_step == 0 {
            return Err(Error::param("size_start and size_step must be >= 1"));
        }
        if self.size_start > self.n_train_pool {
            return Err(Error::param(format!(
                "size_start {} exceeds the training pool {}",
                self.size_start, self.n_train_pool
            )));
        }
        if self.n_train_pool >= self.n_total {
            return Err(Error::param(format!(
                "n_train_pool {} must be below n_total {}",
                self.n_train_pool, self.n_total
            )));
        }
        if self.window_l == 0 {
            return Err(Error::param("window_l must be >= 1"));
        }
        if self.n_windows() == 0 {
            return Err(Error::param(format!(
                "test set of {} rows holds no window of {}",
                self.n_total - self.n_train_pool,
                self.window_l
            )));
        }
        if !(self.as_valid_threshold > 0.0 && self.as_valid_threshold <= 1.0) {
            return Err(Error::param(format!(
                "as_valid_threshold must be in (0, 1], got {}",
                self.as_valid_threshold
            )));
        }
        Ok(())
    }

    /// Number of complete test windows; a shorter tail is not scored.
    pub fn n_windows(&self) -> usize {
        self.n_total.saturating_sub(self.n_train_pool) / self.window_l.max(1)
    }

    /// `size_start, size_start + size_step, ...` up to the pool size.
    pub fn sizes(&self) -> Vec<usize> {
        (self.size_start..=self.n_train_pool)
            .step_by(self.size_step.max(1))
            .collect()
    }
}

/// Accuracy of each complete window of `window_l` consecutive predictions.
pub fn window_scores<T: PartialEq>(
    truth: &[T],
    predicted: &[T],
    window_l: usize,
) -> Result<Vec<f64>> {
    if truth.len() != predicted.len() {
        return Err(Error::param(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if window_l == 0 {
        return Err(Error::param("window_l must be >= 1"));
    }
    Ok(truth
        .chunks_exact(window_l)
        .zip(predicted.chunks_exact(window_l))
        .map(|(t, p)| t.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / window_l as f64)
        .collect())
}

/// Windowed outcome for one training size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub n_train: usize,
    pub valid_windows: usize,
    pub n_windows: usize,
    /// `valid_windows / n_windows`.
    pub dsr: f64,
    /// Mean window accuracy.
    pub accuracy: f64,
    pub converged: bool,
}

impl SweepPoint {
    pub fn from_scores(
        n_train: usize,
        scores: &[f64],
        threshold: f64,
        converged: bool,
    ) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::param("no complete test window"));
        }
        let valid = scores.iter().filter(|&&s| s > threshold).count();
        Ok(SweepPoint {
            n_train,
            valid_windows: valid,
            n_windows: scores.len(),
            dsr: valid as f64 / scores.len() as f64,
            accuracy: scores.iter().sum::<f64>() / scores.len() as f64,
            converged,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    pub fn dsr_curve(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.n_train, p.dsr)).collect()
    }

    pub fn accuracy_curve(&self) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .map(|p| (p.n_train, p.accuracy))
            .collect()
    }

    pub fn at(&self, n_train: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.n_train == n_train)
    }
}

fn class_numbers(labels: &[DecouplingClass]) -> Vec<u8> {
    labels.iter().map(|c| c.number()).collect()
}

/// Splits off the unshuffled test rows and shuffles the training pool once;
/// every training size uses a prefix of that shuffled pool.
pub fn prepare_split(
    data: &FeatureMatrix,
    cfg: &EvalConfig,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    cfg.validate()?;
    if data.len() != cfg.n_total {
        return Err(Error::param(format!(
            "dataset has {} rows, configuration expects {}",
            data.len(),
            cfg.n_total
        )));
    }
    let (pool, test) = split(data, cfg.n_train_pool)?;
    Ok((shuffle(&pool, cfg.seed), test))
}

/// Trains on each prefix size of the shuffled pool and scores the test windows.
pub fn run_dsr_sweep(data: &FeatureMatrix, params: &SvmParams, cfg: &EvalConfig) -> Result<Sweep> {
    params.validate()?;
    let (pool, test) = prepare_split(data, cfg)?;
    let truth = class_numbers(test.labels());
    let points = cfg
        .sizes()
        .into_par_iter()
        .map(|size| {
            let train_set = pool.head(size);
            let model = train(train_set.x(), &class_numbers(train_set.labels()), params)?;
            let predicted = model.predict(test.x())?;
            let scores = window_scores(&truth, &predicted, cfg.window_l)?;
            SweepPoint::from_scores(size, &scores, cfg.as_valid_threshold, model.all_converged())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { points })
}

/// The same sweep with an RBF and a linear kernel sharing `c`.
pub fn run_kernel_comparison(
    data: &FeatureMatrix,
    c: f64,
    gamma: f64,
    cfg: &EvalConfig,
) -> Result<(Sweep, Sweep)> {
    let rbf = run_dsr_sweep(data, &SvmParams::rbf(c, gamma), cfg)?;
    let linear = run_dsr_sweep(data, &SvmParams::linear(c), cfg)?;
    Ok((rbf, linear))
}

/// `matrix[true - 1][predicted - 1]` counts.
pub fn confusion_matrix(
    truth: &[DecouplingClass],
    predicted: &[DecouplingClass],
) -> Result<[[usize; 4]; 4]> {
    if truth.len() != predicted.len() {
        return Err(Error::param(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut m = [[0; 4]; 4];
    for (t, p) in truth.iter().zip(predicted) {
        m[usize::from(t.number() - 1)][usize::from(p.number() - 1)] += 1;
    }
    Ok(m)
}
