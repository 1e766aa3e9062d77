//! One-vs-one multiclass SVM with the feature scaler folded into the model.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::smo::{canonical_order, check_binary_problem, gram_matrix, solve, SvmParams};
use super::Kernel;
use crate::error::{Error, Result};
use crate::preprocess::Scaler;

/// Binary machine for the class pair `(positive, negative)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryModel {
    pub positive: u8,
    pub negative: u8,
    pub support_vectors: Array2<f64>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BinaryModel {
    /// Signed decision value on already-scaled features; positive means
    /// `self.positive`.
    pub fn decision_value(&self, kernel: &Kernel, x: &[f64]) -> f64 {
        self.support_vectors
            .outer_iter()
            .zip(&self.dual_coefs)
            .map(|(sv, c)| c * kernel.eval_slices(sv.as_slice().expect("rows are contiguous"), x))
            .sum::<f64>()
            + self.bias
    }

    pub fn n_support(&self) -> usize {
        self.dual_coefs.len()
    }
}

/// Trains one binary machine on scaled features with labels in {-1, +1}.
pub fn train_binary(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    params: &SvmParams,
    positive: u8,
    negative: u8,
) -> Result<BinaryModel> {
    params.validate()?;
    check_binary_problem(x, y)?;
    let order = canonical_order(x, y);
    let xs = x.select(Axis(0), &order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let gram = gram_matrix(&params.kernel, xs.view());
    let sol = solve(&gram, &ys, params.c, params.tol, params.max_iter(y.len()));
    let support: Vec<usize> = (0..ys.len()).filter(|&k| sol.alpha[k] > 0.0).collect();
    Ok(BinaryModel {
        positive,
        negative,
        support_vectors: xs.select(Axis(0), &support),
        dual_coefs: support.iter().map(|&k| sol.alpha[k] * ys[k]).collect(),
        bias: sol.bias,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MulticlassModel {
    pub params: SvmParams,
    pub scaler: Scaler,
    /// Classes seen in training, ascending.
    pub classes: Vec<u8>,
    /// One machine per pair `(a, b)` with `a < b`, in lexicographic order.
    pub machines: Vec<BinaryModel>,
}

impl MulticlassModel {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    /// Classes of `expected` that never appeared in training.
    pub fn missing_classes(&self, expected: &[u8]) -> Vec<u8> {
        expected
            .iter()
            .copied()
            .filter(|c| !self.classes.contains(c))
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.machines.iter().all(|m| m.converged)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
        let z = self.scaler.transform(x)?;
        let kernel = self.params.kernel;
        let z = z.as_standard_layout();
        let flat = z.as_slice().expect("standard layout is contiguous");
        Ok(flat
            .par_chunks(self.dim().max(1))
            .map(|row| self.vote(&kernel, row))
            .collect())
    }

    fn vote(&self, kernel: &Kernel, z: &[f64]) -> u8 {
        if self.classes.len() == 1 {
            return self.classes[0];
        }
        let mut votes = vec![0usize; self.classes.len()];
        for m in &self.machines {
            let winner = if m.decision_value(kernel, z) > 0.0 {
                m.positive
            } else {
                m.negative
            };
            let slot = self
                .classes
                .binary_search(&winner)
                .expect("machine classes are known");
            votes[slot] += 1;
        }
        // first maximum, so ties go to the smallest class
        let mut best = 0;
        for (k, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

/// Fits the scaler on `x`, then one binary machine per pair of observed classes.
pub fn train(x: ArrayView2<'_, f64>, labels: &[u8], params: &SvmParams) -> Result<MulticlassModel> {
    params.validate()?;
    if x.nrows() != labels.len() {
        return Err(Error::param(format!(
            "{} rows but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::param("cannot train on an empty set"));
    }
    let scaler = Scaler::fit(x)?;
    let z = scaler.transform(x)?;
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let pairs: Vec<(u8, u8)> = classes
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| classes[k + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let machines = pairs
        .par_iter()
        .map(|&(a, b)| {
            let rows: Vec<usize> = (0..labels.len())
                .filter(|&i| labels[i] == a || labels[i] == b)
                .collect();
            let y: Vec<f64> = rows
                .iter()
                .map(|&i| if labels[i] == a { 1.0 } else { -1.0 })
                .collect();
            train_binary(z.select(Axis(0), &rows).view(), &y, params, a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MulticlassModel {
        params: *params,
        scaler,
        classes,
        machines,
    })
}

pub fn accuracy_score<T: PartialEq>(truth: &[T], predicted: &[T]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::param(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::param("accuracy of an empty set is undefined"));
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn blobs() -> (Array2<f64>, Vec<u8>) {
        let centres = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0), (6.0, 6.0)];
        let offsets = [
            (-0.5, -0.3),
            (0.4, 0.2),
            (0.1, -0.6),
            (-0.2, 0.5),
            (0.3, 0.3),
        ];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, &(cx, cy)) in centres.iter().enumerate() {
            for &(dx, dy) in &offsets {
                x.extend_from_slice(&[cx + dx, cy + dy]);
                y.push(c as u8 + 1);
            }
        }
        (Array2::from_shape_vec((y.len(), 2), x).unwrap(), y)
    }

    #[test]
    fn separates_four_blobs() {
        let (x, y) = blobs();
        let model = train(x.view(), &y, &SvmParams::rbf(10.0, 0.5)).unwrap();
        assert_eq!(model.machines.len(), 6);
        assert_eq!(model.predict(x.view()).unwrap(), y);
        let probe = array![[6.2, 5.9], [-0.3, 6.4]];
        assert_eq!(model.predict(probe.view()).unwrap(), vec![4, 3]);
    }

    #[test]
    fn absent_classes_are_reported() {
        let (x, y) = blobs();
        let keep: Vec<usize> = (0..y.len()).filter(|&i| y[i] != 3).collect();
        let xs = x.select(Axis(0), &keep);
        let ys: Vec<u8> = keep.iter().map(|&i| y[i]).collect();
        let model = train(xs.view(), &ys, &SvmParams::default()).unwrap();
        assert_eq!(model.classes, vec![1, 2, 4]);
        assert_eq!(model.machines.len(), 3);
        assert_eq!(model.missing_classes(&[1, 2, 3, 4]), vec![3]);
    }

    #[test]
    fn single_class_predicts_that_class() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let model = train(x.view(), &[2, 2], &SvmParams::default()).unwrap();
        assert!(model.machines.is_empty());
        assert_eq!(model.predict(array![[5.0, 5.0]].view()).unwrap(), vec![2]);
    }

    #[test]
    fn three_way_tie_goes_to_lowest_class() {
        let scaler = Scaler::from_parts(vec![0.0], vec![1.0]).unwrap();
        let sv = array![[0.0]];
        let constant = |positive, negative, bias| BinaryModel {
            positive,
            negative,
            support_vectors: sv.clone(),
            dual_coefs: vec![0.0],
            bias,
            iterations: 0,
            converged: true,
        };
        // 1 beats 2, 2 beats 3, 3 beats 1: one vote each
        let model = MulticlassModel {
            params: SvmParams::linear(1.0),
            scaler,
            classes: vec![1, 2, 3],
            machines: vec![
                constant(1, 2, 1.0),
                constant(1, 3, -1.0),
                constant(2, 3, 1.0),
            ],
        };
        assert_eq!(model.predict(array![[0.3]].view()).unwrap(), vec![1]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (x, y) = blobs();
        let model = train(x.view(), &y, &SvmParams::default()).unwrap();
        assert!(model.predict(array![[1.0, 2.0, 3.0]].view()).is_err());
    }

    #[test]
    fn accuracy() {
        assert_eq!(accuracy_score(&[1, 2, 3, 4], &[1, 2, 4, 4]).unwrap(), 0.75);
        assert!(accuracy_score::<u8>(&[], &[]).is_err());
        assert!(accuracy_score(&[1], &[1, 2]).is_err());
    }
}
