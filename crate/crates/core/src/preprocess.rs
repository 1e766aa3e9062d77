//! Feature extraction, seeded shuffling, train/test split and standardization.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::labeling::DecouplingClass;
use crate::numfmt::format_list;
use crate::rng;
use crate::sample::{MeasurementSample, NUM_FEATURES};

/// Labeled 2.6 GHz feature rows (5 K-factors, then 5 RSRPs).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    x: Array2<f64>,
    labels: Vec<DecouplingClass>,
}

impl FeatureMatrix {
    pub fn new(x: Array2<f64>, labels: Vec<DecouplingClass>) -> Result<Self> {
        if x.ncols() != NUM_FEATURES {
            return Err(Error::param(format!(
                "feature matrix needs {NUM_FEATURES} columns, got {}",
                x.ncols()
            )));
        }
        if x.nrows() != labels.len() {
            return Err(Error::param(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        Ok(FeatureMatrix { x, labels })
    }

    /// Extracts features and labels; every sample must be labeled.
    pub fn from_samples(samples: &[MeasurementSample]) -> Result<Self> {
        let mut x = Array2::zeros((samples.len(), NUM_FEATURES));
        let mut labels = Vec::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            let label = s
                .label
                .ok_or_else(|| Error::data(format!("sample {} has no label", s.sample_id)))?;
            labels.push(label);
            for (j, v) in s.features().into_iter().enumerate() {
                x[[i, j]] = v;
            }
        }
        Ok(FeatureMatrix { x, labels })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn labels(&self) -> &[DecouplingClass] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            x: self.x.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> FeatureMatrix {
        let n = n.min(self.len());
        FeatureMatrix {
            x: self.x.slice(ndarray::s![..n, ..]).to_owned(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

/// Seeded Fisher-Yates permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, rng::SHUFFLE, 0);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Co-permutes rows and labels.
pub fn shuffle(features: &FeatureMatrix, seed: u64) -> FeatureMatrix {
    features.select(&permutation(features.len(), seed))
}

/// First `n_train` rows for training, the remainder (in order) for testing.
pub fn split(features: &FeatureMatrix, n_train: usize) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let n = features.len();
    if n_train == 0 || n_train >= n {
        return Err(Error::param(format!(
            "training size must satisfy 0 < n_train < {n}, got {n_train}"
        )));
    }
    let train: Vec<usize> = (0..n_train).collect();
    let test: Vec<usize> = (n_train..n).collect();
    Ok((features.select(&train), features.select(&test)))
}

/// Per-column z-score parameters (population standard deviation).
#[derive(Clone, Debug, PartialEq)]
pub struct Scaler {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Scaler {
    /// Fits mean and population std per column. Constant columns get std 1.
    pub fn fit(x: ArrayView2<'_, f64>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::param("cannot fit a scaler on zero rows"));
        }
        let mean: Vec<f64> = x
            .columns()
            .into_iter()
            .map(|c| c.sum() / n as f64)
            .collect();
        let std = x
            .columns()
            .into_iter()
            .zip(&mean)
            .map(|(c, &m)| {
                let var = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
                let s = var.sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Scaler { mean, std })
    }

    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(Error::data(
                "scaler mean and std must be nonempty and equally long",
            ));
        }
        if std.iter().any(|s| !(*s > 0.0 && s.is_finite())) || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::data(
                "scaler std must be positive and all values finite",
            ));
        }
        Ok(Scaler { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    fn check_dim(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::param(format!(
                "scaler fitted on {} columns, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(&x)?;
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(&z)?;
        let mut out = z.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.std[j] + self.mean[j];
            }
        }
        Ok(out)
    }

    /// Writes `scaler.mean` / `scaler.std` entries into `kv`.
    pub fn write_kv(&self, kv: &mut KvMap) {
        kv.insert("scaler.dim", self.dim());
        kv.insert("scaler.mean", format_list(&self.mean));
        kv.insert("scaler.std", format_list(&self.std));
    }

    pub fn read_kv(kv: &KvMap) -> Result<Self> {
        let dim: usize = kv.require("scaler.dim")?;
        Self::from_parts(
            kv.require_f64_list("scaler.mean", dim)?,
            kv.require_f64_list("scaler.std", dim)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::class_histogram;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy(n: usize) -> FeatureMatrix {
        let x = Array2::from_shape_fn((n, NUM_FEATURES), |(i, j)| (i * 31 + j * 7) as f64 % 17.0);
        let labels = (0..n)
            .map(|i| DecouplingClass::from_number((i % 4) as u8 + 1).unwrap())
            .collect();
        FeatureMatrix::new(x, labels).unwrap()
    }

    #[test]
    fn shuffle_single_row_is_identity() {
        let f = toy(1);
        assert_eq!(shuffle(&f, 99), f);
    }

    #[test]
    fn shuffle_is_deterministic_and_preserves_histogram() {
        let f = toy(1000);
        let a = shuffle(&f, 4);
        assert_eq!(a, shuffle(&f, 4));
        assert_ne!(a, shuffle(&f, 5));
        assert_eq!(class_histogram(a.labels()), class_histogram(f.labels()));
    }

    #[test]
    fn shuffle_co_permutes_rows_and_labels() {
        let f = toy(50);
        let perm = permutation(50, 8);
        let s = shuffle(&f, 8);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(s.x().row(k), f.x().row(i));
            assert_eq!(s.labels()[k], f.labels()[i]);
        }
    }

    #[test]
    fn split_sizes() {
        let f = toy(3800);
        let (tr, te) = split(&f, 3000).unwrap();
        assert_eq!((tr.len(), te.len()), (3000, 800));
        assert_eq!(te.x().row(0), f.x().row(3000));
        let (_, te) = split(&f, 3799).unwrap();
        assert_eq!(te.len(), 1);
        assert!(matches!(split(&f, 0), Err(Error::Param(_))));
        assert!(split(&f, 3800).is_err());
    }

    #[test]
    fn two_point_z_score() {
        let x = array![[0.0], [2.0]];
        let s = Scaler::fit(x.view()).unwrap();
        assert_eq!(s.mean(), &[1.0]);
        assert_eq!(s.std(), &[1.0]);
        assert_eq!(s.transform(x.view()).unwrap(), array![[-1.0], [1.0]]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let x = array![[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]];
        let s = Scaler::fit(x.view()).unwrap();
        assert_eq!(s.std()[0], 1.0);
        let z = s.transform(x.view()).unwrap();
        assert!(z.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fit_set_is_standardized() {
        let f = toy(500);
        let s = Scaler::fit(f.x()).unwrap();
        let z = s.transform(f.x()).unwrap();
        for col in z.columns() {
            let m = col.mean().unwrap();
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
            assert!(m.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scaler_dimension_mismatch() {
        let s = Scaler::fit(array![[1.0, 2.0], [3.0, 5.0]].view()).unwrap();
        assert!(s.transform(array![[1.0]].view()).is_err());
        assert!(Scaler::fit(Array2::<f64>::zeros((0, 3)).view()).is_err());
    }

    #[test]
    fn scaler_kv_round_trip() {
        let f = toy(100);
        let s = Scaler::fit(f.x()).unwrap();
        let mut kv = KvMap::new();
        s.write_kv(&mut kv);
        let back = Scaler::read_kv(&KvMap::parse(&kv.to_string()).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn unlabeled_samples_rejected() {
        let s = MeasurementSample {
            sample_id: 7,
            track_id: 0,
            position: Default::default(),
            sub6: Default::default(),
            mmwave: Default::default(),
            los: None,
            label: None,
        };
        let err = FeatureMatrix::from_samples(&[s]).unwrap_err();
        assert!(err.to_string().contains("sample 7"));
    }

    proptest! {
        #[test]
        fn inverse_round_trip(rows in prop::collection::vec(prop::collection::vec(-150.0f64..50.0, 3), 2..40)) {
            let n = rows.len();
            let x = Array2::from_shape_vec((n, 3), rows.concat()).unwrap();
            let s = Scaler::fit(x.view()).unwrap();
            let back = s.inverse_transform(s.transform(x.view()).unwrap().view()).unwrap();
            for (a, b) in back.iter().zip(x.iter()) {
                prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
            }
        }

        #[test]
        fn permutation_is_a_bijection(n in 0usize..300, seed in any::<u64>()) {
            let mut p = permutation(n, seed);
            p.sort_unstable();
            prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
    }
}
