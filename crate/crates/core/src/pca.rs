//! Principal component analysis of feature rows.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::preprocess::Scaler;

/// Eigenvalues below this fraction of the largest one count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Per-column divisor applied after centering; all ones when the fit was
    /// not standardized.
    pub scale: Vec<f64>,
    /// One unit row per retained component.
    pub components: Array2<f64>,
    pub explained_variance: Vec<f64>,
    /// All eigenvalues of the covariance, descending.
    pub spectrum: Vec<f64>,
    /// Set when fewer components than requested carry nonzero variance.
    pub rank_deficient: bool,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.spectrum.iter().map(|v| v.max(0.0)).sum();
        self.explained_variance
            .iter()
            .map(|v| if total > 0.0 { v / total } else { 0.0 })
            .collect()
    }

    fn normalize(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::param(format!(
                "model has {} columns, input has {}",
                self.dim(),
                x.ncols()
            )));
        }
        let mut z = x.to_owned();
        for mut row in z.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        Ok(z)
    }

    /// Coordinates of each row along the retained components.
    pub fn project(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.normalize(x)?.dot(&self.components.t()))
    }

    /// Maps projected coordinates back to the input space.
    pub fn reconstruct(&self, coords: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if coords.ncols() != self.n_components() {
            return Err(Error::param(format!(
                "model has {} components, input has {}",
                self.n_components(),
                coords.ncols()
            )));
        }
        let mut x = coords.dot(&self.components);
        for mut row in x.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.scale[j] + self.mean[j];
            }
        }
        Ok(x)
    }
}

/// Fits `n_components` principal axes of the population covariance of `x`,
/// optionally after scaling each column to unit variance.
pub fn pca_fit(x: ArrayView2<'_, f64>, n_components: usize, standardize: bool) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n_components == 0 || n_components > d {
        return Err(Error::param(format!(
            "n_components must be in 1..={d}, got {n_components}"
        )));
    }
    if n < n_components {
        return Err(Error::param(format!(
            "{n} rows cannot support {n_components} components"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("features must be finite"));
    }
    let (mean, scale) = if standardize {
        let s = Scaler::fit(x)?;
        (s.mean().to_vec(), s.std().to_vec())
    } else {
        let m = x.mean_axis(Axis(0)).expect("n >= 1");
        (m.to_vec(), vec![1.0; d])
    };
    let mut z = x.to_owned();
    for mut row in z.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - mean[j]) / scale[j];
        }
    }
    let cov = z.t().dot(&z) / n as f64;
    let eig = symmetric_eigen(cov.view())?;
    let top = eig.values[0].max(0.0);
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v > RANK_TOL * top && v > 0.0)
        .count();
    let k = n_components.min(rank);
    let mut components = Array2::zeros((k, d));
    for c in 0..k {
        let mut axis: Array1<f64> = eig.vectors.column(c).to_owned();
        let lead = axis.iter().copied().fold(
            0.0f64,
            |best, v| if v.abs() > best.abs() { v } else { best },
        );
        if lead < 0.0 {
            axis.mapv_inplace(|v| -v);
        }
        components.row_mut(c).assign(&axis);
    }
    Ok(PcaModel {
        mean,
        scale,
        components,
        explained_variance: eig.values.iter().take(k).copied().collect(),
        spectrum: eig.values.to_vec(),
        rank_deficient: k < n_components,
    })
}
