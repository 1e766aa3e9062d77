use ndarray::ArrayView1;

use crate::error::{Error, Result};

/// Kernel function of the SVM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `exp(-gamma * |x - z|^2)`.
    Rbf { gamma: f64 },
    /// `<x, z>`.
    Linear,
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Rbf { .. } => "rbf",
            Kernel::Linear => "linear",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::param(format!("rbf gamma must be > 0, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the kernel on two equally long slices. Lengths are not checked.
    #[inline]
    pub fn eval_slices(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn eval(&self, x: ArrayView1<'_, f64>, z: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != z.len() {
            return Err(Error::param(format!(
                "kernel arguments differ in dimension: {} vs {}",
                x.len(),
                z.len()
            )));
        }
        Ok(match (x.as_slice(), z.as_slice()) {
            (Some(a), Some(b)) => self.eval_slices(a, b),
            _ => self.eval_slices(&x.to_vec(), &z.to_vec()),
        })
    }
}
