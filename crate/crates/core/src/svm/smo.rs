//! Soft-margin SVM dual solved by sequential minimal optimization.
//!
//! The solver minimizes `0.5 a'Qa - e'a` subject to `y'a = 0` and
//! `0 <= a_i <= C`, with `Q_ij = y_i y_j K(x_i, x_j)`. Each step picks the
//! maximal-violating `i` and, among the candidates that can pair with it, the
//! `j` with the largest second-order decrease of the objective. It stops once
//! the maximal KKT violation `m(a) - M(a)` drops below `tol`.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::kernel::Kernel;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

pub const DEFAULT_GAMMA: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// The solver gives up after `max_iter_factor * n` pair updates (at least
    /// 100 000) and reports the iterate as non-converged.
    pub max_iter_factor: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            kernel: Kernel::Rbf {
                gamma: DEFAULT_GAMMA,
            },
            c: 1.0,
            tol: 1e-3,
            max_iter_factor: 100,
        }
    }
}

impl SvmParams {
    pub fn rbf(c: f64, gamma: f64) -> Self {
        SvmParams {
            kernel: Kernel::Rbf { gamma },
            c,
            ..Self::default()
        }
    }

    pub fn linear(c: f64) -> Self {
        SvmParams {
            kernel: Kernel::Linear,
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::param(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter_factor == 0 {
            return Err(Error::param("max_iter_factor must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn max_iter(&self, n: usize) -> usize {
        self.max_iter_factor.saturating_mul(n).max(100_000)
    }
}

/// Full dual solution of a binary problem, in the caller's row order.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// `f(x) = sum_i alpha_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    /// Dual objective `sum(a) - 0.5 a'Qa` (to be maximized).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dense kernel matrix of the rows of `x`.
pub fn gram_matrix(kernel: &Kernel, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let mut gram = Array2::zeros((n, n));
    gram.as_slice_mut()
        .expect("fresh array is contiguous")
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, out)| {
            for (j, v) in out.iter_mut().enumerate() {
                *v = kernel.eval_slices(&rows[i], &rows[j]);
            }
        });
    gram
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Solves the dual for a precomputed kernel matrix and labels in {-1, +1}.
pub(crate) fn solve(
    gram: &Array2<f64>,
    y: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> DualSolution {
    let n = y.len();
    let k = gram.as_slice().expect("gram matrix is contiguous");
    let kd: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        // first index: maximal violator in I_up
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(y[t], alpha[t], c) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i_sel = Some(t);
                }
            }
        }
        // second index: best second-order gain in I_low
        let mut g_min_side = f64::NEG_INFINITY;
        let mut best_obj = f64::INFINITY;
        let mut j_sel = None;
        if let Some(i) = i_sel {
            let ki = &k[i * n..(i + 1) * n];
            for t in 0..n {
                if !in_low(y[t], alpha[t], c) {
                    continue;
                }
                let v = y[t] * grad[t];
                if v > g_min_side {
                    g_min_side = v;
                }
                let b = g_max + v;
                if b > 0.0 {
                    let mut a = kd[i] + kd[t] - 2.0 * ki[t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if g_max + g_min_side < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let ki = &k[i * n..(i + 1) * n];
        let kj = &k[j * n..(j + 1) * n];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kd[i] + kd[j] - 2.0 * ki[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let bias = -offset(&alpha, &grad, y, c);
    let sum_alpha: f64 = alpha.iter().sum();
    let a_dot_g: f64 = alpha.iter().zip(&grad).map(|(a, g)| a * g).sum();
    DualSolution {
        objective: 0.5 * sum_alpha - 0.5 * a_dot_g,
        alpha,
        bias,
        iterations,
        converged,
    }
}

/// Threshold `rho` of the decision function `sum a_i y_i K - rho`: the mean of
/// `y_i G_i` over free variables, or the midpoint of the feasible interval
/// when every variable sits at a bound.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    }
}

/// Row order that depends only on the multiset of `(row, label)` pairs.
pub(crate) fn canonical_order(x: ArrayView2<'_, f64>, y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b).iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].total_cmp(&y[b]))
    });
    order
}

pub(crate) fn check_binary_problem(x: ArrayView2<'_, f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::param(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::param("binary training needs at least two samples"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::param("binary labels must be -1 or +1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::param("binary training needs both classes"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("training features must be finite"));
    }
    Ok(())
}

/// Solves the binary dual on `x` with labels in {-1, +1}.
///
/// Rows are visited in a canonical order, so permuting the training set
/// permutes `alpha` accordingly and leaves the decision function unchanged.
pub fn solve_dual(x: ArrayView2<'_, f64>, y: &[f64], params: &SvmParams) -> Result<DualSolution> {
    params.validate()?;
    check_binary_problem(x, y)?;
    let order = canonical_order(x, y);
    let xs = x.select(ndarray::Axis(0), &order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let gram = gram_matrix(&params.kernel, xs.view());
    let sol = solve(&gram, &ys, params.c, params.tol, params.max_iter(y.len()));
    let mut alpha = vec![0.0; y.len()];
    for (k, &i) in order.iter().enumerate() {
        alpha[i] = sol.alpha[k];
    }
    Ok(DualSolution { alpha, ..sol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_four_points_linear() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let sol = solve_dual(x.view(), &y, &SvmParams::linear(1.0)).unwrap();
        assert!(sol.converged);
        let w0: f64 = (0..4).map(|i| sol.alpha[i] * y[i] * x[[i, 0]]).sum();
        let w1: f64 = (0..4).map(|i| sol.alpha[i] * y[i] * x[[i, 1]]).sum();
        // max-margin separator x0 = 1: w = (1, 0), b = -1
        assert!((w0 - 1.0).abs() < 1e-3, "w0 = {w0}");
        assert!(w1.abs() < 1e-3);
        assert!((-sol.bias / w0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn two_points_perpendicular_bisector() {
        let x = array![[1.0, 3.0], [3.0, 7.0]];
        let y = [1.0, -1.0];
        let sol = solve_dual(x.view(), &y, &SvmParams::linear(10.0)).unwrap();
        let f = |p: [f64; 2]| {
            (0..2)
                .map(|i| sol.alpha[i] * y[i] * (x[[i, 0]] * p[0] + x[[i, 1]] * p[1]))
                .sum::<f64>()
                + sol.bias
        };
        // midpoint lies on the boundary, offsets along the boundary stay on it
        assert!(f([2.0, 5.0]).abs() < 1e-9);
        assert!(f([2.0 + 2.0, 5.0 - 1.0]).abs() < 1e-9);
        assert!(f([1.0, 3.0]) > 0.0 && f([3.0, 7.0]) < 0.0);
    }

    #[test]
    fn rejects_degenerate_problems() {
        let x = array![[0.0], [1.0], [2.0]];
        let p = SvmParams::default();
        assert!(matches!(
            solve_dual(x.view(), &[1.0, 1.0, 1.0], &p),
            Err(Error::Param(_))
        ));
        assert!(solve_dual(x.view(), &[1.0, -1.0], &p).is_err());
        assert!(solve_dual(x.view(), &[1.0, -1.0, 0.5], &p).is_err());
        let bad = SvmParams { c: 0.0, ..p };
        assert!(solve_dual(x.view(), &[1.0, -1.0, 1.0], &bad).is_err());
    }

    #[test]
    fn gram_matrix_is_symmetric() {
        let x = array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]];
        let g = gram_matrix(&Kernel::Rbf { gamma: 0.4 }, x.view());
        assert_eq!(g, g.t());
        assert!(g.diag().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y: Vec<f64> = (0..40)
            .map(|i| if (i * 5) % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let order: Vec<usize> = (0..40).collect();
        let xs = x.select(ndarray::Axis(0), &order);
        let gram = gram_matrix(&Kernel::Rbf { gamma: 0.4 }, xs.view());
        let sol = solve(&gram, &y, 1.0, 1e-9, 2);
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
    }
}
