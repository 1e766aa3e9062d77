mod support;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::dual_oracle;
use uldl_core::svm::{gram_matrix, solve_dual, train, train_binary, Kernel, SvmParams};

struct Instance {
    x: Array2<f64>,
    y: Vec<f64>,
    held_out: Array2<f64>,
    params: SvmParams,
}

fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(2..=12);
    let d = rng.random_range(1..=3);
    let mut y: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let shift = rng.random_range(0.0..2.0);
    let x = Array2::from_shape_fn((n, d), |(i, _)| rng.random_range(-1.0..1.0) + shift * y[i]);
    let held_out = Array2::from_shape_fn((20, d), |_| rng.random_range(-3.0..3.0));
    let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    let kernel = if rng.random_bool(0.5) {
        Kernel::Rbf {
            gamma: rng.random_range(0.1..2.0),
        }
    } else {
        Kernel::Linear
    };
    Instance {
        x,
        y,
        held_out,
        params: SvmParams {
            kernel,
            c,
            tol: 1e-3,
            max_iter_factor: 100,
        },
    }
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn decision(k: &Kernel, x: &Array2<f64>, y: &[f64], alpha: &[f64], bias: f64, p: &[f64]) -> f64 {
    x.outer_iter()
        .enumerate()
        .map(|(i, r)| alpha[i] * y[i] * k.eval_slices(r.as_slice().unwrap(), p))
        .sum::<f64>()
        + bias
}

/// Bias implied by the oracle's alpha: average over free multipliers, or the
/// midpoint of the KKT interval when none is free.
fn oracle_bias(k: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let f = |i: usize| (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>();
    let eps = 1e-7 * c.max(1.0);
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > eps && alpha[i] < c - eps)
        .collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - f(i)).sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let b = y[i] - f(i);
        let at_zero = alpha[i] <= eps;
        // b >= y_i - f_i for (y=+1, a=0) and (y=-1, a=C); <= otherwise
        if (y[i] > 0.0) == at_zero {
            lo = lo.max(b);
        } else {
            hi = hi.min(b);
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn smo_matches_projected_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0usize;
    let mut agreed = 0usize;
    for case in 0..200 {
        let inst = instance(&mut rng);
        let smo = solve_dual(inst.x.view(), &inst.y, &inst.params).unwrap();
        assert!(smo.converged, "case {case} did not converge");
        let k = rows(&gram_matrix(&inst.params.kernel, inst.x.view()));
        let oracle = dual_oracle::solve(&k, &inst.y, inst.params.c, 20_000);
        let smo_obj = dual_oracle::dual_objective(&k, &inst.y, &smo.alpha);
        assert!((smo_obj - smo.objective).abs() < 1e-9 * smo_obj.abs().max(1.0));
        assert!(
            (smo_obj - oracle.objective).abs() < 1e-4,
            "case {case}: smo {smo_obj} oracle {}",
            oracle.objective
        );
        let ob = oracle_bias(&k, &inst.y, &oracle.alpha, inst.params.c);
        for p in inst.held_out.outer_iter() {
            let p = p.as_slice().unwrap();
            let fs = decision(
                &inst.params.kernel,
                &inst.x,
                &inst.y,
                &smo.alpha,
                smo.bias,
                p,
            );
            let fo = decision(&inst.params.kernel, &inst.x, &inst.y, &oracle.alpha, ob, p);
            // points within the solver tolerance of the boundary are not decided
            if fs.abs() > 1e-2 {
                compared += 1;
                if fs.signum() == fo.signum() {
                    agreed += 1;
                }
            }
        }
    }
    assert_eq!(
        agreed,
        compared,
        "{} of {compared} held-out predictions differ",
        compared - agreed
    );
}

#[test]
fn kkt_conditions_hold_at_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let inst = instance(&mut rng);
        let c = inst.params.c;
        let sol = solve_dual(inst.x.view(), &inst.y, &inst.params).unwrap();
        let k = rows(&gram_matrix(&inst.params.kernel, inst.x.view()));
        let n = inst.y.len();
        let balance: f64 = sol.alpha.iter().zip(&inst.y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-10);
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        // with G_i = y_i f(x_i) - 1 and b the bias, the maximal violation
        // max_{I_up} -y G  -  min_{I_low} -y G  stays below tol
        let g: Vec<f64> = (0..n)
            .map(|i| {
                inst.y[i]
                    * (0..n)
                        .map(|j| sol.alpha[j] * inst.y[j] * k[i][j])
                        .sum::<f64>()
                    - 1.0
            })
            .collect();
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for i in 0..n {
            let v = -inst.y[i] * g[i];
            let (y, a) = (inst.y[i], sol.alpha[i]);
            if (y > 0.0 && a < c) || (y < 0.0 && a > 0.0) {
                up = up.max(v);
            }
            if (y > 0.0 && a > 0.0) || (y < 0.0 && a < c) {
                low = low.min(v);
            }
        }
        assert!(up - low < 1e-3 + 1e-12, "violation {}", up - low);
        // margin conditions, relaxed by the stopping tolerance
        for i in 0..n {
            let margin = g[i] + 1.0 + inst.y[i] * sol.bias;
            let a = sol.alpha[i];
            if a == 0.0 {
                assert!(margin >= 1.0 - 1e-3, "a=0 but margin {margin}");
            } else if a == c {
                assert!(margin <= 1.0 + 1e-3, "a=C but margin {margin}");
            } else {
                assert!((margin - 1.0).abs() <= 1e-3, "free but margin {margin}");
            }
        }
    }
}

#[test]
fn predictions_do_not_depend_on_row_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 60;
    let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
    let labels: Vec<u8> = (0..n)
        .map(|i| {
            let s = x[[i, 0]] + x[[i, 1]] * x[[i, 2]];
            if s > 0.5 {
                1
            } else if s > -0.5 {
                2
            } else {
                3
            }
        })
        .collect();
    let params = SvmParams::rbf(1.0, 0.4);
    let base = train(x.view(), &labels, &params).unwrap();
    let probe = Array2::from_shape_fn((40, 3), |_| rng.random_range(-2.5..2.5));
    let want = base.predict(probe.view()).unwrap();
    let mut order: Vec<usize> = (0..n).rev().collect();
    order.rotate_left(17);
    let xs = x.select(ndarray::Axis(0), &order);
    let ls: Vec<u8> = order.iter().map(|&i| labels[i]).collect();
    let permuted = train(xs.view(), &ls, &params).unwrap();
    assert_eq!(permuted.predict(probe.view()).unwrap(), want);
    assert_eq!(permuted, base);
}

#[test]
fn toy_linear_margin_sits_at_one() {
    let x = ndarray::array![
        [0.0, 0.0],
        [0.2, 1.0],
        [0.0, -1.0],
        [2.0, 0.0],
        [1.8, 1.0],
        [2.0, -1.0]
    ];
    let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
    let m = train_binary(x.view(), &y, &SvmParams::linear(100.0), 1, 2).unwrap();
    let w: Vec<f64> = (0..2)
        .map(|j| {
            (0..m.n_support())
                .map(|s| m.dual_coefs[s] * m.support_vectors[[s, j]])
                .sum()
        })
        .collect();
    let crossing = -m.bias / w[0];
    assert!(w[1].abs() < 1e-2 * w[0].abs());
    assert!((crossing - 1.0).abs() < 0.1, "boundary at x1 = {crossing}");
}

#[test]
fn rbf_gram_matrices_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..5 {
        let x = Array2::from_shape_fn((50, 10), |_| rng.random_range(-3.0..3.0));
        let g = gram_matrix(&Kernel::Rbf { gamma: 0.4 }, x.view());
        let ours = uldl_core::linalg::symmetric_eigen(g.view()).unwrap();
        let reference =
            nalgebra::DMatrix::from_row_slice(50, 50, g.as_slice().unwrap()).symmetric_eigen();
        let ref_min = reference
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let our_min = ours.values[49];
        assert!(our_min >= -1e-8, "trial {trial}: min eigenvalue {our_min}");
        assert!((our_min - ref_min).abs() < 1e-9);
        let mut ref_sorted: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        ref_sorted.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.values.iter().zip(&ref_sorted) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
