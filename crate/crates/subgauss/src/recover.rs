//! The two reconstruction procedures: exact recovery of sparse vectors by
//! l1 minimization, and approximate reconstruction over projectable
//! convex sets by projected gradient descent, together with the error
//! bound audit tying the observed error to the fixed-point radius.

use crate::geometry::{r_star, SetDescriptor};
use crate::linalg::{apply, apply_transpose, norm2, project_l1_ball, SamplingMatrix};
use crate::lp::basis_pursuit;
use crate::rng::RngState;
use crate::{Error, Result};

/// Relative l-infinity threshold for declaring exact recovery.
pub const EXACT_SUCCESS_TOL: f64 = 1e-6;

/// A sparse vector stored as support indices and values.
#[derive(Debug, Clone)]
pub struct SparseVector {
    pub n: usize,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn new(n: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate support index {}",
                    w[0].0
                )));
            }
        }
        if entries.iter().any(|&(i, _)| i >= n) {
            return Err(Error::InvalidParameter("support index out of range".into()));
        }
        Ok(SparseVector {
            n,
            support: entries.iter().map(|&(i, _)| i).collect(),
            values: entries.iter().map(|&(_, v)| v).collect(),
        })
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub enum RecoveryOutcome {
    ExactSuccess,
    Failure { linf_error: f64 },
}

#[derive(Debug, Clone)]
pub struct RecoveryTrial {
    pub outcome: RecoveryOutcome,
    pub linf_error: f64,
    pub residual: f64,
}

impl RecoveryTrial {
    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, RecoveryOutcome::ExactSuccess)
    }
}

/// Measure z, run l1 minimization on the measurements, compare.
pub fn exact_recover(gamma: &SamplingMatrix, z: &SparseVector) -> Result<RecoveryTrial> {
    if z.n != gamma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "exact_recover: z lives in R^{} but the matrix has {} columns",
            z.n,
            gamma.cols()
        )));
    }
    let dense = z.to_dense();
    let y = apply(gamma, &dense)?;
    // Solver failure counts as a failed trial, not a crash of the sweep.
    let t = match basis_pursuit(gamma, &y) {
        Ok(t) => t,
        Err(_) => {
            return Ok(RecoveryTrial {
                outcome: RecoveryOutcome::Failure {
                    linf_error: f64::INFINITY,
                },
                linf_error: f64::INFINITY,
                residual: f64::INFINITY,
            });
        }
    };
    let linf = t
        .iter()
        .zip(&dense)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gy = apply(gamma, &t)?;
    let residual = gy
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let threshold = EXACT_SUCCESS_TOL * (1.0 + z.max_abs());
    Ok(RecoveryTrial {
        outcome: if linf <= threshold {
            RecoveryOutcome::ExactSuccess
        } else {
            RecoveryOutcome::Failure { linf_error: linf }
        },
        linf_error: linf,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub point: Vec<f64>,
    /// Final value of ((1/k) |Gamma t - y|^2)^(1/2).
    pub residual: f64,
    pub iterations: usize,
}

/// Projected gradient descent on the normalized least squares objective
/// over an l1 or Euclidean ball. The step is 1/lambda_max(Gamma^T Gamma)
/// (estimated by 50 power iterations), i.e. the unit step for the
/// objective |Gamma t - y|^2 / (2k) whose gradient has Lipschitz
/// constant lambda_max/k; the literal unit step for the un-halved
/// objective sits exactly at the stability boundary and stalls. Stops
/// when the residual reaches epsilon or after max_iters.
pub fn approx_reconstruct(
    gamma: &SamplingMatrix,
    y: &[f64],
    set: &SetDescriptor,
    epsilon: f64,
    max_iters: usize,
) -> Result<ApproxResult> {
    if epsilon < 0.0 {
        return Err(Error::InvalidParameter("epsilon must be nonnegative".into()));
    }
    let n = gamma.cols();
    let k = gamma.rows();
    if y.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "approx_reconstruct: y has length {}, expected {k}",
            y.len()
        )));
    }
    let project: Box<dyn Fn(&[f64]) -> Vec<f64>> = match set {
        SetDescriptor::L1Ball { n: sn, radius } => {
            if *sn != n {
                return Err(Error::DimensionMismatch("set dimension".into()));
            }
            let r = *radius;
            Box::new(move |x: &[f64]| project_l1_ball(x, r))
        }
        SetDescriptor::EuclideanBall { n: sn, radius } => {
            if *sn != n {
                return Err(Error::DimensionMismatch("set dimension".into()));
            }
            let r = *radius;
            Box::new(move |x: &[f64]| {
                let nx = norm2(x);
                if nx <= r {
                    x.to_vec()
                } else {
                    x.iter().map(|v| v * r / nx).collect()
                }
            })
        }
        _ => {
            return Err(Error::InvalidParameter(
                "approx_reconstruct needs a projectable set (l1 or Euclidean ball)".into(),
            ))
        }
    };

    // Largest eigenvalue of Gamma^T Gamma by 50 power iterations on a
    // fixed auxiliary stream.
    let mut aux = RngState::with_stream(0x9d2c_5680, 7);
    let mut u: Vec<f64> = (0..n).map(|_| aux.next_gaussian()).collect();
    let mut lambda_max = 1.0;
    for _ in 0..50 {
        let gu = apply(gamma, &u)?;
        let gtgu = apply_transpose(gamma, &gu)?;
        lambda_max = norm2(&gtgu);
        if lambda_max == 0.0 {
            break;
        }
        for (ui, vi) in u.iter_mut().zip(&gtgu) {
            *ui = vi / lambda_max;
        }
    }
    if lambda_max <= 0.0 {
        lambda_max = 1.0;
    }

    let mut t = vec![0.0; n];
    let mut last_obj = f64::INFINITY;
    for it in 0..=max_iters {
        let gt = apply(gamma, &t)?;
        let rvec: Vec<f64> = gt.iter().zip(y).map(|(a, b)| a - b).collect();
        let sq = rvec.iter().map(|v| v * v).sum::<f64>();
        let residual = (sq / k as f64).sqrt();
        // Convexity with the 1/L step makes the objective nonincreasing.
        debug_assert!(sq <= last_obj * (1.0 + 1e-9) + 1e-12);
        last_obj = sq;
        if residual <= epsilon || it == max_iters {
            return Ok(ApproxResult {
                point: t,
                residual,
                iterations: it,
            });
        }
        let grad = apply_transpose(gamma, &rvec)?;
        let moved: Vec<f64> = t
            .iter()
            .zip(&grad)
            .map(|(ti, gi)| ti - gi / lambda_max)
            .collect();
        t = project(&moved);
    }
    unreachable!("loop returns at max_iters");
}

#[derive(Debug, Clone)]
pub struct TheoremAAudit {
    pub observed_error: f64,
    pub bound_value: f64,
    pub satisfied: bool,
    pub residual: f64,
}

/// Reconstruct v from its measurements, then compare the observed error
/// |t - v| against 2 * residual + r*(theta, 2T). The difference set T - T
/// of a symmetric convex T is contained in 2T, which is what the doubled
/// set stands in for.
#[allow(clippy::too_many_arguments)]
pub fn theorem_a_audit(
    gamma: &SamplingMatrix,
    v: &[f64],
    set: &SetDescriptor,
    epsilon: f64,
    theta: f64,
    alpha: f64,
    c_norm: f64,
    max_iters: usize,
    width_samples: usize,
    rng: &mut RngState,
) -> Result<TheoremAAudit> {
    let y = apply(gamma, v)?;
    let rec = approx_reconstruct(gamma, &y, set, epsilon, max_iters)?;
    let observed = rec
        .point
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let doubled = match set {
        SetDescriptor::L1Ball { n, radius } => SetDescriptor::L1Ball {
            n: *n,
            radius: 2.0 * radius,
        },
        SetDescriptor::EuclideanBall { n, radius } => SetDescriptor::EuclideanBall {
            n: *n,
            radius: 2.0 * radius,
        },
        _ => {
            return Err(Error::InvalidParameter(
                "theorem_a_audit needs a symmetric convex set (l1 or Euclidean ball)".into(),
            ))
        }
    };
    let fp = r_star(
        theta,
        &doubled,
        gamma.rows(),
        alpha,
        c_norm,
        width_samples,
        rng,
    )?;
    let bound = 2.0 * rec.residual + fp.rho;
    Ok(TheoremAAudit {
        observed_error: observed,
        bound_value: bound,
        satisfied: observed <= bound,
        residual: rec.residual,
    })
}

/// Signals for the error-scaling sweep: one dominant spike carrying a
/// quarter of the l1 mass plus a 1/i compressible bulk, random signs and
/// placement, normalized to the unit l1 sphere. The best m-term tail of
/// this family decays like the fixed-point radius, so the observed
/// reconstruction error tracks the predicted rate.
pub fn compressible_signal(n: usize, rng: &mut RngState) -> Vec<f64> {
    let head = 0.25;
    let mut mags: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let total: f64 = mags.iter().sum();
    for v in mags.iter_mut() {
        *v *= (1.0 - head) / total;
    }
    let mut x = vec![0.0; n];
    let perm = rng.choose_indices(n, n);
    for (v, &j) in mags.iter().zip(&perm) {
        x[j] = v * rng.next_sign();
    }
    let spike = rng.next_index(n);
    x[spike] = rng.next_sign() * (head + x[spike].abs());
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    for v in x.iter_mut() {
        *v /= l1;
    }
    x
}

/// Uniform (cone measure) point of the l1 sphere: exponential magnitudes
/// normalized to sum 1, with random signs.
pub fn random_l1_sphere_point(n: usize, rng: &mut RngState) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.next_exponential()).collect();
    let total: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v = *v / total * rng.next_sign();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, Ensemble};

    #[test]
    fn zero_vector_recovers() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 4, 8, &mut RngState::new(1)).unwrap();
        let z = SparseVector::new(8, vec![]).unwrap();
        let trial = exact_recover(&gamma, &z).unwrap();
        assert!(trial.succeeded());
    }

    #[test]
    fn identity_matrix_recovers_everything() {
        let n = 6;
        let mut gamma = SamplingMatrix::zeros(n, n);
        for i in 0..n {
            gamma.set(i, i, 1.0);
        }
        let z = SparseVector::new(n, vec![(0, -2.0), (3, 1.5), (5, 0.25)]).unwrap();
        let trial = exact_recover(&gamma, &z).unwrap();
        assert!(trial.succeeded(), "linf error {}", trial.linf_error);
    }

    #[test]
    fn sparse_signals_recover_at_moderate_undersampling() {
        // n=64, k=32, 3-sparse sign vectors: success rate at least 0.95
        // over a seed sweep (well inside the recoverable regime).
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = RngState::new(10_000 + seed);
            let gamma = sample_matrix(&Ensemble::gaussian(), 32, 64, &mut rng).unwrap();
            let idx = rng.choose_indices(64, 3);
            let z = SparseVector::new(
                64,
                idx.iter().map(|&i| (i, rng.next_sign())).collect(),
            )
            .unwrap();
            if exact_recover(&gamma, &z).unwrap().succeeded() {
                ok += 1;
            }
        }
        assert!(ok >= 95, "success rate {ok}/100");
    }

    #[test]
    fn success_rate_monotone_in_sparsity() {
        // Nonincreasing success curve in m, with 5% slack, at n=48, k=24.
        let trials = 40;
        let mut rates = Vec::new();
        for m in [1usize, 4, 8, 12, 16] {
            let mut ok = 0;
            for t in 0..trials {
                let mut rng = RngState::new(5_000 + 100 * m as u64 + t);
                let gamma = sample_matrix(&Ensemble::gaussian(), 24, 48, &mut rng).unwrap();
                let idx = rng.choose_indices(48, m);
                let z = SparseVector::new(
                    48,
                    idx.iter().map(|&i| (i, rng.next_sign())).collect(),
                )
                .unwrap();
                if exact_recover(&gamma, &z).unwrap().succeeded() {
                    ok += 1;
                }
            }
            rates.push(ok as f64 / trials as f64);
        }
        for w in rates.windows(2) {
            assert!(
                w[1] <= w[0] + 0.05,
                "success rates must not increase in m: {rates:?}"
            );
        }
    }

    #[test]
    fn approx_zero_measurements() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 8, 16, &mut RngState::new(2)).unwrap();
        let set = SetDescriptor::L1Ball { n: 16, radius: 1.0 };
        let res = approx_reconstruct(&gamma, &vec![0.0; 8], &set, 0.0, 100).unwrap();
        assert_eq!(res.iterations, 0);
        assert!(norm2(&res.point) == 0.0);
    }

    #[test]
    fn approx_feasible_target_reaches_epsilon() {
        let mut rng = RngState::new(3);
        let mut converged = 0;
        for _ in 0..20 {
            let gamma = sample_matrix(&Ensemble::gaussian(), 48, 128, &mut rng).unwrap();
            let v = random_l1_sphere_point(128, &mut rng);
            let y = apply(&gamma, &v).unwrap();
            let set = SetDescriptor::L1Ball { n: 128, radius: 1.0 };
            let res = approx_reconstruct(&gamma, &y, &set, 1e-4, 10_000).unwrap();
            if res.residual <= 1e-4 {
                converged += 1;
            }
        }
        assert!(converged >= 19, "only {converged}/20 runs reached epsilon");
    }

    #[test]
    fn approx_rejects_unprojectable_set() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 4, 8, &mut RngState::new(4)).unwrap();
        let set = SetDescriptor::SparseCap { n: 8, m: 2 };
        assert!(approx_reconstruct(&gamma, &vec![0.0; 4], &set, 0.1, 10).is_err());
    }

    #[test]
    fn full_rank_square_case_error_vanishes_with_epsilon() {
        // k = n with a well-conditioned matrix: as epsilon shrinks the
        // observed error goes to zero.
        let mut rng = RngState::new(6);
        let n = 24;
        let gamma = sample_matrix(&Ensemble::gaussian(), n, n, &mut rng).unwrap();
        let v = random_l1_sphere_point(n, &mut rng);
        let y = apply(&gamma, &v).unwrap();
        let set = SetDescriptor::L1Ball { n, radius: 1.0 };
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let res = approx_reconstruct(&gamma, &y, &set, eps, 200_000).unwrap();
            let err = res
                .point
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= prev * (1.0 + 1e-9), "error must shrink with epsilon");
            prev = err;
        }
        assert!(prev < 1e-3, "residual 1e-6 should pin the point, err {prev}");
    }

    #[test]
    fn audit_bound_holds_when_error_zero() {
        let mut rng = RngState::new(7);
        let n = 16;
        let gamma = sample_matrix(&Ensemble::gaussian(), n, n, &mut rng).unwrap();
        let mut v = vec![0.0; n];
        v[3] = 1.0;
        let set = SetDescriptor::L1Ball { n, radius: 1.0 };
        let audit = theorem_a_audit(
            &gamma,
            &v,
            &set,
            1e-8,
            0.5,
            crate::ensemble::ALPHA_GAUSSIAN,
            1.0,
            100_000,
            64,
            &mut rng,
        )
        .unwrap();
        assert!(audit.bound_value >= 0.0);
        assert!(
            audit.observed_error <= audit.bound_value,
            "obs {} bound {}",
            audit.observed_error,
            audit.bound_value
        );
    }

    #[test]
    fn compressible_signal_is_unit_l1() {
        let mut rng = RngState::new(8);
        for _ in 0..10 {
            let v = compressible_signal(64, &mut rng);
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            assert!((l1 - 1.0).abs() < 1e-12);
        }
    }
}
