//! Isotropic subgaussian row distributions and their diagnostics.
//!
//! Each built-in ensemble has independent coordinates with mean zero and
//! unit variance, so E<X,y>^2 = |y|^2 for every direction y. The psi2
//! constant stored on the ensemble is the exact psi2 norm of a single
//! coordinate, i.e. the root of E exp(Y^2/u^2) = 2:
//!
//! - Rademacher: exp(1/u^2) = 2 gives u = 1/sqrt(ln 2);
//! - Gaussian: (1 - 2/u^2)^(-1/2) = 2 gives u = sqrt(8/3);
//! - Uniform on [-sqrt(3), sqrt(3)]: solved numerically once from
//!   (u sqrt(pi) / (2 sqrt(3))) erfi(sqrt(3)/u) = 2.

use crate::linalg::SamplingMatrix;
use crate::rng::RngState;
use crate::{Error, Result};

/// psi2 norm of one Rademacher coordinate, 1/sqrt(ln 2).
pub const ALPHA_RADEMACHER: f64 = 1.2011224087864498;
/// psi2 norm of one standard normal coordinate, sqrt(8/3).
pub const ALPHA_GAUSSIAN: f64 = 1.632993161855452;
/// psi2 norm of one uniform [-sqrt(3), sqrt(3)] coordinate.
pub const ALPHA_BOUNDED_UNIFORM: f64 = 1.338369155430911;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gaussian,
    Rademacher,
    BoundedUniform,
}

/// A row distribution together with its psi2 constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub alpha: f64,
}

impl Ensemble {
    pub fn gaussian() -> Self {
        Ensemble {
            kind: EnsembleKind::Gaussian,
            alpha: ALPHA_GAUSSIAN,
        }
    }

    pub fn rademacher() -> Self {
        Ensemble {
            kind: EnsembleKind::Rademacher,
            alpha: ALPHA_RADEMACHER,
        }
    }

    pub fn bounded_uniform() -> Self {
        Ensemble {
            kind: EnsembleKind::BoundedUniform,
            alpha: ALPHA_BOUNDED_UNIFORM,
        }
    }

    pub fn of_kind(kind: EnsembleKind) -> Self {
        match kind {
            EnsembleKind::Gaussian => Ensemble::gaussian(),
            EnsembleKind::Rademacher => Ensemble::rademacher(),
            EnsembleKind::BoundedUniform => Ensemble::bounded_uniform(),
        }
    }

    pub fn draw(&self, rng: &mut RngState) -> f64 {
        match self.kind {
            EnsembleKind::Gaussian => rng.next_gaussian(),
            EnsembleKind::Rademacher => rng.next_sign(),
            EnsembleKind::BoundedUniform => {
                let s = 3.0_f64.sqrt();
                rng.next_range(-s, s)
            }
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "rademacher" => Ok(EnsembleKind::Rademacher),
            "uniform" | "bounded-uniform" | "boundeduniform" => Ok(EnsembleKind::BoundedUniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble kind '{other}' (expected gaussian|rademacher|uniform)"
            ))),
        }
    }
}

/// Sample a k x n matrix whose rows are i.i.d. draws from the ensemble.
/// Deterministic given the generator state.
pub fn sample_matrix(
    ensemble: &Ensemble,
    k: usize,
    n: usize,
    rng: &mut RngState,
) -> Result<SamplingMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "sample_matrix: k and n must be positive".into(),
        ));
    }
    let entries: Vec<f64> = (0..k * n).map(|_| ensemble.draw(rng)).collect();
    Ok(SamplingMatrix::from_rows(k, n, entries))
}

/// Empirical second moment of <X, y> along one direction.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub direction_index: usize,
    pub empirical_moment: f64,
    pub std_err: f64,
}

/// For each unit direction y, estimate E<X,y>^2 over `num_samples` fresh
/// draws of X, with the standard error of the mean.
pub fn isotropy_check(
    ensemble: &Ensemble,
    n: usize,
    num_samples: usize,
    directions: &[Vec<f64>],
    rng: &mut RngState,
) -> Result<Vec<MomentReport>> {
    if num_samples == 0 {
        return Err(Error::InvalidParameter(
            "isotropy_check: num_samples must be positive".into(),
        ));
    }
    for (i, y) in directions.iter().enumerate() {
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "direction {i} has length {}, expected {n}",
                y.len()
            )));
        }
        let norm = crate::linalg::norm2(y);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "direction {i} has norm {norm}, expected 1 (tolerance 1e-9)"
            )));
        }
    }
    let mut sums = vec![0.0; directions.len()];
    let mut sq_sums = vec![0.0; directions.len()];
    let mut x = vec![0.0; n];
    for _ in 0..num_samples {
        for xi in x.iter_mut() {
            *xi = ensemble.draw(rng);
        }
        for (j, y) in directions.iter().enumerate() {
            let v = crate::linalg::dot(&x, y);
            let v2 = v * v;
            sums[j] += v2;
            sq_sums[j] += v2 * v2;
        }
    }
    let m = num_samples as f64;
    Ok(directions
        .iter()
        .enumerate()
        .map(|(j, _)| {
            let mean = sums[j] / m;
            let var = (sq_sums[j] / m - mean * mean).max(0.0);
            MomentReport {
                direction_index: j,
                empirical_moment: mean,
                std_err: (var / m).sqrt(),
            }
        })
        .collect())
}

/// Empirical psi2 norm: the root u of mean(exp(Y^2/u^2)) = 2, found by
/// bisection on [max|Y|/10, 10 max|Y|]. All-zero samples give 0; if the
/// empirical mean still exceeds 2 at the upper bracket the norm is
/// effectively unbounded at this sample and +inf is returned.
pub fn psi2_estimate(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("psi2_estimate: no samples".into()));
    }
    let max_abs = samples.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let mean_exp = |u: f64| -> f64 {
        let inv = 1.0 / (u * u);
        samples.iter().map(|y| (y * y * inv).exp()).sum::<f64>() / samples.len() as f64
    };
    let mut lo = max_abs / 10.0;
    let mut hi = max_abs * 10.0;
    if mean_exp(hi) > 2.0 {
        return Ok(f64::INFINITY);
    }
    if mean_exp(lo) <= 2.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_exp(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
