//! The empirical process Z_x = |Gamma x|^2 / k - 1 over classes of linear
//! functionals, its supremum scaling in the sample size, and exhaustive
//! two-sided isometry audits on sparse caps.

use crate::ensemble::{sample_matrix, Ensemble};
use crate::geometry::SetDescriptor;
use crate::linalg::{apply, gram_extreme_eigs, norm2, SamplingMatrix};
use crate::rng::RngState;
use crate::{Error, Result};

/// A finite class of linear functionals f_x = <., x>, each encoded by its
/// vector. `normalized` asserts every |x|_2 = 1, so E f^2 = 1 under any
/// isotropic measure and no second Monte Carlo layer is needed.
#[derive(Debug, Clone)]
pub struct FunctionalClass {
    pub points: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl FunctionalClass {
    pub fn unit_sphere_points(points: Vec<Vec<f64>>) -> Result<Self> {
        for (i, x) in points.iter().enumerate() {
            let nx = norm2(x);
            if (nx - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "class point {i} has norm {nx}, expected 1 (tolerance 1e-9)"
                )));
            }
        }
        Ok(FunctionalClass {
            points,
            normalized: true,
        })
    }

    pub fn canonical_basis(n: usize) -> Self {
        let points = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        FunctionalClass {
            points,
            normalized: true,
        }
    }
}

/// Per-point values of the process at one sampled matrix.
#[derive(Debug, Clone)]
pub struct ProcessReport {
    /// Z_x = |Gamma x|^2/k - E f^2 for each class point.
    pub z_values: Vec<f64>,
    /// W_x = |Gamma x| / sqrt(k).
    pub w_values: Vec<f64>,
    pub sup_abs_z: f64,
    pub argmax: usize,
    pub k: usize,
}

/// Evaluate Z and W for every class point against one matrix.
pub fn process_eval(class: &FunctionalClass, gamma: &SamplingMatrix) -> Result<ProcessReport> {
    if !class.normalized {
        return Err(Error::InvalidParameter(
            "process_eval expects a normalized class (E f^2 = 1)".into(),
        ));
    }
    let k = gamma.rows();
    let mut z_values = Vec::with_capacity(class.points.len());
    let mut w_values = Vec::with_capacity(class.points.len());
    for x in &class.points {
        let gx = apply(gamma, x)?;
        let w2 = gx.iter().map(|v| v * v).sum::<f64>() / k as f64;
        w_values.push(w2.sqrt());
        z_values.push(w2 - 1.0);
    }
    let (argmax, sup_abs_z) = z_values
        .iter()
        .map(|z| z.abs())
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap_or((0, 0.0));
    Ok(ProcessReport {
        z_values,
        w_values,
        sup_abs_z,
        argmax,
        k,
    })
}

/// Mean of sup |Z| at one sample size.
#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub k: usize,
    pub mean_sup_z: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingDiagnostic {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of log mean sup|Z| against log k.
    pub slope: f64,
}

/// Monte Carlo mean of sup_x |Z_x| across a grid of sample sizes, with
/// the fitted log-log slope. Theory predicts the mean decays like
/// 1/sqrt(k) when the class is fixed.
pub fn sup_scaling_diag(
    class: &FunctionalClass,
    ensemble: &Ensemble,
    k_grid: &[usize],
    trials: usize,
    rng: &mut RngState,
) -> Result<ScalingDiagnostic> {
    if k_grid.windows(2).any(|w| w[0] >= w[1]) || k_grid.first().is_none_or(|&k| k < 4) {
        return Err(Error::InvalidParameter(
            "k_grid must be strictly increasing with minimum at least 4".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let n = class
        .points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::EmptyInput("empty functional class".into()))?;
    let mut points = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..trials {
            let gamma = sample_matrix(ensemble, k, n, rng)?;
            let rep = process_eval(class, &gamma)?;
            sum += rep.sup_abs_z;
            sumsq += rep.sup_abs_z * rep.sup_abs_z;
        }
        let mean = sum / trials as f64;
        let var = (sumsq / trials as f64 - mean * mean).max(0.0);
        points.push(ScalingPoint {
            k,
            mean_sup_z: mean,
            std_err: (var / trials as f64).sqrt(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.k as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_sup_z.ln()).collect();
    Ok(ScalingDiagnostic {
        points,
        slope: least_squares_slope(&xs, &ys),
    })
}

/// Least-squares slope of y against x.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Verdict of an exhaustive sparse-cap isometry audit.
#[derive(Debug, Clone)]
pub enum IsometryVerdict {
    Holds,
    Violated {
        support: Vec<usize>,
        eigenvalue: f64,
    },
}

impl IsometryVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, IsometryVerdict::Holds)
    }
}

/// Guard on the number of enumerated supports.
pub const AUDIT_GUARD: u64 = 1_000_000;

/// Check (1-theta) <= eig((1/k) G_S^T G_S) <= (1+theta) for every support
/// S of size m. By the Rayleigh quotient this decides the two-sided
/// bound for every m-sparse unit vector exactly, with no net sampling.
pub fn isometry_audit(
    gamma: &SamplingMatrix,
    set: &SetDescriptor,
    theta: f64,
) -> Result<IsometryVerdict> {
    let (n, m) = match set {
        SetDescriptor::SparseCap { n, m } => (*n, *m),
        _ => {
            return Err(Error::InvalidParameter(
                "isometry_audit expects a sparse-cap set".into(),
            ))
        }
    };
    if n != gamma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "audit set lives in R^{n} but the matrix has {} columns",
            gamma.cols()
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter("theta must lie in (0,1)".into()));
    }
    if m > gamma.rows() {
        return Err(Error::InvalidParameter(format!(
            "support size {m} exceeds the number of rows {}",
            gamma.rows()
        )));
    }
    let count = binomial(n as u64, m as u64);
    if count > AUDIT_GUARD {
        return Err(Error::EnumerationGuard(count, AUDIT_GUARD));
    }
    let mut support: Vec<usize> = (0..m).collect();
    loop {
        let (lo, hi) = gram_extreme_eigs(gamma, &support)?;
        if lo < 1.0 - theta {
            return Ok(IsometryVerdict::Violated {
                support,
                eigenvalue: lo,
            });
        }
        if hi > 1.0 + theta {
            return Ok(IsometryVerdict::Violated {
                support,
                eigenvalue: hi,
            });
        }
        if !next_combination(&mut support, n) {
            return Ok(IsometryVerdict::Holds);
        }
    }
}

/// Advance a sorted index combination in lexicographic order.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    let mut i = m;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if idx[i] != i + n - m {
            idx[i] += 1;
            for j in i + 1..m {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
}

pub fn binomial(n: u64, m: u64) -> u64 {
    if m > n {
        return 0;
    }
    let m = m.min(n - m);
    let mut out: u64 = 1;
    for i in 0..m {
        out = out.saturating_mul(n - i) / (i + 1);
    }
    out
}
