//! Star-shaped index sets and their geometric functionals: exact support
//! functions, Monte Carlo Gaussian mean width, the fixed-point radius
//! that governs reconstruction error, and constructive decompositions of
//! low-l1 unit vectors into short-support atoms.

use crate::linalg::{dot, norm1, norm2};
use crate::rng::RngState;
use crate::{Error, Result};

/// A star-shaped subset of R^n. `SparseCap` and `PointCloud` denote the
/// star hulls {lambda t : 0 <= lambda <= 1} of the unit-sphere cap of
/// short-support vectors and of an explicit point list.
#[derive(Debug, Clone)]
pub enum SetDescriptor {
    L1Ball { n: usize, radius: f64 },
    WeakLpBall { n: usize, p: f64 },
    EuclideanBall { n: usize, radius: f64 },
    SparseCap { n: usize, m: usize },
    PointCloud { points: Vec<Vec<f64>> },
}

impl SetDescriptor {
    pub fn ambient_dim(&self) -> usize {
        match self {
            SetDescriptor::L1Ball { n, .. }
            | SetDescriptor::WeakLpBall { n, .. }
            | SetDescriptor::EuclideanBall { n, .. }
            | SetDescriptor::SparseCap { n, .. } => *n,
            SetDescriptor::PointCloud { points } => points.first().map_or(0, |p| p.len()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SetDescriptor::L1Ball { radius, .. } | SetDescriptor::EuclideanBall { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::InvalidParameter("radius must be positive".into()));
                }
            }
            SetDescriptor::WeakLpBall { p, .. } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "weak-lp exponent p={p} must lie in (0,1)"
                    )));
                }
            }
            SetDescriptor::SparseCap { n, m } => {
                if *m == 0 || *m > *n {
                    return Err(Error::InvalidParameter(format!(
                        "sparse cap needs 1 <= m <= n, got m={m}, n={n}"
                    )));
                }
            }
            SetDescriptor::PointCloud { points } => {
                let n = self.ambient_dim();
                if points.is_empty() || points.iter().any(|p| p.len() != n) {
                    return Err(Error::InvalidParameter(
                        "point cloud must be nonempty with equal-length points".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest Euclidean norm of a set element (exact per kind).
    pub fn circumradius(&self) -> f64 {
        match self {
            SetDescriptor::L1Ball { radius, .. } => *radius,
            SetDescriptor::EuclideanBall { radius, .. } => *radius,
            SetDescriptor::SparseCap { .. } => 1.0,
            SetDescriptor::WeakLpBall { n, p } => (1..=*n)
                .map(|i| (i as f64).powf(-2.0 / p))
                .sum::<f64>()
                .sqrt(),
            SetDescriptor::PointCloud { points } => {
                points.iter().map(|t| norm2(t)).fold(0.0, f64::max)
            }
        }
    }
}

/// sup over the set of |<g, t>|, exact for every kind.
pub fn support_function(set: &SetDescriptor, g: &[f64]) -> Result<f64> {
    set.validate()?;
    if g.len() != set.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "support_function: direction length {} vs ambient {}",
            g.len(),
            set.ambient_dim()
        )));
    }
    Ok(match set {
        SetDescriptor::L1Ball { radius, .. } => {
            radius * g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
        }
        SetDescriptor::EuclideanBall { radius, .. } => radius * norm2(g),
        SetDescriptor::SparseCap { m, .. } => top_m_norm(g, *m),
        SetDescriptor::WeakLpBall { p, .. } => {
            // Extreme decreasing profile t_i = i^(-1/p) against the
            // decreasing rearrangement of |g|.
            let mut mags: Vec<f64> = g.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            mags.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0).powf(-1.0 / p) * v)
                .sum()
        }
        SetDescriptor::PointCloud { points } => points
            .iter()
            .map(|t| dot(g, t).abs())
            .fold(0.0, f64::max),
    })
}

fn top_m_norm(g: &[f64], m: usize) -> f64 {
    let mut sq: Vec<f64> = g.iter().map(|v| v * v).collect();
    sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sq[..m.min(sq.len())].iter().sum::<f64>().sqrt()
}

/// sup over the slice T intersect rho*S^{n-1} of |<g, t>|; 0 when the
/// slice is empty. Used by the fixed-point radius scan.
pub fn slice_support(set: &SetDescriptor, rho: f64, g: &[f64]) -> Result<f64> {
    set.validate()?;
    if rho <= 0.0 {
        return Ok(0.0);
    }
    Ok(match set {
        SetDescriptor::EuclideanBall { radius, .. } => {
            if rho <= *radius {
                rho * norm2(g)
            } else {
                0.0
            }
        }
        SetDescriptor::SparseCap { m, .. } => {
            if rho <= 1.0 {
                rho * top_m_norm(g, *m)
            } else {
                0.0
            }
        }
        SetDescriptor::L1Ball { radius, .. } => {
            if rho > *radius {
                0.0
            } else {
                // The l2 constraint is active for rho < radius, so the
                // slice supremum equals the intersection-body supremum
                //   min_{lam >= 0} lam*radius + rho*||(|g|-lam)_+||_2,
                // a convex function of lam minimized by golden section.
                let gmax = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if gmax == 0.0 {
                    0.0
                } else {
                    let f = |lam: f64| -> f64 {
                        let s: f64 = g
                            .iter()
                            .map(|v| {
                                let d = v.abs() - lam;
                                if d > 0.0 {
                                    d * d
                                } else {
                                    0.0
                                }
                            })
                            .sum();
                        lam * radius + rho * s.sqrt()
                    };
                    golden_min(f, 0.0, gmax)
                }
            }
        }
        SetDescriptor::WeakLpBall { p, .. } => {
            if rho > set.circumradius() {
                0.0
            } else {
                weak_lp_slice(g, *p, rho)
            }
        }
        SetDescriptor::PointCloud { points } => points
            .iter()
            .filter(|t| norm2(t) >= rho)
            .map(|t| rho * dot(g, t).abs() / norm2(t))
            .fold(0.0, f64::max),
    })
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.618_033_988_749_894_8;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..120 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

// Maximize sum g*_i t_i over decreasing t with t_i <= i^(-1/p) and
// |t|_2 = rho: coordinates are min(i^(-1/p), c g*_i) with c chosen by
// bisection so the norm hits rho.
fn weak_lp_slice(g: &[f64], p: f64, rho: f64) -> f64 {
    let mut mags: Vec<f64> = g.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let caps: Vec<f64> = (1..=mags.len())
        .map(|i| (i as f64).powf(-1.0 / p))
        .collect();
    let norm_at = |c: f64| -> f64 {
        mags.iter()
            .zip(&caps)
            .map(|(&gi, &cap)| {
                let t = (c * gi).min(cap);
                t * t
            })
            .sum::<f64>()
            .sqrt()
    };
    if norm2(&mags) == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while norm_at(hi) < rho {
        hi *= 2.0;
        if hi > 1e18 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    mags.iter()
        .zip(&caps)
        .map(|(&gi, &cap)| gi * (c * gi).min(cap))
        .sum()
}

/// Monte Carlo estimate of the Gaussian mean width E sup |<g, t>|.
#[derive(Debug, Clone)]
pub struct WidthEstimate {
    pub value: f64,
    pub std_err: f64,
    pub num_samples: usize,
}

pub fn gaussian_width(
    set: &SetDescriptor,
    num_samples: usize,
    rng: &mut RngState,
) -> Result<WidthEstimate> {
    if num_samples < 2 {
        return Err(Error::InvalidParameter(
            "gaussian_width: need at least 2 samples".into(),
        ));
    }
    let n = set.ambient_dim();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut g = vec![0.0; n];
    for _ in 0..num_samples {
        for gi in g.iter_mut() {
            *gi = rng.next_gaussian();
        }
        let v = support_function(set, &g)?;
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / num_samples as f64;
    let var = (sumsq / num_samples as f64 - mean * mean).max(0.0);
    Ok(WidthEstimate {
        value: mean,
        std_err: (var / num_samples as f64).sqrt(),
        num_samples,
    })
}

/// Width bound for the hull of m-sparse unit vectors:
/// sqrt(m ln 5 + ln C(n, m)), the covering-number form with its absolute
/// constant normalized to 1.
pub fn width_bound_um(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "width_bound_um: need 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let ln_binom = ln_gamma((n + 1) as f64) - ln_gamma((m + 1) as f64) - ln_gamma((n - m + 1) as f64);
    Ok((m as f64 * 5.0_f64.ln() + ln_binom).sqrt())
}

/// Lanczos log-gamma, accurate to ~1e-13 for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Result of the fixed-point scan.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointRadius {
    pub rho: f64,
    /// False when no grid point satisfied the crossing inequality; `rho`
    /// is then the grid maximum.
    pub crossed: bool,
}

const RSTAR_GRID: usize = 2048;

/// Smallest rho on a geometric grid with
/// rho >= c_norm alpha^2 lhat(T intersect rho S^{n-1}) / (theta sqrt k),
/// where lhat is a Monte Carlo width estimate sharing one Gaussian panel
/// across the grid. The ratio lhat(T_rho)/rho is nonincreasing in rho,
/// so the first crossing is found by bisection over the grid.
pub fn r_star(
    theta: f64,
    set: &SetDescriptor,
    k: usize,
    alpha: f64,
    c_norm: f64,
    num_samples: usize,
    rng: &mut RngState,
) -> Result<FixedPointRadius> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter("theta must lie in (0,1)".into()));
    }
    if k == 0 || num_samples == 0 || c_norm <= 0.0 || alpha < 1.0 {
        return Err(Error::InvalidParameter(
            "r_star: need k >= 1, samples >= 1, c_norm > 0, alpha >= 1".into(),
        ));
    }
    set.validate()?;
    let n = set.ambient_dim();
    let panel: Vec<Vec<f64>> = (0..num_samples)
        .map(|_| (0..n).map(|_| rng.next_gaussian()).collect())
        .collect();
    let width_at = |rho: f64| -> Result<f64> {
        let mut sum = 0.0;
        for g in &panel {
            sum += slice_support(set, rho, g)?;
        }
        Ok(sum / num_samples as f64)
    };
    let lo = 1e-6_f64;
    let hi = set.circumradius().max(lo * 2.0);
    let grid = |i: usize| -> f64 { lo * (hi / lo).powf(i as f64 / (RSTAR_GRID - 1) as f64) };
    let crosses = |rho: f64| -> Result<bool> {
        Ok(rho >= c_norm * alpha * alpha * width_at(rho)? / (theta * (k as f64).sqrt()))
    };
    if !crosses(grid(RSTAR_GRID - 1))? {
        return Ok(FixedPointRadius {
            rho: grid(RSTAR_GRID - 1),
            crossed: false,
        });
    }
    if crosses(grid(0))? {
        return Ok(FixedPointRadius {
            rho: grid(0),
            crossed: true,
        });
    }
    let mut lo_i = 0usize; // does not cross
    let mut hi_i = RSTAR_GRID - 1; // crosses
    while hi_i - lo_i > 1 {
        let mid = (lo_i + hi_i) / 2;
        if crosses(grid(mid))? {
            hi_i = mid;
        } else {
            lo_i = mid;
        }
    }
    Ok(FixedPointRadius {
        rho: grid(hi_i),
        crossed: true,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum ClosedFormKind {
    L1,
    WeakLp(f64),
}

/// Closed-form fixed-point bound for the l1 and weak-lp balls with the
/// absolute constant set to 1. Returns +inf when the log argument drops
/// below 1 (the bound is vacuous there); exactly 1 gives 0.
pub fn rstar_closed_form(
    theta: f64,
    k: usize,
    n: usize,
    alpha: f64,
    kind: ClosedFormKind,
) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) || k == 0 || n == 0 || alpha < 1.0 {
        return Err(Error::InvalidParameter(
            "rstar_closed_form: need theta in (0,1], k,n >= 1, alpha >= 1".into(),
        ));
    }
    let effective_k = theta * theta * k as f64 / alpha.powi(4);
    let arg = n as f64 / effective_k;
    if arg < 1.0 {
        return Ok(f64::INFINITY);
    }
    let base = arg.ln() / effective_k;
    match kind {
        ClosedFormKind::L1 => Ok(base.sqrt()),
        ClosedFormKind::WeakLp(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "weak-lp exponent p={p} must lie in (0,1)"
                )));
            }
            let factor = 1.0 / (1.0 / p - 1.0);
            Ok(factor * base.powf(1.0 / p - 0.5))
        }
    }
}

/// One atom of a short-support decomposition: a unit vector with at most
/// m nonzero coordinates and its convex weight.
#[derive(Debug, Clone)]
pub struct UmTerm {
    pub weight: f64,
    pub atom: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct UmDecomposition {
    pub m: usize,
    pub terms: Vec<UmTerm>,
}

impl UmDecomposition {
    /// Sum of the convex weights (at most 1 for a valid certificate).
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// l2 distance between x and 2 * sum of weighted atoms.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut recon = vec![0.0; x.len()];
        for t in &self.terms {
            for (r, a) in recon.iter_mut().zip(&t.atom) {
                *r += 2.0 * t.weight * a;
            }
        }
        recon
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_support(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.atom.iter().filter(|v| **v != 0.0).count())
            .max()
            .unwrap_or(0)
    }
}

/// Write a unit vector x with ||x||_1 <= 2 sqrt(m) as x = 2 sum lam_j u_j
/// with u_j unit vectors of support at most m and sum lam_j <= 1.
///
/// The top h = m-r-1 coordinates are kept in every atom and the rest is
/// peeled into sign patterns of at most r+1 coordinates, where r is the
/// split for which sqrt(|head|^2 + tail_1^2/(r+1)) is smallest subject to
/// tail_inf <= tail_1/(r+1). Plain contiguous blocks of size m do not
/// certify the weight bound for near-boundary inputs, this split does.
pub fn decompose_into_um(x: &[f64], m: usize) -> Result<UmDecomposition> {
    let n = x.len();
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let l2 = norm2(x);
    if (l2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "decompose_into_um: |x|_2 = {l2}, expected 1 (tolerance 1e-9)"
        )));
    }
    let l1 = norm1(x);
    let budget = 2.0 * (m as f64).sqrt();
    if l1 > budget * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "decompose_into_um: ||x||_1 = {l1} exceeds 2 sqrt(m) = {budget}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap());
    let mags: Vec<f64> = order.iter().map(|&i| x[i].abs()).collect();
    let suffix: Vec<f64> = {
        let mut s = vec![0.0; n + 1];
        for i in (0..n).rev() {
            s[i] = s[i + 1] + mags[i];
        }
        s
    };

    // Feasible splits: tail sup must not exceed the peel level c_r.
    let mut best: Option<(usize, f64)> = None;
    for r in 0..m.min(n) {
        let h = (m - r - 1).min(n);
        let tail_sum = suffix[h];
        let c = tail_sum / (r + 1) as f64;
        let tail_max = if h < n { mags[h] } else { 0.0 };
        if tail_max > c + 1e-15 && tail_sum > 0.0 {
            continue;
        }
        let head_sq: f64 = mags[..h].iter().map(|v| v * v).sum();
        let sp = (head_sq + tail_sum * tail_sum / (r + 1) as f64).sqrt();
        if best.map_or(true, |(_, b)| sp < b) {
            best = Some((r, sp));
        }
    }
    let (r, _) = best.ok_or_else(|| {
        Error::InvalidParameter("decompose_into_um: no feasible head/tail split".into())
    })?;
    let h = (m - r - 1).min(n);
    let kk = r + 1;
    let tail_sum = suffix[h];

    let mut head = vec![0.0; n];
    for &i in &order[..h] {
        head[i] = x[i];
    }
    let head_norm_sq: f64 = head.iter().map(|v| v * v).sum();

    let mut terms: Vec<UmTerm> = Vec::new();
    let mut spent = 0.0; // total peel mass, at most 1

    if tail_sum > 1e-14 {
        let c = tail_sum / kk as f64;
        // y = |tail|/c lives in the polytope {|y|_inf <= 1, |y|_1 <= kk};
        // peel it into sign patterns with at most kk ones.
        let mut y: Vec<(usize, f64)> = order[h..]
            .iter()
            .filter(|&&i| x[i] != 0.0)
            .map(|&i| (i, x[i].abs() / c))
            .collect();
        let mut scale: f64 = 1.0;
        let max_steps = 4 * n + 8;
        for _ in 0..max_steps {
            y.retain(|&(_, v)| v > 1e-14);
            if y.is_empty() || scale <= 1e-14 {
                break;
            }
            y.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let take = kk.min(y.len());
            let chosen: Vec<usize> = (0..take).collect();
            let mut mu = scale;
            for &ci in &chosen {
                mu = mu.min(y[ci].1);
            }
            if y.len() > take {
                mu = mu.min(scale - y[take].1);
            }
            if take < kk {
                let l1_now: f64 = y.iter().map(|v| v.1).sum();
                let slack = (kk as f64 * scale - l1_now) / (kk - take) as f64;
                mu = mu.min(slack);
            }
            if mu <= 1e-15 {
                // Exact arithmetic keeps every cap at least
                // scale/(kk+1) > 0; reaching this point is roundoff
                // exhaustion and the leftover check below decides.
                break;
            }
            let mut atom = head.clone();
            for &ci in &chosen {
                let idx = y[ci].0;
                atom[idx] = c * x[idx].signum();
            }
            let nu = (head_norm_sq + (take as f64) * c * c).sqrt();
            for v in atom.iter_mut() {
                *v /= nu;
            }
            terms.push(UmTerm {
                weight: mu * nu / 2.0,
                atom,
            });
            for &ci in &chosen {
                y[ci].1 -= mu;
            }
            scale -= mu;
            spent += mu;
        }
        let leftover: f64 = y.iter().map(|v| v.1).sum();
        if leftover > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "decompose_into_um: peel left mass {leftover:.3e} unassigned"
            )));
        }
    }

    // The head must appear with total convex mass exactly 1.
    if head_norm_sq > 0.0 && spent < 1.0 - 1e-14 {
        let nu = head_norm_sq.sqrt();
        let atom: Vec<f64> = head.iter().map(|v| v / nu).collect();
        terms.push(UmTerm {
            weight: (1.0 - spent) * nu / 2.0,
            atom,
        });
    }

    Ok(UmDecomposition { m, terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn support_l1_ball_is_max_abs() {
        let set = SetDescriptor::L1Ball { n: 2, radius: 1.0 };
        assert_close(support_function(&set, &[3.0, -4.0]).unwrap(), 4.0, 1e-15);
    }

    #[test]
    fn support_sparse_cap_top_squares() {
        let set = SetDescriptor::SparseCap { n: 3, m: 2 };
        assert_close(
            support_function(&set, &[1.0, 2.0, 2.0]).unwrap(),
            8.0_f64.sqrt(),
            1e-15,
        );
    }

    #[test]
    fn support_weak_lp_profile() {
        let set = SetDescriptor::WeakLpBall { n: 2, p: 0.5 };
        // 1 * 1 + 2^{-2} * 1
        assert_close(support_function(&set, &[1.0, 1.0]).unwrap(), 1.25, 1e-12);
    }

    #[test]
    fn support_weak_lp_matches_net_brute_force() {
        // Oracle: maximize <g, t> over a fine net of the weak-lp ball in
        // dimension 2, i.e. all sign/permutation placements of profiles
        // (a, b) with a in [0,1], b <= 2^{-1/p}, b <= a.
        let p = 0.5;
        let set = SetDescriptor::WeakLpBall { n: 2, p };
        let g = [0.8, -1.7];
        let cap2 = 2.0_f64.powf(-1.0 / p);
        let steps = 400;
        let mut best: f64 = 0.0;
        for ia in 0..=steps {
            let a = ia as f64 / steps as f64;
            for ib in 0..=steps {
                let b = cap2.min(a) * ib as f64 / steps as f64;
                for (ta, tb) in [(a, b), (b, a)] {
                    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        let v: f64 = g[0] * sa * ta + g[1] * sb * tb;
                        best = best.max(v.abs());
                    }
                }
            }
        }
        let exact = support_function(&set, &g).unwrap();
        assert!(exact >= best - 1e-9, "exact {exact} below net value {best}");
        assert!(exact - best < 5e-3, "exact {exact} far above net {best}");
    }

    #[test]
    fn support_is_homogeneous_and_even() {
        let mut rng = RngState::new(12);
        for _ in 0..20 {
            let g: Vec<f64> = (0..6).map(|_| rng.next_gaussian()).collect();
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let s1 = support_function(&SetDescriptor::L1Ball { n: 6, radius: 1.0 }, &g).unwrap();
            let s2 = support_function(&SetDescriptor::L1Ball { n: 6, radius: 2.5 }, &g).unwrap();
            let s3 = support_function(&SetDescriptor::L1Ball { n: 6, radius: 1.0 }, &neg).unwrap();
            assert_close(s2, 2.5 * s1, 1e-12);
            assert_close(s3, s1, 1e-15);
        }
    }

    #[test]
    fn width_single_point_matches_half_normal_mean() {
        let set = SetDescriptor::PointCloud {
            points: vec![vec![1.0]],
        };
        let w = gaussian_width(&set, 100_000, &mut RngState::new(5)).unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (w.value - expect).abs() <= 3.0 * w.std_err,
            "width {} vs {expect} (se {})",
            w.value,
            w.std_err
        );
    }

    #[test]
    fn width_l1_ball_dimension_one() {
        let set = SetDescriptor::L1Ball { n: 1, radius: 1.0 };
        let w = gaussian_width(&set, 100_000, &mut RngState::new(6)).unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!((w.value - expect).abs() <= 3.0 * w.std_err);
    }

    #[test]
    fn width_full_sparse_cap_is_chi_mean() {
        let set = SetDescriptor::SparseCap { n: 2, m: 2 };
        let w = gaussian_width(&set, 100_000, &mut RngState::new(7)).unwrap();
        let expect = (std::f64::consts::PI / 2.0).sqrt();
        assert!(
            (w.value - expect).abs() <= 3.0 * w.std_err,
            "width {} vs {expect}",
            w.value
        );
    }

    #[test]
    fn width_of_cloud_equals_width_of_hull_points() {
        // The width of a point set equals that of its convex hull; mixing
        // in hull points must not change the estimate beyond MC noise.
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]];
        let mut hull = pts.clone();
        let mut rng = RngState::new(8);
        for _ in 0..47 {
            let (a, b) = (rng.next_uniform(), rng.next_uniform());
            let (a, b, c) = (a.min(b), (a - b).abs(), 1.0 - a.max(b));
            let mix: Vec<f64> = (0..2)
                .map(|i| a * pts[0][i] + b * pts[1][i] + c * pts[2][i])
                .collect();
            hull.push(mix);
        }
        let w1 = gaussian_width(
            &SetDescriptor::PointCloud { points: pts },
            60_000,
            &mut RngState::new(9),
        )
        .unwrap();
        let w2 = gaussian_width(
            &SetDescriptor::PointCloud { points: hull },
            60_000,
            &mut RngState::new(10),
        )
        .unwrap();
        assert!(
            (w1.value - w2.value).abs() <= 3.0 * (w1.std_err + w2.std_err),
            "{} vs {}",
            w1.value,
            w2.value
        );
    }

    #[test]
    fn width_bound_um_values() {
        // Frozen from the formula sqrt(m ln 5 + ln C(n, m)).
        assert_close(width_bound_um(1, 1).unwrap(), 1.2686362411795196, 1e-12);
        assert_close(width_bound_um(1, 2).unwrap(), 1.5174271293851462, 1e-12);
    }

    #[test]
    fn width_bound_um_monotone_in_n() {
        for m in 1..6 {
            for n in m..40 {
                let a = width_bound_um(m, n).unwrap();
                let b = width_bound_um(m, n + 1).unwrap();
                assert!(b >= a, "bound({m},{n})={a} > bound({m},{})={b}", n + 1);
            }
        }
        assert!(width_bound_um(3, 2).is_err());
    }

    #[test]
    fn slice_support_l1_matches_sphere_net() {
        // Oracle: max <g, t> over a dense net of the 2-sphere in R^3
        // filtered by the l1 constraint.
        let set = SetDescriptor::L1Ball { n: 3, radius: 1.0 };
        let g = [1.0, -0.5, 2.0];
        let rho = 0.8;
        let mut best: f64 = 0.0;
        let steps = 600;
        for iu in 0..steps {
            for iv in 0..steps {
                let phi = std::f64::consts::PI * iu as f64 / steps as f64;
                let lam = 2.0 * std::f64::consts::PI * iv as f64 / steps as f64;
                let t = [
                    rho * phi.sin() * lam.cos(),
                    rho * phi.sin() * lam.sin(),
                    rho * phi.cos(),
                ];
                if t.iter().map(|v| v.abs()).sum::<f64>() <= 1.0 {
                    best = best.max(dot(&g, &t).abs());
                }
            }
        }
        let exact = slice_support(&set, rho, &g).unwrap();
        assert!(exact >= best - 1e-6, "exact {exact} below net {best}");
        assert!(exact - best <= 2e-2, "exact {exact} far above net {best}");
    }

    #[test]
    fn slice_support_euclidean_and_empty() {
        let ball = SetDescriptor::EuclideanBall { n: 2, radius: 1.0 };
        assert_close(
            slice_support(&ball, 0.5, &[3.0, 4.0]).unwrap(),
            2.5,
            1e-12,
        );
        assert_eq!(slice_support(&ball, 1.5, &[3.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn rstar_large_k_hits_grid_minimum() {
        let set = SetDescriptor::L1Ball { n: 8, radius: 1.0 };
        let fp = r_star(
            0.5,
            &set,
            1_000_000_000,
            1.0,
            1.0,
            64,
            &mut RngState::new(3),
        )
        .unwrap();
        assert!(fp.crossed);
        assert_close(fp.rho, 1e-6, 1e-9);
    }

    #[test]
    fn rstar_monotone_in_theta_and_k() {
        let set = SetDescriptor::L1Ball { n: 32, radius: 1.0 };
        let mut prev = f64::INFINITY;
        for k in [16, 64, 256] {
            let fp = r_star(0.25, &set, k, 1.0, 1.0, 128, &mut RngState::new(4)).unwrap();
            assert!(fp.rho <= prev + 1e-12, "r* must not increase in k");
            prev = fp.rho;
        }
        let lo = r_star(0.25, &set, 64, 1.0, 1.0, 128, &mut RngState::new(4)).unwrap();
        let hi = r_star(0.5, &set, 64, 1.0, 1.0, 128, &mut RngState::new(4)).unwrap();
        assert!(hi.rho <= lo.rho + 1e-12, "doubling theta must not increase r*");
    }

    #[test]
    fn rstar_closed_form_values() {
        // Boundary: log argument exactly 1.
        let v = rstar_closed_form(1.0, 64, 64, 1.0, ClosedFormKind::L1).unwrap();
        assert_close(v, 0.0, 1e-15);
        // Frozen spot value: theta=1/2, k=64, n=256, alpha=1 gives
        // sqrt(ln(16)/16).
        let v = rstar_closed_form(0.5, 64, 256, 1.0, ClosedFormKind::L1).unwrap();
        assert_close(v, 0.41627730557884884, 1e-12);
        // Precondition failure: +inf marker.
        let v = rstar_closed_form(1.0, 4 * 64, 64, 1.0, ClosedFormKind::L1).unwrap();
        assert!(v.is_infinite());
        // Weak-lp blowup as p -> 1.
        let near = rstar_closed_form(0.5, 64, 256, 1.0, ClosedFormKind::WeakLp(0.999)).unwrap();
        let mid = rstar_closed_form(0.5, 64, 256, 1.0, ClosedFormKind::WeakLp(0.5)).unwrap();
        assert!(near > 100.0 * mid);
        assert!(rstar_closed_form(0.5, 64, 256, 1.0, ClosedFormKind::WeakLp(1.5)).is_err());
    }

    #[test]
    fn decompose_single_spike() {
        let mut x = vec![0.0; 5];
        x[0] = 1.0;
        let d = decompose_into_um(&x, 3).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_close(d.terms[0].weight, 0.5, 1e-12);
        assert!(d.residual(&x) < 1e-12);
    }

    #[test]
    fn decompose_uniform_four_coordinates() {
        let x = vec![0.5, 0.5, 0.5, 0.5];
        let d = decompose_into_um(&x, 2).unwrap();
        assert!(d.residual(&x) < 1e-10, "residual {}", d.residual(&x));
        assert!(d.max_support() <= 2);
        assert_close(d.weight_sum(), 1.0 / 2.0_f64.sqrt(), 1e-9);
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        assert!(decompose_into_um(&[0.5, 0.5], 1).is_err()); // not unit
        let mut x = vec![0.0; 9];
        for v in x.iter_mut() {
            *v = 1.0 / 3.0;
        }
        // ||x||_1 = 3 > 2 sqrt(1) = 2
        assert!(decompose_into_um(&x, 1).is_err());
    }

    #[test]
    fn decompose_random_certificates_verify() {
        let mut rng = RngState::new(42);
        let n = 64;
        for m in [2usize, 4, 8] {
            let budget = 2.0 * (m as f64).sqrt();
            let mut accepted = 0;
            while accepted < 50 {
                // Proposal biased toward feasible vectors: s-sparse
                // Gaussian with s <= 4m, rejected on the l1 budget.
                let s = 1 + rng.next_index(4 * m);
                let mut x = vec![0.0; n];
                for &j in rng.choose_indices(n, s.min(n)).iter() {
                    x[j] = rng.next_gaussian();
                }
                let nz = norm2(&x);
                if nz == 0.0 {
                    continue;
                }
                for v in x.iter_mut() {
                    *v /= nz;
                }
                if norm1(&x) > budget {
                    continue;
                }
                accepted += 1;
                let d = decompose_into_um(&x, m).unwrap();
                assert!(d.max_support() <= m, "support {} > m={m}", d.max_support());
                assert!(
                    d.weight_sum() <= 1.0 + 1e-9,
                    "weights {} exceed 1",
                    d.weight_sum()
                );
                assert!(d.residual(&x) <= 1e-8, "residual {}", d.residual(&x));
                for t in &d.terms {
                    assert_close(norm2(&t.atom), 1.0, 1e-9);
                    assert!(t.weight >= 0.0);
                }
            }
        }
    }
}
