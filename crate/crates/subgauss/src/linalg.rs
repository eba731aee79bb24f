//! Dense kernels shared by every module: matrix-vector products with
//! pairwise-summed dot products, Gram matrices restricted to coordinate
//! supports, extreme eigenvalues by cyclic Jacobi, and exact Euclidean
//! projection onto the l1 ball.

use crate::{Error, Result};

/// Dense k x n measurement matrix, row-major. Rows are the measurement
/// vectors; columns are the polytope vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    k: usize,
    n: usize,
    entries: Vec<f64>,
}

impl SamplingMatrix {
    pub fn from_rows(k: usize, n: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), k * n, "entry count must be k*n");
        SamplingMatrix { k, n, entries }
    }

    pub fn zeros(k: usize, n: usize) -> Self {
        SamplingMatrix {
            k,
            n,
            entries: vec![0.0; k * n],
        }
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.k).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Dot product by recursive pairwise summation. Error grows like
/// O(log n) in the length instead of O(n) for a running sum, and the
/// result does not depend on chunking choices made elsewhere.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    fn go(a: &[f64], b: &[f64]) -> f64 {
        if a.len() <= 32 {
            let mut s = 0.0;
            for (x, y) in a.iter().zip(b) {
                s += x * y;
            }
            s
        } else {
            let mid = a.len() / 2;
            go(&a[..mid], &b[..mid]) + go(&a[mid..], &b[mid..])
        }
    }
    go(a, b)
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(a: &[f64]) -> f64 {
    if a.len() <= 32 {
        a.iter().sum()
    } else {
        let mid = a.len() / 2;
        pairwise_sum(&a[..mid]) + pairwise_sum(&a[mid..])
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    pairwise_sum(&a.iter().map(|x| x.abs()).collect::<Vec<_>>())
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// y = Gamma x; component i is the dot product of row i with x.
pub fn apply(gamma: &SamplingMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != gamma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "apply: matrix is {}x{}, vector has length {}",
            gamma.rows(),
            gamma.cols(),
            x.len()
        )));
    }
    Ok((0..gamma.rows()).map(|i| dot(gamma.row(i), x)).collect())
}

/// x = Gamma^T y.
pub fn apply_transpose(gamma: &SamplingMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != gamma.rows() {
        return Err(Error::DimensionMismatch(format!(
            "apply_transpose: matrix is {}x{}, vector has length {}",
            gamma.rows(),
            gamma.cols(),
            y.len()
        )));
    }
    let mut out = vec![0.0; gamma.cols()];
    for i in 0..gamma.rows() {
        let row = gamma.row(i);
        let yi = y[i];
        for (o, r) in out.iter_mut().zip(row) {
            *o += yi * r;
        }
    }
    Ok(out)
}

/// Symmetric eigenvalue solve by cyclic Jacobi rotations. `a` is a dense
/// s x s symmetric matrix in row-major order; returns eigenvalues in
/// ascending order. Sweeps run until the off-diagonal Frobenius norm is
/// at most `off_tol`.
pub fn jacobi_eigenvalues(a: &[f64], s: usize, off_tol: f64) -> Vec<f64> {
    assert_eq!(a.len(), s * s);
    let mut m = a.to_vec();
    let idx = |i: usize, j: usize| i * s + j;
    let off_frob = |m: &[f64]| -> f64 {
        let mut t = 0.0;
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    t += m[idx(i, j)] * m[idx(i, j)];
                }
            }
        }
        t.sqrt()
    };
    let mut sweeps = 0;
    while off_frob(&m) > off_tol && sweeps < 100 {
        for p in 0..s {
            for q in (p + 1)..s {
                let apq = m[idx(p, q)];
                if apq.abs() <= off_tol / (s * s) as f64 {
                    continue;
                }
                let app = m[idx(p, p)];
                let aqq = m[idx(q, q)];
                // Rotation angle from the standard stable formulas.
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for r in 0..s {
                    let mrp = m[idx(r, p)];
                    let mrq = m[idx(r, q)];
                    m[idx(r, p)] = c * mrp - sn * mrq;
                    m[idx(r, q)] = sn * mrp + c * mrq;
                }
                for r in 0..s {
                    let mpr = m[idx(p, r)];
                    let mqr = m[idx(q, r)];
                    m[idx(p, r)] = c * mpr - sn * mqr;
                    m[idx(q, r)] = sn * mpr + c * mqr;
                }
            }
        }
        sweeps += 1;
    }
    let mut eigs: Vec<f64> = (0..s).map(|i| m[idx(i, i)]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Extreme eigenvalues of the normalized Gram matrix (1/k) G_S^T G_S of
/// the columns of `gamma` selected by `support`.
pub fn gram_extreme_eigs(gamma: &SamplingMatrix, support: &[usize]) -> Result<(f64, f64)> {
    if support.is_empty() {
        return Err(Error::EmptyInput("gram_extreme_eigs: empty support".into()));
    }
    let s = support.len();
    let k = gamma.rows() as f64;
    for &j in support {
        if j >= gamma.cols() {
            return Err(Error::DimensionMismatch(format!(
                "support index {} out of range for {} columns",
                j,
                gamma.cols()
            )));
        }
    }
    let cols: Vec<Vec<f64>> = support.iter().map(|&j| gamma.column(j)).collect();
    let mut gram = vec![0.0; s * s];
    for i in 0..s {
        for j in i..s {
            let v = dot(&cols[i], &cols[j]) / k;
            gram[i * s + j] = v;
            gram[j * s + i] = v;
        }
    }
    let eigs = jacobi_eigenvalues(&gram, s, 1e-12);
    Ok((eigs[0], eigs[s - 1]))
}

/// Euclidean projection onto the l1 ball of the given radius, by the
/// exact sort-and-threshold rule: soft threshold at the level where the
/// shrunk vector's l1 norm equals the radius.
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    if norm1(x) <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (i as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    x.iter()
        .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, Ensemble};
    use crate::rng::RngState;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn apply_identity() {
        let gamma = SamplingMatrix::from_rows(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(apply(&gamma, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn apply_zero_vector() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 4, 6, &mut RngState::new(5)).unwrap();
        let y = apply(&gamma, &[0.0; 6]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn apply_basis_vector_extracts_column() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 3, 5, &mut RngState::new(11)).unwrap();
        let mut e2 = vec![0.0; 5];
        e2[2] = 1.0;
        let y = apply(&gamma, &e2).unwrap();
        assert_eq!(y, gamma.column(2));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let gamma = SamplingMatrix::zeros(2, 3);
        assert!(apply(&gamma, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn apply_is_linear() {
        let mut rng = RngState::new(77);
        let gamma = sample_matrix(&Ensemble::gaussian(), 8, 12, &mut rng).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..12).map(|_| rng.next_gaussian()).collect();
            let y: Vec<f64> = (0..12).map(|_| rng.next_gaussian()).collect();
            let (a, b) = (rng.next_range(-2.0, 2.0), rng.next_range(-2.0, 2.0));
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = apply(&gamma, &combo).unwrap();
            let gx = apply(&gamma, &x).unwrap();
            let gy = apply(&gamma, &y).unwrap();
            for i in 0..8 {
                let rhs = a * gx[i] + b * gy[i];
                let scale = 1.0 + lhs[i].abs().max(rhs.abs());
                assert!((lhs[i] - rhs).abs() / scale < 1e-10);
            }
        }
    }

    #[test]
    fn gram_single_normalized_column() {
        // sqrt(k) times the first rows of the identity: one column of
        // l2 norm sqrt(k), so the normalized Gram entry is exactly 1.
        let k = 4;
        let mut gamma = SamplingMatrix::zeros(k, 3);
        gamma.set(0, 0, 2.0);
        gamma.set(1, 1, 2.0);
        gamma.set(2, 2, 2.0);
        let (lo, hi) = gram_extreme_eigs(&gamma, &[0]).unwrap();
        assert_close(lo, 1.0, 1e-12);
        assert_close(hi, 1.0, 1e-12);
    }

    #[test]
    fn gram_duplicate_columns_rank_deficient() {
        let mut gamma = SamplingMatrix::zeros(3, 2);
        for i in 0..3 {
            gamma.set(i, 0, 1.0 + i as f64);
            gamma.set(i, 1, 1.0 + i as f64);
        }
        let (lo, _hi) = gram_extreme_eigs(&gamma, &[0, 1]).unwrap();
        assert!(lo.abs() < 1e-10, "lambda_min {lo}");
    }

    #[test]
    fn gram_empty_support_rejected() {
        let gamma = SamplingMatrix::zeros(3, 2);
        assert!(gram_extreme_eigs(&gamma, &[]).is_err());
    }

    #[test]
    fn gram_matches_2x2_characteristic_polynomial() {
        let gamma = sample_matrix(&Ensemble::gaussian(), 32, 64, &mut RngState::new(7)).unwrap();
        let support = [0usize, 1];
        let (lo, hi) = gram_extreme_eigs(&gamma, &support).unwrap();
        // Closed-form eigenvalues of [[a, c], [c, b]].
        let c0 = gamma.column(0);
        let c1 = gamma.column(1);
        let a = dot(&c0, &c0) / 32.0;
        let b = dot(&c1, &c1) / 32.0;
        let c = dot(&c0, &c1) / 32.0;
        let half = 0.5 * (a + b);
        let disc = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        assert_close(lo, half - disc, 1e-10);
        assert_close(hi, half + disc, 1e-10);
    }

    #[test]
    fn gram_bounds_rayleigh_quotients() {
        let mut rng = RngState::new(13);
        let gamma = sample_matrix(&Ensemble::gaussian(), 16, 10, &mut rng).unwrap();
        let support = [1usize, 4, 7];
        let (lo, hi) = gram_extreme_eigs(&gamma, &support).unwrap();
        for _ in 0..100 {
            let mut x = vec![0.0; 10];
            for &j in &support {
                x[j] = rng.next_gaussian();
            }
            let nx = norm2(&x);
            for v in x.iter_mut() {
                *v /= nx;
            }
            let gx = apply(&gamma, &x).unwrap();
            let q = dot(&gx, &gx) / 16.0;
            assert!(q >= lo - 1e-9 && q <= hi + 1e-9, "q={q} not in [{lo},{hi}]");
        }
    }

    #[test]
    fn jacobi_diagonal_matrix() {
        let a = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        let eigs = jacobi_eigenvalues(&a, 3, 1e-14);
        assert_close(eigs[0], -1.0, 1e-12);
        assert_close(eigs[1], 2.0, 1e-12);
        assert_close(eigs[2], 3.0, 1e-12);
    }

    #[test]
    fn project_inside_ball_unchanged() {
        let x = vec![0.2, -0.3, 0.1];
        assert_eq!(project_l1_ball(&x, 1.0), x);
    }

    #[test]
    fn project_along_ray() {
        let p = project_l1_ball(&[2.0, 0.0], 1.0);
        assert_close(p[0], 1.0, 1e-12);
        assert_close(p[1], 0.0, 1e-12);
    }

    // Independent oracle: the projection threshold must be a breakpoint
    // solution of the KKT equation sum_i max(|x_i| - theta, 0) = radius;
    // scan all n breakpoints and pick the consistent one.
    fn project_l1_breakpoint_oracle(x: &[f64], radius: f64) -> Vec<f64> {
        if norm1(x) <= radius {
            return x.to_vec();
        }
        let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = x.len();
        let mut theta_best = 0.0;
        for j in 1..=n {
            // Assume exactly the j largest entries stay nonzero.
            let s: f64 = mags[..j].iter().sum();
            let theta = (s - radius) / j as f64;
            let upper_ok = theta <= mags[j - 1];
            let lower_ok = if j < n { theta >= mags[j] } else { theta >= 0.0 };
            if upper_ok && lower_ok {
                theta_best = theta;
                break;
            }
        }
        x.iter()
            .map(|&v| v.signum() * (v.abs() - theta_best).max(0.0))
            .collect()
    }

    #[test]
    fn project_matches_breakpoint_oracle() {
        let mut rng = RngState::new(99);
        for _ in 0..200 {
            let x: Vec<f64> = (0..10).map(|_| 2.0 * rng.next_gaussian()).collect();
            let got = project_l1_ball(&x, 1.0);
            let want = project_l1_breakpoint_oracle(&x, 1.0);
            for (g, w) in got.iter().zip(&want) {
                assert_close(*g, *w, 1e-10);
            }
            assert!(norm1(&got) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive() {
        let mut rng = RngState::new(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..8).map(|_| 3.0 * rng.next_gaussian()).collect();
            let y: Vec<f64> = (0..8).map(|_| 3.0 * rng.next_gaussian()).collect();
            let px = project_l1_ball(&x, 1.5);
            let py = project_l1_ball(&y, 1.5);
            let ppx = project_l1_ball(&px, 1.5);
            for (a, b) in px.iter().zip(&ppx) {
                assert_close(*a, *b, 1e-12);
            }
            let d_proj: f64 = px
                .iter()
                .zip(&py)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let d: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(d_proj <= d + 1e-12);
        }
    }
}
