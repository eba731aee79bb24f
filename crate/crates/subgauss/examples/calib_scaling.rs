use subgauss::ensemble::{sample_matrix, Ensemble};
use subgauss::geometry::SetDescriptor;
use subgauss::linalg::apply;
use subgauss::recover::{approx_reconstruct, compressible_signal};
use subgauss::rng::RngState;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn main() {
    let n = 256;
    let eps = 1e-4;
    let ensemble = Ensemble::gaussian();
    for base in [20_000u64, 40_000, 60_000] {
        let mut meds = Vec::new();
        for &k in &[32usize, 64, 128, 256] {
            let errs: Vec<f64> = (0..100)
                .map(|trial| {
                    let mut rng = RngState::new(base + 1000 * k as u64 + trial);
                    let gamma = sample_matrix(&ensemble, k, n, &mut rng).unwrap();
                    let v = compressible_signal(n, &mut rng);
                    let y = apply(&gamma, &v).unwrap();
                    let set = SetDescriptor::L1Ball { n, radius: 1.0 };
                    let res = approx_reconstruct(&gamma, &y, &set, eps, 10_000).unwrap();
                    res.point
                        .iter()
                        .zip(&v)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            meds.push((k, median(errs)));
        }
        // regression over defined regressor points (k < n)
        let pts: Vec<(f64, f64)> = meds
            .iter()
            .filter(|&&(k, _)| k < n)
            .map(|&(k, e)| (((k as f64) / ((n as f64) / (k as f64)).ln()).ln(), e.ln()))
            .collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let slope = subgauss::empirical::least_squares_slope(&xs, &ys);
        println!("base {base}: meds {meds:?} slope {slope:.4}");
    }
}
