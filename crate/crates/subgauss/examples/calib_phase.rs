use std::time::Instant;
use subgauss::ensemble::{sample_matrix, Ensemble, EnsembleKind};
use subgauss::recover::{exact_recover, SparseVector};
use subgauss::rng::RngState;

fn main() {
    let n = 128;
    let k = 64;
    let trials = 100;
    let ms: Vec<usize> = vec![4, 8, 12, 16, 20, 22, 24, 26, 28, 32, 40];
    for kind in [
        EnsembleKind::Gaussian,
        EnsembleKind::Rademacher,
        EnsembleKind::BoundedUniform,
    ] {
        let ensemble = Ensemble::of_kind(kind);
        let t0 = Instant::now();
        let mut rates = Vec::new();
        for &m in &ms {
            let mut ok = 0;
            for trial in 0..trials {
                let seed = 20_000u64
                    + (k as u64) << 0;
                let cell_seed = seed
                    .wrapping_add((k as u64) << 40)
                    .wrapping_add((m as u64) << 24)
                    .wrapping_add(trial as u64);
                let mut rng = RngState::new(cell_seed);
                let gamma = sample_matrix(&ensemble, k, n, &mut rng).unwrap();
                let idx = rng.choose_indices(n, m);
                let z = SparseVector::new(n, idx.iter().map(|&i| (i, rng.next_sign())).collect())
                    .unwrap();
                if exact_recover(&gamma, &z).unwrap().succeeded() {
                    ok += 1;
                }
            }
            rates.push((m, ok));
        }
        println!(
            "{kind:?}: {:?}  elapsed {:.1}s",
            rates,
            t0.elapsed().as_secs_f64()
        );
    }
}
