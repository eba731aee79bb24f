use std::time::Instant;
use subgauss::ensemble::{sample_matrix, Ensemble};
use subgauss::polytope::{neighborly_scan, ScanMode, ScanVerdict};
use subgauss::rng::RngState;

fn main() {
    // Part 1: exhaustive m=2 scans at k=16, n=32, 20 seeds.
    let t0 = Instant::now();
    let mut good = 0;
    for seed in 0..20u64 {
        let mut rng = RngState::new(20_000 + seed);
        let gamma = sample_matrix(&Ensemble::rademacher(), 16, 32, &mut rng).unwrap();
        let rep = neighborly_scan(&gamma, 2, false, false, &ScanMode::Exhaustive).unwrap();
        match rep.verdict {
            ScanVerdict::Neighborly => good += 1,
            ScanVerdict::Counterexample(q) => println!("  seed {seed}: counterexample {q:?}"),
        }
    }
    println!(
        "exhaustive m=2 k=16 n=32: {good}/20 neighborly, {:.1}s",
        t0.elapsed().as_secs_f64()
    );

    // Part 2: one sampled scan at k=32, n=64, m=3 to gauge runtime.
    let t1 = Instant::now();
    let mut rng = RngState::new(30_000);
    let gamma = sample_matrix(&Ensemble::rademacher(), 32, 64, &mut rng).unwrap();
    let rep = neighborly_scan(
        &gamma,
        3,
        false,
        false,
        &ScanMode::Sampled { num_queries: 10_000, seed: 1 },
    )
    .unwrap();
    println!(
        "one sampled scan: neighborly={} checked={} {:.1}s",
        rep.verdict.is_neighborly(),
        rep.queries_checked,
        t1.elapsed().as_secs_f64()
    );
}
