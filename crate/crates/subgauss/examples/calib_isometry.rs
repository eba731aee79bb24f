use subgauss::empirical::{isometry_audit, IsometryVerdict};
use subgauss::ensemble::{sample_matrix, Ensemble};
use subgauss::geometry::SetDescriptor;
use subgauss::rng::RngState;

fn main() {
    let n = 24;
    let set = SetDescriptor::SparseCap { n, m: 2 };
    for base in [20_000u64, 40_000] {
        for k in [24usize, 48, 96] {
            let mut fails = 0;
            for seed in 0..100 {
                let mut rng = RngState::new(base + seed);
                let gamma = sample_matrix(&Ensemble::gaussian(), k, n, &mut rng).unwrap();
                if let IsometryVerdict::Violated { .. } =
                    isometry_audit(&gamma, &set, 0.9).unwrap()
                {
                    fails += 1;
                }
            }
            println!("base {base} k {k}: failures {fails}/100");
        }
    }
}
