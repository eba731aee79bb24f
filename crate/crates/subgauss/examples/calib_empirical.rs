use std::time::Instant;
use subgauss::empirical::{sup_scaling_diag, FunctionalClass};
use subgauss::ensemble::Ensemble;
use subgauss::rng::RngState;

fn main() {
    let class = FunctionalClass::canonical_basis(32);
    for base in [20_000u64, 50_000] {
        let t0 = Instant::now();
        let diag = sup_scaling_diag(
            &class,
            &Ensemble::gaussian(),
            &[16, 64, 256, 1024, 4096],
            200,
            &mut RngState::new(base),
        )
        .unwrap();
        println!(
            "base {base}: slope {:.4} elapsed {:.1}s points {:?}",
            diag.slope,
            t0.elapsed().as_secs_f64(),
            diag.points
                .iter()
                .map(|p| (p.k, (p.mean_sup_z * 1e4).round() / 1e4))
                .collect::<Vec<_>>()
        );
    }
}
