use subgauss::ensemble::{sample_matrix, Ensemble};
use subgauss::polytope::{duplicate_columns, face_certificate, FaceQuery, FaceVerdict};
use subgauss::rng::RngState;

fn main() {
    for (seed, pair) in [(20_006u64, (2usize, 29usize)), (20_008, (3, 12)), (20_012, (8, 9))] {
        let mut rng = RngState::new(seed);
        let gamma = sample_matrix(&Ensemble::rademacher(), 16, 32, &mut rng).unwrap();
        let dups = duplicate_columns(&gamma);
        let q = FaceQuery::nonsymmetric(vec![pair.0, pair.1]).unwrap();
        let verdict = face_certificate(&gamma, &q).unwrap();
        let desc = match &verdict {
            FaceVerdict::Face(c) => format!("face margin {}", c.margin),
            FaceVerdict::NotAFace { degenerate } => format!("not-a-face degenerate={degenerate}"),
        };
        // overlap of the two columns
        let dot: f64 = gamma.column(pair.0).iter().zip(gamma.column(pair.1)).map(|(a, b)| a * b).sum();
        println!("seed {seed}: dups={dups:?} query {pair:?}: {desc}, col dot {dot}");
    }
}
