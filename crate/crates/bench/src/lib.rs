//! Fixtures shared by the benchmarks.

use adasvd::synthetic::{Scene, SceneGenerator};
use adasvd::{svd_append, BackgroundModel, FactoredBasis, Params};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entries uniform in `[-1, 1)`, reproducible from `seed`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Basis of rank `rank` over `R^dim`, grown in blocks of six columns with
/// the significance gate off.
pub fn random_basis(dim: usize, rank: usize, seed: u64) -> FactoredBasis {
    let a = random_matrix(dim, rank, seed);
    let mut basis = FactoredBasis::empty(dim);
    let mut c = 0;
    while c < rank {
        let m = 6.min(rank - c);
        basis = svd_append(&basis, &a.columns(c, m).into_owned(), 0.0)
            .expect("block fits the dimension")
            .0;
        c += m;
    }
    basis
}

/// Moving-square scene and a model initialized from 15 frames spread over
/// its first 300 frames.
pub fn scene_model(width: usize, height: usize) -> (SceneGenerator, BackgroundModel) {
    let gen = Scene::moving_square(width, height, 1).generator();
    let init: Vec<Vec<f64>> = (0..15).map(|k| gen.frame(k * 299 / 14)).collect();
    let model = BackgroundModel::initialize(&init, width, height, Params::default())
        .expect("textured frames");
    (gen, model)
}
