use depsketch_core::linalg::*;
use depsketch_core::rng;
use depsketch_core::verify::{rip_constant, RipMode};
use proptest::prelude::*;

fn to_na(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn random_sym(p: usize, seed: u64) -> Matrix {
    let g = Matrix::gaussian(p, p, &mut rng::stream(seed, 0));
    Matrix::from_fn(p, p, |r, c| g[(r, c)] + g[(c, r)])
}

proptest! {
    #[test]
    fn jacobi_matches_nalgebra(p in 1usize..12, seed in any::<u64>()) {
        let a = random_sym(p, seed);
        let ours = symmetric_eigen(&a).unwrap().values;
        let mut theirs: Vec<f64> = to_na(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = theirs.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn spectral_norm_matches_svd(r in 1usize..10, c in 1usize..10, seed in any::<u64>()) {
        let a = Matrix::gaussian(r, c, &mut rng::stream(seed, 1));
        let ours = spectral_norm(&a).unwrap();
        let theirs = to_na(&a).singular_values().max();
        prop_assert!((ours - theirs).abs() <= 1e-6 * theirs.max(1.0));
    }

    #[test]
    fn solve_matches_nalgebra(p in 1usize..10, seed in any::<u64>()) {
        let g = Matrix::gaussian(p + 3, p, &mut rng::stream(seed, 2));
        let mut a = g.gram();
        for i in 0..p { a[(i, i)] += 0.5; }
        let b: Vec<f64> = (0..p).map(|i| i as f64 - 1.0).collect();
        let x = spd_solve(&a, &b).unwrap();
        let xn = to_na(&a).lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        for (u, v) in x.iter().zip(xn.iter()) {
            prop_assert!((u - v).abs() <= 1e-8 * (1.0 + v.abs()));
        }
    }
}

/// Exact δ₂ against an independent per-support eigen-decomposition.
#[test]
fn rip_exact_matches_nalgebra_enumeration() {
    let (n, p, s) = (2048, 12, 2);
    let x = Matrix::gaussian(n, p, &mut rng::stream(42, 0));
    let ours = rip_constant(&x, s, RipMode::Exact, 0).unwrap();
    let xn = to_na(&x);
    let mut oracle: f64 = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let sub = xn.select_columns(&[i, j]);
            let g = sub.transpose() * &sub / n as f64;
            for ev in g.symmetric_eigen().eigenvalues.iter() {
                oracle = oracle.max((ev - 1.0).abs());
            }
        }
    }
    assert!((ours.delta_s - oracle).abs() <= 1e-12, "{} vs {oracle}", ours.delta_s);
    assert_eq!(ours.supports_examined, 66);
}
