use depsketch_core::fft;
use depsketch_core::linalg;
use depsketch_core::processes::DependentMatrixConfig;
use depsketch_core::rng;
use depsketch_core::transforms::*;
use depsketch_core::Error;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gauss(len: usize, seed: u64, idx: u64) -> Vec<f64> {
    let mut g = rng::stream(seed, idx);
    (0..len).map(|_| g.sample(StandardNormal)).collect()
}

#[test]
fn fft_toeplitz_matches_dense_for_all_small_sizes() {
    for p in 2..=64 {
        for t in 0..20 {
            let xi = gauss(2 * p - 1, p as u64, t);
            let u = gauss(p, p as u64 + 1000, t);
            let a = toeplitz_apply_fft(p, &xi, &u);
            let b = toeplitz_apply_dense(p, &xi, &u);
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "p={p} t={t}: {err}");
        }
    }
}

#[test]
fn partial_toeplitz_operator_matches_dense_form() {
    let p = 9;
    let xi = gauss(2 * p - 1, 1, 0);
    let op = build_toeplitz(xi, vec![0, 3, 4, 8]).unwrap();
    let dense = op.to_dense();
    let u = gauss(p, 2, 0);
    let a = op.apply(&u).unwrap();
    let b = dense.matvec(&u).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!(matches!(build_toeplitz(vec![1.0; 4], vec![0]), Err(Error::InvalidParameter(_))));
    assert!(build_toeplitz(vec![1.0; 5], vec![2, 1]).is_err());
    assert!(build_toeplitz(vec![1.0; 5], vec![3]).is_err());
}

#[test]
fn countsketch_has_exact_column_support() {
    for pattern in [CountSketchPattern::Uniform, CountSketchPattern::Adaptive] {
        for (n, p, d) in [(8, 20, 1), (8, 20, 3), (16, 5, 16), (32, 64, 4)] {
            for seed in 0..10 {
                let op = build_countsketch(n, p, d, pattern, seed).unwrap();
                for j in 0..p {
                    assert_eq!(op.column_nnz(j), Some(d));
                }
                let dense = op.to_dense();
                for j in 0..p {
                    let nnz = (0..n).filter(|&r| dense[(r, j)] != 0.0).count();
                    assert_eq!(nnz, d);
                    let norm: f64 = (0..n).map(|r| dense[(r, j)].powi(2)).sum();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
            }
        }
    }
    assert!(build_countsketch(4, 4, 5, CountSketchPattern::Uniform, 0).is_err());
    assert!(build_countsketch(4, 4, 0, CountSketchPattern::Uniform, 0).is_err());
}

#[test]
fn countsketch_is_unbiased() {
    let u: Vec<f64> = (0..12).map(|i| (i as f64 - 5.5) / 3.0).collect();
    let nu = linalg::dot(&u, &u);
    for pattern in [CountSketchPattern::Uniform, CountSketchPattern::Adaptive] {
        let vals: Vec<f64> = (0..20_000)
            .map(|s| {
                let y = build_countsketch(6, 12, 2, pattern, s).unwrap().apply(&u).unwrap();
                linalg::dot(&y, &y) - nu
            })
            .collect();
        let m = depsketch_core::stats::mean(&vals);
        let se = depsketch_core::stats::std_error(&vals);
        assert!(m.abs() <= 3.0 * se, "{pattern:?}: {m} ± {se}");
    }
}

#[test]
fn vtheta_block_and_band_layouts() {
    let theta = vec![1.0, -2.0, 0.5];
    let block = build_vtheta(theta.clone(), 2, false).unwrap();
    let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
    let y = block.apply(&x).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert!((y[0] - s * (0.0 - 2.0 + 1.0)).abs() < 1e-15);
    assert!((y[1] - s * (3.0 - 8.0 + 2.5)).abs() < 1e-15);
    let band = build_vtheta(theta, 3, true).unwrap();
    assert_eq!((band.input_len(), band.output_len()), (5, 3));
    let d = band.to_dense();
    let yb = band.apply(&x[..5]).unwrap();
    let yd = d.matvec(&x[..5]).unwrap();
    assert!(yb.iter().zip(&yd).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn dense_jl_is_reproducible() {
    let g = DependentMatrixConfig::shape_modulated(1, 1, 0.8, 0.3);
    let a = build_jl_at(8, 5, &g, 3, 4).unwrap();
    let b = build_jl_at(8, 5, &g, 3, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.dims(), (8, 5));
}

proptest! {
    #[test]
    fn toeplitz_apply_is_linear(p in 2usize..40, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let xi = gauss(2 * p - 1, seed, 0);
        let u = gauss(p, seed, 1);
        let v = gauss(p, seed, 2);
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = toeplitz_apply_fft(p, &xi, &w);
        let fu = toeplitz_apply_fft(p, &xi, &u);
        let fv = toeplitz_apply_fft(p, &xi, &v);
        for r in 0..p {
            prop_assert!((lhs[r] - (a * fu[r] + b * fv[r])).abs() <= 1e-9);
        }
    }

    #[test]
    fn fft_roundtrip(len_pow in 0u32..9, seed in any::<u64>()) {
        let n = 1usize << len_pow;
        let re = gauss(n, seed, 0);
        let mut buf: Vec<fft::Complex> = re.iter().map(|&r| fft::Complex::new(r, 0.0)).collect();
        fft::fft_in_place(&mut buf, false);
        fft::fft_in_place(&mut buf, true);
        for (x, y) in buf.iter().zip(&re) {
            prop_assert!((x.re / n as f64 - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sketch_apply_matches_dense(n in 1usize..10, p in 1usize..12, seed in any::<u64>()) {
        let d = 1 + (seed as usize % n);
        let cs = build_countsketch(n, p, d, CountSketchPattern::Adaptive, seed).unwrap();
        let u = gauss(p, seed, 9);
        let y = cs.apply(&u).unwrap();
        let yd = cs.to_dense().matvec(&u).unwrap();
        for (a, b) in y.iter().zip(&yd) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_the_operator_scales_output(p in 2usize..16, seed in any::<u64>(), k in 0.1f64..5.0) {
        let op = build_toeplitz(gauss(2 * p - 1, seed, 0), (0..p).collect()).unwrap();
        let u = gauss(p, seed, 1);
        let base = op.apply(&u).unwrap();
        let SketchOperator::PartialToeplitz { scale, .. } = op else { unreachable!() };
        let scaled = build_toeplitz(gauss(2 * p - 1, seed, 0), (0..p).collect()).unwrap().with_scale(k * scale);
        let out = scaled.apply(&u).unwrap();
        for (a, b) in out.iter().zip(&base) {
            prop_assert!((a - k * b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }
}
