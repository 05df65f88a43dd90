use depsketch_core::complexity::MatrixSetDescriptor;
use depsketch_core::linalg::{self, Matrix};
use depsketch_core::processes::{ConditionalLaw, DependentMatrixConfig, ProcessConfig};
use depsketch_core::rng;
use depsketch_core::transforms::SketchOperator;
use depsketch_core::verify::*;
use depsketch_core::{Error, Executor, Sequential};
use rand::Rng;
use rand_distr::StandardNormal;

/// Scoped-thread executor with interleaved work assignment.
struct Threads(usize);

impl Executor for Threads {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
        let parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..self.0)
                .map(|w| {
                    let f = &f;
                    s.spawn(move || (w..count).step_by(self.0).map(|i| (i, f(i))).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (i, v) in parts.into_iter().flatten() {
            slots[i] = Some(v);
        }
        slots.into_iter().map(Option::unwrap).collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (v / xs.len() as f64).sqrt()
}

#[test]
fn cbd_zero_matrix_is_identically_zero() {
    let set = MatrixSetDescriptor::finite(vec![Matrix::zeros(3, 4)]);
    let r = estimate_cbd(&set, &ProcessConfig::gm1(4), 50, 1, &Sequential).unwrap();
    for q in ["C", "B", "D"] {
        assert!(r.series(q).unwrap().samples.iter().all(|&v| v == 0.0), "{q}");
    }
    assert!(r.passed());
}

#[test]
fn cbd_identity_matches_chi_square_oracle() {
    // E|χ²₄ − 4| = 16 e^{-2}.
    let exact = 16.0 * (-2.0f64).exp();
    let set = MatrixSetDescriptor::finite(vec![Matrix::identity(4)]);
    let r = estimate_cbd(&set, &ProcessConfig::iid(4), 40_000, 7, &Sequential).unwrap();
    let c = &r.series("C").unwrap().samples;
    assert!((mean(c) - exact).abs() <= 3.0 * se(c), "mean {} vs {exact}", mean(c));

    // Independent draw-based oracle with a different generator.
    let mut g = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(99);
    let draws: Vec<f64> = (0..200_000)
        .map(|_| ((0..4).map(|_| g.sample::<f64, _>(StandardNormal).powi(2)).sum::<f64>() - 4.0).abs())
        .collect();
    assert!((mean(&draws) - exact).abs() <= 4.0 * se(&draws));

    // For A = I the cross terms vanish, so C = D and B = 0 on every draw.
    let d = &r.series("D").unwrap().samples;
    let b = &r.series("B").unwrap().samples;
    assert!(c.iter().zip(d).all(|(x, y)| (x - y).abs() < 1e-9));
    assert!(b.iter().all(|&x| x.abs() < 1e-9));
}

#[test]
fn cbd_pointwise_split_on_infinite_sets() {
    let sets = [
        MatrixSetDescriptor::VThetaSphere { n: 5, p: 3 },
        MatrixSetDescriptor::VThetaSparse { n: 4, p: 5, s: 2 },
        MatrixSetDescriptor::toeplitz_band(3, 4, 2),
    ];
    for set in sets {
        let n = set.dims().1;
        for cfg in [ProcessConfig::gm1(n), ProcessConfig::gm2(n), ProcessConfig::gm3(n)] {
            let r = estimate_cbd(&set, &cfg, 300, 3, &Sequential).unwrap();
            assert!(r.passed(), "{set:?} {:?}", cfg.family);
        }
    }
}

#[test]
fn cbd_sphere_supremum_dominates_sampled_directions() {
    // The exact sup over the sphere must be at least the value of any
    // sampled θ, computed directly from the dense V_θ matrix.
    let (n, p) = (4, 3);
    let cfg = ProcessConfig::iid(n * p);
    let set = MatrixSetDescriptor::VThetaSphere { n, p };
    let r = estimate_cbd(&set, &cfg, 5, 11, &Sequential).unwrap();
    let c = &r.series("C").unwrap().samples;
    let mut g = rng::stream(5, 0);
    for (t, &ct) in c.iter().enumerate() {
        let xi = depsketch_core::processes::sample_path_at(&cfg, 11, t as u64).unwrap().xi;
        for _ in 0..500 {
            let mut theta: Vec<f64> = (0..p).map(|_| g.sample(StandardNormal)).collect();
            let nt = linalg::norm2(&theta);
            theta.iter_mut().for_each(|v| *v /= nt);
            let a = depsketch_core::transforms::build_vtheta(theta, n, false).unwrap().to_dense();
            let y = a.matvec(&xi).unwrap();
            let expect = a.frobenius().powi(2);
            let val = (linalg::dot(&y, &y) - expect).abs();
            assert!(val <= ct + 1e-9, "sampled {val} above exact {ct}");
        }
    }
}

#[test]
fn cbd_rejects_hull_and_dimension_mismatch() {
    let hull = MatrixSetDescriptor::Explicit { extreme_points: vec![Matrix::identity(2)] };
    assert!(matches!(estimate_cbd(&hull, &ProcessConfig::iid(2), 10, 0, &Sequential), Err(Error::Unsupported(_))));
    let set = MatrixSetDescriptor::finite(vec![Matrix::identity(3)]);
    assert!(matches!(
        estimate_cbd(&set, &ProcessConfig::iid(4), 10, 0, &Sequential),
        Err(Error::DimensionMismatch { .. })
    ));
    let big = MatrixSetDescriptor::VThetaSparse { n: 1, p: 40, s: 10 };
    assert!(matches!(
        estimate_cbd(&big, &ProcessConfig::iid(40), 10, 0, &Sequential),
        Err(Error::GuardExceeded { .. })
    ));
}

#[test]
fn offdiag_means_vanish_and_control_fails() {
    assert!(check_offdiag_zero(&ProcessConfig::iid(4), 20_000, 1, &Sequential).unwrap().passed());
    let gm2 = ProcessConfig::gm2(6).with_rho(0.9);
    assert!(check_offdiag_zero(&gm2, 100_000, 2, &Sequential).unwrap().passed());
    let control = ProcessConfig::iid(3).with_law(ConditionalLaw::bernoulli(0.5)).uncentered();
    let r = check_offdiag_zero(&control, 5_000, 3, &Sequential).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(check_offdiag_zero(&ProcessConfig::iid(1), 10, 0, &Sequential).is_err());
}

fn pair_matrix(n: usize, j: usize, k: usize, v: f64) -> Matrix {
    Matrix::from_fn(n, n, |r, c| if (r, c) == (j, k) || (r, c) == (k, j) { v } else { 0.0 })
}

#[test]
fn decoupling_two_point_closed_form() {
    // LHS = E|2ξ₁ξ₂| = 4/π; RHS = E|ξ₁ξ'₂ + ξ₂ξ'₁| = 1.
    let b = vec![pair_matrix(2, 0, 1, 1.0)];
    let r = check_decoupling(&ProcessConfig::iid(2), &b, 1, 100_000, 5, &Sequential).unwrap();
    let lhs = &r.series("lhs").unwrap().samples;
    let rhs = &r.series("rhs").unwrap().samples;
    assert!((mean(lhs) - 4.0 / std::f64::consts::PI).abs() <= 3.0 * se(lhs));
    assert!((mean(rhs) - 1.0).abs() <= 3.0 * se(rhs));
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn decoupling_gm1_random_set_and_zero_set() {
    let n = 5;
    let mut g = rng::stream(17, 0);
    let bset: Vec<Matrix> = (0..3)
        .map(|_| {
            let m = Matrix::gaussian(n, n, &mut g);
            Matrix::from_fn(n, n, |r, c| if r == c { 0.0 } else { m[(r, c)] + m[(c, r)] })
        })
        .collect();
    let r = check_decoupling(&ProcessConfig::gm1(n), &bset, 2, 20_000, 9, &Sequential).unwrap();
    assert!(r.passed());
    let zero = vec![Matrix::zeros(n, n)];
    let r = check_decoupling(&ProcessConfig::gm1(n), &zero, 1, 100, 9, &Sequential).unwrap();
    assert!(r.series("lhs").unwrap().samples.iter().all(|&v| v == 0.0));
    assert!(r.passed());
}

#[test]
fn decoupling_validates_inputs() {
    let cfg = ProcessConfig::iid(2);
    assert!(matches!(check_decoupling(&cfg, &[pair_matrix(2, 0, 1, 1.0)], 3, 10, 0, &Sequential), Err(Error::Unsupported(_))));
    assert!(check_decoupling(&cfg, &[], 1, 10, 0, &Sequential).is_err());
    assert!(check_decoupling(&cfg, &[Matrix::identity(2)], 1, 10, 0, &Sequential).is_err());
    let asym = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    assert!(check_decoupling(&cfg, &[asym], 1, 10, 0, &Sequential).is_err());
    let det = ProcessConfig::gm3(2).with_law(ConditionalLaw::Gaussian);
    assert!(matches!(check_decoupling(&det, &[pair_matrix(2, 0, 1, 1.0)], 1, 10, 0, &Sequential), Err(Error::Unsupported(_))));
}

#[test]
fn tangent_equivalence_on_bipartite_masks() {
    let mut mask = Matrix::zeros(2, 2);
    mask[(0, 1)] = 1.0;
    let r = check_tangent_equivalence(&ProcessConfig::iid(2), &mask, 20_000, 4, &Sequential).unwrap();
    assert!(r.passed(), "{:?}", r.checks);

    let mut mask = Matrix::zeros(4, 4);
    let mut g = rng::stream(23, 0);
    for j in [0, 2] {
        for k in [1, 3] {
            mask[(j, k)] = g.sample(StandardNormal);
        }
    }
    let r = check_tangent_equivalence(&ProcessConfig::gm2(4), &mask, 20_000, 6, &Sequential).unwrap();
    assert!(r.passed(), "{:?}", r.checks);

    let r = check_tangent_equivalence(&ProcessConfig::gm1(3), &Matrix::zeros(3, 3), 1_000, 6, &Sequential).unwrap();
    assert!(r.passed());
}

#[test]
fn tangent_equivalence_rejects_symmetric_mask() {
    let err = check_tangent_equivalence(&ProcessConfig::iid(2), &pair_matrix(2, 0, 1, 1.0), 100, 0, &Sequential)
        .unwrap_err();
    assert!(err.to_string().contains("I x I^c"), "{err}");
}

#[test]
fn symmetrization_single_coordinate_and_gm1() {
    let r = check_symmetrization(&ProcessConfig::iid(1), &[1.0], &[ScalarMap::Identity], 1, 5_000, 2, &Sequential).unwrap();
    assert!(r.passed());
    // H(2R) is exactly twice E|ξ| in mean: slack factor 2.
    let h2r = mean(&r.series("H(2R)").unwrap().samples);
    assert!((h2r - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.1);

    let w: Vec<f64> = (1..=6).map(|i| 1.0 / i as f64).collect();
    let r = check_symmetrization(
        &ProcessConfig::gm1(6),
        &w,
        &[ScalarMap::Identity, ScalarMap::Square],
        2,
        20_000,
        3,
        &Sequential,
    )
    .unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert!(matches!(
        check_symmetrization(&ProcessConfig::gm1(2), &[1.0, 1.0], &[], 1, 10, 0, &Sequential),
        Err(Error::EmptySet(_))
    ));
}

#[test]
fn contraction_holds_with_estimated_k() {
    for cfg in [ProcessConfig::gm1(5), ProcessConfig::gm3(5)] {
        let r = check_contraction(&cfg, &[1.0, -0.5, 0.25, 0.8, 0.3], 1, 10_000, 8, &Sequential).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        let k: f64 = r.parameters["K"].parse().unwrap();
        assert!(k >= 1.0);
    }
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let cfg = ProcessConfig::gm1(4);
    let set = MatrixSetDescriptor::VThetaSparse { n: 2, p: 2, s: 1 };
    let a = estimate_cbd(&set, &cfg, 3_000, 5, &Sequential).unwrap();
    let b = estimate_cbd(&set, &cfg, 3_000, 5, &Threads(4)).unwrap();
    assert_eq!(a, b);
    let w = [1.0, 2.0, 3.0, 4.0];
    let a = check_symmetrization(&cfg, &w, &[ScalarMap::Tanh], 1, 3_000, 1, &Sequential).unwrap();
    let b = check_symmetrization(&cfg, &w, &[ScalarMap::Tanh], 1, 3_000, 1, &Threads(3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verdicts_stable_under_reseeding() {
    let cfg = ProcessConfig::gm1(4);
    let b = vec![pair_matrix(4, 0, 2, 1.0), pair_matrix(4, 1, 3, -1.0)];
    let w = [0.5, 1.0, -1.0, 2.0];
    let first_d = check_decoupling(&cfg, &b, 1, 4_000, 0, &Sequential).unwrap().verdict;
    let first_s = check_symmetrization(&cfg, &w, &[ScalarMap::Abs], 1, 4_000, 0, &Sequential).unwrap().verdict;
    for seed in 1..10 {
        assert_eq!(check_decoupling(&cfg, &b, 1, 4_000, seed, &Sequential).unwrap().verdict, first_d);
        assert_eq!(check_symmetrization(&cfg, &w, &[ScalarMap::Abs], 1, 4_000, seed, &Sequential).unwrap().verdict, first_s);
    }
}

#[test]
fn distortion_zero_for_exact_isometry() {
    // Orthonormal rows; u in the row space is preserved exactly.
    let x = Matrix::from_rows(&[vec![0.6, 0.8, 0.0], vec![-0.8, 0.6, 0.0]]).unwrap();
    let op = SketchOperator::Dense { matrix: x, scale: 1.0 };
    let d = max_distortion(&op, &[vec![0.6, 0.8, 0.0], vec![1.0, 2.0, 0.0]]).unwrap();
    assert!(d < 1e-15);
    assert!(max_distortion(&op, &[vec![0.0; 3]]).is_err());
}

#[test]
fn jl_rejects_zero_point_and_reports_rates() {
    let spec = SketchSpec::Dense { generator: DependentMatrixConfig::iid(1, 1), n: 16 };
    assert!(jl_distortion(&[vec![1.0, 0.0], vec![0.0, 0.0]], &spec, 0.5, 5, 0, &Sequential).is_err());
    let pts: Vec<Vec<f64>> = (0..4).map(|i| (0..32).map(|j| ((i * 7 + j) % 5) as f64 - 2.0).collect()).collect();
    for spec in [
        spec,
        SketchSpec::CountSketch { n: 16, d: 2, pattern: depsketch_core::transforms::CountSketchPattern::Adaptive },
        SketchSpec::Toeplitz { n: 16, process: ProcessConfig::gm1(3) },
    ] {
        let s = jl_distortion(&pts, &spec, 0.5, 40, 3, &Sequential).unwrap();
        assert!((0.0..=1.0).contains(&s.failure_rate));
        assert!(s.distortions.iter().all(|&d| d >= 0.0));
        assert_eq!(s.distortions.len(), 40);
    }
}

#[test]
fn rip_exact_and_mc_agree_with_oracles() {
    let (n, p) = (256, 8);
    let x = Matrix::gaussian(n, p, &mut rng::stream(3, 0));
    // s = 1 reduces to column norms.
    let d1 = rip_constant(&x, 1, RipMode::Exact, 0).unwrap().delta_s;
    let cols = (0..p).map(|j| (x.column(j).iter().map(|v| v * v).sum::<f64>() / n as f64 - 1.0).abs()).fold(0.0, f64::max);
    assert!((d1 - cols).abs() < 1e-12);

    let exact = rip_constant(&x, 3, RipMode::Exact, 0).unwrap();
    assert_eq!(exact.supports_examined, 56);
    let mc = rip_constant(&x, 3, RipMode::MonteCarlo { trials: 5_000 }, 1).unwrap();
    assert!(mc.delta_s <= exact.delta_s + 1e-12);

    // An exact isometry has δ_s = 0.
    let iso = Matrix::identity(4).scaled(2.0);
    assert!(rip_constant(&iso, 2, RipMode::Exact, 0).unwrap().delta_s < 1e-12);
    let big = Matrix::zeros(2, 40);
    assert!(matches!(rip_constant(&big, 10, RipMode::Exact, 0), Err(Error::GuardExceeded { .. })));
    assert!(rip_constant(&x, 9, RipMode::Exact, 0).is_err());
}

#[test]
fn bandit_trivial_eps_and_errors() {
    let mut cfg = BanditConfig::new(3, 2, 0.5, 60);
    cfg.eps = 1.0;
    cfg.runs = 4;
    cfg.pilot_runs = 4;
    let r = bandit_min_eig_experiment(&cfg, &BuiltinAdversary::Rotating, 1, &Sequential).unwrap();
    assert_eq!(r.t_min, 1);
    assert_eq!(r.pass_fraction, 1.0);
    assert!(r.report.passed());

    let mut bad = cfg.clone();
    bad.sigma = 0.0;
    assert!(bandit_min_eig_experiment(&bad, &BuiltinAdversary::Zero, 1, &Sequential).is_err());
    let mut bad = cfg;
    bad.k = 1;
    assert!(bandit_min_eig_experiment(&bad, &BuiltinAdversary::Zero, 1, &Sequential).is_err());
}

#[test]
fn bandit_zero_adversary_slope_is_sigma2_times_max_variance() {
    let (p, k, sigma) = (4, 4, 0.5);
    let mut cfg = BanditConfig::new(p, k, sigma, 20 * p);
    cfg.runs = 200;
    cfg.pilot_runs = 10;
    cfg.eps = 0.9;
    cfg.c_sample = 1e-3;
    let r = bandit_min_eig_experiment(&cfg, &BuiltinAdversary::Zero, 5, &Sequential).unwrap();
    let expected = sigma * sigma * max_normal_variance(k);
    assert!((r.early_slope - expected).abs() <= 0.1 * expected, "slope {} vs {expected}", r.early_slope);
}

#[test]
fn selection_law_matches_simulation() {
    let a = [0.3, -0.1, 0.0];
    let (c, sigma) = (1.5, 0.7);
    let (probs, m) = selection_mean(&a, c, sigma);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut g = rng::stream(77, 0);
    let trials = 200_000;
    let mut counts = [0usize; 3];
    let mut zsum = 0.0;
    for _ in 0..trials {
        let z: Vec<f64> = (0..3).map(|_| g.sample(StandardNormal)).collect();
        let best = (0..3).max_by(|&i, &j| (a[i] + c * sigma * z[i]).total_cmp(&(a[j] + c * sigma * z[j]))).unwrap();
        counts[best] += 1;
        zsum += z[best];
    }
    for i in 0..3 {
        assert!((counts[i] as f64 / trials as f64 - probs[i]).abs() < 0.005);
    }
    assert!((zsum / trials as f64 - m).abs() < 0.01);
    // Var(max of 2 normals) = 1 − 1/π.
    assert!((max_normal_variance(2) - (1.0 - 1.0 / std::f64::consts::PI)).abs() < 1e-6);
}
