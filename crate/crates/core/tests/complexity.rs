use depsketch_core::complexity::*;
use depsketch_core::linalg::{spectral_norm, Matrix};
use depsketch_core::{rng, Error, Sequential};
use proptest::prelude::*;

/// E‖h‖ for h ~ N(0, I_p): √2 Γ((p+1)/2) / Γ(p/2).
fn chi_mean(p: usize) -> f64 {
    let lg = |x: f64| libm::lgamma(x);
    2f64.sqrt() * (lg((p as f64 + 1.0) / 2.0) - lg(p as f64 / 2.0)).exp()
}

#[test]
fn sphere_width_matches_chi_mean() {
    for p in [1, 4, 16, 64] {
        let set = MatrixSetDescriptor::VThetaSphere { n: 10, p };
        let w = gaussian_width_mc(&set, 20_000, 3, &Sequential).unwrap();
        assert!((w.estimate - chi_mean(p)).abs() <= 4.0 * w.std_error, "p={p}: {} vs {}", w.estimate, chi_mean(p));
    }
}

#[test]
fn sparse_width_with_full_support_equals_sphere() {
    let a = gaussian_width_mc(&MatrixSetDescriptor::VThetaSparse { n: 3, p: 7, s: 7 }, 500, 1, &Sequential).unwrap();
    let b = gaussian_width_mc(&MatrixSetDescriptor::VThetaSphere { n: 3, p: 7 }, 500, 1, &Sequential).unwrap();
    assert!((a.estimate - b.estimate).abs() < 1e-12);
}

#[test]
fn finite_width_of_single_matrix_is_frobenius_times_half_normal() {
    let a = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let w = gaussian_width_mc(&MatrixSetDescriptor::finite(vec![a]), 40_000, 2, &Sequential).unwrap();
    let exact = 5.0 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((w.estimate - exact).abs() <= 4.0 * w.std_error);
}

#[test]
fn vtheta_radii_follow_block_structure() {
    let set = MatrixSetDescriptor::VThetaSparse { n: 9, p: 6, s: 2 };
    assert_eq!(frob_radius(&set).unwrap(), 1.0);
    assert!((opnorm_radius(&set).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let band = MatrixSetDescriptor::toeplitz_band(4, 6, 2);
    let r = opnorm_radius(&band).unwrap();
    assert!((r - (2f64).sqrt() / 2.0).abs() < 1e-15);
    // A flat θ on the band attains more than ‖θ‖₂/√n.
    let theta = vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0, 0.0, 0.0, 0.0];
    let op = depsketch_core::transforms::build_vtheta(theta, 4, true).unwrap().to_dense();
    let rows = Matrix::from_fn(4, op.cols(), |r, c| op[(r, c)]);
    let norm = spectral_norm(&rows).unwrap();
    assert!(norm > 0.5 + 1e-3 && norm <= r + 1e-12, "{norm}");
}

#[test]
fn bound_arithmetic_fixtures() {
    let b = deviation_bound(2.0, 0.5, 3.0, 1.0, 1.0, BoundVariant::Dependent).unwrap();
    assert_eq!((b.m, b.v, b.u), (15.0, 2.5, 0.25));
    let r = deviation_bound(2.0, 0.5, 3.0, 1.0, 1.0, BoundVariant::IidReference).unwrap();
    assert_eq!(r.m, 16.0);
    let t = b.tail_probability(1.0);
    // min(1/6.25, 1/0.25) = 0.16.
    assert!((t.raw - 2.0 * (-0.16f64).exp()).abs() < 1e-15);
    assert_eq!(t.branch, TailBranch::Quadratic);
    assert_eq!(t.threshold, 15.0);
    let t = b.tail_probability(100.0);
    assert_eq!(t.branch, TailBranch::Linear);
    assert!(matches!(deviation_bound(-1.0, 0.5, 3.0, 1.0, 1.0, BoundVariant::Dependent), Err(Error::InvalidParameter(_))));
}

#[test]
fn sample_size_formulas() {
    let n = sample_size(SampleSizeKind::Jl { eps: 0.5, points: 32 }, 8.0).unwrap();
    assert_eq!(n, (8.0 / 0.25 * 32f64.ln()).ceil() as usize);
    let n = sample_size(SampleSizeKind::Rip { eps: 0.5, s: 2, p: 12 }, 1.0).unwrap();
    assert_eq!(n, (4.0 * 2.0 * 12f64.ln()).ceil() as usize);
    assert_eq!(sample_size(SampleSizeKind::Jl { eps: 0.99, points: 1 }, 1.0).unwrap(), 1);
    assert!(sample_size(SampleSizeKind::Jl { eps: 1.0, points: 4 }, 1.0).is_err());
}

#[test]
fn complexity_report_combines_pieces() {
    let set = MatrixSetDescriptor::VThetaSphere { n: 16, p: 4 };
    let r = complexity_report(&set, 2_000, 7, 2.0, &Sequential).unwrap();
    assert_eq!(r.op_scale, 0.25);
    assert!((r.gamma2_upper - 2.0 * r.width * 0.25).abs() < 1e-15);
    let g = Matrix::gaussian(3, 3, &mut rng::stream(1, 0));
    let hull = MatrixSetDescriptor::Explicit { extreme_points: vec![g.clone(), g.scaled(-0.5)] };
    let h = complexity_report(&hull, 100, 1, 1.0, &Sequential).unwrap();
    assert!((h.d_f - g.frobenius()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn tail_probability_is_monotone(d_f in 0.0f64..5.0, d_op in 0.0f64..2.0, g2 in 0.0f64..5.0,
                                    c2 in 0.1f64..3.0, e1 in 0.0f64..10.0, de in 0.0f64..10.0) {
        let b = deviation_bound(d_f, d_op, g2, 1.0, c2, BoundVariant::Dependent).unwrap();
        let p1 = b.tail_probability(e1).probability;
        let p2 = b.tail_probability(e1 + de).probability;
        prop_assert!(p2 <= p1);
        prop_assert!((0.0..=1.0).contains(&p1));
    }

    #[test]
    fn iid_reference_dominates(d_f in 0.0f64..5.0, d_op in 0.0f64..2.0, g2 in 0.0f64..5.0) {
        let dep = deviation_bound(d_f, d_op, g2, 1.0, 1.0, BoundVariant::Dependent).unwrap();
        let iid = deviation_bound(d_f, d_op, g2, 1.0, 1.0, BoundVariant::IidReference).unwrap();
        prop_assert!(iid.m >= dep.m);
        prop_assert_eq!(iid.m == dep.m, d_f * d_op == 0.0);
    }

    #[test]
    fn bound_terms_scale_with_the_set(d_f in 0.01f64..5.0, d_op in 0.01f64..2.0, g2 in 0.01f64..5.0, k in 0.1f64..10.0) {
        // Scaling every matrix by k multiplies each term by k².
        let a = deviation_bound(d_f, d_op, g2, 1.0, 1.0, BoundVariant::Dependent).unwrap();
        let b = deviation_bound(k * d_f, k * d_op, k * g2, 1.0, 1.0, BoundVariant::Dependent).unwrap();
        prop_assert!((b.m - k * k * a.m).abs() <= 1e-9 * b.m.max(1.0));
        prop_assert!((b.v - k * k * a.v).abs() <= 1e-9 * b.v.max(1.0));
        prop_assert!((b.u - k * k * a.u).abs() <= 1e-9 * b.u.max(1.0));
    }

    #[test]
    fn sample_size_monotone(eps in 0.05f64..0.95, de in 0.0f64..0.04, points in 2usize..1000) {
        let a = sample_size(SampleSizeKind::Jl { eps, points }, 4.0).unwrap();
        let b = sample_size(SampleSizeKind::Jl { eps: eps + de, points }, 4.0).unwrap();
        prop_assert!(b <= a);
        let c = sample_size(SampleSizeKind::Jl { eps, points: points + 1 }, 4.0).unwrap();
        prop_assert!(c >= a);
    }

    #[test]
    fn width_is_monotone_in_sparsity(p in 2usize..20, seed in any::<u64>()) {
        // Same Gaussian draw for every s.
        let draws: Vec<f64> = (1..=p)
            .map(|s| width_draw(&MatrixSetDescriptor::VThetaSparse { n: 1, p, s }, &mut rng::stream(seed, 0)))
            .collect();
        for w in draws.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }
}

#[test]
fn azuma_bounds() {
    let b = azuma_hoeffding_tail(&[1.0; 4], 2.0).unwrap();
    assert!((b.raw - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    assert!(azuma_hoeffding_tail(&[], 1.0).is_err());
    let e = azuma_bernstein_tail(&[1.0, 1.0], 1.0, 1.0, 1.0, 1.0).unwrap();
    assert!((e.raw - 2.0 * (-0.125f64).exp()).abs() < 1e-15);
}
