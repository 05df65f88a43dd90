//! Experiments composed from core primitives: fixture generators, the
//! Toeplitz and CountSketch self-checks, and JL scaling sweeps.

use depsketch_core::linalg::{dot, Matrix};
use depsketch_core::processes::DependentMatrixConfig;
use depsketch_core::rng::{derive_seed, stream};
use depsketch_core::stats::{median, ols_slope};
use depsketch_core::transforms::{build_countsketch_with, toeplitz_apply_dense, toeplitz_apply_fft, CountSketchPattern};
use depsketch_core::verify::{jl_distortion, Check, DistortionStats, Series, SketchSpec, TrialReport};
use depsketch_core::Executor;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::Result;

mod tags {
    pub const POINTS: u64 = 0xD5_0001;
    pub const BSET: u64 = 0xD5_0002;
    pub const MASK: u64 = 0xD5_0003;
    pub const PROBE: u64 = 0xD5_0004;
    pub const JL_SWEEP: u64 = 0xD5_0005;
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

/// `count` standard Gaussian points in ℝᵖ.
pub fn random_points(count: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(derive_seed(seed, tags::POINTS), 0);
    (0..count).map(|_| gaussian_vec(p, &mut rng)).collect()
}

/// Symmetric n × n matrices with zero diagonal and N(0, 1/n) entries.
pub fn random_bset(n: usize, count: usize, seed: u64) -> Vec<Matrix> {
    let mut rng = stream(derive_seed(seed, tags::BSET), 0);
    let sd = 1.0 / (n as f64).sqrt();
    (0..count)
        .map(|_| {
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let v = sd * normal(&mut rng);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        })
        .collect()
}

/// Gaussian weights on I × Iᶜ with I the first ⌈n/2⌉ indices.
pub fn bipartite_mask(n: usize, seed: u64) -> Matrix {
    let mut rng = stream(derive_seed(seed, tags::MASK), 0);
    let half = n.div_ceil(2);
    Matrix::from_fn(n, n, |i, j| if i < half && j >= half { normal(&mut rng) } else { 0.0 })
}

/// Compares FFT and dense Toeplitz products for every p in `ps`, `inputs`
/// random (ξ, u) pairs each.
pub fn toeplitz_fft_check(ps: &[usize], inputs: usize, tol: f64, seed: u64) -> Result<TrialReport> {
    let mut report = TrialReport::new("toeplitz_fft", ps.len() * inputs, seed);
    let mut worst = Vec::with_capacity(ps.len());
    for &p in ps {
        if p == 0 {
            return Err(crate::Error::Usage("p must be positive".into()));
        }
        let mut rng = stream(seed, p as u64);
        let mut err: f64 = 0.0;
        for _ in 0..inputs {
            let xi = gaussian_vec(2 * p - 1, &mut rng);
            let u = gaussian_vec(p, &mut rng);
            let fast = toeplitz_apply_fft(p, &xi, &u);
            let slow = toeplitz_apply_dense(p, &xi, &u);
            err = fast.iter().zip(&slow).fold(err, |m, (a, b)| m.max((a - b).abs()));
        }
        worst.push(err);
    }
    let overall = worst.iter().copied().fold(0.0, f64::max);
    report.param("ps", format!("{ps:?}"));
    report.param("inputs", inputs);
    report.push_series(Series::new("max_abs_error", worst));
    report.push_check(Check::at_most("fft vs dense max abs error", overall, tol));
    Ok(report)
}

/// Builds `sketches` CountSketch operators and checks, for each, that every
/// column has exactly `d` non-zeros of magnitude 1/√d, then tests
/// E‖Xu‖² = ‖u‖² on a fixed unit probe u at 3 SE.
pub fn countsketch_check<E: Executor>(
    n: usize,
    p: usize,
    d: usize,
    pattern: CountSketchPattern,
    sketches: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    let mut probe = gaussian_vec(p, &mut stream(derive_seed(seed, tags::PROBE), 0));
    let norm = dot(&probe, &probe).sqrt();
    probe.iter_mut().for_each(|x| *x /= norm);
    let per: Vec<depsketch_core::Result<(f64, f64)>> = exec.map(sketches, |k| {
        let op = build_countsketch_with(n, p, d, pattern, &mut stream(seed, k as u64))?;
        let bad_cols = (0..p).filter(|&j| op.column_nnz(j) != Some(d)).count();
        let dense = op.to_dense();
        let w = 1.0 / (d as f64).sqrt();
        let bad_vals = dense.as_slice().iter().filter(|&&v| v != 0.0 && (v.abs() - w).abs() > 1e-15).count();
        let y = op.apply(&probe)?;
        Ok(((bad_cols + bad_vals) as f64, dot(&y, &y) - 1.0))
    });
    let per = per.into_iter().collect::<depsketch_core::Result<Vec<_>>>()?;
    let (violations, excess): (Vec<f64>, Vec<f64>) = per.into_iter().unzip();
    let total: f64 = violations.iter().sum();
    let mut report = TrialReport::new("countsketch", sketches, seed);
    report.param("n", n);
    report.param("p", p);
    report.param("d", d);
    report.param("pattern", format!("{pattern:?}").to_lowercase());
    report.push_series(Series::summary_only("nnz_violations", &violations));
    report.push_series(Series::new("norm_excess", excess.clone()));
    report.push_check(Check::at_most("column nnz violations", total, 0.0));
    report.push_check(Check::near_zero("unbiased squared norm", &excess, 3.0));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JlScaling {
    pub ns: Vec<usize>,
    pub median_distortion: Vec<f64>,
    /// OLS slope of ln(median) against ln(n); absent for a single n.
    pub slope: Option<f64>,
    pub runs: Vec<DistortionStats>,
}

/// One `jl_distortion` run per spec; spec k draws from
/// `derive_seed(derive_seed(seed, JL_SWEEP), k)`.
pub fn jl_sweep<E: Executor>(
    points: &[Vec<f64>],
    specs: &[SketchSpec],
    eps: f64,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<JlScaling> {
    if specs.is_empty() {
        return Err(crate::Error::Usage("no row counts given".into()));
    }
    let sweep = derive_seed(seed, tags::JL_SWEEP);
    let mut runs = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        runs.push(jl_distortion(points, spec, eps, trials, derive_seed(sweep, k as u64), exec)?);
    }
    let ns: Vec<usize> = specs.iter().map(SketchSpec::rows).collect();
    let median_distortion: Vec<f64> = runs.iter().map(|r| median(&r.distortions)).collect();
    let slope = (ns.len() >= 2).then(|| {
        let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ly: Vec<f64> = median_distortion.iter().map(|m| m.ln()).collect();
        ols_slope(&lx, &ly)
    });
    Ok(JlScaling { ns, median_distortion, slope, runs })
}

/// Dense dependent-entry sketches at each n in `ns`.
pub fn jl_scaling<E: Executor>(
    points: &[Vec<f64>],
    generator: &DependentMatrixConfig,
    ns: &[usize],
    eps: f64,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<JlScaling> {
    let specs: Vec<SketchSpec> =
        ns.iter().map(|&n| SketchSpec::Dense { generator: generator.clone(), n }).collect();
    jl_sweep(points, &specs, eps, trials, seed, exec)
}
