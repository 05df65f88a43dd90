use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::batch_mean;
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::linalg::{binomial, dot, eigen_range, for_each_subset, norm2, Matrix};
use crate::processes::{sample_dependent_matrix_at, sample_unchecked, DependentMatrixConfig, ProcessConfig};
use crate::rng::{derive_seed, stream, tags};
use crate::stats::{median, Summary};
use crate::transforms::{build_countsketch_with, build_jl_at, CountSketchPattern, SketchOperator};

/// Largest C(p, s) enumerated by exact RIP.
pub const RIP_SUPPORT_GUARD: u128 = 100_000;

/// Paths used to normalise Toeplitz entries when the process has no
/// closed-form second moment.
const TOEPLITZ_MOMENT_PATHS: usize = 4096;

/// How a fresh sketch is drawn for each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SketchSpec {
    /// (1/√n)·X̃ with X̃ from the dependent-entry generator.
    Dense { generator: DependentMatrixConfig, n: usize },
    CountSketch { n: usize, d: usize, pattern: CountSketchPattern },
    /// Partial Toeplitz on the first `n` rows; ξ of length 2p−1 comes from
    /// `process` and each entry is rescaled to unit second moment.
    Toeplitz { n: usize, process: ProcessConfig },
}

impl SketchSpec {
    pub fn rows(&self) -> usize {
        match self {
            SketchSpec::Dense { n, .. } | SketchSpec::CountSketch { n, .. } | SketchSpec::Toeplitz { n, .. } => *n,
        }
    }
}

/// Distortion of a sketch family on a fixed point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionStats {
    pub n: usize,
    pub p: usize,
    pub points: usize,
    pub trials: usize,
    pub eps: f64,
    pub seed: u64,
    /// Per-trial max relative distortion.
    pub distortions: Vec<f64>,
    pub summary: Summary,
    /// Fraction of trials with distortion above `eps`.
    pub failure_rate: f64,
}

/// max_u |‖Xu‖² − ‖u‖²| / ‖u‖².
pub fn max_distortion(op: &SketchOperator, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in points {
        let nu = dot(u, u);
        if nu == 0.0 {
            return Err(invalid("distortion is undefined for the zero vector"));
        }
        let y = op.apply(u)?;
        worst = worst.max((dot(&y, &y) - nu).abs() / nu);
    }
    Ok(worst)
}

struct Builder {
    spec: SketchSpec,
    p: usize,
    /// Per-entry 1/√E ξ_k² for Toeplitz sketches.
    norm: Vec<f64>,
}

impl Builder {
    fn new<E: Executor>(spec: &SketchSpec, p: usize, seed: u64, exec: &E) -> Result<Builder> {
        let mut norm = Vec::new();
        match spec {
            SketchSpec::Dense { generator, n } => {
                if *n == 0 {
                    return Err(invalid("sketch needs n >= 1"));
                }
                generator.with_dims(*n, p).validate()?;
            }
            SketchSpec::CountSketch { n, d, .. } => {
                if *d == 0 || d > n {
                    return Err(invalid(format!("CountSketch needs 1 <= d <= n (d = {d}, n = {n})")));
                }
            }
            SketchSpec::Toeplitz { n, process } => {
                if *n == 0 || *n > p {
                    return Err(invalid(format!("Toeplitz sketch needs 1 <= n <= p (n = {n}, p = {p})")));
                }
                let mut cfg = process.clone();
                cfg.n = 2 * p - 1;
                cfg.validate()?;
                norm = match cfg.constant_second_moment() {
                    Some(m) => alloc::vec![1.0 / libm::sqrt(m); cfg.n],
                    None => {
                        let mseed = derive_seed(seed, tags::MOMENTS);
                        batch_mean(exec, TOEPLITZ_MOMENT_PATHS, cfg.n, |i| {
                            sample_unchecked(&cfg, mseed, i as u64, false).xi.iter().map(|x| x * x).collect()
                        })
                        .into_iter()
                        .map(|m| 1.0 / libm::sqrt(m))
                        .collect()
                    }
                };
            }
        }
        Ok(Builder { spec: spec.clone(), p, norm })
    }

    fn build(&self, seed: u64, t: u64) -> Result<SketchOperator> {
        let p = self.p;
        match &self.spec {
            SketchSpec::Dense { generator, n } => build_jl_at(*n, p, generator, seed, t),
            SketchSpec::CountSketch { n, d, pattern } => {
                build_countsketch_with(*n, p, *d, *pattern, &mut stream(seed, t))
            }
            SketchSpec::Toeplitz { n, process } => {
                let mut cfg = process.clone();
                cfg.n = 2 * p - 1;
                let xi: Vec<f64> =
                    sample_unchecked(&cfg, seed, t, false).xi.iter().zip(&self.norm).map(|(x, s)| x * s).collect();
                crate::transforms::build_toeplitz(xi, (0..*n).collect())
            }
        }
    }
}

/// Draws `trials` independent sketches and records the worst relative
/// distortion over `points` for each.
pub fn jl_distortion<E: Executor>(
    points: &[Vec<f64>],
    spec: &SketchSpec,
    eps: f64,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<DistortionStats> {
    let p = points.first().ok_or(Error::EmptySet("point set"))?.len();
    if p == 0 {
        return Err(invalid("points must have positive dimension"));
    }
    if let Some(u) = points.iter().find(|u| u.len() != p) {
        return Err(Error::DimensionMismatch { expected: p, found: u.len() });
    }
    if points.iter().any(|u| u.iter().all(|&x| x == 0.0)) {
        return Err(invalid("point set contains the zero vector"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    if trials == 0 {
        return Err(invalid("at least one trial is needed"));
    }
    let builder = Builder::new(spec, p, seed, exec)?;
    let results: Vec<Result<f64>> = exec.map(trials, |t| max_distortion(&builder.build(seed, t as u64)?, points));
    let distortions = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let failures = distortions.iter().filter(|&&d| d > eps).count();
    Ok(DistortionStats {
        n: spec.rows(),
        p,
        points: points.len(),
        trials,
        eps,
        seed,
        summary: Summary::of(&distortions),
        failure_rate: failures as f64 / trials as f64,
        distortions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RipMode {
    Exact,
    MonteCarlo { trials: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub delta_s: f64,
    pub mode: RipMode,
    pub s: usize,
    pub p: usize,
    pub n: usize,
    pub supports_examined: u128,
}

/// δ_s of X/√n. Exact mode scans every support S with |S| = s and takes
/// the extreme eigenvalues of X_SᵀX_S / n; Monte-Carlo mode maximises
/// |‖Xu‖²/n − 1| over random unit s-sparse u, a lower bound on the exact value.
pub fn rip_constant(x: &Matrix, s: usize, mode: RipMode, seed: u64) -> Result<RipEstimate> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(invalid("design matrix must be non-empty"));
    }
    if s == 0 || s > p {
        return Err(invalid(format!("sparsity s = {s} must lie in 1..={p}")));
    }
    let gram = x.gram().scaled(1.0 / n as f64);
    let (delta, examined) = match mode {
        RipMode::Exact => {
            let count = binomial(p, s);
            if count > RIP_SUPPORT_GUARD {
                return Err(Error::GuardExceeded { what: "supports C(p, s)", value: count, limit: RIP_SUPPORT_GUARD });
            }
            let mut delta: f64 = 0.0;
            for_each_subset(p, s, |idx| {
                let (lo, hi) = eigen_range(&gram.principal(idx)).expect("square");
                delta = delta.max(hi - 1.0).max(1.0 - lo);
            });
            (delta, count)
        }
        RipMode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(invalid("Monte-Carlo RIP needs at least one trial"));
            }
            let mut rng = stream(seed, 0);
            let mut delta: f64 = 0.0;
            for _ in 0..trials {
                let support = index::sample(&mut rng, p, s).into_vec();
                let mut coef: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
                let norm = norm2(&coef);
                if norm == 0.0 {
                    continue;
                }
                coef.iter_mut().for_each(|c| *c /= norm);
                let mut q = 0.0;
                for (a, &i) in support.iter().enumerate() {
                    for (b, &j) in support.iter().enumerate() {
                        q += coef[a] * coef[b] * gram[(i, j)];
                    }
                }
                delta = delta.max((q - 1.0).abs());
            }
            (delta, trials as u128)
        }
    };
    Ok(RipEstimate { delta_s: delta.max(0.0), mode, s, p, n, supports_examined: examined })
}

/// Median exact δ_s across row counts, normalised by √(s ln p / n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipScaling {
    pub p: usize,
    pub s: usize,
    pub trials: usize,
    pub ns: Vec<usize>,
    pub median_delta: Vec<f64>,
    /// median δ_s · √(n / (s ln p)).
    pub normalized: Vec<f64>,
    /// max / min of `normalized`.
    pub band_ratio: f64,
}

pub fn rip_scaling<E: Executor>(
    generator: &DependentMatrixConfig,
    p: usize,
    s: usize,
    ns: &[usize],
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<RipScaling> {
    if ns.is_empty() {
        return Err(Error::EmptySet("row counts"));
    }
    if trials == 0 {
        return Err(invalid("at least one trial is needed"));
    }
    if p < 2 {
        return Err(invalid("scaling needs p >= 2 so that ln p > 0"));
    }
    let mut median_delta = Vec::with_capacity(ns.len());
    for (k, &n) in ns.iter().enumerate() {
        let cfg = generator.with_dims(n, p);
        cfg.validate()?;
        let nseed = derive_seed(seed, k as u64);
        let deltas: Vec<Result<f64>> = exec.map(trials, |t| {
            let x = sample_dependent_matrix_at(&cfg, nseed, t as u64)?;
            Ok(rip_constant(&x, s, RipMode::Exact, 0)?.delta_s)
        });
        let deltas = deltas.into_iter().collect::<Result<Vec<f64>>>()?;
        median_delta.push(median(&deltas));
    }
    let normalized: Vec<f64> = ns
        .iter()
        .zip(&median_delta)
        .map(|(&n, d)| d * libm::sqrt(n as f64 / (s as f64 * libm::log(p as f64))))
        .collect();
    let hi = normalized.iter().copied().fold(f64::MIN, f64::max);
    let lo = normalized.iter().copied().fold(f64::MAX, f64::min);
    Ok(RipScaling { p, s, trials, ns: ns.to_vec(), median_delta, normalized, band_ratio: hi / lo })
}
