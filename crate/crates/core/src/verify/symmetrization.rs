use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::quadratic::HNorm;
use super::report::{with_escalation, Check, Series, TrialReport};
use super::{batch_mean, min_trials};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::processes::{sample_unchecked, ProcessConfig};
use crate::rng::{derive_seed, stream, tags};
use crate::stats::normal_two_sided_tail;

/// 1-Lipschitz maps (on bounded ranges for `Square`) used as function classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMap {
    Identity,
    Abs,
    Square,
    Clip,
    Tanh,
    Relu,
}

impl ScalarMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ScalarMap::Identity => x,
            ScalarMap::Abs => x.abs(),
            ScalarMap::Square => x * x,
            ScalarMap::Clip => x.clamp(-1.0, 1.0),
            ScalarMap::Tanh => libm::tanh(x),
            ScalarMap::Relu => x.max(0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarMap::Identity => "identity",
            ScalarMap::Abs => "abs",
            ScalarMap::Square => "square",
            ScalarMap::Clip => "clip",
            ScalarMap::Tanh => "tanh",
            ScalarMap::Relu => "relu",
        }
    }
}

impl core::str::FromStr for ScalarMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "id" | "x" => ScalarMap::Identity,
            "abs" => ScalarMap::Abs,
            "square" | "x2" => ScalarMap::Square,
            "clip" => ScalarMap::Clip,
            "tanh" => ScalarMap::Tanh,
            "relu" => ScalarMap::Relu,
            other => return Err(Error::InvalidParameter(format!("unknown map '{other}'"))),
        })
    }
}

fn signs(seed: u64, t: usize, n: usize) -> Vec<f64> {
    let mut rng = stream(derive_seed(seed, tags::SIGNS), t as u64);
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Symmetrization, E H(S) ≤ E H(R), and de-symmetrization,
/// E H(D) ≤ E H(S), with H(x) = x^p and
///
/// * S = sup_g |Σ w_i (g(ξ_i) − E g(ξ_i))|,
/// * R = 2 sup_g |Σ w_i ε_i g(ξ_i)|,
/// * D = ½ sup_g |Σ w_i ε_i (g(ξ_i) − E g(ξ_i))|.
///
/// E g(ξ_i) is unconditional, estimated on an independent batch.
pub fn check_symmetrization<E: Executor>(
    config: &ProcessConfig,
    weights: &[f64],
    maps: &[ScalarMap],
    p_norm: u32,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    let h = HNorm::from_p(p_norm)?;
    config.validate()?;
    if maps.is_empty() {
        return Err(Error::EmptySet("function class"));
    }
    let n = config.n;
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    min_trials(trials)?;
    with_escalation(trials, |trials| {
        let batch = super::quadratic::MOMENT_BATCH_FACTOR * trials;
        let mseed = derive_seed(seed, tags::MOMENTS);
        let means = batch_mean(exec, batch, maps.len() * n, |i| {
            let xi = sample_unchecked(config, mseed, i as u64, false).xi;
            maps.iter().flat_map(|g| xi.iter().map(move |&x| g.apply(x))).collect()
        });
        let rows: Vec<[f64; 3]> = exec.map(trials, |t| {
            let xi = sample_unchecked(config, seed, t as u64, false).xi;
            let eps = signs(seed, t, n);
            let (mut s, mut r, mut d) = (0.0f64, 0.0f64, 0.0f64);
            for (gi, g) in maps.iter().enumerate() {
                let (mut cs, mut cr, mut cd) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let v = g.apply(xi[i]);
                    let c = v - means[gi * n + i];
                    cs += weights[i] * c;
                    cr += weights[i] * eps[i] * v;
                    cd += weights[i] * eps[i] * c;
                }
                s = s.max(libm::fabs(cs));
                r = r.max(libm::fabs(cr));
                d = d.max(libm::fabs(cd));
            }
            [h.apply(s), h.apply(2.0 * r), h.apply(0.5 * d)]
        });
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let sym: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
        let desym: Vec<f64> = rows.iter().map(|r| r[2] - r[0]).collect();
        let mut report = TrialReport::new("symmetrization", trials, seed);
        report.param("p_norm", h.p());
        report.param("maps", maps.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));
        report.param("moment_batch", batch);
        report.push_series(Series::new("H(S)", col(0)));
        report.push_series(Series::new("H(2R)", col(1)));
        report.push_series(Series::new("H(D/2)", col(2)));
        report.push_check(Check::at_most_zero("symmetrization H(S) - H(2R)", &sym, 3.0));
        report.push_check(Check::at_most_zero("de-symmetrization H(D/2) - H(S)", &desym, 3.0));
        Ok(report)
    })
}

/// Tail grid: 0, 0.1, …, 3.0.
const TAU_STEPS: usize = 30;
const TAU_STEP: f64 = 0.1;

/// Contraction with η_j = ε_jξ_j² against γ_j = ε'_j g_j², g_j ~ N(0,1):
/// E H(|Σ w_j η_j|) ≤ E H(K |Σ w_j γ_j|).
///
/// K bounds P(|η_j| > t) / P(|γ_j| > t) over t ∈ (0, 9] using the grid
/// bracketing P(ξ² > t) ≤ P(|ξ| > τ_{k−1}) and P(g² > t) ≥ P(|g| > τ_k) on
/// √t ∈ (τ_{k−1}, τ_k]; it is never below 1.
pub fn check_contraction<E: Executor>(
    config: &ProcessConfig,
    weights: &[f64],
    p_norm: u32,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    let h = HNorm::from_p(p_norm)?;
    config.validate()?;
    let n = config.n;
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    min_trials(trials)?;
    let batch = super::quadratic::MOMENT_BATCH_FACTOR * trials;
    let tseed = derive_seed(seed, tags::TAIL_RATIO);
    let exceed = batch_mean(exec, batch, n * TAU_STEPS, |i| {
        let xi = sample_unchecked(config, tseed, i as u64, false).xi;
        let mut out = Vec::with_capacity(n * TAU_STEPS);
        for x in &xi {
            for k in 0..TAU_STEPS {
                out.push(f64::from(u8::from(x.abs() > k as f64 * TAU_STEP)));
            }
        }
        out
    });
    let mut kappa: f64 = 1.0;
    for j in 0..n {
        for k in 1..=TAU_STEPS {
            let upper = exceed[j * TAU_STEPS + k - 1];
            kappa = kappa.max(upper / normal_two_sided_tail(k as f64 * TAU_STEP));
        }
    }
    let gseed = derive_seed(seed, tags::GAUSSIAN);
    let rows: Vec<[f64; 2]> = exec.map(trials, |t| {
        let xi = sample_unchecked(config, seed, t as u64, false).xi;
        let eps = signs(seed, t, n);
        let mut grng = stream(gseed, t as u64);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for j in 0..n {
            let g: f64 = grng.sample(StandardNormal);
            let e: f64 = if grng.random::<bool>() { 1.0 } else { -1.0 };
            lhs += weights[j] * eps[j] * xi[j] * xi[j];
            rhs += weights[j] * e * g * g;
        }
        [h.apply(libm::fabs(lhs)), h.apply(kappa * libm::fabs(rhs))]
    });
    let diff: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
    let mut report = TrialReport::new("contraction", trials, seed);
    report.param("p_norm", h.p());
    report.param("K", kappa);
    report.param("tail_grid", String::from("0:3.0 step 0.1 on |xi|"));
    report.push_series(Series::new("H(|sum w eta|)", rows.iter().map(|r| r[0]).collect()));
    report.push_series(Series::new("H(K|sum w gamma|)", rows.iter().map(|r| r[1]).collect()));
    report.push_check(Check::at_most_zero("contraction", &diff, 3.0));
    Ok(report)
}
