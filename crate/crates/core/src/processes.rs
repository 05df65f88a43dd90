//! Samplers for processes adapted to a latent sequence, their decoupled
//! tangent copies, and dependent-entry random matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use crate::graph::{Family, Varrho};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, tags, StreamRng};

/// Largest discrete support accepted (posterior enumeration stays cheap).
pub const MAX_SUPPORT: usize = 16;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Removes the conditional mean from a raw draw.
pub fn conditional_center(z: f64, m: f64) -> f64 {
    z - m
}

/// Base law of ξ_i before history scaling and centering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConditionalLaw {
    /// Standard normal.
    Gaussian,
    /// Finite support with probabilities.
    Discrete { support: Vec<f64>, probs: Vec<f64> },
}

impl ConditionalLaw {
    pub fn rademacher() -> Self {
        ConditionalLaw::Discrete { support: vec![-1.0, 1.0], probs: vec![0.5, 0.5] }
    }

    /// Bernoulli on {0, 1} with P(1) = p.
    pub fn bernoulli(p: f64) -> Self {
        ConditionalLaw::Discrete { support: vec![0.0, 1.0], probs: vec![1.0 - p, p] }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ConditionalLaw::Gaussian => 0.0,
            ConditionalLaw::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            ConditionalLaw::Gaussian => 1.0,
            ConditionalLaw::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(v, p)| v * v * p).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean() * self.mean()
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ConditionalLaw::Discrete { .. })
    }

    fn validate(&self) -> Result<()> {
        if let ConditionalLaw::Discrete { support, probs } = self {
            if support.is_empty() || support.len() != probs.len() {
                return Err(Error::InvalidConfig("discrete law needs matching support and probs".into()));
            }
            if support.len() > MAX_SUPPORT {
                return Err(Error::InvalidConfig(format!(
                    "discrete support has {} points, limit is {MAX_SUPPORT}",
                    support.len()
                )));
            }
            if support.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("discrete support must be finite".into()));
            }
            if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidConfig("probabilities must lie in [0, 1]".into()));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
            }
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ConditionalLaw::Gaussian => rng.sample(StandardNormal),
            ConditionalLaw::Discrete { support, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in support.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                support[support.len() - 1]
            }
        }
    }
}

/// How the latent state advances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatentLaw {
    /// F_i = ρ F_{i−1} + √(1−ρ²) η (GM1, GM2).
    Ar1 { rho: f64 },
    /// F_i = tanh(F_{i−1} + ξ_i) (GM3).
    Deterministic,
    /// F_i = ρ F_{i−1} + β ξ_i + noise·η (GM3).
    Feedback { rho: f64, beta: f64, noise: f64 },
}

pub fn zeta(f: f64, xi: f64) -> f64 {
    libm::tanh(f + xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub family: Family,
    pub n: usize,
    pub varrho: Varrho,
    /// Declared uniform sub-Gaussian constant L in P(|ξ|>τ) ≤ 2exp(−τ²/L²).
    pub subgaussian_l: f64,
    pub law: ConditionalLaw,
    /// Scale draws by s(h) = 0.5 + 0.5·logistic(h) of the latent history.
    pub modulated: bool,
    /// Subtract the conditional mean. Disabling this breaks the zero-mean
    /// property and exists only as a negative control.
    pub centered: bool,
    pub latent: LatentLaw,
}

impl ProcessConfig {
    fn with_defaults(family: Family, n: usize, law: ConditionalLaw, modulated: bool, latent: LatentLaw) -> Self {
        let mut c = ProcessConfig {
            family,
            n,
            varrho: family.natural_varrho(),
            subgaussian_l: 0.0,
            law,
            modulated,
            centered: true,
            latent,
        };
        c.subgaussian_l = c.certified_subgaussian_l();
        c
    }

    /// GM1 with modulated Gaussian conditionals and an AR(1) latent, ρ = 0.8.
    pub fn gm1(n: usize) -> Self {
        Self::with_defaults(Family::Gm1, n, ConditionalLaw::Gaussian, true, LatentLaw::Ar1 { rho: 0.8 })
    }

    /// GM2 with modulated Gaussian conditionals and an AR(1) latent, ρ = 0.8.
    pub fn gm2(n: usize) -> Self {
        Self::with_defaults(Family::Gm2, n, ConditionalLaw::Gaussian, true, LatentLaw::Ar1 { rho: 0.8 })
    }

    /// GM3 with Rademacher ξ and F_i = tanh(F_{i−1} + ξ_i).
    pub fn gm3(n: usize) -> Self {
        Self::with_defaults(Family::Gm3, n, ConditionalLaw::rademacher(), false, LatentLaw::Deterministic)
    }

    /// GM3 with a noisy feedback latent.
    pub fn gm3_feedback(n: usize, law: ConditionalLaw, rho: f64, beta: f64, noise: f64) -> Self {
        Self::with_defaults(Family::Gm3, n, law, true, LatentLaw::Feedback { rho, beta, noise })
    }

    /// i.i.d. N(0, 1): GM2 with an unused latent.
    pub fn iid(n: usize) -> Self {
        Self::with_defaults(Family::Gm2, n, ConditionalLaw::Gaussian, false, LatentLaw::Ar1 { rho: 0.0 })
    }

    pub fn with_law(mut self, law: ConditionalLaw) -> Self {
        self.law = law;
        self.subgaussian_l = self.subgaussian_l.max(self.certified_subgaussian_l());
        self
    }

    pub fn with_modulation(mut self, on: bool) -> Self {
        self.modulated = on;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        match &mut self.latent {
            LatentLaw::Ar1 { rho: r } | LatentLaw::Feedback { rho: r, .. } => *r = rho,
            LatentLaw::Deterministic => {}
        }
        self
    }

    pub fn uncentered(mut self) -> Self {
        self.centered = false;
        self.subgaussian_l = self.subgaussian_l.max(self.certified_subgaussian_l());
        self
    }

    fn max_scale(&self) -> f64 {
        1.0
    }

    fn scale(&self, h: f64) -> f64 {
        if self.modulated {
            0.5 + 0.5 * logistic(h)
        } else {
            1.0
        }
    }

    /// Smallest L this crate can certify for the configured law.
    ///
    /// Centred Gaussian with scale s: L = √2·s. Centred bounded law with range
    /// w: Hoeffding's lemma gives L = w/√2. Uncentred bounded law with
    /// |X| ≤ b: L = b/√(ln 2) makes the bound trivial below b.
    pub fn certified_subgaussian_l(&self) -> f64 {
        let s = self.max_scale();
        match &self.law {
            ConditionalLaw::Gaussian => core::f64::consts::SQRT_2 * s,
            ConditionalLaw::Discrete { support, .. } => {
                let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if self.centered {
                    (hi - lo) * s / core::f64::consts::SQRT_2
                } else {
                    let b = lo.abs().max(hi.abs()) * s;
                    b / libm::sqrt(core::f64::consts::LN_2)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("process length must be at least 1".into()));
        }
        self.varrho.validate(self.n)?;
        self.law.validate()?;
        if !(self.subgaussian_l > 0.0) || !self.subgaussian_l.is_finite() {
            return Err(Error::InvalidConfig("sub-Gaussian constant must be positive".into()));
        }
        let certified = self.certified_subgaussian_l();
        if self.subgaussian_l < certified * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "declared sub-Gaussian constant {} is below the certified {certified}",
                self.subgaussian_l
            )));
        }
        match (self.family, &self.latent) {
            (Family::Gm1 | Family::Gm2, LatentLaw::Ar1 { rho }) => {
                if !(-1.0..=1.0).contains(rho) {
                    return Err(Error::InvalidConfig(format!("AR(1) coefficient {rho} outside [-1, 1]")));
                }
            }
            (Family::Gm3, LatentLaw::Deterministic) => {}
            (Family::Gm3, LatentLaw::Feedback { rho, beta, noise }) => {
                if !(rho.is_finite() && beta.is_finite()) || !(*noise > 0.0) {
                    return Err(Error::InvalidConfig("feedback latent needs finite rho, beta and noise > 0".into()));
                }
            }
            (family, latent) => {
                return Err(Error::InvalidConfig(format!(
                    "latent law {latent:?} does not fit family {family:?}"
                )))
            }
        }
        Ok(())
    }

    /// E[ξ_i²] when it does not depend on the latent history.
    pub fn constant_second_moment(&self) -> Option<f64> {
        if self.modulated {
            return None;
        }
        Some(if self.centered { self.law.variance() } else { self.law.second_moment() })
    }

    /// Conditional law symmetric about zero, as needed for contraction checks.
    pub fn is_symmetric(&self) -> bool {
        match &self.law {
            ConditionalLaw::Gaussian => true,
            ConditionalLaw::Discrete { support, probs } => {
                let m = if self.centered { self.law.mean() } else { 0.0 };
                support.iter().zip(probs).all(|(v, p)| {
                    let mirror = 2.0 * m - v;
                    support
                        .iter()
                        .zip(probs)
                        .any(|(w, q)| (w - mirror).abs() < 1e-12 && (q - p).abs() < 1e-12)
                })
            }
        }
    }

    /// One draw of ξ given history value `h`: returns the process value.
    fn draw_xi<R: Rng + ?Sized>(&self, h: f64, rng: &mut R) -> f64 {
        let s = self.scale(h);
        let raw = s * self.law.draw(rng);
        if self.centered {
            conditional_center(raw, s * self.law.mean())
        } else {
            raw
        }
    }

    /// Process value attached to support point `v` under history `h`.
    fn value_of(&self, h: f64, v: f64) -> f64 {
        let s = self.scale(h);
        if self.centered {
            conditional_center(s * v, s * self.law.mean())
        } else {
            s * v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub xi: Vec<f64>,
    /// F_1, …, F_n.
    pub latent: Vec<f64>,
    /// F_0 for families with a prior.
    pub prior: Option<f64>,
    pub tangent: Option<Vec<f64>>,
    pub seed: u64,
    /// Stream index within the seed.
    pub index: u64,
}

impl PathSample {
    /// F_{k}, with F_0 the prior (or 0 when there is none).
    pub fn latent_at(&self, k: usize) -> f64 {
        if k == 0 {
            self.prior.unwrap_or(0.0)
        } else {
            self.latent[k - 1]
        }
    }

    /// History value that drives the law of ξ_i (1-based).
    pub fn history_for(&self, family: Family, i: usize) -> f64 {
        match family {
            Family::Gm2 => self.latent_at(i),
            Family::Gm1 | Family::Gm3 => self.latent_at(i - 1),
        }
    }
}

pub fn sample_path(config: &ProcessConfig, seed: u64) -> Result<PathSample> {
    sample_path_at(config, seed, 0)
}

pub fn sample_path_at(config: &ProcessConfig, seed: u64, index: u64) -> Result<PathSample> {
    config.validate()?;
    Ok(draw_path(config, &mut rng::stream(seed, index), seed, index))
}

pub fn sample_with_tangent(config: &ProcessConfig, seed: u64) -> Result<PathSample> {
    sample_with_tangent_at(config, seed, 0)
}

/// Like [`sample_path_at`] with the same ξ and latent path, plus a tangent
/// copy drawn on a separate stream.
pub fn sample_with_tangent_at(config: &ProcessConfig, seed: u64, index: u64) -> Result<PathSample> {
    config.validate()?;
    tangent_supported(config)?;
    Ok(sample_unchecked(config, seed, index, true))
}

/// Sampling without re-validating `config`; callers validate once up front.
pub(crate) fn sample_unchecked(config: &ProcessConfig, seed: u64, index: u64, with_tangent: bool) -> PathSample {
    let mut path = draw_path(config, &mut rng::stream(seed, index), seed, index);
    if with_tangent {
        let mut trng = rng::stream(rng::derive_seed(seed, tags::TANGENT), index);
        let tangent = (1..=config.n).map(|i| draw_tangent(config, &path, i, &mut trng)).collect();
        path.tangent = Some(tangent);
    }
    path
}

/// Errors when tangent sampling is unavailable for `config`.
pub(crate) fn tangent_supported(config: &ProcessConfig) -> Result<()> {
    if config.family == Family::Gm3
        && config.latent == LatentLaw::Deterministic
        && !config.law.is_discrete()
    {
        return Err(Error::Unsupported(
            "tangent posterior for continuous xi under a deterministic latent".into(),
        ));
    }
    Ok(())
}

fn ar1<R: Rng + ?Sized>(f: f64, rho: f64, rng: &mut R) -> f64 {
    let eta: f64 = rng.sample(StandardNormal);
    rho * f + libm::sqrt((1.0 - rho * rho).max(0.0)) * eta
}

fn draw_path(config: &ProcessConfig, rng: &mut StreamRng, seed: u64, index: u64) -> PathSample {
    let n = config.n;
    let mut xi = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    let mut prior = None;
    match (config.family, &config.latent) {
        (Family::Gm1, LatentLaw::Ar1 { rho }) => {
            let mut f: f64 = rng.sample(StandardNormal);
            prior = Some(f);
            for _ in 0..n {
                xi.push(config.draw_xi(f, rng));
                f = ar1(f, *rho, rng);
                latent.push(f);
            }
        }
        (Family::Gm2, LatentLaw::Ar1 { rho }) => {
            let mut f: f64 = rng.sample(StandardNormal);
            for i in 0..n {
                if i > 0 {
                    f = ar1(f, *rho, rng);
                }
                latent.push(f);
                xi.push(config.draw_xi(f, rng));
            }
        }
        (Family::Gm3, latent_law) => {
            let mut f: f64 = rng.sample(StandardNormal);
            prior = Some(f);
            for _ in 0..n {
                let x = config.draw_xi(f, rng);
                xi.push(x);
                f = match latent_law {
                    LatentLaw::Feedback { rho, beta, noise } => {
                        let eta: f64 = rng.sample(StandardNormal);
                        rho * f + beta * x + noise * eta
                    }
                    _ => zeta(f, x),
                };
                latent.push(f);
            }
        }
        _ => unreachable!("validated"),
    }
    PathSample { xi, latent, prior, tangent: None, seed, index }
}

fn draw_tangent<R: Rng + ?Sized>(config: &ProcessConfig, path: &PathSample, i: usize, rng: &mut R) -> f64 {
    let h = path.history_for(config.family, i);
    if config.family != Family::Gm3 {
        return config.draw_xi(h, rng);
    }
    let f_prev = path.latent_at(i - 1);
    let f_next = path.latent_at(i);
    match (&config.law, &config.latent) {
        (ConditionalLaw::Discrete { support, probs }, latent_law) => {
            let logw: Vec<f64> = support
                .iter()
                .zip(probs)
                .map(|(&v, &p)| {
                    if p == 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    let x = config.value_of(h, v);
                    let loglik = match latent_law {
                        LatentLaw::Feedback { rho, beta, noise } => {
                            let r = (f_next - rho * f_prev - beta * x) / noise;
                            -0.5 * r * r
                        }
                        _ => {
                            if zeta(f_prev, x) == f_next {
                                0.0
                            } else {
                                f64::NEG_INFINITY
                            }
                        }
                    };
                    libm::log(p) + loglik
                })
                .collect();
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logw.iter().map(|&l| libm::exp(l - top)).collect();
            let total: f64 = w.iter().sum();
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                acc += wk;
                if u < acc {
                    return config.value_of(h, support[k]);
                }
            }
            config.value_of(h, support[w.iter().rposition(|&x| x > 0.0).unwrap_or(0)])
        }
        (ConditionalLaw::Gaussian, LatentLaw::Feedback { rho, beta, noise }) => {
            // ξ ~ N(0, s²) a priori, F_i | ξ ~ N(ρF + βξ, noise²).
            let s = config.scale(h);
            let prec = 1.0 / (s * s) + beta * beta / (noise * noise);
            let var = 1.0 / prec;
            let mean = var * beta * (f_next - rho * f_prev) / (noise * noise);
            let z: f64 = rng.sample(StandardNormal);
            mean + libm::sqrt(var) * z
        }
        _ => unreachable!("rejected before sampling"),
    }
}

/// Conditional law of each matrix entry given the running latent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntryLaw {
    /// i.i.d. N(0, 1).
    Iid,
    /// N(0, v) with v = 0.25 + 0.75·logistic(f) ∈ [0.25, 1].
    VarianceModulated { rho: f64, beta: f64 },
    /// √(1−a)·g + √a·r with a = logistic(f), g Gaussian, r Rademacher:
    /// unit variance, history-dependent shape.
    ShapeModulated { rho: f64, beta: f64 },
}

/// Row-major sequential generator: after each entry x the latent becomes
/// f ← ρ f + √(1−ρ²) η + β x, so every entry depends on all earlier ones
/// only through f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentMatrixConfig {
    pub rows: usize,
    pub cols: usize,
    pub law: EntryLaw,
}

impl DependentMatrixConfig {
    pub fn iid(rows: usize, cols: usize) -> Self {
        DependentMatrixConfig { rows, cols, law: EntryLaw::Iid }
    }

    pub fn variance_modulated(rows: usize, cols: usize, rho: f64, beta: f64) -> Self {
        DependentMatrixConfig { rows, cols, law: EntryLaw::VarianceModulated { rho, beta } }
    }

    pub fn shape_modulated(rows: usize, cols: usize, rho: f64, beta: f64) -> Self {
        DependentMatrixConfig { rows, cols, law: EntryLaw::ShapeModulated { rho, beta } }
    }

    pub fn with_dims(&self, rows: usize, cols: usize) -> Self {
        DependentMatrixConfig { rows, cols, law: self.law.clone() }
    }

    /// Every entry law here has conditional MGF ≤ exp(λ²/2).
    pub fn certified_subgaussian_l(&self) -> f64 {
        core::f64::consts::SQRT_2
    }

    /// Entries have unit conditional variance (required for isometry in expectation).
    pub fn unit_variance(&self) -> bool {
        !matches!(self.law, EntryLaw::VarianceModulated { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidConfig("matrix dimensions must be positive".into()));
        }
        match self.law {
            EntryLaw::Iid => Ok(()),
            EntryLaw::VarianceModulated { rho, beta } | EntryLaw::ShapeModulated { rho, beta } => {
                if !(0.0..1.0).contains(&rho) || !beta.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "entry latent needs rho in [0, 1) and finite beta (got {rho}, {beta})"
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn sample_dependent_matrix(config: &DependentMatrixConfig, seed: u64) -> Result<Matrix> {
    sample_dependent_matrix_at(config, seed, 0)
}

pub fn sample_dependent_matrix_at(config: &DependentMatrixConfig, seed: u64, index: u64) -> Result<Matrix> {
    config.validate()?;
    Ok(generate_matrix(config, &mut rng::stream(seed, index)).0)
}

/// Samples a matrix and returns the conditional variance used for each
/// entry, in generation order.
pub fn sample_dependent_matrix_traced<R: Rng + ?Sized>(
    config: &DependentMatrixConfig,
    rng: &mut R,
) -> Result<(Matrix, Vec<f64>)> {
    config.validate()?;
    Ok(generate_matrix(config, rng))
}

pub fn sample_dependent_matrix_with<R: Rng + ?Sized>(config: &DependentMatrixConfig, rng: &mut R) -> Result<Matrix> {
    config.validate()?;
    Ok(generate_matrix(config, rng).0)
}

fn generate_matrix<R: Rng + ?Sized>(config: &DependentMatrixConfig, rng: &mut R) -> (Matrix, Vec<f64>) {
    let total = config.rows * config.cols;
    let mut data = Vec::with_capacity(total);
    let mut variances = Vec::with_capacity(total);
    let mut f = 0.0;
    for _ in 0..total {
        let g: f64 = rng.sample(StandardNormal);
        let (x, var, rho, beta) = match config.law {
            EntryLaw::Iid => (g, 1.0, 0.0, 0.0),
            EntryLaw::VarianceModulated { rho, beta } => {
                let v = 0.25 + 0.75 * logistic(f);
                debug_assert!((0.25..=1.0).contains(&v), "variance cap violated");
                (libm::sqrt(v) * g, v, rho, beta)
            }
            EntryLaw::ShapeModulated { rho, beta } => {
                let a = logistic(f);
                let r = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (libm::sqrt(1.0 - a) * g + libm::sqrt(a) * r, 1.0, rho, beta)
            }
        };
        data.push(x);
        variances.push(var);
        if !matches!(config.law, EntryLaw::Iid) {
            let eta: f64 = rng.sample(StandardNormal);
            f = rho * f + libm::sqrt(1.0 - rho * rho) * eta + beta * x;
        }
    }
    (Matrix::from_vec(config.rows, config.cols, data).expect("sized"), variances)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centering_examples() {
        assert_eq!(conditional_center(1.5, 0.5), 1.0);
        assert_eq!(conditional_center(0.7, 0.7), 0.0);
    }

    #[test]
    fn reproducible() {
        let c = ProcessConfig::gm1(5);
        assert_eq!(sample_path(&c, 9).unwrap(), sample_path(&c, 9).unwrap());
        let t = sample_with_tangent(&c, 9).unwrap();
        assert_eq!(t.xi, sample_path(&c, 9).unwrap().xi);
    }

    #[test]
    fn gm3_deterministic_latent_is_exact() {
        let c = ProcessConfig::gm3(8);
        for s in 0..50 {
            let p = sample_with_tangent(&c, s).unwrap();
            for i in 1..=8 {
                assert_eq!(p.latent_at(i), zeta(p.latent_at(i - 1), p.xi[i - 1]));
                // The posterior is a point mass: tanh is injective.
                assert_eq!(p.tangent.as_ref().unwrap()[i - 1], p.xi[i - 1]);
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = ProcessConfig::gm1(3);
        c.subgaussian_l = 0.5;
        assert!(c.validate().is_err());
        let mut c = ProcessConfig::gm3(3);
        c.latent = LatentLaw::Ar1 { rho: 0.5 };
        assert!(c.validate().is_err());
        let c = ProcessConfig::gm3(3).with_law(ConditionalLaw::Gaussian);
        assert!(sample_path(&c, 1).is_ok());
        assert!(matches!(sample_with_tangent(&c, 1), Err(Error::Unsupported(_))));
        let big = ConditionalLaw::Discrete { support: vec![0.0; 17], probs: vec![1.0 / 17.0; 17] };
        assert!(ProcessConfig::gm3(2).with_law(big).validate().is_err());
    }

    #[test]
    fn variance_cap_holds() {
        let c = DependentMatrixConfig::variance_modulated(8, 8, 0.9, 1.5);
        let mut r = rng::stream(3, 0);
        let (_, v) = sample_dependent_matrix_traced(&c, &mut r).unwrap();
        assert!(v.iter().all(|&x| (0.25..=1.0).contains(&x)));
    }

    #[test]
    fn symmetric_laws() {
        assert!(ProcessConfig::gm1(2).is_symmetric());
        assert!(ProcessConfig::gm3(2).is_symmetric());
        assert!(!ProcessConfig::iid(2).with_law(ConditionalLaw::bernoulli(0.7)).is_symmetric());
    }
}
