//! Radii, Gaussian width and the width surrogate for γ₂ of structured
//! matrix sets, the resulting deviation bound, sample-size formulas and
//! Azuma-type tails.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::linalg::{norm2, spectral_norm, Matrix};
use crate::rng;
use crate::stats;

/// A set of matrices described structurally.
///
/// The V_θ families are images of index sets of θ ∈ ℝᵖ under θ ↦ V_θ, where
/// V_θ is block diagonal with n copies of θᵀ/√n (an n × np matrix), or, for
/// the band variant, the rows `rows` of the (p × (2p−1)) band matrix whose
/// row r carries θ at columns r..r+p, scaled by 1/√n with n = `rows.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixSetDescriptor {
    Finite { matrices: Vec<Matrix> },
    /// θ ranges over the unit sphere.
    VThetaSphere { n: usize, p: usize },
    /// θ ranges over unit vectors with at most s non-zeros.
    VThetaSparse { n: usize, p: usize, s: usize },
    /// θ ranges over the given points.
    VThetaPoints { n: usize, thetas: Vec<Vec<f64>> },
    /// Band V_θ restricted to `rows`, θ unit and s-sparse.
    ToeplitzBand { p: usize, s: usize, rows: Vec<usize> },
    /// Convex hull of the given extreme points.
    Explicit { extreme_points: Vec<Matrix> },
}

impl MatrixSetDescriptor {
    pub fn finite(matrices: Vec<Matrix>) -> Self {
        MatrixSetDescriptor::Finite { matrices }
    }

    /// Band set on the first `n` rows.
    pub fn toeplitz_band(n: usize, p: usize, s: usize) -> Self {
        MatrixSetDescriptor::ToeplitzBand { p, s, rows: (0..n).collect() }
    }

    /// (rows, cols) of every member.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            MatrixSetDescriptor::Finite { matrices } | MatrixSetDescriptor::Explicit { extreme_points: matrices } => {
                matrices.first().map_or((0, 0), Matrix::shape)
            }
            MatrixSetDescriptor::VThetaSphere { n, p } | MatrixSetDescriptor::VThetaSparse { n, p, .. } => (*n, n * p),
            MatrixSetDescriptor::VThetaPoints { n, thetas } => (*n, n * thetas.first().map_or(0, Vec::len)),
            MatrixSetDescriptor::ToeplitzBand { p, rows, .. } => (rows.len(), 2 * p - 1),
        }
    }

    /// Number of blocks for the V_θ families.
    pub fn block_count(&self) -> Option<usize> {
        match self {
            MatrixSetDescriptor::VThetaSphere { n, .. }
            | MatrixSetDescriptor::VThetaSparse { n, .. }
            | MatrixSetDescriptor::VThetaPoints { n, .. } => Some(*n),
            MatrixSetDescriptor::ToeplitzBand { rows, .. } => Some(rows.len()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MatrixSetDescriptor::Finite { matrices } | MatrixSetDescriptor::Explicit { extreme_points: matrices } => {
                let first = matrices.first().ok_or(Error::EmptySet("matrix set"))?;
                for m in matrices {
                    if m.shape() != first.shape() {
                        return Err(Error::InvalidConfig(format!(
                            "matrix set mixes shapes {:?} and {:?}",
                            first.shape(),
                            m.shape()
                        )));
                    }
                }
                Ok(())
            }
            MatrixSetDescriptor::VThetaSphere { n, p } => positive(&[(*n, "n"), (*p, "p")]),
            MatrixSetDescriptor::VThetaSparse { n, p, s } => {
                positive(&[(*n, "n"), (*p, "p"), (*s, "s")])?;
                sparsity(*s, *p)
            }
            MatrixSetDescriptor::VThetaPoints { n, thetas } => {
                positive(&[(*n, "n")])?;
                let p = thetas.first().ok_or(Error::EmptySet("theta points"))?.len();
                positive(&[(p, "p")])?;
                if let Some(t) = thetas.iter().find(|t| t.len() != p) {
                    return Err(Error::DimensionMismatch { expected: p, found: t.len() });
                }
                Ok(())
            }
            MatrixSetDescriptor::ToeplitzBand { p, s, rows } => {
                positive(&[(*p, "p"), (*s, "s"), (rows.len(), "n")])?;
                sparsity(*s, *p)?;
                if rows.windows(2).any(|w| w[0] >= w[1]) || rows.iter().any(|&r| r >= *p) {
                    return Err(Error::InvalidConfig(format!(
                        "band rows must be strictly increasing in 0..{p}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Factor relating the Frobenius geometry of the index set to the
    /// operator-norm metric of the matrix set: 1/√n for the V_θ families,
    /// 1 otherwise.
    pub fn op_metric_scale(&self) -> f64 {
        self.block_count().map_or(1.0, |n| 1.0 / libm::sqrt(n as f64))
    }
}

fn positive(items: &[(usize, &str)]) -> Result<()> {
    for (v, name) in items {
        if *v == 0 {
            return Err(invalid(format!("{name} must be positive")));
        }
    }
    Ok(())
}

fn sparsity(s: usize, p: usize) -> Result<()> {
    if s > p {
        return Err(invalid(format!("sparsity s = {s} exceeds dimension p = {p}")));
    }
    Ok(())
}

/// sup ‖A‖_F over the set.
pub fn frob_radius(set: &MatrixSetDescriptor) -> Result<f64> {
    set.validate()?;
    Ok(match set {
        MatrixSetDescriptor::Finite { matrices } | MatrixSetDescriptor::Explicit { extreme_points: matrices } => {
            matrices.iter().map(Matrix::frobenius).fold(0.0, f64::max)
        }
        MatrixSetDescriptor::VThetaSphere { .. }
        | MatrixSetDescriptor::VThetaSparse { .. }
        | MatrixSetDescriptor::ToeplitzBand { .. } => 1.0,
        MatrixSetDescriptor::VThetaPoints { thetas, .. } => thetas.iter().map(|t| norm2(t)).fold(0.0, f64::max),
    })
}

/// sup ‖A‖₂→₂ over the set.
///
/// For the band family this is the bound min(√s, √n)/√n: a band operator
/// built from θ has norm at most ‖θ‖₁/√n ≤ √s/√n, and at most its Frobenius
/// norm 1.
pub fn opnorm_radius(set: &MatrixSetDescriptor) -> Result<f64> {
    set.validate()?;
    Ok(match set {
        MatrixSetDescriptor::Finite { matrices } | MatrixSetDescriptor::Explicit { extreme_points: matrices } => {
            let mut best: f64 = 0.0;
            for m in matrices {
                best = best.max(spectral_norm(m)?);
            }
            best
        }
        MatrixSetDescriptor::VThetaSphere { n, .. } | MatrixSetDescriptor::VThetaSparse { n, .. } => {
            1.0 / libm::sqrt(*n as f64)
        }
        MatrixSetDescriptor::VThetaPoints { n, thetas } => {
            thetas.iter().map(|t| norm2(t)).fold(0.0, f64::max) / libm::sqrt(*n as f64)
        }
        MatrixSetDescriptor::ToeplitzBand { s, rows, .. } => {
            let n = rows.len() as f64;
            libm::sqrt((*s as f64).min(n)) / libm::sqrt(n)
        }
    })
}

/// ℓ₂ norm of the `s` largest-magnitude coordinates.
pub fn top_s_norm(v: &[f64], s: usize) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x * x).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    libm::sqrt(mags.iter().take(s).sum())
}

/// One draw of sup_A |tr(GᵀA)|. V_θ families use the exact reduction
/// ⟨G, V_θ⟩ = ⟨h, θ⟩ with h ~ N(0, I_p).
pub fn width_draw<R: Rng + ?Sized>(set: &MatrixSetDescriptor, rng: &mut R) -> f64 {
    let gauss = |len: usize, rng: &mut R| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
    match set {
        MatrixSetDescriptor::Finite { matrices } | MatrixSetDescriptor::Explicit { extreme_points: matrices } => {
            let (r, c) = matrices[0].shape();
            let g = Matrix::from_vec(r, c, gauss(r * c, rng)).expect("sized");
            matrices.iter().map(|a| g.inner(a).abs()).fold(0.0, f64::max)
        }
        MatrixSetDescriptor::VThetaSphere { p, .. } => norm2(&gauss(*p, rng)),
        MatrixSetDescriptor::VThetaSparse { p, s, .. } | MatrixSetDescriptor::ToeplitzBand { p, s, .. } => {
            top_s_norm(&gauss(*p, rng), *s)
        }
        MatrixSetDescriptor::VThetaPoints { thetas, .. } => {
            let h = gauss(thetas[0].len(), rng);
            thetas.iter().map(|t| crate::linalg::dot(&h, t).abs()).fold(0.0, f64::max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Monte-Carlo Gaussian width; draw t uses stream (seed, t).
pub fn gaussian_width_mc<E: Executor>(
    set: &MatrixSetDescriptor,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<WidthEstimate> {
    set.validate()?;
    if trials < 2 {
        return Err(invalid("width estimation needs at least 2 trials"));
    }
    let draws = exec.map(trials, |t| width_draw(set, &mut rng::stream(seed, t as u64)));
    Ok(WidthEstimate { estimate: stats::mean(&draws), std_error: stats::std_error(&draws), trials, seed })
}

/// The width surrogate C·w for γ₂.
pub fn gamma2_upper(width: f64, c: f64) -> f64 {
    c * width
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub d_f: f64,
    pub d_op: f64,
    pub width: f64,
    pub width_se: f64,
    /// Multiplier taking the index-set width to the operator metric.
    pub op_scale: f64,
    pub gamma2_constant: f64,
    /// gamma2_constant · width · op_scale.
    pub gamma2_upper: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn complexity_report<E: Executor>(
    set: &MatrixSetDescriptor,
    trials: usize,
    seed: u64,
    gamma2_constant: f64,
    exec: &E,
) -> Result<ComplexityReport> {
    let w = gaussian_width_mc(set, trials, seed, exec)?;
    let op_scale = set.op_metric_scale();
    Ok(ComplexityReport {
        d_f: frob_radius(set)?,
        d_op: opnorm_radius(set)?,
        width: w.estimate,
        width_se: w.std_error,
        op_scale,
        gamma2_constant,
        gamma2_upper: gamma2_upper(w.estimate * op_scale, gamma2_constant),
        trials,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Dependent,
    IidReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound {
    pub m: f64,
    pub v: f64,
    pub u: f64,
    pub c1: f64,
    pub c2: f64,
    pub variant: BoundVariant,
}

/// M = γ₂(γ₂ + d_F) (plus d_F·d_op for the i.i.d. reference),
/// V = d_op(γ₂ + d_F), U = d_op².
pub fn deviation_bound(
    d_f: f64,
    d_op: f64,
    gamma2: f64,
    c1: f64,
    c2: f64,
    variant: BoundVariant,
) -> Result<DeviationBound> {
    for (v, name) in [(d_f, "d_F"), (d_op, "d_op"), (gamma2, "gamma2")] {
        if !(v >= 0.0) {
            return Err(invalid(format!("{name} must be non-negative")));
        }
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(invalid("constants c1, c2 must be positive"));
    }
    let mut m = gamma2 * (gamma2 + d_f);
    if variant == BoundVariant::IidReference {
        m += d_f * d_op;
    }
    Ok(DeviationBound { m, v: d_op * (gamma2 + d_f), u: d_op * d_op, c1, c2, variant })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBranch {
    /// ε²/V² is the smaller exponent.
    Quadratic,
    /// ε/U is the smaller exponent.
    Linear,
    /// ε = 0, or V = U = 0.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEvaluation {
    pub eps: f64,
    /// c₁·M: the level the deviation is measured above.
    pub threshold: f64,
    /// Unclamped 2·exp(−c₂·min(ε²/V², ε/U)).
    pub raw: f64,
    /// `raw` clamped to [0, 1].
    pub probability: f64,
    pub branch: TailBranch,
}

impl DeviationBound {
    pub fn tail_probability(&self, eps: f64) -> TailEvaluation {
        let threshold = self.c1 * self.m;
        let (raw, branch) = if eps <= 0.0 {
            (2.0, TailBranch::Degenerate)
        } else if self.v == 0.0 && self.u == 0.0 {
            (0.0, TailBranch::Degenerate)
        } else {
            let quad = if self.v == 0.0 { f64::INFINITY } else { eps * eps / (self.v * self.v) };
            let lin = if self.u == 0.0 { f64::INFINITY } else { eps / self.u };
            let (e, b) = if quad <= lin { (quad, TailBranch::Quadratic) } else { (lin, TailBranch::Linear) };
            (2.0 * libm::exp(-self.c2 * e), b)
        };
        TailEvaluation { eps, threshold, raw, probability: raw.clamp(0.0, 1.0), branch }
    }
}

/// Free function form of [`DeviationBound::tail_probability`].
pub fn tail_probability(b: &DeviationBound, eps: f64) -> TailEvaluation {
    b.tail_probability(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleSizeKind {
    Jl { eps: f64, points: usize },
    Rip { eps: f64, s: usize, p: usize },
    Bandit { eps: f64, kappa: f64, p: usize },
}

/// Rows needed: JL ⌈C ε⁻² ln N⌉, RIP ⌈C ε⁻² s ln(2p/s)⌉,
/// bandit ⌈C ε⁻² κ⁻² p⌉, never below 1.
pub fn sample_size(kind: SampleSizeKind, c: f64) -> Result<usize> {
    if !(c > 0.0) {
        return Err(invalid("constant C must be positive"));
    }
    let eps_ok = |eps: f64| -> Result<()> {
        if eps > 0.0 && eps < 1.0 {
            Ok(())
        } else {
            Err(invalid(format!("eps = {eps} outside (0, 1)")))
        }
    };
    let raw = match kind {
        SampleSizeKind::Jl { eps, points } => {
            eps_ok(eps)?;
            positive(&[(points, "N")])?;
            c / (eps * eps) * libm::log(points as f64)
        }
        SampleSizeKind::Rip { eps, s, p } => {
            eps_ok(eps)?;
            positive(&[(s, "s"), (p, "p")])?;
            sparsity(s, p)?;
            c / (eps * eps) * s as f64 * libm::log(2.0 * p as f64 / s as f64)
        }
        SampleSizeKind::Bandit { eps, kappa, p } => {
            eps_ok(eps)?;
            positive(&[(p, "p")])?;
            if !(kappa > 0.0) {
                return Err(invalid("kappa must be positive"));
            }
            c / (eps * eps * kappa * kappa) * p as f64
        }
    };
    Ok((libm::ceil(raw) as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub raw: f64,
    pub probability: f64,
}

impl ProbabilityBound {
    fn new(raw: f64) -> Self {
        ProbabilityBound { raw, probability: raw.clamp(0.0, 1.0) }
    }
}

/// 2·exp(−τ²/(2‖c‖²)) for martingale differences bounded by cᵢ.
pub fn azuma_hoeffding_tail(c: &[f64], tau: f64) -> Result<ProbabilityBound> {
    if c.is_empty() {
        return Err(Error::EmptySet("bound vector"));
    }
    if let Some(bad) = c.iter().find(|&&x| !(x > 0.0)) {
        return Err(invalid(format!("bound entries must be positive, found {bad}")));
    }
    if !(tau >= 0.0) {
        return Err(invalid("tau must be non-negative"));
    }
    let ss: f64 = c.iter().map(|x| x * x).sum();
    Ok(ProbabilityBound::new(2.0 * libm::exp(-tau * tau / (2.0 * ss))))
}

/// 2·exp(−min(τ²/(4cκ²‖a‖₂²), ητ/(2κ‖a‖_∞))) for weighted sub-exponential
/// martingale differences.
pub fn azuma_bernstein_tail(a: &[f64], kappa: f64, tau: f64, c: f64, eta: f64) -> Result<ProbabilityBound> {
    if a.is_empty() {
        return Err(Error::EmptySet("weight vector"));
    }
    if !(kappa > 0.0 && c > 0.0 && eta > 0.0) {
        return Err(invalid("kappa, c and eta must be positive"));
    }
    if !(tau >= 0.0) {
        return Err(invalid("tau must be non-negative"));
    }
    let l2sq: f64 = a.iter().map(|x| x * x).sum();
    let linf = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if linf == 0.0 {
        return Ok(ProbabilityBound::new(if tau > 0.0 { 0.0 } else { 2.0 }));
    }
    let quad = tau * tau / (4.0 * c * kappa * kappa * l2sq);
    let lin = eta * tau / (2.0 * kappa * linf);
    Ok(ProbabilityBound::new(2.0 * libm::exp(-quad.min(lin))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn radii_basic() {
        let set = MatrixSetDescriptor::finite(vec![Matrix::identity(3)]);
        assert!((frob_radius(&set).unwrap() - libm::sqrt(3.0)).abs() < 1e-15);
        assert!((opnorm_radius(&set).unwrap() - 1.0).abs() < 1e-9);
        let sphere = MatrixSetDescriptor::VThetaSphere { n: 16, p: 4 };
        assert_eq!(frob_radius(&sphere).unwrap(), 1.0);
        assert_eq!(opnorm_radius(&sphere).unwrap(), 0.25);
        assert!(matches!(frob_radius(&MatrixSetDescriptor::finite(vec![])), Err(Error::EmptySet(_))));
    }

    #[test]
    fn bound_arithmetic() {
        let b = deviation_bound(1.0, 1.0, 1.0, 1.0, 1.0, BoundVariant::Dependent).unwrap();
        assert_eq!((b.m, b.v, b.u), (2.0, 2.0, 1.0));
        let b = deviation_bound(2.0, 1.0, 0.0, 1.0, 1.0, BoundVariant::IidReference).unwrap();
        assert_eq!(b.m, 2.0);
        let z = deviation_bound(0.0, 0.0, 0.0, 1.0, 1.0, BoundVariant::Dependent).unwrap();
        assert_eq!((z.m, z.v, z.u), (0.0, 0.0, 0.0));
        assert_eq!(z.tail_probability(0.5).probability, 0.0);
        assert_eq!(z.tail_probability(0.0).probability, 1.0);
    }

    #[test]
    fn tail_examples() {
        let b = DeviationBound { m: 0.0, v: 1.0, u: 1.0, c1: 1.0, c2: 1.0, variant: BoundVariant::Dependent };
        assert!((b.tail_probability(1.0).probability - 2.0 * libm::exp(-1.0)).abs() < 1e-15);
        let b = DeviationBound { u: 10.0, ..b };
        assert_eq!(b.tail_probability(0.05).branch, TailBranch::Quadratic);
        assert_eq!(b.tail_probability(0.2).branch, TailBranch::Linear);
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(sample_size(SampleSizeKind::Jl { eps: 0.25, points: 1024 }, 1.0).unwrap(), 111);
        assert_eq!(sample_size(SampleSizeKind::Rip { eps: 0.5, s: 1, p: 2 }, 1.0).unwrap(), 6);
        assert_eq!(sample_size(SampleSizeKind::Jl { eps: 0.5, points: 1 }, 1.0).unwrap(), 1);
        assert!(sample_size(SampleSizeKind::Jl { eps: 1.0, points: 4 }, 1.0).is_err());
        assert!(sample_size(SampleSizeKind::Rip { eps: 0.5, s: 3, p: 2 }, 1.0).is_err());
    }

    #[test]
    fn azuma_examples() {
        assert_eq!(azuma_hoeffding_tail(&[1.0], 0.0).unwrap().probability, 1.0);
        let r = azuma_hoeffding_tail(&[3.0, 4.0], 5.0).unwrap();
        assert!((r.raw - 2.0 * libm::exp(-0.5)).abs() < 1e-15);
        assert!(azuma_hoeffding_tail(&[1.0, 0.0], 1.0).is_err());
        let r = azuma_bernstein_tail(&[1.0], 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((r.raw - 2.0 * libm::exp(-0.25)).abs() < 1e-15);
        assert!(azuma_bernstein_tail(&[], 1.0, 1.0, 1.0, 1.0).is_err());
    }
}
