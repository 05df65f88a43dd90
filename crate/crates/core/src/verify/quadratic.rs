use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::report::{with_escalation, Check, Series, TrialReport};
use super::{batch_mean, min_trials};
use crate::complexity::MatrixSetDescriptor;
use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::linalg::{binomial, eigen_range, for_each_subset, Matrix};
use crate::processes::{sample_unchecked, tangent_supported, ProcessConfig};
use crate::rng::{derive_seed, tags};
use crate::stats::ks_two_sample;

/// Largest number of supports enumerated for sparse suprema.
pub const SUPPORT_GUARD: u128 = 100_000;

/// Multiplier of the moment batch relative to the main trial count.
pub const MOMENT_BATCH_FACTOR: usize = 10;

/// h(x) = |x|^p for p ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HNorm {
    Abs,
    Square,
}

impl HNorm {
    pub fn from_p(p: u32) -> Result<HNorm> {
        match p {
            1 => Ok(HNorm::Abs),
            2 => Ok(HNorm::Square),
            other => Err(Error::Unsupported(format!("h(x) = |x|^{other}; only p = 1 or 2"))),
        }
    }

    pub fn p(self) -> u32 {
        match self {
            HNorm::Abs => 1,
            HNorm::Square => 2,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            HNorm::Abs => x.abs(),
            HNorm::Square => x * x,
        }
    }
}

/// Per-draw values of the three suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbdDraw {
    pub c: f64,
    pub b: f64,
    pub d: f64,
}

enum Sup<'a> {
    Sphere,
    Sparse(usize),
    Points(&'a [Vec<f64>]),
}

/// Quadratic forms reduced to θ-space: the set is {V_θ}, and ‖V_θ ξ‖² = θᵀQθ
/// with Q = (1/n) Σ_b x_b x_bᵀ, x_b the length-p window of ξ at `starts[b]`.
struct Blocks<'a> {
    starts: Vec<usize>,
    p: usize,
    sup: Sup<'a>,
}

impl Blocks<'_> {
    fn sup_abs(&self, m: &Matrix) -> f64 {
        match self.sup {
            Sup::Sphere => {
                let (lo, hi) = eigen_range(m).expect("square");
                lo.abs().max(hi.abs())
            }
            Sup::Sparse(s) => {
                let mut best: f64 = 0.0;
                for_each_subset(self.p, s, |idx| {
                    let (lo, hi) = eigen_range(&m.principal(idx)).expect("square");
                    best = best.max(lo.abs()).max(hi.abs());
                });
                best
            }
            Sup::Points(thetas) => thetas
                .iter()
                .map(|t| {
                    let mt = m.matvec(t).expect("sized");
                    crate::linalg::dot(t, &mt).abs()
                })
                .fold(0.0, f64::max),
        }
    }

    fn sup_abs_diag(&self, d: &[f64]) -> f64 {
        match self.sup {
            Sup::Sphere | Sup::Sparse(_) => d.iter().map(|x| x.abs()).fold(0.0, f64::max),
            Sup::Points(thetas) => thetas
                .iter()
                .map(|t| t.iter().zip(d).map(|(a, b)| a * a * b).sum::<f64>().abs())
                .fold(0.0, f64::max),
        }
    }

    fn draw(&self, xi: &[f64], m: &[f64]) -> CbdDraw {
        let p = self.p;
        let inv = 1.0 / self.starts.len() as f64;
        let mut q = Matrix::zeros(p, p);
        let mut dg = vec![0.0; p];
        let mut ed = vec![0.0; p];
        for &s in &self.starts {
            let x = &xi[s..s + p];
            for i in 0..p {
                dg[i] += x[i] * x[i] * inv;
                ed[i] += m[s + i] * inv;
                for j in 0..p {
                    q[(i, j)] += x[i] * x[j] * inv;
                }
            }
        }
        let mut qc = q.clone();
        let mut qb = q;
        for i in 0..p {
            qc[(i, i)] -= ed[i];
            qb[(i, i)] -= dg[i];
        }
        let diff: Vec<f64> = dg.iter().zip(&ed).map(|(a, b)| a - b).collect();
        CbdDraw { c: self.sup_abs(&qc), b: self.sup_abs(&qb), d: self.sup_abs_diag(&diff) }
    }
}

struct FiniteForms<'a> {
    matrices: &'a [Matrix],
    col_norms: Vec<Vec<f64>>,
}

impl FiniteForms<'_> {
    fn draw(&self, xi: &[f64], m: &[f64]) -> CbdDraw {
        let mut out = CbdDraw { c: 0.0, b: 0.0, d: 0.0 };
        for (a, norms) in self.matrices.iter().zip(&self.col_norms) {
            let y = a.matvec(xi).expect("sized");
            let q: f64 = y.iter().map(|v| v * v).sum();
            let diag: f64 = xi.iter().zip(norms).map(|(x, w)| x * x * w).sum();
            let expect: f64 = m.iter().zip(norms).map(|(x, w)| x * w).sum();
            out.c = out.c.max((q - expect).abs());
            out.b = out.b.max((q - diag).abs());
            out.d = out.d.max((diag - expect).abs());
        }
        out
    }
}

enum Forms<'a> {
    Finite(FiniteForms<'a>),
    Blocks(Blocks<'a>),
}

impl Forms<'_> {
    fn draw(&self, xi: &[f64], m: &[f64]) -> CbdDraw {
        match self {
            Forms::Finite(f) => f.draw(xi, m),
            Forms::Blocks(b) => b.draw(xi, m),
        }
    }
}

fn forms(set: &MatrixSetDescriptor) -> Result<Forms<'_>> {
    Ok(match set {
        MatrixSetDescriptor::Finite { matrices } => {
            let col_norms = matrices
                .iter()
                .map(|a| (0..a.cols()).map(|c| a.column(c).iter().map(|x| x * x).sum()).collect())
                .collect();
            Forms::Finite(FiniteForms { matrices, col_norms })
        }
        MatrixSetDescriptor::VThetaSphere { n, p } => {
            Forms::Blocks(Blocks { starts: (0..*n).map(|i| i * p).collect(), p: *p, sup: Sup::Sphere })
        }
        MatrixSetDescriptor::VThetaSparse { n, p, s } => {
            guard_supports(*p, *s)?;
            Forms::Blocks(Blocks { starts: (0..*n).map(|i| i * p).collect(), p: *p, sup: Sup::Sparse(*s) })
        }
        MatrixSetDescriptor::VThetaPoints { n, thetas } => {
            let p = thetas[0].len();
            Forms::Blocks(Blocks { starts: (0..*n).map(|i| i * p).collect(), p, sup: Sup::Points(thetas) })
        }
        MatrixSetDescriptor::ToeplitzBand { p, s, rows } => {
            guard_supports(*p, *s)?;
            Forms::Blocks(Blocks { starts: rows.clone(), p: *p, sup: Sup::Sparse(*s) })
        }
        MatrixSetDescriptor::Explicit { .. } => {
            return Err(Error::Unsupported(
                "supremum of a centred quadratic form over a convex hull is not tractable".into(),
            ))
        }
    })
}

fn guard_supports(p: usize, s: usize) -> Result<()> {
    let count = binomial(p, s);
    if count > SUPPORT_GUARD {
        return Err(Error::GuardExceeded { what: "supports C(p, s)", value: count, limit: SUPPORT_GUARD });
    }
    Ok(())
}

/// Samples of C = sup|‖Aξ‖² − E‖Aξ‖²|, B = sup|Σ_{j≠k} ξ_jξ_k⟨A_j, A_k⟩| and
/// D = sup|Σ_j (ξ_j² − Eξ_j²)‖A_j‖²|, with the pointwise check C ≤ B + D.
///
/// Suprema are exact: finite sets are scanned, V_θ families reduce to
/// extreme eigenvalues of p × p matrices (or of every s × s principal
/// submatrix for sparse index sets).
pub fn estimate_cbd<E: Executor>(
    set: &MatrixSetDescriptor,
    config: &ProcessConfig,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    set.validate()?;
    config.validate()?;
    min_trials(trials)?;
    let (_, cols) = set.dims();
    if cols != config.n {
        return Err(Error::DimensionMismatch { expected: cols, found: config.n });
    }
    let forms = forms(set)?;
    let n = config.n;
    let (moments, source) = match config.constant_second_moment() {
        Some(m) => (vec![m; n], alloc::string::String::from("closed form")),
        None => {
            let batch = MOMENT_BATCH_FACTOR * trials;
            let mseed = derive_seed(seed, tags::MOMENTS);
            let m = batch_mean(exec, batch, n, |i| {
                sample_unchecked(config, mseed, i as u64, false).xi.iter().map(|x| x * x).collect()
            });
            (m, format!("independent batch of {batch} paths"))
        }
    };
    let draws: Vec<CbdDraw> =
        exec.map(trials, |t| forms.draw(&sample_unchecked(config, seed, t as u64, false).xi, &moments));
    let c: Vec<f64> = draws.iter().map(|d| d.c).collect();
    let b: Vec<f64> = draws.iter().map(|d| d.b).collect();
    let d: Vec<f64> = draws.iter().map(|d| d.d).collect();
    let violations = draws.iter().filter(|x| x.c > x.b + x.d + 1e-9 * (1.0 + x.b + x.d)).count();

    let mut report = TrialReport::new("cbd", trials, seed);
    report.param("second_moments", source);
    report.param("supremum", "exact");
    report.push_series(Series::new("C", c));
    report.push_series(Series::new("B", b));
    report.push_series(Series::new("D", d));
    report.push_check(Check::at_most("pointwise C <= B + D violations", violations as f64, 0.0));
    Ok(report)
}

/// Estimates E[ξ_jξ_k] for every pair j < k; each must be within 4 SE of 0.
pub fn check_offdiag_zero<E: Executor>(config: &ProcessConfig, trials: usize, seed: u64, exec: &E) -> Result<TrialReport> {
    config.validate()?;
    min_trials(trials)?;
    let n = config.n;
    if n < 2 {
        return Err(invalid("off-diagonal check needs n >= 2"));
    }
    let products: Vec<Vec<f64>> = exec.map(trials, |t| {
        let xi = sample_unchecked(config, seed, t as u64, false).xi;
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for j in 0..n {
            for k in (j + 1)..n {
                out.push(xi[j] * xi[k]);
            }
        }
        out
    });
    let mut report = TrialReport::new("offdiag", trials, seed);
    report.param("tolerance_se", 4);
    let mut idx = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            let col: Vec<f64> = products.iter().map(|v| v[idx]).collect();
            let name = format!("xi{}*xi{}", j + 1, k + 1);
            report.push_series(Series::summary_only(&name, &col));
            report.push_check(Check::near_zero(&name, &col, 4.0));
            idx += 1;
        }
    }
    Ok(report)
}

fn validate_bset(bset: &[Matrix], n: usize) -> Result<()> {
    if bset.is_empty() {
        return Err(Error::EmptySet("matrix set B"));
    }
    for b in bset {
        if b.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
        }
        if !b.is_symmetric(1e-12) {
            return Err(invalid("decoupling matrices must be symmetric"));
        }
        if (0..n).any(|i| b[(i, i)] != 0.0) {
            return Err(invalid("decoupling matrices must have a zero diagonal"));
        }
    }
    Ok(())
}

fn bilinear(b: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        s += xj * crate::linalg::dot(b.row(j), y);
    }
    s
}

/// Decoupling: E sup_B h(Σ_{j≠k} ξ_jξ_k B_jk) ≤ 4·E sup_B h(Σ_{j,k} ξ_jξ'_k B_jk),
/// judged on paired per-trial differences within 3 SE.
pub fn check_decoupling<E: Executor>(
    config: &ProcessConfig,
    bset: &[Matrix],
    p_norm: u32,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    let h = HNorm::from_p(p_norm)?;
    config.validate()?;
    tangent_supported(config)?;
    validate_bset(bset, config.n)?;
    min_trials(trials)?;
    with_escalation(trials, |trials| {
        let pairs: Vec<(f64, f64)> = exec.map(trials, |t| {
            let path = sample_unchecked(config, seed, t as u64, true);
            let tangent = path.tangent.as_deref().expect("requested");
            let mut lhs: f64 = 0.0;
            let mut rhs: f64 = 0.0;
            for b in bset {
                lhs = lhs.max(h.apply(bilinear(b, &path.xi, &path.xi)));
                rhs = rhs.max(h.apply(bilinear(b, &path.xi, tangent)));
            }
            (lhs, rhs)
        });
        let lhs: Vec<f64> = pairs.iter().map(|x| x.0).collect();
        let rhs: Vec<f64> = pairs.iter().map(|x| x.1).collect();
        let diff: Vec<f64> = pairs.iter().map(|x| x.0 - 4.0 * x.1).collect();
        let mut report = TrialReport::new("decoupling", trials, seed);
        report.param("p_norm", h.p());
        report.param("matrices", bset.len());
        report.push_series(Series::new("lhs", lhs));
        report.push_series(Series::new("rhs", rhs));
        report.push_check(Check::at_most_zero("lhs - 4 rhs", &diff, 3.0));
        report.push_series(Series::new("lhs - 4 rhs", diff));
        Ok(report)
    })
}

/// Rejects masks whose row support meets their column support: those are
/// not supported on a product I × Iᶜ.
fn validate_mask(mask: &Matrix, n: usize) -> Result<()> {
    if mask.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: mask.rows() });
    }
    for j in 0..n {
        let row_used = (0..n).any(|k| mask[(j, k)] != 0.0);
        let col_used = (0..n).any(|k| mask[(k, j)] != 0.0);
        if row_used && col_used {
            return Err(invalid(format!(
                "mask is not supported on I x I^c: index {} appears as both row and column, \
                 and for such masks the two forms need not share a law",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Two-sample KS test between X = Σ ξ_jξ_k B_jk and X' = Σ ξ_jξ'_k B_jk for
/// a mask supported on I × Iᶜ; the two sides use independent paths.
pub fn check_tangent_equivalence<E: Executor>(
    config: &ProcessConfig,
    mask: &Matrix,
    samples: usize,
    seed: u64,
    exec: &E,
) -> Result<TrialReport> {
    config.validate()?;
    tangent_supported(config)?;
    validate_mask(mask, config.n)?;
    min_trials(samples)?;
    let x: Vec<f64> = exec.map(samples, |t| {
        let xi = sample_unchecked(config, seed, t as u64, false).xi;
        bilinear(mask, &xi, &xi)
    });
    let second = derive_seed(seed, tags::SECOND_SIDE);
    let xp: Vec<f64> = exec.map(samples, |t| {
        let path = sample_unchecked(config, second, t as u64, true);
        bilinear(mask, &path.xi, path.tangent.as_deref().expect("requested"))
    });
    let ks = ks_two_sample(&x, &xp);
    let mut report = TrialReport::new("tangent", samples, seed);
    report.param("ks_statistic", ks.statistic);
    report.param("significance", 0.01);
    report.push_series(Series::new("X", x));
    report.push_series(Series::new("X'", xp));
    report.push_check(Check::at_least("ks p-value", ks.p_value, 0.01));
    Ok(report)
}

