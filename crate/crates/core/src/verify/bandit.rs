//! Smoothed linear contextual bandit with a greedy least-squares learner.
//!
//! Each round the adversary proposes k contexts μ_t^i in the unit ball, the
//! environment adds g_t^i ~ N(0, σ²I), and the learner picks the arm
//! maximising ⟨θ̂, x_t^i⟩. The centred row ξ_t = x_t − E[x_t | past, μ_t]
//! feeds G_t = Σ ξ_sξ_sᵀ, whose smallest eigenvalue should grow linearly.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::report::{Check, Series, TrialReport, Verdict};
use crate::complexity::{sample_size, SampleSizeKind};
use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::linalg::{cholesky, dot, eigen_range, norm2, spd_solve, Matrix};
use crate::rng::{derive_seed, stream, tags};
use crate::stats::{mean, normal_cdf, normal_pdf, ols_slope};

/// Simpson grid for the selection integrals: [−7, 7] in 256 panels.
const GRID_HALF_WIDTH: f64 = 7.0;
const GRID_PANELS: usize = 256;

/// Required fraction of runs meeting the eigenvalue condition.
pub const PASS_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub p: usize,
    pub k: usize,
    pub sigma: f64,
    pub horizon: usize,
    pub eps: f64,
    pub runs: usize,
    /// Pilot runs used to estimate κ̂.
    pub pilot_runs: usize,
    /// Round at which κ̂ = λ_min(E G_t) / t is read off.
    pub reference_t: usize,
    /// Constant in the bandit sample size ⌈C ε⁻² κ̂⁻² p⌉.
    pub c_sample: f64,
    pub noise_sd: f64,
    pub ridge: f64,
}

impl BanditConfig {
    pub fn new(p: usize, k: usize, sigma: f64, horizon: usize) -> Self {
        BanditConfig {
            p,
            k,
            sigma,
            horizon,
            eps: 0.5,
            runs: 50,
            pilot_runs: 50,
            reference_t: horizon,
            c_sample: 0.25,
            noise_sd: 0.1,
            ridge: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(invalid("sigma must be positive"));
        }
        if self.k < 2 {
            return Err(invalid("the bandit needs k >= 2 arms"));
        }
        if self.p == 0 || self.horizon == 0 || self.runs == 0 || self.pilot_runs == 0 {
            return Err(invalid("p, horizon, runs and pilot_runs must be positive"));
        }
        if self.reference_t == 0 || self.reference_t > self.horizon {
            return Err(invalid(format!("reference_t must lie in 1..={}", self.horizon)));
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
        if !(self.c_sample > 0.0) || !(self.ridge > 0.0) || !(self.noise_sd >= 0.0) {
            return Err(invalid("c_sample and ridge must be positive, noise_sd non-negative"));
        }
        Ok(())
    }
}

/// What the adversary sees before round `t` (1-based).
#[derive(Debug, Clone)]
pub struct BanditHistory {
    pub t: usize,
    pub theta_hat: Vec<f64>,
    /// Contexts picked in rounds 1..t.
    pub chosen: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

/// Maps a history to k contexts. Outputs are projected onto the unit ball.
pub trait Adversary: Sync {
    fn contexts(&self, history: &BanditHistory, out: &mut [Vec<f64>]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinAdversary {
    /// μ = 0.
    Zero,
    /// Every arm, every round: e₁.
    Repeater,
    /// Arm i in round t: e_{(t+i) mod p}.
    Rotating,
    /// Arm i: (1 − i/k)·(−θ̂/‖θ̂‖), spacing arms along the learner's direction.
    AntiGreedy,
}

impl core::str::FromStr for BuiltinAdversary {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "zero" => BuiltinAdversary::Zero,
            "repeater" => BuiltinAdversary::Repeater,
            "rotating" => BuiltinAdversary::Rotating,
            "anti-greedy" | "antigreedy" | "adaptive" => BuiltinAdversary::AntiGreedy,
            other => return Err(crate::Error::InvalidParameter(format!("unknown adversary '{other}'"))),
        })
    }
}

impl Adversary for BuiltinAdversary {
    fn contexts(&self, history: &BanditHistory, out: &mut [Vec<f64>]) {
        let k = out.len();
        for (i, mu) in out.iter_mut().enumerate() {
            mu.iter_mut().for_each(|v| *v = 0.0);
            let p = mu.len();
            match self {
                BuiltinAdversary::Zero => {}
                BuiltinAdversary::Repeater => mu[0] = 1.0,
                BuiltinAdversary::Rotating => mu[(history.t + i) % p] = 1.0,
                BuiltinAdversary::AntiGreedy => {
                    let c = norm2(&history.theta_hat);
                    if c > 0.0 {
                        let scale = -(1.0 - i as f64 / k as f64) / c;
                        for (m, th) in mu.iter_mut().zip(&history.theta_hat) {
                            *m = scale * th;
                        }
                    }
                }
            }
        }
    }
}

fn project_unit_ball(v: &mut [f64]) {
    let n = norm2(v);
    if n > 1.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn simpson2(f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let h = 2.0 * GRID_HALF_WIDTH / GRID_PANELS as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..=GRID_PANELS {
        let w = if j == 0 || j == GRID_PANELS {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (x, y) = f(-GRID_HALF_WIDTH + j as f64 * h);
        a += w * x;
        b += w * y;
    }
    (a * h / 3.0, b * h / 3.0)
}

fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * GRID_HALF_WIDTH / GRID_PANELS as f64;
    let mut acc = f(-GRID_HALF_WIDTH) + f(GRID_HALF_WIDTH);
    for j in 1..GRID_PANELS {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-GRID_HALF_WIDTH + j as f64 * h);
    }
    acc * h / 3.0
}

/// Law of the greedy pick among scores a_i + c·σ·z_i, z_i iid N(0,1).
///
/// Returns the selection probabilities π_i = ∫φ(t)Π_{j≠i}Φ(Δ_ij + t)dt and
/// m = Σ_i ∫tφ(t)Π_{j≠i}Φ(Δ_ij + t)dt = E[z_selected], Δ_ij = (a_i − a_j)/(cσ).
/// With c = 0 the first arm is taken deterministically.
pub fn selection_mean(a: &[f64], c: f64, sigma: f64) -> (Vec<f64>, f64) {
    let k = a.len();
    if c <= 0.0 {
        let mut probs = vec![0.0; k];
        if k > 0 {
            probs[0] = 1.0;
        }
        return (probs, 0.0);
    }
    let scale = c * sigma;
    let mut probs = Vec::with_capacity(k);
    let mut m = 0.0;
    for i in 0..k {
        // Both integrands share φ(t)·Π_j Φ(Δ_ij + t); one Simpson pass.
        let (pi, mi) = simpson2(|t| {
            let w = normal_pdf(t)
                * (0..k).filter(|&j| j != i).map(|j| normal_cdf((a[i] - a[j]) / scale + t)).product::<f64>();
            (w, t * w)
        });
        probs.push(pi);
        m += mi;
    }
    (probs, m)
}

/// Var(max of k iid N(0,1)), by the same quadrature.
pub fn max_normal_variance(k: usize) -> f64 {
    let kf = k as f64;
    let dens = |t: f64| kf * normal_pdf(t) * libm::pow(normal_cdf(t), kf - 1.0);
    let m1 = simpson(|t| t * dens(t));
    let m2 = simpson(|t| t * t * dens(t));
    m2 - m1 * m1
}

/// What a main run records.
struct Tracking<'a> {
    checkpoints: &'a [usize],
    t_min: usize,
    /// Required growth rate κ̂(1 − ε).
    rate: f64,
}

struct RunOutput {
    /// λ_min(G_t) at the checkpoints (empty for pilot runs).
    lambda_min: Vec<f64>,
    /// λ_min(G_t) ≥ t·rate held for every t ≥ t_min.
    held: bool,
    /// G at the reference round.
    reference_gram: Matrix,
}

/// Unit-norm θ*, shared by every run of one experiment.
fn draw_theta_star(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(derive_seed(seed, tags::THETA), 0);
    let mut theta: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let norm = norm2(&theta);
    theta.iter_mut().for_each(|v| *v /= norm);
    theta
}

fn simulate<A: Adversary + ?Sized>(
    cfg: &BanditConfig,
    adversary: &A,
    theta_star: &[f64],
    seed: u64,
    run: u64,
    horizon: usize,
    track: Option<&Tracking<'_>>,
) -> Result<RunOutput> {
    let (p, k) = (cfg.p, cfg.k);
    let mut rng = stream(seed, run);
    let mut ridge_a = Matrix::identity(p).scaled(cfg.ridge);
    let mut ridge_b = vec![0.0; p];
    let mut gram = Matrix::zeros(p, p);
    let mut reference_gram = Matrix::zeros(p, p);
    let mut history = BanditHistory { t: 1, theta_hat: vec![0.0; p], chosen: Vec::new(), rewards: Vec::new() };
    let mut mus = vec![vec![0.0; p]; k];
    let mut lambda_min = Vec::new();
    let mut held = true;
    let mut next_checkpoint = 0;

    for t in 1..=horizon {
        history.t = t;
        adversary.contexts(&history, &mut mus);
        mus.iter_mut().for_each(|m| project_unit_ball(m));

        let theta_hat = &history.theta_hat;
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        let mut xs = Vec::with_capacity(k);
        for (i, mu) in mus.iter().enumerate() {
            let x: Vec<f64> = mu.iter().map(|m| m + cfg.sigma * rng.sample::<f64, _>(StandardNormal)).collect();
            let score = dot(theta_hat, &x);
            if score > best_score {
                best_score = score;
                best = i;
            }
            xs.push(x);
        }
        let x = &xs[best];

        // E[x | past, μ] = Σ π_i μ_i + σ·m·u, u = θ̂/‖θ̂‖.
        let c = norm2(theta_hat);
        let a: Vec<f64> = mus.iter().map(|mu| dot(theta_hat, mu)).collect();
        let (probs, m) = selection_mean(&a, c, cfg.sigma);
        let mut center = vec![0.0; p];
        for (pi, mu) in probs.iter().zip(&mus) {
            for (cj, mj) in center.iter_mut().zip(mu) {
                *cj += pi * mj;
            }
        }
        if c > 0.0 {
            for (cj, th) in center.iter_mut().zip(theta_hat) {
                *cj += cfg.sigma * m * th / c;
            }
        }
        let xi: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
        for r in 0..p {
            for s in 0..p {
                gram[(r, s)] += xi[r] * xi[s];
            }
        }
        if t == cfg.reference_t {
            reference_gram = gram.clone();
        }
        match track {
            Some(tr) => {
                if tr.checkpoints.get(next_checkpoint) == Some(&t) {
                    lambda_min.push(eigen_range(&gram)?.0);
                    next_checkpoint += 1;
                }
                if held && t >= tr.t_min {
                    held = exceeds(&gram, t as f64 * tr.rate);
                }
            }
            None if t >= cfg.reference_t => break,
            None => {}
        }

        let noise: f64 = rng.sample(StandardNormal);
        let y = dot(theta_star, x) + cfg.noise_sd * noise;
        for r in 0..p {
            ridge_b[r] += x[r] * y;
            for s in 0..p {
                ridge_a[(r, s)] += x[r] * x[s];
            }
        }
        history.theta_hat = spd_solve(&ridge_a, &ridge_b)?;
        history.chosen.push(x.clone());
        history.rewards.push(y);
    }
    Ok(RunOutput { lambda_min, held, reference_gram })
}

/// λ_min(g) ≥ level, via a Cholesky attempt on g − level·I.
fn exceeds(g: &Matrix, level: f64) -> bool {
    if level <= 0.0 {
        return true;
    }
    let p = g.rows();
    let shifted = Matrix::from_fn(p, p, |r, c| g[(r, c)] - if r == c { level } else { 0.0 });
    cholesky(&shifted).is_ok()
}

/// Every round up to 20p, then about 400 evenly spaced rounds, plus
/// `t_min` and the horizon.
fn checkpoints(p: usize, t_min: usize, horizon: usize) -> Vec<usize> {
    let dense = (20 * p).min(horizon);
    let stride = horizon.div_ceil(400).max(1);
    let mut ts: Vec<usize> = (1..=dense).collect();
    ts.extend((dense + 1..=horizon).filter(|t| t % stride == 0));
    ts.push(horizon);
    if t_min <= horizon {
        ts.push(t_min);
    }
    ts.sort_unstable();
    ts.dedup();
    ts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditReport {
    pub report: TrialReport,
    pub kappa_hat: f64,
    pub t_min: usize,
    pub horizon: usize,
    pub pass_fraction: f64,
    /// Slope of the run-averaged λ_min(G_t) over t ∈ [p, 20p] (clipped to the horizon).
    pub early_slope: f64,
    /// Rounds at which λ_min(G_t) was recorded.
    pub checkpoints: Vec<usize>,
    /// λ_min(G_t) at `checkpoints`, per run.
    pub trajectories: Vec<Vec<f64>>,
}

/// Runs the experiment; if the bandit sample size exceeds the horizon the
/// horizon is raised to 4T once, after which the verdict is inconclusive.
pub fn bandit_min_eig_experiment<A: Adversary + ?Sized, E: Executor>(
    cfg: &BanditConfig,
    adversary: &A,
    seed: u64,
    exec: &E,
) -> Result<BanditReport> {
    cfg.validate()?;
    let p = cfg.p;
    let theta_star = draw_theta_star(p, seed);
    let pilot_seed = derive_seed(seed, tags::MOMENTS);
    let pilots: Vec<Result<RunOutput>> = exec.map(cfg.pilot_runs, |r| {
        simulate(cfg, adversary, &theta_star, pilot_seed, r as u64, cfg.reference_t, None)
    });
    let pilots = pilots.into_iter().collect::<Result<Vec<_>>>()?;
    let mean_gram = Matrix::from_fn(p, p, |r, s| {
        let vals: Vec<f64> = pilots.iter().map(|g| g.reference_gram[(r, s)]).collect();
        mean(&vals)
    });
    let kappa_hat = eigen_range(&mean_gram)?.0 / cfg.reference_t as f64;
    if !(kappa_hat > 0.0) {
        return Err(invalid(format!("estimated kappa {kappa_hat} is not positive")));
    }
    let t_min = if cfg.eps >= 1.0 {
        1
    } else {
        sample_size(SampleSizeKind::Bandit { eps: cfg.eps, kappa: kappa_hat, p }, cfg.c_sample)?
    };
    let mut horizon = cfg.horizon;
    let mut escalated = false;
    if t_min > horizon {
        horizon *= 4;
        escalated = true;
    }
    let reachable = t_min <= horizon;
    let rate = kappa_hat * (1.0 - cfg.eps);
    let checkpoints = if reachable { checkpoints(p, t_min, horizon) } else { Vec::new() };
    let tracking = Tracking { checkpoints: &checkpoints, t_min, rate };

    let runs: Vec<Result<RunOutput>> = if reachable {
        exec.map(cfg.runs, |r| simulate(cfg, adversary, &theta_star, seed, r as u64, horizon, Some(&tracking)))
    } else {
        Vec::new()
    };
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = runs.iter().filter(|run| run.held).count();
    let pass_fraction = if runs.is_empty() { 0.0 } else { ok as f64 / runs.len() as f64 };
    let min_ratio: Vec<f64> = runs
        .iter()
        .map(|run| {
            checkpoints
                .iter()
                .zip(&run.lambda_min)
                .filter(|(&t, _)| t >= t_min)
                .map(|(&t, l)| l / (t as f64 * kappa_hat))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let hi = (20 * p).min(horizon);
    let early_slope = if runs.is_empty() || hi <= p {
        f64::NAN
    } else {
        // Checkpoints are dense on 1..=20p, so index t−1 is round t.
        let ts: Vec<f64> = (p..=hi).map(|t| t as f64).collect();
        let ys: Vec<f64> = (p..=hi)
            .map(|t| mean(&runs.iter().map(|r| r.lambda_min[t - 1]).collect::<Vec<_>>()))
            .collect();
        ols_slope(&ts, &ys)
    };

    let mut report = TrialReport::new("bandit", cfg.runs, seed);
    report.param("p", p);
    report.param("k", cfg.k);
    report.param("sigma", cfg.sigma);
    report.param("eps", cfg.eps);
    report.param("kappa_hat", kappa_hat);
    report.param("t_min", t_min);
    report.param("horizon", horizon);
    report.param("reference_t", cfg.reference_t);
    report.escalated = escalated;
    if reachable {
        report.push_series(Series::new("min lambda_min / (t kappa_hat) at checkpoints", min_ratio));
        report.push_check(Check::at_least("fraction of runs meeting the bound", pass_fraction, PASS_FRACTION));
    } else {
        let name: String = format!("sample size {t_min} exceeds escalated horizon {horizon}");
        report.push_check(Check::inconclusive(&name, t_min as f64, horizon as f64));
    }
    debug_assert!(reachable || report.verdict == Verdict::Inconclusive);
    Ok(BanditReport {
        report,
        kappa_hat,
        t_min,
        horizon,
        pass_fraction,
        early_slope,
        checkpoints,
        trajectories: runs.into_iter().map(|r| r.lambda_min).collect(),
    })
}
