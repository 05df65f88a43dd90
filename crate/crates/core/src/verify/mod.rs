//! Monte-Carlo checks of the quantities and inequalities behind the
//! deviation bounds.
//!
//! Every harness draws trial `t` from stream `(seed, t)` and aggregates the
//! index-ordered results with pairwise summation, so reports are identical
//! for any [`Executor`](crate::Executor).

mod bandit;
mod quadratic;
mod report;
mod sketch;
mod symmetrization;

pub use bandit::{
    max_normal_variance,
    bandit_min_eig_experiment, selection_mean, Adversary, BanditConfig, BanditHistory, BanditReport,
    BuiltinAdversary,
};
pub use quadratic::{
    check_decoupling, check_offdiag_zero, check_tangent_equivalence, estimate_cbd, CbdDraw, HNorm,
};
pub use report::{with_escalation, Check, Series, TrialReport, Verdict};
pub use sketch::{
    jl_distortion, max_distortion, rip_constant, rip_scaling, DistortionStats, RipEstimate, RipMode,
    RipScaling, SketchSpec,
};
pub use symmetrization::{check_contraction, check_symmetrization, ScalarMap};

use alloc::vec;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::stats::pairwise_sum;

/// Trials per chunk in batch averages.
const CHUNK: usize = 1024;

/// Mean of `f(i)` over `i < count`, coordinate-wise. Sums are formed per
/// fixed-size chunk and combined pairwise, independent of scheduling.
pub(crate) fn batch_mean<E, F>(exec: &E, count: usize, len: usize, f: F) -> Vec<f64>
where
    E: Executor,
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK);
    let sums: Vec<Vec<f64>> = exec.map(chunks, |c| {
        let mut acc = vec![0.0; len];
        for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
            for (a, v) in acc.iter_mut().zip(f(i)) {
                *a += v;
            }
        }
        acc
    });
    (0..len)
        .map(|j| {
            let col: Vec<f64> = sums.iter().map(|s| s[j]).collect();
            pairwise_sum(&col) / count as f64
        })
        .collect()
}

pub(crate) fn min_trials(trials: usize) -> crate::Result<()> {
    if trials < 2 {
        return Err(crate::error::invalid("at least 2 trials are needed for a standard error"));
    }
    Ok(())
}
