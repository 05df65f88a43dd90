use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::stats::{self, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The error band straddles the threshold: the inequality holds within
    /// tolerance but not with confidence.
    Inconclusive,
}

impl Verdict {
    /// Fail dominates Inconclusive, which dominates Pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One tested claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Point estimate of the tested quantity.
    pub statistic: f64,
    pub std_error: f64,
    /// Pass/fail boundary for `statistic` (or the significance level for
    /// tests reporting a p-value).
    pub threshold: f64,
    /// Multiplier of `std_error` used as tolerance.
    pub tolerance_se: f64,
    pub verdict: Verdict,
}

impl Check {
    /// Claim E[d] ≤ 0 from paired per-trial differences `d`.
    ///
    /// Pass when the whole band mean ± k·SE lies at or below zero, fail when
    /// it lies strictly above, inconclusive otherwise.
    pub fn at_most_zero(name: &str, diffs: &[f64], k: f64) -> Check {
        let m = stats::mean(diffs);
        let se = stats::std_error(diffs);
        let verdict = if m + k * se <= 0.0 {
            Verdict::Pass
        } else if m - k * se > 0.0 {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        Check { name: name.to_string(), statistic: m, std_error: se, threshold: 0.0, tolerance_se: k, verdict }
    }

    /// Claim E[x] = 0: pass iff |mean| ≤ k·SE.
    pub fn near_zero(name: &str, xs: &[f64], k: f64) -> Check {
        let m = stats::mean(xs);
        let se = stats::std_error(xs);
        let verdict = if m.abs() <= k * se { Verdict::Pass } else { Verdict::Fail };
        Check { name: name.to_string(), statistic: m, std_error: se, threshold: 0.0, tolerance_se: k, verdict }
    }

    /// Pass iff `value >= level`.
    pub fn at_least(name: &str, value: f64, level: f64) -> Check {
        let verdict = if value >= level { Verdict::Pass } else { Verdict::Fail };
        Check { name: name.to_string(), statistic: value, std_error: 0.0, threshold: level, tolerance_se: 0.0, verdict }
    }

    /// Pass iff `value <= level`.
    pub fn at_most(name: &str, value: f64, level: f64) -> Check {
        let verdict = if value <= level { Verdict::Pass } else { Verdict::Fail };
        Check { name: name.to_string(), statistic: value, std_error: 0.0, threshold: level, tolerance_se: 0.0, verdict }
    }

    pub fn inconclusive(name: &str, value: f64, level: f64) -> Check {
        Check {
            name: name.to_string(),
            statistic: value,
            std_error: 0.0,
            threshold: level,
            tolerance_se: 0.0,
            verdict: Verdict::Inconclusive,
        }
    }
}

/// A named per-trial quantity. `samples` may be empty when only the summary
/// is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub summary: Summary,
    pub samples: Vec<f64>,
}

impl Series {
    pub fn new(name: &str, samples: Vec<f64>) -> Series {
        Series { name: name.to_string(), summary: Summary::of(&samples), samples }
    }

    pub fn summary_only(name: &str, samples: &[f64]) -> Series {
        Series { name: name.to_string(), summary: Summary::of(samples), samples: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub quantity: String,
    pub trials: usize,
    pub seed: u64,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    /// Set when an inconclusive first pass was rerun with 4× the trials.
    pub escalated: bool,
    pub parameters: BTreeMap<String, String>,
}

impl TrialReport {
    pub fn new(quantity: &str, trials: usize, seed: u64) -> Self {
        TrialReport {
            quantity: quantity.to_string(),
            trials,
            seed,
            series: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Pass,
            escalated: false,
            parameters: BTreeMap::new(),
        }
    }

    pub fn push_check(&mut self, check: Check) {
        self.verdict = self.verdict.combine(check.verdict);
        self.checks.push(check);
    }

    pub fn push_series(&mut self, series: Series) {
        self.series.push(series);
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// No check failed. Inconclusive checks hold within their tolerance.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Runs `f(trials)`; if the verdict is inconclusive, reruns once with 4×
/// the trials and flags the report.
pub fn with_escalation<F>(trials: usize, mut f: F) -> crate::Result<TrialReport>
where
    F: FnMut(usize) -> crate::Result<TrialReport>,
{
    let first = f(trials)?;
    if first.verdict != Verdict::Inconclusive {
        return Ok(first);
    }
    let mut second = f(trials * 4)?;
    second.escalated = true;
    Ok(second)
}
